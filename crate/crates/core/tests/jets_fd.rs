use bicons::jets::{fd_gradient, Jet2, JetError, UnaryFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL: f64 = 1e-6;

/// x(u) = 1.2 + 0.3 u1 + 0.2 u1 u2 stays in [0.7, 1.7] on [-1, 1]^2.
fn inner(u: &[f64]) -> Result<Jet2, JetError> {
    let u1 = Jet2::var(0, u[0], 2)?;
    let u2 = Jet2::var(1, u[1], 2)?;
    Ok(u1
        .scale(0.3)
        .try_add(&u1.try_mul(&u2)?.scale(0.2))?
        .offset(1.2))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * b.abs().max(1.0)
}

#[test]
fn unary_jets_agree_with_finite_differences() {
    let mut fns = UnaryFn::NAMED.to_vec();
    fns.extend([
        UnaryFn::Neg,
        UnaryFn::PowConst(3.0),
        UnaryFn::PowConst(-2.0),
        UnaryFn::PowConst(0.5),
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for f in fns {
        let value =
            |u: &[f64]| -> Result<Vec<f64>, JetError> { Ok(vec![f.apply(&inner(u)?)?.value()]) };
        let grad =
            |u: &[f64]| -> Result<Vec<f64>, JetError> { Ok(f.apply(&inner(u)?)?.grad().to_vec()) };
        for _ in 0..100 {
            let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let jet = f.apply(&inner(&u).unwrap()).unwrap();
            for i in 0..2 {
                let d = fd_gradient(value, &u, i).unwrap()[0];
                assert!(
                    close(jet.grad()[i], d),
                    "{f:?} grad[{i}] at {u:?}: {} vs {d}",
                    jet.grad()[i]
                );
                let dg = fd_gradient(grad, &u, i).unwrap();
                for (k, d2) in dg.iter().enumerate() {
                    assert!(
                        close(jet.hess_at(k, i), *d2),
                        "{f:?} hess[{k},{i}] at {u:?}: {} vs {d2}",
                        jet.hess_at(k, i)
                    );
                }
            }
            assert_eq!(jet.hess_at(0, 1).to_bits(), jet.hess_at(1, 0).to_bits());
        }
    }
}
