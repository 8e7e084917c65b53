mod common;

use bicons::extrinsic::{structure_residuals, t_eta_residuals};
use bicons::runner::random_points;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-5;

fn direction(rng: &mut ChaCha8Rng, m: usize) -> DVector<f64> {
    let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    v.normalize()
}

#[test]
fn gauss_codazzi_ricci_and_t_eta_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (name, chart) in common::gallery_charts() {
        let m = chart.dim();
        let mut worst = [0.0f64; 5];
        for u in random_points(&chart, 200, 3) {
            let (x, y, z) = (
                direction(&mut rng, m),
                direction(&mut rng, m),
                direction(&mut rng, m),
            );
            let a = rng.gen_range(0..chart.codim());
            let r = structure_residuals(&chart, &u, &x, &y, &z, a)
                .unwrap_or_else(|e| panic!("{name} at {u:?}: {e}"));
            let te = t_eta_residuals(&chart, &u).unwrap();
            for (w, v) in worst.iter_mut().zip([
                r.gauss.norm(),
                r.codazzi.norm(),
                r.ricci.norm(),
                te.vt,
                te.veta,
            ]) {
                *w = w.max(v);
            }
        }
        println!("{name}: {worst:?}");
        assert!(
            worst.iter().all(|w| *w <= TOL),
            "{name}: gauss/codazzi/ricci/vT/veta = {worst:?}"
        );
    }
}
