use std::path::PathBuf;

use bicons::runner::{grid_points, run, RunOptions};
use bicons::scene::Scene;

const NAMES: [&str; 5] = [
    "theorem1_cylinder",
    "theorem1_cylinder_hyperbolic",
    "theorem1_helicoid",
    "slice",
    "cmc_product",
];

fn scene(kind: &str, name: &str) -> Scene {
    let p: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "tests",
        "scenes",
        kind,
        &format!("{name}.json"),
    ]
    .iter()
    .collect();
    Scene::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn expression_mirrors_reproduce_generator_jets() {
    for name in NAMES {
        let mirror = scene("mirrors", name).build_chart().unwrap();
        let gen = scene("gallery", name).build_chart().unwrap();
        for (x, y) in mirror.domain().iter().zip(gen.domain()) {
            assert!(
                (x.0 - y.0).abs() <= 1e-12 && (x.1 - y.1).abs() <= 1e-12,
                "{name}"
            );
        }
        for u in grid_points(&gen, &vec![3; gen.dim()]) {
            let a = mirror.evaluate_jet(&u).unwrap();
            let b = gen.evaluate_jet(&u).unwrap();
            for (k, (x, y)) in a.components().iter().zip(b.components()).enumerate() {
                let close = |p: f64, q: f64| (p - q).abs() <= 1e-12;
                assert!(close(x.value(), y.value()), "{name} coord {k} at {u:?}");
                assert!(
                    x.grad().iter().zip(y.grad()).all(|(p, q)| close(*p, *q)),
                    "{name} coord {k}"
                );
                assert!(
                    x.hess().iter().zip(y.hess()).all(|(p, q)| close(*p, *q)),
                    "{name} coord {k}"
                );
            }
        }
    }
}

#[test]
fn expression_mirrors_reach_the_same_verdicts() {
    for name in NAMES {
        let mirror = scene("mirrors", name);
        let mut gen = scene("gallery", name);
        gen.sampling = mirror.sampling.clone();
        gen.checks = mirror.checks.clone();
        let opts = RunOptions {
            jobs: 1,
            ..Default::default()
        };
        let a = run(&mirror, &opts).unwrap().report;
        let b = run(&gen, &opts).unwrap().report;
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.verdict, y.verdict, "{name} {}", x.name);
            assert!(
                (x.max_residual - y.max_residual).abs() <= 1e-8,
                "{name} {}",
                x.name
            );
        }
    }
}
