//! Fixtures shared by the acceptance suite.

use bicons::classify::{biconservative_residual, biharmonic_residual, class_a_residual, e0_from};
use bicons::exprlang::{BinOp, Expr, Pos};
use bicons::extrinsic::{normal_derivative_h, second_fundamental};
use bicons::immersion::{analyze_point, Chart};
use bicons::jets::UnaryFn;
use bicons::scene::Scene;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn scene(v: Value) -> Scene {
    Scene::from_json(&v.to_string()).expect("scene")
}

/// Every gallery construction as a scene, for both signs of the curvature.
pub fn gallery_scenes() -> Vec<(String, Value)> {
    let mut out = Vec::new();
    for eps in [1, -1] {
        let a = if eps == 1 { 0.8 } else { 1.2 };
        let profile = if eps == 1 {
            json!(["cos(0.6*s)", "sin(0.6*s)", "s"])
        } else {
            json!(["cosh(0.6*s)", "sinh(0.6*s)", "s"])
        };
        let specs = [
            ("slice", 4, json!({"kind": "slice", "t0": 0.3})),
            (
                "cylinder_geodesic",
                4,
                json!({"kind": "vertical_cylinder", "curve": {"type": "geodesic"}}),
            ),
            (
                "cylinder_circle",
                4,
                json!({"kind": "vertical_cylinder", "curve": {"type": "circle", "r": 0.7}}),
            ),
            (
                "theorem1_cylinder",
                4,
                json!({"kind": "theorem1", "a": a, "phi": {"type": "geodesic_cylinder"}}),
            ),
            (
                "theorem1_helicoid",
                4,
                json!({"kind": "theorem1", "a": a, "phi": {"type": "helicoid", "pitch": 0.5}}),
            ),
            (
                "partial_tube",
                3,
                json!({"kind": "partial_tube", "base": {"type": "geodesic"},
                "normals": [[0.0, 0.0, 1.0, 0.0]], "profile": profile, "s_domain": [-1.0, 1.0]}),
            ),
            ("cmc_product", 4, json!({"kind": "cmc_product", "r": 0.7})),
        ];
        for (name, n, g) in specs {
            out.push((
                format!("{name} eps={eps:+}"),
                json!({"ambient": {"epsilon": eps, "n": n}, "immersion": {"gallery": g}}),
            ));
        }
    }
    out
}

/// Classifier outputs that must not depend on the normal-frame gauge.
pub fn classifier_values(chart: &Chart, u: &[f64]) -> Vec<f64> {
    let pg = analyze_point(chart, u).unwrap();
    let ed = second_fundamental(&pg);
    let b = biconservative_residual(chart, u).unwrap();
    let h = biharmonic_residual(chart, u, true).unwrap();
    let mut v = vec![
        b.simple,
        b.full,
        class_a_residual(&pg, &ed).residual,
        h.normal,
        h.signed,
        h.predicate.unwrap_or(0.0),
    ];
    v.extend(
        normal_derivative_h(chart, u)
            .unwrap()
            .iter()
            .map(|w| w.norm()),
    );
    if chart.codim() == 2 && ed.h_norm > 1e-9 {
        let e = e0_from(&pg, &ed).unwrap();
        v.extend([e.aht, e.aetat, e.offblock, e.trace_bs1, e.a33]);
    }
    v
}

/// Random well-formed expression tree of bounded depth.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return if rng.gen_bool(0.5) {
            Expr::Num(if rng.gen_bool(0.5) {
                rng.gen_range(0..100) as f64
            } else {
                rng.gen_range(0.0..10.0)
            })
        } else {
            let names = ["u1", "u2", "s", "a", "b", "pi", "e"];
            Expr::Ident {
                name: names[rng.gen_range(0..names.len())].into(),
                pos: Pos(0),
            }
        };
    }
    match rng.gen_range(0..3) {
        0 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
        1 => {
            let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];
            Expr::Binary {
                op: ops[rng.gen_range(0..ops.len())],
                lhs: Box::new(random_expr(rng, depth - 1)),
                rhs: Box::new(random_expr(rng, depth - 1)),
                pos: Pos(0),
            }
        }
        _ => Expr::Call {
            func: UnaryFn::NAMED[rng.gen_range(0..UnaryFn::NAMED.len())],
            arg: Box::new(random_expr(rng, depth - 1)),
            pos: Pos(0),
        },
    }
}
