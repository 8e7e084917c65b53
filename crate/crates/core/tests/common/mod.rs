#![allow(dead_code)]

use bicons::ambient::ProductSpace;
use bicons::gallery::GallerySpec;
use bicons::immersion::Chart;
use serde_json::json;

fn build(eps: i32, n: usize, spec: serde_json::Value) -> Chart {
    let spec: GallerySpec = serde_json::from_value(spec.clone()).expect("gallery spec");
    let space = ProductSpace::new(eps, n).unwrap();
    spec.build(space)
        .unwrap_or_else(|e| panic!("eps={eps} {spec:?}: {e}"))
}

fn partial_tube(eps: i32) -> serde_json::Value {
    let profile = if eps == 1 {
        ["cos(0.6*s)", "sin(0.6*s)", "s"]
    } else {
        ["cosh(0.6*s)", "sinh(0.6*s)", "s"]
    };
    json!({"kind": "partial_tube", "base": {"type": "geodesic"},
           "normals": [[0.0, 0.0, 1.0, 0.0]], "profile": profile, "s_domain": [-1.0, 1.0]})
}

/// Every gallery construction, for both signs of the curvature where defined.
pub fn gallery_charts() -> Vec<(String, Chart)> {
    let mut out = Vec::new();
    for eps in [1, -1] {
        let a = if eps == 1 { 0.8 } else { 1.2 };
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
            ("partial_tube", 3, partial_tube(eps)),
            ("cmc_product", 4, json!({"kind": "cmc_product", "r": 0.7})),
        ];
        for (name, n, spec) in specs {
            out.push((format!("{name} eps={eps:+}"), build(eps, n, spec)));
        }
    }
    out
}
