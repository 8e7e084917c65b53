//! Exact generators for the named constructions, with analytic jets.
//!
//! Every generator returns a [`Chart`] whose coordinates follow the canonical
//! layout: the quadric part first, the `R` factor last. For `ε = -1` the
//! timelike coordinate is index 0.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::ProductSpace;
use crate::exprlang::{self, Expr};
use crate::extrinsic::second_fundamental;
use crate::immersion::{analyze_point, Chart, ChartError, Generator};
use crate::jets::{Jet2, VecJet2};

pub const MINIMALITY_TOL: f64 = 1e-8;
pub const PARALLEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("minimality oracle failed: |H_phi| = {h:e} at u={u:?}")]
    NotMinimal { u: Vec<f64>, h: f64 },
    #[error("T_phi vanishes at u={u:?}")]
    VanishingT { u: Vec<f64> },
    #[error("constraint oracle failed: {0}")]
    Constraint(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveSpec {
    /// Unit-speed geodesic of a totally geodesic `Q^2_ε`.
    Geodesic,
    /// Geodesic circle of radius `r` in a totally geodesic `Q^2_ε`.
    Circle { r: f64 },
    /// `n+1` expressions in `u1` giving the `Q` coordinates.
    Expr {
        coords: Vec<String>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        domain: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhiSpec {
    GeodesicCylinder,
    Helicoid {
        pitch: f64,
    },
    /// Expressions in `u1, u2` (and `a`) for `(z0, z1, z2, t)` with `<z,z> = ε a^2`.
    Custom {
        coords: Vec<String>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        domain: [[f64; 2]; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GallerySpec {
    Slice {
        #[serde(default)]
        t0: f64,
    },
    VerticalCylinder {
        curve: CurveSpec,
    },
    Theorem1 {
        a: f64,
        phi: PhiSpec,
    },
    PartialTube {
        base: CurveSpec,
        #[serde(default)]
        normals: Vec<Vec<f64>>,
        profile: Vec<String>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        s_domain: [f64; 2],
    },
    CmcProduct {
        r: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
}

impl GallerySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GallerySpec::Slice { .. } => "slice",
            GallerySpec::VerticalCylinder { .. } => "vertical_cylinder",
            GallerySpec::Theorem1 { .. } => "theorem1",
            GallerySpec::PartialTube { .. } => "partial_tube",
            GallerySpec::CmcProduct { .. } => "cmc_product",
        }
    }

    /// Numeric parameters addressable by a scan.
    pub fn numeric_param(&self, name: &str) -> Option<f64> {
        match (self, name) {
            (GallerySpec::Slice { t0 }, "t0") => Some(*t0),
            (GallerySpec::Theorem1 { a, .. }, "a") => Some(*a),
            (GallerySpec::Theorem1 { a, .. }, "a2") => Some(a * a),
            (
                GallerySpec::Theorem1 {
                    phi: PhiSpec::Helicoid { pitch },
                    ..
                },
                "pitch",
            ) => Some(*pitch),
            (GallerySpec::CmcProduct { r, .. }, "r") => Some(*r),
            (
                GallerySpec::VerticalCylinder {
                    curve: CurveSpec::Circle { r },
                },
                "r",
            ) => Some(*r),
            _ => None,
        }
    }

    /// Sets a numeric parameter; `a2` sets `a = sqrt(a2)`.
    pub fn set_numeric_param(&mut self, name: &str, value: f64) -> bool {
        match (self, name) {
            (GallerySpec::Slice { t0 }, "t0") => *t0 = value,
            (GallerySpec::Theorem1 { a, .. }, "a") => *a = value,
            (GallerySpec::Theorem1 { a, .. }, "a2") => *a = value.sqrt(),
            (
                GallerySpec::Theorem1 {
                    phi: PhiSpec::Helicoid { pitch },
                    ..
                },
                "pitch",
            ) => *pitch = value,
            (GallerySpec::CmcProduct { r, .. }, "r") => *r = value,
            (
                GallerySpec::VerticalCylinder {
                    curve: CurveSpec::Circle { r },
                },
                "r",
            ) => *r = value,
            _ => return false,
        }
        true
    }

    pub fn build(&self, space: ProductSpace) -> Result<Chart, GalleryError> {
        match self {
            GallerySpec::Slice { t0 } => make_slice(space, *t0),
            GallerySpec::VerticalCylinder { curve } => make_vertical_cylinder(space, curve),
            GallerySpec::Theorem1 { a, phi } => make_theorem1(space, *a, phi),
            GallerySpec::PartialTube {
                base,
                normals,
                profile,
                params,
                s_domain,
            } => make_partial_tube(space, base, normals, profile, params, *s_domain),
            GallerySpec::CmcProduct { r, dim } => make_cmc_product(space, *r, *dim),
        }
    }
}

fn var_jets(u: &[f64]) -> Result<Vec<Jet2>, ChartError> {
    let m = u.len();
    (0..m)
        .map(|i| Jet2::var(i, u[i], m).map_err(ChartError::from))
        .collect()
}

/// `cos`/`sin` for `ε = 1`, `cosh`/`sinh` for `ε = -1`.
fn trig(eps: i32, x: &Jet2) -> (Jet2, Jet2) {
    if eps == 1 {
        (x.cos(), x.sin())
    } else {
        (x.cosh(), x.sinh())
    }
}

fn trig_f(eps: i32, x: f64) -> (f64, f64) {
    if eps == 1 {
        (x.cos(), x.sin())
    } else {
        (x.cosh(), x.sinh())
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn make_slice(space: ProductSpace, t0: f64) -> Result<Chart, GalleryError> {
    if !t0.is_finite() {
        return Err(GalleryError::Parameter("t0 must be finite".into()));
    }
    let eps = space.epsilon();
    let d = space.ambient_dim();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let z = Jet2::constant(0.0, 2);
        let mut c = vec![z.clone(); d];
        if eps == 1 {
            let (c1, s1) = (v[0].cos(), v[0].sin());
            c[0] = &c1 * &v[1].cos();
            c[1] = &c1 * &v[1].sin();
            c[2] = s1;
        } else {
            let (c1, s1) = (v[0].cosh(), v[0].sinh());
            c[0] = c1;
            c[1] = &s1 * &v[1].cos();
            c[2] = &s1 * &v[1].sin();
        }
        c[d - 1] = Jet2::constant(t0, 2);
        Ok(VecJet2::new(c)?)
    });
    let domain = if eps == 1 {
        vec![(-1.2, 1.2), (0.0, 6.0)]
    } else {
        vec![(0.2, 1.5), (0.0, 6.0)]
    };
    let params = BTreeMap::from([("t0".to_string(), t0)]);
    Ok(Chart::from_generator(
        space,
        names(&["u1", "u2"]),
        gen,
        params,
        domain,
        "slice",
    )?)
}

/// A curve in `Q^n_ε` with its jet over `m` chart variables (curve parameter is variable 0).
type CurveFn = Arc<dyn Fn(&Jet2) -> Result<Vec<Jet2>, ChartError> + Send + Sync>;

#[derive(Clone)]
struct Curve {
    eval: CurveFn,
    domain: (f64, f64),
    params: BTreeMap<String, f64>,
}

fn build_curve(space: ProductSpace, spec: &CurveSpec) -> Result<Curve, GalleryError> {
    let eps = space.epsilon();
    let q = space.n() + 1;
    match spec {
        CurveSpec::Geodesic => Ok(Curve {
            eval: Arc::new(move |x: &Jet2| {
                let z = Jet2::constant(0.0, x.dim());
                let mut c = vec![z; q];
                let (a, b) = trig(eps, x);
                c[0] = a;
                c[1] = b;
                Ok(c)
            }),
            domain: if eps == 1 { (0.0, 6.0) } else { (-1.5, 1.5) },
            params: BTreeMap::new(),
        }),
        CurveSpec::Circle { r } => {
            let r = *r;
            let ok = if eps == 1 {
                r > 0.0 && r < std::f64::consts::PI
            } else {
                r > 0.0 && r.is_finite()
            };
            if !ok {
                return Err(GalleryError::Parameter(format!(
                    "circle radius r={r} out of range"
                )));
            }
            let (cr, sr) = trig_f(eps, r);
            Ok(Curve {
                eval: Arc::new(move |x: &Jet2| {
                    let z = Jet2::constant(0.0, x.dim());
                    let mut c = vec![z; q];
                    c[0] = Jet2::constant(cr, x.dim());
                    c[1] = x.cos() * sr;
                    c[2] = x.sin() * sr;
                    Ok(c)
                }),
                domain: (0.0, 6.0),
                params: BTreeMap::from([("r".to_string(), r)]),
            })
        }
        CurveSpec::Expr {
            coords,
            params,
            domain,
        } => {
            if coords.len() != q {
                return Err(GalleryError::Parameter(format!(
                    "curve needs {q} coordinate expressions, got {}",
                    coords.len()
                )));
            }
            let asts: Vec<Expr> = coords
                .iter()
                .enumerate()
                .map(|(coord, s)| {
                    exprlang::parse(s).map_err(|source| ChartError::Parse { coord, source })
                })
                .collect::<Result<_, _>>()?;
            let hp: HashMap<String, f64> = params.iter().map(|(k, v)| (k.clone(), *v)).collect();
            Ok(Curve {
                eval: Arc::new(move |x: &Jet2| {
                    let vars = HashMap::from([("u1".to_string(), x.clone())]);
                    asts.iter()
                        .enumerate()
                        .map(|(coord, ast)| {
                            exprlang::eval_jet(ast, &vars, &hp).map_err(|source| ChartError::Eval {
                                coord,
                                u: vec![x.value()],
                                source,
                            })
                        })
                        .collect()
                }),
                domain: (domain[0], domain[1]),
                params: params.clone(),
            })
        }
    }
}

pub fn make_vertical_cylinder(
    space: ProductSpace,
    curve: &CurveSpec,
) -> Result<Chart, GalleryError> {
    let c = build_curve(space, curve)?;
    let eval = c.eval.clone();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let mut comps = eval(&v[0])?;
        comps.push(v[1].clone());
        Ok(VecJet2::new(comps)?)
    });
    Ok(Chart::from_generator(
        space,
        names(&["u1", "s"]),
        gen,
        c.params,
        vec![c.domain, (-1.0, 1.0)],
        "vertical_cylinder",
    )?)
}

/// `φ(u1,u2) = (z0, z1, z2, t)` with `<z,z> = ε a^2`.
type PhiFn = Arc<dyn Fn(&Jet2, &Jet2) -> Result<[Jet2; 4], ChartError> + Send + Sync>;

type PhiParts = (PhiFn, [(f64, f64); 2], bool);

fn build_phi(eps: i32, a: f64, b: f64, spec: &PhiSpec) -> Result<PhiParts, GalleryError> {
    match spec {
        PhiSpec::GeodesicCylinder => {
            let f: PhiFn = Arc::new(move |u1: &Jet2, u2: &Jet2| {
                let (c, s) = trig(eps, u1);
                Ok([c * a, s * a, Jet2::constant(0.0, u1.dim()), u2.clone()])
            });
            let d1 = if eps == 1 { (0.0, 6.0) } else { (-1.5, 1.5) };
            Ok((f, [d1, (-1.0, 1.0)], false))
        }
        PhiSpec::Helicoid { pitch } => {
            let lam = *pitch;
            if !(lam > 0.0 && lam <= 2.0) {
                return Err(GalleryError::Parameter(format!(
                    "helicoid pitch {lam} outside (0, 2]"
                )));
            }
            let f: PhiFn = Arc::new(move |u1: &Jet2, u2: &Jet2| {
                let (c1, s1) = trig(eps, u1);
                let (c2, s2) = (u2.cos(), u2.sin());
                Ok(if eps == 1 {
                    [&c1 * &c2 * a, &c1 * &s2 * a, s1 * a, u2 * lam]
                } else {
                    [c1 * a, &s1 * &c2 * a, &s1 * &s2 * a, u2 * lam]
                })
            });
            let half = std::f64::consts::FRAC_PI_2 - 0.2;
            let d1 = if eps == 1 { (-half, half) } else { (-1.2, 1.2) };
            Ok((f, [d1, (0.0, 6.0)], true))
        }
        PhiSpec::Custom {
            coords,
            params,
            domain,
        } => {
            if coords.len() != 4 {
                return Err(GalleryError::Parameter(format!(
                    "custom phi needs 4 expressions (z0, z1, z2, t), got {}",
                    coords.len()
                )));
            }
            let asts: Vec<Expr> = coords
                .iter()
                .enumerate()
                .map(|(coord, s)| {
                    exprlang::parse(s).map_err(|source| ChartError::Parse { coord, source })
                })
                .collect::<Result<_, _>>()?;
            let mut hp: HashMap<String, f64> =
                params.iter().map(|(k, v)| (k.clone(), *v)).collect();
            hp.insert("a".into(), a);
            hp.insert("b".into(), b);
            let f: PhiFn = Arc::new(move |u1: &Jet2, u2: &Jet2| {
                let vars = HashMap::from([
                    ("u1".to_string(), u1.clone()),
                    ("u2".to_string(), u2.clone()),
                ]);
                let mut out: Vec<Jet2> = Vec::with_capacity(4);
                for (coord, ast) in asts.iter().enumerate() {
                    out.push(exprlang::eval_jet(ast, &vars, &hp).map_err(|source| {
                        ChartError::Eval {
                            coord,
                            u: vec![u1.value(), u2.value()],
                            source,
                        }
                    })?);
                }
                Ok(out.try_into().expect("four components"))
            });
            Ok((
                f,
                [(domain[0][0], domain[0][1]), (domain[1][0], domain[1][1])],
                true,
            ))
        }
    }
}

/// Checks `|H_φ| ≤ 1e-8` through the homothety `ψ = φ / a` into `Q^2_ε × R`.
fn phi_oracle(
    eps: i32,
    a: f64,
    phi: &PhiFn,
    domain: [(f64, f64); 2],
    need_t: bool,
) -> Result<(), GalleryError> {
    let space2 = ProductSpace::new(eps, 2).expect("valid");
    let phi = phi.clone();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let c = phi(&v[0], &v[1])?;
        Ok(VecJet2::new(c.iter().map(|j| j.scale(1.0 / a)).collect())?)
    });
    let psi = Chart::from_generator(
        space2,
        names(&["u1", "u2"]),
        gen,
        BTreeMap::new(),
        domain.to_vec(),
        "phi/a",
    )?;
    for u in psi.probe_grid(5) {
        let pg = analyze_point(&psi, &u)?;
        let h = second_fundamental(&pg).h_norm / a.abs();
        if !(h <= MINIMALITY_TOL) {
            return Err(GalleryError::NotMinimal { u, h });
        }
        if need_t && !(pg.t_norm > 1e-6) {
            return Err(GalleryError::VanishingT { u });
        }
    }
    Ok(())
}

/// `f(u1,u2,s) = (b cos(s/b), b sin(s/b), φ(u1,u2))` in canonical layout.
pub fn make_theorem1(space: ProductSpace, a: f64, phi: &PhiSpec) -> Result<Chart, GalleryError> {
    let eps = space.epsilon();
    if space.n() < 4 {
        return Err(GalleryError::Parameter(format!(
            "theorem1 needs n >= 4, got n={}",
            space.n()
        )));
    }
    let b = if eps == 1 {
        if !(a.abs() > 0.0 && a.abs() < 1.0) {
            return Err(GalleryError::Parameter(format!(
                "eps=+1 requires 0 < |a| < 1 (a^2+b^2=1), got a={a}"
            )));
        }
        (1.0 - a * a).sqrt()
    } else {
        if !(a.abs() > 1.0 && a.is_finite()) {
            return Err(GalleryError::Parameter(format!(
                "eps=-1 requires |a| > 1 (a^2-b^2=1), got a={a}"
            )));
        }
        (a * a - 1.0).sqrt()
    };
    let a = a.abs();
    let (phi_fn, phi_domain, need_t) = build_phi(eps, a, b, phi)?;
    phi_oracle(eps, a, &phi_fn, phi_domain, need_t)?;
    let d = space.ambient_dim();
    let pf = phi_fn.clone();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let [z0, z1, z2, t] = pf(&v[0], &v[1])?;
        let arg = v[2].scale(1.0 / b);
        let (cx, sx) = (arg.cos() * b, arg.sin() * b);
        let zero = Jet2::constant(0.0, 3);
        let mut c = vec![zero; d];
        if eps == 1 {
            c[0] = cx;
            c[1] = sx;
            c[2] = z0;
        } else {
            c[0] = z0;
            c[1] = cx;
            c[2] = sx;
        }
        c[3] = z1;
        c[4] = z2;
        c[d - 1] = t;
        Ok(VecJet2::new(c)?)
    });
    let mut params = BTreeMap::from([("a".to_string(), a), ("b".to_string(), b)]);
    if let PhiSpec::Helicoid { pitch } = phi {
        params.insert("pitch".into(), *pitch);
    }
    let s_range = std::f64::consts::PI * b;
    let domain = vec![phi_domain[0], phi_domain[1], (-s_range, s_range)];
    Ok(Chart::from_generator(
        space,
        names(&["u1", "u2", "s"]),
        gen,
        params,
        domain,
        "theorem1",
    )?)
}

/// `f(x,s) = α_0(s) g(x) + Σ α_i(s) ξ_i + α_{k+1}(s) ∂_t` over a base curve `g`
/// with constant orthonormal normals `ξ_i`.
pub fn make_partial_tube(
    space: ProductSpace,
    base: &CurveSpec,
    normals: &[Vec<f64>],
    profile: &[String],
    params: &BTreeMap<String, f64>,
    s_domain: [f64; 2],
) -> Result<Chart, GalleryError> {
    let eps = space.epsilon();
    let q = space.n() + 1;
    let k = normals.len();
    if k > 2 {
        return Err(GalleryError::Parameter(format!(
            "at most 2 base normals, got {k}"
        )));
    }
    if profile.len() != k + 2 {
        return Err(GalleryError::Parameter(format!(
            "profile needs k+2 = {} expressions, got {}",
            k + 2,
            profile.len()
        )));
    }
    if !(s_domain[0] < s_domain[1]) {
        return Err(GalleryError::Parameter(
            "s_domain must satisfy lo < hi".into(),
        ));
    }
    for (i, xi) in normals.iter().enumerate() {
        if xi.len() != q {
            return Err(GalleryError::Parameter(format!(
                "normal {i} needs {q} components, got {}",
                xi.len()
            )));
        }
    }
    let curve = build_curve(space, base)?;
    let qspace_inner = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(j, (a, b))| if j == 0 && eps == -1 { -a * b } else { a * b })
            .sum()
    };
    for i in 0..k {
        for j in 0..k {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = qspace_inner(&normals[i], &normals[j]);
            if (got - want).abs() > PARALLEL_TOL {
                return Err(GalleryError::Constraint(format!(
                    "base normals not orthonormal: <xi_{i}, xi_{j}> = {got}"
                )));
            }
        }
    }
    // constant vectors are parallel as soon as they stay normal to the base
    for p in 0..9 {
        let x = curve.domain.0 + (curve.domain.1 - curve.domain.0) * p as f64 / 8.0;
        let gx = (curve.eval)(&Jet2::var(0, x, 1).map_err(ChartError::from)?)?;
        let pos: Vec<f64> = gx.iter().map(Jet2::value).collect();
        let vel: Vec<f64> = gx.iter().map(|j| j.grad()[0]).collect();
        for (i, xi) in normals.iter().enumerate() {
            let r = qspace_inner(xi, &pos)
                .abs()
                .max(qspace_inner(xi, &vel).abs());
            if r > PARALLEL_TOL {
                return Err(GalleryError::Constraint(format!(
                    "normal {i} not normal to the base at x={x} (residual {r:e})"
                )));
            }
        }
    }
    let asts: Vec<Expr> = profile
        .iter()
        .enumerate()
        .map(|(coord, s)| exprlang::parse(s).map_err(|source| ChartError::Parse { coord, source }))
        .collect::<Result<_, _>>()?;
    let hp: HashMap<String, f64> = params.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let profile_at = {
        let asts = asts.clone();
        let hp = hp.clone();
        move |s: &Jet2| -> Result<Vec<Jet2>, ChartError> {
            let vars = HashMap::from([("s".to_string(), s.clone())]);
            asts.iter()
                .enumerate()
                .map(|(coord, ast)| {
                    exprlang::eval_jet(ast, &vars, &hp).map_err(|source| ChartError::Eval {
                        coord,
                        u: vec![s.value()],
                        source,
                    })
                })
                .collect()
        }
    };
    for p in 0..17 {
        let s = s_domain[0] + (s_domain[1] - s_domain[0]) * p as f64 / 16.0;
        let al = profile_at(&Jet2::var(0, s, 1).map_err(ChartError::from)?)?;
        let mut sum = eps as f64 * al[0].value() * al[0].value();
        for a in &al[1..=k] {
            sum += a.value() * a.value();
        }
        if (sum - eps as f64).abs() > 1e-9 {
            return Err(GalleryError::Constraint(format!(
                "sum alpha_i^2 = 1 violated at s={s} (got {sum})"
            )));
        }
        if !(al[k + 1].grad()[0].abs() > 1e-9) {
            return Err(GalleryError::Constraint(format!(
                "alpha_(k+1)' vanishes at s={s}"
            )));
        }
        if eps == -1 && !(al[0].value() > 0.0) {
            return Err(GalleryError::Constraint(format!(
                "alpha_0 must be positive for eps=-1 (s={s})"
            )));
        }
    }
    let normals: Vec<Vec<f64>> = normals.to_vec();
    let eval = curve.eval.clone();
    let d = space.ambient_dim();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let g = eval(&v[0])?;
        let al = profile_at(&v[1])?;
        let zero = Jet2::constant(0.0, 2);
        let mut c = vec![zero; d];
        for j in 0..q {
            let mut acc = &al[0] * &g[j];
            for (i, xi) in normals.iter().enumerate() {
                if xi[j] != 0.0 {
                    acc = &acc + &(&al[i + 1] * xi[j]);
                }
            }
            c[j] = acc;
        }
        c[d - 1] = al[k + 1].clone();
        Ok(VecJet2::new(c)?)
    });
    let mut all_params = curve.params.clone();
    all_params.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(Chart::from_generator(
        space,
        names(&["u1", "s"]),
        gen,
        all_params,
        vec![curve.domain, (s_domain[0], s_domain[1])],
        "partial_tube",
    )?)
}

/// `N^d × R` with `N` the geodesic sphere of radius `r` in a totally geodesic
/// `Q^{d+1}_ε ⊂ Q^n_ε`; `d` defaults to `n-1`.
pub fn make_cmc_product(
    space: ProductSpace,
    r: f64,
    dim: Option<usize>,
) -> Result<Chart, GalleryError> {
    let eps = space.epsilon();
    let d = dim.unwrap_or(space.n() - 1);
    if d == 0 || d + 1 > space.n() {
        return Err(GalleryError::Parameter(format!(
            "sphere dimension {d} must lie in 1..={}",
            space.n() - 1
        )));
    }
    let ok = if eps == 1 {
        r > 0.0 && r <= std::f64::consts::FRAC_PI_2
    } else {
        r > 0.0 && r.is_finite()
    };
    if !ok {
        return Err(GalleryError::Parameter(format!(
            "geodesic radius r={r} out of range ({})",
            if eps == 1 { "0 < r <= pi/2" } else { "r > 0" }
        )));
    }
    let (cr, sr) = trig_f(eps, r);
    let m = d + 1;
    let amb = space.ambient_dim();
    let gen: Generator = Arc::new(move |u: &[f64]| {
        let v = var_jets(u)?;
        let sphere = unit_sphere(&v[..d]);
        let zero = Jet2::constant(0.0, m);
        let mut c = vec![zero; amb];
        c[0] = Jet2::constant(cr, m);
        for (j, x) in sphere.into_iter().enumerate() {
            c[j + 1] = x * sr;
        }
        c[amb - 1] = v[d].clone();
        Ok(VecJet2::new(c)?)
    });
    let mut vars: Vec<String> = (1..=d).map(|i| format!("u{i}")).collect();
    vars.push("s".into());
    let mut domain = vec![(-1.2, 1.2); d - 1];
    domain.push((0.0, 6.0));
    domain.push((-1.0, 1.0));
    Ok(Chart::from_generator(
        space,
        vars,
        gen,
        BTreeMap::from([("r".to_string(), r)]),
        domain,
        "cmc_product",
    )?)
}

/// Unit `S^d` in `R^{d+1}`: `S^d(u_1..u_d) = (cos u_1 · S^{d-1}(u_2..), sin u_1)`.
fn unit_sphere(u: &[Jet2]) -> Vec<Jet2> {
    if u.len() == 1 {
        return vec![u[0].cos(), u[0].sin()];
    }
    let c = u[0].cos();
    let mut out: Vec<Jet2> = unit_sphere(&u[1..]).iter().map(|x| x * &c).collect();
    out.push(u[0].sin());
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GalleryEntry {
    pub kind: &'static str,
    pub params: Vec<&'static str>,
    pub constraints: Vec<&'static str>,
}

pub fn list_gallery() -> Vec<GalleryEntry> {
    vec![
        GalleryEntry {
            kind: "slice",
            params: vec!["t0"],
            constraints: vec!["none"],
        },
        GalleryEntry {
            kind: "vertical_cylinder",
            params: vec!["curve: geodesic | circle(r) | expr(coords in u1, domain)"],
            constraints: vec!["eps=+1: 0 < r < pi", "eps=-1: r > 0", "curve stays in Q^n"],
        },
        GalleryEntry {
            kind: "theorem1",
            params: vec![
                "a",
                "phi: geodesic_cylinder | helicoid(pitch) | custom(coords in u1,u2)",
            ],
            constraints: vec![
                "eps=+1: a^2+b^2=1, 0<|a|<1",
                "eps=-1: a^2-b^2=1, |a|>1",
                "n >= 4",
                "phi minimal in Q^2_a x R (|H_phi| <= 1e-8)",
                "helicoid: 0 < pitch <= 2",
            ],
        },
        GalleryEntry {
            kind: "partial_tube",
            params: vec![
                "base",
                "normals (k <= 2)",
                "profile (k+2 expressions in s)",
                "s_domain",
            ],
            constraints: vec![
                "sum alpha_i^2 = 1",
                "alpha_(k+1)' != 0",
                "normals orthonormal and parallel along the base",
                "eps=-1: alpha_0 > 0",
            ],
        },
        GalleryEntry {
            kind: "cmc_product",
            params: vec!["r", "dim (optional, default n-1)"],
            constraints: vec!["eps=+1: 0 < r <= pi/2", "eps=-1: r > 0"],
        },
    ]
}

pub fn gallery_text() -> String {
    let mut out = String::new();
    for e in list_gallery() {
        out.push_str(e.kind);
        out.push('\n');
        out.push_str(&format!("  params: {}\n", e.params.join(", ")));
        for c in &e.constraints {
            out.push_str(&format!("  constraint: {c}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem1_first_coordinate() {
        let c = make_theorem1(ProductSpace::sphere(4), 0.8, &PhiSpec::GeodesicCylinder).unwrap();
        let j = c.evaluate_jet(&[1.0, 0.0, 0.0]).unwrap();
        let x0 = &j.components()[0];
        assert!((x0.value() - 0.6).abs() < 1e-15);
        assert_eq!(x0.grad()[2], 0.0);
    }

    #[test]
    fn theorem1_parameter_errors() {
        let r = make_theorem1(ProductSpace::sphere(4), 1.2, &PhiSpec::GeodesicCylinder);
        assert!(matches!(r, Err(GalleryError::Parameter(_))));
        let r = make_theorem1(ProductSpace::hyperbolic(4), 0.8, &PhiSpec::GeodesicCylinder);
        assert!(matches!(r, Err(GalleryError::Parameter(_))));
        let r = make_theorem1(ProductSpace::sphere(3), 0.8, &PhiSpec::GeodesicCylinder);
        assert!(matches!(r, Err(GalleryError::Parameter(_))));
    }

    #[test]
    fn non_minimal_custom_phi_rejected() {
        // a small circle of the radius-a sphere, times R: not minimal
        let phi = PhiSpec::Custom {
            coords: vec![
                "a*cos(0.5)".into(),
                "a*sin(0.5)*cos(u1)".into(),
                "a*sin(0.5)*sin(u1)".into(),
                "u2".into(),
            ],
            params: BTreeMap::new(),
            domain: [[0.0, 6.0], [-1.0, 1.0]],
        };
        let r = make_theorem1(ProductSpace::sphere(4), 0.8, &phi);
        assert!(matches!(r, Err(GalleryError::NotMinimal { .. })), "{r:?}");
    }

    #[test]
    fn partial_tube_constraints() {
        let bad = make_partial_tube(
            ProductSpace::sphere(3),
            &CurveSpec::Geodesic,
            &[vec![0.0, 0.0, 1.0, 0.0]],
            &["cos(0.6*s)".into(), "sin(0.6*s)".into(), "0.8".into()],
            &BTreeMap::new(),
            [-1.0, 1.0],
        );
        assert!(matches!(bad, Err(GalleryError::Constraint(_))));
        let bad = make_partial_tube(
            ProductSpace::sphere(3),
            &CurveSpec::Geodesic,
            &[vec![0.0, 0.0, 1.0, 0.0]],
            &["0.9".into(), "sin(0.6*s)".into(), "s".into()],
            &BTreeMap::new(),
            [-1.0, 1.0],
        );
        assert!(matches!(bad, Err(GalleryError::Constraint(_))));
    }

    #[test]
    fn listing_contains_constraints() {
        let t = gallery_text();
        assert!(t.contains("theorem1"));
        assert!(t.contains("eps=+1: a^2+b^2=1"));
        assert!(t.contains("partial_tube"));
        assert!(t.contains("sum alpha_i^2 = 1"));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = GallerySpec::Theorem1 {
            a: 0.8,
            phi: PhiSpec::Helicoid { pitch: 0.5 },
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GallerySpec>(&s).unwrap(), spec);
    }
}
