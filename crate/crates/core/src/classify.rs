//! Residual forms of the biconservative, biharmonic, PMC and class-A
//! conditions, the `E_0(H)` block structure, and the product splitting.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::ambient::AmbientVec;
use crate::extrinsic::{
    normal_derivative_h_on, normal_laplacian_h, second_fundamental, ExtrinsicData, Stencil,
};
use crate::immersion::{analyze_point, Chart, ChartError, PointGeometry};
use crate::{TOL_FD, TOL_JET};

/// Relative eigenvalue threshold for membership in `E_0(H)`.
pub const TOL_EIG: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("codimension-two frame unavailable: {0}")]
    InvalidFrame(String),
    #[error("chart has no variable named `s`")]
    NoS,
    #[error(transparent)]
    Chart(#[from] ChartError),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Biconservative {
    /// `|ε<H,η>| · |T|`.
    pub simple: f64,
    /// Norm of `m grad|H|^2 + 4 tr A_{∇⊥H} + 4 tr(R̃(·,H)·)^T`.
    pub full: f64,
    pub t_vanishes: bool,
    pub h_vanishes: bool,
}

fn trace_curvature(pg: &PointGeometry, h: &AmbientVec) -> AmbientVec {
    let s = &pg.space;
    let mut acc = AmbientVec::zeros(s.ambient_dim());
    for e in &pg.tangent {
        acc += s.curvature(e, h, e);
    }
    acc
}

/// `Σ_i A_{ξ_i} E_i` with `ξ_i = ∇^⊥_{E_i}H`, as an ambient tangent vector.
fn trace_a_nabla_h(pg: &PointGeometry, ed: &ExtrinsicData, w_chart: &[AmbientVec]) -> AmbientVec {
    let m = pg.m();
    let s = &pg.space;
    let mut out = AmbientVec::zeros(s.ambient_dim());
    for i in 0..m {
        let mut xi = AmbientVec::zeros(s.ambient_dim());
        for p in 0..m {
            xi += &w_chart[p] * pg.tangent_coeffs[(i, p)];
        }
        for k in 0..m {
            out += &pg.tangent[k] * s.inner(&ed.alpha_vec[i][k], &xi);
        }
    }
    out
}

pub fn biconservative_residual(chart: &Chart, u: &[f64]) -> Result<Biconservative, ChartError> {
    let pg = analyze_point(chart, u)?;
    let ed = second_fundamental(&pg);
    let st = Stencil::new(chart, u)?;
    biconservative_from(&pg, &ed, &st)
}

pub fn biconservative_from(
    pg: &PointGeometry,
    ed: &ExtrinsicData,
    st: &Stencil,
) -> Result<Biconservative, ChartError> {
    let s = &pg.space;
    let m = pg.m();
    let simple = (s.eps() * s.inner(&ed.h, &pg.eta)).abs() * pg.t_norm;
    let w = normal_derivative_h_on(st)?;
    let mut dh2 = DVector::<f64>::zeros(m);
    for j in 0..m {
        dh2[j] = st.d(j, |lj| {
            let h = lj.mean_curvature();
            vec![lj.space.inner(&h, &h)]
        })?[0];
    }
    let grad = pg.push((&pg.g_inv * dh2).as_slice());
    let curv = pg.tangent_part(&trace_curvature(pg, &ed.h));
    let v = grad * m as f64 + trace_a_nabla_h(pg, ed, &w) * 4.0 + curv * 4.0;
    Ok(Biconservative {
        simple,
        full: v.norm(),
        t_vanishes: pg.t_norm <= TOL_JET,
        h_vanishes: ed.h_norm <= TOL_JET,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianSource {
    /// `Δ^⊥H = 0` because `∇^⊥H` was verified to vanish.
    ZeroAfterPmc,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize)]
pub struct Biharmonic {
    /// Norm of `tr α(A_H·,·) - Δ^⊥H + tr(R̃(·,H)·)^⊥`.
    pub normal: f64,
    /// `<V,H> / |H|^2`, zero when `H = 0`.
    pub signed: f64,
    /// `tr A_{ξ1}^2 + |T|^2 - m`.
    pub predicate: Option<f64>,
    /// `tr A_{ξ1}^2 + ε(|T|^2 - m)`.
    pub predicate_eps: Option<f64>,
    pub laplacian: LaplacianSource,
    pub minimal: bool,
}

pub fn biharmonic_residual(
    chart: &Chart,
    u: &[f64],
    assume_pmc: bool,
) -> Result<Biharmonic, ChartError> {
    let pg = analyze_point(chart, u)?;
    let ed = second_fundamental(&pg);
    let s = &pg.space;
    let m = pg.m();
    let mut laplacian = LaplacianSource::FiniteDifference;
    let lap = if assume_pmc {
        let st = Stencil::new(chart, u)?;
        let pmc = normal_derivative_h_on(&st)?
            .iter()
            .map(|w| w.norm())
            .fold(0.0, f64::max);
        if pmc <= TOL_FD {
            laplacian = LaplacianSource::ZeroAfterPmc;
            None
        } else {
            Some(normal_laplacian_h(chart, u)?)
        }
    } else {
        Some(normal_laplacian_h(chart, u)?)
    };
    let mut v = AmbientVec::zeros(s.ambient_dim());
    for i in 0..m {
        for j in 0..m {
            v += &ed.alpha_vec[i][j] * s.inner(&ed.alpha_vec[i][j], &ed.h);
        }
    }
    if let Some(l) = lap {
        v -= l;
    }
    v += pg.normal_project(&trace_curvature(&pg, &ed.h));
    let minimal = ed.h_norm <= TOL_JET;
    let signed = if minimal {
        0.0
    } else {
        s.inner(&v, &ed.h) / (ed.h_norm * ed.h_norm)
    };
    let (predicate, predicate_eps) = match CodimTwoFrame::new(&pg, &ed) {
        Ok(fr) => {
            let tr = (&fr.a1 * &fr.a1).trace();
            let t2 = pg.t_norm * pg.t_norm;
            (
                Some(tr + t2 - m as f64),
                Some(tr + s.eps() * (t2 - m as f64)),
            )
        }
        Err(_) => (None, None),
    };
    Ok(Biharmonic {
        normal: v.norm(),
        signed,
        predicate,
        predicate_eps,
        laplacian,
        minimal,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassA {
    pub residual: f64,
    pub t_vanishes: bool,
}

/// How far `T` is from being an eigenvector of every `A_{ξ_a}`.
pub fn class_a_residual(pg: &PointGeometry, ed: &ExtrinsicData) -> ClassA {
    if pg.t_norm <= TOL_JET {
        return ClassA {
            residual: 0.0,
            t_vanishes: true,
        };
    }
    let t = &pg.t_coeffs;
    let tt = t.dot(t);
    let mut worst = 0.0f64;
    for a in &ed.shape_ops {
        let at = a * t;
        let r = (&at - t * (at.dot(t) / tt)).norm() / a.norm().max(1.0);
        worst = worst.max(r);
    }
    ClassA {
        residual: worst,
        t_vanishes: false,
    }
}

/// `ξ1 = H/|H|` and its unit completion `ξ2` in a rank-two normal space.
#[derive(Debug, Clone)]
pub struct CodimTwoFrame {
    pub xi1: AmbientVec,
    pub xi2: AmbientVec,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    /// `ξ2` was oriented by `η` rather than by the coordinate sign rule.
    pub eta_oriented: bool,
}

/// Flips `v` so its first entry with magnitude above `tol` is positive.
fn lex_sign_fix(v: &mut [f64], tol: f64) {
    if let Some(x) = v.iter().find(|x| x.abs() > tol) {
        if *x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

impl CodimTwoFrame {
    pub fn new(pg: &PointGeometry, ed: &ExtrinsicData) -> Result<CodimTwoFrame, ClassifyError> {
        let s = &pg.space;
        if pg.normal.len() != 2 {
            return Err(ClassifyError::InvalidFrame(format!(
                "codimension {} is not 2",
                pg.normal.len()
            )));
        }
        if ed.h_norm <= TOL_JET {
            return Err(ClassifyError::InvalidFrame("H vanishes".into()));
        }
        let xi1 = &ed.h / ed.h_norm;
        let mut best: Option<AmbientVec> = None;
        for xi in &pg.normal {
            let w = xi - &xi1 * s.inner(xi, &xi1);
            if best.as_ref().is_none_or(|b| s.norm(&w) > s.norm(b)) {
                best = Some(w);
            }
        }
        let w = best.expect("two normals");
        let mut xi2 = &w / s.norm(&w);
        let along = s.inner(&xi2, &pg.eta);
        let eta_oriented = pg.eta_norm > TOL_JET && along.abs() > TOL_JET;
        if eta_oriented {
            if along < 0.0 {
                xi2 = -xi2;
            }
        } else {
            lex_sign_fix(xi2.as_mut_slice(), 1e-12);
        }
        let a1 = ed.shape_op(s, &xi1);
        let a2 = ed.shape_op(s, &xi2);
        Ok(CodimTwoFrame {
            xi1,
            xi2,
            a1,
            a2,
            eta_oriented,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct E0Analysis {
    /// Eigenvalues of `A_H`, descending by magnitude.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues of `A_{ξ1}` in the same order.
    pub eigenvalues_xi1: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub dim_e0: usize,
    #[serde(skip)]
    pub s1: DMatrix<f64>,
    #[serde(skip)]
    pub s2: DMatrix<f64>,
    #[serde(skip)]
    pub b: DMatrix<f64>,
    pub aht: f64,
    pub aetat: f64,
    pub offblock: f64,
    pub trace_bs1: f64,
    /// Largest off-diagonal entry of `B` between distinct `A_{ξ1}` eigenvalues.
    pub b_offdiag: f64,
    /// `A_{ξ2}` along the eigenvector of `A_{ξ1}` with the largest `|λ|`.
    pub a33: f64,
    /// For `m = 3`, distance of the `A_{ξ1}` spectrum from `{0, 0, 3|H|}`.
    pub form_a1: Option<f64>,
    pub warning: Option<String>,
}

pub fn e0_structure(chart: &Chart, u: &[f64]) -> Result<E0Analysis, ClassifyError> {
    let pg = analyze_point(chart, u)?;
    let ed = second_fundamental(&pg);
    e0_from(&pg, &ed)
}

pub fn e0_from(pg: &PointGeometry, ed: &ExtrinsicData) -> Result<E0Analysis, ClassifyError> {
    let fr = CodimTwoFrame::new(pg, ed)?;
    let s = &pg.space;
    let m = pg.m();
    let a_h = &fr.a1 * ed.h_norm;
    let eig = SymmetricEigen::new(a_h.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .partial_cmp(&eig.eigenvalues[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut vecs = DMatrix::<f64>::zeros(m, m);
    let mut vals = Vec::with_capacity(m);
    for (col, &i) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        lex_sign_fix(&mut v, 1e-12);
        vecs.set_column(col, &DVector::from_vec(v));
        vals.push(eig.eigenvalues[i]);
    }
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = TOL_EIG * scale;
    let warning = vals
        .iter()
        .find(|v| v.abs() > 0.1 * tol && v.abs() < 10.0 * tol)
        .map(|v| format!("eigenvalue {v:e} within the E_0 warning band"));
    // nonzero eigenvectors first in `vecs`; E_0 is the trailing block
    let nz: Vec<usize> = (0..m).filter(|&i| vals[i].abs() > tol).collect();
    let zs: Vec<usize> = (0..m).filter(|&i| vals[i].abs() <= tol).collect();
    let dim_e0 = zs.len();
    let frame_cols: Vec<usize> = zs.iter().chain(&nz).copied().collect();
    let p = DMatrix::from_fn(m, m, |r, c| vecs[(r, frame_cols[c])]);
    let a1f = p.transpose() * &fr.a1 * &p;
    let a2f = p.transpose() * &fr.a2 * &p;
    let k = dim_e0;
    let s1 = a1f.view((k, k), (m - k, m - k)).into_owned();
    let b = a2f.view((k, k), (m - k, m - k)).into_owned();
    let s2 = a2f.view((0, 0), (k, k)).into_owned();
    let offblock = a2f.view((0, k), (k, m - k)).norm() * std::f64::consts::SQRT_2;
    let trace_bs1 = (&b * &s1).trace().abs();
    let mut b_offdiag = 0.0f64;
    for i in 0..m - k {
        for j in 0..m - k {
            if i != j && (s1[(i, i)] - s1[(j, j)]).abs() > tol / ed.h_norm.max(1e-300) {
                b_offdiag = b_offdiag.max(b[(i, j)].abs());
            }
        }
    }
    let t = &pg.t_coeffs;
    let aht = (&a_h * t).norm();
    let a_eta = ed.shape_op(s, &pg.eta);
    let aet = &a_eta * t;
    let e0 = p.columns(0, k);
    let proj = e0 * (e0.transpose() * &aet);
    let aetat = (&aet - proj).norm();
    let x_top = vecs.column(0).into_owned();
    let a33 = (x_top.transpose() * &fr.a2 * &x_top)[(0, 0)].abs();
    let eigenvalues_xi1: Vec<f64> = vals.iter().map(|v| v / ed.h_norm).collect();
    let form_a1 = (m == 3).then(|| {
        let mut got = eigenvalues_xi1.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let want = [0.0, 0.0, 3.0 * ed.h_norm];
        got.iter()
            .zip(want)
            .map(|(g, w)| (g - w).powi(2))
            .sum::<f64>()
            .sqrt()
    });
    Ok(E0Analysis {
        eigenvalues: vals,
        eigenvalues_xi1,
        eigenvectors: vecs,
        dim_e0,
        s1,
        s2,
        b,
        aht,
        aetat,
        offblock,
        trace_bs1,
        b_offdiag,
        a33,
        form_a1,
        warning,
    })
}

/// Largest mixed derivative `|∂²f/∂s∂u_i|` over a `5^m` probe grid.
pub fn splitting_residual(chart: &Chart) -> Result<f64, ClassifyError> {
    let si = chart.s_index().ok_or(ClassifyError::NoS)?;
    let mut worst = 0.0f64;
    for u in chart.probe_grid(5) {
        let j = chart.evaluate_jet(&u)?;
        for i in (0..chart.dim()).filter(|&i| i != si) {
            let v = AmbientVec::from_vec(j.second_partial(si, i));
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleGeometry {
    /// Euclidean radius of curvature of the `s`-curve, `∞` for a line.
    pub radius: f64,
    pub plane_rank: usize,
    /// `c = m |H|`.
    pub c: f64,
    /// `1 / sqrt(c^2 + 1)`.
    pub predicted: f64,
    pub deviation: f64,
}

/// Geometry of the `s`-curve through `u` (the domain center by default).
pub fn circle_geometry(chart: &Chart, u: Option<&[f64]>) -> Result<CircleGeometry, ClassifyError> {
    let si = chart.s_index().ok_or(ClassifyError::NoS)?;
    let center: Vec<f64> = chart
        .domain()
        .iter()
        .map(|&(lo, hi)| 0.5 * (lo + hi))
        .collect();
    let u = u.map(|x| x.to_vec()).unwrap_or(center);
    let j = chart.evaluate_jet(&u)?;
    let fs = AmbientVec::from_vec(j.partial(si));
    let fss = AmbientVec::from_vec(j.second_partial(si, si));
    let speed2 = fs.norm_squared();
    if !(speed2 > 1e-24) {
        return Err(ClassifyError::Chart(ChartError::IrregularPoint {
            u,
            reason: "s-curve has zero speed".into(),
        }));
    }
    let cross2 = (speed2 * fss.norm_squared() - fs.dot(&fss).powi(2)).max(0.0);
    let kappa = cross2.sqrt() / speed2.powf(1.5);
    let radius = if kappa <= 1e-12 {
        f64::INFINITY
    } else {
        1.0 / kappa
    };
    let (lo, hi) = chart.domain()[si];
    let samples = 12;
    let p0 = chart.position(&{
        let mut p = u.clone();
        p[si] = lo;
        p
    })?;
    let d = p0.len();
    let mut mat = DMatrix::<f64>::zeros(d, samples);
    for k in 1..=samples {
        let mut p = u.clone();
        p[si] = lo + (hi - lo) * k as f64 / samples as f64;
        mat.set_column(k - 1, &(chart.position(&p)? - &p0));
    }
    let sv = mat.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, b| a.max(*b));
    let plane_rank = sv.iter().filter(|&&x| x > 1e-8 * smax.max(1.0)).count();
    let pg = analyze_point(chart, &u)?;
    let ed = second_fundamental(&pg);
    let c = chart.dim() as f64 * ed.h_norm;
    let predicted = 1.0 / (c * c + 1.0).sqrt();
    Ok(CircleGeometry {
        radius,
        plane_rank,
        c,
        predicted,
        deviation: (radius - predicted).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::ProductSpace;
    use crate::gallery::{make_cmc_product, make_slice, make_theorem1, PhiSpec};

    #[test]
    fn theorem1_cylinder_structure() {
        let (a, b) = (0.8f64, 0.6f64);
        let c = make_theorem1(ProductSpace::sphere(4), a, &PhiSpec::GeodesicCylinder).unwrap();
        let u = [1.1, 0.3, 0.4];
        let pg = analyze_point(&c, &u).unwrap();
        let ed = second_fundamental(&pg);
        assert!((ed.h_norm - (a / b - b / a) / 3.0).abs() < 1e-12);
        let e0 = e0_from(&pg, &ed).unwrap();
        let mut ev = e0.eigenvalues_xi1.clone();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, w) in ev.iter().zip([-b / a, 0.0, a / b]) {
            assert!((g - w).abs() < 1e-12, "{ev:?}");
        }
        assert_eq!(e0.dim_e0, 1);
        assert!(e0.aht < 1e-12 && e0.trace_bs1 < 1e-12 && e0.offblock < 1e-12);
        let bc = biconservative_residual(&c, &u).unwrap();
        assert_eq!(bc.simple, 0.0);
        assert!(bc.full < 1e-6, "{bc:?}");
        let ca = class_a_residual(&pg, &ed);
        assert!(ca.residual < 1e-12);
        assert!(splitting_residual(&c).unwrap() <= 1e-12);
        let cg = circle_geometry(&c, None).unwrap();
        assert!((cg.radius - b).abs() < 1e-12);
        assert_eq!(cg.plane_rank, 2);
    }

    #[test]
    fn theorem1_biharmonic_residual_along_h() {
        // the signed residual is tr A_xi1^2 + |T|^2 - 3 = (a/b - b/a)^2
        let (a, b) = (0.8f64, 0.6f64);
        let c = make_theorem1(ProductSpace::sphere(4), a, &PhiSpec::GeodesicCylinder).unwrap();
        let r = biharmonic_residual(&c, &[0.5, 0.1, 0.2], true).unwrap();
        assert_eq!(r.laplacian, LaplacianSource::ZeroAfterPmc);
        let want = (a / b - b / a).powi(2);
        assert!((r.signed - want).abs() < 1e-10, "{r:?}");
        assert!((r.predicate.unwrap() - want).abs() < 1e-10);
        assert!((r.predicate_eps.unwrap() - want).abs() < 1e-10);
        let fd = biharmonic_residual(&c, &[0.5, 0.1, 0.2], false).unwrap();
        assert_eq!(fd.laplacian, LaplacianSource::FiniteDifference);
        assert!((fd.normal - r.normal).abs() < 1e-4);
        // a = b: minimal
        let c = make_theorem1(
            ProductSpace::sphere(4),
            0.5f64.sqrt(),
            &PhiSpec::GeodesicCylinder,
        )
        .unwrap();
        let r = biharmonic_residual(&c, &[0.5, 0.1, 0.2], true).unwrap();
        assert!(r.minimal && r.normal < 1e-10, "{r:?}");
    }

    #[test]
    fn slice_is_degenerate() {
        let c = make_slice(ProductSpace::sphere(4), 0.0).unwrap();
        let bc = biconservative_residual(&c, &[0.1, 1.0]).unwrap();
        assert!(bc.t_vanishes && bc.h_vanishes);
        assert!(bc.simple <= 1e-12 && bc.full <= 1e-8);
        assert!(matches!(
            e0_structure(&c, &[0.1, 1.0]),
            Err(ClassifyError::InvalidFrame(_))
        ));
    }

    #[test]
    fn codim_two_product_frame_completion() {
        let c = make_cmc_product(ProductSpace::sphere(4), 0.7, Some(2)).unwrap();
        let e0 = e0_structure(&c, &[0.2, 1.0, 0.0]).unwrap();
        assert!(e0.offblock <= 1e-8);
        assert!(e0.aht <= 1e-12);
    }
}
