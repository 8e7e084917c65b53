//! Second fundamental form, shape operators, mean curvature, connections and
//! residuals of the Gauss, Codazzi and Ricci equations.
//!
//! Derivatives of normal objects are always taken of gauge-free fields
//! (projections, `H`, `η`) evaluated on a stencil, never of the pointwise
//! normal frame.

use nalgebra::{DMatrix, DVector};

use crate::ambient::{AmbientVec, ProductSpace};
use crate::immersion::{analyze_point, local_jet, Chart, ChartError, LocalJet, PointGeometry};
use crate::jets::{fd_step, richardson, stencil_offsets};

/// Outer step factor for nested differences.
pub const OUTER_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ExtrinsicData {
    /// `α(E_i,E_j)` as ambient vectors.
    pub alpha_vec: Vec<Vec<AmbientVec>>,
    /// `α^a_ij = <α(E_i,E_j), ξ_a>`.
    pub alpha: Vec<DMatrix<f64>>,
    /// `A_{ξ_a}` in the tangent ONB.
    pub shape_ops: Vec<DMatrix<f64>>,
    pub h: AmbientVec,
    pub h_norm: f64,
    /// Chart Christoffel symbols `[l][i][j] ↦ Γ^l_ij`.
    pub christoffel: Vec<f64>,
}

impl ExtrinsicData {
    /// `A_ξ` in the tangent ONB for an arbitrary normal vector `ξ`.
    pub fn shape_op(&self, space: &ProductSpace, xi: &AmbientVec) -> DMatrix<f64> {
        let m = self.alpha_vec.len();
        DMatrix::from_fn(m, m, |i, j| space.inner(&self.alpha_vec[i][j], xi))
    }

    /// `α(X,Y)` for ONB coefficient vectors.
    pub fn alpha_at(&self, x: &DVector<f64>, y: &DVector<f64>) -> AmbientVec {
        let d = self.h.len();
        let mut out = AmbientVec::zeros(d);
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                out += &self.alpha_vec[i][j] * (xi * yj);
            }
        }
        out
    }
}

pub fn second_fundamental(pg: &PointGeometry) -> ExtrinsicData {
    let m = pg.m();
    let space = pg.space;
    let chart_alpha: Vec<Vec<AmbientVec>> = (0..m)
        .map(|i| (0..m).map(|j| pg.alpha(i, j)).collect())
        .collect();
    let c = &pg.tangent_coeffs;
    let d = space.ambient_dim();
    let mut alpha_vec = vec![vec![AmbientVec::zeros(d); m]; m];
    for i in 0..m {
        for j in i..m {
            let mut acc = AmbientVec::zeros(d);
            for p in 0..m {
                for q in 0..m {
                    acc += &chart_alpha[p][q] * (c[(i, p)] * c[(j, q)]);
                }
            }
            alpha_vec[j][i] = acc.clone();
            alpha_vec[i][j] = acc;
        }
    }
    let alpha: Vec<DMatrix<f64>> = pg
        .normal
        .iter()
        .map(|xi| DMatrix::from_fn(m, m, |i, j| space.inner(&alpha_vec[i][j], xi)))
        .collect();
    let mut h = AmbientVec::zeros(d);
    for i in 0..m {
        for j in 0..m {
            h += &chart_alpha[i][j] * pg.g_inv[(i, j)];
        }
    }
    h /= m as f64;
    let h_norm = space.norm(&h);
    ExtrinsicData {
        alpha_vec,
        shape_ops: alpha.clone(),
        alpha,
        h,
        h_norm,
        christoffel: pg.christoffel(),
    }
}

/// Local jets at `u ± h e_i`, `u ± h/2 e_i` for every chart direction.
pub struct Stencil {
    pub center: LocalJet,
    steps: Vec<f64>,
    points: Vec<[LocalJet; 4]>,
}

impl Stencil {
    pub fn new(chart: &Chart, u: &[f64]) -> Result<Stencil, ChartError> {
        Stencil::with_scale(chart, u, 1.0)
    }

    /// Stencil whose step is `factor · fd_step(u_i)`.
    pub fn with_scale(chart: &Chart, u: &[f64], factor: f64) -> Result<Stencil, ChartError> {
        let center = local_jet(chart, u)?;
        let m = chart.dim();
        let mut steps = Vec::with_capacity(m);
        let mut points = Vec::with_capacity(m);
        for i in 0..m {
            let h = factor * fd_step(u[i]);
            let mut jets: Vec<LocalJet> = Vec::with_capacity(4);
            for off in stencil_offsets(h) {
                let mut p = u.to_vec();
                p[i] += off;
                jets.push(local_jet(chart, &p)?);
            }
            steps.push(h);
            points.push(
                jets.try_into()
                    .map_err(|_| ChartError::Invalid("stencil".into()))?,
            );
        }
        Ok(Stencil {
            center,
            steps,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.steps.len()
    }

    /// Derivative along `∂_i` of the field `f`, evaluated on the stencil.
    pub fn d<F>(&self, i: usize, f: F) -> Result<Vec<f64>, ChartError>
    where
        F: Fn(&LocalJet) -> Vec<f64>,
    {
        let vals: Vec<Vec<f64>> = self.points[i].iter().map(&f).collect();
        for (v, lj) in vals.iter().zip(&self.points[i]) {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ChartError::IrregularPoint {
                    u: lj.u.clone(),
                    reason: "non-finite field value on stencil".into(),
                });
            }
        }
        Ok(richardson(
            [&vals[0], &vals[1], &vals[2], &vals[3]],
            self.steps[i],
        ))
    }

    pub fn d_vec<F>(&self, i: usize, f: F) -> Result<AmbientVec, ChartError>
    where
        F: Fn(&LocalJet) -> AmbientVec,
    {
        Ok(AmbientVec::from_vec(
            self.d(i, |lj| f(lj).as_slice().to_vec())?,
        ))
    }
}

fn h_field(lj: &LocalJet) -> AmbientVec {
    lj.mean_curvature()
}

/// `∇^⊥_{∂_i} H` for every chart direction.
pub fn normal_derivative_h(chart: &Chart, u: &[f64]) -> Result<Vec<AmbientVec>, ChartError> {
    let st = Stencil::new(chart, u)?;
    normal_derivative_h_on(&st)
}

pub fn normal_derivative_h_on(st: &Stencil) -> Result<Vec<AmbientVec>, ChartError> {
    (0..st.dim())
        .map(|i| Ok(st.center.normal_project(&st.d_vec(i, h_field)?)))
        .collect()
}

/// `Δ^⊥H = g^{ij}(∇^⊥_i W_j - Γ^k_ij W_k)` with `W_j = ∇^⊥_j H`, by nested differences.
pub fn normal_laplacian_h(chart: &Chart, u: &[f64]) -> Result<AmbientVec, ChartError> {
    let center = local_jet(chart, u)?;
    let m = chart.dim();
    let w_at = |p: &[f64]| -> Result<Vec<f64>, ChartError> {
        let st = Stencil::new(chart, p)?;
        let w = normal_derivative_h_on(&st)?;
        Ok(w.iter().flat_map(|v| v.iter().copied()).collect())
    };
    let d = chart.space().ambient_dim();
    let w0 = w_at(u)?;
    let wvec = |flat: &[f64], j: usize| AmbientVec::from_column_slice(&flat[j * d..(j + 1) * d]);
    let gamma = center.christoffel();
    let mut out = AmbientVec::zeros(d);
    for i in 0..m {
        let h = OUTER_STEP * u[i].abs().max(1.0);
        let mut vals = Vec::with_capacity(4);
        for off in stencil_offsets(h) {
            let mut p = u.to_vec();
            p[i] += off;
            vals.push(w_at(&p)?);
        }
        let dw = richardson([&vals[0], &vals[1], &vals[2], &vals[3]], h);
        for j in 0..m {
            let gij = center.g_inv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let mut term = center.normal_project(&wvec(&dw, j));
            for k in 0..m {
                term -= wvec(&w0, k) * gamma[(k * m + i) * m + j];
            }
            out += term * gij;
        }
    }
    Ok(out)
}

/// `<∇_{E_i}E_j, E_k>` as `conn[k][(i,j)]`, from differences of the tangent frame.
pub fn connection_coefficients(chart: &Chart, u: &[f64]) -> Result<Vec<DMatrix<f64>>, ChartError> {
    let st = Stencil::new(chart, u)?;
    let m = st.dim();
    let c = &st.center.tangent_coeffs;
    let space = st.center.space;
    // dE[p][j] = ∂_p E_j
    let mut de: Vec<Vec<AmbientVec>> = Vec::with_capacity(m);
    for p in 0..m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            row.push(st.d_vec(p, |lj| lj.tangent[j].clone())?);
        }
        de.push(row);
    }
    let mut conn = vec![DMatrix::zeros(m, m); m];
    for i in 0..m {
        for j in 0..m {
            let mut v = AmbientVec::zeros(space.ambient_dim());
            for p in 0..m {
                v += &de[p][j] * c[(i, p)];
            }
            for k in 0..m {
                conn[k][(i, j)] = space.inner(&v, &st.center.tangent[k]);
            }
        }
    }
    Ok(conn)
}

#[derive(Debug, Clone)]
pub struct StructureResiduals {
    pub gauss: AmbientVec,
    pub codazzi: AmbientVec,
    pub ricci: AmbientVec,
}

/// `A_ξ X` as an ambient tangent vector, `X` in chart coefficients.
fn shape_apply(
    lj: &LocalJet,
    alpha: &[Vec<AmbientVec>],
    xi: &AmbientVec,
    x: &DVector<f64>,
) -> AmbientVec {
    let m = lj.m();
    let s = &lj.space;
    let b = DVector::from_fn(m, |k, _| {
        (0..m)
            .map(|i| x[i] * s.inner(&alpha[i][k], xi))
            .sum::<f64>()
    });
    let coeffs = &lj.g_inv * b;
    lj.push(coeffs.as_slice())
}

fn alpha_bilinear(alpha: &[Vec<AmbientVec>], x: &DVector<f64>, y: &DVector<f64>) -> AmbientVec {
    let d = alpha[0][0].len();
    let mut out = AmbientVec::zeros(d);
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            out += &alpha[i][j] * (xi * yj);
        }
    }
    out
}

/// Gauss, Codazzi and Ricci residuals for ONB directions `x, y, z` and the
/// normal frame vector `a`.
pub fn structure_residuals(
    chart: &Chart,
    u: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    a: usize,
) -> Result<StructureResiduals, ChartError> {
    let pg = analyze_point(chart, u)?;
    let st = Stencil::new(chart, u)?;
    let lj = &st.center;
    let m = lj.m();
    let s = lj.space;
    let eps = s.eps();
    let (xc, yc, zc) = (pg.onb_to_chart(x), pg.onb_to_chart(y), pg.onb_to_chart(z));
    let alpha: Vec<Vec<AmbientVec>> = (0..m)
        .map(|i| (0..m).map(|j| lj.alpha(i, j)).collect())
        .collect();
    let gamma = lj.christoffel();
    let gi = |l: usize, i: usize, j: usize| gamma[(l * m + i) * m + j];

    // Gauss
    let dgamma: Vec<Vec<f64>> = (0..m)
        .map(|i| st.d(i, |p| p.christoffel()))
        .collect::<Result<_, _>>()?;
    let dg = |i: usize, l: usize, j: usize, k: usize| dgamma[i][(l * m + j) * m + k];
    let mut r = DVector::<f64>::zeros(m);
    for l in 0..m {
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let w = xc[i] * yc[j] * zc[k];
                    if w == 0.0 {
                        continue;
                    }
                    let mut rl = dg(i, l, j, k) - dg(j, l, i, k);
                    for p in 0..m {
                        rl += gi(l, i, p) * gi(p, j, k) - gi(l, j, p) * gi(p, i, k);
                    }
                    acc += w * rl;
                }
            }
        }
        r[l] = acc;
    }
    let gauss_lhs = lj.push(r.as_slice());
    let (xv, yv, zv) = (
        lj.push(xc.as_slice()),
        lj.push(yc.as_slice()),
        lj.push(zc.as_slice()),
    );
    let t = &pg.t_ambient;
    let ip = |p: &AmbientVec, q: &AmbientVec| s.inner(p, q);
    let wedge = |p: &AmbientVec, q: &AmbientVec, w: &AmbientVec| p * ip(q, w) - q * ip(p, w);
    let curv =
        wedge(&xv, &yv, &zv) + wedge(&yv, t, &zv) * ip(&xv, t) - wedge(&xv, t, &zv) * ip(&yv, t);
    let gauss_rhs = shape_apply(lj, &alpha, &alpha_bilinear(&alpha, &yc, &zc), &xc)
        - shape_apply(lj, &alpha, &alpha_bilinear(&alpha, &xc, &zc), &yc)
        + curv * eps;
    let gauss = gauss_lhs - gauss_rhs;

    // Codazzi: (∇⊥_k α)_ij
    let d = s.ambient_dim();
    let mut nabla = vec![vec![vec![AmbientVec::zeros(d); m]; m]; m];
    for k in 0..m {
        for i in 0..m {
            for j in i..m {
                let mut v = lj.normal_project(&st.d_vec(k, |p| p.alpha(i, j))?);
                for p in 0..m {
                    v -= &alpha[p][j] * gi(p, k, i);
                    v -= &alpha[i][p] * gi(p, k, j);
                }
                nabla[k][j][i] = v.clone();
                nabla[k][i][j] = v;
            }
        }
    }
    let nabla_at = |xx: &DVector<f64>, yy: &DVector<f64>, zz: &DVector<f64>| {
        let mut out = AmbientVec::zeros(d);
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let w = xx[k] * yy[i] * zz[j];
                    if w != 0.0 {
                        out += &nabla[k][i][j] * w;
                    }
                }
            }
        }
        out
    };
    let codazzi_lhs = nabla_at(&xc, &yc, &zc) - nabla_at(&yc, &xc, &zc);
    let codazzi_rhs = &pg.eta * (eps * (ip(&xv, &zv) * ip(&yv, t) - ip(&yv, &zv) * ip(&xv, t)));
    let codazzi = codazzi_lhs - codazzi_rhs;

    // Ricci
    let xi = pg
        .normal
        .get(a)
        .cloned()
        .ok_or_else(|| ChartError::Invalid(format!("normal index {a} out of range")))?;
    let dpi: Vec<DMatrix<f64>> = (0..m)
        .map(|i| {
            st.d(i, |p| p.projector().as_slice().to_vec())
                .map(|v| DMatrix::from_vec(d, d, v))
        })
        .collect::<Result<_, _>>()?;
    let pi0 = lj.projector();
    let mut ricci_lhs = AmbientVec::zeros(d);
    for i in 0..m {
        for j in 0..m {
            let w = xc[i] * yc[j];
            if w == 0.0 {
                continue;
            }
            let comm = &dpi[i] * &dpi[j] - &dpi[j] * &dpi[i];
            ricci_lhs += &pi0 * (comm * &xi) * w;
        }
    }
    let a_y = lj.tangent_chart_coeffs(&shape_apply(lj, &alpha, &xi, &yc));
    let a_x = lj.tangent_chart_coeffs(&shape_apply(lj, &alpha, &xi, &xc));
    let ricci_rhs = alpha_bilinear(&alpha, &xc, &a_y) - alpha_bilinear(&alpha, &a_x, &yc);
    let ricci = ricci_lhs - ricci_rhs;

    Ok(StructureResiduals {
        gauss,
        codazzi,
        ricci,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TEtaResiduals {
    pub vt: f64,
    pub veta: f64,
}

/// Residuals of `∇_X T = A_η X` and `α(X,T) = -∇^⊥_X η` over the ONB directions.
pub fn t_eta_residuals(chart: &Chart, u: &[f64]) -> Result<TEtaResiduals, ChartError> {
    let pg = analyze_point(chart, u)?;
    let st = Stencil::new(chart, u)?;
    let lj = &st.center;
    let m = lj.m();
    let alpha: Vec<Vec<AmbientVec>> = (0..m)
        .map(|i| (0..m).map(|j| lj.alpha(i, j)).collect())
        .collect();
    let dt = lj.space.dt();
    let dts: Vec<AmbientVec> = (0..m)
        .map(|p| st.d_vec(p, |q| q.t_field()))
        .collect::<Result<_, _>>()?;
    let deta: Vec<AmbientVec> = (0..m)
        .map(|p| st.d_vec(p, |q| &dt - q.t_field()))
        .collect::<Result<_, _>>()?;
    let t_chart = lj.tangent_chart_coeffs(&pg.t_ambient);
    let (mut vt, mut veta) = (0.0f64, 0.0f64);
    for i in 0..m {
        let e = DVector::from_fn(m, |k, _| if k == i { 1.0 } else { 0.0 });
        let ec = pg.onb_to_chart(&e);
        let mut dti = AmbientVec::zeros(dt.len());
        let mut detai = AmbientVec::zeros(dt.len());
        for p in 0..m {
            dti += &dts[p] * ec[p];
            detai += &deta[p] * ec[p];
        }
        let r1 = lj.tangent_part(&dti) - shape_apply(lj, &alpha, &pg.eta, &ec);
        let r2 = alpha_bilinear(&alpha, &ec, &t_chart) + lj.normal_project(&detai);
        vt = vt.max(r1.norm());
        veta = veta.max(r2.norm());
    }
    Ok(TEtaResiduals { vt, veta })
}
