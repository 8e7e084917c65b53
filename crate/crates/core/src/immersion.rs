//! Charts of immersions into `Q^n_ε × R` and the pointwise frame geometry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ambient::{AmbientError, AmbientVec, ProductSpace};
use crate::exprlang::{self, EvalError, Expr, ParseError, CONSTANTS};
use crate::jets::{Jet2, JetError, VecJet2};

/// Membership tolerance on the probe grid.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Squared-norm threshold below which a Gram-Schmidt candidate is discarded.
pub const GS_DISCARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("invalid chart: {0}")]
    Invalid(String),
    #[error("coordinate {coord}: {source}")]
    Parse { coord: usize, source: ParseError },
    #[error("coordinate {coord} at u={u:?}: {source}")]
    Eval {
        coord: usize,
        u: Vec<f64>,
        source: EvalError,
    },
    #[error("generator failed at u={u:?}: {message}")]
    Generator { u: Vec<f64>, message: String },
    #[error("point u={u:?} leaves the domain in variable `{var}`")]
    OutsideDomain { u: Vec<f64>, var: String },
    #[error("membership residual {residual:e} at u={u:?}")]
    Membership { u: Vec<f64>, residual: f64 },
    #[error("irregular point u={u:?}: {reason}")]
    IrregularPoint { u: Vec<f64>, reason: String },
    #[error("near-null vector in frame construction at u={u:?}")]
    NullFrame { u: Vec<f64> },
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Analytic position 2-jet at a chart point.
pub type Generator = Arc<dyn Fn(&[f64]) -> Result<VecJet2, ChartError> + Send + Sync>;

#[derive(Clone)]
pub enum CoordMap {
    Expressions {
        asts: Vec<Expr>,
        params: HashMap<String, f64>,
    },
    Generator(Generator),
}

impl fmt::Debug for CoordMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordMap::Expressions { asts, .. } => {
                let src: Vec<String> = asts.iter().map(|a| a.to_string()).collect();
                f.debug_tuple("Expressions").field(&src).finish()
            }
            CoordMap::Generator(_) => f.write_str("Generator(..)"),
        }
    }
}

/// A parametrized immersion `u ↦ f(u)` of an `m`-dimensional box.
#[derive(Debug, Clone)]
pub struct Chart {
    m: usize,
    space: ProductSpace,
    vars: Vec<String>,
    coords: CoordMap,
    params: BTreeMap<String, f64>,
    domain: Vec<(f64, f64)>,
    label: String,
    normal_flips: Vec<bool>,
}

pub fn default_var_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("u{i}")).collect()
}

impl Chart {
    pub fn from_expressions(
        space: ProductSpace,
        vars: Vec<String>,
        sources: &[String],
        params: BTreeMap<String, f64>,
        domain: Vec<(f64, f64)>,
        label: impl Into<String>,
    ) -> Result<Chart, ChartError> {
        let mut asts = Vec::with_capacity(sources.len());
        for (coord, src) in sources.iter().enumerate() {
            let ast = exprlang::parse(src).map_err(|source| ChartError::Parse { coord, source })?;
            for name in exprlang::free_vars(&ast) {
                let known = vars.contains(&name)
                    || params.contains_key(&name)
                    || CONSTANTS.iter().any(|(c, _)| *c == name);
                if !known {
                    return Err(ChartError::Invalid(format!(
                        "coordinate {coord} uses unknown identifier `{name}`"
                    )));
                }
            }
            asts.push(ast);
        }
        let hparams = params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let coords = CoordMap::Expressions {
            asts,
            params: hparams,
        };
        Chart::build(space, vars, coords, params, domain, label.into())
    }

    pub fn from_generator(
        space: ProductSpace,
        vars: Vec<String>,
        generator: Generator,
        params: BTreeMap<String, f64>,
        domain: Vec<(f64, f64)>,
        label: impl Into<String>,
    ) -> Result<Chart, ChartError> {
        Chart::build(
            space,
            vars,
            CoordMap::Generator(generator),
            params,
            domain,
            label.into(),
        )
    }

    fn build(
        space: ProductSpace,
        vars: Vec<String>,
        coords: CoordMap,
        params: BTreeMap<String, f64>,
        domain: Vec<(f64, f64)>,
        label: String,
    ) -> Result<Chart, ChartError> {
        let m = vars.len();
        if m == 0 || m > space.n() {
            return Err(ChartError::Invalid(format!(
                "chart dimension {m} must lie in 1..={}",
                space.n()
            )));
        }
        if domain.len() != m {
            return Err(ChartError::Invalid(format!(
                "domain has {} intervals for {m} variables",
                domain.len()
            )));
        }
        for (i, name) in vars.iter().enumerate() {
            if vars[..i].contains(name) {
                return Err(ChartError::Invalid(format!("duplicate variable `{name}`")));
            }
            if params.contains_key(name) {
                return Err(ChartError::Invalid(format!(
                    "`{name}` is both a variable and a parameter"
                )));
            }
        }
        for (name, &(lo, hi)) in vars.iter().zip(&domain) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ChartError::Invalid(format!(
                    "domain of `{name}` must be a finite interval with lo < hi"
                )));
            }
        }
        if let CoordMap::Expressions { asts, .. } = &coords {
            if asts.len() != space.ambient_dim() {
                return Err(ChartError::Invalid(format!(
                    "{} coordinate expressions given, ambient dimension is {}",
                    asts.len(),
                    space.ambient_dim()
                )));
            }
        }
        let chart = Chart {
            m,
            space,
            vars,
            coords,
            params,
            domain,
            label,
            normal_flips: Vec::new(),
        };
        chart.validate_membership()?;
        Ok(chart)
    }

    fn validate_membership(&self) -> Result<(), ChartError> {
        for u in self.probe_grid(5) {
            let j = self.evaluate_jet(&u)?;
            if j.len() != self.space.ambient_dim() {
                return Err(ChartError::Invalid(format!(
                    "generator returned {} coordinates, ambient dimension is {}",
                    j.len(),
                    self.space.ambient_dim()
                )));
            }
            let p = AmbientVec::from_vec(j.value());
            let residual = self.space.membership_residual(&p);
            if !(residual <= MEMBERSHIP_TOL) {
                return Err(ChartError::Membership { u, residual });
            }
        }
        Ok(())
    }

    /// `k^m` points with `k` equally spaced nodes per variable, endpoints included.
    pub fn probe_grid(&self, k: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .map(|&(lo, hi)| {
                if k == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..k)
                        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                        .collect()
                }
            })
            .collect();
        cartesian(&axes)
    }

    /// Returns a copy whose normal frames have the flagged vectors negated.
    pub fn with_normal_flips(&self, flips: Vec<bool>) -> Chart {
        Chart {
            normal_flips: flips,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coords(&self) -> &CoordMap {
        &self.coords
    }

    /// Index of the variable named `s`, the circle or line parameter.
    pub fn s_index(&self) -> Option<usize> {
        self.vars.iter().position(|v| v == "s")
    }

    pub fn codim(&self) -> usize {
        self.space.n() + 1 - self.m
    }

    pub fn in_domain(&self, u: &[f64]) -> Result<(), ChartError> {
        if u.len() != self.m {
            return Err(ChartError::Invalid(format!(
                "point has {} coordinates, chart dimension is {}",
                u.len(),
                self.m
            )));
        }
        for ((x, &(lo, hi)), name) in u.iter().zip(&self.domain).zip(&self.vars) {
            if !(*x >= lo && *x <= hi) {
                return Err(ChartError::OutsideDomain {
                    u: u.to_vec(),
                    var: name.clone(),
                });
            }
        }
        Ok(())
    }

    /// 2-jet of all `n+2` coordinates at `u`.
    pub fn evaluate_jet(&self, u: &[f64]) -> Result<VecJet2, ChartError> {
        self.in_domain(u)?;
        match &self.coords {
            CoordMap::Generator(g) => g(u),
            CoordMap::Expressions { asts, params } => {
                let mut vars = HashMap::with_capacity(self.m);
                for (i, name) in self.vars.iter().enumerate() {
                    vars.insert(name.clone(), Jet2::var(i, u[i], self.m)?);
                }
                let mut comps = Vec::with_capacity(asts.len());
                for (coord, ast) in asts.iter().enumerate() {
                    let j = exprlang::eval_jet(ast, &vars, params).map_err(|source| {
                        ChartError::Eval {
                            coord,
                            u: u.to_vec(),
                            source,
                        }
                    })?;
                    comps.push(j);
                }
                Ok(VecJet2::new(comps)?)
            }
        }
    }

    pub fn position(&self, u: &[f64]) -> Result<AmbientVec, ChartError> {
        Ok(AmbientVec::from_vec(self.evaluate_jet(u)?.value()))
    }

    /// `f_*(v)` for chart-tangent coefficients `v`.
    pub fn pushforward(&self, u: &[f64], v: &[f64]) -> Result<AmbientVec, ChartError> {
        let pg = analyze_point(self, u)?;
        Ok(pg.push(v))
    }
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &x in axis {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Gauge-free geometry computed from the position jet alone.
///
/// The tangent frame comes from Gram-Schmidt on `f_1..f_m` in order, so it
/// varies smoothly with `u` and may be differentiated.
#[derive(Debug, Clone)]
pub struct LocalJet {
    pub space: ProductSpace,
    pub u: Vec<f64>,
    pub jet: VecJet2,
    pub position: AmbientVec,
    /// `p_Q`, the position with its `R` component zeroed.
    pub p_q: AmbientVec,
    /// `f_i = ∂f/∂u_i`.
    pub partials: Vec<AmbientVec>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `E_1..E_m`, orthonormal.
    pub tangent: Vec<AmbientVec>,
    /// `E_i = Σ_j C_ij f_j`.
    pub tangent_coeffs: DMatrix<f64>,
}

impl LocalJet {
    pub fn m(&self) -> usize {
        self.partials.len()
    }

    pub fn second_partial(&self, i: usize, k: usize) -> AmbientVec {
        AmbientVec::from_vec(self.jet.second_partial(i, k))
    }

    pub fn push(&self, v: &[f64]) -> AmbientVec {
        let mut out = AmbientVec::zeros(self.space.ambient_dim());
        for (vi, fi) in v.iter().zip(&self.partials) {
            out += fi * *vi;
        }
        out
    }

    /// Tangential part of `v` as chart-coordinate coefficients.
    pub fn tangent_chart_coeffs(&self, v: &AmbientVec) -> DVector<f64> {
        let b = DVector::from_iterator(
            self.m(),
            self.partials.iter().map(|f| self.space.inner(v, f)),
        );
        &self.g_inv * b
    }

    pub fn tangent_part(&self, v: &AmbientVec) -> AmbientVec {
        let mut w = AmbientVec::zeros(self.space.ambient_dim());
        for e in &self.tangent {
            w += e * self.space.inner(v, e);
        }
        w
    }

    /// Orthogonal projection onto the normal space of `f` inside the product.
    pub fn normal_project(&self, v: &AmbientVec) -> AmbientVec {
        let s = &self.space;
        let mut w = v - self.tangent_part(v);
        w -= &self.p_q * (s.eps() * s.inner(v, &self.p_q));
        w
    }

    /// The normal projector as a matrix acting on coordinate vectors.
    pub fn projector(&self) -> DMatrix<f64> {
        let d = self.space.ambient_dim();
        let mut out = DMatrix::zeros(d, d);
        for k in 0..d {
            out.set_column(k, &self.normal_project(&self.space.basis(k)));
        }
        out
    }

    /// `α(∂_i,∂_j)`.
    pub fn alpha(&self, i: usize, j: usize) -> AmbientVec {
        self.normal_project(&self.second_partial(i, j))
    }

    /// `H = (1/m) g^{ij} α(∂_i,∂_j)`.
    pub fn mean_curvature(&self) -> AmbientVec {
        let m = self.m();
        let mut acc = AmbientVec::zeros(self.space.ambient_dim());
        for i in 0..m {
            for j in 0..m {
                acc += self.second_partial(i, j) * self.g_inv[(i, j)];
            }
        }
        self.normal_project(&acc) / m as f64
    }

    /// Chart Christoffel symbols, flattened as `[l][i][j] ↦ Γ^l_ij`.
    pub fn christoffel(&self) -> Vec<f64> {
        let m = self.m();
        let mut first = vec![0.0; m * m * m];
        for i in 0..m {
            for j in i..m {
                let fij = self.second_partial(i, j);
                for k in 0..m {
                    let v = self.space.inner(&fij, &self.partials[k]);
                    first[(k * m + i) * m + j] = v;
                    first[(k * m + j) * m + i] = v;
                }
            }
        }
        let mut out = vec![0.0; m * m * m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[(l * m + i) * m + j] = (0..m)
                        .map(|k| self.g_inv[(l, k)] * first[(k * m + i) * m + j])
                        .sum();
                }
            }
        }
        out
    }

    /// Tangential part of `∂_t`.
    pub fn t_field(&self) -> AmbientVec {
        self.tangent_part(&self.space.dt())
    }
}

/// Jet, metric and tangent frame at `u`.
pub fn local_jet(chart: &Chart, u: &[f64]) -> Result<LocalJet, ChartError> {
    let space = *chart.space();
    let m = chart.dim();
    let jet = chart.evaluate_jet(u)?;
    let position = AmbientVec::from_vec(jet.value());
    let p_q = space.q_part(&position);
    let partials: Vec<AmbientVec> = (0..m)
        .map(|i| AmbientVec::from_vec(jet.partial(i)))
        .collect();
    let irregular = |reason: String| ChartError::IrregularPoint {
        u: u.to_vec(),
        reason,
    };
    let g = DMatrix::from_fn(m, m, |i, j| space.inner(&partials[i], &partials[j]));
    if g.iter().any(|x| !x.is_finite()) {
        return Err(irregular("non-finite metric".into()));
    }
    let scale = (0..m).map(|i| g[(i, i)].abs()).fold(1.0, f64::max);
    let det = g.determinant();
    if !(det > 1e-12 * scale.powi(m as i32)) {
        return Err(irregular(format!("det g = {det:e}")));
    }
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| irregular("metric not positive definite".into()))?;
    let g_inv = chol.inverse();

    let mut tangent: Vec<AmbientVec> = Vec::with_capacity(m);
    let mut coeffs = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let mut w = partials[i].clone();
        let mut c = DVector::<f64>::zeros(m);
        c[i] = 1.0;
        for _ in 0..2 {
            for k in 0..tangent.len() {
                let r = space.inner(&w, &tangent[k]);
                w -= &tangent[k] * r;
                for j in 0..m {
                    c[j] -= r * coeffs[(k, j)];
                }
            }
        }
        let nn = space.inner(&w, &w);
        if !(nn > GS_DISCARD * scale) {
            if space.epsilon() == -1 && nn.abs() <= GS_DISCARD * scale {
                return Err(ChartError::NullFrame { u: u.to_vec() });
            }
            return Err(irregular("tangent Gram-Schmidt degenerated".into()));
        }
        let inv = 1.0 / nn.sqrt();
        tangent.push(w * inv);
        for j in 0..m {
            coeffs[(i, j)] = c[j] * inv;
        }
    }
    Ok(LocalJet {
        space,
        u: u.to_vec(),
        jet,
        position,
        p_q,
        partials,
        g,
        g_inv,
        tangent,
        tangent_coeffs: coeffs,
    })
}

/// Frame data of the immersion at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub local: LocalJet,
    /// Orthonormal basis of the normal space of `f` inside `T(Q^n_ε × R)`.
    pub normal: Vec<AmbientVec>,
    pub t_ambient: AmbientVec,
    /// Components of `T` in the tangent ONB.
    pub t_coeffs: DVector<f64>,
    pub t_norm: f64,
    pub eta: AmbientVec,
    pub eta_norm: f64,
    pub theta: f64,
    /// `<η, N>` for hypersurfaces of the product.
    pub nu: Option<f64>,
}

impl std::ops::Deref for PointGeometry {
    type Target = LocalJet;

    fn deref(&self) -> &LocalJet {
        &self.local
    }
}

impl PointGeometry {
    /// Tangential part of `v` as ONB coefficients.
    pub fn tangent_onb_coeffs(&self, v: &AmbientVec) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.tangent.iter().map(|e| self.space.inner(v, e)),
        )
    }

    /// Converts ONB coefficients into chart coefficients (`Σ c_i E_i = Σ x_j f_j`).
    pub fn onb_to_chart(&self, c: &DVector<f64>) -> DVector<f64> {
        self.tangent_coeffs.transpose() * c
    }

    pub fn tangent_vector(&self, onb: &DVector<f64>) -> AmbientVec {
        let mut out = AmbientVec::zeros(self.space.ambient_dim());
        for (ci, e) in onb.iter().zip(&self.tangent) {
            out += e * *ci;
        }
        out
    }
}

/// Modified Gram-Schmidt under the ambient inner product, keeping order.
pub fn gram_schmidt(space: &ProductSpace, vecs: &[AmbientVec]) -> Option<Vec<AmbientVec>> {
    let mut out: Vec<AmbientVec> = Vec::with_capacity(vecs.len());
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                w -= e * space.inner(&w, e);
            }
        }
        let nn = space.inner(&w, &w);
        if !(nn > GS_DISCARD) {
            return None;
        }
        out.push(w / nn.sqrt());
    }
    Some(out)
}

fn pivoted_normal_basis(
    space: &ProductSpace,
    tangent: &[AmbientVec],
    p_q: &AmbientVec,
    want: usize,
    u: &[f64],
) -> Result<Vec<AmbientVec>, ChartError> {
    let project = |v: &AmbientVec, chosen: &[AmbientVec]| {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in tangent.iter().chain(chosen) {
                w -= e * space.inner(&w, e);
            }
            w -= p_q * (space.eps() * space.inner(&w, p_q));
        }
        w
    };
    let mut pool: Vec<AmbientVec> = (0..space.ambient_dim())
        .map(|k| project(&space.basis(k), &[]))
        .collect();
    let mut chosen: Vec<AmbientVec> = Vec::with_capacity(want);
    while chosen.len() < want {
        let mut best: Option<(usize, f64)> = None;
        for (k, w) in pool.iter().enumerate() {
            let nn = space.inner(w, w);
            if nn.abs() < GS_DISCARD {
                continue;
            }
            if best.is_none_or(|(_, b)| nn.abs() > b.abs()) {
                best = Some((k, nn));
            }
        }
        let Some((k, nn)) = best else { break };
        if nn < 0.0 {
            return Err(ChartError::NullFrame { u: u.to_vec() });
        }
        let w = pool.swap_remove(k);
        let e = w / nn.sqrt();
        let e = project(&e, &chosen);
        let nn2 = space.inner(&e, &e);
        if !(nn2 > GS_DISCARD) {
            return Err(ChartError::NullFrame { u: u.to_vec() });
        }
        chosen.push(e / nn2.sqrt());
        for w in pool.iter_mut() {
            let c = space.inner(w, chosen.last().unwrap());
            *w -= chosen.last().unwrap() * c;
        }
    }
    if chosen.len() != want {
        return Err(ChartError::IrregularPoint {
            u: u.to_vec(),
            reason: format!("normal space has rank {} instead of {want}", chosen.len()),
        });
    }
    Ok(chosen)
}

/// Metric, frames and the `T`/`η` split of `∂_t` at `u`.
pub fn analyze_point(chart: &Chart, u: &[f64]) -> Result<PointGeometry, ChartError> {
    let local = local_jet(chart, u)?;
    let space = local.space;
    let m = local.m();
    let mut normal = pivoted_normal_basis(&space, &local.tangent, &local.p_q, chart.codim(), u)?;
    for (xi, flip) in normal.iter_mut().zip(&chart.normal_flips) {
        if *flip {
            *xi = -xi.clone();
        }
    }
    let dt = space.dt();
    let t_coeffs = DVector::from_iterator(m, local.tangent.iter().map(|e| space.inner(&dt, e)));
    let mut t_ambient = AmbientVec::zeros(space.ambient_dim());
    for (c, e) in t_coeffs.iter().zip(&local.tangent) {
        t_ambient += e * *c;
    }
    let eta = &dt - &t_ambient;
    let t_norm = t_coeffs.norm();
    let eta_norm = space.norm(&eta);
    let theta = eta_norm.atan2(t_norm);
    let nu = (normal.len() == 1).then(|| space.inner(&eta, &normal[0]));
    Ok(PointGeometry {
        local,
        normal,
        t_ambient,
        t_coeffs,
        t_norm,
        eta,
        eta_norm,
        theta,
        nu,
    })
}
