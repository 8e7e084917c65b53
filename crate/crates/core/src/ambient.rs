//! The ambient space `E^{n+2}` and the product `Q^n_ε × R` inside it.
//!
//! Coordinates `0..=n` carry the quadric factor and coordinate `n+1` is the
//! flat `R` factor. For `ε = -1` coordinate 0 is timelike and points of
//! `H^n` live on the upper sheet `x_0 > 0`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type AmbientVec = DVector<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmbientError {
    #[error("epsilon must be +1 or -1, got {0}")]
    BadEpsilon(i32),
    #[error("quadric dimension n must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("vector length {got} does not match ambient dimension {want}")]
    Length { got: usize, want: usize },
    #[error("vector is not tangent to the product (residual {residual:e})")]
    NotTangent { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpace {
    epsilon: i32,
    n: usize,
}

impl ProductSpace {
    pub fn new(epsilon: i32, n: usize) -> Result<Self, AmbientError> {
        if epsilon != 1 && epsilon != -1 {
            return Err(AmbientError::BadEpsilon(epsilon));
        }
        if n < 2 {
            return Err(AmbientError::BadDimension(n));
        }
        Ok(ProductSpace { epsilon, n })
    }

    pub fn sphere(n: usize) -> Self {
        ProductSpace::new(1, n).expect("n >= 2")
    }

    pub fn hyperbolic(n: usize) -> Self {
        ProductSpace::new(-1, n).expect("n >= 2")
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    pub fn eps(&self) -> f64 {
        self.epsilon as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 2
    }

    pub fn t_index(&self) -> usize {
        self.n + 1
    }

    /// Signature weight of coordinate `k`.
    #[inline]
    pub fn sign(&self, k: usize) -> f64 {
        if k == 0 && self.epsilon == -1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn check_len(&self, v: &AmbientVec) -> Result<(), AmbientError> {
        if v.len() != self.ambient_dim() {
            return Err(AmbientError::Length {
                got: v.len(),
                want: self.ambient_dim(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, x: &AmbientVec, y: &AmbientVec) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let mut s = x.dot(y);
        if self.epsilon == -1 {
            s -= 2.0 * x[0] * y[0];
        }
        s
    }

    /// `sqrt|<v,v>|`.
    pub fn norm(&self, v: &AmbientVec) -> f64 {
        self.inner(v, v).abs().sqrt()
    }

    pub fn dt(&self) -> AmbientVec {
        let mut v = AmbientVec::zeros(self.ambient_dim());
        v[self.t_index()] = 1.0;
        v
    }

    pub fn basis(&self, k: usize) -> AmbientVec {
        let mut v = AmbientVec::zeros(self.ambient_dim());
        v[k] = 1.0;
        v
    }

    /// Drops the `R` component ("hat" projection onto the quadric factor).
    pub fn q_part(&self, v: &AmbientVec) -> AmbientVec {
        let mut w = v.clone();
        w[self.t_index()] = 0.0;
        w
    }

    /// `|<p_Q,p_Q> - ε|`, or `+∞` off the upper sheet when `ε = -1`.
    pub fn membership_residual(&self, p: &AmbientVec) -> f64 {
        if self.epsilon == -1 && !(p[0] > 0.0) {
            return f64::INFINITY;
        }
        let pq = self.q_part(p);
        (self.inner(&pq, &pq) - self.eps()).abs()
    }

    fn tangency(&self, p: &AmbientVec, x: &AmbientVec) -> f64 {
        let pq = self.q_part(p);
        self.inner(x, &pq).abs()
    }

    /// Second fundamental form of the inclusion `Q^n_ε × R ⊂ E^{n+2}` at `p`.
    pub fn inclusion_sff(
        &self,
        p: &AmbientVec,
        x: &AmbientVec,
        y: &AmbientVec,
        tol: f64,
    ) -> Result<AmbientVec, AmbientError> {
        for v in [p, x, y] {
            self.check_len(v)?;
        }
        for v in [x, y] {
            let residual = self.tangency(p, v);
            if residual > tol {
                return Err(AmbientError::NotTangent { residual });
            }
        }
        let pq = self.q_part(p);
        let c = -self.eps() * self.inner(&self.q_part(x), &self.q_part(y));
        Ok(pq * c)
    }

    /// `R̃(X,Y)Z = ε(<Ŷ,Ẑ>X̂ - <X̂,Ẑ>Ŷ)`, the curvature of the product.
    pub fn curvature(&self, x: &AmbientVec, y: &AmbientVec, z: &AmbientVec) -> AmbientVec {
        let (xh, yh, zh) = (self.q_part(x), self.q_part(y), self.q_part(z));
        let a = self.inner(&yh, &zh);
        let b = self.inner(&xh, &zh);
        (xh * a - yh * b) * self.eps()
    }
}

/// Euclidean coordinate norm, used for residual magnitudes.
pub fn coord_norm(v: &AmbientVec) -> f64 {
    v.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> AmbientVec {
        AmbientVec::from_column_slice(xs)
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert_eq!(ProductSpace::new(0, 3), Err(AmbientError::BadEpsilon(0)));
        assert_eq!(ProductSpace::new(1, 1), Err(AmbientError::BadDimension(1)));
    }

    #[test]
    fn inner_products() {
        let s = ProductSpace::sphere(2);
        let h = ProductSpace::hyperbolic(2);
        let e0 = s.basis(0);
        let e1 = s.basis(1);
        assert_eq!(s.inner(&e0, &e0), 1.0);
        assert_eq!(h.inner(&e0, &e0), -1.0);
        assert_eq!(h.inner(&e0, &e1), 0.0);
    }

    #[test]
    fn membership() {
        let s = ProductSpace::sphere(3);
        let h = ProductSpace::hyperbolic(3);
        assert_eq!(s.membership_residual(&v(&[1.0, 0.0, 0.0, 0.0, 7.5])), 0.0);
        assert_eq!(h.membership_residual(&v(&[1.0, 0.0, 0.0, 0.0, -2.0])), 0.0);
        assert_eq!(s.membership_residual(&v(&[2.0, 0.0, 0.0, 0.0, 0.0])), 3.0);
        assert_eq!(
            h.membership_residual(&v(&[-1.0, 0.0, 0.0, 0.0, 0.0])),
            f64::INFINITY
        );
    }

    #[test]
    fn inclusion_second_fundamental_form() {
        let s = ProductSpace::sphere(2);
        let p = v(&[1.0, 0.0, 0.0, 3.0]);
        let x = v(&[0.0, 1.0, 0.0, 0.0]);
        let dt = s.dt();
        assert_eq!(
            s.inclusion_sff(&p, &x, &dt, 1e-12).unwrap(),
            AmbientVec::zeros(4)
        );
        assert_eq!(
            s.inclusion_sff(&p, &x, &x, 1e-12).unwrap(),
            v(&[-1.0, 0.0, 0.0, 0.0])
        );
        let h = ProductSpace::hyperbolic(2);
        assert_eq!(
            h.inclusion_sff(&p, &x, &x, 1e-12).unwrap(),
            v(&[1.0, 0.0, 0.0, 0.0])
        );
        assert!(matches!(
            s.inclusion_sff(&p, &v(&[1.0, 0.0, 0.0, 0.0]), &x, 1e-12),
            Err(AmbientError::NotTangent { .. })
        ));
    }

    #[test]
    fn curvature_examples() {
        let s = ProductSpace::sphere(2);
        let (e0, e1) = (s.basis(0), s.basis(1));
        assert_eq!(s.curvature(&e0, &e1, &s.dt()), AmbientVec::zeros(4));
        assert_eq!(s.curvature(&e0, &e1, &e1), e0);
        // unit sphere: <R(X,Y)Y,X> = +1
        assert_eq!(s.inner(&s.curvature(&e0, &e1, &e1), &e0), 1.0);
        let h = ProductSpace::hyperbolic(2);
        let (e1, e2) = (h.basis(1), h.basis(2));
        assert_eq!(h.curvature(&e1, &e2, &e2), -e1);
    }

    fn tangent_at(s: &ProductSpace, p: &AmbientVec, raw: &[f64]) -> AmbientVec {
        // remove the component along p_Q
        let pq = s.q_part(p);
        let w = v(raw);
        let c = s.inner(&w, &pq) / s.inner(&pq, &pq);
        w - pq * c
    }

    proptest! {
        #[test]
        fn curvature_symmetries(
            eps in prop::sample::select(vec![1, -1]),
            th in -1.0..1.0f64,
            raw in prop::collection::vec(-1.0..1.0f64, 20),
        ) {
            let s = ProductSpace::new(eps, 3).unwrap();
            let p = if eps == 1 {
                v(&[th.cos(), th.sin(), 0.0, 0.0, 0.4])
            } else {
                v(&[th.cosh(), th.sinh(), 0.0, 0.0, 0.4])
            };
            let t: Vec<AmbientVec> = raw.chunks(5).map(|c| tangent_at(&s, &p, c)).collect();
            let (x, y, z, w) = (&t[0], &t[1], &t[2], &t[3]);
            let r = |a: &AmbientVec, b: &AmbientVec, c: &AmbientVec, d: &AmbientVec| {
                s.inner(&s.curvature(a, b, c), d)
            };
            let base = r(x, y, z, w);
            prop_assert!((base + r(y, x, z, w)).abs() <= 1e-12);
            prop_assert!((base + r(x, y, w, z)).abs() <= 1e-12);
            prop_assert!((base - r(z, w, x, y)).abs() <= 1e-12);
            prop_assert_eq!(s.curvature(x, y, &s.dt()), AmbientVec::zeros(5));
            prop_assert_eq!(s.curvature(&s.dt(), y, z), AmbientVec::zeros(5));
            let a = s.inclusion_sff(&p, x, y, 1e-9).unwrap();
            let b = s.inclusion_sff(&p, y, x, 1e-9).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
