//! Second-order forward-mode differentiation over chart coordinates.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar field with
//! respect to the `m` chart variables. Arithmetic follows the truncated Taylor
//! rules, so composing jets yields exact first and second derivatives of the
//! composite. Anything of higher order (derivatives of the mean curvature
//! field, the normal Laplacian) goes through [`fd_gradient`] instead.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("variable index {index} out of range for chart dimension {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{func}: argument {value} outside domain")]
    Domain { func: &'static str, value: f64 },
}

/// Value, gradient and Hessian of a scalar field over `m` chart variables.
///
/// The Hessian is stored row-major and is symmetric after every operation.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .finish()
    }
}

impl Jet2 {
    pub fn constant(value: f64, m: usize) -> Self {
        Jet2 {
            value,
            grad: vec![0.0; m],
            hess: vec![0.0; m * m],
        }
    }

    /// Seeds the `index`-th chart variable at `value`.
    pub fn var(index: usize, value: f64, m: usize) -> Result<Self, JetError> {
        if index >= m {
            return Err(JetError::IndexOutOfRange { index, m });
        }
        let mut j = Jet2::constant(value, m);
        j.grad[index] = 1.0;
        Ok(j)
    }

    /// Builds a jet from raw parts. The Hessian is symmetrized.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: Vec<f64>) -> Self {
        let m = grad.len();
        assert_eq!(hess.len(), m * m, "hessian must be m x m");
        let mut j = Jet2 { value, grad, hess };
        for i in 0..m {
            for k in (i + 1)..m {
                let s = 0.5 * (j.hess[i * m + k] + j.hess[k * m + i]);
                j.hess[i * m + k] = s;
                j.hess[k * m + i] = s;
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess(&self) -> &[f64] {
        &self.hess
    }

    pub fn hess_at(&self, i: usize, k: usize) -> f64 {
        self.hess[i * self.dim() + k]
    }

    /// True when the jet carries no dependence on the chart variables.
    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|&g| g == 0.0) && self.hess.iter().all(|&h| h == 0.0)
    }

    fn check_dim(&self, other: &Jet2) -> Result<(), JetError> {
        if self.dim() != other.dim() {
            return Err(JetError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        Ok(Jet2 {
            value: self.value + other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a + b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a + b),
        })
    }

    pub fn try_sub(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        Ok(Jet2 {
            value: self.value - other.value,
            grad: zip_with(&self.grad, &other.grad, |a, b| a - b),
            hess: zip_with(&self.hess, &other.hess, |a, b| a - b),
        })
    }

    pub fn try_mul(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        let m = self.dim();
        let (a, b) = (self, other);
        let grad = zip_with(&a.grad, &b.grad, |ga, gb| ga * b.value + gb * a.value);
        let mut hess = vec![0.0; m * m];
        for i in 0..m {
            for k in i..m {
                let idx = i * m + k;
                hess[idx] = a.hess[idx] * b.value
                    + b.hess[idx] * a.value
                    + a.grad[i] * b.grad[k]
                    + b.grad[i] * a.grad[k];
                hess[k * m + i] = hess[idx];
            }
        }
        Ok(Jet2 {
            value: a.value * b.value,
            grad,
            hess,
        })
    }

    pub fn try_div(&self, other: &Jet2) -> Result<Jet2, JetError> {
        self.check_dim(other)?;
        if other.value == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let m = self.dim();
        let (a, b) = (self, other);
        let q = a.value / b.value;
        let grad: Vec<f64> = zip_with(&a.grad, &b.grad, |ga, gb| (ga - q * gb) / b.value);
        let mut hess = vec![0.0; m * m];
        for i in 0..m {
            for k in i..m {
                let idx = i * m + k;
                hess[idx] =
                    (a.hess[idx] - q * b.hess[idx] - grad[i] * b.grad[k] - b.grad[i] * grad[k])
                        / b.value;
                hess[k * m + i] = hess[idx];
            }
        }
        Ok(Jet2 {
            value: q,
            grad,
            hess,
        })
    }

    pub fn arith(kind: ArithOp, a: &Jet2, b: &Jet2) -> Result<Jet2, JetError> {
        match kind {
            ArithOp::Add => a.try_add(b),
            ArithOp::Sub => a.try_sub(b),
            ArithOp::Mul => a.try_mul(b),
            ArithOp::Div => a.try_div(b),
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    pub fn offset(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value + c,
            ..self.clone()
        }
    }

    /// Chain rule with the scalar triple `(f, f', f'')` evaluated at `self.value`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let m = self.dim();
        let mut hess = vec![0.0; m * m];
        for i in 0..m {
            for k in i..m {
                let idx = i * m + k;
                hess[idx] = f1 * self.hess[idx] + f2 * self.grad[i] * self.grad[k];
                hess[k * m + i] = hess[idx];
            }
        }
        Jet2 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess,
        }
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sinh(&self) -> Jet2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(s, c, s)
    }

    pub fn cosh(&self) -> Jet2 {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose(c, s, c)
    }
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

// Operator sugar for generator code where every jet shares one chart; a
// dimension mismatch there is a programming error.
macro_rules! jet_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                self.$checked(rhs).expect("jet operands must share a chart")
            }
        }
        impl $tr<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&self)
                    .$checked(&rhs)
                    .expect("jet operands must share a chart")
            }
        }
        impl $tr<f64> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                self.$checked(&Jet2::constant(rhs, self.dim()))
                    .expect("jet operands must share a chart")
            }
        }
        impl $tr<f64> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                (&self).$method(rhs)
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);
jet_binop!(Div, div, try_div);

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

/// Elementary functions with their first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan,
    Neg,
    PowConst(f64),
}

impl UnaryFn {
    pub const NAMED: [UnaryFn; 10] = [
        UnaryFn::Sin,
        UnaryFn::Cos,
        UnaryFn::Tan,
        UnaryFn::Sinh,
        UnaryFn::Cosh,
        UnaryFn::Tanh,
        UnaryFn::Exp,
        UnaryFn::Log,
        UnaryFn::Sqrt,
        UnaryFn::Atan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Atan => "atan",
            UnaryFn::Neg => "neg",
            UnaryFn::PowConst(_) => "pow",
        }
    }

    /// Looks up a function callable by name from expressions.
    pub fn from_name(name: &str) -> Option<UnaryFn> {
        UnaryFn::NAMED.iter().copied().find(|f| f.name() == name)
    }

    fn domain_error(&self, x: f64) -> JetError {
        JetError::Domain {
            func: self.name(),
            value: x,
        }
    }

    /// Plain evaluation, sharing the domain rules of [`UnaryFn::derivs`].
    pub fn eval(&self, x: f64) -> Result<f64, JetError> {
        Ok(self.derivs(x)?.0)
    }

    /// Returns `(f(x), f'(x), f''(x))`.
    pub fn derivs(&self, x: f64) -> Result<(f64, f64, f64), JetError> {
        let out = match *self {
            UnaryFn::Sin => {
                let (s, c) = x.sin_cos();
                (s, c, -s)
            }
            UnaryFn::Cos => {
                let (s, c) = x.sin_cos();
                (c, -s, -c)
            }
            UnaryFn::Tan => {
                let c = x.cos();
                if c.abs() < 1e-15 {
                    return Err(self.domain_error(x));
                }
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                (t, sec2, 2.0 * t * sec2)
            }
            UnaryFn::Sinh => (x.sinh(), x.cosh(), x.sinh()),
            UnaryFn::Cosh => (x.cosh(), x.sinh(), x.cosh()),
            UnaryFn::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                (t, s, -2.0 * t * s)
            }
            UnaryFn::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            UnaryFn::Log => {
                if !(x > 0.0) {
                    return Err(self.domain_error(x));
                }
                (x.ln(), 1.0 / x, -1.0 / (x * x))
            }
            UnaryFn::Sqrt => {
                if !(x > 0.0) {
                    return Err(self.domain_error(x));
                }
                let r = x.sqrt();
                (r, 0.5 / r, -0.25 / (r * x))
            }
            UnaryFn::Atan => {
                let d = 1.0 / (1.0 + x * x);
                (x.atan(), d, -2.0 * x * d * d)
            }
            UnaryFn::Neg => (-x, -1.0, 0.0),
            UnaryFn::PowConst(p) => pow_derivs(x, p).ok_or_else(|| self.domain_error(x))?,
        };
        if !(out.0.is_finite() && out.1.is_finite() && out.2.is_finite()) {
            return Err(self.domain_error(x));
        }
        Ok(out)
    }

    pub fn apply(&self, a: &Jet2) -> Result<Jet2, JetError> {
        let (f0, f1, f2) = self.derivs(a.value)?;
        Ok(a.compose(f0, f1, f2))
    }
}

fn pow_derivs(x: f64, p: f64) -> Option<(f64, f64, f64)> {
    if p == 0.0 {
        return Some((1.0, 0.0, 0.0));
    }
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        let n = p as i32;
        if x == 0.0 && n < 0 {
            return None;
        }
        let f0 = x.powi(n);
        let f1 = if n == 0 { 0.0 } else { p * x.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            p * (p - 1.0) * x.powi(n - 2)
        };
        return Some((f0, f1, f2));
    }
    if !(x > 0.0) {
        return None;
    }
    Some((
        x.powf(p),
        p * x.powf(p - 1.0),
        p * (p - 1.0) * x.powf(p - 2.0),
    ))
}

/// Two-jet of every ambient coordinate of an immersion.
#[derive(Debug, Clone, PartialEq)]
pub struct VecJet2 {
    components: Vec<Jet2>,
}

impl VecJet2 {
    pub fn new(components: Vec<Jet2>) -> Result<Self, JetError> {
        if let Some(first) = components.first() {
            for c in &components[1..] {
                first.check_dim(c)?;
            }
        }
        Ok(VecJet2 { components })
    }

    pub fn components(&self) -> &[Jet2] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn chart_dim(&self) -> usize {
        self.components.first().map_or(0, Jet2::dim)
    }

    pub fn value(&self) -> Vec<f64> {
        self.components.iter().map(Jet2::value).collect()
    }

    /// `∂f/∂u_i` as an ambient coordinate vector.
    pub fn partial(&self, i: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.grad[i]).collect()
    }

    /// `∂²f/∂u_i∂u_k` as an ambient coordinate vector.
    pub fn second_partial(&self, i: usize, k: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.hess_at(i, k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("direction {index} out of range for a {m}-dimensional point")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("non-finite field value at stencil offset {offset:e}")]
    NonFinite { offset: f64 },
    #[error("field evaluation failed at stencil offset {offset:e}: {message}")]
    Field { offset: f64, message: String },
}

/// Base step for direction `i` at coordinate value `ui`.
pub fn fd_step(ui: f64) -> f64 {
    f64::EPSILON.cbrt() * ui.abs().max(1.0)
}

/// Stencil offsets, in the order their values are expected by [`richardson`].
pub fn stencil_offsets(h: f64) -> [f64; 4] {
    [h, -h, 0.5 * h, -0.5 * h]
}

/// Central differences at `h` and `h/2` combined by one Richardson step.
pub fn richardson(values: [&[f64]; 4], h: f64) -> Vec<f64> {
    let [fp, fm, fp2, fm2] = values;
    (0..fp.len())
        .map(|k| {
            let d1 = (fp[k] - fm[k]) / (2.0 * h);
            let d2 = (fp2[k] - fm2[k]) / h;
            (4.0 * d2 - d1) / 3.0
        })
        .collect()
}

/// Derivative of a vector field along chart direction `i` at `u`.
pub fn fd_gradient<F, E>(field: F, u: &[f64], i: usize) -> Result<Vec<f64>, FdError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, E>,
    E: fmt::Display,
{
    if i >= u.len() {
        return Err(FdError::IndexOutOfRange {
            index: i,
            m: u.len(),
        });
    }
    let h = fd_step(u[i]);
    let offsets = stencil_offsets(h);
    let mut vals: Vec<Vec<f64>> = Vec::with_capacity(4);
    for &off in &offsets {
        let mut p = u.to_vec();
        p[i] += off;
        let v = field(&p).map_err(|e| FdError::Field {
            offset: off,
            message: e.to_string(),
        })?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FdError::NonFinite { offset: off });
        }
        vals.push(v);
    }
    Ok(richardson([&vals[0], &vals[1], &vals[2], &vals[3]], h))
}
