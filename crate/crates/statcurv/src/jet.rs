//! Second-order forward-mode jets: value, gradient, Hessian propagated
//! together through expression evaluation. Derivatives are exact up to
//! rounding; finite differences appear only in test oracles.

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Value, gradient, and symmetric Hessian of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major n*n, symmetric by construction.
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn constant(c: f64, n: usize) -> Jet2 {
        Jet2 {
            value: c,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    pub fn coord(value: f64, i: usize, n: usize) -> Jet2 {
        let mut grad = vec![0.0; n];
        grad[i] = 1.0;
        Jet2 {
            value,
            grad,
            hess: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|x| x.is_finite())
            && self.hess.iter().all(|x| x.is_finite())
    }

    /// First-order truncation.
    pub fn to_jet1(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    /// The k-th partial as a first-order jet: value = grad[k], grad = Hessian row k.
    pub fn partial_jet1(&self, k: usize) -> Jet1 {
        let n = self.dim();
        Jet1 {
            value: self.grad[k],
            grad: self.hess[k * n..(k + 1) * n].to_vec(),
        }
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a + b),
            hess: zip(&self.hess, &o.hess, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a - b),
            hess: zip(&self.hess, &o.hess, |a, b| a - b),
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // Grouped so the result is bit-symmetric in (i, j).
                hess[i * n + j] = (self.hess[i * n + j] * o.value + o.hess[i * n + j] * self.value)
                    + (self.grad[i] * o.grad[j] + self.grad[j] * o.grad[i]);
            }
        }
        Jet2 {
            value: self.value * o.value,
            grad: (0..n)
                .map(|i| self.grad[i] * o.value + self.value * o.grad[i])
                .collect(),
            hess,
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|x| -x).collect(),
            hess: self.hess.iter().map(|x| -x).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|x| c * x).collect(),
            hess: self.hess.iter().map(|x| c * x).collect(),
        }
    }

    /// e^u with both derivative orders.
    pub fn exp(&self) -> Jet2 {
        let v = self.value.exp();
        self.unary(v, v, v)
    }

    /// Chain rule for f(u): needs f(u), f'(u), f''(u).
    fn unary(&self, f: f64, fp: f64, fpp: f64) -> Jet2 {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // (g_i * g_j) first: keeps the Hessian bit-symmetric.
                hess[i * n + j] = fp * self.hess[i * n + j] + fpp * (self.grad[i] * self.grad[j]);
            }
        }
        Jet2 {
            value: f,
            grad: self.grad.iter().map(|g| fp * g).collect(),
            hess,
        }
    }

    fn powi(&self, k: i32) -> Jet2 {
        let u = self.value;
        self.unary(
            u.powi(k),
            f64::from(k) * u.powi(k - 1),
            f64::from(k) * f64::from(k - 1) * u.powi(k - 2),
        )
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// First-order jet (value + gradient). Used for derived fields whose own
/// first derivatives feed the curvature formulas (connection coefficients,
/// inverse metrics, transform terms).
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn constant(c: f64, n: usize) -> Jet1 {
        Jet1 {
            value: c,
            grad: vec![0.0; n],
        }
    }

    pub fn zero(n: usize) -> Jet1 {
        Jet1::constant(0.0, n)
    }

    pub fn add(&self, o: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value + o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a + b),
        }
    }

    pub fn sub(&self, o: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value - o.value,
            grad: zip(&self.grad, &o.grad, |a, b| a - b),
        }
    }

    pub fn mul(&self, o: &Jet1) -> Jet1 {
        Jet1 {
            value: self.value * o.value,
            grad: self
                .grad
                .iter()
                .zip(&o.grad)
                .map(|(a, b)| a * o.value + self.value * b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet1 {
        Jet1 {
            value: c * self.value,
            grad: self.grad.iter().map(|x| c * x).collect(),
        }
    }

    pub fn neg(&self) -> Jet1 {
        self.scale(-1.0)
    }
}

/// Evaluate `e` at `p` with exact first and second derivatives.
pub fn eval_jet2(e: &Expr, p: &[f64]) -> Result<Jet2> {
    let n = p.len();
    let jet = eval_rec(e, p, n)?;
    debug_assert!(symmetric(&jet));
    Ok(jet)
}

fn symmetric(j: &Jet2) -> bool {
    let n = j.dim();
    (0..n).all(|i| (0..n).all(|k| j.hess[i * n + k] == j.hess[k * n + i]))
}

fn domain_err(e: &Expr, message: &str) -> Error {
    Error::EvalDomain {
        subexpr: e.to_string(),
        message: message.into(),
    }
}

fn eval_rec(e: &Expr, p: &[f64], n: usize) -> Result<Jet2> {
    match e {
        Expr::Coord(i) => {
            if *i >= n {
                return Err(Error::CoordOutOfRange {
                    index: i + 1,
                    dim: n,
                });
            }
            Ok(Jet2::coord(p[*i], *i, n))
        }
        Expr::Const(c) => Ok(Jet2::constant(*c, n)),
        Expr::NormSq => {
            let mut hess = vec![0.0; n * n];
            for i in 0..n {
                hess[i * n + i] = 2.0;
            }
            Ok(Jet2 {
                value: p.iter().map(|x| x * x).sum(),
                grad: p.iter().map(|x| 2.0 * x).collect(),
                hess,
            })
        }
        Expr::Add(a, b) => Ok(eval_rec(a, p, n)?.add(&eval_rec(b, p, n)?)),
        Expr::Sub(a, b) => Ok(eval_rec(a, p, n)?.sub(&eval_rec(b, p, n)?)),
        Expr::Mul(a, b) => Ok(eval_rec(a, p, n)?.mul(&eval_rec(b, p, n)?)),
        Expr::Div(a, b) => {
            let num = eval_rec(a, p, n)?;
            let den = eval_rec(b, p, n)?;
            if den.value == 0.0 {
                return Err(domain_err(e, "division by zero"));
            }
            let u = den.value;
            // 1/u with chain rule, then product.
            let recip = den.unary(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u));
            Ok(num.mul(&recip))
        }
        Expr::Neg(a) => Ok(eval_rec(a, p, n)?.neg()),
        Expr::Pow(a, k) => {
            let base = eval_rec(a, p, n)?;
            if base.value == 0.0 && *k < 2 {
                return Err(domain_err(e, "pow at zero base with exponent < 2"));
            }
            Ok(base.powi(*k))
        }
        Expr::Exp(a) => {
            let u = eval_rec(a, p, n)?;
            let v = u.value.exp();
            Ok(u.unary(v, v, v))
        }
        Expr::Log(a) => {
            let u = eval_rec(a, p, n)?;
            if u.value <= 0.0 {
                return Err(domain_err(e, "log of non-positive argument"));
            }
            let x = u.value;
            Ok(u.unary(x.ln(), 1.0 / x, -1.0 / (x * x)))
        }
        Expr::Sqrt(a) => {
            let u = eval_rec(a, p, n)?;
            if u.value <= 0.0 {
                return Err(domain_err(e, "sqrt of non-positive argument"));
            }
            let s = u.value.sqrt();
            Ok(u.unary(s, 0.5 / s, -0.25 / (s * u.value)))
        }
        Expr::Sin(a) => {
            let u = eval_rec(a, p, n)?;
            let (s, c) = u.value.sin_cos();
            Ok(u.unary(s, c, -s))
        }
        Expr::Cos(a) => {
            let u = eval_rec(a, p, n)?;
            let (s, c) = u.value.sin_cos();
            Ok(u.unary(c, -s, -c))
        }
    }
}
