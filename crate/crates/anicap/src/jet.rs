//! Forward-mode Taylor jets up to third order in at most three variables.
//!
//! Norm families are written once against [`Scalar`] and evaluated either on
//! plain `f64` or on [`Jet`], which carries value, gradient, Hessian and the
//! third-derivative tensor through every arithmetic operation.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::num;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, k: i32) -> Self;
    fn scale(self, c: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn cst(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        num::sqrt(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        num::powi(self, k)
    }
    #[inline]
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Truncated Taylor expansion: `v + g·h + ½ hᵀHh + ⅙ T[h,h,h]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
    pub t: [[[f64; 3]; 3]; 3],
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        g: [0.0; 3],
        h: [[0.0; 3]; 3],
        t: [[[0.0; 3]; 3]; 3],
    };

    pub fn constant(v: f64) -> Jet {
        Jet { v, ..Jet::ZERO }
    }

    /// The coordinate function `y_i` at value `v`.
    pub fn var(v: f64, i: usize) -> Jet {
        let mut j = Jet::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Ambient point seeded as independent variables.
    pub fn seed(y: &[f64; 3]) -> [Jet; 3] {
        [Jet::var(y[0], 0), Jet::var(y[1], 1), Jet::var(y[2], 2)]
    }

    /// Applies a univariate function given its value and first three derivatives.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet {
        let g = &self.g;
        let h = &self.h;
        let mut out = Jet::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * g[i];
            for j in 0..3 {
                out.h[i][j] = f2 * g[i] * g[j] + f1 * h[i][j];
                for k in 0..3 {
                    out.t[i][j][k] = f3 * g[i] * g[j] * g[k]
                        + f2 * (g[i] * h[j][k] + g[j] * h[i][k] + g[k] * h[i][j])
                        + f1 * self.t[i][j][k];
                }
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.v += o.v;
        for i in 0..3 {
            self.g[i] += o.g[i];
            for j in 0..3 {
                self.h[i][j] += o.h[i][j];
                for k in 0..3 {
                    self.t[i][j][k] += o.t[i][j][k];
                }
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (&self, &o);
        let mut out = Jet::constant(a.v * b.v);
        for i in 0..3 {
            out.g[i] = a.v * b.g[i] + b.v * a.g[i];
            for j in 0..3 {
                out.h[i][j] =
                    a.v * b.h[i][j] + b.v * a.h[i][j] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
                for k in 0..3 {
                    out.t[i][j][k] = a.v * b.t[i][j][k]
                        + b.v * a.t[i][j][k]
                        + a.g[i] * b.h[j][k]
                        + a.g[j] * b.h[i][k]
                        + a.g[k] * b.h[i][j]
                        + b.g[i] * a.h[j][k]
                        + b.g[j] * a.h[i][k]
                        + b.g[k] * a.h[i][j];
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Scalar for Jet {
    fn cst(c: f64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = num::sqrt(self.v);
        self.compose(
            s,
            0.5 / s,
            -0.25 / (s * self.v),
            0.375 / (s * self.v * self.v),
        )
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }
    fn powi(self, k: i32) -> Self {
        match k {
            0 => Jet::constant(1.0),
            1 => self,
            2 => self * self,
            _ => {
                let kf = k as f64;
                let v = self.v;
                self.compose(
                    num::powi(v, k),
                    kf * num::powi(v, k - 1),
                    kf * (kf - 1.0) * num::powi(v, k - 2),
                    kf * (kf - 1.0) * (kf - 2.0) * num::powi(v, k - 3),
                )
            }
        }
    }
    fn scale(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..3 {
            self.g[i] *= c;
            for j in 0..3 {
                self.h[i][j] *= c;
                for k in 0..3 {
                    self.t[i][j][k] *= c;
                }
            }
        }
        self
    }
}
