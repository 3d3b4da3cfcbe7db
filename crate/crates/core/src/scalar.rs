//! Scalar types shared by every chart: `f64` for real trajectories, `C` for
//! identity checks, and [`Jet`] for exact iterated Lie derivatives.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Complex scalar used throughout the identity checks.
pub type C = Complex64;

pub const I: C = C::new(0.0, 1.0);

/// Field operations needed by the polynomial / rational model formulas.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;

    /// Principal natural logarithm.
    fn ln(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    fn square(self) -> Self {
        self * self
    }
}

/// Scalars that can also absorb complex constants (chart maps with `i`).
pub trait ComplexScalar: Scalar {
    fn from_c(c: C) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
}

impl Scalar for C {
    fn from_f64(x: f64) -> Self {
        C::new(x, 0.0)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
}

impl ComplexScalar for C {
    fn from_c(c: C) -> Self {
        c
    }
}

/// Number of Taylor coefficients carried by a [`Jet`] (orders 0 through 5).
pub const JET_LEN: usize = 6;

/// Truncated Taylor series `sum c_k t^k` in one variable with complex
/// coefficients. Arithmetic is exact up to truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub coeffs: [C; JET_LEN],
}

impl Jet {
    pub fn constant(c: C) -> Self {
        let mut coeffs = [C::new(0.0, 0.0); JET_LEN];
        coeffs[0] = c;
        Jet { coeffs }
    }

    /// `c + t`, the identity variable shifted to `c`.
    pub fn variable(c: C) -> Self {
        let mut j = Jet::constant(c);
        j.coeffs[1] = C::new(1.0, 0.0);
        j
    }

    pub fn value(&self) -> C {
        self.coeffs[0]
    }

    /// k-th derivative at t = 0, i.e. `k! c_k`.
    pub fn derivative(&self, k: usize) -> C {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }

    /// Antiderivative with zero constant term (the top coefficient is dropped).
    pub fn integrate(&self) -> Self {
        let mut out = Jet::constant(C::new(0.0, 0.0));
        for k in 1..JET_LEN {
            out.coeffs[k] = self.coeffs[k - 1] / k as f64;
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = [C::new(0.0, 0.0); JET_LEN];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().take(JET_LEN - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet { coeffs: out }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let b0 = rhs.coeffs[0];
        let mut q = [C::new(0.0, 0.0); JET_LEN];
        for k in 0..JET_LEN {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Jet { coeffs: q }
    }
}

impl Scalar for Jet {
    fn from_f64(x: f64) -> Self {
        Jet::constant(C::new(x, 0.0))
    }

    fn ln(self) -> Self {
        // k a_k = sum_{j=1..k} j l_j a_{k-j}
        let a = self.coeffs;
        let mut l = [C::new(0.0, 0.0); JET_LEN];
        l[0] = a[0].ln();
        for k in 1..JET_LEN {
            let mut acc = a[k] * k as f64;
            for j in 1..k {
                acc -= l[j] * a[k - j] * j as f64;
            }
            l[k] = acc / (a[0] * k as f64);
        }
        Jet { coeffs: l }
    }
}

impl ComplexScalar for Jet {
    fn from_c(c: C) -> Self {
        Jet::constant(c)
    }
}
