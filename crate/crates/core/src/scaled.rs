//! Complex numbers with a detached decimal exponent.
//!
//! Formal solution coefficients grow like `Γ(1 + σ j)` and leave the `f64`
//! range long before the truncation orders we care about. A [`ScaledComplex`]
//! keeps a normalized mantissa (`1 <= |mantissa| < 10`, or exactly zero) and an
//! `i64` power of ten, so products and quotients never overflow in practice.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::complex::Complex64;
use num::Zero;
use serde::{Deserialize, Serialize};

const LN_10: f64 = std::f64::consts::LN_10;

/// Exponent gap beyond which the smaller addend is below one ulp of the larger.
const ADD_GAP: i64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    mantissa: Complex64,
    exp10: i64,
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

fn pow10(e: i64) -> f64 {
    10f64.powi(e as i32)
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(0.0, 0.0),
        exp10: 0,
    };
    pub const ONE: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(1.0, 0.0),
        exp10: 0,
    };

    /// Builds `mantissa * 10^exp10` and normalizes it.
    pub fn new(mantissa: Complex64, exp10: i64) -> Self {
        Self::normalized(mantissa, exp10)
    }

    pub fn from_real(x: f64) -> Self {
        Self::normalized(Complex64::new(x, 0.0), 0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::normalized(z, 0)
    }

    /// `exp(ln_abs) * e^{i arg}` without ever forming `exp(ln_abs)` in `f64`.
    pub fn from_polar_ln(ln_abs: f64, arg: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let e = (ln_abs / LN_10).floor();
        let rest = ln_abs - e * LN_10;
        Self::normalized(Complex64::from_polar(rest.exp(), arg), e as i64)
    }

    fn normalized(mantissa: Complex64, exp10: i64) -> Self {
        if !(mantissa.re.is_finite() && mantissa.im.is_finite()) {
            // Keep the non-finite value visible to `is_finite`.
            return ScaledComplex { mantissa, exp10 };
        }
        let mag = mantissa.norm();
        if mag == 0.0 {
            return Self::ZERO;
        }
        let mut shift = mag.log10().floor() as i64;
        let mut m = scale_by_pow10(mantissa, -shift);
        // log10 rounding can leave the magnitude just outside [1, 10).
        let n = m.norm();
        if n >= 10.0 {
            m /= 10.0;
            shift += 1;
        } else if n < 1.0 {
            m *= 10.0;
            shift -= 1;
        }
        ScaledComplex {
            mantissa: m,
            exp10: exp10 + shift,
        }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exp10(&self) -> i64 {
        self.exp10
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// Natural log of the magnitude (`-inf` for zero).
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exp10 as f64 * LN_10
        }
    }

    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().log10() + self.exp10 as f64
        }
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Magnitude as a scaled real.
    pub fn abs(&self) -> ScaledComplex {
        ScaledComplex {
            mantissa: Complex64::new(self.mantissa.norm(), 0.0),
            exp10: self.exp10,
        }
    }

    /// Converts to `Complex64`; saturates to infinity / zero outside the `f64` range.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::zero();
        }
        if self.exp10 > 308 {
            return self.mantissa * f64::INFINITY;
        }
        if self.exp10 < -330 {
            return Complex64::zero();
        }
        scale_by_pow10(self.mantissa, self.exp10)
    }

    /// Real part as `f64` (see [`Self::to_complex`]).
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn conj(&self) -> Self {
        ScaledComplex {
            mantissa: self.mantissa.conj(),
            exp10: self.exp10,
        }
    }

    pub fn recip(&self) -> Self {
        Self::normalized(self.mantissa.inv(), -self.exp10)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::normalized(self.mantissa * factor, self.exp10)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self::normalized(self.mantissa * factor, self.exp10)
    }

    /// Multiplies by `10^e` exactly.
    pub fn shift10(&self, e: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        ScaledComplex {
            mantissa: self.mantissa,
            exp10: self.exp10 + e,
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Compares magnitudes.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.ln_abs()
            .partial_cmp(&other.ln_abs())
            .unwrap_or(Ordering::Equal)
    }

    /// `|self - other| / max(|self|, |other|)`, zero when both vanish.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let scale = if self.cmp_abs(other) == Ordering::Less {
            other.abs()
        } else {
            self.abs()
        };
        if scale.is_zero() {
            return 0.0;
        }
        ((*self - *other) / scale).to_complex().norm()
    }
}

fn scale_by_pow10(z: Complex64, e: i64) -> Complex64 {
    // Split large shifts so the intermediate power of ten stays finite.
    if e.abs() <= 300 {
        z * pow10(e)
    } else {
        let half = e / 2;
        z * pow10(half) * pow10(e - half)
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp10 >= rhs.exp10 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = hi.exp10 - lo.exp10;
        if gap > ADD_GAP {
            return hi;
        }
        Self::normalized(hi.mantissa + lo.mantissa * pow10(-gap), hi.exp10)
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> Self {
        ScaledComplex {
            mantissa: -self.mantissa,
            exp10: self.exp10,
        }
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mantissa * rhs.mantissa, self.exp10 + rhs.exp10)
    }
}

impl Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mantissa / rhs.mantissa, self.exp10 - rhs.exp10)
    }
}

impl std::iter::Sum for ScaledComplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.16e}{:+.16e}i)e{}",
            self.mantissa.re, self.mantissa.im, self.exp10
        )
    }
}
