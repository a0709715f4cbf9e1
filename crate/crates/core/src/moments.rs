//! Moment functions of real order and their kernel pairs.
//!
//! A [`MomentFunction`] is `a · Π Γ_{s_i}(u)^{±1}`, where each factor may carry
//! a shift `b ≥ 1` (`Γ(b + s u)` for `s ≥ 0`, `1/Γ(b − s u)` for `s < 0`).
//! Values are assembled factor by factor in [`ScaledComplex`] so that
//! `m(u)` for large `u` never overflows.

use std::f64::consts::PI;
use std::fmt;

use num::complex::Complex64;
use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scaled::ScaledComplex;

/// Exact rational used for orders and pole orders.
pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

pub fn rat_to_f64(q: Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Above this many recurrence steps `gamma_scaled` switches to `ln Γ`.
const RECURRENCE_LIMIT: f64 = 20_000.0;

/// `Γ(x)` as a scaled real.
///
/// Positive arguments reduce to `Γ(y)`, `y ∈ [1, 2)`, and multiply the
/// recurrence factors back up; negative non-integers use reflection.
pub fn gamma_scaled(x: f64) -> Result<ScaledComplex> {
    if !x.is_finite() {
        return Err(Error::Numerical(format!("gamma of non-finite {x}")));
    }
    if x <= 0.0 {
        if x == x.floor() {
            return Err(Error::GammaPole { arg: x });
        }
        // Γ(x) = π / (sin(πx) Γ(1 − x))
        let s = (PI * x).sin();
        return Ok(ScaledComplex::from_real(PI / s) / gamma_scaled(1.0 - x)?);
    }
    if x < 1.0 {
        return Ok(gamma_scaled(x + 1.0)?.scale_real(1.0 / x));
    }
    let k = x.floor() - 1.0;
    if k > RECURRENCE_LIMIT {
        return Ok(ScaledComplex::from_polar_ln(statrs::function::gamma::ln_gamma(x), 0.0));
    }
    let y = x - k;
    let gy = if y == 1.0 { 1.0 } else { statrs::function::gamma::gamma(y) };
    let mut acc = ScaledComplex::from_real(gy);
    let mut chunk = 1.0f64;
    for i in 0..k as u64 {
        chunk *= y + i as f64;
        if chunk > 1e250 {
            acc = acc.scale_real(chunk);
            chunk = 1.0;
        }
    }
    Ok(acc.scale_real(chunk))
}

/// `Γ_s(u)`: `Γ(1 + s u)` for `s ≥ 0` and `1/Γ(1 − s u)` for `s < 0`.
pub fn gamma_s_scaled(s: Rational, u: f64) -> Result<ScaledComplex> {
    let sf = rat_to_f64(s);
    if s.is_negative() {
        Ok(gamma_scaled(1.0 - sf * u)?.recip())
    } else {
        gamma_scaled(1.0 + sf * u)
    }
}

/// `Γ_s(u)` as `f64` (may be `inf` for large arguments; see [`gamma_s_scaled`]).
pub fn gamma_s(s: Rational, u: f64) -> Result<f64> {
    Ok(gamma_s_scaled(s, u)?.to_f64())
}

/// `ln Γ_s(u)`.
pub fn ln_gamma_s(s: Rational, u: f64) -> Result<f64> {
    Ok(gamma_s_scaled(s, u)?.ln_abs())
}

/// One factor `Γ(shift + s u)^{sign}` (`s ≥ 0`) or `Γ(shift − s u)^{−sign}` (`s < 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub s: Rational,
    pub sign: i8,
    pub shift: f64,
}

impl GammaFactor {
    fn eval(&self, u: f64) -> Result<ScaledComplex> {
        let sf = rat_to_f64(self.s);
        let v = if self.s.is_negative() {
            gamma_scaled(self.shift - sf * u)?.recip()
        } else {
            gamma_scaled(self.shift + sf * u)?
        };
        Ok(if self.sign < 0 { v.recip() } else { v })
    }

    fn order(&self) -> Rational {
        self.s * Rational::from_integer(self.sign as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFunction {
    factors: Vec<GammaFactor>,
    scale: f64,
}

impl MomentFunction {
    /// `m ≡ 1` (order 0).
    pub fn one() -> Self {
        Self {
            factors: Vec::new(),
            scale: 1.0,
        }
    }

    /// `Γ_s`.
    pub fn gamma(s: Rational) -> Self {
        Self {
            factors: vec![GammaFactor {
                s,
                sign: 1,
                shift: 1.0,
            }],
            scale: 1.0,
        }
    }

    /// `a · Γ(b + u/k)` with `a > 0`, `b ≥ 1`, `k > 0`.
    pub fn general(a: f64, b: f64, k: Rational) -> Result<Self> {
        if !(a > 0.0) || !(b >= 1.0) || !k.is_positive() {
            return Err(Error::UnsupportedKernel(format!(
                "a·Γ(b+u/k) needs a > 0, b >= 1, k > 0 (got a={a}, b={b}, k={k})"
            )));
        }
        Ok(Self {
            factors: vec![GammaFactor {
                s: k.recip(),
                sign: 1,
                shift: b,
            }],
            scale: a,
        })
    }

    pub fn factors(&self) -> &[GammaFactor] {
        &self.factors
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Exact order `Σ sign·s`.
    pub fn order(&self) -> Rational {
        self.factors
            .iter()
            .fold(Rational::zero(), |acc, f| acc + f.order())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self {
            factors,
            scale: self.scale * other.scale,
        }
    }

    pub fn inv(&self) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .map(|f| GammaFactor { sign: -f.sign, ..*f })
                .collect(),
            scale: 1.0 / self.scale,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    /// `m(u)` as a positive scaled real.
    pub fn eval(&self, u: f64) -> Result<ScaledComplex> {
        let mut acc = ScaledComplex::from_real(self.scale);
        for f in &self.factors {
            acc = acc * f.eval(u)?;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, u: f64) -> Result<f64> {
        Ok(self.eval(u)?.to_f64())
    }

    /// `m(index/κ)` with the index reported on failure.
    pub fn eval_at_index(&self, index: usize, kappa: u32) -> Result<ScaledComplex> {
        let u = index as f64 / kappa as f64;
        self.eval(u).map_err(|e| match e {
            Error::GammaPole { .. } => Error::MomentPole { index, u },
            other => other,
        })
    }

    /// `(c, C)` with `c^n Γ_s(n) ≤ m(n) ≤ C^n Γ_s(n)` for `1 ≤ n ≤ n_max`,
    /// where `s` is the order of `m`.
    pub fn sandwich_constants(&self, n_max: usize) -> Result<(f64, f64)> {
        let s = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for n in 1..=n_max {
            let ratio = self.eval(n as f64)? / gamma_s_scaled(s, n as f64)?;
            let root = (ratio.ln_abs() / n as f64).exp();
            lo = lo.min(root);
            hi = hi.max(root);
        }
        Ok((lo, hi))
    }

    /// The single-factor form `a·Γ(b + u/k)` as `(a, b, k)`, if applicable.
    pub fn as_kernel_form(&self) -> Option<(f64, f64, Rational)> {
        match self.factors.as_slice() {
            [f] if f.sign == 1 && f.s.is_positive() => Some((self.scale, f.shift, f.s.recip())),
            _ => None,
        }
    }
}

impl fmt::Display for MomentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "{}", self.scale);
        }
        let mut first = true;
        if self.scale != 1.0 {
            write!(f, "{}", self.scale)?;
            first = false;
        }
        for g in &self.factors {
            let op = if g.sign > 0 { "*" } else { "/" };
            if first && g.sign > 0 {
                // no leading operator
            } else if first {
                write!(f, "1/")?;
            } else {
                write!(f, "{op}")?;
            }
            first = false;
            if g.shift == 1.0 {
                write!(f, "Gamma({})", g.s)?;
            } else {
                write!(f, "Gamma({}; shift {})", g.s, g.shift)?;
            }
        }
        Ok(())
    }
}

/// Kernel functions `e_m`, `E_m` of a moment function `a·Γ(b + u/k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    moment: MomentFunction,
    a: f64,
    b: f64,
    k: Rational,
    /// Smallest `p` with `p k > 1/2`.
    p: u32,
}

/// Builds the kernel pair of a single-factor moment function.
pub fn kernel_pair_for(m: &MomentFunction) -> Result<KernelPair> {
    let (a, b, k) = m.as_kernel_form().ok_or_else(|| {
        Error::UnsupportedKernel(format!(
            "`{m}` is not of the form a·Gamma(b+u/k); rewrite it with an equivalent Gamma(s) of the same order"
        ))
    })?;
    let half = rat(1, 2);
    let mut p = 1u32;
    while k * Rational::from_integer(p as i64) <= half {
        p += 1;
    }
    Ok(KernelPair {
        moment: m.clone(),
        a,
        b,
        k,
        p,
    })
}

impl KernelPair {
    pub fn moment(&self) -> &MomentFunction {
        &self.moment
    }

    /// Kernel order `k` (the moment function has order `1/k`).
    pub fn k(&self) -> Rational {
        self.k
    }

    pub fn k_f64(&self) -> f64 {
        rat_to_f64(self.k)
    }

    pub fn lift(&self) -> u32 {
        self.p
    }

    /// `m̃(u) = m(u/p)`, of order `1/(p k)`.
    pub fn lifted_moment(&self) -> MomentFunction {
        MomentFunction {
            factors: vec![GammaFactor {
                s: (self.k * Rational::from_integer(self.p as i64)).recip(),
                sign: 1,
                shift: self.b,
            }],
            scale: self.a,
        }
    }

    /// Flat kernel `e_m(z) = a k z^{bk} e^{−z^k}`, evaluated through the
    /// root lift `e_m̃(z^{1/p})/p` when `k ≤ 1/2`.
    pub fn e_m(&self, z: Complex64) -> Complex64 {
        if z == Complex64::zero() {
            return Complex64::zero();
        }
        let p = self.p as f64;
        let kt = self.k_f64() * p;
        let w = if self.p == 1 { z } else { z.powf(1.0 / p) };
        let val = self.a * kt * w.powf(self.b * kt) * (-w.powf(kt)).exp();
        val / p
    }

    /// Entire kernel `E_m(z) = Σ z^n / m(n) = E_{1/k, b}(z) / a`.
    pub fn big_e_m(&self, z: Complex64) -> Result<Complex64> {
        let alpha = self.k.recip();
        Ok(mittag_leffler_general(rat_to_f64(alpha), self.b, z)? / self.a)
    }

    /// `∫_0^∞ x^{u−1} e_m(x) dx` by adaptive quadrature.
    pub fn moment_integral(&self, u: f64) -> quadrature::Integral {
        let scale = 1.0f64.max(u / self.k_f64()).powf(1.0 / self.k_f64());
        quadrature::integrate_semi_infinite_checked(
            |x| {
                if x == 0.0 {
                    Complex64::zero()
                } else {
                    self.e_m(Complex64::new(x, 0.0)) * x.powf(u - 1.0)
                }
            },
            scale,
            1e-13,
        )
    }

    /// Empirical `(A, B)` with `|e_m(x e^{iθ})| ≤ A e^{−(x/B)^k}` for
    /// `|θ| ≤ π/(2k) − margin`, on a grid `x ∈ (0, x_max]`.
    pub fn flatness_constants(&self, margin: f64, x_max: f64) -> (f64, f64) {
        let k = self.k_f64();
        let theta_max = PI / (2.0 * k) - margin;
        // Half of the worst-direction decay rate.
        let rate = 0.5 * (k * theta_max).cos().max(1e-3);
        let b = rate.powf(-1.0 / k);
        let mut a = 0.0f64;
        for (x, th) in flatness_grid(theta_max, x_max) {
            let v = self.e_m(Complex64::from_polar(x, th)).norm();
            a = a.max(v * (x / b).powf(k).exp());
        }
        (a, b)
    }
}

/// Sample points `(x, θ)` used by [`KernelPair::flatness_constants`].
pub fn flatness_grid(theta_max: f64, x_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..=200 {
        let x = x_max * i as f64 / 200.0;
        for j in 0..=20 {
            let th = -theta_max + 2.0 * theta_max * j as f64 / 20.0;
            out.push((x, th));
        }
    }
    out
}

/// Series/asymptotic switch radius `40^α`.
pub fn ml_switch_radius(alpha: f64) -> f64 {
    40f64.powf(alpha)
}

/// Mittag-Leffler function `E_α(z) = Σ z^n / Γ(1 + α n)` for `α ∈ (0, 2]`.
///
/// Compensated series inside `|z| ≤ 40^α`, exponential asymptotics outside
/// it within `|arg z| ≤ απ/2`; everything else is refused.
pub fn mittag_leffler(alpha: f64, z: Complex64) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::UnsupportedRange(format!("alpha = {alpha} not in (0, 2]")));
    }
    mittag_leffler_general(alpha, 1.0, z)
}

/// Two-parameter `E_{α,β}(z) = Σ z^n / Γ(β + α n)`.
pub fn mittag_leffler_general(alpha: f64, beta: f64, z: Complex64) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(Error::UnsupportedRange(format!("alpha = {alpha} must be positive")));
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    let r = z.norm();
    if r <= ml_switch_radius(alpha) || alpha > 2.0 {
        return ml_series(alpha, beta, z);
    }
    if z.arg().abs() <= alpha * PI / 2.0 {
        return Ok(ml_asymptotic(alpha, beta, z));
    }
    Err(Error::UnsupportedRange(format!(
        "E_{{{alpha},{beta}}}({z}) lies outside the validated sector |arg z| <= {:.4}",
        alpha * PI / 2.0
    )))
}

fn ml_series(alpha: f64, beta: f64, z: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::zero();
    let mut comp = Complex64::zero();
    let mut max_term = 0.0f64;
    let ln_z = if z == Complex64::zero() {
        None
    } else {
        Some(z.ln())
    };
    let peak = z.norm().powf(1.0 / alpha);
    for n in 0..100_000usize {
        let arg = beta + alpha * n as f64;
        let term = match ln_z {
            None if n == 0 => Complex64::new(1.0 / gamma_scaled(arg)?.to_f64(), 0.0),
            None => break,
            Some(l) => {
                let lg = gamma_scaled(arg)?.ln_abs();
                (l * n as f64 - lg).exp()
            }
        };
        max_term = max_term.max(term.norm());
        // Kahan summation.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if n as f64 > peak + 5.0 && term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    if !(sum.re.is_finite() && sum.im.is_finite()) {
        return Err(Error::UnsupportedRange(format!("E_{{{alpha},{beta}}} overflow at {z}")));
    }
    if max_term > 1e5 * sum.norm() {
        return Err(Error::UnsupportedRange(format!(
            "E_{{{alpha},{beta}}}({z}): series cancellation loses more than 5 digits"
        )));
    }
    Ok(sum)
}

fn ml_asymptotic(alpha: f64, beta: f64, z: Complex64) -> Complex64 {
    let w = z.powf(1.0 / alpha);
    let lead = w.exp() * z.powf((1.0 - beta) / alpha) / alpha;
    let mut corr = Complex64::zero();
    for k in 1..=12 {
        let g = beta - alpha * k as f64;
        let recip = if g <= 0.0 && g == g.floor() {
            0.0
        } else {
            1.0 / statrs::function::gamma::gamma(g)
        };
        corr += z.powi(-k) * recip;
    }
    lead - corr
}

impl Default for MomentFunction {
    fn default() -> Self {
        Self::gamma(Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_s_examples() {
        assert!((gamma_s(rat(1, 1), 3.0).unwrap() - 6.0).abs() < 1e-13);
        assert_eq!(gamma_s(rat(0, 1), 17.5).unwrap(), 1.0);
        assert!((gamma_s(rat(-1, 1), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(gamma_s(rat(1, 1), -1.0), Err(Error::GammaPole { .. })));
        assert!(matches!(gamma_scaled(-3.0), Err(Error::GammaPole { .. })));
        // Γ(−1/2) = −2√π
        let v = gamma_scaled(-0.5).unwrap().to_f64();
        assert!((v + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_scaled_matches_factorials() {
        let mut f = ScaledComplex::ONE;
        for n in 1..=300u32 {
            f = f.scale_real(n as f64);
            let g = gamma_scaled(n as f64 + 1.0).unwrap();
            assert!(g.rel_diff(&f) < 1e-13, "n = {n}");
        }
        let big = gamma_scaled(30_001.0).unwrap();
        let lg = statrs::function::gamma::ln_gamma(30_001.0);
        assert!((big.ln_abs() - lg).abs() < 1e-9);
    }

    #[test]
    fn moment_eval_examples() {
        let g1 = MomentFunction::gamma(rat(1, 1));
        assert!((g1.eval_f64(5.0).unwrap() - 120.0).abs() < 1e-12);
        let sq = g1.mul(&g1);
        assert!((sq.eval_f64(2.0).unwrap() - 4.0).abs() < 1e-13);
        let q = MomentFunction::gamma(rat(2, 1)).div(&g1);
        assert_eq!(q.order(), rat(1, 1));
        // Independent oracle: Γ(7)/Γ(4) from factorials.
        assert!((q.eval_f64(3.0).unwrap() - 720.0 / 6.0).abs() < 1e-11);
    }

    #[test]
    fn order_is_a_homomorphism() {
        let a = MomentFunction::gamma(rat(1, 2));
        let b = MomentFunction::gamma(rat(-3, 2));
        assert_eq!(a.mul(&b).order(), a.order() + b.order());
        assert_eq!(a.div(&b).order(), a.order() - b.order());
        assert_eq!(MomentFunction::one().order(), rat(0, 1));
    }

    #[test]
    fn reciprocal_gamma_pairs_cancel() {
        for s in [rat(1, 2), rat(1, 1), rat(2, 1), rat(3, 2)] {
            let p = MomentFunction::gamma(s);
            let n = MomentFunction::gamma(-s);
            for k in 0..=100 {
                let v = p.eval(k as f64).unwrap() * n.eval(k as f64).unwrap();
                assert!((v.to_f64() - 1.0).abs() < 1e-12, "s={s} n={k}");
            }
        }
    }

    #[test]
    fn moments_are_positive_and_sandwiched() {
        let ms = [
            MomentFunction::gamma(rat(1, 1)),
            MomentFunction::gamma(rat(-1, 2)),
            MomentFunction::general(2.0, 1.5, rat(3, 1)).unwrap(),
            MomentFunction::gamma(rat(2, 1)).div(&MomentFunction::gamma(rat(1, 1))),
        ];
        for m in &ms {
            assert!(m.eval_f64(0.0).unwrap() > 0.0);
            for i in 0..50 {
                assert!(m.eval(i as f64 * 0.37).unwrap().mantissa().re > 0.0);
            }
            let (c, cc) = m.sandwich_constants(60).unwrap();
            assert!(c > 0.0 && cc.is_finite() && c <= cc, "{m}: {c} {cc}");
        }
    }

    #[test]
    fn classical_kernel_pair() {
        let kp = kernel_pair_for(&MomentFunction::gamma(rat(1, 1))).unwrap();
        assert_eq!(kp.lift(), 1);
        let x = 2.3;
        let e = kp.e_m(Complex64::new(x, 0.0)).re;
        assert!((e - x * (-x).exp()).abs() < 1e-15);
        let big = kp.big_e_m(Complex64::new(1.0, 0.0)).unwrap();
        assert!((big.re - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn half_order_kernel_reproduces_moment() {
        let kp = kernel_pair_for(&MomentFunction::gamma(rat(1, 2))).unwrap();
        assert_eq!(kp.k(), rat(2, 1));
        let x = 1.1f64;
        let e = kp.e_m(Complex64::new(x, 0.0)).re;
        assert!((e - 2.0 * x * x * (-x * x).exp()).abs() < 1e-15);
        let i = kp.moment_integral(1.0);
        assert!((i.value.re - PI.sqrt() / 2.0).abs() < 1e-10, "{}", i.value.re);
    }

    #[test]
    fn small_order_kernel_uses_root_lift() {
        let m = MomentFunction::gamma(rat(3, 1));
        let kp = kernel_pair_for(&m).unwrap();
        assert_eq!(kp.lift(), 2);
        let mt = kp.lifted_moment();
        assert!((mt.eval_f64(2.0).unwrap() - 6.0).abs() < 1e-13);
        assert!((m.eval_f64(1.0).unwrap() - 6.0).abs() < 1e-13);
        let i = kp.moment_integral(1.0);
        assert!((i.value.re - 6.0).abs() / 6.0 < 1e-8, "{}", i.value.re);
    }

    #[test]
    fn composite_moment_has_no_kernel() {
        let m = MomentFunction::gamma(rat(1, 2)).mul(&MomentFunction::gamma(rat(1, 2)));
        assert!(matches!(kernel_pair_for(&m), Err(Error::UnsupportedKernel(_))));
        assert!(kernel_pair_for(&MomentFunction::gamma(rat(-1, 1))).is_err());
    }

    #[test]
    fn moment_integrals_match() {
        for m in [
            MomentFunction::gamma(rat(1, 1)),
            MomentFunction::gamma(rat(1, 2)),
            MomentFunction::general(1.5, 2.0, rat(1, 1)).unwrap(),
        ] {
            let kp = kernel_pair_for(&m).unwrap();
            for u in [0.5, 1.0, 1.5, 2.0] {
                let want = m.eval_f64(u).unwrap();
                let got = kp.moment_integral(u).value.re;
                assert!((got - want).abs() / want < 1e-8, "{m} u={u}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn kernel_flatness_bound_holds() {
        for m in [MomentFunction::gamma(rat(1, 1)), MomentFunction::gamma(rat(1, 2))] {
            let kp = kernel_pair_for(&m).unwrap();
            let (a, b) = kp.flatness_constants(0.1, 12.0);
            let k = kp.k_f64();
            let theta_max = PI / (2.0 * k) - 0.1;
            // Check off the fitting grid.
            for i in 0..300 {
                let x = 0.013 + i as f64 * 0.0397;
                for j in 0..13 {
                    let th = -theta_max + 2.0 * theta_max * j as f64 / 12.0;
                    let v = kp.e_m(Complex64::from_polar(x, th)).norm();
                    assert!(v <= a * (-(x / b).powf(k)).exp() * (1.0 + 1e-9), "{m} x={x} th={th}");
                }
            }
        }
    }

    #[test]
    fn big_e_matches_series_definition() {
        let m = MomentFunction::gamma(rat(1, 2));
        let kp = kernel_pair_for(&m).unwrap();
        for z in [Complex64::new(0.5, 0.5), Complex64::new(-1.5, 0.2), Complex64::new(0.0, 2.0)] {
            let direct: Complex64 = (0..200)
                .map(|n| z.powi(n) / m.eval_f64(n as f64).unwrap())
                .sum();
            let got = kp.big_e_m(z).unwrap();
            assert!((got - direct).norm() < 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn mittag_leffler_examples() {
        let two = Complex64::new(2.0, 0.0);
        assert!((mittag_leffler(1.0, two).unwrap().re - 2f64.exp()).abs() < 1e-12);
        assert!((mittag_leffler(0.5, Complex64::zero()).unwrap().re - 1.0).abs() < 1e-15);
        // Independent oracle: E_{1/2}(z) = e^{z²} erfc(−z).
        let want = 1f64.exp() * statrs::function::erf::erfc(-1.0);
        let got = mittag_leffler(0.5, Complex64::new(1.0, 0.0)).unwrap().re;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn mittag_leffler_asymptotic_branch_and_refusals() {
        // Large argument inside the sector: compare with the erfc identity.
        let z = 7.0;
        let want = (z * z) + statrs::function::erf::erfc(-z).ln();
        let got = mittag_leffler(0.5, Complex64::new(z, 0.0)).unwrap().re.ln();
        assert!((got - want).abs() < 1e-9);
        // Outside the sector at large modulus: refused.
        assert!(matches!(
            mittag_leffler(0.5, Complex64::new(-30.0, 0.0)),
            Err(Error::UnsupportedRange(_))
        ));
        // Severe cancellation inside the series radius: refused rather than wrong.
        assert!(mittag_leffler(0.5, Complex64::new(-6.0, 0.0)).is_err());
        assert!(mittag_leffler(2.5, Complex64::new(1.0, 0.0)).is_err());
    }
}
