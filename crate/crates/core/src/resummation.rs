//! Moment Borel–Laplace resummation and the beta-kernel bridge.

use std::f64::consts::{PI, TAU};

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{angular_distance, borel_singularities, SingularityMethod, SingularitySet};
use crate::error::{Error, Result};
use crate::moments::{gamma_s_scaled, kernel_pair_for, rat_to_f64, KernelPair, MomentFunction, Rational};
use crate::pade::representative;
use crate::quadrature::{integrate, integrate_semi_infinite};
use crate::scaled::ScaledComplex;
use crate::series::{BiSeries, RamifiedSeries};

/// Angular margin kept between a Laplace ray and any singular cone.
pub const RAY_MARGIN: f64 = 2.0 * PI / 180.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResummationResult {
    pub value: Complex64,
    pub direction: f64,
    pub t: Complex64,
    pub quadrature_error: f64,
    /// Reach of the Borel-plane representative along the ray.
    pub pade_radius_used: f64,
}

/// Fails with [`Error::RayBlocked`] if the ray `arg x = d` meets a singular cone.
pub fn check_ray(set: &SingularitySet, kappa: u32, d: f64) -> Result<()> {
    let kf = kappa as f64;
    for p in &set.points {
        let w = p.location();
        let dir = kf * w.arg();
        let half = kf * (p.confidence / w.norm()).min(1.0).asin();
        if angular_distance(d, dir) <= half + RAY_MARGIN {
            return Err(Error::RayBlocked(format!(
                "direction {d:.6} meets the singularity at {}{:+}i (Borel variable x^(1/{kappa}))",
                p.re, p.im
            )));
        }
    }
    Ok(())
}

/// `∫_0^{∞e^{id}} V(x) e_m(x/t) dx/x`, with `V` the diagonal Padé representative
/// of the Borel series.
pub fn laplace_resum(borel_series: &RamifiedSeries, kernel: &KernelPair, d: f64, t: Complex64) -> Result<ResummationResult> {
    let k = kernel.k_f64();
    let phi = d - t.arg();
    let off = angular_distance(d, t.arg());
    if t.norm() == 0.0 || off >= PI / (2.0 * k) {
        return Err(Error::OutsideSector(format!(
            "arg t = {:.6} is not within π/(2k) = {:.6} of d = {d:.6}",
            t.arg(),
            PI / (2.0 * k)
        )));
    }
    let set = borel_singularities(borel_series, SingularityMethod::PadePoles)?;
    check_ray(&set, borel_series.kappa(), d)?;
    let kappa = borel_series.kappa() as f64;
    let coeffs = borel_series.coeffs();
    let pade = if set.entire_like() { None } else { Some(representative(coeffs)?) };
    let v = |x: Complex64| -> Complex64 {
        let w = if kappa == 1.0 { x } else { Complex64::from_polar(x.norm().powf(1.0 / kappa), d / kappa) };
        match &pade {
            Some(p) => p.eval(w),
            None => {
                let mut acc = ScaledComplex::ZERO;
                for c in coeffs.iter().rev() {
                    acc = acc * ScaledComplex::from_complex(w) + *c;
                }
                acc.to_complex()
            }
        }
    };
    let dir = Complex64::from_polar(1.0, d);
    let decay = (k * wrap_pi(phi)).cos();
    let mut r_cut = t.norm() * (40.0 / decay).powf(1.0 / k);
    // Near 0 the integrand behaves like r^{bk-1}; substitute r = y^p when that is singular.
    let (_, b, _) = kernel.moment().as_kernel_form().unwrap_or((1.0, 1.0, kernel.k()));
    let p = if b * k < 1.0 { (1.0 / (b * k)).ceil() } else { 1.0 };
    let integrand = |y: f64| -> Complex64 {
        if y == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = y.powf(p);
        let x = dir * r;
        v(x) * kernel.e_m(x / t) / r * p * y.powf(p - 1.0)
    };
    let mut coarse;
    let mut fine;
    let mut grow = 0;
    loop {
        let top = r_cut.powf(1.0 / p);
        coarse = integrate(integrand, 0.0, top, 1e-300, 1e-9, 2000);
        fine = integrate(integrand, 0.0, top, 1e-300, 1e-13, 4000);
        let edge = integrand(top).norm() * top;
        if edge <= 1e-14 * fine.value.norm().max(f64::MIN_POSITIVE) || grow >= 8 {
            break;
        }
        r_cut *= 1.5;
        grow += 1;
    }
    if !fine.value.is_finite() {
        return Err(Error::Numerical("Laplace integrand is not finite along the ray".into()));
    }
    let err = ((fine.value - coarse.value).norm() + fine.error).max(f64::EPSILON * fine.value.norm()).max(f64::MIN_POSITIVE);
    Ok(ResummationResult {
        value: fine.value,
        direction: d,
        t,
        quadrature_error: err,
        pade_radius_used: r_cut,
    })
}

fn wrap_pi(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

/// Joint transform `Σ u_{jn} t^{j/κ_t} z^{n/κ_z} / Γ(1 + s₁ j/κ_t + s₂ n/κ_z)`.
pub fn joint_borel(u: &BiSeries, s1: Rational, s2: Rational) -> Result<BiSeries> {
    let (kt, kz) = (u.kappa_t() as f64, u.kappa_z() as f64);
    let (a, b) = (rat_to_f64(s1), rat_to_f64(s2));
    let mut err = None;
    let out = BiSeries::from_fn(u.kappa_t(), u.kappa_z(), u.trunc_t(), u.trunc_z(), |j, n| {
        let arg = a * j as f64 / kt + b * n as f64 / kz;
        match gamma_s_scaled(Rational::from_integer(1), arg) {
            Ok(g) => u.get(j, n) / g,
            Err(e) => {
                err = Some(e);
                ScaledComplex::ZERO
            }
        }
    });
    err.map_or(Ok(out), Err)
}

/// Converts the iterated transform `B_{Γ_{s₁},t} B_{Γ_{s₂},z} û` into the joint one:
/// `w_{jn} = v_{jn} Γ(1 + j s₁) Γ(1 + n s₂) / Γ(1 + j s₁ + n s₂)`.
pub fn beta_bridge(v: &BiSeries, s1: Rational, s2: Rational) -> Result<BiSeries> {
    let (kt, kz) = (v.kappa_t() as f64, v.kappa_z() as f64);
    let one = Rational::from_integer(1);
    let mut err = None;
    let out = BiSeries::from_fn(v.kappa_t(), v.kappa_z(), v.trunc_t(), v.trunc_z(), |j, n| {
        let (x, y) = (j as f64 / kt, n as f64 / kz);
        let f = (|| -> Result<ScaledComplex> {
            Ok(gamma_s_scaled(s1, x)? * gamma_s_scaled(s2, y)?
                / gamma_s_scaled(one, rat_to_f64(s1) * x + rat_to_f64(s2) * y)?)
        })();
        match f {
            Ok(f) => v.get(j, n) * f,
            Err(e) => {
                err = Some(e);
                ScaledComplex::ZERO
            }
        }
    });
    err.map_or(Ok(out), Err)
}

/// Quadrature settings for [`kernel_solution_quadrature`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContourOptions {
    /// Radius of the `w` circle; must lie inside the disc of convergence of `φ`.
    pub epsilon: f64,
    pub nodes: usize,
    pub rel_tol: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            nodes: 96,
            rel_tol: 1e-11,
        }
    }
}

/// Solution of `(∂_{m1,t} − λ ∂_{m2,z}^q) v = 0`, `v(0, z) = φ(z)`, from the kernel
/// representation
///
/// `v = m1(0)/(2πi) ∮ φ(w) ∫_0^{∞e^{iθ}} E_{m1}(tλζ^q) E_{m2}(ζz) e_{m2}(ζw)/(ζw) dζ dw`
///
/// with the ray `θ = −arg w` at each node of the circle `|w| = ε`.
pub fn kernel_solution_quadrature(
    lambda: Complex64,
    q: u32,
    m1: &MomentFunction,
    m2: &MomentFunction,
    phi: &RamifiedSeries,
    t: Complex64,
    z: Complex64,
    opts: &ContourOptions,
) -> Result<Complex64> {
    if phi.kappa() != 1 {
        return Err(Error::UnsupportedProblem("kernel representation needs κ = 1 data".into()));
    }
    if q == 0 {
        return Err(Error::UnsupportedProblem("q must be a positive integer".into()));
    }
    if m1.order() < m2.order() * Rational::from_integer(q as i64) {
        return Err(Error::UnsupportedProblem(format!(
            "kernel representation needs ord m1 ≥ q·ord m2, got {} < {}·{}",
            m1.order(),
            q,
            m2.order()
        )));
    }
    let k1 = kernel_pair_for(m1)?;
    let k2 = kernel_pair_for(m2)?;
    let half_window = PI / (2.0 * k2.k_f64());
    if !(half_window > 0.0) {
        return Err(Error::UnsupportedKernel("empty admissible θ window".into()));
    }
    let m10 = m1.eval_f64(0.0)?;
    let eps = opts.epsilon;
    let n = opts.nodes.max(8);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let ang = TAU * i as f64 / n as f64;
        let w = Complex64::from_polar(eps, ang);
        let theta = -ang;
        let ray = Complex64::from_polar(1.0, theta);
        let mut failure = None;
        let inner = integrate_semi_infinite(
            |s| {
                if s == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let zeta = ray * s;
                let f = (|| -> Result<Complex64> {
                    let a = k1.big_e_m(t * lambda * zeta.powu(q))?;
                    let b = k2.big_e_m(zeta * z)?;
                    Ok(a * b * k2.e_m(zeta * w) / (zeta * w) * ray)
                })();
                f.unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                })
            },
            1.0 / eps,
            opts.rel_tol,
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        // dw = i w dφ, so (1/2πi)∮ f dw = (1/2π)∫ f w dφ.
        total += phi.eval(w, 0) * inner.value * w;
    }
    Ok(total * m10 / n as f64)
}
