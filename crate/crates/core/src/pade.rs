//! Robust Padé approximation and pole extraction.
//!
//! Approximants are computed from the SVD null vector of the Toeplitz block,
//! reducing the degrees whenever the block is numerically rank deficient.
//! Branch points are located through the logarithmic derivative `f'/f`,
//! which turns `(1 − x/ξ)^{−γ}` into a simple pole at `ξ` with residue `−γ`.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::Zero;

use crate::characteristic::polynomial_roots;
use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

const RANK_TOL: f64 = 1e-13;

/// `N(x/scale) / D(x/scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pade {
    pub num: Vec<Complex64>,
    pub den: Vec<Complex64>,
    pub scale: f64,
}

fn horner(p: &[Complex64], w: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::zero(), |acc, &c| acc * w + c)
}

fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

fn trim(p: &mut Vec<Complex64>) {
    let max = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while p.len() > 1 && p.last().is_some_and(|c| c.norm() <= 1e-14 * max) {
        p.pop();
    }
}

impl Pade {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let w = x / self.scale;
        horner(&self.num, w) / horner(&self.den, w)
    }

    /// Poles in the original variable.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        Ok(polynomial_roots(&self.den)?.into_iter().map(|w| w * self.scale).collect())
    }

    /// Residue at a pole of the approximant, with respect to the rescaled variable.
    pub fn residue_scaled(&self, pole: Complex64) -> Complex64 {
        let w = pole / self.scale;
        horner(&self.num, w) / horner(&derivative(&self.den), w)
    }
}

/// Geometric rescaling of a series so that its radius of convergence is near 1
/// in the new variable, followed by division by the largest coefficient.
///
/// Returns the rescaled coefficients and the scale `ρ` (`x = ρ w`).
pub fn rescale(c: &[ScaledComplex]) -> (Vec<Complex64>, f64) {
    let (w, rho, _) = rescale_with_norm(c);
    (w, rho)
}

fn rescale_with_norm(c: &[ScaledComplex]) -> (Vec<Complex64>, f64, ScaledComplex) {
    let pts: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .skip(c.len() / 2)
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| (j as f64, v.ln_abs()))
        .collect();
    let rho = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (-sxy / sxx).exp()
    } else {
        1.0
    };
    let rho = if rho.is_finite() && rho > 0.0 { rho } else { 1.0 };
    let scaled: Vec<ScaledComplex> = c
        .iter()
        .enumerate()
        .map(|(j, v)| *v * ScaledComplex::from_polar_ln(j as f64 * rho.ln(), 0.0))
        .collect();
    let top = scaled
        .iter()
        .max_by(|a, b| a.cmp_abs(b))
        .copied()
        .unwrap_or(ScaledComplex::ONE);
    let norm = if top.is_zero() { ScaledComplex::ONE } else { top.abs() };
    (scaled.iter().map(|v| (*v / norm).to_complex()).collect(), rho, norm)
}

/// `[L/M]` approximant of `Σ c_j w^j` (coefficients `c_0..c_{L+M}` are used).
pub fn pade(c: &[Complex64], l: usize, m: usize, scale: f64) -> Result<Pade> {
    if c.len() < l + m + 1 {
        return Err(Error::TruncationExhausted {
            needed: l + m + 1,
            available: c.len(),
        });
    }
    let norm = c[..=l + m].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(Pade {
            num: vec![Complex64::zero()],
            den: vec![Complex64::new(1.0, 0.0)],
            scale,
        });
    }
    let at = |i: i64| if i < 0 { Complex64::zero() } else { c[i as usize] };
    let (mut l, mut m) = (l, m);
    let b: Vec<Complex64> = loop {
        if m == 0 {
            break vec![Complex64::new(1.0, 0.0)];
        }
        // Square (M+1)x(M+1) block: M equations plus a zero row, so that V is full.
        let mut block = DMatrix::<Complex64>::zeros(m + 1, m + 1);
        for r in 0..m {
            for k in 0..=m {
                block[(r, k)] = at((l + 1 + r) as i64 - k as i64);
            }
        }
        let svd = block.svd(false, true);
        let sv = &svd.singular_values;
        let rank = sv.iter().filter(|&&s| s > RANK_TOL * norm).count();
        if rank < m {
            let drop = m - rank;
            m -= drop;
            l = l.saturating_sub(drop);
            continue;
        }
        let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD without right vectors".into()))?;
        let (imin, _) = sv
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        break (0..=m).map(|k| vt[(imin, k)].conj()).collect();
    };
    let mut num: Vec<Complex64> = (0..=l)
        .map(|i| (0..=m.min(i)).map(|k| b[k] * c[i - k]).sum())
        .collect();
    let mut den = b;
    trim(&mut den);
    trim(&mut num);
    Ok(Pade { num, den, scale })
}

/// Coefficients of `f'/f` after removing a leading zero of order `k`; returns `(k, h)`.
pub fn log_derivative(c: &[Complex64]) -> Option<(usize, Vec<Complex64>)> {
    let k = c.iter().position(|v| !v.is_zero())?;
    let g = &c[k..];
    if g.len() < 2 {
        return Some((k, Vec::new()));
    }
    let mut h: Vec<Complex64> = Vec::with_capacity(g.len() - 1);
    for j in 0..g.len() - 1 {
        let mut acc = g[j + 1] * (j + 1) as f64;
        for i in 1..=j {
            acc -= g[i] * h[j - i];
        }
        h.push(acc / g[0]);
    }
    Some((k, h))
}

/// A pole that persisted across consecutive approximation orders.
#[derive(Debug, Clone, PartialEq)]
pub struct StablePole {
    pub location: Complex64,
    pub confidence: f64,
    /// Residue of `f'/f` (minus the local exponent), when computed from the log-derivative.
    pub residue: Complex64,
}

/// Poles of the log-derivative approximants `[k/k]` for the last three admissible
/// `k`, kept when present in all three within `rel_tol` and not explained by a zero of `f`.
pub fn stable_log_poles(c: &[ScaledComplex], rel_tol: f64, max_modulus: f64) -> Result<(Vec<StablePole>, f64)> {
    let (w, rho) = rescale(c);
    let Some((_, h)) = log_derivative(&w) else {
        return Ok((Vec::new(), rho));
    };
    if h.len() < 7 {
        return Ok((Vec::new(), rho));
    }
    let kmax = (h.len() - 1) / 2;
    let mut orders = Vec::new();
    for k in [kmax - 2, kmax - 1, kmax] {
        let p = pade(&h, k, k, 1.0)?;
        let poles: Vec<(Complex64, Complex64)> = p
            .poles()?
            .into_iter()
            .map(|z| (z, p.residue_scaled(z)))
            .filter(|(z, res)| {
                let r = res.re.round();
                let zero_of_f = r >= 1.0 && (*res - Complex64::new(r, 0.0)).norm() < 1e-3;
                z.norm() <= max_modulus && res.norm() > 1e-8 && !zero_of_f
            })
            .collect();
        orders.push(poles);
    }
    let mut out = Vec::new();
    for &(z, res) in &orders[2] {
        let mut spread = 0.0f64;
        let mut ok = true;
        for other in &orders[..2] {
            match other
                .iter()
                .map(|(y, _)| (y - z).norm())
                .min_by(f64::total_cmp)
            {
                Some(d) if d <= rel_tol * z.norm() => spread = spread.max(d),
                _ => ok = false,
            }
        }
        if ok {
            out.push(StablePole {
                location: z * rho,
                confidence: (spread * rho).max(1e-12 * z.norm() * rho),
                residue: res,
            });
        }
    }
    out.sort_by(|a, b| a.location.norm().total_cmp(&b.location.norm()));
    Ok((out, rho))
}

/// Diagonal approximant of the series itself, for evaluation.
pub fn representative(c: &[ScaledComplex]) -> Result<Pade> {
    if c.is_empty() {
        return Err(Error::EmptyInput("no coefficients".into()));
    }
    let (w, rho, norm) = rescale_with_norm(c);
    let m = (w.len() - 1) / 2;
    let l = w.len() - 1 - m;
    let mut p = pade(&w, l, m, rho)?;
    for v in p.num.iter_mut() {
        *v = (ScaledComplex::from_complex(*v) * norm).to_complex();
    }
    Ok(p)
}
