//! Gevrey-order estimation, Borel-plane singularities and summability verdicts.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{characteristic, summability_levels, CharRoot, Level};
use crate::error::{Error, Result};
use crate::moments::{rat_to_f64, MomentFunction, Rational};
use crate::operators::borel;
use crate::pade::{representative, stable_log_poles, Pade};
use crate::scaled::ScaledComplex;
use crate::series::RamifiedSeries;
use crate::solver::{decompose, PdeProblem};

pub const MIN_NONZERO: usize = 8;
pub const SCHEMA: &str = "summability_report.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GevreyMethod {
    Ratio,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyEstimate {
    pub order_hat: f64,
    pub stderr: f64,
    pub window: (usize, usize),
    pub method: GevreyMethod,
    pub regression_order: f64,
    pub ratio_order: Option<f64>,
    /// Index step of the nonzero subsequence used (1 unless the pattern was thinned).
    pub step: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least squares with column equilibration; returns coefficients and their standard errors.
fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rows.len();
    let p = rows[0].len();
    let mut x = DMatrix::<f64>::from_fn(n, p, |i, j| rows[i][j]);
    let scales: Vec<f64> = (0..p)
        .map(|j| {
            let s = x.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = x.clone().svd(true, true);
    let yv = DVector::from_column_slice(y);
    let beta = svd
        .solve(&yv, 1e-14)
        .map_err(|e| Error::Numerical(format!("least squares: {e}")))?;
    let resid = &x * &beta - &yv;
    let dof = n.saturating_sub(p).max(1) as f64;
    let sigma2 = resid.norm_squared() / dof;
    let vt = svd.v_t.expect("requested");
    let se: Vec<f64> = (0..p)
        .map(|j| {
            let v: f64 = (0..p)
                .filter(|&i| svd.singular_values[i] > 1e-14 * svd.singular_values.max())
                .map(|i| (vt[(i, j)] / svd.singular_values[i]).powi(2))
                .sum();
            (sigma2 * v).sqrt() / scales[j]
        })
        .collect();
    let coef: Vec<f64> = (0..p).map(|j| beta[j] / scales[j]).collect();
    Ok((coef, se))
}

/// Gevrey order `s` such that `|c_j| ≈ C A^{j/κ} Γ(1 + s j/κ)` on the window.
///
/// The regression fits `L = σ u ln u + ρ u + τ ln u + c` with `u = j/κ`; the
/// ratio method Richardson-extrapolates `u ΔL'`. Indices carrying exact zeros
/// are skipped, and the ratio method runs on the nonzero subsequence when it
/// has a constant step.
pub fn estimate_gevrey(a: &RamifiedSeries, window: Option<(usize, usize)>) -> Result<GevreyEstimate> {
    let n = a.trunc();
    let (lo, hi) = window.unwrap_or(((n / 4).max(1), n));
    let hi = hi.min(n);
    let kappa = a.kappa() as f64;
    let nz: Vec<usize> = (lo..=hi).filter(|&j| !a.coeff(j).is_zero()).collect();
    if a.coeffs().iter().all(|c| c.is_zero()) {
        return Err(Error::EmptyInput("all coefficients vanish".into()));
    }
    if nz.len() < MIN_NONZERO {
        return Err(Error::InsufficientData {
            have: nz.len(),
            required: MIN_NONZERO,
        });
    }
    let pts: Vec<(f64, f64)> = nz
        .iter()
        .map(|&j| (j.max(1) as f64 / kappa, a.coeff(j).ln_abs()))
        .collect();
    let rows: Vec<Vec<f64>> = pts.iter().map(|&(u, _)| vec![u * u.ln(), u, u.ln(), 1.0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (coef, se) = least_squares(&rows, &ys)?;
    let regression = coef[0];

    let step = nz.windows(2).fold(0, |g, w| gcd(g, w[1] - w[0]));
    let ratio = ratio_order(a, &nz, step.max(1), kappa);

    let mut stderr = se[0];
    if let Some(r) = ratio {
        stderr = stderr.hypot(r - regression);
    }
    Ok(GevreyEstimate {
        order_hat: regression,
        stderr,
        window: (lo, hi),
        method: GevreyMethod::Regression,
        regression_order: regression,
        ratio_order: ratio,
        step: step.max(1),
    })
}

fn ratio_order(a: &RamifiedSeries, nz: &[usize], step: usize, kappa: f64) -> Option<f64> {
    let first = nz[0];
    let idx: Vec<usize> = (first..=*nz.last()?).step_by(step).collect();
    if idx.len() != nz.len() || idx.len() < 6 {
        return None;
    }
    let h = step as f64 / kappa;
    let l: Vec<f64> = idx.iter().map(|&j| a.coeff(j).ln_abs()).collect();
    let u: Vec<f64> = idx.iter().map(|&j| j as f64 / kappa).collect();
    let d: Vec<f64> = l.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    // σ_i ≈ σ − τ/u_i + O(u_i^{-2})
    let sig: Vec<(f64, f64)> = (1..d.len())
        .map(|i| (u[i], u[i] * (d[i] - d[i - 1]) / h))
        .collect();
    let rich: Vec<f64> = sig
        .windows(2)
        .map(|w| (w[1].0 * w[1].1 - w[0].0 * w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let tail = &rich[rich.len() * 3 / 4..];
    if tail.is_empty() {
        return None;
    }
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityMethod {
    PadePoles,
    RatioTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub re: f64,
    pub im: f64,
    pub confidence: f64,
    /// Local exponent `γ` of `(1 − x/ξ)^{−γ}` when known.
    pub exponent: Option<f64>,
}

impl SingularPoint {
    pub fn location(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub modulus: f64,
    pub arg: Option<f64>,
    /// Radius estimates increase along the tail (entire-like behaviour).
    pub growing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularitySet {
    pub points: Vec<SingularPoint>,
    pub method: SingularityMethod,
    pub trunc: usize,
    pub ratio: Option<RatioEstimate>,
    pub inconclusive: bool,
}

impl SingularitySet {
    pub fn nearest_modulus(&self) -> Option<f64> {
        self.points.first().map(|p| p.location().norm())
    }

    /// No singularities found and the coefficients decay faster than any geometric sequence.
    pub fn entire_like(&self) -> bool {
        self.points.is_empty() && self.ratio.as_ref().is_some_and(|r| r.growing)
    }
}

/// Richardson-extrapolated ratio test on the nonzero subsequence.
pub fn ratio_test(c: &[ScaledComplex]) -> Option<RatioEstimate> {
    let nz: Vec<usize> = (0..c.len()).filter(|&j| !c[j].is_zero()).collect();
    if nz.len() < MIN_NONZERO {
        return None;
    }
    let step = nz.windows(2).fold(0, |g, w| gcd(g, w[1] - w[0])).max(1);
    let idx: Vec<usize> = (nz[0]..=*nz.last()?).step_by(step).collect();
    if idx.len() != nz.len() {
        return None;
    }
    let g = step as f64;
    let r: Vec<(f64, f64)> = idx
        .windows(2)
        .map(|w| (w[0] as f64 / g + 1.0, ((c[w[0]].ln_abs() - c[w[1]].ln_abs()) / g).exp()))
        .collect();
    let rich: Vec<f64> = r
        .windows(2)
        .map(|w| (w[1].0 * w[1].1 - w[0].0 * w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let last = *rich.last()?;
    let mid = rich[rich.len() / 2];
    let raw_last = r.last()?.1;
    let raw_mid = r[r.len() / 2].1;
    let growing = raw_last > 1.3 * raw_mid && rich[rich.len() * 3 / 4..].windows(2).all(|w| w[1] > w[0]);
    let arg = (step == 1).then(|| {
        let w = idx[idx.len() - 2];
        (c[w] / c[w + 1]).arg()
    });
    let modulus = if last.is_finite() && last > 0.0 { last } else { mid.abs() };
    Some(RatioEstimate {
        modulus,
        arg,
        growing,
    })
}

/// Singularities of a Borel-plane series in its own variable `x^{1/κ}`.
pub fn borel_singularities(a: &RamifiedSeries, method: SingularityMethod) -> Result<SingularitySet> {
    let c = a.coeffs();
    if c.iter().all(|v| v.is_zero()) {
        return Err(Error::EmptyInput("all coefficients vanish".into()));
    }
    let ratio = ratio_test(c);
    let points = match method {
        SingularityMethod::PadePoles => {
            let (poles, _) = stable_log_poles(c, 1e-2, 4.0)?;
            poles
                .into_iter()
                .map(|p| SingularPoint {
                    re: p.location.re,
                    im: p.location.im,
                    confidence: p.confidence,
                    exponent: (p.residue.im.abs() < 1e-6 * p.residue.norm().max(1.0)).then_some(-p.residue.re),
                })
                .collect()
        }
        SingularityMethod::RatioTest => match &ratio {
            Some(r) if !r.growing => {
                let arg = r.arg.unwrap_or(0.0);
                let z = Complex64::from_polar(r.modulus, arg);
                vec![SingularPoint {
                    re: z.re,
                    im: z.im,
                    confidence: (1e-2 * r.modulus).max(f64::MIN_POSITIVE),
                    exponent: None,
                }]
            }
            _ => Vec::new(),
        },
    };
    let inconclusive = points.is_empty();
    Ok(SingularitySet {
        points,
        method,
        trunc: a.trunc(),
        ratio,
        inconclusive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Summable,
    Singular,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Summable => "summable",
            Verdict::Singular => "singular",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub angular: f64,
    pub pade_stability: f64,
    pub growth_budget: f64,
    pub reach: f64,
    pub samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            angular: 2f64.to_radians(),
            pade_stability: 1e-2,
            growth_budget: 0.1,
            reach: 3.0,
            samples: 64,
        }
    }
}

/// Direction forbidden by a Borel-plane singularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forbidden {
    pub direction: f64,
    pub half_width: f64,
    pub point: SingularPoint,
    pub root_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub re: f64,
    pub im: f64,
    pub forbidden_direction: f64,
    pub angular_distance: f64,
    pub cone_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Ray in the Borel variable.
    pub ray: f64,
    /// Exponent `qK` of the tested class `A e^{B|x|^{qK}}`.
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    /// Free power-law fit of the growth of `log|V|`; 0 when bounded.
    pub observed_order: f64,
    pub x_max: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionVerdict {
    pub direction: f64,
    pub level: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub growth: Vec<GrowthFit>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSummary {
    pub leading_re: f64,
    pub leading_im: f64,
    pub q: String,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub q: String,
    pub k: String,
    pub q_value: f64,
    pub k_value: f64,
    pub roots: Vec<RootSummary>,
    pub singular_directions: Vec<f64>,
    pub forbidden: Vec<Forbidden>,
    pub singularities: Vec<SingularitySet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub directions: Vec<f64>,
    pub admissible: bool,
    /// `(j, |d_j − d_{j−1}|, π(1/K_j − 1/K_{j−1})/2)` for each failing pair.
    pub violations: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub schema: String,
    pub kappa: u32,
    pub gevrey_s: String,
    pub levels: Vec<LevelReport>,
    pub verdicts: Vec<DirectionVerdict>,
    pub multidirection: Option<Admissibility>,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

impl SummabilityReport {
    pub fn verdict_at(&self, level: usize, direction: f64) -> Option<&DirectionVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.level == level && (v.direction - direction).abs() < 1e-12)
    }

    /// `direction,level,verdict,witness_re,witness_im` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("direction,level,verdict,witness_re,witness_im\n");
        for v in &self.verdicts {
            let (re, im) = v
                .witness
                .as_ref()
                .map(|w| (w.re.to_string(), w.im.to_string()))
                .unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", v.direction, v.level, v.verdict, re, im));
        }
        out
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU - 1e-12 {
        0.0
    } else {
        r
    }
}

pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// `|d_j − d_{j−1}| ≤ π(1/K_j − 1/K_{j−1})/2` for levels sorted by decreasing `K`.
pub fn check_admissibility(ks: &[f64], directions: &[f64]) -> Result<Admissibility> {
    if ks.len() != directions.len() {
        return Err(Error::UnsupportedProblem(format!(
            "{} levels but {} directions",
            ks.len(),
            directions.len()
        )));
    }
    let violations: Vec<(usize, f64, f64)> = (1..ks.len())
        .filter_map(|j| {
            let lhs = angular_distance(directions[j], directions[j - 1]);
            let rhs = PI * (1.0 / ks[j] - 1.0 / ks[j - 1]) / 2.0;
            (lhs > rhs + 1e-12).then_some((j, lhs, rhs))
        })
        .collect();
    Ok(Admissibility {
        directions: directions.to_vec(),
        admissible: violations.is_empty(),
        violations,
    })
}

/// Borel data of one characteristic root.
#[derive(Debug, Clone)]
pub struct RootData {
    pub root: CharRoot,
    pub borel: Vec<RamifiedSeries>,
    pub sets: Vec<SingularitySet>,
    representatives: Vec<Option<Pade>>,
}

impl RootData {
    pub fn new(root: CharRoot, borel: Vec<RamifiedSeries>) -> Result<Self> {
        let mut sets = Vec::new();
        let mut representatives = Vec::new();
        for b in &borel {
            if b.coeffs().iter().all(|c| c.is_zero()) {
                continue;
            }
            let set = borel_singularities(b, SingularityMethod::PadePoles)?;
            representatives.push(if set.entire_like() { None } else { Some(representative(b.coeffs())?) });
            sets.push(set);
        }
        let borel = borel.into_iter().filter(|b| !b.coeffs().iter().all(|c| c.is_zero())).collect();
        Ok(Self {
            root,
            borel,
            sets,
            representatives,
        })
    }

    /// Forbidden `d` directions: `qκ·arg w₀ − arg λ (mod 2π)` for each singular point `w₀`.
    pub fn forbidden(&self, root_index: usize, qk: f64) -> Vec<Forbidden> {
        let arg_l = self.root.leading.arg();
        let mut out = Vec::new();
        for set in &self.sets {
            for p in &set.points {
                let w = p.location();
                let half = qk * (p.confidence / w.norm()).min(1.0).asin();
                out.push(Forbidden {
                    direction: wrap_angle(qk * w.arg() - arg_l),
                    half_width: half,
                    point: p.clone(),
                    root_index,
                });
            }
        }
        out
    }
}

fn growth_fit(
    eval: &dyn Fn(Complex64) -> Complex64,
    ray: f64,
    x_max: f64,
    exponent: f64,
    samples: usize,
) -> Option<GrowthFit> {
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 1..=samples {
        let x = x_max * i as f64 / samples as f64;
        let v = eval(Complex64::from_polar(x, ray));
        if !v.is_finite() {
            return None;
        }
        xs.push(x);
        ys.push(v.norm().max(f64::MIN_POSITIVE).ln());
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x.powf(exponent)]).collect();
    let (coef, _) = least_squares(&rows, &ys).ok()?;
    let g: Vec<f64> = ys.iter().map(|y| y - ys[0]).collect();
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let observed = if gmax <= 1.0 {
        0.0
    } else {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&g)
            .filter(|(_, &gi)| gi > 0.5)
            .map(|(&x, &gi)| (x.ln(), gi.ln()))
            .collect();
        if pts.len() < 3 {
            0.0
        } else {
            let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.0]).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            least_squares(&rows, &y).ok()?.0[1]
        }
    };
    Some(GrowthFit {
        ray,
        exponent,
        a: coef[0].exp(),
        b: coef[1],
        observed_order: observed,
        x_max,
        extrapolated: false,
    })
}

/// Radius on which the truncated series is accurate: last term below 1e-15 of the first.
fn entire_radius(c: &[ScaledComplex]) -> f64 {
    let first = c.iter().find(|v| !v.is_zero()).map(|v| v.ln_abs()).unwrap_or(0.0);
    match c.iter().enumerate().rev().find(|(_, v)| !v.is_zero()) {
        Some((n, v)) if n > 0 => ((first + 1e-15f64.ln() - v.ln_abs()) / n as f64).exp(),
        _ => 1.0,
    }
}

fn eval_series(c: &[ScaledComplex], w: Complex64) -> Complex64 {
    let mut acc = ScaledComplex::ZERO;
    for v in c.iter().rev() {
        acc = acc * ScaledComplex::from_complex(w) + *v;
    }
    acc.to_complex()
}

/// Verdict for one level and one direction from the Borel data of its roots.
pub fn direction_verdict(
    roots: &[RootData],
    level: usize,
    q: Rational,
    k: Rational,
    kappa: u32,
    d: f64,
    tol: &Tolerances,
) -> DirectionVerdict {
    let qk = rat_to_f64(q) * kappa as f64;
    let class_exp = rat_to_f64(q * k) * kappa as f64;
    let mut out = DirectionVerdict {
        direction: d,
        level,
        verdict: Verdict::Summable,
        witness: None,
        growth: Vec::new(),
        note: String::new(),
    };
    let mut inconclusive: Option<(Option<Witness>, String)> = None;
    for (ri, rd) in roots.iter().enumerate() {
        for f in rd.forbidden(ri, qk) {
            let dist = angular_distance(d, f.direction);
            let w = Witness {
                re: f.point.re,
                im: f.point.im,
                forbidden_direction: f.direction,
                angular_distance: dist,
                cone_half_width: f.half_width,
            };
            if dist <= f.half_width + 1e-12 {
                out.verdict = Verdict::Singular;
                out.witness = Some(w);
                out.note = "ray meets a Borel-plane singularity".into();
                return out;
            }
            if dist <= f.half_width + tol.angular && inconclusive.is_none() {
                inconclusive = Some((Some(w), "direction within angular tolerance of a singular cone".into()));
            }
        }
    }
    if let Some((w, note)) = inconclusive {
        out.verdict = Verdict::Inconclusive;
        out.witness = w;
        out.note = note;
        return out;
    }
    let n_rays = qk.round().max(1.0) as usize;
    for rd in roots {
        let arg_l = rd.root.leading.arg();
        for ((series, set), rep) in rd.borel.iter().zip(&rd.sets).zip(&rd.representatives) {
            let (x_max, eval): (f64, Box<dyn Fn(Complex64) -> Complex64>) = match (set.nearest_modulus(), rep) {
                (Some(r), Some(p)) => (tol.reach * r, Box::new(move |x| p.eval(x))),
                (None, _) if set.entire_like() => {
                    let c = series.coeffs();
                    let rad = entire_radius(c).min(set.ratio.as_ref().map(|r| r.modulus).unwrap_or(1.0) / 4.0);
                    (rad, Box::new(move |x| eval_series(c, x)))
                }
                _ => {
                    out.verdict = Verdict::Inconclusive;
                    out.note = "no stable Borel-plane singularities and no evidence of entire continuation".into();
                    return out;
                }
            };
            for kk in 0..n_rays {
                let ray = wrap_angle((d + arg_l + TAU * kk as f64) / qk);
                match growth_fit(&*eval, ray, x_max, class_exp, tol.samples) {
                    Some(g) => {
                        let within = g.b <= 0.0 || g.observed_order <= class_exp + tol.growth_budget * kappa as f64;
                        if !within {
                            out.verdict = Verdict::Inconclusive;
                            out.note = format!(
                                "growth order {:.3} exceeds {:.3} on ray {:.4}",
                                g.observed_order / kappa as f64,
                                class_exp / kappa as f64,
                                ray
                            );
                        }
                        out.growth.push(g);
                    }
                    None => {
                        out.verdict = Verdict::Inconclusive;
                        out.note = format!("Padé representative not finite on ray {ray:.4}");
                    }
                }
            }
        }
    }
    if out.verdict == Verdict::Summable {
        out.note = "pole-free ray with growth within the class".into();
    }
    out
}

/// Borel data per characteristic root, and the notes explaining how it was obtained.
pub fn root_data(prob: &PdeProblem) -> Result<(Vec<RootData>, Vec<String>, u32)> {
    let ch = characteristic(&prob.p)?;
    let gm = MomentFunction::gamma(prob.gevrey_s);
    let mut notes = Vec::new();
    let per_root: Vec<Vec<RamifiedSeries>> = match decompose(prob) {
        Ok(dec) => ch
            .roots
            .iter()
            .map(|r| {
                dec.pieces
                    .iter()
                    .filter(|p| p.root.q == r.q && (p.root.leading - r.leading).norm() <= 1e-8 * r.leading.norm().max(1.0))
                    .map(|p| p.datum.clone())
                    .collect()
            })
            .collect(),
        Err(e) => {
            notes.push(format!("decomposition unavailable ({e}); every root is tested against all data"));
            ch.roots.iter().map(|_| prob.data.clone()).collect()
        }
    };
    let mut out = Vec::new();
    for (r, data) in ch.roots.iter().zip(per_root) {
        let borel_data = data.iter().map(|d| borel(&gm, d)).collect::<Result<Vec<_>>>()?;
        out.push(RootData::new(r.clone(), borel_data)?);
    }
    Ok((out, notes, prob.kappa()))
}

fn levels_of(prob: &PdeProblem, roots: &[RootData]) -> Vec<Level> {
    let rs: Vec<CharRoot> = roots.iter().map(|r| r.root.clone()).collect();
    summability_levels(&rs, prob.m1.order(), prob.m2.order(), prob.gevrey_s)
}

fn level_report(level: &Level, roots: &[RootData], kappa: u32) -> (LevelReport, Vec<usize>) {
    let idx: Vec<usize> = (0..roots.len()).filter(|&i| roots[i].root.q == level.q).collect();
    let qk = rat_to_f64(level.q) * kappa as f64;
    let forbidden: Vec<Forbidden> = idx.iter().flat_map(|&i| roots[i].forbidden(i, qk)).collect();
    let mut dirs: Vec<f64> = forbidden.iter().map(|f| f.direction).collect();
    dirs.sort_by(f64::total_cmp);
    dirs.dedup_by(|a, b| angular_distance(*a, *b) < 1e-9);
    let report = LevelReport {
        q: level.q.to_string(),
        k: level.k.to_string(),
        q_value: rat_to_f64(level.q),
        k_value: level.k_f64(),
        roots: idx
            .iter()
            .map(|&i| RootSummary {
                leading_re: roots[i].root.leading.re,
                leading_im: roots[i].root.leading.im,
                q: roots[i].root.q.to_string(),
                multiplicity: roots[i].root.multiplicity,
            })
            .collect(),
        singular_directions: dirs,
        forbidden,
        singularities: idx.iter().flat_map(|&i| roots[i].sets.clone()).collect(),
    };
    (report, idx)
}

/// Verdicts for every level of the problem at each queried direction.
///
/// With `multidirection`, one direction per level (in order of decreasing `K`) is
/// also checked for admissibility.
pub fn summability_verdict(
    prob: &PdeProblem,
    directions: &[f64],
    multidirection: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<SummabilityReport> {
    let (roots, notes, kappa) = root_data(prob)?;
    let levels = levels_of(prob, &roots);
    let mut level_reports = Vec::new();
    let mut verdicts = Vec::new();
    for (li, level) in levels.iter().enumerate() {
        let (rep, idx) = level_report(level, &roots, kappa);
        let sub: Vec<RootData> = idx.iter().map(|&i| roots[i].clone()).collect();
        for &d in directions {
            verdicts.push(direction_verdict(&sub, li, level.q, level.k, kappa, d, tol));
        }
        if let Some(md) = multidirection {
            if let Some(&d) = md.get(li) {
                if !directions.iter().any(|&x| (x - d).abs() < 1e-12) {
                    verdicts.push(direction_verdict(&sub, li, level.q, level.k, kappa, d, tol));
                }
            }
        }
        level_reports.push(rep);
    }
    let multidirection = match multidirection {
        Some(md) => {
            let ks: Vec<f64> = levels.iter().map(|l| l.k_f64()).collect();
            Some(check_admissibility(&ks, md)?)
        }
        None => None,
    };
    Ok(SummabilityReport {
        schema: SCHEMA.into(),
        kappa,
        gevrey_s: prob.gevrey_s.to_string(),
        levels: level_reports,
        verdicts,
        multidirection,
        tolerances: tol.clone(),
        notes,
    })
}

/// Direction verdicts from a series in `t` alone: its `Γ_{1/K}` Borel transform is
/// searched for singularities in the `t`-Borel plane.
pub fn series_verdict(u: &RamifiedSeries, k: Rational, directions: &[f64], tol: &Tolerances) -> Result<Vec<DirectionVerdict>> {
    let bt = borel(&MomentFunction::gamma(k.recip()), u)?;
    let root = CharRoot {
        q: Rational::from_integer(1),
        leading: Complex64::new(1.0, 0.0),
        multiplicity: 1,
        nu: 1,
        spread: 0.0,
    };
    let rd = RootData::new(root, vec![bt])?;
    let q1 = Rational::from_integer(1);
    Ok(directions
        .iter()
        .map(|&d| direction_verdict(std::slice::from_ref(&rd), 0, q1, k, u.kappa(), d, tol))
        .collect())
}
