//! Truncated ramified power series in one and two variables.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

/// `Σ_{j=0}^{N} c_j x^{j/κ}` with explicit truncation index `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamifiedSeries {
    kappa: u32,
    coeffs: Vec<ScaledComplex>,
}

/// Result of [`RamifiedSeries::sup_norm_on_circle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    /// Geometric mean ratio of the tail terms at radius `r`; above one the
    /// partial sum is not a trustworthy value of the function.
    pub tail_ratio: f64,
    pub divergent: bool,
}

/// `‖φ‖_{G_{s,1/κ}(r)}`: sup of the `Γ_s`-Borel transform on `|z| = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyNorm {
    pub radius: f64,
    pub value: f64,
    pub divergent: bool,
}

impl RamifiedSeries {
    /// A series needs at least one coefficient and `kappa >= 1`.
    pub fn new(kappa: u32, coeffs: Vec<ScaledComplex>) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidPolynomial("ramification must be >= 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::EmptyInput("series needs at least one coefficient".into()));
        }
        if let Some(j) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Numerical(format!("non-finite coefficient at index {j}")));
        }
        Ok(Self { kappa, coeffs })
    }

    pub fn from_complex(kappa: u32, coeffs: &[Complex64]) -> Result<Self> {
        Self::new(kappa, coeffs.iter().map(|&z| z.into()).collect())
    }

    pub fn from_real(kappa: u32, coeffs: &[f64]) -> Result<Self> {
        Self::new(kappa, coeffs.iter().map(|&x| x.into()).collect())
    }

    pub fn zero(kappa: u32, trunc: usize) -> Self {
        Self {
            kappa: kappa.max(1),
            coeffs: vec![ScaledComplex::ZERO; trunc + 1],
        }
    }

    /// Coefficients `f(0), ..., f(trunc)`.
    pub fn from_fn(kappa: u32, trunc: usize, f: impl FnMut(usize) -> ScaledComplex) -> Self {
        Self {
            kappa: kappa.max(1),
            coeffs: (0..=trunc).map(f).collect(),
        }
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ScaledComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> ScaledComplex {
        self.coeffs.get(j).copied().unwrap_or(ScaledComplex::ZERO)
    }

    pub fn into_coeffs(self) -> Vec<ScaledComplex> {
        self.coeffs
    }

    pub fn map(&self, mut f: impl FnMut(usize, ScaledComplex) -> ScaledComplex) -> Self {
        Self {
            kappa: self.kappa,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| f(j, c))
                .collect(),
        }
    }

    pub fn truncated(&self, trunc: usize) -> Self {
        Self {
            kappa: self.kappa,
            coeffs: self.coeffs[..=trunc.min(self.trunc())].to_vec(),
        }
    }

    fn check_kappa(&self, other: &Self) -> Result<()> {
        if self.kappa != other.kappa {
            return Err(Error::KappaMismatch {
                left: self.kappa,
                right: other.kappa,
            });
        }
        Ok(())
    }

    /// Coefficient-wise sum; truncation is the smaller of the two.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_kappa(other)?;
        let n = self.trunc().min(other.trunc());
        Ok(Self::from_fn(self.kappa, n, |j| self.coeffs[j] + other.coeffs[j]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_kappa(other)?;
        let n = self.trunc().min(other.trunc());
        Ok(Self::from_fn(self.kappa, n, |j| self.coeffs[j] - other.coeffs[j]))
    }

    pub fn scale(&self, factor: ScaledComplex) -> Self {
        self.map(|_, c| c * factor)
    }

    /// Cauchy product on the common grid.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_kappa(other)?;
        let n = self.trunc().min(other.trunc());
        Ok(Self::from_fn(self.kappa, n, |j| {
            (0..=j).map(|i| self.coeffs[i] * other.coeffs[j - i]).sum()
        }))
    }

    /// Re-expresses the series on the finer grid `x^{1/(κ·factor)}`.
    pub fn ramify(&self, factor: u32) -> Self {
        let f = factor.max(1) as usize;
        let mut coeffs = vec![ScaledComplex::ZERO; self.trunc() * f + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            coeffs[j * f] = c;
        }
        Self {
            kappa: self.kappa * factor.max(1),
            coeffs,
        }
    }

    /// `x^{1/κ}` on the principal branch rotated by `2π·branch/κ`.
    pub fn root(&self, x: Complex64, branch: i64) -> Complex64 {
        if x == Complex64::new(0.0, 0.0) {
            return x;
        }
        let k = self.kappa as f64;
        let arg = x.arg() / k + 2.0 * PI * branch as f64 / k;
        Complex64::from_polar(x.norm().powf(1.0 / k), arg)
    }

    /// Partial sum `Σ c_j (x^{1/κ})^j` in scaled arithmetic.
    pub fn eval_scaled(&self, x: Complex64, branch: i64) -> ScaledComplex {
        let w = ScaledComplex::from(self.root(x, branch));
        // Horner from the top.
        self.coeffs
            .iter()
            .rev()
            .fold(ScaledComplex::ZERO, |acc, &c| acc * w + c)
    }

    pub fn eval(&self, x: Complex64, branch: i64) -> Complex64 {
        self.eval_scaled(x, branch).to_complex()
    }

    /// Max of `|partial sum|` over `samples` equispaced points of `|x| = r`,
    /// starting at `arg x = phase`.
    pub fn sup_norm_on_circle_with_phase(&self, r: f64, samples: usize, phase: f64) -> SupNorm {
        let samples = samples.max(1);
        let value = (0..samples)
            .map(|i| {
                let theta = phase + 2.0 * PI * i as f64 / samples as f64;
                self.eval_scaled(Complex64::from_polar(r, theta), 0)
                    .to_complex()
                    .norm()
            })
            .fold(0.0, f64::max);
        let tail_ratio = self.tail_ratio(r);
        SupNorm {
            value,
            tail_ratio,
            divergent: tail_ratio > 1.0,
        }
    }

    pub fn sup_norm_on_circle(&self, r: f64, samples: usize) -> SupNorm {
        self.sup_norm_on_circle_with_phase(r, samples, 0.0)
    }

    /// `(|term_N| / |term_{N/2}|)^{1/(N - N/2)}` at radius `r`, over nonzero terms.
    pub fn tail_ratio(&self, r: f64) -> f64 {
        let n = self.trunc();
        if n < 2 {
            return 0.0;
        }
        let ln_r = r.ln() / self.kappa as f64;
        let term = |j: usize| self.coeffs[j].ln_abs() + j as f64 * ln_r;
        let last = (n / 2..=n).rev().find(|&j| !self.coeffs[j].is_zero());
        let mid = (0..=n / 2).rev().find(|&j| !self.coeffs[j].is_zero());
        match (mid, last) {
            (Some(a), Some(b)) if b > a => ((term(b) - term(a)) / (b - a) as f64).exp(),
            _ => 0.0,
        }
    }

    /// Writes the series literal format: header `kappa N`, then `j re im exp10`.
    pub fn to_literal(&self) -> String {
        let mut out = format!("{} {}\n", self.kappa, self.trunc());
        for (j, c) in self.coeffs.iter().enumerate() {
            let m = c.mantissa();
            let _ = writeln!(out, "{} {:e} {:e} {}", j, m.re, m.im, c.exp10());
        }
        out
    }

    /// Parses the series literal format; lines may appear in any order but
    /// every index `0..=N` must be present exactly once.
    pub fn from_literal(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::SeriesFormat {
            line: 1,
            msg: "missing header `kappa N`".into(),
        })?;
        let hdr: Vec<&str> = header.split_whitespace().collect();
        let bad = |line: usize, msg: &str| Error::SeriesFormat {
            line: line + 1,
            msg: msg.into(),
        };
        if hdr.len() != 2 {
            return Err(bad(hl, "header must be `kappa N`"));
        }
        let kappa: u32 = hdr[0].parse().map_err(|_| bad(hl, "bad kappa"))?;
        let n: usize = hdr[1].parse().map_err(|_| bad(hl, "bad N"))?;
        if kappa == 0 {
            return Err(bad(hl, "kappa must be >= 1"));
        }
        let mut coeffs: Vec<Option<ScaledComplex>> = vec![None; n + 1];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(ln, "expected `j re im exp10`"));
            }
            let j: usize = f[0].parse().map_err(|_| bad(ln, "bad index"))?;
            let re: f64 = f[1].parse().map_err(|_| bad(ln, "bad real part"))?;
            let im: f64 = f[2].parse().map_err(|_| bad(ln, "bad imaginary part"))?;
            let e: i64 = f[3].parse().map_err(|_| bad(ln, "bad exponent"))?;
            if j > n {
                return Err(bad(ln, "index exceeds N"));
            }
            if coeffs[j].is_some() {
                return Err(bad(ln, "duplicate index"));
            }
            coeffs[j] = Some(ScaledComplex::new(Complex64::new(re, im), e));
        }
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                c.ok_or(Error::SeriesFormat {
                    line: 0,
                    msg: format!("missing coefficient {j}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(kappa, coeffs)
    }
}

/// Dense `Σ c_{jn} t^{j/κ_t} z^{n/κ_z}`, row-major in `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiSeries {
    kappa_t: u32,
    kappa_z: u32,
    trunc_t: usize,
    trunc_z: usize,
    coeffs: Vec<ScaledComplex>,
}

impl BiSeries {
    pub fn zero(kappa_t: u32, kappa_z: u32, trunc_t: usize, trunc_z: usize) -> Self {
        Self {
            kappa_t: kappa_t.max(1),
            kappa_z: kappa_z.max(1),
            trunc_t,
            trunc_z,
            coeffs: vec![ScaledComplex::ZERO; (trunc_t + 1) * (trunc_z + 1)],
        }
    }

    pub fn from_fn(
        kappa_t: u32,
        kappa_z: u32,
        trunc_t: usize,
        trunc_z: usize,
        mut f: impl FnMut(usize, usize) -> ScaledComplex,
    ) -> Self {
        let mut out = Self::zero(kappa_t, kappa_z, trunc_t, trunc_z);
        for j in 0..=trunc_t {
            for n in 0..=trunc_z {
                out.coeffs[j * (trunc_z + 1) + n] = f(j, n);
            }
        }
        out
    }

    /// Stacks rows (series in `z`), truncating every row to the shortest one.
    pub fn from_rows(kappa_t: u32, rows: &[RamifiedSeries]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::EmptyInput("no rows".into()))?;
        for r in rows {
            if r.kappa() != first.kappa() {
                return Err(Error::KappaMismatch {
                    left: first.kappa(),
                    right: r.kappa(),
                });
            }
        }
        let nz = rows.iter().map(|r| r.trunc()).min().unwrap_or(0);
        Ok(Self::from_fn(kappa_t, first.kappa(), rows.len() - 1, nz, |j, n| {
            rows[j].coeff(n)
        }))
    }

    pub fn kappa_t(&self) -> u32 {
        self.kappa_t
    }
    pub fn kappa_z(&self) -> u32 {
        self.kappa_z
    }
    pub fn trunc_t(&self) -> usize {
        self.trunc_t
    }
    pub fn trunc_z(&self) -> usize {
        self.trunc_z
    }

    pub fn get(&self, j: usize, n: usize) -> ScaledComplex {
        if j > self.trunc_t || n > self.trunc_z {
            return ScaledComplex::ZERO;
        }
        self.coeffs[j * (self.trunc_z + 1) + n]
    }

    pub fn set(&mut self, j: usize, n: usize, v: ScaledComplex) {
        self.coeffs[j * (self.trunc_z + 1) + n] = v;
    }

    /// Coefficient sequence of `t^{j/κ_t}` as a series in `z`.
    pub fn extract_row(&self, j: usize) -> RamifiedSeries {
        RamifiedSeries::from_fn(self.kappa_z, self.trunc_z, |n| self.get(j, n))
    }

    /// Coefficient sequence of `z^{n/κ_z}` as a series in `t`.
    pub fn extract_col(&self, n: usize) -> RamifiedSeries {
        RamifiedSeries::from_fn(self.kappa_t, self.trunc_t, |j| self.get(j, n))
    }

    pub fn rows(&self) -> Vec<RamifiedSeries> {
        (0..=self.trunc_t).map(|j| self.extract_row(j)).collect()
    }

    pub fn map(&self, mut f: impl FnMut(usize, usize, ScaledComplex) -> ScaledComplex) -> Self {
        Self::from_fn(self.kappa_t, self.kappa_z, self.trunc_t, self.trunc_z, |j, n| {
            f(j, n, self.get(j, n))
        })
    }

    pub fn truncated(&self, trunc_t: usize, trunc_z: usize) -> Self {
        let (tt, tz) = (trunc_t.min(self.trunc_t), trunc_z.min(self.trunc_z));
        Self::from_fn(self.kappa_t, self.kappa_z, tt, tz, |j, n| self.get(j, n))
    }

    /// Entry-wise sum on the common window.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.kappa_t != other.kappa_t || self.kappa_z != other.kappa_z {
            return Err(Error::KappaMismatch {
                left: self.kappa_z,
                right: other.kappa_z,
            });
        }
        let tt = self.trunc_t.min(other.trunc_t);
        let tz = self.trunc_z.min(other.trunc_z);
        Ok(Self::from_fn(self.kappa_t, self.kappa_z, tt, tz, |j, n| {
            self.get(j, n) + other.get(j, n)
        }))
    }

    /// Partial double sum at `(t, z)` on the principal branches.
    pub fn eval(&self, t: Complex64, z: Complex64) -> Complex64 {
        let col = RamifiedSeries::from_fn(self.kappa_t, self.trunc_t, |j| {
            self.extract_row(j).eval_scaled(z, 0)
        });
        col.eval(t, 0)
    }

    /// File format: header `kappa_t kappa_z N_t N_z`, then `j n re im exp10`.
    pub fn to_literal(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.kappa_t, self.kappa_z, self.trunc_t, self.trunc_z
        );
        for j in 0..=self.trunc_t {
            for n in 0..=self.trunc_z {
                let c = self.get(j, n);
                let m = c.mantissa();
                let _ = writeln!(out, "{} {} {:e} {:e} {}", j, n, m.re, m.im, c.exp10());
            }
        }
        out
    }
}
