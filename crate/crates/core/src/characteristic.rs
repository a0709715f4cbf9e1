//! Leading-term data of the characteristic roots of `P(λ, ζ)`.
//!
//! Each root behaves like `λ_α(ζ) ~ c ζ^q` as `ζ → ∞`. The pole orders `q`
//! are the negated slopes of the upper Newton polygon of the points
//! `(a, deg_ζ P_a)`, and the leading terms `c` are the nonzero roots of the
//! corresponding edge polynomials.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{rat_to_f64, Rational};

/// Relative distance below which edge-polynomial roots count as coincident.
pub const MERGE_TOLERANCE: f64 = 1e-8;
/// Widest cluster that may still be merged after passing the derivative test.
pub const CLUSTER_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub a: u32,
    pub b: u32,
    pub coeff: Complex64,
}

/// `P(λ, ζ) = Σ coeff · λ^a ζ^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolynomial {
    terms: Vec<Term>,
}

impl CharPolynomial {
    /// Builds the polynomial, combining repeated monomials and dropping zeros.
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for t in terms {
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
            }
            *map.entry((t.a, t.b)).or_default() += t.coeff;
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((a, b), coeff)| Term { a, b, coeff })
            .collect();
        let p = Self { terms };
        if p.degree() == 0 {
            return Err(Error::InvalidPolynomial(
                "P must contain λ (the variable L) with a nonzero coefficient".into(),
            ));
        }
        Ok(p)
    }

    pub fn from_map(map: &BTreeMap<(u32, u32), Complex64>) -> Result<Self> {
        Self::new(map.iter().map(|(&(a, b), &coeff)| Term { a, b, coeff }))
    }

    /// `Π_i (λ − c_i ζ^{q_i})`.
    pub fn from_monomial_roots(roots: &[(Complex64, u32)]) -> Result<Self> {
        let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        map.insert((0, 0), Complex64::one());
        for &(c, q) in roots {
            let mut next: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
            for (&(a, b), &v) in &map {
                *next.entry((a + 1, b)).or_default() += v;
                *next.entry((a, b + q)).or_default() -= v * c;
            }
            map = next;
        }
        Self::from_map(&map)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// λ-degree `n`.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.a).max().unwrap_or(0)
    }

    pub fn coeff(&self, a: u32, b: u32) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.a == a && t.b == b)
            .map(|t| t.coeff)
            .unwrap_or_default()
    }

    /// Coefficients of `P_0(ζ)`, the factor of `λ^n`, indexed by ζ-degree.
    pub fn leading_factor(&self) -> Vec<Complex64> {
        let n = self.degree();
        let deg = self.terms.iter().filter(|t| t.a == n).map(|t| t.b).max().unwrap_or(0);
        let mut out = vec![Complex64::zero(); deg as usize + 1];
        for t in self.terms.iter().filter(|t| t.a == n) {
            out[t.b as usize] = t.coeff;
        }
        out
    }

    /// `p_0` when `P_0(ζ) = p_0` is constant.
    pub fn constant_leading(&self) -> Option<Complex64> {
        match self.leading_factor().as_slice() {
            [p0] => Some(*p0),
            _ => None,
        }
    }

    pub fn max_zeta_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.b).max().unwrap_or(0)
    }

    pub fn eval(&self, lambda: Complex64, zeta: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * lambda.powu(t.a) * zeta.powu(t.b))
            .sum()
    }

    /// Largest single monomial `|coeff λ^a ζ^b|`.
    pub fn max_monomial(&self, lambda: Complex64, zeta: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * lambda.powu(t.a) * zeta.powu(t.b)).norm())
            .fold(0.0, f64::max)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::new();
        for x in &self.terms {
            for y in &other.terms {
                out.push(Term {
                    a: x.a + y.a,
                    b: x.b + y.b,
                    coeff: x.coeff * y.coeff,
                });
            }
        }
        Self::new(out)
    }

    /// Largest relative coefficient difference against `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let scale = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut keys: Vec<(u32, u32)> = self.terms.iter().chain(&other.terms).map(|t| (t.a, t.b)).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|&(a, b)| (self.coeff(a, b) - other.coeff(a, b)).norm() / scale)
            .fold(0.0, f64::max)
    }
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for CharPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = self.terms.clone();
        terms.sort_by(|x, y| (y.a, y.b).cmp(&(x.a, x.b)));
        for (i, t) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", fmt_coeff(t.coeff))?;
            match t.a {
                0 => {}
                1 => write!(f, "*L")?,
                a => write!(f, "*L^{a}")?,
            }
            match t.b {
                0 => {}
                1 => write!(f, "*Z")?,
                b => write!(f, "*Z^{b}")?,
            }
        }
        Ok(())
    }
}

/// `λ_α(ζ) ~ leading · ζ^q`, `q = μ/ν` in lowest terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharRoot {
    pub q: Rational,
    pub leading: Complex64,
    pub multiplicity: u32,
    pub nu: u32,
    /// Relative spread of the merged eigenvalue cluster (0 for simple roots).
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub roots: Vec<CharRoot>,
    /// Number of roots `λ ≡ 0` (a factor `λ^k` of `P`); they carry no leading term.
    pub zero_roots: u32,
    pub kappa: u32,
    pub merge_tolerance: f64,
}

/// Roots of `Σ e_i c^i` via the eigenvalues of the companion matrix, polished by Newton steps.
pub fn polynomial_roots(e: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = e.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = e[d];
    if d == 1 {
        return Ok(vec![-e[0] / lead]);
    }
    let mut comp = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = Complex64::one();
    }
    for i in 0..d {
        comp[(i, d - 1)] = -e[i] / lead;
    }
    let eig = nalgebra::Schur::try_new(comp, 1e-15, 2000).and_then(|s| s.eigenvalues());
    let mut roots: Vec<Complex64> = match eig {
        Some(v) => v.iter().copied().collect(),
        None => aberth(e)?,
    };
    for r in roots.iter_mut() {
        *r = newton_polish(e, *r);
    }
    Ok(roots)
}

/// Simultaneous Aberth–Ehrlich iteration, used when the QR iteration stalls.
fn aberth(e: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = e.len() - 1;
    let de = poly_derivative(e);
    // Starting points on a circle of the Cauchy-bound radius, off the real axis.
    let radius = 1.0 + e[..d].iter().map(|c| (c / e[d]).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..d {
            let ratio = poly_eval(e, z[k]) / poly_eval(&de, z[k]);
            let repulsion: Complex64 = (0..d).filter(|&i| i != k).map(|i| 1.0 / (z[k] - z[i])).sum();
            let w = ratio / (1.0 - ratio * repulsion);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    if z.iter().all(|r| poly_eval(e, *r).norm() <= 1e-10 * poly_scale(e, *r)) {
        Ok(z)
    } else {
        Err(Error::Numerical("polynomial root iteration did not converge".into()))
    }
}

fn poly_eval(e: &[Complex64], x: Complex64) -> Complex64 {
    e.iter().rev().fold(Complex64::zero(), |acc, &c| acc * x + c)
}

fn poly_derivative(e: &[Complex64]) -> Vec<Complex64> {
    e.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

/// `Σ |e_i| |x|^i`, the scale against which `|E(x)|` is judged.
fn poly_scale(e: &[Complex64], x: Complex64) -> f64 {
    let r = x.norm();
    e.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn newton_polish(e: &[Complex64], mut x: Complex64) -> Complex64 {
    let de = poly_derivative(e);
    for _ in 0..3 {
        let f = poly_eval(e, x);
        let df = poly_eval(&de, x);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        let next = x - step;
        if poly_eval(e, next).norm() < f.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Groups numerically coincident roots into `(value, multiplicity, spread)`.
///
/// Roots within [`MERGE_TOLERANCE`] merge unconditionally. Wider clusters
/// (up to [`CLUSTER_TOLERANCE`]) merge only when the first `k − 1`
/// derivatives of the polynomial vanish at the cluster mean.
pub fn cluster_roots(e: &[Complex64], roots: &[Complex64]) -> Vec<(Complex64, u32, f64)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let close = |tol: f64, used: &[bool]| -> Vec<usize> {
            (i..roots.len())
                .filter(|&j| !used[j] && (roots[j] - roots[i]).norm() <= tol * roots[i].norm().max(1e-300))
                .collect()
        };
        let wide = close(CLUSTER_TOLERANCE, &used);
        let members = if wide.len() > 1 && derivative_test(e, &wide, roots) {
            wide
        } else {
            close(MERGE_TOLERANCE, &used)
        };
        let mut mean = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
        if members.len() > 1 {
            // A root of multiplicity k is a simple root of the (k−1)-th derivative.
            let d = (1..members.len()).fold(e.to_vec(), |p, _| poly_derivative(&p));
            let polished = newton_polish(&d, mean);
            if (polished - mean).norm() <= CLUSTER_TOLERANCE * mean.norm() {
                mean = polished;
            }
        }
        let spread = members
            .iter()
            .map(|&j| (roots[j] - mean).norm() / mean.norm().max(1e-300))
            .fold(0.0, f64::max);
        for &j in &members {
            used[j] = true;
        }
        out.push((mean, members.len() as u32, spread));
    }
    out
}

fn derivative_test(e: &[Complex64], members: &[usize], roots: &[Complex64]) -> bool {
    let mean = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
    let mut p = e.to_vec();
    for _ in 0..members.len() - 1 {
        if poly_eval(&p, mean).norm() > 1e-7 * poly_scale(&p, mean) {
            return false;
        }
        p = poly_derivative(&p);
    }
    true
}

/// Upper hull of `(a, B(a))` points, as indices in the sorted point list.
fn upper_hull(points: &[(i64, i64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        while hull.len() >= 2 {
            let (o, a) = (points[hull[hull.len() - 2]], points[hull[hull.len() - 1]]);
            let b = points[i];
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            if cross >= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Leading-term data of all nonzero characteristic roots, sorted by `q` descending.
pub fn newton_polygon_roots(p: &CharPolynomial) -> Result<Vec<CharRoot>> {
    Ok(characteristic(p)?.roots)
}

/// Roots, zero-root count and ramification `κ = lcm ν_α`.
pub fn characteristic(p: &CharPolynomial) -> Result<Characteristic> {
    let n = p.degree();
    if p.leading_factor().iter().all(|c| c.is_zero()) {
        return Err(Error::InvalidPolynomial("P_0 vanishes identically".into()));
    }
    let mut top: BTreeMap<u32, u32> = BTreeMap::new();
    for t in p.terms() {
        let e = top.entry(t.a).or_insert(t.b);
        *e = (*e).max(t.b);
    }
    let points: Vec<(i64, i64)> = top.iter().map(|(&a, &b)| (a as i64, b as i64)).collect();
    let zero_roots = points[0].0 as u32;
    let hull = upper_hull(&points);
    let mut roots = Vec::new();
    for w in hull.windows(2) {
        let (a1, b1) = points[w[0]];
        let (a2, b2) = points[w[1]];
        let q = Rational::new(b1 - b2, a2 - a1);
        // Edge polynomial in c: terms with a·q + B(a) on the edge line.
        let mut e = vec![Complex64::zero(); (a2 - a1) as usize + 1];
        for &(a, b) in &points[w[0]..=w[1]] {
            if (b - b1) * (a2 - a1) == (b2 - b1) * (a - a1) {
                e[(a - a1) as usize] = p.coeff(a as u32, b as u32);
            }
        }
        let found = polynomial_roots(&e)?;
        for (c, mult, spread) in cluster_roots(&e, &found) {
            roots.push(CharRoot {
                q,
                leading: c,
                multiplicity: mult,
                nu: *q.denom() as u32,
                spread,
            });
        }
    }
    roots.sort_by(|x, y| {
        y.q.cmp(&x.q)
            .then(x.leading.arg().total_cmp(&y.leading.arg()))
    });
    let kappa = roots.iter().fold(1u32, |k, r| k.lcm(&r.nu));
    debug_assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<u32>() + zero_roots, n);
    Ok(Characteristic {
        roots,
        zero_roots,
        kappa,
        merge_tolerance: MERGE_TOLERANCE,
    })
}

/// Ramification `κ = lcm ν_α` shared by solver and analysis.
pub fn kappa(roots: &[CharRoot]) -> u32 {
    roots.iter().fold(1u32, |k, r| k.lcm(&r.nu))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub q: Rational,
    pub k: Rational,
}

impl Level {
    pub fn k_f64(&self) -> f64 {
        rat_to_f64(self.k)
    }
}

/// `K_α = (q_α(s₂ + s) − s₁)^{-1}` for the distinct `q_α > s₁/(s₂ + s)`, with `K` descending.
pub fn summability_levels(roots: &[CharRoot], s1: Rational, s2: Rational, s: Rational) -> Vec<Level> {
    let mut qs: Vec<Rational> = roots.iter().map(|r| r.q).collect();
    qs.sort();
    qs.dedup();
    let denom = s2 + s;
    let mut out: Vec<Level> = qs
        .into_iter()
        .filter(|&q| denom.is_positive() && q * denom > s1)
        .map(|q| Level {
            q,
            k: (q * denom - s1).recip(),
        })
        .collect();
    out.sort_by(|x, y| y.k.cmp(&x.k));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::rat;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn poly(terms: &[(u32, u32, f64)]) -> CharPolynomial {
        CharPolynomial::new(terms.iter().map(|&(a, b, v)| Term { a, b, coeff: c(v) })).unwrap()
    }

    #[test]
    fn single_root() {
        let r = newton_polygon_roots(&poly(&[(1, 0, 1.0), (0, 3, -1.0)])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].q, rat(3, 1));
        assert!((r[0].leading - c(1.0)).norm() < 1e-15);
        assert_eq!((r[0].multiplicity, r[0].nu), (1, 1));
    }

    #[test]
    fn two_roots_same_order() {
        let r = newton_polygon_roots(&poly(&[(2, 0, 1.0), (0, 2, -1.0)])).unwrap();
        assert_eq!(r.len(), 2);
        let mut lead: Vec<f64> = r.iter().map(|x| x.leading.re).collect();
        lead.sort_by(f64::total_cmp);
        assert!((lead[0] + 1.0).abs() < 1e-14 && (lead[1] - 1.0).abs() < 1e-14);
        assert!(r.iter().all(|x| x.q == rat(1, 1) && x.multiplicity == 1));
    }

    #[test]
    fn ramified_root() {
        let ch = characteristic(&poly(&[(2, 0, 1.0), (0, 3, -1.0)])).unwrap();
        assert_eq!(ch.roots.len(), 2);
        assert_eq!(ch.kappa, 2);
        for r in &ch.roots {
            assert_eq!(r.q, rat(3, 2));
            assert_eq!(r.nu, 2);
            // Substitute λ = c ζ^{3/2}: c² = 1.
            assert!((r.leading * r.leading - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn double_root_is_merged() {
        let p = CharPolynomial::from_monomial_roots(&[(c(1.0), 2), (c(1.0), 2)]).unwrap();
        let r = newton_polygon_roots(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].leading - c(1.0)).norm() < 1e-7);
    }

    #[test]
    fn triple_root_is_merged() {
        let z = Complex64::new(0.3, -1.2);
        let p = CharPolynomial::from_monomial_roots(&[(z, 1), (z, 1), (z, 1)]).unwrap();
        let r = newton_polygon_roots(&p).unwrap();
        assert_eq!(r.len(), 1, "{r:?}");
        assert_eq!(r[0].multiplicity, 3);
        assert!(r[0].spread > 0.0);
    }

    #[test]
    fn mixed_orders_from_factors() {
        let p = CharPolynomial::from_monomial_roots(&[(c(1.0), 1), (c(2.0), 2)]).unwrap();
        let r = newton_polygon_roots(&p).unwrap();
        assert_eq!(r[0].q, rat(2, 1));
        assert!((r[0].leading - c(2.0)).norm() < 1e-14);
        assert_eq!(r[1].q, rat(1, 1));
        assert!((r[1].leading - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_roots_are_counted() {
        let ch = characteristic(&poly(&[(2, 0, 1.0), (1, 1, -1.0)])).unwrap();
        assert_eq!(ch.zero_roots, 1);
        assert_eq!(ch.roots.len(), 1);
        assert_eq!(ch.roots[0].q, rat(1, 1));
    }

    #[test]
    fn invalid_polynomials() {
        assert!(CharPolynomial::new([Term { a: 0, b: 2, coeff: c(1.0) }]).is_err());
        assert!(CharPolynomial::new([]).is_err());
    }

    #[test]
    fn aberth_fallback_finds_roots() {
        let e = [c(-6.0), c(11.0), c(-6.0), c(1.0)];
        let mut r: Vec<f64> = aberth(&e).unwrap().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn levels() {
        let root = |q| CharRoot {
            q,
            leading: c(1.0),
            multiplicity: 1,
            nu: 1,
            spread: 0.0,
        };
        let l = summability_levels(&[root(rat(2, 1))], rat(1, 1), rat(1, 1), rat(0, 1));
        assert_eq!(l, vec![Level { q: rat(2, 1), k: rat(1, 1) }]);
        assert!(summability_levels(&[root(rat(1, 1))], rat(1, 1), rat(1, 1), rat(0, 1)).is_empty());
        let l = summability_levels(&[root(rat(3, 1))], rat(1, 1), rat(1, 1), rat(1, 2));
        // 3·(3/2) − 1 = 7/2
        assert_eq!(l[0].k, Rational::new(2, 7));
        let l = summability_levels(
            &[root(rat(2, 1)), root(rat(3, 1)), root(rat(2, 1))],
            rat(1, 1),
            rat(1, 1),
            rat(0, 1),
        );
        assert_eq!(l.len(), 2);
        assert!(l[0].k > l[1].k);
    }

    fn arb_factors() -> impl Strategy<Value = Vec<(Complex64, u32)>> {
        proptest::collection::vec(
            ((-3i32..=3, -3i32..=3), 0u32..=3).prop_filter_map("nonzero", |((re, im), q)| {
                (re != 0 || im != 0).then(|| (Complex64::new(re as f64, im as f64), q))
            }),
            1..=4,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factorizable_inputs_are_recovered(factors in arb_factors()) {
            let p = CharPolynomial::from_monomial_roots(&factors).unwrap();
            let roots = newton_polygon_roots(&p).unwrap();
            prop_assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<u32>(), factors.len() as u32);
            for &(cc, q) in &factors {
                let hit = roots.iter().any(|r| r.q == Rational::from_integer(q as i64)
                    && (r.leading - cc).norm() <= 1e-6 * cc.norm());
                prop_assert!(hit, "missing ({}, {}) in {:?}", cc, q, roots);
            }
        }

        #[test]
        fn branch_count_and_substitution(
            coeffs in proptest::collection::vec((-5i32..=5, 0u32..=4), 1..=5),
            n in 1u32..=4,
            c0 in 1i32..=5,
        ) {
            let mut terms = vec![Term { a: n, b: 0, coeff: c(1.0) }, Term { a: 0, b: 1, coeff: c(c0 as f64) }];
            for (i, &(v, b)) in coeffs.iter().enumerate() {
                terms.push(Term { a: i as u32 % n, b, coeff: c(v as f64) });
            }
            let p = CharPolynomial::new(terms).unwrap();
            let ch = characteristic(&p).unwrap();
            prop_assert_eq!(ch.roots.iter().map(|r| r.multiplicity).sum::<u32>() + ch.zero_roots, n);
            for r in ch.roots.iter().filter(|r| r.multiplicity == 1) {
                let mut prev = f64::INFINITY;
                for big in [1e3f64, 1e4] {
                    let zeta = c(big);
                    let lam = r.leading * big.powf(rat_to_f64(r.q));
                    let rel = p.eval(lam, zeta).norm() / p.max_monomial(lam, zeta);
                    prop_assert!(rel < prev.max(1e-9), "{} at R={}", rel, big);
                    prev = rel;
                }
                prop_assert!(prev < 0.5, "{:?}: {}", r, prev);
            }
        }
    }
}
