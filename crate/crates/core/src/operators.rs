//! Coefficient-level moment operators on ramified series.
//!
//! All operators act on the grid `x^{j/κ}`. A moment derivative is applied
//! through the explicit ratio `m(j/κ + 1)/m(j/κ)` rather than by conjugating
//! with Borel transforms.
//!
//! Pseudodifferential operators are restricted to monomial symbols
//! `λ(ζ) = λ ζ^q`. For such symbols the real-order extension by conjugation
//! with `B_{Γ_{−s̄}}` is coefficient-exact and independent of `s̄`, so no
//! auxiliary order is modelled.

use num::complex::Complex64;
use num::{Integer, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{MomentFunction, Rational};
use crate::scaled::ScaledComplex;
use crate::series::{BiSeries, GevreyNorm, RamifiedSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Operator {
    Borel(MomentFunction),
    InverseBorel(MomentFunction),
    MomentDerivative {
        m: MomentFunction,
        power: u32,
    },
    MonomialPseudo {
        m: MomentFunction,
        lambda: Complex64,
        q: Rational,
    },
}

impl Operator {
    pub fn apply(&self, a: &RamifiedSeries) -> Result<RamifiedSeries> {
        match self {
            Operator::Borel(m) => borel(m, a),
            Operator::InverseBorel(m) => inverse_borel(m, a),
            Operator::MomentDerivative { m, power } => moment_derivative(m, *power, a),
            Operator::MonomialPseudo { m, lambda, q } => monomial_pseudo(*lambda, *q, m, a),
        }
    }
}

/// `m(j/κ)` for `j = 0..=n`.
pub fn moment_table(m: &MomentFunction, kappa: u32, n: usize) -> Result<Vec<ScaledComplex>> {
    (0..=n).map(|j| m.eval_at_index(j, kappa)).collect()
}

/// `c_j ↦ c_j / m(j/κ)`.
pub fn borel(m: &MomentFunction, a: &RamifiedSeries) -> Result<RamifiedSeries> {
    let table = moment_table(m, a.kappa(), a.trunc())?;
    Ok(a.map(|j, c| c / table[j]))
}

/// `c_j ↦ c_j · m(j/κ)`.
pub fn inverse_borel(m: &MomentFunction, a: &RamifiedSeries) -> Result<RamifiedSeries> {
    let table = moment_table(m, a.kappa(), a.trunc())?;
    Ok(a.map(|j, c| c * table[j]))
}

/// Number of grid steps a shift by the rational exponent `q` takes at ramification `κ`.
pub fn grid_shift(q: Rational, kappa: u32) -> Result<usize> {
    let steps = q * Rational::from_integer(kappa as i64);
    if !steps.is_integer() || steps.is_negative() {
        return Err(Error::OffGrid {
            q: q.to_string(),
            kappa,
        });
    }
    Ok(steps.to_integer() as usize)
}

/// Coefficient `n` of the result is `λ · a_{n+s} · m(n/κ + q)/m(n/κ)`, `s = qκ`.
fn shift_with_ratio(
    lambda: ScaledComplex,
    steps: usize,
    m: &MomentFunction,
    a: &RamifiedSeries,
) -> Result<RamifiedSeries> {
    let kappa = a.kappa();
    if a.trunc() < steps {
        return Err(Error::TruncationExhausted {
            needed: steps + 1,
            available: a.trunc() + 1,
        });
    }
    let table = moment_table(m, kappa, a.trunc())?;
    let trunc = a.trunc() - steps;
    let coeffs = (0..=trunc)
        .map(|n| lambda * a.coeff(n + steps) * table[n + steps] / table[n])
        .collect();
    RamifiedSeries::new(kappa, coeffs)
}

/// `∂_m^power a`. Each application consumes `κ` coefficients of truncation.
pub fn moment_derivative(m: &MomentFunction, power: u32, a: &RamifiedSeries) -> Result<RamifiedSeries> {
    let mut out = a.clone();
    for _ in 0..power {
        out = shift_with_ratio(ScaledComplex::ONE, a.kappa() as usize, m, &out)?;
    }
    Ok(out)
}

/// `λ(∂_m)` for the monomial symbol `λ(ζ) = λ ζ^q`, `qκ ∈ ℤ₊`.
pub fn monomial_pseudo(
    lambda: Complex64,
    q: Rational,
    m: &MomentFunction,
    a: &RamifiedSeries,
) -> Result<RamifiedSeries> {
    let steps = grid_shift(q, a.kappa())?;
    shift_with_ratio(ScaledComplex::from_complex(lambda), steps, m, a)
}

/// `P(∂_m) a = Σ_k p_k ∂_m^k a`, truncated to the shortest term.
pub fn apply_polynomial(poly: &[Complex64], m: &MomentFunction, a: &RamifiedSeries) -> Result<RamifiedSeries> {
    let mut acc: Option<RamifiedSeries> = None;
    let mut power = a.clone();
    for (k, &p) in poly.iter().enumerate() {
        if k > 0 {
            power = moment_derivative(m, 1, &power)?;
        }
        if p == Complex64::new(0.0, 0.0) {
            continue;
        }
        let term = power.scale(ScaledComplex::from_complex(p));
        acc = Some(match acc {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    let trunc = a.trunc().saturating_sub(a.kappa() as usize * poly.len().saturating_sub(1));
    Ok(acc
        .map(|s| s.truncated(trunc))
        .unwrap_or_else(|| RamifiedSeries::zero(a.kappa(), trunc)))
}

/// Largest coefficient-wise relative deviation `|x_j − y_j| / max(|x_j|, |y_j|)`.
pub fn max_relative_deviation(x: &RamifiedSeries, y: &RamifiedSeries) -> f64 {
    let n = x.trunc().min(y.trunc());
    (0..=n)
        .map(|j| x.coeff(j).rel_diff(&y.coeff(j)))
        .fold(0.0, f64::max)
}

/// Deviation between `B_{m'} ∂_m a` and `∂_{m m'} B_{m'} a`.
pub fn check_commutation(m: &MomentFunction, m_prime: &MomentFunction, a: &RamifiedSeries) -> Result<f64> {
    let lhs = borel(m_prime, &moment_derivative(m, 1, a)?)?;
    let rhs = moment_derivative(&m.mul(m_prime), 1, &borel(m_prime, a)?)?;
    Ok(max_relative_deviation(&lhs, &rhs))
}

/// Deviation between `B_{m'} P(∂_m) a` and `P(∂_{m m'}) B_{m'} a`.
pub fn check_commutation_poly(
    poly: &[Complex64],
    m: &MomentFunction,
    m_prime: &MomentFunction,
    a: &RamifiedSeries,
) -> Result<f64> {
    let lhs = borel(m_prime, &apply_polynomial(poly, m, a)?)?;
    let rhs = apply_polynomial(poly, &m.mul(m_prime), &borel(m_prime, a)?)?;
    // Compare against the scale of the individual terms, not the possibly cancelled sum.
    let mut scale = vec![ScaledComplex::ZERO; lhs.trunc() + 1];
    let mut power = borel(m_prime, a)?;
    for (k, p) in poly.iter().enumerate() {
        if k > 0 {
            power = moment_derivative(&m.mul(m_prime), 1, &power)?;
        }
        for (j, s) in scale.iter_mut().enumerate() {
            let t = (power.coeff(j) * ScaledComplex::from_complex(*p)).abs();
            if t.cmp_abs(s).is_gt() {
                *s = t;
            }
        }
    }
    Ok((0..=lhs.trunc().min(rhs.trunc()))
        .map(|j| {
            if scale[j].is_zero() {
                0.0
            } else {
                ((lhs.coeff(j) - rhs.coeff(j)) / scale[j]).to_complex().norm()
            }
        })
        .fold(0.0, f64::max))
}

/// `‖a‖` in the Gevrey space of order `s`: the circle sup-norm of `B_{Γ_s}a` at radius `r`.
pub fn gevrey_norm(a: &RamifiedSeries, s: Rational, r: f64, samples: usize) -> Result<GevreyNorm> {
    let b = borel(&MomentFunction::gamma(s), a)?;
    let sup = b.sup_norm_on_circle(r, samples);
    Ok(GevreyNorm {
        radius: r,
        value: sup.value,
        divergent: sup.divergent,
    })
}

/// Borel transform of a bi-series in `t` with `m1` and in `z` with `m2`.
pub fn borel_bi(m1: &MomentFunction, m2: &MomentFunction, v: &BiSeries) -> Result<BiSeries> {
    let tt = moment_table(m1, v.kappa_t(), v.trunc_t())?;
    let tz = moment_table(m2, v.kappa_z(), v.trunc_z())?;
    Ok(v.map(|j, n, c| c / (tt[j] * tz[n])))
}

/// Inverse of [`borel_bi`].
pub fn inverse_borel_bi(m1: &MomentFunction, m2: &MomentFunction, v: &BiSeries) -> Result<BiSeries> {
    let tt = moment_table(m1, v.kappa_t(), v.trunc_t())?;
    let tz = moment_table(m2, v.kappa_z(), v.trunc_z())?;
    Ok(v.map(|j, n, c| c * tt[j] * tz[n]))
}

/// `∂_{m,t}^power` applied to a bi-series.
pub fn moment_derivative_t(m: &MomentFunction, power: u32, v: &BiSeries) -> Result<BiSeries> {
    let cols: Vec<RamifiedSeries> = (0..=v.trunc_z())
        .map(|n| moment_derivative(m, power, &v.extract_col(n)))
        .collect::<Result<_>>()?;
    let trunc_t = cols[0].trunc();
    Ok(BiSeries::from_fn(v.kappa_t(), v.kappa_z(), trunc_t, v.trunc_z(), |j, n| {
        cols[n].coeff(j)
    }))
}

/// `λ ζ^q` symbol in `z` applied to every row of a bi-series.
pub fn monomial_pseudo_z(lambda: Complex64, q: Rational, m: &MomentFunction, v: &BiSeries) -> Result<BiSeries> {
    let rows: Vec<RamifiedSeries> = v
        .rows()
        .iter()
        .map(|r| monomial_pseudo(lambda, q, m, r))
        .collect::<Result<_>>()?;
    BiSeries::from_rows(v.kappa_t(), &rows)
}

/// `∂_{m,z}^power` applied to every row of a bi-series.
pub fn moment_derivative_z(m: &MomentFunction, power: u32, v: &BiSeries) -> Result<BiSeries> {
    let rows: Vec<RamifiedSeries> = v
        .rows()
        .iter()
        .map(|r| moment_derivative(m, power, r))
        .collect::<Result<_>>()?;
    BiSeries::from_rows(v.kappa_t(), &rows)
}

/// Least common multiple of two ramifications.
pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// `q` as `f64`.
pub fn q_f64(q: Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::rat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(rng: &mut ChaCha8Rng, kappa: u32, n: usize) -> RamifiedSeries {
        RamifiedSeries::from_fn(kappa, n, |_| {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            ScaledComplex::from_complex(z).shift10(rng.random_range(-30..30))
        })
    }

    fn gamma_family() -> Vec<MomentFunction> {
        [rat(-1, 1), rat(-1, 2), rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 1)]
            .into_iter()
            .map(MomentFunction::gamma)
            .collect()
    }

    fn factorial(j: usize) -> f64 {
        (1..=j).map(|i| i as f64).product()
    }

    #[test]
    fn borel_examples() {
        let g1 = MomentFunction::gamma(rat(1, 1));
        let a = RamifiedSeries::from_real(1, &(0..=10).map(factorial).collect::<Vec<_>>()).unwrap();
        let b = borel(&g1, &a).unwrap();
        for j in 0..=10 {
            assert!((b.coeff(j).to_f64() - 1.0).abs() < 1e-14);
        }
        let id = borel(&MomentFunction::gamma(rat(0, 1)), &a).unwrap();
        assert_eq!(id, a);
        // Central binomials C(2j, j) by the multiplicative recurrence.
        let heat = RamifiedSeries::from_real(1, &(0..=12).map(|j| factorial(2 * j) / factorial(j)).collect::<Vec<_>>())
            .unwrap();
        let hb = borel(&g1, &heat).unwrap();
        let mut c = 1.0;
        for j in 0..=12 {
            assert!((hb.coeff(j).to_f64() - c).abs() / c < 1e-13, "j={j}");
            c *= 2.0 * (2 * j + 1) as f64 / (j + 1) as f64;
        }
    }

    #[test]
    fn inverse_borel_examples() {
        let g1 = MomentFunction::gamma(rat(1, 1));
        let ones = RamifiedSeries::from_real(1, &[1.0; 8]).unwrap();
        let f = inverse_borel(&g1, &ones).unwrap();
        for j in 0..8 {
            assert!((f.coeff(j).to_f64() - factorial(j)).abs() < 1e-12);
        }
        let h = MomentFunction::gamma(rat(1, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_series(&mut rng, 2, 50);
        let joint = borel(&h.mul(&h), &a).unwrap();
        let seq = borel(&h, &borel(&h, &a).unwrap()).unwrap();
        assert!(max_relative_deviation(&joint, &seq) < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        let g1 = MomentFunction::gamma(rat(1, 1));
        let exp = RamifiedSeries::from_real(1, &(0..=20).map(|j| 1.0 / factorial(j)).collect::<Vec<_>>()).unwrap();
        let d = moment_derivative(&g1, 1, &exp).unwrap();
        assert_eq!(d.trunc(), 19);
        assert!(max_relative_deviation(&d, &exp) < 1e-15);

        let u = RamifiedSeries::from_real(1, &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0]).unwrap();
        let shift = moment_derivative(&MomentFunction::one(), 1, &u).unwrap();
        for j in 0..5 {
            assert_eq!(shift.coeff(j), u.coeff(j + 1));
        }

        // Term-wise: (1/x)∫_0^x (u(y) − u_0)/y dy has coefficient u_{j+1}/(j+1) at x^j.
        let integro = moment_derivative(&MomentFunction::gamma(rat(-1, 1)), 1, &u).unwrap();
        for j in 0..5 {
            let want = u.coeff(j + 1).to_f64() / (j + 1) as f64;
            assert!((integro.coeff(j).to_f64() - want).abs() < 1e-15);
        }

        let short = RamifiedSeries::from_real(2, &[1.0, 2.0]).unwrap();
        assert!(matches!(
            moment_derivative(&g1, 1, &short),
            Err(Error::TruncationExhausted { .. })
        ));
    }

    #[test]
    fn pseudo_examples() {
        let g1 = MomentFunction::gamma(rat(1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_series(&mut rng, 1, 30);
        let p = monomial_pseudo(Complex64::new(1.0, 0.0), rat(1, 1), &g1, &a).unwrap();
        assert_eq!(p, moment_derivative(&g1, 1, &a).unwrap());

        let geo = RamifiedSeries::from_real(1, &[1.0; 25]).unwrap();
        let d2 = monomial_pseudo(Complex64::new(1.0, 0.0), rat(2, 1), &g1, &geo).unwrap();
        for n in 0..=22 {
            let want = ((n + 1) * (n + 2)) as f64;
            assert!((d2.coeff(n).to_f64() - want).abs() < 1e-12);
        }

        let b = random_series(&mut rng, 2, 20);
        let lam = Complex64::new(0.0, 2.0);
        let half = monomial_pseudo(lam, rat(1, 2), &g1, &b).unwrap();
        assert_eq!(half.trunc(), 19);
        for n in 0..=19 {
            // Γ(1 + (n+1)/2) / Γ(1 + n/2) from the standard library gamma.
            let ratio = statrs::function::gamma::gamma(1.0 + (n + 1) as f64 / 2.0)
                / statrs::function::gamma::gamma(1.0 + n as f64 / 2.0);
            let want = b.coeff(n + 1).scale(lam * ratio);
            assert!(half.coeff(n).rel_diff(&want) < 1e-13, "n={n}");
        }
        assert!(matches!(
            monomial_pseudo(lam, rat(1, 3), &g1, &b),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn commutation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_series(&mut rng, 1, 40);
        let g1 = MomentFunction::gamma(rat(1, 1));
        assert!(check_commutation(&g1, &g1, &a).unwrap() < 1e-13);
        let dev = check_commutation(
            &MomentFunction::gamma(rat(1, 2)),
            &MomentFunction::gamma(rat(3, 2)),
            &a,
        )
        .unwrap();
        assert!(dev <= 1e-12);
        let poly = [Complex64::new(1.0, 0.0), Complex64::new(-3.0, 0.0), Complex64::new(1.0, 0.0)];
        let dev = check_commutation_poly(&poly, &g1, &MomentFunction::gamma(rat(1, 2)), &a).unwrap();
        assert!(dev <= 1e-12, "{dev}");
    }

    #[test]
    fn commutation_over_gamma_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in gamma_family() {
            for mp in gamma_family() {
                let a = random_series(&mut rng, 1, 40);
                let dev = check_commutation(&m, &mp, &a).unwrap();
                assert!(dev <= 1e-12, "{m} {mp}: {dev}");
            }
        }
    }

    #[test]
    fn gevrey_norm_of_geometric() {
        let geo = RamifiedSeries::from_real(1, &[1.0; 60]).unwrap();
        let g = gevrey_norm(&geo, rat(0, 1), 0.5, 64).unwrap();
        assert!((g.value - 2.0).abs() < 1e-9);
        let fact = inverse_borel(&MomentFunction::gamma(rat(1, 1)), &geo).unwrap();
        let g = gevrey_norm(&fact, rat(1, 1), 0.5, 64).unwrap();
        assert!((g.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bi_series_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = BiSeries::from_fn(1, 2, 6, 8, |_, _| {
            ScaledComplex::from_complex(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        });
        let m1 = MomentFunction::gamma(rat(1, 1));
        let m2 = MomentFunction::gamma(rat(1, 2));
        let back = inverse_borel_bi(&m1, &m2, &borel_bi(&m1, &m2, &v).unwrap()).unwrap();
        for j in 0..=6 {
            for n in 0..=8 {
                assert!(back.get(j, n).rel_diff(&v.get(j, n)) < 1e-15);
            }
        }
        let dt = moment_derivative_t(&m1, 1, &v).unwrap();
        assert_eq!(dt.trunc_t(), 5);
        assert!(dt.get(2, 3).rel_diff(&v.get(3, 3).scale_real(3.0)) < 1e-15);
        let dz = moment_derivative_z(&m2, 1, &v).unwrap();
        assert_eq!(dz.trunc_z(), 6);
    }

    fn arb_series(kappa: u32, n: usize) -> impl Strategy<Value = RamifiedSeries> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -200i64..200), n + 1).prop_map(move |v| {
            RamifiedSeries::new(
                kappa,
                v.into_iter()
                    .map(|(re, im, e)| ScaledComplex::new(Complex64::new(re, im), e))
                    .collect(),
            )
            .unwrap()
        })
    }

    fn arb_moment() -> impl Strategy<Value = MomentFunction> {
        (-4i64..=4, 1i64..=3, -4i64..=4, 1i64..=3).prop_map(|(a, b, c, d)| {
            MomentFunction::gamma(rat(a, b)).mul(&MomentFunction::gamma(rat(c, d)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roundtrip_is_identity(m in arb_moment(), a in arb_series(2, 200)) {
            let back = inverse_borel(&m, &borel(&m, &a).unwrap()).unwrap();
            prop_assert!(max_relative_deviation(&back, &a) < 1e-14);
        }

        #[test]
        fn product_law(m1 in arb_moment(), m2 in arb_moment(), a in arb_series(1, 120)) {
            let joint = borel(&m1.mul(&m2), &a).unwrap();
            let seq = borel(&m1, &borel(&m2, &a).unwrap()).unwrap();
            prop_assert!(max_relative_deviation(&joint, &seq) < 1e-14);
        }

        #[test]
        fn commutation_holds(m in arb_moment(), mp in arb_moment(), a in arb_series(1, 40)) {
            prop_assert!(check_commutation(&m, &mp, &a).unwrap() <= 1e-12);
        }
    }
}
