//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

// Kronrod abscissae on [0, 1] (the symmetric half), Gauss nodes at odd index.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and a-posteriori error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|I|)` by bisecting the
/// interval with the largest error estimate.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: Complex64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || pieces.len() >= max_intervals {
            return Integral {
                value: total,
                error: err,
                evaluations,
            };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval is at machine resolution; accept what we have.
            return Integral {
                value: total,
                error: err,
                evaluations,
            };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Integrates over `[0, ∞)` on the doubling panels `[0, h], [h, 2h], ...`,
/// stopping once two consecutive panels contribute below `rel_tol` of the total.
pub fn integrate_semi_infinite<F: FnMut(f64) -> Complex64>(
    mut f: F,
    h: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Integral {
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = 0.0;
    let mut width = h;
    let mut quiet = 0;
    for _ in 0..max_panels {
        let piece = integrate(&mut f, lo, lo + width, 1e-300, rel_tol * 0.1, 400);
        total += piece.value;
        error += piece.error;
        evaluations += piece.evaluations;
        if piece.value.norm() <= rel_tol * total.norm() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        lo += width;
        width *= 2.0;
    }
    Integral {
        value: total,
        error,
        evaluations,
    }
}

/// Runs `integrate_semi_infinite` at two tolerances and reports their
/// difference (plus the finer run's own estimate) as the error.
pub fn integrate_semi_infinite_checked<F: FnMut(f64) -> Complex64>(
    mut f: F,
    h: f64,
    rel_tol: f64,
) -> Integral {
    let coarse = integrate_semi_infinite(&mut f, h, rel_tol * 100.0, 200);
    let fine = integrate_semi_infinite(&mut f, h, rel_tol, 200);
    let diff = (fine.value - coarse.value).norm();
    Integral {
        value: fine.value,
        error: (diff + fine.error).max(f64::EPSILON * fine.value.norm()).max(f64::MIN_POSITIVE),
        evaluations: coarse.evaluations + fine.evaluations,
    }
}
