//! Adaptive Gauss–Kronrod quadrature for the oscillatory integrals
//! `∫₀^b e^{2πi(f(s) - ps)} ds` with `f(s) = sx + ts^θ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::{cis_turns, pairwise_sum};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const TOLERANCE: f64 = 1e-8;
pub const MAX_INTERVALS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VdcResult {
    pub value: Complex64,
    pub error_estimate: f64,
    /// `|t|^{-1/θ}`.
    pub envelope: f64,
    /// `|value| / envelope`.
    pub ratio: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    Piece {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).norm(),
    }
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`, starting from
/// `initial` equal pieces and bisecting the worst piece until the summed
/// error estimate drops below `tol`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    initial: usize,
    tol: f64,
    max_intervals: usize,
) -> Result<(Complex64, f64, usize)> {
    let initial = initial.max(1);
    if initial > max_intervals {
        return Err(Error::numeric(format!(
            "initial partition of {initial} pieces exceeds the budget of {max_intervals}"
        )));
    }
    let h = (b - a) / initial as f64;
    let mut heap: BinaryHeap<Piece> = (0..initial)
        .map(|k| {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == initial { b } else { lo + h };
            gk15(&f, lo, hi)
        })
        .collect();
    let total_error = |heap: &BinaryHeap<Piece>| heap.iter().map(|p| p.error).sum::<f64>();
    let mut err = total_error(&heap);
    while err > tol {
        if heap.len() >= max_intervals {
            let value = sum_pieces(heap.into_vec());
            return Err(Error::NumericFailure {
                context: format!("quadrature stalled at error {err:.3e} after {max_intervals} pieces"),
                estimate: Some(value),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len().is_multiple_of(1024) {
            // resynchronize the running sum
            err = total_error(&heap);
        }
    }
    let err = total_error(&heap);
    let n = heap.len();
    Ok((sum_pieces(heap.into_vec()), err, n))
}

fn sum_pieces(mut pieces: Vec<Piece>) -> Complex64 {
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let values: Vec<Complex64> = pieces.iter().map(|p| p.value).collect();
    pairwise_sum(&values)
}

/// `∫₀^b e^{2πi(sx + ts^θ - ps)} ds` with absolute error below `1e-8`.
pub fn vdc_integral_oracle(theta: f64, x: f64, t: f64, p: i64, b: f64) -> Result<VdcResult> {
    if !(theta > 1.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("θ = {theta} must exceed 1")));
    }
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::invalid(format!("upper limit b = {b} must exceed 1")));
    }
    if !x.is_finite() || !t.is_finite() {
        return Err(Error::invalid("x and t must be finite"));
    }
    if t.abs() < 1e-12 {
        return Err(Error::invalid("t is zero: the phase is linear"));
    }
    let slope = x - p as f64;
    let phase_variation = slope.abs() * b + t.abs() * b.powf(theta);
    let initial = (4.0 * phase_variation).ceil() as usize + 8;
    let integrand = |s: f64| cis_turns(s * slope + t * s.powf(theta));
    let (value, error_estimate, intervals) =
        integrate_adaptive(integrand, 0.0, b, initial, TOLERANCE, MAX_INTERVALS)?;
    let envelope = t.abs().powf(-1.0 / theta);
    Ok(VdcResult {
        value,
        error_estimate,
        envelope,
        ratio: value.norm() / envelope,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (v, e, _) =
            integrate_adaptive(|s| Complex64::new(s.powi(5), 0.0), 0.0, 2.0, 1, 1e-12, 10).unwrap();
        assert!((v.re - 64.0 / 6.0).abs() < 1e-12);
        assert!(e < 1e-12);
    }

    #[test]
    fn fresnel_limit() {
        // ∫₀^∞ e^{2πi t s²} ds = e^{iπ/4} / (2√(2t)); the tail beyond b is O(1/t)
        let t = 1000.0;
        let r = vdc_integral_oracle(2.0, 0.0, t, 0, 2.0).unwrap();
        let exact = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) / (2.0 * (2.0 * t).sqrt());
        assert!((r.value - exact).norm() < 1e-3);
        assert!(r.error_estimate < 1e-8);
    }

    #[test]
    fn rejects_linear_phase() {
        assert!(vdc_integral_oracle(3.0, 0.0, 0.0, 0, 2.0).is_err());
        assert!(vdc_integral_oracle(3.0, 0.0, 1.0, 0, 0.5).is_err());
    }

    #[test]
    fn budget_exhaustion_carries_estimate() {
        let f = |s: f64| Complex64::new(s.abs().sqrt().recip().min(1e300), 0.0);
        match integrate_adaptive(f, -1.0, 1.0, 2, 1e-14, 8) {
            Err(Error::NumericFailure { estimate, .. }) => assert!(estimate.is_some()),
            other => panic!("expected numeric failure, got {other:?}"),
        }
    }
}
