use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fractional part of `a * b` in `[-0.5, 0.5)`, computed with an exact
/// two-product so that large phases keep their low-order bits.
pub(crate) fn product_turns(a: f64, b: f64) -> f64 {
    let hi = a * b;
    if !hi.is_finite() {
        return f64::NAN;
    }
    let lo = a.mul_add(b, -hi);
    let r = hi - hi.round() + lo;
    r - r.round()
}

/// `e^{2πi·turns}`.
pub(crate) fn cis_turns(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    Complex64::from_polar(1.0, TAU * r)
}

/// Pairwise summation with a fixed reduction tree (blocks of 8 leaves).
pub(crate) fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= 8 {
        return terms.iter().copied().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

pub(crate) fn pairwise_sum_real(terms: &[f64]) -> f64 {
    if terms.len() <= 8 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum_real(&terms[..mid]) + pairwise_sum_real(&terms[mid..])
}

/// `(Σ |x|^p)^{1/p}`, with `p = ∞` giving the max. Scaled by the largest
/// entry so high exponents do not overflow.
pub(crate) fn lp_norm(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let s: Vec<f64> = values.iter().map(|v| pow(v.abs() / max, p)).collect();
    max * pairwise_sum_real(&s).powf(1.0 / p)
}

/// `x^p` with a `powi` fast path for small integer exponents.
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 32.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

pub(crate) fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Smallest power of two that is `>= n`.
pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_turns_keeps_low_bits() {
        // 3^30 / 8 has a fractional part that naive rounding loses.
        let a = 0.125;
        let b = 3f64.powi(30);
        let exact = (b as u128 % 8) as f64 / 8.0;
        let r = product_turns(a, b);
        let d = (r - exact).rem_euclid(1.0);
        assert!(d.min(1.0 - d) < 1e-15);
    }

    #[test]
    fn lp_norm_matches_definition() {
        let v = [3.0, -4.0];
        assert!((lp_norm(&v, 2.0) - 5.0).abs() < 1e-15);
        assert_eq!(lp_norm(&v, f64::INFINITY), 4.0);
        assert!((lp_norm(&v, 1.0) - 7.0).abs() < 1e-15);
    }
}
