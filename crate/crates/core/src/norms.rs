//! Mixed space-time Lebesgue norms and Besov sup norms.
//!
//! Exponents are `f64` in `[1, ∞]`, with `f64::INFINITY` for `∞`. The spatial
//! integral is a Riemann sum, the time integral a trapezoid rule, and `L^∞`
//! is the maximum over grid samples (a lower bound for the true sup).

use crate::field::{Field, SpaceTimeField, TimeGrid};
use crate::spectral::{littlewood_paley, max_lp_block};
use crate::util::{lp_norm, pow};

/// `(Σ |v|^q · cell)^{1/q}`.
pub fn spatial_norm(abs_values: &[f64], q: f64, cell_volume: f64) -> f64 {
    if q.is_infinite() {
        lp_norm(abs_values, q)
    } else {
        lp_norm(abs_values, q) * cell_volume.powf(1.0 / q)
    }
}

pub fn lq_norm(f: &Field, q: f64) -> f64 {
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    spatial_norm(&abs, q, f.geometry().cell_volume())
}

/// Trapezoid `L^p` norm of per-time spatial norms.
pub fn time_norm(grid: &TimeGrid, spatial: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return lp_norm(spatial, p);
    }
    let max = spatial.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = grid
        .weights()
        .iter()
        .zip(spatial)
        .map(|(w, v)| w * pow(v.abs() / max, p))
        .sum();
    max * s.powf(1.0 / p)
}

/// `‖F‖_{L^p_t L^q_x}`.
pub fn mixed_norm(f: &SpaceTimeField, p: f64, q: f64) -> f64 {
    let spatial: Vec<f64> = f.frames().iter().map(|fr| lq_norm(fr, q)).collect();
    time_norm(f.grid(), &spatial, p)
}

/// `sup_{k≥0} 2^{ks} ‖P_{2^k} w‖_{L^{q'}}`.
pub fn besov_sup_norm(w: &Field, s: f64, q_dual: f64) -> f64 {
    (0..=max_lp_block(w.geometry()))
        .map(|k| 2f64.powf(k as f64 * s) * lq_norm(&littlewood_paley(w, k), q_dual))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;
    use crate::spectral::propagate;
    use num_complex::Complex64;

    #[test]
    fn unit_field_has_unit_norm() {
        let g = GeometrySpec::torus(vec![16]).build().unwrap();
        let one = Field::from_fn(g, |_| Complex64::new(1.0, 0.0)).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let st = SpaceTimeField::from_fn(grid, |_| Ok(one.clone())).unwrap();
        for &p in &[1.0, 2.0, 3.5, f64::INFINITY] {
            for &q in &[1.0, 4.0, f64::INFINITY] {
                assert!((mixed_norm(&st, p, q) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn propagated_plane_wave_norm_is_interval_power() {
        let g = GeometrySpec::torus(vec![32]).build().unwrap();
        let f = Field::plane_wave(g, &[3]).unwrap();
        let grid = TimeGrid::new(0.0, 0.5, 9).unwrap();
        let st = SpaceTimeField::from_fn(grid, |t| propagate(&f, t, 2.5)).unwrap();
        for &p in &[1.0, 2.0, 6.0] {
            assert!((mixed_norm(&st, p, 4.0) - 0.5f64.powf(1.0 / p)).abs() < 1e-13);
        }
    }

    #[test]
    fn besov_examples() {
        let g = GeometrySpec::torus(vec![64]).build().unwrap();
        let c = Field::from_fn(g.clone(), |_| Complex64::new(-2.5, 0.0)).unwrap();
        assert!((besov_sup_norm(&c, 1.3, 2.0) - 2.5).abs() < 1e-13);
        let m = Field::plane_wave(g.clone(), &[8]).unwrap();
        assert!((besov_sup_norm(&m, 1.0, 2.0) - 8.0).abs() < 1e-12);
        assert_eq!(besov_sup_norm(&Field::zeros(g), 1.0, 2.0), 0.0);
    }
}
