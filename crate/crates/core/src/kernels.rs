//! The exponential-sum kernel `K_N(t, x) = Σ_{|n|≤N} e^{2πi(xn + t|n|^θ)}`
//! and its dispersive envelope `|t|^{1/θ}|K_N|`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::spectral::{band_fits, cutoff_weight, symbol_at};
use crate::util::{cis_turns, pairwise_sum, product_turns};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub n: usize,
    pub theta: f64,
    pub t: f64,
    pub x: f64,
}

pub fn kernel_exp_sum(q: &KernelQuery) -> Complex64 {
    let n = q.n as i64;
    let terms: Vec<Complex64> = (-n..=n)
        .map(|k| {
            let phase = product_turns(q.x, k as f64)
                + product_turns(q.t, (k.unsigned_abs() as f64).powf(q.theta));
            cis_turns(phase)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `1 + 2 Σ_{n=1}^N e^{2πi t n^θ} cos(2πnx)`, the even-in-`x` form.
pub(crate) fn kernel_cosine_form(n: usize, theta: f64, t: f64, x: f64) -> Complex64 {
    let mut terms = Vec::with_capacity(n + 1);
    terms.push(Complex64::new(1.0, 0.0));
    for k in 1..=n {
        let c = (std::f64::consts::TAU * product_turns(x, k as f64)).cos();
        terms.push(cis_turns(product_turns(t, (k as f64).powf(theta))) * (2.0 * c));
    }
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersiveReport {
    pub n: usize,
    pub theta: f64,
    pub t_min: f64,
    /// `N^{1-θ}`, or 1 when `N <= 1`.
    pub t_max: f64,
    pub sup_value: f64,
    pub argmax_t: f64,
    pub argmax_x: f64,
    pub t_points: usize,
    pub x_points: usize,
    pub samples: usize,
    /// Relative change of the sup under grid doubling (checked variant only).
    pub refinement_change: Option<f64>,
    pub warning: Option<String>,
}

/// Top of the dispersive window.
pub fn window_top(n: usize, theta: f64) -> f64 {
    if n <= 1 {
        1.0
    } else {
        (n as f64).powf(1.0 - theta)
    }
}

/// Sup of `|t|^{1/θ}|K_N(t, x)|` over `t_points` uniform times in
/// `[t_min, N^{1-θ}]` and `x_points` uniform points `k / x_points` of `T¹`.
pub fn dispersive_sup(
    n: usize,
    theta: f64,
    t_points: usize,
    x_points: usize,
    t_min: f64,
) -> Result<DispersiveReport> {
    if !(theta >= 2.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("θ = {theta} must be >= 2")));
    }
    if t_points < 64 || x_points < 64 {
        return Err(Error::invalid("dispersive grids need at least 64 points per axis"));
    }
    if !(t_min > 0.0) {
        return Err(Error::invalid("t_min must be positive"));
    }
    let top = window_top(n, theta);
    if t_min >= top {
        return Err(Error::invalid(format!(
            "empty window: t_min = {t_min} >= N^(1-θ) = {top}"
        )));
    }
    let h = (top - t_min) / (t_points - 1) as f64;
    let times: Vec<f64> = (0..t_points)
        .map(|k| if k + 1 == t_points { top } else { t_min + k as f64 * h })
        .collect();

    let use_fft = x_points > 2 * n;
    let fft = use_fft.then(|| FftPlanner::new().plan_fft_inverse(x_points));

    let rows: Vec<(f64, usize)> = times
        .par_iter()
        .map(|&t| {
            let values: Vec<f64> = match &fft {
                Some(plan) => {
                    let mut buf = vec![Complex64::default(); x_points];
                    for k in -(n as i64)..=(n as i64) {
                        let a = cis_turns(product_turns(t, (k.unsigned_abs() as f64).powf(theta)));
                        buf[k.rem_euclid(x_points as i64) as usize] = a;
                    }
                    plan.process(&mut buf);
                    buf.iter().map(|v| v.norm()).collect()
                }
                None => (0..x_points)
                    .map(|j| kernel_cosine_form(n, theta, t, j as f64 / x_points as f64).norm())
                    .collect(),
            };
            let (arg, max) = values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(ai, am), (i, &v)| {
                    if v > am {
                        (i, v)
                    } else {
                        (ai, am)
                    }
                });
            (t.powf(1.0 / theta) * max, arg)
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (i, &(v, arg)) in rows.iter().enumerate() {
        if v > best.0 {
            best = (v, i, arg);
        }
    }
    Ok(DispersiveReport {
        n,
        theta,
        t_min,
        t_max: top,
        sup_value: best.0,
        argmax_t: times[best.1],
        argmax_x: best.2 as f64 / x_points as f64,
        t_points,
        x_points,
        samples: t_points * x_points,
        refinement_change: None,
        warning: None,
    })
}

/// [`dispersive_sup`] followed by a nested grid doubling. If the sup moves by
/// 2% or more the grid is doubled once more and a warning is attached.
pub fn dispersive_sup_checked(
    n: usize,
    theta: f64,
    t_points: usize,
    x_points: usize,
    t_min: f64,
) -> Result<DispersiveReport> {
    let base = dispersive_sup(n, theta, t_points, x_points, t_min)?;
    let fine = dispersive_sup(n, theta, 2 * t_points - 1, 2 * x_points, t_min)?;
    let change = (fine.sup_value - base.sup_value).abs() / base.sup_value.max(f64::MIN_POSITIVE);
    if change < 0.02 {
        return Ok(DispersiveReport {
            refinement_change: Some(change),
            ..base
        });
    }
    let finer = dispersive_sup(n, theta, 4 * t_points - 3, 4 * x_points, t_min)?;
    let second = (finer.sup_value - fine.sup_value).abs() / fine.sup_value;
    Ok(DispersiveReport {
        refinement_change: Some(second),
        warning: Some(format!(
            "grid doubling moved the sup by {:.2}%; refined to {}x{}",
            100.0 * change,
            finer.t_points,
            finer.x_points
        )),
        ..finer
    })
}

/// `K_N(t, z) = ∫ e^{2πi(z·ξ + tφ(ξ))} η(ξ/N)² dξ` as a Riemann sum over the
/// lattice of `geom` (exact sum on torus axes). The cutoff is the sharp
/// indicator on a torus geometry and the smooth tensor bump on a waveguide.
pub fn waveguide_kernel(t: f64, z: &[f64], n: usize, theta: f64, geom: &Geometry) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::invalid("band N must be >= 1"));
    }
    if z.len() != geom.dim() {
        return Err(Error::invalid("point has wrong dimension"));
    }
    if !t.is_finite() {
        return Err(Error::invalid("t must be finite"));
    }
    band_fits(geom, n)?;
    let kind = geom.kind();
    let terms: Vec<Complex64> = (0..geom.len())
        .filter_map(|k| {
            let w = cutoff_weight(geom, k, n as f64);
            if w == 0.0 {
                return None;
            }
            let xi = geom.frequency(k);
            let space: f64 = (0..geom.dim()).map(|a| product_turns(z[a], xi[a])).sum();
            let phase = space + product_turns(t, symbol_at(kind, &xi, theta));
            Some(cis_turns(phase) * (w * w))
        })
        .collect();
    Ok(pairwise_sum(&terms) * geom.dual_cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{eta1, GeometrySpec};

    fn k(n: usize, theta: f64, t: f64, x: f64) -> Complex64 {
        kernel_exp_sum(&KernelQuery { n, theta, t, x })
    }

    #[test]
    fn closed_form_values() {
        assert!((k(5, 2.5, 0.0, 0.0) - Complex64::new(11.0, 0.0)).norm() < 1e-14);
        assert!((k(1, 3.7, 0.0, 0.5) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((k(1, 3.0, 0.25, 0.0) - Complex64::new(1.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn symmetries_and_cosine_form() {
        for &(t, x) in &[(0.013, 0.21), (0.2, 0.77), (1e-4, 0.5)] {
            let a = k(17, 2.5, t, x);
            assert!((k(17, 2.5, -t, x) - a.conj()).norm() < 1e-12);
            assert!((k(17, 2.5, t, -x) - a).norm() < 1e-12);
            assert!((kernel_cosine_form(17, 2.5, t, x) - a).norm() < 1e-12);
            assert!(a.norm() <= 35.0);
        }
    }

    #[test]
    fn degenerate_band() {
        let r = dispersive_sup(0, 3.0, 64, 64, 1e-6).unwrap();
        assert!((r.sup_value - 1.0).abs() < 1e-15);
        assert_eq!(r.t_max, 1.0);
    }

    #[test]
    fn rejects_empty_window_and_small_grids() {
        assert!(dispersive_sup(8, 3.0, 64, 64, 0.5).is_err());
        assert!(dispersive_sup(8, 3.0, 32, 64, 1e-6).is_err());
        assert!(dispersive_sup(8, 1.5, 64, 64, 1e-6).is_err());
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        // 70 x-points forces the FFT path for N=8; 64 with N=40 forces direct
        let a = dispersive_sup(8, 3.0, 64, 70, 1e-6).unwrap();
        let mut best: f64 = 0.0;
        let top = window_top(8, 3.0);
        for i in 0..64 {
            let t = if i == 63 { top } else { 1e-6 + i as f64 * (top - 1e-6) / 63.0 };
            for j in 0..70 {
                best = best.max(t.powf(1.0 / 3.0) * k(8, 3.0, t, j as f64 / 70.0).norm());
            }
        }
        assert!((a.sup_value - best).abs() < 1e-12 * best);
    }

    #[test]
    fn torus_geometry_kernel_is_plain_sum() {
        let g = GeometrySpec::torus(vec![64]).build().unwrap();
        let v = waveguide_kernel(0.0, &[0.0], 5, 2.0, &g).unwrap();
        assert!((v - Complex64::new(11.0, 0.0)).norm() < 1e-13);
        let v = waveguide_kernel(0.031, &[0.3], 5, 2.5, &g).unwrap();
        assert!((v - k(5, 2.5, 0.031, 0.3)).norm() < 1e-12);
    }

    #[test]
    fn waveguide_kernel_at_origin() {
        let (l, n) = (8.0, 3usize);
        let g = GeometrySpec::waveguide(1, 1, vec![128, 16], l).build().unwrap();
        let v = waveguide_kernel(0.0, &[0.0, 0.0], n, 2.5, &g).unwrap();
        let per: f64 = (-2 * n as i64..=2 * n as i64)
            .map(|j| eta1(j as f64 / n as f64).powi(2))
            .sum();
        let cont: f64 = (-64i64..64)
            .map(|j| eta1(j as f64 / (l * n as f64)).powi(2) / l)
            .sum();
        assert!((v.re - per * cont).abs() < 1e-12 && v.im.abs() < 1e-12);
        let a = waveguide_kernel(0.07, &[0.4, 0.1], n, 2.5, &g).unwrap();
        let b = waveguide_kernel(-0.07, &[0.4, 0.1], n, 2.5, &g).unwrap();
        let c = waveguide_kernel(0.07, &[-0.4, -0.1], n, 2.5, &g).unwrap();
        assert!((b - a.conj()).norm() < 1e-12);
        assert!((c - a).norm() < 1e-12);
    }
}
