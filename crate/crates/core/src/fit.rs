//! Log-log least-squares fits of `value ≈ C·N^slope`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |log value - (intercept + slope·log N)|`.
    pub max_residual: f64,
    pub points: Vec<(f64, f64)>,
}

/// Ordinary least squares in `(ln N, ln value)`. Needs at least three
/// points with distinct positive `N` and positive values.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 points for a slope fit, got {}",
            points.len()
        )));
    }
    for &(n, v) in points {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid(format!("abscissa {n} must be positive")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("value {v} at N = {n} must be positive")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all abscissae coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        max_residual,
        points: points.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n: &f64| (n, 7.0 * n.powf(0.4)))
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.slope - 0.4).abs() < 1e-12);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn constant_values_have_zero_slope() {
        let fit = fit_scaling(&[(2.0, 3.0), (4.0, 3.0), (8.0, 3.0)]).unwrap();
        assert!(fit.slope.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_scaling(&[(2.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(fit_scaling(&[(2.0, 1.0), (4.0, 0.0), (8.0, 1.0)]).is_err());
        assert!(fit_scaling(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }
}
