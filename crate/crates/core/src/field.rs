//! Grid functions in space, in frequency, and sampled in time.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, MAX_DIM};
use crate::util::pairwise_sum_real;

/// Complex values on the spatial grid of a geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    geometry: Arc<Geometry>,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(geometry: Arc<Geometry>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::invalid(format!(
                "field has {} values, geometry has {} points",
                values.len(),
                geometry.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("field contains non-finite values"));
        }
        Ok(Field { geometry, values })
    }

    /// Trusted constructor for values produced by this crate.
    pub(crate) fn from_parts(geometry: Arc<Geometry>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), geometry.len());
        Field { geometry, values }
    }

    pub fn zeros(geometry: Arc<Geometry>) -> Self {
        let n = geometry.len();
        Field::from_parts(geometry, vec![Complex64::default(); n])
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(geometry: Arc<Geometry>, f: impl Fn([f64; MAX_DIM]) -> Complex64) -> Result<Self> {
        let values = (0..geometry.len()).map(|k| f(geometry.position(k))).collect();
        Field::new(geometry, values)
    }

    /// `e^{2πi x·ξ}` for the lattice frequency with integer labels `j`
    /// (`ξ_a = j_a / L_a`).
    pub fn plane_wave(geometry: Arc<Geometry>, j: &[i64]) -> Result<Self> {
        if j.len() != geometry.dim() {
            return Err(Error::invalid("plane wave label has wrong dimension"));
        }
        let xi: Vec<f64> = j
            .iter()
            .enumerate()
            .map(|(a, &ja)| ja as f64 / geometry.axis_length(a))
            .collect();
        let g = geometry.clone();
        Field::from_fn(geometry, move |x| {
            let turns: f64 = (0..g.dim()).map(|a| x[a] * xi[a]).sum();
            crate::util::cis_turns(turns)
        })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `‖f‖_{L²}` with the cell-volume weight.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        (pairwise_sum_real(&sq) * self.geometry.cell_volume()).sqrt()
    }

    /// `⟨self, other⟩ = ∫ conj(self)·other`.
    pub fn inner(&self, other: &Field) -> Complex64 {
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.geometry.cell_volume()
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field::from_parts(
            self.geometry.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field::from_parts(
            self.geometry.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

/// Fourier coefficients indexed by the frequency lattice (FFT order).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    geometry: Arc<Geometry>,
    coefficients: Vec<Complex64>,
}

impl SpectrumField {
    pub fn new(geometry: Arc<Geometry>, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != geometry.len() {
            return Err(Error::invalid(format!(
                "spectrum has {} coefficients, lattice has {} points",
                coefficients.len(),
                geometry.len()
            )));
        }
        if coefficients
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        Ok(SpectrumField {
            geometry,
            coefficients,
        })
    }

    pub(crate) fn from_parts(geometry: Arc<Geometry>, coefficients: Vec<Complex64>) -> Self {
        SpectrumField {
            geometry,
            coefficients,
        }
    }

    pub fn zeros(geometry: Arc<Geometry>) -> Self {
        let n = geometry.len();
        SpectrumField::from_parts(geometry, vec![Complex64::default(); n])
    }

    /// Unit coefficient at the lattice point with integer labels `j`.
    pub fn single_mode(geometry: Arc<Geometry>, j: &[i64]) -> Result<Self> {
        if j.len() != geometry.dim() {
            return Err(Error::invalid("mode label has wrong dimension"));
        }
        let mut idx = [0; MAX_DIM];
        for (a, &ja) in j.iter().enumerate() {
            idx[a] = geometry
                .slot_of(a, ja)
                .ok_or_else(|| Error::invalid(format!("mode {ja} outside lattice")))?;
        }
        let flat = geometry.flat_index(&idx[..geometry.dim()]);
        let mut s = SpectrumField::zeros(geometry);
        s.coefficients[flat] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    /// `‖f̂‖_{L²}` with the dual-cell weight; equals the spatial norm.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.coefficients.iter().map(|v| v.norm_sqr()).collect();
        (pairwise_sum_real(&sq) * self.geometry.dual_cell_volume()).sqrt()
    }
}

/// Uniform time samples on `[t0, t1]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, points: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::invalid(format!("time interval [{t0}, {t1}] is empty")));
        }
        if points < 2 {
            return Err(Error::invalid("time grid needs at least 2 points"));
        }
        Ok(TimeGrid { t0, t1, points })
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.time(k)).collect()
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|k| if k == 0 || k + 1 == self.points { 0.5 * h } else { h })
            .collect()
    }
}

/// One spatial frame per time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: TimeGrid,
    frames: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(grid: TimeGrid, frames: Vec<Field>) -> Result<Self> {
        if frames.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} frames for {} time samples",
                frames.len(),
                grid.len()
            )));
        }
        if let Some(first) = frames.first() {
            if frames.iter().any(|f| f.geometry() != first.geometry()) {
                return Err(Error::invalid("frames live on different geometries"));
            }
        }
        Ok(SpaceTimeField { grid, frames })
    }

    /// Samples `f(t)` at every time of `grid`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Result<Field>) -> Result<Self> {
        let frames = grid.times().into_iter().map(f).collect::<Result<_>>()?;
        SpaceTimeField::new(grid, frames)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        self.frames[0].geometry()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    #[test]
    fn rejects_size_mismatch_and_nan() {
        let g = GeometrySpec::torus(vec![8]).build().unwrap();
        assert!(Field::new(g.clone(), vec![Complex64::default(); 7]).is_err());
        let mut v = vec![Complex64::default(); 8];
        v[3].re = f64::NAN;
        assert!(Field::new(g, v).is_err());
    }

    #[test]
    fn time_grid_includes_endpoints() {
        let tg = TimeGrid::new(-0.5, 0.5, 5).unwrap();
        assert_eq!(tg.times(), vec![-0.5, -0.25, 0.0, 0.25, 0.5]);
        assert!((tg.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn plane_wave_has_unit_norm() {
        let g = GeometrySpec::waveguide(1, 1, vec![16, 8], 4.0).build().unwrap();
        let f = Field::plane_wave(g, &[3, -2]).unwrap();
        assert!((f.l2_norm() - 2.0).abs() < 1e-14);
        assert!(f.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
    }
}
