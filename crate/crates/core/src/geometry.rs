//! Discretized manifolds and their frequency lattices.
//!
//! Continuous axes of a waveguide are truncated to a periodic box
//! `[-L/2, L/2)` whose dual lattice is `j / L`, `j ∈ [-G/2, G/2)`. Torus axes
//! have period 1 and integer frequencies. Continuous axes always come first.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::is_power_of_two;

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryKind {
    Torus { d: usize },
    /// `R^n × T^m`.
    Waveguide { n: usize, m: usize },
}

impl GeometryKind {
    pub fn dim(&self) -> usize {
        match *self {
            GeometryKind::Torus { d } => d,
            GeometryKind::Waveguide { n, m } => n + m,
        }
    }

    /// Number of leading continuous axes.
    pub fn continuous_axes(&self) -> usize {
        match *self {
            GeometryKind::Torus { .. } => 0,
            GeometryKind::Waveguide { n, .. } => n,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, GeometryKind::Torus { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    pub grid_sizes: Vec<usize>,
    /// Box length for every continuous axis; ignored on torus axes.
    pub trunc_length: f64,
}

impl GeometrySpec {
    pub fn torus(grid_sizes: Vec<usize>) -> Self {
        GeometrySpec {
            kind: GeometryKind::Torus {
                d: grid_sizes.len(),
            },
            grid_sizes,
            trunc_length: 1.0,
        }
    }

    pub fn waveguide(n: usize, m: usize, grid_sizes: Vec<usize>, trunc_length: f64) -> Self {
        GeometrySpec {
            kind: GeometryKind::Waveguide { n, m },
            grid_sizes,
            trunc_length,
        }
    }

    pub fn build(self) -> Result<Arc<Geometry>> {
        Geometry::new(self)
    }
}

/// A validated geometry with cached FFT plans. Shared through `Arc`.
pub struct Geometry {
    spec: GeometrySpec,
    lengths: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Geometry").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Geometry {
    pub fn new(spec: GeometrySpec) -> Result<Arc<Self>> {
        let d = spec.kind.dim();
        if d == 0 || d > MAX_DIM {
            return Err(Error::invalid(format!("dimension {d} outside 1..=3")));
        }
        if let GeometryKind::Waveguide { n, m } = spec.kind {
            if n == 0 || m == 0 {
                return Err(Error::invalid("waveguide needs n >= 1 and m >= 1"));
            }
        }
        if spec.grid_sizes.len() != d {
            return Err(Error::invalid(format!(
                "expected {d} grid sizes, got {}",
                spec.grid_sizes.len()
            )));
        }
        for &g in &spec.grid_sizes {
            if g < 4 || !is_power_of_two(g) {
                return Err(Error::invalid(format!(
                    "grid size {g} must be a power of two >= 4"
                )));
            }
        }
        let ncont = spec.kind.continuous_axes();
        if ncont > 0 && !(spec.trunc_length.is_finite() && spec.trunc_length > 0.0) {
            return Err(Error::invalid("truncation length must be positive"));
        }
        let lengths: Vec<f64> = (0..d)
            .map(|a| if a < ncont { spec.trunc_length } else { 1.0 })
            .collect();
        let mut strides = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * spec.grid_sizes[a + 1];
        }
        let len = spec.grid_sizes.iter().product();
        let mut planner = FftPlanner::new();
        let forward = spec
            .grid_sizes
            .iter()
            .map(|&g| planner.plan_fft_forward(g))
            .collect();
        let inverse = spec
            .grid_sizes
            .iter()
            .map(|&g| planner.plan_fft_inverse(g))
            .collect();
        Ok(Arc::new(Geometry {
            spec,
            lengths,
            strides,
            len,
            forward,
            inverse,
        }))
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn kind(&self) -> GeometryKind {
        self.spec.kind
    }

    pub fn dim(&self) -> usize {
        self.spec.grid_sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.spec.grid_sizes
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_periodic_axis(&self, axis: usize) -> bool {
        axis >= self.spec.kind.continuous_axes()
    }

    pub fn axis_length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Measure of the whole (truncated) domain.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Riemann-sum weight of one spatial cell.
    pub fn cell_volume(&self) -> f64 {
        self.lengths
            .iter()
            .zip(self.sizes())
            .map(|(l, &g)| l / g as f64)
            .product()
    }

    /// Weight of one lattice point in frequency space (`1/L` per continuous
    /// axis, 1 per torus axis).
    pub fn dual_cell_volume(&self) -> f64 {
        1.0 / self.volume()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rem = flat;
        for (i, &stride) in idx.iter_mut().zip(&self.strides) {
            *i = rem / stride;
            rem %= stride;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Physical coordinates of grid point `flat`.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            let h = self.lengths[a] / self.sizes()[a] as f64;
            x[a] = if self.is_periodic_axis(a) {
                idx[a] as f64 * h
            } else {
                -0.5 * self.lengths[a] + idx[a] as f64 * h
            };
        }
        x
    }

    /// Signed lattice integer `j ∈ [-G/2, G/2)` of FFT slot `k` on `axis`.
    pub fn lattice_int(&self, axis: usize, k: usize) -> i64 {
        let g = self.sizes()[axis];
        if k < g / 2 {
            k as i64
        } else {
            k as i64 - g as i64
        }
    }

    /// FFT slot of lattice integer `j` on `axis`, if representable.
    pub fn slot_of(&self, axis: usize, j: i64) -> Option<usize> {
        let g = self.sizes()[axis] as i64;
        if j < -g / 2 || j >= g / 2 {
            return None;
        }
        Some(j.rem_euclid(g) as usize)
    }

    /// Frequency `ξ` of spectrum slot `flat`.
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim() {
            xi[a] = self.lattice_int(a, idx[a]) as f64 / self.lengths[a];
        }
        xi
    }

    /// True when any axis of slot `flat` sits on the Nyquist row `-G/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim()).any(|a| idx[a] == self.sizes()[a] / 2)
    }

    pub fn lattice(&self) -> FrequencyLattice {
        let axes = (0..self.dim())
            .map(|a| {
                (0..self.sizes()[a])
                    .map(|k| self.lattice_int(a, k) as f64 / self.lengths[a])
                    .collect()
            })
            .collect();
        FrequencyLattice {
            kind: self.kind(),
            axes,
            strides: self.strides.clone(),
        }
    }

    /// Unnormalized in-place multi-dimensional DFT (`inverse` flips the sign).
    pub(crate) fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(data.len(), self.len);
        let plans = if inverse { &self.inverse } else { &self.forward };
        let mut line = Vec::new();
        for (a, plan) in plans.iter().enumerate() {
            let g = self.sizes()[a];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let stride = self.strides[a];
            if stride == 1 {
                for chunk in data.chunks_exact_mut(g) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            line.resize(g, Complex64::default());
            let block = stride * g;
            for outer in (0..self.len).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Frequencies of every spectrum slot, stored per axis in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLattice {
    pub kind: GeometryKind,
    pub axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
}

impl FrequencyLattice {
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut xi = [0.0; MAX_DIM];
        let mut rem = flat;
        for (a, freqs) in self.axes.iter().enumerate() {
            let i = rem / self.strides[a];
            rem %= self.strides[a];
            xi[a] = freqs[i];
        }
        xi
    }
}

/// Smooth even cutoff with `η₁ = 1` on `[-1, 1]` and `η₁ = 0` for `|x| >= 2`:
///
/// `η₁(x) = ψ(2 - |x|) / (ψ(2 - |x|) + ψ(|x| - 1))`, `ψ(s) = e^{-1/s}` for `s > 0`.
pub fn eta1(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 2.0 {
        return 0.0;
    }
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let up = psi(2.0 - a);
    up / (up + psi(a - 1.0))
}
