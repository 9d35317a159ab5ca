//! Unitary Fourier transforms and Fourier multipliers.
//!
//! Convention: `f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx` and
//! `f(x) = ∫ f̂(ξ) e^{2πi x·ξ} dξ`, both discretized by Riemann sums (cell
//! volume in space, dual-cell volume in frequency). The propagator is the
//! multiplier `e^{+2πi t φ(ξ)}`.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, SpectrumField};
use crate::geometry::{eta1, FrequencyLattice, Geometry, GeometryKind, MAX_DIM};
use crate::util::{cis_turns, product_turns};

pub fn forward_transform(f: &Field) -> SpectrumField {
    let geom = f.geometry();
    let mut data = f.values().to_vec();
    geom.fft_in_place(&mut data, false);
    let cell = geom.cell_volume();
    for (k, c) in data.iter_mut().enumerate() {
        *c *= cell * continuous_sign(geom, k);
    }
    SpectrumField::from_parts(geom.clone(), data)
}

pub fn inverse_transform(s: &SpectrumField) -> Field {
    let geom = s.geometry();
    let dual = geom.dual_cell_volume();
    let mut data: Vec<Complex64> = s
        .coefficients()
        .iter()
        .enumerate()
        .map(|(k, c)| c * (dual * continuous_sign(geom, k)))
        .collect();
    geom.fft_in_place(&mut data, true);
    Field::from_parts(geom.clone(), data)
}

/// `(-1)^{j}` per continuous axis: the grid starts at `-L/2`, not at 0.
fn continuous_sign(geom: &Geometry, flat: usize) -> f64 {
    let ncont = geom.kind().continuous_axes();
    if ncont == 0 {
        return 1.0;
    }
    let idx = geom.multi_index(flat);
    let parity: usize = idx[..ncont].iter().sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `φ(ξ)` at one frequency: `|ξ|^θ` on the torus, `|ξ₁|^θ + |ξ₂|^θ` on the
/// waveguide with `ξ₁` the continuous block and `ξ₂` the periodic block.
pub fn symbol_at(kind: GeometryKind, xi: &[f64; MAX_DIM], theta: f64) -> f64 {
    let [a, b] = symbol_blocks(kind, xi, theta);
    a + b
}

/// The two summands of [`symbol_at`]; the second is 0 on the torus.
fn symbol_blocks(kind: GeometryKind, xi: &[f64; MAX_DIM], theta: f64) -> [f64; 2] {
    let d = kind.dim();
    let ncont = kind.continuous_axes();
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if ncont == 0 {
        [norm(&xi[..d]).powf(theta), 0.0]
    } else {
        [norm(&xi[..ncont]).powf(theta), norm(&xi[ncont..d]).powf(theta)]
    }
}

pub fn fractional_symbol(lat: &FrequencyLattice, theta: f64) -> Vec<f64> {
    (0..lat.len())
        .map(|k| symbol_at(lat.kind, &lat.frequency(k), theta))
        .collect()
}

/// Multiplies every coefficient of `s` by `e^{2πi t φ}`.
pub fn evolve_spectrum(s: &SpectrumField, symbol: &[f64], t: f64) -> SpectrumField {
    let coeffs = s
        .coefficients()
        .iter()
        .zip(symbol)
        .map(|(c, &sym)| c * cis_turns(product_turns(t, sym)))
        .collect();
    SpectrumField::from_parts(s.geometry().clone(), coeffs)
}

/// `e^{it(-Δ)^{θ/2}} f` realized as the multiplier `e^{2πi t φ(ξ)}`.
pub fn propagate(f: &Field, t: f64, theta: f64) -> Result<Field> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("propagation time {t} is not finite")));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("θ = {theta} must be positive")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let symbol = fractional_symbol(&f.geometry().lattice(), theta);
    Ok(inverse_transform(&evolve_spectrum(
        &forward_transform(f),
        &symbol,
        t,
    )))
}

/// `U(t)` applied to a spectrum with few nonzero slots. Only those slots
/// are touched per frame; dual scaling and the continuous-axis sign are
/// folded into the stored coefficients.
///
/// The phase `e^{2πitφ}` factors over the two symbol blocks, so each frame
/// evaluates one exponential per distinct block value and the slots index
/// into those two tables.
pub(crate) struct BandFlow {
    geometry: Arc<Geometry>,
    slots: Vec<usize>,
    coeffs: Vec<Complex64>,
    phase_index: Vec<[u32; 2]>,
    block_values: [Vec<f64>; 2],
    /// `Σ |c|`, an upper bound for every sample of every frame.
    bound: f64,
}

impl BandFlow {
    /// `weights` multiplies the spectrum slot by slot (a cutoff).
    pub(crate) fn new(s: &SpectrumField, weights: &[f64], theta: f64) -> Self {
        let geom = s.geometry().clone();
        let lat = geom.lattice();
        let dual = geom.dual_cell_volume();
        let mut slots = Vec::new();
        let mut coeffs = Vec::new();
        let mut phase_index = Vec::new();
        let mut block_values: [Vec<f64>; 2] = Default::default();
        let mut seen: [HashMap<u64, u32>; 2] = Default::default();
        for (k, (c, &w)) in s.coefficients().iter().zip(weights).enumerate() {
            let c = c * (w * dual * continuous_sign(&geom, k));
            if c == Complex64::default() {
                continue;
            }
            let blocks = symbol_blocks(lat.kind, &lat.frequency(k), theta);
            let mut idx = [0u32; 2];
            for b in 0..2 {
                let values = &mut block_values[b];
                idx[b] = *seen[b].entry(blocks[b].to_bits()).or_insert_with(|| {
                    values.push(blocks[b]);
                    (values.len() - 1) as u32
                });
            }
            slots.push(k);
            coeffs.push(c);
            phase_index.push(idx);
        }
        let bound = coeffs.iter().map(|c| c.norm()).sum();
        BandFlow {
            geometry: geom,
            slots,
            coeffs,
            phase_index,
            block_values,
            bound,
        }
    }

    /// Writes the samples of `U(t) f` into `buf`.
    pub(crate) fn frame_into(&self, t: f64, buf: &mut Vec<Complex64>) {
        buf.clear();
        buf.resize(self.geometry.len(), Complex64::default());
        let [pa, pb] = self
            .block_values
            .each_ref()
            .map(|v| v.iter().map(|&sym| cis_turns(product_turns(t, sym))).collect::<Vec<_>>());
        for ((&k, c), &[a, b]) in self.slots.iter().zip(&self.coeffs).zip(&self.phase_index) {
            buf[k] = c * (pa[a as usize] * pb[b as usize]);
        }
        self.geometry.fft_in_place(buf, true);
    }

    /// `‖U(t) f‖_{L^q}` of a frame written by [`BandFlow::frame_into`].
    pub(crate) fn frame_norm(&self, buf: &[Complex64], q: f64) -> f64 {
        let half = q / 2.0;
        let direct = q.is_finite() && half.fract() == 0.0 && q * self.bound.max(1.0).log10() < 250.0;
        if direct {
            let sum: f64 = buf.iter().map(|v| v.norm_sqr().powi(half as i32)).sum();
            return (sum * self.geometry.cell_volume()).powf(1.0 / q);
        }
        let abs: Vec<f64> = buf.iter().map(|v| v.norm()).collect();
        crate::norms::spatial_norm(&abs, q, self.geometry.cell_volume())
    }
}

/// Weight of the low-pass cutoff `η(ξ/N)` at spectrum slot `flat`.
///
/// Torus: sharp indicator of `[-N, N]^d`. Waveguide: tensor product of `η₁`.
/// The Nyquist row is always excluded.
pub fn cutoff_weight(geom: &Geometry, flat: usize, n: f64) -> f64 {
    if geom.is_nyquist(flat) {
        return 0.0;
    }
    let xi = geom.frequency(flat);
    let d = geom.dim();
    if geom.kind().is_torus() {
        if xi[..d].iter().all(|x| x.abs() <= n) {
            1.0
        } else {
            0.0
        }
    } else {
        xi[..d].iter().map(|x| eta1(x / n)).product()
    }
}

/// Checks that the support of `η(·/N)` lies inside the lattice of `geom`.
pub fn band_fits(geom: &Geometry, n: usize) -> Result<()> {
    let reach = if geom.kind().is_torus() {
        n as f64 + 1.0
    } else {
        2.0 * n as f64
    };
    for a in 0..geom.dim() {
        let nyquist = geom.sizes()[a] as f64 / (2.0 * geom.axis_length(a));
        if nyquist < reach {
            return Err(Error::invalid(format!(
                "band N = {n} does not fit axis {a} (largest frequency {nyquist})"
            )));
        }
    }
    Ok(())
}

pub(crate) fn cutoff_weights(geom: &Geometry, n: f64) -> Vec<f64> {
    (0..geom.len()).map(|k| cutoff_weight(geom, k, n)).collect()
}

pub(crate) fn apply_real_multiplier(f: &Field, m: &[f64]) -> Field {
    let mut s = forward_transform(f);
    for (c, w) in s.coefficients_mut().iter_mut().zip(m) {
        *c *= *w;
    }
    inverse_transform(&s)
}

/// `P_{≤N} f`.
pub fn project_leq(f: &Field, n: usize) -> Result<Field> {
    if n == 0 {
        return Err(Error::invalid("projection band N must be >= 1"));
    }
    let w = cutoff_weights(f.geometry(), n as f64);
    Ok(apply_real_multiplier(f, &w))
}

/// Multiplier of the `k`-th Littlewood–Paley block.
pub(crate) fn lp_block_weights(geom: &Geometry, k: u32) -> Vec<f64> {
    let hi = cutoff_weights(geom, 2f64.powi(k as i32));
    if k == 0 {
        return hi;
    }
    let lo = cutoff_weights(geom, 2f64.powi(k as i32 - 1));
    hi.iter().zip(&lo).map(|(h, l)| h - l).collect()
}

/// `P_{2^k} f = P_{≤2^k} f - P_{≤2^{k-1}} f`, with `P_{≤1/2} = 0`.
pub fn littlewood_paley(f: &Field, k: u32) -> Field {
    apply_real_multiplier(f, &lp_block_weights(f.geometry(), k))
}

/// Largest block index `k` for which a block can be nonzero on `geom`.
pub(crate) fn max_lp_block(geom: &Geometry) -> u32 {
    let fmax = (0..geom.dim())
        .map(|a| geom.sizes()[a] as f64 / (2.0 * geom.axis_length(a)))
        .fold(0.0, f64::max);
    // every block k with 2^{k-1} > fmax·(waveguide cutoff factor 2) vanishes
    let mut k = 0;
    while 2f64.powi(k as i32 - 1) <= 2.0 * fmax {
        k += 1;
    }
    k
}
