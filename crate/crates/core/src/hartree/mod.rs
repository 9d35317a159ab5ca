//! Finite-rank Hartree dynamics
//! `i∂_t u_j = (φ(D) + w * ρ) u_j`, `ρ = Σ_k λ_k |u_k|²`.
//!
//! The kinetic operator is the multiplier `φ(ξ)` itself (no `(2π)^θ`), so a
//! single mode `e^{2πinx}` has kinetic energy `|n|^θ`. The free flow
//! `e^{-itφ(D)}` is therefore `propagate(·, -t/(2π), θ)`.

mod duhamel;
mod potential;
mod split_step;

use std::sync::Arc;

use num_complex::Complex64;

pub use duhamel::{
    default_sobolev_index, duhamel_map, fixed_point_iterate, free_path, largest_contractive_time,
    DuhamelIterate, DuhamelPath, DuhamelSetup, FixedPointReport, LowRank, XNorm,
};
pub use potential::{convolve_potential, PotentialKind, PotentialSpec};
pub use split_step::{evolve, split_step, EvolveOptions};

use crate::error::{Error, Result};
use crate::field::{Field, SpectrumField};
use crate::geometry::Geometry;
use crate::ons::{gram_deviation, LambdaSequence, OrthonormalFamily};
use crate::spectral::{forward_transform, fractional_symbol};
use crate::util::pairwise_sum_real;

/// `γ = Σ_j λ_j |u_j⟩⟨u_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    members: Vec<Field>,
    weights: Vec<f64>,
    theta: f64,
}

impl DensityState {
    pub fn new(members: Vec<Field>, weights: Vec<f64>, theta: f64) -> Result<Self> {
        if members.is_empty() || members.len() != weights.len() {
            return Err(Error::invalid("need one weight per member and at least one member"));
        }
        if !(theta > 0.0) {
            return Err(Error::invalid("θ must be positive"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        if weights.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("weights must be nonincreasing"));
        }
        let g = members[0].geometry();
        if members.iter().any(|m| m.geometry() != g) {
            return Err(Error::invalid("members live on different geometries"));
        }
        Ok(DensityState {
            members,
            weights,
            theta,
        })
    }

    pub fn from_ons(fam: &OrthonormalFamily, lambda: &LambdaSequence, theta: f64) -> Result<Self> {
        DensityState::new(fam.fields(), lambda.values.clone(), theta)
    }

    pub(crate) fn from_parts(members: Vec<Field>, weights: Vec<f64>, theta: f64) -> Self {
        DensityState {
            members,
            weights,
            theta,
        }
    }

    pub fn members(&self) -> &[Field] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        self.members[0].geometry()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Same orbitals, weights multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        DensityState::new(
            self.members.clone(),
            self.weights.iter().map(|w| w * c).collect(),
            self.theta,
        )
    }

    /// `ρ(x) = Σ λ_j |u_j(x)|²` on the grid.
    pub fn density(&self) -> Vec<f64> {
        let mut rho = vec![0.0; self.geometry().len()];
        for (u, &l) in self.members.iter().zip(&self.weights) {
            for (r, v) in rho.iter_mut().zip(u.values()) {
                *r += l * v.norm_sqr();
            }
        }
        rho
    }

    pub fn density_field(&self) -> Field {
        Field::from_parts(
            self.geometry().clone(),
            self.density().into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
        )
    }

    /// `‖u_j‖²` for every member.
    pub fn masses(&self) -> Vec<f64> {
        self.members.iter().map(|u| u.l2_norm().powi(2)).collect()
    }

    pub fn gram_deviation(&self) -> f64 {
        gram_deviation(&self.members)
    }
}

/// `E = Σ_j λ_j ⟨u_j, φ(D) u_j⟩ + ½ ∫ (w * ρ) ρ`.
pub fn hartree_energy(state: &DensityState, w: &PotentialSpec) -> f64 {
    let geom = state.geometry();
    let symbol = fractional_symbol(&geom.lattice(), state.theta());
    let dual = geom.dual_cell_volume();
    let kinetic: f64 = state
        .members()
        .iter()
        .zip(state.weights())
        .map(|(u, &l)| {
            let s: SpectrumField = forward_transform(u);
            let terms: Vec<f64> = s
                .coefficients()
                .iter()
                .zip(&symbol)
                .map(|(c, phi)| c.norm_sqr() * phi)
                .collect();
            l * pairwise_sum_real(&terms) * dual
        })
        .sum();
    let rho = state.density();
    let v = potential::convolve_real(w, geom, &rho);
    let terms: Vec<f64> = v.iter().zip(&rho).map(|(a, b)| a * b).collect();
    kinetic + 0.5 * pairwise_sum_real(&terms) * geom.cell_volume()
}

/// Diagnostics of a split-step run, one entry per recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `‖u_j(t)‖²` per time and member.
    pub masses: Vec<Vec<f64>>,
    pub gram_deviation: Vec<f64>,
    pub energy: Vec<f64>,
    /// `‖ρ(t)‖_{L^q}`.
    pub rho_norm: Vec<f64>,
    pub rho_exponent: f64,
    /// Densities at the snapshot times requested in [`EvolveOptions`].
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub final_state: DensityState,
}

impl TrajectoryRecord {
    pub fn max_mass_deviation(&self) -> f64 {
        let first = &self.masses[0];
        self.masses
            .iter()
            .flat_map(|m| m.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_gram_deviation(&self) -> f64 {
        self.gram_deviation.iter().copied().fold(0.0, f64::max)
    }

    /// `max_t |E(t) - E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute drift when `E(0) = 0`).
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0].abs();
        if e0 == 0.0 {
            self.energy_drift()
        } else {
            self.energy_drift() / e0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    #[test]
    fn single_mode_energy() {
        let g = GeometrySpec::torus(vec![32]).build().unwrap();
        let u = Field::plane_wave(g, &[3]).unwrap();
        let s = DensityState::new(vec![u], vec![1.0], 2.5).unwrap();
        let w = PotentialSpec::new(PotentialKind::Zero).unwrap();
        assert!((hartree_energy(&s, &w) - 3f64.powf(2.5)).abs() < 1e-11);
    }

    #[test]
    fn zero_density_leaves_kinetic_part() {
        let g = GeometrySpec::torus(vec![32]).build().unwrap();
        let u = Field::plane_wave(g, &[2]).unwrap();
        let s = DensityState::new(vec![u], vec![0.0], 2.0).unwrap();
        let w = PotentialSpec::new(PotentialKind::Yukawa { a: 1.0 }).unwrap();
        assert_eq!(hartree_energy(&s, &w), 0.0);
        assert!(s.density().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn rejects_increasing_weights() {
        let g = GeometrySpec::torus(vec![8]).build().unwrap();
        let u = Field::plane_wave(g, &[1]).unwrap();
        assert!(DensityState::new(vec![u.clone(), u], vec![0.5, 1.0], 2.0).is_err());
    }
}
