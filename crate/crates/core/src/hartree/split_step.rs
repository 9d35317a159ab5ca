//! Strang splitting: half kinetic step, full potential step, half kinetic
//! step. Both substeps are unimodular multipliers, so member masses and the
//! Gram matrix are conserved to roundoff.

use num_complex::Complex64;
use rayon::prelude::*;

use super::potential::convolve_real;
use super::{hartree_energy, DensityState, PotentialSpec, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::norms::spatial_norm;
use crate::spectral::{evolve_spectrum, forward_transform, fractional_symbol, inverse_transform};
use crate::util::cis_turns;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Exponent of the recorded `‖ρ(t)‖_{L^q}`.
    pub rho_exponent: f64,
    /// Record diagnostics every this many steps (the final step is always
    /// recorded).
    pub diagnostics_every: usize,
    /// Keep `ρ` every this many steps.
    pub snapshot_every: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rho_exponent: 2.0,
            diagnostics_every: 1,
            snapshot_every: None,
        }
    }
}

struct Stepper<'a> {
    symbol: Vec<f64>,
    w: &'a PotentialSpec,
}

impl Stepper<'_> {
    /// `e^{-i τ φ(D)}` on every member.
    fn kinetic(&self, members: &[Field], tau: f64) -> Vec<Field> {
        let t = -tau / std::f64::consts::TAU;
        members
            .par_iter()
            .map(|u| inverse_transform(&evolve_spectrum(&forward_transform(u), &self.symbol, t)))
            .collect()
    }

    fn step(&self, state: &DensityState, dt: f64) -> DensityState {
        let half = self.kinetic(state.members(), 0.5 * dt);
        let mid = DensityState::from_parts(half, state.weights().to_vec(), state.theta());
        let v = convolve_real(self.w, mid.geometry(), &mid.density());
        let phase: Vec<Complex64> = v
            .iter()
            .map(|&vx| cis_turns(-dt * vx / std::f64::consts::TAU))
            .collect();
        let kicked: Vec<Field> = mid
            .members()
            .par_iter()
            .map(|u| {
                Field::from_parts(
                    u.geometry().clone(),
                    u.values().iter().zip(&phase).map(|(a, b)| a * b).collect(),
                )
            })
            .collect();
        let out = self.kinetic(&kicked, 0.5 * dt);
        DensityState::from_parts(out, state.weights().to_vec(), state.theta())
    }
}

/// One Strang step of length `dt >= 0`.
pub fn split_step(state: &DensityState, dt: f64, w: &PotentialSpec) -> Result<DensityState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("step dt = {dt} must be nonnegative")));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let stepper = Stepper {
        symbol: fractional_symbol(&state.geometry().lattice(), state.theta()),
        w,
    };
    Ok(stepper.step(state, dt))
}

/// Runs `round(T / dt)` Strang steps, recording diagnostics.
pub fn evolve(
    state: &DensityState,
    t_final: f64,
    dt: f64,
    w: &PotentialSpec,
    opts: &EvolveOptions,
) -> Result<TrajectoryRecord> {
    if !(t_final > 0.0 && t_final.is_finite()) || !(dt > 0.0) {
        return Err(Error::invalid("need T > 0 and dt > 0"));
    }
    let steps = (t_final / dt).round() as usize;
    if steps == 0 || (steps as f64 * dt - t_final).abs() > 0.5 * dt {
        return Err(Error::invalid(format!("dt = {dt} does not divide T = {t_final}")));
    }
    let stepper = Stepper {
        symbol: fractional_symbol(&state.geometry().lattice(), state.theta()),
        w,
    };
    let every = opts.diagnostics_every.max(1);
    let cell = state.geometry().cell_volume();
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        masses: Vec::new(),
        gram_deviation: Vec::new(),
        energy: Vec::new(),
        rho_norm: Vec::new(),
        rho_exponent: opts.rho_exponent,
        snapshots: Vec::new(),
        final_state: state.clone(),
    };
    let record = |rec: &mut TrajectoryRecord, s: &DensityState, t: f64| {
        let rho = s.density();
        rec.times.push(t);
        rec.masses.push(s.masses());
        rec.gram_deviation.push(s.gram_deviation());
        rec.energy.push(hartree_energy(s, w));
        rec.rho_norm.push(spatial_norm(&rho, opts.rho_exponent, cell));
    };
    record(&mut rec, state, 0.0);
    if opts.snapshot_every.is_some() {
        rec.snapshots.push((0.0, state.density()));
    }
    let mut cur = state.clone();
    for k in 1..=steps {
        cur = stepper.step(&cur, dt);
        let t = k as f64 * dt;
        let finite = cur
            .members()
            .iter()
            .all(|u| u.values().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        if !finite {
            rec.final_state = cur;
            return Err(Error::Diverged {
                at_time: t,
                partial: Box::new(rec),
            });
        }
        if k % every == 0 || k == steps {
            record(&mut rec, &cur, t);
        }
        if let Some(s) = opts.snapshot_every {
            if s > 0 && k % s == 0 {
                rec.snapshots.push((t, cur.density()));
            }
        }
    }
    rec.final_state = cur;
    Ok(rec)
}
