//! One runner per experiment kind. Cells run in parallel; rows come back in
//! cell order, so output does not depend on the schedule.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use strichartz_core::admissibility::{predict_sigma, SigmaOutcome, SigmaSetting};
use strichartz_core::hartree::{
    default_sobolev_index, fixed_point_iterate, DuhamelSetup, EvolveOptions, LowRank, XNorm,
};
use strichartz_core::ons::{
    flat_band_field, geometry_for_band, manifold_of, ons_estimate_ratio, random_band_field,
    strichartz_ratio, sweep_cells, OnsConfig, SweepAxis,
};
use strichartz_core::schatten::duality_check;
use strichartz_core::{
    derive_cell_seed, dispersive_sup, dispersive_sup_checked, evolve, fit_scaling, generate_ons,
    sobolev_schatten_norm, vdc_integral_oracle, Complex64, DensityState, Field, GeometrySpec,
    PotentialSpec, SpaceTimeField, TimeGrid,
};

use crate::config::{
    DualityCheck, Experiment, ExperimentConfig, FixedPoint, HartreeRun, InitialData, KernelSweep,
    OnsSweep, SlopeExpectation, StrichartzFit, VdcOracle, WeightKind,
};
use crate::report::{Check, Outcome, Row, Value};

pub fn execute(cfg: &ExperimentConfig) -> Outcome {
    match &cfg.experiment {
        Experiment::KernelSweep(p) => kernel_sweep(p),
        Experiment::VdcOracle(p) => vdc_oracle(p),
        Experiment::StrichartzFit(p) => strichartz_fit(p, cfg.seed),
        Experiment::OnsSweep(p) => ons_sweep(p, cfg.seed),
        Experiment::DualityCheck(p) => duality(p, cfg.seed),
        Experiment::HartreeRun(p) => hartree_run(p, cfg.seed),
        Experiment::FixedPoint(p) => fixed_point(p, cfg.seed),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64() * 1e3)
}

fn failed_row(cell_index: usize, width: usize, err: impl ToString, ms: f64) -> Row {
    Row {
        cell_index,
        values: vec![Value::Empty; width],
        pass: false,
        error: Some(err.to_string()),
        wall_time_ms: ms,
    }
}

fn spread(values: &[f64]) -> Option<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (!values.is_empty()).then(|| max / min)
}

const KERNEL_COLUMNS: &[&str] = &[
    "theta",
    "n",
    "t_min",
    "t_max",
    "time_points",
    "space_points",
    "sup_value",
    "argmax_t",
    "argmax_x",
    "refinement_change",
    "spread_to_min",
];

pub fn kernel_sweep(p: &KernelSweep) -> Outcome {
    let mut out = Outcome::new(KERNEL_COLUMNS);
    let cells: Vec<_> = p
        .n
        .par_iter()
        .map(|&n| {
            timed(|| {
                if p.refine {
                    dispersive_sup_checked(n, p.theta, p.time_points, p.space_points, p.t_min)
                } else {
                    dispersive_sup(n, p.theta, p.time_points, p.space_points, p.t_min)
                }
            })
        })
        .collect();
    let sups: Vec<f64> = cells.iter().filter_map(|(r, _)| r.as_ref().ok().map(|r| r.sup_value)).collect();
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    for (i, (res, ms)) in cells.into_iter().enumerate() {
        match res {
            Ok(r) => {
                let s = r.sup_value / min;
                if let Some(w) = &r.warning {
                    out.warnings.push(format!("N = {}: {w}", r.n));
                }
                out.rows.push(Row {
                    cell_index: i,
                    values: vec![
                        Value::F(r.theta),
                        Value::U(r.n as u64),
                        Value::F(r.t_min),
                        Value::F(r.t_max),
                        Value::U(r.t_points as u64),
                        Value::U(r.x_points as u64),
                        Value::F(r.sup_value),
                        Value::F(r.argmax_t),
                        Value::F(r.argmax_x),
                        Value::opt_f(r.refinement_change),
                        Value::F(s),
                    ],
                    pass: r.sup_value.is_finite() && s <= p.max_spread,
                    error: None,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(i, KERNEL_COLUMNS.len(), e, ms)),
        }
    }
    if let Some(s) = spread(&sups) {
        out.checks.push(Check::at_most("sup_spread", s, p.max_spread));
    }
    let points: Vec<(f64, f64)> = out
        .rows
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| (p.n[r.cell_index] as f64, if let Value::F(v) = r.values[6] { v } else { f64::NAN }))
        .filter(|&(n, v)| n > 0.0 && v > 0.0)
        .collect();
    if points.len() >= 3 {
        if let Ok(fit) = fit_scaling(&points) {
            out.add_fit("sup_vs_n", &fit, json!({}));
        }
    }
    out
}

const VDC_COLUMNS: &[&str] = &[
    "theta",
    "x",
    "p",
    "b",
    "t",
    "value_re",
    "value_im",
    "abs",
    "error_estimate",
    "envelope",
    "ratio",
    "intervals",
];

pub fn vdc_oracle(p: &VdcOracle) -> Outcome {
    let mut out = Outcome::new(VDC_COLUMNS);
    let cells: Vec<_> = p
        .t
        .par_iter()
        .map(|&t| timed(|| vdc_integral_oracle(p.theta, p.x, t, p.p, p.b)))
        .collect();
    let mut ratios = Vec::new();
    for (i, (res, ms)) in cells.into_iter().enumerate() {
        match res {
            Ok(r) => {
                ratios.push(r.ratio);
                out.rows.push(Row {
                    cell_index: i,
                    values: vec![
                        Value::F(p.theta),
                        Value::F(p.x),
                        Value::I(p.p),
                        Value::F(p.b),
                        Value::F(p.t[i]),
                        Value::F(r.value.re),
                        Value::F(r.value.im),
                        Value::F(r.value.norm()),
                        Value::F(r.error_estimate),
                        Value::F(r.envelope),
                        Value::F(r.ratio),
                        Value::U(r.intervals as u64),
                    ],
                    pass: r.error_estimate < p.tolerance,
                    error: None,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(i, VDC_COLUMNS.len(), e, ms)),
        }
    }
    if let Some(s) = spread(&ratios) {
        out.checks.push(Check::at_most("ratio_spread", s, p.max_spread));
    }
    out
}

const FIT_COLUMNS: &[&str] = &[
    "theta",
    "p",
    "q",
    "n",
    "grid_points",
    "time_points",
    "seed",
    "flat_ratio",
    "random_count",
    "random_max_ratio",
    "predicted_sigma",
    "normalized_random_max",
];

struct FitCell {
    grid_points: usize,
    time_points: usize,
    flat: Option<f64>,
    random_max: Option<f64>,
}

fn strichartz_cell(p: &StrichartzFit, n: usize, seed: u64) -> strichartz_core::Result<FitCell> {
    let geom = geometry_for_band(p.space.geometry, p.space.trunc_length, &p.space.grid, n)?;
    let (t0, t1) = p.interval.bounds(n, p.theta);
    let points = p
        .time_points
        .unwrap_or_else(|| (p.time_factor * (n as f64).powf(p.theta)).ceil() as usize + 1);
    let grid = TimeGrid::new(t0, t1, points)?;
    let flat = if p.flat {
        Some(strichartz_ratio(&flat_band_field(&geom, n)?, p.theta, n, grid, p.p, p.q)?)
    } else {
        None
    };
    let random_max = if p.random > 0 {
        let ratios = (0..p.random)
            .into_par_iter()
            .map(|j| {
                let f = random_band_field(&geom, n, derive_cell_seed(seed, j as u64))?;
                strichartz_ratio(&f, p.theta, n, grid, p.p, p.q)
            })
            .collect::<strichartz_core::Result<Vec<f64>>>()?;
        Some(ratios.into_iter().fold(0.0, f64::max))
    } else {
        None
    };
    Ok(FitCell {
        grid_points: geom.len(),
        time_points: points,
        flat,
        random_max,
    })
}

pub fn strichartz_fit(p: &StrichartzFit, global_seed: u64) -> Outcome {
    let mut out = Outcome::new(FIT_COLUMNS);
    let prediction = predict_sigma(&SigmaSetting {
        manifold: manifold_of(p.space.geometry),
        theta: p.theta,
        p: p.p,
        q: p.q,
        estimate: p.prediction,
    });
    let sigma = prediction.prediction().map(|s| s.sigma);
    if let SigmaOutcome::NotApplicable { reason } = &prediction {
        out.warnings.push(format!("no predicted loss: {reason}"));
    }
    let cells: Vec<_> = p
        .n
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let seed = derive_cell_seed(global_seed, i as u64);
            (seed, timed(|| strichartz_cell(p, n, seed)))
        })
        .collect();
    let mut flat_pts = Vec::new();
    let mut random_pts = Vec::new();
    let mut normalized = Vec::new();
    for (i, (seed, (res, ms))) in cells.into_iter().enumerate() {
        let n = p.n[i];
        match res {
            Ok(c) => {
                let norm = sigma.and_then(|s| c.random_max.map(|r| r / (n as f64).powf(s + p.epsilon)));
                if let Some(f) = c.flat {
                    flat_pts.push((n as f64, f));
                }
                if let Some(r) = c.random_max {
                    random_pts.push((n as f64, r));
                }
                normalized.extend(norm);
                let ok = c.flat.is_none_or(f64::is_finite) && c.random_max.is_none_or(f64::is_finite);
                out.rows.push(Row {
                    cell_index: i,
                    values: vec![
                        Value::F(p.theta),
                        Value::F(p.p),
                        Value::F(p.q),
                        Value::U(n as u64),
                        Value::U(c.grid_points as u64),
                        Value::U(c.time_points as u64),
                        Value::U(seed),
                        Value::opt_f(c.flat),
                        Value::U(p.random as u64),
                        Value::opt_f(c.random_max),
                        Value::opt_f(sigma),
                        Value::opt_f(norm),
                    ],
                    pass: ok,
                    error: None,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(i, FIT_COLUMNS.len(), e, ms)),
        }
    }
    let extra = |lo: Option<f64>| {
        json!({
            "predicted_sigma": sigma,
            "tolerance": p.slope_tolerance,
            "lower_bound": lo,
            "upper_bound": sigma.map(|s| s + p.slope_tolerance),
        })
    };
    for (name, pts, lo) in [("flat", &flat_pts, Some(0.0)), ("random_max", &random_pts, None)] {
        if pts.len() < 3 {
            continue;
        }
        match fit_scaling(pts) {
            Ok(fit) => {
                out.add_fit(name, &fit, extra(lo));
                if let Some(s) = sigma {
                    let hi = s + p.slope_tolerance;
                    let check_name = format!("{name}_slope");
                    out.checks.push(match lo {
                        Some(lo) => Check::within(&check_name, fit.slope, lo, hi),
                        None => Check::at_most(&check_name, fit.slope, hi),
                    });
                }
            }
            Err(e) => out.warnings.push(format!("{name} fit failed: {e}")),
        }
    }
    if normalized.len() >= 2 {
        out.checks.push(Check::at_most(
            "normalized_random_spread",
            spread(&normalized).unwrap(),
            p.max_spread,
        ));
    }
    out
}

const ONS_COLUMNS: &[&str] = &[
    "theta",
    "p",
    "q",
    "n",
    "m",
    "alpha_dual",
    "family",
    "lambda",
    "seed",
    "families",
    "lhs_norm",
    "lambda_norm",
    "ratio",
    "predicted_sigma",
    "alpha_max",
    "alpha_admitted",
];

fn ons_base(p: &OnsSweep) -> OnsConfig {
    OnsConfig {
        geometry: p.space.geometry,
        trunc_length: p.space.trunc_length,
        grid: p.space.grid.clone(),
        theta: p.theta,
        p: p.p,
        q: p.q,
        n: p.n,
        m: p.m,
        alpha_dual: p.alpha_dual,
        family: p.family,
        lambda: p.lambda,
        extra_random: p.extra_random,
        interval: p.interval,
        time_points: p.time_points,
        estimate: p.prediction,
        seed: 0,
    }
}

fn label<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

pub fn ons_sweep(p: &OnsSweep, global_seed: u64) -> Outcome {
    let mut out = Outcome::new(ONS_COLUMNS);
    let cells = sweep_cells(&ons_base(p), &p.sweep, global_seed, p.on_theta_line);
    let results: Vec<_> = cells.par_iter().map(|c| timed(|| ons_estimate_ratio(c))).collect();
    let mut points = Vec::new();
    let mut sigma = None;
    for (i, (res, ms)) in results.into_iter().enumerate() {
        match res {
            Ok(r) => {
                let pred = r.predicted.prediction();
                let alpha_max = pred.and_then(|s| s.alpha_max);
                if let (Some(ratio), Some(x)) = (
                    r.ratio,
                    match p.sweep {
                        SweepAxis::N(_) => Some(r.n as f64),
                        SweepAxis::M(_) => Some(r.m as f64),
                        _ => None,
                    },
                ) {
                    points.push((x, ratio));
                }
                sigma = sigma.or(pred.map(|s| s.sigma));
                let error = match &r.predicted {
                    SigmaOutcome::NotApplicable { reason } => Some(format!("not applicable: {reason}")),
                    _ => None,
                };
                out.rows.push(Row {
                    cell_index: i,
                    values: vec![
                        Value::F(r.theta),
                        Value::F(r.p),
                        Value::F(r.q),
                        Value::U(r.n as u64),
                        Value::U(r.m as u64),
                        Value::F(r.alpha_dual),
                        Value::S(label(&r.family)),
                        Value::S(label(&r.lambda)),
                        Value::U(r.seed),
                        Value::U(r.families as u64),
                        Value::opt_f(r.lhs_norm),
                        Value::F(r.lambda_norm),
                        Value::opt_f(r.ratio),
                        Value::opt_f(pred.map(|s| s.sigma)),
                        Value::opt_f(alpha_max.map(|a| a.value)),
                        alpha_max.map_or(Value::Empty, |a| Value::B(a.admits(r.alpha_dual))),
                    ],
                    pass: r.ratio.is_some_and(f64::is_finite),
                    error,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(i, ONS_COLUMNS.len(), e, ms)),
        }
    }
    if points.len() >= 3 {
        match fit_scaling(&points) {
            Ok(fit) => {
                let bound = sigma.map(|s| s + p.slope_tolerance);
                out.add_fit(
                    "ratio",
                    &fit,
                    json!({
                        "predicted_sigma": sigma,
                        "tolerance": p.slope_tolerance,
                        "expect": label(&p.expect),
                        "bound": bound,
                    }),
                );
                if let Some(b) = bound {
                    out.checks.push(match p.expect {
                        SlopeExpectation::Bounded => Check::at_most("ratio_slope", fit.slope, b),
                        SlopeExpectation::Exceeds => Check::above("ratio_slope", fit.slope, b),
                    });
                }
            }
            Err(e) => out.warnings.push(format!("fit failed: {e}")),
        }
    }
    out
}

const DUALITY_COLUMNS: &[&str] = &[
    "alpha",
    "theta",
    "n",
    "samples",
    "seed",
    "rows",
    "cols",
    "lhs_op",
    "sampled_max",
    "ratio",
    "argmax_sample",
    "dominance_applies",
    "consistent",
];

fn duality_weights(p: &DualityCheck, seed: u64) -> strichartz_core::Result<(SpaceTimeField, SpaceTimeField)> {
    let geom = GeometrySpec::torus(p.grid.clone()).build()?;
    let (t0, t1) = p.interval.bounds(p.n, p.theta);
    let grid = TimeGrid::new(t0, t1, p.time_points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w1 = Vec::with_capacity(grid.len());
    let mut w2 = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let v: Vec<Complex64> = match p.weight {
            WeightKind::Constant => vec![Complex64::new(1.0, 0.0); geom.len()],
            WeightKind::Random => (0..geom.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        };
        w2.push(Field::new(geom.clone(), v.iter().map(|z| z.conj()).collect())?);
        w1.push(Field::new(geom.clone(), v)?);
    }
    Ok((SpaceTimeField::new(grid, w1)?, SpaceTimeField::new(grid, w2)?))
}

pub fn duality(p: &DualityCheck, global_seed: u64) -> Outcome {
    let mut out = Outcome::new(DUALITY_COLUMNS);
    let weights = duality_weights(p, derive_cell_seed(global_seed, u64::MAX)).map_err(|e| e.to_string());
    let cells: Vec<_> = p
        .alpha
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let seed = derive_cell_seed(global_seed, i as u64);
            let res = timed(|| match &weights {
                Ok((w1, w2)) => duality_check(w1, w2, p.n, alpha, p.theta, p.samples, seed, p.capacity)
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            });
            (seed, res)
        })
        .collect();
    let mut consistent = 0;
    for (i, (seed, (res, ms))) in cells.into_iter().enumerate() {
        match res {
            Ok(r) => {
                let ok = r.consistent != Some(false) && r.ratio.is_finite();
                consistent += usize::from(ok);
                out.rows.push(Row {
                    cell_index: i,
                    values: vec![
                        Value::F(p.alpha[i]),
                        Value::F(p.theta),
                        Value::U(p.n as u64),
                        Value::U(r.samples as u64),
                        Value::U(seed),
                        Value::U(r.rows as u64),
                        Value::U(r.cols as u64),
                        Value::F(r.lhs_op),
                        Value::F(r.sampled_max),
                        Value::F(r.ratio),
                        r.argmax_sample.map_or(Value::Empty, |s| Value::U(s as u64)),
                        Value::B(r.dominance_applies),
                        r.consistent.map_or(Value::Empty, Value::B),
                    ],
                    pass: ok,
                    error: None,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(i, DUALITY_COLUMNS.len(), e, ms)),
        }
    }
    if !p.alpha.is_empty() {
        out.checks.push(Check::at_least(
            "dominance_fraction",
            consistent as f64 / p.alpha.len() as f64,
            1.0,
        ));
    }
    out
}

fn initial_state(init: &InitialData, theta: f64, seed: u64) -> strichartz_core::Result<DensityState> {
    let geom = GeometrySpec::torus(vec![init.grid_points]).build()?;
    let fam = generate_ons(init.family, init.weights.len(), init.band, &geom, seed)?;
    DensityState::new(fam.fields(), init.weights.clone(), theta)
}

const HARTREE_COLUMNS: &[&str] = &[
    "theta",
    "dt",
    "steps",
    "members",
    "energy_initial",
    "max_mass_deviation",
    "max_gram_deviation",
    "energy_drift",
    "relative_energy_drift",
];

pub fn hartree_run(p: &HartreeRun, global_seed: u64) -> Outcome {
    let mut out = Outcome::new(HARTREE_COLUMNS);
    let setup = initial_state(&p.initial, p.theta, derive_cell_seed(global_seed, 0))
        .and_then(|s| Ok((s, PotentialSpec::new(p.potential)?)))
        .map_err(|e| e.to_string());
    let opts = EvolveOptions {
        diagnostics_every: p.diagnostics_every,
        ..EvolveOptions::default()
    };
    let mut drifts = Vec::new();
    for k in 0..=p.halvings {
        let dt = p.dt / 2f64.powi(k as i32);
        let (res, ms) = timed(|| match &setup {
            Ok((state, w)) => evolve(state, p.t_final, dt, w, &opts).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        });
        match res {
            Ok(traj) => {
                let (mass, gram, drift) = (traj.max_mass_deviation(), traj.max_gram_deviation(), traj.energy_drift());
                let relative = traj.relative_energy_drift();
                drifts.push(drift);
                out.rows.push(Row {
                    cell_index: k,
                    values: vec![
                        Value::F(p.theta),
                        Value::F(dt),
                        Value::U((p.t_final / dt).round() as u64),
                        Value::U(p.initial.weights.len() as u64),
                        Value::F(traj.energy[0]),
                        Value::F(mass),
                        Value::F(gram),
                        Value::F(drift),
                        Value::F(relative),
                    ],
                    pass: mass < p.mass_tolerance && gram < p.gram_tolerance && relative < p.energy_tolerance,
                    error: None,
                    wall_time_ms: ms,
                });
            }
            Err(e) => out.rows.push(failed_row(k, HARTREE_COLUMNS.len(), e, ms)),
        }
    }
    for (k, pair) in drifts.windows(2).enumerate() {
        out.checks.push(Check::at_least(
            &format!("drift_reduction_{k}"),
            pair[0] / pair[1],
            p.min_halving_ratio,
        ));
    }
    out
}

const FIXED_POINT_COLUMNS: &[&str] = &[
    "theta",
    "t_final",
    "time_points",
    "iteration",
    "residual",
    "ratio",
    "truncation_mass",
    "max_rank",
];

struct FixedPointRun {
    report: strichartz_core::hartree::FixedPointReport,
    cross: Option<f64>,
    data_norm: f64,
}

fn run_fixed_point(p: &FixedPoint, seed: u64) -> strichartz_core::Result<FixedPointRun> {
    let mut state = initial_state(&p.initial, p.theta, seed)?;
    let s = p.s.unwrap_or_else(|| default_sobolev_index(p.p));
    let norm = XNorm::new(1, p.p, p.q, s)?;
    let measure = |st: &DensityState| {
        sobolev_schatten_norm(&LowRank::from_state(st).to_dense(), norm.alpha, s, st.geometry())
    };
    if let Some(target) = p.data_norm {
        let current = measure(&state)?;
        state = state.scaled(target / current)?;
    }
    let data_norm = measure(&state)?;
    let w = PotentialSpec::new(p.potential)?;
    let mut setup = DuhamelSetup::new(&state, w, p.t_final, p.time_points)?;
    if let Some(cap) = p.rank_cap {
        setup = setup.with_rank_cap(cap);
    }
    let report = fixed_point_iterate(&setup, p.iterations, &norm)?;
    let cross = match &p.cross_check {
        Some(c) => {
            let steps = (p.t_final / c.dt).round() as usize;
            let opts = EvolveOptions {
                snapshot_every: Some(steps / (p.time_points - 1)),
                ..EvolveOptions::default()
            };
            let traj = evolve(&state, p.t_final, c.dt, &w, &opts)?;
            let cell = state.geometry().cell_volume();
            let worst = traj
                .snapshots
                .iter()
                .zip(&report.last().path.rho)
                .map(|((_, a), b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2) * cell).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            Some(worst)
        }
        None => None,
    };
    Ok(FixedPointRun {
        report,
        cross,
        data_norm,
    })
}

pub fn fixed_point(p: &FixedPoint, global_seed: u64) -> Outcome {
    let mut out = Outcome::new(FIXED_POINT_COLUMNS);
    let (res, ms) = timed(|| run_fixed_point(p, derive_cell_seed(global_seed, 0)));
    let run = match res {
        Ok(r) => r,
        Err(e) => {
            out.rows.push(failed_row(0, FIXED_POINT_COLUMNS.len(), e, ms));
            return out;
        }
    };
    let report = &run.report;
    let per_iter = ms / report.iterates.len().max(1) as f64;
    for (i, it) in report.iterates.iter().enumerate() {
        let ratio = i.checked_sub(1).map(|j| report.ratios[j]);
        let max_rank = it.path.states.iter().map(|s| s.rank()).max().unwrap_or(0);
        out.rows.push(Row {
            cell_index: i,
            values: vec![
                Value::F(p.theta),
                Value::F(p.t_final),
                Value::U(p.time_points as u64),
                Value::U(it.k as u64),
                Value::F(it.residual),
                Value::opt_f(ratio),
                Value::F(it.path.truncation_mass),
                Value::U(max_rank as u64),
            ],
            pass: ratio.map_or(it.residual.is_finite(), |r| r < p.ratio_bound),
            error: None,
            wall_time_ms: per_iter,
        });
    }
    out.fits.insert(
        "residuals".into(),
        json!({
            "initial_norm": run.data_norm,
            "floor": report.floor,
            "ratios": report.ratios,
            "contractive": report.contractive,
            "diverged": report.diverged,
        }),
    );
    let worst_ratio = report.ratios.iter().copied().fold(0.0, f64::max);
    out.checks.push(Check::at_most("max_ratio", worst_ratio, p.ratio_bound));
    if report.diverged || report.iterates.len() < p.iterations {
        out.checks.push(Check::at_least("iterations_completed", report.iterates.len() as f64, p.iterations as f64));
    }
    if let (Some(c), Some(d)) = (&p.cross_check, run.cross) {
        out.checks.push(Check::at_most("split_step_distance", d, c.tolerance));
    }
    out
}
