//! The Duhamel fixed-point map for `i∂_t γ = [φ(D) + w * ρ_γ, γ]` at finite
//! rank.
//!
//! Operators are stored as `X diag(μ) X*` with `X` in folded coordinates
//! (grid values times `√cell`), so `X` has orthonormal columns exactly when
//! the corresponding fields are orthonormal in `L²`. In the interaction
//! picture `γ̃(t) = U(t)* γ(t) U(t)`, `U(t) = e^{-itφ(D)}`,
//!
//! `γ̃(t) = γ₀ - i ∫₀^t U(s)* [V(s), γ(s)] U(s) ds`, `V = w * ρ`,
//!
//! and the integral is accumulated node by node with the trapezoid rule.
//! Every increment `-i[V, X μ X*] = [A X] K [A X]*` with `A = V X` and the
//! Hermitian core `K = [[0, -iμ], [iμ, 0]]` is low rank, and the running sum
//! is recompressed to its `rank_cap` dominant eigenpairs.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::potential::convolve_real;
use super::{DensityState, PotentialSpec};
use crate::admissibility::{classify_pair, AdmissibleKind, PairRegion};
use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeField, TimeGrid};
use crate::geometry::Geometry;
use crate::norms::{spatial_norm, time_norm};
use crate::schatten::{bessel_weights, hermitian_eigen, schatten_from_singular, CMatrix};
use crate::spectral::{apply_real_multiplier, evolve_spectrum, forward_transform, fractional_symbol, inverse_transform};

/// Hermitian finite-rank operator `X diag(μ) X*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRank {
    pub vectors: CMatrix,
    pub eigs: Vec<f64>,
}

impl LowRank {
    pub fn from_state(state: &DensityState) -> Self {
        let geom = state.geometry();
        let root = geom.cell_volume().sqrt();
        let vectors = CMatrix::from_fn(geom.len(), state.len(), |r, c| {
            state.members()[c].values()[r] * root
        });
        LowRank {
            vectors,
            eigs: state.weights().to_vec(),
        }
    }

    pub fn zero(len: usize) -> Self {
        LowRank {
            vectors: CMatrix::zeros(len, 0),
            eigs: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.eigs.len()
    }

    /// `ρ(x) = γ(x, x)`.
    pub fn density(&self, cell: f64) -> Vec<f64> {
        let mut rho = vec![0.0; self.vectors.nrows()];
        for (c, &mu) in self.eigs.iter().enumerate() {
            for (r, v) in rho.iter_mut().zip(self.vectors.column(c).iter()) {
                *r += mu * v.norm_sqr() / cell;
            }
        }
        rho
    }

    /// Dense matrix in folded coordinates.
    pub fn to_dense(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (c, &mu) in self.eigs.iter().enumerate() {
            scaled.column_mut(c).scale_mut(mu);
        }
        scaled * self.vectors.adjoint()
    }

    /// Back to orbitals, provided every eigenvalue is nonnegative up to `tol`
    /// (negative ones within `tol` are dropped).
    pub fn to_state(&self, geom: &Arc<Geometry>, theta: f64, tol: f64) -> Result<DensityState> {
        let root = geom.cell_volume().sqrt();
        let mut order: Vec<usize> = (0..self.rank()).collect();
        order.sort_by(|&a, &b| self.eigs[b].total_cmp(&self.eigs[a]));
        let mut members = Vec::new();
        let mut weights = Vec::new();
        for c in order {
            let mu = self.eigs[c];
            if mu < -tol {
                return Err(Error::invalid(format!("eigenvalue {mu} is negative")));
            }
            if mu <= 0.0 {
                continue;
            }
            let vals = self.vectors.column(c).iter().map(|v| v / root).collect();
            members.push(Field::from_parts(geom.clone(), vals));
            weights.push(mu);
        }
        DensityState::new(members, weights, theta)
    }
}

/// Everything the map needs besides the input path.
#[derive(Debug, Clone)]
pub struct DuhamelSetup {
    pub geometry: Arc<Geometry>,
    pub theta: f64,
    pub gamma0: LowRank,
    pub potential: PotentialSpec,
    pub t_final: f64,
    pub time_pts: usize,
    /// Rank kept after each recompression.
    pub rank_cap: usize,
    /// Total discarded trace mass above which the map fails.
    pub max_truncation_mass: Option<f64>,
    symbol: Vec<f64>,
}

impl DuhamelSetup {
    /// Rank cap defaults to `4M`.
    pub fn new(
        initial: &DensityState,
        potential: PotentialSpec,
        t_final: f64,
        time_pts: usize,
    ) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::invalid(format!("T = {t_final} must be positive")));
        }
        if time_pts < 2 {
            return Err(Error::invalid("need at least two time nodes"));
        }
        let geometry = initial.geometry().clone();
        let symbol = fractional_symbol(&geometry.lattice(), initial.theta());
        Ok(DuhamelSetup {
            theta: initial.theta(),
            gamma0: LowRank::from_state(initial),
            potential,
            t_final,
            time_pts,
            rank_cap: 4 * initial.len(),
            max_truncation_mass: None,
            symbol,
            geometry,
        })
    }

    pub fn with_rank_cap(mut self, cap: usize) -> Self {
        self.rank_cap = cap.max(1);
        self
    }

    pub fn with_max_truncation_mass(mut self, mass: f64) -> Self {
        self.max_truncation_mass = Some(mass);
        self
    }

    pub fn with_final_time(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn with_initial_scale(mut self, c: f64) -> Self {
        self.gamma0.eigs.iter_mut().for_each(|m| *m *= c);
        self
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(0.0, self.t_final, self.time_pts).expect("validated in new")
    }

    /// `e^{-itφ(D)}` on every column.
    fn flow(&self, x: &CMatrix, t: f64) -> CMatrix {
        let turns = -t / std::f64::consts::TAU;
        map_columns(x, &self.geometry, |f| {
            inverse_transform(&evolve_spectrum(&forward_transform(f), &self.symbol, turns))
        })
    }
}

fn map_columns(x: &CMatrix, geom: &Arc<Geometry>, op: impl Fn(&Field) -> Field) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        let f = Field::from_parts(geom.clone(), x.column(c).iter().copied().collect());
        out.column_mut(c).copy_from_slice(op(&f).values());
    }
    out
}

/// `γ` and `ρ = ρ_γ` on the nodes of the setup's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelPath {
    pub times: Vec<f64>,
    pub states: Vec<LowRank>,
    pub rho: Vec<Vec<f64>>,
    /// Trace mass discarded while producing this path.
    pub truncation_mass: f64,
}

impl DuhamelPath {
    pub fn rho_field(&self, geom: &Arc<Geometry>) -> Result<SpaceTimeField> {
        let grid = TimeGrid::new(self.times[0], *self.times.last().unwrap(), self.times.len())?;
        let frames = self
            .rho
            .iter()
            .map(|r| {
                Field::from_parts(geom.clone(), r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            })
            .collect();
        SpaceTimeField::new(grid, frames)
    }

    /// `sup_t ‖⟨D⟩^s (γ_a - γ_b) ⟨D⟩^s‖_{S^α} + ‖ρ_a - ρ_b‖_{L^p_t L^q_x}`.
    pub fn distance(&self, other: &DuhamelPath, setup: &DuhamelSetup, norm: &XNorm) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::invalid("paths live on different time grids"));
        }
        let weights = bessel_weights(&setup.geometry, norm.s);
        let ops: Vec<f64> = self
            .states
            .par_iter()
            .zip(&other.states)
            .map(|(a, b)| difference_norm(a, b, &weights, &setup.geometry, norm.alpha))
            .collect::<Result<_>>()?;
        let sup = ops.into_iter().fold(0.0, f64::max);
        let cell = setup.geometry.cell_volume();
        let spatial: Vec<f64> = self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
                spatial_norm(&d, norm.q, cell)
            })
            .collect();
        Ok(sup + time_norm(&setup.grid(), &spatial, norm.p))
    }
}

/// Exponents of the space the residuals are measured in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XNorm {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    /// Sobolev–Schatten exponent `2q/(q+1)`.
    pub alpha: f64,
}

impl XNorm {
    /// `(p, q)` must lie strictly inside the subcritical part of the density
    /// line.
    pub fn new(d: usize, p: f64, q: f64, s: f64) -> Result<Self> {
        let pair = classify_pair(d, p, q, 2.0);
        if !pair.is(AdmissibleKind::Density) || pair.region != PairRegion::Subcritical || q <= 1.0 {
            return Err(Error::invalid(format!(
                "(p, q) = ({p}, {q}) is not an interior density pair in d = {d}"
            )));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::invalid("Sobolev index must be nonnegative"));
        }
        Ok(XNorm {
            p,
            q,
            s,
            alpha: 2.0 * q / (q + 1.0),
        })
    }
}

/// `σ/2 + 0.05` with the loss `σ = 1/p`.
pub fn default_sobolev_index(p: f64) -> f64 {
    0.5 / p + 0.05
}

fn difference_norm(a: &LowRank, b: &LowRank, weights: &[f64], geom: &Arc<Geometry>, alpha: f64) -> Result<f64> {
    let len = a.vectors.nrows();
    let mut stack = CMatrix::zeros(len, a.rank() + b.rank());
    stack.columns_mut(0, a.rank()).copy_from(&a.vectors);
    stack.columns_mut(a.rank(), b.rank()).copy_from(&b.vectors);
    let lifted = map_columns(&stack, geom, |f| apply_real_multiplier(f, weights));
    let core: Vec<f64> = a.eigs.iter().copied().chain(b.eigs.iter().map(|m| -m)).collect();
    let eigs = hermitian_eigs(&lifted, &CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        core.len(),
        core.iter().map(|&m| Complex64::new(m, 0.0)),
    )))?;
    let mut s: Vec<f64> = eigs.1.iter().map(|e| e.abs()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(schatten_from_singular(&s, alpha))
}

/// Orthonormal basis and eigenvalues of the Hermitian `Z K Z*`.
fn hermitian_eigs(z: &CMatrix, k: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    if z.ncols() == 0 {
        return Ok((CMatrix::zeros(z.nrows(), 0), Vec::new()));
    }
    if z.iter().chain(k.iter()).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::numeric("non-finite entries in a Duhamel increment"));
    }
    let qr = z.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let mut h = &r * k * r.adjoint();
    h = (&h + h.adjoint()).scale(0.5);
    let (vectors, values) = hermitian_eigen(&h)?;
    Ok((q * vectors, values))
}

/// Keeps the `cap` eigenpairs of largest modulus; returns the discarded mass.
fn compress(z: &CMatrix, k: &CMatrix, cap: usize) -> Result<(LowRank, f64)> {
    let (basis, eigs) = hermitian_eigs(z, k)?;
    let mut order: Vec<usize> = (0..eigs.len()).collect();
    order.sort_by(|&a, &b| eigs[b].abs().total_cmp(&eigs[a].abs()));
    let keep = order.len().min(cap);
    let dropped: f64 = order[keep..].iter().map(|&i| eigs[i].abs()).sum();
    let mut vectors = CMatrix::zeros(z.nrows(), keep);
    for (c, &i) in order[..keep].iter().enumerate() {
        vectors.column_mut(c).copy_from(&basis.column(i));
    }
    let eigs = order[..keep].iter().map(|&i| eigs[i]).collect();
    Ok((LowRank { vectors, eigs }, dropped))
}

/// One interaction-picture increment `U(t)* [A X] K [A X]* U(t)`, unscaled.
struct Increment {
    z: CMatrix,
    core: CMatrix,
}

fn increment(setup: &DuhamelSetup, gamma: &LowRank, rho: &[f64], t: f64) -> Increment {
    let r = gamma.rank();
    let v = convolve_real(&setup.potential, &setup.geometry, rho);
    let mut stacked = CMatrix::zeros(gamma.vectors.nrows(), 2 * r);
    for c in 0..r {
        for (row, x) in gamma.vectors.column(c).iter().enumerate() {
            stacked[(row, c)] = x * v[row];
            stacked[(row, r + c)] = *x;
        }
    }
    let mut core = CMatrix::zeros(2 * r, 2 * r);
    for (c, &mu) in gamma.eigs.iter().enumerate() {
        core[(c, r + c)] = Complex64::new(0.0, -mu);
        core[(r + c, c)] = Complex64::new(0.0, mu);
    }
    Increment {
        z: setup.flow(&stacked, -t),
        core,
    }
}

/// `U(t) γ₀ U(t)*` on every node.
pub fn free_path(setup: &DuhamelSetup) -> DuhamelPath {
    let times = setup.grid().times();
    let cell = setup.geometry.cell_volume();
    let states: Vec<LowRank> = times
        .par_iter()
        .map(|&t| LowRank {
            vectors: setup.flow(&setup.gamma0.vectors, t),
            eigs: setup.gamma0.eigs.clone(),
        })
        .collect();
    let rho = states.iter().map(|s| s.density(cell)).collect();
    DuhamelPath {
        times,
        states,
        rho,
        truncation_mass: 0.0,
    }
}

/// `Φ(γ, ρ) = (Φ₁(γ, ρ), ρ[Φ₁(γ, ρ)])` on the nodes of the setup's grid.
pub fn duhamel_map(setup: &DuhamelSetup, input: &DuhamelPath) -> Result<DuhamelPath> {
    if input.times.len() != setup.time_pts || input.rho.len() != setup.time_pts {
        return Err(Error::invalid("input path does not match the time grid"));
    }
    let times = setup.grid().times();
    let h = setup.grid().step();
    let incs: Vec<Increment> = if setup.potential.is_zero() {
        Vec::new()
    } else {
        times
            .par_iter()
            .enumerate()
            .map(|(l, &t)| increment(setup, &input.states[l], &input.rho[l], t))
            .collect()
    };
    let cell = setup.geometry.cell_volume();
    let mut lifted = setup.gamma0.clone();
    let mut truncated = 0.0;
    let mut tilde = vec![lifted.clone()];
    for l in 1..times.len() {
        if !incs.is_empty() {
            let parts = [
                (&lifted.vectors, diag(&lifted.eigs)),
                (&incs[l - 1].z, incs[l - 1].core.scale(0.5 * h)),
                (&incs[l].z, incs[l].core.scale(0.5 * h)),
            ];
            let cols: usize = parts.iter().map(|(z, _)| z.ncols()).sum();
            let mut z = CMatrix::zeros(lifted.vectors.nrows(), cols);
            let mut k = CMatrix::zeros(cols, cols);
            let mut at = 0;
            for (zi, ki) in &parts {
                let w = zi.ncols();
                z.columns_mut(at, w).copy_from(*zi);
                k.view_mut((at, at), (w, w)).copy_from(ki);
                at += w;
            }
            let (next, dropped) = compress(&z, &k, setup.rank_cap)?;
            truncated += dropped;
            if let Some(cap) = setup.max_truncation_mass {
                if truncated > cap {
                    return Err(Error::Capacity(format!(
                        "discarded trace mass {truncated:.3e} exceeds {cap:.3e} at t = {}",
                        times[l]
                    )));
                }
            }
            lifted = next;
        }
        tilde.push(lifted.clone());
    }
    let states: Vec<LowRank> = tilde
        .into_par_iter()
        .zip(times.par_iter())
        .map(|(g, &t)| LowRank {
            vectors: setup.flow(&g.vectors, t),
            eigs: g.eigs,
        })
        .collect();
    let rho = states.iter().map(|s| s.density(cell)).collect();
    Ok(DuhamelPath {
        times,
        states,
        rho,
        truncation_mass: truncated,
    })
}

fn diag(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        v.len(),
        v.iter().map(|&m| Complex64::new(m, 0.0)),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelIterate {
    pub k: usize,
    pub path: DuhamelPath,
    /// `‖x_k - x_{k-1}‖_{X_T}`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub iterates: Vec<DuhamelIterate>,
    /// `residual_k / residual_{k-1}` for `k >= 2`; zero once residuals fall
    /// below `floor`.
    pub ratios: Vec<f64>,
    /// `1e-11 · ‖free path‖_{X_T}`.
    pub floor: f64,
    pub contractive: bool,
    /// Residual grew on three consecutive iterations.
    pub diverged: bool,
}

impl FixedPointReport {
    pub fn residuals(&self) -> Vec<f64> {
        self.iterates.iter().map(|i| i.residual).collect()
    }

    pub fn last(&self) -> &DuhamelIterate {
        self.iterates.last().expect("at least one iterate")
    }
}

/// Picard iteration `x_k = Φ(x_{k-1})` from the free solution `x_0`.
pub fn fixed_point_iterate(setup: &DuhamelSetup, iterations: usize, norm: &XNorm) -> Result<FixedPointReport> {
    if iterations < 2 {
        return Err(Error::invalid("need at least two iterations"));
    }
    let free = free_path(setup);
    let zero = DuhamelPath {
        times: free.times.clone(),
        states: vec![LowRank::zero(setup.geometry.len()); free.times.len()],
        rho: vec![vec![0.0; setup.geometry.len()]; free.times.len()],
        truncation_mass: 0.0,
    };
    let floor = 1e-11 * free.distance(&zero, setup, norm)?;
    let mut prev = free;
    let mut iterates: Vec<DuhamelIterate> = Vec::new();
    let mut ratios = Vec::new();
    let mut growth = 0;
    let mut diverged = false;
    for k in 1..=iterations {
        let next = duhamel_map(setup, &prev)?;
        let residual = next.distance(&prev, setup, norm)?;
        if !residual.is_finite() {
            diverged = true;
            break;
        }
        if let Some(last) = iterates.last() {
            let ratio = if residual <= floor || last.residual <= floor {
                0.0
            } else {
                residual / last.residual
            };
            ratios.push(ratio);
            growth = if ratio > 1.0 { growth + 1 } else { 0 };
        }
        iterates.push(DuhamelIterate {
            k,
            path: next.clone(),
            residual,
        });
        prev = next;
        if growth >= 3 {
            diverged = true;
            break;
        }
    }
    let contractive = !diverged && !ratios.is_empty() && ratios.iter().all(|&r| r < 1.0);
    Ok(FixedPointReport {
        iterates,
        ratios,
        floor,
        contractive,
        diverged,
    })
}

/// Largest `T <= t_max` for which [`fixed_point_iterate`] contracts, found
/// by `steps` rounds of bisection on `[0, t_max]`. Returns `0` when even the
/// first probe fails.
pub fn largest_contractive_time(
    setup: &DuhamelSetup,
    t_max: f64,
    iterations: usize,
    norm: &XNorm,
    steps: usize,
) -> Result<f64> {
    let contracts = |t: f64| -> Result<bool> {
        Ok(fixed_point_iterate(&setup.clone().with_final_time(t), iterations, norm)?.contractive)
    };
    if contracts(t_max)? {
        return Ok(t_max);
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if contracts(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;
    use crate::hartree::PotentialKind;

    fn two_modes(weights: Vec<f64>) -> DensityState {
        let g = GeometrySpec::torus(vec![32]).build().unwrap();
        let members = vec![
            Field::plane_wave(g.clone(), &[1]).unwrap(),
            Field::plane_wave(g, &[-2]).unwrap(),
        ];
        DensityState::new(members, weights, 2.0).unwrap()
    }

    #[test]
    fn free_potential_is_a_fixed_point() {
        let s = two_modes(vec![0.1, 0.05]);
        let w = PotentialSpec::new(PotentialKind::Zero).unwrap();
        let setup = DuhamelSetup::new(&s, w, 0.05, 11).unwrap();
        let norm = XNorm::new(1, 4.0, 2.0, default_sobolev_index(4.0)).unwrap();
        let rep = fixed_point_iterate(&setup, 3, &norm).unwrap();
        assert!(rep.iterates[0].residual <= rep.floor);
        assert!(rep.contractive);
    }

    #[test]
    fn zero_input_path_gives_free_conjugation() {
        let s = two_modes(vec![0.1, 0.05]);
        let w = PotentialSpec::new(PotentialKind::Yukawa { a: 1.0 }).unwrap();
        let setup = DuhamelSetup::new(&s, w, 0.05, 6).unwrap();
        let free = free_path(&setup);
        let zero = DuhamelPath {
            times: free.times.clone(),
            states: vec![LowRank::zero(32); 6],
            rho: vec![vec![0.0; 32]; 6],
            truncation_mass: 0.0,
        };
        let out = duhamel_map(&setup, &zero).unwrap();
        for (a, b) in out.states.iter().zip(&free.states) {
            assert!((a.to_dense() - b.to_dense()).camax() < 1e-14);
        }
    }

    #[test]
    fn low_rank_round_trip() {
        let s = two_modes(vec![0.1, 0.05]);
        let lr = LowRank::from_state(&s);
        let back = lr.to_state(s.geometry(), 2.0, 1e-12).unwrap();
        assert_eq!(back.weights(), s.weights());
        let rho = lr.density(s.geometry().cell_volume());
        for (a, b) in rho.iter().zip(s.density()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_off_line_exponents() {
        assert!(XNorm::new(1, 2.0, 2.0, 0.1).is_err());
        assert!(XNorm::new(1, f64::INFINITY, 1.0, 0.1).is_err());
        assert!(XNorm::new(1, 4.0, 2.0, 0.1).is_ok());
    }
}
