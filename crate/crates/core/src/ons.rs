//! Orthonormal systems, coefficient sequences, densities
//! `ρ(t) = Σ λ_j |U(t) P_{≤N} f_j|²`, and the experiments comparing
//! `‖ρ‖_{L^p_t L^q_x}` against `‖λ‖_{ℓ^{α'}}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::{predict_sigma, Estimate, Manifold, SigmaOutcome, SigmaSetting};
use crate::error::{Error, Result};
use crate::field::{Field, SpaceTimeField, SpectrumField, TimeGrid};
use crate::fit::{fit_scaling, ScalingFit};
use crate::geometry::{Geometry, GeometryKind, GeometrySpec};
use crate::norms::{spatial_norm, time_norm};
use crate::seed::derive_cell_seed;
use crate::spectral::{band_fits, cutoff_weights, forward_transform, inverse_transform, BandFlow};
use crate::util::{lp_norm, next_pow2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnsKind {
    FourierModes,
    RandomBand,
}

/// Orthonormal functions stored by their spectra.
#[derive(Debug, Clone)]
pub struct OrthonormalFamily {
    pub geometry: Arc<Geometry>,
    pub n: usize,
    pub kind: OnsKind,
    pub seed: Option<u64>,
    pub members: Vec<SpectrumField>,
}

impl OrthonormalFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn fields(&self) -> Vec<Field> {
        self.members.iter().map(inverse_transform).collect()
    }

    /// Operator-norm distance of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let fields = self.fields();
        gram_deviation(&fields)
    }
}

/// `‖G - I‖` in operator norm for the Gram matrix `G_{jk} = ⟨u_j, u_k⟩`.
pub fn gram_deviation(fields: &[Field]) -> f64 {
    let m = fields.len();
    let g = DMatrix::from_fn(m, m, |j, k| {
        let v = fields[j].inner(&fields[k]);
        if j == k {
            v - 1.0
        } else {
            v
        }
    });
    operator_norm(&g)
}

pub(crate) fn operator_norm(g: &DMatrix<Complex64>) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    g.clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .map(|s| s.singular_values.max())
        .unwrap_or(f64::NAN)
}

/// Spectrum slots of the box band `[-N, N]^d` (Nyquist excluded), ordered by
/// `|ξ|²` and then lexicographically.
pub fn band_slots(geom: &Geometry, n: usize) -> Vec<usize> {
    let d = geom.dim();
    let mut slots: Vec<usize> = (0..geom.len())
        .filter(|&k| {
            !geom.is_nyquist(k) && geom.frequency(k)[..d].iter().all(|x| x.abs() <= n as f64)
        })
        .collect();
    let key = |k: usize| {
        let xi = geom.frequency(k);
        let r2: f64 = xi[..d].iter().map(|x| x * x).sum();
        (r2, xi)
    };
    slots.sort_by(|&a, &b| {
        let (ra, xa) = key(a);
        let (rb, xb) = key(b);
        ra.total_cmp(&rb).then_with(|| {
            xa.iter()
                .zip(&xb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    slots
}

pub fn generate_ons(
    kind: OnsKind,
    m: usize,
    n: usize,
    geom: &Arc<Geometry>,
    seed: u64,
) -> Result<OrthonormalFamily> {
    if n == 0 {
        return Err(Error::invalid("band N must be >= 1"));
    }
    band_fits(geom, n)?;
    let slots = band_slots(geom, n);
    if m == 0 || m > slots.len() {
        return Err(Error::invalid(format!(
            "M = {m} outside 1..={} (band dimension)",
            slots.len()
        )));
    }
    let scale = 1.0 / geom.dual_cell_volume().sqrt();
    let members = match kind {
        OnsKind::FourierModes => slots[..m]
            .iter()
            .map(|&k| {
                let mut s = SpectrumField::zeros(geom.clone());
                s.coefficients_mut()[k] = Complex64::new(scale, 0.0);
                s
            })
            .collect(),
        OnsKind::RandomBand => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = DMatrix::from_fn(slots.len(), m, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let q = g.qr().q();
            (0..m)
                .map(|j| {
                    let mut s = SpectrumField::zeros(geom.clone());
                    for (i, &k) in slots.iter().enumerate() {
                        s.coefficients_mut()[k] = q[(i, j)] * scale;
                    }
                    s
                })
                .collect()
        }
    };
    Ok(OrthonormalFamily {
        geometry: geom.clone(),
        n,
        kind,
        seed: (kind == OnsKind::RandomBand).then_some(seed),
        members,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum LambdaKind {
    Flat,
    Power { beta: f64 },
    OneHot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSequence {
    pub values: Vec<f64>,
    pub alpha_dual: f64,
    /// `‖λ‖_{ℓ^{α'}}`.
    pub norm: f64,
}

impl LambdaSequence {
    pub fn new(values: Vec<f64>, alpha_dual: f64) -> Result<Self> {
        if !(alpha_dual >= 1.0) {
            return Err(Error::invalid(format!("α' = {alpha_dual} must be >= 1")));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("λ must be finite and nonnegative"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("λ must be nonincreasing"));
        }
        let norm = lp_norm(&values, alpha_dual);
        Ok(LambdaSequence {
            values,
            alpha_dual,
            norm,
        })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        LambdaSequence::new(self.values.iter().map(|v| v * c).collect(), self.alpha_dual)
    }
}

/// Unit-`ℓ^{α'}` coefficient families.
pub fn lambda_family(kind: LambdaKind, m: usize, alpha_dual: f64) -> Result<LambdaSequence> {
    if m == 0 {
        return Err(Error::invalid("λ needs at least one entry"));
    }
    let raw: Vec<f64> = match kind {
        LambdaKind::Flat => vec![1.0; m],
        LambdaKind::Power { beta } => (1..=m).map(|j| (j as f64).powf(-beta)).collect(),
        LambdaKind::OneHot => (0..m).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
    };
    if !(alpha_dual >= 1.0) {
        return Err(Error::invalid(format!("α' = {alpha_dual} must be >= 1")));
    }
    let values = match kind {
        LambdaKind::Flat if alpha_dual.is_finite() => vec![(m as f64).powf(-1.0 / alpha_dual); m],
        _ => {
            let norm = lp_norm(&raw, alpha_dual);
            raw.iter().map(|v| v / norm).collect()
        }
    };
    LambdaSequence::new(values, alpha_dual)
}

/// Evaluates `ρ(t)` frame by frame without keeping the whole space-time
/// field. Shared by [`density_field`] and the streaming norms.
struct DensityEvaluator {
    geometry: Arc<Geometry>,
    flows: Vec<(BandFlow, f64)>,
}

impl DensityEvaluator {
    fn new(fam: &OrthonormalFamily, lambda: &LambdaSequence, theta: f64, n: usize) -> Result<Self> {
        if lambda.values.len() != fam.len() {
            return Err(Error::invalid(format!(
                "{} coefficients for {} functions",
                lambda.values.len(),
                fam.len()
            )));
        }
        if n == 0 || !(theta > 0.0) {
            return Err(Error::invalid("need N >= 1 and θ > 0"));
        }
        let geom = fam.geometry.clone();
        let w = cutoff_weights(&geom, n as f64);
        let flows = fam
            .members
            .iter()
            .zip(&lambda.values)
            .filter(|(_, &l)| l != 0.0)
            .map(|(s, &l)| (BandFlow::new(s, &w, theta), l))
            .collect();
        Ok(DensityEvaluator { geometry: geom, flows })
    }

    fn frame(&self, t: f64, buf: &mut Vec<Complex64>) -> Vec<f64> {
        let mut rho = vec![0.0; self.geometry.len()];
        for (flow, l) in &self.flows {
            flow.frame_into(t, buf);
            for (r, v) in rho.iter_mut().zip(buf.iter()) {
                *r += l * v.norm_sqr();
            }
        }
        rho
    }
}

pub fn density_field(
    fam: &OrthonormalFamily,
    lambda: &LambdaSequence,
    theta: f64,
    n: usize,
    grid: TimeGrid,
) -> Result<SpaceTimeField> {
    let ev = DensityEvaluator::new(fam, lambda, theta, n)?;
    let frames = grid
        .times()
        .into_par_iter()
        .map_init(Vec::new, |buf, t| {
            let rho = ev.frame(t, buf);
            Field::from_parts(
                ev.geometry.clone(),
                rho.into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
            )
        })
        .collect();
    SpaceTimeField::new(grid, frames)
}

/// `‖ρ‖_{L^p_t L^q_x}` computed one frame at a time.
pub fn density_mixed_norm(
    fam: &OrthonormalFamily,
    lambda: &LambdaSequence,
    theta: f64,
    n: usize,
    grid: TimeGrid,
    p: f64,
    q: f64,
) -> Result<f64> {
    let ev = DensityEvaluator::new(fam, lambda, theta, n)?;
    let cell = ev.geometry.cell_volume();
    let spatial: Vec<f64> = grid
        .times()
        .into_par_iter()
        .map_init(Vec::new, |buf, t| spatial_norm(&ev.frame(t, buf), q, cell))
        .collect();
    Ok(time_norm(&grid, &spatial, p))
}

/// `‖U(t) P_{≤N} f‖_{L^p_t L^q_x} / ‖f‖_{L²}` computed one frame at a time.
pub fn strichartz_ratio(f: &Field, theta: f64, n: usize, grid: TimeGrid, p: f64, q: f64) -> Result<f64> {
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::invalid("f must be nonzero"));
    }
    let w = cutoff_weights(f.geometry(), n as f64);
    let flow = BandFlow::new(&forward_transform(f), &w, theta);
    let spatial: Vec<f64> = grid
        .times()
        .into_par_iter()
        .map_init(Vec::new, |buf, t| {
            flow.frame_into(t, buf);
            flow.frame_norm(buf, q)
        })
        .collect();
    Ok(time_norm(&grid, &spatial, p) / norm)
}

/// `f̂ = 1` on the box band `[-N, N]^d`.
pub fn flat_band_field(geom: &Arc<Geometry>, n: usize) -> Result<Field> {
    band_fits(geom, n)?;
    let mut s = SpectrumField::zeros(geom.clone());
    for k in band_slots(geom, n) {
        s.coefficients_mut()[k] = Complex64::new(1.0, 0.0);
    }
    Ok(inverse_transform(&s))
}

/// Independent complex Gaussian coefficients on the box band.
pub fn random_band_field(geom: &Arc<Geometry>, n: usize, seed: u64) -> Result<Field> {
    band_fits(geom, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SpectrumField::zeros(geom.clone());
    for k in band_slots(geom, n) {
        s.coefficients_mut()[k] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    Ok(inverse_transform(&s))
}

/// Time interval of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum IntervalChoice {
    /// `[0, 1]`.
    Unit,
    /// `I_N = [-N^{1-θ}/2, N^{1-θ}/2]`.
    Window,
    Custom { t0: f64, t1: f64 },
}

impl IntervalChoice {
    pub fn bounds(&self, n: usize, theta: f64) -> (f64, f64) {
        match *self {
            IntervalChoice::Unit => (0.0, 1.0),
            IntervalChoice::Window => {
                let h = 0.5 * (n as f64).powf(1.0 - theta);
                (-h, h)
            }
            IntervalChoice::Custom { t0, t1 } => (t0, t1),
        }
    }
}

/// Spatial grid: explicit sizes, or per-axis `next_pow2(oversample·(N+1)·L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum GridChoice {
    Fixed { sizes: Vec<usize> },
    Auto { oversample: usize },
}

pub fn geometry_for_band(
    kind: GeometryKind,
    trunc_length: f64,
    grid: &GridChoice,
    n: usize,
) -> Result<Arc<Geometry>> {
    let sizes = match grid {
        GridChoice::Fixed { sizes } => sizes.clone(),
        GridChoice::Auto { oversample } => (0..kind.dim())
            .map(|a| {
                let l = if a < kind.continuous_axes() { trunc_length } else { 1.0 };
                next_pow2(((*oversample).max(2) as f64 * (n as f64 + 1.0) * l).ceil() as usize).max(4)
            })
            .collect(),
    };
    GeometrySpec {
        kind,
        grid_sizes: sizes,
        trunc_length,
    }
    .build()
}

pub fn manifold_of(kind: GeometryKind) -> Manifold {
    match kind {
        GeometryKind::Torus { d } => Manifold::Torus { d },
        GeometryKind::Waveguide { n, m } => Manifold::Waveguide { n, m },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsConfig {
    pub geometry: GeometryKind,
    pub trunc_length: f64,
    pub grid: GridChoice,
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    /// `None` uses the full band.
    pub m: Option<usize>,
    pub alpha_dual: f64,
    pub family: OnsKind,
    pub lambda: LambdaKind,
    /// Additional random-band families; the record keeps the max ratio.
    pub extra_random: usize,
    pub interval: IntervalChoice,
    pub time_points: usize,
    pub estimate: Estimate,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnsRecord {
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub m: usize,
    pub alpha_dual: f64,
    pub family: OnsKind,
    pub lambda: LambdaKind,
    pub seed: u64,
    pub families: usize,
    /// `None` when the selected estimate does not apply.
    pub lhs_norm: Option<f64>,
    pub lambda_norm: f64,
    pub ratio: Option<f64>,
    pub predicted: SigmaOutcome,
}

pub fn ons_estimate_ratio(cfg: &OnsConfig) -> Result<OnsRecord> {
    let geom = geometry_for_band(cfg.geometry, cfg.trunc_length, &cfg.grid, cfg.n)?;
    let band = band_slots(&geom, cfg.n).len();
    let m = cfg.m.unwrap_or(band);
    let lambda = lambda_family(cfg.lambda, m, cfg.alpha_dual)?;
    let predicted = predict_sigma(&SigmaSetting {
        manifold: manifold_of(cfg.geometry),
        theta: cfg.theta,
        p: cfg.p,
        q: cfg.q,
        estimate: cfg.estimate,
    });
    let mut record = OnsRecord {
        theta: cfg.theta,
        p: cfg.p,
        q: cfg.q,
        n: cfg.n,
        m,
        alpha_dual: cfg.alpha_dual,
        family: cfg.family,
        lambda: cfg.lambda,
        seed: cfg.seed,
        families: 0,
        lhs_norm: None,
        lambda_norm: lambda.norm,
        ratio: None,
        predicted,
    };
    if record.predicted.prediction().is_none() {
        return Ok(record);
    }
    let (t0, t1) = cfg.interval.bounds(cfg.n, cfg.theta);
    let grid = TimeGrid::new(t0, t1, cfg.time_points)?;
    let mut families = vec![generate_ons(cfg.family, m, cfg.n, &geom, cfg.seed)?];
    for k in 0..cfg.extra_random {
        let seed = derive_cell_seed(cfg.seed, k as u64 + 1);
        families.push(generate_ons(OnsKind::RandomBand, m, cfg.n, &geom, seed)?);
    }
    let mut best = 0.0_f64;
    for fam in &families {
        let lhs = density_mixed_norm(fam, &lambda, cfg.theta, cfg.n, grid, cfg.p, cfg.q)?;
        best = best.max(lhs);
    }
    record.families = families.len();
    record.lhs_norm = Some(best);
    record.ratio = Some(best / lambda.norm);
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "axis", content = "values", deny_unknown_fields)]
pub enum SweepAxis {
    N(Vec<usize>),
    M(Vec<usize>),
    AlphaDual(Vec<f64>),
    /// When `on_theta_line` is set in [`sweep`], `p` follows `θ` along
    /// `θ/p + d/q = d` at fixed `q`.
    Theta(Vec<f64>),
    Pq(Vec<(f64, f64)>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::N(v) | SweepAxis::M(v) => v.len(),
            SweepAxis::AlphaDual(v) | SweepAxis::Theta(v) => v.len(),
            SweepAxis::Pq(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub records: Vec<OnsRecord>,
    /// Log-log fit of ratio against the swept axis (`N` or `M` only).
    pub fit: Option<ScalingFit>,
}

/// The cell configurations of a sweep, with per-cell seeds.
pub fn sweep_cells(
    base: &OnsConfig,
    axis: &SweepAxis,
    global_seed: u64,
    on_theta_line: bool,
) -> Vec<OnsConfig> {
    (0..axis.len())
        .map(|i| {
            let mut c = base.clone();
            c.seed = derive_cell_seed(global_seed, i as u64);
            match axis {
                SweepAxis::N(v) => c.n = v[i],
                SweepAxis::M(v) => c.m = Some(v[i]),
                SweepAxis::AlphaDual(v) => c.alpha_dual = v[i],
                SweepAxis::Theta(v) => {
                    c.theta = v[i];
                    if on_theta_line {
                        let d = c.geometry.dim() as f64;
                        c.p = c.theta / (d * (1.0 - 1.0 / c.q));
                    }
                }
                SweepAxis::Pq(v) => {
                    c.p = v[i].0;
                    c.q = v[i].1;
                }
            }
            c
        })
        .collect()
}

pub fn sweep(
    base: &OnsConfig,
    axis: &SweepAxis,
    global_seed: u64,
    on_theta_line: bool,
) -> Result<SweepOutcome> {
    let cells = sweep_cells(base, axis, global_seed, on_theta_line);
    let records = cells
        .par_iter()
        .map(ons_estimate_ratio)
        .collect::<Result<Vec<_>>>()?;
    let abscissa = |r: &OnsRecord| match axis {
        SweepAxis::N(_) => Some(r.n as f64),
        SweepAxis::M(_) => Some(r.m as f64),
        _ => None,
    };
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| Some((abscissa(r)?, r.ratio?)))
        .collect();
    let fit = if points.len() >= 3 {
        Some(fit_scaling(&points)?)
    } else {
        None
    };
    Ok(SweepOutcome { records, fit })
}
