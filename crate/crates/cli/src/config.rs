//! Experiment configuration: JSON, unknown keys rejected, every default
//! written back out in the echoed config.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use strichartz_core::admissibility::Estimate;
use strichartz_core::ons::{GridChoice, IntervalChoice, SweepAxis};
use strichartz_core::{GeometryKind, LambdaKind, OnsKind, PotentialKind};

/// Exponents in `[1, ∞]`; `"inf"` in JSON stands for `∞`.
pub mod exponent {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct ExpVisitor;

    impl<'de> Visitor<'de> for ExpVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExpVisitor)
    }

    pub mod list {
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrap(#[serde(with = "super")] f64);

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|&x| Wrap(x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Written to the `experiment_id` column; defaults to the kind name.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }

    /// Fills in every optional value so the echo is complete.
    pub fn materialize(&mut self) {
        if self.id.is_none() {
            self.id = Some(self.kind().to_string());
        }
        if self.output.dir.is_none() {
            self.output.dir = Some(PathBuf::from("results"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_results")]
    pub results: String,
    #[serde(default = "default_summary")]
    pub summary: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

fn default_results() -> String {
    "results.csv".into()
}

fn default_summary() -> String {
    "summary.json".into()
}

fn default_manifest() -> String {
    "manifest.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            results: default_results(),
            summary: default_summary(),
            manifest: default_manifest(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KernelSweep,
    VdcOracle,
    StrichartzFit,
    OnsSweep,
    DualityCheck,
    HartreeRun,
    FixedPoint,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::KernelSweep => "kernel-sweep",
            ExperimentKind::VdcOracle => "vdc-oracle",
            ExperimentKind::StrichartzFit => "strichartz-fit",
            ExperimentKind::OnsSweep => "ons-sweep",
            ExperimentKind::DualityCheck => "duality-check",
            ExperimentKind::HartreeRun => "hartree-run",
            ExperimentKind::FixedPoint => "fixed-point",
        })
    }
}

/// One key naming the kind, holding that kind's parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    KernelSweep(KernelSweep),
    VdcOracle(VdcOracle),
    StrichartzFit(StrichartzFit),
    OnsSweep(OnsSweep),
    DualityCheck(DualityCheck),
    HartreeRun(HartreeRun),
    FixedPoint(FixedPoint),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::KernelSweep(_) => ExperimentKind::KernelSweep,
            Experiment::VdcOracle(_) => ExperimentKind::VdcOracle,
            Experiment::StrichartzFit(_) => ExperimentKind::StrichartzFit,
            Experiment::OnsSweep(_) => ExperimentKind::OnsSweep,
            Experiment::DualityCheck(_) => ExperimentKind::DualityCheck,
            Experiment::HartreeRun(_) => ExperimentKind::HartreeRun,
            Experiment::FixedPoint(_) => ExperimentKind::FixedPoint,
        }
    }
}

/// Sup of `|t|^{1/θ}|K_N|` over the window, one cell per `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSweep {
    pub theta: f64,
    pub n: Vec<usize>,
    #[serde(default = "d512")]
    pub time_points: usize,
    #[serde(default = "d512")]
    pub space_points: usize,
    #[serde(default = "d_t_min")]
    pub t_min: f64,
    /// Also evaluate on the doubled grid and report the relative change.
    #[serde(default)]
    pub refine: bool,
    /// Bound on `max_N S(N) / min_N S(N)`.
    #[serde(default = "d2")]
    pub max_spread: f64,
}

/// Adaptive quadrature of `∫₀^b e^{2πi(s(x-p) + t s^θ)} ds`, one cell per `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdcOracle {
    pub theta: f64,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub p: i64,
    pub b: f64,
    pub t: Vec<f64>,
    #[serde(default = "d_quad_tol")]
    pub tolerance: f64,
    /// Bound on the max/min spread of `|∫|·|t|^{1/θ}` across `t`.
    #[serde(default = "d2")]
    pub max_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Space {
    #[serde(default = "d_geometry")]
    pub geometry: GeometryKind,
    /// Period used for the continuous axes.
    #[serde(default = "d1")]
    pub trunc_length: f64,
    #[serde(default = "d_grid")]
    pub grid: GridChoice,
}

impl Default for Space {
    fn default() -> Self {
        Space {
            geometry: d_geometry(),
            trunc_length: 1.0,
            grid: d_grid(),
        }
    }
}

/// Single-function ratios `‖U(t)P_{≤N}f‖_{L^p_t L^q_x} / ‖f‖₂` and their
/// log-log slope in `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzFit {
    #[serde(default)]
    pub space: Space,
    pub theta: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub n: Vec<usize>,
    /// Selects the case table that supplies the predicted loss `σ`.
    pub prediction: Estimate,
    #[serde(default = "d_unit")]
    pub interval: IntervalChoice,
    /// Fixed number of time samples; otherwise `ceil(time_factor·N^θ) + 1`.
    #[serde(default)]
    pub time_points: Option<usize>,
    #[serde(default = "d4")]
    pub time_factor: f64,
    /// Include the `f̂ ≡ 1` family.
    #[serde(default = "dtrue")]
    pub flat: bool,
    /// Number of random band-limited functions per `N`.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "d_slope_tol")]
    pub slope_tolerance: f64,
    /// `ε` in the normalization `N^{σ+ε}` of the random maxima.
    #[serde(default = "d_eps")]
    pub epsilon: f64,
    #[serde(default = "d3")]
    pub max_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeExpectation {
    /// Slope at most `σ + tolerance`.
    Bounded,
    /// Slope above `σ + tolerance`: growth beyond the predicted loss.
    Exceeds,
}

/// Orthonormal-system density ratios over one swept axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnsSweep {
    #[serde(default)]
    pub space: Space,
    pub theta: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub n: usize,
    /// Family size; the whole band when absent.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(with = "exponent")]
    pub alpha_dual: f64,
    #[serde(default = "d_family")]
    pub family: OnsKind,
    #[serde(default = "d_lambda")]
    pub lambda: LambdaKind,
    #[serde(default)]
    pub extra_random: usize,
    #[serde(default = "d_unit")]
    pub interval: IntervalChoice,
    #[serde(default = "d_ons_time")]
    pub time_points: usize,
    pub prediction: Estimate,
    pub sweep: SweepAxis,
    /// Tie `p` to `θ` along `θ/p + d/q = d` in a `θ` sweep.
    #[serde(default)]
    pub on_theta_line: bool,
    #[serde(default = "d_ons_tol")]
    pub slope_tolerance: f64,
    #[serde(default = "d_bounded")]
    pub expect: SlopeExpectation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// `W₁ = W₂ ≡ 1`.
    Constant,
    /// Uniform random complex `W₁`, `W₂ = conj(W₁)`.
    Random,
}

/// Schatten bound of `W₁𝓔_N𝓔_N*W₂` against sampled orthonormal densities,
/// one cell per `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityCheck {
    #[serde(default = "d_torus_sizes")]
    pub grid: Vec<usize>,
    #[serde(default = "d_duality_time")]
    pub time_points: usize,
    #[serde(default = "d_unit")]
    pub interval: IntervalChoice,
    pub n: usize,
    pub theta: f64,
    #[serde(with = "exponent::list")]
    pub alpha: Vec<f64>,
    #[serde(default = "d_samples")]
    pub samples: usize,
    #[serde(default = "d_weight")]
    pub weight: WeightKind,
    #[serde(default = "d_capacity")]
    pub capacity: usize,
}

/// Finite-rank initial data on a one-dimensional torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default = "d64")]
    pub grid_points: usize,
    /// Band of the orthonormal members.
    #[serde(default = "d4u")]
    pub band: usize,
    #[serde(default = "d_family_random")]
    pub family: OnsKind,
    /// Nonincreasing weights; their count is the number of members.
    pub weights: Vec<f64>,
}

/// Split-step evolution with conservation diagnostics, optionally repeated
/// at halved steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HartreeRun {
    pub initial: InitialData,
    pub theta: f64,
    #[serde(default = "d_yukawa")]
    pub potential: PotentialKind,
    pub t_final: f64,
    pub dt: f64,
    /// Extra runs at `dt/2, dt/4, …`.
    #[serde(default)]
    pub halvings: usize,
    #[serde(default = "d1u")]
    pub diagnostics_every: usize,
    #[serde(default = "d_mass_tol")]
    pub mass_tolerance: f64,
    #[serde(default = "d_gram_tol")]
    pub gram_tolerance: f64,
    /// Bound on `max_t |E(t) - E(0)| / |E(0)|`.
    #[serde(default = "d_energy_tol")]
    pub energy_tolerance: f64,
    /// Minimum drift reduction per halving.
    #[serde(default = "d_halving")]
    pub min_halving_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck {
    pub dt: f64,
    #[serde(default = "d_cross_tol")]
    pub tolerance: f64,
}

/// Picard iteration of the Duhamel map from the free solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPoint {
    pub initial: InitialData,
    pub theta: f64,
    #[serde(default = "d_yukawa")]
    pub potential: PotentialKind,
    pub t_final: f64,
    pub time_points: usize,
    /// Rescales the weights so the initial Sobolev–Schatten norm equals this.
    #[serde(default)]
    pub data_norm: Option<f64>,
    #[serde(default = "d_iterations")]
    pub iterations: usize,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    /// Sobolev index of the residual norm; `σ/2 + 0.05` with `σ = 1/p` when absent.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub rank_cap: Option<usize>,
    #[serde(default = "d_ratio_bound")]
    pub ratio_bound: f64,
    /// Compare the final density with a split-step run.
    #[serde(default)]
    pub cross_check: Option<CrossCheck>,
}

fn d1() -> f64 {
    1.0
}
fn d1u() -> usize {
    1
}
fn d2() -> f64 {
    2.0
}
fn d3() -> f64 {
    3.0
}
fn d4() -> f64 {
    4.0
}
fn d4u() -> usize {
    4
}
fn d64() -> usize {
    64
}
fn d512() -> usize {
    512
}
fn dtrue() -> bool {
    true
}
fn d_t_min() -> f64 {
    1e-6
}
fn d_quad_tol() -> f64 {
    1e-8
}
fn d_geometry() -> GeometryKind {
    GeometryKind::Torus { d: 1 }
}
fn d_grid() -> GridChoice {
    GridChoice::Auto { oversample: 4 }
}
fn d_unit() -> IntervalChoice {
    IntervalChoice::Unit
}
fn d_slope_tol() -> f64 {
    0.12
}
fn d_ons_tol() -> f64 {
    0.1
}
fn d_eps() -> f64 {
    0.05
}
fn d_family() -> OnsKind {
    OnsKind::FourierModes
}
fn d_family_random() -> OnsKind {
    OnsKind::RandomBand
}
fn d_lambda() -> LambdaKind {
    LambdaKind::Flat
}
fn d_ons_time() -> usize {
    33
}
fn d_bounded() -> SlopeExpectation {
    SlopeExpectation::Bounded
}
fn d_torus_sizes() -> Vec<usize> {
    vec![16]
}
fn d_duality_time() -> usize {
    9
}
fn d_samples() -> usize {
    200
}
fn d_weight() -> WeightKind {
    WeightKind::Constant
}
fn d_capacity() -> usize {
    strichartz_core::schatten::DEFAULT_CAPACITY
}
fn d_yukawa() -> PotentialKind {
    PotentialKind::Yukawa { a: 1.0 }
}
fn d_mass_tol() -> f64 {
    1e-10
}
fn d_gram_tol() -> f64 {
    1e-9
}
fn d_energy_tol() -> f64 {
    1e-6
}
fn d_halving() -> f64 {
    3.5
}
fn d_cross_tol() -> f64 {
    1e-4
}
fn d_iterations() -> usize {
    6
}
fn d_ratio_bound() -> f64 {
    0.5
}

/// A config that failed to parse or validate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if !self.path.is_empty() && self.path != "." {
            write!(f, " in `{}`", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        line: None,
        column: None,
        message: message.into(),
    }
}

/// Parses and validates; the result has its defaults materialized.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        ConfigError {
            path: e.path().to_string(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    })?;
    validate(&cfg)?;
    cfg.materialize();
    Ok(cfg)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn exponent_ok(path: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("exponent must lie in [1, inf], got {v}")))
    }
}

fn initial_ok(path: &str, init: &InitialData) -> Result<(), ConfigError> {
    if init.weights.is_empty() {
        return Err(invalid(&format!("{path}.weights"), "need at least one weight"));
    }
    if init.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || init.weights.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid(&format!("{path}.weights"), "weights must be finite, nonnegative and nonincreasing"));
    }
    if init.band == 0 || 2 * init.band + 1 >= init.grid_points {
        return Err(invalid(&format!("{path}.band"), "band must satisfy 1 <= 2·band + 1 < grid_points"));
    }
    if init.weights.len() > 2 * init.band + 1 {
        return Err(invalid(&format!("{path}.weights"), "more members than band modes"));
    }
    Ok(())
}

/// Checks the constraints JSON types alone cannot express.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    match &cfg.experiment {
        Experiment::KernelSweep(k) => {
            if !(k.theta >= 2.0 && k.theta.is_finite()) {
                return Err(invalid("experiment.kernel-sweep.theta", "θ must be >= 2"));
            }
            if k.time_points < 64 || k.space_points < 64 {
                return Err(invalid("experiment.kernel-sweep", "time_points and space_points must be >= 64"));
            }
            positive("experiment.kernel-sweep.t_min", k.t_min)?;
            positive("experiment.kernel-sweep.max_spread", k.max_spread)?;
        }
        Experiment::VdcOracle(v) => {
            if !(v.theta > 1.0 && v.theta.is_finite()) {
                return Err(invalid("experiment.vdc-oracle.theta", "θ must exceed 1"));
            }
            if !(v.b > 1.0 && v.b.is_finite()) {
                return Err(invalid("experiment.vdc-oracle.b", "b must exceed 1"));
            }
            if v.t.iter().any(|t| !t.is_finite() || t.abs() < 1e-12) {
                return Err(invalid("experiment.vdc-oracle.t", "t values must be finite and nonzero"));
            }
            positive("experiment.vdc-oracle.tolerance", v.tolerance)?;
        }
        Experiment::StrichartzFit(s) => {
            let base = "experiment.strichartz-fit";
            positive(&format!("{base}.theta"), s.theta)?;
            exponent_ok(&format!("{base}.p"), s.p)?;
            exponent_ok(&format!("{base}.q"), s.q)?;
            positive(&format!("{base}.space.trunc_length"), s.space.trunc_length)?;
            if s.n.contains(&0) {
                return Err(invalid(&format!("{base}.n"), "band N must be >= 1"));
            }
            if s.time_points.is_some_and(|t| t < 2) {
                return Err(invalid(&format!("{base}.time_points"), "need at least 2 time points"));
            }
            positive(&format!("{base}.time_factor"), s.time_factor)?;
            if !s.flat && s.random == 0 {
                return Err(invalid(base, "enable the flat family or set random > 0"));
            }
        }
        Experiment::OnsSweep(o) => {
            let base = "experiment.ons-sweep";
            positive(&format!("{base}.theta"), o.theta)?;
            exponent_ok(&format!("{base}.p"), o.p)?;
            exponent_ok(&format!("{base}.q"), o.q)?;
            exponent_ok(&format!("{base}.alpha_dual"), o.alpha_dual)?;
            positive(&format!("{base}.space.trunc_length"), o.space.trunc_length)?;
            if o.time_points < 2 {
                return Err(invalid(&format!("{base}.time_points"), "need at least 2 time points"));
            }
        }
        Experiment::DualityCheck(d) => {
            let base = "experiment.duality-check";
            if d.grid.is_empty() || d.grid.len() > 3 {
                return Err(invalid(&format!("{base}.grid"), "need 1 to 3 axis sizes"));
            }
            if d.n == 0 || d.grid.iter().any(|&g| g <= 2 * d.n + 1) {
                return Err(invalid(&format!("{base}.n"), "band must satisfy 1 <= 2N + 1 < grid size"));
            }
            if d.time_points < 2 {
                return Err(invalid(&format!("{base}.time_points"), "need at least 2 time points"));
            }
            positive(&format!("{base}.theta"), d.theta)?;
            for a in &d.alpha {
                exponent_ok(&format!("{base}.alpha"), *a)?;
            }
        }
        Experiment::HartreeRun(h) => {
            let base = "experiment.hartree-run";
            initial_ok(&format!("{base}.initial"), &h.initial)?;
            positive(&format!("{base}.theta"), h.theta)?;
            positive(&format!("{base}.t_final"), h.t_final)?;
            positive(&format!("{base}.dt"), h.dt)?;
            let steps = (h.t_final / h.dt).round();
            if steps < 1.0 || (steps * h.dt - h.t_final).abs() > 1e-9 * h.t_final {
                return Err(invalid(&format!("{base}.dt"), "dt must divide t_final"));
            }
        }
        Experiment::FixedPoint(f) => {
            let base = "experiment.fixed-point";
            initial_ok(&format!("{base}.initial"), &f.initial)?;
            positive(&format!("{base}.theta"), f.theta)?;
            positive(&format!("{base}.t_final"), f.t_final)?;
            if f.time_points < 2 {
                return Err(invalid(&format!("{base}.time_points"), "need at least 2 time points"));
            }
            if f.iterations < 2 {
                return Err(invalid(&format!("{base}.iterations"), "need at least 2 iterations"));
            }
            if let Some(n) = f.data_norm {
                positive(&format!("{base}.data_norm"), n)?;
            }
            if let Some(c) = &f.cross_check {
                positive(&format!("{base}.cross_check.dt"), c.dt)?;
                let steps = (f.t_final / c.dt).round();
                let per_node = steps / (f.time_points - 1) as f64;
                if (steps * c.dt - f.t_final).abs() > 1e-9 * f.t_final || per_node.fract() != 0.0 || per_node < 1.0 {
                    return Err(invalid(
                        &format!("{base}.cross_check.dt"),
                        "dt must divide the spacing of the time nodes",
                    ));
                }
            }
        }
    }
    Ok(())
}
