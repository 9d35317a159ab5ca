//! Admissible exponent pairs and the derivative-loss exponents `σ` and
//! summability thresholds `α'` predicted by the known Strichartz estimates.
//!
//! Points are placed in `(1/q, 1/p)` coordinates. On the density line
//! `2/p + d/q = d` the distinguished points are `A = ((d-1)/(d+1), d/(d+1))`,
//! `B = (1, 0)`, `C = ((d-2)/d, 1)`, and for `d = 1` also `D = (1/3, 1/3)`.

use serde::{Deserialize, Serialize};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdmissibleKind {
    /// `2/p + d/q = d`.
    Density,
    /// `θ/p + d/q = d`.
    ThetaAdmissible,
    /// `2/p + d/q = d/2`.
    SharpSchrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairRegion {
    /// `1 <= q < (d+1)/(d-1)`, the half-open segment `(A, B]`.
    Subcritical,
    CriticalA,
    /// The open segment `(A, C)`.
    Supercritical,
    KeelTaoC,
    /// Not on the density line, or outside `[1, ∞]²`.
    OffLine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissiblePair {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    /// Every identity that holds; more than one entry marks an intersection.
    pub kinds: Vec<AdmissibleKind>,
    pub region: PairRegion,
}

impl AdmissiblePair {
    pub fn is(&self, kind: AdmissibleKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn multi_membership(&self) -> bool {
        self.kinds.len() > 1
    }
}

fn inv(x: f64) -> f64 {
    1.0 / x
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS
}

fn in_range(x: f64) -> bool {
    x >= 1.0 && !x.is_nan()
}

pub fn classify_pair(d: usize, p: f64, q: f64, theta: f64) -> AdmissiblePair {
    let df = d as f64;
    let (ip, iq) = (inv(p), inv(q));
    let mut kinds = Vec::new();
    let mut region = PairRegion::OffLine;
    if d >= 1 && in_range(p) && in_range(q) {
        if close(2.0 * ip + df * iq, df) {
            kinds.push(AdmissibleKind::Density);
        }
        if close(theta * ip + df * iq, df) {
            kinds.push(AdmissibleKind::ThetaAdmissible);
        }
        if close(2.0 * ip + df * iq, df / 2.0) {
            kinds.push(AdmissibleKind::SharpSchrodinger);
        }
        if kinds.contains(&AdmissibleKind::Density) {
            region = density_region(d, iq, ip);
        }
    }
    AdmissiblePair {
        d,
        p,
        q,
        theta,
        kinds,
        region,
    }
}

/// Region of a point already known to lie on the density line.
fn density_region(d: usize, iq: f64, ip: f64) -> PairRegion {
    let df = d as f64;
    let a = ((df - 1.0) / (df + 1.0), df / (df + 1.0));
    let c = ((df - 2.0) / df, 1.0);
    if close(iq, a.0) && close(ip, a.1) {
        PairRegion::CriticalA
    } else if close(iq, c.0) && close(ip, c.1) {
        PairRegion::KeelTaoC
    } else if iq > a.0 {
        PairRegion::Subcritical
    } else if iq > c.0 {
        PairRegion::Supercritical
    } else {
        PairRegion::OffLine
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Manifold {
    Euclidean { d: usize },
    Torus { d: usize },
    Waveguide { n: usize, m: usize },
}

impl Manifold {
    pub fn dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { d } | Manifold::Torus { d } => d,
            Manifold::Waveguide { n, m } => n + m,
        }
    }
}

/// Which estimate's case table to read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "estimate", deny_unknown_fields)]
pub enum Estimate {
    /// Single-function Schrödinger estimate (`θ = 2`) in `L^p_{t,x}` on the
    /// torus or waveguide, `p = q`.
    TorusClassical,
    /// Single-function fractional estimate on `T^d` or `R^d` below the sharp
    /// line: `σ = 1/p` for `θ > 1`, `(2-θ)/p` for `θ < 1`.
    FractionalSingle,
    /// Orthonormal estimate on `R^d`, `θ = 2`, no loss.
    EuclideanOns,
    /// Orthonormal estimate on `T^d`, `θ = 2`.
    TorusOnsClassical,
    /// The small-loss branch of the classical torus estimate, whose printed
    /// exponent `p_* = (d+2)/d = p = q` is inconsistent. Always not applicable.
    TorusOnsClassicalSmallLoss,
    /// Orthonormal estimate on `T^d` for `θ ≠ 1` on the density line.
    TorusOnsFractional,
    /// Small-loss branch on `T^d`: `θ > 1`, `σ ∈ (0, d]`, `q <= (d+2)/d`,
    /// `α' < d/(d-σ)`.
    TorusOnsFractionalSmallLoss { sigma: f64 },
    /// Orthonormal estimate on `T¹` along the θ-admissible line, `θ > 2`:
    /// `σ = (θ-1)/p`, `α' <= 2q/(q+1)`.
    ThetaAdmissibleOns,
    /// Interpolation between `(1/q0, 1/p0) ∈ (A, B]` on the density line and
    /// `(1/q1, 1/p1) ∈ [C, B]` on the θ-admissible line, `d = 1`, `θ > 2`.
    InterpolatedRegion { q0: f64, q1: f64, tau: f64 },
    /// Interpolation with `(1/q0, 1/p0) ∈ [D, B]` and a chosen loss
    /// `σ ∈ (τ(θ-1)/p1, (θ-1)/p1]`: `α' < 2(θ-1)/(2(θ-1) - σθ)`.
    ArbitraryLossRegion { q0: f64, q1: f64, tau: f64, sigma: f64 },
    /// Single-function estimate on `R^n × T^m`, `θ > 1`.
    WaveguideSingle,
    /// Orthonormal estimate on `R^n × T^m` on `(A, B]`.
    WaveguideOns,
    /// Orthonormal estimate on `R^n × T^m`, `q <= (d+2)/d`, with a chosen
    /// loss `σ ∈ (0, σ₁]`: `α' < d/(d - σ/κ)`.
    WaveguideArbitraryLoss { sigma: f64 },
}

impl Estimate {
    pub fn tag(&self) -> &'static str {
        match self {
            Estimate::TorusClassical => "torus-classical",
            Estimate::FractionalSingle => "fractional-single",
            Estimate::EuclideanOns => "euclidean-ons",
            Estimate::TorusOnsClassical => "torus-ons-classical",
            Estimate::TorusOnsClassicalSmallLoss => "torus-ons-classical-small-loss",
            Estimate::TorusOnsFractional => "torus-ons-fractional",
            Estimate::TorusOnsFractionalSmallLoss { .. } => "torus-ons-fractional-small-loss",
            Estimate::ThetaAdmissibleOns => "theta-admissible-ons",
            Estimate::InterpolatedRegion { .. } => "interpolated-region",
            Estimate::ArbitraryLossRegion { .. } => "arbitrary-loss-region",
            Estimate::WaveguideSingle => "waveguide-single",
            Estimate::WaveguideOns => "waveguide-ons",
            Estimate::WaveguideArbitraryLoss { .. } => "waveguide-arbitrary-loss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSetting {
    pub manifold: Manifold,
    pub theta: f64,
    pub p: f64,
    pub q: f64,
    pub estimate: Estimate,
}

/// Upper bound on `α'`; `inclusive` distinguishes `<=` from `<`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBound {
    pub value: f64,
    pub inclusive: bool,
}

impl AlphaBound {
    pub fn closed(value: f64) -> Self {
        AlphaBound { value, inclusive: true }
    }

    pub fn open(value: f64) -> Self {
        AlphaBound { value, inclusive: false }
    }

    pub fn admits(&self, alpha: f64) -> bool {
        if self.inclusive {
            alpha <= self.value + EPS
        } else {
            alpha < self.value
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaPrediction {
    pub sigma: f64,
    pub estimate: &'static str,
    /// `None` for single-function estimates, which carry no `α'`.
    pub alpha_max: Option<AlphaBound>,
    /// Human-readable description of the case that applied.
    pub validity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum SigmaOutcome {
    Predicted(SigmaPrediction),
    NotApplicable { reason: String },
}

impl SigmaOutcome {
    pub fn prediction(&self) -> Option<&SigmaPrediction> {
        match self {
            SigmaOutcome::Predicted(p) => Some(p),
            SigmaOutcome::NotApplicable { .. } => None,
        }
    }
}

fn na(reason: impl Into<String>) -> SigmaOutcome {
    SigmaOutcome::NotApplicable {
        reason: reason.into(),
    }
}

fn predicted(
    estimate: &Estimate,
    sigma: f64,
    alpha: Option<AlphaBound>,
    validity: impl Into<String>,
) -> SigmaOutcome {
    SigmaOutcome::Predicted(SigmaPrediction {
        sigma,
        estimate: estimate.tag(),
        alpha_max: alpha,
        validity: validity.into(),
    })
}

fn dual_alpha(q: f64) -> f64 {
    if q.is_infinite() {
        2.0
    } else {
        2.0 * q / (q + 1.0)
    }
}

/// Classical single-function loss: 0 up to the Stein–Tomas exponent
/// `2(d+2)/d`, then `d/2 - (d+2)/r`.
fn classical_loss(d: f64, r: f64) -> f64 {
    if r <= 2.0 * (d + 2.0) / d {
        0.0
    } else {
        d / 2.0 - (d + 2.0) * inv(r)
    }
}

/// Waveguide orthonormal loss factor `κ` (so that `σ₁ = κ/p` for `θ > 1`).
fn waveguide_kappa(n: f64, m: f64, theta: f64) -> f64 {
    if theta > 3.0 + m / n {
        1.0 + n * (theta - 2.0) / (m + n)
    } else {
        2.0
    }
}

pub fn predict_sigma(s: &SigmaSetting) -> SigmaOutcome {
    let SigmaSetting {
        manifold,
        theta,
        p,
        q,
        ref estimate,
    } = *s;
    if !(theta > 0.0) || !in_range(p) || !in_range(q) {
        return na("θ must be positive and p, q must lie in [1, ∞]");
    }
    let d = manifold.dim();
    let df = d as f64;
    let pair = classify_pair(d, p, q, theta);
    let on_density = pair.is(AdmissibleKind::Density);
    match *estimate {
        Estimate::TorusClassical => {
            if !close(theta, 2.0) {
                return na("requires θ = 2");
            }
            if !(p == q || close(inv(p), inv(q))) || p < 2.0 {
                return na("requires p = q >= 2 (an L^p_{t,x} estimate)");
            }
            match manifold {
                Manifold::Torus { .. } | Manifold::Waveguide { .. } => predicted(
                    estimate,
                    classical_loss(df, p),
                    None,
                    format!("loss 0 up to p = {}, then d/2 - (d+2)/p", 2.0 * (df + 2.0) / df),
                ),
                Manifold::Euclidean { .. } => na("requires a torus or waveguide"),
            }
        }
        Estimate::FractionalSingle => {
            if !matches!(manifold, Manifold::Torus { .. } | Manifold::Euclidean { .. }) {
                return na("requires T^d or R^d");
            }
            if p < 2.0 || q < 2.0 || q.is_infinite() {
                return na("requires 2 <= p <= ∞ and 2 <= q < ∞");
            }
            if 2.0 * inv(p) + df * inv(q) > df / 2.0 + EPS {
                return na("requires 2/p + d/q <= d/2");
            }
            if close(theta, 1.0) {
                return na("θ = 1 is excluded");
            }
            if theta > 1.0 {
                predicted(estimate, inv(p), None, "θ > 1: σ₁ = 1/p")
            } else {
                predicted(estimate, (2.0 - theta) * inv(p), None, "θ < 1: σ₁ = (2-θ)/p")
            }
        }
        Estimate::EuclideanOns => {
            if !matches!(manifold, Manifold::Euclidean { .. }) || !close(theta, 2.0) {
                return na("requires R^d and θ = 2");
            }
            if !on_density {
                return na("requires 2/p + d/q = d");
            }
            match pair.region {
                PairRegion::Subcritical => predicted(
                    estimate,
                    0.0,
                    Some(AlphaBound::closed(dual_alpha(q))),
                    "subcritical: α' <= 2q/(q+1)",
                ),
                PairRegion::CriticalA => na("the estimate fails at the critical point A"),
                PairRegion::Supercritical => predicted(
                    estimate,
                    0.0,
                    Some(AlphaBound::open(p)),
                    "supercritical: α' < p",
                ),
                PairRegion::KeelTaoC if d >= 3 => predicted(
                    estimate,
                    0.0,
                    Some(AlphaBound::closed(1.0)),
                    "endpoint C: α' = 1",
                ),
                _ => na("pair outside the known regions"),
            }
        }
        Estimate::TorusOnsClassical => {
            if !matches!(manifold, Manifold::Torus { .. }) || !close(theta, 2.0) {
                return na("requires T^d and θ = 2");
            }
            if !on_density {
                return na("requires 2/p + d/q = d");
            }
            if close(p, 1.0) && q.is_infinite() && d == 2 {
                return na("(p, q, d) = (1, ∞, 2) is excluded");
            }
            match pair.region {
                PairRegion::Subcritical => predicted(
                    estimate,
                    inv(p),
                    Some(AlphaBound::closed(dual_alpha(q))),
                    "(A, B]: σ = 1/p, α' <= 2q/(q+1)",
                ),
                PairRegion::CriticalA if d == 1 => predicted(
                    estimate,
                    0.5,
                    Some(AlphaBound::closed(2.0)),
                    "d = 1 at A = (0, 1/2): σ = 1/2, α' <= 2",
                ),
                _ => na("pair outside (A, B] (and not A in one dimension)"),
            }
        }
        Estimate::TorusOnsClassicalSmallLoss => {
            na("unresolved: the printed exponent p_* = (d+2)/d = p = q is dimensionally inconsistent")
        }
        Estimate::TorusOnsFractional => {
            if !matches!(manifold, Manifold::Torus { .. }) {
                return na("requires T^d");
            }
            if close(theta, 1.0) {
                return na("θ = 1 is excluded");
            }
            if !on_density {
                return na("requires 2/p + d/q = d");
            }
            let sigma = if theta > 1.0 {
                inv(p)
            } else {
                (2.0 - theta) * inv(p)
            };
            match pair.region {
                PairRegion::Subcritical => predicted(
                    estimate,
                    sigma,
                    Some(AlphaBound::closed(dual_alpha(q))),
                    "(A, B]: α' <= 2q/(q+1)",
                ),
                PairRegion::CriticalA if d >= 2 => predicted(
                    estimate,
                    sigma,
                    Some(AlphaBound::open(p / 2.0)),
                    "critical point A: α' < p/2",
                ),
                PairRegion::Supercritical => predicted(
                    estimate,
                    sigma,
                    Some(AlphaBound::closed(p / 2.0)),
                    "(A, C): α' <= p/2",
                ),
                PairRegion::KeelTaoC if d >= 3 => predicted(
                    estimate,
                    sigma,
                    Some(AlphaBound::closed(1.0)),
                    "endpoint C: α' = 1",
                ),
                _ => na("pair outside the known regions"),
            }
        }
        Estimate::TorusOnsFractionalSmallLoss { sigma } => {
            if !matches!(manifold, Manifold::Torus { .. }) || !(theta > 1.0) {
                return na("requires T^d and θ > 1");
            }
            if !on_density || q > (df + 2.0) / df + EPS {
                return na("requires 2/p + d/q = d and q <= (d+2)/d");
            }
            if !(sigma > 0.0 && sigma <= df) {
                return na("requires σ ∈ (0, d]");
            }
            let bound = if close(sigma, df) {
                f64::INFINITY
            } else {
                df / (df - sigma)
            };
            predicted(
                estimate,
                sigma,
                Some(AlphaBound::open(bound)),
                "α' < d/(d-σ)",
            )
        }
        Estimate::ThetaAdmissibleOns => {
            if manifold != (Manifold::Torus { d: 1 }) || !(theta > 2.0) {
                return na("requires T¹ and θ > 2");
            }
            if !pair.is(AdmissibleKind::ThetaAdmissible) {
                return na("requires θ/p + 1/q = 1");
            }
            predicted(
                estimate,
                (theta - 1.0) * inv(p),
                Some(AlphaBound::closed(dual_alpha(q))),
                "σ = (θ-1)/p, α' <= 2q/(q+1)",
            )
        }
        Estimate::InterpolatedRegion { q0, q1, tau } => {
            match interpolation_endpoints(manifold, theta, p, q, q0, q1, tau, 0.0) {
                Err(reason) => na(reason),
                Ok((p0, p1)) => predicted(
                    estimate,
                    (1.0 - tau) * inv(p0) + tau * (theta - 1.0) * inv(p1),
                    Some(AlphaBound::closed(
                        (1.0 - tau) * dual_alpha(q0) + tau * dual_alpha(q1),
                    )),
                    "σ = (1-τ)/p0 + τ(θ-1)/p1",
                ),
            }
        }
        Estimate::ArbitraryLossRegion {
            q0,
            q1,
            tau,
            sigma,
        } => match interpolation_endpoints(manifold, theta, p, q, q0, q1, tau, 1.0 / 3.0) {
            Err(reason) => na(reason),
            Ok((_, p1)) => {
                let lo = tau * (theta - 1.0) * inv(p1);
                let hi = (theta - 1.0) * inv(p1);
                if !(sigma > lo && sigma <= hi + EPS) {
                    return na(format!("requires σ ∈ ({lo}, {hi}]"));
                }
                let den = 2.0 * (theta - 1.0) - sigma * theta;
                let bound = if den <= 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * (theta - 1.0) / den
                };
                predicted(
                    estimate,
                    sigma,
                    Some(AlphaBound::open(bound)),
                    "α' < 2(θ-1)/(2(θ-1) - σθ)",
                )
            }
        },
        Estimate::WaveguideSingle => {
            if !matches!(manifold, Manifold::Waveguide { .. }) || !(theta > 1.0) {
                return na("requires R^n × T^m and θ > 1");
            }
            if q < 2.0 {
                return na("requires q >= 2");
            }
            let diagonal = close(inv(p), inv(q));
            let scaling = p >= 2.0 && close(inv(p), df / 2.0 * (0.5 - inv(q)));
            if !(diagonal || scaling) {
                return na("requires p = q or 1/p = (d/2)(1/2 - 1/q) with p >= 2");
            }
            predicted(
                estimate,
                classical_loss(df, q),
                None,
                format!("loss 0 up to q = {}, then d/2 - (d+2)/q", 2.0 * (df + 2.0) / df),
            )
        }
        Estimate::WaveguideOns => {
            let Manifold::Waveguide { n, m } = manifold else {
                return na("requires R^n × T^m");
            };
            if close(theta, 1.0) {
                return na("θ = 1 is excluded");
            }
            if !on_density || pair.region != PairRegion::Subcritical {
                return na("requires (1/q, 1/p) ∈ (A, B] on 2/p + d/q = d");
            }
            if !(p > (df + 1.0) / df) {
                return na("requires p > (d+1)/d");
            }
            let (nf, mf) = (n as f64, m as f64);
            let (sigma, case) = if theta < 1.0 {
                (2.0 * (2.0 - theta) * inv(p), "θ < 1: σ₁ = 2(2-θ)/p")
            } else if theta > 3.0 + mf / nf {
                (
                    waveguide_kappa(nf, mf, theta) * inv(p),
                    "θ > 3 + m/n: σ₁ = (1 + n(θ-2)/(m+n))/p",
                )
            } else {
                (2.0 * inv(p), "1 < θ <= 3 + m/n: σ₁ = 2/p")
            };
            predicted(
                estimate,
                sigma,
                Some(AlphaBound::closed(dual_alpha(q))),
                case,
            )
        }
        Estimate::WaveguideArbitraryLoss { sigma } => {
            let Manifold::Waveguide { n, m } = manifold else {
                return na("requires R^n × T^m");
            };
            if !(theta > 1.0) {
                return na("requires θ > 1");
            }
            if !on_density || q > (df + 2.0) / df + EPS {
                return na("requires 2/p + d/q = d and q <= (d+2)/d");
            }
            let kappa = waveguide_kappa(n as f64, m as f64, theta);
            let sigma1 = kappa * inv(p);
            if !(sigma > 0.0 && sigma <= sigma1 + EPS) {
                return na(format!("requires σ ∈ (0, {sigma1}]"));
            }
            predicted(
                estimate,
                sigma,
                Some(AlphaBound::open(df / (df - sigma / kappa))),
                "α' < d/(d - σ/κ)",
            )
        }
    }
}

/// Validates an interpolation between a density-line point with
/// `1/q0 ∈ (lo, 1]` (`lo = 0` excludes only A) and a θ-admissible point,
/// returning `(p0, p1)`.
#[allow(clippy::too_many_arguments)]
fn interpolation_endpoints(
    manifold: Manifold,
    theta: f64,
    p: f64,
    q: f64,
    q0: f64,
    q1: f64,
    tau: f64,
    lo: f64,
) -> Result<(f64, f64), String> {
    if manifold != (Manifold::Torus { d: 1 }) || !(theta > 2.0) {
        return Err("requires T¹ and θ > 2".into());
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err("requires τ ∈ [0, 1]".into());
    }
    if !in_range(q0) || !in_range(q1) {
        return Err("endpoint exponents must lie in [1, ∞]".into());
    }
    let iq0 = inv(q0);
    let in_segment = if lo == 0.0 { iq0 > EPS } else { iq0 >= lo - EPS };
    if !in_segment {
        return Err("first endpoint outside its segment of 2/p + 1/q = 1".into());
    }
    // 2/p0 + 1/q0 = 1 and θ/p1 + 1/q1 = 1
    let ip0 = (1.0 - iq0) / 2.0;
    let ip1 = (1.0 - inv(q1)) / theta;
    if !close(inv(q), (1.0 - tau) * iq0 + tau * inv(q1))
        || !close(inv(p), (1.0 - tau) * ip0 + tau * ip1)
    {
        return Err("(p, q) is not the stated interpolation of the endpoints".into());
    }
    Ok((inv(ip0), inv(ip1)))
}
