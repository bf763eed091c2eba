//! JSON/CSV schemas for curves, weights, mechanisms, events, and reports,
//! plus conversions to and from the core types.
//!
//! Curve pieces tile the domain contiguously; adjacent pieces may disagree
//! at a shared endpoint, and that disagreement is exactly the curve's jump
//! there (curves are right-continuous).

use demex_core::approx::LowerBoundBranch;
use demex_core::engine::PoolEvent;
use demex_core::{Basis, DemandCurve, PriceDomain, SegmentKind, WeightFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DomainDto {
    pub pmin: f64,
    pub pmax: f64,
}

impl DomainDto {
    pub fn to_core(self) -> Result<PriceDomain, CliError> {
        PriceDomain::new(self.pmin, self.pmax).map_err(CliError::from_core)
    }

    pub fn from_core(domain: PriceDomain) -> Self {
        Self { pmin: domain.pmin(), pmax: domain.pmax() }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKindDto {
    Constant { c: f64 },
    InvSqrtAffine { a: f64, b: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PieceDto {
    pub from: f64,
    pub to: f64,
    #[serde(flatten)]
    pub kind: PieceKindDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveDto {
    pub domain: DomainDto,
    pub pieces: Vec<PieceDto>,
}

impl CurveDto {
    pub fn to_core(&self) -> Result<DemandCurve, CliError> {
        let domain = self.domain.to_core()?;
        if self.pieces.is_empty() {
            return Err(CliError::input("curve needs at least one piece"));
        }
        let mut breakpoints = Vec::with_capacity(self.pieces.len() + 1);
        let mut segments = Vec::with_capacity(self.pieces.len());
        breakpoints.push(self.pieces[0].from);
        for (i, piece) in self.pieces.iter().enumerate() {
            if i > 0 && piece.from != self.pieces[i - 1].to {
                return Err(CliError::input(format!(
                    "pieces must tile the domain contiguously (gap at {})",
                    piece.from
                )));
            }
            breakpoints.push(piece.to);
            segments.push(match piece.kind {
                PieceKindDto::Constant { c } => SegmentKind::Constant { c },
                PieceKindDto::InvSqrtAffine { a, b } => SegmentKind::InverseSqrtAffine { a, b },
            });
        }
        DemandCurve::new(domain, breakpoints, segments).map_err(CliError::from_core)
    }

    pub fn from_core(curve: &DemandCurve) -> Self {
        let pieces = curve
            .segments()
            .iter()
            .zip(curve.breakpoints().windows(2))
            .map(|(seg, pair)| PieceDto {
                from: pair[0],
                to: pair[1],
                kind: match *seg {
                    SegmentKind::Constant { c } => PieceKindDto::Constant { c },
                    SegmentKind::InverseSqrtAffine { a, b } => {
                        PieceKindDto::InvSqrtAffine { a, b }
                    }
                },
            })
            .collect();
        Self { domain: DomainDto::from_core(curve.domain()), pieces }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDto {
    Uniform { domain: DomainDto },
    LogUniform { domain: DomainDto },
    Piecewise { breakpoints: Vec<f64>, densities: Vec<f64> },
}

impl WeightDto {
    pub fn to_core(&self) -> Result<WeightFunction, CliError> {
        Ok(match self {
            WeightDto::Uniform { domain } => WeightFunction::uniform(domain.to_core()?),
            WeightDto::LogUniform { domain } => WeightFunction::log_uniform(domain.to_core()?),
            WeightDto::Piecewise { breakpoints, densities } => {
                WeightFunction::piecewise_constant(breakpoints.clone(), densities.clone())
                    .map_err(CliError::from_core)?
            }
        })
    }
}

fn default_include_ones() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKindDto {
    Cpmm,
    Lob,
    Univ3,
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MechanismDto {
    pub kind: MechanismKindDto,
    pub domain: DomainDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ticks: Option<Vec<f64>>,
    /// For `lob`: appends the all-ones curve (a resting order at the top of
    /// the range). For `univ3`: keeps the all-ones curve the construction
    /// includes by default; set false to model production pools.
    #[serde(default = "default_include_ones")]
    pub include_ones: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<CurveDto>>,
}

impl MechanismDto {
    pub fn to_core(&self) -> Result<Basis, CliError> {
        let domain = self.domain.to_core()?;
        match self.kind {
            MechanismKindDto::Cpmm => Ok(Basis::cpmm(domain)),
            MechanismKindDto::Lob => {
                let ticks = self
                    .ticks
                    .as_deref()
                    .ok_or_else(|| CliError::input("lob mechanism needs \"ticks\""))?;
                let build = if self.include_ones {
                    Basis::lob_with_ones(domain, ticks)
                } else {
                    Basis::lob(domain, ticks)
                };
                build.map_err(CliError::from_core)
            }
            MechanismKindDto::Univ3 => {
                let ticks = self
                    .ticks
                    .as_deref()
                    .ok_or_else(|| CliError::input("univ3 mechanism needs \"ticks\""))?;
                Basis::univ3(domain, ticks, self.include_ones).map_err(CliError::from_core)
            }
            MechanismKindDto::Custom => {
                let curves = self
                    .curves
                    .as_ref()
                    .ok_or_else(|| CliError::input("custom mechanism needs \"curves\""))?
                    .iter()
                    .map(|dto| dto.to_core())
                    .collect::<Result<Vec<_>, _>>()?;
                Basis::custom(domain, curves).map_err(CliError::from_core)
            }
        }
    }
}

/// One line of an events file (JSON lines).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EventDto {
    Mint { lp: String, curve: CurveDto },
    Burn { lp: String },
    TradePrice { p1: f64 },
    TradeQty { dq: f64 },
    Arb { p: f64 },
}

impl EventDto {
    pub fn to_core(&self) -> Result<PoolEvent, CliError> {
        Ok(match self {
            EventDto::Mint { lp, curve } => {
                PoolEvent::Mint { lp: lp.clone(), curve: curve.to_core()? }
            }
            EventDto::Burn { lp } => PoolEvent::Burn { lp: lp.clone() },
            EventDto::TradePrice { p1 } => PoolEvent::TradePrice { p1: *p1 },
            EventDto::TradeQty { dq } => PoolEvent::TradeQty { dq: *dq },
            EventDto::Arb { p } => PoolEvent::Arb { p: *p },
        })
    }
}

/// Approximation report emitted by `approx`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxReportDto {
    pub mechanism: MechanismDto,
    pub p: f64,
    pub weight: WeightDto,
    pub coeffs: Vec<f64>,
    pub distance: f64,
    /// Warm-start (constructive approximant) distance when the mechanism
    /// kind has one; an upper bound on the infimum.
    pub bound: Option<f64>,
    pub converged: bool,
}

/// Report emitted by `lowerbound`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundReportDto {
    pub mechanism: MechanismDto,
    pub p: f64,
    pub fmin: f64,
    pub fmax: f64,
    /// Adversary family size (basis complexity + 1).
    pub adversaries: usize,
    /// Max best-in-cone distance achieved over the family.
    pub distance: f64,
    /// Index of the hardest adversary (1-based).
    pub worst_index: usize,
    /// Pigeonhole-selected candidate interval, if any.
    pub pigeonhole_index: Option<usize>,
    /// Case-analysis branch that fired for the best cone response to the
    /// pigeonhole adversary.
    pub branch: Option<String>,
    /// True when every adversary is (numerically) inside the cone.
    pub absorbed: bool,
    pub per_adversary: Vec<f64>,
}

pub fn branch_name(branch: LowerBoundBranch) -> String {
    branch.name().to_string()
}

/// Config for the `tradeoff` sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffConfigDto {
    pub weight: WeightDto,
    pub bounds: BoundsDto,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    /// Random monotone curves added to the adversary pool per row.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_include_ones")]
    pub include_ones: bool,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundsDto {
    pub fmin: f64,
    pub fmax: f64,
}

fn default_p() -> f64 {
    1.0
}

fn default_samples() -> usize {
    32
}

fn default_grid() -> usize {
    192
}

fn default_tol() -> f64 {
    1e-9
}

fn default_iters() -> usize {
    600
}
