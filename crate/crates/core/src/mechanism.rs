//! Mechanism bases and their conical hulls.
//!
//! An exchange mechanism is a set of generating demand curves; every
//! allowable LP position is a nonnegative combination of them. The stored
//! list's cardinality is the mechanism's exchange complexity (the built-in
//! families are conically independent, so the stored list is minimal).
//!
//! Built-ins:
//! - [`Basis::cpmm`]: the single reference curve `1/sqrt(p)` — a constant
//!   product market maker once scaled by liquidity;
//! - [`Basis::lob`]: one unit step per tick, a resting limit order each;
//! - [`Basis::univ3`]: one concentrated-liquidity curve per tick interval
//!   (constant until the interval, `1/sqrt(p)` inside, zero after), plus an
//!   optional all-ones curve so positive floors stay representable.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{DemandCurve, PriceDomain, SegmentKind};
use crate::error::{Error, Result};
use crate::measure::WeightFunction;

/// Nonnegative combination weights, one per basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCoefficients(Vec<f64>);

impl ConeCoefficients {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::NegativeCoefficient(*bad));
        }
        Ok(Self(coefficients))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ConeCoefficients {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// How a basis was constructed; lets downstream code pick matching
/// constructive approximants.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisKind {
    Custom,
    Cpmm,
    /// Unit steps at `ticks`; `with_ones` appends the all-ones curve
    /// (a resting order at the top of the range).
    Lob { ticks: Vec<f64>, with_ones: bool },
    /// Interval curves over consecutive `ticks` (which include both domain
    /// endpoints); `with_ones` appends the all-ones curve.
    Univ3 { ticks: Vec<f64>, with_ones: bool },
}

/// An ordered generating set of demand curves on a common domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    domain: PriceDomain,
    curves: Vec<DemandCurve>,
    kind: BasisKind,
}

impl Basis {
    /// Arbitrary curves; all must share `domain`.
    pub fn custom(domain: PriceDomain, curves: Vec<DemandCurve>) -> Result<Self> {
        if curves.iter().any(|c| c.domain() != domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { domain, curves, kind: BasisKind::Custom })
    }

    /// The constant-product reference curve `1/sqrt(p)`; complexity 1.
    pub fn cpmm(domain: PriceDomain) -> Self {
        let curve = DemandCurve::new(
            domain,
            vec![domain.pmin(), domain.pmax()],
            vec![SegmentKind::InverseSqrtAffine { a: 1.0, b: 0.0 }],
        )
        .expect("reference curve is valid on any domain");
        Self { domain, curves: vec![curve], kind: BasisKind::Cpmm }
    }

    /// One unit step (1 below the tick, 0 at and above) per tick;
    /// complexity = number of ticks.
    pub fn lob(domain: PriceDomain, ticks: &[f64]) -> Result<Self> {
        Self::lob_inner(domain, ticks, false)
    }

    /// [`Basis::lob`] plus the all-ones curve, which acts as a resting order
    /// at the top of the range and carries a staircase's final level.
    pub fn lob_with_ones(domain: PriceDomain, ticks: &[f64]) -> Result<Self> {
        Self::lob_inner(domain, ticks, true)
    }

    fn lob_inner(domain: PriceDomain, ticks: &[f64], with_ones: bool) -> Result<Self> {
        validate_interior_ticks(domain, ticks)?;
        let mut curves: Vec<DemandCurve> = ticks
            .iter()
            .map(|t| DemandCurve::step(domain, *t, 1.0, 0.0))
            .collect::<Result<_>>()?;
        if with_ones {
            curves.push(DemandCurve::constant(domain, 1.0)?);
        }
        Ok(Self {
            domain,
            curves,
            kind: BasisKind::Lob { ticks: ticks.to_vec(), with_ones },
        })
    }

    /// One interval curve per consecutive tick pair (`ticks` must start at
    /// `pmin` and end at `pmax`), plus the all-ones curve when
    /// `include_ones`. Complexity = intervals (+1 with the ones curve).
    pub fn univ3(domain: PriceDomain, ticks: &[f64], include_ones: bool) -> Result<Self> {
        validate_spanning_ticks(domain, ticks)?;
        let mut curves = Vec::with_capacity(ticks.len());
        for pair in ticks.windows(2) {
            curves.push(univ3_interval_curve(domain, pair[0], pair[1])?);
        }
        if include_ones {
            curves.push(DemandCurve::constant(domain, 1.0)?);
        }
        Ok(Self {
            domain,
            curves,
            kind: BasisKind::Univ3 { ticks: ticks.to_vec(), with_ones: include_ones },
        })
    }

    pub fn domain(&self) -> PriceDomain {
        self.domain
    }

    pub fn curves(&self) -> &[DemandCurve] {
        &self.curves
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    /// Cardinality of the stored generating set.
    pub fn complexity(&self) -> usize {
        self.curves.len()
    }

    /// `Σ c_i g_i` as a demand curve; valid because the curve invariants are
    /// closed under nonnegative combination.
    pub fn synthesize(&self, coefficients: &ConeCoefficients) -> Result<DemandCurve> {
        if coefficients.len() != self.curves.len() {
            return Err(Error::CoefficientMismatch {
                expected: self.curves.len(),
                got: coefficients.len(),
            });
        }
        let mut acc = DemandCurve::zero(self.domain);
        for (c, g) in coefficients.as_slice().iter().zip(&self.curves) {
            if *c > 0.0 {
                acc = acc.add(&g.scale(*c)?)?;
            }
        }
        Ok(acc)
    }
}

/// The Uniswap-v3 interval curve on `[lo, hi]`: constant `1/sqrt(lo) -
/// 1/sqrt(hi)` below, `1/sqrt(p) - 1/sqrt(hi)` inside, zero above.
fn univ3_interval_curve(domain: PriceDomain, lo: f64, hi: f64) -> Result<DemandCurve> {
    let b = -1.0 / hi.sqrt();
    let plateau = 1.0 / lo.sqrt() + b;
    let mut breakpoints = vec![domain.pmin()];
    let mut segments = Vec::new();
    if lo > domain.pmin() {
        breakpoints.push(lo);
        segments.push(SegmentKind::Constant { c: plateau });
    }
    breakpoints.push(hi);
    segments.push(SegmentKind::InverseSqrtAffine { a: 1.0, b });
    if hi < domain.pmax() {
        breakpoints.push(domain.pmax());
        segments.push(SegmentKind::Constant { c: 0.0 });
    }
    DemandCurve::new(domain, breakpoints, segments)
}

fn validate_interior_ticks(domain: PriceDomain, ticks: &[f64]) -> Result<()> {
    if ticks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidTicks("ticks must be strictly increasing"));
    }
    if ticks.iter().any(|t| !(domain.pmin() < *t && *t < domain.pmax())) {
        return Err(Error::InvalidTicks("ticks must lie strictly inside the domain"));
    }
    Ok(())
}

fn validate_spanning_ticks(domain: PriceDomain, ticks: &[f64]) -> Result<()> {
    if ticks.len() < 2 {
        return Err(Error::InvalidTicks("need at least two ticks"));
    }
    if ticks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidTicks("ticks must be strictly increasing"));
    }
    if ticks[0] != domain.pmin() || ticks[ticks.len() - 1] != domain.pmax() {
        return Err(Error::InvalidTicks("ticks must start at pmin and end at pmax"));
    }
    Ok(())
}

/// The `n - 1` interior prices splitting the domain into `n` intervals of
/// mass exactly `1/n` under `w`.
pub fn equal_measure_ticks(w: &WeightFunction, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("interval count must be at least 1"));
    }
    (1..n).map(|i| w.quantile(i as f64 / n as f64)).collect()
}

/// Geometric tick grid `t_i = pmin (1+delta)^i` with `log(1+delta) =
/// epsilon^p_exp * log(pmax/pmin)`; the last tick is clamped to `pmax`.
/// Returns the full boundary list `t_0 = pmin, ..., t_n = pmax`
/// (`n` intervals).
pub fn geometric_ticks(domain: PriceDomain, epsilon: f64, p_exp: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter("epsilon must be positive"));
    }
    if !(p_exp >= 1.0) || !p_exp.is_finite() {
        return Err(Error::InvalidParameter("norm exponent must be at least 1"));
    }
    let eps_p = epsilon.powf(p_exp);
    if eps_p > 1.0 {
        return Err(Error::InvalidParameter("epsilon^p must not exceed 1"));
    }
    let log_ratio = domain.ratio().ln();
    let log_step = eps_p * log_ratio;
    // Round-to-nearest guard: 1/eps^p that is an exact integer must not
    // spill into an extra interval through float noise.
    let n = (log_ratio / log_step - 1e-9).ceil() as usize;
    if n < 1 {
        return Err(Error::InvalidParameter("tick spacing yields no intervals"));
    }
    let mut ticks = Vec::with_capacity(n + 1);
    ticks.push(domain.pmin());
    for i in 1..n {
        ticks.push(domain.pmin() * (i as f64 * log_step).exp());
    }
    ticks.push(domain.pmax());
    if ticks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("tick spacing collapsed under rounding"));
    }
    Ok(ticks)
}
