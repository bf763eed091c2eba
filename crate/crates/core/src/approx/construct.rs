//! Constructive approximants with per-interval sup-gap guarantees.
//!
//! These are the two explicit recipes behind the attainability results:
//! a midpoint staircase over equal-measure ticks for step bases, and the
//! interval-curve replication for Uniswap-v3-style bases. Both produce
//! nonnegative coefficients for any non-increasing target, so they double
//! as warm starts (and certified upper bounds) for the numeric solver.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::DemandCurve;
use crate::error::{Error, Result};
use crate::mechanism::ConeCoefficients;

/// Staircase taking the value `(f(t_i) + f(t_{i+1})) / 2` between
/// consecutive ticks, encoded over [`crate::Basis::lob_with_ones`] with the
/// same `ticks`: one step coefficient per tick (consecutive level
/// differences) plus the final level on the all-ones curve.
///
/// For non-increasing `f` every coefficient is nonnegative and the gap to
/// `f` never exceeds half the drop of `f` across each interval.
pub fn midpoint_lob_approximant(f: &DemandCurve, ticks: &[f64]) -> Result<ConeCoefficients> {
    let domain = f.domain();
    if ticks.windows(2).any(|w| !(w[0] < w[1]))
        || ticks.iter().any(|t| !(domain.pmin() < *t && *t < domain.pmax()))
    {
        return Err(Error::InvalidTicks("ticks must be increasing and interior"));
    }
    let mut levels = Vec::with_capacity(ticks.len() + 1);
    let mut lo = domain.pmin();
    for boundary in ticks.iter().copied().chain(core::iter::once(domain.pmax())) {
        levels.push(0.5 * (f.evaluate(lo)? + f.evaluate(boundary)?));
        lo = boundary;
    }
    let mut coefficients = Vec::with_capacity(levels.len());
    for pair in levels.windows(2) {
        coefficients.push((pair[0] - pair[1]).max(0.0));
    }
    coefficients.push(*levels.last().expect("at least one interval"));
    ConeCoefficients::new(coefficients)
}

/// Replication coefficients over [`crate::Basis::univ3`] (with the all-ones
/// curve): `(f(t_i) - f(t_{i+1})) / (1/sqrt(t_i) - 1/sqrt(t_{i+1}))` per
/// interval, plus `f(pmax)` on the all-ones curve.
///
/// The synthesized curve interpolates `f` exactly at every tick and stays
/// within `f(t_i) - f(t_{i+1})` of `f` inside each interval.
pub fn univ3_replicant(f: &DemandCurve, ticks: &[f64]) -> Result<ConeCoefficients> {
    let domain = f.domain();
    if ticks.len() < 2
        || ticks.windows(2).any(|w| !(w[0] < w[1]))
        || ticks[0] != domain.pmin()
        || ticks[ticks.len() - 1] != domain.pmax()
    {
        return Err(Error::InvalidTicks("ticks must run from pmin to pmax"));
    }
    let mut coefficients = Vec::with_capacity(ticks.len());
    for pair in ticks.windows(2) {
        let kappa = 1.0 / pair[0].sqrt() - 1.0 / pair[1].sqrt();
        let drop = f.evaluate(pair[0])? - f.evaluate(pair[1])?;
        coefficients.push((drop / kappa).max(0.0));
    }
    coefficients.push(f.evaluate(domain.pmax())?);
    ConeCoefficients::new(coefficients)
}
