//! Adversarial targets and the executable pieces of the lower-bound
//! argument.
//!
//! The construction works on an even grid of `2(n+2)` equal-measure
//! intervals with boundaries `t_0 < t_1 < ... < t_{2n+4}`. Candidate
//! intervals are `[t_{2l+1}, t_{2l+3}]` for `l in 1..=n`; the adversarial
//! step curves drop from `fmax` to `fmin` at the candidate centers
//! `t_{2l+2}`. For any non-increasing curve, at most one candidate interval
//! can capture more than half of its drop across `[t_3, t_{2n+3}]`, so a
//! basis of size `n - 1` must leave some candidate uncovered (pigeonhole),
//! and the step dropping there is hard for the whole cone.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{DemandCurve, SegmentKind};
use crate::error::{Error, Result};
use crate::measure::WeightFunction;
use crate::mechanism::Basis;

use super::TargetClassBounds;

/// Boundaries `t_0, ..., t_{2n+4}` of `2(n+2)` equal-measure intervals.
pub fn adversarial_grid(w: &WeightFunction, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("adversary count must be at least 1"));
    }
    let cells = 2 * (n + 2);
    let grid: Vec<f64> =
        (0..=cells).map(|j| w.quantile(j as f64 / cells as f64)).collect::<Result<_>>()?;
    if grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidWeight("grid quantiles are not strictly increasing"));
    }
    Ok(grid)
}

/// One step curve per candidate index `l in 1..=n`, dropping from `fmax` to
/// `fmin` at the even grid point `t_{2l+2}`.
pub fn adversarial_step_family(
    w: &WeightFunction,
    n: usize,
    bounds: TargetClassBounds,
) -> Result<Vec<DemandCurve>> {
    let grid = adversarial_grid(w, n)?;
    (1..=n)
        .map(|l| DemandCurve::step(w.domain(), grid[2 * l + 2], bounds.fmax(), bounds.fmin()))
        .collect()
}

/// Seeded random element of the target class: `jumps` drop locations at
/// uniform-random quantiles of `w`, drop sizes proportional to uniform
/// sticks and summing exactly to `fmax - fmin`.
pub fn monotone_sampler(
    seed: u64,
    bounds: TargetClassBounds,
    jumps: usize,
    w: &WeightFunction,
) -> Result<DemandCurve> {
    if jumps == 0 {
        return Err(Error::InvalidParameter("need at least one jump"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: Vec<(f64, f64)> = Vec::with_capacity(jumps);
    for _ in 0..jumps {
        // Keep quantiles strictly interior so every jump is a breakpoint.
        let q = 1e-9 + rng.random::<f64>() * (1.0 - 2e-9);
        let stick = 1.0 - rng.random::<f64>();
        cuts.push((w.quantile(q)?, stick));
    }
    cuts.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("quantiles are finite"));
    // Collisions collapse into a single bigger drop.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(cuts.len());
    for (loc, stick) in cuts {
        match merged.last_mut() {
            Some(last) if last.0 == loc => last.1 += stick,
            _ => merged.push((loc, stick)),
        }
    }
    let total: f64 = merged.iter().map(|c| c.1).sum();
    let domain = w.domain();
    let mut breakpoints = Vec::with_capacity(merged.len() + 2);
    let mut segments = Vec::with_capacity(merged.len() + 1);
    breakpoints.push(domain.pmin());
    let mut level = bounds.fmax();
    let mut dropped = 0.0;
    for (i, (loc, stick)) in merged.iter().enumerate() {
        breakpoints.push(*loc);
        segments.push(SegmentKind::Constant { c: level });
        dropped += stick / total * bounds.spread();
        level = if i + 1 == merged.len() {
            bounds.fmin() // pin the final level exactly
        } else {
            bounds.fmax() - dropped
        };
    }
    breakpoints.push(domain.pmax());
    segments.push(SegmentKind::Constant { c: level });
    DemandCurve::new(domain, breakpoints, segments)
}

/// Candidate indices `l` whose interval captures more than half of the
/// curve's drop across the inner grid: `g(t_{2l+1}) - g(t_{2l+3}) >
/// (g(t_3) - g(t_{2n+3})) / 2`. For a non-increasing curve this has at most
/// one element.
pub fn large_drop_intervals(g: &DemandCurve, grid: &[f64]) -> Result<Vec<usize>> {
    let n = candidate_count(grid)?;
    let outer = g.evaluate(grid[3])? - g.evaluate(grid[2 * n + 3])?;
    let mut out = Vec::new();
    for l in 1..=n {
        let drop = g.evaluate(grid[2 * l + 1])? - g.evaluate(grid[2 * l + 3])?;
        if drop > 0.5 * outer {
            out.push(l);
        }
    }
    Ok(out)
}

/// First candidate interval on which **no** basis curve concentrates more
/// than half of its drop; `None` only when the basis is large enough to
/// cover all candidates (no pigeonhole guarantee).
pub fn pigeonhole_interval(basis: &Basis, grid: &[f64]) -> Result<Option<usize>> {
    let n = candidate_count(grid)?;
    let mut taken = alloc::vec![false; n + 1];
    for curve in basis.curves() {
        for l in large_drop_intervals(curve, grid)? {
            taken[l] = true;
        }
    }
    Ok((1..=n).find(|l| !taken[*l]))
}

/// Which branch of the lower-bound case analysis applies to a cone element
/// `g` on candidate interval `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundBranch {
    /// `g(t_3)` sits a quarter-spread above `fmax`: penalty on the far left.
    OuterLeft,
    /// `g(t_{2n+3})` sits a quarter-spread below `fmin`: penalty far right.
    OuterRight,
    /// `g` still at or above `fmax` entering the candidate interval.
    HighPlateau,
    /// `g` already at or below `fmin` leaving the candidate interval.
    LowPlateau,
    /// `g` strictly inside the band on both sides; its capped drop cannot
    /// track the adversary's step.
    Straddle,
}

impl LowerBoundBranch {
    pub fn name(&self) -> &'static str {
        match self {
            LowerBoundBranch::OuterLeft => "outer_left",
            LowerBoundBranch::OuterRight => "outer_right",
            LowerBoundBranch::HighPlateau => "high_plateau",
            LowerBoundBranch::LowPlateau => "low_plateau",
            LowerBoundBranch::Straddle => "straddle",
        }
    }
}

/// Classifies `g` against the case analysis on candidate `l`.
pub fn classify_branch(
    g: &DemandCurve,
    grid: &[f64],
    bounds: TargetClassBounds,
    l: usize,
) -> Result<LowerBoundBranch> {
    let n = candidate_count(grid)?;
    if !(1..=n).contains(&l) {
        return Err(Error::InvalidParameter("candidate index out of range"));
    }
    let quarter = 0.25 * bounds.spread();
    if g.evaluate(grid[3])? >= bounds.fmax() + quarter {
        return Ok(LowerBoundBranch::OuterLeft);
    }
    if g.evaluate(grid[2 * n + 3])? <= bounds.fmin() - quarter {
        return Ok(LowerBoundBranch::OuterRight);
    }
    if g.evaluate(grid[2 * l + 1])? >= bounds.fmax() {
        return Ok(LowerBoundBranch::HighPlateau);
    }
    if g.evaluate(grid[2 * l + 3])? <= bounds.fmin() {
        return Ok(LowerBoundBranch::LowPlateau);
    }
    Ok(LowerBoundBranch::Straddle)
}

fn candidate_count(grid: &[f64]) -> Result<usize> {
    if grid.len() < 7 || grid.len() % 2 == 0 {
        return Err(Error::InvalidParameter("grid must have 2n+5 points"));
    }
    Ok((grid.len() - 5) / 2)
}
