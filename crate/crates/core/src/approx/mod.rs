//! Weighted Lp distances, best approximation within a mechanism's cone,
//! constructive approximants, and adversarial lower-bound machinery.
//!
//! The headline quantity is the worst-case approximation error of a
//! mechanism: over all bounded non-increasing target curves, the distance
//! from the best cone element. The true supremum is not computable, so
//! [`err_estimate`] reports a documented **lower** estimate from a finite
//! adversary pool (the step family that drives the lower-bound argument,
//! plus seeded random monotone curves), while the constructive approximants
//! in [`construct`] supply matching analytic upper bounds.

mod adversary;
mod construct;
mod solver;

pub use adversary::{
    adversarial_grid, adversarial_step_family, classify_branch, large_drop_intervals,
    monotone_sampler, pigeonhole_interval, LowerBoundBranch,
};
pub use construct::{midpoint_lob_approximant, univ3_replicant};
pub use solver::{best_in_cone, best_in_cone_seeded, ConeFit};

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{DemandCurve, SegmentKind};
use crate::error::{Error, Result};
use crate::measure::WeightFunction;
use crate::mechanism::Basis;
use crate::quadrature;

/// Bounds `0 <= fmin < fmax < inf` of the target class: all non-increasing
/// curves taking values in `[fmin, fmax]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetClassBounds {
    fmin: f64,
    fmax: f64,
}

impl TargetClassBounds {
    pub fn new(fmin: f64, fmax: f64) -> Result<Self> {
        if !fmin.is_finite() || !fmax.is_finite() || fmin < 0.0 || !(fmin < fmax) {
            return Err(Error::InvalidParameter("bounds need 0 <= fmin < fmax < inf"));
        }
        Ok(Self { fmin, fmax })
    }

    pub fn fmin(&self) -> f64 {
        self.fmin
    }

    pub fn fmax(&self) -> f64 {
        self.fmax
    }

    /// `fmax - fmin`.
    pub fn spread(&self) -> f64 {
        self.fmax - self.fmin
    }
}

/// Knobs for the discretized cone solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxConfig {
    /// Norm exponent; distance evaluation accepts any `p >= 1`, the
    /// optimizing solver only 1 or 2.
    pub p_exp: f64,
    /// Number of equal-measure grid cells for the discretized objective.
    pub grid_size: usize,
    /// Relative objective tolerance declaring convergence.
    pub solver_tol: f64,
    /// Total iteration cap across solver phases.
    pub max_iters: usize,
}

impl ApproxConfig {
    pub fn new(p_exp: f64) -> Self {
        Self { p_exp, grid_size: 256, solver_tol: 1e-9, max_iters: 600 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.p_exp >= 1.0) || !self.p_exp.is_finite() {
            return Err(Error::InvalidParameter("norm exponent must be at least 1"));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter("grid size must be at least 2"));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerance must be positive"));
        }
        Ok(())
    }
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self::new(2.0)
    }
}

/// Weighted Lp distance `(∫ w |f - g|^p)^{1/p}`.
///
/// Integrates on the union of all breakpoints of `f`, `g` and `w`. Cells
/// where both curves are constant contribute exactly; elsewhere the
/// difference is an `a/sqrt(p) + b` arc, which is split at its (closed-form)
/// sign change and handled with 64-point Gauss–Legendre per smooth piece.
pub fn distance(f: &DemandCurve, g: &DemandCurve, w: &WeightFunction, p_exp: f64) -> Result<f64> {
    if f.domain() != g.domain() || f.domain() != w.domain() {
        return Err(Error::DomainMismatch);
    }
    if !(p_exp >= 1.0) || !p_exp.is_finite() {
        return Err(Error::InvalidParameter("norm exponent must be at least 1"));
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(
        f.breakpoints().len() + g.breakpoints().len() + w.interior_breakpoints().len(),
    );
    cuts.extend_from_slice(f.breakpoints());
    cuts.extend_from_slice(g.breakpoints());
    cuts.extend_from_slice(w.interior_breakpoints());
    cuts.sort_unstable_by(|a, b| a.partial_cmp(b).expect("breakpoints are finite"));
    cuts.dedup();

    let mut gauss: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        // Both curves are single segments on (u, v); their difference has
        // the form alpha / sqrt(p) + beta.
        let (alpha, beta) = difference_form(segment_on(f, u, v), segment_on(g, u, v));
        if alpha == 0.0 {
            total += beta.abs().powf(p_exp) * w.mass(u, v)?;
            continue;
        }
        let (nodes, weights) =
            gauss.get_or_insert_with(|| quadrature::gauss_legendre(64));
        // Split at the sign change of alpha/sqrt(p) + beta, if interior.
        let mut pieces = [(u, v), (f64::NAN, f64::NAN)];
        if beta != 0.0 && alpha.signum() != beta.signum() {
            let root = (alpha / beta) * (alpha / beta);
            if u < root && root < v {
                pieces = [(u, root), (root, v)];
            }
        }
        for (lo, hi) in pieces {
            if !lo.is_finite() {
                break;
            }
            total += quadrature::integrate(nodes, weights, lo, hi, |s| {
                w.density(s) * (alpha / s.sqrt() + beta).abs().powf(p_exp)
            });
        }
    }
    Ok(total.max(0.0).powf(1.0 / p_exp))
}

/// Segment of `g` active on the open interval `(u, v)` (no breakpoints of
/// `g` lie strictly inside by construction of the caller's partition).
fn segment_on(g: &DemandCurve, u: f64, v: f64) -> SegmentKind {
    let mid = 0.5 * (u + v);
    let idx = g
        .breakpoints()
        .partition_point(|t| *t <= mid)
        .saturating_sub(1)
        .min(g.segments().len() - 1);
    g.segments()[idx]
}

/// `(alpha, beta)` such that `f - g = alpha / sqrt(p) + beta` on the cell.
fn difference_form(f_seg: SegmentKind, g_seg: SegmentKind) -> (f64, f64) {
    let split = |seg: SegmentKind| match seg {
        SegmentKind::Constant { c } => (0.0, c),
        SegmentKind::InverseSqrtAffine { a, b } => (a, b),
    };
    let (fa, fb) = split(f_seg);
    let (ga, gb) = split(g_seg);
    (fa - ga, fb - gb)
}

/// Which adversary achieved the reported worst case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WorstAdversary {
    /// `l`-th member of the adversarial step family (1-based).
    Step { index: usize },
    /// Seeded random monotone curve.
    Sampled { seed: u64 },
}

/// A lower estimate of the worst-case approximation error.
#[derive(Clone, Debug)]
pub struct ErrEstimate {
    /// Max best-in-cone distance over the adversary pool. A lower bound on
    /// the true worst case (the pool is finite), and each individual value
    /// is an achieved upper bound on that adversary's own infimum.
    pub value: f64,
    pub worst: WorstAdversary,
    /// Pool size actually evaluated.
    pub adversaries: usize,
}

/// Runs the adversary pool against a mechanism: the step family sized to
/// beat the basis by one (pigeonhole), plus `samples` seeded random
/// monotone curves. Deterministic for a fixed `seed`.
pub fn err_estimate(
    basis: &Basis,
    w: &WeightFunction,
    bounds: TargetClassBounds,
    cfg: &ApproxConfig,
    seed: u64,
    samples: usize,
) -> Result<ErrEstimate> {
    cfg.validate()?;
    let n = basis.complexity() + 1;
    let mut pool: Vec<(WorstAdversary, DemandCurve)> = Vec::new();
    for (i, f) in adversarial_step_family(w, n, bounds)?.into_iter().enumerate() {
        pool.push((WorstAdversary::Step { index: i + 1 }, f));
    }
    for i in 0..samples {
        let sample_seed = seed.wrapping_add(i as u64);
        let jumps = 1 + (i % 8);
        let f = monotone_sampler(sample_seed, bounds, jumps, w)?;
        pool.push((WorstAdversary::Sampled { seed: sample_seed }, f));
    }
    let mut best = ErrEstimate {
        value: -1.0,
        worst: WorstAdversary::Step { index: 0 },
        adversaries: pool.len(),
    };
    for (who, f) in &pool {
        let fit = best_in_cone(f, basis, w, cfg)?;
        if fit.distance > best.value {
            best.value = fit.distance;
            best.worst = *who;
        }
    }
    Ok(best)
}
