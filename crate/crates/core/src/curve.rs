//! Piecewise demand curves and their closed-form price integrals.
//!
//! A [`DemandCurve`] is a nonnegative, non-increasing function of price on a
//! bounded domain, stored as breakpoints plus one segment per interval. Two
//! segment shapes cover every mechanism handled here: constants (limit-order
//! levels) and `a/sqrt(p) + b` arcs (constant-product and Uniswap-v3 pieces).
//!
//! Conventions, fixed once so jumps are unambiguous everywhere downstream:
//! - curves are **right-continuous** at breakpoints; the left limit at an
//!   interior breakpoint is the previous segment evaluated there, and the
//!   difference is the jump;
//! - outside the domain a curve extends as a constant, so `dg = 0` there and
//!   every deposit integral taken from below the domain is finite.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative slack used when validating nonnegativity and monotonicity of
/// float-assembled curves (sums of exactly-valid curves can round either way).
const VALIDITY_SLACK: f64 = 1e-9;

/// A bounded, strictly positive price interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriceDomain {
    pmin: f64,
    pmax: f64,
}

impl PriceDomain {
    /// Requires `0 < pmin < pmax < inf`.
    pub fn new(pmin: f64, pmax: f64) -> Result<Self> {
        if !(pmin.is_finite() && pmax.is_finite()) || !(0.0 < pmin && pmin < pmax) {
            return Err(Error::InvalidDomain { pmin, pmax });
        }
        Ok(Self { pmin, pmax })
    }

    pub fn pmin(&self) -> f64 {
        self.pmin
    }

    pub fn pmax(&self) -> f64 {
        self.pmax
    }

    /// `pmax / pmin`.
    pub fn ratio(&self) -> f64 {
        self.pmax / self.pmin
    }

    pub fn contains(&self, p: f64) -> bool {
        self.pmin <= p && p <= self.pmax
    }

    pub fn clamp(&self, p: f64) -> f64 {
        p.max(self.pmin).min(self.pmax)
    }
}

/// Shape of a curve on one breakpoint interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentKind {
    /// Constant quantity `c >= 0`.
    Constant { c: f64 },
    /// `p -> a / sqrt(p) + b` with `a >= 0`; non-increasing by construction.
    InverseSqrtAffine { a: f64, b: f64 },
}

impl SegmentKind {
    /// Raw segment value at `p` (may round a hair below zero for assembled
    /// curves; [`DemandCurve::evaluate`] clamps).
    pub fn value_at(&self, p: f64) -> f64 {
        match *self {
            SegmentKind::Constant { c } => c,
            SegmentKind::InverseSqrtAffine { a, b } => a / p.sqrt() + b,
        }
    }

    /// True when the segment cannot vary with price.
    pub fn is_constant(&self) -> bool {
        match *self {
            SegmentKind::Constant { .. } => true,
            SegmentKind::InverseSqrtAffine { a, .. } => a == 0.0,
        }
    }

    /// Continuous part of `-∫ p dg` over `[u, v]` inside this segment.
    ///
    /// Constants contribute nothing; for `a/sqrt(p) + b` the antiderivative
    /// is `a (sqrt(v) - sqrt(u))`.
    fn payment(&self, u: f64, v: f64) -> f64 {
        match *self {
            SegmentKind::Constant { .. } => 0.0,
            SegmentKind::InverseSqrtAffine { a, .. } => a * (v.sqrt() - u.sqrt()),
        }
    }

    fn scaled(&self, k: f64) -> SegmentKind {
        match *self {
            SegmentKind::Constant { c } => SegmentKind::Constant { c: k * c },
            SegmentKind::InverseSqrtAffine { a, b } => {
                SegmentKind::InverseSqrtAffine { a: k * a, b: k * b }
            }
        }
    }

    fn plus(&self, other: &SegmentKind) -> SegmentKind {
        use SegmentKind::*;
        match (*self, *other) {
            (Constant { c }, Constant { c: d }) => Constant { c: c + d },
            (Constant { c }, InverseSqrtAffine { a, b })
            | (InverseSqrtAffine { a, b }, Constant { c }) => {
                InverseSqrtAffine { a, b: b + c }
            }
            (InverseSqrtAffine { a, b }, InverseSqrtAffine { a: a2, b: b2 }) => {
                InverseSqrtAffine { a: a + a2, b: b + b2 }
            }
        }
    }
}

/// A nonnegative, non-increasing piecewise curve on a [`PriceDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct DemandCurve {
    domain: PriceDomain,
    /// `t_0 = pmin < t_1 < ... < t_m = pmax`; one segment per interval.
    breakpoints: Vec<f64>,
    segments: Vec<SegmentKind>,
}

impl DemandCurve {
    /// Builds a curve and checks its invariants: breakpoints span the domain
    /// in strictly increasing order, every segment is nonnegative on its
    /// interval, and the curve never increases within or across segments.
    pub fn new(
        domain: PriceDomain,
        breakpoints: Vec<f64>,
        segments: Vec<SegmentKind>,
    ) -> Result<Self> {
        if breakpoints.len() < 2 || segments.len() + 1 != breakpoints.len() {
            return Err(Error::MalformedBreakpoints("count mismatch"));
        }
        if breakpoints[0] != domain.pmin || breakpoints[breakpoints.len() - 1] != domain.pmax {
            return Err(Error::MalformedBreakpoints("must span the domain"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::MalformedBreakpoints("not strictly increasing"));
        }
        // Canonical form: a zero-slope arc is a constant.
        let segments: Vec<SegmentKind> = segments
            .into_iter()
            .map(|seg| match seg {
                SegmentKind::InverseSqrtAffine { a, b } if a == 0.0 => SegmentKind::Constant { c: b },
                other => other,
            })
            .collect();
        for (j, seg) in segments.iter().enumerate() {
            let (u, v) = (breakpoints[j], breakpoints[j + 1]);
            match *seg {
                SegmentKind::Constant { c } => {
                    if !c.is_finite() || c < 0.0 {
                        return Err(Error::NegativeValue { at: u });
                    }
                }
                SegmentKind::InverseSqrtAffine { a, b } => {
                    if !a.is_finite() || !b.is_finite() {
                        return Err(Error::NegativeValue { at: u });
                    }
                    if a < 0.0 {
                        return Err(Error::NotNonIncreasing { at: u });
                    }
                    // Minimum over the segment sits at the right endpoint.
                    let right = a / v.sqrt() + b;
                    let scale = a / v.sqrt() + b.abs();
                    if right < -VALIDITY_SLACK * scale {
                        return Err(Error::NegativeValue { at: v });
                    }
                }
            }
        }
        // No upward jump at any interior breakpoint. Slack scales with the
        // curve's top value: near-zero tails of float-assembled sums may
        // round a few ulps either way.
        let top = segments[0].value_at(domain.pmin).abs();
        for j in 1..segments.len() {
            let t = breakpoints[j];
            let left = segments[j - 1].value_at(t);
            let right = segments[j].value_at(t);
            let scale = left.abs().max(right.abs()).max(top).max(1e-300);
            if right > left + VALIDITY_SLACK * scale {
                return Err(Error::NotNonIncreasing { at: t });
            }
        }
        Ok(Self { domain, breakpoints, segments })
    }

    /// Constant curve `c >= 0` on the whole domain.
    pub fn constant(domain: PriceDomain, c: f64) -> Result<Self> {
        Self::new(domain, vec![domain.pmin, domain.pmax], vec![SegmentKind::Constant { c }])
    }

    /// The zero curve.
    pub fn zero(domain: PriceDomain) -> Self {
        Self::constant(domain, 0.0).expect("zero curve is always valid")
    }

    /// Step from `high` down to `low` at an interior price `at`
    /// (right-continuous: the curve already equals `low` at `at`).
    pub fn step(domain: PriceDomain, at: f64, high: f64, low: f64) -> Result<Self> {
        if !(domain.pmin < at && at < domain.pmax) {
            return Err(Error::InvalidTicks("step must be strictly inside the domain"));
        }
        Self::new(
            domain,
            vec![domain.pmin, at, domain.pmax],
            vec![SegmentKind::Constant { c: high }, SegmentKind::Constant { c: low }],
        )
    }

    pub fn domain(&self) -> PriceDomain {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[SegmentKind] {
        &self.segments
    }

    /// Interior breakpoints only (excludes the domain endpoints).
    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    /// Index of the segment owning `p` under right-continuity
    /// (`t_j <= p < t_{j+1}`; `p >= pmax` maps to the last segment).
    fn segment_index(&self, p: f64) -> usize {
        if p >= self.domain.pmax {
            return self.segments.len() - 1;
        }
        let n_le = self.breakpoints.partition_point(|t| *t <= p);
        n_le.saturating_sub(1)
    }

    /// Right-continuous value at `p > 0`, extending as a constant outside
    /// the domain.
    pub fn evaluate(&self, p: f64) -> Result<f64> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::NonPositivePrice(p));
        }
        let p = self.domain.clamp(p);
        let j = self.segment_index(p);
        Ok(self.segments[j].value_at(p).max(0.0))
    }

    /// Value at the domain's left edge (the curve's maximum).
    pub fn value_at_min(&self) -> f64 {
        self.segments[0].value_at(self.domain.pmin).max(0.0)
    }

    /// Value at the domain's right edge (the curve's minimum).
    pub fn value_at_max(&self) -> f64 {
        self.segments[self.segments.len() - 1].value_at(self.domain.pmax).max(0.0)
    }

    /// Left limit at interior breakpoint index `j` (1-based into
    /// `breakpoints`, i.e. `0 < j < m`).
    fn left_limit(&self, j: usize) -> f64 {
        self.segments[j - 1].value_at(self.breakpoints[j]).max(0.0)
    }

    /// Downward jumps `(t_j, size)` at interior breakpoints, zero-size jumps
    /// omitted.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for j in 1..self.segments.len() {
            let t = self.breakpoints[j];
            let size = self.left_limit(j) - self.segments[j].value_at(t).max(0.0);
            if size > 0.0 {
                out.push((t, size));
            }
        }
        out
    }

    /// Pointwise sum. Domains must be identical; breakpoints are unioned
    /// and segment kinds combine closed-form.
    pub fn add(&self, other: &DemandCurve) -> Result<DemandCurve> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let mut breakpoints = Vec::with_capacity(self.breakpoints.len() + other.breakpoints.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.breakpoints.len() || j < other.breakpoints.len() {
            let a = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
            let b = other.breakpoints.get(j).copied().unwrap_or(f64::INFINITY);
            if a < b {
                breakpoints.push(a);
                i += 1;
            } else if b < a {
                breakpoints.push(b);
                j += 1;
            } else {
                breakpoints.push(a);
                i += 1;
                j += 1;
            }
        }
        let mut segments = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let left = self.segments[self.segment_index(w[0])];
            let right = other.segments[other.segment_index(w[0])];
            segments.push(left.plus(&right));
        }
        coalesce(&mut breakpoints, &mut segments);
        DemandCurve::new(self.domain, breakpoints, segments)
    }

    /// Pointwise scaling by `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<DemandCurve> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::NegativeScale(c));
        }
        let segments = self.segments.iter().map(|s| s.scaled(c)).collect();
        DemandCurve::new(self.domain, self.breakpoints.clone(), segments)
    }

    /// The Riemann–Stieltjes payment integral `-∫_a^b p dg(p)`.
    ///
    /// Closed form per segment plus `t_j * jump` for every breakpoint in
    /// `(a, b]`; antisymmetric in its bounds and zero outside the domain
    /// (constant extension). Nonnegative whenever `b >= a`.
    pub fn stieltjes_price_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::NonPositivePrice(a));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::NonPositivePrice(b));
        }
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return Ok(-self.stieltjes_price_integral(b, a)?);
        }
        let lo = a.max(self.domain.pmin);
        let hi = b.min(self.domain.pmax);
        if lo >= hi {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (j, seg) in self.segments.iter().enumerate() {
            let u = self.breakpoints[j].max(lo);
            let v = self.breakpoints[j + 1].min(hi);
            if u < v {
                total += seg.payment(u, v);
            }
        }
        for j in 1..self.segments.len() {
            let t = self.breakpoints[j];
            if lo < t && t <= hi {
                let jump = self.left_limit(j) - self.segments[j].value_at(t).max(0.0);
                if jump > 0.0 {
                    total += t * jump;
                }
            }
        }
        Ok(total)
    }

    /// Leftmost price at which the curve takes the value `q`; at a jump that
    /// skips `q`, the jump location. Requires `g(pmax) <= q <= g(pmin)`.
    pub fn invert_quantity(&self, q: f64) -> Result<f64> {
        let (lo, hi) = (self.value_at_max(), self.value_at_min());
        if !q.is_finite() || q < lo || q > hi {
            return Err(Error::QuantityOutOfRange { q, lo, hi });
        }
        for (j, seg) in self.segments.iter().enumerate() {
            let u = self.breakpoints[j];
            let v = self.breakpoints[j + 1];
            let v_start = seg.value_at(u).max(0.0);
            let v_end = seg.value_at(v).max(0.0);
            if q > v_start {
                // The jump at u skipped q.
                return Ok(u);
            }
            if q >= v_end {
                return Ok(match *seg {
                    SegmentKind::Constant { .. } => u,
                    SegmentKind::InverseSqrtAffine { a, b } => {
                        if a == 0.0 || q >= v_start {
                            u
                        } else {
                            let root = a / (q - b);
                            (root * root).max(u).min(v)
                        }
                    }
                });
            }
        }
        Ok(self.domain.pmax)
    }
}

/// Merges adjacent intervals whose segments are identical and meet without
/// a jump; keeps aggregates compact under repeated addition.
fn coalesce(breakpoints: &mut Vec<f64>, segments: &mut Vec<SegmentKind>) {
    let mut j = 1;
    while j < segments.len() {
        if segments[j] == segments[j - 1] {
            segments.remove(j);
            breakpoints.remove(j);
        } else {
            j += 1;
        }
    }
}
