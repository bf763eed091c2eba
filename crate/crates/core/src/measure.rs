//! Normalized weight functions on a price domain.
//!
//! A [`WeightFunction`] is a probability density on `[pmin, pmax]` used both
//! as the measure in weighted Lp distances and to place equal-measure ticks.
//! Three kinds are supported: uniform in price, uniform in log-price
//! (density `1 / (p ln(pmax/pmin))`, i.e. a flat prior over returns), and
//! piecewise-constant densities, which the constructor normalizes.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::PriceDomain;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Uniform,
    LogUniform,
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        /// Normalized densities, one per interval.
        densities: Vec<f64>,
        /// Cumulative mass at each breakpoint; first 0, last exactly 1.
        cumulative: Vec<f64>,
    },
}

/// A normalized weight (probability density) on a [`PriceDomain`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    domain: PriceDomain,
    kind: Kind,
}

impl WeightFunction {
    /// Uniform density `1 / (pmax - pmin)`.
    pub fn uniform(domain: PriceDomain) -> Self {
        Self { domain, kind: Kind::Uniform }
    }

    /// Log-uniform density `1 / (p ln(pmax/pmin))`.
    pub fn log_uniform(domain: PriceDomain) -> Self {
        Self { domain, kind: Kind::LogUniform }
    }

    /// Piecewise-constant density over the given breakpoints; densities are
    /// normalized to total mass one. The domain is taken from the first and
    /// last breakpoint.
    pub fn piecewise_constant(breakpoints: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || densities.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidWeight("breakpoint/density count mismatch"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidWeight("breakpoints not strictly increasing"));
        }
        if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidWeight("densities must be nonnegative"));
        }
        let domain = PriceDomain::new(breakpoints[0], breakpoints[breakpoints.len() - 1])?;
        let total: f64 = densities
            .iter()
            .zip(breakpoints.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        if !(total > 0.0) {
            return Err(Error::InvalidWeight("total mass must be positive"));
        }
        let densities: Vec<f64> = densities.iter().map(|d| d / total).collect();
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for (d, w) in densities.iter().zip(breakpoints.windows(2)) {
            acc += d * (w[1] - w[0]);
            cumulative.push(acc);
        }
        // Pin the endpoint so mass(pmin, pmax) is exactly one.
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { domain, kind: Kind::PiecewiseConstant { breakpoints, densities, cumulative } })
    }

    pub fn domain(&self) -> PriceDomain {
        self.domain
    }

    /// Density at `p` (right-continuous at piecewise breakpoints).
    pub fn density(&self, p: f64) -> f64 {
        match &self.kind {
            Kind::Uniform => 1.0 / (self.domain.pmax() - self.domain.pmin()),
            Kind::LogUniform => 1.0 / (p * self.domain.ratio().ln()),
            Kind::PiecewiseConstant { breakpoints, densities, .. } => {
                if p < self.domain.pmin() || p > self.domain.pmax() {
                    return 0.0;
                }
                let j = breakpoints
                    .partition_point(|t| *t <= p)
                    .saturating_sub(1)
                    .min(densities.len() - 1);
                densities[j]
            }
        }
    }

    /// Interior density breakpoints, empty for the smooth kinds.
    pub fn interior_breakpoints(&self) -> &[f64] {
        match &self.kind {
            Kind::PiecewiseConstant { breakpoints, .. } => &breakpoints[1..breakpoints.len() - 1],
            _ => &[],
        }
    }

    /// `∫_a^b w`, with `pmin <= a <= b <= pmax`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::OutOfDomain(if a > b { b } else { f64::NAN }));
        }
        if a < self.domain.pmin() {
            return Err(Error::OutOfDomain(a));
        }
        if b > self.domain.pmax() {
            return Err(Error::OutOfDomain(b));
        }
        Ok(match &self.kind {
            Kind::Uniform => (b - a) / (self.domain.pmax() - self.domain.pmin()),
            Kind::LogUniform => (b / a).ln() / self.domain.ratio().ln(),
            Kind::PiecewiseConstant { .. } => self.cdf(b) - self.cdf(a),
        })
    }

    fn cdf(&self, p: f64) -> f64 {
        match &self.kind {
            Kind::PiecewiseConstant { breakpoints, densities, cumulative } => {
                let j = breakpoints
                    .partition_point(|t| *t <= p)
                    .saturating_sub(1)
                    .min(densities.len() - 1);
                (cumulative[j] + densities[j] * (p - breakpoints[j])).min(1.0)
            }
            _ => unreachable!("cdf is only used for the piecewise kind"),
        }
    }

    /// Inverse cumulative mass: the leftmost `p` with `mass(pmin, p) = q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !q.is_finite() || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidProbability(q));
        }
        Ok(match &self.kind {
            Kind::Uniform => self.domain.pmin() + q * (self.domain.pmax() - self.domain.pmin()),
            Kind::LogUniform => self.domain.pmin() * (q * self.domain.ratio().ln()).exp(),
            Kind::PiecewiseConstant { breakpoints, densities, cumulative } => {
                // First interval whose right-end cumulative reaches q; inside
                // it, invert linearly. Zero-density stretches resolve to
                // their left edge, the leftmost price attaining q.
                let j = cumulative[1..].partition_point(|c| *c < q).min(densities.len() - 1);
                if densities[j] > 0.0 {
                    let p = breakpoints[j] + (q - cumulative[j]) / densities[j];
                    p.min(breakpoints[j + 1])
                } else {
                    breakpoints[j]
                }
            }
        })
    }

    /// Largest mass assigned to any interval of consecutive `ticks`.
    ///
    /// Validation hook for tick layouts that need a per-interval mass cap
    /// (geometric ticks under a log-uniform weight give exactly `1/n`).
    pub fn max_interval_mass(&self, ticks: &[f64]) -> Result<f64> {
        if ticks.len() < 2 {
            return Err(Error::InvalidTicks("need at least two ticks"));
        }
        let mut worst = 0.0f64;
        for w in ticks.windows(2) {
            worst = worst.max(self.mass(w[0], w[1])?);
        }
        Ok(worst)
    }
}
