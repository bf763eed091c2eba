//! The exchange itself: pooled LP positions, mint/burn accounting, trades
//! against the aggregate demand curve, and an arbitrage best response.
//!
//! Reserve accounting follows two books at once: an incremental ledger
//! updated by every operation, and the closed-form reserves implied by the
//! aggregate curve (`risky = g(p0)`, `numéraire = -∫_{pmin}^{p0} p dg`).
//! [`PoolState::recompute_reserves`] re-derives the latter so solvency is an
//! executable assertion rather than bookkeeping by fiat.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{DemandCurve, PriceDomain};
use crate::error::{Error, Result};

/// Relative solvency slack: reserves may round this far below zero, scaled
/// by the largest reserve the pool has held.
pub const SOLVENCY_SLACK: f64 = 1e-9;

/// Number of uniform refinement points scanned by the arbitrage search on
/// top of the exact candidates (the clamped external price and every
/// breakpoint of the aggregate).
const ARB_GRID: usize = 256;

/// One LP's resting position.
#[derive(Clone, Debug)]
pub struct LpPosition {
    pub id: String,
    pub curve: DemandCurve,
}

/// Outcome of a single trade; all quantities are signed from the trader's
/// point of view (positive `risky_to_trader` means the trader received
/// risky asset and `numeraire_from_trader` is what they paid).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeReceipt {
    pub p_before: f64,
    pub p_after: f64,
    pub risky_to_trader: f64,
    pub numeraire_from_trader: f64,
}

/// Arbitrage best response against an external price.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArbOutcome {
    /// Profit-maximizing target price (leftmost maximizer on plateaus).
    pub p1: f64,
    /// Profit at `p1` when trading here and unwinding at the external price.
    pub profit: f64,
    /// True when another candidate price achieved the same profit, i.e. the
    /// maximizer set is not a single point (step aggregates).
    pub tied: bool,
}

/// A pool event for scripted or simulated sequences.
#[derive(Clone, Debug)]
pub enum PoolEvent {
    Mint { lp: String, curve: DemandCurve },
    Burn { lp: String },
    TradePrice { p1: f64 },
    TradeQty { dq: f64 },
    Arb { p: f64 },
}

impl PoolEvent {
    pub fn op_name(&self) -> &'static str {
        match self {
            PoolEvent::Mint { .. } => "mint",
            PoolEvent::Burn { .. } => "burn",
            PoolEvent::TradePrice { .. } => "trade_price",
            PoolEvent::TradeQty { .. } => "trade_qty",
            PoolEvent::Arb { .. } => "arb",
        }
    }
}

/// Pool snapshot after one ledger step. Deltas are pool-side: positive
/// `risky_delta` means the pool's risky holdings grew during the step.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub step: usize,
    pub op: &'static str,
    pub p0: f64,
    pub risky_reserve: f64,
    pub numeraire_reserve: f64,
    pub risky_delta: f64,
    pub numeraire_delta: f64,
}

/// Aggregated LP positions plus the current price and reserve ledger.
#[derive(Clone, Debug)]
pub struct PoolState {
    domain: PriceDomain,
    positions: Vec<LpPosition>,
    aggregate: DemandCurve,
    p0: f64,
    risky_reserve: f64,
    numeraire_reserve: f64,
    peak_risky: f64,
    peak_numeraire: f64,
}

impl PoolState {
    /// Empty pool at price `p0` (must lie inside the domain).
    pub fn new(domain: PriceDomain, p0: f64) -> Result<Self> {
        if !domain.contains(p0) {
            return Err(Error::OutOfDomain(p0));
        }
        Ok(Self {
            domain,
            positions: Vec::new(),
            aggregate: DemandCurve::zero(domain),
            p0,
            risky_reserve: 0.0,
            numeraire_reserve: 0.0,
            peak_risky: 0.0,
            peak_numeraire: 0.0,
        })
    }

    pub fn domain(&self) -> PriceDomain {
        self.domain
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn aggregate(&self) -> &DemandCurve {
        &self.aggregate
    }

    pub fn positions(&self) -> &[LpPosition] {
        &self.positions
    }

    /// Incrementally maintained `(risky, numéraire)` reserves.
    pub fn reserves(&self) -> (f64, f64) {
        (self.risky_reserve, self.numeraire_reserve)
    }

    /// Reserves re-derived from the aggregate curve at the current price.
    pub fn recompute_reserves(&self) -> (f64, f64) {
        let risky = self.aggregate.evaluate(self.p0).expect("p0 is a valid price");
        let numeraire = self
            .aggregate
            .stieltjes_price_integral(self.domain.pmin(), self.p0)
            .expect("domain prices are valid");
        (risky, numeraire)
    }

    /// True when the incremental ledger matches the closed-form reserves to
    /// the given relative tolerance.
    pub fn reserves_consistent(&self, rel_tol: f64) -> bool {
        let (risky, numeraire) = self.recompute_reserves();
        let ok = |ledger: f64, derived: f64, peak: f64| {
            (ledger - derived).abs() <= rel_tol * peak.max(1e-12)
        };
        ok(self.risky_reserve, risky, self.peak_risky.max(risky.abs()))
            && ok(self.numeraire_reserve, numeraire, self.peak_numeraire.max(numeraire.abs()))
    }

    /// Most negative numéraire reserve tolerated before the pool is
    /// declared insolvent.
    pub fn solvency_floor(&self) -> f64 {
        -SOLVENCY_SLACK * self.peak_numeraire
    }

    pub fn is_solvent(&self) -> bool {
        self.numeraire_reserve >= self.solvency_floor()
            && self.risky_reserve >= -SOLVENCY_SLACK * self.peak_risky
    }

    fn record_peaks(&mut self) {
        self.peak_risky = self.peak_risky.max(self.risky_reserve);
        self.peak_numeraire = self.peak_numeraire.max(self.numeraire_reserve);
    }

    /// Adds a position; returns the required `(risky, numéraire)` deposits
    /// `(g_i(p0), -∫_{pmin}^{p0} p dg_i)`. Both are nonnegative.
    pub fn mint(&mut self, lp: &str, curve: DemandCurve) -> Result<(f64, f64)> {
        if curve.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        if self.positions.iter().any(|pos| pos.id == lp) {
            return Err(Error::DuplicateLp(lp.into()));
        }
        let risky = curve.evaluate(self.p0)?;
        let numeraire = curve.stieltjes_price_integral(self.domain.pmin(), self.p0)?;
        self.aggregate = self.aggregate.add(&curve)?;
        self.positions.push(LpPosition { id: lp.into(), curve });
        self.risky_reserve += risky;
        self.numeraire_reserve += numeraire;
        self.record_peaks();
        Ok((risky, numeraire))
    }

    /// Removes a position; returns the `(risky, numéraire)` amounts handed
    /// back, valued at the current price.
    pub fn burn(&mut self, lp: &str) -> Result<(f64, f64)> {
        let idx = self
            .positions
            .iter()
            .position(|pos| pos.id == lp)
            .ok_or_else(|| Error::UnknownLp(lp.into()))?;
        let position = self.positions.remove(idx);
        let risky = position.curve.evaluate(self.p0)?;
        let numeraire = position.curve.stieltjes_price_integral(self.domain.pmin(), self.p0)?;
        // Linearity lets the remaining aggregate be rebuilt exactly.
        let mut aggregate = DemandCurve::zero(self.domain);
        for pos in &self.positions {
            aggregate = aggregate.add(&pos.curve)?;
        }
        self.aggregate = aggregate;
        self.risky_reserve -= risky;
        self.numeraire_reserve -= numeraire;
        Ok((risky, numeraire))
    }

    /// Trades against the aggregate to a target price `p1` in the domain.
    pub fn trade_to_price(&mut self, p1: f64) -> Result<TradeReceipt> {
        if !self.domain.contains(p1) {
            return Err(Error::OutOfDomain(p1));
        }
        let p_before = self.p0;
        let risky_to_trader = self.aggregate.evaluate(p_before)? - self.aggregate.evaluate(p1)?;
        let numeraire_from_trader = self.aggregate.stieltjes_price_integral(p_before, p1)?;
        self.p0 = p1;
        self.risky_reserve -= risky_to_trader;
        self.numeraire_reserve += numeraire_from_trader;
        self.record_peaks();
        Ok(TradeReceipt { p_before, p_after: p1, risky_to_trader, numeraire_from_trader })
    }

    /// Trades an exact (signed) risky quantity by inverting the aggregate;
    /// at a jump the fill runs to the jump price.
    pub fn trade_exact_risky(&mut self, dq: f64) -> Result<TradeReceipt> {
        if !dq.is_finite() {
            return Err(Error::InvalidParameter("trade quantity must be finite"));
        }
        let target = self.aggregate.evaluate(self.p0)? - dq;
        let lo = self.aggregate.value_at_max();
        let hi = self.aggregate.value_at_min();
        let slack = SOLVENCY_SLACK * hi.max(1.0);
        if target < lo - slack || target > hi + slack {
            return Err(Error::QuantityOutOfRange { q: target, lo, hi });
        }
        let p1 = self.aggregate.invert_quantity(target.max(lo).min(hi))?;
        self.trade_to_price(p1)
    }

    /// Profit-maximizing response to an external market price `p`:
    /// maximizes `p * (g(p0) - g(p1)) + ∫_{p0}^{p1} p dg` over `p1` in the
    /// domain. For continuous strictly decreasing aggregates the maximizer
    /// is the clamped external price; plateaus and jumps are handled by
    /// scanning breakpoints plus a refinement grid and keeping the leftmost
    /// maximizer (ties are flagged).
    pub fn arbitrage_best_response(&self, p: f64) -> Result<ArbOutcome> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::NonPositivePrice(p));
        }
        let (pmin, pmax) = (self.domain.pmin(), self.domain.pmax());
        let mut candidates = Vec::with_capacity(ARB_GRID + self.aggregate.breakpoints().len() + 2);
        candidates.push(self.domain.clamp(p));
        candidates.push(self.p0);
        candidates.extend_from_slice(self.aggregate.breakpoints());
        for i in 0..=ARB_GRID {
            candidates.push(pmin + (pmax - pmin) * i as f64 / ARB_GRID as f64);
        }
        candidates.sort_unstable_by(|a, b| a.partial_cmp(b).expect("candidates are finite"));
        candidates.dedup();

        let g0 = self.aggregate.evaluate(self.p0)?;
        let mut best_p1 = candidates[0];
        let mut best_profit = f64::NEG_INFINITY;
        let mut tied = false;
        for (i, &p1) in candidates.iter().enumerate() {
            let profit = p * (g0 - self.aggregate.evaluate(p1)?)
                - self.aggregate.stieltjes_price_integral(self.p0, p1)?;
            if i == 0 {
                best_profit = profit;
                continue;
            }
            let tie_slack = 1e-12 * best_profit.abs().max(1.0);
            if profit > best_profit + tie_slack {
                best_profit = profit;
                best_p1 = p1;
                tied = false;
            } else if profit >= best_profit - tie_slack {
                // Same profit at a later price: keep the leftmost, note it.
                tied = true;
            }
        }
        Ok(ArbOutcome { p1: best_p1, profit: best_profit, tied })
    }

    fn apply(&mut self, event: &PoolEvent) -> Result<(f64, f64)> {
        match event {
            PoolEvent::Mint { lp, curve } => self.mint(lp, curve.clone()),
            PoolEvent::Burn { lp } => {
                let (risky, numeraire) = self.burn(lp)?;
                Ok((-risky, -numeraire))
            }
            PoolEvent::TradePrice { p1 } => {
                let receipt = self.trade_to_price(*p1)?;
                Ok((-receipt.risky_to_trader, receipt.numeraire_from_trader))
            }
            PoolEvent::TradeQty { dq } => {
                let receipt = self.trade_exact_risky(*dq)?;
                Ok((-receipt.risky_to_trader, receipt.numeraire_from_trader))
            }
            PoolEvent::Arb { p } => {
                let response = self.arbitrage_best_response(*p)?;
                let receipt = self.trade_to_price(response.p1)?;
                Ok((-receipt.risky_to_trader, receipt.numeraire_from_trader))
            }
        }
    }

    /// Applies events in order, recording reserves after each and asserting
    /// solvency at every step. The first failing event aborts with its
    /// index and cause; the returned ledger always starts with an `init`
    /// row for the pre-sequence state.
    pub fn run_sequence(&mut self, events: &[PoolEvent]) -> Result<Vec<LedgerRow>> {
        let mut ledger = Vec::with_capacity(events.len() + 1);
        ledger.push(LedgerRow {
            step: 0,
            op: "init",
            p0: self.p0,
            risky_reserve: self.risky_reserve,
            numeraire_reserve: self.numeraire_reserve,
            risky_delta: 0.0,
            numeraire_delta: 0.0,
        });
        for (index, event) in events.iter().enumerate() {
            let fail = |cause: Error| Error::SequenceFailed { index, cause: Box::new(cause) };
            let (risky_delta, numeraire_delta) = self.apply(event).map_err(fail)?;
            if !self.is_solvent() {
                return Err(fail(Error::SolvencyBreach {
                    reserve: self.numeraire_reserve,
                    floor: self.solvency_floor(),
                }));
            }
            ledger.push(LedgerRow {
                step: index + 1,
                op: event.op_name(),
                p0: self.p0,
                risky_reserve: self.risky_reserve,
                numeraire_reserve: self.numeraire_reserve,
                risky_delta,
                numeraire_delta,
            });
        }
        Ok(ledger)
    }
}
