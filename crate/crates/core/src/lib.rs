//! Core engine for a demand-curve exchange between a risky asset and a
//! numéraire.
//!
//! Liquidity providers submit non-increasing demand curves `g(p)` (the
//! quantity of risky asset they want to hold at each price). The exchange
//! aggregates those curves, quotes trades against the aggregate, and stays
//! solvent by construction. Mechanism families (CPMM, limit order book,
//! Uniswap-v3-style interval curves) are represented as generating sets of
//! a convex cone; the [`approx`] module measures how well a given cone can
//! approximate arbitrary bounded demand curves in weighted Lp distance.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All operations are pure and deterministic.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod approx;
pub mod curve;
pub mod engine;
mod error;
pub mod measure;
pub mod mechanism;
pub(crate) mod quadrature;

pub use curve::{DemandCurve, PriceDomain, SegmentKind};
pub use error::{Error, Result};
pub use measure::WeightFunction;
pub use mechanism::{Basis, BasisKind, ConeCoefficients};
