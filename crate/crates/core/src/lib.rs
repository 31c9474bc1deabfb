//! Anonymous item pricing for Bayesian combinatorial auctions.
//!
//! Given a finite-support product prior over buyer valuations, this crate
//! computes per-item posted prices from the expected per-item welfare
//! contributions of a black-box allocation algorithm, and simulates the
//! sequential posted-price market those prices induce under any arrival
//! order, including worst-case static and adaptive adversaries.
//!
//! Every routine is generic over a [`Scalar`]: [`Exact`] (arbitrary
//! precision rationals) for zero-tolerance verification, or `f64` for large
//! Monte-Carlo sweeps.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use pricemech_core::market::expected_welfare;
//! use pricemech_core::pricing::xos_prices_exact;
//! use pricemech_core::{ArrivalPolicy, EvalMode, Exact, Prior, Scalar, TieBreak, Valuation, WelfareAlgorithm};
//!
//! let q = |n, d| Exact::from_ratio(n, d);
//! let a = Valuation::xos(2, vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]])?;
//! let b = Valuation::additive(vec![q(1, 2), q(1, 2)])?;
//! let prior = Prior::deterministic(vec![a, b])?;
//! let prices = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce)?;
//! assert_eq!(prices.as_slice(), &[q(1, 2), q(1, 4)]);
//! let worst = expected_welfare(
//!     &prior,
//!     &prices,
//!     &ArrivalPolicy::WorstCaseStatic,
//!     EvalMode::Exact,
//!     TieBreak::Canonical,
//! )?;
//! assert_eq!(worst.welfare, q(1, 1));
//! # Ok::<(), pricemech_core::Error>(())
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod allocation;
pub mod bayes;
mod error;
pub mod items;
pub mod market;
pub mod pricing;
pub mod rng;
pub mod scalar;
pub mod valuation;

pub use allocation::{Allocation, WelfareAlgorithm};
pub use bayes::{BuyerPrior, Prior, ProfileDraw};
pub use error::{Error, Result};
pub use items::ItemSet;
pub use market::{ArrivalPolicy, EvalMode, MarketOutcome, TieBreak, WelfareEstimate};
pub use pricing::{PriceFamily, PriceVector, PricingConfig, PricingMode};
pub use scalar::{Exact, Scalar};
pub use valuation::{AdditiveClause, Hypergraph, Valuation};
