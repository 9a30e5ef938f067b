//! Core library for coordinated, privacy-preserving crowd-sensing campaigns.
//!
//! Four subsystems:
//!
//! - [`protocol`]: the campaign state machine — subscriptions, key issuance,
//!   verifier election, verdicts, reward ledger, and anonymity-set-gated
//!   data release.
//! - [`storage`]: equal-size chunking, authenticated chunk encryption and a
//!   content-addressed object store (in-memory and directory backends).
//! - [`sim`]: a deterministic time-stepped agent simulation of random-walk
//!   users competing to sell sensed data to zone-bound contracts.
//! - [`metrics`]: ECDFs, satisfied ratios, reward heatmaps and parameter
//!   sweeps, with stable CSV serializations.
//!
//! All money is fixed-point [`Currency`] in milli-units, so conservation
//! checks are exact everywhere.

pub mod currency;
pub mod metrics;
pub mod protocol;
pub mod sim;
pub mod storage;

pub use currency::Currency;
