//! Independent checks for small instances: threshold formulas, a literal
//! stability evaluator, exhaustive enumeration of stable states, and the
//! claim verifiers built on them.

pub mod brute;
pub mod claims;
pub mod enumerate;
pub mod thresholds;

pub use claims::{check_proposition, check_subset_relation, Claim, Scenario, Verdict, VerificationReport};
pub use enumerate::{enumerate_stable_states, stable_families, StableFamily, StableState, MAX_ENUMERATION_AGENTS};
pub use thresholds::{belief_thresholds, Threshold, Thresholds};
