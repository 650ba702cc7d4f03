//! Generalized Zeckendorf numeration and leading-block statistics.
//!
//! Builds periodic Zeckendorf collections from a principal block, expands
//! integers greedily, and computes Benford-type leading-block probabilities
//! together with empirical checks against integer sequences.

pub mod blocks;
pub mod continuation;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod fixed;
pub mod numeration;
pub mod spectral;

pub use blocks::{BlockFamily, Classifier, LeadingBlock};
pub use error::{Error, Result};
pub use exec::Execution;
pub use numeration::{is_valid, CoefficientFunction, NumerationSystem, PrincipalBlock};
pub use spectral::DominantRoot;
