//! Tilted empirical risk over finite instances: risk functionals, one
//! closed-form evaluator per generalization-bound family with validity
//! reporting, exact information measures by dataset enumeration, tilted
//! Gibbs posteriors, and a deterministic Monte Carlo harness that verifies
//! the bounds empirically.
//!
//! Everything operates on finite data alphabets and finite hypothesis
//! spaces, so population quantities are computed exactly rather than
//! estimated; the harness's only randomness is dataset sampling, driven by
//! splittable counter-based streams for reproducibility at any thread count.

pub mod bounds;
pub mod error;
pub mod fmt;
pub mod gibbs;
pub mod harness;
pub mod info;
pub mod risk;
pub mod spaces;

pub use error::{Result, RiskError};
pub use risk::{Dataset, DiscreteDistribution, LossTable, MomentBounds, Tilt, TiltRegime};
pub use spaces::{Instance, Seed};
