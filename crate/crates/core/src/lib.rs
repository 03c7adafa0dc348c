//! certikit: quantum state certification toolkit.
//!
//! A library for estimating spectral statistics of unknown quantum states
//! from few copies, and for turning those estimators into certification
//! testers with explicit, pinned constants:
//!
//! - [`states`]: density matrices, classical distributions, and the
//!   distance/divergence zoo (trace, Hilbert-Schmidt, fidelity/Bures,
//!   Bures chi-squared), plus state generators and the depolarizing channel.
//! - [`symalg`]: the symmetric-group class algebra behind the estimators —
//!   exact rational structure constants by enumeration, expectations via
//!   power sums and trace monomials, and closed-form variance formulas.
//! - [`densesim`]: the brute-force oracle — permutation representations and
//!   observables as dense matrices, exact outcome distributions, isotypic
//!   projectors, characters, and sequential projective measurement.
//! - [`schurweyl`]: scalable classical simulation of the measurements via
//!   insertion-tableau sampling, the exact shape law, the character-ratio
//!   statistic, and the tableau-basis estimators.
//! - [`chisq`]: the chi-squared observable machinery for a fixed full-rank
//!   reference state: bilinear/trilinear contractions, exact mean and
//!   variance, and the well-conditioned variance bound.
//! - [`certify`]: sample-size planning from variance envelopes, the
//!   threshold decision rule, and the certification testers wired to the
//!   sampling or analytic backends.
//! - [`verify`]: the runnable identity/invariant suites behind the CLI.

pub mod certify;
pub mod chisq;
pub mod config;
pub mod harness;
pub mod linalg;
pub mod partition;
pub mod rng;
pub mod schurweyl;
pub mod states;
pub mod densesim;
pub mod symalg;

pub mod verify;

pub use config::{Caps, Tolerances};
pub use partition::Partition;
pub use states::{ClassicalDistribution, DensityMatrix, Spectrum, StateError, StateSpec};
