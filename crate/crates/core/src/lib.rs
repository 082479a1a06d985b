//! Simulation and analysis of a concatenated code for DNA storage with short
//! molecules and a noisy, symmetric sequencing channel.
//!
//! * [`channel`]: discrete memoryless channels over Z_q and their symmetry.
//! * [`exponents`]: erasure exponent, maximal rate and related bounds.
//! * [`inner_code`]: random linear codes with zero-undetected-error decoding.
//! * [`outer_code`]: Dirichlet-quantised histogram codebooks and KL decoding.
//! * [`pipeline`]: the storage/sampling/sequencing/decoding loop.
//! * [`config`], [`report`] and [`commands`]: file formats and analyses used
//!   by the command-line tool.
//! * [`selfcheck`]: a fast suite of invariant checks.
//!
//! Rates and exponents are in nats throughout.

// `!(x > 0.0)` is the idiom used to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod commands;
pub mod config;
pub mod error;
pub mod exponents;
pub mod inner_code;
pub mod outer_code;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod selfcheck;
pub mod stats;

pub use channel::{Channel, SymmetryWitness};
pub use error::{Error, Result};
pub use exponents::{ExponentCurve, ExponentOptions, ExponentPoint};
pub use inner_code::{LinearCode, ZueOutcome};
pub use outer_code::{OuterCodebook, OuterCodeword, SimplexPoint};
pub use pipeline::{Experiment, SimulationConfig, SimulationReport, TrialRecord};
pub use rng::SeedTree;
