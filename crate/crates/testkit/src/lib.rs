//! Independent reference implementations and synthetic data generators used
//! by the test suites. Everything here is written against raw slices with
//! plain scalar loops, on purpose: these oracles must not share code with
//! the library they check.

// Index-style loops are the point of the reference implementations.
#![allow(clippy::needless_range_loop)]

pub mod linalg;
pub mod phog_oracle;
pub mod qp_oracle;
pub mod synth;
