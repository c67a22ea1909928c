//! Split-step Fourier propagation of ultra-short pulses in optical fibers.
//!
//! The linear part (loss, dispersion, group-velocity mismatch) is applied
//! spectrally. The nonlinear part (Kerr effect, self-steepening, Raman
//! term) is rewritten in intensity/phase variables and integrated with
//! upwind or MUSCL finite differences, substepped to respect the CFL bound.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchmarks;
pub mod config;
pub mod error;
pub mod grid;
pub mod linear_op;
pub mod nonlinear_single;
pub mod nonlinear_twomode;
pub mod propagator;
pub mod units;

pub use config::{parse_config, RunSpec};
pub use error::{Error, Result};
pub use grid::{gaussian_pulse, ComplexEnvelope, FiberParams, PolarState, SimGrid, TwoModeParams};
pub use nonlinear_single::{NonlinearStepParams, Scheme};
pub use propagator::{propagate, propagate_two_mode, DispersionMap, SimConfig, TwoModeFiber};
