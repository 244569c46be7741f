//! Lyapunov exponents of linear(ized) renewal equations.
//!
//! The evolution family of a renewal equation is discretized window by
//! window with pseudospectral collocation: the state on `[-tau, 0]` lives on
//! Chebyshev extrema, the unknown over one step `[0, h]` on Chebyshev zeros,
//! and `h = tau`. The resulting sequence of dense matrices is fed to a
//! discrete QR iteration whose time-averaged log-diagonals estimate the
//! exponents.
//!
//! The crate is `no_std` (with `alloc`); file formats, configuration and
//! the command line live in the `relyap` companion crate.
//!
//! ```
//! use relyap_core::{pipeline::{lyapunov_exponents, RunParams}};
//!
//! let params = RunParams { gamma: 0.5, m: 8, n: 8, t_f: 60.0, ..RunParams::default() };
//! let est = lyapunov_exponents(&params).unwrap();
//! assert!(est.sorted()[0] < 0.0);
//! ```
#![no_std]

extern crate alloc;

pub mod dqr;
mod error;
pub mod evolution;
pub mod ivp;
pub mod mesh;
pub mod model;
pub mod pipeline;
pub mod spectral;

pub use error::{Error, Result};
pub use nalgebra::DMatrix;
