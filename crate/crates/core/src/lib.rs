//! Capillary water absorption in porous mortars: a 1-D nonlinear diffusion
//! solver, two absorption-function families, simulated-annealing
//! calibration against imbibition data, and retention-curve validation
//! against mercury-intrusion porosimetry.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod domain;
pub mod error;
pub mod io;
pub mod models;
pub mod numerics;
pub mod retention;
pub mod solver;

pub use domain::{ExperimentSetup, ImbibitionDataset, MaterialSpec, MipDataset};
pub use error::{Error, Result};
pub use models::{AbsorptionModel, CubicParams, KpModel, KpParams, ModelRegistry};
