//! Finite-volume Gibbs quantities for nearest-neighbour lattice models on
//! `Z^d`, and approximation of the pressure of `Z^2` models through
//! conditional origin probabilities on half-boxes.
//!
//! ```
//! use lattice_pressure::models::potts_zero_coupling;
//! use lattice_pressure::pressure::representation_value;
//!
//! let m = potts_zero_coupling(3).unwrap();
//! let p = representation_value(&m, 2).unwrap().value;
//! assert!((p - 3f64.ln()).abs() < 1e-12);
//! ```

mod enumerate;
pub mod error;
pub mod gibbs;
pub mod interaction;
pub mod lattice;
pub mod logspace;
pub mod models;
pub mod point;
pub mod pressure;
pub mod rc;
pub mod sft;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use gibbs::FiniteDistribution;
pub use interaction::NNInteraction;
pub use lattice::{Metric, Site, Window};
pub use models::{ModelInstance, ModelKind, Regime};
pub use point::PeriodicPoint;
pub use pressure::{ConvergenceReport, EstimateMode, PressureEstimate};
pub use sft::{Configuration, ConstraintSystem, Symbol};
