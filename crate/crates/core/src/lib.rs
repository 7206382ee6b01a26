//! Linear-optics Bell-state analysis: multi-photon interference through
//! passive unitaries, outcome partitions, distinguishability criteria and
//! class-count search.

pub mod bell;
pub mod criteria;
pub mod detection;
pub mod error;
pub mod fock;
pub mod hyper;
pub mod linalg;
pub mod optics;
pub mod permanent;
pub mod scenarios;
pub mod search;

pub use error::{Error, Result};
pub use fock::{ClickPattern, Distribution, FockState, ModeIndex, StateVector, Statistics};
pub use linalg::{CMatrix, Unitary};
