//! Information geometry of classical and quantum states: Fisher–Rao and
//! monotone Riemannian metrics, operator means, Bures–Uhlmann geometry,
//! optimal measurements and the geodesic billiard.

pub mod assignment;
pub mod billiard;
pub mod bures;
pub mod classical;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod means;
pub mod measurement;
pub mod metrics;
pub mod par;
pub mod rng;
pub mod sampling;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, HermitianMatrix, C64};
pub use state::{DensityMatrix, TangentPerturbation};
