//! Online identification of time-varying graph topologies.
//!
//! The crate tracks the precision matrix of a Gaussian graphical model from
//! a stream of graph signals. A generic prediction-correction engine
//! ([`solver`]) extrapolates the running estimate with frozen second-order
//! information plus a discrete time-drift term, then refines it with
//! projected gradient steps once the next sample arrives. The engine is
//! specialized to the GGM cost in [`ggm`] on top of the half-vectorized
//! matrix kernels in [`matcalc`] and the forgetting-factor covariance in
//! [`streamcov`]. [`scenario`] generates piecewise-constant synthetic
//! topologies with Gaussian signals and [`harness`] runs the tracking
//! methods against the batch and instantaneous MLE baselines, reporting
//! normalized MSE trajectories.

pub mod error;
pub mod ggm;
pub mod harness;
pub mod matcalc;
pub mod scenario;
pub mod solver;
pub mod streamcov;

pub use error::{Error, Result};
pub use matcalc::{SymMat, VechVec};
