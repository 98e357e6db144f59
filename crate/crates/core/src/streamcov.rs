//! Streaming covariance estimation.
//!
//! Maintains the exponentially weighted sample covariance
//! `Σ̂_t = γ·Σ̂_{t-1} + (1-γ)·x_t x_tᵀ` together with its one-step history,
//! which the time-gradient of the tracking problem needs. Signals are treated
//! as zero mean; no mean subtraction is performed, so the estimator is only
//! appropriate for centered data.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcalc::SymMat;

/// Ridge added to the covariance at the first absorbed sample so that early
/// inverses stay defined.
pub const DEFAULT_INIT_RIDGE: f64 = 1e-6;

/// Exponentially weighted covariance state.
///
/// Updates are functional: [`StreamingCovariance::update`] returns the next
/// state and leaves the receiver untouched, so a state can be shared or
/// snapshotted freely.
#[derive(Debug, Clone)]
pub struct StreamingCovariance {
    n: usize,
    gamma: f64,
    init_ridge: f64,
    current: SymMat,
    previous: SymMat,
    count: u64,
}

impl StreamingCovariance {
    /// Fresh state with no absorbed samples and the default first-sample ridge.
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        Self::with_init_ridge(n, gamma, DEFAULT_INIT_RIDGE)
    }

    /// Fresh state with an explicit first-sample ridge (`0` disables it).
    pub fn with_init_ridge(n: usize, gamma: f64, init_ridge: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("forgetting factor must lie strictly in (0,1), got {gamma}"),
            });
        }
        if !(init_ridge.is_finite() && init_ridge >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "init_ridge",
                reason: format!("must be nonnegative, got {init_ridge}"),
            });
        }
        Ok(StreamingCovariance {
            n,
            gamma,
            init_ridge,
            current: SymMat::zeros(n),
            previous: SymMat::zeros(n),
            count: 0,
        })
    }

    /// Rebuilds a state from explicit parts (for replay or frozen-stream
    /// setups).
    pub fn from_parts(gamma: f64, current: SymMat, previous: SymMat, count: u64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 || gamma >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("forgetting factor must lie strictly in (0,1), got {gamma}"),
            });
        }
        if current.n() != previous.n() {
            return Err(Error::DimensionMismatch {
                expected: current.n(),
                actual: previous.n(),
            });
        }
        Ok(StreamingCovariance {
            n: current.n(),
            gamma,
            init_ridge: DEFAULT_INIT_RIDGE,
            current,
            previous,
            count,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `Σ̂_t`.
    pub fn current(&self) -> &SymMat {
        &self.current
    }

    /// `Σ̂_{t-1}`, the value of `current` before the latest update.
    pub fn previous(&self) -> &SymMat {
        &self.previous
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Absorbs one sample and returns the next state.
    ///
    /// The first absorbed sample also installs the initialization ridge:
    /// `current = (1-γ)·x xᵀ + δ·I` with `previous = δ·I`.
    pub fn update(&self, x: &DVector<f64>) -> Result<Self> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let outer = SymMat::outer(x);
        let (previous, current) = if self.count == 0 {
            let ridge = SymMat::identity(self.n).scale(self.init_ridge);
            let first = SymMat::lin_comb(1.0 - self.gamma, &outer, 1.0, &ridge)?;
            (ridge, first)
        } else {
            let next = SymMat::lin_comb(self.gamma, &self.current, 1.0 - self.gamma, &outer)?;
            (self.current.clone(), next)
        };
        Ok(StreamingCovariance {
            n: self.n,
            gamma: self.gamma,
            init_ridge: self.init_ridge,
            current,
            previous,
            count: self.count + 1,
        })
    }
}

/// Plain unweighted sample covariance `(1/T)·Σ_t x_t x_tᵀ` (zero-mean
/// convention), used by the batch baseline over stationary segments.
pub fn batch_covariance(signals: &[DVector<f64>]) -> Result<SymMat> {
    let first = signals.first().ok_or(Error::EmptyInput(
        "batch_covariance needs at least one signal",
    ))?;
    let n = first.len();
    let mut acc = SymMat::zeros(n);
    for x in signals {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x.len(),
            });
        }
        acc = SymMat::lin_comb(1.0, &acc, 1.0, &SymMat::outer(x))?;
    }
    Ok(acc.scale(1.0 / signals.len() as f64))
}
