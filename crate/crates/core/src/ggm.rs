//! Gaussian graphical model cost and its half-vectorized derivatives.
//!
//! The tracked objective is `f(S) = -log det(S) + tr(S·Σ̂)` over positive
//! definite `S`. In vech coordinates its gradient is `Dᵀ vec(Σ̂ - S^{-1})`,
//! its Hessian is `Dᵀ (S ⊗ S)^{-1} D`, and the discrete time derivative of
//! the gradient is `Dᵀ vec(Σ̂_t - Σ̂_{t-1})`. The unconstrained minimizer is
//! `Σ̂^{-1}`, which doubles as the closed-form baseline; a projected-gradient
//! reference solver cross-checks it.

use crate::error::{Error, Result};
use crate::matcalc::{
    dup_transpose_apply, hessian_apply, logdet_spd, project_spd, spd_inverse, unvech, vech, SymMat,
    VechVec,
};
use crate::solver::TimeVaryingProblem;
use crate::streamcov::StreamingCovariance;
use nalgebra::DVector;

/// `-log det(S) + tr(S·Σ̂)`.
pub fn ggm_cost(s: &SymMat, sigma_hat: &SymMat) -> Result<f64> {
    Ok(-logdet_spd(s)? + s.trace_product(sigma_hat)?)
}

/// Gradient in vech coordinates: `Dᵀ vec(Σ̂ - S^{-1})`.
pub fn ggm_gradient(s: &SymMat, sigma_hat: &SymMat) -> Result<VechVec> {
    let diff = sigma_hat.sub(&spd_inverse(s)?)?;
    Ok(dup_transpose_apply(diff.as_dmatrix()))
}

/// Discrete time derivative of the gradient: `Dᵀ vec(Σ̂_t - Σ̂_{t-1})`.
pub fn ggm_time_gradient(cov: &StreamingCovariance) -> Result<VechVec> {
    if cov.count() == 0 {
        return Err(Error::State(
            "time gradient undefined before any sample is absorbed".into(),
        ));
    }
    let diff = cov.current().sub(cov.previous())?;
    Ok(dup_transpose_apply(diff.as_dmatrix()))
}

/// Hessian action `Dᵀ (S ⊗ S)^{-1} D · dir`, matrix-free.
pub fn ggm_hessian_apply(s: &SymMat, dir: &VechVec) -> Result<VechVec> {
    hessian_apply(&spd_inverse(s)?, dir)
}

/// Closed-form minimizer of the GGM cost: `Σ̂^{-1}`.
pub fn mle_closed_form(sigma_hat: &SymMat) -> Result<SymMat> {
    spd_inverse(sigma_hat)
}

/// Closed-form minimizer with a ridge fallback for ill-conditioned `Σ̂`.
/// Returns the estimate and whether the ridge was needed.
pub fn mle_with_ridge(sigma_hat: &SymMat, ridge: f64) -> Result<(SymMat, bool)> {
    match mle_closed_form(sigma_hat) {
        Ok(est) => Ok((est, false)),
        Err(Error::NotPositiveDefinite) => {
            let ridged = SymMat::lin_comb(1.0, sigma_hat, ridge, &SymMat::identity(sigma_hat.n()))?;
            Ok((mle_closed_form(&ridged)?, true))
        }
        Err(e) => Err(e),
    }
}

/// Outcome of the projected-gradient reference solver.
#[derive(Debug, Clone)]
pub struct MleSolution {
    pub estimate: SymMat,
    pub iterations: usize,
    /// False when `max_iter` was exhausted before the gradient tolerance.
    pub converged: bool,
    pub grad_norm: f64,
}

/// Projected-gradient reference solver for the GGM cost. Independent of the
/// closed form; used as a cross-check and for ill-conditioned inputs.
pub fn mle_iterative(
    sigma_hat: &SymMat,
    step: f64,
    tol: f64,
    max_iter: usize,
    eps: f64,
) -> Result<MleSolution> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("must be positive, got {step}"),
        });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let mut s = SymMat::identity(sigma_hat.n());
    let mut grad = ggm_gradient(&s, sigma_hat)?;
    let mut iterations = 0;
    while grad.norm() >= tol && iterations < max_iter {
        let stepped = s.sub(&unvech(&grad.scale(step)))?;
        s = project_spd(&stepped, eps)?;
        grad = ggm_gradient(&s, sigma_hat)?;
        iterations += 1;
    }
    let grad_norm = grad.norm();
    Ok(MleSolution {
        estimate: s,
        iterations,
        converged: grad_norm < tol,
        grad_norm,
    })
}

/// The GGM tracking problem: a streaming covariance plus the feasible-set
/// floor, wired into the prediction-correction engine's contract.
#[derive(Debug, Clone)]
pub struct GgmProblem {
    cov: StreamingCovariance,
    eps: f64,
}

impl GgmProblem {
    pub fn new(cov: StreamingCovariance, eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("must be positive, got {eps}"),
            });
        }
        Ok(GgmProblem { cov, eps })
    }

    pub fn covariance(&self) -> &StreamingCovariance {
        &self.cov
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cost(&self, s: &VechVec) -> Result<f64> {
        ggm_cost(&unvech(s), self.cov.current())
    }
}

impl TimeVaryingProblem for GgmProblem {
    type Datum = DVector<f64>;

    fn dim(&self) -> usize {
        self.cov.n()
    }

    fn gradient(&self, s: &VechVec) -> Result<VechVec> {
        ggm_gradient(&unvech(s), self.cov.current())
    }

    fn hessian_apply(&self, s: &VechVec, dir: &VechVec) -> Result<VechVec> {
        ggm_hessian_apply(&unvech(s), dir)
    }

    fn time_gradient(&self) -> Result<VechVec> {
        ggm_time_gradient(&self.cov)
    }

    fn project(&self, s: &VechVec) -> Result<VechVec> {
        Ok(vech(&project_spd(&unvech(s), self.eps)?))
    }

    fn advance(&mut self, datum: Self::Datum) -> Result<()> {
        self.cov = self.cov.update(&datum)?;
        Ok(())
    }

    // The half-vectorized prediction update carries an explicit factor 2 on
    // the stepsize; equivalent to running the generic engine at 2α.
    fn prediction_step_scale(&self) -> f64 {
        2.0
    }
}
