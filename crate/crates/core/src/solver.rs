//! Generic prediction-correction tracking engine.
//!
//! Each time step first extrapolates the current estimate with a few
//! projected-gradient steps on a second-order model of the next cost (all
//! derivatives frozen at the current estimate and time, plus a discrete
//! time-drift term), then absorbs the newly arrived datum and refines with
//! projected-gradient steps on the revealed cost, re-evaluating the gradient
//! at every inner iterate.
//!
//! The engine is parameterized over a problem contract so costs other than
//! the Gaussian graphical model can plug in.

use crate::error::{Error, Phase, Result};
use crate::matcalc::VechVec;

/// Capabilities a time-varying problem must expose to the engine.
///
/// `gradient`, `hessian_apply` and `time_gradient` are evaluated at the
/// problem's current absorbed time; `advance` shifts that time forward by
/// absorbing the next datum. `project` must be idempotent.
pub trait TimeVaryingProblem {
    type Datum;

    /// Node count; estimates live in vech space of this order.
    fn dim(&self) -> usize;

    fn gradient(&self, s: &VechVec) -> Result<VechVec>;

    fn hessian_apply(&self, s: &VechVec, dir: &VechVec) -> Result<VechVec>;

    fn time_gradient(&self) -> Result<VechVec>;

    fn project(&self, s: &VechVec) -> Result<VechVec>;

    fn advance(&mut self, datum: Self::Datum) -> Result<()>;

    /// Multiplier applied to the prediction stepsize. The generic engine
    /// uses plain `alpha`; problems whose printed update carries an extra
    /// constant (the GGM form uses `2α`) override this.
    fn prediction_step_scale(&self) -> f64 {
        1.0
    }
}

/// Iteration budget and stepsizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Prediction steps per time step (`P`).
    pub prediction_steps: usize,
    /// Correction steps per time step (`C`).
    pub correction_steps: usize,
    /// Prediction stepsize (`α`).
    pub alpha: f64,
    /// Correction stepsize (`β`).
    pub beta: f64,
    /// Sampling period multiplying the time-gradient term.
    pub h: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be positive, got {}", self.alpha),
            });
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("must be positive, got {}", self.beta),
            });
        }
        if !self.h.is_finite() || self.h <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!("must be positive, got {}", self.h),
            });
        }
        Ok(())
    }

    /// The same configuration with the prediction phase disabled.
    pub fn correction_only(mut self) -> Self {
        self.prediction_steps = 0;
        self
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            prediction_steps: 1,
            correction_steps: 1,
            alpha: 1e-3,
            beta: 1e-3,
            h: 1.0,
        }
    }
}

/// Current estimate in vech form plus the number of completed time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub estimate: VechVec,
    pub t: usize,
}

impl SolverState {
    /// Starts from an initial guess, projected onto the feasible set so the
    /// state invariant holds from the outset.
    pub fn initialize<P: TimeVaryingProblem>(problem: &P, initial: &VechVec) -> Result<Self> {
        Ok(SolverState {
            estimate: problem.project(initial)?,
            t: 0,
        })
    }
}

/// Prediction phase: `P` projected steps on the frozen second-order model,
/// `ŝ^{p+1} = P[ŝ^p - scale·α·(h_t + H_t(ŝ^p - ŝ_t) + h·g_t)]`, with
/// `h_t`, `H_t`, `g_t` all evaluated once at the current estimate.
pub fn predict<P: TimeVaryingProblem>(
    state: &SolverState,
    problem: &P,
    cfg: &SolverConfig,
) -> Result<VechVec> {
    cfg.validate()?;
    if cfg.prediction_steps == 0 {
        return Ok(state.estimate.clone());
    }
    let anchor = &state.estimate;
    let grad = problem.gradient(anchor)?;
    let drift = problem.time_gradient()?;
    // h_t + h·g_t is constant across the inner iterations.
    let constant = grad.axpy(cfg.h, &drift)?;
    let step = cfg.alpha * problem.prediction_step_scale();
    let mut s = anchor.clone();
    for p in 0..cfg.prediction_steps {
        let curvature = problem.hessian_apply(anchor, &s.sub(anchor)?)?;
        let direction = constant.axpy(1.0, &curvature)?;
        let candidate = s.axpy(-step, &direction)?;
        if !candidate.is_finite() {
            return Err(Error::Divergence {
                t: state.t,
                phase: Phase::Prediction,
                inner_step: p,
            });
        }
        s = problem.project(&candidate)?;
    }
    Ok(s)
}

/// Correction phase: `C` projected gradient steps on the newly revealed
/// cost, the gradient re-evaluated at every inner iterate.
pub fn correct<P: TimeVaryingProblem>(
    s_pred: &VechVec,
    problem: &P,
    cfg: &SolverConfig,
    t: usize,
) -> Result<VechVec> {
    cfg.validate()?;
    let mut s = s_pred.clone();
    for c in 0..cfg.correction_steps {
        let grad = problem.gradient(&s)?;
        let candidate = s.axpy(-cfg.beta, &grad)?;
        if !candidate.is_finite() {
            return Err(Error::Divergence {
                t,
                phase: Phase::Correction,
                inner_step: c,
            });
        }
        s = problem.project(&candidate)?;
    }
    Ok(s)
}

/// One full time step: predict with the data absorbed so far, absorb the new
/// datum, then correct on the revealed cost.
pub fn step<P: TimeVaryingProblem>(
    state: &SolverState,
    problem: &mut P,
    new_datum: P::Datum,
    cfg: &SolverConfig,
) -> Result<SolverState> {
    let s_pred = predict(state, problem, cfg)?;
    problem.advance(new_datum)?;
    let estimate = correct(&s_pred, problem, cfg, state.t)?;
    Ok(SolverState {
        estimate,
        t: state.t + 1,
    })
}

/// Runs [`step`] over a whole data stream, returning the estimate after each
/// absorbed datum.
pub fn run_stream<P, I>(
    problem: &mut P,
    cfg: &SolverConfig,
    initial: &VechVec,
    data: I,
) -> Result<Vec<VechVec>>
where
    P: TimeVaryingProblem,
    I: IntoIterator<Item = P::Datum>,
{
    let mut state = SolverState::initialize(problem, initial)?;
    let mut trajectory = Vec::new();
    for datum in data {
        state = step(&state, problem, datum, cfg)?;
        trajectory.push(state.estimate.clone());
    }
    Ok(trajectory)
}

/// Correction-only baseline: identical to [`run_stream`] with the prediction
/// phase forced off.
pub fn run_correction_only<P, I>(
    problem: &mut P,
    cfg: &SolverConfig,
    initial: &VechVec,
    data: I,
) -> Result<Vec<VechVec>>
where
    P: TimeVaryingProblem,
    I: IntoIterator<Item = P::Datum>,
{
    run_stream(problem, &cfg.correction_only(), initial, data)
}
