//! Experiment harness: runs the tracking solvers and the MLE baselines over
//! a scenario and reports normalized-MSE trajectories.
//!
//! Four estimators are compared. P-C is the full prediction-correction
//! tracker, C-O the same with prediction disabled, I-MLE the closed-form
//! minimizer of the forgetting-factor cost at each time step, and B-MLE the
//! batch solution per stationary segment. The harness knows the scenario's
//! segment boundaries (B-MLE is defined on them); the online methods never
//! see them.

use std::io::Write;

use crate::error::{Error, Result};
use crate::ggm::{mle_with_ridge, GgmProblem};
use crate::matcalc::{unvech, vech, SymMat, VechVec};
use crate::scenario::Scenario;
use crate::solver::{step, SolverConfig, SolverState, TimeVaryingProblem};
use crate::streamcov::StreamingCovariance;

/// Which reference solutions the harness computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct References {
    pub bmle: bool,
    pub imle: bool,
    pub truth: bool,
}

impl References {
    pub fn all() -> Self {
        References {
            bmle: true,
            imle: true,
            truth: true,
        }
    }

    pub fn truth_only() -> Self {
        References {
            bmle: false,
            imle: false,
            truth: true,
        }
    }
}

/// How the solvers' starting estimate is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialEstimate {
    /// The identity matrix.
    Identity,
    /// `factor·(n / ‖x_1‖²)·I`: an identity matched to the scale of the
    /// generating precision, read off the first signal. A factor below 1
    /// biases the start low, where the log-det barrier makes recovery fast;
    /// factors above 1 start high, useful when early covariances are rank
    /// deficient and the transient should dominate the start.
    ScaledIdentity { factor: f64 },
}

impl InitialEstimate {
    /// The default data-matched start used by the reference experiments.
    pub fn scaled() -> Self {
        InitialEstimate::ScaledIdentity { factor: 0.5 }
    }
}

/// Full parameter set for one experiment run.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub solver: SolverConfig,
    /// Forgetting factor of the streaming covariance.
    pub gamma: f64,
    /// Eigenvalue floor of the feasible set.
    pub eps: f64,
    /// Ridge installed at the first covariance sample.
    pub init_ridge: f64,
    /// Ridge for ill-conditioned MLE inversions.
    pub mle_ridge: f64,
    pub references: References,
    pub initial: InitialEstimate,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            solver: SolverConfig::default(),
            gamma: 0.97,
            eps: 1e-8,
            init_ridge: 1e-6,
            mle_ridge: 1e-8,
            references: References {
                bmle: true,
                imle: true,
                truth: false,
            },
            initial: InitialEstimate::scaled(),
        }
    }
}

/// Per-time-step NMSE values; `None` when the reference is disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// 1-based time index.
    pub t: usize,
    pub nmse_pc_bmle: Option<f64>,
    pub nmse_co_bmle: Option<f64>,
    pub nmse_imle_bmle: Option<f64>,
    pub nmse_pc_imle: Option<f64>,
    pub nmse_co_imle: Option<f64>,
    pub nmse_pc_truth: Option<f64>,
    pub nmse_co_truth: Option<f64>,
}

impl MetricsRecord {
    pub fn values(&self) -> [Option<f64>; 7] {
        [
            self.nmse_pc_bmle,
            self.nmse_co_bmle,
            self.nmse_imle_bmle,
            self.nmse_pc_imle,
            self.nmse_co_imle,
            self.nmse_pc_truth,
            self.nmse_co_truth,
        ]
    }
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<MetricsRecord>,
    /// Smallest eigenvalue seen across the periodic feasibility spot checks
    /// of both online estimates (infinity when nothing was checked).
    pub min_spot_lambda: f64,
    /// How many I-MLE/B-MLE inversions needed the ridge fallback.
    pub ridge_events: usize,
}

/// Squared Frobenius distance to the reference, normalized by the
/// reference's squared norm.
pub fn nmse(estimate: &SymMat, reference: &SymMat) -> Result<f64> {
    if estimate.n() != reference.n() {
        return Err(Error::DimensionMismatch {
            expected: reference.n(),
            actual: estimate.n(),
        });
    }
    let denom = reference.frob_norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = estimate.sub(reference)?.frob_norm();
    Ok((num / denom).powi(2))
}

/// Batch MLE per stationary segment: unweighted segment covariance inverted
/// in closed form, with the ridge fallback. Returns one matrix per segment
/// plus the number of ridge events.
pub fn compute_bmle(scenario: &Scenario, mle_ridge: f64) -> Result<(Vec<SymMat>, usize)> {
    let mut out = Vec::with_capacity(scenario.num_segments());
    let mut ridge_events = 0;
    for k in 0..scenario.num_segments() {
        let (start, end) = scenario.segment_bounds(k);
        if start >= end {
            return Err(Error::EmptyInput("segment has no signals"));
        }
        let cov = crate::streamcov::batch_covariance(&scenario.signals[start..end])?;
        let (est, ridged) = mle_with_ridge(&cov, mle_ridge)?;
        if ridged {
            ridge_events += 1;
        }
        out.push(est);
    }
    Ok((out, ridge_events))
}

/// Instantaneous MLE from the current forgetting-factor covariance.
pub fn compute_imle(cov: &StreamingCovariance, mle_ridge: f64) -> Result<(SymMat, bool)> {
    if cov.count() == 0 {
        return Err(Error::State("no samples absorbed".into()));
    }
    mle_with_ridge(cov.current(), mle_ridge)
}

// Feasibility spot-check cadence.
const SPOT_CHECK_EVERY: usize = 25;

/// Streams the scenario once, advancing the P-C and C-O solvers in lockstep
/// and recording the selected NMSE values after every absorbed sample.
///
/// Both solvers start from the identity matrix. Record `t` (1-based) refers
/// to the state after absorbing signal `t`; the first record holds the
/// projected initial estimate, corrected zero times.
pub fn run_experiment(scenario: &Scenario, params: &RunParams) -> Result<ExperimentResult> {
    params.solver.validate()?;
    if scenario.is_empty() {
        return Ok(ExperimentResult {
            records: Vec::new(),
            min_spot_lambda: f64::INFINITY,
            ridge_events: 0,
        });
    }
    let n = scenario.n();
    let refs = params.references;

    let (bmles, mut ridge_events) = if refs.bmle {
        compute_bmle(scenario, params.mle_ridge)?
    } else {
        (Vec::new(), 0)
    };

    let fresh_problem = || -> Result<GgmProblem> {
        let cov = StreamingCovariance::with_init_ridge(n, params.gamma, params.init_ridge)?;
        GgmProblem::new(cov, params.eps)
    };
    let mut pc_problem = fresh_problem()?;
    let mut co_problem = fresh_problem()?;
    let co_cfg = params.solver.correction_only();

    let init_scale = match params.initial {
        InitialEstimate::Identity => 1.0,
        InitialEstimate::ScaledIdentity { factor } => {
            let norm_sq = scenario.signals[0].norm_squared();
            if norm_sq > 0.0 {
                (factor * n as f64 / norm_sq).clamp(params.eps, 1e9)
            } else {
                1.0
            }
        }
    };
    let initial = vech(&SymMat::identity(n).scale(init_scale));
    let mut pc_state = SolverState::initialize(&pc_problem, &initial)?;
    let mut co_state = SolverState::initialize(&co_problem, &initial)?;

    // Absorb the first signal to put the problems at time 1; the first
    // record carries the untouched initial estimates.
    pc_problem.advance(scenario.signals[0].clone())?;
    co_problem.advance(scenario.signals[0].clone())?;
    pc_state.t = 1;
    co_state.t = 1;

    let mut records = Vec::with_capacity(scenario.len());
    let mut min_spot_lambda = f64::INFINITY;

    let emit = |t: usize,
                pc: &VechVec,
                co: &VechVec,
                pc_problem: &GgmProblem,
                ridge_events: &mut usize,
                min_spot_lambda: &mut f64|
     -> Result<MetricsRecord> {
        let pc_mat = unvech(pc);
        let co_mat = unvech(co);
        let imle = if refs.imle || refs.bmle {
            let (est, ridged) = compute_imle(pc_problem.covariance(), params.mle_ridge)?;
            if ridged {
                *ridge_events += 1;
            }
            Some(est)
        } else {
            None
        };
        let bmle = if refs.bmle {
            Some(&bmles[scenario.segment_index(t - 1)])
        } else {
            None
        };
        let truth = if refs.truth {
            Some(scenario.truth_at(t - 1))
        } else {
            None
        };
        if t.is_multiple_of(SPOT_CHECK_EVERY) {
            let lambda = pc_mat.min_eigenvalue()?.min(co_mat.min_eigenvalue()?);
            *min_spot_lambda = min_spot_lambda.min(lambda);
        }
        Ok(MetricsRecord {
            t,
            nmse_pc_bmle: bmle.map(|b| nmse(&pc_mat, b)).transpose()?,
            nmse_co_bmle: bmle.map(|b| nmse(&co_mat, b)).transpose()?,
            nmse_imle_bmle: match (&imle, bmle) {
                (Some(i), Some(b)) => Some(nmse(i, b)?),
                _ => None,
            },
            nmse_pc_imle: if refs.imle {
                imle.as_ref().map(|i| nmse(&pc_mat, i)).transpose()?
            } else {
                None
            },
            nmse_co_imle: if refs.imle {
                imle.as_ref().map(|i| nmse(&co_mat, i)).transpose()?
            } else {
                None
            },
            nmse_pc_truth: truth.map(|s| nmse(&pc_mat, s)).transpose()?,
            nmse_co_truth: truth.map(|s| nmse(&co_mat, s)).transpose()?,
        })
    };

    records.push(emit(
        1,
        &pc_state.estimate,
        &co_state.estimate,
        &pc_problem,
        &mut ridge_events,
        &mut min_spot_lambda,
    )?);

    for t in 2..=scenario.len() {
        let x = scenario.signals[t - 1].clone();
        pc_state = step(&pc_state, &mut pc_problem, x.clone(), &params.solver)?;
        co_state = step(&co_state, &mut co_problem, x, &co_cfg)?;
        records.push(emit(
            t,
            &pc_state.estimate,
            &co_state.estimate,
            &pc_problem,
            &mut ridge_events,
            &mut min_spot_lambda,
        )?);
    }

    Ok(ExperimentResult {
        records,
        min_spot_lambda,
        ridge_events,
    })
}

/// The CSV column order, fixed across every writer.
pub const CSV_HEADER: &str =
    "seed,t,nmse_pc_bmle,nmse_co_bmle,nmse_imle_bmle,nmse_pc_imle,nmse_co_imle,nmse_pc_truth,nmse_co_truth";

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one run's records as CSV, one row per time step.
pub fn write_records_csv<W: Write>(
    w: &mut W,
    seed: u64,
    records: &[MetricsRecord],
) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let cells: Vec<String> = r.values().iter().map(|v| cell(*v)).collect();
        writeln!(w, "{seed},{},{}", r.t, cells.join(","))?;
    }
    Ok(())
}

/// Per-time-step mean and median across seeds for each metric column;
/// plot-ready.
pub fn write_aggregate_csv<W: Write>(
    w: &mut W,
    runs: &[(u64, &[MetricsRecord])],
) -> std::io::Result<()> {
    const NAMES: [&str; 7] = [
        "nmse_pc_bmle",
        "nmse_co_bmle",
        "nmse_imle_bmle",
        "nmse_pc_imle",
        "nmse_co_imle",
        "nmse_pc_truth",
        "nmse_co_truth",
    ];
    let mut header = vec!["t".to_string()];
    for name in NAMES {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_median"));
    }
    writeln!(w, "{}", header.join(","))?;
    let horizon = runs.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
    for idx in 0..horizon {
        let mut row = vec![(idx + 1).to_string()];
        for col in 0..NAMES.len() {
            let mut vals: Vec<f64> = runs
                .iter()
                .filter_map(|(_, records)| records.get(idx).and_then(|r| r.values()[col]))
                .collect();
            if vals.is_empty() {
                row.push(String::new());
                row.push(String::new());
            } else {
                vals.sort_by(|a, b| a.total_cmp(b));
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let median = if vals.len() % 2 == 1 {
                    vals[vals.len() / 2]
                } else {
                    0.5 * (vals[vals.len() / 2 - 1] + vals[vals.len() / 2])
                };
                row.push(mean.to_string());
                row.push(median.to_string());
            }
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Mean of one metric over the second half of every stationary segment --
/// the steady-state window used for method comparisons.
pub fn steady_state_mean<F: Fn(&MetricsRecord) -> Option<f64>>(
    scenario: &Scenario,
    records: &[MetricsRecord],
    metric: F,
) -> Option<f64> {
    let mut vals = Vec::new();
    for k in 0..scenario.num_segments() {
        let (start, end) = scenario.segment_bounds(k);
        if start >= end {
            continue;
        }
        let half = start + (end - start) / 2;
        for r in records {
            // Record t is 1-based; segment bounds are 0-based signal slots.
            let slot = r.t - 1;
            if slot >= half && slot < end {
                if let Some(v) = metric(r) {
                    vals.push(v);
                }
            }
        }
    }
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}
