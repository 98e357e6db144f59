//! The `generate`, `run` and `sweep` commands.

use std::fs;
use std::path::{Path, PathBuf};

use topotrack_core::harness::{
    run_experiment, steady_state_mean, write_aggregate_csv, write_records_csv, MetricsRecord,
};
use topotrack_core::scenario::{build_scenario, read_scenario, write_scenario, Scenario};

use crate::config::RunConfig;
use crate::CliError;

/// Writes atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let io = |e: std::io::Error| CliError::io(format!("writing {}: {e}", path.display()));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))
}

fn map_core(e: topotrack_core::Error) -> CliError {
    match e {
        topotrack_core::Error::Divergence { .. } => CliError::divergence(e.to_string()),
        topotrack_core::Error::Io(inner) => CliError::io(inner.to_string()),
        other => CliError::config(other.to_string()),
    }
}

pub fn cmd_generate(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let scenario_cfg = config.scenario.to_config(config.scenario.seed);
    let scenario = build_scenario(&scenario_cfg).map_err(map_core)?;
    let mut buf = Vec::new();
    write_scenario(&scenario, &mut buf)
        .map_err(|e| CliError::io(format!("serializing scenario: {e}")))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    write_atomic(out, &buf)?;

    let spd_ok = scenario
        .truths
        .iter()
        .filter(|t| t.as_dmatrix().clone().cholesky().is_some())
        .count();
    let times: Vec<String> = scenario
        .change_times
        .iter()
        .map(|t| t.to_string())
        .collect();
    println!("command=generate");
    println!("out={}", out.display());
    println!("seed={}", scenario_cfg.seed);
    println!("change_times={}", times.join(","));
    println!("truths={}", scenario.truths.len());
    println!("spd_ok={}/{}", spd_ok, scenario.truths.len());
    println!("signals={}", scenario.signals.len());
    println!("status=ok");
    Ok(())
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::io(format!("opening {}: {e}", path.display())))?;
    read_scenario(&mut std::io::BufReader::new(file)).map_err(map_core)
}

struct SeedRun {
    seed: u64,
    records: Vec<MetricsRecord>,
    scenario: Scenario,
    min_spot_lambda: f64,
    ridge_events: usize,
}

fn execute_runs(
    config: &RunConfig,
    scenario_path: Option<&Path>,
) -> Result<Vec<SeedRun>, CliError> {
    let params = config.to_run_params();
    let mut runs = Vec::new();
    match scenario_path {
        Some(path) => {
            let scenario = load_scenario(path)?;
            scenario.config.validate().map_err(map_core)?;
            let result = run_experiment(&scenario, &params).map_err(map_core)?;
            runs.push(SeedRun {
                seed: scenario.config.seed,
                records: result.records,
                scenario,
                min_spot_lambda: result.min_spot_lambda,
                ridge_events: result.ridge_events,
            });
        }
        None => {
            for &seed in &config.run.seeds {
                let scenario =
                    build_scenario(&config.scenario.to_config(seed)).map_err(map_core)?;
                let result = run_experiment(&scenario, &params).map_err(map_core)?;
                runs.push(SeedRun {
                    seed,
                    records: result.records,
                    scenario,
                    min_spot_lambda: result.min_spot_lambda,
                    ridge_events: result.ridge_events,
                });
            }
        }
    }
    Ok(runs)
}

type MetricFn = fn(&MetricsRecord) -> Option<f64>;

const METRICS: [(&str, MetricFn); 7] = [
    ("nmse_pc_bmle", |r| r.nmse_pc_bmle),
    ("nmse_co_bmle", |r| r.nmse_co_bmle),
    ("nmse_imle_bmle", |r| r.nmse_imle_bmle),
    ("nmse_pc_imle", |r| r.nmse_pc_imle),
    ("nmse_co_imle", |r| r.nmse_co_imle),
    ("nmse_pc_truth", |r| r.nmse_pc_truth),
    ("nmse_co_truth", |r| r.nmse_co_truth),
];

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

pub fn cmd_run(
    config: &RunConfig,
    scenario_path: Option<&Path>,
    out_dir: &Path,
) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let effective = toml::to_string_pretty(config).expect("config serializes");
    write_atomic(&out_dir.join("effective-config.toml"), effective.as_bytes())?;

    let runs = execute_runs(config, scenario_path)?;

    for run in &runs {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, run.seed, &run.records)
            .map_err(|e| CliError::io(e.to_string()))?;
        write_atomic(&out_dir.join(format!("seed_{}.csv", run.seed)), &buf)?;
    }
    let views: Vec<(u64, &[MetricsRecord])> = runs
        .iter()
        .map(|r| (r.seed, r.records.as_slice()))
        .collect();
    let mut agg = Vec::new();
    write_aggregate_csv(&mut agg, &views).map_err(|e| CliError::io(e.to_string()))?;
    write_atomic(&out_dir.join("aggregate.csv"), &agg)?;

    // Machine-readable summary.
    println!("command=run");
    println!("out_dir={}", out_dir.display());
    let seeds: Vec<String> = runs.iter().map(|r| r.seed.to_string()).collect();
    println!("seeds={}", seeds.join(","));
    println!(
        "rows_per_seed={}",
        runs.first().map(|r| r.records.len()).unwrap_or(0)
    );
    let min_lambda = runs
        .iter()
        .map(|r| r.min_spot_lambda)
        .fold(f64::INFINITY, f64::min);
    println!("min_spot_lambda={min_lambda}");
    let ridge_events: usize = runs.iter().map(|r| r.ridge_events).sum();
    println!("ridge_events={ridge_events}");

    for (name, metric) in METRICS {
        let finals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.records.last().and_then(metric))
            .collect();
        if finals.is_empty() {
            continue;
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        println!("final_{name}={mean}");
    }

    // Spike detection: the median trajectory rises right after every change.
    for (name, metric) in METRICS {
        let change_times = &runs[0].scenario.change_times;
        if change_times.is_empty() || runs[0].records.is_empty() {
            continue;
        }
        let med = |t: usize| -> Option<f64> {
            median(
                runs.iter()
                    .filter_map(|r| metric(r.records.get(t - 1)?))
                    .collect(),
            )
        };
        let mut spikes = Some(true);
        for &tc in change_times {
            // Change at 0-based slot tc: records are 1-based, so compare
            // t = tc+1 (first post-change row) against t = tc-1.
            match (med(tc + 1), med(tc.saturating_sub(1).max(1))) {
                (Some(after), Some(before)) => {
                    spikes = spikes.map(|s| s && after > before);
                }
                _ => spikes = None,
            }
        }
        if let Some(s) = spikes {
            println!("spike_{name}={s}");
        }
    }
    println!("status=ok");
    Ok(())
}

/// Parameter grid for the sweep command.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    #[serde(default)]
    grid: Grid,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct Grid {
    prediction_steps: Option<Vec<usize>>,
    correction_steps: Option<Vec<usize>>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
}

pub fn cmd_sweep(config: &RunConfig, sweep_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(sweep_path)
        .map_err(|e| CliError::io(format!("reading sweep spec {}: {e}", sweep_path.display())))?;
    let spec: SweepSpec = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("sweep spec parse error: {e}")))?;
    ensure_dir(out_dir)?;

    let mut csv = String::from(
        "prediction_steps,correction_steps,alpha,beta,gamma,status,ss_nmse_pc_bmle,ss_nmse_co_bmle,ss_nmse_imle_bmle,ss_nmse_pc_imle,ss_nmse_co_imle,ss_nmse_pc_truth,ss_nmse_co_truth\n",
    );

    let g = &spec.grid;
    let empty = g.prediction_steps.as_deref().is_none_or(|v| v.is_empty())
        && g.correction_steps.as_deref().is_none_or(|v| v.is_empty())
        && g.alpha.as_deref().is_none_or(|v| v.is_empty())
        && g.beta.as_deref().is_none_or(|v| v.is_empty())
        && g.gamma.as_deref().is_none_or(|v| v.is_empty());

    let mut cells = 0;
    let mut failed = 0;
    if !empty {
        let ps = g
            .prediction_steps
            .clone()
            .unwrap_or(vec![config.solver.prediction_steps]);
        let cs = g
            .correction_steps
            .clone()
            .unwrap_or(vec![config.solver.correction_steps]);
        let alphas = g.alpha.clone().unwrap_or(vec![config.solver.alpha]);
        let betas = g.beta.clone().unwrap_or(vec![config.solver.beta]);
        let gammas = g.gamma.clone().unwrap_or(vec![config.solver.gamma]);
        for &p in &ps {
            for &c in &cs {
                for &alpha in &alphas {
                    for &beta in &betas {
                        for &gamma in &gammas {
                            let mut cell_cfg = config.clone();
                            cell_cfg.solver.prediction_steps = p;
                            cell_cfg.solver.correction_steps = c;
                            cell_cfg.solver.alpha = alpha;
                            cell_cfg.solver.beta = beta;
                            cell_cfg.solver.gamma = gamma;
                            cells += 1;
                            let row = match sweep_cell(&cell_cfg) {
                                Ok(values) => {
                                    let cols: Vec<String> = values
                                        .iter()
                                        .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                                        .collect();
                                    format!("{p},{c},{alpha},{beta},{gamma},ok,{}", cols.join(","))
                                }
                                Err(e) => {
                                    failed += 1;
                                    let msg = e.message().replace([',', '\n'], ";");
                                    format!("{p},{c},{alpha},{beta},{gamma},failed: {msg},,,,,,,")
                                }
                            };
                            csv.push_str(&row);
                            csv.push('\n');
                        }
                    }
                }
            }
        }
    }
    write_atomic(&out_dir.join("sweep.csv"), csv.as_bytes())?;
    println!("command=sweep");
    println!("out_dir={}", out_dir.display());
    println!("cells={cells}");
    println!("failed_cells={failed}");
    println!("status=ok");
    Ok(())
}

/// One sweep cell: run all seeds, return the steady-state mean (segment
/// second halves pooled over seeds) per metric column.
fn sweep_cell(config: &RunConfig) -> Result<[Option<f64>; 7], CliError> {
    config.validate()?;
    let runs = execute_runs(config, None)?;
    let mut out = [None; 7];
    for (idx, (_, metric)) in METRICS.iter().enumerate() {
        let mut acc = Vec::new();
        for run in &runs {
            if let Some(m) = steady_state_mean(&run.scenario, &run.records, metric) {
                acc.push(m);
            }
        }
        if !acc.is_empty() {
            out[idx] = Some(acc.iter().sum::<f64>() / acc.len() as f64);
        }
    }
    Ok(out)
}

/// Resolves the output directory: flag wins over the config value.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.unwrap_or_else(|| PathBuf::from(&config.run.out_dir))
}
