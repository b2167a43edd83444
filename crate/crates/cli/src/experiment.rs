//! Sweep execution: one row per grid point and strategy.

use std::path::Path;
use std::time::Instant;

use hybridcache::optimizer::{baseline_policy, optimize_dc, DcOptions};
use hybridcache::simulator::{dump_realizations, SimOptions};
use hybridcache::{
    asp_general_upper_bound, asp_il, asp_nl, association_prob_mu, estimate_asp, optimize_nl, CachingPolicy,
    NetworkConfig, PopularityProfile, Regime, ServingDistanceModel, Strategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Point};
use crate::CliError;

/// One CSV line. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_value: Option<f64>,
    pub strategy: Option<&'static str>,
    pub analytic_asp: Option<f64>,
    pub simulated_asp: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub p_mu_w: f64,
    pub optimizer_iterations: Option<usize>,
    pub wall_time_s: Option<f64>,
}

impl ResultRow {
    fn check(&self) -> Result<(), CliError> {
        let probs = [self.analytic_asp, self.simulated_asp, Some(self.p_mu_w)];
        for p in probs.into_iter().flatten() {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Numerical(format!(
                    "probability {p} outside [0, 1] for strategy {:?} at sweep value {:?}",
                    self.strategy, self.sweep_value
                )));
            }
        }
        Ok(())
    }
}

/// What a run computes for each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    pub analytic: bool,
    pub simulate: bool,
    /// Forces the regime, as the optimizer subcommands do.
    pub regime: Option<Regime>,
    /// Restricts the strategy set to the proposed placement.
    pub proposed_only: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    pub timing: bool,
    pub dump_dir: Option<&'a Path>,
}

/// Policy of one row, kept for `--policy-out`.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyRecord {
    pub sweep_value: Option<f64>,
    pub strategy: &'static str,
    pub regime: Regime,
    pub policy: CachingPolicy,
}

pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub policies: Vec<PolicyRecord>,
}

fn numerical(e: hybridcache::Error) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(e.to_string())
    } else {
        CliError::Usage(e.to_string())
    }
}

/// Placement RNG for the random baseline, independent of the simulation streams.
fn placement_rng(seed: u64, point: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"placemnt");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(point as u64);
    rng
}

/// Proposed placement for a regime and the iterations it took.
pub fn proposed_policy(
    cfg: &NetworkConfig,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
    regime: Regime,
) -> Result<(CachingPolicy, usize), CliError> {
    match regime {
        Regime::NoiseLimited => {
            let s = optimize_nl(cfg, profile).map_err(numerical)?;
            Ok((s.policy, s.iterations))
        }
        Regime::InterferenceLimited | Regime::General => {
            let opts = DcOptions { with_noise: regime == Regime::General, ..DcOptions::default() };
            let s = optimize_dc(cfg, profile, sdm, &opts).map_err(numerical)?;
            if !s.converged {
                eprintln!(
                    "warning: convex-concave iteration stopped at its cap of {} iterations",
                    s.iterations
                );
            }
            Ok((s.policy, s.iterations))
        }
        Regime::Simulated => Err(CliError::Usage("no optimizer for the simulated regime".into())),
    }
}

pub fn analytic_asp(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
    regime: Regime,
) -> Result<f64, CliError> {
    let report = match regime {
        Regime::NoiseLimited => asp_nl(cfg, policy, profile),
        Regime::InterferenceLimited => asp_il(cfg, policy, profile, sdm),
        _ => asp_general_upper_bound(cfg, policy, profile, sdm),
    };
    Ok(report.map_err(numerical)?.total)
}

pub fn sim_options(exp: &ExperimentConfig, regime: Regime) -> SimOptions {
    let mut opts = SimOptions::new(regime, exp.n_trials, exp.seed).with_radius(exp.sim_radius);
    opts.serving_rule = exp.serving_rule;
    opts
}

/// Runs every (point, strategy) pair. Rows come back in grid order, then in
/// the configured strategy order, whatever the pool size.
pub fn run(exp: &ExperimentConfig, points: &[Point], task: Task, opts: &RunOptions<'_>) -> Result<RunOutput, CliError> {
    let regime = task.regime.unwrap_or(exp.regime);
    let strategies: Vec<Strategy> =
        if task.proposed_only { vec![Strategy::Proposed] } else { exp.strategies.clone() };
    let jobs: Vec<(usize, Strategy)> =
        (0..points.len()).flat_map(|i| strategies.iter().map(move |&s| (i, s))).collect();

    let results: Vec<Result<(ResultRow, PolicyRecord), CliError>> = jobs
        .par_iter()
        .map(|&(i, strategy)| {
            let start = Instant::now();
            let point = &points[i];
            let (cfg, profile, sdm) = (&point.network, &point.profile, &exp.serving_distance);
            let p_mu_w = association_prob_mu(cfg).map_err(numerical)?;
            let (policy, iterations) = match strategy {
                Strategy::Proposed => {
                    let (p, it) = proposed_policy(cfg, profile, sdm, regime)?;
                    (p, Some(it))
                }
                other => {
                    let mut rng = placement_rng(exp.seed, i);
                    (baseline_policy(other, cfg, profile, &mut rng).map_err(numerical)?, None)
                }
            };
            let analytic =
                if task.analytic { Some(analytic_asp(cfg, &policy, profile, sdm, regime)?) } else { None };
            let sim = if task.simulate {
                let so = sim_options(exp, regime);
                if let Some(dir) = opts.dump_dir {
                    let path = dir.join(format!("point{i}_{}.jsonl", strategy.label()));
                    let file = std::fs::File::create(&path)
                        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
                    let mut w = std::io::BufWriter::new(file);
                    dump_realizations(cfg, &policy, profile, &so, &mut w).map_err(numerical)?;
                }
                Some(estimate_asp(cfg, &policy, profile, &so).map_err(numerical)?)
            } else {
                None
            };
            let row = ResultRow {
                sweep_value: point.value,
                strategy: Some(strategy.label()),
                analytic_asp: analytic,
                simulated_asp: sim.map(|s| s.mean),
                ci_halfwidth: sim.map(|s| s.ci_halfwidth),
                p_mu_w,
                optimizer_iterations: iterations,
                wall_time_s: opts.timing.then(|| start.elapsed().as_secs_f64()),
            };
            row.check()?;
            let record = PolicyRecord { sweep_value: point.value, strategy: strategy.label(), regime, policy };
            Ok((row, record))
        })
        .collect();

    let mut out = RunOutput { rows: Vec::with_capacity(jobs.len()), policies: Vec::with_capacity(jobs.len()) };
    for r in results {
        let (row, record) = r?;
        out.rows.push(row);
        out.policies.push(record);
    }
    Ok(out)
}

/// Association probability at each grid point.
pub fn associate(points: &[Point], timing: bool) -> Result<Vec<ResultRow>, CliError> {
    points
        .par_iter()
        .map(|point| {
            let start = Instant::now();
            let row = ResultRow {
                sweep_value: point.value,
                strategy: None,
                analytic_asp: None,
                simulated_asp: None,
                ci_halfwidth: None,
                p_mu_w: association_prob_mu(&point.network).map_err(numerical)?,
                optimizer_iterations: None,
                wall_time_s: timing.then(|| start.elapsed().as_secs_f64()),
            };
            row.check()?;
            Ok(row)
        })
        .collect()
}
