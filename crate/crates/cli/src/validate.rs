//! Cross-checks of the analytic expressions against simulation at every grid point.

use hybridcache::optimizer::baseline_policy;
use hybridcache::{association_prob_mu, estimate_association, CachingPolicy, Regime, ServingDistanceModel, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Point};
use crate::experiment::{analytic_asp, proposed_policy, sim_options};
use crate::CliError;

/// Slack allowed for modelling error between the closed form and the simulator.
const NL_MODEL_SLACK: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub sweep_value: Option<f64>,
    pub check: &'static str,
    pub analytic: f64,
    pub simulated: f64,
    pub ci_halfwidth: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
enum Check {
    Association,
    NlUniform,
    NlProposed,
    IlBoundUniform,
    IlBoundMostPopular,
}

impl Check {
    const ALL: [Check; 5] =
        [Check::Association, Check::NlUniform, Check::NlProposed, Check::IlBoundUniform, Check::IlBoundMostPopular];

    fn name(self) -> &'static str {
        match self {
            Check::Association => "association",
            Check::NlUniform => "nl_match_uc",
            Check::NlProposed => "nl_match_proposed",
            Check::IlBoundUniform => "il_bound_uc",
            Check::IlBoundMostPopular => "il_bound_mc",
        }
    }
}

fn numerical(e: hybridcache::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn baseline(strategy: Strategy, point: &Point) -> Result<CachingPolicy, CliError> {
    // UC and MC ignore the generator.
    baseline_policy(strategy, &point.network, &point.profile, &mut ChaCha8Rng::seed_from_u64(0)).map_err(numerical)
}

fn run_check(exp: &ExperimentConfig, point: &Point, check: Check) -> Result<CheckRow, CliError> {
    let (cfg, profile) = (&point.network, &point.profile);
    let n = exp.n_trials as f64;
    let (analytic, simulated, ci, tolerance, pass) = match check {
        Check::Association => {
            let a = association_prob_mu(cfg).map_err(numerical)?;
            let s = estimate_association(cfg, exp.n_trials, exp.seed, exp.sim_radius).map_err(numerical)?;
            let tol = 3.0 * 1.96 * (a * (1.0 - a) / n).sqrt() + 1.0 / n;
            (a, s.mean, s.ci_halfwidth, tol, (a - s.mean).abs() <= tol)
        }
        Check::NlUniform | Check::NlProposed => {
            let policy = match check {
                Check::NlUniform => baseline(Strategy::Uniform, point)?,
                _ => proposed_policy(cfg, profile, &exp.serving_distance, Regime::NoiseLimited)?.0,
            };
            let a = analytic_asp(cfg, &policy, profile, &exp.serving_distance, Regime::NoiseLimited)?;
            let s = hybridcache::estimate_asp(cfg, &policy, profile, &sim_options(exp, Regime::NoiseLimited))
                .map_err(numerical)?;
            let tol = 3.0 * 1.96 * (a * (1.0 - a) / n).sqrt() + NL_MODEL_SLACK;
            (a, s.mean, s.ci_halfwidth, tol, (a - s.mean).abs() <= tol)
        }
        Check::IlBoundUniform | Check::IlBoundMostPopular => {
            let strategy = match check {
                Check::IlBoundUniform => Strategy::Uniform,
                _ => Strategy::MostPopular,
            };
            let policy = baseline(strategy, point)?;
            let sdm = ServingDistanceModel::ContactAveraged;
            let a = analytic_asp(cfg, &policy, profile, &sdm, Regime::InterferenceLimited)?;
            let s = hybridcache::estimate_asp(cfg, &policy, profile, &sim_options(exp, Regime::InterferenceLimited))
                .map_err(numerical)?;
            let tol = 3.0 * s.ci_halfwidth;
            (a, s.mean, s.ci_halfwidth, tol, a >= s.mean - tol)
        }
    };
    Ok(CheckRow { sweep_value: point.value, check: check.name(), analytic, simulated, ci_halfwidth: ci, tolerance, pass })
}

pub fn validate(exp: &ExperimentConfig, points: &[Point]) -> Result<Vec<CheckRow>, CliError> {
    let jobs: Vec<(usize, Check)> =
        (0..points.len()).flat_map(|i| Check::ALL.into_iter().map(move |c| (i, c))).collect();
    jobs.par_iter().map(|&(i, c)| run_check(exp, &points[i], c)).collect()
}
