//! Interference-limited placement by the convex-concave procedure.
//!
//! Every per-file bound is a signed sum of exponentials `a·e^{b p}` with
//! `b ≥ 0`, and `v = −Σ a·e^{b p}` is minimized as a difference `G − H` of
//! convex functions. Each outer step minimizes `G(p) − ∇H(p^k)·p`, a convex
//! upper model of `v`, so the sequence `v_k` cannot increase.
//!
//! [`DcSplit::Parity`] takes `H` from the odd binomial terms (`a > 0`) and
//! `G` from the even ones. Both carry curvature far larger than their
//! difference, so the model is loose and progress slow. [`DcSplit::Curvature`]
//! uses `G = v + κp²/2`, `H = κp²/2` with `κ` bounding `−v''` on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::asp::bound::{bound_terms, ServingDistanceModel};
use crate::association::association;
use crate::config::{NetworkConfig, Tier};
use crate::error::{DcFailureReason, Error, Result};
use crate::optimizer::projection::project_capped_simplex;
use crate::optimizer::CachingPolicy;
use crate::popularity::PopularityProfile;

/// Allowed increase of `v` between outer iterations before reporting an error.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// How the objective is written as a difference of convex functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DcSplit {
    /// Odd binomial terms against even ones.
    Parity,
    /// Objective plus `κp²/2` against `κp²/2`.
    #[default]
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcOptions {
    /// Per-coordinate move limit `Δ·|∇h_i|` when `damping` is on.
    pub step: f64,
    /// Stop once `|v_{k+1} − v_k|` drops below this.
    pub threshold: f64,
    pub max_outer: usize,
    pub damping: bool,
    pub inner_tolerance: f64,
    pub inner_max_iterations: usize,
    /// Include the noise factors (general regime) instead of interference only.
    pub with_noise: bool,
    pub split: DcSplit,
}

impl Default for DcOptions {
    fn default() -> Self {
        DcOptions {
            step: 1e-4,
            threshold: 1e-5,
            max_outer: 500,
            damping: false,
            inner_tolerance: 1e-8,
            inner_max_iterations: 100_000,
            with_noise: false,
            split: DcSplit::Curvature,
        }
    }
}

/// `a·e^{b p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub a: f64,
    pub b: f64,
}

/// Separable DC objective for both tiers: `terms[t][i]` lists the exponentials of file `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcProblem {
    pub terms: [Vec<Vec<ExpTerm>>; 2],
    pub budgets: [f64; 2],
}

fn tier_index(tier: Tier) -> usize {
    match tier {
        Tier::MmWave => 0,
        Tier::MuWave => 1,
    }
}

impl DcProblem {
    /// Builds the objective from the conditional bounds at a policy-independent serving distance.
    pub fn build(
        cfg: &NetworkConfig,
        profile: &PopularityProfile,
        sdm: &ServingDistanceModel,
        p_mw: f64,
        with_noise: bool,
    ) -> Result<Self> {
        let sdm = if sdm.is_policy_independent() { *sdm } else { ServingDistanceModel::MeanNearestStation };
        let f = profile.probabilities();
        let mut terms: [Vec<Vec<ExpTerm>>; 2] = [Vec::new(), Vec::new()];
        for (tier, weight) in [(Tier::MmWave, p_mw), (Tier::MuWave, 1.0 - p_mw)] {
            let slot = &mut terms[tier_index(tier)];
            let r = sdm.distance(tier, cfg, 1.0);
            for (i, &fi) in f.iter().enumerate() {
                let file_terms = match r {
                    Some(r) if weight > 0.0 => bound_terms(cfg, tier, i, r, with_noise)?
                        .into_iter()
                        .map(|t| ExpTerm { a: fi * weight * t.weight * (-t.rate).exp(), b: t.rate })
                        .collect(),
                    _ => Vec::new(),
                };
                slot.push(file_terms);
            }
        }
        Ok(DcProblem { terms, budgets: [cfg.cache_mm as f64, cfg.cache_mu as f64] })
    }

    pub fn catalog_size(&self) -> usize {
        self.terms[0].len()
    }

    /// Success probability `h − g` at `policy`.
    pub fn value(&self, policy: &CachingPolicy) -> f64 {
        -self.dc_objective(policy)
    }

    /// Minimized objective `v = g − h`.
    pub fn dc_objective(&self, policy: &CachingPolicy) -> f64 {
        let mut v = 0.0;
        for tier in [Tier::MmWave, Tier::MuWave] {
            for (terms, &p) in self.terms[tier_index(tier)].iter().zip(policy.tier(tier)) {
                for t in terms {
                    v -= t.a * (t.b * p).exp();
                }
            }
        }
        v
    }

}

/// Upper bound on `f'' = Σ a b² e^{bp}` over `[0, 1]`, taken piecewise on a fine partition.
fn curvature_bound(terms: &[ExpTerm]) -> f64 {
    const PIECES: usize = 64;
    let mut worst: f64 = 0.0;
    for k in 0..PIECES {
        let (lo, hi) = (k as f64 / PIECES as f64, (k + 1) as f64 / PIECES as f64);
        let bound: f64 = terms
            .iter()
            .map(|t| t.a * t.b * t.b * (t.b * if t.a > 0.0 { hi } else { lo }).exp())
            .sum();
        worst = worst.max(bound);
    }
    worst
}

/// One file's objective under a given split.
struct FileModel<'a> {
    terms: &'a [ExpTerm],
    split: DcSplit,
    kappa: f64,
}

impl FileModel<'_> {
    fn new(terms: &[ExpTerm], split: DcSplit) -> FileModel<'_> {
        let kappa = match split {
            DcSplit::Parity => 0.0,
            DcSplit::Curvature => curvature_bound(terms),
        };
        FileModel { terms, split, kappa }
    }

    /// Convex part `G` and its derivative.
    fn convex_part(&self, p: f64) -> (f64, f64) {
        match self.split {
            DcSplit::Parity => self.terms.iter().filter(|t| t.a < 0.0).fold((0.0, 0.0), |(v, d), t| {
                let e = -t.a * (t.b * p).exp();
                (v + e, d + t.b * e)
            }),
            DcSplit::Curvature => {
                let (v, d) = self.terms.iter().fold((0.0, 0.0), |(v, d), t| {
                    let e = -t.a * (t.b * p).exp();
                    (v + e, d + t.b * e)
                });
                (v + 0.5 * self.kappa * p * p, d + self.kappa * p)
            }
        }
    }

    /// `G(q) − G(p)` without forming either value.
    fn convex_delta(&self, p: f64, q: f64) -> f64 {
        let d = q - p;
        let exp_delta = |t: &ExpTerm| -t.a * (t.b * p).exp() * (t.b * d).exp_m1();
        match self.split {
            DcSplit::Parity => self.terms.iter().filter(|t| t.a < 0.0).map(exp_delta).sum(),
            DcSplit::Curvature => {
                self.terms.iter().map(exp_delta).sum::<f64>() + 0.5 * self.kappa * d * (p + q)
            }
        }
    }

    /// `∇H` at `p`.
    fn concave_gradient(&self, p: f64) -> f64 {
        match self.split {
            DcSplit::Parity => self.terms.iter().filter(|t| t.a > 0.0).map(|t| t.a * t.b * (t.b * p).exp()).sum(),
            DcSplit::Curvature => self.kappa * p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcState {
    pub k: usize,
    pub policy: CachingPolicy,
    /// `v_k` after each outer iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub step: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcSolution {
    pub policy: CachingPolicy,
    pub iterations: usize,
    /// Bound value `h − g` at the returned policy.
    pub objective: f64,
    pub converged: bool,
    pub state: DcState,
}

/// Minimizes `Σ_i g_i(x_i) − c·x` over the capped simplex by projected
/// gradient with Barzilai–Borwein steps and Armijo backtracking.
fn inner_solve(
    models: &[FileModel<'_>],
    c: &[f64],
    budget: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    // Change of the model between two points, formed term by term.
    let delta = |x: &[f64], y: &[f64]| -> f64 {
        models
            .iter()
            .zip(x.iter().zip(y))
            .zip(c)
            .map(|((m, (&xi, &yi)), &ci)| m.convex_delta(xi, yi) - ci * (yi - xi))
            .sum()
    };
    let grad = |x: &[f64]| -> Vec<f64> {
        models.iter().zip(x).zip(c).map(|((m, &xi), &ci)| m.convex_part(xi).1 - ci).collect()
    };
    let step_max = 1e8;
    let mut x = project_capped_simplex(x0, budget);
    let mut gx = grad(&x);
    let mut t = 1.0;
    for _ in 0..max_iter {
        let trial: Vec<f64> = x.iter().zip(&gx).map(|(a, g)| a - g).collect();
        let stationarity = project_capped_simplex(&trial, budget)
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if stationarity < tol {
            return Some(x);
        }
        let mut accepted = None;
        let mut step = t;
        for _ in 0..60 {
            let y: Vec<f64> = x.iter().zip(&gx).map(|(a, g)| a - step * g).collect();
            let xn = project_capped_simplex(&y, budget);
            let decrease: f64 = gx.iter().zip(xn.iter().zip(&x)).map(|(g, (a, b))| g * (a - b)).sum();
            if delta(&x, &xn) <= 1e-4 * decrease {
                accepted = Some(xn);
                break;
            }
            step *= 0.5;
        }
        let xn = accepted?;
        let gn = grad(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let sy: f64 = s.iter().zip(gn.iter().zip(&gx)).map(|(s, (a, b))| s * (a - b)).sum();
        t = if sy > 0.0 { (ss / sy).min(step_max) } else { step_max };
        if ss == 0.0 {
            return Some(xn);
        }
        x = xn;
        gx = gn;
    }
    None
}

/// Runs the convex-concave procedure from the uniform placement.
pub fn solve_dc(problem: &DcProblem, opts: &DcOptions) -> Result<DcSolution> {
    let l = problem.catalog_size();
    let init = |b: f64| vec![(b / l as f64).min(1.0); l];
    let mut policy = CachingPolicy { p_mm: init(problem.budgets[0]), p_mu: init(problem.budgets[1]) };
    let models = problem.terms.each_ref().map(|tier| tier.iter().map(|t| FileModel::new(t, opts.split)).collect::<Vec<_>>());
    let mut trace = vec![problem.dc_objective(&policy)];
    let mut converged = false;
    let mut k = 0;
    while k < opts.max_outer {
        let mut next = policy.clone();
        for tier in [Tier::MmWave, Tier::MuWave] {
            let idx = tier_index(tier);
            let models = &models[idx];
            let current = policy.tier(tier);
            let c: Vec<f64> = models.iter().zip(current).map(|(m, &p)| m.concave_gradient(p)).collect();
            let solved = inner_solve(
                models,
                &c,
                problem.budgets[idx],
                current,
                opts.inner_tolerance,
                opts.inner_max_iterations,
            )
            .ok_or_else(|| Error::DcFailure {
                iteration: k,
                reason: DcFailureReason::InnerSolve,
                trace: trace.clone(),
            })?;
            let moved = if opts.damping {
                // Common fraction θ so that no coordinate moves more than Δ·|∇h_i|.
                let mut theta: f64 = 1.0;
                for ((&a, &b), &ci) in current.iter().zip(&solved).zip(&c) {
                    let d = (b - a).abs();
                    if d > 0.0 {
                        theta = theta.min(opts.step * ci.abs() / d);
                    }
                }
                current.iter().zip(&solved).map(|(&a, &b)| a + theta * (b - a)).collect()
            } else {
                solved
            };
            *next.tier_mut(tier) = moved;
        }
        let v_prev = *trace.last().expect("trace starts non-empty");
        let v = problem.dc_objective(&next);
        k += 1;
        trace.push(v);
        policy = next;
        if v > v_prev + MONOTONE_SLACK {
            return Err(Error::DcFailure {
                iteration: k,
                reason: DcFailureReason::NonMonotone { previous: v_prev, current: v },
                trace,
            });
        }
        if (v - v_prev).abs() < opts.threshold {
            converged = true;
            break;
        }
    }
    let objective = problem.value(&policy);
    Ok(DcSolution {
        policy: policy.clone(),
        iterations: k,
        objective,
        converged,
        state: DcState { k, policy, trace, step: opts.step, threshold: opts.threshold },
    })
}

/// Interference-limited placement for both tiers.
pub fn optimize_il(cfg: &NetworkConfig, profile: &PopularityProfile, sdm: &ServingDistanceModel) -> Result<DcSolution> {
    optimize_dc(cfg, profile, sdm, &DcOptions::default())
}

pub fn optimize_dc(
    cfg: &NetworkConfig,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
    opts: &DcOptions,
) -> Result<DcSolution> {
    cfg.validate_for_catalog(profile.catalog_size())?;
    sdm.validate()?;
    let p_mw = association(cfg)?.p_mw;
    let problem = DcProblem::build(cfg, profile, sdm, p_mw, opts.with_noise)?;
    solve_dc(&problem, opts)
}
