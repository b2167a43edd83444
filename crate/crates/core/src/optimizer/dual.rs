//! Noise-limited placement by dual subgradient ascent.
//!
//! Per tier the problem is `max Σ w_i (1 − e^{-K_i p_i})` subject to
//! `Σ p_i ≤ C` and `0 ≤ p_i ≤ 1`, with `w_i = f_i·p_w`. For fixed
//! multipliers the Lagrangian is maximized in closed form at
//! `p_i = [ln(w_i K_i/(ω + µ_i))/K_i]^+`; the multipliers then follow a
//! projected subgradient step.

use serde::{Deserialize, Serialize};

use crate::asp::nl::{nl_constants, nl_objective, NlConstants};
use crate::association::association;
use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::optimizer::projection::project_capped_simplex;
use crate::optimizer::CachingPolicy;
use crate::popularity::PopularityProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualOptions {
    /// Step `s_k = a·scale/(b + k)`.
    pub step_a: f64,
    pub step_b: f64,
    /// Stop once every multiplier moves less than `tolerance·scale`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Finish with an exact solve of the budget multiplier. When set, hitting
    /// the iteration cap hands over to that solve instead of failing.
    pub refine: bool,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { step_a: 0.1, step_b: 10.0, tolerance: 1e-8, max_iterations: 100_000, refine: true }
    }
}

/// Multipliers of one tier: `ω` for the budget, `µ_i` for `p_i ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierMultipliers {
    pub omega: f64,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub mm: TierMultipliers,
    pub mu: TierMultipliers,
    pub options: DualOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlSolution {
    pub policy: CachingPolicy,
    pub iterations: usize,
    /// Association-weighted NL success probability of `policy`.
    pub objective: f64,
    pub dual: DualState,
}

struct TierSolve {
    p: Vec<f64>,
    multipliers: TierMultipliers,
    iterations: usize,
}

/// Lagrangian maximizer over `[0, cap]^L`; the cap keeps subgradients bounded
/// when `ω + µ_i` reaches zero.
fn primal(w: &[f64], k: &[f64], omega: f64, mu: &[f64], cap: f64) -> Vec<f64> {
    w.iter()
        .zip(k)
        .zip(mu)
        .map(|((&w, &k), &mu)| {
            if w * k <= 0.0 {
                return 0.0;
            }
            let denom = (omega + mu).max(f64::MIN_POSITIVE);
            ((w * k / denom).ln() / k).clamp(0.0, cap)
        })
        .collect()
}

fn lagrangian(w: &[f64], k: &[f64], p: &[f64], m: &TierMultipliers, budget: f64) -> f64 {
    let mut v = 0.0;
    for i in 0..p.len() {
        v += -w[i] * (-k[i] * p[i]).exp_m1() - m.mu[i] * (p[i] - 1.0);
    }
    v - m.omega * (p.iter().sum::<f64>() - budget)
}

fn tier_value(w: &[f64], k: &[f64], p: &[f64]) -> f64 {
    w.iter().zip(k).zip(p).map(|((w, k), p)| -w * (-k * p).exp_m1()).sum()
}

fn solve_tier(w: &[f64], k: &[f64], budget: usize, opts: &DualOptions) -> std::result::Result<TierSolve, (TierSolve, f64)> {
    let l = w.len();
    let c = budget as f64;
    let scale = w.iter().zip(k).map(|(w, k)| w * k).fold(0.0, f64::max);
    if scale <= 0.0 || l == 0 {
        let u = (c / l.max(1) as f64).min(1.0);
        return Ok(TierSolve {
            p: vec![u; l],
            multipliers: TierMultipliers { omega: 0.0, mu: vec![0.0; l] },
            iterations: 0,
        });
    }
    let cap = c.max(1.0);
    let omega0 = (0..l).map(|i| w[i] * k[i] * (-k[i] * c / l as f64).exp()).sum::<f64>() / l as f64;
    let mut m = TierMultipliers { omega: omega0, mu: vec![0.0; l] };
    let mut p = primal(w, k, m.omega, &m.mu, cap);
    for iter in 0..opts.max_iterations {
        let s = opts.step_a * scale / (opts.step_b + iter as f64);
        let omega_new = (m.omega + s * (p.iter().sum::<f64>() - c)).max(0.0);
        let mut change = (omega_new - m.omega).abs();
        for i in 0..l {
            let mu_new = (m.mu[i] + s * (p[i] - 1.0)).max(0.0);
            change = change.max((mu_new - m.mu[i]).abs());
            m.mu[i] = mu_new;
        }
        m.omega = omega_new;
        p = primal(w, k, m.omega, &m.mu, cap);
        if change < opts.tolerance * scale {
            if !opts.refine {
                return Ok(TierSolve { p: project_capped_simplex(&p, c), multipliers: m, iterations: iter + 1 });
            }
            let (p, multipliers) = refine(w, k, c, &m);
            return Ok(TierSolve { p, multipliers, iterations: iter + 1 });
        }
    }
    if opts.refine {
        let (p, multipliers) = refine(w, k, c, &m);
        return Ok(TierSolve { p, multipliers, iterations: opts.max_iterations });
    }
    let dual_value = lagrangian(w, k, &p, &m, c);
    let best = project_capped_simplex(&p, c);
    let gap = (dual_value - tier_value(w, k, &best)).max(0.0);
    Err((TierSolve { p: best, multipliers: m, iterations: opts.max_iterations }, gap))
}

/// Box-constrained maximizer for a budget multiplier alone: `µ_i` is then
/// `[w_i K_i e^{-K_i} − ω]^+`, which pins `p_i` at 1 exactly where needed.
fn box_primal(w: &[f64], k: &[f64], omega: f64) -> Vec<f64> {
    w.iter()
        .zip(k)
        .map(|(&w, &k)| {
            if w * k <= 0.0 {
                0.0
            } else if omega <= 0.0 {
                1.0
            } else {
                ((w * k / omega).ln() / k).clamp(0.0, 1.0)
            }
        })
        .collect()
}

/// Finishes the subgradient phase by solving the one-dimensional dual in `ω`
/// exactly (bisection on the budget residual around the subgradient iterate).
///
/// The subgradient iterate is only accurate to the step size, which decays
/// harmonically; this pins complementary slackness to round-off.
fn refine(w: &[f64], k: &[f64], budget: f64, start: &TierMultipliers) -> (Vec<f64>, TierMultipliers) {
    let used = |omega: f64| box_primal(w, k, omega).iter().sum::<f64>();
    let omega = if used(0.0) <= budget {
        0.0
    } else {
        let mut hi = start.omega.max(f64::MIN_POSITIVE);
        while used(hi) > budget {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        while lo > f64::MIN_POSITIVE && used(lo) <= budget {
            lo /= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if used(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let mu = w.iter().zip(k).map(|(&w, &k)| (w * k * (-k).exp() - omega).max(0.0)).collect();
    let p = project_capped_simplex(&box_primal(w, k, omega), budget);
    (p, TierMultipliers { omega, mu })
}

/// Optimizes with precomputed exponents and a fixed mmWave association probability.
pub fn optimize_nl_with(
    constants: &NlConstants,
    profile: &PopularityProfile,
    cfg: &NetworkConfig,
    p_mw: f64,
    opts: &DualOptions,
) -> Result<NlSolution> {
    let l = profile.catalog_size();
    if constants.mm.len() != l || constants.mu.len() != l {
        return Err(Error::invalid("exponent vectors do not match the catalog"));
    }
    let f = profile.probabilities();
    let mut results = Vec::new();
    let mut gap = 0.0;
    let mut failed = false;
    for (tier, weight) in [(Tier::MmWave, p_mw), (Tier::MuWave, 1.0 - p_mw)] {
        let w: Vec<f64> = f.iter().map(|f| f * weight).collect();
        match solve_tier(&w, constants.tier(tier), cfg.cache_size(tier), opts) {
            Ok(s) => results.push(s),
            Err((s, g)) => {
                failed = true;
                gap += g;
                results.push(s);
            }
        }
    }
    let mu_solve = results.pop().expect("two tiers");
    let mm_solve = results.pop().expect("two tiers");
    let policy = CachingPolicy { p_mm: mm_solve.p, p_mu: mu_solve.p };
    let iterations = mm_solve.iterations.max(mu_solve.iterations);
    if failed {
        return Err(Error::DualNonConvergence { iterations, duality_gap: gap, best: Box::new(policy) });
    }
    let objective = nl_objective(constants, &policy, profile, p_mw);
    Ok(NlSolution {
        policy,
        iterations,
        objective,
        dual: DualState { mm: mm_solve.multipliers, mu: mu_solve.multipliers, options: *opts },
    })
}

/// Noise-limited optimal placement for both tiers.
pub fn optimize_nl(cfg: &NetworkConfig, profile: &PopularityProfile) -> Result<NlSolution> {
    optimize_nl_opts(cfg, profile, &DualOptions::default())
}

pub fn optimize_nl_opts(cfg: &NetworkConfig, profile: &PopularityProfile, opts: &DualOptions) -> Result<NlSolution> {
    cfg.validate_for_catalog(profile.catalog_size())?;
    let constants = nl_constants(cfg, profile.catalog_size())?;
    let p_mw = association(cfg)?.p_mw;
    optimize_nl_with(&constants, profile, cfg, p_mw, opts)
}
