//! Monte Carlo oracle over sampled network realizations.
//!
//! The typical user sits at the origin of a disk of radius `R`. Each trial
//! samples both tiers, every per-link random quantity and every cache flag
//! from its own ChaCha stream, so two policies run with the same seed see
//! identical geometry, fading and cache uniforms (cached iff `u_{k,i} < p_i`).

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asp::Regime;
use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::optimizer::CachingPolicy;
use crate::popularity::PopularityProfile;

/// Which tiers a request may be served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Attach to the tier with the least biased path loss.
    #[default]
    Hybrid,
    /// Condition on the mmWave tier.
    MmOnly,
    /// Condition on the µWave tier.
    MuOnly,
}

/// How the serving holder is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ServingRule {
    /// Strongest instantaneous received power, fading included.
    #[default]
    Faded,
    /// Strongest long-term received power.
    LongTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub regime: Regime,
    pub scope: Scope,
    pub serving_rule: ServingRule,
    pub trials: u64,
    pub seed: u64,
    /// Window radius; `None` uses the configured radius.
    pub radius: Option<f64>,
}

impl SimOptions {
    pub fn new(regime: Regime, trials: u64, seed: u64) -> Self {
        SimOptions { regime, scope: Scope::Hybrid, serving_rule: ServingRule::Faded, trials, seed, radius: None }
    }

    pub fn with_scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    fn window(&self, cfg: &NetworkConfig) -> f64 {
        self.radius.unwrap_or(cfg.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub ci_halfwidth: f64,
    pub n_trials: u64,
    pub successes: u64,
    pub regime: Regime,
}

impl SimEstimate {
    pub fn from_counts(successes: u64, n_trials: u64, regime: Regime) -> Self {
        let mean = successes as f64 / n_trials as f64;
        let ci_halfwidth = 1.96 * (mean * (1.0 - mean) / n_trials as f64).sqrt();
        SimEstimate { mean, ci_halfwidth, n_trials, successes, regime }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmStation {
    pub position: [f64; 2],
    pub distance: f64,
    pub los: bool,
    pub fading: f64,
    /// Index into the merged interferer gain classes.
    pub gain_class: u8,
    pub cached: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuStation {
    pub position: [f64; 2],
    pub distance: f64,
    pub fading: f64,
    pub cached: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PppRealization {
    pub mm: Vec<MmStation>,
    pub mu: Vec<MuStation>,
    pub seed: u64,
    pub trial: u64,
}

/// `N ~ Poisson(λπR²)` points uniform in the disk of radius `R`.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = lambda * PI * radius * radius;
    if mean <= 0.0 {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    (0..n).map(|_| uniform_in_disk(radius, rng)).collect()
}

fn uniform_in_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

fn draw_cache<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> Vec<usize> {
    // One uniform per file whatever the policy, so streams stay aligned.
    (0..p.len()).filter(|&i| rng.random::<f64>() < p[i]).collect()
}

/// Independent cache placement for `count` stations.
pub fn assign_caches<R: Rng + ?Sized>(count: usize, p: &[f64], rng: &mut R) -> Vec<Vec<usize>> {
    (0..count).map(|_| draw_cache(p, rng)).collect()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    }
}

/// Samples one realization of both tiers within `radius`.
pub fn sample_realization<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    radius: f64,
    rng: &mut R,
) -> PppRealization {
    let gains = cfg.gain_distribution();
    let fading_mm = cfg.fading(Tier::MmWave).distribution();
    let fading_mu = cfg.fading(Tier::MuWave).distribution();
    let area = PI * radius * radius;
    let n_mm = poisson_count(cfg.lambda_mm * area, rng);
    let mm = (0..n_mm)
        .map(|_| {
            let position = uniform_in_disk(radius, rng);
            let distance = position[0].hypot(position[1]);
            let los = rng.random::<f64>() < (-cfg.beta * distance).exp();
            let fading = fading_mm.sample(rng);
            let gain_class = gains.sample_class(rng) as u8;
            let cached = draw_cache(&policy.p_mm, rng);
            MmStation { position, distance, los, fading, gain_class, cached }
        })
        .collect();
    let n_mu = poisson_count(cfg.lambda_mu * area, rng);
    let mu = (0..n_mu)
        .map(|_| {
            let position = uniform_in_disk(radius, rng);
            let distance = position[0].hypot(position[1]);
            let fading = fading_mu.sample(rng);
            let cached = draw_cache(&policy.p_mu, rng);
            MuStation { position, distance, fading, cached }
        })
        .collect();
    PppRealization { mm, mu, seed: 0, trial: 0 }
}

fn mm_alpha(cfg: &NetworkConfig, los: bool) -> f64 {
    if los {
        cfg.alpha_los
    } else {
        cfg.alpha_nlos
    }
}

/// Least biased path loss of each tier, `+∞` when a tier is empty.
fn least_biased_path_loss(real: &PppRealization, cfg: &NetworkConfig) -> (f64, f64) {
    let mm = real
        .mm
        .iter()
        .map(|s| s.distance.powf(mm_alpha(cfg, s.los)))
        .fold(f64::INFINITY, f64::min)
        / cfg.biased_power_mm();
    let mu = real.mu.iter().map(|s| s.distance.powf(cfg.alpha_mu)).fold(f64::INFINITY, f64::min)
        / cfg.biased_power_mu();
    (mm, mu)
}

fn pick_tier(mm: f64, mu: f64, cfg: &NetworkConfig) -> Tier {
    if mm.is_infinite() && mu.is_infinite() {
        if cfg.lambda_mu > cfg.lambda_mm {
            Tier::MuWave
        } else {
            Tier::MmWave
        }
    } else if mu < mm {
        Tier::MuWave
    } else {
        Tier::MmWave
    }
}

/// Tier the typical user attaches to under least biased path loss.
pub fn associated_tier(real: &PppRealization, cfg: &NetworkConfig) -> Tier {
    let (mm, mu) = least_biased_path_loss(real, cfg);
    pick_tier(mm, mu, cfg)
}

fn holds(cached: &[usize], file: usize) -> bool {
    cached.binary_search(&file).is_ok()
}

/// Whether the request for `file` is delivered at or above its rate.
pub fn evaluate_request(
    real: &PppRealization,
    file: usize,
    cfg: &NetworkConfig,
    regime: Regime,
    scope: Scope,
    rule: ServingRule,
) -> bool {
    let tier = match scope {
        Scope::Hybrid => associated_tier(real, cfg),
        Scope::MmOnly => Tier::MmWave,
        Scope::MuOnly => Tier::MuWave,
    };
    let q = cfg.sinr_threshold(file);
    let with_interference = regime != Regime::NoiseLimited;
    let with_noise = regime != Regime::InterferenceLimited;
    let (signal, interference, noise) = match tier {
        Tier::MmWave => {
            let classes = cfg.gain_distribution().classes();
            let mut best: Option<(usize, f64)> = None;
            for (k, s) in real.mm.iter().enumerate() {
                if !holds(&s.cached, file) {
                    continue;
                }
                let pl = s.distance.powf(-mm_alpha(cfg, s.los));
                let score = match rule {
                    ServingRule::Faded => s.fading * pl,
                    ServingRule::LongTerm => pl,
                };
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((k, score));
                }
            }
            let Some((k, _)) = best else { return false };
            let s = &real.mm[k];
            let signal = cfg.power_mm * cfg.serving_gain * s.fading * s.distance.powf(-mm_alpha(cfg, s.los));
            let interference = if with_interference {
                real.mm
                    .iter()
                    .filter(|t| !holds(&t.cached, file))
                    .map(|t| {
                        cfg.power_mm
                            * classes[t.gain_class as usize].0
                            * t.fading
                            * t.distance.powf(-mm_alpha(cfg, t.los))
                    })
                    .sum()
            } else {
                0.0
            };
            (signal, interference, cfg.noise_mm)
        }
        Tier::MuWave => {
            let mut best: Option<(usize, f64)> = None;
            for (k, s) in real.mu.iter().enumerate() {
                if !holds(&s.cached, file) {
                    continue;
                }
                let pl = s.distance.powf(-cfg.alpha_mu);
                let score = match rule {
                    ServingRule::Faded => s.fading * pl,
                    ServingRule::LongTerm => pl,
                };
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((k, score));
                }
            }
            let Some((k, _)) = best else { return false };
            let s = &real.mu[k];
            let signal = cfg.power_mu * s.fading * s.distance.powf(-cfg.alpha_mu);
            let interference = if with_interference {
                real.mu
                    .iter()
                    .filter(|t| !holds(&t.cached, file))
                    .map(|t| cfg.power_mu * t.fading * t.distance.powf(-cfg.alpha_mu))
                    .sum()
            } else {
                0.0
            };
            (signal, interference, cfg.noise_mu)
        }
    };
    let denom = interference + if with_noise { noise } else { 0.0 };
    if denom == 0.0 {
        return true;
    }
    signal / denom >= q
}

/// One trial: the request is drawn first, then the realization.
fn run_trial(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    opts: &SimOptions,
    trial: u64,
) -> (usize, PppRealization, bool) {
    let mut rng = trial_rng(opts.seed, trial);
    let file = profile.sample_request(&mut rng);
    let mut real = sample_realization(cfg, policy, opts.window(cfg), &mut rng);
    real.seed = opts.seed;
    real.trial = trial;
    let ok = evaluate_request(&real, file, cfg, opts.regime, opts.scope, opts.serving_rule);
    (file, real, ok)
}

fn check_inputs(cfg: &NetworkConfig, policy: &CachingPolicy, profile: &PopularityProfile, opts: &SimOptions) -> Result<()> {
    cfg.validate()?;
    if opts.trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if opts.regime == Regime::Simulated {
        return Err(Error::invalid("simulation regime must be NL, IL or GENERAL"));
    }
    if !(opts.window(cfg) > 0.0) {
        return Err(Error::invalid("simulation radius must be positive"));
    }
    if policy.catalog_size() != profile.catalog_size() {
        return Err(Error::invalid("policy and popularity profile cover different catalogs"));
    }
    CachingPolicy::new(policy.p_mm.clone(), policy.p_mu.clone())?;
    Ok(())
}

/// Empirical success probability over `opts.trials` independent trials.
pub fn estimate_asp(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    opts: &SimOptions,
) -> Result<SimEstimate> {
    check_inputs(cfg, policy, profile, opts)?;
    let successes: u64 = (0..opts.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, policy, profile, opts, t).2 as u64)
        .sum();
    Ok(SimEstimate::from_counts(successes, opts.trials, opts.regime))
}

/// Per-file empirical success counts: `(requests, successes)` for each file.
pub fn estimate_asp_per_file(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    opts: &SimOptions,
) -> Result<Vec<(u64, u64)>> {
    check_inputs(cfg, policy, profile, opts)?;
    let l = profile.catalog_size();
    Ok((0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let (file, _, ok) = run_trial(cfg, policy, profile, opts, t);
            let mut v = vec![(0u64, 0u64); l];
            v[file] = (1, ok as u64);
            v
        })
        .reduce(
            || vec![(0, 0); l],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                a
            },
        ))
}

/// Writes one JSON line per trial with the realization, request and outcome.
pub fn dump_realizations<W: Write>(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    opts: &SimOptions,
    writer: &mut W,
) -> Result<()> {
    check_inputs(cfg, policy, profile, opts)?;
    #[derive(Serialize)]
    struct Record<'a> {
        trial: u64,
        file: usize,
        success: bool,
        realization: &'a PppRealization,
    }
    for t in 0..opts.trials {
        let (file, real, success) = run_trial(cfg, policy, profile, opts, t);
        let line = serde_json::to_string(&Record { trial: t, file, success, realization: &real })
            .map_err(|e| Error::invalid(format!("cannot serialize realization: {e}")))?;
        writeln!(writer, "{line}").map_err(|e| Error::invalid(format!("cannot write realization: {e}")))?;
    }
    Ok(())
}

/// Least biased mmWave path loss in one sampled window, `+∞` if it is empty.
pub fn sample_least_pathloss_mm<R: Rng + ?Sized>(cfg: &NetworkConfig, radius: f64, rng: &mut R) -> f64 {
    let n = poisson_count(cfg.lambda_mm * PI * radius * radius, rng);
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let r = radius * rng.random::<f64>().sqrt();
        let los = rng.random::<f64>() < (-cfg.beta * r).exp();
        best = best.min(r.powf(mm_alpha(cfg, los)));
    }
    best / cfg.biased_power_mm()
}

fn sample_least_pathloss_mu<R: Rng + ?Sized>(cfg: &NetworkConfig, radius: f64, rng: &mut R) -> f64 {
    let n = poisson_count(cfg.lambda_mu * PI * radius * radius, rng);
    let mut best = f64::INFINITY;
    for _ in 0..n {
        let r = radius * rng.random::<f64>().sqrt();
        best = best.min(r.powf(cfg.alpha_mu));
    }
    best / cfg.biased_power_mu()
}

/// Fraction of trials in which the µWave tier offers the least biased path loss.
pub fn estimate_association(cfg: &NetworkConfig, n_trials: u64, seed: u64, radius: f64) -> Result<SimEstimate> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let hits: u64 = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mm = sample_least_pathloss_mm(cfg, radius, &mut rng);
            let mu = sample_least_pathloss_mu(cfg, radius, &mut rng);
            (pick_tier(mm, mu, cfg) == Tier::MuWave) as u64
        })
        .sum();
    Ok(SimEstimate::from_counts(hits, n_trials, Regime::General))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf_popularity;

    #[test]
    fn empty_process() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ppp(0.0, 500.0, &mut rng).is_empty());
    }

    #[test]
    fn points_inside_window_and_angles_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut bins = [0usize; 8];
        let mut n = 0;
        for _ in 0..2000 {
            for p in sample_ppp(5e-5, 500.0, &mut rng) {
                assert!(p[0].hypot(p[1]) <= 500.0);
                let a = p[1].atan2(p[0]) + PI;
                bins[((a / (2.0 * PI) * 8.0) as usize).min(7)] += 1;
                n += 1;
            }
        }
        let e = n as f64 / 8.0;
        let chi2: f64 = bins.iter().map(|&b| (b as f64 - e).powi(2) / e).sum();
        // 1% critical value, 7 degrees of freedom.
        assert!(chi2 < 18.475, "{chi2}");
    }

    #[test]
    fn cache_assignment_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(assign_caches(50, &[1.0; 4], &mut rng).iter().all(|c| c == &[0, 1, 2, 3]));
        assert!(assign_caches(50, &[0.0; 4], &mut rng).iter().all(|c| c.is_empty()));
        let n = 100_000;
        let held = assign_caches(n, &[0.5], &mut rng).iter().filter(|c| !c.is_empty()).count();
        let sigma = (0.25 / n as f64).sqrt();
        assert!((held as f64 / n as f64 - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn nobody_caches_means_failure() {
        let cfg = NetworkConfig::baseline();
        let profile = zipf_popularity(10, 0.8).unwrap();
        let opts = SimOptions::new(Regime::General, 500, 4);
        let e = estimate_asp(&cfg, &CachingPolicy::uniform(10, 0.0), &profile, &opts).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.ci_halfwidth, 0.0);
    }

    #[test]
    fn full_caching_removes_interference() {
        let cfg = NetworkConfig::interference_limited();
        let profile = zipf_popularity(10, 0.8).unwrap();
        let opts = SimOptions::new(Regime::InterferenceLimited, 500, 5);
        let e = estimate_asp(&cfg, &CachingPolicy::uniform(10, 1.0), &profile, &opts).unwrap();
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn single_station_hand_check() {
        let cfg = NetworkConfig::baseline();
        let real = PppRealization {
            mm: vec![MmStation {
                position: [120.0, 0.0],
                distance: 120.0,
                los: false,
                fading: 1.37,
                gain_class: 2,
                cached: vec![0],
            }],
            mu: Vec::new(),
            seed: 0,
            trial: 0,
        };
        let snr = cfg.power_mm * cfg.serving_gain * 1.37 * 120f64.powf(-4.0) / cfg.noise_mm;
        let expected = snr >= cfg.sinr_threshold(0);
        assert_eq!(evaluate_request(&real, 0, &cfg, Regime::NoiseLimited, Scope::Hybrid, ServingRule::Faded), expected);
        assert!(!evaluate_request(&real, 1, &cfg, Regime::NoiseLimited, Scope::Hybrid, ServingRule::Faded));
    }

    #[test]
    fn deterministic_across_pool_sizes() {
        let cfg = NetworkConfig::baseline();
        let profile = zipf_popularity(10, 0.8).unwrap();
        let policy = CachingPolicy::uniform(10, 0.5);
        let opts = SimOptions::new(Regime::General, 300, 9);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_asp(&cfg, &policy, &profile, &opts).unwrap());
        let b = four.install(|| estimate_asp(&cfg, &policy, &profile, &opts).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn association_edge_cases() {
        let no_mm = NetworkConfig { lambda_mm: 0.0, ..NetworkConfig::baseline() };
        assert_eq!(estimate_association(&no_mm, 200, 1, 500.0).unwrap().mean, 1.0);
        let no_mu = NetworkConfig { lambda_mu: 0.0, ..NetworkConfig::baseline() };
        assert_eq!(estimate_association(&no_mu, 200, 1, 500.0).unwrap().mean, 0.0);
    }

    #[test]
    fn dump_writes_one_line_per_trial() {
        let cfg = NetworkConfig::baseline();
        let profile = zipf_popularity(3, 0.8).unwrap();
        let mut buf = Vec::new();
        let opts = SimOptions::new(Regime::General, 4, 2).with_radius(100.0);
        dump_realizations(&cfg, &CachingPolicy::uniform(3, 0.5), &profile, &opts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["realization"]["mm"].is_array());
        }
    }
}
