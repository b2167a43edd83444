//! Binomial-sum upper bounds with and without noise.
//!
//! For a serving link at distance `r_x`, the Alzer inequality bounds the
//! gamma tail by `1 − (1 − e^{-A x})^{m̂}`; expanding the power gives an
//! alternating sum over `l = 1..m̂` whose terms factor into a noise part and
//! the Laplace functional of the non-holder interference field.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asp::kernels::{
    bernoulli_constant_a, binomial, mm_interference_integral, mu_interference_integral, CompensatedSum,
};
use crate::asp::{asp_total, AspReport, Regime, TierReport};
use crate::association::{association, los_disk_mass, nlos_disk_mass};
use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::optimizer::CachingPolicy;
use crate::popularity::PopularityProfile;
use crate::quadrature::{integrate, Domain, QuadratureOptions};

const POINT_REL_TOL: f64 = 1e-9;
const AVERAGED_REL_TOL: f64 = 1e-7;

/// Serving distance `r_x` at which the conditional bounds are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ServingDistanceModel {
    Fixed { mm: f64, mu: f64 },
    /// Mean nearest-neighbor distance of the file holders, `1/(2√(λ p_i))`.
    #[default]
    MeanNearestHolder,
    /// Mean nearest-neighbor distance of the whole tier, `1/(2√λ)`.
    MeanNearestStation,
    /// Bound averaged over the least-path-loss holder of the file.
    ContactAveraged,
}

impl ServingDistanceModel {
    pub fn validate(&self) -> Result<()> {
        if let ServingDistanceModel::Fixed { mm, mu } = *self {
            if !(mm > 0.0 && mu > 0.0 && mm.is_finite() && mu.is_finite()) {
                return Err(Error::invalid("fixed serving distances must be positive"));
            }
        }
        Ok(())
    }

    /// Point serving distance, or `None` for the averaged mode or an empty holder field.
    pub fn distance(&self, tier: Tier, cfg: &NetworkConfig, p: f64) -> Option<f64> {
        let lambda = cfg.density(tier);
        match *self {
            ServingDistanceModel::Fixed { mm, mu } => Some(match tier {
                Tier::MmWave => mm,
                Tier::MuWave => mu,
            }),
            ServingDistanceModel::MeanNearestHolder => (lambda * p > 0.0).then(|| 0.5 / (lambda * p).sqrt()),
            ServingDistanceModel::MeanNearestStation => (lambda > 0.0).then(|| 0.5 / lambda.sqrt()),
            ServingDistanceModel::ContactAveraged => None,
        }
    }

    /// True when the serving distance does not move with the caching probabilities.
    pub fn is_policy_independent(&self) -> bool {
        matches!(self, ServingDistanceModel::Fixed { .. } | ServingDistanceModel::MeanNearestStation)
    }
}

/// One term `weight·exp(−(1 − p)·rate)` of a per-file bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm {
    /// Signed binomial weight times serving-state probability and noise factor.
    pub weight: f64,
    /// `λ·Z`, the interference exponent at full non-holder density.
    pub rate: f64,
}

pub fn eval_terms(terms: &[BoundTerm], p: f64) -> f64 {
    terms.iter().map(|t| t.weight * (-(1.0 - p) * t.rate).exp()).collect::<CompensatedSum>().value()
}

fn check_file(cfg: &NetworkConfig, file: usize, l: u32, tier: Tier) -> Result<()> {
    let m = cfg.fading(tier).order;
    if l == 0 || l > m {
        return Err(Error::invalid(format!("binomial index {l} outside 1..={m}")));
    }
    let _ = file;
    Ok(())
}

fn mm_coefficient(cfg: &NetworkConfig, q: f64, l: u32, path_loss: f64) -> f64 {
    let m = cfg.nakagami_mm;
    bernoulli_constant_a(m) * l as f64 * q * path_loss / (cfg.serving_gain * m as f64)
}

fn mu_coefficient(cfg: &NetworkConfig, q: f64, l: u32, path_loss: f64) -> f64 {
    let m = cfg.nakagami_mu;
    bernoulli_constant_a(m) * l as f64 * q * path_loss / m as f64
}

/// `Z(i, l, j)`: mmWave interference integral for a serving link in state `j`.
pub fn interference_exponent_mm(
    file: usize,
    l: u32,
    los: bool,
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    sdm: &ServingDistanceModel,
) -> Result<f64> {
    check_file(cfg, file, l, Tier::MmWave)?;
    let r = sdm
        .distance(Tier::MmWave, cfg, policy.p_mm[file])
        .ok_or_else(|| Error::invalid("serving distance undefined for this model or an empty holder field"))?;
    let alpha = if los { cfg.alpha_los } else { cfg.alpha_nlos };
    mm_interference_integral(cfg, mm_coefficient(cfg, cfg.sinr_threshold(file), l, r.powf(alpha)), POINT_REL_TOL)
}

/// `W(i, l)`: µWave interference integral.
pub fn interference_exponent_mu(
    file: usize,
    l: u32,
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    sdm: &ServingDistanceModel,
) -> Result<f64> {
    check_file(cfg, file, l, Tier::MuWave)?;
    let r = sdm
        .distance(Tier::MuWave, cfg, policy.p_mu[file])
        .ok_or_else(|| Error::invalid("serving distance undefined for this model or an empty holder field"))?;
    mu_interference_integral(cfg, mu_coefficient(cfg, cfg.sinr_threshold(file), l, r.powf(cfg.alpha_mu)), POINT_REL_TOL)
}

/// Terms of the conditional bound for file `file` with the serving link at `r`.
pub fn bound_terms(cfg: &NetworkConfig, tier: Tier, file: usize, r: f64, with_noise: bool) -> Result<Vec<BoundTerm>> {
    let q = cfg.sinr_threshold(file);
    let m = cfg.fading(tier).order;
    let a = bernoulli_constant_a(m);
    let lambda = cfg.density(tier);
    let mut terms = Vec::with_capacity(2 * m as usize);
    for l in 1..=m {
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        let coef = sign * binomial(m, l);
        match tier {
            Tier::MmWave => {
                let p_los = (-cfg.beta * r).exp();
                for (los, p_state) in [(true, p_los), (false, 1.0 - p_los)] {
                    if p_state == 0.0 {
                        continue;
                    }
                    let pl = r.powf(if los { cfg.alpha_los } else { cfg.alpha_nlos });
                    let noise = if with_noise {
                        (-a * l as f64 * q * cfg.noise_mm * pl / (cfg.power_mm * cfg.serving_gain)).exp()
                    } else {
                        1.0
                    };
                    let z = mm_interference_integral(cfg, mm_coefficient(cfg, q, l, pl), POINT_REL_TOL)?;
                    terms.push(BoundTerm { weight: coef * p_state * noise, rate: lambda * z });
                }
            }
            Tier::MuWave => {
                let pl = r.powf(cfg.alpha_mu);
                let noise = if with_noise {
                    (-a * l as f64 * q * cfg.noise_mu * pl / cfg.power_mu).exp()
                } else {
                    1.0
                };
                let w = mu_interference_integral(cfg, mu_coefficient(cfg, q, l, pl), POINT_REL_TOL)?;
                terms.push(BoundTerm { weight: coef * noise, rate: lambda * w });
            }
        }
    }
    Ok(terms)
}

/// Conditional bound at a given serving path loss `ℓ = r^{α_j}`, summed over `l`.
fn bound_at_path_loss(cfg: &NetworkConfig, tier: Tier, q: f64, p: f64, pl: f64, with_noise: bool) -> Result<f64> {
    let m = cfg.fading(tier).order;
    let a = bernoulli_constant_a(m);
    let lambda_bar = (1.0 - p) * cfg.density(tier);
    let mut acc = CompensatedSum::default();
    for l in 1..=m {
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        let (noise_arg, z) = match tier {
            Tier::MmWave => (
                a * l as f64 * q * cfg.noise_mm * pl / (cfg.power_mm * cfg.serving_gain),
                if lambda_bar > 0.0 {
                    mm_interference_integral(cfg, mm_coefficient(cfg, q, l, pl), AVERAGED_REL_TOL)?
                } else {
                    0.0
                },
            ),
            Tier::MuWave => (
                a * l as f64 * q * cfg.noise_mu * pl / cfg.power_mu,
                if lambda_bar > 0.0 {
                    mu_interference_integral(cfg, mu_coefficient(cfg, q, l, pl), AVERAGED_REL_TOL)?
                } else {
                    0.0
                },
            ),
        };
        let noise = if with_noise { noise_arg } else { 0.0 };
        acc.add(sign * binomial(m, l) * (-noise - lambda_bar * z).exp());
    }
    Ok(acc.value())
}

/// Bound averaged over the distance to the least-path-loss holder.
fn contact_averaged(cfg: &NetworkConfig, tier: Tier, q: f64, p: f64, with_noise: bool) -> Result<f64> {
    let lambda_p = cfg.density(tier) * p;
    let qopts = QuadratureOptions::default().with_rel_tol(AVERAGED_REL_TOL).with_abs_tol(1e-12);
    match tier {
        Tier::MuWave => {
            let alpha = cfg.alpha_mu;
            let f = |r: f64| -> f64 {
                if r == 0.0 {
                    return 0.0;
                }
                let density = 2.0 * PI * lambda_p * r * (-PI * lambda_p * r * r).exp();
                if density == 0.0 {
                    return 0.0;
                }
                density * bound_at_path_loss(cfg, tier, q, p, r.powf(alpha), with_noise).unwrap_or(f64::NAN)
            };
            Ok(integrate(f, Domain::SemiInfinite(0.0), &qopts.with_scale(0.5 / lambda_p.sqrt()))?.value)
        }
        Tier::MmWave => {
            let (al, an, beta) = (cfg.alpha_los, cfg.alpha_nlos, cfg.beta);
            // Unit-density mean measure of links with path loss below ℓ.
            let measure = |pl: f64| los_disk_mass(pl.powf(1.0 / al), beta) + nlos_disk_mass(pl.powf(1.0 / an), beta);
            let mut total = 0.0;
            for los in [true, false] {
                let alpha = if los { al } else { an };
                let f = |r: f64| -> f64 {
                    if r == 0.0 {
                        return 0.0;
                    }
                    let p_state = if los { (-beta * r).exp() } else { -(-beta * r).exp_m1() };
                    let pl = r.powf(alpha);
                    let density = 2.0 * PI * lambda_p * r * p_state * (-lambda_p * measure(pl)).exp();
                    if density == 0.0 {
                        return 0.0;
                    }
                    density * bound_at_path_loss(cfg, tier, q, p, pl, with_noise).unwrap_or(f64::NAN)
                };
                total += integrate(f, Domain::SemiInfinite(0.0), &qopts.with_scale(0.5 / lambda_p.sqrt()))?.value;
            }
            Ok(total)
        }
    }
}

/// Per-file bound for one tier, clamped to `[0, 1]`; returns the clamp flag.
pub fn tier_bound(
    cfg: &NetworkConfig,
    tier: Tier,
    file: usize,
    p: f64,
    sdm: &ServingDistanceModel,
    with_noise: bool,
) -> Result<(f64, bool)> {
    if p <= 0.0 || cfg.density(tier) == 0.0 {
        return Ok((0.0, false));
    }
    let raw = match sdm.distance(tier, cfg, p) {
        Some(r) => eval_terms(&bound_terms(cfg, tier, file, r, with_noise)?, p),
        None => contact_averaged(cfg, tier, cfg.sinr_threshold(file), p, with_noise)?,
    };
    if raw.is_nan() {
        return Err(Error::Quadrature { estimate: raw, error_bound: f64::INFINITY });
    }
    let clamped = raw.clamp(0.0, 1.0);
    // Round-off below 1e-12 does not count as leaving the unit interval.
    Ok((clamped, (raw - clamped).abs() > 1e-12))
}

fn tier_report(
    cfg: &NetworkConfig,
    tier: Tier,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
    regime: Regime,
) -> Result<TierReport> {
    let with_noise = regime == Regime::General;
    let values = (0..profile.catalog_size())
        .into_par_iter()
        .map(|i| tier_bound(cfg, tier, i, policy.tier(tier)[i], sdm, with_noise))
        .collect::<Result<Vec<_>>>()?;
    let clamped = values.iter().any(|v| v.1);
    let per_file = values.into_iter().map(|v| v.0).collect();
    Ok(TierReport::new(tier, regime, per_file, profile, clamped))
}

fn bound_report(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
    regime: Regime,
) -> Result<AspReport> {
    cfg.validate()?;
    sdm.validate()?;
    if policy.catalog_size() != profile.catalog_size() {
        return Err(Error::invalid("policy and popularity profile cover different catalogs"));
    }
    let mm = tier_report(cfg, Tier::MmWave, policy, profile, sdm, regime)?;
    let mu = tier_report(cfg, Tier::MuWave, policy, profile, sdm, regime)?;
    asp_total(&mm, &mu, association(cfg)?)
}

/// Upper bound with both noise and interference.
pub fn asp_general_upper_bound(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
) -> Result<AspReport> {
    bound_report(cfg, policy, profile, sdm, Regime::General)
}

/// Interference-limited bound: the general bound with the noise factors removed.
pub fn asp_il(
    cfg: &NetworkConfig,
    policy: &CachingPolicy,
    profile: &PopularityProfile,
    sdm: &ServingDistanceModel,
) -> Result<AspReport> {
    bound_report(cfg, policy, profile, sdm, Regime::InterferenceLimited)
}
