//! Least-path-loss association between the mmWave and µWave tiers.
//!
//! Path losses are measured in the biased domain `r^α/(P·G·B)`, so the
//! mmWave tier maps to a one-dimensional PPP on `[0, ∞)` whose mean measure
//! is [`mm_intensity_measure`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Domain, QuadratureOptions};

/// `1 − e^{-y}(1 + y)`, accurate for small `y`.
fn los_shape(y: f64) -> f64 {
    if y < 0.5 {
        // Σ_{k≥2} (−1)^k (k−1) y^k / k!
        let mut term = y * y / 2.0;
        let mut sum = term;
        for k in 3..30 {
            term *= -y / k as f64;
            let c = (k - 1) as f64 * term;
            sum += c;
            if c.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        -(-y).exp_m1() - y * (-y).exp()
    }
}

/// `y²/2 − (1 − e^{-y}(1 + y))`, accurate for small `y`.
fn nlos_shape(y: f64) -> f64 {
    if y < 0.5 {
        // Σ_{k≥3} (−1)^{k+1} (k−1) y^k / k!
        let mut term = y * y / 2.0;
        let mut sum = 0.0;
        for k in 3..30 {
            term *= -y / k as f64;
            let c = -((k - 1) as f64) * term;
            sum += c;
            if c.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        0.5 * y * y - los_shape(y)
    }
}

/// `2π ∫₀^d x e^{-βx} dx`.
pub fn los_disk_mass(d: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return PI * d * d;
    }
    2.0 * PI * los_shape(beta * d) / (beta * beta)
}

/// `2π ∫₀^d x (1 − e^{-βx}) dx`.
pub fn nlos_disk_mass(d: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    2.0 * PI * nlos_shape(beta * d) / (beta * beta)
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("path-loss threshold must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Expected number of mmWave BSs with biased path loss at most `t`.
pub fn mm_intensity_measure(t: f64, cfg: &NetworkConfig) -> Result<f64> {
    check_threshold(t)?;
    Ok(mm_measure_unchecked(t, cfg.lambda_mm, cfg))
}

pub(crate) fn mm_measure_unchecked(t: f64, lambda: f64, cfg: &NetworkConfig) -> f64 {
    if t == 0.0 || lambda == 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return f64::INFINITY;
    }
    let s = t * cfg.biased_power_mm();
    let d_los = s.powf(1.0 / cfg.alpha_los);
    let d_nlos = s.powf(1.0 / cfg.alpha_nlos);
    lambda * (los_disk_mass(d_los, cfg.beta) + nlos_disk_mass(d_nlos, cfg.beta))
}

/// Expected number of µWave BSs with biased path loss at most `t`.
pub fn mu_intensity_measure(t: f64, cfg: &NetworkConfig) -> Result<f64> {
    check_threshold(t)?;
    Ok(PI * cfg.lambda_mu * (t * cfg.biased_power_mu()).powf(2.0 / cfg.alpha_mu))
}

/// CDF of the least biased mmWave path loss seen by the typical user.
pub fn least_pathloss_cdf(t: f64, cfg: &NetworkConfig) -> Result<f64> {
    Ok(-(-mm_intensity_measure(t, cfg)?).exp_m1())
}

/// Inverse of [`least_pathloss_cdf`] by bisection in log space.
pub fn least_pathloss_quantile(q: f64, cfg: &NetworkConfig) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if cfg.lambda_mm == 0.0 {
        return Ok(f64::INFINITY);
    }
    let target = -(-q).ln_1p();
    Ok(invert_measure(|t| mm_measure_unchecked(t, cfg.lambda_mm, cfg), target))
}

fn invert_measure<F: Fn(f64) -> f64>(measure: F, target: f64) -> f64 {
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    while measure(hi) < target {
        hi *= 1e3;
    }
    for _ in 0..200 {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if measure(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Probabilities of attaching to each tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub p_mw: f64,
    pub p_muw: f64,
}

impl Association {
    pub fn from_mu(p_muw: f64) -> Self {
        let p_muw = p_muw.clamp(0.0, 1.0);
        Association { p_mw: 1.0 - p_muw, p_muw }
    }
}

/// Probability that the typical user attaches to the µWave tier.
pub fn association_prob_mu(cfg: &NetworkConfig) -> Result<f64> {
    cfg.validate()?;
    let lambda_mu = cfg.lambda_mu;
    if lambda_mu == 0.0 {
        // Both tiers empty resolves to the denser tier; with λ_µ = 0 that is never µWave.
        return Ok(0.0);
    }
    if cfg.lambda_mm == 0.0 {
        return Ok(1.0);
    }
    let pmu = cfg.biased_power_mu();
    let alpha_mu = cfg.alpha_mu;
    let mm_void = |r: f64| mm_measure_unchecked(r.powf(alpha_mu) / pmu, cfg.lambda_mm, cfg);
    // Length scale: the smaller of the µWave contact distance and the radius
    // at which a mmWave BS is expected to beat the µWave one.
    let rayleigh = 0.5 / lambda_mu.sqrt();
    let crossover = invert_measure(mm_void, 1.0);
    let scale = rayleigh.min(crossover).max(1e-6);
    let integrand = |r: f64| {
        let expo = mm_void(r) + PI * lambda_mu * r * r;
        2.0 * PI * lambda_mu * r * (-expo).exp()
    };
    let qopts = QuadratureOptions::default().with_scale(scale).with_abs_tol(1e-15);
    let value = integrate(integrand, Domain::SemiInfinite(0.0), &qopts)?.value;
    Ok(value.clamp(0.0, 1.0))
}

pub fn association(cfg: &NetworkConfig) -> Result<Association> {
    Ok(Association::from_mu(association_prob_mu(cfg)?))
}
