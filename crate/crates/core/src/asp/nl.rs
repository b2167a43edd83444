//! Noise-limited success probabilities.
//!
//! Without interference the faded SNRs of the file-`i` holders form a PPP,
//! so the probability that the best of them clears `Q_i` is
//! `1 − exp(−p_i·K_i)` where `K_i` is the mean number of holders, at unit
//! caching probability, whose SNR exceeds the threshold.

use std::f64::consts::PI;

use crate::asp::kernels::{fading_moment, faded_reach_integral};
use crate::asp::{Regime, TierReport};
use crate::association::association;
use crate::channel::ln_gamma;
use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::optimizer::CachingPolicy;
use crate::popularity::PopularityProfile;
use crate::asp::AspReport;

const NL_REL_TOL: f64 = 1e-10;

fn los_exponent(cfg: &NetworkConfig, los: bool) -> f64 {
    if los {
        cfg.alpha_los
    } else {
        cfg.alpha_nlos
    }
}

/// `k_j = c_j·π·λ_m·m̂^{m̂}·δ_j/Γ(m̂)` with `c_L = 1`, `c_N = −1`.
pub fn nl_k(cfg: &NetworkConfig, los: bool) -> f64 {
    let m = cfg.nakagami_mm as f64;
    let delta = 2.0 / los_exponent(cfg, los);
    let sign = if los { 1.0 } else { -1.0 };
    sign * PI * cfg.lambda_mm * (m * m.ln() + delta.ln() - ln_gamma(m)).exp()
}

/// `k̂ = π·λ_m·Γ(δ_N + m̂)/(m̂^{δ_N}·Γ(m̂))`.
pub fn nl_k_hat(cfg: &NetworkConfig) -> f64 {
    PI * cfg.lambda_mm * fading_moment(cfg.nakagami_mm, 2.0 / cfg.alpha_nlos)
}

/// `Z_j(ω̃) = ∫₀^∞ ∫₀^{ω̃} e^{-m̂ψ/ω} ω^{-(m̂+1)} dω · ψ^{δ_j+m̂−1} e^{-βψ^{δ_j/2}} dψ`.
///
/// The inner integral is `Γ(m̂, m̂ψ/ω̃)/(m̂ψ)^{m̂}`, an upper incomplete
/// gamma, which leaves a single radial integral after `ψ = r^{α_j}`.
pub fn nl_z(cfg: &NetworkConfig, los: bool, omega: f64) -> Result<f64> {
    let m = cfg.nakagami_mm as f64;
    let alpha = los_exponent(cfg, los);
    let delta = 2.0 / alpha;
    let radial = faded_reach_integral(alpha, cfg.beta, cfg.nakagami_mm, omega, NL_REL_TOL)?;
    Ok(radial / PI * (ln_gamma(m) - m * m.ln() - delta.ln()).exp())
}

/// `ω̃_i = η·G_x/Q_i`.
pub fn nl_omega(cfg: &NetworkConfig, file: usize) -> f64 {
    cfg.snr_mm() * cfg.serving_gain / cfg.sinr_threshold(file)
}

/// `A_i + B_i = Σ_j k_j Z_j(ω̃) + k̂ ω̃^{δ_N}`.
pub fn nl_mm_exponent(cfg: &NetworkConfig, omega: f64) -> Result<f64> {
    if cfg.lambda_mm == 0.0 || omega == 0.0 {
        return Ok(0.0);
    }
    if omega.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let los = nl_k(cfg, true) * nl_z(cfg, true, omega)?;
    let nlos = nl_k(cfg, false) * nl_z(cfg, false, omega)?;
    let all = nl_k_hat(cfg) * omega.powf(2.0 / cfg.alpha_nlos);
    Ok((los + nlos + all).max(0.0))
}

/// `k̃·T̂_i` generalized to any Nakagami order: `π λ_µ E[X^{δ_µ}] (η̃/Q_i)^{δ_µ}`.
pub fn nl_mu_exponent(cfg: &NetworkConfig, file: usize) -> f64 {
    let delta = 2.0 / cfg.alpha_mu;
    let t_hat = (cfg.snr_mu() / cfg.sinr_threshold(file)).powf(delta);
    PI * cfg.lambda_mu * fading_moment(cfg.nakagami_mu, delta) * t_hat
}

/// Per-file exponents `K_i` such that the conditional NL success of file `i`
/// is `1 − exp(−p_i K_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlConstants {
    pub mm: Vec<f64>,
    pub mu: Vec<f64>,
}

impl NlConstants {
    pub fn tier(&self, tier: Tier) -> &[f64] {
        match tier {
            Tier::MmWave => &self.mm,
            Tier::MuWave => &self.mu,
        }
    }
}

pub fn nl_constants(cfg: &NetworkConfig, catalog_size: usize) -> Result<NlConstants> {
    cfg.validate()?;
    let mm = (0..catalog_size).map(|i| nl_mm_exponent(cfg, nl_omega(cfg, i))).collect::<Result<Vec<_>>>()?;
    let mu = (0..catalog_size).map(|i| nl_mu_exponent(cfg, i)).collect();
    Ok(NlConstants { mm, mu })
}

fn check_shapes(policy: &CachingPolicy, profile: &PopularityProfile) -> Result<()> {
    if policy.catalog_size() != profile.catalog_size() {
        return Err(Error::invalid(format!(
            "policy covers {} files, catalog has {}",
            policy.catalog_size(),
            profile.catalog_size()
        )));
    }
    Ok(())
}

fn tier_report(tier: Tier, k: &[f64], p: &[f64], profile: &PopularityProfile) -> TierReport {
    let per_file: Vec<f64> = k.iter().zip(p).map(|(&k, &p)| -(-p * k).exp_m1()).collect();
    TierReport::new(tier, Regime::NoiseLimited, per_file, profile, false)
}

pub fn asp_nl_mm(cfg: &NetworkConfig, policy: &CachingPolicy, profile: &PopularityProfile) -> Result<TierReport> {
    check_shapes(policy, profile)?;
    cfg.validate()?;
    let k = (0..profile.catalog_size())
        .map(|i| nl_mm_exponent(cfg, nl_omega(cfg, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(tier_report(Tier::MmWave, &k, &policy.p_mm, profile))
}

pub fn asp_nl_mu(cfg: &NetworkConfig, policy: &CachingPolicy, profile: &PopularityProfile) -> Result<TierReport> {
    check_shapes(policy, profile)?;
    cfg.validate()?;
    let k: Vec<f64> = (0..profile.catalog_size()).map(|i| nl_mu_exponent(cfg, i)).collect();
    Ok(tier_report(Tier::MuWave, &k, &policy.p_mu, profile))
}

/// Association-weighted NL success probability.
pub fn asp_nl(cfg: &NetworkConfig, policy: &CachingPolicy, profile: &PopularityProfile) -> Result<AspReport> {
    let mm = asp_nl_mm(cfg, policy, profile)?;
    let mu = asp_nl_mu(cfg, policy, profile)?;
    crate::asp::asp_total(&mm, &mu, association(cfg)?)
}

/// NL objective from precomputed exponents, weighted by association.
pub fn nl_objective(k: &NlConstants, policy: &CachingPolicy, profile: &PopularityProfile, p_mw: f64) -> f64 {
    let f = profile.probabilities();
    let tier = |k: &[f64], p: &[f64]| -> f64 {
        f.iter().zip(k).zip(p).map(|((f, k), p)| -f * (-p * k).exp_m1()).sum()
    };
    p_mw * tier(&k.mm, &policy.p_mm) + (1.0 - p_mw) * tier(&k.mu, &policy.p_mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf_popularity;
    use crate::quadrature::{integrate, Domain, QuadratureOptions};

    /// The double integral evaluated directly. The inner integral runs over
    /// `v = ln(ω/ψ)`, where `e^{-m̂ψ/ω} ω^{-(m̂+1)} dω = ψ^{-m̂} e^{-m̂e^{-v} - m̂v} dv`.
    fn z_double_integral(cfg: &NetworkConfig, los: bool, omega: f64) -> f64 {
        let m = cfg.nakagami_mm as f64;
        let alpha = los_exponent(cfg, los);
        let delta = 2.0 / alpha;
        let qopts = QuadratureOptions::default().with_rel_tol(1e-12).with_abs_tol(1e-300);
        let inner = |psi: f64| -> f64 {
            let hi = (omega / psi).ln();
            let lo = -(745.0 / m).ln();
            if hi <= lo {
                return 0.0;
            }
            integrate(|v: f64| (-m * (-v).exp() - m * v).exp(), Domain::Finite(lo, hi), &qopts)
                .unwrap()
                .value
        };
        let reach = omega.powf(1.0 / alpha).min(1.0 / cfg.beta);
        integrate(
            |t: f64| {
                if t == 0.0 {
                    return 0.0;
                }
                let psi = t.powf(alpha);
                // ψ^{-m̂}·ψ^{δ+m̂-1} = ψ^{δ-1}; dψ = α t^{α-1} dt.
                inner(psi) * psi.powf(delta - 1.0) * (-cfg.beta * t).exp() * alpha * t.powf(alpha - 1.0)
            },
            Domain::SemiInfinite(0.0),
            &qopts.with_rel_tol(1e-11).with_scale(reach),
        )
        .unwrap()
        .value
    }

    #[test]
    fn z_closed_form_matches_double_integral() {
        for (m, beta) in [(3, 0.008), (1, 0.02)] {
            let cfg = NetworkConfig { nakagami_mm: m, beta, ..NetworkConfig::baseline() };
            for los in [true, false] {
                for omega in [10.0, 1e3, 1e5] {
                    let a = nl_z(&cfg, los, omega).unwrap();
                    let b = z_double_integral(&cfg, los, omega);
                    assert!((a - b).abs() <= 1e-7 * b.abs(), "m={m} los={los} ω={omega}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_policy_gives_zero() {
        let cfg = NetworkConfig::baseline();
        let profile = zipf_popularity(10, 0.8).unwrap();
        let r = asp_nl(&cfg, &CachingPolicy::uniform(10, 0.0), &profile).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r.per_file.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn high_snr_drives_success_to_one() {
        let cfg = NetworkConfig { noise_mm: 1e-40, noise_mu: 1e-60, ..NetworkConfig::baseline() };
        let profile = zipf_popularity(10, 0.8).unwrap();
        let mm = asp_nl_mm(&cfg, &CachingPolicy::uniform(10, 0.01), &profile).unwrap();
        assert!(mm.per_file.iter().all(|&x| x > 1.0 - 1e-9));
        let dense = NetworkConfig { lambda_mu: 1.0, ..NetworkConfig::baseline() };
        let mu = asp_nl_mu(&dense, &CachingPolicy::uniform(10, 0.5), &profile).unwrap();
        assert!((mu.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_mu_constant() {
        let cfg = NetworkConfig::baseline();
        let delta = 2.0 / cfg.alpha_mu;
        let k = PI * cfg.lambda_mu * libm::tgamma(1.0 + delta) * (cfg.snr_mu() / cfg.sinr_threshold(0)).powf(delta);
        assert!((nl_mu_exponent(&cfg, 0) - k).abs() < 1e-12 * k);
    }

    #[test]
    fn monotone_in_snr_density_and_threshold() {
        let base = NetworkConfig::baseline();
        let mut prev = 0.0;
        for snr_db in [20.0, 40.0, 54.0, 70.0] {
            let cfg = NetworkConfig { noise_mm: 10f64.powf(-snr_db / 10.0), ..base.clone() };
            let k = nl_mm_exponent(&cfg, nl_omega(&cfg, 0)).unwrap();
            assert!(k >= prev);
            prev = k;
        }
        let mut prev = 0.0;
        for lambda in [1e-6, 1e-5, 5e-5, 1e-4] {
            let cfg = NetworkConfig { lambda_mm: lambda, lambda_mu: lambda, ..base.clone() };
            let k = nl_mm_exponent(&cfg, nl_omega(&cfg, 0)).unwrap() + nl_mu_exponent(&cfg, 0);
            assert!(k >= prev);
            prev = k;
        }
        let mut prev = f64::INFINITY;
        for rate in [0.1, 0.4, 0.8, 1.0] {
            let cfg = NetworkConfig { rate, ..base.clone() };
            let k = nl_mm_exponent(&cfg, nl_omega(&cfg, 0)).unwrap();
            assert!(k <= prev);
            prev = k;
        }
    }
}
