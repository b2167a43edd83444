//! Network parameters shared by the analytic, optimization and simulation code.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{effective_gain_distribution, AntennaPattern, FadingModel, GainDistribution};
use crate::error::{Error, Result};

/// Highest supported Nakagami order; binomial coefficients beyond this lose
/// too much precision in the alternating sums.
pub const MAX_NAKAGAMI_ORDER: u32 = 64;

/// Largest per-file rate in bits/s/Hz on the normalized bandwidth.
pub const RHO_MAX: f64 = 1.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// How the tabulated antenna gains are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GainConvention {
    /// Mainlobe gain taken as the bare number 15, so the aligned gain is 225.
    #[default]
    Table,
    /// Mainlobe gain 15 dB, aligned gain 30 dB.
    Decibel,
}

impl GainConvention {
    pub fn pattern(self, beamwidth: f64, main_db: f64, side_db: f64) -> AntennaPattern {
        match self {
            GainConvention::Table => AntennaPattern {
                beamwidth,
                main_gain: main_db,
                side_gain: db_to_linear(side_db),
            },
            GainConvention::Decibel => AntennaPattern {
                beamwidth,
                main_gain: db_to_linear(main_db),
                side_gain: db_to_linear(side_db),
            },
        }
    }
}

/// Which network a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    MmWave,
    MuWave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub lambda_mm: f64,
    pub lambda_mu: f64,
    pub beta: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub alpha_mu: f64,
    pub power_mm: f64,
    pub power_mu: f64,
    /// Association bias; `None` means `1/power`.
    pub bias_mm: Option<f64>,
    pub bias_mu: Option<f64>,
    pub noise_mm: f64,
    pub noise_mu: f64,
    pub radius: f64,
    pub pattern: AntennaPattern,
    /// Gain of the aligned serving mmWave link.
    pub serving_gain: f64,
    pub nakagami_mm: u32,
    pub nakagami_mu: u32,
    pub cache_mm: usize,
    pub cache_mu: usize,
    /// Rate threshold `ρ = N·ν` shared by every file unless `file_rates` is set.
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub file_rates: Vec<f64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl NetworkConfig {
    /// Default scenario: 54/104 dB SNR, π/6 beams, 10 files, caches of 5 and 6.
    pub fn baseline() -> Self {
        Self::with_convention(GainConvention::Table)
    }

    pub fn with_convention(convention: GainConvention) -> Self {
        let pattern = convention.pattern(PI / 6.0, 15.0, -15.0);
        NetworkConfig {
            lambda_mm: 5e-5,
            lambda_mu: 1e-6,
            beta: 0.008,
            alpha_los: 2.0,
            alpha_nlos: 4.0,
            alpha_mu: 3.5,
            power_mm: 1.0,
            power_mu: 1.0,
            bias_mm: None,
            bias_mu: None,
            noise_mm: 1.0 / db_to_linear(54.0),
            noise_mu: 1.0 / db_to_linear(104.0),
            radius: 500.0,
            serving_gain: pattern.aligned_gain(),
            pattern,
            nakagami_mm: 10,
            nakagami_mu: 1,
            cache_mm: 5,
            cache_mu: 6,
            rate: 0.8,
            file_rates: Vec::new(),
        }
    }

    /// Interference-limited scenario: denser µWave tier, lighter blockage, low rate.
    pub fn interference_limited() -> Self {
        NetworkConfig { lambda_mu: 1e-5, beta: 0.005, rate: 0.08, ..Self::baseline() }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [("lambda_mm", self.lambda_mm), ("lambda_mu", self.lambda_mu), ("beta", self.beta)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        let positive = [
            ("power_mm", self.power_mm),
            ("power_mu", self.power_mu),
            ("radius", self.radius),
            ("serving_gain", self.serving_gain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and positive, got {v}")));
            }
        }
        for (name, v) in [("noise_mm", self.noise_mm), ("noise_mu", self.noise_mu)] {
            if !(v >= 0.0) || v.is_nan() {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        for (name, b) in [("bias_mm", self.bias_mm), ("bias_mu", self.bias_mu)] {
            if let Some(b) = b {
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be finite and positive, got {b}")));
                }
            }
        }
        // The NLOS and µWave tails need α > 2; LOS links are damped by e^{-βr}
        // whenever β > 0, so only the unblocked case needs α_L > 2.
        if !(self.alpha_nlos > 2.0 && self.alpha_mu > 2.0) {
            return Err(Error::invalid("NLOS and µWave path-loss exponents must exceed 2"));
        }
        let los_floor = if self.beta > 0.0 { 0.0 } else { 2.0 };
        if !(self.alpha_los > los_floor && self.alpha_los.is_finite()) {
            return Err(Error::invalid(format!(
                "LOS path-loss exponent must exceed {los_floor} at β = {}",
                self.beta
            )));
        }
        for (name, m) in [("nakagami_mm", self.nakagami_mm), ("nakagami_mu", self.nakagami_mu)] {
            if m == 0 || m > MAX_NAKAGAMI_ORDER {
                return Err(Error::invalid(format!("{name} must lie in 1..={MAX_NAKAGAMI_ORDER}, got {m}")));
            }
        }
        self.pattern.validate()?;
        for &r in std::iter::once(&self.rate).chain(&self.file_rates) {
            if !(r > 0.0 && r <= RHO_MAX) {
                return Err(Error::invalid(format!("rate must lie in (0, {RHO_MAX}], got {r}")));
            }
        }
        Ok(())
    }

    /// Checks cache budgets and per-file rates against a catalog size.
    pub fn validate_for_catalog(&self, catalog_size: usize) -> Result<()> {
        self.validate()?;
        if self.cache_mm > catalog_size || self.cache_mu > catalog_size {
            return Err(Error::invalid(format!(
                "cache sizes ({}, {}) exceed catalog size {catalog_size}",
                self.cache_mm, self.cache_mu
            )));
        }
        if !self.file_rates.is_empty() && self.file_rates.len() != catalog_size {
            return Err(Error::invalid(format!(
                "{} per-file rates given for a catalog of {catalog_size}",
                self.file_rates.len()
            )));
        }
        Ok(())
    }

    pub fn rate_of(&self, file: usize) -> f64 {
        self.file_rates.get(file).copied().unwrap_or(self.rate)
    }

    /// SINR threshold `Q_i = 2^{ρ_i} − 1`.
    pub fn sinr_threshold(&self, file: usize) -> f64 {
        (self.rate_of(file) * std::f64::consts::LN_2).exp_m1()
    }

    pub fn effective_bias_mm(&self) -> f64 {
        self.bias_mm.unwrap_or(1.0 / self.power_mm)
    }

    pub fn effective_bias_mu(&self) -> f64 {
        self.bias_mu.unwrap_or(1.0 / self.power_mu)
    }

    /// Biased long-term mmWave power `P_m·G_x·B_m`.
    pub fn biased_power_mm(&self) -> f64 {
        self.power_mm * self.serving_gain * self.effective_bias_mm()
    }

    pub fn biased_power_mu(&self) -> f64 {
        self.power_mu * self.effective_bias_mu()
    }

    /// mmWave SNR `η = P_m/σ²_m`.
    pub fn snr_mm(&self) -> f64 {
        self.power_mm / self.noise_mm
    }

    pub fn snr_mu(&self) -> f64 {
        self.power_mu / self.noise_mu
    }

    pub fn gain_distribution(&self) -> GainDistribution {
        effective_gain_distribution(&self.pattern)
    }

    pub fn fading(&self, tier: Tier) -> FadingModel {
        FadingModel {
            order: match tier {
                Tier::MmWave => self.nakagami_mm,
                Tier::MuWave => self.nakagami_mu,
            },
        }
    }

    pub fn density(&self, tier: Tier) -> f64 {
        match tier {
            Tier::MmWave => self.lambda_mm,
            Tier::MuWave => self.lambda_mu,
        }
    }

    pub fn cache_size(&self, tier: Tier) -> usize {
        match tier {
            Tier::MmWave => self.cache_mm,
            Tier::MuWave => self.cache_mu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_values() {
        let c = NetworkConfig::baseline();
        c.validate_for_catalog(10).unwrap();
        assert_eq!(c.serving_gain, 225.0);
        assert!((linear_to_db(c.snr_mm()) - 54.0).abs() < 1e-9);
        assert!((linear_to_db(c.snr_mu()) - 104.0).abs() < 1e-9);
        assert!((c.sinr_threshold(0) - (2f64.powf(0.8) - 1.0)).abs() < 1e-15);
        assert_eq!(c.effective_bias_mm(), 1.0);
    }

    #[test]
    fn decibel_convention() {
        let c = NetworkConfig::with_convention(GainConvention::Decibel);
        assert!((c.serving_gain - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn interference_limited_overrides() {
        let c = NetworkConfig::interference_limited();
        assert_eq!((c.lambda_mu, c.beta, c.rate), (1e-5, 0.005, 0.08));
        assert_eq!(c.lambda_mm, 5e-5);
    }

    #[test]
    fn rejects_invalid() {
        let base = NetworkConfig::baseline();
        let bad = [
            NetworkConfig { alpha_nlos: 2.0, ..base.clone() },
            NetworkConfig { alpha_mu: 1.5, ..base.clone() },
            NetworkConfig { alpha_los: 2.0, beta: 0.0, ..base.clone() },
            NetworkConfig { nakagami_mm: 0, ..base.clone() },
            NetworkConfig { nakagami_mm: 65, ..base.clone() },
            NetworkConfig { rate: 0.0, ..base.clone() },
            NetworkConfig { rate: 1.5, ..base.clone() },
            NetworkConfig { lambda_mm: -1.0, ..base.clone() },
            NetworkConfig { radius: 0.0, ..base.clone() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(base.validate_for_catalog(4).is_err());
        assert!(NetworkConfig { file_rates: vec![0.5; 3], ..base }.validate_for_catalog(10).is_err());
    }
}
