use serde::{Deserialize, Serialize};

use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};

/// Slack allowed on the cache budgets.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Per-file caching probabilities for both tiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachingPolicy {
    pub p_mm: Vec<f64>,
    pub p_mu: Vec<f64>,
}

impl CachingPolicy {
    pub fn new(p_mm: Vec<f64>, p_mu: Vec<f64>) -> Result<Self> {
        if p_mm.len() != p_mu.len() {
            return Err(Error::invalid(format!(
                "tier policies cover {} and {} files",
                p_mm.len(),
                p_mu.len()
            )));
        }
        let policy = CachingPolicy { p_mm, p_mu };
        for &p in policy.p_mm.iter().chain(&policy.p_mu) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("caching probability {p} outside [0, 1]")));
            }
        }
        Ok(policy)
    }

    pub fn uniform(catalog_size: usize, p: f64) -> Self {
        CachingPolicy { p_mm: vec![p; catalog_size], p_mu: vec![p; catalog_size] }
    }

    pub fn catalog_size(&self) -> usize {
        self.p_mm.len()
    }

    pub fn tier(&self, tier: Tier) -> &[f64] {
        match tier {
            Tier::MmWave => &self.p_mm,
            Tier::MuWave => &self.p_mu,
        }
    }

    pub fn tier_mut(&mut self, tier: Tier) -> &mut Vec<f64> {
        match tier {
            Tier::MmWave => &mut self.p_mm,
            Tier::MuWave => &mut self.p_mu,
        }
    }

    /// Checks the box constraints and both cache budgets.
    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        CachingPolicy::new(self.p_mm.clone(), self.p_mu.clone())?;
        for tier in [Tier::MmWave, Tier::MuWave] {
            let used: f64 = self.tier(tier).iter().sum();
            let budget = cfg.cache_size(tier) as f64;
            if used > budget + BUDGET_SLACK {
                return Err(Error::invalid(format!("{tier:?} policy uses {used} of a {budget}-file cache")));
            }
        }
        Ok(())
    }
}
