//! Fixtures shared by the benchmarks.

use hybridcache::optimizer::{baseline_uc, CachingPolicy};
use hybridcache::{zipf_popularity, NetworkConfig, PopularityProfile};

pub struct Scenario {
    pub cfg: NetworkConfig,
    pub profile: PopularityProfile,
    pub uniform: CachingPolicy,
}

impl Scenario {
    pub fn new(cfg: NetworkConfig, catalog_size: usize, zipf_exponent: f64) -> Self {
        let profile = zipf_popularity(catalog_size, zipf_exponent).expect("valid popularity");
        let uniform = CachingPolicy {
            p_mm: baseline_uc(catalog_size, cfg.cache_mm).expect("cache fits"),
            p_mu: baseline_uc(catalog_size, cfg.cache_mu).expect("cache fits"),
        };
        Scenario { cfg, profile, uniform }
    }

    /// Default network, ten files, υ = 0.8.
    pub fn noise_limited() -> Self {
        Self::new(NetworkConfig::baseline(), 10, 0.8)
    }

    /// Denser µWave tier, lighter blockage, low rate.
    pub fn interference_limited() -> Self {
        Self::new(NetworkConfig::interference_limited(), 10, 0.8)
    }
}
