//! Caching placement: the noise-limited dual method, the interference-limited
//! convex-concave procedure and three reference placements.

pub mod baselines;
pub mod dc;
pub mod dual;
mod policy;
pub mod projection;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::popularity::PopularityProfile;

pub use baselines::{baseline_mc, baseline_rc, baseline_uc};
pub use dc::{optimize_dc, optimize_il, solve_dc, DcOptions, DcSplit, DcProblem, DcSolution, DcState, ExpTerm, MONOTONE_SLACK};
pub use dual::{optimize_nl, optimize_nl_opts, optimize_nl_with, DualOptions, DualState, NlSolution};
pub use policy::{CachingPolicy, BUDGET_SLACK};
pub use projection::project_capped_simplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "PROPOSED")]
    Proposed,
    #[serde(rename = "MC")]
    MostPopular,
    #[serde(rename = "UC")]
    Uniform,
    #[serde(rename = "RC")]
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Proposed, Strategy::MostPopular, Strategy::Uniform, Strategy::Random];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Proposed => "PROPOSED",
            Strategy::MostPopular => "MC",
            Strategy::Uniform => "UC",
            Strategy::Random => "RC",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?}")))
    }
}

/// Builds a baseline placement for both tiers. `Proposed` is rejected since
/// it depends on the regime.
pub fn baseline_policy<R: Rng + ?Sized>(
    strategy: Strategy,
    cfg: &NetworkConfig,
    profile: &PopularityProfile,
    rng: &mut R,
) -> Result<CachingPolicy> {
    let l = profile.catalog_size();
    let (p_mm, p_mu) = match strategy {
        Strategy::MostPopular => (baseline_mc(profile, cfg.cache_mm)?, baseline_mc(profile, cfg.cache_mu)?),
        Strategy::Uniform => (baseline_uc(l, cfg.cache_mm)?, baseline_uc(l, cfg.cache_mu)?),
        Strategy::Random => {
            let mm = baseline_rc(l, cfg.cache_mm, rng)?;
            (mm, baseline_rc(l, cfg.cache_mu, rng)?)
        }
        Strategy::Proposed => return Err(Error::invalid("the proposed placement comes from an optimizer")),
    };
    Ok(CachingPolicy { p_mm, p_mu })
}
