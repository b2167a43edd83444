//! Success probability of file delivery.
//!
//! [`asp_nl`] gives the exact noise-limited value; [`asp_general_upper_bound`]
//! and [`asp_il`] give the binomial-sum upper bounds conditioned on a serving
//! distance chosen by a [`ServingDistanceModel`].

pub mod bound;
pub mod kernels;
pub mod nl;

use serde::{Deserialize, Serialize};

use crate::association::Association;
use crate::config::Tier;
use crate::error::{Error, Result};
use crate::popularity::PopularityProfile;

pub use bound::{
    asp_general_upper_bound, asp_il, bound_terms, eval_terms, interference_exponent_mm, interference_exponent_mu,
    tier_bound, BoundTerm, ServingDistanceModel,
};
pub use kernels::{bernoulli_constant_a, binomial, mm_interference_integral, mu_interference_integral};
pub use nl::{asp_nl, asp_nl_mm, asp_nl_mu, nl_constants, nl_k, nl_k_hat, nl_objective, nl_omega, nl_z, NlConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "NL")]
    NoiseLimited,
    #[serde(rename = "IL")]
    InterferenceLimited,
    #[serde(rename = "GENERAL")]
    General,
    #[serde(rename = "SIMULATED")]
    Simulated,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::NoiseLimited => "NL",
            Regime::InterferenceLimited => "IL",
            Regime::General => "GENERAL",
            Regime::Simulated => "SIMULATED",
        }
    }
}

/// Success probabilities conditioned on attaching to one tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    pub tier: Tier,
    pub regime: Regime,
    pub per_file: Vec<f64>,
    pub total: f64,
    /// True when some per-file bound left `[0, 1]` and was clamped.
    pub clamped: bool,
}

impl TierReport {
    pub(crate) fn new(
        tier: Tier,
        regime: Regime,
        per_file: Vec<f64>,
        profile: &PopularityProfile,
        clamped: bool,
    ) -> Self {
        let total = profile.probabilities().iter().zip(&per_file).map(|(f, v)| f * v).sum();
        TierReport { tier, regime, per_file, total, clamped }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspReport {
    pub per_file: Vec<f64>,
    pub total: f64,
    pub regime: Regime,
    pub association: Association,
    pub ci_halfwidth: Option<f64>,
    pub clamped: bool,
}

/// Mixes the two conditional reports by the association probabilities.
pub fn asp_total(mm: &TierReport, mu: &TierReport, association: Association) -> Result<AspReport> {
    if mm.per_file.len() != mu.per_file.len() {
        return Err(Error::invalid(format!(
            "tier reports cover {} and {} files",
            mm.per_file.len(),
            mu.per_file.len()
        )));
    }
    let Association { p_mw, p_muw } = association;
    let per_file = mm.per_file.iter().zip(&mu.per_file).map(|(a, b)| p_mw * a + p_muw * b).collect();
    let regime = if mm.regime == mu.regime { mm.regime } else { Regime::General };
    Ok(AspReport {
        per_file,
        total: p_mw * mm.total + p_muw * mu.total,
        regime,
        association,
        ci_halfwidth: None,
        clamped: mm.clamped || mu.clamped,
    })
}
