//! Probabilistic edge caching in a hybrid mmWave/µWave cellular network.
//!
//! Base stations of both tiers form independent Poisson point processes and
//! cache file `i` independently with probability `p_i`. The crate evaluates
//! the success probability of file delivery analytically ([`asp`]),
//! optimizes the caching probabilities ([`optimizer`]) and checks both
//! against a Monte Carlo simulator ([`simulator`]).

// `!(x > 0.0)` is how NaN is rejected alongside the range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod asp;
pub mod channel;
pub mod config;
pub mod error;
pub mod optimizer;
pub mod popularity;
pub mod quadrature;
pub mod simulator;

pub use association::{association, association_prob_mu, least_pathloss_cdf, mm_intensity_measure, Association};
pub use asp::{
    asp_general_upper_bound, asp_il, asp_nl, asp_nl_mm, asp_nl_mu, asp_total, AspReport, Regime,
    ServingDistanceModel, TierReport,
};
pub use channel::{AntennaPattern, FadingModel, GainDistribution};
pub use config::{GainConvention, NetworkConfig, Tier};
pub use error::{Error, Result};
pub use optimizer::{optimize_il, optimize_nl, CachingPolicy, Strategy};
pub use popularity::{zipf_popularity, PopularityProfile};
pub use simulator::{estimate_asp, estimate_association, SimEstimate, SimOptions};
