//! Zipf content popularity and independent request sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Request distribution over a catalog of `L` unit-size files.
///
/// Files are indexed `0..L` internally; file `i` here is file `i + 1` in the
/// usual one-based Zipf notation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityProfile {
    zipf_exponent: f64,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Zipf law `f_i ∝ i^{-υ}` over `catalog_size` files.
pub fn zipf_popularity(catalog_size: usize, zipf_exponent: f64) -> Result<PopularityProfile> {
    if catalog_size == 0 {
        return Err(Error::invalid("catalog size must be at least 1"));
    }
    if !(zipf_exponent.is_finite() && zipf_exponent >= 0.0) {
        return Err(Error::invalid(format!("zipf exponent must be finite and nonnegative, got {zipf_exponent}")));
    }
    let weights: Vec<f64> = (1..=catalog_size).map(|i| (i as f64).powf(-zipf_exponent)).collect();
    // Summing smallest-first keeps the normalizer accurate for large catalogs.
    let norm: f64 = weights.iter().rev().sum();
    let probabilities: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    Ok(PopularityProfile::build(zipf_exponent, probabilities))
}

impl PopularityProfile {
    fn build(zipf_exponent: f64, probabilities: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = 0.0;
        for p in &probabilities {
            acc += p;
            cumulative.push(acc);
        }
        PopularityProfile { zipf_exponent, probabilities, cumulative }
    }

    pub fn catalog_size(&self) -> usize {
        self.probabilities.len()
    }

    pub fn zipf_exponent(&self) -> f64 {
        self.zipf_exponent
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, file: usize) -> f64 {
        self.probabilities[file]
    }

    /// Draws a zero-based file index by inverse CDF.
    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.probabilities.len() - 1)
    }
}

/// Free-function form of [`PopularityProfile::sample_request`].
pub fn sample_request<R: Rng + ?Sized>(profile: &PopularityProfile, rng: &mut R) -> usize {
    profile.sample_request(rng)
}
