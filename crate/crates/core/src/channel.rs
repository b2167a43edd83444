//! Path loss, blockage, sectorized antenna gains and Nakagami fading.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-level sectorized antenna pattern with linear power gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub beamwidth: f64,
    pub main_gain: f64,
    pub side_gain: f64,
}

impl AntennaPattern {
    pub fn new(beamwidth: f64, main_gain: f64, side_gain: f64) -> Result<Self> {
        let p = AntennaPattern { beamwidth, main_gain, side_gain };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beamwidth > 0.0 && self.beamwidth < 2.0 * PI) {
            return Err(Error::invalid(format!("beamwidth must lie in (0, 2π), got {}", self.beamwidth)));
        }
        if !(self.side_gain > 0.0 && self.main_gain > self.side_gain && self.main_gain.is_finite()) {
            return Err(Error::invalid("antenna gains must satisfy main > side > 0"));
        }
        Ok(())
    }

    /// Gain of a perfectly aligned link, main lobe on both ends.
    pub fn aligned_gain(&self) -> f64 {
        self.main_gain * self.main_gain
    }
}

/// Distribution of the product of transmit and receive gains on a randomly
/// oriented link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainDistribution {
    /// `(gain, probability)` for main/main, main/side, side/main, side/side.
    pub outcomes: [(f64, f64); 4],
}

impl GainDistribution {
    /// Gain classes with the two mixed outcomes merged: `{G_M², G_M·G_m, G_m²}`.
    pub fn classes(&self) -> [(f64, f64); 3] {
        let o = &self.outcomes;
        [o[0], (o[1].0, o[1].1 + o[2].1), o[3]]
    }

    pub fn mean_gain(&self) -> f64 {
        self.outcomes.iter().map(|(g, p)| g * p).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }

    /// Draws one of the three merged classes, returning its index.
    pub fn sample_class<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let c = self.classes();
        let u: f64 = rng.random();
        if u < c[0].1 {
            0
        } else if u < c[0].1 + c[1].1 {
            1
        } else {
            2
        }
    }
}

pub fn effective_gain_distribution(pattern: &AntennaPattern) -> GainDistribution {
    let q = pattern.beamwidth / (2.0 * PI);
    let (gm, gs) = (pattern.main_gain, pattern.side_gain);
    let mixed = q * (1.0 - q);
    GainDistribution {
        outcomes: [(gm * gm, q * q), (gm * gs, mixed), (gs * gm, mixed), (gs * gs, (1.0 - q) * (1.0 - q))],
    }
}

/// Nakagami-m̂ power fading: Gamma(m̂, 1/m̂), unit mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FadingModel {
    pub order: u32,
}

impl FadingModel {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("Nakagami order must be at least 1"));
        }
        Ok(FadingModel { order })
    }

    pub fn distribution(&self) -> Gamma<f64> {
        let m = self.order as f64;
        Gamma::new(m, 1.0 / m).expect("positive shape and scale")
    }

    /// Density of the channel power at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let m = self.order as f64;
        (m * m.ln() + (m - 1.0) * x.ln() - m * x - ln_gamma(m)).exp()
    }
}

pub fn nakagami_power_sample<R: Rng + ?Sized>(model: &FadingModel, rng: &mut R) -> f64 {
    model.distribution().sample(rng)
}

pub fn los_probability(r: f64, beta: f64) -> Result<f64> {
    if !(r >= 0.0 && beta >= 0.0) {
        return Err(Error::invalid(format!("distance and blockage density must be nonnegative (r={r}, β={beta})")));
    }
    Ok((-beta * r).exp())
}

pub fn path_loss(r: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("path loss undefined at r = {r}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("path-loss exponent must be positive, got {alpha}")));
    }
    Ok(r.powf(-alpha))
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln(m!) for integer m.
pub fn ln_factorial(m: u32) -> f64 {
    ln_gamma(m as f64 + 1.0)
}

/// Regularized upper incomplete gamma `Q(m, x) = Γ(m, x)/Γ(m)` for integer `m ≥ 1`.
pub fn regularized_upper_gamma(m: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    // Q(m, x) = e^{-x} Σ_{k<m} x^k/k!, each term formed in log space.
    let lx = x.ln();
    let mut sum = 0.0;
    for k in (0..m).rev() {
        sum += (k as f64 * lx - x - ln_factorial(k)).exp();
    }
    sum.min(1.0)
}
