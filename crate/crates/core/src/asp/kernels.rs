//! Scalar kernels shared by the bound and noise-limited formulas.

use std::f64::consts::PI;

use crate::channel::{ln_factorial, ln_gamma, regularized_upper_gamma};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Domain, QuadratureOptions};

/// `A = m̂·(m̂!)^{-1/m̂}`, the constant of the Alzer bound on a gamma CDF.
pub fn bernoulli_constant_a(m: u32) -> f64 {
    let m_f = m as f64;
    m_f * (-ln_factorial(m) / m_f).exp()
}

/// Binomial coefficient, exact up to the final rounding for `m ≤ 64`.
pub fn binomial(m: u32, l: u32) -> f64 {
    if l > m {
        return 0.0;
    }
    let l = l.min(m - l);
    let mut c: u128 = 1;
    for k in 0..l {
        c = c * (m - k) as u128 / (k + 1) as u128;
    }
    c as f64
}

/// `E[X^s]` for unit-mean Gamma(m̂, 1/m̂) power.
pub fn fading_moment(m: u32, s: f64) -> f64 {
    let m_f = m as f64;
    (ln_gamma(m_f + s) - ln_gamma(m_f) - s * m_f.ln()).exp()
}

/// Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `1 − (1 + x)^{-m}` without cancellation for small `x`.
fn one_minus_power(x: f64, m: f64) -> f64 {
    -(-m * x.ln_1p()).exp_m1()
}

fn require_decay(alpha: f64, what: &str) -> Result<()> {
    if alpha <= 2.0 {
        return Err(Error::invalid(format!("{what} exponent {alpha} ≤ 2 makes the interference integral diverge")));
    }
    Ok(())
}

fn kernel_options(rel_tol: f64, scale: f64) -> QuadratureOptions {
    QuadratureOptions::default().with_rel_tol(rel_tol).with_abs_tol(1e-300).with_scale(scale)
}

/// `∫₀^∞ f` split at the given feature scales, the last one also setting the tail map.
fn integrate_split<F: Fn(f64) -> f64>(f: F, scales: &[f64], rel_tol: f64) -> Result<f64> {
    let mut breaks: Vec<f64> = scales.iter().copied().filter(|s| *s > 0.0 && s.is_finite()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| *a <= *b * (1.0 + 1e-9));
    let Some(&last) = breaks.last() else {
        return Err(Error::invalid("integration scale must be positive and finite"));
    };
    let qopts = kernel_options(rel_tol, last);
    let mut total = CompensatedSum::default();
    let mut lo = 0.0;
    for &b in &breaks {
        // Panels spanning many decades get geometric intermediate cuts.
        if lo > 0.0 {
            while b / lo > 100.0 {
                total.add(integrate(&f, Domain::Finite(lo, 10.0 * lo), &qopts)?.value);
                lo *= 10.0;
            }
        }
        total.add(integrate(&f, Domain::Finite(lo, b), &qopts)?.value);
        lo = b;
    }
    total.add(integrate(&f, Domain::SemiInfinite(last), &qopts)?.value);
    Ok(total.value())
}

/// Interference integral of a mmWave non-holder field per unit density.
///
/// `c = A·l·Q·r_x^{α_j}/(G_x·m̂)`; the result is
/// `Σ_q Σ_ĵ p_q ∫ 2πr (1 − (1 + c·Ĝ_q·r^{-α_ĵ})^{-m̂}) p_ĵ(r) dr`.
pub fn mm_interference_integral(cfg: &NetworkConfig, c: f64, rel_tol: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("interference coefficient must be nonnegative, got {c}")));
    }
    require_decay(cfg.alpha_nlos, "NLOS")?;
    let m = cfg.nakagami_mm as f64;
    let beta = cfg.beta;
    if beta == 0.0 {
        require_decay(cfg.alpha_los, "LOS")?;
    }
    let mut total = CompensatedSum::default();
    for (gain, prob) in cfg.gain_distribution().classes() {
        if prob == 0.0 {
            continue;
        }
        let k = c * gain;
        // LOS part, damped by e^{-βr}.
        let alpha = cfg.alpha_los;
        let reach = k.powf(1.0 / alpha);
        let damping = if beta > 0.0 { 1.0 / beta } else { reach };
        let los = integrate_split(
            |r: f64| 2.0 * PI * r * one_minus_power(k * r.powf(-alpha), m) * (-beta * r).exp(),
            &[reach, damping],
            rel_tol,
        )?;
        // NLOS part, weighted by 1 − e^{-βr}.
        let nlos = if beta > 0.0 {
            let alpha = cfg.alpha_nlos;
            let reach = k.powf(1.0 / alpha);
            integrate_split(
                |r: f64| -2.0 * PI * r * one_minus_power(k * r.powf(-alpha), m) * (-beta * r).exp_m1(),
                &[reach, 1.0 / beta],
                rel_tol,
            )?
        } else {
            0.0
        };
        total.add(prob * los);
        total.add(prob * nlos);
    }
    Ok(total.value())
}

/// Interference integral of a µWave non-holder field per unit density:
/// `∫ 2πr (1 − (1 + c·r^{-α_µ})^{-m̂}) dr` with `c = A·l·Q·r_x^{α_µ}/m̂`.
pub fn mu_interference_integral(cfg: &NetworkConfig, c: f64, rel_tol: f64) -> Result<f64> {
    mu_kernel(c, cfg.alpha_mu, cfg.nakagami_mu, rel_tol)
}

pub(crate) fn mu_kernel(c: f64, alpha: f64, m: u32, rel_tol: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("interference coefficient must be nonnegative, got {c}")));
    }
    require_decay(alpha, "µWave")?;
    let m = m as f64;
    let reach = c.powf(1.0 / alpha);
    Ok(integrate(
        |r: f64| 2.0 * PI * r * one_minus_power(c * r.powf(-alpha), m),
        Domain::SemiInfinite(0.0),
        &kernel_options(rel_tol, reach),
    )?
    .value)
}

/// Closed form of [`mu_kernel`]: `π c^δ Γ(1 − δ) Γ(m̂ + δ)/Γ(m̂)`, `δ = 2/α`.
pub fn mu_kernel_closed_form(c: f64, alpha: f64, m: u32) -> f64 {
    let d = 2.0 / alpha;
    let m = m as f64;
    PI * c.powf(d) * (ln_gamma(1.0 - d) + ln_gamma(m + d) - ln_gamma(m)).exp()
}

/// `∫₀^∞ 2πr e^{-βr} Q(m̂, m̂ r^α/ω̃) dr`: mean number of points of a
/// unit-density field, thinned by `e^{-βr}`, whose faded SNR clears `1/ω̃`.
pub fn faded_reach_integral(alpha: f64, beta: f64, m: u32, omega: f64, rel_tol: f64) -> Result<f64> {
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let m_f = m as f64;
    let reach = omega.powf(1.0 / alpha);
    let damping = if beta > 0.0 { 1.0 / beta } else { reach };
    integrate_split(
        |r: f64| 2.0 * PI * r * (-beta * r).exp() * regularized_upper_gamma(m, m_f * r.powf(alpha) / omega),
        &[reach, damping],
        rel_tol,
    )
}
