//! End-to-end acceptance gate: one line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use hybridcache::asp::{nl_objective, nl_constants, nl_z, NlConstants};
use hybridcache::asp::mu_interference_integral;
use hybridcache::optimizer::{baseline_policy, optimize_dc, DcOptions, DcSolution, DcSplit, MONOTONE_SLACK};
use hybridcache::quadrature::{integrate, Domain, QuadratureOptions};
use hybridcache::simulator::sample_ppp;
use hybridcache::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Window large enough that truncation does not bias the comparisons.
const VALIDATION_RADIUS: f64 = 2500.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, failures: &mut Vec<String>, msg: impl Into<String>) {
    if !cond {
        failures.push(msg.into());
    }
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        Outcome { pass: false, detail: format!("{summary}; {}", failures.join("; ")) }
    }
}

fn sim(cfg: &NetworkConfig, policy: &CachingPolicy, profile: &PopularityProfile, regime: Regime, seed: u64) -> SimEstimate {
    let opts = SimOptions::new(regime, 10_000, seed).with_radius(VALIDATION_RADIUS);
    estimate_asp(cfg, policy, profile, &opts).expect("simulation")
}

fn uniform(cfg: &NetworkConfig, profile: &PopularityProfile) -> CachingPolicy {
    baseline_policy(Strategy::Uniform, cfg, profile, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

fn most_popular(cfg: &NetworkConfig, profile: &PopularityProfile) -> CachingPolicy {
    baseline_policy(Strategy::MostPopular, cfg, profile, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    for l in [1, 10, 100, 1000] {
        for ups in [0.0, 0.1, 0.8, 2.0, 5.0] {
            let s: f64 = zipf_popularity(l, ups).unwrap().probabilities().iter().sum();
            check((s - 1.0).abs() <= 1e-12, &mut failures, format!("zipf L={l} υ={ups} sums to {s}"));
        }
    }
    for conv in [GainConvention::Table, GainConvention::Decibel] {
        let g = NetworkConfig::with_convention(conv).gain_distribution();
        check((g.total_probability() - 1.0).abs() <= 1e-12, &mut failures, format!("{conv:?} gain probabilities"));
    }
    let cfg = NetworkConfig::baseline();
    let mean = cfg.lambda_mm * PI * cfg.radius * cfg.radius;
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let total: usize = (0..n).map(|_| sample_ppp(cfg.lambda_mm, cfg.radius, &mut rng).len()).sum();
    let avg = total as f64 / n as f64;
    let sigma = (mean / n as f64).sqrt();
    check((avg - mean).abs() <= 3.0 * sigma, &mut failures, format!("mean count {avg} vs {mean}"));
    outcome(failures, format!("Poisson mean count {avg:.3} vs λπR² = {mean:.3} (3σ = {:.3})", 3.0 * sigma))
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    // Defaults plus a setting where both tiers carry real traffic.
    let configs = [
        ("defaults", NetworkConfig::baseline()),
        ("λ_µ=1e-4", NetworkConfig { lambda_mu: 1e-4, ..NetworkConfig::baseline() }),
    ];
    for (name, cfg) in configs {
        let a = association(&cfg).unwrap();
        check(a.p_mw + a.p_muw == 1.0, &mut failures, format!("{name}: p_mw + p_µw ≠ 1"));
        let s = estimate_association(&cfg, 100_000, 2, VALIDATION_RADIUS).unwrap();
        check((a.p_muw - s.mean).abs() <= 0.01, &mut failures, format!("{name}: analytic {} vs sim {}", a.p_muw, s.mean));
        summary.push(format!("{name}: analytic {:.5} sim {:.5}", a.p_muw, s.mean));
    }
    outcome(failures, summary.join(", "))
}

fn criterion_3() -> Outcome {
    let cfg = NetworkConfig::baseline();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, ups) in [0.1, 0.8, 2.0].into_iter().enumerate() {
        let profile = zipf_popularity(10, ups).unwrap();
        let proposed = optimize_nl(&cfg, &profile).unwrap().policy;
        for (name, policy) in [("UC", uniform(&cfg, &profile)), ("PROPOSED", proposed)] {
            let analytic = asp_nl(&cfg, &policy, &profile).unwrap().total;
            let simulated = sim(&cfg, &policy, &profile, Regime::NoiseLimited, 30 + k as u64).mean;
            let diff = (analytic - simulated).abs();
            worst = worst.max(diff);
            check(diff <= 0.03, &mut failures, format!("υ={ups} {name}: analytic {analytic:.4} sim {simulated:.4}"));
        }
    }
    outcome(failures, format!("max |analytic − sim| = {worst:.4} (limit 0.03)"))
}

fn criterion_4() -> Outcome {
    let sdm = ServingDistanceModel::ContactAveraged;
    let mut failures = Vec::new();
    let mut tested = 0;
    let mut min_margin = f64::INFINITY;
    let profile = zipf_popularity(10, 0.8).unwrap();
    let nl = NetworkConfig::baseline();
    let il = NetworkConfig::interference_limited();
    let mut cases: Vec<(&str, NetworkConfig, CachingPolicy, Regime)> = Vec::new();
    for policy in [uniform(&nl, &profile), most_popular(&nl, &profile), optimize_nl(&nl, &profile).unwrap().policy] {
        cases.push(("NL defaults", nl.clone(), policy, Regime::General));
    }
    let il_opt = optimize_il(&il, &profile, &ServingDistanceModel::MeanNearestStation).unwrap().policy;
    for policy in [uniform(&il, &profile), most_popular(&il, &profile), il_opt] {
        cases.push(("IL overrides", il.clone(), policy.clone(), Regime::InterferenceLimited));
        cases.push(("IL overrides", il.clone(), policy, Regime::General));
    }
    for (k, (name, cfg, policy, regime)) in cases.into_iter().enumerate() {
        let bound = match regime {
            Regime::InterferenceLimited => asp_il(&cfg, &policy, &profile, &sdm),
            _ => asp_general_upper_bound(&cfg, &policy, &profile, &sdm),
        }
        .unwrap()
        .total;
        let s = sim(&cfg, &policy, &profile, regime, 40 + k as u64);
        let margin = bound - (s.mean - 3.0 * s.ci_halfwidth);
        min_margin = min_margin.min(margin);
        tested += 1;
        check(margin >= 0.0, &mut failures, format!("{name} {}: bound {bound:.4} < sim {:.4} − 3·{:.4}", regime.label(), s.mean, s.ci_halfwidth));
    }
    outcome(failures, format!("{tested} configurations, min margin {min_margin:.4}"))
}

/// Best value of `Σ w_i (1 − e^{−K_i p_i})` over a 1e-3 grid of the L = 3 capped simplex with budget 1.
fn grid_optimum(w: &[f64], k: &[f64]) -> f64 {
    let n = 1000;
    let mut best = f64::NEG_INFINITY;
    for a in 0..=n {
        for b in 0..=(n - a) {
            let p = [a as f64 / n as f64, b as f64 / n as f64, (1.0 - (a + b) as f64 / n as f64).clamp(0.0, 1.0)];
            let v: f64 = (0..3).map(|i| w[i] * (1.0 - (-k[i] * p[i]).exp())).sum();
            best = best.max(v);
        }
    }
    best
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let instances = [
        (2.0, vec![]),
        (0.8, vec![]),
        (0.5, vec![0.2, 0.5, 1.0]),
        (1.2, vec![1.0, 0.6, 0.1]),
    ];
    for (ups, rates) in instances {
        let cfg = NetworkConfig { cache_mm: 1, cache_mu: 1, file_rates: rates.clone(), ..NetworkConfig::baseline() };
        let profile = zipf_popularity(3, ups).unwrap();
        let sol = optimize_nl(&cfg, &profile).unwrap();
        let k: NlConstants = nl_constants(&cfg, 3).unwrap();
        let p_mw = association(&cfg).unwrap().p_mw;
        let f = profile.probabilities();
        let mut oracle = 0.0;
        for (tier, weight) in [(Tier::MmWave, p_mw), (Tier::MuWave, 1.0 - p_mw)] {
            let w: Vec<f64> = f.iter().map(|f| f * weight).collect();
            oracle += grid_optimum(&w, k.tier(tier));
        }
        let achieved = nl_objective(&k, &sol.policy, &profile, p_mw);
        let gap = (oracle - achieved).abs();
        worst_gap = worst_gap.max(gap);
        check(gap <= 1e-2, &mut failures, format!("υ={ups} rates={rates:?}: objective {achieved} vs grid {oracle}"));
        for (m, p) in [(&sol.dual.mm, &sol.policy.p_mm), (&sol.dual.mu, &sol.policy.p_mu)] {
            let mut kkt = (m.omega * (p.iter().sum::<f64>() - 1.0)).abs();
            for (mu, pi) in m.mu.iter().zip(p) {
                kkt = kkt.max((mu * (pi - 1.0)).abs());
            }
            worst_kkt = worst_kkt.max(kkt);
            check(kkt <= 1e-6, &mut failures, format!("υ={ups}: complementary slackness {kkt:e}"));
        }
        if rates.is_empty() {
            let mono = sol.policy.p_mm.windows(2).all(|w| w[0] >= w[1]) && sol.policy.p_mu.windows(2).all(|w| w[0] >= w[1]);
            check(mono, &mut failures, format!("υ={ups}: policy not nonincreasing {:?}", sol.policy));
        }
    }
    outcome(failures, format!("max objective gap {worst_gap:.2e}, max slackness {worst_kkt:.2e}"))
}

fn dc_run(ups: f64) -> DcSolution {
    let cfg = NetworkConfig::interference_limited();
    let profile = zipf_popularity(10, ups).unwrap();
    optimize_il(&cfg, &profile, &ServingDistanceModel::MeanNearestStation).unwrap()
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for ups in [0.6, 2.0] {
        let sol = dc_run(ups);
        let trace = &sol.state.trace;
        let monotone = trace.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        check(monotone, &mut failures, format!("υ={ups}: trace increases"));
        check(sol.converged && sol.iterations <= 500, &mut failures, format!("υ={ups}: {} iterations, converged={}", sol.iterations, sol.converged));
        summary.push(format!("υ={ups}: {} outer iterations, v {:.6} → {:.6}", sol.iterations, trace[0], trace[trace.len() - 1]));
        // The odd/even split must stay monotone too, though it moves much more slowly.
        let cfg = NetworkConfig::interference_limited();
        let profile = zipf_popularity(10, ups).unwrap();
        let opts = DcOptions { split: DcSplit::Parity, ..DcOptions::default() };
        let parity = optimize_dc(&cfg, &profile, &ServingDistanceModel::MeanNearestStation, &opts).unwrap();
        let monotone = parity.state.trace.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK);
        check(monotone, &mut failures, format!("υ={ups}: parity-split trace increases"));
        summary.push(format!("parity split {} iterations", parity.iterations));
    }
    outcome(failures, summary.join(", "))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let cfg = NetworkConfig::baseline();
    // (a) ordering of strategies under the NL objective.
    let low = zipf_popularity(10, 0.1).unwrap();
    let proposed = asp_nl(&cfg, &optimize_nl(&cfg, &low).unwrap().policy, &low).unwrap().total;
    let uc = asp_nl(&cfg, &uniform(&cfg, &low), &low).unwrap().total;
    let mut rc_worst: f64 = 0.0;
    for seed in 0..10 {
        let rc = baseline_policy(Strategy::Random, &cfg, &low, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        rc_worst = rc_worst.max(asp_nl(&cfg, &rc, &low).unwrap().total);
    }
    check(proposed >= uc && uc >= rc_worst, &mut failures, format!("υ=0.1: PROPOSED {proposed} UC {uc} RC {rc_worst}"));
    let high = zipf_popularity(10, 2.0).unwrap();
    let proposed_high = asp_nl(&cfg, &optimize_nl(&cfg, &high).unwrap().policy, &high).unwrap().total;
    let mc_high = asp_nl(&cfg, &most_popular(&cfg, &high), &high).unwrap().total;
    check(proposed_high >= mc_high - 0.02, &mut failures, format!("υ=2: PROPOSED {proposed_high} MC {mc_high}"));
    // (b) NL success falls with blockage; (c) IL optimum rises with blockage.
    let profile = zipf_popularity(10, 0.8).unwrap();
    let betas = [0.002, 0.008, 0.02];
    let nl: Vec<f64> = betas
        .iter()
        .map(|&beta| {
            let c = NetworkConfig { beta, ..NetworkConfig::baseline() };
            asp_nl(&c, &optimize_nl(&c, &profile).unwrap().policy, &profile).unwrap().total
        })
        .collect();
    check(nl.windows(2).all(|w| w[1] <= w[0]), &mut failures, format!("NL vs β: {nl:?}"));
    let il: Vec<f64> = betas
        .iter()
        .map(|&beta| {
            let c = NetworkConfig { beta, ..NetworkConfig::interference_limited() };
            optimize_il(&c, &profile, &ServingDistanceModel::MeanNearestStation).unwrap().objective
        })
        .collect();
    check(il.windows(2).all(|w| w[1] >= w[0]), &mut failures, format!("IL vs β: {il:?}"));
    outcome(
        failures,
        format!(
            "υ=0.1 PROPOSED {proposed:.4} UC {uc:.4} RC ≤ {rc_worst:.4}; υ=2 PROPOSED {proposed_high:.4} MC {mc_high:.4}; NL(β) {:.4?}; IL(β) {:.4?}",
            nl, il
        ),
    )
}

/// `Z_j` straight from its double-integral definition.
fn z_oracle(cfg: &NetworkConfig, los: bool, omega: f64) -> f64 {
    let m = cfg.nakagami_mm as f64;
    let alpha = if los { cfg.alpha_los } else { cfg.alpha_nlos };
    let delta = 2.0 / alpha;
    let qopts = QuadratureOptions::default().with_rel_tol(1e-12).with_abs_tol(1e-300);
    // Inner ω-integral after ω = ψ·e^v; below v = −ln(745/m̂) the integrand underflows.
    let inner = |psi: f64| -> f64 {
        let hi = (omega / psi).ln();
        let lo = -(745.0 / m).ln();
        if hi <= lo {
            return 0.0;
        }
        integrate(|v: f64| (-m * (-v).exp() - m * v).exp(), Domain::Finite(lo, hi), &qopts).unwrap().value
    };
    let reach = omega.powf(1.0 / alpha);
    let outer = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let psi = t.powf(alpha);
        inner(psi) * psi.powf(delta - 1.0) * (-cfg.beta * t).exp() * alpha * t.powf(alpha - 1.0)
    };
    let qopts = qopts.with_rel_tol(1e-11);
    let cut = reach.min(1.0 / cfg.beta);
    let head = integrate(outer, Domain::Finite(0.0, cut), &qopts).unwrap().value;
    let tail = integrate(outer, Domain::SemiInfinite(cut), &qopts.with_scale(reach.max(1.0 / cfg.beta))).unwrap().value;
    head + tail
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_z: f64 = 0.0;
    let cfg = NetworkConfig::baseline();
    for los in [true, false] {
        for e in 0..10 {
            let omega = 10f64.powf(2.0 + e as f64);
            let closed = nl_z(&cfg, los, omega).unwrap();
            let direct = z_oracle(&cfg, los, omega);
            let rel = (closed - direct).abs() / direct.abs();
            worst_z = worst_z.max(rel);
            check(rel <= 1e-7, &mut failures, format!("Z los={los} ω̃={omega:e}: {closed} vs {direct}"));
        }
    }
    let w_cfg = NetworkConfig { alpha_mu: 4.0, nakagami_mu: 1, ..NetworkConfig::baseline() };
    let mut worst_w: f64 = 0.0;
    for c in [1e-6, 1e-3, 1.0, 37.5, 1e3, 1e6, 1e9, 1e12] {
        let quad = mu_interference_integral(&w_cfg, c, 1e-10).unwrap();
        let exact = PI * PI * c.sqrt() / 2.0;
        let rel = (quad - exact).abs() / exact;
        worst_w = worst_w.max(rel);
        check(rel <= 1e-6, &mut failures, format!("W c={c}: {quad} vs {exact}"));
    }
    outcome(failures, format!("Z max rel err {worst_z:.2e} on 20 points, W max rel err {worst_w:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("sanity", criterion_1),
        ("association", criterion_2),
        ("nl-equivalence", criterion_3),
        ("bound-dominance", criterion_4),
        ("dual-optimality", criterion_5),
        ("dc-convergence", criterion_6),
        ("figure-shapes", criterion_7),
        ("kernels", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}] {tag} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
