//! Experiment configuration files.
//!
//! A config is TOML with one table per concern:
//!
//! ```toml
//! [experiment]
//! regime = "NL"
//! strategies = ["PROPOSED", "MC", "UC", "RC"]
//!
//! [network]
//! preset = "baseline"
//! snr_mm_db = 54.0
//!
//! [popularity]
//! catalog_size = 10
//! zipf_exponent = 0.8
//!
//! [sweep]
//! axis = "zipf_exponent"
//! values = [0.1, 0.8, 2.0]
//! ```
//!
//! Keys ending in `_db` are converted to linear values while parsing. Every
//! key is optional; missing network keys come from the preset.

use std::path::{Path, PathBuf};

use hybridcache::config::db_to_linear;
use hybridcache::simulator::ServingRule;
use hybridcache::{AntennaPattern, GainConvention, NetworkConfig, PopularityProfile, Regime, ServingDistanceModel, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CATALOG: usize = 10;
pub const DEFAULT_ZIPF: f64 = 0.8;
/// Simulation window; wide enough that the truncated mmWave tier is not
/// mistaken for coverage holes.
pub const DEFAULT_SIM_RADIUS: f64 = 2500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ZipfExponent,
    Beta,
    LambdaMm,
    LambdaMu,
    Rate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ZipfExponent => "zipf_exponent",
            SweepAxis::Beta => "beta",
            SweepAxis::LambdaMm => "lambda_mm",
            SweepAxis::LambdaMu => "lambda_mu",
            SweepAxis::Rate => "rate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Baseline,
    InterferenceLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingDistanceKind {
    MeanNearestHolder,
    MeanNearestStation,
    ContactAveraged,
    Fixed,
}

/// Fully resolved experiment with linear network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub catalog_size: usize,
    pub zipf_exponent: f64,
    pub regime: Regime,
    pub serving_distance: ServingDistanceModel,
    pub strategies: Vec<Strategy>,
    pub n_trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub sweep: Option<Sweep>,
    pub sim_radius: f64,
    pub serving_rule: ServingRule,
}

/// One grid point: the sweep value with the network and popularity it implies.
#[derive(Debug, Clone)]
pub struct Point {
    pub value: Option<f64>,
    pub network: NetworkConfig,
    pub profile: PopularityProfile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    network: NetworkSection,
    #[serde(default)]
    popularity: PopularitySection,
    sweep: Option<Sweep>,
    #[serde(default)]
    simulation: SimulationSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    regime: Option<Regime>,
    serving_distance: Option<ServingDistanceKind>,
    serving_distance_mm: Option<f64>,
    serving_distance_mu: Option<f64>,
    strategies: Option<Vec<Strategy>>,
    n_trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopularitySection {
    catalog_size: Option<usize>,
    zipf_exponent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationSection {
    radius: Option<f64>,
    serving_rule: Option<ServingRule>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    preset: Option<Preset>,
    gain_convention: Option<GainConvention>,
    lambda_mm: Option<f64>,
    lambda_mu: Option<f64>,
    beta: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    alpha_mu: Option<f64>,
    power_mm: Option<f64>,
    power_mm_db: Option<f64>,
    power_mu: Option<f64>,
    power_mu_db: Option<f64>,
    bias_mm: Option<f64>,
    bias_mm_db: Option<f64>,
    bias_mu: Option<f64>,
    bias_mu_db: Option<f64>,
    noise_mm: Option<f64>,
    noise_mm_db: Option<f64>,
    snr_mm_db: Option<f64>,
    noise_mu: Option<f64>,
    noise_mu_db: Option<f64>,
    snr_mu_db: Option<f64>,
    radius: Option<f64>,
    beamwidth: Option<f64>,
    main_gain: Option<f64>,
    main_gain_db: Option<f64>,
    side_gain: Option<f64>,
    side_gain_db: Option<f64>,
    serving_gain: Option<f64>,
    serving_gain_db: Option<f64>,
    nakagami_mm: Option<u32>,
    nakagami_mu: Option<u32>,
    cache_mm: Option<usize>,
    cache_mu: Option<usize>,
    rate: Option<f64>,
    file_rates: Option<Vec<f64>>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config field `{field}`: {msg}"))
}

/// Linear value from either `name` or `name_db`.
fn linear_or_db(name: &str, linear: Option<f64>, db: Option<f64>) -> Result<Option<f64>, CliError> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(invalid(name, format!("set either `{name}` or `{name}_db`, not both"))),
        (Some(x), None) => Ok(Some(x)),
        (None, Some(d)) => Ok(Some(db_to_linear(d))),
        (None, None) => Ok(None),
    }
}

impl NetworkSection {
    fn resolve(self) -> Result<NetworkConfig, CliError> {
        let mut cfg = match self.preset.unwrap_or_default() {
            Preset::Baseline => NetworkConfig::with_convention(self.gain_convention.unwrap_or_default()),
            Preset::InterferenceLimited => NetworkConfig {
                pattern: NetworkConfig::with_convention(self.gain_convention.unwrap_or_default()).pattern,
                ..NetworkConfig::interference_limited()
            },
        };
        if self.gain_convention.is_some() {
            cfg.serving_gain = cfg.pattern.aligned_gain();
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.lambda_mm, self.lambda_mm);
        set(&mut cfg.lambda_mu, self.lambda_mu);
        set(&mut cfg.beta, self.beta);
        set(&mut cfg.alpha_los, self.alpha_los);
        set(&mut cfg.alpha_nlos, self.alpha_nlos);
        set(&mut cfg.alpha_mu, self.alpha_mu);
        set(&mut cfg.power_mm, linear_or_db("power_mm", self.power_mm, self.power_mm_db)?);
        set(&mut cfg.power_mu, linear_or_db("power_mu", self.power_mu, self.power_mu_db)?);
        if let Some(b) = linear_or_db("bias_mm", self.bias_mm, self.bias_mm_db)? {
            cfg.bias_mm = Some(b);
        }
        if let Some(b) = linear_or_db("bias_mu", self.bias_mu, self.bias_mu_db)? {
            cfg.bias_mu = Some(b);
        }
        cfg.noise_mm = resolve_noise("noise_mm", self.noise_mm, self.noise_mm_db, self.snr_mm_db, cfg.power_mm)?
            .unwrap_or(cfg.noise_mm);
        cfg.noise_mu = resolve_noise("noise_mu", self.noise_mu, self.noise_mu_db, self.snr_mu_db, cfg.power_mu)?
            .unwrap_or(cfg.noise_mu);
        set(&mut cfg.radius, self.radius);

        let main = linear_or_db("main_gain", self.main_gain, self.main_gain_db)?;
        let side = linear_or_db("side_gain", self.side_gain, self.side_gain_db)?;
        let pattern_changed = self.beamwidth.is_some() || main.is_some() || side.is_some();
        cfg.pattern = AntennaPattern {
            beamwidth: self.beamwidth.unwrap_or(cfg.pattern.beamwidth),
            main_gain: main.unwrap_or(cfg.pattern.main_gain),
            side_gain: side.unwrap_or(cfg.pattern.side_gain),
        };
        match linear_or_db("serving_gain", self.serving_gain, self.serving_gain_db)? {
            Some(g) => cfg.serving_gain = g,
            None if pattern_changed => cfg.serving_gain = cfg.pattern.aligned_gain(),
            None => {}
        }

        if let Some(m) = self.nakagami_mm {
            cfg.nakagami_mm = m;
        }
        if let Some(m) = self.nakagami_mu {
            cfg.nakagami_mu = m;
        }
        if let Some(c) = self.cache_mm {
            cfg.cache_mm = c;
        }
        if let Some(c) = self.cache_mu {
            cfg.cache_mu = c;
        }
        set(&mut cfg.rate, self.rate);
        if let Some(rates) = self.file_rates {
            cfg.file_rates = rates;
        }
        Ok(cfg)
    }
}

fn resolve_noise(
    name: &str,
    linear: Option<f64>,
    db: Option<f64>,
    snr_db: Option<f64>,
    power: f64,
) -> Result<Option<f64>, CliError> {
    let given = [linear.is_some(), db.is_some(), snr_db.is_some()].iter().filter(|&&b| b).count();
    if given > 1 {
        let tier = name.trim_start_matches("noise_");
        return Err(invalid(name, format!("set only one of `{name}`, `{name}_db` and `snr_{tier}_db`")));
    }
    Ok(linear.or(db.map(db_to_linear)).or(snr_db.map(|s| power / db_to_linear(s))))
}

impl ExperimentConfig {
    /// Reads and resolves a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        let network = file.network.resolve()?;
        let exp = file.experiment;

        let serving_distance = match exp.serving_distance {
            Some(ServingDistanceKind::Fixed) => match (exp.serving_distance_mm, exp.serving_distance_mu) {
                (Some(mm), Some(mu)) => ServingDistanceModel::Fixed { mm, mu },
                _ => {
                    return Err(invalid(
                        "serving_distance",
                        "a fixed serving distance needs `serving_distance_mm` and `serving_distance_mu`",
                    ))
                }
            },
            kind => {
                if exp.serving_distance_mm.is_some() || exp.serving_distance_mu.is_some() {
                    return Err(invalid("serving_distance_mm", "only used with serving_distance = \"fixed\""));
                }
                // The convex-concave optimizer needs a policy-independent distance,
                // so that is the default the bounds are reported at too.
                match kind {
                    Some(ServingDistanceKind::MeanNearestHolder) => ServingDistanceModel::MeanNearestHolder,
                    Some(ServingDistanceKind::ContactAveraged) => ServingDistanceModel::ContactAveraged,
                    _ => ServingDistanceModel::MeanNearestStation,
                }
            }
        };

        let cfg = ExperimentConfig {
            network,
            catalog_size: file.popularity.catalog_size.unwrap_or(DEFAULT_CATALOG),
            zipf_exponent: file.popularity.zipf_exponent.unwrap_or(DEFAULT_ZIPF),
            regime: exp.regime.unwrap_or(Regime::NoiseLimited),
            serving_distance,
            strategies: exp.strategies.unwrap_or_else(|| Strategy::ALL.to_vec()),
            n_trials: exp.n_trials.unwrap_or(DEFAULT_TRIALS),
            seed: exp.seed.unwrap_or(DEFAULT_SEED),
            out: exp.out,
            sweep: file.sweep,
            sim_radius: file.simulation.radius.unwrap_or(DEFAULT_SIM_RADIUS),
            serving_rule: file.simulation.serving_rule.unwrap_or_default(),
        };
        cfg.check_shape()?;
        Ok(cfg)
    }

    /// Structural checks that do not touch the network model.
    fn check_shape(&self) -> Result<(), CliError> {
        if self.regime == Regime::Simulated {
            return Err(invalid("regime", "expected one of \"NL\", \"IL\", \"GENERAL\""));
        }
        if self.strategies.is_empty() {
            return Err(invalid("strategies", "at least one strategy is required"));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(invalid("strategies", format!("{} listed twice", s.label())));
            }
        }
        if self.n_trials == 0 {
            return Err(invalid("n_trials", "must be positive"));
        }
        if i64::try_from(self.seed).is_err() {
            return Err(invalid("seed", format!("must not exceed {}", i64::MAX)));
        }
        if !(self.sim_radius > 0.0 && self.sim_radius.is_finite()) {
            return Err(invalid("simulation.radius", "must be finite and positive"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep.values", "grid is empty"));
            }
            if sweep.values.iter().any(|v| !v.is_finite()) {
                return Err(invalid("sweep.values", "grid values must be finite"));
            }
            if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("sweep.values", "grid must be strictly increasing"));
            }
            if sweep.axis == SweepAxis::Rate && !self.network.file_rates.is_empty() {
                return Err(invalid("sweep.axis", "a rate sweep cannot be combined with `file_rates`"));
            }
        }
        Ok(())
    }

    /// Expands the sweep and validates every point before anything is computed.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let values: Vec<Option<f64>> = match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        };
        values
            .into_iter()
            .map(|value| {
                let mut network = self.network.clone();
                let mut zipf = self.zipf_exponent;
                if let (Some(v), Some(sweep)) = (value, &self.sweep) {
                    match sweep.axis {
                        SweepAxis::ZipfExponent => zipf = v,
                        SweepAxis::Beta => network.beta = v,
                        SweepAxis::LambdaMm => network.lambda_mm = v,
                        SweepAxis::LambdaMu => network.lambda_mu = v,
                        SweepAxis::Rate => network.rate = v,
                    }
                }
                let at = value.map(|v| format!(" at sweep value {v}")).unwrap_or_default();
                let profile = hybridcache::zipf_popularity(self.catalog_size, zipf)
                    .map_err(|e| CliError::Usage(format!("popularity{at}: {e}")))?;
                network
                    .validate_for_catalog(self.catalog_size)
                    .map_err(|e| CliError::Usage(format!("network{at}: {e}")))?;
                self.serving_distance
                    .validate()
                    .map_err(|e| CliError::Usage(format!("serving distance: {e}")))?;
                Ok(Point { value, network, profile })
            })
            .collect()
    }

    /// TOML text that parses back to this exact configuration.
    pub fn to_toml(&self) -> Result<String, CliError> {
        let n = &self.network;
        let (kind, sd_mm, sd_mu) = match self.serving_distance {
            ServingDistanceModel::Fixed { mm, mu } => (ServingDistanceKind::Fixed, Some(mm), Some(mu)),
            ServingDistanceModel::MeanNearestHolder => (ServingDistanceKind::MeanNearestHolder, None, None),
            ServingDistanceModel::MeanNearestStation => (ServingDistanceKind::MeanNearestStation, None, None),
            ServingDistanceModel::ContactAveraged => (ServingDistanceKind::ContactAveraged, None, None),
        };
        let dump = Dump {
            experiment: DumpExperiment {
                regime: self.regime,
                serving_distance: kind,
                serving_distance_mm: sd_mm,
                serving_distance_mu: sd_mu,
                strategies: self.strategies.clone(),
                n_trials: self.n_trials,
                seed: self.seed,
                out: self.out.clone(),
            },
            network: DumpNetwork {
                lambda_mm: n.lambda_mm,
                lambda_mu: n.lambda_mu,
                beta: n.beta,
                alpha_los: n.alpha_los,
                alpha_nlos: n.alpha_nlos,
                alpha_mu: n.alpha_mu,
                power_mm: n.power_mm,
                power_mu: n.power_mu,
                bias_mm: n.bias_mm,
                bias_mu: n.bias_mu,
                noise_mm: n.noise_mm,
                noise_mu: n.noise_mu,
                radius: n.radius,
                beamwidth: n.pattern.beamwidth,
                main_gain: n.pattern.main_gain,
                side_gain: n.pattern.side_gain,
                serving_gain: n.serving_gain,
                nakagami_mm: n.nakagami_mm,
                nakagami_mu: n.nakagami_mu,
                cache_mm: n.cache_mm,
                cache_mu: n.cache_mu,
                rate: n.rate,
                file_rates: n.file_rates.clone(),
            },
            popularity: DumpPopularity { catalog_size: self.catalog_size, zipf_exponent: self.zipf_exponent },
            sweep: self.sweep.clone(),
            simulation: DumpSimulation { radius: self.sim_radius, serving_rule: self.serving_rule },
        };
        toml::to_string(&dump).map_err(|e| CliError::Usage(format!("cannot render config: {e}")))
    }
}

#[derive(Serialize)]
struct Dump {
    experiment: DumpExperiment,
    network: DumpNetwork,
    popularity: DumpPopularity,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Sweep>,
    simulation: DumpSimulation,
}

#[derive(Serialize)]
struct DumpExperiment {
    regime: Regime,
    serving_distance: ServingDistanceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    serving_distance_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    serving_distance_mu: Option<f64>,
    strategies: Vec<Strategy>,
    n_trials: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DumpNetwork {
    lambda_mm: f64,
    lambda_mu: f64,
    beta: f64,
    alpha_los: f64,
    alpha_nlos: f64,
    alpha_mu: f64,
    power_mm: f64,
    power_mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias_mu: Option<f64>,
    noise_mm: f64,
    noise_mu: f64,
    radius: f64,
    beamwidth: f64,
    main_gain: f64,
    side_gain: f64,
    serving_gain: f64,
    nakagami_mm: u32,
    nakagami_mu: u32,
    cache_mm: usize,
    cache_mu: usize,
    rate: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    file_rates: Vec<f64>,
}

#[derive(Serialize)]
struct DumpPopularity {
    catalog_size: usize,
    zipf_exponent: f64,
}

#[derive(Serialize)]
struct DumpSimulation {
    radius: f64,
    serving_rule: ServingRule,
}
