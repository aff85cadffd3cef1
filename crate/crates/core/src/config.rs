//! System and run configuration.
//!
//! [`SystemConfig`] is the in-memory description the environment and
//! learner consume: economics, the microgrid fleet, and the price grid
//! endpoints. [`RunConfig`] is the declarative TOML document accepted by
//! the command-line tool; every field has a default, so an empty file
//! (or no file at all) reproduces the reference three-microgrid system
//! with 200 kWh and 250 kWh storages.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::env::{self, TimeSeriesDay, NUM_PRICE_LEVELS};
use crate::learner::{LearnerParams, ScalarizationKind, ScalarizationSpec};
use crate::model::{EconomicParams, MicrogridSpec, StorageSpec};
use crate::{Error, Result};

/// Runtime description of the whole system: shared economics, the
/// microgrid fleet, and the endpoints of the uniform 8-level price grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub economics: EconomicParams,
    pub microgrids: Vec<MicrogridSpec>,
    /// Lowest advertisable price (currency/kWh).
    pub price_min: f64,
    /// Highest advertisable price (currency/kWh).
    pub price_max: f64,
}

impl Default for SystemConfig {
    /// The reference system: three microgrids, the first two with
    /// storages of 200 kWh and 250 kWh (floor 30%, ramp 10% of
    /// capacity, starting half full), prices on [1.5, 5.0]. The hourly
    /// utility coefficients carry an evening peak and an overnight dip
    /// so that the value of consumption genuinely varies over the day.
    fn default() -> SystemConfig {
        SystemConfig {
            economics: EconomicParams::default(),
            microgrids: vec![
                MicrogridSpec::new(0, Some(StorageSpec::from_capacity(200.0)), shaped_omega(8.0)),
                MicrogridSpec::new(1, Some(StorageSpec::from_capacity(250.0)), shaped_omega(7.6)),
                MicrogridSpec::new(2, None, shaped_omega(8.4)),
            ],
            price_min: 1.5,
            price_max: 5.0,
        }
    }
}

/// A daily utility-coefficient schedule around `base`: +0.8 during the
/// evening peak (17:00–22:00), −0.4 overnight (01:00–05:00).
fn shaped_omega(base: f64) -> [f64; 24] {
    let mut omega = [base; 24];
    for w in omega.iter_mut().take(23).skip(17) {
        *w = base + 0.8;
    }
    for w in omega.iter_mut().take(6).skip(1) {
        *w = base - 0.4;
    }
    omega
}

impl SystemConfig {
    /// The advertised price for a discrete price level in `0..8`:
    /// uniform spacing from `price_min` to `price_max`.
    pub fn price(&self, level: usize) -> f64 {
        let step = (self.price_max - self.price_min) / (NUM_PRICE_LEVELS - 1) as f64;
        self.price_min + step * level as f64
    }

    /// All eight advertisable prices in ascending order.
    pub fn price_grid(&self) -> Vec<f64> {
        (0..NUM_PRICE_LEVELS).map(|l| self.price(l)).collect()
    }

    /// The storage specs of the storage-equipped microgrids, in fleet order.
    pub fn storage_specs(&self) -> Vec<StorageSpec> {
        self.microgrids.iter().filter_map(|m| m.storage).collect()
    }

    /// Start-of-day stored energy per storage-equipped microgrid.
    pub fn initial_levels(&self) -> Vec<f64> {
        self.storage_specs()
            .iter()
            .map(|s| s.initial_level)
            .collect()
    }

    /// Checks every invariant of the system description.
    pub fn validate(&self) -> Result<()> {
        self.economics.validate()?;
        if self.microgrids.is_empty() {
            return Err(Error::invalid_config(
                "at least one microgrid is required".to_string(),
            ));
        }
        for (i, mg) in self.microgrids.iter().enumerate() {
            if mg.id != i {
                return Err(Error::invalid_config(format!(
                    "microgrid at position {} has id {}; ids must be positional",
                    i, mg.id
                )));
            }
            mg.validate()?;
        }
        if !(self.price_min > 0.0 && self.price_min < self.price_max) {
            return Err(Error::invalid_config(format!(
                "prices must satisfy 0 < min < max, got min {} max {}",
                self.price_min, self.price_max
            )));
        }
        Ok(())
    }
}

/// The TOML run document. Every section and every field is optional;
/// omitted parts fall back to the reference system and the default
/// learner hyperparameters.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub economics: EconomicParams,
    pub prices: PriceConfig,
    /// `[[microgrid]]` tables. An empty list means "use the reference
    /// three-microgrid fleet"; a non-empty list replaces it entirely.
    #[serde(rename = "microgrid")]
    pub microgrids: Vec<MicrogridConfig>,
    pub learner: LearnerConfig,
    pub scalarization: ScalarizationConfig,
    pub sweep: SweepConfig,
    pub data: DataConfig,
    pub output: OutputConfig,
}

/// `[prices]` section: endpoints of the 8-level price grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceConfig {
    pub min: f64,
    pub max: f64,
}

impl Default for PriceConfig {
    fn default() -> PriceConfig {
        PriceConfig { min: 1.5, max: 5.0 }
    }
}

/// One `[[microgrid]]` table.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrogridConfig {
    /// Either a single number (flat schedule) or 24 hourly values.
    pub omega: Option<OmegaConfig>,
    pub storage: Option<StorageConfig>,
}

/// Utility coefficient: a constant or a full 24-hour schedule.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OmegaConfig {
    Constant(f64),
    Hourly(Vec<f64>),
}

impl OmegaConfig {
    fn resolve(&self, position: usize) -> Result<[f64; 24]> {
        match self {
            OmegaConfig::Constant(v) => Ok([*v; 24]),
            OmegaConfig::Hourly(values) => {
                if values.len() != 24 {
                    return Err(Error::invalid_config(format!(
                        "microgrid {}: omega schedule needs 24 values, got {}",
                        position,
                        values.len()
                    )));
                }
                let mut omega = [0.0; 24];
                omega.copy_from_slice(values);
                Ok(omega)
            }
        }
    }
}

/// `[microgrid.storage]` table. Only the maximum capacity is required;
/// the floor, ramp, and initial level default to 30%, 10%, and 50% of it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageConfig {
    pub capacity_max: f64,
    pub capacity_min: Option<f64>,
    pub ramp_max: Option<f64>,
    pub initial_level: Option<f64>,
}

impl StorageConfig {
    fn resolve(&self) -> StorageSpec {
        let defaults = StorageSpec::from_capacity(self.capacity_max);
        StorageSpec {
            capacity_max: self.capacity_max,
            capacity_min: self.capacity_min.unwrap_or(defaults.capacity_min),
            ramp_max: self.ramp_max.unwrap_or(defaults.ramp_max),
            initial_level: self.initial_level.unwrap_or(defaults.initial_level),
        }
    }
}

/// `[learner]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay: f64,
    pub episodes: usize,
    pub seed: u64,
    /// Per-objective running min-max reward normalization. Unset means
    /// "on for chebyshev, off for linear".
    pub normalize_rewards: Option<bool>,
}

impl Default for LearnerConfig {
    fn default() -> LearnerConfig {
        let p = LearnerParams::default();
        LearnerConfig {
            learning_rate: p.learning_rate,
            discount: p.discount,
            epsilon_start: p.epsilon_start,
            epsilon_end: p.epsilon_end,
            epsilon_decay: p.epsilon_decay,
            episodes: p.episodes,
            seed: p.rng_seed,
            normalize_rewards: None,
        }
    }
}

/// `[scalarization]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalarizationConfig {
    pub kind: ScalarizationKind,
    /// Weights over (welfare, stored energy, grid profit, penalty);
    /// must be nonnegative and sum to 1.
    pub weights: [f64; 4],
    /// Margin added above every observed value when the utopian
    /// reference point is raised.
    pub utopian_margin: f64,
}

impl Default for ScalarizationConfig {
    fn default() -> ScalarizationConfig {
        ScalarizationConfig {
            kind: ScalarizationKind::Linear,
            weights: [0.25; 4],
            utopian_margin: 1.0,
        }
    }
}

/// `[sweep]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Simplex granularity H: one training run per weight vector
    /// (i, j, k, l)/H with i+j+k+l = H.
    pub grid: usize,
}

impl Default for SweepConfig {
    fn default() -> SweepConfig {
        SweepConfig { grid: 5 }
    }
}

/// `[data]` section: where the day profile comes from.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// Day-profile CSV, required when `source = "file"`.
    pub path: Option<PathBuf>,
    /// Seed of the synthetic day generator.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synth,
    File,
}

impl Default for DataConfig {
    fn default() -> DataConfig {
        DataConfig {
            source: DataSource::Synth,
            path: None,
            seed: 7,
        }
    }
}

/// `[output]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> OutputConfig {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Reads and parses a TOML run document.
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = crate::error::read_with_context(path)?;
        RunConfig::from_toml_str(&text, &path.display().to_string())
    }

    /// Parses a TOML run document, labeling errors with `origin`.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<RunConfig> {
        toml::from_str(text)
            .map_err(|e| Error::invalid_config(format!("{origin}: {}", e.message())))
    }

    /// Builds the validated runtime system description.
    pub fn system(&self) -> Result<SystemConfig> {
        let mut system = SystemConfig {
            economics: self.economics,
            price_min: self.prices.min,
            price_max: self.prices.max,
            ..SystemConfig::default()
        };
        if !self.microgrids.is_empty() {
            system.microgrids = self
                .microgrids
                .iter()
                .enumerate()
                .map(|(i, mg)| {
                    let omega = match &mg.omega {
                        Some(cfg) => cfg.resolve(i)?,
                        None => shaped_omega(8.0),
                    };
                    Ok(MicrogridSpec::new(
                        i,
                        mg.storage.as_ref().map(StorageConfig::resolve),
                        omega,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
        }
        system.validate()?;
        Ok(system)
    }

    /// The learner hyperparameters, validated.
    pub fn learner_params(&self) -> Result<LearnerParams> {
        let params = LearnerParams {
            learning_rate: self.learner.learning_rate,
            discount: self.learner.discount,
            epsilon_start: self.learner.epsilon_start,
            epsilon_end: self.learner.epsilon_end,
            epsilon_decay: self.learner.epsilon_decay,
            episodes: self.learner.episodes,
            rng_seed: self.learner.seed,
            normalize_rewards: self.learner.normalize_rewards,
        };
        params.validate()?;
        Ok(params)
    }

    /// The scalarization used by `train` (and as the template for
    /// sweep runs), validated.
    pub fn scalarization_spec(&self) -> Result<ScalarizationSpec> {
        ScalarizationSpec::new(
            self.scalarization.kind,
            self.scalarization.weights,
            self.scalarization.utopian_margin,
        )
    }

    /// Produces the day profile: generated from the configured seed, or
    /// loaded from the configured file.
    pub fn load_day(&self) -> Result<TimeSeriesDay> {
        let system = self.system()?;
        match self.data.source {
            DataSource::Synth => Ok(env::synth_day(self.data.seed, &system)),
            DataSource::File => {
                let path = self.data.path.as_ref().ok_or_else(|| {
                    Error::invalid_config(
                        "data.path is required when data.source = \"file\"".to_string(),
                    )
                })?;
                let day = env::load_timeseries(path)?;
                if day.series.len() != system.microgrids.len() {
                    return Err(Error::invalid_config(format!(
                        "day profile {} has {} microgrid series, config has {} microgrids",
                        path.display(),
                        day.series.len(),
                        system.microgrids.len()
                    )));
                }
                Ok(day)
            }
        }
    }

    /// Validates the entire document: system invariants, learner
    /// ranges, scalarization weights, sweep granularity, data source.
    pub fn validate(&self) -> Result<()> {
        self.system()?;
        self.learner_params()?;
        self.scalarization_spec()?;
        if self.sweep.grid < 1 {
            return Err(Error::invalid_config(format!(
                "sweep.grid must be >= 1, got {}",
                self.sweep.grid
            )));
        }
        if self.data.source == DataSource::File && self.data.path.is_none() {
            return Err(Error::invalid_config(
                "data.path is required when data.source = \"file\"".to_string(),
            ));
        }
        Ok(())
    }
}
