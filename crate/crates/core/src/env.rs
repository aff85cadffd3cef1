//! The day-ahead episode environment.
//!
//! One episode is one day: 24 hourly steps over a state space of
//! (time of day, aggregate state-of-charge level) and an action space
//! of (price level, storage command). Each step prices the hour, lets
//! demand respond, moves every storage at its own ramp rate (clipped so
//! levels stay inside their physical bounds), settles the grid power
//! balance, and emits the four-component reward.
//!
//! The module also owns day-profile data: a CSV loader with
//! row/column-addressed validation errors and a deterministic synthetic
//! day generator shaped like a campus load (evening demand peak, solar
//! generation peaking at midday).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

use crate::config::SystemConfig;
use crate::model::{self, ObjectiveVector, StorageSpec};
use crate::{Error, Result};

/// Hours in an episode.
pub const NUM_HOURS: usize = 24;
/// Discrete aggregate state-of-charge levels.
pub const NUM_SOC_LEVELS: usize = 8;
/// Total states: 24 hours × 8 state-of-charge levels.
pub const NUM_STATES: usize = NUM_HOURS * NUM_SOC_LEVELS;
/// Discrete price levels.
pub const NUM_PRICE_LEVELS: usize = 8;
/// Storage commands per price level.
pub const NUM_COMMANDS: usize = 3;
/// Total actions: 8 price levels × 3 storage commands.
pub const NUM_ACTIONS: usize = NUM_PRICE_LEVELS * NUM_COMMANDS;
/// Lower edge of the state-of-charge discretization, as a fraction of
/// total capacity.
pub const SOC_MIN_FRACTION: f64 = 0.3;

const SOC_BIN_WIDTH: f64 = (1.0 - SOC_MIN_FRACTION) / NUM_SOC_LEVELS as f64;

/// A discrete environment state: hour of day and aggregate
/// state-of-charge level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvState {
    /// Hour of day, `0..24`.
    pub tod: usize,
    /// Aggregate state-of-charge bin, `0..8`.
    pub soc_level: usize,
}

impl EnvState {
    pub fn new(tod: usize, soc_level: usize) -> EnvState {
        debug_assert!(tod < NUM_HOURS && soc_level < NUM_SOC_LEVELS);
        EnvState { tod, soc_level }
    }

    /// Flat index in `0..192`; hour-major.
    pub fn index(self) -> usize {
        self.tod * NUM_SOC_LEVELS + self.soc_level
    }

    /// Inverse of [`EnvState::index`].
    pub fn from_index(index: usize) -> EnvState {
        debug_assert!(index < NUM_STATES);
        EnvState {
            tod: index / NUM_SOC_LEVELS,
            soc_level: index % NUM_SOC_LEVELS,
        }
    }

    fn validate(self) -> Result<()> {
        if self.tod >= NUM_HOURS || self.soc_level >= NUM_SOC_LEVELS {
            return Err(Error::invalid_input(format!(
                "state (tod {}, soc_level {}) outside 24x8 grid",
                self.tod, self.soc_level
            )));
        }
        Ok(())
    }
}

/// What every storage is told to do for one hour. The command fans out
/// to all storages simultaneously, each moving at its own ramp rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageCommand {
    Charge,
    Discharge,
    Idle,
}

impl StorageCommand {
    const ALL: [StorageCommand; NUM_COMMANDS] = [
        StorageCommand::Charge,
        StorageCommand::Discharge,
        StorageCommand::Idle,
    ];

    fn offset(self) -> usize {
        match self {
            StorageCommand::Charge => 0,
            StorageCommand::Discharge => 1,
            StorageCommand::Idle => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StorageCommand::Charge => "charge",
            StorageCommand::Discharge => "discharge",
            StorageCommand::Idle => "idle",
        }
    }
}

impl fmt::Display for StorageCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StorageCommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<StorageCommand> {
        match s {
            "charge" => Ok(StorageCommand::Charge),
            "discharge" => Ok(StorageCommand::Discharge),
            "idle" => Ok(StorageCommand::Idle),
            other => Err(Error::invalid_input(format!(
                "unknown storage command {other:?} (expected charge, discharge, or idle)"
            ))),
        }
    }
}

/// One of the 24 environment actions: a price level combined with a
/// storage command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvAction {
    /// Price level, `0..8`, mapping to the uniform grid on
    /// `[price_min, price_max]`.
    pub price_level: usize,
    pub storage_cmd: StorageCommand,
}

impl EnvAction {
    pub fn new(price_level: usize, storage_cmd: StorageCommand) -> EnvAction {
        debug_assert!(price_level < NUM_PRICE_LEVELS);
        EnvAction {
            price_level,
            storage_cmd,
        }
    }

    /// Flat index in `0..24`; price-major, commands ordered
    /// charge, discharge, idle.
    pub fn index(self) -> usize {
        self.price_level * NUM_COMMANDS + self.storage_cmd.offset()
    }

    /// Inverse of [`EnvAction::index`].
    pub fn from_index(index: usize) -> EnvAction {
        debug_assert!(index < NUM_ACTIONS);
        EnvAction {
            price_level: index / NUM_COMMANDS,
            storage_cmd: StorageCommand::ALL[index % NUM_COMMANDS],
        }
    }

    fn validate(self) -> Result<()> {
        if self.price_level >= NUM_PRICE_LEVELS {
            return Err(Error::invalid_input(format!(
                "price level {} outside 0..{NUM_PRICE_LEVELS}",
                self.price_level
            )));
        }
        Ok(())
    }
}

/// All 24 actions in deterministic index order.
pub fn action_space() -> Vec<EnvAction> {
    (0..NUM_ACTIONS).map(EnvAction::from_index).collect()
}

/// One day of exogenous data for one microgrid.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridSeries {
    /// Nominal hourly demand before price response (kWh).
    pub baseload: [f64; NUM_HOURS],
    /// Hourly renewable generation (kWh).
    pub renewable: [f64; NUM_HOURS],
}

/// One day of exogenous data for the whole fleet, positionally aligned
/// with the configured microgrids.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDay {
    pub series: Vec<MicrogridSeries>,
}

/// Everything observable about one executed step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Hour the step priced, `0..24`.
    pub hour: usize,
    /// Advertised price (currency/kWh).
    pub lambda: f64,
    pub command: StorageCommand,
    /// Price-responsive demand per microgrid (kWh).
    pub demands: Vec<f64>,
    /// Renewable generation per microgrid (kWh).
    pub renewables: Vec<f64>,
    /// Grid power drawn per microgrid (kWh; negative = export).
    pub grid_power: Vec<f64>,
    pub total_grid_power: f64,
    /// Realized (clipped) level change per storage (kWh).
    pub storage_deltas: Vec<f64>,
    /// Post-step stored energy per storage (kWh).
    pub storage_levels: Vec<f64>,
    /// Aggregate state-of-charge bin after the step.
    pub soc_level_after: usize,
    /// Raw constraint-violation magnitude (kWh) before the configured
    /// penalty weight is applied to the reward channel.
    pub penalty: f64,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvTransition {
    pub next_state: EnvState,
    pub reward: ObjectiveVector,
    /// True when this step closed the 24-hour episode.
    pub terminal: bool,
    pub info: StepInfo,
}

/// Maps continuous stored-energy levels to the aggregate
/// state-of-charge bin: total stored energy over total capacity,
/// discretized into 8 equal bins spanning 30%–100%.
///
/// A fleet without storage reports bin 0.
pub fn soc_to_level(levels: &[f64], specs: &[StorageSpec]) -> Result<usize> {
    if levels.len() != specs.len() {
        return Err(Error::invalid_input(format!(
            "soc_to_level: {} levels for {} storages",
            levels.len(),
            specs.len()
        )));
    }
    if specs.is_empty() {
        return Ok(0);
    }
    let mut total = 0.0;
    let mut capacity = 0.0;
    for (&level, spec) in levels.iter().zip(specs) {
        if !(level >= spec.capacity_min && level <= spec.capacity_max) {
            return Err(Error::invalid_input(format!(
                "soc_to_level: level {} outside [{}, {}]",
                level, spec.capacity_min, spec.capacity_max
            )));
        }
        total += level;
        capacity += spec.capacity_max;
    }
    let frac = total / capacity;
    let bin = ((frac - SOC_MIN_FRACTION) / SOC_BIN_WIDTH).floor() as i64;
    Ok(bin.clamp(0, NUM_SOC_LEVELS as i64 - 1) as usize)
}

/// Executes one hour: prices the hour, computes the price response,
/// moves every storage per the shared command (clipped so each level
/// stays within its physical bounds), settles the per-microgrid and
/// total grid power, and emits the four-component reward.
///
/// `levels` carries the continuous stored energy per storage-equipped
/// microgrid at the start of the hour; the discrete `state` alone is
/// too coarse to evolve the physics, so callers thread the continuous
/// levels (as [`rollout`] does) and read the post-step levels back from
/// the returned [`StepInfo`].
pub fn step(
    state: EnvState,
    levels: &[f64],
    action: EnvAction,
    day: &TimeSeriesDay,
    config: &SystemConfig,
) -> Result<EnvTransition> {
    state.validate()?;
    action.validate()?;
    if day.series.len() != config.microgrids.len() {
        return Err(Error::invalid_input(format!(
            "day profile has {} series for {} microgrids",
            day.series.len(),
            config.microgrids.len()
        )));
    }
    let specs = config.storage_specs();
    if levels.len() != specs.len() {
        return Err(Error::invalid_input(format!(
            "{} storage levels for {} storages",
            levels.len(),
            specs.len()
        )));
    }

    let hour = state.tod;
    let lambda = config.price(action.price_level);
    let econ = &config.economics;

    // Price response of every microgrid's demand.
    let mut demands = Vec::with_capacity(config.microgrids.len());
    let mut renewables = Vec::with_capacity(config.microgrids.len());
    for series in &day.series {
        demands.push(model::demand(lambda, series.baseload[hour], econ)?);
        renewables.push(series.renewable[hour]);
    }

    // Storage moves: full ramp in the commanded direction, clipped so
    // the post-step level stays inside [capacity_min, capacity_max].
    let mut new_levels = Vec::with_capacity(specs.len());
    let mut deltas = Vec::with_capacity(specs.len());
    for (&level, spec) in levels.iter().zip(&specs) {
        if !(level >= spec.capacity_min && level <= spec.capacity_max) {
            return Err(Error::invalid_input(format!(
                "storage level {} outside [{}, {}]",
                level, spec.capacity_min, spec.capacity_max
            )));
        }
        let requested = match action.storage_cmd {
            StorageCommand::Charge => spec.ramp_max,
            StorageCommand::Discharge => -spec.ramp_max,
            StorageCommand::Idle => 0.0,
        };
        let new_level = (level + requested).clamp(spec.capacity_min, spec.capacity_max);
        deltas.push(new_level - level);
        new_levels.push(new_level);
    }

    // Grid power balance per microgrid and in total.
    let mut grid_power = Vec::with_capacity(config.microgrids.len());
    let mut total_grid_power = 0.0;
    let mut storage_cursor = 0;
    for (mg, (&d, &r)) in config
        .microgrids
        .iter()
        .zip(demands.iter().zip(&renewables))
    {
        let delta = if mg.storage.is_some() {
            let delta = deltas[storage_cursor];
            storage_cursor += 1;
            delta
        } else {
            0.0
        };
        let p_g = model::grid_power(d, r, delta)?;
        grid_power.push(p_g);
        total_grid_power += p_g;
    }

    let welfare = model::welfare(&demands, lambda, &config.microgrids, hour, econ)?;
    let stored = model::stored_energy_objective(&new_levels);
    let profit = model::grid_profit(lambda, total_grid_power, econ);
    let penalty = model::constraint_penalty(&new_levels, levels, &specs)?;
    let reward = model::objective_vector(welfare, stored, profit, econ.penalty_weight * penalty)?;

    let soc_level_after = soc_to_level(&new_levels, &specs)?;
    let next_state = EnvState::new((hour + 1) % NUM_HOURS, soc_level_after);
    Ok(EnvTransition {
        next_state,
        reward,
        terminal: hour + 1 == NUM_HOURS,
        info: StepInfo {
            hour,
            lambda,
            command: action.storage_cmd,
            demands,
            renewables,
            grid_power,
            total_grid_power,
            storage_deltas: deltas,
            storage_levels: new_levels,
            soc_level_after,
            penalty,
        },
    })
}

/// A deterministic stationary policy: one action per discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    actions: Vec<EnvAction>,
}

impl Policy {
    /// Wraps a full action table (one entry per state, indexed by
    /// [`EnvState::index`]).
    pub fn from_actions(actions: Vec<EnvAction>) -> Result<Policy> {
        if actions.len() != NUM_STATES {
            return Err(Error::invalid_input(format!(
                "policy needs {NUM_STATES} actions, got {}",
                actions.len()
            )));
        }
        for action in &actions {
            action.validate()?;
        }
        Ok(Policy { actions })
    }

    /// A uniformly random policy.
    pub fn random(rng: &mut impl Rng) -> Policy {
        Policy {
            actions: (0..NUM_STATES)
                .map(|_| EnvAction::from_index(rng.random_range(0..NUM_ACTIONS)))
                .collect(),
        }
    }

    pub fn action(&self, state: EnvState) -> EnvAction {
        self.actions[state.index()]
    }

    pub fn actions(&self) -> &[EnvAction] {
        &self.actions
    }
}

/// One evaluated episode: the undiscounted componentwise sum of the 24
/// step rewards, plus the full trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub episode_return: ObjectiveVector,
    pub steps: Vec<StepInfo>,
}

/// Plays `policy` through one full day from hour 0 and the configured
/// initial storage levels.
pub fn rollout(policy: &Policy, day: &TimeSeriesDay, config: &SystemConfig) -> Result<Rollout> {
    let specs = config.storage_specs();
    let mut levels = config.initial_levels();
    let mut episode_return = ObjectiveVector::ZERO;
    let mut steps = Vec::with_capacity(NUM_HOURS);
    for tod in 0..NUM_HOURS {
        let state = EnvState::new(tod, soc_to_level(&levels, &specs)?);
        let action = policy.action(state);
        let transition = step(state, &levels, action, day, config)?;
        episode_return += transition.reward;
        levels = transition.info.storage_levels.clone();
        steps.push(transition.info);
    }
    Ok(Rollout {
        episode_return,
        steps,
    })
}

/// Parses a day-profile CSV: header
/// `hour,mg1_baseload,mg1_renewable,mg2_baseload,...`, then exactly 24
/// rows with hours 0–23 in order and nonnegative kWh values.
/// Validation errors carry 1-based line and column coordinates.
pub fn load_timeseries(path: &Path) -> Result<TimeSeriesDay> {
    let text = crate::error::read_with_context(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::data(path, 1, None, "empty file"))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || !(fields.len() - 1).is_multiple_of(2) {
        return Err(Error::data(
            path,
            header_line,
            None,
            format!(
                "header needs an hour column plus baseload/renewable pairs, got {} columns",
                fields.len()
            ),
        ));
    }
    if fields[0] != "hour" {
        return Err(Error::data(
            path,
            header_line,
            Some(1),
            format!("first column must be \"hour\", got {:?}", fields[0]),
        ));
    }
    let num_microgrids = (fields.len() - 1) / 2;
    for i in 0..num_microgrids {
        for (offset, kind) in [(0, "baseload"), (1, "renewable")] {
            let col = 1 + 2 * i + offset;
            let expected = format!("mg{}_{kind}", i + 1);
            if fields[col] != expected {
                return Err(Error::data(
                    path,
                    header_line,
                    Some(col + 1),
                    format!("expected column {expected:?}, got {:?}", fields[col]),
                ));
            }
        }
    }

    let mut series = vec![
        MicrogridSeries {
            baseload: [0.0; NUM_HOURS],
            renewable: [0.0; NUM_HOURS],
        };
        num_microgrids
    ];
    let mut rows = 0usize;
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        if rows >= NUM_HOURS {
            return Err(Error::data(
                path,
                line_no,
                None,
                format!("expected exactly {NUM_HOURS} data rows, found more"),
            ));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != fields.len() {
            return Err(Error::data(
                path,
                line_no,
                None,
                format!("expected {} columns, got {}", fields.len(), cells.len()),
            ));
        }
        let hour: usize = cells[0].parse().map_err(|_| {
            Error::data(
                path,
                line_no,
                Some(1),
                format!("hour must be an integer, got {:?}", cells[0]),
            )
        })?;
        if hour != rows {
            return Err(Error::data(
                path,
                line_no,
                Some(1),
                format!("expected hour {rows}, got {hour}"),
            ));
        }
        for (i, s) in series.iter_mut().enumerate() {
            for (offset, kind) in [(0usize, "baseload"), (1, "renewable")] {
                let col = 1 + 2 * i + offset;
                let value: f64 = cells[col].parse().map_err(|_| {
                    Error::data(
                        path,
                        line_no,
                        Some(col + 1),
                        format!("not a number: {:?}", cells[col]),
                    )
                })?;
                if !(value >= 0.0) {
                    return Err(Error::data(
                        path,
                        line_no,
                        Some(col + 1),
                        format!("{kind} must be >= 0, got {value}"),
                    ));
                }
                if kind == "baseload" {
                    s.baseload[hour] = value;
                } else {
                    s.renewable[hour] = value;
                }
            }
        }
        rows += 1;
    }
    if rows != NUM_HOURS {
        return Err(Error::data(
            path,
            last_line,
            None,
            format!("expected exactly {NUM_HOURS} data rows, found {rows}"),
        ));
    }
    Ok(TimeSeriesDay { series })
}

/// Generates a deterministic synthetic day for the configured fleet:
/// demand with a morning shoulder, an evening peak, and an overnight
/// dip; solar generation rising after 06:00, peaking at midday, and
/// zero at night. Values are rounded to 3 decimals so emitted files
/// round-trip exactly.
pub fn synth_day(seed: u64, config: &SystemConfig) -> TimeSeriesDay {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(config.microgrids.len());
    for (i, _) in config.microgrids.iter().enumerate() {
        let base = 55.0 + 12.0 * i as f64;
        let solar_peak = (0.5 + 0.1 * (i % 3) as f64) * base;
        let mut baseload = [0.0; NUM_HOURS];
        let mut renewable = [0.0; NUM_HOURS];
        for (h, load) in baseload.iter_mut().enumerate() {
            let t = h as f64;
            let evening = 0.45 * (-(t - 19.0).powi(2) / (2.0 * 2.5_f64.powi(2))).exp();
            let morning = 0.25 * (-(t - 8.0).powi(2) / (2.0 * 2.0_f64.powi(2))).exp();
            let overnight = -0.20 * (-(t - 3.0).powi(2) / (2.0 * 3.0_f64.powi(2))).exp();
            let shape = 1.0 + evening + morning + overnight;
            let noise = rng.random_range(0.97..1.03);
            *load = round3(base * shape * noise);
        }
        for (h, gen) in renewable.iter_mut().enumerate() {
            if h > 6 && h < 18 {
                let arg = std::f64::consts::PI * (h as f64 - 6.0) / 12.0;
                let noise = rng.random_range(0.9..1.1);
                *gen = round3(solar_peak * arg.sin().powi(2) * noise);
            }
        }
        series.push(MicrogridSeries {
            baseload,
            renewable,
        });
    }
    TimeSeriesDay { series }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
