//! CSV output for training runs, sweeps, and synthetic days.
//!
//! Every writer is deterministic — same inputs, byte-identical file —
//! and every format has a matching reader so outputs can be loaded
//! back (the readers double as validation for round-trip tests).
//! Floating-point columns are printed to six significant digits; the
//! day-profile writer prints values exactly (the generator rounds to
//! three decimals, so those round-trip losslessly through
//! [`crate::env::load_timeseries`]).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::env::{
    Policy, Rollout, StorageCommand, TimeSeriesDay, NUM_HOURS, NUM_PRICE_LEVELS, NUM_SOC_LEVELS,
    NUM_STATES,
};
use crate::learner::EpisodeStats;
use crate::model::{ObjectiveVector, NUM_OBJECTIVES};
use crate::pareto::ParetoArchive;
use crate::{Error, Result};

const CONVERGENCE_HEADER: &str = "episode,scalarized_return,Fw,Fs,Fg,Fa";
const POLICY_HEADER: &str = "state,tod,soc_level,price_level,command";
const TRAJECTORY_HEADER: &str =
    "hour,price,command,total_demand,total_grid_power,total_stored,soc_level,penalty";
const ARCHIVE_HEADER: &str = "weight_w,weight_s,weight_g,weight_a,Fw,Fs,Fg,Fa,is_fair_point";

/// Formats `x` with six significant digits in plain decimal notation.
/// Exact zero prints as `0`; values at or above 10^6 print with no
/// fractional part.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_with_context(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn parse_field<T: FromStr>(
    field: &str,
    what: &str,
    path: &Path,
    line: usize,
    column: usize,
) -> Result<T> {
    field.trim().parse().map_err(|_| {
        Error::data(
            path,
            line,
            Some(column),
            format!("invalid {what}: {:?}", field.trim()),
        )
    })
}

/// Yields `(1-based line number, trimmed non-empty line)` pairs after
/// checking that the first such line equals `header`.
fn data_lines<'a>(
    text: &'a str,
    header: &str,
    path: &Path,
) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line_no, first) = lines
        .next()
        .ok_or_else(|| Error::data(path, 1, None, "empty file"))?;
    if first != header {
        return Err(Error::data(
            path,
            line_no,
            None,
            format!("expected header {header:?}, got {first:?}"),
        ));
    }
    Ok(lines)
}

fn split_columns<'a>(
    line: &'a str,
    expected: usize,
    path: &Path,
    line_no: usize,
) -> Result<Vec<&'a str>> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != expected {
        return Err(Error::data(
            path,
            line_no,
            None,
            format!("expected {expected} columns, got {}", cells.len()),
        ));
    }
    Ok(cells)
}

/// Writes the per-episode training log: episode index, the scalarized
/// return the learner was optimizing, and the four raw objective
/// returns.
pub fn write_convergence(path: &Path, log: &[EpisodeStats]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for row in log {
        let r = row.episode_return;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.episode,
            fmt_sig(row.scalarized_return),
            fmt_sig(r.w),
            fmt_sig(r.s),
            fmt_sig(r.g),
            fmt_sig(r.a),
        );
    }
    write_with_context(path, &out)
}

/// Reads a training log written by [`write_convergence`].
pub fn read_convergence(path: &Path) -> Result<Vec<EpisodeStats>> {
    let text = crate::error::read_with_context(path)?;
    let mut log = Vec::new();
    for (line_no, line) in data_lines(&text, CONVERGENCE_HEADER, path)? {
        let cells = split_columns(line, 6, path, line_no)?;
        log.push(EpisodeStats {
            episode: parse_field(cells[0], "episode", path, line_no, 1)?,
            scalarized_return: parse_field(cells[1], "scalarized return", path, line_no, 2)?,
            episode_return: ObjectiveVector {
                w: parse_field(cells[2], "welfare return", path, line_no, 3)?,
                s: parse_field(cells[3], "stored-energy return", path, line_no, 4)?,
                g: parse_field(cells[4], "profit return", path, line_no, 5)?,
                a: parse_field(cells[5], "penalty return", path, line_no, 6)?,
            },
        });
    }
    Ok(log)
}

/// Writes the greedy policy as one row per state: the state index, its
/// decoded hour and state-of-charge bin, and the chosen price level and
/// storage command.
pub fn write_policy(path: &Path, policy: &Policy) -> Result<()> {
    let mut out = String::new();
    out.push_str(POLICY_HEADER);
    out.push('\n');
    for (state, action) in policy.actions().iter().enumerate() {
        let tod = state / NUM_SOC_LEVELS;
        let soc = state % NUM_SOC_LEVELS;
        let _ = writeln!(
            out,
            "{state},{tod},{soc},{},{}",
            action.price_level, action.storage_cmd
        );
    }
    write_with_context(path, &out)
}

/// Reads a policy written by [`write_policy`], checking that the rows
/// cover all states in order and that the decoded columns agree.
pub fn read_policy(path: &Path) -> Result<Policy> {
    let text = crate::error::read_with_context(path)?;
    let mut actions = Vec::with_capacity(NUM_STATES);
    for (line_no, line) in data_lines(&text, POLICY_HEADER, path)? {
        let cells = split_columns(line, 5, path, line_no)?;
        let state: usize = parse_field(cells[0], "state", path, line_no, 1)?;
        if state != actions.len() {
            return Err(Error::data(
                path,
                line_no,
                Some(1),
                format!("expected state {}, got {state}", actions.len()),
            ));
        }
        let tod: usize = parse_field(cells[1], "tod", path, line_no, 2)?;
        let soc: usize = parse_field(cells[2], "soc_level", path, line_no, 3)?;
        if tod != state / NUM_SOC_LEVELS || soc != state % NUM_SOC_LEVELS {
            return Err(Error::data(
                path,
                line_no,
                Some(2),
                format!("state {state} decodes to tod {}, soc {}", state / NUM_SOC_LEVELS, state % NUM_SOC_LEVELS),
            ));
        }
        let price_level: usize = parse_field(cells[3], "price_level", path, line_no, 4)?;
        if price_level >= NUM_PRICE_LEVELS {
            return Err(Error::data(
                path,
                line_no,
                Some(4),
                format!("price level {price_level} outside 0..{NUM_PRICE_LEVELS}"),
            ));
        }
        let command = StorageCommand::from_str(cells[4].trim())
            .map_err(|e| Error::data(path, line_no, Some(5), e.to_string()))?;
        actions.push(crate::env::EnvAction::new(price_level, command));
    }
    Policy::from_actions(actions)
}

/// One parsed row of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub hour: usize,
    pub price: f64,
    pub command: StorageCommand,
    pub total_demand: f64,
    pub total_grid_power: f64,
    pub total_stored: f64,
    pub soc_level: usize,
    pub penalty: f64,
}

/// Writes the hour-by-hour trace of one evaluated episode: price,
/// storage command, fleet totals, the post-step state-of-charge bin,
/// and the raw constraint-violation magnitude.
pub fn write_trajectory(path: &Path, rollout: &Rollout) -> Result<()> {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for info in &rollout.steps {
        let total_demand: f64 = info.demands.iter().sum();
        let total_stored: f64 = info.storage_levels.iter().sum();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            info.hour,
            fmt_sig(info.lambda),
            info.command,
            fmt_sig(total_demand),
            fmt_sig(info.total_grid_power),
            fmt_sig(total_stored),
            info.soc_level_after,
            fmt_sig(info.penalty),
        );
    }
    write_with_context(path, &out)
}

/// Reads a trajectory written by [`write_trajectory`], checking for a
/// full day of rows in hour order.
pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let text = crate::error::read_with_context(path)?;
    let mut rows: Vec<TrajectoryRow> = Vec::with_capacity(NUM_HOURS);
    let mut last_line = 1;
    for (line_no, line) in data_lines(&text, TRAJECTORY_HEADER, path)? {
        last_line = line_no;
        let cells = split_columns(line, 8, path, line_no)?;
        let hour: usize = parse_field(cells[0], "hour", path, line_no, 1)?;
        if hour != rows.len() {
            return Err(Error::data(
                path,
                line_no,
                Some(1),
                format!("expected hour {}, got {hour}", rows.len()),
            ));
        }
        let soc_level: usize = parse_field(cells[6], "soc_level", path, line_no, 7)?;
        if soc_level >= NUM_SOC_LEVELS {
            return Err(Error::data(
                path,
                line_no,
                Some(7),
                format!("soc level {soc_level} outside 0..{NUM_SOC_LEVELS}"),
            ));
        }
        rows.push(TrajectoryRow {
            hour,
            price: parse_field(cells[1], "price", path, line_no, 2)?,
            command: StorageCommand::from_str(cells[2].trim())
                .map_err(|e| Error::data(path, line_no, Some(3), e.to_string()))?,
            total_demand: parse_field(cells[3], "total_demand", path, line_no, 4)?,
            total_grid_power: parse_field(cells[4], "total_grid_power", path, line_no, 5)?,
            total_stored: parse_field(cells[5], "total_stored", path, line_no, 6)?,
            soc_level,
            penalty: parse_field(cells[7], "penalty", path, line_no, 8)?,
        });
    }
    if rows.len() != NUM_HOURS {
        return Err(Error::data(
            path,
            last_line,
            None,
            format!("expected {NUM_HOURS} rows, found {}", rows.len()),
        ));
    }
    Ok(rows)
}

/// One parsed row of an archive file.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRow {
    pub weights: [f64; NUM_OBJECTIVES],
    pub episode_return: ObjectiveVector,
    pub is_fair_point: bool,
}

/// Writes the Pareto archive: one row per non-dominated entry with its
/// training weights, episode return, and a flag marking the fair point.
pub fn write_archive(path: &Path, archive: &ParetoArchive) -> Result<()> {
    let fair = archive.fair_point_index()?;
    let mut out = String::new();
    out.push_str(ARCHIVE_HEADER);
    out.push('\n');
    for (i, entry) in archive.entries().iter().enumerate() {
        let w = entry.weights;
        let r = entry.episode_return;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig(w[0]),
            fmt_sig(w[1]),
            fmt_sig(w[2]),
            fmt_sig(w[3]),
            fmt_sig(r.w),
            fmt_sig(r.s),
            fmt_sig(r.g),
            fmt_sig(r.a),
            usize::from(i == fair),
        );
    }
    write_with_context(path, &out)
}

/// Reads an archive written by [`write_archive`], checking that exactly
/// one row carries the fair-point flag.
pub fn read_archive(path: &Path) -> Result<Vec<ArchiveRow>> {
    let text = crate::error::read_with_context(path)?;
    let mut rows = Vec::new();
    let mut fair_count = 0usize;
    let mut last_line = 1;
    for (line_no, line) in data_lines(&text, ARCHIVE_HEADER, path)? {
        last_line = line_no;
        let cells = split_columns(line, 9, path, line_no)?;
        let flag: usize = parse_field(cells[8], "is_fair_point", path, line_no, 9)?;
        if flag > 1 {
            return Err(Error::data(
                path,
                line_no,
                Some(9),
                format!("is_fair_point must be 0 or 1, got {flag}"),
            ));
        }
        fair_count += flag;
        rows.push(ArchiveRow {
            weights: [
                parse_field(cells[0], "weight_w", path, line_no, 1)?,
                parse_field(cells[1], "weight_s", path, line_no, 2)?,
                parse_field(cells[2], "weight_g", path, line_no, 3)?,
                parse_field(cells[3], "weight_a", path, line_no, 4)?,
            ],
            episode_return: ObjectiveVector {
                w: parse_field(cells[4], "welfare return", path, line_no, 5)?,
                s: parse_field(cells[5], "stored-energy return", path, line_no, 6)?,
                g: parse_field(cells[6], "profit return", path, line_no, 7)?,
                a: parse_field(cells[7], "penalty return", path, line_no, 8)?,
            },
            is_fair_point: flag == 1,
        });
    }
    if fair_count != 1 {
        return Err(Error::data(
            path,
            last_line,
            None,
            format!("expected exactly one fair-point row, found {fair_count}"),
        ));
    }
    Ok(rows)
}

/// Writes a day profile in the format [`crate::env::load_timeseries`]
/// reads: an `hour` column plus `mgN_baseload,mgN_renewable` pairs.
/// Values print exactly via `Display`, so files round-trip losslessly.
pub fn write_timeseries(path: &Path, day: &TimeSeriesDay) -> Result<()> {
    if day.series.is_empty() {
        return Err(Error::invalid_input(
            "cannot write a day profile with no microgrids".to_string(),
        ));
    }
    let mut out = String::from("hour");
    for i in 0..day.series.len() {
        let _ = write!(out, ",mg{n}_baseload,mg{n}_renewable", n = i + 1);
    }
    out.push('\n');
    for hour in 0..NUM_HOURS {
        let _ = write!(out, "{hour}");
        for series in &day.series {
            let _ = write!(out, ",{},{}", series.baseload[hour], series.renewable[hour]);
        }
        out.push('\n');
    }
    write_with_context(path, &out)
}
