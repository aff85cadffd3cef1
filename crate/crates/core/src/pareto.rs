//! The approximate Pareto front and the fair operating point.
//!
//! One scalarized learner produces one policy per weight vector; this
//! module sweeps a simplex grid of weight vectors (training runs are
//! independent, so they execute in parallel), evaluates each greedy
//! policy on the day, keeps the non-dominated episode returns, and
//! selects the fair point: the archive entry that maximizes the
//! minimum min-max-normalized objective, giving no objective an
//! advantage.
//!
//! Dominance always works in maximization form `(w, s, g, -a)`:
//! welfare, stored energy, and profit are better larger, penalty better
//! smaller.

use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::env::{self, Policy, TimeSeriesDay};
use crate::learner::{self, LearnerParams, ScalarizationKind, ScalarizationSpec};
use crate::model::{ObjectiveVector, NUM_OBJECTIVES};
use crate::{Error, Result};

/// True iff `u` is at least as good as `v` in every objective and
/// strictly better in at least one (maximization form; lower penalty is
/// better).
pub fn dominates(u: &ObjectiveVector, v: &ObjectiveVector) -> bool {
    let u = u.to_maximization();
    let v = v.to_maximization();
    let mut strictly_better = false;
    for n in 0..NUM_OBJECTIVES {
        if u[n] < v[n] {
            return false;
        }
        if u[n] > v[n] {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Indices of the non-dominated points, in input order. Duplicates of a
/// surviving point all survive (dominance is strict).
pub fn non_dominated_indices(points: &[ObjectiveVector]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|other| dominates(other, &points[i])))
        .collect()
}

/// The maximal set of `points` under dominance, in input order.
pub fn non_dominated_filter(points: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    non_dominated_indices(points)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// All weight vectors `(i, j, k, l)/H` with `i + j + k + l = H` over
/// the four objectives, in lexicographic order of `(i, j, k)`. The
/// count is the stars-and-bars number C(H+3, 3).
pub fn weight_grid(h: usize) -> Result<Vec<[f64; NUM_OBJECTIVES]>> {
    if h < 1 {
        return Err(Error::invalid_input(format!(
            "weight grid granularity must be >= 1, got {h}"
        )));
    }
    let mut grid = Vec::new();
    let denom = h as f64;
    for i in 0..=h {
        for j in 0..=(h - i) {
            for k in 0..=(h - i - j) {
                let l = h - i - j - k;
                grid.push([
                    i as f64 / denom,
                    j as f64 / denom,
                    k as f64 / denom,
                    l as f64 / denom,
                ]);
            }
        }
    }
    Ok(grid)
}

/// One completed training run: the weights it was trained with, the
/// scalarization kind, its RNG seed, the episode return of its greedy
/// policy on the evaluation day, and the policy itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub weights: [f64; NUM_OBJECTIVES],
    pub kind: ScalarizationKind,
    pub seed: u64,
    pub episode_return: ObjectiveVector,
    pub policy: Policy,
}

/// The approximate Pareto front: entries whose episode returns survived
/// non-dominated filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    /// Keeps the entries whose episode returns are non-dominated,
    /// preserving input order.
    pub fn from_entries(entries: Vec<ArchiveEntry>) -> ParetoArchive {
        let returns: Vec<ObjectiveVector> = entries.iter().map(|e| e.episode_return).collect();
        let entries = non_dominated_indices(&returns)
            .into_iter()
            .map(|i| entries[i].clone())
            .collect();
        ParetoArchive { entries }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Each entry's episode return min-max normalized per objective
    /// over the archive, in maximization form. An objective with no
    /// spread normalizes to 1 everywhere so it never constrains the
    /// fair-point minimum.
    pub fn normalized_returns(&self) -> Vec<[f64; NUM_OBJECTIVES]> {
        let raw: Vec<[f64; NUM_OBJECTIVES]> = self
            .entries
            .iter()
            .map(|e| e.episode_return.to_maximization())
            .collect();
        let mut lo = [f64::INFINITY; NUM_OBJECTIVES];
        let mut hi = [f64::NEG_INFINITY; NUM_OBJECTIVES];
        for v in &raw {
            for n in 0..NUM_OBJECTIVES {
                lo[n] = lo[n].min(v[n]);
                hi[n] = hi[n].max(v[n]);
            }
        }
        raw.into_iter()
            .map(|v| {
                let mut out = [0.0; NUM_OBJECTIVES];
                for n in 0..NUM_OBJECTIVES {
                    let span = hi[n] - lo[n];
                    out[n] = if span > 0.0 {
                        (v[n] - lo[n]) / span
                    } else {
                        1.0
                    };
                }
                out
            })
            .collect()
    }

    /// Index of the fair point: the entry maximizing the minimum
    /// normalized objective. Ties break to the larger sum of normalized
    /// objectives, then to the lower index.
    pub fn fair_point_index(&self) -> Result<usize> {
        if self.entries.is_empty() {
            return Err(Error::invalid_input(
                "cannot select a fair point from an empty archive".to_string(),
            ));
        }
        let normalized = self.normalized_returns();
        let mut best = 0;
        let mut best_min = f64::NEG_INFINITY;
        let mut best_sum = f64::NEG_INFINITY;
        for (i, v) in normalized.iter().enumerate() {
            let min = v.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
            let sum: f64 = v.iter().sum();
            if min > best_min || (min == best_min && sum > best_sum) {
                best = i;
                best_min = min;
                best_sum = sum;
            }
        }
        Ok(best)
    }

    /// The fair point itself.
    pub fn fair_point(&self) -> Result<&ArchiveEntry> {
        Ok(&self.entries[self.fair_point_index()?])
    }
}

/// A finished sweep: every run in weight-grid order, and the archive of
/// non-dominated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// All training runs, one per weight vector, pre-filtering.
    pub runs: Vec<ArchiveEntry>,
    pub archive: ParetoArchive,
}

/// Trains one policy per weight-grid vector (in parallel — runs share
/// nothing), evaluates each greedy policy on `day`, and filters the
/// returns into the archive. Run `i` uses `params.rng_seed + i`, so the
/// whole sweep is deterministic.
///
/// `template` supplies the scalarization kind and utopian margin; its
/// weights are replaced by each grid vector in turn.
pub fn sweep(
    config: &SystemConfig,
    day: &TimeSeriesDay,
    template: &ScalarizationSpec,
    h: usize,
    params: &LearnerParams,
) -> Result<SweepOutcome> {
    let weights = weight_grid(h)?;
    let runs: Vec<ArchiveEntry> = weights
        .into_par_iter()
        .enumerate()
        .map(|(i, w)| {
            let spec = template.with_weights(w)?;
            let run_params = LearnerParams {
                rng_seed: params.rng_seed.wrapping_add(i as u64),
                ..params.clone()
            };
            let outcome = learner::train(config, day, &spec, &run_params)?;
            let evaluation = env::rollout(&outcome.policy, day, config)?;
            Ok(ArchiveEntry {
                weights: w,
                kind: template.kind,
                seed: run_params.rng_seed,
                episode_return: evaluation.episode_return,
                policy: outcome.policy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let archive = ParetoArchive::from_entries(runs.clone());
    Ok(SweepOutcome { runs, archive })
}
