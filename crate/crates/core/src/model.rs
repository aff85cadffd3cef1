//! Economic and physical primitives of the multi-microgrid system.
//!
//! Every function in this module is pure and stateless: price-responsive
//! demand, quadratic user utility with saturation, social welfare, the
//! per-microgrid grid power balance, quadratic generation cost, grid
//! profit, the stored-energy objective, and the storage-constraint
//! penalty. The four scalar objectives are packed into an
//! [`ObjectiveVector`]; all higher layers (environment, learner, Pareto
//! archive) are built on these primitives.
//!
//! Units used throughout: energy in kWh, prices and money in currency
//! units per kWh (so utility, cost, welfare, and profit are in currency).

use serde::Deserialize;

use crate::{Error, Result};

/// Number of reward/objective components carried everywhere: social
/// welfare, stored energy, grid profit, and constraint penalty.
pub const NUM_OBJECTIVES: usize = 4;

/// Demand elasticity is clamped to this fraction of baseload in either
/// direction, so a price excursion can move demand by at most ±50%.
pub const ELASTICITY_CLAMP: f64 = 0.5;

/// Physical parameters of one energy-storage system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageSpec {
    /// Maximum stored energy (kWh).
    pub capacity_max: f64,
    /// Minimum stored energy kept as emergency reserve (kWh).
    pub capacity_min: f64,
    /// Maximum charge/discharge magnitude per hourly step (kWh).
    pub ramp_max: f64,
    /// Stored energy at the start of a day (kWh).
    pub initial_level: f64,
}

impl StorageSpec {
    /// Conventional sizing from the maximum capacity alone: the floor is
    /// 30% of capacity (matching the lower edge of the state-of-charge
    /// discretization), the per-step ramp is 10% of capacity, and the
    /// day starts half full.
    pub fn from_capacity(capacity_max: f64) -> StorageSpec {
        StorageSpec {
            capacity_max,
            capacity_min: 0.3 * capacity_max,
            ramp_max: 0.1 * capacity_max,
            initial_level: 0.5 * capacity_max,
        }
    }

    /// Checks the physical invariants, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_min >= 0.0) {
            return Err(Error::invalid_config(format!(
                "storage capacity_min must be >= 0, got {}",
                self.capacity_min
            )));
        }
        if !(self.capacity_min < self.capacity_max) {
            return Err(Error::invalid_config(format!(
                "storage capacity_min ({}) must be < capacity_max ({})",
                self.capacity_min, self.capacity_max
            )));
        }
        if !(self.ramp_max > 0.0 && self.ramp_max <= self.capacity_max) {
            return Err(Error::invalid_config(format!(
                "storage ramp_max must be in (0, capacity_max], got {} with capacity_max {}",
                self.ramp_max, self.capacity_max
            )));
        }
        if !(self.initial_level >= self.capacity_min && self.initial_level <= self.capacity_max) {
            return Err(Error::invalid_config(format!(
                "storage initial_level ({}) must lie in [capacity_min, capacity_max] = [{}, {}]",
                self.initial_level, self.capacity_min, self.capacity_max
            )));
        }
        Ok(())
    }
}

/// One microgrid: an hourly utility-coefficient schedule, optional
/// storage, and the name of the baseload series it consumes from a day
/// profile.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrogridSpec {
    /// Zero-based index of this microgrid in the system.
    pub id: usize,
    /// Energy storage, if this microgrid has one.
    pub storage: Option<StorageSpec>,
    /// Utility coefficient per hour of day (currency/kWh): the marginal
    /// value of the first kWh consumed in that hour.
    pub omega: [f64; 24],
    /// Name of this microgrid's baseload column in a day-profile file.
    pub baseload_series: String,
}

impl MicrogridSpec {
    /// Builds a spec with the conventional series name `mg<id+1>_baseload`.
    pub fn new(id: usize, storage: Option<StorageSpec>, omega: [f64; 24]) -> MicrogridSpec {
        MicrogridSpec {
            id,
            storage,
            omega,
            baseload_series: format!("mg{}_baseload", id + 1),
        }
    }

    /// Checks that every hourly utility coefficient is strictly positive
    /// and that any storage spec is itself valid.
    pub fn validate(&self) -> Result<()> {
        for (hour, &w) in self.omega.iter().enumerate() {
            if !(w > 0.0) {
                return Err(Error::invalid_config(format!(
                    "microgrid {}: omega must be strictly positive, got {} at hour {}",
                    self.id, w, hour
                )));
            }
        }
        if let Some(storage) = &self.storage {
            storage.validate().map_err(|e| {
                Error::invalid_config(format!("microgrid {}: {}", self.id, e))
            })?;
        }
        Ok(())
    }
}

/// Scalar coefficients of the system economics: utility curvature,
/// generation cost polynomial, demand elasticity, and the weight applied
/// to the constraint-penalty reward channel.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicParams {
    /// Curvature of the quadratic user utility (currency/kWh²).
    pub alpha: f64,
    /// Quadratic coefficient of the generation cost (currency/kWh²).
    pub a_g: f64,
    /// Linear coefficient of the generation cost (currency/kWh).
    pub b_g: f64,
    /// Fixed term of the generation cost (currency).
    pub c_g: f64,
    /// Dimensionless slope of the linear demand-elasticity model.
    pub elasticity_slope: f64,
    /// Reference price at which demand equals baseload (currency/kWh).
    pub lambda_ref: f64,
    /// Multiplier applied to the raw constraint penalty when it is
    /// emitted as the fourth reward component.
    pub penalty_weight: f64,
}

impl Default for EconomicParams {
    fn default() -> EconomicParams {
        EconomicParams {
            alpha: 0.06,
            a_g: 0.002,
            b_g: 1.0,
            c_g: 5.0,
            elasticity_slope: 0.4,
            lambda_ref: 3.0,
            penalty_weight: 1.0,
        }
    }
}

impl EconomicParams {
    /// Checks the sign conditions on every coefficient.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid_config(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(self.a_g > 0.0) {
            return Err(Error::invalid_config(format!(
                "a_g must be > 0, got {}",
                self.a_g
            )));
        }
        if !(self.b_g >= 0.0) {
            return Err(Error::invalid_config(format!(
                "b_g must be >= 0, got {}",
                self.b_g
            )));
        }
        if !(self.c_g >= 0.0) {
            return Err(Error::invalid_config(format!(
                "c_g must be >= 0, got {}",
                self.c_g
            )));
        }
        if !(self.elasticity_slope >= 0.0) {
            return Err(Error::invalid_config(format!(
                "elasticity_slope must be >= 0, got {}",
                self.elasticity_slope
            )));
        }
        if !(self.lambda_ref > 0.0) {
            return Err(Error::invalid_config(format!(
                "lambda_ref must be > 0, got {}",
                self.lambda_ref
            )));
        }
        if !(self.penalty_weight >= 0.0) {
            return Err(Error::invalid_config(format!(
                "penalty_weight must be >= 0, got {}",
                self.penalty_weight
            )));
        }
        Ok(())
    }
}

/// The four objective values of one step or one episode.
///
/// `w` (welfare), `s` (stored energy), and `g` (grid profit) are
/// better when larger; the constraint penalty `a` is better when
/// smaller and is zero exactly on the feasible set. Dominance and
/// scalarization therefore work on the maximization form `(w, s, g, -a)`
/// produced by [`ObjectiveVector::to_maximization`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    /// Social welfare: total user utility minus user electricity cost.
    pub w: f64,
    /// Total stored energy across all storage systems (kWh).
    pub s: f64,
    /// Grid profit: revenue at the posted price minus generation cost.
    pub g: f64,
    /// Constraint penalty: summed magnitude of capacity, floor, and
    /// ramp violations (kWh); always ≥ 0.
    pub a: f64,
}

impl ObjectiveVector {
    /// The all-zero vector.
    pub const ZERO: ObjectiveVector = ObjectiveVector {
        w: 0.0,
        s: 0.0,
        g: 0.0,
        a: 0.0,
    };

    /// The vector in maximization order `[w, s, g, -a]`, where every
    /// component is better when larger.
    pub fn to_maximization(self) -> [f64; NUM_OBJECTIVES] {
        [self.w, self.s, self.g, -self.a]
    }

    /// Inverse of [`ObjectiveVector::to_maximization`].
    pub fn from_maximization(v: [f64; NUM_OBJECTIVES]) -> ObjectiveVector {
        ObjectiveVector {
            w: v[0],
            s: v[1],
            g: v[2],
            a: -v[3],
        }
    }
}

impl std::ops::Add for ObjectiveVector {
    type Output = ObjectiveVector;

    fn add(self, rhs: ObjectiveVector) -> ObjectiveVector {
        ObjectiveVector {
            w: self.w + rhs.w,
            s: self.s + rhs.s,
            g: self.g + rhs.g,
            a: self.a + rhs.a,
        }
    }
}

impl std::ops::AddAssign for ObjectiveVector {
    fn add_assign(&mut self, rhs: ObjectiveVector) {
        *self = *self + rhs;
    }
}

/// Price-responsive demand: the baseload scaled by `1 + h(lambda)`,
/// where the elasticity `h` falls linearly with the relative deviation
/// of the price from the reference price and is clamped to ±50%.
///
/// Demand is nonincreasing in the price and never negative.
pub fn demand(lambda: f64, baseload: f64, params: &EconomicParams) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid_input(format!(
            "demand: price must be > 0, got {lambda}"
        )));
    }
    if !(baseload >= 0.0) {
        return Err(Error::invalid_input(format!(
            "demand: baseload must be >= 0, got {baseload}"
        )));
    }
    let relative = (lambda - params.lambda_ref) / params.lambda_ref;
    let h = (-params.elasticity_slope * relative).clamp(-ELASTICITY_CLAMP, ELASTICITY_CLAMP);
    Ok((1.0 + h) * baseload)
}

/// Quadratic user utility with saturation: `omega·p_d − (alpha/2)·p_d²`
/// up to the satiation point `p_d = omega/alpha`, and the constant
/// plateau `omega²/(2·alpha)` beyond it (the quadratic's own maximum,
/// so the curve is continuous and nondecreasing).
pub fn user_utility(p_d: f64, omega: f64, alpha: f64) -> Result<f64> {
    if !(p_d >= 0.0) {
        return Err(Error::invalid_input(format!(
            "user_utility: consumption must be >= 0, got {p_d}"
        )));
    }
    if !(omega > 0.0 && alpha > 0.0) {
        return Err(Error::invalid_input(format!(
            "user_utility: omega and alpha must be > 0, got omega {omega}, alpha {alpha}"
        )));
    }
    if p_d <= omega / alpha {
        Ok(omega * p_d - 0.5 * alpha * p_d * p_d)
    } else {
        Ok(omega * omega / (2.0 * alpha))
    }
}

/// What a user pays for consuming `p_d` at price `lambda`.
pub fn user_cost(lambda: f64, p_d: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid_input(format!(
            "user_cost: price must be > 0, got {lambda}"
        )));
    }
    if !(p_d >= 0.0) {
        return Err(Error::invalid_input(format!(
            "user_cost: consumption must be >= 0, got {p_d}"
        )));
    }
    Ok(lambda * p_d)
}

/// Social welfare across all microgrids at one hour: the sum over
/// microgrids of user utility minus user cost, each microgrid valued
/// with its own utility coefficient for that hour.
pub fn welfare(
    demands: &[f64],
    lambda: f64,
    specs: &[MicrogridSpec],
    hour: usize,
    params: &EconomicParams,
) -> Result<f64> {
    if demands.len() != specs.len() {
        return Err(Error::invalid_input(format!(
            "welfare: {} demands for {} microgrids",
            demands.len(),
            specs.len()
        )));
    }
    if hour >= 24 {
        return Err(Error::invalid_input(format!(
            "welfare: hour must be in 0..24, got {hour}"
        )));
    }
    let mut total = 0.0;
    for (&p_d, spec) in demands.iter().zip(specs) {
        let utility = user_utility(p_d, spec.omega[hour], params.alpha)?;
        total += utility - user_cost(lambda, p_d)?;
    }
    Ok(total)
}

/// The consumption level that maximizes `user_utility − user_cost` for
/// one user: `(omega − lambda)/alpha`, clipped at zero when the price
/// exceeds the maximum marginal benefit. Used as a closed-form oracle
/// for the welfare shape.
pub fn welfare_optimal_demand(lambda: f64, omega: f64, alpha: f64) -> f64 {
    ((omega - lambda) / alpha).max(0.0)
}

/// Grid power drawn by one microgrid: demand plus the storage change
/// minus local renewable generation. Charging (`delta_s > 0`) adds to
/// grid demand; a negative result is power exported to the grid.
pub fn grid_power(demand: f64, renewable: f64, delta_s: f64) -> Result<f64> {
    if !(demand >= 0.0) {
        return Err(Error::invalid_input(format!(
            "grid_power: demand must be >= 0, got {demand}"
        )));
    }
    if !(renewable >= 0.0) {
        return Err(Error::invalid_input(format!(
            "grid_power: renewable must be >= 0, got {renewable}"
        )));
    }
    Ok(demand + delta_s - renewable)
}

/// Quadratic generation cost `a_g·p² + b_g·p + c_g`, evaluated verbatim
/// for negative (exported) power as well.
pub fn generation_cost(p_g: f64, params: &EconomicParams) -> f64 {
    params.a_g * p_g * p_g + params.b_g * p_g + params.c_g
}

/// Grid profit: revenue `lambda·p_g` at the posted price minus the
/// generation cost of supplying `p_g`. May be negative.
pub fn grid_profit(lambda: f64, p_g_total: f64, params: &EconomicParams) -> f64 {
    lambda * p_g_total - generation_cost(p_g_total, params)
}

/// Total energy currently stored across all storage systems: the
/// emergency-reserve objective.
pub fn stored_energy_objective(levels: &[f64]) -> f64 {
    levels.iter().sum()
}

/// Summed magnitude of storage-constraint violations after one step:
/// per storage, how far the level change exceeds the ramp limit, how
/// far the level sits above capacity, and how far it sits below the
/// reserve floor. Zero exactly when every storage satisfies all three
/// constraint families.
pub fn constraint_penalty(
    levels_now: &[f64],
    levels_prev: &[f64],
    specs: &[StorageSpec],
) -> Result<f64> {
    if levels_now.len() != specs.len() || levels_prev.len() != specs.len() {
        return Err(Error::invalid_input(format!(
            "constraint_penalty: {} current / {} previous levels for {} storages",
            levels_now.len(),
            levels_prev.len(),
            specs.len()
        )));
    }
    let mut total = 0.0;
    for ((&now, &prev), spec) in levels_now.iter().zip(levels_prev).zip(specs) {
        total += ((now - prev).abs() - spec.ramp_max).max(0.0);
        total += (now - spec.capacity_max).max(0.0);
        total += (spec.capacity_min - now).max(0.0);
    }
    Ok(total)
}

/// Packs the four objective values, rejecting a negative penalty.
pub fn objective_vector(
    welfare: f64,
    stored: f64,
    profit: f64,
    penalty: f64,
) -> Result<ObjectiveVector> {
    if !(penalty >= 0.0) {
        return Err(Error::invalid_input(format!(
            "objective_vector: penalty must be >= 0, got {penalty}"
        )));
    }
    Ok(ObjectiveVector {
        w: welfare,
        s: stored,
        g: profit,
        a: penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tolerance {tol})"
        );
    }

    fn params(elasticity_slope: f64, lambda_ref: f64) -> EconomicParams {
        EconomicParams {
            elasticity_slope,
            lambda_ref,
            ..EconomicParams::default()
        }
    }

    #[test]
    fn demand_at_reference_price_is_baseload() {
        let p = params(0.7, 3.0);
        assert_eq!(demand(3.0, 100.0, &p).unwrap(), 100.0);
    }

    #[test]
    fn demand_with_zero_slope_is_baseload() {
        let p = params(0.0, 3.0);
        assert_eq!(demand(4.0, 80.0, &p).unwrap(), 80.0);
    }

    #[test]
    fn demand_matches_hand_computed_elasticity() {
        // h = -0.4 * (4.5 - 3.0)/3.0 = -0.2, so demand = 0.8 * 100.
        let p = params(0.4, 3.0);
        assert_close(demand(4.5, 100.0, &p).unwrap(), 80.0, 1e-12);
    }

    #[test]
    fn demand_clamps_at_half_baseload_each_way() {
        let p = params(5.0, 2.0);
        assert_close(demand(40.0, 60.0, &p).unwrap(), 30.0, 1e-12);
        assert_close(demand(0.001, 60.0, &p).unwrap(), 90.0, 1e-12);
    }

    #[test]
    fn demand_rejects_bad_inputs() {
        let p = params(0.4, 3.0);
        assert!(demand(0.0, 10.0, &p).is_err());
        assert!(demand(-1.0, 10.0, &p).is_err());
        assert!(demand(2.0, -0.1, &p).is_err());
    }

    #[test]
    fn utility_is_zero_at_zero_consumption() {
        assert_eq!(user_utility(0.0, 5.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn utility_at_breakpoint_equals_plateau() {
        // omega/alpha = 10; quadratic value there is omega²/(2 alpha) = 25.
        assert_close(user_utility(10.0, 5.0, 0.5).unwrap(), 25.0, 1e-12);
        assert_close(user_utility(50.0, 5.0, 0.5).unwrap(), 25.0, 1e-12);
    }

    #[test]
    fn utility_rejects_negative_consumption() {
        assert!(user_utility(-1.0, 5.0, 0.5).is_err());
        assert!(user_utility(1.0, 0.0, 0.5).is_err());
        assert!(user_utility(1.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn user_cost_is_price_times_quantity() {
        assert_eq!(user_cost(2.0, 10.0).unwrap(), 20.0);
        assert_eq!(user_cost(3.7, 0.0).unwrap(), 0.0);
        assert_close(user_cost(1.5, 33.3).unwrap(), 49.95, 1e-12);
        assert!(user_cost(0.0, 1.0).is_err());
        assert!(user_cost(1.0, -1.0).is_err());
    }

    fn flat_microgrid(id: usize, omega: f64) -> MicrogridSpec {
        MicrogridSpec::new(id, None, [omega; 24])
    }

    #[test]
    fn welfare_sums_utility_minus_cost() {
        let p = EconomicParams {
            alpha: 0.5,
            ..EconomicParams::default()
        };
        let one = vec![flat_microgrid(0, 5.0)];
        // utility(6) = 30 - 9 = 21; cost = 12; welfare = 9.
        assert_close(welfare(&[6.0], 2.0, &one, 0, &p).unwrap(), 9.0, 1e-12);

        let three = vec![
            flat_microgrid(0, 5.0),
            flat_microgrid(1, 5.0),
            flat_microgrid(2, 5.0),
        ];
        let demands = [6.0, 6.0, 6.0];
        assert_close(welfare(&demands, 2.0, &three, 0, &p).unwrap(), 27.0, 1e-12);
        assert_eq!(welfare(&[0.0; 3], 2.0, &three, 5, &p).unwrap(), 0.0);
    }

    #[test]
    fn welfare_rejects_shape_errors() {
        let p = EconomicParams::default();
        let specs = vec![flat_microgrid(0, 5.0)];
        assert!(welfare(&[1.0, 2.0], 2.0, &specs, 0, &p).is_err());
        assert!(welfare(&[1.0], 2.0, &specs, 24, &p).is_err());
    }

    #[test]
    fn optimal_demand_closed_form() {
        assert_eq!(welfare_optimal_demand(5.0, 5.0, 0.5), 0.0);
        assert_close(welfare_optimal_demand(2.0, 5.0, 0.5), 6.0, 1e-12);
        assert_eq!(welfare_optimal_demand(6.0, 5.0, 0.5), 0.0);
    }

    #[test]
    fn optimal_demand_matches_grid_search_over_price_grid() {
        let omega = 5.0;
        let alpha = 0.5;
        for level in 0..8 {
            let lambda = 1.5 + 0.5 * level as f64;
            let mut best = (f64::NEG_INFINITY, 0.0);
            let mut p_d = 0.0;
            while p_d <= 20.0 {
                let v = user_utility(p_d, omega, alpha).unwrap() - lambda * p_d;
                if v > best.0 {
                    best = (v, p_d);
                }
                p_d += 1e-3;
            }
            let expected = welfare_optimal_demand(lambda, omega, alpha);
            assert_close(best.1, expected, 2e-3);
        }
    }

    #[test]
    fn grid_power_balances_demand_storage_and_renewables() {
        assert_eq!(grid_power(50.0, 50.0, 0.0).unwrap(), 0.0);
        assert_eq!(grid_power(50.0, 20.0, 20.0).unwrap(), 50.0);
        assert_eq!(grid_power(10.0, 40.0, 0.0).unwrap(), -30.0);
        assert!(grid_power(-1.0, 0.0, 0.0).is_err());
        assert!(grid_power(0.0, -1.0, 0.0).is_err());
    }

    fn cost_params(a_g: f64, b_g: f64, c_g: f64) -> EconomicParams {
        EconomicParams {
            a_g,
            b_g,
            c_g,
            ..EconomicParams::default()
        }
    }

    #[test]
    fn generation_cost_quadratic() {
        let p = cost_params(0.01, 1.0, 5.0);
        assert_eq!(generation_cost(0.0, &p), 5.0);
        assert_close(generation_cost(10.0, &p), 16.0, 1e-12);
        assert_close(generation_cost(-10.0, &p), -4.0, 1e-12);
    }

    #[test]
    fn grid_profit_is_revenue_minus_cost() {
        let p = cost_params(0.01, 1.0, 0.0);
        assert_eq!(grid_profit(2.0, 0.0, &p), 0.0);
        let p = cost_params(0.01, 1.0, 5.0);
        assert_close(grid_profit(2.0, 10.0, &p), 4.0, 1e-12);
        let p = cost_params(0.01, 1.0, 0.0);
        assert_close(grid_profit(1.0, 10.0, &p), -1.0, 1e-12);
    }

    #[test]
    fn stored_energy_sums_levels() {
        assert_eq!(stored_energy_objective(&[]), 0.0);
        assert_eq!(stored_energy_objective(&[100.0, 125.0]), 225.0);
        assert_eq!(stored_energy_objective(&[60.0, 75.0]), 135.0);
    }

    fn storage(capacity_max: f64, capacity_min: f64, ramp_max: f64) -> StorageSpec {
        StorageSpec {
            capacity_max,
            capacity_min,
            ramp_max,
            initial_level: capacity_min.max(0.5 * capacity_max),
        }
    }

    #[test]
    fn penalty_zero_on_feasible_step() {
        let specs = [storage(200.0, 60.0, 20.0)];
        assert_eq!(constraint_penalty(&[120.0], &[110.0], &specs).unwrap(), 0.0);
    }

    #[test]
    fn penalty_sums_ceiling_and_ramp_violations() {
        // 230 exceeds a 200 kWh capacity by 30; the 30 kWh swing beats
        // the 20 kWh ramp by 10.
        let specs = [storage(200.0, 60.0, 20.0)];
        assert_close(
            constraint_penalty(&[230.0], &[200.0], &specs).unwrap(),
            40.0,
            1e-12,
        );
    }

    #[test]
    fn penalty_counts_floor_violation_only_when_ramp_ok() {
        let specs = [storage(200.0, 60.0, 20.0)];
        assert_close(
            constraint_penalty(&[50.0], &[55.0], &specs).unwrap(),
            10.0,
            1e-12,
        );
    }

    #[test]
    fn penalty_rejects_length_mismatch() {
        let specs = [storage(200.0, 60.0, 20.0)];
        assert!(constraint_penalty(&[1.0, 2.0], &[1.0], &specs).is_err());
        assert!(constraint_penalty(&[1.0], &[1.0, 2.0], &specs).is_err());
    }

    #[test]
    fn objective_vector_packs_and_validates() {
        let v = objective_vector(9.0, 225.0, 4.0, 0.0).unwrap();
        assert_eq!(
            v,
            ObjectiveVector {
                w: 9.0,
                s: 225.0,
                g: 4.0,
                a: 0.0
            }
        );
        assert!(objective_vector(0.0, 0.0, 0.0, -1.0).is_err());
        assert!(objective_vector(0.0, 0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn maximization_round_trip() {
        let v = ObjectiveVector {
            w: 1.0,
            s: 2.0,
            g: -3.0,
            a: 4.0,
        };
        assert_eq!(v.to_maximization(), [1.0, 2.0, -3.0, -4.0]);
        assert_eq!(ObjectiveVector::from_maximization(v.to_maximization()), v);
    }

    #[test]
    fn storage_spec_from_capacity_and_validation() {
        let s = StorageSpec::from_capacity(200.0);
        assert_eq!(s.capacity_min, 60.0);
        assert_eq!(s.ramp_max, 20.0);
        assert_eq!(s.initial_level, 100.0);
        assert!(s.validate().is_ok());

        assert!(StorageSpec {
            capacity_min: 300.0,
            ..s
        }
        .validate()
        .is_err());
        assert!(StorageSpec { ramp_max: 0.0, ..s }.validate().is_err());
        assert!(StorageSpec {
            initial_level: 10.0,
            ..s
        }
        .validate()
        .is_err());
    }

    #[test]
    fn microgrid_validation_rejects_nonpositive_omega() {
        let mut mg = flat_microgrid(0, 5.0);
        assert!(mg.validate().is_ok());
        mg.omega[13] = 0.0;
        assert!(mg.validate().is_err());
    }

    #[test]
    fn economic_params_validation() {
        assert!(EconomicParams::default().validate().is_ok());
        for bad in [
            EconomicParams {
                alpha: 0.0,
                ..EconomicParams::default()
            },
            EconomicParams {
                a_g: 0.0,
                ..EconomicParams::default()
            },
            EconomicParams {
                b_g: -1.0,
                ..EconomicParams::default()
            },
            EconomicParams {
                c_g: -1.0,
                ..EconomicParams::default()
            },
            EconomicParams {
                elasticity_slope: -0.1,
                ..EconomicParams::default()
            },
            EconomicParams {
                lambda_ref: 0.0,
                ..EconomicParams::default()
            },
            EconomicParams {
                penalty_weight: -1.0,
                ..EconomicParams::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    proptest! {
        #[test]
        fn demand_is_nonincreasing_in_price(
            slope in 0.0..3.0f64,
            lambda_ref in 0.5..10.0f64,
            baseload in 0.0..500.0f64,
            lo in 0.1..20.0f64,
            hi in 0.1..20.0f64,
        ) {
            let p = params(slope, lambda_ref);
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let d_lo = demand(lo, baseload, &p).unwrap();
            let d_hi = demand(hi, baseload, &p).unwrap();
            prop_assert!(d_hi <= d_lo + 1e-9);
            prop_assert!(d_hi >= 0.0);
        }

        #[test]
        fn utility_is_continuous_and_monotone(
            omega in 0.5..20.0f64,
            alpha in 0.01..2.0f64,
            frac in 0.0..1.0f64,
        ) {
            let breakpoint = omega / alpha;
            // Continuity at the satiation point.
            let below = user_utility(breakpoint * (1.0 - 1e-9), omega, alpha).unwrap();
            let at = user_utility(breakpoint, omega, alpha).unwrap();
            let above = user_utility(breakpoint * (1.0 + 1e-9), omega, alpha).unwrap();
            prop_assert!((below - at).abs() < 1e-6);
            prop_assert!((above - at).abs() < 1e-6);
            // Monotone on [0, breakpoint], flat beyond.
            let x = frac * breakpoint;
            let step = breakpoint / 1000.0;
            let here = user_utility(x, omega, alpha).unwrap();
            let next = user_utility((x + step).min(breakpoint), omega, alpha).unwrap();
            prop_assert!(next + 1e-9 >= here);
            let far = user_utility(breakpoint * 2.0 + frac, omega, alpha).unwrap();
            prop_assert!((far - at).abs() < 1e-12);
        }

        #[test]
        fn conservation_holds_exactly(
            d in 0.0..500.0f64,
            r in 0.0..500.0f64,
            delta in -100.0..100.0f64,
        ) {
            let p_g = grid_power(d, r, delta).unwrap();
            prop_assert!((p_g + r - (d + delta)).abs() <= 1e-9);
        }

        #[test]
        fn penalty_zero_iff_feasible(
            capacity_max in 50.0..1000.0f64,
            min_frac in 0.0..0.9f64,
            ramp_frac in 0.01..1.0f64,
            prev_frac in 0.0..1.0f64,
            now_offset in -200.0..200.0f64,
        ) {
            let spec = StorageSpec {
                capacity_max,
                capacity_min: min_frac * capacity_max,
                ramp_max: ramp_frac * capacity_max,
                initial_level: capacity_max,
            };
            let prev = spec.capacity_min + prev_frac * (capacity_max - spec.capacity_min);
            let now = prev + now_offset;
            let penalty = constraint_penalty(&[now], &[prev], &[spec]).unwrap();
            let feasible = (now - prev).abs() <= spec.ramp_max
                && now <= spec.capacity_max
                && now >= spec.capacity_min;
            prop_assert_eq!(penalty == 0.0, feasible);
            prop_assert!(penalty >= 0.0);
        }

        #[test]
        fn generation_cost_is_convex(
            a_g in 0.0001..1.0f64,
            b_g in 0.0..5.0f64,
            c_g in 0.0..10.0f64,
            x in -300.0..300.0f64,
            y in -300.0..300.0f64,
        ) {
            let p = cost_params(a_g, b_g, c_g);
            let mid = 0.5 * (x + y);
            let lhs = generation_cost(mid, &p);
            let rhs = 0.5 * (generation_cost(x, &p) + generation_cost(y, &p));
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }
}
