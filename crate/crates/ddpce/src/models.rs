//! Ground-truth functions evaluated inside the Monte Carlo loop:
//! analytical benchmark functions and a simplified priority-stack
//! dispatch model for resilience studies.

use crate::error::{Error, Result};

/// Analytical benchmark functions for validating the regression machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// sin(x1) + 7 sin^2(x2) + 0.1 x3^4 sin(x1), the usual a = 7, b = 0.1
    /// parametrization.
    Ishigami,
    /// Two-dimensional Genz product peak with c = 5, w = 0.5 per dimension.
    ProductPeak,
    /// A fixed degree-2 polynomial in 3 variables; exactly representable by
    /// a total-degree-2 expansion.
    PolyD3,
}

impl TestFunction {
    pub fn from_name(name: &str) -> Result<TestFunction> {
        match name {
            "ishigami" => Ok(TestFunction::Ishigami),
            "product_peak" => Ok(TestFunction::ProductPeak),
            "poly_d3" => Ok(TestFunction::PolyD3),
            _ => Err(Error::Config(format!(
                "unknown test function {name:?} (expected ishigami, product_peak or poly_d3)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Ishigami => "ishigami",
            TestFunction::ProductPeak => "product_peak",
            TestFunction::PolyD3 => "poly_d3",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            TestFunction::Ishigami | TestFunction::PolyD3 => 3,
            TestFunction::ProductPeak => 2,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return Err(Error::Config(format!(
                "{} takes {} arguments, got {}",
                self.name(),
                self.arity(),
                x.len()
            )));
        }
        Ok(match self {
            TestFunction::Ishigami => {
                x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin()
            }
            TestFunction::ProductPeak => {
                let c_inv_sq = 1.0 / 25.0;
                x.iter().map(|&v| 1.0 / (c_inv_sq + (v - 0.5) * (v - 0.5))).product()
            }
            TestFunction::PolyD3 => {
                1.5 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2] + x[0] * x[1] - 2.0 * x[1] * x[2]
                    + 0.75 * x[0] * x[0]
                    + 0.25 * x[2] * x[2]
            }
        })
    }
}

/// One load priority level: its share of total demand and the penalty per
/// unit of shed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityLevel {
    pub fraction: f64,
    pub penalty: f64,
}

/// Storage parameters: usable energy, per-hour power limit, energy at the
/// start of the emergency window, and discharge efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Storage {
    pub energy_capacity: f64,
    pub power_limit: f64,
    pub initial_level: f64,
    pub efficiency: f64,
}

/// Configuration of the simplified priority-stack dispatch model.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchConfig {
    pub horizon: usize,
    /// Ordered most-critical first; penalties strictly decreasing.
    pub levels: Vec<PriorityLevel>,
    /// Available supply per hour, length `horizon`.
    pub generation: Vec<f64>,
    pub storage: Storage,
    /// Demand profile per hour, length `horizon`, scaled by the load input.
    pub base_load: Vec<f64>,
}

impl DispatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("dispatch horizon must be positive".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("dispatch needs at least one priority level".into()));
        }
        let frac_sum: f64 = self.levels.iter().map(|l| l.fraction).sum();
        if (frac_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "priority-level demand fractions must sum to 1, got {frac_sum}"
            )));
        }
        if self.levels.iter().any(|l| l.fraction < 0.0) {
            return Err(Error::Config("demand fractions must be non-negative".into()));
        }
        for pair in self.levels.windows(2) {
            if !(pair[0].penalty > pair[1].penalty) {
                return Err(Error::Config(
                    "shedding penalties must strictly decrease with priority level".into(),
                ));
            }
        }
        if self.levels.iter().any(|l| l.penalty < 0.0) {
            return Err(Error::Config("shedding penalties must be non-negative".into()));
        }
        if self.generation.len() != self.horizon || self.base_load.len() != self.horizon {
            return Err(Error::Config(format!(
                "generation and base load profiles must have {} entries",
                self.horizon
            )));
        }
        if self.generation.iter().chain(&self.base_load).any(|&v| !(v >= 0.0)) {
            return Err(Error::Config("profiles must be non-negative and finite".into()));
        }
        let s = &self.storage;
        if !(s.energy_capacity >= 0.0 && s.power_limit >= 0.0 && s.initial_level >= 0.0) {
            return Err(Error::Config("storage capacities must be non-negative".into()));
        }
        if s.initial_level > s.energy_capacity {
            return Err(Error::Config(format!(
                "initial storage level {} exceeds capacity {}",
                s.initial_level, s.energy_capacity
            )));
        }
        if !(s.efficiency > 0.0 && s.efficiency <= 1.0) {
            return Err(Error::Config(format!(
                "storage efficiency must lie in (0, 1], got {}",
                s.efficiency
            )));
        }
        Ok(())
    }
}

/// Cost and shedding outcome of one dispatch scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ResilienceOutcome {
    pub total_cost: f64,
    /// Shed energy per priority level, summed over the window.
    pub shed_energy_by_level: Vec<f64>,
    /// (start hour, duration) after rounding and clipping to the horizon.
    pub emergency_window: (usize, usize),
}

/// Serves per-level demands from a shared supply in priority order,
/// returning the energy served per level.
pub fn priority_serve(supply: f64, demands: &[f64]) -> Vec<f64> {
    let mut remaining = supply.max(0.0);
    demands
        .iter()
        .map(|&d| {
            let served = d.min(remaining);
            remaining -= served;
            served
        })
        .collect()
}

/// Greedy priority-stack dispatch over the emergency window.
///
/// For each emergency hour, demand per level is served most-critical first
/// from generation plus deliverable storage; unserved energy accrues the
/// level penalty. Hours outside the window cost nothing and leave storage
/// untouched (normal-mode grid exchange is not modeled). Fractional start
/// and duration are rounded to whole hours.
pub fn eval_dispatch(config: &DispatchConfig, x: &[f64]) -> Result<ResilienceOutcome> {
    config.validate()?;
    if x.len() != 3 {
        return Err(Error::Config(format!(
            "dispatch input must be [load_scale, start_hour, duration], got {} entries",
            x.len()
        )));
    }
    let (load_scale, start_raw, dur_raw) = (x[0], x[1], x[2]);
    if !(load_scale.is_finite() && load_scale >= 0.0) {
        return Err(Error::Config(format!("load scale must be non-negative, got {load_scale}")));
    }
    if !(start_raw >= 0.0 && start_raw < config.horizon as f64) {
        return Err(Error::Config(format!(
            "start hour {start_raw} outside [0, {})",
            config.horizon
        )));
    }
    if !(dur_raw >= 0.0 && dur_raw.is_finite()) {
        return Err(Error::Config(format!("duration must be non-negative, got {dur_raw}")));
    }

    let start = (start_raw.round() as usize).min(config.horizon);
    let duration = dur_raw.round() as usize;
    let end = (start + duration).min(config.horizon);

    let mut shed = vec![0.0; config.levels.len()];
    let mut total_cost = 0.0;
    let mut soc = config.storage.initial_level;

    for t in start..end {
        let demand_total = config.base_load[t] * load_scale;
        let demands: Vec<f64> = config.levels.iter().map(|l| l.fraction * demand_total).collect();
        let deliverable = config.storage.power_limit.min(soc * config.storage.efficiency);
        let available = config.generation[t] + deliverable;

        let served = priority_serve(available, &demands);
        let served_total: f64 = served.iter().sum();
        let from_storage = (served_total - config.generation[t]).max(0.0);
        soc = (soc - from_storage / config.storage.efficiency).max(0.0);

        for (lvl, (d, s)) in demands.iter().zip(&served).enumerate() {
            let unserved = d - s;
            shed[lvl] += unserved;
            total_cost += config.levels[lvl].penalty * unserved;
        }
    }

    Ok(ResilienceOutcome {
        total_cost,
        shed_energy_by_level: shed,
        emergency_window: (start.min(end), end - start.min(end)),
    })
}
