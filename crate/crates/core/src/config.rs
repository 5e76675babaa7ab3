//! Run configuration: JSON schema, defaults and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::InitSpec;

/// Constants of the fixed time-step policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DtPolicy {
    /// Courant number of the velocity advection.
    pub c_adv: f64,
    /// Assumed bound on `sup|E|` when sizing the step.
    pub e_bound: f64,
    /// Minimum number of steps over `[0, T_final]`.
    pub n_min: usize,
    /// Collision resolution: `dt ≤ c_coll · ε^3` (see `DtPolicy::max_dt`).
    pub c_coll: f64,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self {
            c_adv: 0.5,
            e_bound: 1.0,
            n_min: 200,
            c_coll: 2.0,
        }
    }
}

impl DtPolicy {
    /// Largest admissible kinetic step for scaling `epsilon`.
    ///
    /// Splitting the stiff collision from free streaming changes the effective
    /// diffusivity by a relative `O(dt/ε²)`, so the step has to shrink faster
    /// than `ε²` for that defect to stay below the `O(ε)` signal.
    pub fn max_dt(&self, epsilon: f64, dv: f64, t_final: f64) -> f64 {
        let advection = self.c_adv * epsilon * dv / self.e_bound;
        let resolution = if t_final > 0.0 {
            t_final / self.n_min as f64
        } else {
            f64::INFINITY
        };
        let collision = self.c_coll * epsilon.powi(3);
        advection.min(resolution).min(collision)
    }
}

/// Particle oracle settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub particles: usize,
    /// Scaling of the kinetic/particle co-simulation.
    pub epsilon: f64,
    /// Final time of the cross-check.
    pub t_final: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            particles: 100_000,
            epsilon: 0.2,
            t_final: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub d: usize,
    pub length: f64,
    pub nx: usize,
    pub nv: usize,
    pub vmax: f64,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    pub t_final: f64,
    pub dt_policy: DtPolicy,
    /// Spacing of the diagnostic schedule; `T_final / 64` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic_interval: Option<f64>,
    /// Fluid sub-steps per diagnostic interval.
    pub fluid_substeps: usize,
    pub p_list: Vec<f64>,
    pub init: InitSpec,
    pub seed: u64,
    /// Stand-in for the unnamed constant in the validity horizon.
    pub c_calib: f64,
    pub oracle: OracleConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            d: 1,
            length: 1.0,
            nx: 128,
            nv: 256,
            vmax: 8.0,
            epsilon: 0.1,
            epsilons: None,
            t_final: 0.5,
            dt_policy: DtPolicy::default(),
            diagnostic_interval: None,
            fluid_substeps: 16,
            p_list: vec![2.0, 4.0],
            init: InitSpec::default(),
            seed: 0,
            c_calib: 1.0,
            oracle: OracleConfig::default(),
            output_dir: None,
        }
    }
}

/// Number of diagnostic intervals when none is configured.
pub const DEFAULT_DIAGNOSTIC_INTERVALS: usize = 64;

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Fills optional fields with their resolved values.
    pub fn resolved(mut self) -> Self {
        if self.diagnostic_interval.is_none() && self.t_final > 0.0 {
            self.diagnostic_interval = Some(self.t_final / DEFAULT_DIAGNOSTIC_INTERVALS as f64);
        }
        self
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        let mut config = self.clone();
        config.epsilon = epsilon;
        config
    }

    /// Diagnostic times `0, Δ, 2Δ, …, T_final`.
    pub fn schedule(&self) -> Vec<f64> {
        let n = self.schedule_intervals();
        if n == 0 {
            return vec![0.0];
        }
        let interval = self.t_final / n as f64;
        (0..=n).map(|i| i as f64 * interval).collect()
    }

    pub fn schedule_intervals(&self) -> usize {
        if self.t_final == 0.0 {
            return 0;
        }
        let interval = self
            .diagnostic_interval
            .unwrap_or(self.t_final / DEFAULT_DIAGNOSTIC_INTERVALS as f64);
        (self.t_final / interval).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::config("d", "only d = 1 is supported"));
        }
        positive("length", self.length)?;
        if self.nx < 8 || !self.nx.is_power_of_two() {
            return Err(Error::config("nx", "must be a power of two and at least 8"));
        }
        if self.nv < 8 {
            return Err(Error::config("nv", "must be at least 8"));
        }
        if !(self.vmax.is_finite() && self.vmax >= 6.0) {
            return Err(Error::config("vmax", "must be at least 6"));
        }
        check_epsilon("epsilon", self.epsilon)?;
        if let Some(list) = &self.epsilons {
            for (i, &eps) in list.iter().enumerate() {
                check_epsilon(&format!("epsilons[{i}]"), eps)?;
                if list[..i].contains(&eps) {
                    return Err(Error::config(
                        format!("epsilons[{i}]"),
                        format!("duplicate value {eps}"),
                    ));
                }
            }
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config("t_final", "must be finite and nonnegative"));
        }
        positive("dt_policy.c_adv", self.dt_policy.c_adv)?;
        if self.dt_policy.c_adv > 1.0 {
            return Err(Error::config("dt_policy.c_adv", "must not exceed 1"));
        }
        positive("dt_policy.e_bound", self.dt_policy.e_bound)?;
        positive("dt_policy.c_coll", self.dt_policy.c_coll)?;
        if self.dt_policy.n_min == 0 {
            return Err(Error::config("dt_policy.n_min", "must be positive"));
        }
        if let Some(interval) = self.diagnostic_interval {
            positive("diagnostic_interval", interval)?;
            if self.t_final > 0.0 {
                let n = self.t_final / interval;
                if (n - n.round()).abs() > 1e-9 * n.max(1.0) || n.round() < 1.0 {
                    return Err(Error::config(
                        "diagnostic_interval",
                        "must divide t_final into a whole number of intervals",
                    ));
                }
            }
        }
        if self.fluid_substeps == 0 {
            return Err(Error::config("fluid_substeps", "must be positive"));
        }
        if self.p_list.is_empty() {
            return Err(Error::config("p_list", "must not be empty"));
        }
        for (i, &p) in self.p_list.iter().enumerate() {
            if !(p.is_finite() && p > self.d as f64 && p >= 2.0) {
                return Err(Error::config(
                    format!("p_list[{i}]"),
                    format!("exponent {p} must be finite, at least 2 and above d"),
                ));
            }
        }
        positive("init.rho0.mean", self.init.rho0.mean)?;
        positive("init.rho_i.mean", self.init.rho_i.mean)?;
        positive("c_calib", self.c_calib)?;
        if self.oracle.particles == 0 {
            return Err(Error::config("oracle.particles", "must be positive"));
        }
        check_epsilon("oracle.epsilon", self.oracle.epsilon)?;
        if !(self.oracle.t_final.is_finite() && self.oracle.t_final >= 0.0) {
            return Err(Error::config(
                "oracle.t_final",
                "must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

fn positive(path: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must be positive, got {value}"),
        ))
    }
}

fn check_epsilon(path: &str, eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must lie in (0, 1], got {eps}"),
        ))
    }
}

/// Reads and validates a JSON config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path)?;
    SimConfig::from_json(&text)
}
