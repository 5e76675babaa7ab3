//! ε-sweep driver: independent kinetic runs against one shared limit
//! trajectory, followed by log–log rate fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::diagnostics::{
    beta, c_rho0_rhoi, fit_rate, gamma, t_epsilon, weighted_lp_norm, well_preparedness,
    DiagnosticsRecord, ErrorDecomposition, RateFit,
};
use crate::error::{Error, Result};
use crate::fluid::{run_ddp, FluidTrajectory};
use crate::grid::{build_grids, initial_data};
use crate::kinetic::{kinetic_dt, run_vpfp_with_reference};

/// Outcome of one ε run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub dt: f64,
    /// Set when the run failed; the remaining fields are then empty.
    pub error: Option<String>,
    #[serde(skip)]
    pub records: Vec<DiagnosticsRecord>,
    pub errors: ErrorDecomposition,
    pub field_disc_at_t: f64,
    pub sup_field_discrepancy: f64,
    pub sup_pieps_minus_rho: f64,
    pub max_mass_drift: f64,
    pub min_f_over_max_f: f64,
    pub outflow: f64,
}

impl SweepEntry {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    fn failed(epsilon: f64, dt: f64, error: &Error) -> Self {
        Self {
            epsilon,
            dt,
            error: Some(error.to_string()),
            records: Vec::new(),
            errors: ErrorDecomposition::default(),
            field_disc_at_t: f64::NAN,
            sup_field_discrepancy: f64::NAN,
            sup_pieps_minus_rho: f64::NAN,
            max_mass_drift: f64::NAN,
            min_f_over_max_f: f64::NAN,
            outflow: f64::NAN,
        }
    }

    fn from_records(epsilon: f64, dt: f64, records: Vec<DiagnosticsRecord>) -> Self {
        let last = records.last().expect("a run emits at least one record");
        let m0 = records[0].mass;
        let sup = |get: fn(&DiagnosticsRecord) -> f64| records.iter().map(get).fold(0.0, f64::max);
        Self {
            epsilon,
            dt,
            error: None,
            errors: last.integrated,
            field_disc_at_t: last.field_discrepancy_inf,
            sup_field_discrepancy: sup(|r| r.field_discrepancy_inf),
            sup_pieps_minus_rho: sup(|r| r.pieps_minus_rho_l2),
            max_mass_drift: records
                .iter()
                .map(|r| (r.mass - m0).abs() / m0)
                .fold(0.0, f64::max),
            min_f_over_max_f: records
                .iter()
                .map(|r| r.min_f / r.max_f)
                .fold(f64::INFINITY, f64::min),
            outflow: last.outflow,
            records,
        }
    }
}

/// Fitted rates of every swept error.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SweepFits {
    pub total: Option<RateFit>,
    pub e1: Option<RateFit>,
    pub e2: Option<RateFit>,
    pub e3: Option<RateFit>,
    /// Rate of `sup_t ‖π^ε - ρ‖_{L²}`.
    pub sup_pieps_minus_rho: Option<RateFit>,
    /// Rate of `sup_t sup_x |E^ε - I^ε|`.
    pub sup_field_discrepancy: Option<RateFit>,
}

/// Theoretical exponents and horizon for one `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentReport {
    pub p: f64,
    pub gamma: f64,
    pub beta: f64,
    pub f0_norm: f64,
    pub m_p: f64,
    pub c_rho0_rhoi: f64,
    pub c_calib: f64,
    /// `(ε, T^ε)` for every swept ε.
    pub t_epsilon: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub fits: SweepFits,
    pub theory: Vec<ExponentReport>,
    /// True when some ε run failed or a fit could not be formed.
    pub partial: bool,
    pub warnings: Vec<String>,
}

/// Exponents, `m_p`, `C_{ρ0,ρi}` and `T^ε` for each configured `p`.
pub fn exponent_reports(config: &SimConfig, epsilons: &[f64]) -> Result<Vec<ExponentReport>> {
    let grid = build_grids(config)?;
    let data = initial_data(&config.init, &grid)?;
    Ok(config
        .p_list
        .iter()
        .map(|&p| {
            let g = gamma(p, config.d);
            let b = beta(p, config.d);
            let f0_norm = weighted_lp_norm(&grid, &data.f0, p);
            let c_const = c_rho0_rhoi(&grid.x, &data.rho0, &data.rho_i, p);
            // Product data: the ε-dependent mismatch term vanishes, so m_p is
            // the same for every ε.
            let m_p = well_preparedness(&grid, &data.f0, &data.rho0, 1.0, p, b);
            ExponentReport {
                p,
                gamma: g,
                beta: b,
                f0_norm,
                m_p,
                c_rho0_rhoi: c_const,
                c_calib: config.c_calib,
                t_epsilon: epsilons
                    .iter()
                    .map(|&eps| {
                        (
                            eps,
                            t_epsilon(f0_norm, m_p, c_const, g, p, eps, config.c_calib),
                        )
                    })
                    .collect(),
            }
        })
        .collect())
}

fn fit_series(entries: &[&SweepEntry], get: impl Fn(&SweepEntry) -> f64) -> Option<RateFit> {
    let points: Vec<(f64, f64)> = entries.iter().map(|e| (e.epsilon, get(e))).collect();
    fit_rate(&points).ok()
}

/// Runs every ε of `config.epsilons` on `jobs` worker threads.
pub fn run_convergence_sweep(config: &SimConfig, jobs: usize) -> Result<SweepResult> {
    let config = config.clone().resolved();
    config.validate()?;
    let epsilons = config
        .epsilons
        .clone()
        .ok_or_else(|| Error::config("epsilons", "a sweep needs an epsilon list"))?;
    if epsilons.len() < 3 {
        return Err(Error::config("epsilons", "a sweep needs at least 3 values"));
    }
    let reference: FluidTrajectory = run_ddp(&config)?;
    let grid = build_grids(&config)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let entries: Vec<SweepEntry> = pool.install(|| {
        epsilons
            .par_iter()
            .map(|&eps| {
                let run_config = config.with_epsilon(eps);
                let dt = kinetic_dt(&run_config, &grid);
                let mut records: Vec<DiagnosticsRecord> = Vec::new();
                match run_vpfp_with_reference(&run_config, &reference, &mut records) {
                    Ok(_) => SweepEntry::from_records(eps, dt, records),
                    Err(e) => SweepEntry::failed(eps, dt, &e),
                }
            })
            .collect()
    });

    let ok: Vec<&SweepEntry> = entries.iter().filter(|e| e.succeeded()).collect();
    let fits = SweepFits {
        total: fit_series(&ok, |e| e.errors.total),
        e1: fit_series(&ok, |e| e.errors.e1),
        e2: fit_series(&ok, |e| e.errors.e2),
        e3: fit_series(&ok, |e| e.errors.e3),
        sup_pieps_minus_rho: fit_series(&ok, |e| e.sup_pieps_minus_rho),
        sup_field_discrepancy: fit_series(&ok, |e| e.sup_field_discrepancy),
    };
    let theory = exponent_reports(&config, &epsilons)?;

    let mut warnings = Vec::new();
    for report in &theory {
        if let Some((eps, t)) = report
            .t_epsilon
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            if config.t_final > t {
                warnings.push(format!(
                    "t_final = {} exceeds T^eps = {t:.4} (p = {}, eps = {eps}, c_calib = {})",
                    config.t_final, report.p, config.c_calib
                ));
            }
        }
    }
    for e in entries.iter().filter(|e| !e.succeeded()) {
        warnings.push(format!(
            "run eps = {} failed: {}",
            e.epsilon,
            e.error.as_deref().unwrap_or("")
        ));
    }
    let partial = ok.len() < entries.len() || fits.total.is_none();
    Ok(SweepResult {
        entries,
        fits,
        theory,
        partial,
        warnings,
    })
}
