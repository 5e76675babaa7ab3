use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::Result;
use crate::grid::{PhaseGrid, SpatialField};
use crate::kinetic::KineticState;

use super::decomposition::{pointwise, DecompositionAccumulator, ErrorDecomposition};
use super::{discrepancy_of, fp_dissipation, marginal, shifted_marginal, weighted_lp_norm};

/// Diagnostics of one kinetic state on the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    /// `(p, ‖f‖_{L^p(M)})` for each configured exponent.
    pub lp_norms: Vec<(f64, f64)>,
    /// `‖f - ρ^ε ⊗ M_h‖_{L²(M)}`.
    pub f_minus_rhoeps_m_l2: f64,
    /// `‖ρ^ε - π^ε‖_{L²}`.
    pub rhoeps_minus_pieps_l2: f64,
    /// `‖π^ε - ρ‖_{L²}` against the limit density.
    pub pieps_minus_rho_l2: f64,
    /// `‖f - ρ ⊗ M_h‖_{L²(M)}` against the limit density.
    pub f_minus_rho_m_l2: f64,
    /// `sup |E^ε - I^ε|`.
    pub field_discrepancy_inf: f64,
    pub d2_dissipation: f64,
    pub min_f: f64,
    pub max_f: f64,
    /// Mass lost through the velocity cutoff so far.
    pub outflow: f64,
    /// Running `L²(0, t)` errors.
    pub integrated: ErrorDecomposition,
}

impl DiagnosticsRecord {
    pub fn csv_header(p_list: &[f64]) -> String {
        let mut cols = vec!["t".to_string(), "mass".to_string()];
        cols.extend(
            p_list
                .iter()
                .map(|p| format!("lp_norm_p{}", format_exponent(*p))),
        );
        cols.extend(
            [
                "f_minus_rhoeps_M_l2",
                "rhoeps_minus_pieps_l2",
                "pieps_minus_rho_l2",
                "field_discrepancy_inf",
                "d2_dissipation",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.t, self.mass];
        cols.extend(self.lp_norms.iter().map(|(_, v)| *v));
        cols.extend([
            self.f_minus_rhoeps_m_l2,
            self.rhoeps_minus_pieps_l2,
            self.pieps_minus_rho_l2,
            self.field_discrepancy_inf,
            self.d2_dissipation,
        ]);
        cols.iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Entries that must be finite and nonnegative.
    pub fn is_well_formed(&self) -> bool {
        let mut entries = vec![
            self.t,
            self.mass,
            self.f_minus_rhoeps_m_l2,
            self.rhoeps_minus_pieps_l2,
            self.pieps_minus_rho_l2,
            self.f_minus_rho_m_l2,
            self.field_discrepancy_inf,
            self.d2_dissipation,
            self.integrated.e1,
            self.integrated.e2,
            self.integrated.e3,
            self.integrated.total,
        ];
        entries.extend(self.lp_norms.iter().map(|(_, v)| *v));
        entries.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

fn format_exponent(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

/// Receives diagnostics records in schedule order.
pub trait DiagnosticsSink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

impl DiagnosticsSink for Vec<DiagnosticsRecord> {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

/// Writes `diagnostics.csv` rows.
pub struct CsvSink<W: Write> {
    out: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, p_list: &[f64]) -> Result<Self> {
        writeln!(out, "{}", DiagnosticsRecord::csv_header(p_list))?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> DiagnosticsSink for CsvSink<W> {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", record.csv_row())?;
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Per-run state needed to produce records: exponents, ion density and the
/// running time integrals.
pub struct DiagnosticsContext<'a> {
    grid: &'a PhaseGrid,
    p_list: Vec<f64>,
    rho_i: SpatialField,
    acc: DecompositionAccumulator,
}

impl<'a> DiagnosticsContext<'a> {
    pub fn new(grid: &'a PhaseGrid, config: &SimConfig, rho_i: SpatialField) -> Self {
        Self {
            grid,
            p_list: config.p_list.clone(),
            rho_i,
            acc: DecompositionAccumulator::default(),
        }
    }

    pub fn record(
        &mut self,
        state: &KineticState,
        rho_limit: &SpatialField,
    ) -> Result<DiagnosticsRecord> {
        let grid = self.grid;
        let f = &state.f;
        let eps = state.epsilon;
        let point = pointwise(grid, f, rho_limit, eps);
        self.acc.push(state.t, &point);
        let rho_eps = marginal(grid, f);
        let pi = shifted_marginal(grid, f, eps);
        Ok(DiagnosticsRecord {
            t: state.t,
            mass: f.mass(grid),
            lp_norms: self
                .p_list
                .iter()
                .map(|&p| (p, weighted_lp_norm(grid, f, p)))
                .collect(),
            f_minus_rhoeps_m_l2: point.e1,
            rhoeps_minus_pieps_l2: point.e2,
            pieps_minus_rho_l2: point.e3,
            f_minus_rho_m_l2: point.total,
            field_discrepancy_inf: discrepancy_of(grid, &rho_eps, &pi, &self.rho_i)?,
            d2_dissipation: fp_dissipation(grid, f, 2.0),
            min_f: f.min(),
            max_f: f.max(),
            outflow: state.outflow,
            integrated: self.acc.current(),
        })
    }
}
