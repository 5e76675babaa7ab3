use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use vpfp_core::diagnostics::CsvSink;
use vpfp_core::fluid::run_ddp;
use vpfp_core::sweep::{ExponentReport, SweepEntry, SweepFits};
use vpfp_core::{build_grids, load_config, run_convergence_sweep, run_oracle, run_vpfp, SimConfig};

use crate::Common;

fn resolve(common: &Common) -> Result<(SimConfig, PathBuf)> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(list) = &common.epsilons {
        config.epsilons = Some(list.clone());
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let config = config.resolved();
    config.validate()?;
    let out = common
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok((config, out))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &SimConfig,
    timings: serde_json::Value,
) -> Result<()> {
    let manifest = json!({
        "version": vpfp_core::VERSION,
        "command": command,
        "config": config,
        "timings_s": timings,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

pub fn run(common: &Common) -> Result<()> {
    let (config, out) = resolve(common)?;
    let start = Instant::now();
    let mut sink = CsvSink::new(create(&out.join("diagnostics.csv"))?, &config.p_list)?;
    let state = run_vpfp(&config, &mut sink)?;
    sink.into_inner().flush()?;
    write_manifest(
        &out,
        "run",
        &config,
        json!({ "total": start.elapsed().as_secs_f64() }),
    )?;
    println!(
        "run eps = {} finished at t = {} ({} mass lost through the velocity cutoff)",
        config.epsilon, state.t, state.outflow
    );
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    fits: &'a SweepFits,
    theory: &'a [ExponentReport],
    partial: bool,
    warnings: &'a [String],
    entries: &'a [SweepEntry],
}

fn number(v: f64) -> String {
    format!("{v:e}")
}

pub fn sweep(common: &Common) -> Result<()> {
    let (config, out) = resolve(common)?;
    let start = Instant::now();
    let result = run_convergence_sweep(&config, common.jobs)?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut csv = create(&out.join("sweep.csv"))?;
    writeln!(
        csv,
        "epsilon,err_total,err_E1,err_E2,err_E3,field_disc_at_T"
    )?;
    for e in &result.entries {
        let row = [
            e.epsilon,
            e.errors.total,
            e.errors.e1,
            e.errors.e2,
            e.errors.e3,
            e.field_disc_at_t,
        ];
        let row: Vec<String> = if e.succeeded() {
            row.iter().map(|v| number(*v)).collect()
        } else {
            std::iter::once(number(e.epsilon))
                .chain(std::iter::repeat_n("nan".to_string(), 5))
                .collect()
        };
        writeln!(csv, "{}", row.join(","))?;
    }
    csv.flush()?;

    for e in result.entries.iter().filter(|e| e.succeeded()) {
        let dir = out.join(format!("eps_{}", e.epsilon));
        fs::create_dir_all(&dir)?;
        let run_config = config.with_epsilon(e.epsilon);
        let mut sink = CsvSink::new(create(&dir.join("diagnostics.csv"))?, &config.p_list)?;
        for r in &e.records {
            vpfp_core::DiagnosticsSink::record(&mut sink, r)?;
        }
        sink.into_inner().flush()?;
        write_manifest(
            &dir,
            "sweep",
            &run_config,
            json!({ "sweep_total": elapsed }),
        )?;
    }

    write_json(
        &out.join("summary.json"),
        &Summary {
            fits: &result.fits,
            theory: &result.theory,
            partial: result.partial,
            warnings: &result.warnings,
            entries: &result.entries,
        },
    )?;
    write_manifest(&out, "sweep", &config, json!({ "total": elapsed }))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(fit) = result.fits.total {
        println!(
            "total error slope {:.4} (residual {:.3})",
            fit.slope, fit.residual
        );
    }
    Ok(())
}

pub fn fluid(common: &Common) -> Result<()> {
    let (config, out) = resolve(common)?;
    let start = Instant::now();
    let grid = build_grids(&config)?;
    let trajectory = run_ddp(&config)?;
    let mut csv = create(&out.join("fluid.csv"))?;
    let mut header = vec!["t".to_string(), "mass".to_string()];
    header.extend(config.p_list.iter().map(|p| format!("lp_norm_p{p}")));
    header.push("sup_norm".into());
    writeln!(csv, "{}", header.join(","))?;
    for (t, rho) in trajectory.times.iter().zip(&trajectory.rho) {
        let mut row = vec![*t, rho.integral(&grid.x)];
        row.extend(config.p_list.iter().map(|&p| rho.lp_norm(&grid.x, p)));
        row.push(rho.sup_norm());
        let row: Vec<String> = row.into_iter().map(number).collect();
        writeln!(csv, "{}", row.join(","))?;
    }
    csv.flush()?;
    write_manifest(
        &out,
        "fluid",
        &config,
        json!({ "total": start.elapsed().as_secs_f64() }),
    )
}

pub fn oracle(common: &Common) -> Result<()> {
    let (config, out) = resolve(common)?;
    let start = Instant::now();
    let report = run_oracle(&config)?;
    write_json(&out.join("oracle.json"), &report)?;
    write_manifest(
        &out,
        "oracle",
        &config,
        json!({ "total": start.elapsed().as_secs_f64() }),
    )?;
    println!("oracle {}", if report.passed { "passed" } else { "failed" });
    Ok(())
}
