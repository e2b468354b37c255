//! Library side of the `caps` command: configuration, execution and result
//! files.

pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use caps_core::dynamics::GridSpec;
use caps_core::protocols::ProtocolKind;
use caps_core::{gaussian_pulse, run_ghz_cloud, run_remote, run_same_cavity, sweep_cooperativity, sweep_pulse_duration, SweepAxis};

pub use config::{parse_config, Command, OutputFormat, RunConfig};
pub use error::CliError;

#[derive(Debug)]
pub struct RunReport {
    pub output: Option<PathBuf>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

pub fn run_command(cfg: &RunConfig) -> Result<RunReport, CliError> {
    match cfg.command {
        Command::Sim(kind) => run_sim(cfg, kind),
        Command::Sweep => run_sweep(cfg),
        Command::Validate => {
            let checks = validate::run_suite()?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            let summary = checks.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("\n");
            if failed > 0 {
                println!("{summary}");
                return Err(CliError::Validation { failed });
            }
            Ok(RunReport { output: None, summary })
        }
    }
}

fn run_sim(cfg: &RunConfig, kind: ProtocolKind) -> Result<RunReport, CliError> {
    let m_max = match kind {
        ProtocolKind::SameCavity => 2,
        ProtocolKind::Remote => 1,
        ProtocolKind::GhzCloud => cfg.cloud.n_a.max(cfg.cloud.n_b),
    };
    let grid = GridSpec { dt: cfg.dt, span: cfg.span, ..GridSpec::new(cfg.tau_p, cfg.t0) }.build(&cfg.params, m_max)?;
    let pulse = gaussian_pulse(cfg.tau_p, cfg.t0, grid)?;
    let record = match kind {
        ProtocolKind::SameCavity => output::protocol_record(&run_same_cavity(&cfg.params, &pulse, &cfg.weights)?, &pulse),
        ProtocolKind::Remote => output::protocol_record(&run_remote(&cfg.params, &pulse, &cfg.weights)?, &pulse),
        ProtocolKind::GhzCloud => output::cloud_record(&run_ghz_cloud(&cfg.cloud, &cfg.params, &pulse)?, &pulse),
    };
    let path = output::output_path(cfg.out.as_deref(), &format!("{kind}.json"));
    output::write_atomic(&path, &output::to_json(&record)?)?;
    let mut summary = format!("C = {:.6}  P_total = {:.6}", record.params.c, record.total_probability);
    for b in &record.branches {
        let e = b.concurrence.map_or("undefined".to_string(), |e| format!("{e:.6}"));
        summary.push_str(&format!("\n{}: P = {:.6}  E = {e}", b.label, b.probability));
    }
    summary.push_str(&format!("\nwrote {}", path.display()));
    Ok(RunReport { output: Some(path), summary })
}

fn run_sweep(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let spec = cfg.sweep.as_ref().expect("sweep config carries a spec");
    let table = match spec.axis {
        SweepAxis::Cooperativity => sweep_cooperativity(spec)?,
        SweepAxis::PulseDuration => sweep_pulse_duration(spec)?,
    };
    let name = format!("sweep-{}-{}.{}", spec.protocol, spec.axis.as_str(), cfg.format.extension());
    let path = output::output_path(cfg.out.as_deref(), &name);
    let bytes = match cfg.format {
        OutputFormat::Csv => output::sweep_csv(&table)?,
        OutputFormat::Json => output::to_json(&output::SweepRecord::from(&table))?,
    };
    output::write_atomic(&path, &bytes)?;
    Ok(RunReport { output: Some(path.clone()), summary: format!("{} rows\nwrote {}", table.rows.len(), path.display()) })
}
