//! Result files: JSON for single runs, CSV (or JSON) for sweeps.
//!
//! Every float is written with 17 significant digits so that reading a file
//! back reproduces the reported values bit for bit.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use caps_core::protocols::{CloudOutcome, ProtocolOutcome};
use caps_core::quantum::BASIS_LABELS;
use caps_core::{PulseEnvelope, SweepTable, TwoQubitState, C64};
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::CliError;

/// Envelopes in result files are thinned to at most this many samples.
pub const MAX_ENVELOPE_SAMPLES: usize = 2000;

pub const OUT_DIR_ENV: &str = "CAPS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    #[serde(rename = "C")]
    pub c: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma3: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub detector_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub tau_p: Option<f64>,
    pub t0: Option<f64>,
    pub t_start: f64,
    pub dt: f64,
    pub n_points: usize,
}

/// Output envelopes attached to each basis state, sampled every `stride`
/// grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRecord {
    pub stride: usize,
    pub t: Vec<f64>,
    pub basis: Vec<String>,
    pub amplitudes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub label: String,
    #[serde(rename = "P")]
    pub probability: f64,
    #[serde(rename = "E")]
    pub concurrence: Option<f64>,
    pub purity: Option<f64>,
    /// Row-major over `|11⟩, |12⟩, |21⟩, |22⟩`.
    pub rho: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schmidt_entropy: Option<f64>,
    /// Row-major pure-state amplitudes of a cloud branch.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelopes: Option<EnvelopeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudRecord {
    pub n_a: u32,
    pub n_b: u32,
    pub phi_a: f64,
    pub phi_b: f64,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub caps_version: String,
    pub protocol: String,
    pub params: ParamsRecord,
    pub pulse: PulseRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cloud: Option<CloudRecord>,
    #[serde(rename = "P_total")]
    pub total_probability: f64,
    /// Click probability for each basis state prepared alone.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis_probabilities: Option<[f64; 4]>,
    pub branches: Vec<BranchRecord>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn rho_record(state: &TwoQubitState) -> Vec<[f64; 2]> {
    state.row_major().into_iter().map(pair).collect()
}

fn params_record(p: &caps_core::CavityParams) -> ParamsRecord {
    ParamsRecord {
        c: p.cooperativity(),
        g: p.g,
        kappa: p.kappa,
        gamma3: p.gamma3(),
        gamma31: p.gamma31,
        gamma32: p.gamma32,
        detector_efficiency: p.detector_efficiency,
    }
}

fn pulse_record(pulse: &PulseEnvelope) -> PulseRecord {
    let grid = pulse.grid();
    PulseRecord { tau_p: pulse.tau_p(), t0: pulse.t0(), t_start: grid.t_start(), dt: grid.dt(), n_points: grid.n_points() }
}

fn envelope_record(envelopes: &[PulseEnvelope; 4]) -> EnvelopeRecord {
    let grid = envelopes[0].grid();
    let stride = grid.n_points().div_ceil(MAX_ENVELOPE_SAMPLES).max(1);
    let t = (0..grid.n_points()).step_by(stride).map(|i| grid.time(i)).collect();
    let amplitudes =
        envelopes.iter().map(|e| e.amplitudes().iter().step_by(stride).copied().map(pair).collect()).collect();
    EnvelopeRecord { stride, t, basis: BASIS_LABELS.iter().map(|s| s.to_string()).collect(), amplitudes }
}

pub fn protocol_record(out: &ProtocolOutcome, pulse: &PulseEnvelope) -> RunRecord {
    RunRecord {
        caps_version: env!("CARGO_PKG_VERSION").into(),
        protocol: out.kind.to_string(),
        params: params_record(&out.params),
        pulse: pulse_record(pulse),
        weights: Some(out.weights.amplitudes().into_iter().map(pair).collect()),
        cloud: None,
        total_probability: out.total_probability,
        basis_probabilities: Some(out.basis_probabilities),
        branches: out
            .branches
            .iter()
            .map(|b| BranchRecord {
                label: b.label.clone(),
                probability: b.probability,
                concurrence: b.concurrence,
                purity: b.purity(),
                rho: b.state.as_ref().map(rho_record),
                schmidt_entropy: None,
                amplitudes: None,
                envelopes: Some(envelope_record(&b.envelopes)),
            })
            .collect(),
    }
}

pub fn cloud_record(out: &CloudOutcome, pulse: &PulseEnvelope) -> RunRecord {
    let spec = &out.spec;
    RunRecord {
        caps_version: env!("CARGO_PKG_VERSION").into(),
        protocol: "ghz-cloud".into(),
        params: params_record(&out.params),
        pulse: pulse_record(pulse),
        weights: None,
        cloud: Some(CloudRecord {
            n_a: spec.n_a,
            n_b: spec.n_b,
            phi_a: spec.phi_a,
            phi_b: spec.phi_b,
            mode: match spec.mode {
                caps_core::CloudMode::Ideal => "ideal".into(),
                caps_core::CloudMode::FiniteC => "finite-c".into(),
            },
        }),
        total_probability: out.total_probability,
        basis_probabilities: None,
        branches: out
            .branches
            .iter()
            .map(|b| BranchRecord {
                label: b.label.clone(),
                probability: b.probability,
                concurrence: b.concurrence,
                purity: b.purity,
                rho: b.state.as_ref().map(rho_record),
                schmidt_entropy: b.schmidt_entropy,
                amplitudes: b.amplitudes.map(|m| {
                    // nalgebra stores column-major
                    let m = m.transpose();
                    m.iter().copied().map(pair).collect()
                }),
                envelopes: None,
            })
            .collect(),
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f32(writer, value)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).map_err(|e| CliError::Format(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn read_run_record(path: &Path) -> Result<RunRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn csv_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    for (k, v) in &table.metadata {
        writeln!(buf, "# {k}={v}").expect("writing to memory");
    }
    let mut w = csv::Writer::from_writer(buf);
    let fail = |e: csv::Error| CliError::Format(e.to_string());
    w.write_record(&table.columns).map_err(fail)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| csv_number(*v))).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Format(e.to_string()))
}

/// Sweep table as JSON; undefined values (`NaN`) become `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub metadata: Vec<(String, String)>,
}

impl From<&SweepTable> for SweepRecord {
    fn from(t: &SweepTable) -> Self {
        SweepRecord {
            columns: t.columns.clone(),
            rows: t.rows.iter().map(|r| r.iter().map(|v| (!v.is_nan()).then_some(*v)).collect()).collect(),
            metadata: t.metadata.clone(),
        }
    }
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim().split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let bad = |e: String| CliError::Format(format!("{}: {e}", path.display()));
    let columns = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec.iter().map(|s| s.parse::<f64>().map_err(|e| bad(format!("'{s}': {e}")))).collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok(SweepTable { columns, rows, metadata })
}

/// Writes through a temporary file in the destination directory and
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// `explicit` if given, otherwise `default_name` inside `$CAPS_OUT_DIR`
/// (or the working directory).
pub fn output_path(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(default_name),
    }
}
