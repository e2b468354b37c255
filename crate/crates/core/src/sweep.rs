//! Protocol runs over one-dimensional parameter grids.
//!
//! Grid points are evaluated on the rayon pool and collected in grid order,
//! so parallel and serial evaluation produce identical tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CavityParams, GridSpec};
use crate::error::{Error, Result};
use crate::protocols::{run_remote, run_same_cavity, ProtocolKind, ProtocolOutcome};
use crate::pulse::{gaussian_pulse, MIN_POINTS_PER_TAU};
use crate::quantum::AtomWeights;

pub const DEFAULT_C_RANGE: (f64, f64, usize) = (0.01, 20.0, 200);
pub const DEFAULT_TAU_RANGE: (f64, f64, usize) = (0.5, 50.0, 100);
pub const DEFAULT_SERIES: [f64; 4] = [0.5, 1.0, 3.0, 10.0];
pub const DEFAULT_TAU_P: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "C")]
    Cooperativity,
    #[serde(rename = "tau-p")]
    PulseDuration,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Cooperativity => "C",
            SweepAxis::PulseDuration => "tau-p",
        }
    }

    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            SweepAxis::Cooperativity => {
                let (lo, hi, n) = DEFAULT_C_RANGE;
                log_space(lo, hi, n)
            }
            SweepAxis::PulseDuration => {
                let (lo, hi, n) = DEFAULT_TAU_RANGE;
                lin_space(lo, hi, n)
            }
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "C" => Ok(SweepAxis::Cooperativity),
            "tau-p" => Ok(SweepAxis::PulseDuration),
            other => Err(format!("unknown sweep axis '{other}'")),
        }
    }
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    lin_space(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub protocol: ProtocolKind,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    /// Pulse duration held fixed along the cooperativity axis.
    pub tau_p: f64,
    /// One output column per cooperativity along the duration axis.
    pub series: Vec<f64>,
    pub gamma3: f64,
    pub t0: f64,
    pub weights: AtomWeights,
    pub detector_efficiency: f64,
    /// Upper bound on the integration step; the automatic step is used
    /// when it is finer.
    pub dt: Option<f64>,
    pub parallel: bool,
}

impl SweepSpec {
    pub fn new(protocol: ProtocolKind, axis: SweepAxis) -> Self {
        Self {
            protocol,
            axis,
            grid: axis.default_grid(),
            tau_p: DEFAULT_TAU_P,
            series: DEFAULT_SERIES.to_vec(),
            gamma3: 1.0,
            t0: 0.0,
            weights: AtomWeights::balanced(),
            detector_efficiency: 1.0,
            dt: None,
            parallel: true,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocol == ProtocolKind::GhzCloud {
            return Err(Error::InvalidSweep("sweeps cover the same-cavity and remote protocols".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidSweep("grid is empty".into()));
        }
        if self.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidSweep("grid values must be finite and positive".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("grid must be strictly increasing".into()));
        }
        match self.axis {
            SweepAxis::Cooperativity if !(self.tau_p.is_finite() && self.tau_p > 0.0) => {
                Err(Error::InvalidSweep("a positive pulse duration is required".into()))
            }
            SweepAxis::PulseDuration if self.series.is_empty() => {
                Err(Error::InvalidSweep("at least one cooperativity is required".into()))
            }
            SweepAxis::PulseDuration if self.series.iter().any(|c| !(c.is_finite() && *c >= 0.0)) => {
                Err(Error::InvalidSweep("cooperativities must be finite and non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    fn run(&self, c: f64, tau_p: f64) -> Result<ProtocolOutcome> {
        let params = CavityParams::from_cooperativity(c, self.gamma3)?.with_detector_efficiency(self.detector_efficiency)?;
        let m_max = if self.protocol == ProtocolKind::SameCavity { 2 } else { 1 };
        let mut grid_spec = GridSpec::new(tau_p, self.t0);
        if let Some(dt) = self.dt {
            grid_spec.dt = Some(dt.min(grid_spec.default_dt(&params, m_max)).min(tau_p / MIN_POINTS_PER_TAU));
        }
        let pulse = gaussian_pulse(tau_p, self.t0, grid_spec.build(&params, m_max)?)?;
        match self.protocol {
            ProtocolKind::SameCavity => run_same_cavity(&params, &pulse, &self.weights),
            _ => run_remote(&params, &pulse, &self.weights),
        }
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let w = self.weights.amplitudes().iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect::<Vec<_>>().join(",");
        let mut meta = vec![
            ("caps_version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("protocol".to_string(), self.protocol.to_string()),
            ("axis".to_string(), self.axis.as_str().to_string()),
            ("gamma3".to_string(), self.gamma3.to_string()),
            ("t0".to_string(), self.t0.to_string()),
            ("weights".to_string(), w),
            ("detector_efficiency".to_string(), self.detector_efficiency.to_string()),
        ];
        match self.axis {
            SweepAxis::Cooperativity => meta.push(("tau_p".into(), self.tau_p.to_string())),
            SweepAxis::PulseDuration => meta.push((
                "C".into(),
                self.series.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
            )),
        }
        if let Some(dt) = self.dt {
            meta.push(("dt_max".into(), dt.to_string()));
        }
        meta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn evaluate<F>(spec: &SweepSpec, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let point = |(index, &value): (usize, &f64)| {
        f(value).map_err(|e| Error::SweepPoint { index, value, source: Box::new(e) })
    };
    if spec.parallel {
        spec.grid.par_iter().enumerate().map(point).collect()
    } else {
        spec.grid.iter().enumerate().map(point).collect()
    }
}

fn concurrence_or_nan(c: Option<f64>) -> f64 {
    c.unwrap_or(f64::NAN)
}

pub fn sweep_cooperativity(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    if spec.axis != SweepAxis::Cooperativity {
        return Err(Error::InvalidSweep("expected the cooperativity axis".into()));
    }
    let columns: Vec<&str> = match spec.protocol {
        ProtocolKind::SameCavity => vec!["C", "E", "P_s", "P_s_11", "P_s_12", "P_s_22"],
        _ => vec!["C", "E_D1", "P_D1", "P_D2", "E_D2"],
    };
    let rows = evaluate(spec, |c| {
        let out = spec.run(c, spec.tau_p)?;
        Ok(match spec.protocol {
            ProtocolKind::SameCavity => {
                let p = out.basis_probabilities;
                vec![c, concurrence_or_nan(out.branches[0].concurrence), out.total_probability, p[0], p[1], p[3]]
            }
            _ => {
                let (d1, d2) = (&out.branches[0], &out.branches[1]);
                vec![c, concurrence_or_nan(d1.concurrence), d1.probability, d2.probability, concurrence_or_nan(d2.concurrence)]
            }
        })
    })?;
    Ok(SweepTable { columns: columns.into_iter().map(String::from).collect(), rows, metadata: spec.metadata() })
}

/// Concurrence against pulse duration, one column per cooperativity. For
/// the remote protocol the column holds the `D1` branch.
pub fn sweep_pulse_duration(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    if spec.axis != SweepAxis::PulseDuration {
        return Err(Error::InvalidSweep("expected the pulse-duration axis".into()));
    }
    let mut columns = vec!["tau_p".to_string()];
    columns.extend(spec.series.iter().map(|c| format!("E_C{c}")));
    let rows = evaluate(spec, |tau_p| {
        let mut row = Vec::with_capacity(spec.series.len() + 1);
        row.push(tau_p);
        for &c in &spec.series {
            let out = spec.run(c, tau_p)?;
            row.push(concurrence_or_nan(out.branches[0].concurrence));
        }
        Ok(row)
    })?;
    Ok(SweepTable { columns, rows, metadata: spec.metadata() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_grids() {
        let c = SweepAxis::Cooperativity.default_grid();
        assert_eq!(c.len(), 200);
        assert_abs_diff_eq!(c[0], 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(c[199], 20.0, epsilon = 1e-12);
        let t = SweepAxis::PulseDuration.default_grid();
        assert_eq!(t.len(), 100);
        assert_eq!((t[0], t[99]), (0.5, 50.0));
    }

    #[test]
    fn invalid_specs() {
        let base = SweepSpec::new(ProtocolKind::SameCavity, SweepAxis::Cooperativity);
        for grid in [vec![], vec![1.0, 1.0], vec![2.0, 1.0], vec![0.0, 1.0], vec![f64::NAN]] {
            assert!(matches!(sweep_cooperativity(&base.clone().with_grid(grid)), Err(Error::InvalidSweep(_))));
        }
        let ghz = SweepSpec::new(ProtocolKind::GhzCloud, SweepAxis::Cooperativity);
        assert!(ghz.validate().is_err());
        assert!(sweep_pulse_duration(&base).is_err());
    }

    #[test]
    fn failing_point_reports_its_index() {
        let mut spec = SweepSpec::new(ProtocolKind::SameCavity, SweepAxis::Cooperativity).with_grid(vec![0.5, 1.0]);
        spec.detector_efficiency = 1.5;
        match sweep_cooperativity(&spec) {
            Err(Error::SweepPoint { index, value, .. }) => assert_eq!((index, value), (0, 0.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sector_dips_in_per_state_columns() {
        let mut spec = SweepSpec::new(ProtocolKind::SameCavity, SweepAxis::Cooperativity).with_grid(vec![0.25, 0.5]);
        spec.tau_p = 50.0;
        let table = sweep_cooperativity(&spec).unwrap();
        assert_eq!(table.columns, ["C", "E", "P_s", "P_s_11", "P_s_12", "P_s_22"]);
        assert!(table.rows[0][3] <= 0.01);
        assert!(table.rows[1][4] <= 0.01);
    }

    #[test]
    fn parallel_equals_serial_and_is_deterministic() {
        let grid = log_space(0.1, 10.0, 6);
        let mut spec = SweepSpec::new(ProtocolKind::Remote, SweepAxis::Cooperativity).with_grid(grid);
        spec.tau_p = 10.0;
        let a = sweep_cooperativity(&spec).unwrap();
        let b = sweep_cooperativity(&spec).unwrap();
        spec.parallel = false;
        let c = sweep_cooperativity(&spec).unwrap();
        let bits = |t: &SweepTable| t.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(bits(&a), bits(&c));
        for e in a.column("E_D2").unwrap() {
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn duration_sweep_columns_and_ordering() {
        let mut spec = SweepSpec::new(ProtocolKind::SameCavity, SweepAxis::PulseDuration).with_grid(vec![0.5, 5.0, 10.0]);
        spec.series = vec![3.0];
        let table = sweep_pulse_duration(&spec).unwrap();
        assert_eq!(table.columns, ["tau_p", "E_C3"]);
        let e = table.column("E_C3").unwrap();
        assert!(e[0] < e[1] && e[1] < e[2]);
    }

    #[test]
    fn coarse_step_is_clamped_per_duration() {
        let mut spec = SweepSpec::new(ProtocolKind::SameCavity, SweepAxis::PulseDuration).with_grid(vec![0.5, 2.0]);
        spec.series = vec![1.0];
        spec.dt = Some(1.0);
        assert!(sweep_pulse_duration(&spec).is_ok());
    }
}
