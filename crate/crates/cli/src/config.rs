//! Command-line flags, `key=value` config files, and the resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use caps_core::protocols::{CloudMode, CloudSpec, ProtocolKind};
use caps_core::sweep::{lin_space, log_space, SweepAxis, SweepSpec};
use caps_core::{AtomWeights, CavityParams, C64};
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "caps", version, about = "Heralded atom-atom entanglement by single-photon scattering off cavities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Run one protocol and write a JSON result.
    Sim {
        #[command(subcommand)]
        protocol: SimProtocol,
    },
    /// Evaluate a protocol over a cooperativity or pulse-duration grid.
    Sweep(Flags),
    /// Run the built-in oracle checks.
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum SimProtocol {
    /// Two atoms in one cavity.
    SameCavity(Flags),
    /// One atom in each of two cavities behind a beam splitter.
    Remote(Flags),
    /// Two atomic clouds prepared in GHZ states.
    GhzCloud(Flags),
}

/// Every flag is kept as text here so that flags and config-file entries
/// go through the same parser.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Cooperativity g²/(2κΓ3); a comma-separated list for `--axis tau-p`.
    #[arg(long = "C", allow_negative_numbers = true)]
    pub c: Option<String>,
    /// Atom-cavity coupling in units of κ.
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<String>,
    /// Total excited-state decay Γ31+Γ32.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma3: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma31: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma32: Option<String>,
    /// Intensity FWHM of the input pulse.
    #[arg(long = "tau-p", allow_negative_numbers = true)]
    pub tau_p: Option<String>,
    /// Arrival time of the pulse peak.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<String>,
    /// Integration step.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<String>,
    /// Length of the time window.
    #[arg(long, allow_negative_numbers = true)]
    pub span: Option<String>,
    /// `w11,w12,w21,w22` or per atom `u1,u2;v1,v2`, complex numbers like `0.5-0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
    #[arg(long = "detector-efficiency", allow_negative_numbers = true)]
    pub detector_efficiency: Option<String>,
    #[arg(long = "n-a", allow_negative_numbers = true)]
    pub n_a: Option<String>,
    #[arg(long = "n-b", allow_negative_numbers = true)]
    pub n_b: Option<String>,
    #[arg(long = "phi-a", allow_hyphen_values = true)]
    pub phi_a: Option<String>,
    #[arg(long = "phi-b", allow_hyphen_values = true)]
    pub phi_b: Option<String>,
    /// `ideal` or `finite-c`.
    #[arg(long)]
    pub mode: Option<String>,
    /// `same-cavity` or `remote`.
    #[arg(long)]
    pub protocol: Option<String>,
    /// `C` or `tau-p`.
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long = "grid-min", allow_negative_numbers = true)]
    pub grid_min: Option<String>,
    #[arg(long = "grid-max", allow_negative_numbers = true)]
    pub grid_max: Option<String>,
    #[arg(long = "grid-points", allow_negative_numbers = true)]
    pub grid_points: Option<String>,
    /// Output file; defaults to a name inside `$CAPS_OUT_DIR`.
    #[arg(long)]
    pub out: Option<String>,
    /// `json` or `csv`.
    #[arg(long)]
    pub format: Option<String>,
    /// Flat `key=value` file using the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("C", &self.c),
            ("g", &self.g),
            ("gamma3", &self.gamma3),
            ("gamma31", &self.gamma31),
            ("gamma32", &self.gamma32),
            ("tau-p", &self.tau_p),
            ("t0", &self.t0),
            ("dt", &self.dt),
            ("span", &self.span),
            ("weights", &self.weights),
            ("detector-efficiency", &self.detector_efficiency),
            ("n-a", &self.n_a),
            ("n-b", &self.n_b),
            ("phi-a", &self.phi_a),
            ("phi-b", &self.phi_b),
            ("mode", &self.mode),
            ("protocol", &self.protocol),
            ("axis", &self.axis),
            ("grid-min", &self.grid_min),
            ("grid-max", &self.grid_max),
            ("grid-points", &self.grid_points),
            ("out", &self.out),
            ("format", &self.format),
        ]
    }
}

const KNOWN_KEYS: [&str; 23] = [
    "C", "g", "gamma3", "gamma31", "gamma32", "tau-p", "t0", "dt", "span", "weights", "detector-efficiency", "n-a", "n-b",
    "phi-a", "phi-b", "mode", "protocol", "axis", "grid-min", "grid-max", "grid-points", "out", "format",
];

const COMMON_KEYS: [&str; 9] = ["C", "gamma3", "gamma31", "gamma32", "t0", "dt", "detector-efficiency", "out", "format"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sim(ProtocolKind),
    Sweep,
    Validate,
}

impl Command {
    fn accepts(&self, key: &str) -> bool {
        if COMMON_KEYS.contains(&key) {
            return true;
        }
        match self {
            Command::Sim(kind) => {
                matches!(key, "g" | "tau-p" | "span")
                    || (*kind == ProtocolKind::GhzCloud && matches!(key, "n-a" | "n-b" | "phi-a" | "phi-b" | "mode"))
                    || (*kind != ProtocolKind::GhzCloud && key == "weights")
            }
            Command::Sweep => matches!(key, "protocol" | "axis" | "grid-min" | "grid-max" | "grid-points" | "tau-p" | "weights"),
            Command::Validate => false,
        }
    }

    fn name(&self) -> String {
        match self {
            Command::Sim(kind) => format!("sim {kind}"),
            Command::Sweep => "sweep".into(),
            Command::Validate => "validate".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: CavityParams,
    pub tau_p: f64,
    pub t0: f64,
    pub dt: Option<f64>,
    pub span: Option<f64>,
    pub weights: AtomWeights,
    pub cloud: CloudSpec,
    pub sweep: Option<SweepSpec>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn cooperativity(&self) -> f64 {
        self.params.cooperativity()
    }
}

/// Parses `argv` (program name first) and any `--config` file into a
/// [`RunConfig`]. Flags take precedence over file entries.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (command, flags) = match cli.command {
        CliCommand::Sim { protocol } => match protocol {
            SimProtocol::SameCavity(f) => (Command::Sim(ProtocolKind::SameCavity), f),
            SimProtocol::Remote(f) => (Command::Sim(ProtocolKind::Remote), f),
            SimProtocol::GhzCloud(f) => (Command::Sim(ProtocolKind::GhzCloud), f),
        },
        CliCommand::Sweep(f) => (Command::Sweep, f),
        CliCommand::Validate => (Command::Validate, Flags::default()),
    };

    let mut values = BTreeMap::new();
    for (key, value) in flags.entries() {
        if let Some(v) = value {
            if !command.accepts(key) {
                return Err(CliError::usage(key, format!("not applicable to `{}`", command.name())));
            }
            values.insert(key.to_string(), v.clone());
        }
    }
    if let Some(path) = &flags.config {
        let file = read_config_file(path)?;
        // a coupling given on the command line replaces the file's coupling
        let coupling_from_flags = values.contains_key("C") || values.contains_key("g");
        for (key, v) in file {
            if coupling_from_flags && (key == "C" || key == "g") {
                continue;
            }
            if command.accepts(&key) {
                values.entry(key).or_insert(v);
            }
        }
    }
    resolve(command, &values)
}

/// Reads a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", n + 1)));
        };
        let key = key.trim().trim_start_matches("--");
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::usage(key, "unknown config key"));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::usage(key, "given twice in config file"));
        }
    }
    Ok(out)
}

fn number(values: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    values
        .get(key)
        .map(|v| {
            let x: f64 = v.parse().map_err(|_| CliError::usage(key, format!("'{v}' is not a number")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::usage(key, "must be finite"))
            }
        })
        .transpose()
}

fn positive(values: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    match number(values, key)? {
        Some(x) if x <= 0.0 => Err(CliError::usage(key, "must be positive")),
        other => Ok(other),
    }
}

fn non_negative(values: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    match number(values, key)? {
        Some(x) if x < 0.0 => Err(CliError::usage(key, "must be non-negative")),
        other => Ok(other),
    }
}

fn count(values: &BTreeMap<String, String>, key: &str) -> Result<Option<u32>, CliError> {
    values
        .get(key)
        .map(|v| match v.parse::<u32>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::usage(key, format!("'{v}' is not a positive integer"))),
        })
        .transpose()
}

fn decay_rates(values: &BTreeMap<String, String>) -> Result<(f64, f64), CliError> {
    let g3 = non_negative(values, "gamma3")?;
    let g31 = non_negative(values, "gamma31")?;
    let g32 = non_negative(values, "gamma32")?;
    match (g3, g31, g32) {
        (None, None, None) => Ok((0.5, 0.5)),
        (Some(t), None, None) => Ok((0.5 * t, 0.5 * t)),
        (t, a, b) => {
            let (a, b) = match (a, b) {
                (Some(a), Some(b)) => (a, b),
                (Some(a), None) => (a, t.map_or(0.0, |t| t - a)),
                (None, Some(b)) => (t.map_or(0.0, |t| t - b), b),
                (None, None) => unreachable!(),
            };
            if a < 0.0 || b < 0.0 {
                return Err(CliError::usage("gamma3", "smaller than the given partial rate"));
            }
            if let Some(t) = t {
                if (a + b - t).abs() > 1e-12 * t.max(1.0) {
                    return Err(CliError::usage("gamma3", "differs from gamma31 + gamma32"));
                }
            }
            Ok((a, b))
        }
    }
}

/// Parses `w11,w12,w21,w22` or `u1,u2;v1,v2` and normalizes.
pub fn parse_weights(text: &str) -> Result<AtomWeights, CliError> {
    let complex = |s: &str| -> Result<C64, CliError> {
        s.trim().parse::<C64>().map_err(|_| CliError::usage("weights", format!("'{}' is not a complex number", s.trim())))
    };
    let atoms: Vec<&str> = text.split(';').collect();
    let weights = match atoms.as_slice() {
        [all] => {
            let w: Vec<C64> = all.split(',').map(complex).collect::<Result<_, _>>()?;
            let w: [C64; 4] = w.try_into().map_err(|_| CliError::usage("weights", "expected four amplitudes"))?;
            AtomWeights::normalized(w)
        }
        [a, b] => {
            let pair = |s: &str| -> Result<[C64; 2], CliError> {
                let v: Vec<C64> = s.split(',').map(complex).collect::<Result<_, _>>()?;
                let v: [C64; 2] = v.try_into().map_err(|_| CliError::usage("weights", "expected two amplitudes per atom"))?;
                let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                if n == 0.0 {
                    return Err(CliError::usage("weights", "atom amplitudes are all zero"));
                }
                Ok([v[0] / n, v[1] / n])
            };
            let (u, v) = (pair(a)?, pair(b)?);
            AtomWeights::normalized(std::array::from_fn(|i| u[i / 2] * v[i % 2]))
        }
        _ => return Err(CliError::usage("weights", "at most one ';' separating the two atoms")),
    };
    weights.map_err(|e| CliError::usage("weights", e.to_string()))
}

fn resolve(command: Command, values: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let (gamma31, gamma32) = decay_rates(values)?;
    let gamma3 = gamma31 + gamma32;
    let is_sweep = command == Command::Sweep;
    let axis = match values.get("axis") {
        Some(a) => a.parse::<SweepAxis>().map_err(|e| CliError::usage("axis", e))?,
        None => SweepAxis::Cooperativity,
    };
    let c_list: Option<Vec<f64>> = values
        .get("C")
        .map(|v| {
            v.split(',')
                .map(|s| match s.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
                    _ => Err(CliError::usage("C", format!("'{}' is not a non-negative number", s.trim()))),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    if let Some(cs) = &c_list {
        if cs.len() > 1 && !(is_sweep && axis == SweepAxis::PulseDuration) {
            return Err(CliError::usage("C", "a list of values is only accepted by `sweep --axis tau-p`"));
        }
    }
    let g = non_negative(values, "g")?;
    let coupling = match (c_list.as_deref(), g) {
        (Some(_), Some(_)) => return Err(CliError::usage("C", "give either C or g, not both")),
        (Some([c]), None) => Some(*c),
        _ => None,
    };
    let mut params = match (g, coupling) {
        (Some(g), _) => CavityParams::new(g, gamma31, gamma32),
        (None, Some(c)) => {
            if gamma3 == 0.0 && c > 0.0 {
                return Err(CliError::usage("C", "needs gamma3 > 0; give g for lossless atoms"));
            }
            CavityParams::from_cooperativity(c, gamma3).map(|p| CavityParams { gamma31, gamma32, ..p })
        }
        (None, None) => CavityParams::from_cooperativity(1.0, gamma3.max(f64::MIN_POSITIVE))
            .map(|p| CavityParams { gamma31, gamma32, ..p }),
    }
    .map_err(|e| CliError::usage(if g.is_some() { "g" } else { "C" }, e.to_string()))?;
    if let Some(eff) = number(values, "detector-efficiency")? {
        params = params.with_detector_efficiency(eff).map_err(|e| CliError::usage("detector-efficiency", e.to_string()))?;
    }
    if matches!(command, Command::Sim(_)) && c_list.is_none() && g.is_none() {
        return Err(CliError::usage("C", "a cooperativity (--C) or coupling (--g) is required"));
    }

    let tau_p = positive(values, "tau-p")?.unwrap_or(50.0);
    let t0 = number(values, "t0")?.unwrap_or(0.0);
    let dt = positive(values, "dt")?;
    let span = positive(values, "span")?;
    let weights = values.get("weights").map(|w| parse_weights(w)).transpose()?.unwrap_or_else(AtomWeights::balanced);

    let mode = match values.get("mode") {
        Some(m) => m.parse::<CloudMode>().map_err(|e| CliError::usage("mode", e))?,
        None => CloudMode::Ideal,
    };
    let cloud = CloudSpec {
        n_a: count(values, "n-a")?.unwrap_or(1),
        n_b: count(values, "n-b")?.unwrap_or(1),
        phi_a: number(values, "phi-a")?.unwrap_or(0.0),
        phi_b: number(values, "phi-b")?.unwrap_or(0.0),
        mode,
    };

    let format = match values.get("format").map(String::as_str) {
        Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        Some(other) => return Err(CliError::usage("format", format!("'{other}' is not json or csv"))),
        None if is_sweep => OutputFormat::Csv,
        None => OutputFormat::Json,
    };
    if matches!(command, Command::Sim(_)) && format == OutputFormat::Csv {
        return Err(CliError::usage("format", "single runs are written as json"));
    }

    let sweep = if is_sweep {
        let protocol = match values.get("protocol").map(String::as_str) {
            Some("same-cavity") | None => ProtocolKind::SameCavity,
            Some("remote") => ProtocolKind::Remote,
            Some(other) => return Err(CliError::usage("protocol", format!("'{other}' cannot be swept"))),
        };
        let mut spec = SweepSpec::new(protocol, axis);
        match axis {
            SweepAxis::Cooperativity => {
                if c_list.is_some() {
                    return Err(CliError::usage("C", "is the swept axis; use --grid-min/--grid-max"));
                }
                spec.tau_p = tau_p;
            }
            SweepAxis::PulseDuration => {
                if values.contains_key("tau-p") {
                    return Err(CliError::usage("tau-p", "is the swept axis; use --grid-min/--grid-max"));
                }
                if let Some(cs) = c_list {
                    spec.series = cs;
                }
            }
        }
        let default = axis.default_grid();
        let lo = positive(values, "grid-min")?.unwrap_or(default[0]);
        let hi = positive(values, "grid-max")?.unwrap_or(default[default.len() - 1]);
        let n = count(values, "grid-points")?.map_or(default.len(), |n| n as usize);
        if hi < lo || (hi == lo && n > 1) {
            return Err(CliError::usage("grid-max", "must exceed grid-min"));
        }
        spec.grid = match axis {
            SweepAxis::Cooperativity => log_space(lo, hi, n),
            SweepAxis::PulseDuration => lin_space(lo, hi, n),
        };
        spec.gamma3 = gamma3;
        spec.t0 = t0;
        spec.weights = weights;
        spec.detector_efficiency = params.detector_efficiency;
        spec.dt = dt;
        spec.validate().map_err(|e| CliError::usage("grid-min", e.to_string()))?;
        Some(spec)
    } else {
        None
    };

    Ok(RunConfig {
        command,
        params,
        tau_p,
        t0,
        dt,
        span,
        weights,
        cloud,
        sweep,
        out: values.get("out").map(PathBuf::from),
        format,
    })
}
