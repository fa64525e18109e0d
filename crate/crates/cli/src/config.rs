//! Experiment configuration: a flat UTF-8 key-value document, one
//! `key = value` per line, `#` comments, unknown keys rejected. Every field
//! has a default mirroring the reference cavity (L = 2 pi, omega_a = 100,
//! omega_cut = 200, g_a^2 = 1/2), so the minimal decay config is just
//! `kind = decay`. Serialization uses 17 significant digits, making
//! parse(to_document(c)) == c exact.

use std::f64::consts::PI;

use cavity1d::dynamics::Backend;
use cavity1d::model::{resonant_wavelength, CouplingModel};
use cavity1d::scenarios::Placement;

use crate::output::fmt_float;
use crate::CliError;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Decay,
    Sweep,
    Crystal,
    Ensemble,
    Spectrum,
    Analyzer,
    MasterEq,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Decay,
        ExperimentKind::Sweep,
        ExperimentKind::Crystal,
        ExperimentKind::Ensemble,
        ExperimentKind::Spectrum,
        ExperimentKind::Analyzer,
        ExperimentKind::MasterEq,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Crystal => "crystal",
            ExperimentKind::Ensemble => "ensemble",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Analyzer => "analyzer",
            ExperimentKind::MasterEq => "master-eq",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.token() == token)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Eig,
    Rk,
}

impl BackendChoice {
    pub fn token(self) -> &'static str {
        match self {
            BackendChoice::Eig => "eig",
            BackendChoice::Rk => "rk",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "eig" => Some(BackendChoice::Eig),
            "rk" => Some(BackendChoice::Rk),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingChoice {
    Broadband,
    DipoleDe,
    MomentumPa,
}

impl CouplingChoice {
    pub fn token(self) -> &'static str {
        match self {
            CouplingChoice::Broadband => "broadband",
            CouplingChoice::DipoleDe => "dipole_de",
            CouplingChoice::MomentumPa => "momentum_pa",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "broadband" => Some(CouplingChoice::Broadband),
            "dipole_de" => Some(CouplingChoice::DipoleDe),
            "momentum_pa" => Some(CouplingChoice::MomentumPa),
            _ => None,
        }
    }

    pub fn to_model(self) -> CouplingModel {
        match self {
            CouplingChoice::Broadband => CouplingModel::Broadband,
            CouplingChoice::DipoleDe => CouplingModel::DipoleDE,
            CouplingChoice::MomentumPa => CouplingModel::MomentumPA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementChoice {
    Regular,
    Random,
    Stacked,
}

impl PlacementChoice {
    pub fn token(self) -> &'static str {
        match self {
            PlacementChoice::Regular => "regular",
            PlacementChoice::Random => "random",
            PlacementChoice::Stacked => "stacked",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "regular" => Some(PlacementChoice::Regular),
            "random" => Some(PlacementChoice::Random),
            "stacked" => Some(PlacementChoice::Stacked),
            _ => None,
        }
    }

    pub fn to_placement(self) -> Placement {
        match self {
            PlacementChoice::Regular => Placement::Regular,
            PlacementChoice::Random => Placement::RandomPerCell,
            PlacementChoice::Stacked => Placement::Stacked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameChoice {
    Interaction,
    Lab,
}

impl FrameChoice {
    pub fn token(self) -> &'static str {
        match self {
            FrameChoice::Interaction => "interaction",
            FrameChoice::Lab => "lab",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "interaction" => Some(FrameChoice::Interaction),
            "lab" => Some(FrameChoice::Lab),
            _ => None,
        }
    }
}

/// Fully resolved experiment description. Physical validation is delegated
/// to the core crate when the run assembles its `SystemConfig`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub cavity_length: f64,
    pub omega_a: f64,
    pub omega_cut: f64,
    pub g_a_sq: f64,
    pub coupling: CouplingChoice,
    /// Emitter position (crystal center for crystal/ensemble kinds).
    pub atom_position: f64,
    pub t_max: f64,
    pub n_samples: usize,
    pub backend: BackendChoice,
    pub dt: f64,
    pub seed: u64,
    /// Position-sweep emitter offsets.
    pub offsets: Vec<f64>,
    pub atom_count: usize,
    pub lattice_constant: f64,
    pub placement: PlacementChoice,
    pub pin_emitter: bool,
    pub n_configs: usize,
    pub keep_members: bool,
    /// Observation instants for spectra and energy-density strobes.
    pub sample_times: Vec<f64>,
    pub grid_points: usize,
    pub analyzer_count: usize,
    pub gamma_ratio: f64,
    pub analyzer_offset: f64,
    /// Analyzer frequency half-span in units of the emitter linewidth.
    pub span_gammas: f64,
    pub read_times: Vec<f64>,
    pub c1_threshold: f64,
    pub frame: FrameChoice,
}

impl ExperimentConfig {
    /// Reference-cavity defaults for the given experiment kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let omega_a = 100.0;
        let lambda = resonant_wavelength(omega_a);
        Self {
            kind,
            cavity_length: TAU,
            omega_a,
            omega_cut: 200.0,
            g_a_sq: 0.5,
            coupling: CouplingChoice::Broadband,
            atom_position: TAU / 2.0,
            t_max: 2.0 * TAU,
            n_samples: 1024,
            backend: BackendChoice::Eig,
            dt: 1e-4,
            seed: 0,
            offsets: vec![0.0, lambda / 16.0, lambda / 8.0, lambda / 4.0],
            atom_count: 101,
            lattice_constant: lambda / 8.0,
            placement: PlacementChoice::Regular,
            pin_emitter: true,
            n_configs: 100,
            keep_members: false,
            sample_times: vec![0.3, 0.7, 1.0, 3.0],
            grid_points: 2048,
            analyzer_count: 100,
            gamma_ratio: 1e-4,
            analyzer_offset: 0.5,
            span_gammas: 3.0,
            read_times: vec![0.3, 2.0],
            c1_threshold: 1e-6,
            frame: FrameChoice::Interaction,
        }
    }

    pub fn backend_for_run(&self) -> Backend {
        match self.backend {
            BackendChoice::Eig => Backend::Eigen,
            BackendChoice::Rk => Backend::RungeKutta { dt: self.dt },
        }
    }

    /// The canonical key-value document: every key, fixed order, floats at
    /// 17 significant digits. `parse_document` round-trips it exactly.
    pub fn to_document(&self) -> String {
        let mut lines = Vec::new();
        let mut push = |key: &str, value: String| lines.push(format!("{key} = {value}"));
        push("kind", self.kind.token().to_string());
        push("cavity_length", fmt_float(self.cavity_length));
        push("omega_a", fmt_float(self.omega_a));
        push("omega_cut", fmt_float(self.omega_cut));
        push("g_a_sq", fmt_float(self.g_a_sq));
        push("coupling", self.coupling.token().to_string());
        push("atom_position", fmt_float(self.atom_position));
        push("t_max", fmt_float(self.t_max));
        push("n_samples", self.n_samples.to_string());
        push("backend", self.backend.token().to_string());
        push("dt", fmt_float(self.dt));
        push("seed", self.seed.to_string());
        push("offsets", fmt_list(&self.offsets));
        push("atom_count", self.atom_count.to_string());
        push("lattice_constant", fmt_float(self.lattice_constant));
        push("placement", self.placement.token().to_string());
        push("pin_emitter", self.pin_emitter.to_string());
        push("n_configs", self.n_configs.to_string());
        push("keep_members", self.keep_members.to_string());
        push("sample_times", fmt_list(&self.sample_times));
        push("grid_points", self.grid_points.to_string());
        push("analyzer_count", self.analyzer_count.to_string());
        push("gamma_ratio", fmt_float(self.gamma_ratio));
        push("analyzer_offset", fmt_float(self.analyzer_offset));
        push("span_gammas", fmt_float(self.span_gammas));
        push("read_times", fmt_list(&self.read_times));
        push("c1_threshold", fmt_float(self.c1_threshold));
        push("frame", self.frame.token().to_string());
        lines.join("\n") + "\n"
    }
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_float(v))
        .collect::<Vec<_>>()
        .join(", ")
}

struct RawEntry {
    line: usize,
    value: String,
}

/// Parse a config document. `expected_kind` is the kind implied by the CLI
/// subcommand; a `kind` key in the document must agree with it.
pub fn parse_document(
    text: &str,
    expected_kind: Option<ExperimentKind>,
) -> Result<ExperimentConfig, CliError> {
    let mut entries: Vec<(String, RawEntry)> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {line_no}: expected `key = value`, got {line:?}"
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(CliError::Config(format!(
                "line {line_no}: duplicate key `{key}`"
            )));
        }
        entries.push((
            key,
            RawEntry {
                line: line_no,
                value,
            },
        ));
    }

    let kind = match (take(&mut entries, "kind"), expected_kind) {
        (Some(raw), expected) => {
            let kind = ExperimentKind::parse(&raw.value).ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: unknown experiment kind `{}` (expected one of {})",
                    raw.line,
                    raw.value,
                    kind_tokens()
                ))
            })?;
            if let Some(expected) = expected {
                if expected != kind {
                    return Err(CliError::Config(format!(
                        "line {}: config kind `{}` does not match the `{}` subcommand",
                        raw.line,
                        kind.token(),
                        expected.token()
                    )));
                }
            }
            kind
        }
        (None, Some(expected)) => expected,
        (None, None) => {
            return Err(CliError::Config(format!(
                "missing `kind` key (expected one of {})",
                kind_tokens()
            )))
        }
    };

    let mut config = ExperimentConfig::defaults(kind);
    let mut atom_position: Option<f64> = None;
    let mut lattice_constant: Option<f64> = None;
    let mut offsets: Option<Vec<f64>> = None;

    while let Some((key, raw)) = entries.pop() {
        let line = raw.line;
        let value = raw.value;
        match key.as_str() {
            "cavity_length" => config.cavity_length = parse_float(&key, line, &value)?,
            "omega_a" => config.omega_a = parse_float(&key, line, &value)?,
            "omega_cut" => config.omega_cut = parse_float(&key, line, &value)?,
            "g_a_sq" => config.g_a_sq = parse_float(&key, line, &value)?,
            "coupling" => {
                config.coupling = CouplingChoice::parse(&value).ok_or_else(|| {
                    bad_value(&key, line, &value, "broadband | dipole_de | momentum_pa")
                })?
            }
            "atom_position" => atom_position = Some(parse_float(&key, line, &value)?),
            "t_max" => config.t_max = parse_float(&key, line, &value)?,
            "n_samples" => config.n_samples = parse_int(&key, line, &value)?,
            "backend" => {
                config.backend = BackendChoice::parse(&value)
                    .ok_or_else(|| bad_value(&key, line, &value, "eig | rk"))?
            }
            "dt" => config.dt = parse_float(&key, line, &value)?,
            "seed" => {
                config.seed = value
                    .parse()
                    .map_err(|_| bad_value(&key, line, &value, "unsigned 64-bit integer"))?
            }
            "offsets" => offsets = Some(parse_float_list(&key, line, &value)?),
            "atom_count" => config.atom_count = parse_int(&key, line, &value)?,
            "lattice_constant" => lattice_constant = Some(parse_float(&key, line, &value)?),
            "placement" => {
                config.placement = PlacementChoice::parse(&value)
                    .ok_or_else(|| bad_value(&key, line, &value, "regular | random | stacked"))?
            }
            "pin_emitter" => config.pin_emitter = parse_bool(&key, line, &value)?,
            "n_configs" => config.n_configs = parse_int(&key, line, &value)?,
            "keep_members" => config.keep_members = parse_bool(&key, line, &value)?,
            "sample_times" => config.sample_times = parse_float_list(&key, line, &value)?,
            "grid_points" => config.grid_points = parse_int(&key, line, &value)?,
            "analyzer_count" => config.analyzer_count = parse_int(&key, line, &value)?,
            "gamma_ratio" => config.gamma_ratio = parse_float(&key, line, &value)?,
            "analyzer_offset" => config.analyzer_offset = parse_float(&key, line, &value)?,
            "span_gammas" => config.span_gammas = parse_float(&key, line, &value)?,
            "read_times" => config.read_times = parse_float_list(&key, line, &value)?,
            "c1_threshold" => config.c1_threshold = parse_float(&key, line, &value)?,
            "frame" => {
                config.frame = FrameChoice::parse(&value)
                    .ok_or_else(|| bad_value(&key, line, &value, "interaction | lab"))?
            }
            _ => {
                return Err(CliError::Config(format!(
                    "line {line}: unknown key `{key}`"
                )))
            }
        }
    }

    if let Some(p) = atom_position {
        config.atom_position = p;
    } else {
        config.atom_position = config.cavity_length / 2.0;
    }
    let lambda = resonant_wavelength(config.omega_a);
    if let Some(a) = lattice_constant {
        config.lattice_constant = a;
    } else {
        config.lattice_constant = lambda / 8.0;
    }
    if let Some(list) = offsets {
        config.offsets = list;
    } else {
        config.offsets = vec![0.0, lambda / 16.0, lambda / 8.0, lambda / 4.0];
    }

    validate(&config)?;
    Ok(config)
}

fn take(entries: &mut Vec<(String, RawEntry)>, key: &str) -> Option<RawEntry> {
    let idx = entries.iter().position(|(k, _)| k == key)?;
    Some(entries.remove(idx).1)
}

fn kind_tokens() -> String {
    ExperimentKind::ALL
        .iter()
        .map(|k| k.token())
        .collect::<Vec<_>>()
        .join(" | ")
}

fn bad_value(key: &str, line: usize, value: &str, expected: &str) -> CliError {
    CliError::Config(format!(
        "line {line}: key `{key}`: invalid value {value:?} (expected {expected})"
    ))
}

fn parse_float(key: &str, line: usize, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| bad_value(key, line, value, "a number"))
}

fn parse_int(key: &str, line: usize, value: &str) -> Result<usize, CliError> {
    value
        .parse::<usize>()
        .map_err(|_| bad_value(key, line, value, "a non-negative integer"))
}

fn parse_bool(key: &str, line: usize, value: &str) -> Result<bool, CliError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_value(key, line, value, "true | false")),
    }
}

fn parse_float_list(key: &str, line: usize, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|item| parse_float(key, line, item.trim()))
        .collect()
}

/// Config-level sanity checks; physical validation happens in the core
/// crate when the system is assembled.
fn validate(config: &ExperimentConfig) -> Result<(), CliError> {
    let reject = |message: String| Err(CliError::Config(message));
    if !config.t_max.is_finite() || config.t_max <= 0.0 {
        return reject(format!("t_max must be positive, got {}", config.t_max));
    }
    if config.n_samples < 2 {
        return reject(format!("n_samples must be >= 2, got {}", config.n_samples));
    }
    if !config.dt.is_finite() || config.dt <= 0.0 {
        return reject(format!("dt must be positive, got {}", config.dt));
    }
    if config.g_a_sq.is_nan() || config.g_a_sq < 0.0 {
        return reject(format!("g_a_sq must be >= 0, got {}", config.g_a_sq));
    }
    if config.grid_points < 2 {
        return reject(format!(
            "grid_points must be >= 2, got {}",
            config.grid_points
        ));
    }
    if config.atom_count == 0 {
        return reject("atom_count must be >= 1".to_string());
    }
    if config.n_configs == 0 {
        return reject("n_configs must be >= 1".to_string());
    }
    if config.analyzer_count == 0 {
        return reject("analyzer_count must be >= 1".to_string());
    }
    if config.sample_times.is_empty() {
        return reject("sample_times must not be empty".to_string());
    }
    if config.read_times.is_empty() {
        return reject("read_times must not be empty".to_string());
    }
    if config.c1_threshold.is_nan() || config.c1_threshold <= 0.0 {
        return reject(format!(
            "c1_threshold must be positive, got {}",
            config.c1_threshold
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_decay_config_is_the_reference_setup() {
        let config = parse_document("kind = decay\n", None).unwrap();
        assert_eq!(config.kind, ExperimentKind::Decay);
        assert_eq!(config.cavity_length, TAU);
        assert_eq!(config.omega_a, 100.0);
        assert_eq!(config.omega_cut, 200.0);
        assert_eq!(config.g_a_sq, 0.5);
        assert_eq!(config.atom_position, PI);
        assert_eq!(config.backend, BackendChoice::Eig);
    }

    #[test]
    fn subcommand_kind_is_enough() {
        let config = parse_document("", Some(ExperimentKind::Sweep)).unwrap();
        assert_eq!(config.kind, ExperimentKind::Sweep);
        assert_eq!(config.offsets.len(), 4);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let err = parse_document("kind = decay\n", Some(ExperimentKind::Sweep)).unwrap_err();
        assert!(err.to_string().contains("does not match"));
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = parse_document("kind = decay\nomega_b = 3\n", None).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("omega_b"), "{message}");
        assert!(message.contains("line 2"), "{message}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duplicate_and_malformed_lines_are_rejected() {
        let err = parse_document("kind = decay\nseed = 1\nseed = 2\n", None).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse_document("kind decay\n", None).unwrap_err();
        assert!(err.to_string().contains("key = value"));
    }

    #[test]
    fn values_and_lists_parse() {
        let text = "kind = sweep\noffsets = 0, 1e-2, -1e-2\nseed = 7\nbackend = rk\ndt = 2e-4\npin_emitter = false\n";
        let config = parse_document(text, None).unwrap();
        assert_eq!(config.offsets, vec![0.0, 1e-2, -1e-2]);
        assert_eq!(config.seed, 7);
        assert_eq!(config.backend, BackendChoice::Rk);
        assert_eq!(config.dt, 2e-4);
        assert!(!config.pin_emitter);
    }

    #[test]
    fn document_round_trip_is_lossless() {
        for kind in ExperimentKind::ALL {
            let mut config = ExperimentConfig::defaults(kind);
            config.seed = 123456789;
            config.t_max = 1.0 / 3.0;
            config.offsets = vec![0.1 / 3.0, -2.0 / 7.0];
            config.sample_times = vec![0.3, 0.7];
            let text = config.to_document();
            let parsed = parse_document(&text, None).unwrap();
            assert_eq!(parsed, config);
        }
    }

    #[test]
    fn validation_rejects_nonsense() {
        assert!(parse_document("kind = decay\nn_samples = 1\n", None).is_err());
        assert!(parse_document("kind = decay\nt_max = -1\n", None).is_err());
        assert!(parse_document("kind = decay\ndt = 0\n", None).is_err());
        assert!(parse_document("kind = ensemble\nn_configs = 0\n", None).is_err());
    }
}
