//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! # lossy Bragg scattering
//! model = bs
//! bs.gamma = 1.0
//! bs.pump_power = 1.0
//! bs.alpha = 0.01        # both modes
//! bs.rr = 1
//! bs.ri = 0.1
//! bs.length_km = 5
//! initial_state = fock(1, 0)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lindblad::IntegratorConfig;
use crate::models::{
    BsParams, MultimodeParams, PumpSubstitution, RamanTable, SpfwmParams, DEFAULT_HBAR,
    DEFAULT_MAX_DIM, DEFAULT_OMEGA0,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bs,
    Spfwm,
    Multimode,
    Semiclassical,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Bs, Self::Spfwm, Self::Multimode, Self::Semiclassical];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bs => "bs",
            Self::Spfwm => "spfwm",
            Self::Multimode => "multimode",
            Self::Semiclassical => "semiclassical",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                format!("expected one of bs, spfwm, multimode, semiclassical; got `{s}`")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    Bs(BsParams),
    Spfwm(SpfwmParams),
    Multimode {
        params: MultimodeParams,
        length_km: f64,
    },
    /// Classical mean field on the multimode grid.
    Semiclassical {
        params: MultimodeParams,
        length_km: f64,
        initial_powers: Vec<f64>,
        self_steepening: bool,
        sprs_loss: bool,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Bs(_) => ModelKind::Bs,
            Self::Spfwm(_) => ModelKind::Spfwm,
            Self::Multimode { .. } => ModelKind::Multimode,
            Self::Semiclassical { .. } => ModelKind::Semiclassical,
        }
    }

    pub fn length_km(&self) -> f64 {
        match self {
            Self::Bs(p) => p.length_km,
            Self::Spfwm(p) => p.length_km,
            Self::Multimode { length_km, .. } | Self::Semiclassical { length_km, .. } => *length_km,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Vacuum,
    /// Photon number per quantum mode.
    Fock(Vec<usize>),
    /// Real coherent amplitude per quantum mode.
    Coherent(Vec<f64>),
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vacuum => f.write_str("vacuum"),
            Self::Fock(n) => write!(f, "fock({})", join(n)),
            Self::Coherent(a) => write!(f, "coherent({})", join(a)),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "vacuum" {
            return Ok(Self::Vacuum);
        }
        let call = |name: &str| {
            s.strip_prefix(name)
                .and_then(|r| r.trim_start().strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
        };
        if let Some(args) = call("fock") {
            return parse_list(args, |v| v.parse::<usize>().map_err(|e| e.to_string()))
                .map(Self::Fock);
        }
        if let Some(args) = call("coherent") {
            return parse_list(args, parse_finite).map(Self::Coherent);
        }
        Err(format!(
            "expected vacuum, fock(n, ...) or coherent(a, ...); got `{s}`"
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub dir: String,
    pub csv: String,
    pub summary: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            csv: "trajectory.csv".into(),
            summary: "summary.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    /// Ignored by the semiclassical model, which starts from `initial_powers`.
    pub initial_state: InitialState,
    pub integrator: IntegratorConfig,
    /// Number of sample rows, including `z = 0` and the fiber end.
    pub sample_count: usize,
    pub output: OutputPaths,
}

pub const DEFAULT_SAMPLE_COUNT: usize = 101;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IssueKind {
    #[error("unknown key")]
    UnknownKey,
    #[error("missing required key")]
    MissingKey,
    #[error("duplicate key (first set on line {0})")]
    Duplicate(usize),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based line in the file; `None` for command-line overrides and file-level issues.
    pub line: Option<usize>,
    pub key: String,
    pub kind: IssueKind,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.kind),
            None => write!(f, "`{}`: {}", self.key, self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration error(s)", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses `text`, then applies `overrides` (key, value) on top of it, as given
/// on the command line.
pub fn parse_config_with(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let mut reader = Reader::from_text(text);
    for (key, value) in overrides {
        reader.set_override(key, value);
    }
    let config = reader.build();
    if reader.issues.is_empty() {
        Ok(config.expect("no issues implies a complete config"))
    } else {
        Err(ConfigError {
            issues: reader.issues,
        })
    }
}

struct Entry {
    line: Option<usize>,
    value: String,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    used: BTreeSet<String>,
    issues: Vec<ConfigIssue>,
}

type Parse<T> = fn(&str) -> Result<T, String>;

impl Reader {
    fn from_text(text: &str) -> Self {
        let mut reader = Self {
            entries: BTreeMap::new(),
            used: BTreeSet::new(),
            issues: Vec::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                reader.issue(
                    Some(line),
                    content,
                    IssueKind::Malformed("expected `key = value`".into()),
                );
                continue;
            };
            let key = key.trim();
            let valid_key = !key.is_empty()
                && key.split('.').all(|part| {
                    !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                });
            if !valid_key {
                reader.issue(
                    Some(line),
                    key,
                    IssueKind::Malformed("invalid key name".into()),
                );
                continue;
            }
            if let Some(prev) = reader.entries.get(key) {
                let first = prev.line.unwrap_or(0);
                reader.issue(Some(line), key, IssueKind::Duplicate(first));
                continue;
            }
            reader.entries.insert(
                key.to_string(),
                Entry {
                    line: Some(line),
                    value: value.trim().to_string(),
                },
            );
        }
        reader
    }

    fn set_override(&mut self, key: &str, value: &str) {
        if key == "model" {
            if let Some(existing) = self.entries.get("model") {
                if existing.value != value {
                    let line = existing.line;
                    let msg = format!(
                        "file declares `{}` but `{value}` was requested",
                        existing.value
                    );
                    self.issue(line, "model", IssueKind::OutOfRange(msg));
                }
            }
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                line: None,
                value: value.to_string(),
            },
        );
    }

    fn issue(&mut self, line: Option<usize>, key: &str, kind: IssueKind) {
        self.issues.push(ConfigIssue {
            line,
            key: key.to_string(),
            kind,
        });
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line)
    }

    /// Parsed value of `key`, or `None` when absent or malformed (the latter recorded).
    fn optional<T>(&mut self, key: &str, parse: Parse<T>) -> Option<T> {
        self.used.insert(key.to_string());
        let entry = self.entries.get(key)?;
        match parse(&entry.value) {
            Ok(v) => Some(v),
            Err(msg) => {
                let line = entry.line;
                let kind = if msg.starts_with("must") {
                    IssueKind::OutOfRange(msg)
                } else {
                    IssueKind::Malformed(msg)
                };
                self.issue(line, key, kind);
                None
            }
        }
    }

    fn or<T>(&mut self, key: &str, parse: Parse<T>, default: T) -> T {
        self.optional(key, parse).unwrap_or(default)
    }

    fn required<T>(&mut self, key: &str, parse: Parse<T>) -> Option<T> {
        if !self.entries.contains_key(key) {
            self.used.insert(key.to_string());
            self.issue(None, key, IssueKind::MissingKey);
            return None;
        }
        self.optional(key, parse)
    }

    /// Maps a parameter-validation failure back onto the offending key.
    fn library_error(&mut self, section: &str, err: Error) {
        let (key, kind) = match &err {
            Error::InvalidParameter { name, reason, .. } => {
                let field = name.split(['[', ' ']).next().unwrap_or(name);
                (
                    format!("{section}.{field}"),
                    IssueKind::OutOfRange(format!("{name}: {reason}")),
                )
            }
            Error::DimensionMismatch { context, .. } => {
                let field = context.split(' ').next().unwrap_or(context);
                (
                    format!("{section}.{field}"),
                    IssueKind::OutOfRange(err.to_string()),
                )
            }
            _ => (section.to_string(), IssueKind::OutOfRange(err.to_string())),
        };
        let line = self.line_of(&key);
        self.issue(line, &key, kind);
    }

    fn build(&mut self) -> Option<ScenarioConfig> {
        let kind = self.required("model", |s| s.parse::<ModelKind>());
        let model = match kind {
            Some(ModelKind::Bs) => self.bs().map(ModelConfig::Bs),
            Some(ModelKind::Spfwm) => self.spfwm().map(ModelConfig::Spfwm),
            Some(ModelKind::Multimode) => self
                .multimode(true)
                .map(|(params, length_km)| ModelConfig::Multimode { params, length_km }),
            Some(ModelKind::Semiclassical) => self.semiclassical(),
            None => None,
        };

        let initial_state = if kind == Some(ModelKind::Semiclassical) {
            InitialState::Vacuum
        } else {
            self.or("initial_state", |s| s.parse(), InitialState::Vacuum)
        };
        let defaults = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            step_km: self.or("integrator.step_km", positive, defaults.step_km),
            rehermitize: self.or("integrator.rehermitize", boolean, defaults.rehermitize),
            monitor_every: self.or("integrator.monitor_every", count, defaults.monitor_every),
        };
        let sample_count = self.or("sample_count", count, DEFAULT_SAMPLE_COUNT);
        let d = OutputPaths::default();
        let output = OutputPaths {
            dir: self.or("output.dir", text, d.dir),
            csv: self.or("output.csv", text, d.csv),
            summary: self.or("output.summary", text, d.summary),
        };

        let unknown: Vec<(String, Option<usize>)> = self
            .entries
            .iter()
            .filter(|(k, _)| !self.used.contains(*k))
            .map(|(k, e)| (k.clone(), e.line))
            .collect();
        for (key, line) in unknown {
            self.issue(line, &key, IssueKind::UnknownKey);
        }

        let model = model?;
        if let Some(quantum) = quantum_mode_count(&model) {
            self.check_initial_state(&model, quantum, &initial_state);
        }
        if !self.issues.is_empty() {
            return None;
        }
        Some(ScenarioConfig {
            model,
            initial_state,
            integrator,
            sample_count,
            output,
        })
    }

    fn check_initial_state(&mut self, model: &ModelConfig, modes: usize, state: &InitialState) {
        let n_max = match model {
            ModelConfig::Bs(p) => p.n_max,
            ModelConfig::Spfwm(p) => p.n_max,
            ModelConfig::Multimode { params, .. } => params.n_max,
            ModelConfig::Semiclassical { .. } => return,
        };
        let problem = match state {
            InitialState::Vacuum => None,
            InitialState::Fock(n) if n.len() != modes => {
                Some(format!("expected {modes} photon numbers, got {}", n.len()))
            }
            InitialState::Fock(n) if n.iter().any(|&k| k > n_max) => {
                Some(format!("photon number exceeds n_max = {n_max}"))
            }
            InitialState::Coherent(a) if a.len() != modes => {
                Some(format!("expected {modes} amplitudes, got {}", a.len()))
            }
            _ => None,
        };
        if let Some(msg) = problem {
            let line = self.line_of("initial_state");
            self.issue(line, "initial_state", IssueKind::OutOfRange(msg));
        }
    }

    fn bs(&mut self) -> Option<BsParams> {
        let d = BsParams::ideal();
        let gamma = self.required("bs.gamma", non_negative);
        let pump_power = self.required("bs.pump_power", non_negative);
        let length_km = self.required("bs.length_km", non_negative);
        let alpha = self.or("bs.alpha", non_negative, d.alpha_s);
        let rr = self.or("bs.rr", finite, d.rr_pump_spacing);
        let ri = self.or("bs.ri", non_negative, d.ri_pair_offset);
        let p = BsParams {
            gamma: gamma?,
            pump_power: pump_power?,
            alpha_s: self.or("bs.alpha_s", non_negative, alpha),
            alpha_i: self.or("bs.alpha_i", non_negative, alpha),
            rr_pump_spacing: self.or("bs.rr_pump_spacing", finite, rr),
            rr_pair_offset: self.or("bs.rr_pair_offset", finite, rr),
            rr_offset_minus_spacing: self.or("bs.rr_offset_minus_spacing", finite, rr),
            rr_offset_plus_spacing: self.or("bs.rr_offset_plus_spacing", finite, rr),
            ri_pair_offset: self.or("bs.ri_pair_offset", non_negative, ri),
            ri_offset_minus_spacing: self.or("bs.ri_offset_minus_spacing", non_negative, ri),
            ri_offset_plus_spacing: self.or("bs.ri_offset_plus_spacing", non_negative, ri),
            beta_s: self.or("bs.beta_s", finite, d.beta_s),
            beta_i: self.or("bs.beta_i", finite, d.beta_i),
            beta_p1: self.or("bs.beta_p1", finite, d.beta_p1),
            beta_p2: self.or("bs.beta_p2", finite, d.beta_p2),
            length_km: length_km?,
            n_max: self.or("bs.n_max", count, d.n_max),
        };
        match p.validate() {
            Ok(()) => Some(p),
            Err(e) => {
                self.library_error("bs", e);
                None
            }
        }
    }

    fn spfwm(&mut self) -> Option<SpfwmParams> {
        let d = SpfwmParams::ideal();
        let gamma = self.required("spfwm.gamma", non_negative);
        let pump_power = self.required("spfwm.pump_power", non_negative);
        let length_km = self.required("spfwm.length_km", non_negative);
        let alpha = self.or("spfwm.alpha", non_negative, d.alpha_s);
        let p = SpfwmParams {
            gamma: gamma?,
            pump_power: pump_power?,
            alpha_s: self.or("spfwm.alpha_s", non_negative, alpha),
            alpha_i: self.or("spfwm.alpha_i", non_negative, alpha),
            rr_detuning: self.or("spfwm.rr_detuning", finite, d.rr_detuning),
            ri_detuning: self.or("spfwm.ri_detuning", non_negative, d.ri_detuning),
            beta_p: self.or("spfwm.beta_p", finite, d.beta_p),
            beta_s: self.or("spfwm.beta_s", finite, d.beta_s),
            beta_i: self.or("spfwm.beta_i", finite, d.beta_i),
            length_km: length_km?,
            n_max: self.or("spfwm.n_max", count, d.n_max),
        };
        match p.validate() {
            Ok(()) => Some(p),
            Err(e) => {
                self.library_error("spfwm", e);
                None
            }
        }
    }

    /// Grid parameters under `multimode.*`; quantum-only keys when `quantum` is set.
    fn multimode(&mut self, quantum: bool) -> Option<(MultimodeParams, f64)> {
        let grid = self.required("multimode.grid", int_list);
        let delta_w = self.required("multimode.delta_w", positive);
        let length_km = self.required("multimode.length_km", non_negative);
        let modes = grid.as_ref().map_or(0, Vec::len);
        let beta = self.optional("multimode.beta", float_list);
        let alpha = self.optional("multimode.alpha", float_list);
        let raman = self.optional("multimode.raman", raman_table);
        let mut p = MultimodeParams {
            grid: grid?,
            delta_w: delta_w?,
            omega0: self.or("multimode.omega0", positive, DEFAULT_OMEGA0),
            hbar: self.or("multimode.hbar", positive, DEFAULT_HBAR),
            beta: beta.unwrap_or_else(|| vec![0.0; modes]),
            alpha: alpha.unwrap_or_else(|| vec![0.0; modes]),
            raman: raman.unwrap_or_else(RamanTable::kerr_only),
            gamma: self.or("multimode.gamma", non_negative, 1.0),
            pumps: Vec::new(),
            n_max: 1,
            narrowband: true,
            max_dim: DEFAULT_MAX_DIM,
        };
        if quantum {
            p.pumps = self.or("multimode.pumps", pump_list, Vec::new());
            p.n_max = self.or("multimode.n_max", count, 1);
            p.narrowband = self.or("multimode.narrowband", boolean, true);
            p.max_dim = self.or("multimode.max_dim", count, DEFAULT_MAX_DIM);
        }
        let length_km = length_km?;
        match p.validate() {
            Ok(()) => Some((p, length_km)),
            Err(e) => {
                self.library_error("multimode", e);
                None
            }
        }
    }

    fn semiclassical(&mut self) -> Option<ModelConfig> {
        let grid = self.multimode(false);
        let powers = self.required("semiclassical.initial_powers", float_list);
        let self_steepening = self.or("semiclassical.self_steepening", boolean, true);
        let sprs_loss = self.or("semiclassical.sprs_loss", boolean, true);
        let (params, length_km) = grid?;
        let initial_powers = powers?;
        if initial_powers.len() != params.grid.len() || initial_powers.iter().any(|&p| p < 0.0) {
            let line = self.line_of("semiclassical.initial_powers");
            let msg = format!(
                "must list {} non-negative powers, one per grid mode",
                params.grid.len()
            );
            self.issue(
                line,
                "semiclassical.initial_powers",
                IssueKind::OutOfRange(msg),
            );
            return None;
        }
        Some(ModelConfig::Semiclassical {
            params,
            length_km,
            initial_powers,
            self_steepening,
            sprs_loss,
        })
    }
}

fn quantum_mode_count(model: &ModelConfig) -> Option<usize> {
    match model {
        ModelConfig::Bs(_) | ModelConfig::Spfwm(_) => Some(2),
        ModelConfig::Multimode { params, .. } => Some(params.quantum_modes().len()),
        ModelConfig::Semiclassical { .. } => None,
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected a number, got `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn finite(s: &str) -> Result<f64, String> {
    parse_finite(s)
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be > 0, got {v}"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("expected a positive integer, got `{s}`"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn boolean(s: &str) -> Result<bool, String> {
    s.parse()
        .map_err(|_| format!("expected true or false, got `{s}`"))
}

fn text(s: &str) -> Result<String, String> {
    if s.is_empty() {
        Err("expected a non-empty value".into())
    } else {
        Ok(s.to_string())
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|part| item(part.trim())).collect()
}

fn int_list(s: &str) -> Result<Vec<i64>, String> {
    parse_list(s, |v| {
        v.parse()
            .map_err(|_| format!("expected an integer, got `{v}`"))
    })
}

fn float_list(s: &str) -> Result<Vec<f64>, String> {
    parse_list(s, parse_finite)
}

fn triple(s: &str) -> Result<(i64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected `index:value:value`, got `{s}`"));
    };
    let index = a
        .parse()
        .map_err(|_| format!("expected an integer index, got `{a}`"))?;
    Ok((index, parse_finite(b)?, parse_finite(c)?))
}

/// `index:rr:ri` entries at non-negative detuning indices; the negative side
/// follows from the response symmetries.
fn raman_table(s: &str) -> Result<RamanTable, String> {
    let entries = parse_list(s, triple)?;
    let mut rr_zero = 0.0;
    let mut positive = Vec::new();
    for (index, rr, ri) in entries {
        match index {
            0 if ri != 0.0 => return Err("must have zero imaginary response at index 0".into()),
            0 => rr_zero = rr,
            i if i > 0 => positive.push((i, rr, ri)),
            _ => return Err("must list non-negative detuning indices only".into()),
        }
    }
    RamanTable::from_positive(rr_zero, &positive).map_err(|e| format!("must be a valid table: {e}"))
}

fn pump_list(s: &str) -> Result<Vec<PumpSubstitution>, String> {
    parse_list(s, |part| {
        let (grid_index, power, k_pump) = triple(part)?;
        Ok(PumpSubstitution {
            grid_index,
            power,
            k_pump,
        })
    })
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Canonical text form: every key explicit, no shorthands.
pub fn render_config(config: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    kv("model", config.model.kind().to_string());
    match &config.model {
        ModelConfig::Bs(p) => {
            for (k, v) in [
                ("gamma", p.gamma),
                ("pump_power", p.pump_power),
                ("alpha_s", p.alpha_s),
                ("alpha_i", p.alpha_i),
                ("rr_pump_spacing", p.rr_pump_spacing),
                ("rr_pair_offset", p.rr_pair_offset),
                ("rr_offset_minus_spacing", p.rr_offset_minus_spacing),
                ("rr_offset_plus_spacing", p.rr_offset_plus_spacing),
                ("ri_pair_offset", p.ri_pair_offset),
                ("ri_offset_minus_spacing", p.ri_offset_minus_spacing),
                ("ri_offset_plus_spacing", p.ri_offset_plus_spacing),
                ("beta_s", p.beta_s),
                ("beta_i", p.beta_i),
                ("beta_p1", p.beta_p1),
                ("beta_p2", p.beta_p2),
                ("length_km", p.length_km),
            ] {
                kv(&format!("bs.{k}"), v.to_string());
            }
            kv("bs.n_max", p.n_max.to_string());
        }
        ModelConfig::Spfwm(p) => {
            for (k, v) in [
                ("gamma", p.gamma),
                ("pump_power", p.pump_power),
                ("alpha_s", p.alpha_s),
                ("alpha_i", p.alpha_i),
                ("rr_detuning", p.rr_detuning),
                ("ri_detuning", p.ri_detuning),
                ("beta_p", p.beta_p),
                ("beta_s", p.beta_s),
                ("beta_i", p.beta_i),
                ("length_km", p.length_km),
            ] {
                kv(&format!("spfwm.{k}"), v.to_string());
            }
            kv("spfwm.n_max", p.n_max.to_string());
        }
        ModelConfig::Multimode { params, length_km } => {
            render_grid(&mut kv, params, *length_km);
            let pumps: Vec<String> = params
                .pumps
                .iter()
                .map(|p| format!("{}:{}:{}", p.grid_index, p.power, p.k_pump))
                .collect();
            kv("multimode.pumps", pumps.join(", "));
            kv("multimode.n_max", params.n_max.to_string());
            kv("multimode.narrowband", params.narrowband.to_string());
            kv("multimode.max_dim", params.max_dim.to_string());
        }
        ModelConfig::Semiclassical {
            params,
            length_km,
            initial_powers,
            self_steepening,
            sprs_loss,
        } => {
            render_grid(&mut kv, params, *length_km);
            kv("semiclassical.initial_powers", join(initial_powers));
            kv("semiclassical.self_steepening", self_steepening.to_string());
            kv("semiclassical.sprs_loss", sprs_loss.to_string());
        }
    }
    if config.model.kind() != ModelKind::Semiclassical {
        kv("initial_state", config.initial_state.to_string());
    }
    kv("integrator.step_km", config.integrator.step_km.to_string());
    kv(
        "integrator.rehermitize",
        config.integrator.rehermitize.to_string(),
    );
    kv(
        "integrator.monitor_every",
        config.integrator.monitor_every.to_string(),
    );
    kv("sample_count", config.sample_count.to_string());
    kv("output.dir", config.output.dir.clone());
    kv("output.csv", config.output.csv.clone());
    kv("output.summary", config.output.summary.clone());
    out
}

fn render_grid(kv: &mut impl FnMut(&str, String), p: &MultimodeParams, length_km: f64) {
    kv("multimode.grid", join(&p.grid));
    kv("multimode.delta_w", p.delta_w.to_string());
    kv("multimode.omega0", p.omega0.to_string());
    kv("multimode.hbar", p.hbar.to_string());
    kv("multimode.beta", join(&p.beta));
    kv("multimode.alpha", join(&p.alpha));
    let mut raman = vec![format!("0:{}:0", p.raman.rr(0))];
    raman.extend(
        p.raman
            .samples()
            .into_iter()
            .filter(|s| s.index > 0)
            .map(|s| format!("{}:{}:{}", s.index, s.rr, s.ri)),
    );
    kv("multimode.raman", raman.join(", "));
    kv("multimode.gamma", p.gamma.to_string());
    kv("multimode.length_km", length_km.to_string());
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOSSY_BS: &str = "\
# Bragg scattering, lossy
model = bs
bs.gamma = 1        # W^-1 km^-1
bs.pump_power = 1
bs.alpha = 0.01
bs.rr = 1
bs.ri = 0.1
bs.length_km = 5
initial_state = fock(1, 0)
";

    #[test]
    fn lossy_block_parses_to_lossy_bragg() {
        let cfg = parse_config(LOSSY_BS).unwrap();
        assert_eq!(cfg.model, ModelConfig::Bs(BsParams::lossy()));
        assert_eq!(cfg.initial_state, InitialState::Fock(vec![1, 0]));
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.sample_count, DEFAULT_SAMPLE_COUNT);
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let err = parse_config("").unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].key, "model");
        assert_eq!(err.issues[0].kind, IssueKind::MissingKey);

        let err = parse_config("model = spfwm\n").unwrap_err();
        let missing: Vec<&str> = err
            .issues
            .iter()
            .filter(|i| i.kind == IssueKind::MissingKey)
            .map(|i| i.key.as_str())
            .collect();
        assert_eq!(
            missing,
            ["spfwm.gamma", "spfwm.pump_power", "spfwm.length_km"]
        );
    }

    #[test]
    fn negative_gamma_names_the_key_and_line() {
        let text = LOSSY_BS.replace("bs.gamma = 1 ", "bs.gamma = -1 ");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        let issue = &err.issues[0];
        assert_eq!((issue.line, issue.key.as_str()), (Some(3), "bs.gamma"));
        assert!(matches!(issue.kind, IssueKind::OutOfRange(_)));
        assert!(err.to_string().contains("bs.gamma"));
    }

    #[test]
    fn each_problem_is_reported_individually() {
        let text = "model = bs\nbs.gamma = 1\nbs.gamma = 2\nbs.pump_power = x\nbs.colour = red\nnonsense\n";
        let err = parse_config(text).unwrap_err();
        let kinds: Vec<(&str, &IssueKind)> = err
            .issues
            .iter()
            .map(|i| (i.key.as_str(), &i.kind))
            .collect();
        assert!(kinds.contains(&("bs.gamma", &IssueKind::Duplicate(2))));
        assert!(kinds
            .iter()
            .any(|(k, v)| *k == "bs.pump_power" && matches!(v, IssueKind::Malformed(_))));
        assert!(kinds.contains(&("bs.length_km", &IssueKind::MissingKey)));
        assert!(kinds.contains(&("bs.colour", &IssueKind::UnknownKey)));
        assert!(kinds
            .iter()
            .any(|(k, v)| *k == "nonsense" && matches!(v, IssueKind::Malformed(_))));
    }

    #[test]
    fn keys_of_another_model_are_unknown() {
        let text = format!("{LOSSY_BS}spfwm.gamma = 1\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues[0].key, "spfwm.gamma");
        assert_eq!(err.issues[0].kind, IssueKind::UnknownKey);
    }

    #[test]
    fn initial_state_is_checked_against_the_model() {
        let text = LOSSY_BS.replace("fock(1, 0)", "fock(2, 0)");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues[0].key, "initial_state");
        let text = LOSSY_BS.replace("fock(1, 0)", "coherent(0.1)");
        assert!(parse_config(&text).is_err());
        let text = LOSSY_BS.replace("fock(1, 0)", "squeezed(1)");
        assert!(matches!(
            parse_config(&text).unwrap_err().issues[0].kind,
            IssueKind::Malformed(_)
        ));
    }

    #[test]
    fn overrides_replace_file_values() {
        let overrides = [
            ("integrator.step_km".to_string(), "0.01".to_string()),
            ("bs.n_max".to_string(), "3".to_string()),
        ];
        let cfg = parse_config_with(LOSSY_BS, &overrides).unwrap();
        assert_eq!(cfg.integrator.step_km, 0.01);
        let ModelConfig::Bs(p) = cfg.model else {
            panic!()
        };
        assert_eq!(p.n_max, 3);

        let clash = [("model".to_string(), "spfwm".to_string())];
        let err = parse_config_with(LOSSY_BS, &clash).unwrap_err();
        assert!(err.issues.iter().any(|i| i.key == "model"));
    }

    #[test]
    fn multimode_and_semiclassical_sections() {
        let text = "\
model = multimode
multimode.grid = -1, 0, 1
multimode.delta_w = 1e12
multimode.raman = 0:1:0, 1:0.5:0.02
multimode.pumps = 0:1:0.5
multimode.n_max = 2
multimode.length_km = 1
initial_state = coherent(0.1, 0)
";
        let cfg = parse_config(text).unwrap();
        let ModelConfig::Multimode { params, length_km } = &cfg.model else {
            panic!()
        };
        assert_eq!(*length_km, 1.0);
        assert_eq!(params.quantum_modes(), vec![-1, 1]);
        assert_eq!(params.raman.ri(-1), -0.02);
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);

        let semi = "\
model = semiclassical
multimode.grid = -1, 1
multimode.delta_w = 1e12
multimode.length_km = 1
semiclassical.initial_powers = 1, 0.5
semiclassical.sprs_loss = false
";
        let cfg = parse_config(semi).unwrap();
        assert!(matches!(
            cfg.model,
            ModelConfig::Semiclassical {
                sprs_loss: false,
                ..
            }
        ));
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
        let bad = semi.replace("1, 0.5", "1");
        assert_eq!(
            parse_config(&bad).unwrap_err().issues[0].key,
            "semiclassical.initial_powers"
        );
        let bad = format!("{semi}multimode.n_max = 2\n");
        assert_eq!(
            parse_config(&bad).unwrap_err().issues[0].kind,
            IssueKind::UnknownKey
        );
    }

    #[test]
    fn raman_support_is_rejected_with_the_key() {
        let text = "\
model = multimode
multimode.grid = 0, 1
multimode.delta_w = 1e14
multimode.raman = 0:1:0, 10:0:0.1
multimode.length_km = 1
";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues[0].key, "multimode.raman");
        assert_eq!(err.issues[0].line, Some(4));
    }

    fn value() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(0.0),
            0.0..10.0f64,
            (1u32..1000).prop_map(|k| k as f64 * 0.01)
        ]
    }

    fn signed() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    fn bs_params() -> impl Strategy<Value = BsParams> {
        (
            (value(), value(), value(), value()),
            (signed(), signed(), signed(), signed()),
            (value(), value(), value()),
            (signed(), signed(), signed(), signed()),
            (value(), 1usize..5),
        )
            .prop_map(
                |((g, p, a_s, a_i), (r1, r2, r3, r4), (i1, i2, i3), (bs, bi, b1, b2), (l, n))| {
                    BsParams {
                        gamma: g,
                        pump_power: p,
                        alpha_s: a_s,
                        alpha_i: a_i,
                        rr_pump_spacing: r1,
                        rr_pair_offset: r2,
                        rr_offset_minus_spacing: r3,
                        rr_offset_plus_spacing: r4,
                        ri_pair_offset: i1,
                        ri_offset_minus_spacing: i2,
                        ri_offset_plus_spacing: i3,
                        beta_s: bs,
                        beta_i: bi,
                        beta_p1: b1,
                        beta_p2: b2,
                        length_km: l,
                        n_max: n,
                    }
                },
            )
    }

    fn spfwm_params() -> impl Strategy<Value = SpfwmParams> {
        (
            (value(), value(), value(), value()),
            (signed(), value()),
            (signed(), signed(), signed()),
            (value(), 1usize..8),
        )
            .prop_map(
                |((g, p, a_s, a_i), (rr, ri), (bp, bs, bi), (l, n))| SpfwmParams {
                    gamma: g,
                    pump_power: p,
                    alpha_s: a_s,
                    alpha_i: a_i,
                    rr_detuning: rr,
                    ri_detuning: ri,
                    beta_p: bp,
                    beta_s: bs,
                    beta_i: bi,
                    length_km: l,
                    n_max: n,
                },
            )
    }

    fn multimode_params() -> impl Strategy<Value = MultimodeParams> {
        (
            proptest::sample::subsequence((-4i64..=4).collect::<Vec<_>>(), 2..4),
            1e11..1e13f64,
            1usize..3,
            proptest::collection::vec((1i64..5, signed(), value()), 0..3),
            (any::<bool>(), value()),
        )
            .prop_map(|(grid, dw, n_max, raman, (narrowband, gamma))| {
                let mut p = MultimodeParams::on_grid(grid.clone(), dw, n_max);
                let mut seen = BTreeSet::new();
                let raman: Vec<_> = raman.into_iter().filter(|r| seen.insert(r.0)).collect();
                p.raman = RamanTable::from_positive(1.0, &raman).unwrap();
                p.beta = grid.iter().map(|&g| g as f64 * 0.25).collect();
                p.alpha = grid.iter().map(|&g| (g * g) as f64 * 0.01).collect();
                p.narrowband = narrowband;
                p.gamma = gamma;
                p.pumps = vec![PumpSubstitution {
                    grid_index: grid[0],
                    power: 0.5,
                    k_pump: 1.5,
                }];
                p
            })
    }

    fn scenario() -> impl Strategy<Value = ScenarioConfig> {
        let model = prop_oneof![
            bs_params().prop_map(ModelConfig::Bs),
            spfwm_params().prop_map(ModelConfig::Spfwm),
            (multimode_params(), value())
                .prop_map(|(params, length_km)| ModelConfig::Multimode { params, length_km }),
            (multimode_params(), value(), any::<(bool, bool)>()).prop_map(
                |(mut params, length_km, (ss, sp))| {
                    params.pumps.clear();
                    params.n_max = 1;
                    params.narrowband = true;
                    ModelConfig::Semiclassical {
                        initial_powers: vec![0.25; params.grid.len()],
                        params,
                        length_km,
                        self_steepening: ss,
                        sprs_loss: sp,
                    }
                }
            ),
        ];
        (
            model,
            1e-4..0.1f64,
            any::<bool>(),
            1usize..500,
            1usize..300,
            0usize..3,
        )
            .prop_map(|(model, step, reh, monitor, samples, state)| {
                let modes = match &model {
                    ModelConfig::Multimode { params, .. } => params.quantum_modes().len(),
                    _ => 2,
                };
                let initial_state = match (&model, state) {
                    (ModelConfig::Semiclassical { .. }, _) | (_, 0) => InitialState::Vacuum,
                    (_, 1) => InitialState::Fock(vec![1; modes]),
                    _ => InitialState::Coherent(vec![0.1; modes]),
                };
                ScenarioConfig {
                    model,
                    initial_state,
                    integrator: IntegratorConfig {
                        step_km: step,
                        rehermitize: reh,
                        monitor_every: monitor,
                    },
                    sample_count: samples,
                    output: OutputPaths {
                        dir: "runs/a b".into(),
                        ..OutputPaths::default()
                    },
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn render_then_parse_round_trips(cfg in scenario()) {
            let text = render_config(&cfg);
            prop_assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }
}
