//! Experiment configuration: sections of `key = value` lines in TOML syntax.
//!
//! Every problem found is collected (with its line number) before anything is
//! allocated, so a bad file is reported in one go.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use toml_edit::{Document, Item, Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Propagate,
    Decay,
    Project,
    QgRun,
    NsRun,
    LimitStudy,
}

impl StudyKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "propagate" => StudyKind::Propagate,
            "decay" | "decay-study" => StudyKind::Decay,
            "project" => StudyKind::Project,
            "qg-run" => StudyKind::QgRun,
            "ns-run" => StudyKind::NsRun,
            "limit-study" => StudyKind::LimitStudy,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Propagate => "propagate",
            StudyKind::Decay => "decay",
            StudyKind::Project => "project",
            StudyKind::QgRun => "qg-run",
            StudyKind::NsRun => "ns-run",
            StudyKind::LimitStudy => "limit-study",
        }
    }

    fn presets(self) -> &'static [&'static str] {
        match self {
            StudyKind::Propagate => &["random", "acoustic-pulse"],
            StudyKind::Decay => &["acoustic-pulse"],
            StudyKind::Project => &["acoustic-pulse", "reference", "random", "dumps"],
            StudyKind::QgRun => LIMIT_PRESETS,
            StudyKind::NsRun => &["reference", "rest", "monopole", "dipole", "vortex-pair", "random"],
            StudyKind::LimitStudy => &["reference", "monopole", "dipole", "vortex-pair", "random"],
        }
    }

    fn default_preset(self) -> &'static str {
        match self {
            StudyKind::Propagate => "random",
            StudyKind::Decay | StudyKind::Project => "acoustic-pulse",
            StudyKind::QgRun | StudyKind::LimitStudy => "vortex-pair",
            StudyKind::NsRun => "reference",
        }
    }
}

pub const LIMIT_PRESETS: &[&str] = &["monopole", "dipole", "vortex-pair", "random"];

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Half width `L` of the horizontal torus `[-L, L)^2`.
    pub half_width: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    None,
    Hill,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub eps: Vec<f64>,
    pub mu0: f64,
    pub alpha: f64,
    /// Fixed viscosity overriding `mu0 * eps^alpha`.
    pub mu: Option<f64>,
    pub forcing: ForcingKind,
    pub hill_amplitude: f64,
    pub hill_width: f64,
    pub linear_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub preset: String,
    pub seed: u64,
    /// Mollification scales; empty means unmollified data.
    pub delta: Vec<f64>,
    pub amplitude: f64,
    pub width: f64,
    pub separation: f64,
    pub band: (f64, f64),
    pub acoustic: f64,
    /// Directory of field dumps for the `dumps` preset.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_stride: usize,
    pub samples: usize,
    pub times: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub window_half_width: f64,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
    pub dump_fields: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: StudyKind,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub data: DataConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: &[(&str, &[&str])] = &[
    ("study", &["kind"]),
    ("grid", &["L", "nx", "ny", "nz"]),
    (
        "physics",
        &["gamma", "eps", "mu0", "alpha", "mu", "forcing", "hill_amplitude", "hill_width", "linear_only"],
    ),
    (
        "data",
        &["preset", "seed", "delta", "amplitude", "width", "separation", "band", "acoustic", "input"],
    ),
    (
        "run",
        &[
            "t_start",
            "t_end",
            "dt",
            "snapshot_stride",
            "samples",
            "times",
            "window",
            "window_half_width",
            "tolerance",
            "out",
            "dump_fields",
        ],
    ),
];

/// Largest number of grid points accepted, to stop typos from exhausting
/// memory.
const MAX_POINTS: usize = 1 << 28;

struct Reader<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&mut self, span: Option<std::ops::Range<usize>>, message: String) {
        let line = span.map(|s| self.line_of(s.start));
        self.errors.push(ConfigError { line, message });
    }

    fn value<'t>(&mut self, table: Option<&'t Table>, section: &str, key: &str) -> Option<(&'t Value, Option<usize>)> {
        let (_, item) = table?.get_key_value(key)?;
        let line = item.span().map(|s| self.line_of(s.start));
        match item {
            Item::Value(v) => Some((v, line)),
            _ => {
                self.err(item.span(), format!("[{section}] {key}: expected a value, found a {}", item.type_name()));
                None
            }
        }
    }

    fn mismatch(&mut self, line: Option<usize>, section: &str, key: &str, want: &str, v: &Value) {
        self.errors.push(ConfigError {
            line,
            message: format!("[{section}] {key}: expected {want}, found {}", v.type_name()),
        });
    }

    fn float(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<(f64, Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        match as_f64(v) {
            Some(x) => Some((x, line)),
            None => {
                self.mismatch(line, section, key, "a number", v);
                None
            }
        }
    }

    fn int(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<(i64, Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        match v.as_integer() {
            Some(x) => Some((x, line)),
            None => {
                self.mismatch(line, section, key, "an integer", v);
                None
            }
        }
    }

    fn string(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<(String, Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        match v.as_str() {
            Some(x) => Some((x.to_string(), line)),
            None => {
                self.mismatch(line, section, key, "a string", v);
                None
            }
        }
    }

    fn boolean(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<(bool, Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        match v.as_bool() {
            Some(x) => Some((x, line)),
            None => {
                self.mismatch(line, section, key, "true or false", v);
                None
            }
        }
    }

    /// A number or a list of numbers.
    fn floats(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<(Vec<f64>, Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        if let Some(x) = as_f64(v) {
            return Some((vec![x], line));
        }
        let parsed = v.as_array().and_then(|a| a.iter().map(as_f64).collect::<Option<Vec<f64>>>());
        match parsed {
            Some(xs) => Some((xs, line)),
            None => {
                self.mismatch(line, section, key, "a number or a list of numbers", v);
                None
            }
        }
    }

    fn pair(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<((f64, f64), Option<usize>)> {
        let (v, line) = self.value(t, section, key)?;
        let parsed = v.as_array().and_then(|a| a.iter().map(as_f64).collect::<Option<Vec<f64>>>());
        match parsed {
            Some(xs) if xs.len() == 2 => Some(((xs[0], xs[1]), line)),
            _ => {
                self.mismatch(line, section, key, "a list of two numbers", v);
                None
            }
        }
    }

    fn range(&mut self, line: Option<usize>, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.errors.push(ConfigError {
                line,
                message: message(),
            });
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

/// Parses a configuration whose `[study] kind` names the experiment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_config_for(text, None)
}

/// Parses a configuration for the given experiment. A `[study] kind` in the
/// file must agree with `kind` when both are present.
pub fn parse_config_for(text: &str, kind: Option<StudyKind>) -> Result<ExperimentConfig, ConfigErrors> {
    let doc = match Document::parse(text) {
        Ok(d) => d,
        Err(e) => {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            return Err(ConfigErrors(vec![ConfigError {
                line,
                message: format!("syntax error: {}", e.message().trim()),
            }]));
        }
    };
    let mut r = Reader {
        text,
        errors: Vec::new(),
    };
    let root = doc.as_table();

    // structure: known sections holding known keys
    for (name, item) in root.iter() {
        let span = root.get_key_value(name).and_then(|(k, _)| k.span());
        let Some(keys) = SECTIONS.iter().find(|(s, _)| *s == name).map(|(_, k)| *k) else {
            r.err(span.or(item.span()), format!("unknown section [{name}]"));
            continue;
        };
        let Some(table) = item.as_table() else {
            r.err(span.or(item.span()), format!("{name} must be a [section]"));
            continue;
        };
        for (key, _) in table.iter() {
            if !keys.contains(&key) {
                let span = table.get_key_value(key).and_then(|(k, _)| k.span());
                r.err(span, format!("unknown key '{key}' in [{name}]"));
            }
        }
    }
    let sec = |name: &str| root.get(name).and_then(Item::as_table);

    let study = sec("study");
    let declared = match r.string(study, "study", "kind") {
        Some((s, line)) => match StudyKind::parse(&s) {
            Some(k) => Some((k, line)),
            None => {
                r.range(line, false, || {
                    format!(
                        "[study] kind: unknown study '{s}' (expected propagate, decay, project, qg-run, ns-run or limit-study)"
                    )
                });
                None
            }
        },
        None => None,
    };
    let kind = match (declared, kind) {
        (Some((d, line)), Some(k)) if d != k => {
            r.range(line, false, || {
                format!("[study] kind is '{}' but the command runs '{}'", d.name(), k.name())
            });
            k
        }
        (Some((d, _)), _) => d,
        (None, Some(k)) => k,
        (None, None) => {
            r.errors.push(ConfigError {
                line: None,
                message: "[study] kind is required".into(),
            });
            StudyKind::Decay
        }
    };

    let decay = kind == StudyKind::Decay;

    // [grid]
    let g = sec("grid");
    let mut grid = GridConfig {
        half_width: if decay { 200.0 * PI } else { 2.0 * PI },
        nx: if decay { 1024 } else { 64 },
        ny: 0,
        nz: if decay { 4 } else { 8 },
    };
    if let Some((v, line)) = r.float(g, "grid", "L") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[grid] L must be positive, got {v}"));
        grid.half_width = v;
    }
    let size = |r: &mut Reader, key: &str, min: usize| -> Option<usize> {
        let (v, line) = r.int(g, "grid", key)?;
        if v < min as i64 {
            r.range(line, false, || format!("[grid] {key} must be at least {min}, got {v}"));
            return None;
        }
        if v % 2 != 0 {
            r.range(line, false, || format!("[grid] {key} must be even, got {v}"));
            return None;
        }
        Some(v as usize)
    };
    if let Some(v) = size(&mut r, "nx", 4) {
        grid.nx = v;
    }
    grid.ny = size(&mut r, "ny", 4).unwrap_or(grid.nx);
    if let Some(v) = size(&mut r, "nz", 4) {
        grid.nz = v;
    }
    if grid.nx.saturating_mul(grid.ny).saturating_mul(grid.nz) > MAX_POINTS {
        r.errors.push(ConfigError {
            line: g.and_then(|t| t.span()).map(|s| r.line_of(s.start)),
            message: format!("[grid] {} x {} x {} exceeds {MAX_POINTS} points", grid.nx, grid.ny, grid.nz),
        });
    }

    // [physics]
    let p = sec("physics");
    let mut physics = PhysicsConfig {
        gamma: 2.0,
        eps: match kind {
            StudyKind::Decay => vec![0.2],
            StudyKind::LimitStudy => vec![0.4, 0.2, 0.1, 0.05],
            _ => vec![0.2],
        },
        mu0: 1e-2,
        alpha: 0.5,
        mu: None,
        forcing: ForcingKind::None,
        hill_amplitude: 0.1,
        hill_width: 1.0,
        linear_only: false,
    };
    if let Some((v, line)) = r.float(p, "physics", "gamma") {
        r.range(line, v > 1.5 && v.is_finite(), || format!("[physics] γ must exceed 3/2, got {v}"));
        physics.gamma = v;
    }
    if let Some((v, line)) = r.floats(p, "physics", "eps") {
        r.range(line, !v.is_empty(), || "[physics] eps list is empty".into());
        for &e in &v {
            r.range(line, e > 0.0 && e <= 1.0, || format!("[physics] eps must lie in (0, 1], got {e}"));
        }
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        r.range(line, sorted.windows(2).all(|w| w[0] != w[1]), || {
            "[physics] eps values must be distinct".into()
        });
        physics.eps = v;
    }
    if let Some((v, line)) = r.float(p, "physics", "mu0") {
        r.range(line, v >= 0.0 && v.is_finite(), || format!("[physics] mu0 must be non-negative, got {v}"));
        physics.mu0 = v;
    }
    if let Some((v, line)) = r.float(p, "physics", "alpha") {
        r.range(line, v > 0.0 && v.is_finite(), || {
            format!("[physics] alpha must be positive so that the viscosity vanishes with eps, got {v}")
        });
        physics.alpha = v;
    }
    if let Some((v, line)) = r.float(p, "physics", "mu") {
        r.range(line, v >= 0.0 && v.is_finite(), || format!("[physics] mu must be non-negative, got {v}"));
        physics.mu = Some(v);
    }
    if let Some((v, line)) = r.string(p, "physics", "forcing") {
        match v.as_str() {
            "none" => physics.forcing = ForcingKind::None,
            "hill" => physics.forcing = ForcingKind::Hill,
            _ => r.range(line, false, || {
                format!("[physics] forcing: unknown forcing '{v}' (expected none or hill)")
            }),
        }
    }
    if let Some((v, line)) = r.float(p, "physics", "hill_amplitude") {
        r.range(line, v.is_finite(), || "[physics] hill_amplitude must be finite".into());
        physics.hill_amplitude = v;
    }
    if let Some((v, line)) = r.float(p, "physics", "hill_width") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[physics] hill_width must be positive, got {v}"));
        physics.hill_width = v;
    }
    if let Some((v, _)) = r.boolean(p, "physics", "linear_only") {
        physics.linear_only = v;
    }
    if (kind == StudyKind::Decay || kind == StudyKind::Propagate) && physics.eps.len() > 1 {
        let line = p.and_then(|t| t.get("eps")).and_then(Item::span).map(|s| r.line_of(s.start));
        r.range(line, false, || format!("[physics] {} takes a single eps", kind.name()));
    }

    // [data]
    let d = sec("data");
    let mut data = DataConfig {
        preset: kind.default_preset().to_string(),
        seed: 0,
        delta: Vec::new(),
        amplitude: if kind == StudyKind::LimitStudy { 2.5 } else { 1.0 },
        width: if decay { 0.5 } else { 1.0 },
        separation: 2.5,
        band: (1.5, 2.5),
        acoustic: 0.15,
        input: None,
    };
    if let Some((v, line)) = r.string(d, "data", "preset") {
        let allowed = kind.presets();
        r.range(line, allowed.contains(&v.as_str()), || {
            format!("[data] preset '{v}' is not available for {} (expected one of: {})", kind.name(), allowed.join(", "))
        });
        data.preset = v;
    }
    if let Some((v, line)) = r.int(d, "data", "seed") {
        r.range(line, v >= 0, || format!("[data] seed must be non-negative, got {v}"));
        data.seed = v.max(0) as u64;
    }
    if let Some((v, line)) = r.floats(d, "data", "delta") {
        for &x in &v {
            r.range(line, x > 0.0 && x < 1.0, || format!("[data] delta must lie in (0, 1), got {x}"));
        }
        let mollified = kind == StudyKind::Project || (kind == StudyKind::LimitStudy && data.preset == "reference");
        r.range(line, mollified || v.is_empty(), || {
            "[data] delta applies only to project and to limit-study with the reference preset".into()
        });
        data.delta = v;
    }
    if let Some((v, line)) = r.float(d, "data", "amplitude") {
        r.range(line, v.is_finite(), || "[data] amplitude must be finite".into());
        data.amplitude = v;
    }
    if let Some((v, line)) = r.float(d, "data", "width") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[data] width must be positive, got {v}"));
        data.width = v;
    }
    if let Some((v, line)) = r.float(d, "data", "separation") {
        r.range(line, v >= 0.0 && v.is_finite(), || format!("[data] separation must be non-negative, got {v}"));
        data.separation = v;
    }
    if let Some(((lo, hi), line)) = r.pair(d, "data", "band") {
        r.range(line, lo > 0.0 && hi > lo && hi.is_finite(), || {
            format!("[data] band must satisfy 0 < lo < hi, got [{lo}, {hi}]")
        });
        data.band = (lo, hi);
    }
    if let Some((v, line)) = r.float(d, "data", "acoustic") {
        r.range(line, v >= 0.0 && v.is_finite(), || format!("[data] acoustic must be non-negative, got {v}"));
        data.acoustic = v;
    }
    if let Some((v, _)) = r.string(d, "data", "input") {
        data.input = Some(PathBuf::from(v));
    }
    if data.preset == "dumps" && data.input.is_none() {
        r.errors.push(ConfigError {
            line: d.and_then(|t| t.span()).map(|s| r.line_of(s.start)),
            message: "[data] preset 'dumps' needs an input directory".into(),
        });
    }

    // [run]
    let rn = sec("run");
    let mut run = RunConfig {
        t_start: 1.0,
        t_end: match kind {
            StudyKind::Decay => 50.0,
            StudyKind::QgRun | StudyKind::Propagate => 10.0,
            _ => 1.0,
        },
        dt: 0.01,
        snapshot_stride: 10,
        samples: 48,
        times: Vec::new(),
        window: None,
        window_half_width: PI,
        tolerance: match kind {
            StudyKind::Propagate | StudyKind::Decay | StudyKind::Project => 1e-10,
            _ => 1e-6,
        },
        out: None,
        dump_fields: true,
    };
    let mut t_start_line = None;
    if let Some((v, line)) = r.float(rn, "run", "t_start") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[run] t_start must be positive, got {v}"));
        run.t_start = v;
        t_start_line = line;
    }
    if let Some((v, line)) = r.float(rn, "run", "t_end") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[run] t_end must be positive, got {v}"));
        run.t_end = v;
    }
    if decay {
        let (a, b) = (run.t_start, run.t_end);
        r.range(t_start_line, a < b, || format!("[run] t_start ({a}) must be below t_end ({b})"));
    }
    if let Some((v, line)) = r.float(rn, "run", "dt") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[run] dt must be positive, got {v}"));
        run.dt = v;
    }
    if run.dt > run.t_end {
        let line = rn.and_then(|t| t.get("dt")).and_then(Item::span).map(|s| r.line_of(s.start));
        let (dt, te) = (run.dt, run.t_end);
        r.range(line, false, || format!("[run] dt ({dt}) exceeds t_end ({te})"));
    }
    if let Some((v, line)) = r.int(rn, "run", "snapshot_stride") {
        r.range(line, v >= 1, || format!("[run] snapshot_stride must be at least 1, got {v}"));
        run.snapshot_stride = v.max(1) as usize;
    }
    if let Some((v, line)) = r.int(rn, "run", "samples") {
        r.range(line, v >= 2, || format!("[run] samples must be at least 2, got {v}"));
        run.samples = v.max(2) as usize;
    }
    if let Some((v, line)) = r.floats(rn, "run", "times") {
        r.range(line, v.iter().all(|t| *t >= 0.0 && t.is_finite()), || {
            "[run] times must be non-negative".into()
        });
        r.range(line, v.windows(2).all(|w| w[0] < w[1]), || "[run] times must be increasing".into());
        run.times = v;
    }
    if let Some(((lo, hi), line)) = r.pair(rn, "run", "window") {
        r.range(line, lo >= 0.0 && hi > lo && hi.is_finite(), || {
            format!("[run] window must satisfy 0 <= lo < hi, got [{lo}, {hi}]")
        });
        if decay {
            r.range(line, lo > 0.0, || "[run] the decay fit window must start after t = 0".into());
        }
        run.window = Some((lo, hi));
    }
    if let Some((v, line)) = r.float(rn, "run", "window_half_width") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[run] window_half_width must be positive, got {v}"));
        run.window_half_width = v;
    }
    if let Some((v, line)) = r.float(rn, "run", "tolerance") {
        r.range(line, v > 0.0 && v.is_finite(), || format!("[run] tolerance must be positive, got {v}"));
        run.tolerance = v;
    }
    if let Some((v, _)) = r.string(rn, "run", "out") {
        run.out = Some(PathBuf::from(v));
    }
    if let Some((v, _)) = r.boolean(rn, "run", "dump_fields") {
        run.dump_fields = v;
    }

    if r.errors.is_empty() {
        Ok(ExperimentConfig {
            kind,
            grid,
            physics,
            data,
            run,
        })
    } else {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(r.errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_decay_config_gets_defaults() {
        let c = parse_config("[study]\nkind = \"decay\"\n").unwrap();
        assert_eq!(c.kind, StudyKind::Decay);
        assert_eq!(c.grid.nx, 1024);
        assert_eq!(c.grid.ny, 1024);
        assert!((c.grid.half_width - 200.0 * PI).abs() < 1e-12);
        assert_eq!(c.physics.gamma, 2.0);
        assert_eq!(c.data.preset, "acoustic-pulse");
        assert_eq!(c.run.t_end, 50.0);
    }

    #[test]
    fn small_gamma_is_rejected_with_line() {
        let e = parse_config("[study]\nkind = \"ns-run\"\n[physics]\ngamma = 1.2\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].line, Some(4));
        assert!(e.0[0].message.contains("γ must exceed 3/2"));
    }

    #[test]
    fn odd_nx_is_rejected() {
        let e = parse_config("[study]\nkind = \"qg-run\"\n[grid]\nnx = 63\n").unwrap_err();
        assert_eq!(e.0[0].line, Some(4));
        assert!(e.0[0].message.contains("even"));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "[study]\nkind = \"ns-run\"\n[grid]\nnx = 63\nnz = 2\nfoo = 1\n[physics]\ngamma = \"two\"\n\
                    eps = [0.1, -0.2]\n[extra]\nx = 1\n";
        let e = parse_config(text).unwrap_err();
        let lines: Vec<_> = e.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(4), Some(5), Some(6), Some(8), Some(9), Some(10)]);
        assert!(e.0[3].message.contains("expected a number, found string"));
        assert!(e.0[5].message.contains("unknown section [extra]"));
    }

    #[test]
    fn kind_must_match_command() {
        let e = parse_config_for("[study]\nkind = \"decay\"\n", Some(StudyKind::QgRun)).unwrap_err();
        assert!(e.0[0].message.contains("command runs 'qg-run'"));
        let c = parse_config_for("[grid]\nnx = 32\n", Some(StudyKind::QgRun)).unwrap();
        assert_eq!(c.kind, StudyKind::QgRun);
        assert!(parse_config("[grid]\nnx = 32\n").is_err());
    }

    #[test]
    fn syntax_error_has_line() {
        let e = parse_config("[study]\nkind = \"decay\"\n[grid\n").unwrap_err();
        assert_eq!(e.0[0].line, Some(3));
    }

    #[test]
    fn scalars_promote_to_lists() {
        let c = parse_config("[study]\nkind = \"limit-study\"\n[physics]\neps = 0.1\n[data]\npreset = \"reference\"\ndelta = [0.5, 0.25]\n")
            .unwrap();
        assert_eq!(c.physics.eps, vec![0.1]);
        assert_eq!(c.data.delta, vec![0.5, 0.25]);
    }
}
