//! Sweep configuration: a TOML file with a `[sweep]` table, overridable
//! from the command line.
//!
//! ```toml
//! [sweep]
//! channel = "ad"
//! strategy = "paper"
//! input = "X"            # or "-Y", "Z", or "0.6, 0, 0.8"
//! grid = "0:1:0.05"
//! format = "csv"
//! verify_trials = 20
//! seed = 0
//! columns = ["exp_x", "exp_z"]
//! out = "ad_x.csv"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chansim_core::basis::BasisKind;
use chansim_core::channel::PresetKind;
use chansim_core::compiler::Strategy;
use chansim_core::BlochVector;
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{location}field `{field}`: {message}")]
    Field {
        location: Location,
        field: &'static str,
        message: String,
    },
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Default)]
pub struct Location(Option<(PathBuf, usize)>);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Some((path, line)) => write!(f, "{}:{line}: ", path.display()),
            None => Ok(()),
        }
    }
}

fn field_error(location: Location, field: &'static str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field {
        location,
        field,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            start: 0.0,
            stop: 1.0,
            step: 0.05,
        }
    }
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, String> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(format!("step must be positive, got {step}"));
        }
        for (name, v) in [("start", start), ("stop", stop)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        Ok(Grid { start, stop, step })
    }

    /// Grid points; when the span is a whole number of steps the last point
    /// is exactly `stop` and interior points are `start + span·i/N`.
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let ratio = span / self.step;
        let rounded = ratio.round();
        if (ratio - rounded).abs() < 1e-9 {
            let n = rounded as usize;
            if n == 0 {
                return vec![self.start];
            }
            (0..=n)
                .map(|i| self.start + span * i as f64 / n as f64)
                .collect()
        } else {
            (0..=ratio.floor() as usize)
                .map(|i| self.start + self.step * i as f64)
                .collect()
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        Grid::new(num(start)?, num(stop)?, num(step)?)
    }
}

/// Named Bloch directions (`X`, `-Y`, ...) or an explicit `x, y, z` triple.
pub fn parse_input(s: &str) -> Result<BlochVector, String> {
    let t = s.trim();
    let named = match t.to_ascii_uppercase().as_str() {
        "X" | "+X" => Some(BlochVector::new(1.0, 0.0, 0.0)),
        "-X" => Some(BlochVector::new(-1.0, 0.0, 0.0)),
        "Y" | "+Y" => Some(BlochVector::new(0.0, 1.0, 0.0)),
        "-Y" => Some(BlochVector::new(0.0, -1.0, 0.0)),
        "Z" | "+Z" => Some(BlochVector::new(0.0, 0.0, 1.0)),
        "-Z" => Some(BlochVector::new(0.0, 0.0, -1.0)),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v);
    }
    let values: Vec<f64> = t
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("`{s}` is neither X/Y/Z (optionally signed) nor an x,y,z triple"))?;
    let [x, y, z] = values.as_slice() else {
        return Err(format!("expected three components, got {}", values.len()));
    };
    let v = BlochVector::new(*x, *y, *z);
    if v.norm() > 1.0 + 1e-12 {
        return Err(format!("Bloch vector norm {} exceeds 1", v.norm()));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Column {
    Param,
    ExpX,
    ExpY,
    ExpZ,
    FidVsInput,
    FidVsTheory,
    Entropy,
    PlanDeviation,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::Param,
        Column::ExpX,
        Column::ExpY,
        Column::ExpZ,
        Column::FidVsInput,
        Column::FidVsTheory,
        Column::Entropy,
        Column::PlanDeviation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::Param => "param",
            Column::ExpX => "exp_x",
            Column::ExpY => "exp_y",
            Column::ExpZ => "exp_z",
            Column::FidVsInput => "fid_vs_input",
            Column::FidVsTheory => "fid_vs_theory",
            Column::Entropy => "entropy",
            Column::PlanDeviation => "plan_deviation",
        }
    }
}

impl FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        Column::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown column `{s}`"))
    }
}

/// Columns in canonical order; `param` is always present.
pub fn normalize_columns(cols: &[Column]) -> Vec<Column> {
    Column::ALL
        .into_iter()
        .filter(|c| *c == Column::Param || cols.contains(c))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub channel: PresetKind,
    pub strategy: Strategy,
    pub basis: BasisKind,
    pub input: BlochVector,
    pub grid: Grid,
    pub columns: Vec<Column>,
    pub out_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub verify_trials: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(channel: PresetKind) -> Self {
        SweepConfig {
            channel,
            strategy: Strategy::Auto,
            basis: BasisKind::Pauli,
            input: BlochVector::new(1.0, 0.0, 0.0),
            grid: Grid::default(),
            columns: Column::ALL.to_vec(),
            out_path: None,
            format: OutputFormat::Csv,
            verify_trials: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    channel: Option<Spanned<String>>,
    strategy: Option<Spanned<String>>,
    basis: Option<Spanned<String>>,
    input: Option<Spanned<String>>,
    grid: Option<Spanned<String>>,
    columns: Option<Spanned<Vec<String>>>,
    out: Option<Spanned<String>>,
    format: Option<Spanned<String>>,
    verify_trials: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
}

/// Partially specified settings from a file or from flags; later layers win.
#[derive(Debug, Clone, Default)]
pub struct SweepOverrides {
    pub channel: Option<String>,
    pub strategy: Option<String>,
    pub basis: Option<String>,
    pub input: Option<String>,
    pub grid: Option<String>,
    pub columns: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub verify_trials: Option<i64>,
    pub seed: Option<i64>,
}

#[derive(Debug, Clone, Default)]
struct Layer {
    values: SweepOverrides,
    lines: Vec<(&'static str, Location)>,
}

impl Layer {
    fn location(&self, field: &'static str) -> Location {
        self.lines
            .iter()
            .find(|(f, _)| *f == field)
            .map(|(_, l)| l.clone())
            .unwrap_or_default()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_file(path: &Path) -> Result<Layer, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_text(&text, path)
}

fn parse_text(text: &str, path: &Path) -> Result<Layer, ConfigError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        ConfigError::Parse {
            path: path.to_path_buf(),
            message: match line {
                Some(l) => format!("line {l}: {}", e.message()),
                None => e.message().to_string(),
            },
        }
    })?;
    let sweep = raw.sweep.ok_or_else(|| ConfigError::Parse {
        path: path.to_path_buf(),
        message: "missing [sweep] table".to_string(),
    })?;
    let mut layer = Layer::default();
    let mut mark = |field: &'static str, span: std::ops::Range<usize>| {
        layer
            .lines
            .push((field, Location(Some((path.to_path_buf(), line_of(text, span.start))))));
    };
    macro_rules! take {
        ($field:ident) => {
            sweep.$field.map(|s| {
                mark(stringify!($field), s.span());
                s.into_inner()
            })
        };
    }
    let values = SweepOverrides {
        channel: take!(channel),
        strategy: take!(strategy),
        basis: take!(basis),
        input: take!(input),
        grid: take!(grid),
        columns: take!(columns),
        out: take!(out).map(PathBuf::from),
        format: take!(format),
        verify_trials: take!(verify_trials),
        seed: take!(seed),
    };
    layer.values = values;
    Ok(layer)
}

/// Merges an optional config file with command-line overrides and validates
/// the result.
pub fn resolve(file: Option<&Path>, flags: SweepOverrides) -> Result<SweepConfig, ConfigError> {
    let file_layer = match file {
        Some(p) => parse_file(p)?,
        None => Layer::default(),
    };
    resolve_layers(file_layer, flags)
}

/// Same as [`resolve`] with the file contents given directly.
pub fn resolve_text(text: &str, name: &Path, flags: SweepOverrides) -> Result<SweepConfig, ConfigError> {
    resolve_layers(parse_text(text, name)?, flags)
}

fn resolve_layers(file: Layer, flags: SweepOverrides) -> Result<SweepConfig, ConfigError> {
    // Flags carry no line information; file values keep theirs.
    let pick = |field: &'static str, flag_set: bool| {
        if flag_set {
            Location::default()
        } else {
            file.location(field)
        }
    };
    let f = &file.values;

    let channel_loc = pick("channel", flags.channel.is_some());
    let channel: PresetKind = flags
        .channel
        .as_ref()
        .or(f.channel.as_ref())
        .ok_or_else(|| field_error(Location::default(), "channel", "is required (pd, ad or dep)"))?
        .parse()
        .map_err(|e| field_error(channel_loc, "channel", e))?;
    let mut cfg = SweepConfig::new(channel);

    if let Some(s) = flags.strategy.as_ref().or(f.strategy.as_ref()) {
        let loc = pick("strategy", flags.strategy.is_some());
        cfg.strategy = s.parse().map_err(|e| field_error(loc, "strategy", e))?;
    }
    if let Some(s) = flags.basis.as_ref().or(f.basis.as_ref()) {
        let loc = pick("basis", flags.basis.is_some());
        cfg.basis = s.parse().map_err(|e| field_error(loc, "basis", e))?;
    }
    if let Some(s) = flags.input.as_ref().or(f.input.as_ref()) {
        let loc = pick("input", flags.input.is_some());
        cfg.input = parse_input(s).map_err(|e| field_error(loc, "input", e))?;
    }
    if let Some(s) = flags.grid.as_ref().or(f.grid.as_ref()) {
        let loc = pick("grid", flags.grid.is_some());
        cfg.grid = s.parse().map_err(|e| field_error(loc, "grid", e))?;
    }
    if let Some(cols) = flags.columns.as_ref().or(f.columns.as_ref()) {
        let loc = pick("columns", flags.columns.is_some());
        let parsed = cols
            .iter()
            .map(|c| c.parse::<Column>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| field_error(loc, "columns", e))?;
        cfg.columns = normalize_columns(&parsed);
    }
    cfg.out_path = flags.out.clone().or_else(|| f.out.clone());
    if let Some(s) = flags.format.as_ref().or(f.format.as_ref()) {
        let loc = pick("format", flags.format.is_some());
        cfg.format = s.parse().map_err(|e| field_error(loc, "format", e))?;
    }
    if let Some(n) = flags.verify_trials.or(f.verify_trials) {
        let loc = pick("verify_trials", flags.verify_trials.is_some());
        cfg.verify_trials = usize::try_from(n)
            .map_err(|_| field_error(loc, "verify_trials", format!("must be non-negative, got {n}")))?;
    }
    if let Some(n) = flags.seed.or(f.seed) {
        let loc = pick("seed", flags.seed.is_some());
        cfg.seed = u64::try_from(n)
            .map_err(|_| field_error(loc, "seed", format!("must be non-negative, got {n}")))?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_text(text: &str) -> Result<SweepConfig, ConfigError> {
        resolve_text(text, Path::new("test.toml"), SweepOverrides::default())
    }

    #[test]
    fn default_grid_has_21_points() {
        let pts = Grid::default().points();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[10], 0.5);
        assert_eq!(pts[20], 1.0);
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:1:0.25".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "0.2:0.2:0.1".parse().unwrap();
        assert_eq!(g.points(), vec![0.2]);
        let g: Grid = "0:1:0.3".parse().unwrap();
        assert_eq!(g.points().len(), 4);
        let eighteen: Grid = format!("0:1:{}", 1.0 / 18.0).parse().unwrap();
        assert_eq!(eighteen.points().len(), 19);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1.5:0.1".parse::<Grid>().is_err());
        assert!("0.5:0.2:0.1".parse::<Grid>().is_err());
        assert!("a:1:0.1".parse::<Grid>().is_err());
    }

    #[test]
    fn input_parsing() {
        assert_eq!(parse_input("-Y").unwrap(), BlochVector::new(0.0, -1.0, 0.0));
        assert_eq!(parse_input("z").unwrap(), BlochVector::new(0.0, 0.0, 1.0));
        assert_eq!(parse_input("0.6, 0, 0.8").unwrap(), BlochVector::new(0.6, 0.0, 0.8));
        assert!(parse_input("1, 1, 0").is_err());
        assert!(parse_input("W").is_err());
        assert!(parse_input("1, 0").is_err());
    }

    #[test]
    fn full_file() {
        let cfg = from_text(
            r#"
[sweep]
channel = "dep"
strategy = "paper"
input = "-Y"
grid = "0:1:0.1"
columns = ["exp_y", "param"]
format = "json"
verify_trials = 5
seed = 42
out = "dep.json"
"#,
        )
        .unwrap();
        assert_eq!(cfg.channel, PresetKind::Dep);
        assert_eq!(cfg.strategy, Strategy::Paper);
        assert_eq!(cfg.input, BlochVector::new(0.0, -1.0, 0.0));
        assert_eq!(cfg.grid.points().len(), 11);
        assert_eq!(cfg.columns, vec![Column::Param, Column::ExpY]);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.verify_trials, 5);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.out_path, Some(PathBuf::from("dep.json")));
    }

    #[test]
    fn flags_override_file() {
        let flags = SweepOverrides {
            channel: Some("pd".into()),
            seed: Some(7),
            ..Default::default()
        };
        let cfg = resolve_text("[sweep]\nchannel = \"ad\"\nseed = 1\n", Path::new("x.toml"), flags).unwrap();
        assert_eq!(cfg.channel, PresetKind::Pd);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn errors_name_line_and_field() {
        let err = from_text("[sweep]\nchannel = \"pd\"\n\ngrid = \"0:2:0.1\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("test.toml:4: field `grid`"), "{msg}");

        let err = from_text("[sweep]\nchannel = \"xx\"\n").unwrap_err();
        assert!(err.to_string().starts_with("test.toml:2: field `channel`"), "{err}");

        let err = from_text("[sweep]\nchannel = \"pd\"\nspeed = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");

        let err = from_text("[sweep]\nchannel = \"pd\"\nseed = -1\n").unwrap_err();
        assert!(err.to_string().contains("field `seed`"), "{err}");

        let err = from_text("[sweep]\nstrategy = \"auto\"\n").unwrap_err();
        assert!(err.to_string().contains("field `channel`"), "{err}");

        assert!(from_text("channel = \"pd\"\n").is_err());
    }

    #[test]
    fn missing_file_reports_path() {
        let err = resolve(Some(Path::new("/nonexistent/cfg.toml")), SweepOverrides::default()).unwrap_err();
        assert!(err.to_string().starts_with("/nonexistent/cfg.toml"));
    }
}
