//! Parameter sweeps over distance or pair rate, with JSON configs and CSV
//! output.
//!
//! A sweep file looks like
//!
//! ```json
//! {
//!   "base": { "pair_rate": 1e10, "distance_km": 0, "placement": "source_in_middle",
//!             "f_ec": 1.2, "f_pa": 1.0 },
//!   "axis": "distance",
//!   "values": { "min": 0, "max": 200, "count": 101, "spacing": "linear" },
//!   "variants": [ { "placement": "source_at_alice" }, { "pulsed": true } ]
//! }
//! ```
//!
//! Rows are ordered by axis value, then by variant.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::keyrate::{
    pulsed_equivalent, secret_key_with, KeyRateResult, Placement, ScenarioConfig,
};

pub const TOOL_VERSION: &str = concat!("eqkd-sim ", env!("CARGO_PKG_VERSION"));

/// Prefix of the provenance line that carries the resolved sweep.
const CONFIG_PREFIX: &str = "# config: ";

pub const CSV_COLUMNS: [&str; 13] = [
    "axis", "variant", "K_bits", "K_bps", "sifted", "dark", "ber", "mu", "N", "M_max", "tail",
    "clamps", "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Distance,
    PairRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValues {
    Explicit(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridValues {
    pub fn resolve(&self) -> Result<Vec<f64>, String> {
        let values = match self {
            GridValues::Explicit(v) => v.clone(),
            GridValues::Range(r) => {
                if r.count == 0 {
                    return Err("values.count: must be at least 1".into());
                }
                if !(r.min.is_finite() && r.max.is_finite()) {
                    return Err("values: endpoints must be finite".into());
                }
                if r.spacing == Spacing::Log && !(r.min > 0.0 && r.max > 0.0) {
                    return Err("values: log spacing requires positive endpoints".into());
                }
                if r.count == 1 {
                    vec![r.min]
                } else {
                    let steps = (r.count - 1) as f64;
                    (0..r.count)
                        .map(|i| {
                            let t = i as f64 / steps;
                            match r.spacing {
                                Spacing::Linear => r.min + (r.max - r.min) * t,
                                Spacing::Log => {
                                    let (lo, hi) = (r.min.log10(), r.max.log10());
                                    10f64.powf(lo + (hi - lo) * t)
                                }
                            }
                        })
                        .collect()
                }
            }
        };
        if values.is_empty() {
            return Err("values: must not be empty".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err("values: must be finite".into());
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err("values: must be strictly increasing".into());
        }
        Ok(values)
    }
}

/// Overrides applied on top of the base scenario for one overlaid curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Placement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulsed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_km: Option<f64>,
}

impl Variant {
    pub fn label(&self, base: &ScenarioConfig) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        let placement = match self.placement.unwrap_or(base.placement) {
            Placement::SourceAtAlice => "alice",
            Placement::SourceInMiddle => "middle",
        };
        let mode = if self.pulsed.unwrap_or(base.pulsed) {
            "pulsed"
        } else {
            "cw"
        };
        let mut label = format!("{placement}-{mode}");
        if let Some(s) = self.pair_rate {
            let _ = write!(label, "-S={s:e}");
        }
        if let Some(d) = self.distance_km {
            let _ = write!(label, "-d={d}km");
        }
        label
    }

    fn apply(&self, base: &ScenarioConfig) -> ScenarioConfig {
        let mut cfg = base.clone();
        if let Some(p) = self.placement {
            cfg.placement = p;
        }
        if let Some(s) = self.pair_rate {
            cfg.pair_rate = s;
        }
        if let Some(d) = self.distance_km {
            cfg.distance_km = d;
        }
        match self.pulsed {
            Some(true) if cfg.pulse_period_s.is_none() => cfg = pulsed_equivalent(&cfg),
            Some(flag) => cfg.pulsed = flag,
            None => {}
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axis: Axis,
    pub values: GridValues,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
}

impl SweepSpec {
    /// Single-point sweep of `base` at its own axis value.
    pub fn single_point(base: ScenarioConfig) -> Self {
        let value = base.distance_km;
        SweepSpec {
            base,
            axis: Axis::Distance,
            values: GridValues::Explicit(vec![value]),
            variants: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems: Vec<String> = match self.base.validate() {
            Ok(()) => Vec::new(),
            Err(p) => p.into_iter().map(|m| format!("base.{m}")).collect(),
        };
        match self.values.resolve() {
            Ok(values) => {
                if values.iter().any(|&v| v < 0.0) {
                    problems.push("values: axis values must be >= 0".into());
                }
            }
            Err(e) => problems.push(e),
        }
        for (i, v) in self.variants.iter().enumerate() {
            if let Err(p) = v.apply(&self.base).validate() {
                problems.extend(p.into_iter().map(|m| format!("variants[{i}].{m}")));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    fn variants_or_base(&self) -> Vec<Variant> {
        if self.variants.is_empty() {
            vec![Variant::default()]
        } else {
            self.variants.clone()
        }
    }

    /// Scenario evaluated at one grid point.
    pub fn point_config(&self, variant: &Variant, axis_value: f64) -> ScenarioConfig {
        let mut cfg = variant.apply(&self.base);
        match self.axis {
            Axis::Distance => cfg.distance_km = axis_value,
            Axis::PairRate => cfg.pair_rate = axis_value,
        }
        cfg
    }

    /// Recovers the sweep recorded in a CSV provenance block.
    pub fn from_provenance(csv_text: &str) -> Result<Self, ConfigError> {
        let line = csv_text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
            .ok_or_else(|| {
                ConfigError::Validation(vec!["provenance: no `# config:` line".into()])
            })?;
        parse_spec(line)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub variant: String,
    pub outcome: Result<KeyRateResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub tool_version: String,
    pub timestamp: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

fn parse_spec(text: &str) -> Result<SweepSpec, ConfigError> {
    if text.trim().is_empty() {
        return Err(ConfigError::Validation(vec![
            "empty config; required fields: base.pair_rate, base.distance_km, base.placement, \
             base.f_ec, base.f_pa, axis, values"
                .into(),
        ]));
    }
    let spec: SweepSpec = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    spec.validate().map_err(ConfigError::Validation)?;
    Ok(spec)
}

/// Reads and fully validates a sweep file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SweepSpec, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            ConfigError::NotFound(path.to_path_buf())
        } else {
            ConfigError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_spec(&text)
}

/// Evaluates every grid point. Per-point failures land in the row.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> SweepResult {
    let values = spec.values.resolve().unwrap_or_default();
    let variants = spec.variants_or_base();
    let points: Vec<(f64, usize)> = values
        .iter()
        .flat_map(|&v| (0..variants.len()).map(move |i| (v, i)))
        .collect();
    let outcomes = exec.map(&points, |&(value, i)| {
        let cfg = spec.point_config(&variants[i], value);
        secret_key_with(&cfg, Execution::Sequential).map_err(|e| e.to_string())
    });
    let rows = points
        .iter()
        .zip(outcomes)
        .map(|(&(axis_value, i), outcome)| SweepRow {
            axis_value,
            variant: variants[i].label(&spec.base),
            outcome,
        })
        .collect();
    SweepResult {
        spec: spec.clone(),
        tool_version: TOOL_VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        rows,
    }
}

/// [`run_sweep`] on a dedicated pool of `threads` workers. Without the
/// `parallel` feature the sweep runs sequentially.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: Option<usize>) -> SweepResult {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(|| run_sweep(spec, Execution::Parallel));
            }
        }
        run_sweep(spec, Execution::Parallel)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        run_sweep(spec, Execution::Sequential)
    }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: io::Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    let axis = match result.spec.axis {
        Axis::Distance => "distance_km",
        Axis::PairRate => "pair_rate",
    };
    writeln!(out, "# {}", result.tool_version)?;
    writeln!(out, "# generated: {}", result.timestamp)?;
    writeln!(out, "# axis: {axis}")?;
    let config = serde_json::to_string(&result.spec).map_err(io::Error::other)?;
    writeln!(out, "{CONFIG_PREFIX}{config}")?;

    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for row in &result.rows {
        let mut record = vec![num(row.axis_value), row.variant.clone()];
        match &row.outcome {
            Ok(r) => {
                let d = &r.diagnostics;
                record.extend([
                    num(r.secret_bits),
                    num(r.secret_rate_bps),
                    num(r.sifted_bits),
                    num(r.dark_bits),
                    num(r.ber),
                    num(d.mean_pairs_per_window),
                    d.mode_count.to_string(),
                    d.max_pairs.to_string(),
                    num(d.tail_bound),
                    d.clamp_count.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                record.extend(std::iter::repeat_n(String::new(), 10));
                record.push(e.clone());
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: impl AsRef<Path>) -> io::Result<()> {
    let file = fs::File::create(path)?;
    let mut buf = io::BufWriter::new(file);
    write_csv(result, &mut buf)?;
    io::Write::flush(&mut buf)
}

/// Lines after the provenance block: the CSV header and data rows.
pub fn data_section(csv_text: &str) -> String {
    csv_text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}
