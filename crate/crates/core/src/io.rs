//! Panel and result files.
//!
//! Both are JSON documents with a `format_version` field. Objects are
//! written with sorted keys and two-space indentation, arrays of numbers on
//! one line, and every float with 17 significant digits, so a written file
//! is a deterministic function of its contents and reads back bit-exactly.
//!
//! Point encodings follow the space: matrix kinds as nested rows, sphere
//! points, quantile vectors and function values as flat arrays.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{GscError, Result};
use crate::estimators::{
    CovariatePanel, GscResult, GsdidPerTime, GsdidResult, Panel, PlaceboReport, RepairFlag,
};
use crate::simplex::SolverConfig;
use crate::spaces::{ObjectPoint, SpaceDescriptor, SpaceKind};

pub const FORMAT_VERSION: u64 = 1;

/// A panel together with optional covariates, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelFile {
    pub panel: Panel,
    pub covariates: Option<CovariatePanel>,
}

fn format_err(source: &str, message: impl Into<String>) -> GscError {
    GscError::Format {
        path: source.to_string(),
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| GscError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| GscError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json(text: &str, source: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        format_err(
            source,
            format!("line {}, column {}: {e}", e.line(), e.column()),
        )
    })
}

/// Serialized space descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceBlock {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

impl SpaceBlock {
    pub fn from_space(s: &SpaceDescriptor) -> Self {
        Self {
            kind: s.kind().name().to_string(),
            dim: s.dim(),
            power_p: s.power_p(),
            grid: s.grid().map(<[f64]>::to_vec),
        }
    }

    pub fn to_space(&self) -> Result<SpaceDescriptor> {
        let kind = SpaceKind::from_name(&self.kind)
            .ok_or_else(|| GscError::InvalidSpace(format!("unknown space kind {:?}", self.kind)))?;
        SpaceDescriptor::new(kind, self.dim, self.power_p, self.grid.clone())
    }
}

fn space_from_value(v: &Value, source: &str, at: &str) -> Result<Arc<SpaceDescriptor>> {
    let block: SpaceBlock = serde_json::from_value(v.clone())
        .map_err(|e| format_err(source, format!("{at}: {e}")))?;
    block
        .to_space()
        .map(SpaceDescriptor::into_shared)
        .map_err(|e| format_err(source, format!("{at}: {e}")))
}

/// JSON encoding of a point.
pub fn encode_point(p: &ObjectPoint) -> Value {
    let s = p.space();
    if s.kind().is_matrix() {
        let m = s.dim();
        Value::Array(
            p.data()
                .chunks(m)
                .map(|row| Value::Array(row.iter().map(|&x| json!(x)).collect()))
                .collect(),
        )
    } else {
        Value::Array(p.data().iter().map(|&x| json!(x)).collect())
    }
}

fn number(v: &Value, at: &str) -> std::result::Result<f64, String> {
    let x = v.as_f64().ok_or_else(|| format!("{at}: expected a number, found {v}"))?;
    if !x.is_finite() {
        return Err(format!("{at}: non-finite number"));
    }
    Ok(x)
}

fn numbers(v: &Value, at: &str, len: usize) -> std::result::Result<Vec<f64>, String> {
    let a = v.as_array().ok_or_else(|| format!("{at}: expected an array"))?;
    if a.len() != len {
        return Err(format!("{at}: expected {len} entries, found {}", a.len()));
    }
    a.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{at}[{i}]")))
        .collect()
}

/// Decodes a point of `space`, checking shape and finiteness. `at` names
/// the location in error messages.
pub fn decode_point(space: &Arc<SpaceDescriptor>, v: &Value, at: &str) -> std::result::Result<ObjectPoint, String> {
    let data = if space.kind().is_matrix() {
        let m = space.dim();
        let rows = v.as_array().ok_or_else(|| format!("{at}: expected {m} matrix rows"))?;
        if rows.len() != m {
            return Err(format!("{at}: expected {m} matrix rows, found {}", rows.len()));
        }
        let mut data = Vec::with_capacity(m * m);
        for (i, r) in rows.iter().enumerate() {
            data.extend(numbers(r, &format!("{at}[{i}]"), m)?);
        }
        data
    } else {
        numbers(v, at, space.data_len())?
    };
    ObjectPoint::new(space, data).map_err(|e| format!("{at}: {e}"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, source: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| format_err(source, format!("missing field {key:?}")))
}

fn string_list(v: &Value, key: &str, source: &str) -> Result<Vec<String>> {
    let a = v
        .as_array()
        .ok_or_else(|| format_err(source, format!("{key}: expected an array of strings")))?;
    a.iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| format_err(source, format!("{key}[{i}]: expected a string")))
        })
        .collect()
}

fn check_version(obj: &Map<String, Value>, source: &str) -> Result<()> {
    let v = field(obj, "format_version", source)?;
    match v.as_u64() {
        Some(FORMAT_VERSION) => Ok(()),
        _ => Err(format_err(
            source,
            format!("format_version: expected {FORMAT_VERSION}, found {v}"),
        )),
    }
}

/// Parses a panel document; `source` names it in diagnostics.
pub fn parse_panel(text: &str, source: &str) -> Result<PanelFile> {
    let root = parse_json(text, source)?;
    let obj = root
        .as_object()
        .ok_or_else(|| format_err(source, "top level must be an object"))?;
    check_version(obj, source)?;
    let space = space_from_value(field(obj, "space", source)?, source, "space")?;
    let units = string_list(field(obj, "unit_labels", source)?, "unit_labels", source)?;
    let times = string_list(field(obj, "time_labels", source)?, "time_labels", source)?;
    let t0_value = field(obj, "t0", source)?;
    let t0 = t0_value
        .as_u64()
        .ok_or_else(|| format_err(source, format!("t0: expected a nonnegative integer, found {t0_value}")))?
        as usize;
    if t0 < 1 || t0 >= times.len() {
        return Err(format_err(
            source,
            format!("t0 = {t0} must satisfy 1 <= t0 < T = {}", times.len()),
        ));
    }
    let rows = field(obj, "outcomes", source)?
        .as_array()
        .ok_or_else(|| format_err(source, "outcomes: expected an array of units"))?;
    if rows.len() != units.len() {
        return Err(format_err(
            source,
            format!("outcomes: {} units but {} unit labels", rows.len(), units.len()),
        ));
    }
    let mut outcomes = Vec::with_capacity(rows.len());
    for (j, row) in rows.iter().enumerate() {
        let at = format!("outcomes[{j}] (unit {:?})", units[j]);
        let cells = row
            .as_array()
            .ok_or_else(|| format_err(source, format!("{at}: expected an array of periods")))?;
        if cells.len() != times.len() {
            return Err(format_err(
                source,
                format!("{at}: {} periods but {} time labels", cells.len(), times.len()),
            ));
        }
        let points = cells
            .iter()
            .enumerate()
            .map(|(t, c)| {
                decode_point(
                    &space,
                    c,
                    &format!("outcomes[{j}][{t}] (unit {:?}, time {:?})", units[j], times[t]),
                )
                .map_err(|m| format_err(source, m))
            })
            .collect::<Result<Vec<_>>>()?;
        outcomes.push(points);
    }
    let panel = Panel::new(space, outcomes, t0, units, times).map_err(|e| format_err(source, e.to_string()))?;
    let covariates = match obj.get("covariates") {
        None | Some(Value::Null) => None,
        Some(v) => Some(covariates_from_value(v, source, "covariates")?),
    };
    if let Some(c) = &covariates {
        if c.n_units() != panel.n_units() {
            return Err(format_err(
                source,
                format!("covariates: {} units, panel has {}", c.n_units(), panel.n_units()),
            ));
        }
    }
    Ok(PanelFile { panel, covariates })
}

fn covariates_from_value(v: &Value, source: &str, at: &str) -> Result<CovariatePanel> {
    let obj = v
        .as_object()
        .ok_or_else(|| format_err(source, format!("{at}: expected an object")))?;
    let spaces = obj
        .get("spaces")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err(source, format!("{at}.spaces: expected an array")))?
        .iter()
        .enumerate()
        .map(|(k, s)| space_from_value(s, source, &format!("{at}.spaces[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let units = obj
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err(source, format!("{at}.values: expected an array of units")))?;
    let mut values = Vec::with_capacity(units.len());
    for (j, unit) in units.iter().enumerate() {
        let periods = unit
            .as_array()
            .ok_or_else(|| format_err(source, format!("{at}.values[{j}]: expected an array of periods")))?;
        let mut rows = Vec::with_capacity(periods.len());
        for (t, comps) in periods.iter().enumerate() {
            let comps = comps.as_array().ok_or_else(|| {
                format_err(source, format!("{at}.values[{j}][{t}]: expected an array of components"))
            })?;
            if comps.len() != spaces.len() {
                return Err(format_err(
                    source,
                    format!(
                        "{at}.values[{j}][{t}]: {} components, expected {}",
                        comps.len(),
                        spaces.len()
                    ),
                ));
            }
            rows.push(
                comps
                    .iter()
                    .zip(&spaces)
                    .enumerate()
                    .map(|(k, (c, s))| {
                        decode_point(s, c, &format!("{at}.values[{j}][{t}][{k}]"))
                            .map_err(|m| format_err(source, m))
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        values.push(rows);
    }
    CovariatePanel::new(spaces, values).map_err(|e| format_err(source, format!("{at}: {e}")))
}

fn covariates_to_value(c: &CovariatePanel) -> Value {
    json!({
        "spaces": c.spaces().iter().map(|s| serde_json::to_value(SpaceBlock::from_space(s)).expect("space block")).collect::<Vec<_>>(),
        "values": c
            .values()
            .iter()
            .map(|u| u.iter().map(|comps| comps.iter().map(encode_point).collect::<Vec<_>>()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn load_panel(path: &Path) -> Result<PanelFile> {
    parse_panel(&read_text(path)?, &path.display().to_string())
}

pub fn panel_to_string(file: &PanelFile) -> String {
    let p = &file.panel;
    let mut root = json!({
        "format_version": FORMAT_VERSION,
        "space": serde_json::to_value(SpaceBlock::from_space(p.space())).expect("space block"),
        "unit_labels": p.unit_labels(),
        "time_labels": p.time_labels(),
        "t0": p.t0(),
        "outcomes": p
            .outcomes()
            .iter()
            .map(|r| r.iter().map(encode_point).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    });
    if let Some(c) = &file.covariates {
        root["covariates"] = covariates_to_value(c);
    }
    to_canonical_json(&root)
}

pub fn save_panel(file: &PanelFile, path: &Path) -> Result<()> {
    write_text(path, &panel_to_string(file))
}

/// Reads covariates from either a standalone covariate document
/// (`format_version`, `spaces`, `values`) or a panel document carrying a
/// `covariates` block.
pub fn load_covariates(path: &Path) -> Result<CovariatePanel> {
    let source = path.display().to_string();
    let text = read_text(path)?;
    let root = parse_json(&text, &source)?;
    let obj = root
        .as_object()
        .ok_or_else(|| format_err(&source, "top level must be an object"))?;
    check_version(obj, &source)?;
    if obj.contains_key("outcomes") {
        return parse_panel(&text, &source)?
            .covariates
            .ok_or_else(|| format_err(&source, "panel file has no covariates block"));
    }
    covariates_from_value(&root, &source, "covariates")
}

pub fn save_covariates(c: &CovariatePanel, path: &Path) -> Result<()> {
    let mut v = covariates_to_value(c);
    v["format_version"] = json!(FORMAT_VERSION);
    write_text(path, &to_canonical_json(&v))
}

/// Deterministic JSON text: sorted keys, 17 significant digits.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Arrays that hold only scalars or such arrays stay on one line.
fn is_compact(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| is_scalar(x) || is_compact(x)),
        _ => is_scalar(v),
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                let _ = write!(out, "{x:.16e}");
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
            } else if is_compact(v) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, x) in a.iter().enumerate() {
                    pad(out, indent + 1);
                    write_value(out, x, indent + 1);
                    out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, &m[k.as_str()], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub tol_kkt: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub repair: bool,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(c: &SolverConfig) -> Self {
        Self {
            tol_kkt: c.tol_kkt,
            max_iter: c.max_iter,
            restarts: c.restarts,
            seed: c.seed,
            repair: c.repair,
        }
    }
}

impl From<&ConfigEcho> for SolverConfig {
    fn from(c: &ConfigEcho) -> Self {
        Self {
            tol_kkt: c.tol_kkt,
            max_iter: c.max_iter,
            restarts: c.restarts,
            seed: c.seed,
            repair: c.repair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub solver: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRecord {
    pub time_label: String,
    pub length: f64,
    pub start: Value,
    pub end: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceboRecord {
    /// `None` for a statistic pooled over post periods.
    pub time_label: Option<String>,
    pub statistics: Vec<f64>,
    pub rank_of_treated: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub context: String,
    pub kind: String,
    pub magnitude: f64,
}

/// Serialized estimator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub format_version: u64,
    pub method: String,
    pub config: ConfigEcho,
    pub space: SpaceBlock,
    pub unit_labels: Vec<String>,
    pub time_labels: Vec<String>,
    pub t0: usize,
    pub unit_weights: WeightRecord,
    /// GSDID time weights: one record pooled, or one per post period.
    #[serde(default)]
    pub time_weights: Vec<WeightRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    /// Pre-period distances between the treated unit and its synthetic.
    #[serde(default)]
    pub pre_fit: Vec<f64>,
    pub effects: Vec<EffectRecord>,
    #[serde(default)]
    pub placebo: Vec<PlaceboRecord>,
    #[serde(default)]
    pub repair_flags: Vec<RepairRecord>,
}

fn repair_records(flags: &[RepairFlag]) -> Vec<RepairRecord> {
    flags
        .iter()
        .map(|f| RepairRecord {
            context: f.context.clone(),
            kind: f.note.kind.name().to_string(),
            magnitude: f.note.magnitude,
        })
        .collect()
}

fn placebo_records(panel: &Panel, reports: &[PlaceboReport]) -> Vec<PlaceboRecord> {
    reports
        .iter()
        .map(|r| PlaceboRecord {
            time_label: r.time_index.map(|t| panel.time_labels()[t].clone()),
            statistics: r.statistics.clone(),
            rank_of_treated: r.rank_of_treated,
            p_value: r.p_value,
        })
        .collect()
}

impl ResultFile {
    fn base(method: &str, panel: &Panel, cfg: &SolverConfig, unit_weights: WeightRecord) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            method: method.to_string(),
            config: cfg.into(),
            space: SpaceBlock::from_space(panel.space()),
            unit_labels: panel.unit_labels().to_vec(),
            time_labels: panel.time_labels().to_vec(),
            t0: panel.t0(),
            unit_weights,
            time_weights: Vec::new(),
            objective: None,
            pre_fit: Vec::new(),
            effects: Vec::new(),
            placebo: Vec::new(),
            repair_flags: Vec::new(),
        }
    }

    /// `method` is `gsc` or `agsc`.
    pub fn from_gsc(
        method: &str,
        result: &GscResult,
        panel: &Panel,
        cfg: &SolverConfig,
        placebo: &[PlaceboReport],
    ) -> Self {
        let mut out = Self::base(
            method,
            panel,
            cfg,
            WeightRecord {
                solver: result.solver.name().to_string(),
                values: result.weights.values().to_vec(),
                time_label: None,
            },
        );
        out.objective = Some(result.objective);
        out.pre_fit = result.pre_fit_distances.clone();
        out.effects = result
            .effects
            .iter()
            .enumerate()
            .map(|(k, e)| EffectRecord {
                time_label: panel.time_labels()[panel.t0() + k].clone(),
                length: e.length,
                start: encode_point(&e.start),
                end: encode_point(&e.end),
            })
            .collect();
        out.placebo = placebo_records(panel, placebo);
        out.repair_flags = repair_records(&result.repair_flags);
        out
    }

    pub fn from_gsdid(result: &GsdidResult, panel: &Panel, cfg: &SolverConfig, placebo: &[PlaceboReport]) -> Self {
        let mut out = Self::base(
            "gsdid",
            panel,
            cfg,
            WeightRecord {
                solver: result.unit_solver.name().to_string(),
                values: result.unit_weights.values().to_vec(),
                time_label: None,
            },
        );
        out.time_weights = vec![WeightRecord {
            solver: result.time_solver.name().to_string(),
            values: result.time_weights.values().to_vec(),
            time_label: None,
        }];
        out.pre_fit = result.pre_fit_distances.clone();
        out.effects = vec![EffectRecord {
            time_label: "post_mean".to_string(),
            length: result.effect.length,
            start: encode_point(&result.effect.start),
            end: encode_point(&result.effect.end),
        }];
        out.placebo = placebo_records(panel, placebo);
        out.repair_flags = repair_records(&result.repair_flags);
        out
    }

    pub fn from_gsdid_per_time(result: &GsdidPerTime, panel: &Panel, cfg: &SolverConfig) -> Self {
        let mut out = Self::base(
            "gsdid_per_time",
            panel,
            cfg,
            WeightRecord {
                solver: result.unit_solver.name().to_string(),
                values: result.unit_weights.values().to_vec(),
                time_label: None,
            },
        );
        let post_labels = &panel.time_labels()[panel.t0()..];
        out.time_weights = result
            .time_weights
            .iter()
            .zip(post_labels)
            .map(|(w, l)| WeightRecord {
                solver: result.time_solver.name().to_string(),
                values: w.values().to_vec(),
                time_label: Some(l.clone()),
            })
            .collect();
        out.effects = result
            .effects
            .iter()
            .zip(post_labels)
            .map(|(e, l)| EffectRecord {
                time_label: l.clone(),
                length: e.length,
                start: encode_point(&e.start),
                end: encode_point(&e.end),
            })
            .collect();
        out.repair_flags = repair_records(&result.repair_flags);
        out
    }

    /// Decodes the start point of effect `k`.
    pub fn effect_start(&self, k: usize) -> Result<ObjectPoint> {
        let space = self.space.to_space()?.into_shared();
        decode_point(&space, &self.effects[k].start, &format!("effects[{k}].start"))
            .map_err(GscError::InvalidPoint)
    }
}

pub fn result_to_string(r: &ResultFile) -> String {
    to_canonical_json(&serde_json::to_value(r).expect("result serializes"))
}

pub fn save_result(r: &ResultFile, path: &Path) -> Result<()> {
    let bad = r
        .effects
        .iter()
        .map(|e| e.length)
        .chain(r.unit_weights.values.iter().copied())
        .chain(r.pre_fit.iter().copied())
        .any(|x| !x.is_finite());
    if bad {
        return Err(GscError::InvalidArgument("result contains non-finite values".into()));
    }
    write_text(path, &result_to_string(r))
}

pub fn load_result(path: &Path) -> Result<ResultFile> {
    let source = path.display().to_string();
    let text = read_text(path)?;
    let r: ResultFile = serde_json::from_str(&text).map_err(|e| {
        format_err(&source, format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if r.format_version != FORMAT_VERSION {
        return Err(format_err(
            &source,
            format!("format_version: expected {FORMAT_VERSION}, found {}", r.format_version),
        ));
    }
    Ok(r)
}

/// Long-format series with header `unit_label, time_label, statistic,
/// value`: pre-fit distances and effect lengths for the treated unit, and
/// one placebo row per unit and statistic.
pub fn plot_series(result: &ResultFile, panel: &Panel) -> Result<String> {
    if result.unit_labels != panel.unit_labels()
        || result.time_labels != panel.time_labels()
        || result.t0 != panel.t0()
        || result.space != SpaceBlock::from_space(panel.space())
    {
        return Err(GscError::InvalidArgument(
            "result was not produced from this panel (space, labels or T0 differ)".into(),
        ));
    }
    let treated = &panel.unit_labels()[0];
    let mut out = String::from("unit_label\ttime_label\tstatistic\tvalue\n");
    let mut row = |u: &str, t: &str, s: &str, v: f64| {
        let _ = writeln!(out, "{u}\t{t}\t{s}\t{v:.16e}");
    };
    for (t, d) in result.pre_fit.iter().enumerate() {
        row(treated, &panel.time_labels()[t], "pre_fit_distance", *d);
    }
    for e in &result.effects {
        row(treated, &e.time_label, "effect_length", e.length);
    }
    for p in &result.placebo {
        let t = p.time_label.as_deref().unwrap_or("post_mean");
        for (u, s) in panel.unit_labels().iter().zip(&p.statistics) {
            row(u, t, "placebo_statistic", *s);
        }
    }
    Ok(out)
}

pub fn emit_plot_series(result: &ResultFile, panel: &Panel, path: &Path) -> Result<()> {
    write_text(path, &plot_series(result, panel)?)
}
