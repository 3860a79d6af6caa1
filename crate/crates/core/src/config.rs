//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! ```text
//! # two-hour daylight run
//! [scenario]
//! duration_s = 7200 s
//! irradiance_profile = 0:220, 7200:260
//! sun_path = 0:20:100, 7200:45:140
//!
//! [pv]
//! irradiance = 800
//!
//! [analysis]
//! preset = motor_paper
//! gain = 10
//! closed = true
//! ```
//!
//! A number may carry its unit as a trailing token; it must then match the
//! key's unit. Unknown keys, duplicates and values that do not parse are
//! rejected with their line and column.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::lti::TransferFunction;
use crate::plants::Preset;
use crate::pv::{PvArrayParams, PvReference};
use crate::sim::ScenarioConfig;

#[derive(Clone, Debug, Error, PartialEq)]
pub struct ConfigError {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    /// 1-based column.
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            column: Some(column),
            message: message.into(),
        }
    }
}

/// PV array settings: module reference data plus the operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvSettings {
    pub reference: PvReference,
    pub n_s: u32,
    pub n_p: u32,
    pub area: f64,
    pub irradiance: f64,
    pub cell_temp_k: f64,
}

impl Default for PvSettings {
    fn default() -> Self {
        Self {
            reference: PvReference::default(),
            n_s: 60,
            n_p: 1,
            area: 1.6,
            irradiance: 1000.0,
            cell_temp_k: 298.0,
        }
    }
}

impl PvSettings {
    pub fn array(&self) -> PvArrayParams {
        PvArrayParams {
            cell: self.reference.cell_at(self.irradiance, self.cell_temp_k),
            n_s: self.n_s,
            n_p: self.n_p,
            area: self.area,
            irradiance: self.irradiance,
        }
    }
}

/// Transfer-function analysis requested from a config file.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub system: TransferFunction,
    pub preset: Option<Preset>,
    pub gain: f64,
    /// Analyse the unity-feedback closed loop instead of the open loop.
    pub closed: bool,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    /// `(start, stop, count)` gain sweep.
    pub gains: Option<(f64, f64, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub pv: PvSettings,
    pub analysis: Option<AnalysisRequest>,
}

struct Entry {
    line: usize,
    key_col: usize,
    value_col: usize,
    value: String,
}

type Section = HashMap<String, Entry>;

/// Parses `a:b:n` into a gain sweep.
pub fn parse_gain_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:count, got `{s}`"));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad gain `{}`", parts[0]))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad gain `{}`", parts[1]))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad count `{}`", parts[2]))?;
    if !(a > 0.0 && b > a && n >= 2) {
        return Err(format!(
            "gain range needs 0 < start < stop and count ≥ 2, got `{s}`"
        ));
    }
    Ok((a, b, n))
}

/// Log-spaced gains for a `(start, stop, count)` range.
pub fn gain_list((a, b, n): (f64, f64, usize)) -> Vec<f64> {
    crate::lti::log_grid(a, b, n)
}

pub fn parse_config_file(path: &Path) -> crate::Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| crate::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut sections: HashMap<String, Section> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, indent, "unterminated section header"))?
                .trim();
            if !["scenario", "pv", "analysis"].contains(&name) {
                return Err(ConfigError::at(
                    line,
                    indent + 1,
                    format!("unknown section `[{name}]`"),
                ));
            }
            sections.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let eq = content
            .find('=')
            .ok_or_else(|| ConfigError::at(line, indent, "expected `key = value`"))?;
        let key = content[..eq].trim();
        let value_raw = &content[eq + 1..];
        let value = value_raw.trim();
        let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
        if key.is_empty() {
            return Err(ConfigError::at(line, indent, "missing key before `=`"));
        }
        let section = current.as_ref().ok_or_else(|| {
            ConfigError::at(line, indent, format!("key `{key}` outside any section"))
        })?;
        let map = sections.get_mut(section).expect("section registered");
        if let Some(prev) = map.get(key) {
            return Err(ConfigError::at(
                line,
                indent,
                format!(
                    "duplicate key `{key}` (first set on line {}, again on line {line})",
                    prev.line
                ),
            ));
        }
        map.insert(
            key.to_string(),
            Entry {
                line,
                key_col: indent,
                value_col,
                value: value.to_string(),
            },
        );
    }

    let mut cfg = Config::default();
    if let Some(sec) = sections.get("scenario") {
        apply_scenario(&mut cfg.scenario, sec)?;
        cfg.scenario
            .validate()
            .map_err(|e| invariant_error(sec, &e.to_string()))?;
    }
    if let Some(sec) = sections.get("pv") {
        apply_pv(&mut cfg.pv, sec)?;
        cfg.pv
            .array()
            .validate()
            .map_err(|e| invariant_error(sec, &e.to_string()))?;
    }
    if let Some(sec) = sections.get("analysis") {
        cfg.analysis = Some(parse_analysis(sec)?);
    }
    Ok(cfg)
}

/// Points an invariant failure at the last line of the section that names
/// one of the offending keys.
fn invariant_error(sec: &Section, message: &str) -> ConfigError {
    let line = sec
        .iter()
        .filter(|(k, _)| message.contains(k.as_str()))
        .map(|(_, e)| e.line)
        .max();
    ConfigError {
        line,
        column: None,
        message: message.to_string(),
    }
}

fn sorted(sec: &Section) -> Vec<(&String, &Entry)> {
    let mut v: Vec<_> = sec.iter().collect();
    v.sort_by_key(|(_, e)| e.line);
    v
}

fn number(e: &Entry, unit: &str) -> Result<f64, ConfigError> {
    let mut tokens = e.value.split_whitespace();
    let num = tokens
        .next()
        .ok_or_else(|| ConfigError::at(e.line, e.value_col, "missing value"))?;
    let v: f64 = num.parse().map_err(|_| {
        ConfigError::at(
            e.line,
            e.value_col,
            format!("cannot parse `{num}` as a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(ConfigError::at(e.line, e.value_col, "value must be finite"));
    }
    if let Some(u) = tokens.next() {
        let col = e.value_col + e.value.find(u).unwrap_or(0);
        if u != unit {
            let expected = if unit.is_empty() { "no unit" } else { unit };
            return Err(ConfigError::at(
                e.line,
                col,
                format!("unit `{u}` where {expected} is expected"),
            ));
        }
        if tokens.next().is_some() {
            return Err(ConfigError::at(
                e.line,
                col,
                "unexpected text after the unit",
            ));
        }
    }
    Ok(v)
}

fn count(e: &Entry) -> Result<u32, ConfigError> {
    e.value.trim().parse().map_err(|_| {
        ConfigError::at(
            e.line,
            e.value_col,
            format!("expected a positive integer, got `{}`", e.value),
        )
    })
}

fn boolean(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(ConfigError::at(
            e.line,
            e.value_col,
            format!("expected true or false, got `{other}`"),
        )),
    }
}

/// Comma-separated `a:b[:c]` tuples with exactly `arity` fields.
fn breakpoints(e: &Entry, arity: usize) -> Result<Vec<Vec<f64>>, ConfigError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for item in e.value.split(',') {
        let col = e.value_col + offset + (item.len() - item.trim_start().len());
        offset += item.len() + 1;
        let fields: Result<Vec<f64>, _> = item
            .trim()
            .split(':')
            .map(|f| f.trim().parse::<f64>())
            .collect();
        match fields {
            Ok(f) if f.len() == arity && f.iter().all(|x| x.is_finite()) => out.push(f),
            _ => {
                return Err(ConfigError::at(
                    e.line,
                    col,
                    format!(
                        "expected {arity} colon-separated numbers, got `{}`",
                        item.trim()
                    ),
                ))
            }
        }
    }
    Ok(out)
}

fn unknown(key: &str, e: &Entry, section: &str) -> ConfigError {
    ConfigError::at(
        e.line,
        e.key_col,
        format!("unknown key `{key}` in [{section}]"),
    )
}

fn apply_scenario(s: &mut ScenarioConfig, sec: &Section) -> Result<(), ConfigError> {
    for (key, e) in sorted(sec) {
        let slot: (&mut f64, &str) = match key.as_str() {
            "irradiance_profile" => {
                s.irradiance_profile = breakpoints(e, 2)?
                    .into_iter()
                    .map(|f| (f[0], f[1]))
                    .collect();
                continue;
            }
            "sun_path" => {
                s.sun_path = breakpoints(e, 3)?
                    .into_iter()
                    .map(|f| (f[0], f[1], f[2]))
                    .collect();
                continue;
            }
            "duration_s" => (&mut s.duration_s, "s"),
            "dt_s" => (&mut s.dt_s, "s"),
            "cell_temp_k" => (&mut s.cell_temp_k, "K"),
            "battery_capacity_wh" => (&mut s.battery_capacity_wh, "Wh"),
            "battery_voltage_v" => (&mut s.battery_voltage_v, "V"),
            "soc_init_pct" => (&mut s.soc_init_pct, "%"),
            "base_load_w" => (&mut s.base_load_w, "W"),
            "tank1_volume_l" => (&mut s.tank1_volume_l, "L"),
            "tank2_volume_l" => (&mut s.tank2_volume_l, "L"),
            "tank1_init_pct" => (&mut s.tank1_init_pct, "%"),
            "tank2_init_pct" => (&mut s.tank2_init_pct, "%"),
            "valve_return_lpm" => (&mut s.valve_return_lpm, "L/min"),
            "soil_init_pct" => (&mut s.soil_init_pct, "%"),
            "soil_gain_pct_per_l" => (&mut s.soil_gain_pct_per_l, "%/L"),
            "soil_decay_pct_per_h" => (&mut s.soil_decay_pct_per_h, "%/h"),
            "pump_flow_lpm" => (&mut s.pump_flow_lpm, "L/min"),
            "pump_power_w" => (&mut s.pump_power_w, "W"),
            "pump_tau_s" => (&mut s.pump_tau_s, "s"),
            "tank_low_pct" => (&mut s.tank_low_pct, "%"),
            "tank_full_pct" => (&mut s.tank_full_pct, "%"),
            "soil_dry_pct" => (&mut s.soil_dry_pct, "%"),
            "soil_wet_pct" => (&mut s.soil_wet_pct, "%"),
            "battery_cutoff_pct" => (&mut s.battery_cutoff_pct, "%"),
            "mppt_dv" => (&mut s.mppt_dv, "V"),
            "mppt_v_init" => (&mut s.mppt_v_init, "V"),
            "tracker_period_s" => (&mut s.tracker_period_s, "s"),
            "tracker_step_deg" => (&mut s.tracker_step_deg, "deg"),
            _ => return Err(unknown(key, e, "scenario")),
        };
        *slot.0 = number(e, slot.1)?;
    }
    Ok(())
}

fn apply_pv(p: &mut PvSettings, sec: &Section) -> Result<(), ConfigError> {
    for (key, e) in sorted(sec) {
        let r = &mut p.reference;
        let slot: (&mut f64, &str) = match key.as_str() {
            "n_s" => {
                p.n_s = count(e)?;
                continue;
            }
            "n_p" => {
                p.n_p = count(e)?;
                continue;
            }
            "i_ph_stc" => (&mut r.i_ph_stc, "A"),
            "i_o1" => (&mut r.i_o1_ref, "A"),
            "i_o2" => (&mut r.i_o2_ref, "A"),
            "r_s" => (&mut r.r_s, "ohm"),
            "r_p" => (&mut r.r_p, "ohm"),
            "a1" => (&mut r.a1, ""),
            "a2" => (&mut r.a2, ""),
            "t_ref_k" => (&mut r.t_ref, "K"),
            "e_gap_ev" => (&mut r.e_gap_ev, "eV"),
            "area" => (&mut p.area, "m2"),
            "irradiance" => (&mut p.irradiance, "W/m2"),
            "cell_temp_k" => (&mut p.cell_temp_k, "K"),
            _ => return Err(unknown(key, e, "pv")),
        };
        *slot.0 = number(e, slot.1)?;
    }
    Ok(())
}

fn parse_analysis(sec: &Section) -> Result<AnalysisRequest, ConfigError> {
    let mut preset = None;
    let mut tf: Option<TransferFunction> = None;
    let mut req = AnalysisRequest {
        system: TransferFunction::gain(1.0),
        preset: None,
        gain: 1.0,
        closed: false,
        t_end: None,
        dt: None,
        gains: None,
    };
    for (key, e) in sorted(sec) {
        match key.as_str() {
            "preset" => {
                preset = Some(
                    e.value
                        .parse::<Preset>()
                        .map_err(|err| ConfigError::at(e.line, e.value_col, err.to_string()))?,
                )
            }
            "tf" => {
                tf = Some(
                    e.value
                        .parse::<TransferFunction>()
                        .map_err(|err| ConfigError::at(e.line, e.value_col, err.to_string()))?,
                )
            }
            "gain" => req.gain = number(e, "")?,
            "closed" => req.closed = boolean(e)?,
            "t_end" => req.t_end = Some(number(e, "s")?),
            "dt" => req.dt = Some(number(e, "s")?),
            "gains" => {
                req.gains = Some(
                    parse_gain_range(&e.value)
                        .map_err(|m| ConfigError::at(e.line, e.value_col, m))?,
                )
            }
            _ => return Err(unknown(key, e, "analysis")),
        }
    }
    req.system = match (preset, tf) {
        (Some(p), None) => p.transfer_function(),
        (None, Some(t)) => t,
        (Some(_), Some(_)) => {
            let line = sec.get("tf").map(|e| e.line);
            return Err(ConfigError {
                line,
                column: None,
                message: "set either `preset` or `tf`, not both".into(),
            });
        }
        (None, None) => {
            return Err(ConfigError {
                line: None,
                column: None,
                message: "[analysis] requires `preset` or `tf`".into(),
            })
        }
    };
    req.preset = preset;
    Ok(req)
}
