//! Flat `key = value` scenario files.
//!
//! ```text
//! # φ family, three angles
//! scenario = phi
//! gammas = pi/4, pi/6, pi/12
//! t_max = 3e-3
//! ```
//!
//! Keys are the lower_snake_case field names of [`ScenarioConfig`], with the
//! physical parameters flattened in. Angles accept plain radians or the forms
//! `pi`, `pi/N`, `K*pi/N`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::oracle::Case;
use crate::params::{check_gamma, PhysicalParams};

pub const DEFAULT_T_MAX: f64 = 3e-3;
pub const DEFAULT_SAMPLES: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown output format `{other}` (csv|json)")),
        }
    }
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psi" => Ok(Case::Psi),
            "phi" => Ok(Case::Phi),
            "one_atom" => Ok(Case::OneAtom),
            other => Err(format!("unknown scenario `{other}` (psi|phi|one_atom)")),
        }
    }
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::Psi => "psi",
            Case::Phi => "phi",
            Case::OneAtom => "one_atom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Case,
    /// `gamma` mirrors `gammas[0]`; the sweep runs over `gammas`.
    pub physical: PhysicalParams,
    pub t_max: f64,
    pub n_samples: usize,
    pub gammas: Vec<f64>,
    pub run_oracle: bool,
    pub zero_optical_phase: bool,
    pub output_format: OutputFormat,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    /// Worker threads for row evaluation; 0 uses every core.
    pub workers: usize,
}

impl ScenarioConfig {
    pub fn defaults(scenario: Case) -> Self {
        Self {
            scenario,
            physical: PhysicalParams::reference(FRAC_PI_4),
            t_max: DEFAULT_T_MAX,
            n_samples: DEFAULT_SAMPLES,
            gammas: vec![FRAC_PI_4, FRAC_PI_6, PI / 12.0],
            run_oracle: false,
            zero_optical_phase: false,
            output_format: OutputFormat::Csv,
            output_path: None,
            workers: 0,
        }
    }

    /// Physical parameters for one entry of the sweep.
    pub fn params_for(&self, gamma: f64) -> PhysicalParams {
        self.physical.with_gamma(gamma)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_samples < 2 {
            return Err(ScenarioError::config("n_samples", 0, "must be at least 2"));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(ScenarioError::config("t_max", 0, "must be finite and > 0"));
        }
        if self.gammas.is_empty() {
            return Err(ScenarioError::config("gammas", 0, "at least one angle is required"));
        }
        for &g in &self.gammas {
            check_gamma(g).map_err(|e| ScenarioError::config("gammas", 0, e.reason))?;
        }
        self.params_for(self.gammas[0]).validate().map_err(|e| ScenarioError::config(e.field, 0, e.reason))
    }

    /// Serializes to the key-value format; parsing the result gives back `self`.
    pub fn to_config_string(&self) -> String {
        let p = &self.physical;
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario.as_str());
        let _ = writeln!(s, "mass = {:e}", p.mass);
        let _ = writeln!(s, "coupling_eps = {:e}", p.coupling_eps);
        let _ = writeln!(s, "wavelength = {:e}", p.wavelength);
        let _ = writeln!(s, "x0 = {:e}", p.x0);
        let _ = writeln!(s, "dx0 = {:e}", p.dx0);
        let _ = writeln!(s, "t_max = {:e}", self.t_max);
        let _ = writeln!(s, "n_samples = {}", self.n_samples);
        let gammas: Vec<String> = self.gammas.iter().map(|g| format!("{g:e}")).collect();
        let _ = writeln!(s, "gammas = {}", gammas.join(", "));
        let _ = writeln!(s, "run_oracle = {}", self.run_oracle);
        let _ = writeln!(s, "zero_optical_phase = {}", self.zero_optical_phase);
        let _ = writeln!(s, "output_format = {}", self.output_format.as_str());
        if let Some(path) = &self.output_path {
            let _ = writeln!(s, "output_path = {}", path.display());
        }
        let _ = writeln!(s, "workers = {}", self.workers);
        s
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "mass",
    "coupling_eps",
    "wavelength",
    "x0",
    "dx0",
    "t_max",
    "n_samples",
    "gammas",
    "run_oracle",
    "zero_optical_phase",
    "output_format",
    "output_path",
    "workers",
];

/// Unvalidated key-value pairs with the line each came from (0 = command line).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(source: &str) -> Result<Self, ScenarioError> {
        let mut raw = RawConfig::default();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let Some((key, value)) = text.split_once('=') else {
                return Err(ScenarioError::config(text, line_no, "expected `key = value`"));
            };
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(ScenarioError::config(key, line_no, "duplicate key"));
            }
            raw.insert(key, value.trim(), line_no)?;
        }
        Ok(raw)
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<(), ScenarioError> {
        if !KEYS.contains(&key) {
            return Err(ScenarioError::config(key, line, "unknown key"));
        }
        self.entries.insert(key.to_owned(), (value.to_owned(), line));
        Ok(())
    }

    /// Sets or replaces a key, as a command-line flag does.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ScenarioError> {
        let value = value.into();
        self.insert(key, &value, 0)
    }

    /// Layers `other` on top of `self`.
    pub fn merge(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    fn get<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ScenarioError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => parse(v).map(Some).map_err(|r| ScenarioError::config(key, *line, r)),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    pub fn build(&self) -> Result<ScenarioConfig, ScenarioError> {
        let scenario = self
            .get("scenario", |s| s.parse::<Case>())?
            .ok_or_else(|| ScenarioError::config("scenario", 0, "missing required key"))?;
        let mut cfg = ScenarioConfig::defaults(scenario);
        let p = &mut cfg.physical;
        if let Some(v) = self.get("mass", parse_number)? {
            p.mass = v;
        }
        if let Some(v) = self.get("coupling_eps", parse_number)? {
            p.coupling_eps = v;
        }
        if let Some(v) = self.get("wavelength", parse_number)? {
            p.wavelength = v;
            // positions default to the same fractions of the wavelength
            if !self.entries.contains_key("x0") {
                p.x0 = v / 10.0;
            }
            if !self.entries.contains_key("dx0") {
                p.dx0 = v / 50.0;
            }
        }
        if let Some(v) = self.get("x0", parse_number)? {
            p.x0 = v;
        }
        if let Some(v) = self.get("dx0", parse_number)? {
            p.dx0 = v;
        }
        if let Some(v) = self.get("t_max", parse_number)? {
            cfg.t_max = v;
        }
        if let Some(v) = self.get("n_samples", |s| s.parse::<usize>().map_err(|e| e.to_string()))? {
            cfg.n_samples = v;
        }
        if let Some(v) = self.get("gammas", parse_angle_list)? {
            cfg.gammas = v;
        }
        if let Some(&g) = cfg.gammas.first() {
            cfg.physical.gamma = g;
        }
        if let Some(v) = self.get("run_oracle", parse_bool)? {
            cfg.run_oracle = v;
        }
        if let Some(v) = self.get("zero_optical_phase", parse_bool)? {
            cfg.zero_optical_phase = v;
        }
        if let Some(v) = self.get("output_format", |s| s.parse::<OutputFormat>())? {
            cfg.output_format = v;
        }
        if let Some(v) = self.get("output_path", |s| Ok(s.to_owned()))? {
            cfg.output_path = if v.is_empty() || v == "-" { None } else { Some(PathBuf::from(v)) };
        }
        if let Some(v) = self.get("workers", |s| s.parse::<usize>().map_err(|e| e.to_string()))? {
            cfg.workers = v;
        }
        cfg.validate().map_err(|e| match e {
            ScenarioError::Config { key, reason, .. } => {
                let line = self.line_of(&key);
                ScenarioError::Config { key, line, reason }
            }
            other => other,
        })?;
        Ok(cfg)
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(source: &str) -> Result<ScenarioConfig, ScenarioError> {
    RawConfig::parse(source)?.build()
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

/// Radians, or `pi`, `pi/N`, `K*pi`, `K*pi/N`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let Some(pos) = s.find("pi") else {
        return parse_number(s);
    };
    let (head, tail) = (&s[..pos], &s[pos + 2..]);
    let factor = match head.trim().strip_suffix('*') {
        Some(k) => parse_number(k.trim())?,
        None if head.trim().is_empty() => 1.0,
        None => return Err(format!("cannot read angle `{s}`")),
    };
    let divisor = match tail.trim().strip_prefix('/') {
        Some(n) => parse_number(n.trim())?,
        None if tail.trim().is_empty() => 1.0,
        None => return Err(format!("cannot read angle `{s}`")),
    };
    Ok(factor * PI / divisor)
}

fn parse_angle_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_angle).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_reference_parameters() {
        let cfg = parse_config("scenario = phi\n").unwrap();
        assert_eq!(cfg.scenario, Case::Phi);
        assert_eq!(cfg.physical.with_gamma(0.0), PhysicalParams::reference(0.0));
        assert_eq!(cfg.t_max, 3e-3);
        assert_eq!(cfg.n_samples, 3000);
        assert_eq!(cfg.gammas.len(), 3);
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2*pi/12").unwrap(), 2.0 * PI / 12.0);
        assert_eq!(parse_angle("0.3").unwrap(), 0.3);
        assert!(parse_angle("pi4").is_err());
        assert!(parse_angle("x*pi").is_err());
    }

    #[test]
    fn errors_carry_key_and_line() {
        let err = parse_config("scenario = psi\n\ngammas = 0.5, 2.0\n").unwrap_err();
        match err {
            ScenarioError::Config { key, line, .. } => {
                assert_eq!(key, "gammas");
                assert_eq!(line, 3);
            }
            other => panic!("{other}"),
        }
        assert!(matches!(
            parse_config("scenario = psi\nfoo = 1\n"),
            Err(ScenarioError::Config { line: 2, .. })
        ));
        assert!(parse_config("gammas = 0.1\n").is_err());
        assert!(parse_config("scenario = psi\ngammas =\n").is_err());
        assert!(parse_config("scenario = psi\nn_samples = 1\n").is_err());
        assert!(parse_config("scenario = psi\nscenario = phi\n").is_err());
        assert!(parse_config("scenario = psi\nt_max = -1\n").is_err());
        assert!(parse_config("scenario = psi\ndx0 = 1e-3\n").is_err());
        assert!(parse_config("scenario = nope\n").is_err());
        assert!(parse_config("scenario psi\n").is_err());
    }

    #[test]
    fn comments_and_overrides() {
        let mut raw = RawConfig::parse("# header\nscenario = psi # trailing\nt_max = 1e-3\n").unwrap();
        raw.set("t_max", "2e-3").unwrap();
        raw.set("gammas", "pi/8").unwrap();
        let cfg = raw.build().unwrap();
        assert_eq!(cfg.t_max, 2e-3);
        assert_eq!(cfg.gammas, vec![PI / 8.0]);
        assert!(raw.set("bogus", "1").is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ScenarioConfig::defaults(Case::OneAtom);
        cfg.gammas = vec![0.1, 1.0, 1.5, std::f64::consts::FRAC_PI_2];
        cfg.physical.gamma = 0.1;
        cfg.physical.x0 = 1.234_567_890_123_456_7e-3;
        cfg.run_oracle = true;
        cfg.output_format = OutputFormat::Json;
        cfg.output_path = Some(PathBuf::from("out/run.json"));
        cfg.workers = 3;
        let back = parse_config(&cfg.to_config_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
