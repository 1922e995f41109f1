//! Plain-text `key = value` configuration.
//!
//! One entry per line; `#` starts a comment; blank lines are ignored. Keys
//! are flat dotted names such as `bath.beta`. Unknown keys, duplicates and
//! unparsable values are errors naming the offending key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{
    choose_truncation, BathSpec, ModelConfig, OscillatorSpec, QubitSpec, RampSchedule, ReadoutPartition,
    DEFAULT_TRUNCATION_EPS,
};
use crate::mpe::EngineCycleSpec;
use crate::operator::{Operator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Integer,
}

/// Every accepted key with its value kind.
const KEYS: &[(&str, Kind)] = &[
    ("qubit.omega_s", Kind::Real),
    ("qubit.p_e0", Kind::Real),
    ("qubit.coherence_re", Kind::Real),
    ("qubit.coherence_im", Kind::Real),
    ("oscillator.omega_c", Kind::Real),
    ("oscillator.n_max", Kind::Integer),
    ("bath.beta", Kind::Real),
    ("bath.kappa", Kind::Real),
    ("schedule.chi_max", Kind::Real),
    ("schedule.ramp_rate", Kind::Real),
    ("schedule.hold_time", Kind::Real),
    ("partition.n_s", Kind::Integer),
    ("mpe.w_meas", Kind::Real),
    ("mpe.q_meas", Kind::Real),
    ("mpe.q_bath", Kind::Real),
    ("mpe.w_extr", Kind::Real),
    ("mpe.t_meas", Kind::Real),
    ("mpe.t_bath", Kind::Real),
    ("mpe.j_s", Kind::Real),
    ("rotated.qx", Kind::Real),
    ("rotated.qy", Kind::Real),
    ("rotated.qz", Kind::Real),
    ("fuzz.cases", Kind::Integer),
    ("fuzz.seed", Kind::Integer),
];

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn config_error(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), reason: reason.into() }
}

/// Parsed key–value entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, f64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(line, format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let parsed = parse_value(key, value)?;
            if entries.insert(key.to_string(), parsed).is_some() {
                return Err(config_error(key, format!("line {}: duplicate key", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    /// Entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Override `key` with a numeric value; integer keys reject fractions.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let kind = kind_of(key).ok_or_else(|| config_error(key, "unknown key"))?;
        check_kind(key, kind, value)?;
        self.entries.insert(key.to_string(), value);
        Ok(())
    }

    pub fn is_known_key(key: &str) -> bool {
        kind_of(key).is_some()
    }

    pub fn is_integer_key(key: &str) -> bool {
        kind_of(key) == Some(Kind::Integer)
    }

    fn require(&self, key: &str) -> Result<f64> {
        self.get(key).ok_or_else(|| config_error(key, "missing required key"))
    }

    fn require_usize(&self, key: &str) -> Result<usize> {
        Ok(self.require(key)? as usize)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> usize {
        self.get(key).map_or(default, |v| v as usize)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> u64 {
        self.get(key).map_or(default, |v| v as u64)
    }

    /// Model configuration. `oscillator.n_max` defaults to the truncation
    /// whose thermal tail at the read coupling is below `1e-8`;
    /// `schedule.hold_time` and the coherence default to zero.
    pub fn model_config(&self) -> Result<ModelConfig> {
        let qubit = QubitSpec {
            omega_s: self.require("qubit.omega_s")?,
            p_e0: self.require("qubit.p_e0")?,
            coherence: C64::new(
                self.get("qubit.coherence_re").unwrap_or(0.0),
                self.get("qubit.coherence_im").unwrap_or(0.0),
            ),
        };
        let bath = BathSpec { beta: self.require("bath.beta")?, kappa: self.require("bath.kappa")? };
        let schedule = RampSchedule {
            chi_max: self.require("schedule.chi_max")?,
            ramp_rate: self.require("schedule.ramp_rate")?,
            hold_time: self.get("schedule.hold_time").unwrap_or(0.0),
        };
        let omega_c = self.require("oscillator.omega_c")?;
        let n_max = match self.get("oscillator.n_max") {
            Some(n) => n as usize,
            None => {
                bath.validate().map_err(|e| config_error("bath", e.to_string()))?;
                choose_truncation(&bath, omega_c - schedule.chi_max, DEFAULT_TRUNCATION_EPS)
                    .map_err(|e| config_error("oscillator.n_max", format!("cannot choose a truncation: {e}")))?
            }
        };
        let partition = ReadoutPartition::two_outcome(self.require_usize("partition.n_s")?);
        let cfg = ModelConfig { qubit, oscillator: OscillatorSpec { omega_c, n_max }, bath, schedule, partition };
        validate_with_keys(&cfg)?;
        Ok(cfg)
    }

    pub fn mpe_spec(&self) -> Result<EngineCycleSpec> {
        let spec = EngineCycleSpec {
            w_meas: self.require("mpe.w_meas")?,
            q_meas: self.require("mpe.q_meas")?,
            q_bath: self.require("mpe.q_bath")?,
            w_extr: self.require("mpe.w_extr")?,
            t_meas: self.require("mpe.t_meas")?,
            t_bath: self.require("mpe.t_bath")?,
            j_s: self.require("mpe.j_s")?,
        };
        for key in ["mpe.t_meas", "mpe.t_bath"] {
            if !(self.require(key)? > 0.0) {
                return Err(config_error(key, "temperature must be positive"));
            }
        }
        Ok(spec)
    }

    /// Observable `q_x σ_x + q_y σ_y + q_z σ_z` (default `σ_x`).
    pub fn rotated_observable(&self) -> Result<Operator> {
        let (x, y, z) = match (self.get("rotated.qx"), self.get("rotated.qy"), self.get("rotated.qz")) {
            (None, None, None) => (1.0, 0.0, 0.0),
            (x, y, z) => (x.unwrap_or(0.0), y.unwrap_or(0.0), z.unwrap_or(0.0)),
        };
        Operator::from_rows(&[&[C64::new(z, 0.0), C64::new(x, -y)], &[C64::new(x, y), C64::new(-z, 0.0)]])
    }
}

fn parse_value(key: &str, value: &str) -> Result<f64> {
    let kind = kind_of(key).ok_or_else(|| config_error(key, "unknown key"))?;
    let v: f64 = value.parse().map_err(|_| config_error(key, format!("cannot parse `{value}` as a number")))?;
    check_kind(key, kind, v)?;
    Ok(v)
}

fn check_kind(key: &str, kind: Kind, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(config_error(key, "value must be finite"));
    }
    if kind == Kind::Integer && (v < 0.0 || v.fract() != 0.0) {
        return Err(config_error(key, format!("expected a non-negative integer, got {v}")));
    }
    Ok(())
}

/// Validation errors mapped onto the config key that caused them.
fn validate_with_keys(cfg: &ModelConfig) -> Result<()> {
    let checks: [(&str, Result<()>); 5] = [
        ("qubit", cfg.qubit.validate()),
        ("oscillator", cfg.oscillator.validate()),
        ("bath", cfg.bath.validate()),
        ("schedule", cfg.schedule.validate()),
        ("partition.n_s", cfg.partition.validate(cfg.oscillator.n_max)),
    ];
    for (key, res) in checks {
        if let Err(e) = res {
            let reason = e.to_string();
            // messages name the precise key when they know it
            let precise = KEYS.iter().map(|(k, _)| *k).find(|k| reason.contains(k)).unwrap_or(key);
            return Err(config_error(precise, reason));
        }
    }
    Ok(())
}

/// Serialize a model configuration in the key–value format.
pub fn to_text(cfg: &ModelConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("qubit.omega_s", format!("{:?}", cfg.qubit.omega_s));
    put("qubit.p_e0", format!("{:?}", cfg.qubit.p_e0));
    put("qubit.coherence_re", format!("{:?}", cfg.qubit.coherence.re));
    put("qubit.coherence_im", format!("{:?}", cfg.qubit.coherence.im));
    put("oscillator.omega_c", format!("{:?}", cfg.oscillator.omega_c));
    put("oscillator.n_max", cfg.oscillator.n_max.to_string());
    put("bath.beta", format!("{:?}", cfg.bath.beta));
    put("bath.kappa", format!("{:?}", cfg.bath.kappa));
    put("schedule.chi_max", format!("{:?}", cfg.schedule.chi_max));
    put("schedule.ramp_rate", format!("{:?}", cfg.schedule.ramp_rate));
    put("schedule.hold_time", format!("{:?}", cfg.schedule.hold_time));
    if let Some(n_s) = cfg.partition.threshold() {
        put("partition.n_s", n_s.to_string());
    }
    s
}
