//! Calibration-style noise profiles loaded from TOML.
//!
//! ```toml
//! name = "kyiv-like"
//! two_qubit_error = 0.008
//! readout_error = [[0.015, 0.010], [0.020, 0.012]]   # per qubit: [p10, p01]
//! t1_us = [260.0, 240.0]                              # optional
//! t2_us = [140.0, 150.0]                              # optional
//!
//! [single_qubit_error]   # depolarizing probability per gate kind
//! h = 0.0003
//!
//! [gate_time_ns]         # optional, per gate kind
//! h = 50.0
//! cx = 560.0
//! ```
//!
//! `p10` is the probability of reading 0 when the qubit is 1, `p01` the
//! probability of reading 1 when it is 0. Gate kinds are `h`, `x`, `ry`, `u`
//! (single-qubit) and `cx`, `cry` (two-qubit). Qubits not covered by a
//! per-qubit array, and gate kinds absent from a map, get no noise.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{amplitude_damping, damping_from_lifetimes, depolarizing, depolarizing_two_qubit, dephasing, KrausChannel};
use crate::circuit::{Gate, GateKind};
use crate::error::{FieldIssue, QsgError, Result};

/// The profile that ships with the repository. Its numbers are illustrative
/// values of the magnitude seen on current superconducting devices, not a
/// snapshot of any particular backend.
pub const KYIV_LIKE_PROFILE: &str = include_str!("../../profiles/kyiv-like.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    name: String,
    single_qubit_error: BTreeMap<String, f64>,
    two_qubit_error: f64,
    readout_error: Vec<[f64; 2]>,
    t1_us: Option<Vec<f64>>,
    t2_us: Option<Vec<f64>>,
    #[serde(default)]
    gate_time_ns: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutError {
    /// P(read 0 | qubit is 1).
    pub p10: f64,
    /// P(read 1 | qubit is 0).
    pub p01: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub name: String,
    pub single_qubit_error: BTreeMap<GateKind, f64>,
    pub two_qubit_error: f64,
    pub readout_error: Vec<ReadoutError>,
    pub t1_us: Option<Vec<f64>>,
    pub t2_us: Option<Vec<f64>>,
    pub gate_time_ns: BTreeMap<GateKind, f64>,
}

/// Which parts of a profile are active during execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareEffects {
    pub gate_error: bool,
    pub relaxation: bool,
    pub readout: bool,
}

impl Default for HardwareEffects {
    fn default() -> Self {
        Self {
            gate_error: true,
            relaxation: true,
            readout: true,
        }
    }
}

fn check_probability(issues: &mut Vec<FieldIssue>, path: String, value: f64) {
    if !(0.0..=1.0).contains(&value) {
        issues.push(FieldIssue::new(path, format!("probability {value} is outside [0, 1]")));
    }
}

fn check_lifetimes(issues: &mut Vec<FieldIssue>, key: &str, values: &[f64]) {
    for (q, &v) in values.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            issues.push(FieldIssue::new(format!("{key}[{q}]"), format!("lifetime {v} must be positive")));
        }
    }
}

impl NoiseProfile {
    /// A profile with no effect at all.
    pub fn noiseless(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            single_qubit_error: BTreeMap::new(),
            two_qubit_error: 0.0,
            readout_error: Vec::new(),
            t1_us: None,
            t2_us: None,
            gate_time_ns: BTreeMap::new(),
        }
    }

    pub fn kyiv_like() -> Self {
        load_noise_profile(KYIV_LIKE_PROFILE).expect("bundled profile is valid")
    }

    /// Every invariant violation, with field paths.
    pub fn validate(&self) -> Vec<FieldIssue> {
        let mut issues = Vec::new();
        for (kind, &p) in &self.single_qubit_error {
            if kind.arity() != 1 {
                issues.push(FieldIssue::new(
                    format!("single_qubit_error.{}", kind.key()),
                    "not a single-qubit gate kind",
                ));
            }
            check_probability(&mut issues, format!("single_qubit_error.{}", kind.key()), p);
        }
        check_probability(&mut issues, "two_qubit_error".into(), self.two_qubit_error);
        for (q, r) in self.readout_error.iter().enumerate() {
            check_probability(&mut issues, format!("readout_error[{q}][0]"), r.p10);
            check_probability(&mut issues, format!("readout_error[{q}][1]"), r.p01);
        }
        if let Some(t1) = &self.t1_us {
            check_lifetimes(&mut issues, "t1_us", t1);
        }
        if let Some(t2) = &self.t2_us {
            check_lifetimes(&mut issues, "t2_us", t2);
        }
        if let (Some(t1), Some(t2)) = (&self.t1_us, &self.t2_us) {
            if t1.len() != t2.len() {
                issues.push(FieldIssue::new(
                    "t2_us",
                    format!("has {} entries but t1_us has {}", t2.len(), t1.len()),
                ));
            }
            for (q, (&a, &b)) in t1.iter().zip(t2).enumerate() {
                if b > 2.0 * a {
                    issues.push(FieldIssue::new(
                        format!("t2_us[{q}]"),
                        format!("t2 = {b} exceeds 2·t1 = {}", 2.0 * a),
                    ));
                }
            }
        }
        for (kind, &t) in &self.gate_time_ns {
            if !(t >= 0.0) || !t.is_finite() {
                issues.push(FieldIssue::new(
                    format!("gate_time_ns.{}", kind.key()),
                    format!("duration {t} must be nonnegative"),
                ));
            }
        }
        issues
    }

    /// Channels applied after `gate`: gate error first, then relaxation on
    /// each of the gate's qubits.
    pub(crate) fn channels_after(
        &self,
        gate: &Gate,
        effects: &HardwareEffects,
    ) -> Result<Vec<(KrausChannel, Vec<usize>)>> {
        let kind = gate.kind();
        let qubits = gate.qubits();
        let mut out = Vec::new();
        if effects.gate_error {
            if kind.arity() == 1 {
                let p = self.single_qubit_error.get(&kind).copied().unwrap_or(0.0);
                if p > 0.0 {
                    out.push((depolarizing(p)?, qubits.clone()));
                }
            } else if self.two_qubit_error > 0.0 {
                out.push((depolarizing_two_qubit(self.two_qubit_error)?, qubits.clone()));
            }
        }
        let duration = self.gate_time_ns.get(&kind).copied().unwrap_or(0.0);
        if effects.relaxation && duration > 0.0 {
            for &q in &qubits {
                let t1 = self.t1_us.as_ref().and_then(|v| v.get(q)).copied();
                let t2 = self.t2_us.as_ref().and_then(|v| v.get(q)).copied();
                let (gamma, lambda) = match (t1, t2) {
                    (Some(t1), Some(t2)) => damping_from_lifetimes(t1, t2, duration)?,
                    // T2 = 2·T1: pure energy relaxation.
                    (Some(t1), None) => damping_from_lifetimes(t1, 2.0 * t1, duration)?,
                    // T1 → ∞: pure dephasing at rate 1/T2.
                    (None, Some(t2)) => (0.0, -(-(duration * 1e-3) / t2).exp_m1()),
                    (None, None) => (0.0, 0.0),
                };
                if gamma > 0.0 {
                    out.push((amplitude_damping(gamma)?, vec![q]));
                }
                if lambda > 0.0 {
                    out.push((dephasing(lambda)?, vec![q]));
                }
            }
        }
        Ok(out)
    }
}

fn parse_kind_map(
    issues: &mut Vec<FieldIssue>,
    section: &str,
    raw: BTreeMap<String, f64>,
) -> BTreeMap<GateKind, f64> {
    let mut out = BTreeMap::new();
    for (key, value) in raw {
        match key.parse::<GateKind>() {
            Ok(kind) => {
                out.insert(kind, value);
            }
            Err(_) => issues.push(FieldIssue::new(
                format!("{section}.{key}"),
                "unknown gate kind (expected h, x, ry, u, cx or cry)",
            )),
        }
    }
    out
}

/// Parses and validates a profile document.
pub fn load_noise_profile(source: &str) -> Result<NoiseProfile> {
    let de = toml::Deserializer::parse(source).map_err(|e| QsgError::Schema(vec![FieldIssue::new("", e.to_string())]))?;
    let doc: ProfileDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        QsgError::Schema(vec![FieldIssue::new(path, e.into_inner().message().trim().to_string())])
    })?;

    let mut issues = Vec::new();
    let single_qubit_error = parse_kind_map(&mut issues, "single_qubit_error", doc.single_qubit_error);
    let gate_time_ns = parse_kind_map(&mut issues, "gate_time_ns", doc.gate_time_ns);
    let profile = NoiseProfile {
        name: doc.name,
        single_qubit_error,
        two_qubit_error: doc.two_qubit_error,
        readout_error: doc
            .readout_error
            .into_iter()
            .map(|[p10, p01]| ReadoutError { p10, p01 })
            .collect(),
        t1_us: doc.t1_us,
        t2_us: doc.t2_us,
        gate_time_ns,
    };
    issues.extend(profile.validate());
    if issues.is_empty() {
        Ok(profile)
    } else {
        Err(QsgError::Schema(issues))
    }
}

pub fn load_noise_profile_file(path: &Path) -> Result<NoiseProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| QsgError::io(path, e))?;
    load_noise_profile(&text)
}
