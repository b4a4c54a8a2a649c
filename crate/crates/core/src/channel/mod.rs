//! CPTP noise channels in Kraus form, the sabotage operator, and the
//! gate-level noise models consumed by circuit execution.

mod profile;

use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::error::{check_range, QsgError, Result};
use crate::qstate::{c, max_deviation_from_identity, unitarity_deviation, Matrix, MixedState, ALGEBRAIC_TOL};

pub use profile::{
    load_noise_profile, load_noise_profile_file, HardwareEffects, NoiseProfile, ReadoutError, KYIV_LIKE_PROFILE,
};

fn pauli_i() -> Matrix {
    Matrix::identity(2, 2)
}

fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

fn scaled(m: Matrix, factor: f64) -> Matrix {
    m * c(factor, 0.0)
}

/// A completely positive map `ρ ↦ Σ_k E_k ρ E_k†` on `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    n_qubits: usize,
    operators: Vec<Matrix>,
}

/// Outcome of [`verify_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub is_cptp: bool,
    /// Max-norm distance of `Σ E_k†E_k` from the identity.
    pub deviation: f64,
}

impl KrausChannel {
    /// Builds a channel and checks trace preservation within 1e-10.
    pub fn new(operators: Vec<Matrix>) -> Result<Self> {
        let channel = Self::from_operators(operators)?;
        let report = verify_cptp(&channel);
        if !report.is_cptp {
            return Err(QsgError::InvalidChannel(format!(
                "Σ E†E deviates from I by {:e}",
                report.deviation
            )));
        }
        Ok(channel)
    }

    /// Shape checks only; use [`verify_cptp`] to test trace preservation.
    pub fn from_operators(operators: Vec<Matrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| QsgError::InvalidChannel("a channel needs at least one operator".into()))?;
        let dim = first.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QsgError::InvalidChannel(format!("operator size {dim} is not a power of two")));
        }
        for op in &operators {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(QsgError::DimensionMismatch {
                    expected: dim,
                    actual: op.nrows().max(op.ncols()),
                });
            }
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            operators,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            operators: vec![Matrix::identity(dim, dim)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn operators(&self) -> &[Matrix] {
        &self.operators
    }

    pub fn apply(&self, rho: &MixedState, targets: &[usize]) -> Result<MixedState> {
        if targets.len() != self.n_qubits {
            return Err(QsgError::DimensionMismatch {
                expected: self.n_qubits,
                actual: targets.len(),
            });
        }
        rho.apply_kraus(&self.operators, targets)
    }
}

pub fn verify_cptp(channel: &KrausChannel) -> CptpReport {
    let dim = channel.dimension();
    let mut sum = Matrix::zeros(dim, dim);
    for op in &channel.operators {
        sum += op.adjoint() * op;
    }
    let deviation = max_deviation_from_identity(&sum);
    CptpReport {
        is_cptp: deviation < ALGEBRAIC_TOL,
        deviation,
    }
}

/// `(1-p)ρ + (p/3)(XρX + YρY + ZρZ)`.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    check_range("p", p, 0.0, 1.0)?;
    Ok(KrausChannel {
        n_qubits: 1,
        operators: vec![
            scaled(pauli_i(), (1.0 - p).sqrt()),
            scaled(pauli_x(), (p / 3.0).sqrt()),
            scaled(pauli_y(), (p / 3.0).sqrt()),
            scaled(pauli_z(), (p / 3.0).sqrt()),
        ],
    })
}

/// Two-qubit depolarizing: `(1-p)ρ + (p/15) Σ PρP` over the 15 non-identity
/// Pauli pairs.
pub fn depolarizing_two_qubit(p: f64) -> Result<KrausChannel> {
    check_range("p", p, 0.0, 1.0)?;
    let paulis = [pauli_i(), pauli_x(), pauli_y(), pauli_z()];
    let mut operators = Vec::with_capacity(16);
    for (i, hi) in paulis.iter().enumerate() {
        for (j, lo) in paulis.iter().enumerate() {
            let weight = if i == 0 && j == 0 { 1.0 - p } else { p / 15.0 };
            operators.push(scaled(hi.kronecker(lo), weight.sqrt()));
        }
    }
    Ok(KrausChannel {
        n_qubits: 2,
        operators,
    })
}

/// `E0 = [[1,0],[0,√(1-γ)]]`, `E1 = [[0,√γ],[0,0]]`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let e0 = Matrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)]);
    let e1 = Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    Ok(KrausChannel {
        n_qubits: 1,
        operators: vec![e0, e1],
    })
}

/// `(1-p)ρ + pXρX`.
pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    check_range("p", p, 0.0, 1.0)?;
    Ok(KrausChannel {
        n_qubits: 1,
        operators: vec![scaled(pauli_i(), (1.0 - p).sqrt()), scaled(pauli_x(), p.sqrt())],
    })
}

/// Pure dephasing that multiplies the off-diagonal of a qubit by `1 - λ`
/// (a Z flip with probability `λ/2`).
pub fn dephasing(lambda: f64) -> Result<KrausChannel> {
    check_range("lambda", lambda, 0.0, 1.0)?;
    Ok(KrausChannel {
        n_qubits: 1,
        operators: vec![
            scaled(pauli_i(), (1.0 - lambda / 2.0).sqrt()),
            scaled(pauli_z(), (lambda / 2.0).sqrt()),
        ],
    })
}

/// Per-gate damping strengths from coherence times.
///
/// `γ = 1 - exp(-t/T1)` and `λ = 1 - exp(-t·(1/T2 - 1/(2·T1)))`, with `t` the
/// gate duration. Lifetimes are in microseconds, the gate time in
/// nanoseconds. Applying [`amplitude_damping`]`(γ)` then [`dephasing`]`(λ)`
/// decays coherences by `exp(-t/T2)` overall.
pub fn damping_from_lifetimes(t1_us: f64, t2_us: f64, gate_time_ns: f64) -> Result<(f64, f64)> {
    if !(t1_us > 0.0) || !(t2_us > 0.0) {
        return Err(QsgError::InvalidArgument(format!(
            "lifetimes must be positive (t1 = {t1_us}, t2 = {t2_us})"
        )));
    }
    if !(gate_time_ns >= 0.0) || !gate_time_ns.is_finite() {
        return Err(QsgError::InvalidArgument(format!("gate time {gate_time_ns} ns is invalid")));
    }
    if t2_us > 2.0 * t1_us * (1.0 + 1e-12) {
        return Err(QsgError::InvalidArgument(format!(
            "t2 = {t2_us} µs exceeds 2·t1 = {} µs",
            2.0 * t1_us
        )));
    }
    let t = gate_time_ns * 1e-3;
    let gamma = -(-t / t1_us).exp_m1();
    let rate = (1.0 / t2_us - 1.0 / (2.0 * t1_us)).max(0.0);
    let dephase = -(-t * rate).exp_m1();
    Ok((gamma.clamp(0.0, 1.0), dephase.clamp(0.0, 1.0)))
}

/// The sabotage operator: either a coherent unitary or a noisy mixture
/// `(1-p)ρ + p·N(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SabotageOp {
    Unitary(Matrix),
    Mixture { p: f64, base: KrausChannel },
}

impl SabotageOp {
    pub fn unitary(u: Matrix) -> Result<Self> {
        let deviation = unitarity_deviation(&u);
        if !(deviation < ALGEBRAIC_TOL) {
            return Err(QsgError::InvalidSabotage(format!(
                "unitary mode needs a unitary matrix (deviation {deviation:e})"
            )));
        }
        Ok(SabotageOp::Unitary(u))
    }

    pub fn mixture(p: f64, base: KrausChannel) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QsgError::InvalidSabotage(format!("mixture weight p = {p} outside [0, 1]")));
        }
        if !verify_cptp(&base).is_cptp {
            return Err(QsgError::InvalidSabotage("mixture base is not trace preserving".into()));
        }
        Ok(SabotageOp::Mixture { p, base })
    }

    /// Single-qubit rotation `exp(-iθX/2)`.
    pub fn rotation_x(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        SabotageOp::Unitary(Matrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]))
    }

    /// Single-qubit rotation `exp(-iθZ/2)`.
    pub fn rotation_z(theta: f64) -> Self {
        let (s, co) = (theta / 2.0).sin_cos();
        SabotageOp::Unitary(Matrix::from_row_slice(2, 2, &[c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)]))
    }

    fn arity(&self) -> usize {
        match self {
            SabotageOp::Unitary(u) => u.nrows().trailing_zeros() as usize,
            SabotageOp::Mixture { base, .. } => base.n_qubits(),
        }
    }
}

/// Applies the sabotage operator. A one-qubit operator given several targets
/// acts on each of them in turn; otherwise the operator's arity must match.
pub fn sabotage_apply(op: &SabotageOp, rho: &MixedState, targets: &[usize]) -> Result<MixedState> {
    let arity = op.arity();
    let groups: Vec<&[usize]> = if arity == 1 {
        targets.chunks(1).collect()
    } else if arity == targets.len() {
        vec![targets]
    } else {
        return Err(QsgError::InvalidSabotage(format!(
            "{arity}-qubit operator cannot act on {} targets",
            targets.len()
        )));
    };
    let mut state = rho.clone();
    for group in groups {
        state = match op {
            SabotageOp::Unitary(u) => state.apply_unitary(u, group)?,
            SabotageOp::Mixture { p, base } => {
                let noisy = base.apply(&state, group)?;
                state.mix(&noisy, *p)
            }
        };
    }
    Ok(state)
}

/// The three standard single-qubit channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StandardNoise {
    Depolarizing,
    #[serde(alias = "amplitude_damping")]
    Amplitude,
    #[serde(alias = "bit_flip")]
    Bitflip,
}

impl StandardNoise {
    pub fn channel(self, rate: f64) -> Result<KrausChannel> {
        match self {
            StandardNoise::Depolarizing => depolarizing(rate),
            StandardNoise::Amplitude => amplitude_damping(rate),
            StandardNoise::Bitflip => bit_flip(rate),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StandardNoise::Depolarizing => "depolarizing",
            StandardNoise::Amplitude => "amplitude",
            StandardNoise::Bitflip => "bitflip",
        }
    }
}

impl std::str::FromStr for StandardNoise {
    type Err = QsgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(StandardNoise::Depolarizing),
            "amplitude" | "amplitude_damping" => Ok(StandardNoise::Amplitude),
            "bitflip" | "bit_flip" => Ok(StandardNoise::Bitflip),
            other => Err(QsgError::InvalidArgument(format!(
                "unknown noise kind {other:?} (expected depolarizing, amplitude or bitflip)"
            ))),
        }
    }
}

/// Noise injected after every gate of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Channels applied in order after each gate. A one-qubit channel acts on
    /// every qubit the gate touches; a `k`-qubit channel acts on the gate's
    /// qubits jointly and requires a `k`-qubit gate.
    PerGate(Vec<KrausChannel>),
    /// Calibration-style description; `effects` selects which parts apply.
    Hardware {
        profile: NoiseProfile,
        effects: HardwareEffects,
    },
}

impl NoiseModel {
    pub fn standard(kind: StandardNoise, rate: f64) -> Result<Self> {
        Ok(NoiseModel::PerGate(vec![kind.channel(rate)?]))
    }

    pub fn hardware(profile: NoiseProfile, effects: HardwareEffects) -> Self {
        NoiseModel::Hardware { profile, effects }
    }

    /// The channel applications that follow `gate`, in order.
    pub fn after_gate(&self, gate: &Gate) -> Result<Vec<(KrausChannel, Vec<usize>)>> {
        let qubits = gate.qubits();
        match self {
            NoiseModel::PerGate(channels) => {
                let mut out = Vec::new();
                for channel in channels {
                    if channel.n_qubits() == 1 {
                        out.extend(qubits.iter().map(|&q| (channel.clone(), vec![q])));
                    } else if channel.n_qubits() == qubits.len() {
                        out.push((channel.clone(), qubits.clone()));
                    } else {
                        return Err(QsgError::DimensionMismatch {
                            expected: 1 << qubits.len(),
                            actual: channel.dimension(),
                        });
                    }
                }
                Ok(out)
            }
            NoiseModel::Hardware { profile, effects } => profile.channels_after(gate, effects),
        }
    }

    /// Per-qubit `(p10, p01)` readout flips, empty when readout is perfect.
    pub fn readout(&self) -> Vec<(f64, f64)> {
        match self {
            NoiseModel::PerGate(_) => Vec::new(),
            NoiseModel::Hardware { profile, effects } if effects.readout => {
                profile.readout_error.iter().map(|r| (r.p10, r.p01)).collect()
            }
            NoiseModel::Hardware { .. } => Vec::new(),
        }
    }
}
