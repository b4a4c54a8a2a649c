//! Gates, circuits, Bell/W preparation and shot-based execution.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::channel::NoiseModel;
use crate::error::{QsgError, Result};
use crate::qstate::{
    c, check_register, check_targets, Bitstring, Matrix, MixedState, ProbabilityTable, PureState, SeededRng,
};

/// Shots per execution when none are configured.
pub const DEFAULT_SHOTS: usize = 1024;

/// The SU(2) strategy unitary
///
/// ```text
/// U(θ, φ) = [[ cos(θ/2),          -e^{iφ} sin(θ/2) ],
///            [ e^{-iφ} sin(θ/2),   cos(θ/2)        ]]
/// ```
///
/// `φ` is wrapped into `[0, 2π)` and `θ` into `[0, 2π]`.
pub fn su2_matrix(theta: f64, phi: f64) -> Matrix {
    let theta = if (0.0..=TAU).contains(&theta) { theta } else { theta.rem_euclid(TAU) };
    let phi = phi.rem_euclid(TAU);
    let (s, co) = (theta / 2.0).sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix::from_row_slice(
        2,
        2,
        &[c(co, 0.0), c(-cp * s, -sp * s), c(cp * s, -sp * s), c(co, 0.0)],
    )
}

fn ry_matrix(theta: f64) -> Matrix {
    su2_matrix(theta, 0.0)
}

fn hadamard_matrix() -> Matrix {
    let h = FRAC_1_SQRT_2;
    Matrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

fn x_matrix() -> Matrix {
    Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Controlled single-qubit operator on targets `[control, target]`: local
/// index bit 0 is the control.
fn controlled(u: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(2, 2)] = c(1.0, 0.0);
    for (r, lr) in [(0usize, 1usize), (1, 3)] {
        for (col, lc) in [(0usize, 1usize), (1, 3)] {
            m[(lr, lc)] = u[(r, col)];
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    X,
    Ry,
    U,
    Cx,
    Cry,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [GateKind::H, GateKind::X, GateKind::Ry, GateKind::U, GateKind::Cx, GateKind::Cry];

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Ry | GateKind::U => 1,
            GateKind::Cx | GateKind::Cry => 2,
        }
    }

    /// Lowercase key used in profile documents.
    pub fn key(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Ry => "ry",
            GateKind::U => "u",
            GateKind::Cx => "cx",
            GateKind::Cry => "cry",
        }
    }
}

impl FromStr for GateKind {
    type Err = QsgError;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| QsgError::InvalidArgument(format!("unknown gate kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry { theta: f64, qubit: usize },
    U { theta: f64, phi: f64, qubit: usize },
    Cx { control: usize, target: usize },
    Cry { theta: f64, control: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::U { .. } => GateKind::U,
            Gate::Cx { .. } => GateKind::Cx,
            Gate::Cry { .. } => GateKind::Cry,
        }
    }

    /// Qubits in the order the gate matrix expects them.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) => vec![q],
            Gate::Ry { qubit, .. } | Gate::U { qubit, .. } => vec![qubit],
            Gate::Cx { control, target } | Gate::Cry { control, target, .. } => vec![control, target],
        }
    }

    pub fn matrix(&self) -> Matrix {
        match *self {
            Gate::H(_) => hadamard_matrix(),
            Gate::X(_) => x_matrix(),
            Gate::Ry { theta, .. } => ry_matrix(theta),
            Gate::U { theta, phi, .. } => su2_matrix(theta, phi),
            Gate::Cx { .. } => controlled(&x_matrix()),
            Gate::Cry { theta, .. } => controlled(&ry_matrix(theta)),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let angle = |name: &'static str, v: f64, max: f64, inclusive: bool| {
            let ok = v.is_finite() && v >= 0.0 && if inclusive { v <= max } else { v < max };
            if ok {
                Ok(())
            } else {
                Err(QsgError::out_of_range(name, v, 0.0, max))
            }
        };
        match *self {
            Gate::Ry { theta, .. } | Gate::Cry { theta, .. } => angle("theta", theta, TAU, true)?,
            Gate::U { theta, phi, .. } => {
                angle("theta", theta, TAU, true)?;
                angle("phi", phi, TAU, false)?;
            }
            _ => {}
        }
        check_targets(&self.qubits(), n_qubits)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "h q{q}"),
            Gate::X(q) => write!(f, "x q{q}"),
            Gate::Ry { theta, qubit } => write!(f, "ry({theta:.6}) q{qubit}"),
            Gate::U { theta, phi, qubit } => write!(f, "u({theta:.6}, {phi:.6}) q{qubit}"),
            Gate::Cx { control, target } => write!(f, "cx q{control}, q{target}"),
            Gate::Cry { theta, control, target } => write!(f, "cry({theta:.6}) q{control}, q{target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Noiseless statevector evolution from `|0…0⟩`.
    pub fn final_state(&self) -> PureState {
        let mut state = PureState::zero(self.n_qubits).expect("register size checked at construction");
        for gate in &self.gates {
            state = state.apply_unchecked(&gate.matrix(), &gate.qubits());
        }
        state
    }

    /// Density-matrix evolution from `|0…0⟩`, each gate followed by the
    /// noise model's channels on that gate's qubits.
    pub fn final_density(&self, noise: Option<&NoiseModel>) -> Result<MixedState> {
        let mut rho = PureState::zero(self.n_qubits)?.to_density();
        for gate in &self.gates {
            rho = rho.conjugate_unchecked(&gate.matrix(), &gate.qubits());
            if let Some(model) = noise {
                for (channel, targets) in model.after_gate(gate)? {
                    rho = channel.apply(&rho, &targets)?;
                }
            }
        }
        Ok(rho)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// H on qubit 0, then CX 0 → 1.
pub fn bell_circuit() -> Circuit {
    let mut circuit = Circuit::new(2).expect("2 qubits");
    circuit.push(Gate::H(0)).expect("valid gate");
    circuit.push(Gate::Cx { control: 0, target: 1 }).expect("valid gate");
    circuit
}

/// Rotation angles of the W cascade: `θ_i = 2·arccos(1/√(n-i))` for
/// `i = 0..n-1`. For `n = 3` these are ≈ 1.9106 and π/2.
pub fn w_cascade_angles(n: usize) -> Vec<f64> {
    (0..n.saturating_sub(1))
        .map(|i| 2.0 * (1.0 / ((n - i) as f64).sqrt()).acos())
        .collect()
}

/// Deterministic `|W_n⟩` preparation.
///
/// X on qubit 0 puts the single excitation there. Step `i` applies
/// `CRY(θ_i)` controlled by qubit `i` onto qubit `i+1`, then `CX` from qubit
/// `i+1` back onto qubit `i`; this leaves amplitude `1/√n` on qubit `i` and
/// hands the rest of the excitation to qubit `i+1`.
pub fn w_state_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(QsgError::InvalidArgument(format!("W state needs n ≥ 2, got {n}")));
    }
    let mut circuit = Circuit::new(n)?;
    circuit.push(Gate::X(0))?;
    for (i, theta) in w_cascade_angles(n).into_iter().enumerate() {
        circuit.push(Gate::Cry {
            theta,
            control: i,
            target: i + 1,
        })?;
        circuit.push(Gate::Cx {
            control: i + 1,
            target: i,
        })?;
    }
    Ok(circuit)
}

/// Per-shot measurement memory, in sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    memory: Vec<Bitstring>,
}

impl ShotRecord {
    pub fn shots(&self) -> usize {
        self.memory.len()
    }

    pub fn memory(&self) -> &[Bitstring] {
        &self.memory
    }

    /// Counts per outcome, indexed by basis index.
    pub fn counts(&self) -> Vec<usize> {
        let n = self.memory.first().map_or(1, Bitstring::n_qubits);
        let mut counts = vec![0; 1 << n];
        for b in &self.memory {
            counts[b.index()] += 1;
        }
        counts
    }
}

/// A circuit whose final outcome law has been computed once, ready for
/// repeated sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCircuit {
    n_qubits: usize,
    /// Outcome law before readout error.
    table: ProbabilityTable,
    readout: Vec<(f64, f64)>,
}

impl PreparedCircuit {
    pub fn new(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<Self> {
        let table = match noise {
            None => circuit.final_state().probabilities(),
            Some(model) => circuit.final_density(Some(model))?.probabilities(),
        };
        let readout = noise.map(NoiseModel::readout).unwrap_or_default();
        Ok(Self {
            n_qubits: circuit.n_qubits(),
            table,
            readout,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Exact distribution of reported outcomes, readout error included.
    pub fn outcome_table(&self) -> ProbabilityTable {
        if self.readout.is_empty() {
            self.table.clone()
        } else {
            self.table.with_readout_error(&self.readout)
        }
    }

    /// One shot: sample the final state, then flip each bit independently
    /// according to the readout error.
    pub fn sample_shot(&self, rng: &mut SeededRng) -> Bitstring {
        let mut bits = self.table.sample(rng);
        for (q, &(p10, p01)) in self.readout.iter().enumerate().take(self.n_qubits) {
            let p = if bits.bit(q) { p10 } else { p01 };
            if p > 0.0 && rng.bernoulli(p) {
                bits = bits.with_flipped(q);
            }
        }
        bits
    }

    pub fn run(&self, shots: usize, rng: &mut SeededRng) -> Result<ShotRecord> {
        if shots == 0 {
            return Err(QsgError::InvalidArgument("shots must be ≥ 1".into()));
        }
        Ok(ShotRecord {
            memory: (0..shots).map(|_| self.sample_shot(rng)).collect(),
        })
    }
}

/// Executes `circuit` for `shots` shots. Without noise the exact final
/// statevector distribution is sampled; with noise the density matrix is
/// evolved gate by gate and its diagonal sampled, with readout flips applied
/// per shot.
pub fn execute(circuit: &Circuit, noise: Option<&NoiseModel>, shots: usize, rng: &mut SeededRng) -> Result<ShotRecord> {
    PreparedCircuit::new(circuit, noise)?.run(shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bit_flip, depolarizing, load_noise_profile, HardwareEffects, KrausChannel, NoiseProfile};
    use crate::qstate::unitarity_deviation;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn assert_matrix_eq(m: &Matrix, expected: &[[f64; 2]; 2]) {
        for r in 0..2 {
            for col in 0..2 {
                assert_abs_diff_eq!(m[(r, col)].re, expected[r][col], epsilon = 1e-15);
                assert_abs_diff_eq!(m[(r, col)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn su2_examples() {
        assert_matrix_eq(&su2_matrix(0.0, 1.234), &[[1.0, 0.0], [0.0, 1.0]]);
        assert_matrix_eq(&su2_matrix(PI, 0.0), &[[0.0, -1.0], [1.0, 0.0]]);
        let h = FRAC_1_SQRT_2;
        assert_matrix_eq(&su2_matrix(PI / 2.0, 0.0), &[[h, -h], [h, h]]);
    }

    #[test]
    fn su2_phase_layout() {
        let (theta, phi) = (1.0f64, 0.7f64);
        let m = su2_matrix(theta, phi);
        let s = (theta / 2.0).sin();
        let top_right = -num_complex::Complex64::from_polar(1.0, phi) * s;
        let bottom_left = num_complex::Complex64::from_polar(1.0, -phi) * s;
        assert!((m[(0, 1)] - top_right).norm() < 1e-15);
        assert!((m[(1, 0)] - bottom_left).norm() < 1e-15);
        // Wrapping φ by a full turn changes nothing.
        assert!((su2_matrix(theta, phi + TAU) - m).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn su2_is_unitary(theta in 0.0..=PI, phi in 0.0..TAU) {
            prop_assert!(unitarity_deviation(&su2_matrix(theta, phi)) < 1e-12);
        }

        #[test]
        fn w_circuit_fidelity(n in 2usize..=6) {
            let state = w_state_circuit(n).unwrap().final_state();
            prop_assert!((state.overlap(&PureState::w(n).unwrap()).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn u_identity_and_flip() {
        let w = PureState::w(3).unwrap();
        let same = w.apply_unitary(&su2_matrix(0.0, 0.0), &[1]).unwrap();
        assert!((same.overlap(&w).unwrap() - 1.0).abs() < 1e-15);
        let one = PureState::zero(1).unwrap().apply_unitary(&su2_matrix(PI, 0.0), &[0]).unwrap();
        assert_abs_diff_eq!(one.overlap(&PureState::basis(1, 1).unwrap()).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_circuit_examples() {
        let c = bell_circuit();
        assert_eq!(c.gates().len(), 2);
        let state = c.final_state();
        assert!((state.overlap(&PureState::bell_phi_plus()).unwrap() - 1.0).abs() < 1e-12);
        let p = state.probabilities();
        assert_abs_diff_eq!(p.get("00").unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get("11").unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(state.amplitude(&"01".parse().unwrap()).norm(), 0.0);
        assert_eq!(state.amplitude(&"10".parse().unwrap()).norm(), 0.0);
    }

    #[test]
    fn w3_angles_and_table() {
        let angles = w_cascade_angles(3);
        assert_abs_diff_eq!(angles[0], 1.9106, epsilon = 1e-4);
        assert_abs_diff_eq!(angles[1], PI / 2.0, epsilon = 1e-12);
        let p = w_state_circuit(3).unwrap().final_state().probabilities();
        for s in ["001", "010", "100"] {
            assert_abs_diff_eq!(p.get(s).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    /// Brute-force oracle: expand the cascade amplitude by amplitude without
    /// matrices. Excitation sits on qubit i with amplitude a; CRY keeps
    /// cos(θ/2)·a there and moves sin(θ/2)·a to qubit i+1.
    #[test]
    fn w_cascade_amplitude_oracle() {
        for n in 2..=5 {
            let mut remaining = 1.0f64;
            let mut amps = vec![0.0; n];
            for (i, theta) in w_cascade_angles(n).into_iter().enumerate() {
                amps[i] = remaining * (theta / 2.0).cos();
                remaining *= (theta / 2.0).sin();
            }
            amps[n - 1] = remaining;
            for a in &amps {
                assert_abs_diff_eq!(*a, 1.0 / (n as f64).sqrt(), epsilon = 1e-12);
            }
            let state = w_state_circuit(n).unwrap().final_state();
            for (q, a) in amps.iter().enumerate() {
                assert_abs_diff_eq!(state.amplitudes()[1 << q].re, *a, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn w2_is_01_plus_10() {
        let state = w_state_circuit(2).unwrap().final_state();
        let h = FRAC_1_SQRT_2;
        let target = PureState::from_amplitudes(vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(state.overlap(&target).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn w_circuit_rejects_bad_sizes() {
        assert!(w_state_circuit(1).is_err());
        assert!(w_state_circuit(11).is_err());
    }

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Cx { control: 1, target: 1 }).is_err());
        assert!(c.push(Gate::Ry { theta: -0.1, qubit: 0 }).is_err());
        assert!(c.push(Gate::U { theta: 1.0, phi: TAU, qubit: 0 }).is_err());
        assert!(c.push(Gate::U { theta: TAU, phi: 0.0, qubit: 0 }).is_ok());
    }

    #[test]
    fn noiseless_memory_support() {
        let mut rng = SeededRng::new(20251021);
        let bell = execute(&bell_circuit(), None, DEFAULT_SHOTS, &mut rng).unwrap();
        assert_eq!(bell.shots(), 1024);
        assert!(bell.memory().iter().all(|b| b.bit(0) == b.bit(1)));
        let w = execute(&w_state_circuit(3).unwrap(), None, DEFAULT_SHOTS, &mut rng).unwrap();
        assert!(w.memory().iter().all(|b| b.weight() == 1));
        assert_eq!(execute(&bell_circuit(), None, 1, &mut rng).unwrap().shots(), 1);
        assert!(execute(&bell_circuit(), None, 0, &mut rng).is_err());
    }

    #[test]
    fn noisy_path_matches_noiseless_with_zero_noise() {
        let circuit = w_state_circuit(3).unwrap();
        let zero = NoiseModel::hardware(NoiseProfile::noiseless("zero"), HardwareEffects::default());
        let a = PreparedCircuit::new(&circuit, None).unwrap().outcome_table();
        let b = PreparedCircuit::new(&circuit, Some(&zero)).unwrap().outcome_table();
        assert!(a.max_difference(&b) < 1e-12);
    }

    #[test]
    fn per_gate_channel_dimension_mismatch() {
        let three = KrausChannel::identity(3);
        let model = NoiseModel::PerGate(vec![three]);
        assert!(matches!(
            bell_circuit().final_density(Some(&model)),
            Err(QsgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bit_flip_noise_breaks_bell_correlation() {
        let model = NoiseModel::PerGate(vec![bit_flip(0.5).unwrap()]);
        let table = PreparedCircuit::new(&bell_circuit(), Some(&model)).unwrap().outcome_table();
        let differ = table.mass_where(|b| b.bit(0) != b.bit(1));
        assert!(differ > 0.3, "{differ}");
    }

    #[test]
    fn readout_flip_frequency() {
        let doc = r#"
name = "ro"
two_qubit_error = 0.0
readout_error = [[0.02, 0.02]]
[single_qubit_error]
"#;
        let model = NoiseModel::hardware(load_noise_profile(doc).unwrap(), HardwareEffects::default());
        let circuit = Circuit::new(1).unwrap();
        let prepared = PreparedCircuit::new(&circuit, Some(&model)).unwrap();
        assert_abs_diff_eq!(prepared.outcome_table().get("1").unwrap(), 0.02, epsilon = 1e-15);
        let mut rng = SeededRng::new(4);
        let record = prepared.run(100_000, &mut rng).unwrap();
        let ones = record.counts()[1] as f64 / 1e5;
        // 4σ binomial band.
        let band = 4.0 * (0.02 * 0.98 / 1e5f64).sqrt();
        assert!((ones - 0.02).abs() < band, "{ones}");
    }

    #[test]
    fn density_and_statevector_agree_noiselessly() {
        let circuit = w_state_circuit(4).unwrap();
        let rho = circuit.final_density(None).unwrap();
        let psi = circuit.final_state();
        assert_abs_diff_eq!(rho.fidelity(&psi).unwrap(), 1.0, epsilon = 1e-12);
        let via_depol0 = circuit
            .final_density(Some(&NoiseModel::PerGate(vec![depolarizing(0.0).unwrap()])))
            .unwrap();
        assert!(via_depol0.distance(&rho) < 1e-12);
    }
}
