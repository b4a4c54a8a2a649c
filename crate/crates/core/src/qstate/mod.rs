//! Dense state representations for small qubit registers.
//!
//! Basis convention: the basis index of a register is the integer whose bit
//! `q` is the state of qubit `q`. When written as a bitstring the characters
//! run from qubit `n-1` on the left down to qubit 0 on the right, so index 1
//! of a 3-qubit register is `"001"` and means qubit 0 is `|1⟩`.
//!
//! Multi-qubit operators acting on an ordered target list use the same
//! little-endian rule locally: bit `m` of the operator's row/column index is
//! the state of `targets[m]`.

mod rng;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QsgError, Result};

pub use rng::SeededRng;

pub type Matrix = DMatrix<Complex64>;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 10;
/// Tolerance for algebraic identities (normalization, unitarity, trace).
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Tolerance for numerical drift accumulated over a circuit.
pub const DRIFT_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-9;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(QsgError::InvalidState("a register needs at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(QsgError::TooManyQubits {
            requested: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn check_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(QsgError::QubitOutOfRange { index: t, n_qubits });
        }
        if targets[..i].contains(&t) {
            return Err(QsgError::DuplicateQubit(t));
        }
    }
    Ok(())
}

/// Max-norm distance of `U†U` from the identity.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let product = u.adjoint() * u;
    max_deviation_from_identity(&product)
}

pub(crate) fn max_deviation_from_identity(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let expected = if r == col { 1.0 } else { 0.0 };
            worst = worst.max((m[(r, col)] - c(expected, 0.0)).norm());
        }
    }
    worst
}

fn check_operator(u: &Matrix, targets: &[usize], n_qubits: usize) -> Result<()> {
    check_targets(targets, n_qubits)?;
    let dim = 1usize << targets.len();
    if u.nrows() != dim || u.ncols() != dim {
        return Err(QsgError::DimensionMismatch {
            expected: dim,
            actual: u.nrows(),
        });
    }
    Ok(())
}

fn check_unitary(u: &Matrix) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation.is_finite() && deviation < ALGEBRAIC_TOL {
        Ok(())
    } else {
        Err(QsgError::NotUnitary { deviation })
    }
}

/// Applies a local operator to one strided vector view of `data`.
///
/// The view holds `2^n_qubits` elements at `offset + i * stride`. Shapes are
/// assumed checked by the caller.
pub(crate) fn apply_local(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    n_qubits: usize,
    u: &Matrix,
    targets: &[usize],
) {
    let local_dim = 1usize << targets.len();
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let local_offsets: Vec<usize> = (0..local_dim)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .filter(|(m, _)| (j >> m) & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect();
    let mut gathered = vec![Complex64::default(); local_dim];
    for base in (0..1usize << n_qubits).filter(|b| b & mask == 0) {
        for (j, off) in local_offsets.iter().enumerate() {
            gathered[j] = data[offset + (base | off) * stride];
        }
        for (row, off) in local_offsets.iter().enumerate() {
            let mut acc = Complex64::default();
            for (col, g) in gathered.iter().enumerate() {
                acc += u[(row, col)] * g;
            }
            data[offset + (base | off) * stride] = acc;
        }
    }
}

/// A measured outcome of an `n`-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    index: u32,
    n_qubits: u8,
}

impl Bitstring {
    pub fn new(index: usize, n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        if index >= 1 << n_qubits {
            return Err(QsgError::InvalidBitstring(format!(
                "index {index} does not fit in {n_qubits} qubits"
            )));
        }
        Ok(Self {
            index: index as u32,
            n_qubits: n_qubits as u8,
        })
    }

    pub(crate) fn from_index(index: usize, n_qubits: usize) -> Self {
        debug_assert!(index < 1 << n_qubits);
        Self {
            index: index as u32,
            n_qubits: n_qubits as u8,
        }
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    /// State of qubit `q`.
    pub fn bit(&self, q: usize) -> bool {
        (self.index >> q) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.index.count_ones()
    }

    pub(crate) fn with_flipped(self, q: usize) -> Self {
        Self {
            index: self.index ^ (1 << q),
            ..self
        }
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n_qubits()).rev() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = QsgError;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(QsgError::InvalidBitstring(s.to_owned()));
        }
        let mut index = 0usize;
        for ch in s.chars() {
            index <<= 1;
            match ch {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(QsgError::InvalidBitstring(s.to_owned())),
            }
        }
        Ok(Self::from_index(index, n))
    }
}

/// A normalized statevector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QsgError::InvalidState(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = c(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes; the length must be a power of two
    /// and the norm must be 1 within [`ALGEBRAIC_TOL`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(QsgError::InvalidState(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QsgError::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QsgError::InvalidState(format!(
                "state is not normalized (Σ|a|² = {norm})"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell_phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            n_qubits: 2,
            amplitudes: DVector::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]),
        }
    }

    /// Equal superposition of the `n` single-excitation basis states.
    pub fn w(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        if n_qubits < 2 {
            return Err(QsgError::InvalidState("a W state needs at least 2 qubits".into()));
        }
        let amp = c(1.0 / (n_qubits as f64).sqrt(), 0.0);
        let mut amplitudes = DVector::zeros(1 << n_qubits);
        for q in 0..n_qubits {
            amplitudes[1 << q] = amp;
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn amplitude(&self, bits: &Bitstring) -> Complex64 {
        self.amplitudes[bits.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(QsgError::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_density(&self) -> MixedState {
        MixedState {
            n_qubits: self.n_qubits,
            rho: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            n_qubits: self.n_qubits,
            probs: self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// Applies a unitary to an ordered list of target qubits.
    pub fn apply_unitary(&self, u: &Matrix, targets: &[usize]) -> Result<PureState> {
        check_operator(u, targets, self.n_qubits)?;
        check_unitary(u)?;
        Ok(self.apply_unchecked(u, targets))
    }

    pub(crate) fn apply_unchecked(&self, u: &Matrix, targets: &[usize]) -> PureState {
        let mut out = self.clone();
        apply_local(out.amplitudes.as_mut_slice(), 0, 1, self.n_qubits, u, targets);
        out
    }

    /// Kronecker product `self ⊗ other`; `other` occupies the low qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        tensor_product(self, other)
    }
}

/// Kronecker product `a ⊗ b`. The qubits of `b` become qubits `0..b.n`, those
/// of `a` are shifted above them, so `|0⟩ ⊗ |1⟩` is the basis state `"01"`.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    tensor_product_with_limit(a, b, MAX_QUBITS)
}

pub fn tensor_product_with_limit(a: &PureState, b: &PureState, limit: usize) -> Result<PureState> {
    let n_qubits = a.n_qubits + b.n_qubits;
    if n_qubits > limit.min(MAX_QUBITS) {
        return Err(QsgError::TooManyQubits {
            requested: n_qubits,
            limit: limit.min(MAX_QUBITS),
        });
    }
    Ok(PureState {
        n_qubits,
        amplitudes: a.amplitudes.kronecker(&b.amplitudes),
    })
}

pub fn apply_unitary(state: &PureState, u: &Matrix, targets: &[usize]) -> Result<PureState> {
    state.apply_unitary(u, targets)
}

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    n_qubits: usize,
    rho: Matrix,
}

impl MixedState {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(rho: Matrix) -> Result<Self> {
        let dim = rho.nrows();
        if !rho.is_square() || dim < 2 || !dim.is_power_of_two() {
            return Err(QsgError::InvalidState(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        if rho.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QsgError::InvalidState("non-finite matrix entry".into()));
        }
        let state = Self { n_qubits, rho };
        let herm = state.hermiticity_deviation();
        if herm > ALGEBRAIC_TOL {
            return Err(QsgError::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let trace = state.trace();
        if (trace - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QsgError::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = state.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(QsgError::InvalidState(format!(
                "not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(state)
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            rho: Matrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|d| d.re).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.rho.adjoint();
        self.rho
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // Symmetrize first so round-off does not leak into the solver.
        let herm = (&self.rho + self.rho.adjoint()) * c(0.5, 0.0);
        let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> ProbabilityTable {
        ProbabilityTable {
            n_qubits: self.n_qubits,
            probs: self.rho.diagonal().iter().map(|d| d.re.max(0.0)).collect(),
        }
    }

    /// `U ρ U†` on the given targets.
    pub fn apply_unitary(&self, u: &Matrix, targets: &[usize]) -> Result<MixedState> {
        check_operator(u, targets, self.n_qubits)?;
        check_unitary(u)?;
        Ok(self.conjugate_unchecked(u, targets))
    }

    /// `Σ_k E_k ρ E_k†` on the given targets. Trace preservation is the
    /// caller's concern (see `channel::KrausChannel`).
    pub fn apply_kraus(&self, operators: &[Matrix], targets: &[usize]) -> Result<MixedState> {
        for op in operators {
            check_operator(op, targets, self.n_qubits)?;
        }
        Ok(self.kraus_unchecked(operators, targets))
    }

    pub(crate) fn conjugate_unchecked(&self, u: &Matrix, targets: &[usize]) -> MixedState {
        let dim = 1usize << self.n_qubits;
        let mut out = self.rho.clone();
        let data = out.as_mut_slice();
        // Column-major: column `col` is contiguous, row `r` has stride `dim`.
        for col in 0..dim {
            apply_local(data, col * dim, 1, self.n_qubits, u, targets);
        }
        let u_conj = u.map(|z| z.conj());
        for r in 0..dim {
            apply_local(data, r, dim, self.n_qubits, &u_conj, targets);
        }
        MixedState {
            n_qubits: self.n_qubits,
            rho: out,
        }
    }

    pub(crate) fn kraus_unchecked(&self, operators: &[Matrix], targets: &[usize]) -> MixedState {
        let dim = 1usize << self.n_qubits;
        let mut acc = Matrix::zeros(dim, dim);
        for op in operators {
            acc += self.conjugate_unchecked(op, targets).rho;
        }
        MixedState {
            n_qubits: self.n_qubits,
            rho: acc,
        }
    }

    /// Convex combination `(1-p)·self + p·other`.
    pub(crate) fn mix(&self, other: &MixedState, p: f64) -> MixedState {
        MixedState {
            n_qubits: self.n_qubits,
            rho: &self.rho * c(1.0 - p, 0.0) + &other.rho * c(p, 0.0),
        }
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, psi: &PureState) -> Result<f64> {
        fidelity(self, psi)
    }

    /// Max-norm distance between two density matrices.
    pub fn distance(&self, other: &MixedState) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.rho
            .iter()
            .zip(other.rho.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]` against round-off.
pub fn fidelity(rho: &MixedState, psi: &PureState) -> Result<f64> {
    if rho.n_qubits != psi.n_qubits {
        return Err(QsgError::DimensionMismatch {
            expected: rho.n_qubits,
            actual: psi.n_qubits,
        });
    }
    let value = psi.amplitudes.dotc(&(&rho.rho * &psi.amplitudes)).re;
    Ok(value.clamp(0.0, 1.0))
}

/// Anything with a computational-basis outcome distribution.
pub trait Measurable {
    fn probabilities(&self) -> ProbabilityTable;
}

impl Measurable for PureState {
    fn probabilities(&self) -> ProbabilityTable {
        PureState::probabilities(self)
    }
}

impl Measurable for MixedState {
    fn probabilities(&self) -> ProbabilityTable {
        MixedState::probabilities(self)
    }
}

pub fn measurement_probabilities<S: Measurable>(state: &S) -> ProbabilityTable {
    state.probabilities()
}

/// Outcome distribution over all `2^n` bitstrings, indexed by basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        check_register(n_qubits)?;
        if probs.len() != 1 << n_qubits {
            return Err(QsgError::DimensionMismatch {
                expected: 1 << n_qubits,
                actual: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(QsgError::InvalidState("probability outside [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QsgError::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Probabilities indexed by basis index.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, bits: &Bitstring) -> f64 {
        self.probs[bits.index()]
    }

    /// Lookup by bitstring text such as `"011"`.
    pub fn get(&self, bits: &str) -> Result<f64> {
        let b: Bitstring = bits.parse()?;
        if b.n_qubits() != self.n_qubits {
            return Err(QsgError::InvalidBitstring(bits.to_owned()));
        }
        Ok(self.probability(&b))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Bitstring, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (Bitstring::from_index(i, self.n_qubits), p))
    }

    /// Total probability of the outcomes matching `pred`.
    pub fn mass_where(&self, pred: impl Fn(&Bitstring) -> bool) -> f64 {
        self.entries().filter(|(b, _)| pred(b)).map(|(_, p)| p).sum()
    }

    /// `P(qubit q reads 1)`.
    pub fn marginal_one(&self, q: usize) -> f64 {
        self.mass_where(|b| b.bit(q))
    }

    /// `Σ_b p(b)·f(b)`.
    pub fn expectation(&self, f: impl Fn(&Bitstring) -> f64) -> f64 {
        self.entries().map(|(b, p)| p * f(&b)).sum()
    }

    pub fn max_difference(&self, other: &ProbabilityTable) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Draws one outcome by inverse-CDF on a single uniform draw.
    pub fn sample(&self, rng: &mut SeededRng) -> Bitstring {
        let u = rng.next_f64();
        let mut cumulative = 0.0;
        let mut last_nonzero = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            last_nonzero = i;
            cumulative += p;
            if u < cumulative {
                return Bitstring::from_index(i, self.n_qubits);
            }
        }
        // Only reachable when round-off leaves the total just below u.
        Bitstring::from_index(last_nonzero, self.n_qubits)
    }

    /// Folds independent per-qubit readout flips into the distribution.
    /// `flips[q] = (p10, p01)`: P(read 0 | 1) and P(read 1 | 0) for qubit q;
    /// qubits beyond the slice are read perfectly.
    pub fn with_readout_error(&self, flips: &[(f64, f64)]) -> ProbabilityTable {
        let mut probs = self.probs.clone();
        for (q, &(p10, p01)) in flips.iter().enumerate().take(self.n_qubits) {
            let bit = 1usize << q;
            for i in (0..probs.len()).filter(|i| i & bit == 0) {
                let (p0, p1) = (probs[i], probs[i | bit]);
                probs[i] = p0 * (1.0 - p01) + p1 * p10;
                probs[i | bit] = p0 * p01 + p1 * (1.0 - p10);
            }
        }
        ProbabilityTable {
            n_qubits: self.n_qubits,
            probs,
        }
    }
}

pub fn sample_bitstring(table: &ProbabilityTable, rng: &mut SeededRng) -> Bitstring {
    table.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn hadamard() -> Matrix {
        let h = FRAC_1_SQRT_2;
        Matrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
    }

    /// CX with targets `[control, target]`, little-endian local index.
    fn cx() -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(2, 2)] = c(1.0, 0.0);
        m[(3, 1)] = c(1.0, 0.0);
        m[(1, 3)] = c(1.0, 0.0);
        m
    }

    fn plus() -> PureState {
        PureState::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn bitstring_convention() {
        let b = Bitstring::new(1, 3).unwrap();
        assert_eq!(b.to_string(), "001");
        assert!(b.bit(0));
        let parsed: Bitstring = "100".parse().unwrap();
        assert_eq!(parsed.index(), 4);
        assert!(parsed.bit(2));
        assert!("10a".parse::<Bitstring>().is_err());
        assert!("".parse::<Bitstring>().is_err());
    }

    #[test]
    fn tensor_zero_zero() {
        let z = PureState::zero(1).unwrap();
        let zz = tensor_product(&z, &z).unwrap();
        assert_eq!(zz.n_qubits(), 2);
        assert_eq!(zz.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn tensor_zero_one_is_01() {
        let z = PureState::zero(1).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let s = tensor_product(&z, &one).unwrap();
        assert_eq!(s.amplitude(&"01".parse().unwrap()), c(1.0, 0.0));
    }

    #[test]
    fn tensor_plus_zero() {
        let s = tensor_product(&plus(), &PureState::zero(1).unwrap()).unwrap();
        let p = s.probabilities();
        assert_abs_diff_eq!(s.amplitude(&"00".parse().unwrap()).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(&"10".parse().unwrap()).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get("01").unwrap() + p.get("11").unwrap(), 0.0);
    }

    #[test]
    fn tensor_overflow() {
        let a = PureState::zero(6).unwrap();
        let b = PureState::zero(5).unwrap();
        assert!(matches!(tensor_product(&a, &b), Err(QsgError::TooManyQubits { requested: 11, .. })));
        assert!(tensor_product_with_limit(&a, &PureState::zero(1).unwrap(), 6).is_err());
    }

    #[test]
    fn hadamard_cx_gives_bell() {
        let s = PureState::zero(2)
            .unwrap()
            .apply_unitary(&hadamard(), &[0])
            .unwrap()
            .apply_unitary(&cx(), &[0, 1])
            .unwrap();
        assert_abs_diff_eq!(s.overlap(&PureState::bell_phi_plus()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_rejects_bad_inputs() {
        let s = PureState::zero(2).unwrap();
        let not_unitary = Matrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(s.apply_unitary(&not_unitary, &[0]), Err(QsgError::NotUnitary { .. })));
        assert!(matches!(
            s.apply_unitary(&hadamard(), &[2]),
            Err(QsgError::QubitOutOfRange { index: 2, .. })
        ));
        assert!(matches!(s.apply_unitary(&cx(), &[1, 1]), Err(QsgError::DuplicateQubit(1))));
        assert!(matches!(s.apply_unitary(&cx(), &[0]), Err(QsgError::DimensionMismatch { .. })));
    }

    #[test]
    fn non_target_marginals_untouched() {
        // Rotate qubit 1 of |+⟩⊗|0⟩⊗|1⟩ and check qubits 0 and 2.
        let s = tensor_product(
            &tensor_product(&plus(), &PureState::zero(1).unwrap()).unwrap(),
            &PureState::basis(1, 1).unwrap(),
        )
        .unwrap();
        let before = s.probabilities();
        let theta: f64 = 1.1;
        let ry = Matrix::from_row_slice(
            2,
            2,
            &[
                c((theta / 2.0).cos(), 0.0),
                c(-(theta / 2.0).sin(), 0.0),
                c((theta / 2.0).sin(), 0.0),
                c((theta / 2.0).cos(), 0.0),
            ],
        );
        let after = s.apply_unitary(&ry, &[1]).unwrap().probabilities();
        assert_abs_diff_eq!(before.marginal_one(0), after.marginal_one(0), epsilon = 1e-12);
        assert_abs_diff_eq!(before.marginal_one(2), after.marginal_one(2), epsilon = 1e-12);
        assert_abs_diff_eq!(after.marginal_one(1), (theta / 2.0).sin().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn probabilities_of_named_states() {
        let bell = PureState::bell_phi_plus().probabilities();
        assert_abs_diff_eq!(bell.get("00").unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bell.get("11").unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(bell.get("01").unwrap(), 0.0);
        assert_eq!(bell.get("10").unwrap(), 0.0);

        let w = PureState::w(3).unwrap().probabilities();
        for (b, p) in w.entries() {
            let expected = if b.weight() == 1 { 1.0 / 3.0 } else { 0.0 };
            assert_abs_diff_eq!(p, expected, epsilon = 1e-15);
        }

        let mixed = MixedState::maximally_mixed(1).unwrap().probabilities();
        assert_eq!(mixed.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn mixed_state_validation() {
        assert!(MixedState::new(Matrix::identity(2, 2)).is_err());
        let mut not_herm = Matrix::identity(2, 2) * c(0.5, 0.0);
        not_herm[(0, 1)] = c(0.1, 0.0);
        assert!(MixedState::new(not_herm).is_err());
        // Trace 1 but eigenvalues (1.5, -0.5).
        let mut indefinite = Matrix::identity(2, 2) * c(0.5, 0.0);
        indefinite[(0, 1)] = c(1.0, 0.0);
        indefinite[(1, 0)] = c(1.0, 0.0);
        assert!(MixedState::new(indefinite).is_err());
        assert!(MixedState::new(PureState::w(3).unwrap().to_density().matrix().clone()).is_ok());
    }

    #[test]
    fn fidelity_examples() {
        let w = PureState::w(3).unwrap();
        assert_abs_diff_eq!(fidelity(&w.to_density(), &w).unwrap(), 1.0, epsilon = 1e-12);
        let mixed = MixedState::maximally_mixed(3).unwrap();
        assert_abs_diff_eq!(fidelity(&mixed, &w).unwrap(), 0.125, epsilon = 1e-12);
        assert!(fidelity(&mixed, &PureState::bell_phi_plus()).is_err());
    }

    #[test]
    fn density_conjugation_matches_statevector() {
        let s = PureState::w(3).unwrap();
        let theta = PI / 3.0;
        let u = Matrix::from_row_slice(
            2,
            2,
            &[
                c((theta / 2.0).cos(), 0.0),
                c(0.0, -(theta / 2.0).sin()),
                c(0.0, -(theta / 2.0).sin()),
                c((theta / 2.0).cos(), 0.0),
            ],
        );
        let via_pure = s.apply_unitary(&u, &[2]).unwrap().to_density();
        let via_mixed = s.to_density().apply_unitary(&u, &[2]).unwrap();
        assert!(via_pure.distance(&via_mixed) < 1e-12);
    }

    #[test]
    fn degenerate_table_always_samples_zero() {
        let table = ProbabilityTable::new(1, vec![1.0, 0.0]).unwrap();
        let mut rng = SeededRng::new(1);
        for _ in 0..1000 {
            assert_eq!(sample_bitstring(&table, &mut rng).to_string(), "0");
        }
    }

    #[test]
    fn table_validation() {
        assert!(ProbabilityTable::new(1, vec![0.6, 0.6]).is_err());
        assert!(ProbabilityTable::new(1, vec![1.0]).is_err());
        assert!(ProbabilityTable::new(1, vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn readout_folding() {
        let zero = ProbabilityTable::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let noisy = zero.with_readout_error(&[(0.0, 0.02), (0.0, 0.1)]);
        assert_abs_diff_eq!(noisy.get("01").unwrap(), 0.02 * 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(noisy.get("11").unwrap(), 0.02 * 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(noisy.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }
}
