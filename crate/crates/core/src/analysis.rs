//! Match statistics, exact expected utilities and the local-deviation search
//! over single-qubit strategy parameters.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::channel::KrausChannel;
use crate::circuit::su2_matrix;
use crate::error::{check_range, QsgError, Result};
use crate::game::{score_round, Defense, MatchResult};
use crate::qstate::{Bitstring, MixedState, ProbabilityTable, PureState};
use crate::strategy::{ActionProfile, StrategyKind, Team};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub p_positive: f64,
    pub accumulated: f64,
    pub n_rounds: usize,
}

pub fn summarize(result: &MatchResult) -> Stats {
    let scores: Vec<i32> = result.team_scores().collect();
    summarize_scores(&scores)
}

/// Statistics of a score series. An empty series gives all zeros.
pub fn summarize_scores(scores: &[i32]) -> Stats {
    let n = scores.len();
    if n == 0 {
        return Stats { mean: 0.0, std: 0.0, p_positive: 0.0, accumulated: 0.0, n_rounds: 0 };
    }
    let total: i64 = scores.iter().map(|&s| i64::from(s)).sum();
    let total_sq: i64 = scores.iter().map(|&s| i64::from(s) * i64::from(s)).sum();
    let nf = n as f64;
    let mean = total as f64 / nf;
    // Integer sums keep the variance exact up to the final division.
    let var = ((total_sq as f64) * nf - (total as f64).powi(2)) / (nf * nf);
    Stats {
        mean,
        std: var.max(0.0).sqrt(),
        p_positive: scores.iter().filter(|&&s| s > 0).count() as f64 / nf,
        accumulated: total as f64,
        n_rounds: n,
    }
}

/// Half-width `k·σ/√n` of the band a mean over `n_rounds` rounds should fall in.
pub fn sampling_band(n_rounds: usize, per_round_std: f64, k_sigma: f64) -> f64 {
    if n_rounds == 0 {
        return f64::INFINITY;
    }
    k_sigma * per_round_std / (n_rounds as f64).sqrt()
}

/// Exact mean and standard deviation of one round's team score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundLaw {
    pub mean: f64,
    pub std: f64,
}

impl RoundLaw {
    /// Law of a defense-independent team whose joint outcome law is `table`.
    /// With `w` players on A the score is `±(n − 2w)` with equal weight.
    pub fn defense_independent(table: &ProbabilityTable) -> Self {
        let n = table.n_qubits() as f64;
        let second = table.expectation(|b| (n - 2.0 * f64::from(b.weight())).powi(2));
        Self { mean: 0.0, std: second.sqrt() }
    }

    pub fn classical(n: usize) -> Self {
        Self { mean: 0.0, std: (n as f64).sqrt() }
    }

    /// Team score is `+n` with probability `q` and `−n` otherwise.
    pub fn hah(n: usize, intel_prob: f64) -> Self {
        let n = n as f64;
        Self {
            mean: n * (2.0 * intel_prob - 1.0),
            std: 2.0 * n * (intel_prob * (1.0 - intel_prob)).sqrt(),
        }
    }

    pub fn for_team(team: &Team) -> Self {
        let config = team.config();
        match config.kind {
            StrategyKind::Classical => Self::classical(config.team_size),
            StrategyKind::Hah => Self::hah(config.team_size, config.intel_prob.unwrap_or_default()),
            StrategyKind::Bell | StrategyKind::Wstate => {
                Self::defense_independent(&team.outcome_table().expect("circuit team has a table"))
            }
        }
    }
}

/// Payoff of each joint measurement outcome of the team, indexed by basis
/// index (qubit `q` is bit `q`).
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityMatrix {
    n_qubits: usize,
    entries: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(n_qubits: usize, entries: Vec<f64>) -> Result<Self> {
        crate::qstate::check_register(n_qubits)?;
        if entries.len() != 1 << n_qubits {
            return Err(QsgError::DimensionMismatch { expected: 1 << n_qubits, actual: entries.len() });
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(QsgError::InvalidArgument(format!("utility entry {bad} is not finite")));
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn from_fn(n_qubits: usize, f: impl Fn(&Bitstring) -> f64) -> Result<Self> {
        crate::qstate::check_register(n_qubits)?;
        let entries = (0..1usize << n_qubits)
            .map(|i| f(&Bitstring::new(i, n_qubits).expect("index in range")))
            .collect();
        Self::new(n_qubits, entries)
    }

    pub fn constant(n_qubits: usize, value: f64) -> Result<Self> {
        Self::from_fn(n_qubits, |_| value)
    }

    /// Team score of each outcome against a known defense.
    pub fn score_vs_fixed_defense(n_qubits: usize, defense: Defense) -> Result<Self> {
        Self::from_fn(n_qubits, |b| f64::from(score_round(&ActionProfile::from(*b), defense).team_score))
    }

    /// Team score averaged over a uniformly random defense. Every entry is 0.
    pub fn score_averaged_over_defense(n_qubits: usize) -> Result<Self> {
        Self::from_fn(n_qubits, |b| {
            let profile = ActionProfile::from(*b);
            let a = score_round(&profile, Defense::new(crate::strategy::Basement::A)).team_score;
            let b = score_round(&profile, Defense::new(crate::strategy::Basement::B)).team_score;
            0.5 * f64::from(a + b)
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, bits: &Bitstring) -> f64 {
        self.entries[bits.index()]
    }

    /// Entry for a two-player outcome: player 0 measured `i`, player 1 measured `j`.
    pub fn pair(&self, i: usize, j: usize) -> Result<f64> {
        if self.n_qubits != 2 || i > 1 || j > 1 {
            return Err(QsgError::InvalidArgument(format!(
                "pair({i}, {j}) needs a two-player matrix of binary outcomes"
            )));
        }
        Ok(self.entries[i | (j << 1)])
    }
}

/// A local strategy `U(θ, φ)` applied by every team member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyPoint {
    theta: f64,
    phi: f64,
}

impl StrategyPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI)?;
        if !(0.0..TAU).contains(&phi) {
            return Err(QsgError::OutOfRange { name: "phi", value: phi, min: 0.0, max: TAU });
        }
        Ok(Self { theta, phi })
    }

    pub fn identity() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(cos(θ/2), e^{iφ}·sin(θ/2))`, normalized by construction.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let half = self.theta / 2.0;
        (Complex64::new(half.cos(), 0.0), Complex64::from_polar(half.sin(), self.phi))
    }
}

/// Everything `expected_utility` needs apart from the point itself.
#[derive(Debug, Clone)]
pub struct UtilityContext {
    pub base: PureState,
    pub utility: UtilityMatrix,
    /// Applied after the strategy gate: a one-qubit channel acts on every
    /// qubit, a register-wide channel acts once.
    pub noise: Option<KrausChannel>,
}

impl UtilityContext {
    pub fn new(base: PureState, utility: UtilityMatrix, noise: Option<KrausChannel>) -> Result<Self> {
        let n = base.n_qubits();
        if utility.n_qubits() != n {
            return Err(QsgError::DimensionMismatch { expected: 1 << n, actual: utility.entries().len() });
        }
        if let Some(ch) = &noise {
            if ch.n_qubits() != 1 && ch.n_qubits() != n {
                return Err(QsgError::DimensionMismatch { expected: 2, actual: ch.dimension() });
            }
        }
        Ok(Self { base, utility, noise })
    }

    /// Exact joint outcome law after the strategy gate and noise.
    pub fn outcome_table(&self, theta: f64, phi: f64) -> Result<ProbabilityTable> {
        let u = su2_matrix(theta, phi);
        let n = self.base.n_qubits();
        let mut state = self.base.clone();
        for q in 0..n {
            state = state.apply_unchecked(&u, &[q]);
        }
        match &self.noise {
            None => Ok(state.probabilities()),
            Some(ch) => {
                let mut rho = MixedState::from_pure(&state);
                if ch.n_qubits() == 1 {
                    for q in 0..n {
                        rho = ch.apply(&rho, &[q])?;
                    }
                } else {
                    let all: Vec<usize> = (0..n).collect();
                    rho = ch.apply(&rho, &all)?;
                }
                Ok(rho.probabilities())
            }
        }
    }

    fn value_at(&self, theta: f64, phi: f64) -> Result<f64> {
        let table = self.outcome_table(theta, phi)?;
        Ok(table.as_slice().iter().zip(self.utility.entries()).map(|(p, u)| p * u).sum())
    }
}

/// Exact `Σ P(outcome)·U(outcome)` after every team qubit applies the
/// strategy at `point`.
pub fn expected_utility(point: StrategyPoint, context: &UtilityContext) -> Result<f64> {
    context.value_at(point.theta, point.phi)
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_STATIONARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity {
    /// Extrapolated `(∂/∂θ, ∂/∂φ)`.
    pub gradient: [f64; 2],
    /// Plain central differences at the full step.
    pub raw_gradient: [f64; 2],
    pub max_norm: f64,
    pub is_stationary: bool,
}

/// Central-difference gradient in `(θ, φ)` with one Richardson step
/// `(4·g(h/2) − g(h)) / 3`. Points at the edge of the parameter box are
/// differenced through the edge, which is exact since the outcome law is
/// periodic in both angles.
pub fn stationarity_check(point: StrategyPoint, context: &UtilityContext, step: f64, tol: f64) -> Result<Stationarity> {
    if !(step > 0.0) {
        return Err(QsgError::InvalidArgument(format!("finite-difference step must be > 0, got {step}")));
    }
    let (t, p) = (point.theta, point.phi);
    let central = |h: f64| -> Result<[f64; 2]> {
        Ok([
            (context.value_at(t + h, p)? - context.value_at(t - h, p)?) / (2.0 * h),
            (context.value_at(t, p + h)? - context.value_at(t, p - h)?) / (2.0 * h),
        ])
    };
    let full = central(step)?;
    let half = central(step / 2.0)?;
    let gradient = [(4.0 * half[0] - full[0]) / 3.0, (4.0 * half[1] - full[1]) / 3.0];
    let max_norm = gradient[0].abs().max(gradient[1].abs());
    Ok(Stationarity { gradient, raw_gradient: full, max_norm, is_stationary: max_norm < tol })
}

pub const MIN_GRID_DENSITY: usize = 8;
/// Values closer than this are treated as equal.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub point: StrategyPoint,
    pub value: f64,
    /// Best value seen on the grid, before refinement.
    pub grid_value: f64,
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU { 0.0 } else { w }
}

/// Grid over `θ ∈ [0, π]` (`density + 1` values) and `φ ∈ [0, 2π)`
/// (`density` values), then a shrinking coordinate search that only moves on
/// strict improvement. Ties go to the smaller `θ`, then the smaller `φ`.
pub fn best_response_search(context: &UtilityContext, grid_density: usize) -> Result<BestResponse> {
    if grid_density < MIN_GRID_DENSITY {
        return Err(QsgError::InvalidArgument(format!(
            "grid density must be ≥ {MIN_GRID_DENSITY}, got {grid_density}"
        )));
    }
    let d_theta = PI / grid_density as f64;
    let d_phi = TAU / grid_density as f64;

    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=grid_density {
        let theta = if i == grid_density { PI } else { i as f64 * d_theta };
        for j in 0..grid_density {
            let phi = j as f64 * d_phi;
            let v = context.value_at(theta, phi)?;
            if v > best.2 + TIE_TOL {
                best = (theta, phi, v);
            }
        }
    }
    let grid_value = best.2;

    let (mut theta, mut phi, mut value) = best;
    let mut step_theta = d_theta / 2.0;
    let mut step_phi = d_phi / 2.0;
    while step_theta > 1e-10 || step_phi > 1e-10 {
        let mut moved = false;
        let candidates = [
            ((theta - step_theta).max(0.0), phi),
            ((theta + step_theta).min(PI), phi),
            (theta, wrap_phi(phi - step_phi)),
            (theta, wrap_phi(phi + step_phi)),
        ];
        for (ct, cp) in candidates {
            let v = context.value_at(ct, cp)?;
            if v > value + TIE_TOL {
                (theta, phi, value) = (ct, cp, v);
                moved = true;
            }
        }
        if !moved {
            step_theta /= 2.0;
            step_phi /= 2.0;
        }
    }

    Ok(BestResponse { point: StrategyPoint::new(theta, wrap_phi(phi))?, value, grid_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::depolarizing;
    use crate::game::run_match;
    use crate::qstate::SeededRng;
    use crate::strategy::{Basement, StrategyConfig};
    use proptest::prelude::*;

    fn ctx(base: PureState, utility: UtilityMatrix) -> UtilityContext {
        UtilityContext::new(base, utility, None).unwrap()
    }

    #[test]
    fn summarize_examples() {
        let s = summarize_scores(&[1; 100]);
        assert_eq!((s.mean, s.std, s.p_positive, s.accumulated, s.n_rounds), (1.0, 0.0, 1.0, 100.0, 100));
        let alt: Vec<i32> = (0..100).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
        let s = summarize_scores(&alt);
        assert_eq!((s.mean, s.accumulated, s.p_positive), (0.0, 0.0, 0.5));
        assert_eq!(s.std, 1.0);
        assert_eq!(summarize_scores(&[]).n_rounds, 0);
    }

    #[test]
    fn summarize_matches_match_result() {
        let r = run_match(100, &StrategyConfig::classical(3), 4, "3C").unwrap();
        let s = summarize(&r);
        assert_eq!(s.accumulated, r.total() as f64);
        assert!((s.accumulated - s.mean * s.n_rounds as f64).abs() < 1e-9);
        // Two-pass population std as an independent check.
        let xs: Vec<f64> = r.team_scores().map(f64::from).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((s.std - v.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampling_band_examples() {
        assert!((sampling_band(100, 1.0, 3.0) - 0.30).abs() < 1e-15);
        assert!((sampling_band(100, 2f64.sqrt(), 3.0) - 0.4243).abs() < 1e-4);
        assert!((sampling_band(10_000, 1.0, 3.0) - 0.03).abs() < 1e-15);
    }

    #[test]
    fn round_laws() {
        let bell = Team::new(StrategyConfig::bell()).unwrap();
        assert!((RoundLaw::for_team(&bell).std - 2.0).abs() < 1e-12);
        let w3 = Team::new(StrategyConfig::wstate(3)).unwrap();
        assert!((RoundLaw::for_team(&w3).std - 1.0).abs() < 1e-12);
        assert_eq!(RoundLaw::classical(3).std, 3f64.sqrt());
        let h = RoundLaw::hah(3, 0.8267);
        assert!((h.mean - 1.9602).abs() < 1e-12);
        assert!((RoundLaw::hah(2, 0.715).mean - 0.86).abs() < 1e-12);
    }

    #[test]
    fn utility_matrix_builders() {
        let fixed = UtilityMatrix::score_vs_fixed_defense(2, Defense::new(Basement::A)).unwrap();
        // Outcome "11": both on A, both caught.
        assert_eq!(fixed.get(&"11".parse().unwrap()), -2.0);
        assert_eq!(fixed.get(&"00".parse().unwrap()), 2.0);
        assert_eq!(fixed.pair(1, 0).unwrap(), 0.0);
        assert!(fixed.pair(2, 0).is_err());
        let avg = UtilityMatrix::score_averaged_over_defense(3).unwrap();
        assert!(avg.entries().iter().all(|&x| x == 0.0));
        assert!(UtilityMatrix::new(2, vec![0.0; 3]).is_err());
        assert!(UtilityMatrix::new(1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn strategy_point_validation() {
        assert!(StrategyPoint::new(PI, 0.0).is_ok());
        assert!(StrategyPoint::new(PI + 1e-9, 0.0).is_err());
        assert!(StrategyPoint::new(0.0, TAU).is_err());
        let (a, b) = StrategyPoint::new(1.2, 0.4).unwrap().amplitudes();
        assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expected_utility_examples() {
        let zero = ctx(PureState::w(3).unwrap(), UtilityMatrix::constant(3, 0.0).unwrap());
        assert_eq!(expected_utility(StrategyPoint::new(1.0, 2.0).unwrap(), &zero).unwrap(), 0.0);

        let agree = UtilityMatrix::from_fn(2, |b| if b.bit(0) == b.bit(1) { 1.0 } else { -1.0 }).unwrap();
        let bell = ctx(PureState::bell_phi_plus(), agree);
        assert!((expected_utility(StrategyPoint::identity(), &bell).unwrap() - 1.0).abs() < 1e-12);

        let mismatch = UtilityContext::new(PureState::bell_phi_plus(), UtilityMatrix::constant(3, 0.0).unwrap(), None);
        assert!(mismatch.is_err());
        let bad_noise = UtilityContext::new(
            PureState::w(3).unwrap(),
            UtilityMatrix::constant(3, 0.0).unwrap(),
            Some(crate::channel::depolarizing_two_qubit(0.1).unwrap()),
        );
        assert!(bad_noise.is_err());
    }

    #[test]
    fn noise_changes_utility() {
        let u = UtilityMatrix::score_vs_fixed_defense(3, Defense::new(Basement::A)).unwrap();
        let clean = ctx(PureState::w(3).unwrap(), u.clone());
        let noisy = UtilityContext::new(PureState::w(3).unwrap(), u, Some(depolarizing(0.2).unwrap())).unwrap();
        let p = StrategyPoint::identity();
        let (a, b) = (expected_utility(p, &clean).unwrap(), expected_utility(p, &noisy).unwrap());
        assert!((a - 1.0).abs() < 1e-12);
        assert!(b < a);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let u = UtilityMatrix::score_vs_fixed_defense(3, Defense::new(Basement::B)).unwrap();
        let c = ctx(PureState::w(3).unwrap(), u.clone());
        let point = StrategyPoint::new(0.9, 1.3).unwrap();
        let exact = expected_utility(point, &c).unwrap();
        let table = c.outcome_table(point.theta(), point.phi()).unwrap();
        let second = table.expectation(|b| u.get(b).powi(2));
        let sigma = (second - exact * exact).sqrt();
        let mut rng = SeededRng::new(12);
        let rounds = 100_000;
        let mean = (0..rounds).map(|_| u.get(&table.sample(&mut rng))).sum::<f64>() / rounds as f64;
        assert!((mean - exact).abs() <= 4.0 * sigma / (rounds as f64).sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn stationarity_examples() {
        let c = ctx(PureState::bell_phi_plus(), UtilityMatrix::constant(2, 3.5).unwrap());
        let s = stationarity_check(StrategyPoint::new(0.7, 0.2).unwrap(), &c, DEFAULT_FD_STEP, DEFAULT_STATIONARY_TOL).unwrap();
        assert!(s.max_norm < 1e-9, "{:?}", s.gradient);
        assert!(s.is_stationary);

        let avg = ctx(PureState::w(3).unwrap(), UtilityMatrix::score_averaged_over_defense(3).unwrap());
        let s = stationarity_check(StrategyPoint::new(2.0, 5.0).unwrap(), &avg, DEFAULT_FD_STEP, DEFAULT_STATIONARY_TOL).unwrap();
        assert!(s.is_stationary);
        assert!(stationarity_check(StrategyPoint::identity(), &avg, 0.0, 1e-6).is_err());
    }

    #[test]
    fn gradient_matches_closed_form() {
        // |0⟩ rotated by U(θ, φ): P(1) = sin²(θ/2), so dE/dθ = sin(θ)/2.
        let u = UtilityMatrix::new(1, vec![0.0, 1.0]).unwrap();
        let c = ctx(PureState::zero(1).unwrap(), u);
        for theta in [0.3, 1.1, 2.5] {
            let s = stationarity_check(StrategyPoint::new(theta, 0.4).unwrap(), &c, 1e-4, 1e-6).unwrap();
            assert!((s.gradient[0] - theta.sin() / 2.0).abs() < 1e-9);
            assert!(s.gradient[1].abs() < 1e-9);
            // Richardson consistency: raw and extrapolated differ by O(h²).
            assert!((s.gradient[0] - s.raw_gradient[0]).abs() < 1e-8);
        }
    }

    #[test]
    fn best_response_examples() {
        let c = ctx(PureState::w(3).unwrap(), UtilityMatrix::constant(3, 0.25).unwrap());
        let r = best_response_search(&c, 8).unwrap();
        assert_eq!((r.point.theta(), r.point.phi()), (0.0, 0.0));
        assert!((r.value - 0.25).abs() < 1e-12);

        let flip = ctx(PureState::zero(1).unwrap(), UtilityMatrix::new(1, vec![0.0, 1.0]).unwrap());
        let r = best_response_search(&flip, 8).unwrap();
        assert!((r.point.theta() - PI).abs() < 1e-12);
        assert!((r.value - 1.0).abs() < 1e-12);

        assert!(best_response_search(&c, 7).is_err());
    }

    #[test]
    fn best_response_reaches_stationary_point() {
        // Reward outcomes where exactly one of two qubits reads 1.
        let u = UtilityMatrix::from_fn(2, |b| match b.weight() {
            1 => 1.0,
            _ => 0.0,
        })
        .unwrap();
        let c = ctx(PureState::zero(2).unwrap(), u);
        let r = best_response_search(&c, 16).unwrap();
        // P(exactly one 1) = 2 s²(1 − s²), maximal 1/2 at θ = π/2.
        assert!((r.value - 0.5).abs() < 1e-10);
        assert!((r.point.theta() - PI / 2.0).abs() < 1e-4);
        let s = stationarity_check(r.point, &c, DEFAULT_FD_STEP, 1e-4).unwrap();
        assert!(s.is_stationary, "{:?}", s.gradient);
    }

    proptest! {
        #[test]
        fn defense_averaged_utility_is_zero(theta in 0.0..=PI, phi in 0.0..TAU, n in 1usize..5) {
            let c = ctx(PureState::w(n.max(2)).unwrap(), UtilityMatrix::score_averaged_over_defense(n.max(2)).unwrap());
            let v = expected_utility(StrategyPoint::new(theta, phi).unwrap(), &c).unwrap();
            prop_assert!(v.abs() < 1e-12);
        }

        #[test]
        fn refinement_never_loses(theta0 in 0.0..PI, density in 8usize..14) {
            let u = UtilityMatrix::from_fn(2, |b| (b.index() as f64 * theta0).sin()).unwrap();
            let c = ctx(PureState::bell_phi_plus(), u);
            let r = best_response_search(&c, density).unwrap();
            prop_assert!(r.value >= r.grid_value);
            let again = best_response_search(&c, density).unwrap();
            prop_assert_eq!(r, again);
        }
    }
}
