//! Round engine: hidden defense, scoring, accumulation and resource bookkeeping.

use std::fmt;

use crate::error::{QsgError, Result};
use crate::qstate::SeededRng;
use crate::strategy::{ActionProfile, Basement, StrategyConfig, StrategyKind, Team};

/// Which basement the army defends this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Defense {
    pub strong: Basement,
}

impl Defense {
    pub fn new(strong: Basement) -> Self {
        Self { strong }
    }

    pub fn undefended(self) -> Basement {
        self.strong.other()
    }
}

impl fmt::Display for Defense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.strong)
    }
}

/// Uniform draw of the defended basement.
pub fn assign_defense(rng: &mut SeededRng) -> Defense {
    Defense::new(if rng.coin() { Basement::A } else { Basement::B })
}

pub fn defense_sequence(rounds: usize, rng: &mut SeededRng) -> Vec<Defense> {
    (0..rounds).map(|_| assign_defense(rng)).collect()
}

/// Name of the stream a team of kind `kind` draws its decisions from.
pub fn team_stream_label(kind: StrategyKind, label: &str) -> String {
    if kind.is_quantum_circuit() {
        format!("measurement:{label}")
    } else {
        format!("team:{label}")
    }
}

pub const DEFENSE_STREAM: &str = "defense";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    /// 1-based.
    pub round_index: usize,
    pub defense: Defense,
    pub profile: ActionProfile,
    pub player_scores: Vec<i32>,
    pub team_score: i32,
}

/// +1 for each player on the undefended basement, −1 for each on the defended one.
pub fn score_round(profile: &ActionProfile, defense: Defense) -> RoundOutcome {
    let player_scores: Vec<i32> = profile
        .actions()
        .iter()
        .map(|&a| if a == defense.strong { -1 } else { 1 })
        .collect();
    RoundOutcome {
        round_index: 0,
        defense,
        profile: profile.clone(),
        team_score: player_scores.iter().sum(),
        player_scores,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub team_label: String,
    pub outcomes: Vec<RoundOutcome>,
    pub cumulative: Vec<i64>,
}

impl MatchResult {
    pub fn rounds(&self) -> usize {
        self.outcomes.len()
    }

    pub fn team_scores(&self) -> impl Iterator<Item = i32> + '_ {
        self.outcomes.iter().map(|o| o.team_score)
    }

    pub fn total(&self) -> i64 {
        self.cumulative.last().copied().unwrap_or(0)
    }
}

/// Plays `team` against a fixed defense sequence.
pub fn play_match(label: &str, team: &Team, defenses: &[Defense], rng: &mut SeededRng) -> Result<MatchResult> {
    let mut outcomes = Vec::with_capacity(defenses.len());
    let mut cumulative = Vec::with_capacity(defenses.len());
    let mut running = 0i64;
    for (k, &defense) in defenses.iter().enumerate() {
        let profile = team.act(defense, rng)?;
        let mut outcome = score_round(&profile, defense);
        outcome.round_index = k + 1;
        running += i64::from(outcome.team_score);
        cumulative.push(running);
        outcomes.push(outcome);
    }
    Ok(MatchResult {
        team_label: label.to_owned(),
        outcomes,
        cumulative,
    })
}

/// Full match from a master seed: the defense comes from the `"defense"`
/// stream and the team from its own labelled stream.
pub fn run_match(rounds: usize, strategy: &StrategyConfig, master_seed: u64, label: &str) -> Result<MatchResult> {
    if rounds == 0 {
        return Err(QsgError::InvalidArgument("rounds must be ≥ 1".into()));
    }
    let team = Team::new(strategy.clone())?;
    let defenses = defense_sequence(rounds, &mut SeededRng::derive(master_seed, DEFENSE_STREAM));
    let mut rng = SeededRng::derive(master_seed, &team_stream_label(strategy.kind, label));
    play_match(label, &team, &defenses, &mut rng)
}

/// Sabotage budgets of the quantum and classical sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceState {
    pub r_quantum: f64,
    pub r_classical: f64,
    /// Cost of hitting basement A.
    pub s_a: f64,
    /// Cost of hitting basement B.
    pub s_b: f64,
}

/// One player's probabilities of hitting A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerProbs {
    pub p_a: f64,
    pub p_b: f64,
}

impl PlayerProbs {
    pub fn new(p_a: f64, p_b: f64) -> Self {
        Self { p_a, p_b }
    }

    /// Indicator probabilities of a realized action.
    pub fn realized(action: Basement) -> Self {
        match action {
            Basement::A => Self::new(1.0, 0.0),
            Basement::B => Self::new(0.0, 1.0),
        }
    }

    pub fn from_profile(profile: &ActionProfile) -> Vec<Self> {
        profile.actions().iter().map(|&a| Self::realized(a)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResourceMode {
    /// Probabilities as given.
    #[default]
    Expected,
    /// Probabilities must be indicators of sampled actions.
    Realized,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResourceOptions {
    pub mode: ResourceMode,
    /// Resources are clamped at this value from below when set.
    pub floor: Option<f64>,
}

const PROB_SUM_TOL: f64 = 1e-9;

fn spend(probs: &[PlayerProbs], s_a: f64, s_b: f64, mode: ResourceMode, side: &str) -> Result<f64> {
    let mut total = 0.0;
    for (i, p) in probs.iter().enumerate() {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(p.p_a) || !in_unit(p.p_b) {
            return Err(QsgError::InvalidArgument(format!(
                "{side} player {i}: probabilities ({}, {}) outside [0, 1]",
                p.p_a, p.p_b
            )));
        }
        let all_zero = p.p_a == 0.0 && p.p_b == 0.0;
        if !all_zero && (p.p_a + p.p_b - 1.0).abs() > PROB_SUM_TOL {
            return Err(QsgError::InvalidArgument(format!(
                "{side} player {i}: P(A) + P(B) = {} ≠ 1",
                p.p_a + p.p_b
            )));
        }
        if mode == ResourceMode::Realized && !all_zero && p.p_a != 0.0 && p.p_a != 1.0 {
            return Err(QsgError::InvalidArgument(format!(
                "{side} player {i}: realized mode needs indicator probabilities"
            )));
        }
        total += p.p_a * s_a + p.p_b * s_b;
    }
    Ok(total)
}

/// One step of the resource recursion:
/// `R(t+1) = R(t) − Σ_i P^i(A)·S_A − Σ_i P^i(B)·S_B` for each side.
///
/// A player with both probabilities 0 is treated as idle and spends nothing.
pub fn update_resources(
    state: ResourceState,
    quantum: &[PlayerProbs],
    classical: &[PlayerProbs],
    options: ResourceOptions,
) -> Result<ResourceState> {
    let dq = spend(quantum, state.s_a, state.s_b, options.mode, "quantum")?;
    let dc = spend(classical, state.s_a, state.s_b, options.mode, "classical")?;
    let clamp = |r: f64| options.floor.map_or(r, |f| r.max(f));
    Ok(ResourceState {
        r_quantum: clamp(state.r_quantum - dq),
        r_classical: clamp(state.r_classical - dc),
        ..state
    })
}
