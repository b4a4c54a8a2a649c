//! Team decision rules.
//!
//! Player `i` of a quantum team reads qubit `i` of the measured bitstring;
//! a `1` means basement A and a `0` means basement B. Since bitstrings are
//! written with qubit 0 rightmost, `"001"` gives player 0 = A and players
//! 1, 2 = B. Action profiles are written player 0 first (`"ABB"`).

use std::fmt;

use serde::Deserialize;

use crate::channel::NoiseModel;
use crate::circuit::{bell_circuit, w_state_circuit, PreparedCircuit, DEFAULT_SHOTS};
use crate::error::{check_range, QsgError, Result};
use crate::game::Defense;
use crate::qstate::{Bitstring, ProbabilityTable, SeededRng, MAX_QUBITS};

/// Largest team the engine plays.
pub const MAX_TEAM_SIZE: usize = 5;
/// Intel probability reproducing a long-run mean of 0.86 for two players.
pub const HAH_INTEL_2Q: f64 = 0.715;
/// Intel probability reproducing a long-run mean of 1.96 for three players.
pub const HAH_INTEL_3Q: f64 = 0.8267;

/// A sabotage target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basement {
    A,
    B,
}

impl Basement {
    pub fn other(self) -> Self {
        match self {
            Basement::A => Basement::B,
            Basement::B => Basement::A,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Basement::A => 'A',
            Basement::B => 'B',
        }
    }
}

impl fmt::Display for Basement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One sabotage choice per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionProfile(Vec<Basement>);

impl ActionProfile {
    pub fn new(actions: Vec<Basement>) -> Result<Self> {
        if actions.is_empty() {
            return Err(QsgError::InvalidArgument("an action profile needs at least one player".into()));
        }
        Ok(Self(actions))
    }

    pub fn actions(&self) -> &[Basement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, target: Basement) -> usize {
        self.0.iter().filter(|&&a| a == target).count()
    }

    /// All players chose the same basement.
    pub fn is_unanimous(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl From<Bitstring> for ActionProfile {
    fn from(bits: Bitstring) -> Self {
        ActionProfile(
            (0..bits.n_qubits())
                .map(|q| if bits.bit(q) { Basement::A } else { Basement::B })
                .collect(),
        )
    }
}

/// Maps a measured bitstring to actions: player `i` reads qubit `i`
/// (character `n-1-i`), `'1'` ⇒ A, `'0'` ⇒ B.
pub fn bitstring_to_actions(bits: &str) -> Result<ActionProfile> {
    let parsed: Bitstring = bits.parse()?;
    Ok(parsed.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Classical,
    Bell,
    Wstate,
    Hah,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Classical => "classical",
            StrategyKind::Bell => "bell",
            StrategyKind::Wstate => "wstate",
            StrategyKind::Hah => "hah",
        }
    }

    pub fn is_quantum_circuit(self) -> bool {
        matches!(self, StrategyKind::Bell | StrategyKind::Wstate)
    }
}

/// How a quantum team turns a circuit execution into one joint bitstring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// One direct draw from the outcome law. Distributed exactly like
    /// picking a uniform entry of a shot memory.
    #[default]
    Direct,
    /// Execute `shots` shots with memory and pick one entry uniformly.
    Memory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub team_size: usize,
    pub shots: usize,
    pub intel_prob: Option<f64>,
    pub noise: Option<NoiseModel>,
    pub sampling: SamplingMode,
}

impl StrategyConfig {
    fn base(kind: StrategyKind, team_size: usize) -> Self {
        Self {
            kind,
            team_size,
            shots: DEFAULT_SHOTS,
            intel_prob: None,
            noise: None,
            sampling: SamplingMode::Direct,
        }
    }

    pub fn classical(team_size: usize) -> Self {
        Self::base(StrategyKind::Classical, team_size)
    }

    pub fn bell() -> Self {
        Self::base(StrategyKind::Bell, 2)
    }

    pub fn wstate(team_size: usize) -> Self {
        Self::base(StrategyKind::Wstate, team_size)
    }

    pub fn hah(team_size: usize, intel_prob: f64) -> Self {
        Self {
            intel_prob: Some(intel_prob),
            ..Self::base(StrategyKind::Hah, team_size)
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_sampling(mut self, sampling: SamplingMode) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QsgError::InvalidStrategy(msg));
        let n = self.team_size;
        match self.kind {
            StrategyKind::Bell if n != 2 => return bad(format!("bell team needs exactly 2 players, got {n}")),
            StrategyKind::Wstate if !(2..=MAX_QUBITS).contains(&n) => {
                return bad(format!("wstate team needs 2..={MAX_QUBITS} players, got {n}"))
            }
            _ if n == 0 => return bad("team size must be ≥ 1".into()),
            _ => {}
        }
        match (self.kind, self.intel_prob) {
            (StrategyKind::Hah, None) => return bad("hah team needs intel_prob".into()),
            (StrategyKind::Hah, Some(q)) => {
                check_range("intel_prob", q, 0.0, 1.0)?;
            }
            (_, Some(_)) => return bad("intel_prob is only meaningful for hah teams".into()),
            _ => {}
        }
        if self.shots == 0 {
            return bad("shots must be ≥ 1".into());
        }
        Ok(())
    }
}

/// Each player independently picks A or B with probability 1/2.
pub fn classical_action(n: usize, rng: &mut SeededRng) -> ActionProfile {
    ActionProfile(
        (0..n.max(1))
            .map(|_| if rng.coin() { Basement::A } else { Basement::B })
            .collect(),
    )
}

/// Perfectly coordinated team with a Bernoulli intel channel: with
/// probability `intel_prob` everyone hits the undefended basement, otherwise
/// everyone hits the defended one. Long-run mean `n·(2q − 1)`.
pub fn hah_action(n: usize, intel_prob: f64, defense: Defense, rng: &mut SeededRng) -> Result<ActionProfile> {
    check_range("intel_prob", intel_prob, 0.0, 1.0)?;
    let target = if rng.bernoulli(intel_prob) {
        defense.undefended()
    } else {
        defense.strong
    };
    ActionProfile::new(vec![target; n.max(1)])
}

/// Builds the team's circuit, executes it and maps one joint bitstring to
/// the whole team's actions.
pub fn quantum_action(config: &StrategyConfig, rng: &mut SeededRng) -> Result<ActionProfile> {
    let team = Team::new(config.clone())?;
    match &team.engine {
        Engine::Circuit(prepared) => Ok(draw_joint(prepared, config, rng)?.into()),
        _ => Err(QsgError::InvalidStrategy(format!(
            "{} is not a circuit strategy",
            config.kind.name()
        ))),
    }
}

fn draw_joint(prepared: &PreparedCircuit, config: &StrategyConfig, rng: &mut SeededRng) -> Result<Bitstring> {
    match config.sampling {
        SamplingMode::Direct => Ok(prepared.sample_shot(rng)),
        SamplingMode::Memory => {
            let record = prepared.run(config.shots, rng)?;
            Ok(record.memory()[rng.index(record.shots())])
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Classical,
    Circuit(PreparedCircuit),
    Hah(f64),
}

/// A validated team, with any circuit work done once up front.
#[derive(Debug, Clone)]
pub struct Team {
    config: StrategyConfig,
    engine: Engine,
}

impl Team {
    pub fn new(config: StrategyConfig) -> Result<Self> {
        config.validate()?;
        let engine = match config.kind {
            StrategyKind::Classical => Engine::Classical,
            StrategyKind::Hah => Engine::Hah(config.intel_prob.unwrap_or_default()),
            StrategyKind::Bell => Engine::Circuit(PreparedCircuit::new(&bell_circuit(), config.noise.as_ref())?),
            StrategyKind::Wstate => Engine::Circuit(PreparedCircuit::new(
                &w_state_circuit(config.team_size)?,
                config.noise.as_ref(),
            )?),
        };
        Ok(Self { config, engine })
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn size(&self) -> usize {
        self.config.team_size
    }

    /// Whether the team's choices can depend on the hidden defense.
    pub fn reads_defense(&self) -> bool {
        matches!(self.engine, Engine::Hah(_))
    }

    /// Exact joint outcome law of a circuit team, readout error included.
    pub fn outcome_table(&self) -> Option<ProbabilityTable> {
        match &self.engine {
            Engine::Circuit(p) => Some(p.outcome_table()),
            _ => None,
        }
    }

    /// One round of decisions. Only the HAH engine looks at `defense`.
    pub fn act(&self, defense: Defense, rng: &mut SeededRng) -> Result<ActionProfile> {
        match &self.engine {
            Engine::Classical => Ok(classical_action(self.config.team_size, rng)),
            Engine::Circuit(prepared) => Ok(draw_joint(prepared, &self.config, rng)?.into()),
            Engine::Hah(q) => hah_action(self.config.team_size, *q, defense, rng),
        }
    }
}
