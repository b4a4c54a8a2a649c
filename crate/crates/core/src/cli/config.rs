//! Run configuration: TOML document, defaults, overrides and validation.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::channel::{load_noise_profile_file, HardwareEffects, NoiseModel, NoiseProfile, StandardNoise};
use crate::circuit::DEFAULT_SHOTS;
use crate::error::{FieldIssue, QsgError, Result};
use crate::strategy::{SamplingMode, StrategyConfig, StrategyKind, HAH_INTEL_2Q, HAH_INTEL_3Q, MAX_TEAM_SIZE};

pub const DEFAULT_ROUNDS: usize = 100;
pub const DEFAULT_SEED: u64 = 20251021;
pub const DEFAULT_ERROR_RATE: f64 = 0.05;
pub const DEFAULT_OUTPUT: &str = "results.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Coordinated teams with an intel channel in place of the quantum teams.
    Hah,
    #[default]
    Ideal,
    /// Standard single-qubit noise after every gate.
    Snm,
    /// Calibration profile.
    Hardware,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Hah => "hah",
            Scenario::Ideal => "ideal",
            Scenario::Snm => "snm",
            Scenario::Hardware => "hardware",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = QsgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hah" => Ok(Scenario::Hah),
            "ideal" => Ok(Scenario::Ideal),
            "snm" => Ok(Scenario::Snm),
            "hardware" => Ok(Scenario::Hardware),
            other => Err(QsgError::InvalidArgument(format!(
                "unknown scenario {other:?} (expected hah, ideal, snm or hardware)"
            ))),
        }
    }
}

/// One team entry as written in the document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamEntry {
    pub label: String,
    pub kind: StrategyKind,
    pub team_size: usize,
    #[serde(default)]
    pub intel_prob: Option<f64>,
}

impl TeamEntry {
    fn new(label: &str, kind: StrategyKind, team_size: usize, intel_prob: Option<f64>) -> Self {
        Self { label: label.to_owned(), kind, team_size, intel_prob }
    }
}

/// The document as written, every field optional. Paths are resolved
/// against the document's directory when loaded from a file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<Scenario>,
    pub rounds: Option<usize>,
    pub shots: Option<usize>,
    pub master_seed: Option<u64>,
    pub noise_kind: Option<StandardNoise>,
    pub error_rate: Option<f64>,
    pub profile_path: Option<PathBuf>,
    pub hardware_effects: Option<HardwareEffects>,
    pub sampling: Option<SamplingMode>,
    pub output_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
    pub teams: Option<Vec<TeamEntry>>,
}

impl RawConfig {
    pub fn parse(source: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(source)
            .map_err(|e| QsgError::Schema(vec![FieldIssue::new("", e.to_string().trim().to_string())]))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            QsgError::Schema(vec![FieldIssue::new(path, e.into_inner().message().trim().to_string())])
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QsgError::io(path, e))?;
        let mut raw = Self::parse(&text)?;
        if let Some(dir) = path.parent() {
            raw.resolve_paths(dir);
        }
        Ok(raw)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        for p in [&mut self.profile_path, &mut self.output_path, &mut self.summary_path]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

/// Command-line overrides layered over the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub rounds: Option<usize>,
    pub shots: Option<usize>,
    pub master_seed: Option<u64>,
    pub noise_kind: Option<StandardNoise>,
    pub error_rate: Option<f64>,
    pub profile_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, raw: &mut RawConfig) {
        fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
            if let Some(v) = value {
                *slot = Some(v.clone());
            }
        }
        set(&mut raw.scenario, &self.scenario);
        set(&mut raw.rounds, &self.rounds);
        set(&mut raw.shots, &self.shots);
        set(&mut raw.master_seed, &self.master_seed);
        set(&mut raw.noise_kind, &self.noise_kind);
        set(&mut raw.error_rate, &self.error_rate);
        set(&mut raw.profile_path, &self.profile_path);
        set(&mut raw.output_path, &self.output_path);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamSpec {
    pub label: String,
    pub strategy: StrategyConfig,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub rounds: usize,
    pub shots: usize,
    pub master_seed: u64,
    pub noise_kind: Option<StandardNoise>,
    pub error_rate: f64,
    pub profile_path: Option<PathBuf>,
    pub hardware_effects: HardwareEffects,
    pub sampling: SamplingMode,
    pub teams: Vec<TeamSpec>,
    pub output_path: PathBuf,
    pub summary_path: PathBuf,
    /// Loaded from `profile_path` for the hardware scenario.
    pub profile: Option<NoiseProfile>,
}

impl RunConfig {
    /// The noise quantum teams run under in this scenario.
    pub fn noise_model(&self) -> Result<Option<NoiseModel>> {
        match self.scenario {
            Scenario::Hah | Scenario::Ideal => Ok(None),
            Scenario::Snm => {
                let kind = self.noise_kind.ok_or_else(|| QsgError::InvalidArgument("snm needs noise_kind".into()))?;
                Ok(Some(NoiseModel::standard(kind, self.error_rate)?))
            }
            Scenario::Hardware => {
                let profile = self
                    .profile
                    .clone()
                    .ok_or_else(|| QsgError::InvalidArgument("hardware needs a profile".into()))?;
                Ok(Some(NoiseModel::hardware(profile, self.hardware_effects)))
            }
        }
    }

    /// Human-readable description of the noise in effect.
    pub fn noise_description(&self) -> String {
        match self.scenario {
            Scenario::Hah | Scenario::Ideal => "none".into(),
            Scenario::Snm => format!(
                "{} p={}",
                self.noise_kind.map_or("?", StandardNoise::name),
                self.error_rate
            ),
            Scenario::Hardware => format!(
                "profile {}",
                self.profile.as_ref().map_or("?", |p| p.name.as_str())
            ),
        }
    }
}

/// Teams played when the document lists none: two classical teams and two
/// quantum (or, for `hah`, coordinated) teams of two and three players.
pub fn default_teams(scenario: Scenario) -> Vec<TeamEntry> {
    let mut teams = vec![
        TeamEntry::new("2C", StrategyKind::Classical, 2, None),
        TeamEntry::new("3C", StrategyKind::Classical, 3, None),
    ];
    if scenario == Scenario::Hah {
        teams.push(TeamEntry::new("2Q", StrategyKind::Hah, 2, Some(HAH_INTEL_2Q)));
        teams.push(TeamEntry::new("3Q", StrategyKind::Hah, 3, Some(HAH_INTEL_3Q)));
    } else {
        teams.push(TeamEntry::new("2Q", StrategyKind::Bell, 2, None));
        teams.push(TeamEntry::new("3Q", StrategyKind::Wstate, 3, None));
    }
    teams
}

/// `<output stem>.summary.txt` next to the output file.
pub fn default_summary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.summary.txt"))
}

/// Parses a document and validates it. Relative paths stay relative to the
/// current directory.
pub fn validate_config(document: &str) -> Result<RunConfig> {
    resolve(RawConfig::parse(document)?)
}

/// Loads a document from disk, applies overrides and validates.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut raw = match path {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    overrides.apply(&mut raw);
    resolve(raw)
}

/// Applies defaults and checks every invariant, reporting all problems at once.
pub fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let mut issues = Vec::new();
    let mut issue = |path: &str, msg: String| issues.push(FieldIssue::new(path, msg));

    let scenario = raw.scenario.unwrap_or_default();
    let rounds = raw.rounds.unwrap_or(DEFAULT_ROUNDS);
    if rounds == 0 {
        issue("rounds", "must be ≥ 1".into());
    }
    let shots = raw.shots.unwrap_or(DEFAULT_SHOTS);
    if shots == 0 {
        issue("shots", "must be ≥ 1".into());
    }
    let error_rate = raw.error_rate.unwrap_or(DEFAULT_ERROR_RATE);
    if !(0.0..=1.0).contains(&error_rate) {
        issue("error_rate", format!("{error_rate} is outside [0, 1]"));
    }
    if scenario == Scenario::Snm && raw.noise_kind.is_none() {
        issue("noise_kind", "required for scenario snm (depolarizing, amplitude or bitflip)".into());
    }

    let mut profile = None;
    if scenario == Scenario::Hardware {
        match &raw.profile_path {
            None => issue("profile_path", "required for scenario hardware".into()),
            Some(p) => match load_noise_profile_file(p) {
                Ok(prof) => profile = Some(prof),
                Err(QsgError::Schema(inner)) => {
                    for i in inner {
                        let path = if i.path.is_empty() {
                            "profile_path".to_string()
                        } else {
                            format!("profile_path:{}", i.path)
                        };
                        issue(&path, i.message);
                    }
                }
                Err(e) => issue("profile_path", e.to_string()),
            },
        }
    }

    let entries = raw.teams.unwrap_or_else(|| default_teams(scenario));
    if entries.is_empty() {
        issue("teams", "at least one team is required".into());
    }
    let mut seen = HashSet::new();
    let mut teams = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let at = |field: &str| format!("teams[{i}].{field}");
        let before = issues.len();
        let mut issue = |path: String, msg: String| issues.push(FieldIssue::new(path, msg));
        let label = entry.label.trim();
        if label.is_empty() || label.contains([',', '"', '\n', '\r']) {
            issue(at("label"), format!("{:?} must be nonempty and free of commas, quotes and newlines", entry.label));
        } else if !seen.insert(label.to_owned()) {
            issue(at("label"), format!("duplicate team label {label:?}"));
        }
        if !(1..=MAX_TEAM_SIZE).contains(&entry.team_size) {
            issue(at("team_size"), format!("{} is outside 1..={MAX_TEAM_SIZE}", entry.team_size));
        }
        match (entry.kind, entry.intel_prob) {
            (StrategyKind::Hah, None) => issue(at("intel_prob"), "required for hah teams".into()),
            (StrategyKind::Hah, Some(q)) if !(0.0..=1.0).contains(&q) => {
                issue(at("intel_prob"), format!("{q} is outside [0, 1]"))
            }
            (StrategyKind::Hah, Some(_)) => {}
            (_, Some(_)) => issue(at("intel_prob"), "only valid for hah teams".into()),
            _ => {}
        }
        if scenario == Scenario::Hah && entry.kind.is_quantum_circuit() {
            issue(at("kind"), "scenario hah plays hah teams in place of circuit teams".into());
        }
        match entry.kind {
            StrategyKind::Bell if entry.team_size != 2 => issue(at("team_size"), "bell teams have exactly 2 players".into()),
            StrategyKind::Wstate if entry.team_size < 2 => issue(at("team_size"), "wstate teams need ≥ 2 players".into()),
            _ => {}
        }
        if let (Some(p), true) = (&profile, entry.kind.is_quantum_circuit()) {
            let covered = p.readout_error.len();
            if covered < entry.team_size {
                issue(
                    at("team_size"),
                    format!("profile {:?} describes {covered} qubits, team needs {}", p.name, entry.team_size),
                );
            }
        }
        if issues.len() == before {
            teams.push(TeamSpec {
                label: label.to_owned(),
                strategy: StrategyConfig {
                    kind: entry.kind,
                    team_size: entry.team_size,
                    shots: shots.max(1),
                    intel_prob: entry.intel_prob,
                    noise: None,
                    sampling: raw.sampling.unwrap_or_default(),
                },
            });
        }
    }

    if !issues.is_empty() {
        return Err(QsgError::Schema(issues));
    }

    let output_path = raw.output_path.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let mut config = RunConfig {
        scenario,
        rounds,
        shots,
        master_seed: raw.master_seed.unwrap_or(DEFAULT_SEED),
        noise_kind: raw.noise_kind,
        error_rate,
        profile_path: raw.profile_path,
        hardware_effects: raw.hardware_effects.unwrap_or_default(),
        sampling: raw.sampling.unwrap_or_default(),
        summary_path: raw.summary_path.unwrap_or_else(|| default_summary_path(&output_path)),
        output_path,
        teams,
        profile,
    };
    let noise = config.noise_model()?;
    for team in &mut config.teams {
        if team.strategy.kind.is_quantum_circuit() {
            team.strategy.noise = noise.clone();
        }
        team.strategy.validate()?;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn issue_paths(err: QsgError) -> Vec<String> {
        err.issues().iter().map(|i| i.path.clone()).collect()
    }

    #[test]
    fn empty_document_gives_defaults() {
        let c = validate_config("").unwrap();
        assert_eq!(c.scenario, Scenario::Ideal);
        assert_eq!(c.rounds, 100);
        assert_eq!(c.shots, 1024);
        assert_eq!(c.master_seed, 20251021);
        assert_eq!(c.error_rate, 0.05);
        let labels: Vec<_> = c.teams.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["2C", "3C", "2Q", "3Q"]);
        assert_eq!(c.teams[3].strategy.kind, StrategyKind::Wstate);
        assert_eq!(c.summary_path, PathBuf::from("results.summary.txt"));
        assert!(c.teams.iter().all(|t| t.strategy.noise.is_none()));
    }

    #[test]
    fn hardware_needs_profile_path() {
        let err = validate_config("scenario = \"hardware\"").unwrap_err();
        assert_eq!(issue_paths(err), ["profile_path"]);
    }

    #[test]
    fn error_rate_range() {
        let err = validate_config("error_rate = 1.5").unwrap_err();
        assert_eq!(issue_paths(err), ["error_rate"]);
    }

    #[test]
    fn snm_needs_noise_kind_and_attaches_noise() {
        let err = validate_config("scenario = \"snm\"").unwrap_err();
        assert_eq!(issue_paths(err), ["noise_kind"]);
        let c = validate_config("scenario = \"snm\"\nnoise_kind = \"depolarizing\"").unwrap();
        assert!(c.teams[0].strategy.noise.is_none());
        assert!(c.teams[2].strategy.noise.is_some());
        assert_eq!(c.noise_description(), "depolarizing p=0.05");
    }

    #[test]
    fn hah_defaults_and_requirements() {
        let c = validate_config("scenario = \"hah\"").unwrap();
        assert_eq!(c.teams[2].strategy.intel_prob, Some(HAH_INTEL_2Q));
        assert_eq!(c.teams[3].strategy.intel_prob, Some(HAH_INTEL_3Q));

        let doc = r#"
scenario = "hah"
[[teams]]
label = "x"
kind = "hah"
team_size = 3
[[teams]]
label = "y"
kind = "bell"
team_size = 2
"#;
        let paths = issue_paths(validate_config(doc).unwrap_err());
        assert_eq!(paths, ["teams[0].intel_prob", "teams[1].kind"]);
    }

    #[test]
    fn all_team_problems_reported() {
        let doc = r#"
[[teams]]
label = "a"
kind = "bell"
team_size = 3
[[teams]]
label = "a"
kind = "classical"
team_size = 9
intel_prob = 0.5
[[teams]]
label = "b,c"
kind = "wstate"
team_size = 1
"#;
        let paths = issue_paths(validate_config(doc).unwrap_err());
        assert_eq!(
            paths,
            [
                "teams[0].team_size",
                "teams[1].label",
                "teams[1].team_size",
                "teams[1].intel_prob",
                "teams[2].label",
                "teams[2].team_size"
            ]
        );
    }

    #[test]
    fn unknown_fields_and_values_are_named() {
        let err = validate_config("roundz = 3").unwrap_err();
        assert!(err.to_string().contains("roundz"), "{err}");
        let err = validate_config("scenario = \"quantum\"").unwrap_err();
        assert_eq!(issue_paths(err), ["scenario"]);
        let err = validate_config("[[teams]]\nlabel = \"a\"\nkind = \"bell\"").unwrap_err();
        assert_eq!(issue_paths(err), ["teams[0]"]);
        assert!(validate_config("rounds = 0").is_err());
        assert!(validate_config("teams = []").is_err());
    }

    #[test]
    fn file_paths_resolve_against_document() {
        let dir = tempfile::tempdir().unwrap();
        let profile = dir.path().join("p.toml");
        std::fs::write(&profile, crate::channel::KYIV_LIKE_PROFILE).unwrap();
        let cfg = dir.path().join("run.toml");
        let mut f = std::fs::File::create(&cfg).unwrap();
        writeln!(f, "scenario = \"hardware\"\nprofile_path = \"p.toml\"\noutput_path = \"out/r.csv\"").unwrap();
        let c = load_config(Some(&cfg), &Overrides::default()).unwrap();
        assert_eq!(c.output_path, dir.path().join("out/r.csv"));
        assert_eq!(c.summary_path, dir.path().join("out/r.summary.txt"));
        assert_eq!(c.profile.as_ref().unwrap().name, "kyiv-like");
        assert!(c.teams[3].strategy.noise.is_some());

        let over = Overrides { rounds: Some(7), scenario: Some(Scenario::Ideal), ..Default::default() };
        let c = load_config(Some(&cfg), &over).unwrap();
        assert_eq!((c.rounds, c.scenario), (7, Scenario::Ideal));
    }

    #[test]
    fn bad_profile_issues_are_prefixed() {
        let dir = tempfile::tempdir().unwrap();
        let profile = dir.path().join("p.toml");
        std::fs::write(&profile, "name = \"x\"\ntwo_qubit_error = 2.0\nreadout_error = []\n[single_qubit_error]\n").unwrap();
        let doc = format!("scenario = \"hardware\"\nprofile_path = {:?}", profile.to_str().unwrap());
        let paths = issue_paths(validate_config(&doc).unwrap_err());
        assert!(paths.iter().any(|p| p == "profile_path:two_qubit_error"), "{paths:?}");
        let missing = "scenario = \"hardware\"\nprofile_path = \"/nonexistent/p.toml\"";
        assert_eq!(issue_paths(validate_config(missing).unwrap_err()), ["profile_path"]);
    }
}
