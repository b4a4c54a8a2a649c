//! Runs every team of a scenario against one shared defense sequence and
//! writes the results table and summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{sampling_band, summarize, RoundLaw, Stats};
use crate::error::{QsgError, Result};
use crate::game::{defense_sequence, play_match, team_stream_label, Defense, MatchResult, DEFENSE_STREAM};
use crate::qstate::SeededRng;
use crate::strategy::{Basement, StrategyKind, Team};

use super::config::{RunConfig, TeamSpec};

pub const CSV_HEADER: [&str; 6] = ["round", "team", "defense", "actions", "team_score", "cumulative"];
/// Width of the band printed next to each mean, in standard errors.
pub const BAND_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct TeamReport {
    pub spec: TeamSpec,
    pub result: MatchResult,
    pub stats: Stats,
    pub law: RoundLaw,
    /// Exact probability of the team's correlation signature, for circuit teams.
    pub signature: Option<(&'static str, f64)>,
}

impl TeamReport {
    pub fn band(&self) -> f64 {
        sampling_band(self.stats.n_rounds, self.law.std, BAND_SIGMAS)
    }

    pub fn within_band(&self) -> bool {
        (self.stats.mean - self.law.mean).abs() <= self.band()
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub defenses: Vec<Defense>,
    pub teams: Vec<TeamReport>,
}

fn signature(team: &Team) -> Option<(&'static str, f64)> {
    let table = team.outcome_table()?;
    match team.config().kind {
        StrategyKind::Bell => Some((
            "P(identical actions)",
            table.mass_where(|b| b.weight() == 0 || b.weight() as usize == b.n_qubits()),
        )),
        StrategyKind::Wstate => Some(("P(exactly one A)", table.mass_where(|b| b.weight() == 1))),
        _ => None,
    }
}

/// Plays all teams without touching the filesystem.
pub fn simulate(config: &RunConfig) -> Result<RunReport> {
    let defenses = defense_sequence(config.rounds, &mut SeededRng::derive(config.master_seed, DEFENSE_STREAM));
    let teams: Vec<Team> = config
        .teams
        .iter()
        .map(|spec| Team::new(spec.strategy.clone()))
        .collect::<Result<_>>()?;

    let results: Vec<Result<MatchResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .teams
            .iter()
            .zip(&teams)
            .map(|(spec, team)| {
                let defenses = &defenses;
                scope.spawn(move || {
                    let label = team_stream_label(spec.strategy.kind, &spec.label);
                    let mut rng = SeededRng::derive(config.master_seed, &label);
                    play_match(&spec.label, team, defenses, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(QsgError::InvalidState("team worker panicked".into()))))
            .collect()
    });

    let mut reports = Vec::with_capacity(teams.len());
    for ((spec, team), result) in config.teams.iter().zip(&teams).zip(results) {
        let result = result?;
        reports.push(TeamReport {
            spec: spec.clone(),
            stats: summarize(&result),
            law: RoundLaw::for_team(team),
            signature: signature(team),
            result,
        });
    }
    Ok(RunReport { defenses, teams: reports })
}

/// CSV rows ordered by round, then by team in configuration order.
pub fn render_csv(report: &RunReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| QsgError::InvalidState(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for k in 0..report.defenses.len() {
        for team in &report.teams {
            let o = &team.result.outcomes[k];
            w.write_record([
                o.round_index.to_string(),
                team.spec.label.clone(),
                o.defense.to_string(),
                o.profile.to_string(),
                o.team_score.to_string(),
                team.result.cumulative[k].to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| QsgError::InvalidState(format!("csv: {e}")))
}

pub fn render_summary(config: &RunConfig, report: &RunReport) -> String {
    let mut s = String::new();
    let strong_a = report.defenses.iter().filter(|d| d.strong == Basement::A).count();
    let _ = writeln!(s, "scenario: {}", config.scenario);
    let _ = writeln!(s, "rounds: {}", config.rounds);
    let _ = writeln!(s, "master_seed: {}", config.master_seed);
    let _ = writeln!(s, "noise: {}", config.noise_description());
    let _ = writeln!(s, "defense: A strong in {strong_a} of {} rounds", report.defenses.len());
    for t in &report.teams {
        let st = &t.stats;
        let cfg = &t.spec.strategy;
        let _ = writeln!(s);
        let _ = write!(s, "team {} ({}, {} players", t.spec.label, cfg.kind.name(), cfg.team_size);
        if let Some(q) = cfg.intel_prob {
            let _ = write!(s, ", intel_prob {q}");
        }
        let _ = writeln!(s, ")");
        let _ = writeln!(s, "  mean (μ): {:.4}", st.mean);
        let _ = writeln!(s, "  std (σ): {:.4}", st.std);
        let _ = writeln!(s, "  P(+): {:.4}", st.p_positive);
        let _ = writeln!(s, "  accumulated: {}", st.accumulated);
        let _ = writeln!(s, "  analytic mean: {:.4} (per-round std {:.4})", t.law.mean, t.law.std);
        let _ = writeln!(
            s,
            "  {:.0}σ band: [{:.4}, {:.4}], mean {} band",
            BAND_SIGMAS,
            t.law.mean - t.band(),
            t.law.mean + t.band(),
            if t.within_band() { "inside" } else { "outside" }
        );
        if let Some((name, p)) = t.signature {
            let _ = writeln!(s, "  {name}: {p:.6}");
        }
    }
    s
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| QsgError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| QsgError::io(path, e))
}

/// Simulates, then writes the CSV and summary files.
pub fn run_scenario(config: &RunConfig) -> Result<RunReport> {
    let report = simulate(config)?;
    write_file(&config.output_path, &render_csv(&report)?)?;
    write_file(&config.summary_path, render_summary(config, &report).as_bytes())?;
    Ok(report)
}
