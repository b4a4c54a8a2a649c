//! C ABI over the simulator.
//!
//! Every fallible function returns a [`QsgStatus`]. On failure the message is
//! kept per thread and can be fetched with [`qsg_last_error_message`].
//! Handles are opaque and must be released with their matching `_free`
//! function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qsg::analysis::summarize;
use qsg::channel::{load_noise_profile, load_noise_profile_file, HardwareEffects, NoiseModel, NoiseProfile};
use qsg::circuit::{bell_circuit, w_state_circuit};
use qsg::cli::{render_csv, run_scenario, simulate, validate_config, RunConfig};
use qsg::game::{run_match, MatchResult};
use qsg::strategy::StrategyConfig;
use qsg::QsgError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidArgument = 4,
    Io = 5,
    Simulation = 6,
    Panic = 7,
}

pub const QSG_KIND_CLASSICAL: u32 = 0;
pub const QSG_KIND_BELL: u32 = 1;
pub const QSG_KIND_WSTATE: u32 = 2;
pub const QSG_KIND_HAH: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum QsgStrategyKind {
    Classical,
    Bell,
    Wstate,
    Hah,
}

impl QsgStrategyKind {
    fn from_raw(raw: u32) -> Result<Self, Failure> {
        match raw {
            QSG_KIND_CLASSICAL => Ok(Self::Classical),
            QSG_KIND_BELL => Ok(Self::Bell),
            QSG_KIND_WSTATE => Ok(Self::Wstate),
            QSG_KIND_HAH => Ok(Self::Hah),
            other => Err(Failure(QsgStatus::InvalidArgument, format!("unknown strategy kind {other}"))),
        }
    }
}

/// Summary statistics of one match.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QsgStats {
    pub mean: f64,
    pub std: f64,
    pub p_positive: f64,
    pub accumulated: f64,
    pub n_rounds: u64,
}

/// A parsed hardware noise profile.
pub struct QsgNoiseProfile {
    inner: NoiseProfile,
}

/// The outcome of one team's match.
pub struct QsgMatch {
    inner: MatchResult,
}

/// A validated scenario configuration.
pub struct QsgScenario {
    inner: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(QsgStatus, String);

impl From<QsgError> for Failure {
    fn from(e: QsgError) -> Self {
        let status = match &e {
            QsgError::Schema(_) => QsgStatus::InvalidConfig,
            QsgError::Io { .. } => QsgStatus::Io,
            QsgError::OutOfRange { .. }
            | QsgError::InvalidArgument(_)
            | QsgError::InvalidStrategy(_)
            | QsgError::InvalidBitstring(_)
            | QsgError::TooManyQubits { .. } => QsgStatus::InvalidArgument,
            _ => QsgStatus::Simulation,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QsgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            QsgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QsgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(QsgStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(QsgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qsg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if the last call
/// succeeded. Release with `qsg_string_free`.
#[no_mangle]
pub extern "C" fn qsg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a noise profile from TOML text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_noise_profile_from_str(source: *const c_char, out: *mut *mut QsgNoiseProfile) -> QsgStatus {
    guard(|| {
        let text = read_str(source, "source")?;
        write_out(out, QsgNoiseProfile { inner: load_noise_profile(text)? })
    })
}

/// Loads a noise profile from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_noise_profile_load(path: *const c_char, out: *mut *mut QsgNoiseProfile) -> QsgStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        write_out(out, QsgNoiseProfile { inner: load_noise_profile_file(Path::new(path))? })
    })
}

/// Number of qubits the profile describes readout for.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsg_noise_profile_qubits(profile: *const QsgNoiseProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.readout_error.len())
}

/// # Safety
/// `profile` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsg_noise_profile_free(profile: *mut QsgNoiseProfile) {
    free_handle(profile)
}

/// Plays one team for `rounds` rounds. `kind` is one of the `QSG_KIND_*` constants.
///
/// `intel_prob` is read only for `QSG_KIND_HAH`. `profile` may be
/// NULL for noiseless play; it only affects Bell and W teams.
///
/// # Safety
/// `profile` must be NULL or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_match_run(
    kind: u32,
    team_size: u32,
    intel_prob: f64,
    profile: *const QsgNoiseProfile,
    rounds: u64,
    master_seed: u64,
    out: *mut *mut QsgMatch,
) -> QsgStatus {
    guard(|| {
        let kind = QsgStrategyKind::from_raw(kind)?;
        let n = team_size as usize;
        let mut config = match kind {
            QsgStrategyKind::Classical => StrategyConfig::classical(n),
            QsgStrategyKind::Bell => StrategyConfig { team_size: n, ..StrategyConfig::bell() },
            QsgStrategyKind::Wstate => StrategyConfig::wstate(n),
            QsgStrategyKind::Hah => StrategyConfig::hah(n, intel_prob),
        };
        if let Some(p) = profile.as_ref() {
            if matches!(kind, QsgStrategyKind::Bell | QsgStrategyKind::Wstate) {
                config = config.with_noise(NoiseModel::hardware(p.inner.clone(), HardwareEffects::default()));
            }
        }
        let rounds = usize::try_from(rounds)
            .map_err(|_| Failure(QsgStatus::InvalidArgument, format!("rounds {rounds} too large")))?;
        let result = run_match(rounds, &config, master_seed, "ffi")?;
        write_out(out, QsgMatch { inner: result })
    })
}

/// Number of rounds in the match, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsg_match_len(m: *const QsgMatch) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rounds())
}

/// Copies up to `len` per-round team scores into `buf`.
///
/// # Safety
/// `m` must be a live handle and `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn qsg_match_scores(m: *const QsgMatch, buf: *mut i32, len: usize) -> QsgStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("match"))?;
        if buf.is_null() && len > 0 {
            return Err(null("buf"));
        }
        for (k, s) in m.inner.team_scores().take(len).enumerate() {
            *buf.add(k) = s;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_match_stats(m: *const QsgMatch, out: *mut QsgStats) -> QsgStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("match"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = summarize(&m.inner);
        *out = QsgStats {
            mean: s.mean,
            std: s.std,
            p_positive: s.p_positive,
            accumulated: s.accumulated,
            n_rounds: s.n_rounds as u64,
        };
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsg_match_free(m: *mut QsgMatch) {
    free_handle(m)
}

/// Parses and validates a scenario configuration document. Relative paths
/// are taken relative to the process working directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_scenario_from_toml(toml: *const c_char, out: *mut *mut QsgScenario) -> QsgStatus {
    guard(|| {
        let text = read_str(toml, "toml")?;
        write_out(out, QsgScenario { inner: validate_config(text)? })
    })
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsg_scenario_team_count(s: *const QsgScenario) -> usize {
    s.as_ref().map_or(0, |s| s.inner.teams.len())
}

/// Runs the scenario and writes its CSV and summary files.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qsg_scenario_run(s: *const QsgScenario) -> QsgStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        run_scenario(&s.inner)?;
        Ok(())
    })
}

/// Runs the scenario in memory and returns the results CSV. Release with
/// `qsg_string_free`.
///
/// # Safety
/// `s` must be a live handle; `csv_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsg_scenario_csv(s: *const QsgScenario, csv_out: *mut *mut c_char) -> QsgStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if csv_out.is_null() {
            return Err(null("csv_out"));
        }
        let bytes = render_csv(&simulate(&s.inner)?)?;
        let text = CString::new(bytes).map_err(|_| Failure(QsgStatus::Simulation, "CSV contains NUL".into()))?;
        *csv_out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qsg_scenario_free(s: *mut QsgScenario) {
    free_handle(s)
}

/// Exact noiseless outcome probabilities of a Bell (`n_qubits` = 2) or W
/// preparation circuit, indexed by basis index. `out` must hold `2^n_qubits`
/// values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qsg_circuit_probabilities(
    kind: u32,
    n_qubits: u32,
    out: *mut f64,
    len: usize,
) -> QsgStatus {
    guard(|| {
        let kind = QsgStrategyKind::from_raw(kind)?;
        let n = n_qubits as usize;
        let circuit = match kind {
            QsgStrategyKind::Bell if n == 2 => bell_circuit(),
            QsgStrategyKind::Wstate => w_state_circuit(n)?,
            _ => {
                return Err(Failure(
                    QsgStatus::InvalidArgument,
                    format!("no preparation circuit for {kind:?} with {n} qubits"),
                ))
            }
        };
        let table = circuit.final_state().probabilities();
        let probs = table.as_slice();
        if len < probs.len() {
            return Err(Failure(
                QsgStatus::InvalidArgument,
                format!("buffer holds {len} values, {} needed", probs.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(probs.as_ptr(), out, probs.len());
        Ok(())
    })
}
