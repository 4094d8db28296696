//! C interface to the `bayesvote` solver.
//!
//! Every fallible function returns a [`BvStatus`]. On failure a message is
//! stored per thread and can be read with [`bv_last_error_message`].
//! Results of a solve live behind the opaque [`BvSolveResult`] handle, which
//! the caller releases with [`bv_solve_result_free`].
//!
//! Matrices and score tables are row-major. Rankings are written as `m`
//! candidate indices from most to least preferred.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::time::Duration;

use bayesvote::matching::decompose;
use bayesvote::optimizer::{
    sample_complexity_kapproval, solve_optimal, SampleSet, SolveOptions, SolveResult,
};
use bayesvote::welfare::regret;
use bayesvote::{Error, Profile, Psm, Ranking, ScoreVector, ScoringRule, StrategyPsm};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    InvalidPsm = 4,
    BufferTooSmall = 5,
    Unsupported = 6,
    Internal = 7,
}

/// Opaque result of [`bv_solve`].
pub struct BvSolveResult {
    inner: SolveResult,
    ballots: Vec<Ranking>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

struct Failure(BvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => BvStatus::DimensionMismatch,
            Error::InvalidPsm(_) => BvStatus::InvalidPsm,
            Error::Unsupported(_) | Error::GuardExceeded(_) => BvStatus::Unsupported,
            Error::Io(_) => BvStatus::Internal,
            _ => BvStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BvStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> BvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            BvStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BvStatus::Internal
        }
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for `len` writes.
unsafe fn output<'a, T>(
    p: *mut T,
    len: usize,
    needed: usize,
    what: &str,
) -> Result<&'a mut [T], Failure> {
    if len < needed {
        return Err(Failure(
            BvStatus::BufferTooSmall,
            format!("{what} needs {needed} entries, got {len}"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

fn write_rankings(votes: &[Ranking], out: &mut [u32]) {
    for (chunk, vote) in out
        .chunks_mut(votes.first().map_or(1, Ranking::len))
        .zip(votes)
    {
        for (slot, &cand) in chunk.iter_mut().zip(vote.order()) {
            *slot = cand as u32;
        }
    }
}

fn read_rankings(flat: &[u32], m: usize) -> Result<Vec<Ranking>, Failure> {
    flat.chunks(m)
        .map(|row| Ranking::new(row.iter().map(|&c| c as usize).collect()).map_err(Failure::from))
        .collect()
}

fn rule_from(alpha: *const u64, m: usize) -> Result<ScoringRule, Failure> {
    let alpha = unsafe { input(alpha, m, "alpha")? };
    Ok(ScoringRule::new(alpha.to_vec())?)
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Finds the coalition strategy winning on the most sampled profiles.
///
/// `alpha` holds the `m` scoring weights. `scores` holds `samples * m`
/// sincere score totals, one row per sampled profile of `n` voters.
/// A non-positive `time_limit_secs` means no limit. On success `*out`
/// receives a handle to free with [`bv_solve_result_free`].
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_solve(
    alpha: *const u64,
    m: usize,
    scores: *const u64,
    samples: usize,
    n: usize,
    c: u32,
    d: usize,
    time_limit_secs: f64,
    out: *mut *mut BvSolveResult,
) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let rule = rule_from(alpha, m)?;
        let table = input(scores, samples.saturating_mul(m), "scores")?;
        let rows = table
            .chunks(m.max(1))
            .map(|r| ScoreVector::new(r.to_vec()))
            .collect();
        let set = SampleSet::new(rule, n, rows)?;
        let mut options = SolveOptions::default();
        if time_limit_secs > 0.0 && time_limit_secs.is_finite() {
            options.time_limit = Some(Duration::from_secs_f64(time_limit_secs));
        }
        let inner = solve_optimal(&set, c, d, &options)?;
        let ballots = decompose(inner.strategy.psm(), c)?;
        *out = Box::into_raw(Box::new(BvSolveResult { inner, ballots }));
        Ok(())
    })
}

/// Releases a handle from [`bv_solve`]. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_free(result: *mut BvSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of samples the strategy wins; 0 for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_objective(result: *const BvSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.objective)
}

/// Number of samples solved over; 0 for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_samples(result: *const BvSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.samples)
}

/// Fraction of samples won after manipulation; NaN for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_win_probability(result: *const BvSolveResult) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.inner.win_probability)
}

/// Fraction of samples won only because of the coalition; NaN for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_manipulation_probability(
    result: *const BvSolveResult,
) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.inner.manipulation_probability)
}

/// Whether the search finished, proving the objective maximal.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_optimal(result: *const BvSolveResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.optimal)
}

/// Writes the `m * m` strategy matrix: entry `(i, j)` counts coalition
/// ballots placing candidate `i` at position `j`.
///
/// # Safety
/// `result` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_strategy(
    result: *const BvSolveResult,
    out: *mut u32,
    len: usize,
) -> BvStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let psm = r.inner.strategy.psm();
        let m = psm.m();
        let dst = output(out, len, m * m, "out")?;
        for (i, row) in psm.rows().enumerate() {
            dst[i * m..(i + 1) * m].copy_from_slice(row);
        }
        Ok(())
    })
}

/// Writes the `c` coalition ballots as `c * m` candidate indices.
///
/// # Safety
/// `result` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bv_solve_result_ballots(
    result: *const BvSolveResult,
    out: *mut u32,
    len: usize,
) -> BvStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let needed = r.ballots.len() * r.inner.strategy.m();
        write_rankings(&r.ballots, output(out, len, needed, "out")?);
        Ok(())
    })
}

/// Splits an `m * m` strategy matrix with line sums `c` into `c` ballots,
/// written as `c * m` candidate indices.
///
/// # Safety
/// `psm` must be valid for `m * m` reads and `out` for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bv_recover_ballots(
    psm: *const u32,
    m: usize,
    c: u32,
    out: *mut u32,
    len: usize,
) -> BvStatus {
    guard(|| {
        let flat = input(psm, m * m, "psm")?;
        let rows = flat.chunks(m.max(1)).map(<[u32]>::to_vec).collect();
        let x = Psm::from_rows(rows)?;
        let dst = output(out, len, c as usize * m, "out")?;
        write_rankings(&decompose(&x, c)?, dst);
        Ok(())
    })
}

/// Score lost by the sincere winner's replacement when `c` coalition
/// ballots (`c * m` indices) are added to `n` sincere ballots (`n * m`).
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_regret(
    alpha: *const u64,
    m: usize,
    votes: *const u32,
    n: usize,
    coalition: *const u32,
    c: u32,
    d: usize,
    out: *mut u64,
) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let rule = rule_from(alpha, m)?;
        let sincere = Profile::new(m, read_rankings(input(votes, n * m, "votes")?, m)?)?;
        let ballots = read_rankings(input(coalition, c as usize * m, "coalition")?, m)?;
        let strategy = StrategyPsm::from_votes(&Profile::new(m, ballots)?, d)?;
        *out = regret(&sincere, &strategy, &rule)?;
        Ok(())
    })
}

/// Sufficient sample count for k-approval at accuracy `eps` and
/// confidence `1 - delta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bv_sample_complexity_kapproval(
    c: u32,
    k: usize,
    m: usize,
    eps: f64,
    delta: f64,
    out: *mut u64,
) -> BvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = sample_complexity_kapproval(c, k, m, eps, delta)?;
        Ok(())
    })
}
