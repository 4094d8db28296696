//! Sample counts sufficient for the sampled optimum to be near-optimal.

use crate::error::{Error, Result};

fn check_accuracy(eps: f64, delta: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid(format!(
            "delta must be positive and finite, got {delta}"
        )));
    }
    Ok(())
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// `log2 C(n, k)` as a sum of logarithms, finite for any size.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).log2())
        .sum()
}

/// `ceil(C (c m ln(c m) + c^2 + ln(1/delta)) / eps^2)` for any positional rule.
/// The constant `C` has no known value and must be supplied.
pub fn sample_complexity_general(
    c: u32,
    m: usize,
    eps: f64,
    delta: f64,
    constant: f64,
) -> Result<u64> {
    check_accuracy(eps, delta)?;
    if !(constant.is_finite() && constant > 0.0) {
        return Err(Error::invalid(format!(
            "constant must be positive, got {constant}"
        )));
    }
    if c == 0 || m == 0 {
        return Err(Error::invalid("c and m must be positive"));
    }
    let cm = f64::from(c) * m as f64;
    let c = f64::from(c);
    Ok(ceil_count(
        constant * (cm * cm.ln() + c * c + (1.0 / delta).ln()) / (eps * eps),
    ))
}

/// `ceil(256 (2 log2 C(m+ck-1, ck-1) + ln(4/delta)) / eps^2)` for k-approval.
pub fn sample_complexity_kapproval(
    c: u32,
    k: usize,
    m: usize,
    eps: f64,
    delta: f64,
) -> Result<u64> {
    check_accuracy(eps, delta)?;
    if k == 0 || k >= m {
        return Err(Error::invalid(format!(
            "need 1 <= k < m, got k = {k}, m = {m}"
        )));
    }
    if c == 0 {
        return Err(Error::invalid("coalition size must be at least 1"));
    }
    let ck = u64::from(c) * k as u64;
    let binom = log2_binomial(m as u64 + ck - 1, ck - 1);
    Ok(ceil_count(
        256.0 * (2.0 * binom + (4.0 / delta).ln()) / (eps * eps),
    ))
}
