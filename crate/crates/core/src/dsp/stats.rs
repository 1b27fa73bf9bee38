use crate::error::{Error, Result};
use crate::real::Real;

/// Linear-interpolation percentile: rank `p / 100 * (n - 1)` between the
/// bracketing order statistics.
pub fn percentile<T: Real>(values: &[T], p: f64) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidPercentile(p));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = T::lit(rank - lo as f64);
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}
