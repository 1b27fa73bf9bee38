use crate::error::{Error, Result};
use crate::real::Real;

/// Normalized autocorrelation for lags `0..=max_lag`.
///
/// Each lag is normalized by the energies of the two overlapping segments,
/// `r[l] = sum x[n] x[n+l] / sqrt(sum x[n]^2 * sum x[n+l]^2)`, so `r[0] = 1`
/// and `|r[l]| <= 1`. Lags whose overlap has zero energy yield 0.
pub fn autocorrelation<T: Real>(frame: &[T], max_lag: usize) -> Result<Vec<T>> {
    if max_lag >= frame.len() {
        return Err(Error::LagTooLarge { max_lag, frame_len: frame.len() });
    }
    if frame.iter().all(|&x| x == T::zero()) {
        return Err(Error::SilentFrame);
    }
    Ok(autocorrelation_unchecked(frame, 0, max_lag))
}

/// Lags `min_lag..=max_lag` without argument validation; index 0 of the result is `min_lag`.
pub fn autocorrelation_unchecked<T: Real>(frame: &[T], min_lag: usize, max_lag: usize) -> Vec<T> {
    let n = frame.len();
    // prefix[i] = sum of squares of frame[..i]
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &x in frame {
        acc = acc + x * x;
        prefix.push(acc);
    }
    (min_lag..=max_lag)
        .map(|lag| {
            let head = prefix[n - lag];
            let tail = prefix[n] - prefix[lag];
            let denom = (head * tail).sqrt();
            if denom <= T::zero() {
                return T::zero();
            }
            let cross = frame[..n - lag].iter().zip(&frame[lag..]).fold(T::zero(), |a, (&x, &y)| a + x * y);
            (cross / denom).max(-T::one()).min(T::one())
        })
        .collect()
}
