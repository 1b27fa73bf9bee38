use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::real::Real;

/// Orthonormal DCT-II of the whole vector, computed with one complex FFT of
/// the even/odd-reordered input.
pub fn dct_2_full<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut v = vec![Complex::new(T::zero(), T::zero()); n];
    for i in 0..n.div_ceil(2) {
        v[i].re = x[2 * i];
    }
    for i in 0..n / 2 {
        v[n - 1 - i].re = x[2 * i + 1];
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut v);
    let nf = n as f64;
    let s0 = T::lit((1.0 / nf).sqrt());
    let sk = T::lit((2.0 / nf).sqrt());
    v.iter()
        .enumerate()
        .map(|(k, c)| {
            let theta = -std::f64::consts::PI * k as f64 / (2.0 * nf);
            let tw = Complex::new(T::lit(theta.cos()), T::lit(theta.sin()));
            let re = (c * tw).re;
            re * if k == 0 { s0 } else { sk }
        })
        .collect()
}

/// First `keep` orthonormal DCT-II coefficients.
pub fn dct_2<T: Real>(x: &[T], keep: usize) -> Result<Vec<T>> {
    if keep > x.len() {
        return Err(Error::KeepTooLarge { keep, len: x.len() });
    }
    let mut c = dct_2_full(x);
    c.truncate(keep);
    Ok(c)
}

/// Inverse of [`dct_2_full`] (orthonormal DCT-III). Missing trailing
/// coefficients are treated as zero; `len` is the output length.
pub fn idct_2<T: Real>(coeffs: &[T], len: usize) -> Vec<T> {
    let nf = len as f64;
    let s0 = (1.0 / nf).sqrt();
    let sk = (2.0 / nf).sqrt();
    (0..len)
        .map(|i| {
            let mut acc = 0.0;
            for (k, c) in coeffs.iter().enumerate().take(len) {
                let s = if k == 0 { s0 } else { sk };
                let ang = std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf);
                acc += s * c.to_f64_lossy() * ang.cos();
            }
            T::lit(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        (0..x.len())
            .map(|k| {
                let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                s * x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * n)).cos())
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn constant_vector_is_dc_only() {
        let c = dct_2(&[2.5f64; 8], 8).unwrap();
        assert!((c[0] - 2.5 * 8f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2, 3, 7, 16, 31, 105] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for (a, b) in dct_2_full(&x).iter().zip(naive(&x)) {
                assert!((a - b).abs() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn keep_too_large() {
        assert!(matches!(dct_2(&[1.0f64; 4], 5), Err(Error::KeepTooLarge { keep: 5, len: 4 })));
        assert_eq!(dct_2(&[1.0f64; 4], 2).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn isometry_and_inverse(x in prop::collection::vec(-10.0f64..10.0, 1..64)) {
            let c = dct_2(&x, x.len()).unwrap();
            let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nc: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((nx - nc).abs() <= 1e-9 * nx.max(1.0));
            let back = idct_2(&c, x.len());
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
