//! Minima-controlled recursive noise averaging with a speech-presence
//! probability per bin.

use std::collections::VecDeque;

use super::{DenoiseConfig, NoiseEstimate};
use crate::real::Real;

/// Half-width (bins) of the cross-frequency median applied to the tracked
/// minima, so narrowband components do not raise the noise reference.
const MEDIAN_HALF_WIDTH: usize = 6;
/// Weights of the 3-tap frequency smoother.
const FREQ_SMOOTH: [f64; 3] = [0.25, 0.5, 0.25];

pub(crate) struct NoiseTracker<T> {
    cfg_alpha_s: T,
    cfg_alpha_p: T,
    cfg_alpha_d: T,
    delta: T,
    bias: T,
    window: usize,
    frame: usize,
    smoothed: Vec<T>,
    history: Vec<VecDeque<(usize, T)>>,
    pub(crate) estimate: NoiseEstimate<T>,
}

fn median<T: Real>(v: &mut [T]) -> T {
    let mid = v.len() / 2;
    v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v[mid]
}

pub(crate) fn cross_frequency_median<T: Real>(v: &[T], half: usize) -> Vec<T> {
    let mut buf = Vec::with_capacity(2 * half + 1);
    (0..v.len())
        .map(|k| {
            buf.clear();
            buf.extend_from_slice(&v[k.saturating_sub(half)..(k + half + 1).min(v.len())]);
            median(&mut buf)
        })
        .collect()
}

fn smooth_frequency<T: Real>(p: &[T]) -> Vec<T> {
    let w: [T; 3] = FREQ_SMOOTH.map(T::lit);
    let n = p.len();
    (0..n)
        .map(|k| {
            let l = p[k.saturating_sub(1)];
            let r = p[(k + 1).min(n - 1)];
            w[0] * l + w[1] * p[k] + w[2] * r
        })
        .collect()
}

impl<T: Real> NoiseTracker<T> {
    pub(crate) fn new(cfg: &DenoiseConfig, first_power: &[T]) -> Self {
        let n = first_power.len();
        let smoothed = smooth_frequency(first_power);
        let psd = cross_frequency_median(first_power, MEDIAN_HALF_WIDTH);
        Self {
            cfg_alpha_s: T::lit(cfg.alpha_s),
            cfg_alpha_p: T::lit(cfg.alpha_p),
            cfg_alpha_d: T::lit(cfg.alpha_d),
            delta: T::lit(cfg.delta),
            bias: T::lit(cfg.min_bias),
            window: cfg.minima_window.max(1),
            frame: 0,
            smoothed,
            history: vec![VecDeque::new(); n],
            estimate: NoiseEstimate { psd, presence_prob: vec![T::zero(); n], minima_window: cfg.minima_window },
        }
    }

    /// Advances one frame and returns the updated estimate.
    pub(crate) fn update(&mut self, power: &[T]) -> &NoiseEstimate<T> {
        let one = T::one();
        let sf = smooth_frequency(power);
        let mut minima = Vec::with_capacity(power.len());
        for (k, &s_new) in sf.iter().enumerate() {
            let s = if self.frame == 0 {
                s_new
            } else {
                self.cfg_alpha_s * self.smoothed[k] + (one - self.cfg_alpha_s) * s_new
            };
            self.smoothed[k] = s;
            let dq = &mut self.history[k];
            while dq.back().is_some_and(|&(_, v)| v >= s) {
                dq.pop_back();
            }
            dq.push_back((self.frame, s));
            while dq.front().is_some_and(|&(i, _)| i + self.window <= self.frame) {
                dq.pop_front();
            }
            minima.push(dq.front().expect("non-empty").1);
        }
        let reference = cross_frequency_median(&minima, MEDIAN_HALF_WIDTH);

        let est = &mut self.estimate;
        for k in 0..power.len() {
            let floor = (self.bias * reference[k]).max(T::min_positive_value());
            let present = if self.smoothed[k] / floor > self.delta { one } else { T::zero() };
            let p = self.cfg_alpha_p * est.presence_prob[k] + (one - self.cfg_alpha_p) * present;
            est.presence_prob[k] = p.max(T::zero()).min(one);
            let a = self.cfg_alpha_d + (one - self.cfg_alpha_d) * est.presence_prob[k];
            est.psd[k] = (a * est.psd[k] + (one - a) * power[k]).max(T::zero());
        }
        self.frame += 1;
        &self.estimate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_filter_ignores_narrow_peaks() {
        let mut v = vec![1.0f64; 40];
        for x in &mut v[18..22] {
            *x = 1000.0;
        }
        let m = cross_frequency_median(&v, MEDIAN_HALF_WIDTH);
        assert!(m.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn smoother_preserves_constant() {
        let s = smooth_frequency(&[2.0f64; 9]);
        assert!(s.iter().all(|&x| (x - 2.0).abs() < 1e-15));
    }
}
