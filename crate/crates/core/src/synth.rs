//! Deterministic synthetic signals with known ground truth: tones, noise,
//! two-talker dialogues, and labelled mood/environment clips.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classify::{EnvironmentLabel, MoodLabel};
use crate::dsp::{frame_count, FRAME_LEN, HOP};

const TAU: f64 = std::f64::consts::TAU;

pub fn tone(freq_hz: f64, amp: f64, n: usize, rate: u32) -> Vec<f64> {
    (0..n).map(|i| amp * (TAU * freq_hz * i as f64 / f64::from(rate)).sin()).collect()
}

/// Naive (non-band-limited) sawtooth in `[-amp, amp]`.
pub fn sawtooth(freq_hz: f64, amp: f64, n: usize, rate: u32) -> Vec<f64> {
    let step = freq_hz / f64::from(rate);
    (0..n)
        .map(|i| {
            let ph = (i as f64 * step).fract();
            amp * (2.0 * ph - 1.0)
        })
        .collect()
}

/// Zero-mean Gaussian noise with standard deviation `sigma`.
pub fn white_noise(sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// Uniform noise in `[-amp, amp]`.
pub fn uniform_noise(amp: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-amp..=amp)).collect()
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Frame-level ground truth for a signal whose active region is `[onset, offset)`:
/// a frame counts as active when its centre lies inside the region.
pub fn frame_truth(n: usize, onset: usize, offset: usize) -> Vec<bool> {
    (0..frame_count(n, FRAME_LEN, HOP))
        .map(|t| {
            let centre = t * HOP + FRAME_LEN / 2;
            centre >= onset && centre < offset
        })
        .collect()
}

/// `n_each` samples of ±1e-4 uniform noise followed by `n_each` samples of a
/// full-scale 1 kHz tone; returns samples and per-frame ground truth.
pub fn silence_then_tone(n_each: usize, seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut x = uniform_noise(1e-4, n_each, seed);
    x.extend(tone(1000.0, 1.0, n_each, 11025));
    let truth = frame_truth(2 * n_each, n_each, 2 * n_each);
    (x, truth)
}

/// Low-level noise with randomly placed loud bursts.
pub fn bursty_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = white_noise(0.01, n, seed ^ 0x9e37_79b9);
    let bursts = rng.gen_range(1..6);
    for _ in 0..bursts {
        let len = rng.gen_range(1000..5000).min(n);
        let start = rng.gen_range(0..=n - len);
        let gain = rng.gen_range(2.0..30.0);
        x[start..start + len].iter_mut().for_each(|v| *v *= gain);
    }
    x.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
}

/// Two-pole resonator centred on `freq` with bandwidth `bw` (Hz).
fn resonate(x: &[f64], freq: f64, bw: f64, rate: f64) -> Vec<f64> {
    let r = (-std::f64::consts::PI * bw / rate).exp();
    let a1 = 2.0 * r * (TAU * freq / rate).cos();
    let a2 = r * r;
    let g = 1.0 - r;
    let (mut y1, mut y2) = (0.0, 0.0);
    x.iter()
        .map(|&v| {
            let y = g * v + a1 * y1 - a2 * y2;
            y2 = y1;
            y1 = y;
            y
        })
        .collect()
}

fn normalize_peak(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
}

/// Source-filter voice: sawtooth excitation following `f0` (per sample, Hz;
/// 0 = silent), optional aspiration noise, a bank of formant resonators.
fn voice(f0: &[f64], breath: f64, formants: &[(f64, f64)], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = 11025.0;
    let mut phase = 0.0f64;
    let excitation: Vec<f64> = f0
        .iter()
        .map(|&f| {
            if f <= 0.0 {
                return 0.0;
            }
            phase = (phase + f / rate).fract();
            let n: f64 = StandardNormal.sample(rng);
            (1.0 - breath) * (2.0 * phase - 1.0) + breath * n * 0.5
        })
        .collect();
    let mut out = vec![0.0; excitation.len()];
    for &(fc, bw) in formants {
        for (o, v) in out.iter_mut().zip(resonate(&excitation, fc, bw, rate)) {
            *o += v;
        }
    }
    // direct path keeps upper harmonics
    for (o, e) in out.iter_mut().zip(&excitation) {
        *o += 0.05 * e;
    }
    out
}

/// Alternating two-talker dialogue: `block_s`-second turns, talker 0 a
/// 120 Hz sawtooth through low formants, talker 1 a 220 Hz sawtooth through
/// high formants. Returns samples and the talker index of every sample.
pub fn two_speaker_dialogue(total_s: f64, block_s: f64, first: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let rate = 11025.0;
    let n = (total_s * rate) as usize;
    let block = (block_s * rate) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|i| ((i / block) + first) % 2).collect();
    let talkers = [
        (120.0, vec![(500.0, 80.0), (900.0, 100.0)]),
        (220.0, vec![(1800.0, 120.0), (2900.0, 150.0)]),
    ];
    let mut out = vec![0.0; n];
    for (who, (f0, formants)) in talkers.iter().enumerate() {
        let track: Vec<f64> = labels.iter().map(|&l| if l == who { *f0 } else { 0.0 }).collect();
        let mut v = voice(&track, 0.02, formants, &mut rng);
        normalize_peak(&mut v, 0.6);
        for (o, s) in out.iter_mut().zip(v) {
            *o += s;
        }
    }
    let bg = white_noise(1e-3, n, seed.wrapping_add(1));
    for (o, b) in out.iter_mut().zip(bg) {
        *o += b;
    }
    (out, labels)
}

/// Phrase gate: on-segments of random length separated by short pauses.
fn phrases(n: usize, on: (f64, f64), off: (f64, f64), rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = 11025.0;
    let mut gate = vec![0.0; n];
    let mut i = (rng.gen_range(0.1..0.3) * rate) as usize;
    while i < n {
        let len = (rng.gen_range(on.0..on.1) * rate) as usize;
        let ramp = 220usize;
        for k in 0..len.min(n - i) {
            let a = (k.min(len - k) as f64 / ramp as f64).min(1.0);
            gate[i + k] = a;
        }
        i += len + (rng.gen_range(off.0..off.1) * rate) as usize;
    }
    gate
}

/// A labelled synthetic clip: a mood-specific voice over an environment-specific background.
pub fn mood_clip(mood: MoodLabel, env: EnvironmentLabel, duration_s: f64, seed: u64) -> Vec<f64> {
    let rate = 11025.0;
    let n = (duration_s * rate) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = |rng: &mut ChaCha8Rng| rng.gen_range(0.92..1.08);
    let t = |i: usize| i as f64 / rate;

    let (f0, breath, formants, gate) = match mood {
        MoodLabel::Laugh => {
            let base = 280.0 * spread(&mut rng);
            let f0: Vec<f64> = (0..n).map(|i| base * (1.0 + 0.08 * (TAU * 1.3 * t(i)).sin())).collect();
            let bursts: Vec<f64> = (0..n).map(|i| if (t(i) * 5.0).fract() < 0.5 { 1.0 } else { 0.0 }).collect();
            let g = phrases(n, (0.6, 0.9), (0.3, 0.4), &mut rng);
            let gate = g.iter().zip(bursts).map(|(a, b)| a * b).collect();
            (f0, 0.35, vec![(800.0, 120.0), (1300.0, 150.0)], gate)
        }
        MoodLabel::Sing => {
            let base = 330.0 * spread(&mut rng);
            let f0 = (0..n).map(|i| base * (1.0 + 0.03 * (TAU * 5.5 * t(i)).sin())).collect();
            let gate = phrases(n, (0.7, 0.9), (0.3, 0.35), &mut rng);
            (f0, 0.02, vec![(600.0, 60.0), (1100.0, 80.0), (2400.0, 100.0)], gate)
        }
        MoodLabel::Cry => {
            let base = 450.0 * spread(&mut rng);
            let mut f = base;
            let f0 = (0..n)
                .map(|i| {
                    if i % 40 == 0 {
                        f = base * (1.0 + 0.06 * rng.gen_range(-1.0..1.0));
                    }
                    f
                })
                .collect();
            let sob: Vec<f64> = (0..n).map(|i| 0.55 + 0.45 * (TAU * 1.5 * t(i)).sin()).collect();
            let g = phrases(n, (0.6, 0.9), (0.3, 0.4), &mut rng);
            let gate = g.iter().zip(sob).map(|(a, b)| a * b).collect();
            (f0, 0.15, vec![(1000.0, 150.0), (2000.0, 200.0)], gate)
        }
        MoodLabel::Arguing => {
            let base = 180.0 * spread(&mut rng);
            let mut f = base;
            let f0 = (0..n)
                .map(|i| {
                    if i % 550 == 0 {
                        f = base * rng.gen_range(0.7..1.4);
                    }
                    f
                })
                .collect();
            let gate = phrases(n, (0.6, 0.9), (0.3, 0.4), &mut rng);
            (f0, 0.08, vec![(700.0, 200.0), (1600.0, 250.0), (3000.0, 300.0)], gate)
        }
        MoodLabel::Sigh => {
            let base = 150.0 * spread(&mut rng);
            let f0 = (0..n).map(|i| base * (1.0 - 0.35 * (t(i) % 1.0))).collect();
            let gate = phrases(n, (0.7, 0.9), (0.3, 0.4), &mut rng);
            (f0, 0.7, vec![(400.0, 300.0), (900.0, 400.0)], gate)
        }
    };

    let mut v = voice(&f0, breath, &formants, &mut rng);
    normalize_peak(&mut v, 1.0);
    let level = match mood {
        MoodLabel::Arguing => 0.8,
        MoodLabel::Sigh => 0.25,
        _ => 0.5,
    };
    let mut out: Vec<f64> = v.iter().zip(&gate).map(|(s, g)| s * g * level).collect();

    let speech_rms = rms(&out).max(1e-6);
    let bg = background(env, n, &mut rng);
    let (snr_db, bg_rms) = match env {
        EnvironmentLabel::Indoor => (30.0, rms(&bg)),
        EnvironmentLabel::Outdoor => (10.0, rms(&bg)),
        EnvironmentLabel::TvMusic => (18.0, rms(&bg)),
    };
    let scale = speech_rms / 10f64.powf(snr_db / 20.0) / bg_rms.max(1e-12);
    for (o, b) in out.iter_mut().zip(bg) {
        *o = (*o + b * scale).clamp(-1.0, 1.0);
    }
    out
}

fn background(env: EnvironmentLabel, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    match env {
        // dull room tone: heavily low-passed noise plus mains hum
        EnvironmentLabel::Indoor => {
            let mut y = 0.0;
            white
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    y = 0.97 * y + 0.03 * w;
                    y + 0.02 * (TAU * 60.0 * i as f64 / 11025.0).sin()
                })
                .collect()
        }
        // broadband traffic/wind
        EnvironmentLabel::Outdoor => {
            let mut y = 0.0;
            white
                .iter()
                .map(|&w| {
                    y = 0.6 * y + 0.4 * w;
                    0.5 * y + 0.5 * w
                })
                .collect()
        }
        // chord changes every half second plus a little hiss
        EnvironmentLabel::TvMusic => {
            let roots = [220.0, 261.6, 196.0, 293.7];
            let chord_len = 5512;
            (0..n)
                .map(|i| {
                    let root = roots[(i / chord_len) % roots.len()];
                    let t = i as f64 / 11025.0;
                    let c = (TAU * root * t).sin() + 0.8 * (TAU * root * 1.26 * t).sin() + 0.6 * (TAU * root * 1.5 * t).sin();
                    c + 0.1 * white[i]
                })
                .collect()
        }
    }
}
