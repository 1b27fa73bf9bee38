//! Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.

use crate::real::Real;

/// Zero crossings of the sinc kernel on each side of the centre tap.
const ZERO_CROSSINGS: f64 = 40.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.85;
/// Kaiser shape parameter (about 80 dB of stopband attenuation).
const KAISER_BETA: f64 = 8.0;
/// Phase tables beyond this size are quantized to this many phases.
const MAX_PHASES: u64 = 4096;

#[derive(Debug, Clone)]
pub struct Resampler {
    up: u64,
    down: u64,
    phases: u64,
    half_taps: usize,
    // phases x (2 * half_taps) kernel samples, row-major
    table: Vec<f64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

impl Resampler {
    pub fn new(from_hz: u32, to_hz: u32) -> Self {
        let g = gcd(u64::from(from_hz), u64::from(to_hz));
        let up = u64::from(to_hz) / g;
        let down = u64::from(from_hz) / g;
        // cutoff in cycles per input sample
        let cutoff = 0.5 * ROLLOFF * (up as f64 / down as f64).min(1.0);
        let half_width = ZERO_CROSSINGS / (2.0 * cutoff);
        let half_taps = half_width.ceil() as usize;
        let phases = up.min(MAX_PHASES);
        let denom = bessel_i0(KAISER_BETA);
        let taps = 2 * half_taps;
        let mut table = Vec::with_capacity(phases as usize * taps);
        for p in 0..phases {
            let frac = p as f64 / phases as f64;
            for slot in 0..taps {
                let offset = slot as f64 - (half_taps as f64 - 1.0);
                let tau = frac - offset;
                let r = tau / half_width;
                let h = if r.abs() >= 1.0 {
                    0.0
                } else {
                    let w = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / denom;
                    2.0 * cutoff * sinc(2.0 * cutoff * tau) * w
                };
                table.push(h);
            }
        }
        Self { up, down, phases, half_taps, table }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        let n = input_len as u64 * self.up;
        n.div_ceil(self.down) as usize
    }

    pub fn process<T: Real>(&self, input: &[T]) -> Vec<T> {
        let n_out = self.output_len(input.len());
        let taps = 2 * self.half_taps;
        let n_in = input.len() as i64;
        let x: Vec<f64> = input.iter().map(|v| v.to_f64_lossy()).collect();
        let mut out = Vec::with_capacity(n_out);
        for m in 0..n_out as u64 {
            let t = m * self.down;
            let centre = (t / self.up) as i64;
            let rem = t % self.up;
            let phase = if self.phases == self.up {
                rem
            } else {
                ((rem as f64 / self.up as f64) * self.phases as f64).round() as u64 % self.phases
            };
            let row = &self.table[phase as usize * taps..(phase as usize + 1) * taps];
            let first = centre - (self.half_taps as i64 - 1);
            let mut acc = 0.0;
            for (slot, &h) in row.iter().enumerate() {
                let j = first + slot as i64;
                if (0..n_in).contains(&j) {
                    acc += x[j as usize] * h;
                }
            }
            out.push(T::lit(acc));
        }
        out
    }
}
