//! Log-spectral-amplitude gain and the exponential integral it needs.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = integral from x to infinity of e^-t / t dt`, `x > 0`.
pub fn exp_int_e1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..100 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Minimum-mean-square-error log-spectral amplitude gain for a-priori SNR
/// `xi` and posterior SNR `gamma`, capped at 1.
pub fn lsa_gain(xi: f64, gamma: f64) -> f64 {
    let r = xi / (1.0 + xi);
    let v = (gamma * r).max(1e-12);
    (r * (0.5 * exp_int_e1(v)).exp()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid quadrature of the defining integral after substituting t = x + u/(1-u).
    fn e1_quadrature(x: f64) -> f64 {
        let n = 200_000;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let t = x + u / (1.0 - u);
            let dt = 1.0 / ((1.0 - u) * (1.0 - u));
            acc += (-t).exp() / t * dt;
        }
        acc / n as f64
    }

    #[test]
    fn e1_matches_quadrature() {
        for &x in &[0.01, 0.1, 0.5, 1.0, 1.5, 3.0, 10.0] {
            let a = exp_int_e1(x);
            let b = e1_quadrature(x);
            assert!(((a - b) / b).abs() < 1e-5, "x={x}: {a} vs {b}");
        }
        // tabulated E1(1) = 0.219383934395520
        assert!((exp_int_e1(1.0) - 0.219_383_934_395_520).abs() < 1e-13);
    }

    #[test]
    fn gain_limits() {
        assert!(lsa_gain(1e4, 1e4) > 0.99);
        assert!(lsa_gain(1e-3, 1.0) < 0.05);
        let mut prev = 0.0;
        for i in 0..50 {
            let g = lsa_gain(10f64.powf(-3.0 + i as f64 * 0.1), 2.0);
            assert!(g >= prev && (0.0..=1.0).contains(&g));
            prev = g;
        }
    }
}
