//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// `∫_a^b f`, subdividing the worst interval until the summed error estimate
/// meets `max(abs_tol, rel_tol·|I|)`. `breaks` are interior points where `f`
/// has kinks.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    config: &QuadratureConfig,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut interior: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    points.extend(interior);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in points.windows(2) {
        let seg = gauss_kronrod(&f, w[0], w[1]);
        total += seg.value;
        err += seg.error;
        heap.push(seg);
    }
    while err > config.abs_tol.max(config.rel_tol * total.abs()) {
        if heap.len() >= config.max_intervals {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; accept its estimate
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            err = heap.iter().map(|s| s.error).sum();
            if err == 0.0 {
                break;
            }
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // resum to shed accumulated rounding in the running totals
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(sign * heap.iter().map(|s| s.value).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, &[], &Default::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-14);
        let v = integrate(|x| 3.0 * x * x, 2.0, 0.0, &[], &Default::default()).unwrap();
        assert!((v + 8.0).abs() < 1e-14);
    }

    #[test]
    fn kink_with_breakpoint() {
        let f = |x: f64| (x - 0.3).abs();
        let want = 0.5 * 0.3 * 0.3 + 0.5 * 0.7 * 0.7;
        let v = integrate(f, 0.0, 1.0, &[0.3], &Default::default()).unwrap();
        assert!((v - want).abs() < 1e-15);
        let v = integrate(f, 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!((v - want).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ ln(1−x) dx = −1
        let v = integrate(|x| (1.0 - x).ln(), 0.0, 1.0, &[], &Default::default()).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn sharp_peak() {
        let u = 1e4;
        let v = integrate(
            |x: f64| (-u * (x - 0.5) * (x - 0.5)).exp(),
            0.0,
            1.0,
            &[],
            &Default::default(),
        )
        .unwrap();
        let want = (std::f64::consts::PI / u).sqrt();
        assert!((v - want).abs() < 1e-12 * want.max(1.0));
    }
}
