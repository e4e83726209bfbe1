//! One-dimensional quadrature: Gauss–Legendre rules on `[0, 1]` and adaptive
//! Gauss–Kronrod (7/15) integration with an explicit subdivision cap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default absolute tolerance for adaptive integration.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Default cap on the number of subintervals.
pub const DEFAULT_MAX_INTERVALS: usize = 2000;

/// Nodes and weights of the `count`-point Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 1, "at least one node");
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[count - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[count - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

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

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
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

fn kronrod_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `tolerance`. Hitting `max_intervals` first is an error.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tolerance: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let first = kronrod_segment(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    while error > tolerance {
        if !value.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY, requested: tolerance });
        }
        if heap.len() >= max_intervals {
            return Err(Error::Quadrature { achieved: error, requested: tolerance });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval too small to split further
            return Err(Error::Quadrature { achieved: error, requested: tolerance });
        }
        let left = kronrod_segment(&f, worst.a, mid);
        let right = kronrod_segment(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // resum occasionally to limit drift in the running totals
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    Ok(Integral { value, error, intervals: heap.len() })
}

/// `integrate_adaptive` on `[0, 1]` with the default tolerance and cap.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    integrate_adaptive(f, 0.0, 1.0, DEFAULT_TOLERANCE, DEFAULT_MAX_INTERVALS).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_weights_sum_to_one() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13, "n={n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!(x.iter().all(|&t| t > 0.0 && t < 1.0));
        }
    }

    #[test]
    fn legendre_polynomial_exactness() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let approx: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(d as i32)).sum();
                assert!((approx - 1.0 / (d as f64 + 1.0)).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let seg = kronrod_segment(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((seg.value - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // integrable singularity x^{-1/3}
        let r = integrate_adaptive(|x: f64| x.powf(-1.0 / 3.0), 0.0, 1.0, 1e-10, 2000).unwrap();
        assert!((r.value - 1.5).abs() < 1e-9);
        let r = integrate_unit(|x: f64| x.sqrt()).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        let err = integrate_adaptive(|x: f64| 1.0 / x, 0.0, 1.0, 1e-10, 50).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
