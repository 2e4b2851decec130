//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64;

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
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    // Round-off floor; keeps the loop from chasing noise.
    let floor = 50.0 * f64::EPSILON * value.norm();
    Segment {
        a,
        b,
        value,
        error: error.max(floor),
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrate over consecutive finite intervals `[p0,p1], [p1,p2], ...`;
/// `points` must be sorted.
pub fn integrate_with_breaks<F>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&f, w[0], w[1]));
        }
    }
    loop {
        let (value, error) = heap.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| {
            (v + s.value, e + s.error)
        });
        let tol = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= tol {
            return Ok(QuadResult { value, error });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: value.norm(),
                residual: error,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult { value, error });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: value.norm(),
                residual: error,
            });
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}

/// Integrate over `[a, ∞)` through the map `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F>(f: F, a: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let g = |s: f64| {
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let d = 1.0 - s;
        f(a + s / d) / (d * d)
    };
    integrate_with_breaks(g, &[0.0, 0.5, 1.0], opts)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|r| r.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate_real(|x| 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r - 8.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^1 e^{7ix} dx = (e^{7i} - 1)/(7i)
        let q = integrate(
            |x| Complex64::new(0.0, 7.0 * x).exp(),
            0.0,
            1.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 7.0).exp() - 1.0) / Complex64::new(0.0, 7.0);
        assert!((q.value - exact).norm() < 1e-12);
    }

    #[test]
    fn semi_infinite() {
        let q = integrate_to_infinity(
            |x| Complex64::new((-x).exp(), 0.0),
            0.0,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((q.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn divergent_integrand_reports_residual() {
        let opts = QuadOptions {
            max_intervals: 50,
            ..QuadOptions::default()
        };
        let err = integrate_real(|x| 1.0 / x, 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { residual, .. } if residual > 0.0));
    }
}
