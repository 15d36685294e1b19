use crate::{Error, Result};
use std::collections::BinaryHeap;

/// Outcome of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

/// Default cap on the number of intervals.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 20_000;

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

/// Nodes and weights of the 15-point Kronrod rule mapped to `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let (c, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out = [(c, half * WGK[7]); 15];
    for k in 0..7 {
        out[2 * k] = (c - half * XGK[k], half * WGK[k]);
        out[2 * k + 1] = (c + half * XGK[k], half * WGK[k]);
    }
    out
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Piece> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut finite = fc.is_finite();
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        finite &= s.is_finite();
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    if !finite {
        return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
    }
    Ok(Piece {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).abs(),
    })
}

/// Adaptive Gauss–Kronrod (7/15) quadrature with global interval bisection.
pub fn quad_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    quad_adaptive_capped(f, a, b, tol, DEFAULT_MAX_SUBDIVISIONS)
}

pub fn quad_adaptive_capped<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("quadrature needs finite a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let first = kronrod(&f, a, b)?;
    let mut total = first.value;
    let mut err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut count = 1;
    loop {
        let floor = 64.0 * f64::EPSILON * total.abs();
        if err <= tol.max(floor) {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at machine resolution; nothing left to refine.
            heap.push(worst);
            break;
        }
        if count >= max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions: count,
                estimate: err,
            });
        }
        let left = kronrod(&f, worst.a, mid)?;
        let right = kronrod(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        count += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (mut value, mut error) = (0.0, 0.0);
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        subdivisions: count,
    })
}

/// Splits `[a, b]` into `pieces` equal parts and integrates each adaptively.
pub fn quad_piecewise<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize, tol: f64) -> Result<QuadResult> {
    let pieces = pieces.max(1);
    let w = (b - a) / pieces as f64;
    let mut out = QuadResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        subdivisions: 0,
    };
    for i in 0..pieces {
        let lo = a + w * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + w };
        let r = quad_adaptive(&f, lo, hi, tol / pieces as f64)?;
        out.value += r.value;
        out.abs_error_estimate += r.abs_error_estimate;
        out.subdivisions += r.subdivisions;
    }
    Ok(out)
}
