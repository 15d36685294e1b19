use crate::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Largest supported order.
pub const MAX_ORDER: usize = 10_000;

/// Bessel function of the first kind `J_n(x)` for integer `n ≥ 0` and `x ≥ 0`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j requires finite x >= 0, got {x}")));
    }
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("bessel_j order {n} exceeds {MAX_ORDER}")));
    }
    Ok(j_unchecked(n, x))
}

pub(crate) fn j_unchecked(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= 2.0 {
        return series(n, x);
    }
    let nf = n as f64;
    if x >= 30.0 && nf * nf <= x {
        return hankel(n, x);
    }
    if x >= 30.0 && nf < x {
        let mut jm = hankel(0, x);
        if n == 0 {
            return jm;
        }
        let mut j = hankel(1, x);
        for k in 1..n {
            let jp = (2.0 * k as f64 / x) * j - jm;
            jm = j;
            j = jp;
        }
        return j;
    }
    miller(n, x)
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=n {
        lead *= half / k as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= -q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// Hankel asymptotic expansion; accurate when `x ≥ 30` and `n² ≤ x`.
fn hankel(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..400usize {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > prev && k > n + 2 {
            break;
        }
        prev = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if mag < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let cb = (c + s) * FRAC_1_SQRT_2;
    let sb = (s - c) * FRAC_1_SQRT_2;
    let (cw, sw) = match n % 4 {
        0 => (cb, sb),
        1 => (sb, -cb),
        2 => (-cb, -sb),
        _ => (-sb, cb),
    };
    (2.0 / (PI * x)).sqrt() * (p * cw - q * sw)
}

fn miller_start(top: usize, x: f64) -> usize {
    let base = top.max(x.ceil() as usize) as f64;
    let m = (base + 20.0 + 12.0 * base.sqrt()) as usize;
    m + (m % 2)
}

const BIG: f64 = 1e250;
const SMALL: f64 = 1e-250;

fn miller(n: usize, x: f64) -> f64 {
    let m = miller_start(n, x);
    let mut jp = 0.0;
    let mut j = 1e-30;
    let mut ans = 0.0;
    let mut sum = if m % 2 == 0 { 2.0 * j } else { 0.0 };
    for k in (1..=m).rev() {
        let jm = (2.0 * k as f64 / x) * j - jp;
        jp = j;
        j = jm;
        let idx = k - 1;
        if idx == n {
            ans = j;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * j;
        }
        if j.abs() > BIG {
            j *= SMALL;
            jp *= SMALL;
            ans *= SMALL;
            sum *= SMALL;
        }
    }
    sum += j;
    ans / sum
}

/// Order beyond which `J_k(x)` is below roughly 1e-20 for every `k`; used to
/// cut Fourier–Bessel sums without loss of double precision.
pub fn negligible_order(x: f64) -> usize {
    (x + 12.0 * x.cbrt() + 24.0).ceil() as usize
}

/// Fills `out[k] = J_k(x)` for `k = 0..out.len()` by one backward recurrence.
/// Entries with `k > negligible_order(x)` are set to zero. Returns the number
/// of leading entries that were actually computed.
pub fn bessel_j_sequence(x: f64, out: &mut [f64]) -> usize {
    let len = out.len();
    if len == 0 {
        return 0;
    }
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return 1;
    }
    let eff = len.min(negligible_order(x) + 1);
    out[eff..].fill(0.0);
    let top = eff - 1;
    let m = miller_start(top, x);
    let inv = 2.0 / x;
    let mut jp = 0.0;
    let mut j = 1e-30;
    let mut sum = if m % 2 == 0 { 2.0 * j } else { 0.0 };
    if m <= top {
        out[m] = j;
    }
    for k in (1..=m).rev() {
        let jm = (k as f64 * inv) * j - jp;
        jp = j;
        j = jm;
        let idx = k - 1;
        if idx <= top {
            out[idx] = j;
        }
        if idx > 0 && idx % 2 == 0 {
            sum += 2.0 * j;
        }
        if j.abs() > BIG {
            j *= SMALL;
            jp *= SMALL;
            sum *= SMALL;
            for v in out[idx.min(top + 1)..=top].iter_mut() {
                *v *= SMALL;
            }
        }
    }
    sum += j;
    let scale = 1.0 / sum;
    for v in out[..eff].iter_mut() {
        *v *= scale;
    }
    eff
}

/// The `k`-th positive zero of `J_0`, found by bisection inside the bracket
/// `[(k − 3/4)π, (k + 1/4)π]` suggested by the large-argument form of `J_0`.
pub fn bessel_j_zero(k: usize) -> Result<f64> {
    if !(1..=100).contains(&k) {
        return Err(Error::Domain(format!("bessel_j_zero index {k} outside 1..=100")));
    }
    let mut a = (k as f64 - 0.75) * PI;
    let mut b = (k as f64 + 0.25) * PI;
    let mut fa = j_unchecked(0, a);
    let fb = j_unchecked(0, b);
    if fa * fb > 0.0 {
        return Err(Error::Domain(format!("no sign change bracketing zero {k}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = j_unchecked(0, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: J_n(x) = (1/2π) ∫ cos(nτ − x sin τ) dτ over one
    /// period, by the trapezoid rule (exponentially accurate for periodic
    /// integrands once the node count exceeds n + x).
    fn oracle(n: usize, x: f64) -> f64 {
        let m = 2 * (n + x.ceil() as usize) + 200;
        let mut s = 0.0;
        for i in 0..m {
            let t = 2.0 * PI * i as f64 / m as f64;
            s += (n as f64 * t - x * t.sin()).cos();
        }
        s / m as f64
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0).unwrap(), 0.0);
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(MAX_ORDER + 1, 1.0).is_err());
        let v = bessel_j(10, 1.0).unwrap();
        assert!(v.abs() <= 0.2f64.powi(10));
    }

    #[test]
    fn frozen_reference_values() {
        // Reference values from 40-digit arithmetic, rounded to 17 digits.
        let cases = [
            (0usize, 1.0, 0.765_197_686_557_966_55),
            (1, 1.0, 0.440_050_585_744_933_52),
            (5, 10.0, -0.234_061_528_186_793_64),
            (10, 1.0, 2.630_615_123_687_453_2e-10),
            (0, 50.0, 0.055_812_327_669_251_815),
            (2, 100.0, -0.021_528_757_344_505_366),
            (100, 50.0, 1.115_927_369_083_809_3e-21),
            (30, 30.0, 0.143_935_850_010_307_21),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x).unwrap();
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1e-300) + 1e-16,
                "J_{n}({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn agrees_with_trapezoid_oracle() {
        for &n in &[0usize, 1, 2, 5, 17, 40, 99] {
            for &x in &[0.3, 1.7, 2.5, 7.0, 19.9, 31.0, 45.0, 77.7, 130.0] {
                let got = bessel_j(n, x).unwrap();
                let want = oracle(n, x);
                assert!((got - want).abs() < 1e-13, "n={n} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn first_zeros() {
        let z1 = bessel_j_zero(1).unwrap();
        let z2 = bessel_j_zero(2).unwrap();
        assert!((z1 - 2.404_825_557_695_773).abs() < 1e-10);
        assert!((z2 - 5.520_078_110_286_311).abs() < 1e-10);
        assert!(bessel_j(0, 2.404_825_557_695_773).unwrap().abs() < 1e-10);
        let z99 = bessel_j_zero(99).unwrap();
        let z100 = bessel_j_zero(100).unwrap();
        assert!((z100 - z99 - PI).abs() < 1e-3);
        assert!(bessel_j_zero(0).is_err());
    }

    #[test]
    fn sequence_matches_scalar() {
        let mut buf = vec![0.0; 160];
        for &x in &[0.01, 0.5, 2.0, 3.3, 12.0, 40.0, 88.0] {
            let eff = bessel_j_sequence(x, &mut buf);
            assert!(eff >= 1);
            for (k, &v) in buf.iter().enumerate().take(120) {
                let want = bessel_j(k, x).unwrap();
                assert!((v - want).abs() < 1e-13, "k={k} x={x}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn negligible_order_is_negligible() {
        for i in 1..400 {
            let x = i as f64 * 0.5;
            let k = negligible_order(x);
            assert!(bessel_j(k, x).unwrap().abs() < 1e-19, "x={x}");
        }
    }

    #[test]
    fn sum_of_squares_identity() {
        for &x in &[0.7, 6.0, 19.0, 55.0] {
            let mut buf = vec![0.0; 400];
            bessel_j_sequence(x, &mut buf);
            let s = buf[0] * buf[0] + 2.0 * buf[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }
}
