use crate::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 10_000;

fn check(n: usize, m: usize, x: f64) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Domain(format!("degree {n} exceeds {MAX_DEGREE}")));
    }
    if m > n {
        return Err(Error::Domain(format!("order {m} exceeds degree {n}")));
    }
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("argument {x} outside [-1, 1]")));
    }
    Ok(())
}

/// `√((2m−1)!!/(2m)!!)`, the leading constant of the normalized `f_m^m`.
pub(crate) fn diagonal_constant(m: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=m {
        c *= (2 * k - 1) as f64 / (2 * k) as f64;
    }
    c.sqrt()
}

/// Normalized associated Legendre function `√((n−m)!/(n+m)!)·P_n^m(x)`
/// (no Condon–Shortley phase).
pub fn legendre_f(n: usize, m: usize, x: f64) -> Result<f64> {
    check(n, m, x)?;
    Ok(normalized(n, m, x))
}

pub(crate) fn normalized(n: usize, m: usize, x: f64) -> f64 {
    let s2 = (1.0 - x * x).max(0.0);
    let start = diagonal_constant(m) * s2.powf(0.5 * m as f64);
    upward(n, m, x, start)
}

/// Degree recurrence started from `f_m^m = start`.
fn upward(n: usize, m: usize, x: f64, start: f64) -> f64 {
    if n == m {
        return start;
    }
    let mut prev = 0.0;
    let mut cur = start;
    for k in (m + 1)..=n {
        let (a, b) = coefficients(k, m);
        let next = a * x * cur - b * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[inline]
pub(crate) fn coefficients(k: usize, m: usize) -> (f64, f64) {
    let kf = k as f64;
    let mf = m as f64;
    let denom = ((kf - mf) * (kf + mf)).sqrt();
    let a = (2.0 * kf - 1.0) / denom;
    let b = ((kf + mf - 1.0) * (kf - mf - 1.0)).max(0.0).sqrt() / denom;
    (a, b)
}

/// Fills `out[i] = f_{m+i}^m(x)` for `i = 0..out.len()`.
pub fn legendre_f_degrees(m: usize, x: f64, out: &mut [f64]) -> Result<()> {
    if out.is_empty() {
        return Ok(());
    }
    check(m + out.len() - 1, m, x)?;
    let s2 = (1.0 - x * x).max(0.0);
    out[0] = diagonal_constant(m) * s2.powf(0.5 * m as f64);
    let mut prev = 0.0;
    for i in 1..out.len() {
        let (a, b) = coefficients(m + i, m);
        let next = a * x * out[i - 1] - b * prev;
        prev = out[i - 1];
        out[i] = next;
    }
    Ok(())
}

/// Value and derivative of `legendre_f(n, m, ·)` at an interior point.
pub fn legendre_f_with_derivative(n: usize, m: usize, x: f64) -> Result<(f64, f64)> {
    check(n, m, x)?;
    if x.abs() >= 1.0 {
        return Err(Error::Domain("derivative requested at an endpoint".into()));
    }
    let f = normalized(n, m, x);
    let below = if n > m { normalized(n - 1, m, x) } else { 0.0 };
    let c = ((n + m) as f64 * (n - m) as f64).sqrt();
    let d = (c * below - n as f64 * x * f) / (1.0 - x * x);
    Ok((f, d))
}

/// Reduced functions `q_n^m(z) = f_n^m(z)/(1−z²)^{m/2}` for `m = 0..=n`,
/// polynomials in `z`. These give the spherical harmonics in ambient form.
pub fn reduced_legendre_orders(n: usize, z: f64, out: &mut [f64]) {
    debug_assert!(out.len() > n);
    let mut diag = 1.0;
    for m in 0..=n {
        if m > 0 {
            diag *= (2 * m - 1) as f64 / (2 * m) as f64;
        }
        out[m] = upward(n, m, z, diag.sqrt());
    }
}

/// `out[m] = f_n^m(x)` for `m = 0..=n`.
pub fn legendre_f_orders(n: usize, x: f64, out: &mut [f64]) -> Result<()> {
    check(n, 0, x)?;
    if out.len() <= n {
        return Err(Error::Domain("output buffer shorter than n + 1".into()));
    }
    orders_with_sine(n, x, (1.0 - x * x).max(0.0).sqrt(), out);
    Ok(())
}

/// As [`legendre_f_orders`] with `√(1−x²)` supplied, which keeps full
/// relative accuracy near `x = ±1`.
pub(crate) fn orders_with_sine(n: usize, x: f64, s: f64, out: &mut [f64]) {
    let mut diag = 1.0;
    let mut power = 1.0;
    for m in 0..=n {
        if m > 0 {
            diag *= (2 * m - 1) as f64 / (2 * m) as f64;
            power *= s;
        }
        out[m] = upward(n, m, x, diag.sqrt() * power);
    }
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> Result<f64> {
    check(n, 0, x)?;
    Ok(legendre_p_unchecked(n, x))
}

pub(crate) fn legendre_p_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Rodrigues-style oracle: explicit coefficients of P_n via
    /// P_n(x) = 2^{-n} Σ_k (−1)^k C(n,k) C(2n−2k, n) x^{n−2k}.
    fn p_explicit(n: usize, x: f64) -> f64 {
        let binom = |a: usize, b: usize| -> f64 {
            let mut r = 1.0;
            for i in 0..b {
                r *= (a - i) as f64 / (i + 1) as f64;
            }
            r
        };
        let mut s = 0.0;
        for k in 0..=n / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(n, k) * binom(2 * n - 2 * k, n) * x.powi((n - 2 * k) as i32);
        }
        s / 2f64.powi(n as i32)
    }

    /// Factorial-based oracle for small degrees.
    fn f_factorial(n: usize, m: usize, x: f64) -> f64 {
        // P_n^m = (1−x²)^{m/2} d^m/dx^m P_n, differentiating the explicit polynomial.
        let binom = |a: usize, b: usize| -> f64 {
            let mut r = 1.0;
            for i in 0..b {
                r *= (a - i) as f64 / (i + 1) as f64;
            }
            r
        };
        let mut s = 0.0;
        for k in 0..=n / 2 {
            let p = n - 2 * k;
            if p < m {
                continue;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut falling = 1.0;
            for i in 0..m {
                falling *= (p - i) as f64;
            }
            s += sign * binom(n, k) * binom(2 * n - 2 * k, n) * falling * x.powi((p - m) as i32);
        }
        s /= 2f64.powi(n as i32);
        let mut ratio = 1.0;
        for i in (n - m + 1)..=(n + m) {
            ratio /= i as f64;
        }
        ratio.sqrt() * (1.0 - x * x).powf(0.5 * m as f64) * s
    }

    #[test]
    fn trivial_values() {
        assert!((legendre_f(1, 0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(legendre_f(7, 3, 1.0).unwrap(), 0.0);
        assert!((legendre_p(2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(legendre_p(40, 1.0).unwrap(), 1.0);
        assert!(legendre_f(3, 4, 0.0).is_err());
        assert!(legendre_p(3, 1.5).is_err());
    }

    #[test]
    fn polynomial_oracle() {
        for n in 0..=10 {
            for &x in &[-0.9, -0.3, 0.0, 0.3, 0.77] {
                let want = p_explicit(n, x);
                assert!((legendre_p(n, x).unwrap() - want).abs() < 1e-12);
            }
        }
        assert!((legendre_p(5, 0.3).unwrap() - p_explicit(5, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn factorial_oracle() {
        for n in 0..=12 {
            for m in 0..=n {
                for &x in &[0.05, 0.4, 0.81, 0.97] {
                    let want = f_factorial(n, m, x);
                    let got = legendre_f(n, m, x).unwrap();
                    assert!((got - want).abs() < 1e-12, "n={n} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for &(n, m) in &[(5usize, 2usize), (12, 0), (30, 7), (60, 60)] {
            for &x in &[0.1, 0.5, 0.9] {
                let (_, d) = legendre_f_with_derivative(n, m, x).unwrap();
                let h = 1e-6;
                let fd = (normalized(n, m, x + h) - normalized(n, m, x - h)) / (2.0 * h);
                assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()), "n={n} m={m} x={x}");
            }
        }
    }

    #[test]
    fn reduced_functions_recombine() {
        let n = 25;
        let z: f64 = 0.37;
        let mut q = vec![0.0; n + 1];
        reduced_legendre_orders(n, z, &mut q);
        let s = (1.0 - z * z).sqrt();
        for m in 0..=n {
            let want = legendre_f(n, m, z).unwrap();
            assert!((q[m] * s.powi(m as i32) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn order_sweep_matches_pointwise() {
        let mut out = vec![0.0; 31];
        legendre_f_orders(30, -0.41, &mut out).unwrap();
        for (m, v) in out.iter().enumerate() {
            assert!((v - legendre_f(30, m, -0.41).unwrap()).abs() < 1e-14);
        }
        // Addition theorem at coincident points: f_0² + 2Σ f_m² = 1.
        let s = out[0] * out[0] + 2.0 * out[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_sweep_matches_pointwise() {
        let mut out = vec![0.0; 40];
        legendre_f_degrees(6, 0.63, &mut out).unwrap();
        for (i, v) in out.iter().enumerate() {
            assert!((v - legendre_f(6 + i, 6, 0.63).unwrap()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn order_zero_is_legendre_polynomial(n in 0usize..300, x in -1.0f64..1.0) {
            let a = legendre_f(n, 0, x).unwrap();
            let b = legendre_p(n, x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(b.abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn sup_bound_c0(n in 1usize..150, frac in 0.0f64..1.0, x in 0.0f64..1.0) {
            let m = 1 + ((n - 1) as f64 * frac) as usize;
            let c0 = 2f64.powf(1.25) / std::f64::consts::PI.powf(0.75);
            let v = legendre_f(n, m, x).unwrap();
            prop_assert!(v.abs() <= c0 * (m as f64).powf(-0.25) + 1e-12);
        }
    }
}
