//! Numerical certification of the analytic inequalities behind the
//! concentration results: Legendre and Bessel bounds, norm relations,
//! nodal-domain area floors, the scaling limit, the integral-geometric
//! sandwich and the nodal-length band.

mod geometry;
mod norms;

pub use geometry::{
    faber_krahn_check, radial_j0_length_density, sandwich_check, scaling_limit_check, scaling_pairs, yau_band_check,
    SandwichReport, ScalingReport, YauReport, YAU_MIN_SAMPLES,
};
pub use norms::{
    certify_equidistribution_arw, certify_norm_relation_mrw, certify_norm_relation_rsh, EquidistributionReport,
    NormRelationReport, RshNormReport,
};

use crate::specfn::{
    bessel_j, kronrod_nodes, legendre_f, legendre_f_degrees, legendre_f_with_derivative, quad_adaptive,
};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;

/// Largest degree accepted by the Legendre sweeps.
pub const MAX_SWEEP_DEGREE: usize = 300;

/// `√(230/π)`.
pub fn bernstein_constant() -> f64 {
    (230.0 / PI).sqrt()
}

/// `2^{5/4}/π^{3/4}`.
pub fn peak_constant() -> f64 {
    2f64.powf(1.25) / PI.powf(0.75)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub name: String,
    /// Description of the parameter grid swept.
    pub grid: String,
    pub worst_ratio: f64,
    pub worst_point: String,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundCertificate {
    pub fn new(name: &str, grid: String, worst_ratio: f64, worst_point: String, bound: f64, tolerance: f64) -> Self {
        let pass = worst_ratio <= bound + tolerance;
        BoundCertificate {
            name: name.to_string(),
            grid,
            worst_ratio,
            worst_point,
            bound,
            tolerance,
            pass,
        }
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "certificate name={} pass={} worst_ratio={:e} bound={:e} tolerance={:e} worst_point=\"{}\" grid=\"{}\"",
            self.name, self.pass, self.worst_ratio, self.bound, self.tolerance, self.worst_point, self.grid
        )
    }
}

/// Turning-point quantities of `f_n^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreAnalysis {
    pub m: usize,
    pub n: usize,
    pub delta0: f64,
    /// `x_k` for `k = 0..=4`.
    pub x: [f64; 5],
    pub s: f64,
    pub t: f64,
    pub c0: f64,
}

impl LegendreAnalysis {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n == 0 || m > n {
            return Err(Error::Domain(format!("need 0 ≤ m ≤ n, n ≥ 1 (got m={m}, n={n})")));
        }
        let big = (n * (n + 1)) as f64;
        let mf = m as f64;
        let delta0 = (1.0 - (mf * mf - 0.25) / (big - 0.75)).sqrt();
        let mut x = [0.0; 5];
        for (k, v) in x.iter_mut().enumerate() {
            *v = (1.0 - mf * mf / ((k + 1) as f64 * big)).sqrt();
        }
        let s = (x[0] * x[0] + 1.0 / big).sqrt();
        let t = (x[0] * x[0] + (mf + 1.0) / big).sqrt();
        Ok(LegendreAnalysis {
            m,
            n,
            delta0,
            x,
            s,
            t,
            c0: peak_constant(),
        })
    }

    fn big(&self) -> f64 {
        (self.n * (self.n + 1)) as f64
    }

    /// `q₂(x) = (n(n+1)(x² − x₀²) − 1)/(1 − x²)²`, the potential of `u = f·√(1−x²)`.
    pub fn potential(&self, x: f64) -> f64 {
        (self.big() * (x * x - self.x[0] * self.x[0]) - 1.0) / (1.0 - x * x).powi(2)
    }

    /// `|δ₀² − x₀²|`, at most `1/(n(n+1))`.
    pub fn turning_gap(&self) -> f64 {
        (self.delta0 * self.delta0 - self.x[0] * self.x[0]).abs()
    }
}

/// `∫₀¹ (f_n^m)² = 1/(2n+1)` by adaptive quadrature, all `m ≤ n ≤ n_max`.
pub fn certify_legendre_normalization(n_max: usize) -> Result<BoundCertificate> {
    check_sweep(n_max)?;
    let rows: Vec<Result<(f64, usize, usize)>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut worst = (0.0, 0, n);
            for m in 0..=n {
                // x = 1 − u² flattens the endpoint behaviour.
                let g = |u: f64| {
                    let v = crate::specfn::legendre_f(n, m, 1.0 - u * u).unwrap_or(0.0);
                    2.0 * u * v * v
                };
                let q = quad_adaptive(g, 0.0, 1.0, 1e-13)?;
                let err = (q.value - 1.0 / (2 * n + 1) as f64).abs();
                if err > worst.0 {
                    worst = (err, m, n);
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = (0.0, 0, 0);
    for r in rows {
        let r = r?;
        if r.0 > worst.0 {
            worst = r;
        }
    }
    Ok(BoundCertificate::new(
        "legendre-normalization",
        format!("0 ≤ m ≤ n ≤ {n_max}"),
        worst.0,
        format!("m={} n={}", worst.1, worst.2),
        1e-8,
        0.0,
    ))
}

fn check_sweep(n_max: usize) -> Result<()> {
    if n_max == 0 || n_max > MAX_SWEEP_DEGREE {
        return Err(Error::Domain(format!("n_max = {n_max} outside 1..={MAX_SWEEP_DEGREE}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreL2Report {
    pub certificate: BoundCertificate,
    /// Supremum over `n ≤ 30` (or `n ≤ n_max` if smaller), the frozen baseline.
    pub baseline_sup: f64,
    pub sup: f64,
    pub sup_point: (usize, usize, f64),
}

/// Baseline range of the tail-mass regression.
pub const L2_BASELINE_DEGREE: usize = 30;

/// Sweeps `n·∫_z¹ (f_n^m)² / √(1−z)` over `1 ≤ m ≤ n ≤ n_max` and
/// `z = k/z_points`, and checks the supremum against twice the `n ≤ 30` value.
///
/// Integrals use a fixed composite 15-point rule in `u = √(1−x)` with
/// subintervals of width at most `1/(4 n_max)`; the rule matches adaptive
/// quadrature to near machine precision (checked in tests).
pub fn certify_legendre_l2(n_max: usize, z_points: usize) -> Result<LegendreL2Report> {
    check_sweep(n_max)?;
    if z_points == 0 {
        return Err(Error::Domain("need at least one z value".into()));
    }
    // u-breakpoints from 0 up to 1, with z-grid values marked.
    let mut marks: Vec<f64> = (0..z_points)
        .map(|k| (1.0 - k as f64 / z_points as f64).sqrt())
        .collect();
    marks.reverse();
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    let mut mark_end: Vec<usize> = Vec::with_capacity(z_points);
    let mut lo = 0.0;
    let width = 0.25 / n_max as f64;
    for &hi in &marks {
        let pieces = (((hi - lo) / width).ceil() as usize).max(1);
        for p in 0..pieces {
            let a = lo + (hi - lo) * p as f64 / pieces as f64;
            let b = lo + (hi - lo) * (p + 1) as f64 / pieces as f64;
            nodes.extend(kronrod_nodes(a, b));
        }
        mark_end.push(nodes.len());
        lo = hi;
    }
    let rows: Vec<(f64, f64, (usize, usize, f64))> = (1..=n_max)
        .into_par_iter()
        .map(|m| {
            let len = n_max - m + 1;
            let mut acc = vec![0.0; len];
            let mut buf = vec![0.0; len];
            let (mut small, mut big, mut at) = (0.0f64, 0.0f64, (m, m, 0.0));
            let mut next = 0;
            for (k, &end) in mark_end.iter().enumerate() {
                for &(u, w) in &nodes[next..end] {
                    legendre_f_degrees(m, 1.0 - u * u, &mut buf).expect("degree range checked");
                    let wu = 2.0 * u * w;
                    for (a, v) in acc.iter_mut().zip(&buf) {
                        *a += wu * v * v;
                    }
                }
                next = end;
                let u = marks[k];
                let z = 1.0 - u * u;
                for (i, a) in acc.iter().enumerate() {
                    let n = m + i;
                    let ratio = n as f64 * a / u;
                    if n <= L2_BASELINE_DEGREE {
                        small = small.max(ratio);
                    }
                    if ratio > big {
                        big = ratio;
                        at = (m, n, z);
                    }
                }
            }
            (small, big, at)
        })
        .collect();
    let baseline_sup = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let (sup, sup_point) = rows
        .iter()
        .fold((0.0, (1, 1, 0.0)), |acc, r| if r.1 > acc.0 { (r.1, r.2) } else { acc });
    let certificate = BoundCertificate::new(
        "legendre-l2",
        format!("1 ≤ m ≤ n ≤ {n_max}, z = k/{z_points}"),
        sup / baseline_sup,
        format!("m={} n={} z={}", sup_point.0, sup_point.1, sup_point.2),
        2.0,
        0.0,
    );
    Ok(LegendreL2Report {
        certificate,
        baseline_sup,
        sup,
        sup_point,
    })
}

/// `sup (δ₀² − x²)^{1/4}·|f_n^m(x)|` over `m ≤ n ≤ n_max` and `x_points`
/// equally spaced `x ∈ [0, min(δ₀, 1))`.
pub fn certify_bernstein(n_max: usize, x_points: usize) -> Result<BoundCertificate> {
    check_sweep(n_max)?;
    let rows: Vec<(f64, String)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut worst = (0.0, String::new());
            for m in 0..=n {
                let an = LegendreAnalysis::new(m, n).expect("valid pair");
                let top = an.delta0.min(1.0);
                let d2 = an.delta0 * an.delta0;
                for k in 0..x_points {
                    let x = top * k as f64 / x_points as f64;
                    let v = (d2 - x * x).powf(0.25) * crate::specfn::legendre_f(n, m, x).unwrap_or(0.0).abs();
                    if v > worst.0 {
                        worst = (v, format!("m={m} n={n} x={x}"));
                    }
                }
            }
            worst
        })
        .collect();
    let worst = rows
        .into_iter()
        .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
    Ok(BoundCertificate::new(
        "bernstein",
        format!("0 ≤ m ≤ n ≤ {n_max}, {x_points} points on [0, δ₀)"),
        worst.0,
        worst.1,
        bernstein_constant(),
        1e-9,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub certificate: BoundCertificate,
    pub analysis: LegendreAnalysis,
    /// Largest critical point of `f_n^m` on `(0, 1)`.
    pub critical_point: f64,
    /// `[m²/(n+½)², (1.11(m+1))²/(n(n+1))]`.
    pub critical_window: (f64, f64),
    pub critical_in_window: bool,
}

/// Checks `|f(x)| ≤ C₀m^{−1/4}·√((1−t²)/(1−x²))·e^{−√(n⁴/m³)(x−t)}` on `[t, 1)`.
pub fn certify_exponential_decay(m: usize, n: usize, x_points: usize) -> Result<DecayReport> {
    if m < 3 || m > n {
        return Err(Error::Domain(format!("need 3 ≤ m ≤ n, got m={m}, n={n}")));
    }
    let an = LegendreAnalysis::new(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    let rate = (nf.powi(4) / mf.powi(3)).sqrt();
    let t = an.t;
    let lead = an.c0 * mf.powf(-0.25);
    let mut worst = (0.0, 0.0);
    for k in 0..x_points {
        let x = t + (1.0 - t) * k as f64 / x_points as f64;
        let bound = lead * ((1.0 - t * t) / (1.0 - x * x)).sqrt() * (-rate * (x - t)).exp();
        let r = legendre_f(n, m, x)?.abs() / bound;
        if r > worst.0 {
            worst = (r, x);
        }
    }
    let critical_point = last_critical_point(m, n)?;
    let big = nf * (nf + 1.0);
    let window = (mf * mf / (nf + 0.5).powi(2), (1.11 * (mf + 1.0)).powi(2) / big);
    let gap = 1.0 - critical_point * critical_point;
    Ok(DecayReport {
        certificate: BoundCertificate::new(
            "exp-decay",
            format!("m={m} n={n}, {x_points} points on [t, 1)"),
            worst.0,
            format!("x={}", worst.1),
            1.0,
            0.0,
        ),
        analysis: an,
        critical_point,
        critical_window: window,
        critical_in_window: gap >= window.0 && gap <= window.1,
    })
}

fn last_critical_point(m: usize, n: usize) -> Result<f64> {
    let steps = 20 * n + 2000;
    let top = 1.0 - 1e-9;
    let deriv = |x: f64| legendre_f_with_derivative(n, m, x).map(|v| v.1);
    let mut hi = top;
    let mut d_hi = deriv(hi)?;
    for k in (0..steps).rev() {
        let lo = top * k as f64 / steps as f64;
        let d_lo = deriv(lo)?;
        if d_lo == 0.0 {
            return Ok(lo);
        }
        if (d_lo > 0.0) != (d_hi > 0.0) {
            let (mut a, mut b, mut da) = (lo, hi, d_lo);
            for _ in 0..100 {
                let c = 0.5 * (a + b);
                let dc = deriv(c)?;
                if (dc > 0.0) == (da > 0.0) {
                    a = c;
                    da = dc;
                } else {
                    b = c;
                }
            }
            return Ok(0.5 * (a + b));
        }
        hi = lo;
        d_hi = d_lo;
    }
    Ok(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeReport {
    pub certificate: BoundCertificate,
    /// Residual maxima of the Legendre equation at steps `h` and `h/2`.
    pub legendre_residuals: (f64, f64),
    /// Same for `u″ − q₂u` with `u = f·√(1−x²)`.
    pub reduced_residuals: (f64, f64),
    /// True when the Legendre residual is at rounding level (low-degree polynomials).
    pub exact: bool,
}

/// Richardson check of the finite-difference residuals of the Legendre
/// equation and its reduced form at 128 points of `[−0.9, 0.9]`.
pub fn certify_ode_residual(m: usize, n: usize) -> Result<OdeReport> {
    if m > n || n == 0 || n > 200 {
        return Err(Error::Domain(format!("need m ≤ n ≤ 200, n ≥ 1 (got m={m}, n={n})")));
    }
    let an = LegendreAnalysis::new(m, n)?;
    let big = (n * (n + 1)) as f64;
    let mf = m as f64;
    let f = |x: f64| legendre_f(n, m, x).expect("inside [−1, 1]");
    let u = |x: f64| f(x) * (1.0 - x * x).sqrt();
    let points: Vec<f64> = (0..128).map(|k| -0.9 + 1.8 * (k as f64 + 0.5) / 128.0).collect();
    let residuals = |h: f64| -> (f64, f64, f64) {
        let (mut r1, mut r2, mut scale) = (0.0f64, 0.0f64, 0.0f64);
        for &x in &points {
            let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            let res = (1.0 - x * x) * d2 - 2.0 * x * d1 + (big - mf * mf / (1.0 - x * x)) * f0;
            r1 = r1.max(res.abs());
            scale = scale.max(big * f0.abs()).max(d2.abs());
            let (um, u0, up) = (u(x - h), u(x), u(x + h));
            let ud2 = (up - 2.0 * u0 + um) / (h * h);
            r2 = r2.max((ud2 - an.potential(x) * u0).abs());
        }
        (r1, r2, scale)
    };
    let h = 0.05 / n as f64;
    let (a1, a2, scale) = residuals(h);
    let (b1, b2, _) = residuals(0.5 * h);
    let exact = a1 <= 1e-9 * scale.max(1.0);
    let reduced_dev = ((a2 / b2) - 4.0).abs();
    let dev = if exact {
        reduced_dev
    } else {
        ((a1 / b1) - 4.0).abs().max(reduced_dev)
    };
    Ok(OdeReport {
        certificate: BoundCertificate::new(
            "ode",
            format!("m={m} n={n}, h={h:e} and h/2, 128 points"),
            dev,
            format!("ratios {:.4} / {:.4}", a1 / b1, a2 / b2),
            0.5,
            0.0,
        ),
        legendre_residuals: (a1, b1),
        reduced_residuals: (a2, b2),
        exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesselReport {
    /// Worst `|J_n(r)| / (2r/n)^n` over the sweep.
    pub growth: BoundCertificate,
    /// Worst `|2J_n′ − (J_{n−1} − J_{n+1})|` with `J′` by a five-point stencil.
    pub recurrence: BoundCertificate,
}

/// `|J_n(r)| ≤ (2r/n)^n` on `n ∈ [n_lo, n_hi]`, `r ∈ (0, n/4]`, and the
/// derivative recurrence on `1 ≤ n ≤ n_hi`, `x ∈ (0, 50]`.
pub fn certify_bessel(n_lo: usize, n_hi: usize, r_points: usize) -> Result<BesselReport> {
    if n_lo == 0 || n_lo > n_hi || r_points == 0 {
        return Err(Error::Domain("need 1 ≤ n_lo ≤ n_hi and r_points ≥ 1".into()));
    }
    let mut worst = (0.0f64, String::new());
    for n in n_lo..=n_hi {
        let nf = n as f64;
        for k in 1..=r_points {
            let r = 0.25 * nf * k as f64 / r_points as f64;
            let j = bessel_j(n, r)?.abs();
            if j == 0.0 {
                continue;
            }
            let log_ratio = j.ln() - nf * (2.0 * r / nf).ln();
            let ratio = log_ratio.exp();
            if ratio > worst.0 {
                worst = (ratio, format!("n={n} r={r}"));
            }
        }
    }
    let growth = BoundCertificate::new(
        "bessel-growth",
        format!("{n_lo} ≤ n ≤ {n_hi}, {r_points} radii in (0, n/4]"),
        worst.0,
        worst.1,
        1.0,
        0.0,
    );
    let h = 1e-2;
    let mut worst = (0.0f64, String::new());
    for n in 1..=n_hi {
        for k in 1..=200 {
            let x = 50.0 * k as f64 / 200.0;
            let j = |t: f64| bessel_j(n, t);
            let d = (8.0 * (j(x + h)? - j(x - h)?) - (j(x + 2.0 * h)? - j(x - 2.0 * h)?)) / (12.0 * h);
            let res = (2.0 * d - (bessel_j(n - 1, x)? - bessel_j(n + 1, x)?)).abs();
            if res > worst.0 {
                worst = (res, format!("n={n} x={x}"));
            }
        }
    }
    let recurrence = BoundCertificate::new(
        "bessel-recurrence",
        format!("1 ≤ n ≤ {n_hi}, 200 points in (0, 50]"),
        worst.0,
        worst.1,
        1e-8,
        0.0,
    );
    Ok(BesselReport { growth, recurrence })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_identities() {
        for (m, n) in [(0, 1), (1, 1), (3, 10), (7, 40), (60, 120)] {
            let a = LegendreAnalysis::new(m, n).unwrap();
            let big = (n * (n + 1)) as f64;
            let mf = m as f64;
            assert!((a.delta0.powi(2) - (1.0 - (mf * mf - 0.25) / (big - 0.75))).abs() < 1e-12);
            for k in 0..5 {
                assert!((a.x[k].powi(2) - (1.0 - mf * mf / ((k + 1) as f64 * big))).abs() < 1e-12);
            }
            assert!((a.s.powi(2) - a.x[0].powi(2) - 1.0 / big).abs() < 1e-12);
            assert!((a.t.powi(2) - a.x[0].powi(2) - (mf + 1.0) / big).abs() < 1e-12);
            assert!(a.turning_gap() <= 1.0 / big + 1e-15);
            if a.s < 1.0 {
                assert!(a.potential(a.s).abs() < 1e-9 * big);
            }
        }
        assert!(LegendreAnalysis::new(3, 2).is_err());
        assert!((peak_constant() - 2f64.powf(1.25) / PI.powf(0.75)).abs() < 1e-15);
        assert!((bernstein_constant() - 8.556_36).abs() < 1e-5);
    }

    #[test]
    fn normalization_small() {
        let c = certify_legendre_normalization(20).unwrap();
        assert!(c.pass, "{c}");
    }

    #[test]
    fn composite_rule_matches_adaptive() {
        let rep = certify_legendre_l2(12, 16).unwrap();
        let (m, n, z) = rep.sup_point;
        let g = |x: f64| legendre_f(n, m, x).unwrap().powi(2);
        let q = quad_adaptive(g, z, 1.0, 1e-14).unwrap().value;
        let direct = n as f64 * q / (1.0 - z).sqrt();
        assert!((direct - rep.sup).abs() < 1e-10 * direct, "{direct} {}", rep.sup);
        // Refining the z grid to a superset never lowers the supremum.
        let finer = certify_legendre_l2(12, 32).unwrap();
        assert!(finer.sup >= rep.sup - 1e-15);
    }

    #[test]
    fn order_zero_at_origin() {
        // n·∫₀¹ P_n² = n/(2n+1) ∈ (1/3, 1/2]
        for n in 1..=40 {
            let r = n as f64 / (2 * n + 1) as f64;
            assert!(r > 0.33 && r <= 0.5);
        }
        let rep = certify_legendre_l2(30, 8).unwrap();
        assert!(rep.sup.is_finite() && rep.certificate.pass);
    }

    #[test]
    fn bernstein_small() {
        let c = certify_bernstein(25, 400).unwrap();
        assert!(c.pass && c.worst_ratio < bernstein_constant());
    }

    #[test]
    fn decay_example() {
        let rep = certify_exponential_decay(5, 40, 256).unwrap();
        assert!(rep.certificate.pass, "{}", rep.certificate);
        assert!(
            rep.critical_in_window,
            "{:?} {:?}",
            rep.critical_point, rep.critical_window
        );
        assert!(certify_exponential_decay(2, 40, 16).is_err());
    }

    #[test]
    fn ode_examples() {
        let rep = certify_ode_residual(2, 10).unwrap();
        assert!(rep.certificate.pass, "{}", rep.certificate);
        assert!(!rep.exact);
        let lin = certify_ode_residual(0, 1).unwrap();
        assert!(lin.exact && lin.certificate.pass);
    }

    #[test]
    fn bessel_small() {
        let rep = certify_bessel(20, 30, 16).unwrap();
        assert!(
            rep.growth.pass && rep.recurrence.pass,
            "{} {}",
            rep.growth,
            rep.recurrence
        );
    }
}
