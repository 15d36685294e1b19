//! Instruments from the counting argument: the parameter schedule, unstable
//! points, derivative ladders, the shell perturbation test, nodal-length
//! audits and the rare-event construction.

mod length;
mod rare;
mod shell;

pub use length::{df_length_audit, LengthAudit};
pub use rare::{l2_event_check, l2_integral, rare_event_demo, L2EventReport, RareEventOptions, RareEventReport};
pub use shell::{shell_test, ShellReport};

use crate::ensembles::{grid_size_for, AnalyticField, FieldGrid};
use crate::{Error, Result};
use std::collections::HashSet;

/// Largest derivative order accepted by [`d_ell`].
pub const MAX_LADDER: usize = 12;

/// Multiplicative prefactors of the parameter schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prefactors {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tau: f64,
    pub r: f64,
    pub rho: f64,
}

impl Default for Prefactors {
    fn default() -> Self {
        Prefactors {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
            tau: 1.0,
            r: 1.0,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCheck {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs − lhs`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NSParameters {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tau: f64,
    pub r: f64,
    pub rho: f64,
    pub prefactors: Prefactors,
    /// `min{τ², δ², ρ²}`.
    pub min_square: f64,
    pub constraints: Vec<ConstraintCheck>,
}

/// Exponents of the schedule, in the order α, β, γ, δ, τ, r, ρ.
pub const SCHEDULE_EXPONENTS: [f64; 7] = [
    25.0 / 4.0,
    75.0 / 32.0,
    125.0 / 32.0,
    50.0 / 16.0,
    125.0 / 16.0,
    -51.0 / 48.0,
    125.0 / 16.0,
];

pub fn ns_parameters(eps: f64, pre: Prefactors) -> Result<NSParameters> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1]")));
    }
    let [ea, eb, eg, ed, et, er, erho] = SCHEDULE_EXPONENTS;
    let alpha = pre.alpha * eps.powf(ea);
    let beta = pre.beta * eps.powf(eb);
    let gamma = pre.gamma * eps.powf(eg);
    let delta = pre.delta * eps.powf(ed);
    let tau = pre.tau * eps.powf(et);
    let r = pre.r * eps.powf(er);
    let rho = pre.rho * eps.powf(erho);
    let check = |label, lhs: f64, rhs: f64| ConstraintCheck {
        label,
        lhs,
        rhs,
        satisfied: lhs <= rhs * (1.0 + 1e-12),
        slack: rhs - lhs,
    };
    let constraints = vec![
        check("1/(r·δ^(1/50)) ≲ ε", 1.0 / (r * delta.powf(1.0 / 50.0)), eps),
        check("δ·r² ≲ ε", delta * r * r, eps),
        check("α/β ≤ r", alpha / beta, r),
    ];
    Ok(NSParameters {
        eps,
        alpha,
        beta,
        gamma,
        delta,
        tau,
        r,
        rho,
        prefactors: pre,
        min_square: (tau * tau).min(delta * delta).min(rho * rho),
        constraints,
    })
}

/// `max_{1≤j≤jmax} |∂_ℓ^j f(p)|` along axis `ℓ ∈ {1, 2}`.
pub fn d_ell(field: &dyn AnalyticField, p: [f64; 2], axis: usize, jmax: usize) -> Result<f64> {
    if jmax == 0 || jmax > MAX_LADDER {
        return Err(Error::Domain(format!("ladder order {jmax} outside 1..={MAX_LADDER}")));
    }
    let dir = axis_direction(axis)?;
    let d = field.directional_derivatives(p, dir, jmax)?;
    Ok(d[1..].iter().fold(0.0, |m, v| m.max(v.abs())))
}

pub(crate) fn axis_direction(axis: usize) -> Result<[f64; 2]> {
    match axis {
        1 => Ok([1.0, 0.0]),
        2 => Ok([0.0, 1.0]),
        _ => Err(Error::Domain(format!("axis {axis} is neither 1 nor 2"))),
    }
}

/// Central-difference gradient at vertex `(i, j)`, one-sided on the border.
pub fn grid_gradient(grid: &FieldGrid, i: usize, j: usize) -> [f64; 2] {
    let n = grid.size;
    let diff = |lo: f64, hi: f64, span: usize| (hi - lo) / (span as f64 * grid.h);
    let gx = match (i > 0, i + 1 < n) {
        (true, true) => diff(grid.at(i - 1, j), grid.at(i + 1, j), 2),
        (false, true) => diff(grid.at(i, j), grid.at(i + 1, j), 1),
        (true, false) => diff(grid.at(i - 1, j), grid.at(i, j), 1),
        _ => 0.0,
    };
    let gy = match (j > 0, j + 1 < n) {
        (true, true) => diff(grid.at(i, j - 1), grid.at(i, j + 1), 2),
        (false, true) => diff(grid.at(i, j), grid.at(i, j + 1), 1),
        (true, false) => diff(grid.at(i, j - 1), grid.at(i, j), 1),
        _ => 0.0,
    };
    [gx, gy]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub unstable_points: Vec<[f64; 2]>,
    pub unstable_disc_count: usize,
    pub disc_count: usize,
    pub disc_radius: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Scans `B(R)` for points with `|F| < α` and `|∇F| < β`, then counts the
/// discs of a covering lattice whose threefold dilate contains one.
///
/// The lattice is square with spacing `√2·r`, so discs cover the plane and
/// each meets at most eight others.
pub fn find_unstable(grid: &FieldGrid, alpha: f64, beta: f64, disc_radius: f64) -> Result<StabilityReport> {
    if !(alpha > 0.0 && beta > 0.0 && disc_radius > 0.0) {
        return Err(Error::Domain("thresholds and disc radius must be positive".into()));
    }
    let big_r = grid.window_radius;
    let mut unstable_points = Vec::new();
    for j in 0..grid.size {
        for i in 0..grid.size {
            let p = [grid.coord(i), grid.coord(j)];
            if p[0].hypot(p[1]) > big_r || grid.at(i, j).abs() >= alpha {
                continue;
            }
            let g = grid_gradient(grid, i, j);
            if g[0].hypot(g[1]) < beta {
                unstable_points.push(p);
            }
        }
    }
    let spacing = std::f64::consts::SQRT_2 * disc_radius;
    let reach = ((big_r + disc_radius) / spacing).ceil() as i64;
    let centre = |a: i64, b: i64| [a as f64 * spacing, b as f64 * spacing];
    let in_cover = |c: [f64; 2]| c[0].hypot(c[1]) < big_r + disc_radius;
    let mut disc_count = 0;
    for a in -reach..=reach {
        for b in -reach..=reach {
            if in_cover(centre(a, b)) {
                disc_count += 1;
            }
        }
    }
    let dilate = 3.0 * disc_radius;
    let span = (dilate / spacing).ceil() as i64;
    let mut hit: HashSet<(i64, i64)> = HashSet::new();
    for p in &unstable_points {
        let (a0, b0) = ((p[0] / spacing).round() as i64, (p[1] / spacing).round() as i64);
        for a in a0 - span..=a0 + span {
            for b in b0 - span..=b0 + span {
                let c = centre(a, b);
                if in_cover(c) && (p[0] - c[0]).hypot(p[1] - c[1]) < dilate {
                    hit.insert((a, b));
                }
            }
        }
    }
    Ok(StabilityReport {
        unstable_points,
        unstable_disc_count: hit.len(),
        disc_count,
        disc_radius,
        alpha,
        beta,
    })
}

/// A field read with its origin moved to `offset`.
pub(crate) struct Translated<'a> {
    pub inner: &'a dyn AnalyticField,
    pub offset: [f64; 2],
}

impl AnalyticField for Translated<'_> {
    fn value(&self, p: [f64; 2]) -> f64 {
        self.inner.value([p[0] + self.offset[0], p[1] + self.offset[1]])
    }
    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        self.inner
            .directional_derivatives([p[0] + self.offset[0], p[1] + self.offset[1]], dir, order)
    }
    fn describe(&self) -> String {
        format!(
            "{} shifted by ({}, {})",
            self.inner.describe(),
            self.offset[0],
            self.offset[1]
        )
    }
}

/// Origin-centred grid of a field covering `[−half, half]²`.
pub(crate) fn field_grid(field: &dyn AnalyticField, half: f64, h: f64, source: &str) -> Result<FieldGrid> {
    let size = grid_size_for(half, h);
    let mut values = vec![0.0; size * size];
    field.fill_grid(size, h, &mut values)?;
    FieldGrid::new(values, size, h, half, 0.0, None, source.to_string(), 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{reference_grid, ArwField, EnsembleSpec, ReferenceKind};
    use crate::measures::lattice_points;

    #[test]
    fn schedule_examples() {
        let p = ns_parameters(1.0, Prefactors::default()).unwrap();
        for v in [p.alpha, p.beta, p.gamma, p.delta, p.tau, p.r, p.rho, p.min_square] {
            assert_eq!(v, 1.0);
        }
        let p = ns_parameters(0.5, Prefactors::default()).unwrap();
        assert!((p.tau * p.tau - 0.5f64.powf(15.625)).abs() < 1e-12);
        assert!((p.min_square - 0.5f64.powf(15.625)).abs() < 1e-12);
        let p = ns_parameters(0.1, Prefactors::default()).unwrap();
        assert!(p.constraints.iter().all(|c| c.satisfied), "{:?}", p.constraints);
        assert!((p.alpha / p.beta - 0.1f64.powf(125.0 / 32.0)).abs() < 1e-15);
        let [ea, eb, eg, ..] = SCHEDULE_EXPONENTS;
        assert!((ea - eb - eg).abs() < 1e-12);
        assert!(ns_parameters(0.0, Prefactors::default()).is_err());
        // Large prefactor on δ shows up as positive slack on the first constraint only.
        let pre = Prefactors {
            delta: 2.0,
            ..Prefactors::default()
        };
        let p = ns_parameters(0.3, pre).unwrap();
        assert!(p.constraints[0].slack > 0.0 && !p.constraints[1].satisfied);
    }

    fn cos_mode() -> ArwField {
        let set = lattice_points(1).unwrap();
        let idx = set.half_set.iter().position(|&p| p == (1, 0)).unwrap();
        let mut xi = vec![0.0; 2];
        xi[idx] = 2f64.sqrt();
        ArwField::new(1, xi, vec![0.0; 2]).unwrap()
    }

    #[test]
    fn ladder_examples() {
        let f = cos_mode();
        assert!((d_ell(&f, [0.0, 0.0], 1, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(d_ell(&f, [0.0, 0.0], 2, 2).unwrap() < 1e-15);
        assert!(d_ell(&f, [0.0, 0.0], 1, 13).is_err());
        assert!(d_ell(&f, [0.0, 0.0], 3, 2).is_err());
        let g = reference_grid(&ReferenceKind::RadialJ0, 1.0, 0.0, 0.5).unwrap();
        struct GridOnly(FieldGrid);
        impl AnalyticField for GridOnly {
            fn value(&self, _p: [f64; 2]) -> f64 {
                self.0.values[0]
            }
            fn describe(&self) -> String {
                "grid".into()
            }
        }
        assert!(matches!(
            d_ell(&GridOnly(g), [0.0, 0.0], 1, 2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ladder_matches_finite_differences_on_rpw() {
        let spec = EnsembleSpec::rpw(5.0, 0.1, 0.0, 11).unwrap();
        let f = crate::ensembles::sample_field(&spec, 2).unwrap();
        let p = [1.3, -0.7];
        let h = 1e-3;
        for axis in [1, 2] {
            let dir = axis_direction(axis).unwrap();
            let d = f.directional_derivatives(p, dir, 2).unwrap();
            let at = |t: f64| f.value([p[0] + t * dir[0], p[1] + t * dir[1]]);
            let d1 = (at(h) - at(-h)) / (2.0 * h);
            let d2 = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
            assert!((d[1] - d1).abs() < 1e-6, "{} {}", d[1], d1);
            assert!((d[2] - d2).abs() < 1e-6, "{} {}", d[2], d2);
        }
    }

    #[test]
    fn unstable_scan_examples() {
        let g = reference_grid(&ReferenceKind::RadialJ0, 10.0, 0.0, 0.05).unwrap();
        assert!(find_unstable(&g, 0.01, 0.01, 1.0).unwrap().unstable_points.is_empty());
        let mut flat = g.clone();
        flat.values.iter_mut().for_each(|v| *v = 1.0);
        assert_eq!(find_unstable(&flat, 0.5, 10.0, 1.0).unwrap().unstable_disc_count, 0);
        let mut small = g.clone();
        small.values.iter_mut().for_each(|v| *v *= 1e-4);
        let rep = find_unstable(&small, 1e-3, 1e-3, 1.0).unwrap();
        assert!(!rep.unstable_points.is_empty());
        for zero in 1..=3 {
            let j = crate::specfn::bessel_j_zero(zero).unwrap();
            assert!(rep.unstable_points.iter().any(|p| (p[0].hypot(p[1]) - j).abs() < 0.1));
        }
        assert!(rep.unstable_disc_count > 0 && rep.unstable_disc_count <= rep.disc_count);
    }

    #[test]
    fn unstable_count_is_monotone() {
        let spec = EnsembleSpec::rpw(8.0, 0.1, 0.0, 3).unwrap();
        let g = crate::ensembles::sample(&spec, 0).unwrap();
        let mut last = 0;
        for t in [0.05, 0.1, 0.2, 0.4] {
            let rep = find_unstable(&g, t, t, 1.0).unwrap();
            assert!(rep.unstable_disc_count >= last);
            last = rep.unstable_disc_count;
        }
        assert!(last > 0);
    }
}
