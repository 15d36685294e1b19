use super::BoundCertificate;
use crate::ensembles::RshField;
use crate::nodal::{convex_hull, count_components, domain_areas, nodal_length, NodalDecomposition, Region};
use crate::specfn::{bessel_j, bessel_j_zero, legendre_p};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Grid tolerance applied to the disc area floor.
pub const AREA_FLOOR_TOLERANCE: f64 = 0.1;

/// Every bounded interior domain has area at least `0.9·π·j₀,₁²`.
pub fn faber_krahn_check(dec: &NodalDecomposition) -> Result<BoundCertificate> {
    let j = bessel_j_zero(1)?;
    let floor = (1.0 - AREA_FLOOR_TOLERANCE) * PI * j * j;
    let (mut worst, mut at) = (0.0f64, String::from("no bounded domain"));
    let mut count = 0;
    for d in domain_areas(dec).into_iter().filter(|d| d.is_bounded_interior) {
        count += 1;
        let r = floor / d.area;
        if r > worst {
            worst = r;
            at = format!("domain {} area={:.4}", d.domain, d.area);
        }
    }
    Ok(BoundCertificate::new(
        "faber-krahn",
        format!("{count} bounded interior domains, floor {floor:.4}"),
        worst,
        at,
        1.0,
        0.0,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub certificate: BoundCertificate,
    pub n_list: Vec<usize>,
    /// `max_pairs |P_n(cos Θ(u,v)) − J₀(|u−v|)|` per degree.
    pub errors: Vec<f64>,
}

/// Largest chart coordinate accepted by the scaling check.
pub const SCALING_RADIUS: f64 = 10.0;

/// Convergence of the chart covariance `P_n(cos Θ)` to `J₀(|u−v|)`: errors must
/// strictly decrease along `n_list` and end below `tolerance`.
pub fn scaling_limit_check(n_list: &[usize], pairs: &[([f64; 2], [f64; 2])], tolerance: f64) -> Result<ScalingReport> {
    if n_list.is_empty() || pairs.is_empty() {
        return Err(Error::Domain("need degrees and point pairs".into()));
    }
    if pairs
        .iter()
        .any(|(u, v)| u[0].hypot(u[1]) > SCALING_RADIUS || v[0].hypot(v[1]) > SCALING_RADIUS)
    {
        return Err(Error::Domain(format!(
            "chart points must satisfy |u|, |v| ≤ {SCALING_RADIUS}"
        )));
    }
    let mut errors = Vec::with_capacity(n_list.len());
    let (mut last_at, mut last) = (String::new(), 0.0);
    for &n in n_list {
        let (mut worst, mut at) = (0.0f64, String::new());
        for (u, v) in pairs {
            let k = legendre_p(n, RshField::geodesic_angle(n, *u, *v).cos())?;
            let j = bessel_j(0, (u[0] - v[0]).hypot(u[1] - v[1]))?;
            let e = (k - j).abs();
            if e > worst {
                worst = e;
                at = format!("n={n} u={u:?} v={v:?}");
            }
        }
        errors.push(worst);
        (last, last_at) = (worst, at);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let mut certificate = BoundCertificate::new(
        "scaling-limit",
        format!("n ∈ {n_list:?}, {} pairs", pairs.len()),
        last,
        last_at,
        tolerance,
        0.0,
    );
    certificate.pass &= decreasing;
    Ok(ScalingReport {
        certificate,
        n_list: n_list.to_vec(),
        errors,
    })
}

/// Deterministic chart point pairs with `|u| = 2` and separations spread over `[0, max_separation]`.
pub fn scaling_pairs(count: usize, max_separation: f64) -> Vec<([f64; 2], [f64; 2])> {
    (0..count)
        .map(|k| {
            let a = 0.7 * k as f64;
            let d = max_separation * k as f64 / count.max(2).saturating_sub(1) as f64;
            let u = [2.0 * a.cos(), 2.0 * a.sin()];
            (u, [u[0] + d * (1.3 * a).cos(), u[1] + d * (1.3 * a).sin()])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub certificate: BoundCertificate,
    /// `(1/πr²)·Σ_{x∈B(R−r)} N(D(x,r))·s²` over the centre lattice.
    pub lower: f64,
    pub count: usize,
    /// `(1/πr²)·Σ_{x∈B(R+r)} N*(D(x,r))·s²`.
    pub upper: f64,
    pub stride: f64,
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Discrete integral-geometric sandwich around `N(B(R))`, with disc centres on
/// a square lattice of spacing `stride` (default `r/10`).
///
/// The lower average counts components inside `D(x, r − h)`, matching the
/// one-cell margin of the count; the upper average counts components meeting
/// the closed disc `D(x, r)`.
pub fn sandwich_check(dec: &NodalDecomposition, r: f64, big_r: f64, stride: Option<f64>) -> Result<SandwichReport> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Domain(format!("need 0 < r < R (got r={r}, R={big_r})")));
    }
    let s = stride.unwrap_or(r / 10.0);
    if !(s > 0.0 && s <= r / 10.0 + 1e-12) {
        return Err(Error::Domain(format!("stride {s} must lie in (0, r/10]")));
    }
    if dec.half_extent() < big_r + 2.0 * r {
        return Err(Error::Domain(format!(
            "the grid must reach R + 2r = {}",
            big_r + 2.0 * r
        )));
    }
    let inner = r - dec.h;
    let mut lower_hits = 0usize;
    for c in dec.components.iter().filter(|c| c.closed && !c.boundary_touching) {
        let hull = convex_hull(&c.points);
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &hull {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let ia = ((hi[0] - inner) / s).ceil() as i64;
        let ib = ((lo[0] + inner) / s).floor() as i64;
        let ja = ((hi[1] - inner) / s).ceil() as i64;
        let jb = ((lo[1] + inner) / s).floor() as i64;
        for j in ja..=jb {
            for i in ia..=ib {
                let x = [i as f64 * s, j as f64 * s];
                if x[0].hypot(x[1]) > big_r - r {
                    continue;
                }
                if hull.iter().all(|p| (p[0] - x[0]).hypot(p[1] - x[1]) <= inner) {
                    lower_hits += 1;
                }
            }
        }
    }
    let outer = big_r + r;
    let half = (outer / s).ceil() as i64;
    let side = (2 * half + 1) as usize;
    let mut stamp = vec![u32::MAX; side * side];
    let mut upper_hits = 0usize;
    for (ci, c) in dec.components.iter().enumerate() {
        let pts = &c.points;
        let segs = if c.closed {
            pts.len()
        } else {
            pts.len().saturating_sub(1)
        };
        for k in 0..segs.max(usize::from(pts.len() == 1)) {
            let a = pts[k];
            let b = pts[(k + 1) % pts.len()];
            let i0 = (((a[0].min(b[0]) - r) / s).ceil() as i64).max(-half);
            let i1 = (((a[0].max(b[0]) + r) / s).floor() as i64).min(half);
            let j0 = (((a[1].min(b[1]) - r) / s).ceil() as i64).max(-half);
            let j1 = (((a[1].max(b[1]) + r) / s).floor() as i64).min(half);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let idx = (j + half) as usize * side + (i + half) as usize;
                    if stamp[idx] == ci as u32 {
                        continue;
                    }
                    let x = [i as f64 * s, j as f64 * s];
                    if x[0].hypot(x[1]) <= outer && segment_distance(x, a, b) <= r {
                        stamp[idx] = ci as u32;
                        upper_hits += 1;
                    }
                }
            }
        }
    }
    let unit = s * s / (PI * r * r);
    let lower = lower_hits as f64 * unit;
    let upper = upper_hits as f64 * unit;
    let count = count_components(dec, big_r);
    let gap = (lower - count as f64).max(count as f64 - upper);
    Ok(SandwichReport {
        certificate: BoundCertificate::new(
            "sandwich",
            format!("r={r} R={big_r}, stride {s}"),
            gap,
            format!("lower={lower:.3} count={count} upper={upper:.3}"),
            0.0,
            0.0,
        ),
        lower,
        count,
        upper,
        stride: s,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct YauReport {
    pub certificate: BoundCertificate,
    /// `(n, samples used, mean nodal length / area)`.
    pub densities: Vec<(usize, usize, f64)>,
    /// Decompositions dropped for having no nodal set.
    pub excluded: usize,
}

/// Samples required per degree.
pub const YAU_MIN_SAMPLES: usize = 10;

/// Nodal length per unit chart area inside `B(r)` for each degree; the band
/// passes when the largest mean is within 1.5× the smallest.
pub fn yau_band_check(samples: &[(usize, Vec<NodalDecomposition>)], r: f64) -> Result<YauReport> {
    if samples.is_empty() || !(r > 0.0) {
        return Err(Error::Domain("need at least one degree and r > 0".into()));
    }
    let region = Region::disc(r);
    let area = PI * r * r;
    let mut densities = Vec::new();
    let mut excluded = 0;
    for (n, decs) in samples {
        if decs.iter().any(|d| d.half_extent() < r) {
            return Err(Error::Domain(format!("a degree-{n} grid does not cover B({r})")));
        }
        let values: Vec<f64> = decs
            .iter()
            .filter(|d| !d.components.is_empty())
            .map(|d| nodal_length(d, &region) / area)
            .collect();
        excluded += decs.len() - values.len();
        if values.len() < YAU_MIN_SAMPLES {
            return Err(Error::Domain(format!(
                "degree {n} has {} usable samples, need {YAU_MIN_SAMPLES}",
                values.len()
            )));
        }
        densities.push((*n, values.len(), values.iter().sum::<f64>() / values.len() as f64));
    }
    let max = densities.iter().map(|d| d.2).fold(f64::NEG_INFINITY, f64::max);
    let min = densities.iter().map(|d| d.2).fold(f64::INFINITY, f64::min);
    let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
    let grid = densities.iter().map(|d| d.0.to_string()).collect::<Vec<_>>().join(",");
    Ok(YauReport {
        certificate: BoundCertificate::new(
            "yau",
            format!("n ∈ {{{grid}}}, r={r}"),
            ratio,
            format!("densities {:?}", densities.iter().map(|d| d.2).collect::<Vec<_>>()),
            1.5,
            0.0,
        ),
        densities,
        excluded,
    })
}

/// `Σ_{j₀,ₖ < r} 2π j₀,ₖ / (πr²)`, the nodal length density of `J₀(|x|)` in `B(r)`.
pub fn radial_j0_length_density(r: f64) -> Result<f64> {
    let mut total = 0.0;
    for k in 1..=100 {
        let z = bessel_j_zero(k)?;
        if z >= r {
            break;
        }
        total += 2.0 * PI * z;
    }
    Ok(total / (PI * r * r))
}
