/// Planar region for clipped length measurements, centred anywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Window,
    Disc { center: [f64; 2], radius: f64 },
    Annulus { center: [f64; 2], inner: f64, outer: f64 },
    DiscComplement { center: [f64; 2], radius: f64 },
}

impl Region {
    pub fn disc(radius: f64) -> Region {
        Region::Disc {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.boundary_distance(p) > 0.0
    }

    /// Signed distance to the region boundary, positive inside.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let dist = |c: [f64; 2]| (p[0] - c[0]).hypot(p[1] - c[1]);
        match *self {
            Region::Window => f64::INFINITY,
            Region::Disc { center, radius } => radius - dist(center),
            Region::Annulus { center, inner, outer } => {
                let d = dist(center);
                (d - inner).min(outer - d)
            }
            Region::DiscComplement { center, radius } => dist(center) - radius,
        }
    }

    /// Half side of the smallest origin-centred square containing the region, if bounded.
    pub fn bounding_half_extent(&self) -> Option<f64> {
        match *self {
            Region::Disc { center, radius }
            | Region::Annulus {
                center, outer: radius, ..
            } => Some(center[0].abs().max(center[1].abs()) + radius),
            _ => None,
        }
    }

    /// Length of the segment `a→b` inside the region.
    pub fn clipped_length(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        match *self {
            Region::Window => len,
            Region::Disc { center, radius } => len * inside_fraction(a, b, center, radius),
            Region::Annulus { center, inner, outer } => {
                len * (inside_fraction(a, b, center, outer) - inside_fraction(a, b, center, inner)).max(0.0)
            }
            Region::DiscComplement { center, radius } => len * (1.0 - inside_fraction(a, b, center, radius)),
        }
    }
}

/// Fraction of the parameter interval `[0,1]` of `a + t(b−a)` lying in the closed disc.
fn inside_fraction(a: [f64; 2], b: [f64; 2], c: [f64; 2], r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let m = [a[0] - c[0], a[1] - c[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = 2.0 * (m[0] * d[0] + m[1] * d[1]);
    let qc = m[0] * m[0] + m[1] * m[1] - r * r;
    if qa == 0.0 {
        return if qc <= 0.0 { 1.0 } else { 0.0 };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
    (t1 - t0).max(0.0)
}

pub(crate) fn signed_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

pub(crate) fn polyline_length(pts: &[[f64; 2]], closed: bool) -> f64 {
    let mut s: f64 = pts
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum();
    if closed && pts.len() > 1 {
        let (a, b) = (pts[pts.len() - 1], pts[0]);
        s += (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    s
}

/// Convex hull by the monotone chain, counter-clockwise, without collinear points.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

pub(crate) fn diameter(points: &[[f64; 2]]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max((hull[i][0] - hull[j][0]).hypot(hull[i][1] - hull[j][1]));
        }
    }
    best
}

/// Even-odd ray casting.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clipping_basics() {
        let d = Region::disc(1.0);
        assert!((d.clipped_length([-2.0, 0.0], [2.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(d.clipped_length([-2.0, 2.0], [2.0, 2.0]), 0.0);
        assert!((d.clipped_length([0.0, 0.0], [3.0, 0.0]) - 1.0).abs() < 1e-15);
        let ann = Region::Annulus {
            center: [0.0, 0.0],
            inner: 0.5,
            outer: 1.0,
        };
        assert!((ann.clipped_length([-2.0, 0.0], [2.0, 0.0]) - 1.0).abs() < 1e-15);
        let comp = Region::DiscComplement {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!((comp.clipped_length([-2.0, 0.0], [2.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hull_and_diameter_of_square() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(signed_area(&hull) > 0.0);
        assert!((diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn clipping_is_additive(ax in -3.0..3.0f64, ay in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64, r in 0.1..2.5f64) {
            let (a, b) = ([ax, ay], [bx, by]);
            let inside = Region::disc(r).clipped_length(a, b);
            let outside = Region::DiscComplement { center: [0.0, 0.0], radius: r }.clipped_length(a, b);
            prop_assert!((inside + outside - Region::Window.clipped_length(a, b)).abs() < 1e-12);
            let m = [0.5 * (ax + bx), 0.5 * (ay + by)];
            let split = Region::disc(r).clipped_length(a, m) + Region::disc(r).clipped_length(m, b);
            prop_assert!((split - inside).abs() < 1e-12);
        }
    }
}
