//! Nodal structure of a sampled field: signed domains, traced nodal
//! components, their nesting forest, tree ends, lengths and areas.

mod geometry;
mod tree;

pub use geometry::{convex_hull, point_in_polygon, Region};
pub use tree::{canonical_of_children, TreeEnd};

use crate::ensembles::{AnalyticField, FieldGrid};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Relative size below which a vertex value counts as a tie (and is read as positive).
pub const TIE_RELATIVE: f64 = 1e-13;
/// Largest admissible fraction of tied vertices.
pub const MAX_TIE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub sign: i8,
    /// Area of the piecewise-linear region, exact for the interpolated contours.
    pub area: f64,
    pub boundary_touching: bool,
    pub vertex_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Polyline vertices; closed components do not repeat the first vertex.
    pub points: Vec<[f64; 2]>,
    /// Crossing edge of each vertex, as a global edge id.
    pub edges: Vec<u32>,
    pub closed: bool,
    pub boundary_touching: bool,
    /// Closed: the enclosed domain. Open: the domain on the positive side.
    pub inside_domain: usize,
    /// Closed: the domain surrounding the curve. Open: the domain on the negative side.
    pub outside_domain: usize,
    /// Innermost closed component enclosing this one.
    pub parent: Option<usize>,
    pub length: f64,
    pub diameter: f64,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalDecomposition {
    pub size: usize,
    pub h: f64,
    /// Domain label of each grid vertex, row-major.
    pub vertex_labels: Vec<u32>,
    pub vertex_positive: Vec<bool>,
    pub domains: Vec<Domain>,
    pub components: Vec<Component>,
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (ra, rb) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (rb, ra)
        } else {
            (ra, rb)
        };
        self.parent[rb as usize] = ra;
        if self.rank[ra as usize] == self.rank[rb as usize] {
            self.rank[ra as usize] += 1;
        }
    }
}

struct Segment {
    from: u32,
    to: u32,
}

/// Decomposition with saddle cells resolved by the bilinear cell-centre value.
pub fn decompose(grid: &FieldGrid) -> Result<NodalDecomposition> {
    decompose_with(grid, None)
}

/// Decomposition; when `field` is given, saddle cells are resolved by its
/// value at the cell centre.
pub fn decompose_with(grid: &FieldGrid, field: Option<&dyn AnalyticField>) -> Result<NodalDecomposition> {
    let n = grid.size;
    let h = grid.h;
    if n < 2 {
        return Err(Error::InvalidSpec("grid needs at least 2×2 vertices".into()));
    }
    let total = n * n;
    let vmax = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = TIE_RELATIVE * vmax;
    let mut values = grid.values.clone();
    let mut ties = 0usize;
    for v in values.iter_mut() {
        if v.abs() < thr || *v == 0.0 {
            ties += 1;
            *v = thr.max(f64::MIN_POSITIVE);
        }
    }
    if ties as f64 > MAX_TIE_FRACTION * total as f64 {
        return Err(Error::DegenerateGrid { ties, total });
    }
    let pos: Vec<bool> = values.iter().map(|&v| v > 0.0).collect();
    let idx = |i: usize, j: usize| j * n + i;
    let c = grid.center() as f64;
    let coord = |i: usize| (i as f64 - c) * h;

    // Saddle resolution: true when the positive diagonal pair is joined through the centre.
    let mut saddle_positive = vec![false; (n - 1) * (n - 1)];
    let mut uf = UnionFind::new(total);
    for j in 0..n {
        for i in 0..n {
            let a = idx(i, j);
            if i + 1 < n && pos[a] == pos[a + 1] {
                uf.union(a as u32, (a + 1) as u32);
            }
            if j + 1 < n && pos[a] == pos[a + n] {
                uf.union(a as u32, (a + n) as u32);
            }
        }
    }
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let k = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let s = [pos[k[0]], pos[k[1]], pos[k[2]], pos[k[3]]];
            if s[0] == s[2] && s[1] == s[3] && s[0] != s[1] {
                let bilinear = 0.25 * (values[k[0]] + values[k[1]] + values[k[2]] + values[k[3]]);
                let centre = match field {
                    Some(f) => {
                        let v = f.value([coord(i) + 0.5 * h, coord(j) + 0.5 * h]);
                        if v.is_finite() {
                            v
                        } else {
                            bilinear
                        }
                    }
                    None => bilinear,
                };
                let positive = centre > -thr;
                saddle_positive[j * (n - 1) + i] = positive;
                if positive == s[0] {
                    uf.union(k[0] as u32, k[2] as u32);
                } else {
                    uf.union(k[1] as u32, k[3] as u32);
                }
            }
        }
    }
    let mut label_of_root = vec![u32::MAX; total];
    let mut vertex_labels = vec![0u32; total];
    let mut domains: Vec<Domain> = Vec::new();
    for v in 0..total {
        let r = uf.find(v as u32) as usize;
        if label_of_root[r] == u32::MAX {
            label_of_root[r] = domains.len() as u32;
            domains.push(Domain {
                sign: if pos[v] { 1 } else { -1 },
                area: 0.0,
                boundary_touching: false,
                vertex_count: 0,
            });
        }
        let l = label_of_root[r];
        vertex_labels[v] = l;
        let d = &mut domains[l as usize];
        d.vertex_count += 1;
        let (i, j) = (v % n, v / n);
        if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
            d.boundary_touching = true;
        }
    }

    // Edge ids: horizontal (i,j)–(i+1,j) then vertical (i,j)–(i,j+1).
    let hoff = (n * (n - 1)) as u32;
    let hid = |i: usize, j: usize| (j * (n - 1) + i) as u32;
    let vid = |i: usize, j: usize| hoff + (j * n + i) as u32;
    let edge_count = 2 * n * (n - 1);
    let edge_vertices = |e: u32| -> (usize, usize) {
        if e < hoff {
            let (j, i) = ((e as usize) / (n - 1), (e as usize) % (n - 1));
            (idx(i, j), idx(i + 1, j))
        } else {
            let r = (e - hoff) as usize;
            let (j, i) = (r / n, r % n);
            (idx(i, j), idx(i, j + 1))
        }
    };
    let crossing = |e: u32| -> [f64; 2] {
        let (a, b) = edge_vertices(e);
        let (va, vb) = (values[a], values[b]);
        let t = va / (va - vb);
        let (ax, ay) = (coord(a % n), coord(a / n));
        let (bx, by) = (coord(b % n), coord(b / n));
        [ax + t * (bx - ax), ay + t * (by - ay)]
    };

    let mut segments: Vec<Segment> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let k = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let s = [pos[k[0]], pos[k[1]], pos[k[2]], pos[k[3]]];
            let e = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let mut starts = [0usize; 2];
            let mut ends = [0usize; 2];
            let (mut ns, mut ne) = (0, 0);
            for q in 0..4 {
                let (a, b) = (s[q], s[(q + 1) % 4]);
                if a && !b {
                    starts[ns] = q;
                    ns += 1;
                } else if !a && b {
                    ends[ne] = q;
                    ne += 1;
                }
            }
            match ns {
                0 => {}
                1 => segments.push(Segment {
                    from: e[starts[0]],
                    to: e[ends[0]],
                }),
                _ => {
                    // Joined positives isolate each negative corner: start a pairs with end a+1.
                    let positives_joined = saddle_positive[j * (n - 1) + i];
                    for &a in &starts[..2] {
                        let b = if positives_joined { (a + 1) % 4 } else { (a + 3) % 4 };
                        segments.push(Segment { from: e[a], to: e[b] });
                    }
                }
            }
        }
    }

    // Chain segments through shared edges.
    let mut start_at = vec![u32::MAX; edge_count];
    let mut has_pred = vec![false; segments.len()];
    for (si, s) in segments.iter().enumerate() {
        start_at[s.from as usize] = si as u32;
    }
    for s in segments.iter() {
        let nxt = start_at[s.to as usize];
        if nxt != u32::MAX {
            has_pred[nxt as usize] = true;
        }
    }
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<(Vec<u32>, bool)> = Vec::new();
    let trace = |first: usize, used: &mut Vec<bool>| -> (Vec<u32>, bool) {
        let mut edges = vec![segments[first].from];
        let mut cur = first;
        loop {
            used[cur] = true;
            let to = segments[cur].to;
            let nxt = start_at[to as usize];
            if nxt == u32::MAX {
                edges.push(to);
                return (edges, false);
            }
            if nxt as usize == first {
                return (edges, true);
            }
            edges.push(to);
            cur = nxt as usize;
        }
    };
    for si in 0..segments.len() {
        if !has_pred[si] && !used[si] {
            chains.push(trace(si, &mut used));
        }
    }
    for si in 0..segments.len() {
        if !used[si] {
            chains.push(trace(si, &mut used));
        }
    }

    let mut components: Vec<Component> = chains
        .into_iter()
        .map(|(edges, closed)| {
            let points: Vec<[f64; 2]> = edges.iter().map(|&e| crossing(e)).collect();
            let (a, b) = edge_vertices(edges[0]);
            let (pv, nv) = if pos[a] { (a, b) } else { (b, a) };
            let (plus, minus) = (vertex_labels[pv] as usize, vertex_labels[nv] as usize);
            let (inside_domain, outside_domain) = if closed && geometry::signed_area(&points) < 0.0 {
                (minus, plus)
            } else {
                (plus, minus)
            };
            let length = geometry::polyline_length(&points, closed);
            let diameter = geometry::diameter(&points);
            let max_radius = points.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
            Component {
                points,
                edges,
                closed,
                boundary_touching: !closed,
                inside_domain,
                outside_domain,
                parent: None,
                length,
                diameter,
                max_radius,
            }
        })
        .collect();
    let mut enclosing = vec![usize::MAX; domains.len()];
    for (ci, comp) in components.iter().enumerate() {
        if comp.closed {
            enclosing[comp.inside_domain] = ci;
        }
    }
    for comp in components.iter_mut() {
        if comp.closed {
            let p = enclosing[comp.outside_domain];
            comp.parent = if p == usize::MAX { None } else { Some(p) };
        }
    }

    // Areas of the piecewise-linear cell pieces.
    let cell_area = h * h;
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let k = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let s = [pos[k[0]], pos[k[1]], pos[k[2]], pos[k[3]]];
            let e = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let corner = |q: usize| -> [f64; 2] { [coord(k[q] % n), coord(k[q] / n)] };
            let flips = (0..4).filter(|&q| s[q] != s[(q + 1) % 4]).count();
            if flips == 0 {
                domains[vertex_labels[k[0]] as usize].area += cell_area;
                continue;
            }
            // Corner groups cut off by each segment: list of (corners, start edge, end edge).
            let mut cut: Vec<(Vec<usize>, usize, usize)> = Vec::new();
            if flips == 2 {
                let neg: Vec<usize> = (0..4).filter(|&q| !s[q]).collect();
                // negative arc c_{a+1}..c_b from start edge a to end edge b
                let a = (0..4).find(|&q| s[q] && !s[(q + 1) % 4]).unwrap();
                let b = (0..4).find(|&q| !s[q] && s[(q + 1) % 4]).unwrap();
                let _ = neg;
                let mut arc = Vec::new();
                let mut q = (a + 1) % 4;
                loop {
                    arc.push(q);
                    if q == b {
                        break;
                    }
                    q = (q + 1) % 4;
                }
                cut.push((arc, a, b));
            } else {
                let positives_joined = saddle_positive[j * (n - 1) + i];
                let isolated_negative = positives_joined;
                for q in 0..4 {
                    if s[q] != isolated_negative {
                        // corner q is isolated; edges q−1 and q bound it.
                        cut.push((vec![q], (q + 3) % 4, q));
                    }
                }
            }
            let mut used_area = 0.0;
            for (corners, a, b) in &cut {
                let mut poly = vec![crossing(e[*a])];
                for &q in corners {
                    poly.push(corner(q));
                }
                poly.push(crossing(e[*b]));
                let area = geometry::signed_area(&poly).abs();
                used_area += area;
                domains[vertex_labels[k[corners[0]]] as usize].area += area;
            }
            // The remaining piece belongs to the corners not cut off.
            let rest = (0..4).find(|q| !cut.iter().any(|(cs, _, _)| cs.contains(q))).unwrap();
            domains[vertex_labels[k[rest]] as usize].area += cell_area - used_area;
        }
    }

    Ok(NodalDecomposition {
        size: n,
        h,
        vertex_labels,
        vertex_positive: pos,
        domains,
        components,
    })
}

impl NodalDecomposition {
    pub fn half_extent(&self) -> f64 {
        (self.size / 2) as f64 * self.h
    }

    pub fn window_area(&self) -> f64 {
        let side = (self.size - 1) as f64 * self.h;
        side * side
    }

    /// Closed, away from the grid boundary, and every vertex strictly inside `R − h`.
    pub fn is_contained(&self, component: usize, r: f64) -> bool {
        let c = &self.components[component];
        c.closed && !c.boundary_touching && c.max_radius < r - self.h
    }

    pub fn negated_signs(&self) -> Vec<i8> {
        self.domains.iter().map(|d| -d.sign).collect()
    }
}

/// Number of components contained in the disc of radius `R` (with a one-cell margin).
pub fn count_components(dec: &NodalDecomposition, r: f64) -> usize {
    (0..dec.components.len()).filter(|&c| dec.is_contained(c, r)).count()
}

/// Tree ends of all closed components (open components get `None`).
pub fn tree_ends(dec: &NodalDecomposition) -> Vec<Option<TreeEnd>> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); dec.domains.len()];
    for c in &dec.components {
        if c.closed {
            children[c.outside_domain].push(c.inside_domain);
        }
    }
    let mut memo: Vec<Option<String>> = vec![None; dec.domains.len()];
    dec.components
        .iter()
        .map(|c| {
            if c.closed {
                Some(TreeEnd::from_canonical(tree::canonical(
                    c.inside_domain,
                    &children,
                    &mut memo,
                )))
            } else {
                None
            }
        })
        .collect()
}

pub fn tree_end(dec: &NodalDecomposition, component: usize) -> Result<TreeEnd> {
    let c = dec
        .components
        .get(component)
        .ok_or_else(|| Error::Domain(format!("no component {component}")))?;
    if !c.closed {
        return Err(Error::Domain(format!(
            "component {component} touches the window boundary"
        )));
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); dec.domains.len()];
    for c in &dec.components {
        if c.closed {
            children[c.outside_domain].push(c.inside_domain);
        }
    }
    let mut memo = vec![None; dec.domains.len()];
    Ok(TreeEnd::from_canonical(tree::canonical(
        c.inside_domain,
        &children,
        &mut memo,
    )))
}

/// Contained components grouped by tree end.
pub fn count_by_tree_end(dec: &NodalDecomposition, r: f64) -> BTreeMap<TreeEnd, usize> {
    let ends = tree_ends(dec);
    let mut map = BTreeMap::new();
    for (ci, end) in ends.into_iter().enumerate() {
        if dec.is_contained(ci, r) {
            *map.entry(end.expect("contained components are closed")).or_insert(0) += 1;
        }
    }
    map
}

/// Total nodal length inside a region, with segments clipped exactly.
pub fn nodal_length(dec: &NodalDecomposition, region: &Region) -> f64 {
    let mut total = 0.0;
    for c in &dec.components {
        let pts = &c.points;
        let count = if c.closed {
            pts.len()
        } else {
            pts.len().saturating_sub(1)
        };
        for s in 0..count {
            let a = pts[s];
            let b = pts[(s + 1) % pts.len()];
            total += region.clipped_length(a, b);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainArea {
    pub domain: usize,
    pub area: f64,
    pub is_bounded_interior: bool,
}

pub fn domain_areas(dec: &NodalDecomposition) -> Vec<DomainArea> {
    dec.domains
        .iter()
        .enumerate()
        .map(|(d, dom)| DomainArea {
            domain: d,
            area: dom.area,
            is_bounded_interior: !dom.boundary_touching,
        })
        .collect()
}

/// Structured text export of per-component and per-domain records.
pub fn export(dec: &NodalDecomposition, r: f64) -> String {
    let ends = tree_ends(dec);
    let mut out = String::new();
    let _ = writeln!(out, "# nodallab-decomposition v1 size={} h={} R={}", dec.size, dec.h, r);
    let _ = writeln!(out, "components={} domains={}", dec.components.len(), dec.domains.len());
    for (ci, c) in dec.components.iter().enumerate() {
        let parent = c.parent.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        let end = ends[ci]
            .as_ref()
            .map(|t| t.canonical.clone())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "component id={ci} parent={parent} closed={} length={} diameter={} tree_end={end} contained={}",
            c.closed,
            c.length,
            c.diameter,
            dec.is_contained(ci, r)
        );
    }
    for (di, d) in dec.domains.iter().enumerate() {
        let _ = writeln!(
            out,
            "domain id={di} sign={} area={} interior={}",
            d.sign, d.area, !d.boundary_touching
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{reference_grid, FieldGrid, ReferenceKind};
    use std::f64::consts::PI;

    fn grid_from(f: impl Fn(f64, f64) -> f64, half: f64, h: f64) -> FieldGrid {
        let size = 2 * (half / h).round() as usize + 1;
        let c = (size / 2) as f64;
        let mut values = Vec::with_capacity(size * size);
        for j in 0..size {
            for i in 0..size {
                values.push(f((i as f64 - c) * h, (j as f64 - c) * h));
            }
        }
        FieldGrid::new(values, size, h, half, 0.0, None, "test".into(), 0, 0).unwrap()
    }

    #[test]
    fn unit_circle() {
        let g = reference_grid(&ReferenceKind::DiscQuadratic, 2.0, 0.0, 0.02).unwrap();
        let d = decompose(&g).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.domains.len(), 2);
        let c = &d.components[0];
        assert!(c.closed && c.parent.is_none());
        assert!((c.length - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        assert!((c.diameter - 2.0).abs() < 0.02);
        assert_eq!(d.domains[c.inside_domain].sign, -1);
        assert!((d.domains[c.inside_domain].area - PI).abs() < 0.01 * PI);
        let total: f64 = d.domains.iter().map(|x| x.area).sum();
        assert!((total - d.window_area()).abs() < 1e-9 * d.window_area());
        assert_eq!(tree_end(&d, 0).unwrap().canonical, "()");
        assert!((nodal_length(&d, &Region::Window) - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
    }

    #[test]
    fn constant_field() {
        let g = grid_from(|_, _| 1.0, 2.0, 0.1);
        let d = decompose(&g).unwrap();
        assert!(d.components.is_empty());
        assert_eq!(d.domains.len(), 1);
        assert!(!domain_areas(&d)[0].is_bounded_interior);
        assert_eq!(count_components(&d, 2.0), 0);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let g = grid_from(|x, _| if x.abs() < 0.5 { 0.0 } else { x }, 2.0, 0.1);
        assert!(matches!(decompose(&g), Err(Error::DegenerateGrid { .. })));
    }

    #[test]
    fn nested_circles_of_j0() {
        let g = reference_grid(&ReferenceKind::RadialJ0, 10.0, 0.0, crate::ensembles::DEFAULT_SPACING).unwrap();
        let d = decompose(&g).unwrap();
        let closed: Vec<usize> = (0..d.components.len()).filter(|&c| d.components[c].closed).collect();
        assert_eq!(count_components(&d, 10.0), 3);
        assert_eq!(count_components(&d, 2.0), 0);
        assert_eq!(closed.len(), 3);
        let mut by_radius = closed.clone();
        by_radius.sort_by(|&a, &b| d.components[a].max_radius.total_cmp(&d.components[b].max_radius));
        assert_eq!(d.components[by_radius[0]].parent, Some(by_radius[1]));
        assert_eq!(d.components[by_radius[1]].parent, Some(by_radius[2]));
        assert_eq!(d.components[by_radius[2]].parent, None);
        assert_eq!(tree_end(&d, by_radius[0]).unwrap().canonical, "()");
        assert_eq!(tree_end(&d, by_radius[2]).unwrap().canonical, "((()))");
        let map = count_by_tree_end(&d, 10.0);
        assert_eq!(map.len(), 3);
        assert_eq!(map.values().sum::<usize>(), 3);
    }

    #[test]
    fn sign_flip_symmetry() {
        let g = grid_from(|x, y| (x * 1.3 + 0.2).sin() * (y * 0.7 + 0.3).cos() + 0.1 * x, 8.0, 0.1);
        let a = decompose(&g).unwrap();
        let b = decompose(&g.negated()).unwrap();
        assert_eq!(a.components.len(), b.components.len());
        let la: f64 = a.components.iter().map(|c| c.length).sum();
        let lb: f64 = b.components.iter().map(|c| c.length).sum();
        assert!((la - lb).abs() < 1e-9);
        let ea: Vec<_> = tree_ends(&a).into_iter().flatten().collect();
        let eb: Vec<_> = tree_ends(&b).into_iter().flatten().collect();
        let (mut ea, mut eb) = (ea, eb);
        ea.sort();
        eb.sort();
        assert_eq!(ea, eb);
    }

    #[test]
    fn euler_and_nesting_on_blobs() {
        // A sum of bumps minus a constant: closed curves only.
        let f = |x: f64, y: f64| {
            let b = |cx: f64, cy: f64, r: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (r * r)).exp();
            b(0.0, 0.0, 2.0) - 0.6 * b(0.3, 0.2, 0.6) + b(3.5, 3.0, 0.8) - 0.3
        };
        let g = grid_from(f, 6.0, 0.05);
        let d = decompose(&g).unwrap();
        assert!(d.components.iter().all(|c| c.closed));
        assert_eq!(d.domains.len(), d.components.len() + 1);
        for (ci, c) in d.components.iter().enumerate() {
            if let Some(p) = c.parent {
                let poly = &d.components[p].points;
                assert!(c.points.iter().all(|&q| point_in_polygon(q, poly)), "component {ci}");
            }
        }
        let total: f64 = d.domains.iter().map(|x| x.area).sum();
        assert!((total - d.window_area()).abs() < 1e-9 * d.window_area());
    }

    #[test]
    fn saddle_resolution_uses_centre() {
        // Two crossing lines perturbed: f = x·y + c. The sign of c picks the connection.
        for (cst, joined_positive) in [(0.01, true), (-0.01, false)] {
            let g = grid_from(|x, y| x * y + cst, 1.0, 0.5);
            let d = decompose(&g).unwrap();
            let positives: std::collections::BTreeSet<u32> = (0..g.values.len())
                .filter(|&v| d.vertex_positive[v])
                .map(|v| d.vertex_labels[v])
                .collect();
            assert_eq!(positives.len() == 1, joined_positive);
        }
    }

    #[test]
    fn export_lists_records() {
        let g = reference_grid(&ReferenceKind::DiscQuadratic, 2.0, 0.0, 0.02).unwrap();
        let d = decompose(&g).unwrap();
        let text = export(&d, 2.0);
        assert!(text.contains("component id=0 parent=- closed=true"));
        assert!(text.contains("tree_end=()"));
        assert_eq!(text.matches("domain id=").count(), 2);
    }
}
