use super::{field_grid, grid_gradient};
use crate::ensembles::{AnalyticField, FieldGrid};
use crate::nodal::{decompose_with, tree_ends, NodalDecomposition, Region};
use crate::{Error, Result};
use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq)]
pub struct ShellReport {
    /// Components of the unperturbed field farther than `α/β` from the region boundary.
    pub eligible: Vec<usize>,
    /// Eligible component and its unique partner in the perturbed field.
    pub pairs: Vec<(usize, usize)>,
    /// Eligible components whose shell holds no perturbed component.
    pub unmatched: Vec<usize>,
    /// Eligible components whose shell holds more than one.
    pub ambiguous: Vec<usize>,
    pub shells_disjoint: bool,
    pub tree_ends_preserved: bool,
    pub bijection: bool,
    pub unperturbed: NodalDecomposition,
    pub perturbed: NodalDecomposition,
}

struct Sum<'a>(&'a dyn AnalyticField, &'a dyn AnalyticField);

impl AnalyticField for Sum<'_> {
    fn value(&self, p: [f64; 2]) -> f64 {
        self.0.value(p) + self.1.value(p)
    }
    fn describe(&self) -> String {
        format!("{} + {}", self.0.describe(), self.1.describe())
    }
}

fn check_premise(f: &FieldGrid, pert: &FieldGrid, alpha: f64, beta: f64, region: &Region) -> Result<()> {
    for j in 0..f.size {
        for i in 0..f.size {
            let p = [f.coord(i), f.coord(j)];
            if !region.contains(p) {
                continue;
            }
            let g = grid_gradient(f, i, j);
            let (v, gn) = (f.at(i, j).abs(), g[0].hypot(g[1]));
            if v <= alpha && gn <= beta {
                return Err(Error::PremiseViolation {
                    x: p[0],
                    y: p[1],
                    reason: format!("|f| = {v:.3e} ≤ α and |∇f| = {gn:.3e} ≤ β"),
                });
            }
            let gh = grid_gradient(pert, i, j);
            let (hv, hg) = (pert.at(i, j).abs(), gh[0].hypot(gh[1]));
            if hv > 0.5 * alpha || hg > 0.5 * beta {
                return Err(Error::PremiseViolation {
                    x: p[0],
                    y: p[1],
                    reason: format!("perturbation |h| = {hv:.3e}, |∇h| = {hg:.3e} exceeds (α/2, β/2)"),
                });
            }
        }
    }
    Ok(())
}

/// Vertex labels of the 4-connected pieces of `{|f| < α} ∩ U`; `u32::MAX` elsewhere.
fn shell_labels(f: &FieldGrid, alpha: f64, region: &Region) -> Vec<u32> {
    let n = f.size;
    let inside = |v: usize| f.values[v].abs() < alpha && region.contains([f.coord(v % n), f.coord(v / n)]);
    let mut labels = vec![u32::MAX; n * n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n * n {
        if labels[start] != u32::MAX || !inside(start) {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let (i, j) = (v % n, v / n);
            let mut visit = |w: usize| {
                if labels[w] == u32::MAX && inside(w) {
                    labels[w] = next;
                    queue.push_back(w);
                }
            };
            if i > 0 {
                visit(v - 1);
            }
            if i + 1 < n {
                visit(v + 1);
            }
            if j > 0 {
                visit(v - n);
            }
            if j + 1 < n {
                visit(v + n);
            }
        }
        next += 1;
    }
    labels
}

fn edge_vertices(n: usize, e: u32) -> (usize, usize) {
    let hoff = (n * (n - 1)) as u32;
    if e < hoff {
        let (j, i) = ((e as usize) / (n - 1), (e as usize) % (n - 1));
        (j * n + i, j * n + i + 1)
    } else {
        let r = (e - hoff) as usize;
        (r, r + n)
    }
}

/// Shell labels met by a component, read at the endpoint of each crossing
/// edge where the unperturbed field is smaller.
fn labels_of(dec: &NodalDecomposition, comp: usize, f: &FieldGrid, labels: &[u32]) -> BTreeSet<u32> {
    let n = dec.size;
    dec.components[comp]
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = edge_vertices(n, e);
            if f.values[a].abs() <= f.values[b].abs() {
                labels[a]
            } else {
                labels[b]
            }
        })
        .collect()
}

/// Matches the nodal components of `f` with those of `f + perturbation`
/// inside their shells of `{|f| < α}` on the bounded region `U`.
///
/// The perturbation bounds are checked as `|h| ≤ α/2` and `|∇h| ≤ β/2`.
pub fn shell_test(
    f: &dyn AnalyticField,
    perturbation: &dyn AnalyticField,
    alpha: f64,
    beta: f64,
    region: &Region,
    h: f64,
) -> Result<ShellReport> {
    if !(alpha > 0.0 && beta > 0.0 && h > 0.0) {
        return Err(Error::Domain("α, β and h must be positive".into()));
    }
    let half = region
        .bounding_half_extent()
        .ok_or_else(|| Error::Domain("the shell test needs a bounded region".into()))?;
    let base = field_grid(f, half, h, "shell:f")?;
    let pert = field_grid(perturbation, half, h, "shell:h")?;
    check_premise(&base, &pert, alpha, beta, region)?;
    let sum = Sum(f, perturbation);
    let moved = field_grid(&sum, half, h, "shell:f+h")?;
    let (d0, d1) = rayon::join(|| decompose_with(&base, Some(f)), || decompose_with(&moved, Some(&sum)));
    let (d0, d1) = (d0?, d1?);
    let labels = shell_labels(&base, alpha, region);
    let margin = alpha / beta;
    let eligible: Vec<usize> = (0..d0.components.len())
        .filter(|&c| {
            d0.components[c]
                .points
                .iter()
                .map(|&p| region.boundary_distance(p))
                .fold(f64::INFINITY, f64::min)
                > margin
        })
        .collect();
    let shells: Vec<BTreeSet<u32>> = eligible.iter().map(|&c| labels_of(&d0, c, &base, &labels)).collect();
    let mut shells_disjoint = shells.iter().all(|s| !s.contains(&u32::MAX));
    for a in 0..shells.len() {
        for b in a + 1..shells.len() {
            if !shells[a].is_disjoint(&shells[b]) {
                shells_disjoint = false;
            }
        }
    }
    let moved_labels: Vec<BTreeSet<u32>> = (0..d1.components.len())
        .map(|c| labels_of(&d1, c, &base, &labels))
        .collect();
    let ends0 = tree_ends(&d0);
    let ends1 = tree_ends(&d1);
    let (mut pairs, mut unmatched, mut ambiguous) = (Vec::new(), Vec::new(), Vec::new());
    let mut tree_ends_preserved = true;
    for (k, &c) in eligible.iter().enumerate() {
        let inside: Vec<usize> = (0..d1.components.len())
            .filter(|&m| !moved_labels[m].is_empty() && moved_labels[m].is_subset(&shells[k]))
            .collect();
        match inside.len() {
            0 => unmatched.push(c),
            1 => {
                if ends0[c] != ends1[inside[0]] {
                    tree_ends_preserved = false;
                }
                pairs.push((c, inside[0]));
            }
            _ => ambiguous.push(c),
        }
    }
    let targets: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
    let bijection = unmatched.is_empty() && ambiguous.is_empty() && shells_disjoint && targets.len() == pairs.len();
    Ok(ShellReport {
        eligible,
        pairs,
        unmatched,
        ambiguous,
        shells_disjoint,
        tree_ends_preserved,
        bijection,
        unperturbed: d0,
        perturbed: d1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{BesselSeriesField, DiscQuadratic};

    struct Constant(f64);
    impl AnalyticField for Constant {
        fn value(&self, _p: [f64; 2]) -> f64 {
            self.0
        }
        fn describe(&self) -> String {
            "constant".into()
        }
    }

    struct Linear(f64);
    impl AnalyticField for Linear {
        fn value(&self, p: [f64; 2]) -> f64 {
            self.0 * p[0]
        }
        fn describe(&self) -> String {
            "linear".into()
        }
    }

    struct Scaled(BesselSeriesField, f64);
    impl AnalyticField for Scaled {
        fn value(&self, p: [f64; 2]) -> f64 {
            self.1 * self.0.value(p)
        }
        fn describe(&self) -> String {
            "scaled".into()
        }
    }

    #[test]
    fn j0_with_constant_shift() {
        let f = BesselSeriesField::radial_j0();
        let rep = shell_test(&f, &Constant(0.025), 0.05, 0.05, &Region::disc(10.0), 0.05).unwrap();
        assert_eq!(rep.eligible.len(), 3);
        assert_eq!(rep.pairs.len(), 3);
        assert!(rep.bijection && rep.tree_ends_preserved);
        let rep = shell_test(&f, &Constant(0.0), 0.05, 0.05, &Region::disc(10.0), 0.05).unwrap();
        assert!(rep.bijection);
        for (a, b) in &rep.pairs {
            assert_eq!(
                rep.unperturbed.components[*a].points,
                rep.perturbed.components[*b].points
            );
        }
    }

    #[test]
    fn circle_in_annulus() {
        let region = Region::Annulus {
            center: [0.0, 0.0],
            inner: 0.5,
            outer: 1.5,
        };
        let rep = shell_test(&DiscQuadratic, &Linear(0.01), 0.1, 0.5, &region, 0.01).unwrap();
        assert_eq!(rep.pairs.len(), 1);
        assert!(rep.bijection && rep.tree_ends_preserved);
    }

    #[test]
    fn premise_violations_name_a_point() {
        let weak = Scaled(BesselSeriesField::radial_j0(), 1e-4);
        match shell_test(&weak, &Constant(0.0), 0.05, 0.05, &Region::disc(5.0), 0.1) {
            Err(Error::PremiseViolation { x, y, .. }) => assert!(x.hypot(y) <= 5.0),
            other => panic!("expected a premise violation, got {other:?}"),
        }
        let f = BesselSeriesField::radial_j0();
        assert!(matches!(
            shell_test(&f, &Constant(0.03), 0.05, 0.05, &Region::disc(5.0), 0.1),
            Err(Error::PremiseViolation { .. })
        ));
        assert!(shell_test(&f, &Constant(0.0), 0.05, 0.05, &Region::Window, 0.1).is_err());
    }
}
