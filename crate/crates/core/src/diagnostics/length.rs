use super::{field_grid, Translated, MAX_LADDER};
use crate::ensembles::AnalyticField;
use crate::nodal::{decompose_with, nodal_length, Region};
use crate::{Error, Result};
use std::f64::consts::{PI, SQRT_2};

/// Directions sampled for the tensor norms `‖∇^j f‖`; symmetric tensors attain
/// their norm on the diagonal, so the maximum over directions approximates it from below.
const NORM_DIRECTIONS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct LengthAudit {
    pub center: [f64; 2],
    pub order: usize,
    /// `min over 2𝔻_p of min(d₁, d₂)`, ladders from order 0 to `order`.
    pub a: f64,
    /// `max over 2𝔻_p` of the derivative norms up to `order + 1`.
    pub m: f64,
    pub hypotheses_hold: bool,
    pub bound: f64,
    /// Nodal length inside the unit disc around the centre.
    pub length: f64,
    pub holds: bool,
    /// `bound / length`.
    pub slack: f64,
}

/// Checks the unit-disc nodal length against `64√2·n·M/A`.
///
/// `scan_step` is the lattice spacing of the derivative scan over the disc of
/// radius 2; `h` is the spacing of the grid used to measure the length.
pub fn df_length_audit(
    field: &dyn AnalyticField,
    center: [f64; 2],
    order: usize,
    scan_step: f64,
    h: f64,
) -> Result<LengthAudit> {
    if order == 0 || order > MAX_LADDER {
        return Err(Error::Domain(format!("order {order} outside 1..={MAX_LADDER}")));
    }
    if !(scan_step > 0.0 && h > 0.0) {
        return Err(Error::Domain("scan step and grid spacing must be positive".into()));
    }
    let dirs: Vec<[f64; 2]> = (0..NORM_DIRECTIONS)
        .map(|k| {
            let t = PI * k as f64 / NORM_DIRECTIONS as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let steps = (2.0 / scan_step).floor() as i64;
    let (mut a, mut m) = (f64::INFINITY, 0.0f64);
    for bi in -steps..=steps {
        for ai in -steps..=steps {
            let off = [ai as f64 * scan_step, bi as f64 * scan_step];
            if off[0].hypot(off[1]) > 2.0 {
                continue;
            }
            let p = [center[0] + off[0], center[1] + off[1]];
            let ladder = |dir: [f64; 2]| -> Result<f64> {
                let d = field.directional_derivatives(p, dir, order)?;
                Ok(d.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
            };
            a = a.min(ladder([1.0, 0.0])?.min(ladder([0.0, 1.0])?));
            for &dir in &dirs {
                let d = field.directional_derivatives(p, dir, order + 1)?;
                m = d.iter().fold(m, |acc, v| acc.max(v.abs()));
            }
        }
    }
    let shifted = Translated {
        inner: field,
        offset: center,
    };
    let grid = field_grid(&shifted, 1.0 + 2.0 * h, h, "audit")?;
    let dec = decompose_with(&grid, Some(&shifted))?;
    let length = nodal_length(&dec, &Region::disc(1.0));
    let hypotheses_hold = m > a && a > 0.0;
    let bound = if a > 0.0 {
        64.0 * SQRT_2 * order as f64 * m / a
    } else {
        f64::INFINITY
    };
    let slack = if length > 0.0 { bound / length } else { f64::INFINITY };
    Ok(LengthAudit {
        center,
        order,
        a,
        m,
        hypotheses_hold,
        bound,
        length,
        holds: length <= bound,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::BesselSeriesField;

    #[test]
    fn j0_off_centre() {
        let rep = df_length_audit(&BesselSeriesField::radial_j0(), [4.0, 0.0], 3, 0.1, 0.02).unwrap();
        assert!(rep.hypotheses_hold);
        assert!(rep.holds && rep.slack > 1.0, "{rep:?}");
        // Radii 3 to 5 lie between the first two zeros.
        assert_eq!(rep.length, 0.0);
        let near = df_length_audit(&BesselSeriesField::radial_j0(), [5.0, 0.0], 3, 0.1, 0.02).unwrap();
        assert!(near.length > 1.0 && near.holds);
    }

    #[test]
    fn ray_cluster() {
        let rep = df_length_audit(&BesselSeriesField::bessel_mode(8), [6.0, 0.0], 3, 0.2, 0.02).unwrap();
        assert!(rep.holds);
        assert!(rep.m / rep.a > 1.0);
    }

    #[test]
    fn constant_field_has_no_length() {
        struct One;
        impl AnalyticField for One {
            fn value(&self, _p: [f64; 2]) -> f64 {
                1.0
            }
            fn directional_derivatives(&self, _p: [f64; 2], _d: [f64; 2], order: usize) -> Result<Vec<f64>> {
                let mut v = vec![0.0; order + 1];
                v[0] = 1.0;
                Ok(v)
            }
            fn describe(&self) -> String {
                "one".into()
            }
        }
        let rep = df_length_audit(&One, [0.0, 0.0], 2, 0.5, 0.05).unwrap();
        assert_eq!(rep.length, 0.0);
        assert!(rep.holds);
    }
}
