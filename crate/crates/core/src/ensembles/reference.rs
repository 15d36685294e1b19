use super::{grid_size_for, AnalyticField, BesselSeriesField, FieldGrid};
use crate::measures::SpectralMeasure;
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceKind {
    /// Large-radius profile `√(2/(πr))·√ψ(α)·cos(r − π/4)`.
    F0Tilde(SpectralMeasure),
    /// `J_n(r)·cos(nα)`.
    BesselMode(usize),
    RadialJ0,
    /// `x² + y² − 1`.
    DiscQuadratic,
}

impl ReferenceKind {
    pub fn name(&self) -> String {
        match self {
            ReferenceKind::F0Tilde(_) => "f0tilde".into(),
            ReferenceKind::BesselMode(n) => format!("bessel_mode{n}"),
            ReferenceKind::RadialJ0 => "radial_j0".into(),
            ReferenceKind::DiscQuadratic => "disc_quadratic".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeF0 {
    measure: SpectralMeasure,
    clamp: f64,
}

impl TildeF0 {
    /// `clamp` is the smallest radius used; the profile is singular at the origin.
    pub fn new(measure: SpectralMeasure, clamp: f64) -> Result<Self> {
        if measure.is_atomic() {
            return Err(Error::InvalidMeasure("the radial profile needs a density".into()));
        }
        Ok(TildeF0 {
            measure,
            clamp: clamp.max(1e-12),
        })
    }

    fn sqrt_psi(&self, alpha: f64) -> f64 {
        match &self.measure {
            SpectralMeasure::Density(d) => d.sqrt_psi(alpha),
            _ => 1.0 / TAU.sqrt(),
        }
    }
}

impl AnalyticField for TildeF0 {
    fn value(&self, p: [f64; 2]) -> f64 {
        let r = p[0].hypot(p[1]).max(self.clamp);
        let alpha = p[1].atan2(p[0]);
        (2.0 / (PI * r)).sqrt() * self.sqrt_psi(alpha) * (r - FRAC_PI_4).cos()
    }

    fn describe(&self) -> String {
        "radial profile f0tilde".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscQuadratic;

impl AnalyticField for DiscQuadratic {
    fn value(&self, p: [f64; 2]) -> f64 {
        p[0] * p[0] + p[1] * p[1] - 1.0
    }

    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; order + 1];
        out[0] = self.value(p);
        if order >= 1 {
            out[1] = 2.0 * (p[0] * dir[0] + p[1] * dir[1]);
        }
        if order >= 2 {
            out[2] = 2.0 * (dir[0] * dir[0] + dir[1] * dir[1]);
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        "x² + y² − 1".into()
    }
}

/// The field of a reference kind; `h` sets the clamp radius `h/2` of the radial profile.
pub fn reference_field(kind: &ReferenceKind, h: f64) -> Result<Box<dyn AnalyticField>> {
    Ok(match kind {
        ReferenceKind::F0Tilde(m) => Box::new(TildeF0::new(m.clone(), 0.5 * h)?),
        ReferenceKind::BesselMode(n) => Box::new(BesselSeriesField::bessel_mode(*n)),
        ReferenceKind::RadialJ0 => Box::new(BesselSeriesField::radial_j0()),
        ReferenceKind::DiscQuadratic => Box::new(DiscQuadratic),
    })
}

/// Reference field sampled on `[−(R+pad), R+pad]²`.
pub fn reference_grid(kind: &ReferenceKind, window_radius: f64, pad: f64, h: f64) -> Result<FieldGrid> {
    if !(h > 0.0) || !(window_radius > 0.0) || !(pad >= 0.0) {
        return Err(Error::InvalidSpec(
            "reference window needs R > 0, pad ≥ 0 and h > 0".into(),
        ));
    }
    let field = reference_field(kind, h)?;
    let size = grid_size_for(window_radius + pad, h);
    let mut values = vec![0.0; size * size];
    field.fill_grid(size, h, &mut values)?;
    let mut source = format!("reference:{}", kind.name());
    if let ReferenceKind::F0Tilde(m) = kind {
        source = format!("{source}:{}", m.descriptor());
    }
    FieldGrid::new(values, size, h, window_radius, pad, None, source, 0, 0)
}
