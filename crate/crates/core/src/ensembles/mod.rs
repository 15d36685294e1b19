//! Samplers for the three Gaussian eigenfunction ensembles, deterministic
//! reference fields, grids and their text format.

mod arw;
mod bessel_series;
mod grid;
mod reference;
mod rsh;

pub use arw::ArwField;
pub use bessel_series::BesselSeriesField;
pub use grid::{read_grid, write_grid, FieldGrid};
pub use reference::{reference_field, reference_grid, DiscQuadratic, ReferenceKind, TildeF0};
pub use rsh::RshField;

use crate::measures::{lattice_points, SpectralMeasure};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Default pad around the counting window: three wavelengths.
pub const DEFAULT_PAD: f64 = 3.0 * TAU;

/// Default grid spacing: 32 samples per wavelength.
pub const DEFAULT_SPACING: f64 = TAU / 32.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    Mrw {
        measure: SpectralMeasure,
        truncation: usize,
    },
    Rsh {
        n: usize,
    },
    Arw {
        n: u64,
    },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Mrw { .. } => "mrw",
            Variant::Rsh { .. } => "rsh",
            Variant::Arw { .. } => "arw",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub variant: Variant,
    pub window_radius: f64,
    pub grid_spacing: f64,
    pub pad: f64,
    pub master_seed: u64,
}

/// Smallest admissible truncation for a window of radius `r`.
pub fn min_truncation(r: f64) -> usize {
    (10.0 * r).ceil() as usize
}

/// Default truncation, fifty terms beyond the minimum.
pub fn default_truncation(r: f64) -> usize {
    min_truncation(r) + 50
}

impl EnsembleSpec {
    pub fn new(variant: Variant, window_radius: f64, grid_spacing: f64, pad: f64, master_seed: u64) -> Result<Self> {
        let s = EnsembleSpec {
            variant,
            window_radius,
            grid_spacing,
            pad,
            master_seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Random plane wave (uniform measure) with the default truncation.
    pub fn rpw(window_radius: f64, grid_spacing: f64, pad: f64, master_seed: u64) -> Result<Self> {
        let variant = Variant::Mrw {
            measure: SpectralMeasure::Uniform,
            truncation: default_truncation(window_radius),
        };
        Self::new(variant, window_radius, grid_spacing, pad, master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.window_radius;
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "grid spacing must be positive, got {}",
                self.grid_spacing
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSpec(format!("window radius must be positive, got {r}")));
        }
        if !(self.pad >= 0.0 && self.pad.is_finite()) {
            return Err(Error::InvalidSpec(format!("pad must be nonnegative, got {}", self.pad)));
        }
        match &self.variant {
            Variant::Mrw { measure, truncation } => {
                if measure.is_atomic() {
                    return Err(Error::InvalidSpec(
                        "the Bessel series needs a uniform or density measure; use the arithmetic ensemble for atoms"
                            .into(),
                    ));
                }
                if *truncation < min_truncation(r) {
                    return Err(Error::InvalidSpec(format!(
                        "truncation {truncation} below the minimum {} for R = {r}",
                        min_truncation(r)
                    )));
                }
            }
            Variant::Rsh { n } => {
                if *n == 0 || *n > crate::specfn::MAX_DEGREE {
                    return Err(Error::InvalidSpec(format!(
                        "degree {n} outside 1..={}",
                        crate::specfn::MAX_DEGREE
                    )));
                }
                let limit = FRAC_PI_2 * ((*n * (*n + 1)) as f64).sqrt();
                if r > limit {
                    return Err(Error::InvalidSpec(format!("R = {r} exceeds the chart limit {limit}")));
                }
            }
            Variant::Arw { n } => {
                let set = lattice_points(*n)?;
                if set.points.is_empty() {
                    return Err(Error::InvalidSpec(format!("{n} is not a sum of two squares")));
                }
                let limit = PI * (*n as f64).sqrt();
                if r > limit {
                    return Err(Error::InvalidSpec(format!("R = {r} exceeds the torus limit {limit}")));
                }
            }
        }
        Ok(())
    }

    /// Odd grid size whose half-extent covers `R + pad`.
    pub fn grid_size(&self) -> usize {
        grid_size_for(self.window_radius + self.pad, self.grid_spacing)
    }
}

/// Odd vertex count of an origin-centred grid reaching at least `half_extent`.
pub fn grid_size_for(half_extent: f64, h: f64) -> usize {
    let c = (half_extent / h - 1e-9).ceil().max(0.0) as usize;
    2 * c + 1
}

/// Per-sample seed: a fixed 64-bit mix of the master seed and sample index.
pub fn sample_seed(master_seed: u64, sample_index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master_seed.wrapping_add(0x9E37_79B9_7F4A_7C15)) ^ sample_index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn sample_rng(master_seed: u64, sample_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sample_seed(master_seed, sample_index))
}

/// Gaussian coefficients of one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientDraw {
    /// `ξ_0` and `ξ_n` for `1 ≤ n ≤ N`; negative indices follow from `ξ_{−n} = (−1)ⁿ·conj(ξ_n)`.
    Mrw { xi0: f64, xi: Vec<Complex64> },
    /// `ξ_m` for `m = −n..=n`, stored at index `m + n`.
    Rsh { xi: Vec<f64> },
    /// Cosine and sine weights for each point of the half set.
    Arw { xi: Vec<f64>, eta: Vec<f64> },
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn draw_coefficients(spec: &EnsembleSpec, sample_index: u64) -> Result<CoefficientDraw> {
    let mut rng = sample_rng(spec.master_seed, sample_index);
    Ok(match &spec.variant {
        Variant::Mrw { truncation, .. } => {
            let xi0 = normal(&mut rng);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let xi = (0..*truncation)
                .map(|_| Complex64::new(s * normal(&mut rng), s * normal(&mut rng)))
                .collect();
            CoefficientDraw::Mrw { xi0, xi }
        }
        Variant::Rsh { n } => CoefficientDraw::Rsh {
            xi: (0..2 * n + 1).map(|_| normal(&mut rng)).collect(),
        },
        Variant::Arw { n } => {
            let k = lattice_points(*n)?.half_set.len();
            let xi = (0..k).map(|_| normal(&mut rng)).collect();
            let eta = (0..k).map(|_| normal(&mut rng)).collect();
            CoefficientDraw::Arw { xi, eta }
        }
    })
}

/// A field with pointwise values and, where available, exact directional derivatives.
pub trait AnalyticField: Send + Sync {
    fn value(&self, p: [f64; 2]) -> f64;

    /// `[f(p), ∂_v f(p), …, ∂_v^order f(p)]` along the unit direction `dir`.
    fn directional_derivatives(&self, _p: [f64; 2], _dir: [f64; 2], _order: usize) -> Result<Vec<f64>> {
        Err(Error::Unsupported(format!(
            "{} has no analytic derivatives",
            self.describe()
        )))
    }

    fn gradient(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let dx = self.directional_derivatives(p, [1.0, 0.0], 1)?;
        let dy = self.directional_derivatives(p, [0.0, 1.0], 1)?;
        Ok([dx[1], dy[1]])
    }

    /// Values at `((i − c)h, (j − c)h)`, row-major in `j`.
    fn fill_grid(&self, size: usize, h: f64, out: &mut [f64]) -> Result<()> {
        let c = (size / 2) as f64;
        out.par_chunks_mut(size).enumerate().for_each(|(j, row)| {
            let y = (j as f64 - c) * h;
            for (i, v) in row.iter_mut().enumerate() {
                *v = self.value([(i as f64 - c) * h, y]);
            }
        });
        Ok(())
    }

    fn describe(&self) -> String;
}

/// Field of one ensemble sample.
#[derive(Debug, Clone)]
pub enum EnsembleField {
    Mrw(BesselSeriesField),
    Rsh(RshField),
    Arw(ArwField),
}

impl AnalyticField for EnsembleField {
    fn value(&self, p: [f64; 2]) -> f64 {
        match self {
            EnsembleField::Mrw(f) => f.value(p),
            EnsembleField::Rsh(f) => f.value(p),
            EnsembleField::Arw(f) => f.value(p),
        }
    }
    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        match self {
            EnsembleField::Mrw(f) => f.directional_derivatives(p, dir, order),
            EnsembleField::Rsh(f) => f.directional_derivatives(p, dir, order),
            EnsembleField::Arw(f) => f.directional_derivatives(p, dir, order),
        }
    }
    fn fill_grid(&self, size: usize, h: f64, out: &mut [f64]) -> Result<()> {
        match self {
            EnsembleField::Mrw(f) => f.fill_grid(size, h, out),
            EnsembleField::Rsh(f) => f.fill_grid(size, h, out),
            EnsembleField::Arw(f) => f.fill_grid(size, h, out),
        }
    }
    fn describe(&self) -> String {
        match self {
            EnsembleField::Mrw(f) => f.describe(),
            EnsembleField::Rsh(f) => f.describe(),
            EnsembleField::Arw(f) => f.describe(),
        }
    }
}

/// Builds the field of a given coefficient draw.
pub fn field_from_draw(spec: &EnsembleSpec, draw: &CoefficientDraw) -> Result<EnsembleField> {
    match (&spec.variant, draw) {
        (Variant::Mrw { measure, .. }, CoefficientDraw::Mrw { xi0, xi }) => Ok(EnsembleField::Mrw(
            BesselSeriesField::from_coefficients(measure, *xi0, xi)?,
        )),
        (Variant::Rsh { n }, CoefficientDraw::Rsh { xi }) => Ok(EnsembleField::Rsh(RshField::new(*n, xi.clone())?)),
        (Variant::Arw { n }, CoefficientDraw::Arw { xi, eta }) => {
            Ok(EnsembleField::Arw(ArwField::new(*n, xi.clone(), eta.clone())?))
        }
        _ => Err(Error::InvalidSpec(
            "coefficient draw does not match the ensemble".into(),
        )),
    }
}

pub fn sample_field(spec: &EnsembleSpec, sample_index: u64) -> Result<EnsembleField> {
    spec.validate()?;
    field_from_draw(spec, &draw_coefficients(spec, sample_index)?)
}

/// Evaluates a field on the grid of `spec`.
pub fn grid_from_field(spec: &EnsembleSpec, field: &dyn AnalyticField, sample_index: u64) -> Result<FieldGrid> {
    let size = spec.grid_size();
    let mut values = vec![0.0; size * size];
    field.fill_grid(size, spec.grid_spacing, &mut values)?;
    FieldGrid::new(
        values,
        size,
        spec.grid_spacing,
        spec.window_radius,
        spec.pad,
        Some(spec.clone()),
        spec.variant.name().to_string(),
        sample_seed(spec.master_seed, sample_index),
        sample_index,
    )
}

pub fn sample(spec: &EnsembleSpec, sample_index: u64) -> Result<FieldGrid> {
    let field = sample_field(spec, sample_index)?;
    grid_from_field(spec, &field, sample_index)
}

fn require(spec: &EnsembleSpec, name: &str) -> Result<()> {
    if spec.variant.name() == name {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "expected a {name} spec, got {}",
            spec.variant.name()
        )))
    }
}

pub fn sample_mrw(spec: &EnsembleSpec, sample_index: u64) -> Result<FieldGrid> {
    require(spec, "mrw")?;
    sample(spec, sample_index)
}

pub fn sample_rsh(spec: &EnsembleSpec, sample_index: u64) -> Result<FieldGrid> {
    require(spec, "rsh")?;
    sample(spec, sample_index)
}

pub fn sample_arw(spec: &EnsembleSpec, sample_index: u64) -> Result<FieldGrid> {
    require(spec, "arw")?;
    sample(spec, sample_index)
}

/// `E[F(z)²]` computed from the coefficient structure, without sampling.
pub fn analytic_variance(spec: &EnsembleSpec, z: [f64; 2]) -> Result<f64> {
    spec.validate()?;
    match &spec.variant {
        Variant::Arw { n } => {
            let set = lattice_points(*n)?;
            Ok(2.0 * set.half_set.len() as f64 / set.points.len() as f64)
        }
        Variant::Rsh { n } => {
            let basis = RshField::basis_at(*n, z)?;
            Ok(basis.iter().map(|g| g * g).sum())
        }
        Variant::Mrw { measure, truncation } => bessel_series::series_variance(measure, *truncation, z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(sample_seed(7, 3), sample_seed(7, 3));
        assert_ne!(sample_seed(7, 3), sample_seed(7, 4));
        assert_ne!(sample_seed(7, 3), sample_seed(8, 3));
        let spec = EnsembleSpec::rpw(3.0, 0.2, 0.5, 11).unwrap();
        assert_eq!(
            draw_coefficients(&spec, 5).unwrap(),
            draw_coefficients(&spec, 5).unwrap()
        );
        assert_ne!(
            draw_coefficients(&spec, 5).unwrap(),
            draw_coefficients(&spec, 6).unwrap()
        );
    }

    #[test]
    fn spec_validation() {
        let trunc_low = Variant::Mrw {
            measure: SpectralMeasure::Uniform,
            truncation: 10,
        };
        assert!(EnsembleSpec::new(trunc_low, 2.0, 0.1, 0.0, 0).is_err());
        let atomic = Variant::Mrw {
            measure: crate::measures::nu_n(5).unwrap(),
            truncation: 100,
        };
        assert!(EnsembleSpec::new(atomic, 2.0, 0.1, 0.0, 0).is_err());
        assert!(EnsembleSpec::new(Variant::Rsh { n: 10 }, 17.0, 0.1, 0.0, 0).is_err());
        assert!(EnsembleSpec::new(Variant::Rsh { n: 10 }, 16.0, 0.1, 0.0, 0).is_ok());
        assert!(EnsembleSpec::new(Variant::Arw { n: 3 }, 1.0, 0.1, 0.0, 0).is_err());
        assert!(EnsembleSpec::new(Variant::Arw { n: 5 }, 7.1, 0.1, 0.0, 0).is_err());
        assert!(EnsembleSpec::rpw(2.0, 0.0, 0.0, 0).is_err());
        assert_eq!(EnsembleSpec::rpw(2.0, 0.5, 0.0, 0).unwrap().grid_size(), 9);
        assert_eq!(EnsembleSpec::rpw(2.0, 0.3, 0.0, 0).unwrap().grid_size(), 15);
    }

    #[test]
    fn complex_draws_have_half_variance_parts() {
        let spec = EnsembleSpec::rpw(30.0, 0.2, 0.0, 99).unwrap();
        let CoefficientDraw::Mrw { xi, .. } = draw_coefficients(&spec, 0).unwrap() else {
            panic!()
        };
        let n = xi.len() as f64;
        let re = xi.iter().map(|c| c.re * c.re).sum::<f64>() / n;
        let im = xi.iter().map(|c| c.im * c.im).sum::<f64>() / n;
        assert!((re - 0.5).abs() < 0.1 && (im - 0.5).abs() < 0.1);
    }

    #[test]
    fn variance_identities() {
        for n in [10usize, 50, 200] {
            let spec = EnsembleSpec::new(Variant::Rsh { n }, 5.0, 0.5, 0.0, 0).unwrap();
            for z in [[0.0, 0.0], [1.3, -2.0], [4.0, 3.0]] {
                assert!((analytic_variance(&spec, z).unwrap() - 1.0).abs() < 1e-8);
            }
        }
        let spec = EnsembleSpec::new(
            Variant::Mrw {
                measure: SpectralMeasure::Uniform,
                truncation: 200,
            },
            20.0,
            0.5,
            0.0,
            0,
        )
        .unwrap();
        for z in [[0.0, 0.0], [7.0, 0.0], [0.0, -20.0], [14.0, 14.0]] {
            assert!((analytic_variance(&spec, z).unwrap() - 1.0).abs() < 1e-8);
        }
        for n in [5u64, 25, 65] {
            let spec = EnsembleSpec::new(Variant::Arw { n }, 5.0, 0.5, 0.0, 0).unwrap();
            assert_eq!(analytic_variance(&spec, [0.3, 0.1]).unwrap(), 1.0);
        }
    }
}
