use crate::ensembles::{
    default_truncation, grid_size_for, min_truncation, reference_grid, sample_rng, AnalyticField, BesselSeriesField,
    FieldGrid, ReferenceKind,
};
use crate::measures::SpectralMeasure;
use crate::nodal::{count_components, decompose};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, PartialEq)]
pub struct RareEventOptions {
    /// Fixes `ξ₀` instead of drawing it uniformly from `[√R, 10√R]` with a random sign.
    pub forced_xi0: Option<f64>,
    /// Drops the coefficients beyond `10R` instead of leaving them unconditioned.
    pub truncate_tail: bool,
    pub h: f64,
    pub pad: f64,
}

impl Default for RareEventOptions {
    fn default() -> Self {
        RareEventOptions {
            forced_xi0: None,
            truncate_tail: false,
            h: crate::ensembles::DEFAULT_SPACING,
            pad: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RareEventReport {
    pub xi0: f64,
    /// `Σ_{1≤n≤10R} |ξ_n|²` after projection.
    pub block_norm_sq: f64,
    pub count: usize,
    /// `N_R/πR²` of the conditioned field.
    pub ratio: f64,
    /// Count of the large-radius profile `ξ₀·f̃₀`.
    pub profile_count: usize,
    pub profile_ratio: f64,
    /// `3κ`.
    pub target: f64,
    pub below_target: bool,
}

/// One draw from an approximation of the rare event `√R ≤ |ξ₀| ≤ 10√R`,
/// `Σ_{n≤10R} |ξ_n|² ≤ ρ²R`: the low block is drawn freely and projected onto
/// that ball, so the conditional law is only imitated.
pub fn rare_event_demo(
    measure: &SpectralMeasure,
    r: f64,
    rho: f64,
    kappa: f64,
    seed: u64,
    draw: u64,
    opts: &RareEventOptions,
) -> Result<RareEventReport> {
    if measure.is_atomic() {
        return Err(Error::InvalidMeasure(
            "the rare-event construction needs a density".into(),
        ));
    }
    if !(r > 0.0 && r <= 60.0) || !(rho >= 0.0) || !(kappa > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < R ≤ 60, ρ ≥ 0, κ > 0 (got R={r}, ρ={rho}, κ={kappa})"
        )));
    }
    let mut rng = sample_rng(seed, draw);
    let root = r.sqrt();
    let xi0 = match opts.forced_xi0 {
        Some(x) => x,
        None => {
            let mag = rng.random_range(root..=10.0 * root);
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
    };
    let total = default_truncation(r);
    let block = min_truncation(r);
    let mut xi: Vec<Complex64> = (0..total)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(FRAC_1_SQRT_2 * re, FRAC_1_SQRT_2 * im)
        })
        .collect();
    let cap = rho * rho * r;
    let norm_sq: f64 = xi[..block].iter().map(|c| c.norm_sqr()).sum();
    if norm_sq > cap {
        let s = if cap > 0.0 { (cap / norm_sq).sqrt() } else { 0.0 };
        xi[..block].iter_mut().for_each(|c| *c *= s);
    }
    if opts.truncate_tail {
        xi.truncate(block);
    }
    let block_norm_sq = xi[..block].iter().map(|c| c.norm_sqr()).sum();
    let field = BesselSeriesField::from_coefficients(measure, xi0, &xi)?;
    let size = grid_size_for(r + opts.pad, opts.h);
    let mut values = vec![0.0; size * size];
    field.fill_grid(size, opts.h, &mut values)?;
    let grid = FieldGrid::new(values, size, opts.h, r, opts.pad, None, "rare-event".into(), seed, draw)?;
    let count = count_components(&decompose(&grid)?, r);
    let area = PI * r * r;
    let profile = reference_grid(&ReferenceKind::F0Tilde(measure.clone()), r, opts.pad, opts.h)?;
    let profile_count = count_components(&decompose(&profile)?, r);
    let ratio = count as f64 / area;
    Ok(RareEventReport {
        xi0,
        block_norm_sq,
        count,
        ratio,
        profile_count,
        profile_ratio: profile_count as f64 / area,
        target: 3.0 * kappa,
        below_target: ratio <= 3.0 * kappa,
    })
}

/// Midpoint-rule `∫_{B(L)} F²`, one cell per vertex.
pub fn l2_integral(grid: &FieldGrid, l: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..grid.size {
        let y = grid.coord(j);
        for i in 0..grid.size {
            let x = grid.coord(i);
            if x.hypot(y) <= l {
                s += grid.at(i, j).powi(2);
            }
        }
    }
    s * grid.h * grid.h
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2EventReport {
    pub integrals: Vec<f64>,
    /// Sample mean of `∫_{B(L)} F² / L²`, expected near `π`.
    pub mean_over_l2: f64,
    pub within_contract: bool,
    pub fraction_above_8_mean: f64,
    /// Fraction above `3πL²`; at most one third by Markov.
    pub fraction_above_markov: f64,
}

pub fn l2_event_check(samples: &[FieldGrid], l: f64) -> Result<L2EventReport> {
    if samples.len() < 30 {
        return Err(Error::Domain(format!(
            "need at least 30 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|g| g.half_extent() < l) {
        return Err(Error::Domain(format!("a grid does not cover B({l})")));
    }
    let integrals: Vec<f64> = samples.iter().map(|g| l2_integral(g, l)).collect();
    let n = integrals.len() as f64;
    let mean = integrals.iter().sum::<f64>() / n;
    let mean_over_l2 = mean / (l * l);
    let frac = |t: f64| integrals.iter().filter(|&&v| v > t).count() as f64 / n;
    Ok(L2EventReport {
        mean_over_l2,
        within_contract: (mean_over_l2 - PI).abs() <= 0.2 * PI,
        fraction_above_8_mean: frac(8.0 * mean),
        fraction_above_markov: frac(3.0 * PI * l * l),
        integrals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleSpec};

    #[test]
    fn forced_profile_gives_circles() {
        let opts = RareEventOptions {
            forced_xi0: Some(20f64.sqrt()),
            truncate_tail: true,
            h: 0.1,
            pad: 1.0,
        };
        let rep = rare_event_demo(&SpectralMeasure::Uniform, 20.0, 0.0, 0.02, 5, 0, &opts).unwrap();
        assert_eq!(rep.block_norm_sq, 0.0);
        let j0 = reference_grid(&ReferenceKind::RadialJ0, 20.0, 1.0, 0.1).unwrap();
        assert_eq!(rep.count, count_components(&decompose(&j0).unwrap(), 20.0));
        // Concentric circles: about R/π of them.
        assert!(rep.count <= 8 && rep.count >= 5, "{}", rep.count);
        assert!(rep.profile_count.abs_diff(rep.count) <= 1);
    }

    #[test]
    fn conditioned_draws_respect_the_shell() {
        let opts = RareEventOptions {
            h: 0.2,
            ..RareEventOptions::default()
        };
        for draw in 0..3 {
            let rep = rare_event_demo(&SpectralMeasure::Uniform, 10.0, 0.1, 0.02, 9, draw, &opts).unwrap();
            assert!(rep.xi0.abs() >= 10f64.sqrt() && rep.xi0.abs() <= 10.0 * 10f64.sqrt());
            assert!(rep.block_norm_sq <= 0.01 * 10.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn l2_checks() {
        let spec = EnsembleSpec::rpw(10.0, 0.2, 0.0, 21).unwrap();
        let grids: Vec<FieldGrid> = (0..40).map(|i| sample(&spec, i).unwrap()).collect();
        let rep = l2_event_check(&grids, 10.0).unwrap();
        assert!(rep.within_contract, "{}", rep.mean_over_l2);
        assert!(rep.fraction_above_markov <= 1.0 / 3.0);
        assert!(l2_event_check(&grids[..10], 10.0).is_err());
        let mut zero = grids[0].clone();
        zero.values.iter_mut().for_each(|v| *v = 0.0);
        assert_eq!(l2_integral(&zero, 10.0), 0.0);
    }
}
