//! Second-order convergence of the five-point Laplacian residual on samples
//! of every ensemble.

use nodallab::ensembles::{sample_field, AnalyticField, EnsembleSpec, Variant};
use nodallab::measures::SpectralMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POINTS: usize = 20;
const STEP: f64 = 0.2;

fn flat_laplacian(f: &dyn AnalyticField, p: [f64; 2], h: f64) -> f64 {
    let [x, y] = p;
    (f.value([x + h, y]) + f.value([x - h, y]) + f.value([x, y + h]) + f.value([x, y - h]) - 4.0 * f.value(p)) / (h * h)
}

/// Laplace–Beltrami operator of the sphere of radius `s` in its geodesic
/// polar chart, built from centred differences.
fn chart_laplacian(f: &dyn AnalyticField, p: [f64; 2], h: f64, s: f64) -> f64 {
    let [x, y] = p;
    let v = |a: f64, b: f64| f.value([x + a, y + b]);
    let c = v(0.0, 0.0);
    let fx = (v(h, 0.0) - v(-h, 0.0)) / (2.0 * h);
    let fy = (v(0.0, h) - v(0.0, -h)) / (2.0 * h);
    let fxx = (v(h, 0.0) - 2.0 * c + v(-h, 0.0)) / (h * h);
    let fyy = (v(0.0, h) - 2.0 * c + v(0.0, -h)) / (h * h);
    let fxy = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h);
    let rho = x.hypot(y);
    let radial = (x * fx + y * fy) / rho;
    let angular = x * x * fyy - 2.0 * x * y * fxy + y * y * fxx - rho * radial;
    let t = rho / s;
    fxx + fyy + (1.0 / (s * t.tan()) - 1.0 / rho) * radial + (1.0 / (s * t.sin()).powi(2) - 1.0 / (rho * rho)) * angular
}

fn convergence_ratios(residual: impl Fn([f64; 2], f64) -> f64, radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..POINTS)
        .map(|_| {
            let rho = radius * rng.random::<f64>().sqrt().max(0.1);
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let p = [rho * phi.cos(), rho * phi.sin()];
            residual(p, STEP) / residual(p, STEP / 2.0)
        })
        .collect()
}

fn assert_second_order(label: &str, ratios: &[f64]) {
    for (k, r) in ratios.iter().enumerate() {
        assert!(
            (3.5..=4.5).contains(r),
            "{label}: point {k} has ratio {r}, all {ratios:?}"
        );
    }
}

#[test]
fn plane_wave_residual_is_second_order() {
    let spec = EnsembleSpec::rpw(8.0, 0.1, 0.0, 11).unwrap();
    let field = sample_field(&spec, 0).unwrap();
    let ratios = convergence_ratios(|p, h| (flat_laplacian(&field, p, h) + field.value(p)).abs(), 8.0, 1);
    assert_second_order("rpw", &ratios);
}

#[test]
fn density_measure_residual_is_second_order() {
    let a2 = num_complex::Complex64::new(0.1, 0.05);
    let a0 = (1.0 / std::f64::consts::TAU - 2.0 * a2.norm_sqr()).sqrt();
    let measure = SpectralMeasure::density(&[(0, a0.into()), (2, a2)]).unwrap();
    let variant = Variant::Mrw {
        measure,
        truncation: 200,
    };
    let spec = EnsembleSpec::new(variant, 8.0, 0.1, 0.0, 12).unwrap();
    let field = sample_field(&spec, 3).unwrap();
    let ratios = convergence_ratios(|p, h| (flat_laplacian(&field, p, h) + field.value(p)).abs(), 8.0, 2);
    assert_second_order("mrw density", &ratios);
}

#[test]
fn spherical_harmonic_residual_is_second_order() {
    let n = 60;
    let spec = EnsembleSpec::new(Variant::Rsh { n }, 10.0, 0.1, 0.0, 13).unwrap();
    let field = sample_field(&spec, 1).unwrap();
    let s = ((n * (n + 1)) as f64).sqrt();
    let ratios = convergence_ratios(
        |p, h| (chart_laplacian(&field, p, h, s) + field.value(p)).abs(),
        10.0,
        3,
    );
    assert_second_order("rsh", &ratios);
}

#[test]
fn arithmetic_wave_residual_is_second_order() {
    let spec = EnsembleSpec::new(Variant::Arw { n: 65 }, 8.0, 0.1, 0.0, 14).unwrap();
    let field = sample_field(&spec, 2).unwrap();
    let ratios = convergence_ratios(|p, h| (flat_laplacian(&field, p, h) + field.value(p)).abs(), 8.0, 4);
    assert_second_order("arw", &ratios);
}
