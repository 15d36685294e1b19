use super::BoundCertificate;
use crate::ensembles::sample_rng;
use crate::measures::{lattice_points, modulus_of_continuity, SpectralMeasure};
use crate::specfn::{bessel_j, legendre_f, quad_adaptive};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, TAU};

/// Angular resolution for the Fourier data of `f·ψ`.
const ANGLES: usize = 4096;
/// Angular resolution of the `I_ν` convolution.
const CONV_ANGLES: usize = 8192;
/// Highest frequency of the random test functions.
const TEST_DEGREE: i64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct NormRelationReport {
    pub certificate: BoundCertificate,
    pub t_list: Vec<f64>,
    /// `ratios[t][trial] = ∫_{B(T)} f̂² / (T²·ω_ν(1/T))` for unit `‖f‖_{L²(ν)}`.
    pub ratios: Vec<Vec<f64>>,
    /// `sup_θ I_ν(θ) / ω_ν(1/T)` per `T`.
    pub convolution_ratios: Vec<f64>,
    /// Twice the smallest-`T` convolution ratio.
    pub convolution_constant: f64,
    pub convolution_pass: bool,
}

fn density_samples(nu: &SpectralMeasure) -> Result<Vec<f64>> {
    if nu.is_atomic() {
        return Err(Error::InvalidMeasure("the norm relation needs a density".into()));
    }
    Ok((0..ANGLES)
        .map(|j| nu.density_at(TAU * j as f64 / ANGLES as f64).expect("density"))
        .collect())
}

/// `∫₀^T J_m(r)² r dr = T²/2·(J_m(T)² − J_{m−1}(T)J_{m+1}(T))`.
fn bessel_square_moment(m: usize, t: f64) -> Result<f64> {
    let jm = bessel_j(m, t)?;
    let cross = if m == 0 {
        -bessel_j(1, t)?.powi(2)
    } else {
        bessel_j(m - 1, t)? * bessel_j(m + 1, t)?
    };
    Ok(0.5 * t * t * (jm * jm - cross))
}

/// Random `f = Σ_{|k|≤3} c_k e^{ikθ}` with `f(θ+π) = conj f(θ)`.
fn random_symmetric(rng: &mut impl Rng) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); (2 * TEST_DEGREE + 1) as usize];
    let idx = |k: i64| (k + TEST_DEGREE) as usize;
    c[idx(0)] = Complex64::new(rng.sample(StandardNormal), 0.0);
    for k in 1..=TEST_DEGREE {
        let v = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        c[idx(k)] = v;
        c[idx(-k)] = if k % 2 == 0 { v.conj() } else { -v.conj() };
    }
    c
}

fn eval_trig(c: &[Complex64], theta: f64) -> Complex64 {
    c.iter()
        .enumerate()
        .map(|(i, &ck)| ck * Complex64::from_polar(1.0, (i as i64 - TEST_DEGREE) as f64 * theta))
        .sum()
}

/// `∫_{B(T)} |f̂|²` for `f̂(z) = ∫ e^{−iz·v} f dν`, from the Fourier
/// coefficients `g_m` of `g = f·ψ`: `8π³ Σ_m |g_m|² ∫₀^T J_m² r dr`.
fn ball_energy(g_hat: &[(i64, Complex64)], t: f64) -> Result<f64> {
    let mut s = 0.0;
    for &(m, g) in g_hat {
        s += g.norm_sqr() * bessel_square_moment(m.unsigned_abs() as usize, t)?;
    }
    Ok(8.0 * PI.powi(3) * s)
}

fn fourier_coefficients(values: &[Complex64], max_freq: i64) -> Vec<(i64, Complex64)> {
    let n = values.len();
    (-max_freq..=max_freq)
        .map(|m| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -(m as f64) * TAU * j as f64 / n as f64))
                .sum();
            (m, s / n as f64)
        })
        .collect()
}

fn max_density_frequency(nu: &SpectralMeasure) -> i64 {
    match nu {
        SpectralMeasure::Density(d) => 2 * d.max_k() as i64,
        _ => 0,
    }
}

/// `I_ν(θ) = ∫ exp(−2T² sin²((θ−α)/2)) dν(α)`, maximized over a grid of `θ`.
fn convolution_sup(nu: &SpectralMeasure, t: f64) -> f64 {
    let da = TAU / CONV_ANGLES as f64;
    let psi: Vec<f64> = (0..CONV_ANGLES)
        .map(|j| nu.density_at(da * j as f64).expect("density"))
        .collect();
    let kernel: Vec<f64> = (0..CONV_ANGLES)
        .map(|j| (-2.0 * t * t * (0.5 * da * j as f64).sin().powi(2)).exp())
        .collect();
    let step = CONV_ANGLES / 256;
    let mut best = 0.0f64;
    for i in (0..CONV_ANGLES).step_by(step) {
        let mut s = 0.0;
        for (j, &p) in psi.iter().enumerate() {
            s += kernel[(i + CONV_ANGLES - j) % CONV_ANGLES] * p;
        }
        best = best.max(s * da);
    }
    best
}

/// Checks `∫_{B(T)} f̂² ≲ T²·ω_ν(1/T)·‖f‖²` for random symmetric trigonometric
/// test functions, together with the sup bound on `I_ν`.
///
/// The ball integral is evaluated from the Bessel–Fourier expansion of `f̂`
/// (exact up to the angular trapezoid rule) rather than on a spatial grid.
pub fn certify_norm_relation_mrw(
    nu: &SpectralMeasure,
    t_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<NormRelationReport> {
    if t_list.is_empty() || t_list.iter().any(|&t| !(t > 0.0 && t <= 60.0)) || trials == 0 {
        return Err(Error::Domain("need T ∈ (0, 60] and at least one trial".into()));
    }
    let psi = density_samples(nu)?;
    let mut t_sorted = t_list.to_vec();
    t_sorted.sort_by(f64::total_cmp);
    let omegas: Vec<f64> = t_sorted
        .iter()
        .map(|&t| modulus_of_continuity(nu, 1.0 / t).map(|m| m.value))
        .collect::<Result<_>>()?;
    let max_freq = TEST_DEGREE + max_density_frequency(nu);
    let mut ratios = vec![Vec::with_capacity(trials); t_sorted.len()];
    let mut rng = sample_rng(seed, 0);
    for _ in 0..trials {
        let c = random_symmetric(&mut rng);
        let f: Vec<Complex64> = (0..ANGLES)
            .map(|j| eval_trig(&c, TAU * j as f64 / ANGLES as f64))
            .collect();
        let norm: f64 = f.iter().zip(&psi).map(|(v, p)| v.norm_sqr() * p).sum::<f64>() * TAU / ANGLES as f64;
        let g: Vec<Complex64> = f.iter().zip(&psi).map(|(v, p)| v * *p / norm.sqrt()).collect();
        let g_hat = fourier_coefficients(&g, max_freq);
        for (k, &t) in t_sorted.iter().enumerate() {
            ratios[k].push(ball_energy(&g_hat, t)? / (t * t * omegas[k]));
        }
    }
    let base = ratios[0].iter().copied().fold(0.0, f64::max);
    let (mut worst, mut at) = (0.0f64, String::new());
    for (k, row) in ratios.iter().enumerate() {
        let top = row.iter().copied().fold(0.0, f64::max);
        if top / base > worst {
            worst = top / base;
            at = format!("T={}", t_sorted[k]);
        }
    }
    let convolution_ratios: Vec<f64> = t_sorted
        .iter()
        .zip(&omegas)
        .map(|(&t, &w)| convolution_sup(nu, t) / w)
        .collect();
    let convolution_constant = 2.0 * convolution_ratios[0];
    let convolution_pass = convolution_ratios.iter().all(|&r| r <= convolution_constant);
    let mut certificate = BoundCertificate::new(
        "norm-mrw",
        format!("T ∈ {t_sorted:?}, {trials} trials, ν = {}", nu.descriptor()),
        worst,
        at,
        2.0,
        0.0,
    );
    certificate.pass &= convolution_pass;
    Ok(NormRelationReport {
        certificate,
        t_list: t_sorted,
        ratios,
        convolution_ratios,
        convolution_constant,
        convolution_pass,
    })
}

/// Degree used to freeze the spherical constant.
pub const RSH_BASELINE_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RshNormReport {
    pub certificate: BoundCertificate,
    /// `∫_{B(R)} h² / (R‖h‖²)` per trial.
    pub ratios: Vec<f64>,
    pub baseline: f64,
    /// `(2π n(n+1) / (R(2n+1)))·∫_{cos(R/√(n(n+1)))}^1 (f_n^m)²` for `m = 0..=n`.
    pub mode_weights: Vec<f64>,
}

/// Per-order weights; a harmonic `Σ a_m g_m` has ratio `Σ a_m² w_{|m|} / Σ a_m²`.
fn rsh_mode_weights(n: usize, r: f64) -> Result<Vec<f64>> {
    let big = (n * (n + 1)) as f64;
    let cap = 1.0 - (r / big.sqrt()).cos();
    let top = cap.sqrt();
    (0..=n)
        .map(|m| {
            let g = |u: f64| {
                let v = legendre_f(n, m, 1.0 - u * u).unwrap_or(0.0);
                2.0 * u * v * v
            };
            let q = quad_adaptive(g, 0.0, top, 1e-14)?;
            Ok(TAU * big * q.value / (r * (2 * n + 1) as f64))
        })
        .collect()
}

fn rsh_ratios(n: usize, weights: &[f64], trials: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = sample_rng(seed, stream);
    (0..trials)
        .map(|_| {
            let a: Vec<f64> = (0..2 * n + 1).map(|_| rng.sample(StandardNormal)).collect();
            let num: f64 = a.iter().enumerate().map(|(i, v)| v * v * weights[i.abs_diff(n)]).sum();
            let den: f64 = a.iter().map(|v| v * v).sum();
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect()
}

/// Checks `∫_{B(R)} h² ≤ C·R·‖h‖²` for random degree-`n` harmonics in the
/// geodesic chart, with `C` frozen as the largest ratio at degree 20.
///
/// Integrals over the geodesic disc reduce, by orthogonality in `φ`, to one
/// radial Legendre integral per order.
pub fn certify_norm_relation_rsh(n: usize, r: f64, trials: usize, seed: u64) -> Result<RshNormReport> {
    if n == 0 || trials == 0 || !(r > 0.0) {
        return Err(Error::Domain("need n ≥ 1, R > 0 and at least one trial".into()));
    }
    let limit = PI * n as f64 / (2.0 * std::f64::consts::SQRT_2);
    if r > limit {
        return Err(Error::Domain(format!("R = {r} exceeds πn/(2√2) = {limit}")));
    }
    let nb = RSH_BASELINE_DEGREE;
    let rb = r.min(PI * nb as f64 / (2.0 * std::f64::consts::SQRT_2));
    let base_weights = rsh_mode_weights(nb, rb)?;
    let baseline = rsh_ratios(nb, &base_weights, trials, seed, 1)
        .into_iter()
        .fold(0.0, f64::max);
    let mode_weights = rsh_mode_weights(n, r)?;
    let ratios = rsh_ratios(n, &mode_weights, trials, seed, 2);
    let (at, worst) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let certificate = BoundCertificate::new(
        "norm-rsh",
        format!("n={n} R={r}, {trials} trials, baseline n={nb} R={rb}"),
        worst / baseline,
        format!("trial {at}"),
        2.0,
        0.0,
    );
    Ok(RshNormReport {
        certificate,
        ratios,
        baseline,
        mode_weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistributionReport {
    pub certificate: BoundCertificate,
    /// `∫_{B(z,R/√n)} f² / ((πR²/n)‖f‖²)`, `trials × 5` values.
    pub ratios: Vec<f64>,
    /// `2π(log n)^{1 + log 2 / 3}`, the scale above which equidistribution is expected.
    pub threshold: f64,
    pub lattice_size: usize,
}

/// `∫_{B(z,ρ)} e^{iq·x} dx`.
fn disc_transform(q: [f64; 2], z: [f64; 2], rho: f64) -> Result<Complex64> {
    let k = q[0].hypot(q[1]);
    let phase = Complex64::from_polar(1.0, q[0] * z[0] + q[1] * z[1]);
    if k * rho < 1e-12 {
        return Ok(phase * PI * rho * rho);
    }
    Ok(phase * (TAU * rho * bessel_j(1, k * rho)? / k))
}

/// `∫_{B(z,ρ)} f²` for `f = Re Σ_λ c_λ e^{2πiλ·x}`, in closed form.
fn disc_energy(freqs: &[[f64; 2]], c: &[Complex64], z: [f64; 2], rho: f64) -> Result<f64> {
    let mut s = Complex64::new(0.0, 0.0);
    for (a, ka) in freqs.iter().enumerate() {
        for (b, kb) in freqs.iter().enumerate() {
            let sum = [ka[0] + kb[0], ka[1] + kb[1]];
            let diff = [ka[0] - kb[0], ka[1] - kb[1]];
            s += c[a] * c[b] * disc_transform(sum, z, rho)? + c[a] * c[b].conj() * disc_transform(diff, z, rho)?;
        }
    }
    Ok(0.5 * s.re)
}

/// Compares local `L²` mass of random toral eigenfunctions with frequencies
/// `2πλ`, `|λ|² = n`, against the uniform share at five random centres per trial.
pub fn certify_equidistribution_arw(n: u64, r: f64, trials: usize, seed: u64) -> Result<EquidistributionReport> {
    let set = lattice_points(n)?;
    if set.points.len() < 16 {
        return Err(Error::Domain(format!("|Λ_{n}| = {} is below 16", set.points.len())));
    }
    if !(r > 0.0) || trials == 0 {
        return Err(Error::Domain("need R > 0 and at least one trial".into()));
    }
    let freqs: Vec<[f64; 2]> = set
        .half_set
        .iter()
        .map(|&(a, b)| [TAU * a as f64, TAU * b as f64])
        .collect();
    let rho = r / (n as f64).sqrt();
    let mut rng = sample_rng(seed, 0);
    let mut ratios = Vec::with_capacity(5 * trials);
    let (mut worst, mut at) = (0.0f64, String::new());
    for trial in 0..trials {
        // ξ cos + η sin = Re[(ξ − iη) e^{ik·x}]
        let c: Vec<Complex64> = (0..freqs.len())
            .map(|_| {
                let xi: f64 = rng.sample(StandardNormal);
                let eta: f64 = rng.sample(StandardNormal);
                Complex64::new(xi, -eta)
            })
            .collect();
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() / 2.0;
        for _ in 0..5 {
            let z = [rng.random::<f64>(), rng.random::<f64>()];
            let ratio = disc_energy(&freqs, &c, z, rho)? / (PI * rho * rho * norm);
            let dev = (ratio - 1.0).abs();
            if dev > worst {
                worst = dev;
                at = format!("trial {trial} z=({:.4}, {:.4}) ratio={ratio:.4}", z[0], z[1]);
            }
            ratios.push(ratio);
        }
    }
    let threshold = TAU * (n as f64).ln().powf(1.0 + 2f64.ln() / 3.0);
    Ok(EquidistributionReport {
        certificate: BoundCertificate::new(
            "equi-arw",
            format!("n={n} (|Λ|={}), R={r}, {trials} trials × 5 centres", set.points.len()),
            worst,
            at,
            0.25,
            0.0,
        ),
        ratios,
        threshold,
        lattice_size: set.points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bessel_moment_matches_quadrature() {
        for m in [0usize, 1, 4, 9] {
            for t in [0.5, 7.0, 23.0] {
                let q = quad_adaptive(|r| bessel_j(m, r).unwrap().powi(2) * r, 0.0, t, 1e-13)
                    .unwrap()
                    .value;
                assert!((q - bessel_square_moment(m, t).unwrap()).abs() < 1e-10 * q.max(1.0));
            }
        }
    }

    #[test]
    fn ball_energy_matches_grid_midpoint() {
        // Uniform ν, f ≡ 1: f̂ = J₀(|z|) up to 2π/2π.
        let g_hat = vec![(0, Complex64::new(1.0 / TAU, 0.0))];
        let t = 6.0;
        let h = 0.01;
        let steps = (t / h) as i64;
        let mut grid = 0.0;
        for j in -steps..=steps {
            for i in -steps..=steps {
                let r = (i as f64 * h).hypot(j as f64 * h);
                if r <= t {
                    grid += bessel_j(0, r).unwrap().powi(2) * h * h;
                }
            }
        }
        let exact = ball_energy(&g_hat, t).unwrap();
        assert!((exact - grid).abs() < 2e-3 * exact, "{exact} {grid}");
    }

    #[test]
    fn test_functions_are_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let c = random_symmetric(&mut rng);
        for k in 0..20 {
            let t = 0.3 * k as f64;
            let a = eval_trig(&c, t + PI);
            let b = eval_trig(&c, t).conj();
            assert!((a - b).norm() < 1e-12);
        }
    }

    pub(super) fn two_mode_density() -> SpectralMeasure {
        let a2 = Complex64::new(0.1, 0.05);
        let a0 = (1.0 / TAU - 2.0 * a2.norm_sqr()).sqrt();
        SpectralMeasure::density(&[(0, Complex64::new(a0, 0.0)), (2, a2)]).unwrap()
    }

    #[test]
    fn convolution_near_zero_is_one() {
        for nu in [SpectralMeasure::Uniform, two_mode_density()] {
            assert!((convolution_sup(&nu, 1e-6) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mrw_density() {
        let rep = certify_norm_relation_mrw(&two_mode_density(), &[10.0, 20.0, 40.0], 8, 5).unwrap();
        assert!(rep.certificate.pass, "{}", rep.certificate);
    }

    #[test]
    fn mrw_uniform() {
        let rep = certify_norm_relation_mrw(&SpectralMeasure::Uniform, &[10.0, 20.0, 40.0], 8, 3).unwrap();
        assert!(rep.certificate.pass, "{}", rep.certificate);
        assert!(rep.convolution_pass);
        assert!(certify_norm_relation_mrw(&SpectralMeasure::Uniform, &[80.0], 1, 3).is_err());
    }

    #[test]
    fn rsh_single_mode_and_sweep() {
        // One mode: the ratio is that mode's weight.
        let w = rsh_mode_weights(10, 5.0).unwrap();
        let big = 110.0f64;
        let direct = quad_adaptive(
            |x| legendre_f(10, 3, x).unwrap().powi(2),
            (5.0 / big.sqrt()).cos(),
            1.0,
            1e-14,
        )
        .unwrap()
        .value;
        assert!((w[3] - TAU * big * direct / (5.0 * 21.0)).abs() < 1e-10);
        let rep = certify_norm_relation_rsh(50, 30.0, 50, 7).unwrap();
        assert!(rep.certificate.pass, "{}", rep.certificate);
        assert!(certify_norm_relation_rsh(10, 20.0, 5, 7).is_err());
    }

    #[test]
    fn rsh_weights_match_chart_grid() {
        // Compare Σ a² w with a midpoint sum of h² over the chart disc.
        use crate::ensembles::RshField;
        let n = 12;
        let r = 6.0;
        let w = rsh_mode_weights(n, r).unwrap();
        let a: Vec<f64> = (0..2 * n + 1).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.5).collect();
        // The chart metric is the round metric; area element (√N sin(ρ/√N)/ρ) dρ-polar.
        let big = ((n * (n + 1)) as f64).sqrt();
        let h = 0.02;
        let steps = (r / h) as i64;
        let mut s = 0.0;
        for j in -steps..=steps {
            for i in -steps..=steps {
                let u = [i as f64 * h, j as f64 * h];
                let rho = u[0].hypot(u[1]);
                if rho > r {
                    continue;
                }
                let jac = if rho > 0.0 { big * (rho / big).sin() / rho } else { 1.0 };
                let g = RshField::basis_at(n, u).unwrap();
                let v: f64 = g.iter().zip(&a).map(|(x, y)| x * y).sum();
                s += v * v * jac * h * h;
            }
        }
        let norm2: f64 = (2 * n + 1) as f64 * a.iter().map(|v| v * v).sum::<f64>();
        let ratio = s / (r * norm2);
        let formula = a.iter().enumerate().map(|(i, v)| v * v * w[i.abs_diff(n)]).sum::<f64>()
            / a.iter().map(|v| v * v).sum::<f64>();
        assert!((ratio - formula).abs() < 5e-3 * formula, "{ratio} {formula}");
    }

    #[test]
    fn arw_single_mode_and_sweep() {
        // One mode, large disc: ratio tends to 1.
        let freqs = vec![[TAU * 3.0, TAU * 4.0]];
        let c = vec![Complex64::new(1.0, 0.0)];
        let e = disc_energy(&freqs, &c, [0.1, 0.2], 3.0).unwrap();
        assert!((e / (PI * 9.0 * 0.5) - 1.0).abs() < 0.01);
        let rep = certify_equidistribution_arw(5525, 80.0, 10, 11).unwrap();
        assert_eq!(rep.lattice_size, 48);
        assert!(rep.certificate.pass, "{}", rep.certificate);
        assert!(certify_equidistribution_arw(25, 10.0, 1, 1).is_err());
    }
}
