//! Spectral measures on the unit circle, torus lattice sets and the
//! derivative-covariance Gram matrices built from their moments.

use crate::specfn::quad_adaptive;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::path::Path;

/// Grid resolution used for distribution-function sweeps and symmetry checks.
pub const MEASURE_GRID: usize = 4096;

const MASS_TOL: f64 = 1e-10;

/// Density `ψ = (√ψ)²` with `√ψ(θ) = Σ_{|k|≤K} a_k e^{ikθ}` real.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMeasure {
    max_k: usize,
    // a_{-K}, …, a_K
    coeffs: Vec<Complex64>,
}

impl DensityMeasure {
    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// `a_k`, zero outside `|k| ≤ K`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.max_k as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn sqrt_psi(&self, theta: f64) -> f64 {
        let mut s = self.coeff(0).re;
        for k in 1..=self.max_k {
            let e = Complex64::from_polar(1.0, k as f64 * theta);
            s += 2.0 * (self.coeff(k as i64) * e).re;
        }
        s
    }

    pub fn psi(&self, theta: f64) -> f64 {
        let r = self.sqrt_psi(theta);
        r * r
    }

    /// Exact `∫_0^t ψ`, from the Fourier coefficients of `ψ = (√ψ)²`.
    fn cumulative_exact(&self, t: f64) -> f64 {
        let k = self.max_k as i64;
        let mut total = 0.0;
        for j in -2 * k..=2 * k {
            let mut b = Complex64::new(0.0, 0.0);
            for p in -k..=k {
                b += self.coeff(p) * self.coeff(j - p);
            }
            if j == 0 {
                total += b.re * t;
            } else {
                let jf = j as f64;
                let prim = (Complex64::from_polar(1.0, jf * t) - 1.0) / Complex64::new(0.0, jf);
                total += (b * prim).re;
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

/// A symmetric probability measure on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMeasure {
    Uniform,
    Density(DensityMeasure),
    Atomic(AtomicMeasure),
}

fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl SpectralMeasure {
    /// Density measure from `(k, a_k)` pairs. Missing partners `a_{-k}` are
    /// filled by Hermitian completion; inconsistent partners are rejected.
    pub fn density(pairs: &[(i64, Complex64)]) -> Result<Self> {
        let max_k = pairs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let len = 2 * max_k + 1;
        let mut coeffs: Vec<Option<Complex64>> = vec![None; len];
        for &(k, a) in pairs {
            let idx = (k + max_k as i64) as usize;
            if let Some(prev) = coeffs[idx] {
                if (prev - a).norm() > 1e-14 {
                    return Err(Error::InvalidMeasure(format!("coefficient k={k} given twice")));
                }
            }
            coeffs[idx] = Some(a);
        }
        let mut full = vec![Complex64::new(0.0, 0.0); len];
        for k in -(max_k as i64)..=(max_k as i64) {
            let idx = (k + max_k as i64) as usize;
            let mirror = (-k + max_k as i64) as usize;
            full[idx] = match (coeffs[idx], coeffs[mirror]) {
                (Some(a), Some(b)) => {
                    if (a - b.conj()).norm() > 1e-12 {
                        return Err(Error::InvalidMeasure(format!("a_{k} and a_{} are not conjugate", -k)));
                    }
                    a
                }
                (Some(a), None) => a,
                (None, Some(b)) => b.conj(),
                (None, None) => Complex64::new(0.0, 0.0),
            };
        }
        let d = DensityMeasure { max_k, coeffs: full };
        if d.coeff(0).im.abs() > 1e-12 {
            return Err(Error::InvalidMeasure("a_0 must be real".into()));
        }
        let mass = TAU * d.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {mass} differs from 1")));
        }
        let mut worst: f64 = 0.0;
        for i in 0..MEASURE_GRID {
            let t = TAU * i as f64 / MEASURE_GRID as f64;
            worst = worst.max((d.psi(t) - d.psi(t + PI)).abs());
        }
        if worst > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "density not symmetric under θ ↦ θ+π (gap {worst:e})"
            )));
        }
        Ok(SpectralMeasure::Density(d))
    }

    /// The uniform measure written as a density with `√ψ = 1/√(2π)`.
    pub fn uniform_as_density() -> Self {
        Self::density(&[(0, Complex64::new(1.0 / TAU.sqrt(), 0.0))]).expect("uniform density is valid")
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure without atoms".into()));
        }
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|a| Atom {
                angle: wrap_angle(a.angle),
                weight: a.weight,
            })
            .collect();
        if atoms.iter().any(|a| !(a.weight > 0.0)) {
            return Err(Error::InvalidMeasure("atom weights must be positive".into()));
        }
        let mass: f64 = atoms.iter().map(|a| a.weight).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {mass} differs from 1")));
        }
        for a in &atoms {
            let ok = atoms
                .iter()
                .any(|b| circular_gap(b.angle, a.angle + PI) < 1e-9 && (b.weight - a.weight).abs() < 1e-12);
            if !ok {
                return Err(Error::InvalidMeasure(format!(
                    "atom at {} has no antipodal partner",
                    a.angle
                )));
            }
        }
        atoms.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        Ok(SpectralMeasure::Atomic(AtomicMeasure { atoms }))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, SpectralMeasure::Atomic(_))
    }

    /// `∫ g dν`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        match self {
            SpectralMeasure::Uniform => Ok(quad_adaptive(|t| g(t), 0.0, TAU, 1e-13)?.value / TAU),
            SpectralMeasure::Density(d) => Ok(quad_adaptive(|t| g(t) * d.psi(t), 0.0, TAU, 1e-13)?.value),
            SpectralMeasure::Atomic(a) => Ok(a.atoms.iter().map(|x| x.weight * g(x.angle)).sum()),
        }
    }

    /// `ψ(θ)` for absolutely continuous measures.
    pub fn density_at(&self, theta: f64) -> Option<f64> {
        match self {
            SpectralMeasure::Uniform => Some(1.0 / TAU),
            SpectralMeasure::Density(d) => Some(d.psi(theta)),
            SpectralMeasure::Atomic(_) => None,
        }
    }

    /// Compact textual form used in grid and record headers.
    pub fn descriptor(&self) -> String {
        match self {
            SpectralMeasure::Uniform => "uniform".into(),
            SpectralMeasure::Density(d) => {
                let parts: Vec<String> = (0..=d.max_k as i64)
                    .map(|k| {
                        let c = d.coeff(k);
                        format!("{k}:{}:{}", c.re, c.im)
                    })
                    .collect();
                format!("density[{}]", parts.join(";"))
            }
            SpectralMeasure::Atomic(a) => {
                let parts: Vec<String> = a.atoms.iter().map(|x| format!("{}:{}", x.angle, x.weight)).collect();
                format!("atomic[{}]", parts.join(";"))
            }
        }
    }

    pub fn from_descriptor(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "uniform" {
            return Ok(SpectralMeasure::Uniform);
        }
        let body = |prefix: &str| -> Option<&str> { text.strip_prefix(prefix).and_then(|r| r.strip_suffix(']')) };
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad number '{s}' in measure")))
        };
        if let Some(inner) = body("density[") {
            let mut pairs = Vec::new();
            for part in inner.split(';').filter(|p| !p.is_empty()) {
                let f: Vec<&str> = part.split(':').collect();
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad density term '{part}'")));
                }
                let k: i64 = f[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index '{}'", f[0])))?;
                pairs.push((k, Complex64::new(num(f[1])?, num(f[2])?)));
            }
            return Self::density(&pairs);
        }
        if let Some(inner) = body("atomic[") {
            let mut atoms = Vec::new();
            for part in inner.split(';').filter(|p| !p.is_empty()) {
                let f: Vec<&str> = part.split(':').collect();
                if f.len() != 2 {
                    return Err(Error::Parse(format!("bad atom '{part}'")));
                }
                atoms.push(Atom {
                    angle: num(f[0])?,
                    weight: num(f[1])?,
                });
            }
            return Self::atomic(atoms);
        }
        Err(Error::Parse(format!("unknown measure descriptor '{text}'")))
    }
}

/// Reads a density from lines `k re im` (blank lines and `#` comments skipped).
pub fn load_density(path: &Path) -> Result<SpectralMeasure> {
    let text = std::fs::read_to_string(path)?;
    parse_density(&text)
}

pub fn parse_density(text: &str) -> Result<SpectralMeasure> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |m: &str| Error::Config {
            line: i + 1,
            message: m.to_string(),
        };
        if f.len() != 3 {
            return Err(bad("expected 'k re im'"));
        }
        let k: i64 = f[0].parse().map_err(|_| bad("bad index"))?;
        let re: f64 = f[1].parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = f[2].parse().map_err(|_| bad("bad imaginary part"))?;
        pairs.push((k, Complex64::new(re, im)));
    }
    SpectralMeasure::density(&pairs)
}

/// `Λ_n = {(a, b) ∈ ℤ² : a² + b² = n}` with a fixed half-set selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSet {
    pub n: u64,
    pub points: Vec<(i64, i64)>,
    pub half_set: Vec<(i64, i64)>,
}

fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

pub fn lattice_points(n: u64) -> Result<LatticeSet> {
    if !(1..=1_000_000_000).contains(&n) {
        return Err(Error::Domain(format!("lattice norm {n} outside 1..=1e9")));
    }
    let top = isqrt(n) as i64;
    let mut points = Vec::new();
    for a in -top..=top {
        let rest = n - (a * a) as u64;
        let b = isqrt(rest) as i64;
        if (b * b) as u64 == rest {
            points.push((a, b));
            if b != 0 {
                points.push((a, -b));
            }
        }
    }
    points.sort();
    let half_set = points
        .iter()
        .copied()
        .filter(|&(a, b)| a > 0 || (a == 0 && b > 0))
        .collect();
    Ok(LatticeSet { n, points, half_set })
}

/// Atomic measure `ν_n` placing mass `1/|Λ_n|` at the direction of each lattice point.
pub fn nu_n(n: u64) -> Result<SpectralMeasure> {
    let set = lattice_points(n)?;
    if set.points.is_empty() {
        return Err(Error::InvalidMeasure(format!("{n} is not a sum of two squares")));
    }
    let w = 1.0 / set.points.len() as f64;
    let atoms = set
        .points
        .iter()
        .map(|&(a, b)| Atom {
            angle: (b as f64).atan2(a as f64),
            weight: w,
        })
        .collect();
    SpectralMeasure::atomic(atoms)
}

/// `Φ_ν(t) = ν[0, t]` for `t ∈ [0, 2π]`.
pub fn distribution_function(nu: &SpectralMeasure, t: f64) -> Result<f64> {
    if !(0.0..=TAU + 1e-12).contains(&t) {
        return Err(Error::Domain(format!(
            "distribution function argument {t} outside [0, 2π]"
        )));
    }
    let t = t.min(TAU);
    Ok(match nu {
        SpectralMeasure::Uniform => t / TAU,
        SpectralMeasure::Density(d) => {
            if t == 0.0 {
                0.0
            } else {
                quad_adaptive(|s| d.psi(s), 0.0, t, 1e-13)?.value
            }
        }
        SpectralMeasure::Atomic(a) => atomic_cdf(a, t),
    })
}

fn atomic_cdf(a: &AtomicMeasure, t: f64) -> f64 {
    a.atoms.iter().filter(|x| x.angle <= t + 1e-12).map(|x| x.weight).sum()
}

fn cdf_fast(nu: &SpectralMeasure, t: f64) -> f64 {
    match nu {
        SpectralMeasure::Uniform => t / TAU,
        SpectralMeasure::Density(d) => d.cumulative_exact(t),
        SpectralMeasure::Atomic(a) => atomic_cdf(a, t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    pub value: f64,
    /// Set for atomic measures, whose modulus does not vanish as `ε → 0`.
    pub atomic_warning: bool,
}

/// Upper-biased modulus of continuity: the largest mass of a half-open arc
/// of length `ε + 2π/4096` starting at a grid angle.
pub fn modulus_of_continuity(nu: &SpectralMeasure, eps: f64) -> Result<Modulus> {
    if !(eps > 0.0 && eps <= TAU) {
        return Err(Error::Domain(format!("modulus window {eps} outside (0, 2π]")));
    }
    let cell = TAU / MEASURE_GRID as f64;
    let width = (eps + cell).min(TAU);
    let table: Vec<f64> = (0..=MEASURE_GRID).map(|i| cdf_fast(nu, cell * i as f64)).collect();
    let mut best: f64 = 0.0;
    for (i, &lo) in table.iter().enumerate().take(MEASURE_GRID) {
        let s = cell * i as f64 + width;
        let hi = if s <= TAU {
            cdf_fast(nu, s)
        } else {
            1.0 + cdf_fast(nu, s - TAU)
        };
        best = best.max(hi - lo);
    }
    Ok(Modulus {
        value: best.min(1.0),
        atomic_warning: nu.is_atomic(),
    })
}

/// `k(dz) = ∫ cos(dz · v_θ) dν(θ)`.
pub fn covariance_kernel(nu: &SpectralMeasure, dz: [f64; 2]) -> Result<f64> {
    nu.integrate(|t| (dz[0] * t.cos() + dz[1] * t.sin()).cos())
}

/// Moment `∫ c(θ)^p dν` where `c = cos` on axis 1 and `sin` on axis 2.
pub fn axis_moment(nu: &SpectralMeasure, axis: usize, p: usize) -> Result<f64> {
    if let SpectralMeasure::Uniform = nu {
        if p % 2 == 1 {
            return Ok(0.0);
        }
        let mut v = 1.0;
        for k in (1..=p).step_by(2) {
            v *= k as f64 / (k + 1) as f64;
        }
        return Ok(v);
    }
    if axis == 1 {
        nu.integrate(|t| t.cos().powi(p as i32))
    } else {
        nu.integrate(|t| t.sin().powi(p as i32))
    }
}

#[derive(Debug, Clone)]
pub struct GramReport {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

/// Gram matrix of `(∂_ℓ F(0), …, ∂_ℓ^{jmax} F(0))`:
/// entry `(r, s)` is `(−1)^{(r−s)/2}·∫c^{r+s} dν` for even `r + s`, else 0.
pub fn derivative_covariance_gram(nu: &SpectralMeasure, axis: usize, jmax: usize) -> Result<GramReport> {
    if axis != 1 && axis != 2 {
        return Err(Error::Domain(format!("axis must be 1 or 2, got {axis}")));
    }
    if !(1..=8).contains(&jmax) {
        return Err(Error::Domain(format!("jmax must lie in 1..=8, got {jmax}")));
    }
    let moments: Vec<f64> = (0..=2 * jmax)
        .map(|p| axis_moment(nu, axis, p))
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(jmax, jmax);
    for r in 1..=jmax {
        for s in 1..=jmax {
            if (r + s) % 2 == 0 {
                let sign = if ((r as i64 - s as i64) / 2).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                g[(r - 1, s - 1)] = sign * moments[r + s];
            }
        }
    }
    let eig = g.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GramReport {
        matrix: g,
        min_eigenvalue,
    })
}
