use super::AnalyticField;
use crate::measures::SpectralMeasure;
use crate::specfn::bessel_j_sequence;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

const REALNESS_TOL: f64 = 1e-10;

/// `F(r, α) = Re(e_0)·J_0(r) + 2·Σ_{m≥1} Re(e_m e^{imα})·J_m(r)`.
///
/// Equivalently `F = Σ_{m∈ℤ} e_m J_m(r) e^{imα}` with `e_{−m} = (−1)^m·conj(e_m)`,
/// the form in which Cartesian derivatives act as index shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselSeriesField {
    e: Vec<Complex64>,
}

fn i_pow_neg(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn sqrt_density_coeffs(measure: &SpectralMeasure) -> Result<Vec<Complex64>> {
    match measure {
        SpectralMeasure::Uniform => Ok(vec![Complex64::new(1.0 / TAU.sqrt(), 0.0)]),
        SpectralMeasure::Density(d) => {
            let k = d.max_k() as i64;
            Ok((-k..=k).map(|j| d.coeff(j)).collect())
        }
        SpectralMeasure::Atomic(_) => Err(Error::InvalidSpec("atomic measures have no Bessel series".into())),
    }
}

impl BesselSeriesField {
    /// Nonnegative-index coefficients `e_0, e_1, …`.
    pub fn from_nonnegative(e: Vec<Complex64>) -> Self {
        BesselSeriesField { e }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.e
    }

    pub fn radial_j0() -> Self {
        Self::from_nonnegative(vec![Complex64::new(1.0, 0.0)])
    }

    /// `J_n(r)·cos(nα)`.
    pub fn bessel_mode(n: usize) -> Self {
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        e[n] = Complex64::new(if n == 0 { 1.0 } else { 0.5 }, 0.0);
        Self::from_nonnegative(e)
    }

    /// Series of `Σ_{|n|≤N} ξ_n f_n` where `f_n` is built from the Fourier
    /// coefficients `a_k` of `√ψ`. The coefficient of `J_{|m|}(r)e^{imα}` is
    /// `√(2π)·i^{−|m|}·Σ_n ξ_n a_{m−n}`; the construction is rejected when the
    /// resulting series is not real to within `1e-10`.
    pub fn from_coefficients(measure: &SpectralMeasure, xi0: f64, xi: &[Complex64]) -> Result<Self> {
        let a = sqrt_density_coeffs(measure)?;
        let k = (a.len() / 2) as i64;
        let n = xi.len() as i64;
        let top = n + k;
        let signed = |j: i64| -> Complex64 {
            if j == 0 {
                Complex64::new(xi0, 0.0)
            } else if j > 0 {
                xi[(j - 1) as usize]
            } else {
                let c = xi[(-j - 1) as usize].conj();
                if j % 2 == 0 {
                    c
                } else {
                    -c
                }
            }
        };
        let scale = TAU.sqrt();
        let d = |m: i64| -> Complex64 {
            let mut c = Complex64::new(0.0, 0.0);
            for (idx, &ak) in a.iter().enumerate() {
                let j = m - (idx as i64 - k);
                if j.abs() <= n {
                    c += signed(j) * ak;
                }
            }
            c * scale * i_pow_neg(m.unsigned_abs() as usize)
        };
        let mut e = Vec::with_capacity(top as usize + 1);
        let mut mismatch = 0.0;
        let mut size: f64 = 1.0;
        for m in 0..=top {
            let dm = d(m);
            if m > 0 {
                mismatch += (d(-m) - dm.conj()).norm();
            } else {
                mismatch += dm.im.abs();
            }
            size = size.max(dm.norm());
            e.push(dm);
        }
        if mismatch > REALNESS_TOL * size {
            return Err(Error::InvalidMeasure(format!(
                "Bessel series is not real (imaginary mass {mismatch:e}); the series needs √ψ supported on even frequencies"
            )));
        }
        Ok(BesselSeriesField { e })
    }

    fn signed_full(&self) -> (Vec<Complex64>, usize) {
        let top = self.e.len() - 1;
        let mut f = vec![Complex64::new(0.0, 0.0); 2 * top + 1];
        for (m, &c) in self.e.iter().enumerate() {
            f[top + m] = c;
            if m > 0 {
                f[top - m] = if m % 2 == 0 { c.conj() } else { -c.conj() };
            }
        }
        (f, top)
    }

    fn evaluate(e: &[Complex64], p: [f64; 2], buf: &mut [f64]) -> f64 {
        let r = p[0].hypot(p[1]);
        let eff = bessel_j_sequence(r, &mut buf[..e.len()]);
        let w = if r > 0.0 {
            Complex64::new(p[0] / r, p[1] / r)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut acc = e[0].re * buf[0];
        let mut wm = Complex64::new(1.0, 0.0);
        let mut tail = 0.0;
        for m in 1..eff.min(e.len()) {
            wm *= w;
            let c = e[m];
            tail += (c.re * wm.re - c.im * wm.im) * buf[m];
        }
        acc += 2.0 * tail;
        acc
    }
}

impl AnalyticField for BesselSeriesField {
    fn value(&self, p: [f64; 2]) -> f64 {
        let mut buf = vec![0.0; self.e.len()];
        Self::evaluate(&self.e, p, &mut buf)
    }

    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        let (mut f, mut top) = self.signed_full();
        let mut buf = vec![0.0; self.e.len() + order + 1];
        let mut out = Vec::with_capacity(order + 1);
        out.push(Self::evaluate(&f[top..], p, &mut buf));
        let half = Complex64::new(0.5 * dir[0], 0.0);
        let ihalf = Complex64::new(0.0, 0.5 * dir[1]);
        for _ in 0..order {
            let at = |f: &[Complex64], idx: i64| -> Complex64 {
                if idx < 0 || idx as usize >= f.len() {
                    Complex64::new(0.0, 0.0)
                } else {
                    f[idx as usize]
                }
            };
            let mut g = vec![Complex64::new(0.0, 0.0); f.len() + 2];
            for (slot, out_c) in g.iter_mut().enumerate() {
                // new index slot corresponds to old index slot − 1.
                let old = slot as i64 - 1;
                let up = at(&f, old + 1);
                let down = at(&f, old - 1);
                *out_c = half * (up - down) + ihalf * (up + down);
            }
            f = g;
            top += 1;
            out.push(Self::evaluate(&f[top..], p, &mut buf));
        }
        Ok(out)
    }

    fn fill_grid(&self, size: usize, h: f64, out: &mut [f64]) -> Result<()> {
        let c = (size / 2) as f64;
        let len = self.e.len();
        out.par_chunks_mut(size).enumerate().for_each(|(j, row)| {
            let mut buf = vec![0.0; len];
            let y = (j as f64 - c) * h;
            for (i, v) in row.iter_mut().enumerate() {
                *v = Self::evaluate(&self.e, [(i as f64 - c) * h, y], &mut buf);
            }
        });
        Ok(())
    }

    fn describe(&self) -> String {
        format!("Bessel series with {} terms", self.e.len())
    }
}

/// `E[F(z)²]` for the truncated series, summing the squared contribution of
/// every real Gaussian coordinate.
pub(crate) fn series_variance(measure: &SpectralMeasure, truncation: usize, z: [f64; 2]) -> Result<f64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut xi = vec![zero; truncation];
    let unit0 = BesselSeriesField::from_coefficients(measure, 1.0, &xi)?;
    let len = unit0.e.len() + truncation;
    let mut buf = vec![0.0; len];
    let r = z[0].hypot(z[1]);
    let eff = bessel_j_sequence(r, &mut buf);
    let w = if r > 0.0 {
        Complex64::new(z[0] / r, z[1] / r)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut basis = vec![zero; len];
    let mut wm = Complex64::new(1.0, 0.0);
    for (m, b) in basis.iter_mut().enumerate() {
        let weight = if m == 0 { 1.0 } else { 2.0 };
        *b = if m < eff { wm * buf[m] * weight } else { zero };
        wm *= w;
    }
    let project = |f: &BesselSeriesField| -> f64 {
        f.e.iter()
            .zip(basis.iter())
            .map(|(c, b)| c.re * b.re - c.im * b.im)
            .sum()
    };
    let mut total = project(&unit0).powi(2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..truncation {
        for unit in [Complex64::new(s, 0.0), Complex64::new(0.0, s)] {
            xi[n] = unit;
            let f = BesselSeriesField::from_coefficients(measure, 0.0, &xi)?;
            // Unit real or imaginary coordinate: ξ_n = (X + iY)/√2.
            total += project(&f).powi(2);
            xi[n] = zero;
        }
    }
    Ok(total)
}
