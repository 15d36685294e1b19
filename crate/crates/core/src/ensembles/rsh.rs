use super::AnalyticField;
use crate::specfn::{legendre_diagonal, legendre_f_orders_sine, legendre_recurrence};
use crate::{Error, Result};
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

/// Degree beyond which jets are refused (the reduced Legendre polynomials
/// used for them outgrow double range).
pub const MAX_JET_DEGREE: usize = 500;

/// A degree-`n` spherical harmonic `Σ_m ξ_m g_m` pulled back to the plane by
/// the geodesic polar chart `u ↦ (θ, φ) = (|u|/√(n(n+1)), arg u)`.
///
/// `g_0 = f_n^0(cos θ)`,
/// `g_{±m} = √2·f_n^m(cos θ)·(cos mφ | sin mφ)`; unit variance, covariance `P_n(cos Θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RshField {
    n: usize,
    xi: Vec<f64>,
}

struct ChartPoint {
    cos_theta: f64,
    sin_theta: f64,
    // e^{iφ}
    phase: (f64, f64),
}

fn chart_point(n: usize, u: [f64; 2]) -> ChartPoint {
    let norm = ((n * (n + 1)) as f64).sqrt();
    let rho = u[0].hypot(u[1]);
    let phase = if rho > 0.0 {
        (u[0] / rho, u[1] / rho)
    } else {
        (1.0, 0.0)
    };
    let (sin_theta, cos_theta) = (rho / norm).sin_cos();
    ChartPoint {
        cos_theta,
        sin_theta,
        phase,
    }
}

impl RshField {
    pub fn new(n: usize, xi: Vec<f64>) -> Result<Self> {
        if xi.len() != 2 * n + 1 {
            return Err(Error::InvalidSpec(format!(
                "need {} coefficients for degree {n}, got {}",
                2 * n + 1,
                xi.len()
            )));
        }
        Ok(RshField { n, xi })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Largest chart radius that stays inside the open hemisphere.
    pub fn chart_limit(n: usize) -> f64 {
        FRAC_PI_2 * ((n * (n + 1)) as f64).sqrt()
    }

    /// Geodesic angle between the spherical images of two chart points.
    pub fn geodesic_angle(n: usize, u: [f64; 2], v: [f64; 2]) -> f64 {
        let norm = ((n * (n + 1)) as f64).sqrt();
        let ambient = |p: [f64; 2]| {
            let rho = p[0].hypot(p[1]);
            let t = rho / norm;
            let (c, s) = if rho > 0.0 {
                (p[0] / rho, p[1] / rho)
            } else {
                (1.0, 0.0)
            };
            [t.sin() * c, t.sin() * s, t.cos()]
        };
        let a = ambient(u);
        let b = ambient(v);
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        sin.atan2(cos)
    }

    /// `[g_{−n}, …, g_n]` at a chart point.
    pub fn basis_at(n: usize, u: [f64; 2]) -> Result<Vec<f64>> {
        if u[0].hypot(u[1]) >= Self::chart_limit(n) {
            return Err(Error::ChartOverflow { x: u[0], y: u[1] });
        }
        let cp = chart_point(n, u);
        let mut f = vec![0.0; n + 1];
        legendre_f_orders_sine(n, cp.cos_theta, cp.sin_theta, &mut f);
        let mut g = vec![0.0; 2 * n + 1];
        g[n] = f[0];
        let (mut c, mut s) = (1.0, 0.0);
        for m in 1..=n {
            (c, s) = (c * cp.phase.0 - s * cp.phase.1, c * cp.phase.1 + s * cp.phase.0);
            g[n + m] = SQRT_2 * f[m] * c;
            g[n - m] = SQRT_2 * f[m] * s;
        }
        Ok(g)
    }

    fn combine(&self, f: &[f64], phase: (f64, f64)) -> f64 {
        let n = self.n;
        let mut acc = self.xi[n] * f[0];
        let (mut c, mut s) = (1.0, 0.0);
        let mut tail = 0.0;
        for m in 1..=n {
            (c, s) = (c * phase.0 - s * phase.1, c * phase.1 + s * phase.0);
            tail += f[m] * (self.xi[n + m] * c + self.xi[n - m] * s);
        }
        acc += SQRT_2 * tail;
        acc
    }

    /// Taylor coefficients in `t` of `F(p + t·v)` up to `t^order`.
    fn jet(&self, p: [f64; 2], v: [f64; 2], order: usize) -> Vec<f64> {
        let n = self.n;
        let len = order + 1;
        let nn = (n * (n + 1)) as f64;
        let sn = nn.sqrt();
        let w0 = (p[0] * p[0] + p[1] * p[1]) / nn;
        let mut delta = vec![0.0; len];
        if order >= 1 {
            delta[1] = 2.0 * (p[0] * v[0] + p[1] * v[1]) / nn;
        }
        if order >= 2 {
            delta[2] = (v[0] * v[0] + v[1] * v[1]) / nn;
        }
        // cos√w and sin√w/√w expanded around w0, then composed with w(t) = w0 + δ(t).
        let cc = entire_taylor(w0, order, 0);
        let sc = entire_taylor(w0, order, 1);
        let mut cser = vec![0.0; len];
        let mut sser = vec![0.0; len];
        let mut pw = vec![0.0; len];
        pw[0] = 1.0;
        for k in 0..len {
            if k > 0 {
                pw = mul(&pw, &delta);
            }
            for t in 0..len {
                cser[t] += cc[k] * pw[t];
                sser[t] += sc[k] * pw[t];
            }
        }
        let line_x = |a: f64, b: f64| {
            let mut l = vec![0.0; len];
            l[0] = a / sn;
            if order >= 1 {
                l[1] = b / sn;
            }
            l
        };
        let xs = mul(&sser, &line_x(p[0], v[0]));
        let ys = mul(&sser, &line_x(p[1], v[1]));
        let z = cser;
        let mut re = vec![0.0; len];
        let mut im = vec![0.0; len];
        re[0] = 1.0;
        let mut total = vec![0.0; len];
        let mut diag = 1.0;
        for m in 0..=n {
            if m > 0 {
                let nr = sub(&mul(&re, &xs), &mul(&im, &ys));
                let ni = add(&mul(&re, &ys), &mul(&im, &xs));
                re = nr;
                im = ni;
                diag = legendre_diagonal(m);
            }
            let q = reduced_series(n, m, &z, if m == 0 { 1.0 } else { diag });
            let combo: Vec<f64> = if m == 0 {
                q.iter().map(|x| x * self.xi[n]).collect()
            } else {
                let mix: Vec<f64> = (0..len)
                    .map(|t| SQRT_2 * (self.xi[n + m] * re[t] + self.xi[n - m] * im[t]))
                    .collect();
                mul(&q, &mix)
            };
            for t in 0..len {
                total[t] += combo[t];
            }
        }
        total
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    for i in 0..len {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..len - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `q_n^m(Z(t))` as a series, by the degree recurrence started at `q_m^m = start`.
fn reduced_series(n: usize, m: usize, z: &[f64], start: f64) -> Vec<f64> {
    let len = z.len();
    let mut prev = vec![0.0; len];
    let mut cur = vec![0.0; len];
    cur[0] = start;
    for k in (m + 1)..=n {
        let (a, b) = legendre_recurrence(k, m);
        let zc = mul(z, &cur);
        let next: Vec<f64> = (0..len).map(|t| a * zc[t] - b * prev[t]).collect();
        prev = cur;
        cur = next;
    }
    cur
}

/// Taylor coefficients at `w0` of `Σ_j (−w)^j/(2j + shift)!` (shift 0: `cos√w`, shift 1: `sin√w/√w`).
fn entire_taylor(w0: f64, order: usize, shift: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut fact = 1.0;
        for i in 1..=(2 * k + shift) {
            fact *= i as f64;
        }
        let mut term = if k % 2 == 0 { 1.0 } else { -1.0 } / fact;
        let mut sum = term;
        for j in k..k + 80 {
            let jf = j as f64;
            let d1 = (2 * j + 1 + shift) as f64;
            let d2 = (2 * j + 2 + shift) as f64;
            term *= -w0 * (jf + 1.0) / ((jf + 1.0 - k as f64) * d1 * d2);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        out.push(sum);
    }
    out
}

impl AnalyticField for RshField {
    /// `NaN` outside the chart.
    fn value(&self, p: [f64; 2]) -> f64 {
        if p[0].hypot(p[1]) >= Self::chart_limit(self.n) {
            return f64::NAN;
        }
        let cp = chart_point(self.n, p);
        let mut f = vec![0.0; self.n + 1];
        legendre_f_orders_sine(self.n, cp.cos_theta, cp.sin_theta, &mut f);
        self.combine(&f, cp.phase)
    }

    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        if self.n > MAX_JET_DEGREE {
            return Err(Error::Unsupported(format!("jets limited to degree {MAX_JET_DEGREE}")));
        }
        if p[0].hypot(p[1]) >= Self::chart_limit(self.n) {
            return Err(Error::ChartOverflow { x: p[0], y: p[1] });
        }
        let jet = self.jet(p, dir, order);
        let mut fact = 1.0;
        Ok(jet
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect())
    }

    /// Legendre values are shared between grid points at equal `i² + j²`.
    fn fill_grid(&self, size: usize, h: f64, out: &mut [f64]) -> Result<()> {
        let c = size / 2;
        let limit = Self::chart_limit(self.n);
        let max_key = 2 * c * c;
        if (max_key as f64).sqrt() * h >= limit {
            let mut worst = None;
            'scan: for j in 0..size {
                for i in 0..size {
                    let (x, y) = ((i as f64 - c as f64) * h, (j as f64 - c as f64) * h);
                    if x.hypot(y) >= limit {
                        worst = Some((x, y));
                        break 'scan;
                    }
                }
            }
            if let Some((x, y)) = worst {
                return Err(Error::ChartOverflow { x, y });
            }
        }
        let mut slot = vec![u32::MAX; max_key + 1];
        let mut keys = Vec::new();
        for a in 0..=c {
            for b in 0..=a {
                let k = a * a + b * b;
                if slot[k] == u32::MAX {
                    slot[k] = keys.len() as u32;
                    keys.push(k);
                }
            }
        }
        let n = self.n;
        let nn = ((n * (n + 1)) as f64).sqrt();
        let tables: Vec<Vec<f64>> = keys
            .par_iter()
            .map(|&k| {
                let rho = (k as f64).sqrt() * h;
                let mut f = vec![0.0; n + 1];
                let (sn, cs) = (rho / nn).sin_cos();
                legendre_f_orders_sine(n, cs, sn, &mut f);
                f
            })
            .collect();
        out.par_chunks_mut(size).enumerate().for_each(|(j, row)| {
            let dj = j as i64 - c as i64;
            for (i, v) in row.iter_mut().enumerate() {
                let di = i as i64 - c as i64;
                let key = (di * di + dj * dj) as usize;
                let rho = (key as f64).sqrt();
                let phase = if key > 0 {
                    (di as f64 / rho, dj as f64 / rho)
                } else {
                    (1.0, 0.0)
                };
                *v = self.combine(&tables[slot[key] as usize], phase);
            }
        });
        Ok(())
    }

    fn describe(&self) -> String {
        format!("degree {} spherical harmonic", self.n)
    }
}
