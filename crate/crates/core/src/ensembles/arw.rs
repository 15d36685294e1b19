use super::AnalyticField;
use crate::measures::lattice_points;
use crate::{Error, Result};

/// `F(z) = √(2/|Λ_n|)·Σ_{λ∈Λ_n⁺} [ξ_λ cos(k_λ·z) + η_λ sin(k_λ·z)]` with `k_λ = λ/√n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArwField {
    n: u64,
    freqs: Vec<[f64; 2]>,
    xi: Vec<f64>,
    eta: Vec<f64>,
    scale: f64,
}

impl ArwField {
    pub fn new(n: u64, xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let set = lattice_points(n)?;
        if set.points.is_empty() {
            return Err(Error::InvalidSpec(format!("{n} is not a sum of two squares")));
        }
        if xi.len() != set.half_set.len() || eta.len() != set.half_set.len() {
            return Err(Error::InvalidSpec(format!(
                "need {} coefficient pairs for n = {n}",
                set.half_set.len()
            )));
        }
        let root = (n as f64).sqrt();
        let freqs = set
            .half_set
            .iter()
            .map(|&(a, b)| [a as f64 / root, b as f64 / root])
            .collect();
        let scale = (2.0 / set.points.len() as f64).sqrt();
        Ok(ArwField {
            n,
            freqs,
            xi,
            eta,
            scale,
        })
    }

    pub fn lattice_norm(&self) -> u64 {
        self.n
    }

    /// Unit frequency vectors `λ/√n` of the half set, in the coefficient order.
    pub fn frequencies(&self) -> &[[f64; 2]] {
        &self.freqs
    }
}

impl AnalyticField for ArwField {
    fn value(&self, p: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for ((k, x), y) in self.freqs.iter().zip(&self.xi).zip(&self.eta) {
            let (sn, cs) = (k[0] * p[0] + k[1] * p[1]).sin_cos();
            s += x * cs + y * sn;
        }
        self.scale * s
    }

    fn directional_derivatives(&self, p: [f64; 2], dir: [f64; 2], order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; order + 1];
        for ((k, x), y) in self.freqs.iter().zip(&self.xi).zip(&self.eta) {
            let phase = k[0] * p[0] + k[1] * p[1];
            let rate = k[0] * dir[0] + k[1] * dir[1];
            let mut factor = 1.0;
            for (j, slot) in out.iter_mut().enumerate() {
                // j-th derivative of cos/sin shifts the phase by jπ/2.
                let shifted = phase + j as f64 * std::f64::consts::FRAC_PI_2;
                *slot += factor * (x * shifted.cos() + y * shifted.sin());
                factor *= rate;
            }
        }
        Ok(out.into_iter().map(|v| v * self.scale).collect())
    }

    fn describe(&self) -> String {
        format!("arithmetic wave n = {}", self.n)
    }
}
