use super::{EnsembleSpec, Variant};
use crate::measures::SpectralMeasure;
use crate::{Error, Result};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Field samples on an origin-centred odd square grid, row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub values: Vec<f64>,
    pub size: usize,
    pub h: f64,
    pub window_radius: f64,
    pub pad: f64,
    pub spec: Option<EnsembleSpec>,
    /// `mrw`, `rsh`, `arw`, or `reference:<kind>`.
    pub source: String,
    pub sample_seed: u64,
    pub sample_index: u64,
}

impl FieldGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        values: Vec<f64>,
        size: usize,
        h: f64,
        window_radius: f64,
        pad: f64,
        spec: Option<EnsembleSpec>,
        source: String,
        sample_seed: u64,
        sample_index: u64,
    ) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::InvalidSpec(format!("grid size must be odd, got {size}")));
        }
        if values.len() != size * size {
            return Err(Error::InvalidSpec(format!(
                "expected {} values, got {}",
                size * size,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("non-finite grid value at index {k}")));
        }
        Ok(FieldGrid {
            values,
            size,
            h,
            window_radius,
            pad,
            spec,
            source,
            sample_seed,
            sample_index,
        })
    }

    pub fn center(&self) -> usize {
        self.size / 2
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.h
    }

    pub fn half_extent(&self) -> f64 {
        self.center() as f64 * self.h
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.size + i]
    }

    pub fn negated(&self) -> FieldGrid {
        let mut g = self.clone();
        for v in g.values.iter_mut() {
            *v = -*v;
        }
        g
    }

    /// Pointwise combination with another grid of the same geometry.
    pub fn add_scaled(&self, other: &FieldGrid, scale: f64) -> Result<FieldGrid> {
        if other.size != self.size || (other.h - self.h).abs() > 1e-15 {
            return Err(Error::InvalidSpec("grids differ in geometry".into()));
        }
        let mut g = self.clone();
        for (v, w) in g.values.iter_mut().zip(&other.values) {
            *v += scale * w;
        }
        Ok(g)
    }

    fn header(&self) -> String {
        let mut tokens = vec![
            "nodallab-grid".to_string(),
            "v1".to_string(),
            format!("source={}", self.source),
            format!("size={}", self.size),
            format!("h={}", self.h),
            format!("R={}", self.window_radius),
            format!("pad={}", self.pad),
            format!("sample_seed={}", self.sample_seed),
            format!("sample_index={}", self.sample_index),
        ];
        if let Some(spec) = &self.spec {
            tokens.push(format!("master_seed={}", spec.master_seed));
            match &spec.variant {
                Variant::Mrw { measure, truncation } => {
                    tokens.push(format!("measure={}", measure.descriptor()));
                    tokens.push(format!("truncation={truncation}"));
                }
                Variant::Rsh { n } => tokens.push(format!("n={n}")),
                Variant::Arw { n } => tokens.push(format!("n={n}")),
            }
        }
        tokens.join(" ")
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in self.values.chunks(self.size) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FieldGrid> {
        Self::from_reader(text.as_bytes())
    }

    fn from_reader<R: BufRead>(reader: R) -> Result<FieldGrid> {
        let mut lines = reader.lines();
        let head = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let mut tokens = head.split_whitespace();
        if tokens.next() != Some("nodallab-grid") || tokens.next() != Some("v1") {
            return Err(Error::Parse("missing 'nodallab-grid v1' header".into()));
        }
        let mut map = HashMap::new();
        for t in tokens {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token '{t}'")))?;
            map.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| map.get(k).ok_or_else(|| Error::Parse(format!("header lacks '{k}'")));
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for '{k}'")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for '{k}'")))
        };
        let size = int("size")? as usize;
        let h = num("h")?;
        let r = num("R")?;
        let pad = num("pad")?;
        let source = get("source")?.clone();
        let variant = match source.as_str() {
            "mrw" => Some(Variant::Mrw {
                measure: SpectralMeasure::from_descriptor(get("measure")?)?,
                truncation: int("truncation")? as usize,
            }),
            "rsh" => Some(Variant::Rsh { n: int("n")? as usize }),
            "arw" => Some(Variant::Arw { n: int("n")? }),
            _ => None,
        };
        let spec = match variant {
            Some(variant) => Some(EnsembleSpec {
                variant,
                window_radius: r,
                grid_spacing: h,
                pad,
                master_seed: int("master_seed")?,
            }),
            None => None,
        };
        let mut values = Vec::with_capacity(size * size);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value '{field}' on data row {}", row + 1)))?;
                values.push(v);
            }
        }
        FieldGrid::new(
            values,
            size,
            h,
            r,
            pad,
            spec,
            source,
            int("sample_seed")?,
            int("sample_index")?,
        )
    }
}

pub fn write_grid(grid: &FieldGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(grid.to_text().as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<FieldGrid> {
    FieldGrid::from_reader(BufReader::new(std::fs::File::open(path)?))
}
