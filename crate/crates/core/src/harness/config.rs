use crate::ensembles::{default_truncation, EnsembleSpec, Variant, DEFAULT_PAD, DEFAULT_SPACING};
use crate::measures::{load_density, SpectralMeasure};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Value of the mandatory `schema` line.
pub const CONFIG_SCHEMA: &str = "nodallab-experiment/1";

pub const DEFAULT_EPS: [f64; 3] = [0.005, 0.01, 0.02];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Ensemble at the largest radius of `r_list`.
    pub spec: EnsembleSpec,
    /// Explicit Bessel-series truncation; `None` uses the default for each radius.
    pub truncation: Option<usize>,
    pub sample_count: usize,
    pub r_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub workers: usize,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(spec: EnsembleSpec, sample_count: usize, r_list: Vec<f64>) -> Result<Self> {
        let cfg = ExperimentConfig {
            spec,
            truncation: None,
            sample_count,
            r_list,
            eps_list: DEFAULT_EPS.to_vec(),
            workers: 1,
            output: None,
        };
        cfg.rebase()
    }

    /// Re-targets `spec` at the largest radius and validates everything.
    pub fn rebase(mut self) -> Result<Self> {
        if self.r_list.is_empty() {
            return Err(Error::InvalidSpec("R_list is empty".into()));
        }
        let top = self.r_list.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.spec = self.spec_for(top)?;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidSpec("sample_count must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidSpec("workers must be at least 1".into()));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidSpec("every ε must be positive".into()));
        }
        for &r in &self.r_list {
            self.spec_for(r)?;
        }
        Ok(())
    }

    /// The ensemble used at window radius `r`.
    pub fn spec_for(&self, r: f64) -> Result<EnsembleSpec> {
        let mut spec = self.spec.clone();
        spec.window_radius = r;
        if let Variant::Mrw { truncation, .. } = &mut spec.variant {
            *truncation = self.truncation.unwrap_or(default_truncation(r));
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = vec![
            format!("schema={CONFIG_SCHEMA}"),
            format!("spec.variant={}", s.variant.name()),
        ];
        match &s.variant {
            Variant::Mrw { measure, .. } => out.push(format!("spec.measure={}", measure.descriptor())),
            Variant::Rsh { n } => out.push(format!("spec.n={n}")),
            Variant::Arw { n } => out.push(format!("spec.n={n}")),
        }
        out.push(format!(
            "spec.truncation={}",
            self.truncation.map_or("auto".to_string(), |t| t.to_string())
        ));
        out.push(format!("spec.h={}", s.grid_spacing));
        out.push(format!("spec.pad={}", s.pad));
        out.push(format!("spec.master_seed={}", s.master_seed));
        out.push(format!("sample_count={}", self.sample_count));
        out.push(format!("R_list={}", join(&self.r_list)));
        out.push(format!("eps_list={}", join(&self.eps_list)));
        out.push(format!("workers={}", self.workers));
        if let Some(p) = &self.output {
            out.push(format!("output={}", p.display()));
        }
        out.join("\n") + "\n"
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

const KEYS: [&str; 13] = [
    "schema",
    "spec.variant",
    "spec.measure",
    "spec.n",
    "spec.truncation",
    "spec.h",
    "spec.pad",
    "spec.master_seed",
    "sample_count",
    "R_list",
    "eps_list",
    "workers",
    "output",
];

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Parses `key=value` lines; blank lines and `#` comments are ignored.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut map: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: k + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line: k + 1,
                message: format!("unknown key '{key}'"),
            });
        }
        if map.insert(key, (k + 1, value.trim())).is_some() {
            return Err(Error::Config {
                line: k + 1,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    let last_line = text.lines().count().max(1);
    let required = |key: &str| -> Result<(usize, &str)> {
        map.get(key).copied().ok_or_else(|| Error::Config {
            line: last_line,
            message: format!("missing required key '{key}'"),
        })
    };
    let (line, schema) = required("schema")?;
    if schema != CONFIG_SCHEMA {
        return Err(Error::Config {
            line,
            message: format!("schema '{schema}' is not {CONFIG_SCHEMA}"),
        });
    }
    fn num<T: std::str::FromStr>(key: &str, (line, v): (usize, &str)) -> Result<T> {
        v.parse().map_err(|_| Error::Config {
            line,
            message: format!("cannot parse '{v}' for {key}"),
        })
    }
    let list = |key: &str, (line, v): (usize, &str)| -> Result<Vec<f64>> {
        v.split(',').map(|x| num::<f64>(key, (line, x.trim()))).collect()
    };
    let (vline, variant_name) = required("spec.variant")?;
    let variant = match variant_name {
        "mrw" => {
            let measure = match map.get("spec.measure") {
                None => SpectralMeasure::Uniform,
                Some(&(line, v)) => parse_measure(v).map_err(|e| Error::Config {
                    line,
                    message: e.to_string(),
                })?,
            };
            Variant::Mrw { measure, truncation: 0 }
        }
        "rsh" => Variant::Rsh {
            n: num("spec.n", required("spec.n")?)?,
        },
        "arw" => Variant::Arw {
            n: num("spec.n", required("spec.n")?)?,
        },
        other => {
            return Err(Error::Config {
                line: vline,
                message: format!("unknown variant '{other}'"),
            })
        }
    };
    let truncation = match map.get("spec.truncation") {
        None | Some((_, "auto")) => None,
        Some(&entry) => Some(num("spec.truncation", entry)?),
    };
    let opt_f64 = |key: &str, default: f64| -> Result<f64> { map.get(key).map_or(Ok(default), |&e| num(key, e)) };
    let r_entry = required("R_list")?;
    let cfg = ExperimentConfig {
        spec: EnsembleSpec {
            variant,
            window_radius: 1.0,
            grid_spacing: opt_f64("spec.h", DEFAULT_SPACING)?,
            pad: opt_f64("spec.pad", DEFAULT_PAD)?,
            master_seed: map
                .get("spec.master_seed")
                .map_or(Ok(0), |&e| num("spec.master_seed", e))?,
        },
        truncation,
        sample_count: num("sample_count", required("sample_count")?)?,
        r_list: list("R_list", r_entry)?,
        eps_list: map
            .get("eps_list")
            .map_or(Ok(DEFAULT_EPS.to_vec()), |&e| list("eps_list", e))?,
        workers: map.get("workers").map_or(Ok(1), |&e| num("workers", e))?,
        output: map.get("output").map(|&(_, v)| PathBuf::from(v)),
    };
    cfg.rebase().map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::Config {
            line: r_entry.0,
            message: other.to_string(),
        },
    })
}

/// `uniform`, `density:<file>`, or a measure descriptor.
pub fn parse_measure(text: &str) -> Result<SpectralMeasure> {
    match text.strip_prefix("density:") {
        Some(path) => load_density(Path::new(path)),
        None => SpectralMeasure::from_descriptor(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample_text() -> String {
        "schema=nodallab-experiment/1\nspec.variant=mrw\nsample_count=5\nR_list=10,20\n".to_string()
    }

    #[test]
    fn round_trip() {
        let mut cfg = parse_config(&sample_text()).unwrap();
        assert_eq!(cfg.spec.window_radius, 20.0);
        cfg.eps_list = vec![0.1 + 0.2, 1e-17, 3.0];
        cfg.workers = 4;
        cfg.output = Some(PathBuf::from("/tmp/out.csv"));
        cfg.spec.pad = 1.0 / 3.0;
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        let a2 = Complex64::new(0.1, -0.05);
        let a0 = (1.0 / std::f64::consts::TAU - 2.0 * a2.norm_sqr()).sqrt();
        let measure = SpectralMeasure::density(&[(0, Complex64::new(a0, 0.0)), (2, a2)]).unwrap();
        cfg.spec.variant = Variant::Mrw {
            measure,
            truncation: 300,
        };
        cfg.truncation = Some(300);
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        let rsh = parse_config("schema=nodallab-experiment/1\nspec.variant=rsh\nspec.n=40\nsample_count=1\nR_list=5\n")
            .unwrap();
        assert_eq!(parse_config(&rsh.to_text()).unwrap(), rsh);
    }

    #[test]
    fn errors_name_keys_and_lines() {
        let text = sample_text() + "colour=blue\n";
        match parse_config(&text) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
        let missing = "schema=nodallab-experiment/1\nsample_count=5\nR_list=10\n";
        assert!(
            matches!(parse_config(missing), Err(Error::Config { message, .. }) if message.contains("spec.variant"))
        );
        let schema = sample_text().replace("/1", "/9");
        assert!(matches!(parse_config(&schema), Err(Error::Config { line: 1, .. })));
        let bad = sample_text().replace("R_list=10,20", "R_list=10,x");
        assert!(matches!(parse_config(&bad), Err(Error::Config { line: 4, .. })));
        let chart = "schema=nodallab-experiment/1\nspec.variant=rsh\nspec.n=2\nsample_count=5\nR_list=100\n";
        assert!(parse_config(chart).is_err());
    }
}
