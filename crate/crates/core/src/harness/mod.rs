//! Monte Carlo orchestration: concentration runs over a radius schedule,
//! Nazarov–Sodin constant estimates, tree-end statistics and persistence.

mod config;

pub use config::{load_config, parse_config, parse_measure, ExperimentConfig, CONFIG_SCHEMA, DEFAULT_EPS};

use crate::ensembles::{sample, sample_seed, EnsembleSpec, Variant};
use crate::nodal::{count_by_tree_end, count_components, decompose, nodal_length, Region, TreeEnd};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Largest tolerated fraction of failed samples per radius.
pub const MAX_FAILURE_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub r: f64,
    pub sample_index: u64,
    pub sample_seed: u64,
    pub count: usize,
    /// `count / normalizer(R)`.
    pub normalized: f64,
    pub nodal_length: f64,
    pub tree_ends: BTreeMap<TreeEnd, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub r: f64,
    pub sample_index: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSummary {
    pub r: f64,
    pub normalizer: f64,
    pub samples: usize,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    /// Unbiased sample variance; `None` with fewer than two samples.
    pub variance: Option<f64>,
    pub mean_std_error: Option<f64>,
    /// `(ε, P̂(|X − median| > ε))`.
    pub exceedance: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    /// Ordered by radius, then sample index.
    pub rows: Vec<SampleRow>,
    /// Seconds per row, same order; kept apart so rows stay reproducible.
    pub wall_times: Vec<f64>,
    pub failures: Vec<SampleFailure>,
    pub summaries: Vec<RadiusSummary>,
}

/// `πR²` on the plane and torus, `4πn²sin²(R/2n)` for degree-`n` harmonics.
pub fn normalizer(spec: &EnsembleSpec, r: f64) -> f64 {
    match spec.variant {
        Variant::Rsh { n } => {
            let n = n as f64;
            4.0 * PI * n * n * (r / (2.0 * n)).sin().powi(2)
        }
        _ => PI * r * r,
    }
}

/// Median from the exact order statistics (mean of the middle pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn summarize(r: f64, norm: f64, values: &[f64], failures: usize, eps_list: &[f64]) -> RadiusSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let med = median(values);
    let variance = (n >= 2).then(|| values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64);
    let exceedance = eps_list
        .iter()
        .map(|&e| {
            (
                e,
                values.iter().filter(|v| (*v - med).abs() > e).count() as f64 / n as f64,
            )
        })
        .collect();
    RadiusSummary {
        r,
        normalizer: norm,
        samples: n,
        failures,
        mean,
        median: med,
        variance,
        mean_std_error: variance.map(|v| (v / n as f64).sqrt()),
        exceedance,
    }
}

fn sample_row(spec: &EnsembleSpec, index: u64, norm: f64) -> Result<SampleRow> {
    let grid = sample(spec, index)?;
    let dec = decompose(&grid)?;
    let r = spec.window_radius;
    let count = count_components(&dec, r);
    Ok(SampleRow {
        r,
        sample_index: index,
        sample_seed: sample_seed(spec.master_seed, index),
        count,
        normalized: count as f64 / norm,
        nodal_length: nodal_length(&dec, &Region::disc(r)),
        tree_ends: count_by_tree_end(&dec, r),
    })
}

/// Samples, decomposes and counts at every radius of the schedule, then writes
/// the rows and summary when an output path is configured.
///
/// Rows depend only on the configuration and master seed: every sample draws
/// from its own seeded stream and results are gathered in index order.
pub fn run_concentration(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot build worker pool: {e}")))?;
    let mut record = ExperimentRecord {
        config: config.clone(),
        rows: Vec::new(),
        wall_times: Vec::new(),
        failures: Vec::new(),
        summaries: Vec::new(),
    };
    for &r in &config.r_list {
        let spec = config.spec_for(r)?;
        let norm = normalizer(&spec, r);
        let results: Vec<(u64, Result<SampleRow>, f64)> = pool.install(|| {
            (0..config.sample_count as u64)
                .into_par_iter()
                .map(|i| {
                    let t = Instant::now();
                    let row = sample_row(&spec, i, norm);
                    (i, row, t.elapsed().as_secs_f64())
                })
                .collect()
        });
        let mut values = Vec::with_capacity(results.len());
        let mut failed = 0;
        for (i, res, secs) in results {
            match res {
                Ok(row) => {
                    values.push(row.normalized);
                    record.rows.push(row);
                    record.wall_times.push(secs);
                }
                Err(e) => {
                    failed += 1;
                    record.failures.push(SampleFailure {
                        r,
                        sample_index: i,
                        message: e.to_string(),
                    });
                }
            }
        }
        if failed as f64 > MAX_FAILURE_FRACTION * config.sample_count as f64 || values.is_empty() {
            return Err(Error::Aborted(format!(
                "{failed} of {} samples failed at R = {r}",
                config.sample_count
            )));
        }
        record
            .summaries
            .push(summarize(r, norm, &values, failed, &config.eps_list));
    }
    if let Some(path) = &config.output {
        persist(&record, path)?;
    }
    Ok(record)
}

/// Rows to `path`, summary to `path.summary`, wall times to `path.timing`.
pub fn persist(record: &ExperimentRecord, path: &Path) -> Result<()> {
    std::fs::write(path, export(record, ExportFormat::Rows))?;
    let with = |ext: &str| {
        let mut p = path.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    std::fs::write(with(".summary"), export(record, ExportFormat::Summary))?;
    std::fs::write(with(".timing"), export(record, ExportFormat::Timing))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Per-sample CSV.
    Rows,
    /// Configuration echo, per-radius summaries and failures.
    Summary,
    /// Per-sample wall time in seconds.
    Timing,
}

pub const ROWS_HEADER: &str = "R,sample_index,sample_seed,count,normalized,nodal_length,tree_ends";

fn histogram_text(h: &BTreeMap<TreeEnd, usize>) -> String {
    h.iter()
        .map(|(t, c)| format!("{}:{c}", t.canonical))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn export(record: &ExperimentRecord, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::Rows => {
            out.push_str(ROWS_HEADER);
            out.push('\n');
            for r in &record.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.r,
                    r.sample_index,
                    r.sample_seed,
                    r.count,
                    r.normalized,
                    r.nodal_length,
                    histogram_text(&r.tree_ends)
                );
            }
        }
        ExportFormat::Summary => {
            for line in record.config.to_text().lines() {
                let _ = writeln!(out, "# {line}");
            }
            for s in &record.summaries {
                let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
                let _ = write!(
                    out,
                    "summary R={} normalizer={} samples={} failures={} mean={} median={} variance={} mean_std_error={}",
                    s.r,
                    s.normalizer,
                    s.samples,
                    s.failures,
                    s.mean,
                    s.median,
                    opt(s.variance),
                    opt(s.mean_std_error)
                );
                for (e, p) in &s.exceedance {
                    let _ = write!(out, " exceed[{e}]={p}");
                }
                out.push('\n');
            }
            for f in &record.failures {
                let _ = writeln!(
                    out,
                    "failure R={} sample_index={} message=\"{}\"",
                    f.r, f.sample_index, f.message
                );
            }
        }
        ExportFormat::Timing => {
            out.push_str("R,sample_index,seconds\n");
            for (r, t) in record.rows.iter().zip(&record.wall_times) {
                let _ = writeln!(out, "{},{},{t}", r.r, r.sample_index);
            }
        }
    }
    out
}

/// Inverse of the row export.
pub fn parse_rows(text: &str) -> Result<Vec<SampleRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(ROWS_HEADER) {
        return Err(Error::Parse("missing row header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", k + 1));
            let f: Vec<&str> = line.splitn(7, ',').collect();
            if f.len() != 7 {
                return Err(bad("field count"));
            }
            let mut tree_ends = BTreeMap::new();
            for part in f[6].split(';').filter(|p| !p.is_empty()) {
                let (canon, c) = part.rsplit_once(':').ok_or_else(|| bad("tree end"))?;
                tree_ends.insert(
                    TreeEnd::from_canonical(canon.to_string()),
                    c.parse().map_err(|_| bad("tree count"))?,
                );
            }
            Ok(SampleRow {
                r: f[0].parse().map_err(|_| bad("R"))?,
                sample_index: f[1].parse().map_err(|_| bad("index"))?,
                sample_seed: f[2].parse().map_err(|_| bad("seed"))?,
                count: f[3].parse().map_err(|_| bad("count"))?,
                normalized: f[4].parse().map_err(|_| bad("normalized"))?,
                nodal_length: f[5].parse().map_err(|_| bad("length"))?,
                tree_ends,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnsEstimate {
    pub r: f64,
    pub samples: usize,
    pub mean: f64,
    pub mean_std_error: Option<f64>,
    pub median: f64,
    /// Normal-approximation standard error of the median, `√(π/2)·σ/√n`.
    pub median_std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnsTable {
    pub estimates: Vec<CnsEstimate>,
    /// `|m(R_{k+1}) − m(R_k)| / m(R_k)` for consecutive means.
    pub stabilization: Vec<f64>,
}

/// Mean and median of the normalized count along an increasing radius
/// schedule, with the default truncation at each radius.
pub fn estimate_cns(spec: &EnsembleSpec, schedule: &[f64], samples: usize, workers: usize) -> Result<CnsTable> {
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("the radius schedule must increase".into()));
    }
    let mut cfg = ExperimentConfig::new(spec.clone(), samples, schedule.to_vec())?;
    cfg.workers = workers;
    let rec = run_concentration(&cfg)?;
    Ok(cns_table(&rec))
}

pub fn cns_table(rec: &ExperimentRecord) -> CnsTable {
    let estimates: Vec<CnsEstimate> = rec
        .summaries
        .iter()
        .map(|s| CnsEstimate {
            r: s.r,
            samples: s.samples,
            mean: s.mean,
            mean_std_error: s.mean_std_error,
            median: s.median,
            median_std_error: s.mean_std_error.map(|e| e * (PI / 2.0).sqrt()),
        })
        .collect();
    let stabilization = estimates
        .windows(2)
        .map(|w| (w[1].mean - w[0].mean).abs() / w[0].mean)
        .collect();
    CnsTable {
        estimates,
        stabilization,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEndDistribution {
    pub r: f64,
    pub samples: usize,
    pub total_components: usize,
    /// Normalized histogram, most frequent first (ties by tree order).
    pub histogram: Vec<(TreeEnd, f64)>,
    /// Mean `N_R(·, T)/normalizer` for the ten most frequent tree ends.
    pub top_densities: Vec<(TreeEnd, f64)>,
}

pub fn tree_end_distribution(
    spec: &EnsembleSpec,
    r: f64,
    samples: usize,
    workers: usize,
) -> Result<TreeEndDistribution> {
    let mut cfg = ExperimentConfig::new(spec.clone(), samples, vec![r])?;
    cfg.workers = workers;
    Ok(tree_end_histogram(&run_concentration(&cfg)?, r))
}

/// Tree-end statistics of the rows of one radius.
pub fn tree_end_histogram(rec: &ExperimentRecord, r: f64) -> TreeEndDistribution {
    let rows: Vec<&SampleRow> = rec.rows.iter().filter(|row| row.r == r).collect();
    let mut totals: BTreeMap<TreeEnd, usize> = BTreeMap::new();
    for row in &rows {
        for (t, c) in &row.tree_ends {
            *totals.entry(t.clone()).or_insert(0) += c;
        }
    }
    let total: usize = totals.values().sum();
    let mut histogram: Vec<(TreeEnd, f64)> = totals
        .iter()
        .map(|(t, &c)| (t.clone(), if total > 0 { c as f64 / total as f64 } else { 0.0 }))
        .collect();
    histogram.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let norm = normalizer(&rec.config.spec_for(r).unwrap_or_else(|_| rec.config.spec.clone()), r);
    let top_densities = histogram
        .iter()
        .take(10)
        .map(|(t, _)| (t.clone(), totals[t] as f64 / (rows.len() as f64 * norm)))
        .collect();
    TreeEndDistribution {
        r,
        samples: rows.len(),
        total_components: total,
        histogram,
        top_densities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{reference_grid, ReferenceKind};
    use proptest::prelude::*;

    fn small(samples: usize, workers: usize) -> ExperimentConfig {
        let spec = EnsembleSpec::rpw(8.0, 0.25, 0.5, 17).unwrap();
        let mut cfg = ExperimentConfig::new(spec, samples, vec![6.0, 8.0]).unwrap();
        cfg.workers = workers;
        cfg
    }

    #[test]
    fn rows_do_not_depend_on_workers() {
        let a = run_concentration(&small(12, 1)).unwrap();
        let b = run_concentration(&small(12, 3)).unwrap();
        assert_eq!(export(&a, ExportFormat::Rows), export(&b, ExportFormat::Rows));
        assert_eq!(a.rows.len(), 24);
        assert!(a
            .rows
            .windows(2)
            .all(|w| (w[0].r, w[0].sample_index) < (w[1].r, w[1].sample_index)));
        let s = &a.summaries[1];
        assert!(s.median >= 0.0 && s.median < 1.0 && s.mean > 0.0);
        assert!(s.exceedance.iter().all(|e| (0.0..=1.0).contains(&e.1)));
    }

    #[test]
    fn single_sample_has_no_variance() {
        let rec = run_concentration(&small(1, 1)).unwrap();
        assert_eq!(rec.summaries[0].variance, None);
        assert!(export(&rec, ExportFormat::Summary).contains("variance=NA"));
    }

    #[test]
    fn rows_round_trip() {
        let rec = run_concentration(&small(4, 1)).unwrap();
        assert_eq!(parse_rows(&export(&rec, ExportFormat::Rows)).unwrap(), rec.rows);
        assert!(parse_rows("R,x\n").is_err());
    }

    #[test]
    fn persist_writes_three_files() {
        let dir = std::env::temp_dir().join(format!("nodallab-harness-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut cfg = small(2, 1);
        cfg.output = Some(dir.join("rows.csv"));
        run_concentration(&cfg).unwrap();
        for f in ["rows.csv", "rows.csv.summary", "rows.csv.timing"] {
            assert!(dir.join(f).exists());
        }
        let summary = std::fs::read_to_string(dir.join("rows.csv.summary")).unwrap();
        let echoed: String = summary
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(parse_config(&echoed).unwrap(), cfg);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn radial_j0_smoke_value() {
        let dec = decompose(&reference_grid(&ReferenceKind::RadialJ0, 10.0, 1.0, 0.1).unwrap()).unwrap();
        let x = count_components(&dec, 10.0) as f64 / (PI * 100.0);
        assert!((x - 3.0 / (100.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn sphere_normalizer() {
        let spec = EnsembleSpec::new(Variant::Rsh { n: 50 }, 10.0, 0.2, 0.0, 0).unwrap();
        let v = normalizer(&spec, 10.0);
        assert!((v - 4.0 * PI * 2500.0 * (0.1f64).sin().powi(2)).abs() < 1e-9);
        assert!((v / (PI * 100.0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn cns_and_tree_ends() {
        let spec = EnsembleSpec::rpw(8.0, 0.25, 0.5, 3).unwrap();
        let table = estimate_cns(&spec, &[6.0, 8.0], 6, 1).unwrap();
        assert_eq!(table.estimates.len(), 2);
        assert_eq!(table.stabilization.len(), 1);
        assert!(estimate_cns(&spec, &[8.0, 6.0], 6, 1).is_err());
        let dist = tree_end_distribution(&spec, 8.0, 6, 1).unwrap();
        let s: f64 = dist.histogram.iter().map(|h| h.1).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(dist.histogram[0].0, TreeEnd::path(1));
    }

    #[test]
    fn abort_on_failures() {
        let e = Error::Aborted("x".into());
        assert!(e.to_string().contains("aborted"));
        // A degenerate spacing would fail every sample; the spec rejects it before sampling.
        let spec = EnsembleSpec::rpw(8.0, 0.25, 0.5, 3).unwrap();
        let mut cfg = ExperimentConfig::new(spec, 2, vec![8.0]).unwrap();
        cfg.workers = 0;
        assert!(run_concentration(&cfg).is_err());
    }

    proptest! {
        #[test]
        fn exceedance_is_monotone(values in proptest::collection::vec(0.0f64..0.02, 1..60)) {
            let s = summarize(1.0, 1.0, &values, 0, &[0.001, 0.002, 0.005, 0.01]);
            for w in s.exceedance.windows(2) {
                prop_assert!(w[0].1 >= w[1].1);
            }
            let m = median(&values);
            let below = values.iter().filter(|v| **v < m).count();
            let above = values.iter().filter(|v| **v > m).count();
            prop_assert!(below <= values.len() / 2 && above <= values.len() / 2);
        }
    }
}
