//! Merge-scaling benchmark harness.
//!
//! For every `(ratio, m)` cell the harness builds a fresh random map of
//! `n = round(m / ratio)` entries, builds its tree, splits all n entries,
//! samples m of them, and times `merge_tree` over those m entries alone —
//! map generation, tree build and split stay outside the timed section.
//! Every merge is checked against the source root, so a benchmark run is
//! also a correctness sweep; any mismatch aborts the run.
//!
//! Cells run strictly sequentially and the timed section is single-threaded,
//! keeping measurements free of cross-cell interference. Each trial derives
//! its own sub-seed from `(seed, ratio, m, trial)`, so reruns with one seed
//! reproduce every non-timing field bit for bit.

use std::io::{self, Write};
use std::time::Instant;

use provmap::hash::sha256_concat;
use provmap::{build_tree, merge_tree, split_tree, ComposeError, Digest, Entry, Key, Value, VerifiableMap};
use rand::rngs::StdRng;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use thiserror::Error;

/// Benchmark parameters: subset ratios `m/n`, subset sizes, trials per cell,
/// and the master seed.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub ratios: Vec<f64>,
    pub sizes: Vec<usize>,
    pub trials: u32,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ratios: vec![1.0, 0.1, 0.01],
            sizes: vec![1024, 4096, 16384, 65536],
            trials: 10,
            seed: 42,
        }
    }
}

/// One timed trial. `seconds` is the merge time; build and split times are
/// kept for the optional phase report.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub ratio: f64,
    pub m: usize,
    pub n: usize,
    pub trial: u32,
    pub seconds: f64,
    pub build_seconds: f64,
    pub split_seconds: f64,
    /// Root of the trial's source tree; identical across reruns of one seed.
    pub root: Digest,
}

/// Per-cell aggregate over exactly `trials` measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSummary {
    pub ratio: f64,
    pub m: usize,
    pub n: usize,
    pub geomean_seconds: f64,
    pub mean_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench configuration: {0}")]
    Config(String),
    #[error("merge failed at ratio {ratio}, m = {m}, trial {trial}: {source}")]
    Merge {
        ratio: f64,
        m: usize,
        trial: u32,
        source: ComposeError,
    },
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.ratios.is_empty() {
            return Err(BenchError::Config("no ratios given".into()));
        }
        if self.sizes.is_empty() {
            return Err(BenchError::Config("no sizes given".into()));
        }
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be positive".into()));
        }
        for &ratio in &self.ratios {
            if !(ratio > 0.0 && ratio <= 1.0) {
                return Err(BenchError::Config(format!("ratio {ratio} outside (0, 1]")));
            }
        }
        for &m in &self.sizes {
            if m == 0 {
                return Err(BenchError::Config("sizes must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Sub-seed for one trial, derived so that every cell and trial draws an
/// independent, reproducible stream. The warm-up pass uses `trial = u32::MAX`.
fn subseed(seed: u64, ratio_index: usize, m: usize, trial: u32) -> u64 {
    let digest = sha256_concat(&[
        &seed.to_be_bytes(),
        &(ratio_index as u64).to_be_bytes(),
        &(m as u64).to_be_bytes(),
        &trial.to_be_bytes(),
    ]);
    u64::from_be_bytes(digest.as_bytes()[..8].try_into().unwrap())
}

fn random_map(rng: &mut StdRng, n: usize) -> VerifiableMap {
    let mut map = VerifiableMap::new();
    while map.len() < n {
        map.insert(
            Key::from_digest(Digest::new(rng.gen())),
            Value::from_digest(Digest::new(rng.gen())),
        );
    }
    map
}

struct Trial {
    root: Digest,
    build_seconds: f64,
    split_seconds: f64,
    merge_seconds: f64,
}

fn run_trial(
    ratio: f64,
    ratio_index: usize,
    m: usize,
    n: usize,
    trial: u32,
    seed: u64,
) -> Result<Trial, BenchError> {
    let mut rng = StdRng::seed_from_u64(subseed(seed, ratio_index, m, trial));
    let map = random_map(&mut rng, n);

    let start = Instant::now();
    let tree = build_tree(&map).expect("nonempty map");
    let build_seconds = start.elapsed().as_secs_f64();
    let root = tree.hash();

    let start = Instant::now();
    let entries = split_tree(&map, &tree).expect("all keys present");
    let split_seconds = start.elapsed().as_secs_f64();

    let subset: Vec<Entry> = index::sample(&mut rng, n, m)
        .into_iter()
        .map(|i| entries[i].clone())
        .collect();

    let start = Instant::now();
    let merged = merge_tree(&subset, Some(&root));
    let merge_seconds = start.elapsed().as_secs_f64();
    // The root check doubles as the per-trial correctness gate.
    merged.map_err(|source| BenchError::Merge {
        ratio,
        m,
        trial,
        source,
    })?;

    Ok(Trial {
        root,
        build_seconds,
        split_seconds,
        merge_seconds: merge_seconds.max(1e-9),
    })
}

/// Runs the full grid. Cells execute in `(ratio, m)` order with one untimed
/// warm-up pass each; rows come out in `(ratio, m, trial)` order,
/// `|ratios| × |sizes| × trials` of them.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let mut report = BenchReport::default();

    for (ratio_index, &ratio) in config.ratios.iter().enumerate() {
        for &m in &config.sizes {
            let n = (m as f64 / ratio).round() as usize;
            if n < m {
                return Err(BenchError::Config(format!(
                    "ratio {ratio} with m = {m} yields n = {n} < m"
                )));
            }

            run_trial(ratio, ratio_index, m, n, u32::MAX, config.seed)?;

            let mut log_sum = 0.0;
            let mut sum = 0.0;
            for trial in 0..config.trials {
                let result = run_trial(ratio, ratio_index, m, n, trial, config.seed)?;
                log_sum += result.merge_seconds.ln();
                sum += result.merge_seconds;
                report.rows.push(BenchRow {
                    ratio,
                    m,
                    n,
                    trial,
                    seconds: result.merge_seconds,
                    build_seconds: result.build_seconds,
                    split_seconds: result.split_seconds,
                    root: result.root,
                });
            }
            report.summaries.push(BenchSummary {
                ratio,
                m,
                n,
                geomean_seconds: (log_sum / config.trials as f64).exp(),
                mean_seconds: sum / config.trials as f64,
            });
        }
    }
    Ok(report)
}

/// Least-squares slope of `log(geomean seconds)` against `log(m)` for each
/// ratio, in first-appearance order. Linear scaling shows up as a slope
/// near 1. Requires at least four distinct sizes per ratio.
pub fn fit_scaling(report: &BenchReport) -> Result<Vec<(f64, f64)>, BenchError> {
    let mut ratios: Vec<f64> = Vec::new();
    for summary in &report.summaries {
        if !ratios.iter().any(|r| r == &summary.ratio) {
            ratios.push(summary.ratio);
        }
    }

    let mut out = Vec::with_capacity(ratios.len());
    for ratio in ratios {
        let points: Vec<(f64, f64)> = report
            .summaries
            .iter()
            .filter(|s| s.ratio == ratio)
            .map(|s| ((s.m as f64).ln(), s.geomean_seconds.ln()))
            .collect();
        let mut distinct: Vec<u64> = points.iter().map(|(x, _)| x.to_bits()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < 4 {
            return Err(BenchError::Config(format!(
                "ratio {ratio} has {} distinct sizes; at least 4 needed for a fit",
                distinct.len()
            )));
        }

        let count = points.len() as f64;
        let mean_x: f64 = points.iter().map(|(x, _)| x).sum::<f64>() / count;
        let mean_y: f64 = points.iter().map(|(_, y)| y).sum::<f64>() / count;
        let numerator: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
        let denominator: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
        out.push((ratio, numerator / denominator));
    }
    Ok(out)
}

/// Writes the report as CSV: `ratio,m,n,trial,seconds` with per-cell summary
/// rows flagged `trial=geomean` and `trial=mean`.
pub fn write_csv<W: Write>(report: &BenchReport, mut out: W) -> io::Result<()> {
    writeln!(out, "ratio,m,n,trial,seconds")?;
    for summary in &report.summaries {
        for row in report
            .rows
            .iter()
            .filter(|r| r.ratio == summary.ratio && r.m == summary.m)
        {
            writeln!(
                out,
                "{},{},{},{},{:.9}",
                row.ratio, row.m, row.n, row.trial, row.seconds
            )?;
        }
        writeln!(
            out,
            "{},{},{},geomean,{:.9}",
            summary.ratio, summary.m, summary.n, summary.geomean_seconds
        )?;
        writeln!(
            out,
            "{},{},{},mean,{:.9}",
            summary.ratio, summary.m, summary.n, summary.mean_seconds
        )?;
    }
    Ok(())
}

/// Per-phase timings (`build`, `split`, `merge`) for every trial, written on
/// request next to the main report.
pub fn write_phase_csv<W: Write>(report: &BenchReport, mut out: W) -> io::Result<()> {
    writeln!(out, "ratio,m,n,trial,phase,seconds")?;
    for row in &report.rows {
        for (phase, seconds) in [
            ("build", row.build_seconds),
            ("split", row.split_seconds),
            ("merge", row.seconds),
        ] {
            writeln!(
                out,
                "{},{},{},{},{},{:.9}",
                row.ratio, row.m, row.n, row.trial, phase, seconds
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_report(times: impl Fn(usize) -> f64) -> BenchReport {
        let sizes = [1024usize, 2048, 4096, 8192, 16384];
        BenchReport {
            rows: Vec::new(),
            summaries: sizes
                .iter()
                .map(|&m| BenchSummary {
                    ratio: 1.0,
                    m,
                    n: m,
                    geomean_seconds: times(m),
                    mean_seconds: times(m),
                })
                .collect(),
        }
    }

    #[test]
    fn fit_recovers_a_linear_exponent() {
        let report = synthetic_report(|m| 3.5e-7 * m as f64);
        let slopes = fit_scaling(&report).unwrap();
        assert_eq!(slopes.len(), 1);
        assert!((slopes[0].1 - 1.0).abs() < 1e-9, "slope {}", slopes[0].1);
    }

    #[test]
    fn fit_recovers_a_quadratic_exponent() {
        let report = synthetic_report(|m| 1e-9 * (m as f64).powi(2));
        let slopes = fit_scaling(&report).unwrap();
        assert!((slopes[0].1 - 2.0).abs() < 1e-9, "slope {}", slopes[0].1);
    }

    #[test]
    fn fit_requires_four_distinct_sizes() {
        let mut report = synthetic_report(|m| m as f64);
        report.summaries.truncate(3);
        assert!(matches!(fit_scaling(&report), Err(BenchError::Config(_))));
    }

    #[test]
    fn degenerate_single_cell_run() {
        let config = BenchConfig {
            ratios: vec![1.0],
            sizes: vec![1],
            trials: 1,
            seed: 7,
        };
        let report = run_bench(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].n, 1);
        assert_eq!(report.summaries.len(), 1);
        assert!(report.rows[0].seconds > 0.0);
    }

    #[test]
    fn row_count_is_the_full_grid() {
        let config = BenchConfig {
            ratios: vec![1.0, 0.5],
            sizes: vec![8, 16, 32],
            trials: 3,
            seed: 9,
        };
        let report = run_bench(&config).unwrap();
        assert_eq!(report.rows.len(), 2 * 3 * 3);
        assert_eq!(report.summaries.len(), 2 * 3);
        // Sparse cells really do build bigger maps.
        assert!(report.rows.iter().any(|r| r.ratio == 0.5 && r.m == 32 && r.n == 64));
    }

    #[test]
    fn reruns_reproduce_all_non_timing_fields() {
        let config = BenchConfig {
            ratios: vec![1.0, 0.25],
            sizes: vec![8, 64],
            trials: 2,
            seed: 1234,
        };
        let a = run_bench(&config).unwrap();
        let b = run_bench(&config).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!((x.ratio, x.m, x.n, x.trial), (y.ratio, y.m, y.n, y.trial));
            assert_eq!(x.root, y.root);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_ratio = BenchConfig {
            ratios: vec![1.5],
            ..BenchConfig::default()
        };
        assert!(matches!(run_bench(&bad_ratio), Err(BenchError::Config(_))));

        let zero_ratio = BenchConfig {
            ratios: vec![0.0],
            ..BenchConfig::default()
        };
        assert!(matches!(run_bench(&zero_ratio), Err(BenchError::Config(_))));

        let no_trials = BenchConfig {
            trials: 0,
            ..BenchConfig::default()
        };
        assert!(matches!(run_bench(&no_trials), Err(BenchError::Config(_))));
    }

    #[test]
    fn csv_has_pinned_columns_and_summary_rows() {
        let config = BenchConfig {
            ratios: vec![1.0],
            sizes: vec![4],
            trials: 2,
            seed: 3,
        };
        let report = run_bench(&config).unwrap();
        let mut buf = Vec::new();
        write_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ratio,m,n,trial,seconds");
        assert_eq!(lines.len(), 1 + 2 + 2);
        assert!(lines.iter().any(|l| l.starts_with("1,4,4,geomean,")));
        assert!(lines.iter().any(|l| l.starts_with("1,4,4,mean,")));
    }
}
