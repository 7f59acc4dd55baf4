//! Evaluation metrics and the simulation studies.
//!
//! Every replicate draws its data from `RngSpec::new(seed, stream)` with
//! `stream = (cell << 32) | replicate`, so any single cell can be recomputed on its
//! own, and all methods compared within a replicate see identical data.

use crate::error::{Error, Result};
use crate::gain::{CovLogdetGain, CusumGain, GainOracle};
use crate::rng::RngSpec;
use crate::search::{SearchConfig, SearchKind};
use crate::segmentation::{obs, oseedbs, SegmentationConfig, Selection};
use crate::signal::{
    blocks_signal, chain_network_signal, generate_gaussian, generate_multivariate, single_shift_signal, ChainLayout,
    Interval,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::time::Instant;

/// Hausdorff distance between two change point sets.
///
/// Both empty gives 0; exactly one empty gives `sentinel`.
pub fn hausdorff(est: &[usize], truth: &[usize], sentinel: f64) -> f64 {
    match (est.is_empty(), truth.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => sentinel,
        _ => directed(est, truth).max(directed(truth, est)) as f64,
    }
}

fn directed(from: &[usize], to: &[usize]) -> usize {
    let mut sorted = to.to_vec();
    sorted.sort_unstable();
    from.iter()
        .map(|&x| {
            let i = sorted.partition_point(|&y| y < x);
            let right = sorted.get(i).map(|&y| y - x);
            let left = i.checked_sub(1).map(|j| x - sorted[j]);
            right.into_iter().chain(left).min().expect("target set is non-empty")
        })
        .max()
        .unwrap_or(0)
}

pub fn stream_id(cell: usize, replicate: usize) -> u64 {
    ((cell as u64) << 32) | replicate as u64
}

/// One method in one replicate of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub method: String,
    pub sigma: f64,
    pub n_or_m: usize,
    pub replicate: usize,
    pub stream: u64,
    pub error: f64,
    pub evals: usize,
    /// Estimated split for single change point studies.
    pub split: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub sigma: f64,
    pub n_or_m: usize,
    pub mean_err: f64,
    pub sd_err: f64,
    pub mean_evals: f64,
    pub sd_evals: f64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub study: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub wall_time_secs: f64,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

pub const CSV_HEADER: &str = "method,sigma,n_or_m,mean_err,sd_err,mean_evals,sd_evals,replicates,seed";

/// Sample mean and standard deviation (divisor `n - 1`; 0 for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ExperimentReport {
    fn from_records(study: &str, seed: u64, records: Vec<ReplicateRecord>, started: Instant) -> Self {
        let mut keys: Vec<(String, u64, usize)> = Vec::new();
        for r in &records {
            let key = (r.method.clone(), r.sigma.to_bits(), r.n_or_m);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(method, sigma_bits, n_or_m)| {
                let cell: Vec<&ReplicateRecord> = records
                    .iter()
                    .filter(|r| r.method == method && r.sigma.to_bits() == sigma_bits && r.n_or_m == n_or_m)
                    .collect();
                let errors: Vec<f64> = cell.iter().map(|r| r.error).collect();
                let evals: Vec<f64> = cell.iter().map(|r| r.evals as f64).collect();
                let (mean_err, sd_err) = mean_sd(&errors);
                let (mean_evals, sd_evals) = mean_sd(&evals);
                ReportRow {
                    method,
                    sigma: f64::from_bits(sigma_bits),
                    n_or_m,
                    mean_err,
                    sd_err,
                    mean_evals,
                    sd_evals,
                    replicates: cell.len(),
                    seed,
                }
            })
            .collect();
        Self {
            study: study.to_owned(),
            seed,
            rows,
            wall_time_secs: started.elapsed().as_secs_f64(),
            records,
        }
    }

    pub fn row(&self, method: &str, sigma: f64, n_or_m: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.sigma == sigma && r.n_or_m == n_or_m)
    }

    pub fn records_for<'a>(&'a self, method: &'a str, n_or_m: usize) -> impl Iterator<Item = &'a ReplicateRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.method == method && r.n_or_m == n_or_m)
    }

    /// One line per row; floats are written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{:?},{},{:?},{:?},{:?},{:?},{},{}",
                r.method, r.sigma, r.n_or_m, r.mean_err, r.sd_err, r.mean_evals, r.sd_evals, r.replicates, r.seed
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_replicates(replicates: usize, minimum: usize) -> Result<()> {
    if replicates < minimum {
        return Err(Error::config(format!(
            "need at least {minimum} replicates; got {replicates}"
        )));
    }
    Ok(())
}

/// Single mean shift at 100 followed by `n` observations; the localisation error is
/// `|s - 100|` on the whole range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleShiftStudy {
    pub n_values: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub methods: Vec<SearchKind>,
    pub replicates: usize,
    pub seed: u64,
    pub search_cfg: SearchConfig,
}

impl Default for SingleShiftStudy {
    fn default() -> Self {
        Self {
            n_values: vec![100, 200, 500, 1000, 2000, 5000],
            sigmas: vec![0.5, 1.0, 1.5],
            methods: vec![
                SearchKind::Naive,
                SearchKind::Advanced,
                SearchKind::Combined,
                SearchKind::FullGrid,
            ],
            replicates: 2000,
            seed: 1,
            search_cfg: SearchConfig::default(),
        }
    }
}

pub fn run_single_shift_study(study: &SingleShiftStudy) -> Result<ExperimentReport> {
    check_replicates(study.replicates, 100)?;
    study.search_cfg.validate()?;
    let started = Instant::now();
    let cells: Vec<(usize, f64, usize)> = study
        .sigmas
        .iter()
        .flat_map(|&sigma| study.n_values.iter().map(move |&n| (sigma, n)))
        .enumerate()
        .map(|(cell, (sigma, n))| (cell, sigma, n))
        .collect();
    let jobs: Vec<(usize, f64, usize, usize)> = cells
        .iter()
        .flat_map(|&(cell, sigma, n)| (0..study.replicates).map(move |rep| (cell, sigma, n, rep)))
        .collect();
    let nested: Vec<Vec<ReplicateRecord>> = jobs
        .par_iter()
        .map(|&(cell, sigma, n, rep)| -> Result<Vec<ReplicateRecord>> {
            let stream = stream_id(cell, rep);
            let signal = single_shift_signal(n, sigma)?;
            let data = generate_gaussian(&signal, RngSpec::new(study.seed, stream));
            let gain = CusumGain::new(&data)?;
            let ctx = Interval::new(0, data.len(), data.len())?;
            study
                .methods
                .iter()
                .map(|&kind| {
                    let mut oracle = GainOracle::new(&gain);
                    let out = kind.run(&mut oracle, ctx, &study.search_cfg)?;
                    Ok(ReplicateRecord {
                        method: kind.name().to_owned(),
                        sigma,
                        n_or_m: n,
                        replicate: rep,
                        stream,
                        error: out.split.abs_diff(100) as f64,
                        evals: out.evals,
                        split: Some(out.split),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<ReplicateRecord> = nested.into_iter().flatten().collect();
    // rows ordered method-major, as in the printed tables
    records.sort_by_key(|r| {
        let m = study
            .methods
            .iter()
            .position(|k| k.name() == r.method)
            .unwrap_or(usize::MAX);
        (m, r.stream)
    });
    Ok(ExperimentReport::from_records("table1", study.seed, records, started))
}

/// Seeded binary segmentation on noisy blocks across minimal lengths `m`, comparing
/// the full grid with optimistic searches on identical data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlocksStudy {
    pub m_values: Vec<usize>,
    pub decay: f64,
    pub selection: Selection,
    pub methods: Vec<SearchKind>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BlocksStudy {
    fn default() -> Self {
        Self {
            m_values: vec![2, 4, 8, 16, 32, 64, 128],
            decay: std::f64::consts::FRAC_1_SQRT_2,
            selection: Selection::Greedy {
                max_points: Some(11),
                threshold: None,
            },
            methods: vec![SearchKind::FullGrid, SearchKind::Combined, SearchKind::Naive],
            replicates: 100,
            seed: 1,
        }
    }
}

/// `seedbs` for the full grid, `oseedbs-<search>` otherwise.
pub fn seeded_method_label(kind: SearchKind) -> String {
    match kind {
        SearchKind::FullGrid => "seedbs".to_owned(),
        other => format!("oseedbs-{other}"),
    }
}

pub fn run_blocks_study(study: &BlocksStudy) -> Result<ExperimentReport> {
    check_replicates(study.replicates, 50)?;
    study.selection.validate()?;
    let started = Instant::now();
    let signal = blocks_signal();
    let truth = signal.change_points().to_vec();
    let len = signal.len();
    let nested: Vec<Vec<ReplicateRecord>> = (0..study.replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ReplicateRecord>> {
            let stream = stream_id(0, rep);
            let data = generate_gaussian(&signal, RngSpec::new(study.seed, stream));
            let gain = CusumGain::new(&data)?;
            let mut out = Vec::new();
            for &kind in &study.methods {
                for &m in &study.m_values {
                    let cfg = SegmentationConfig::new(0.0, m, kind);
                    let seg = oseedbs(&gain, study.decay, &cfg, &study.selection)?;
                    out.push(ReplicateRecord {
                        method: seeded_method_label(kind),
                        sigma: signal.sigma(),
                        n_or_m: m,
                        replicate: rep,
                        stream,
                        error: hausdorff(&seg.change_points, &truth, len as f64),
                        evals: seg.total_evals,
                        split: None,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<ReplicateRecord> = nested.into_iter().flatten().collect();
    records.sort_by_key(|r| {
        let m = study
            .methods
            .iter()
            .position(|&k| seeded_method_label(k) == r.method)
            .unwrap_or(usize::MAX);
        (m, r.n_or_m, r.replicate)
    });
    Ok(ExperimentReport::from_records("blocks", study.seed, records, started))
}

/// Covariance change in a chain network: the log-determinant gain searched with the
/// boundary-aware advanced search and the full grid, optionally followed by a
/// multiple change point comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceStudy {
    pub len: usize,
    pub dim: usize,
    pub replicates: usize,
    pub seed: u64,
    pub ridge: f64,
    /// Defaults to `ceil(0.01 T)`.
    pub min_seg: Option<usize>,
    pub methods: Vec<SearchKind>,
    /// Also run binary and seeded segmentation on the uneven six-segment layout.
    pub multi: bool,
    /// Minimal interval length for the multiple change point runs.
    pub multi_min_len: usize,
}

impl Default for CovarianceStudy {
    fn default() -> Self {
        Self {
            len: 2000,
            dim: 20,
            replicates: 50,
            seed: 1,
            ridge: 0.007,
            min_seg: None,
            methods: vec![SearchKind::AdvancedV2, SearchKind::FullGrid],
            multi: false,
            multi_min_len: 60,
        }
    }
}

pub fn run_covariance_study(study: &CovarianceStudy) -> Result<ExperimentReport> {
    check_replicates(study.replicates, 1)?;
    if study.dim > 32 {
        return Err(Error::config(format!(
            "dimension {} exceeds the supported 32",
            study.dim
        )));
    }
    let started = Instant::now();
    let single = chain_network_signal(ChainLayout::Single, study.len, study.dim)?;
    let tau = single.change_points()[0];
    let multi = chain_network_signal(ChainLayout::Uneven, study.len, study.dim)?;
    let truth = multi.change_points().to_vec();
    let search_cfg = SearchConfig::default();
    let nested: Vec<Vec<ReplicateRecord>> = (0..study.replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ReplicateRecord>> {
            let mut out = Vec::new();
            let stream = stream_id(0, rep);
            let data = generate_multivariate(&single, RngSpec::new(study.seed, stream))?;
            let gain = CovLogdetGain::new(data, study.ridge, study.min_seg)?;
            let ctx = Interval::new(0, study.len, study.len)?;
            for &kind in &study.methods {
                let mut oracle = GainOracle::new(&gain);
                let found = kind.run(&mut oracle, ctx, &search_cfg)?;
                out.push(ReplicateRecord {
                    method: kind.name().to_owned(),
                    sigma: 0.0,
                    n_or_m: study.len,
                    replicate: rep,
                    stream,
                    error: found.split.abs_diff(tau) as f64,
                    evals: found.evals,
                    split: Some(found.split),
                });
            }
            if study.multi {
                let stream = stream_id(1, rep);
                let data = generate_multivariate(&multi, RngSpec::new(study.seed, stream))?;
                let gain = CovLogdetGain::new(data, study.ridge, study.min_seg)?;
                let selection = Selection::Greedy {
                    max_points: Some(truth.len()),
                    threshold: None,
                };
                for &kind in &study.methods {
                    let cfg = SegmentationConfig::new(f64::NEG_INFINITY, study.multi_min_len, kind);
                    let binary = obs(&gain, &cfg)?;
                    let seeded = oseedbs(&gain, 0.5, &cfg, &selection)?;
                    let (bs_label, seed_label) = match kind {
                        SearchKind::FullGrid => ("bs".to_owned(), "seedbs".to_owned()),
                        other => (format!("obs-{other}"), format!("oseedbs-{other}")),
                    };
                    for (label, cps, evals) in [
                        (bs_label, binary.top_k(truth.len()), binary.total_evals),
                        (seed_label, seeded.change_points.clone(), seeded.total_evals),
                    ] {
                        out.push(ReplicateRecord {
                            method: label,
                            sigma: 0.0,
                            n_or_m: study.len,
                            replicate: rep,
                            stream,
                            error: hausdorff(&cps, &truth, study.len as f64),
                            evals,
                            split: None,
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<ReplicateRecord> = nested.into_iter().flatten().collect();
    let order: Vec<String> = records
        .iter()
        .take_while(|r| r.replicate == 0)
        .map(|r| r.method.clone())
        .collect();
    records.sort_by_key(|r| (order.iter().position(|m| *m == r.method), r.replicate));
    Ok(ExperimentReport::from_records(
        "covariance",
        study.seed,
        records,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_hausdorff(a: &[usize], b: &[usize]) -> f64 {
        let d = |x: &[usize], y: &[usize]| {
            x.iter()
                .map(|&p| y.iter().map(|&q| p.abs_diff(q)).min().unwrap())
                .max()
                .unwrap()
        };
        d(a, b).max(d(b, a)) as f64
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[5], &[5], 100.0), 0.0);
        assert_eq!(hausdorff(&[3], &[5, 9], 100.0), 6.0);
        assert_eq!(hausdorff(&[], &[5], 100.0), 100.0);
        assert_eq!(hausdorff(&[5], &[], 100.0), 100.0);
        assert_eq!(hausdorff(&[], &[], 100.0), 0.0);
    }

    #[test]
    fn mean_sd_values() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn stream_ids_are_distinct() {
        assert_ne!(stream_id(0, 1), stream_id(1, 0));
        assert_eq!(stream_id(2, 7), (2 << 32) | 7);
    }

    #[test]
    fn single_shift_study_is_reproducible() {
        let study = SingleShiftStudy {
            n_values: vec![100, 300],
            sigmas: vec![1.0],
            replicates: 100,
            ..Default::default()
        };
        let a = run_single_shift_study(&study).unwrap();
        let b = run_single_shift_study(&study).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 8);
        let full = a.row("full", 1.0, 100).unwrap();
        assert_eq!((full.mean_evals, full.sd_evals), (199.0, 0.0));
        assert!(a.rows.iter().all(|r| r.sd_err >= 0.0 && r.replicates == 100));
        assert!(a.to_csv().starts_with(CSV_HEADER));
        let few = SingleShiftStudy {
            replicates: 99,
            ..study
        };
        assert!(run_single_shift_study(&few).is_err());
    }

    #[test]
    fn csv_keeps_full_precision() {
        let report = ExperimentReport {
            study: "x".into(),
            seed: 3,
            rows: vec![ReportRow {
                method: "naive".into(),
                sigma: 0.1,
                n_or_m: 7,
                mean_err: 1.0 / 3.0,
                sd_err: 0.0,
                mean_evals: 2.5,
                sd_evals: 1e-300,
                replicates: 4,
                seed: 3,
            }],
            wall_time_secs: 0.0,
            records: Vec::new(),
        };
        let csv = report.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[6].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(fields[1], "0.1");
    }

    proptest! {
        #[test]
        fn hausdorff_matches_brute_force(
            a in prop::collection::vec(0usize..1000, 1..20),
            b in prop::collection::vec(0usize..1000, 1..20),
        ) {
            let h = hausdorff(&a, &b, 1e9);
            prop_assert_eq!(h, brute_hausdorff(&a, &b));
            prop_assert_eq!(h, hausdorff(&b, &a, 1e9));
            let mut sa = a.clone();
            sa.sort_unstable();
            sa.dedup();
            let mut sb = b.clone();
            sb.sort_unstable();
            sb.dedup();
            prop_assert_eq!(h == 0.0, sa == sb);
        }
    }
}
