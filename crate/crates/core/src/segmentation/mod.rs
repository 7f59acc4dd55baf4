//! Multiple change point segmentation on top of the single-split searches.
//!
//! Two families are provided:
//!
//! - [`obs`]: binary segmentation where each step runs the configured search on the
//!   current segment and recurses while the gain clears the threshold. With
//!   [`SearchKind::FullGrid`] this is classical binary segmentation.
//! - [`interval_candidates`] followed by a [`Selection`]: run the search on every
//!   interval of a fixed collection ([`seeded_intervals`] or [`random_intervals`])
//!   and pick change points from the resulting candidates. [`oseedbs`] and [`wbs`]
//!   bundle the two steps.

mod obs;
mod seeded;
mod selection;

pub use obs::obs;
pub use seeded::{seeded_intervals, SeededIntervalSet, SeededLayer};
pub use selection::{greedy_selection, not_selection};

use crate::error::{Error, Result};
use crate::gain::{Gain, GainOracle};
use crate::rng::UniformStream;
use crate::search::{SearchConfig, SearchKind};
use crate::signal::Interval;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Minimal gain `gamma` for a split to be accepted.
    pub threshold: f64,
    /// Segments (or intervals) shorter than this are not searched; at least 2.
    pub min_len: usize,
    pub search: SearchKind,
    #[serde(default)]
    pub search_cfg: SearchConfig,
}

impl SegmentationConfig {
    pub fn new(threshold: f64, min_len: usize, search: SearchKind) -> Self {
        Self {
            threshold,
            min_len,
            search,
            search_cfg: SearchConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() {
            return Err(Error::config("threshold must not be NaN"));
        }
        if self.min_len < 2 {
            return Err(Error::config(format!("min_len must be >= 2; got {}", self.min_len)));
        }
        self.search_cfg.validate()
    }
}

/// `c * sigma * sqrt(2 ln T)`, the default CUSUM threshold (`c = 1.3` in the CLI).
pub fn default_threshold(len: usize, sigma: f64, c: f64) -> f64 {
    c * sigma * (2.0 * (len.max(2) as f64).ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Selection {
    /// Narrowest over threshold.
    Not { threshold: f64 },
    /// Highest gain first, up to `max_points` and while the gain clears `threshold`.
    Greedy {
        max_points: Option<usize>,
        threshold: Option<f64>,
    },
}

impl Selection {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Selection::Not { threshold } if threshold.is_nan() => Err(Error::config("NOT threshold must not be NaN")),
            Selection::Greedy {
                max_points: None,
                threshold: None,
            } => Err(Error::config("greedy selection needs a point budget or a threshold")),
            Selection::Greedy { threshold: Some(t), .. } if t.is_nan() => {
                Err(Error::config("greedy threshold must not be NaN"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, candidates: &[CandidateRecord]) -> Vec<(usize, f64)> {
        match *self {
            Selection::Not { threshold } => not_selection(candidates, threshold),
            Selection::Greedy { max_points, threshold } => greedy_selection(candidates, max_points, threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub interval: Interval,
    pub split: usize,
    pub gain: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Binary segmentation.
    Bs,
    /// Search on seeded intervals, then select.
    SeedBs,
    /// Search on random intervals, then select.
    Wbs,
    /// One search on the whole series.
    Single,
}

/// Parameters a segmentation was produced with, echoed in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub method: Method,
    pub search: SearchKind,
    pub min_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<Selection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    /// Sorted, distinct, strictly inside `(0, T)`.
    pub change_points: Vec<usize>,
    /// Gain of each change point, aligned with `change_points`.
    pub gains: Vec<f64>,
    /// `(change point, gain)` in detection order.
    pub solution_path: Vec<(usize, f64)>,
    /// Per path entry, the largest threshold at which the entry would still be
    /// reported; aligned with `solution_path`.
    pub strengths: Vec<f64>,
    pub total_evals: usize,
    pub config: RunInfo,
}

impl Segmentation {
    pub(crate) fn from_path(path: Vec<(usize, f64)>, strengths: Vec<f64>, total_evals: usize, config: RunInfo) -> Self {
        let mut sorted = path.clone();
        sorted.sort_by_key(|&(cp, _)| cp);
        Self {
            change_points: sorted.iter().map(|&(cp, _)| cp).collect(),
            gains: sorted.iter().map(|&(_, g)| g).collect(),
            solution_path: path,
            strengths,
            total_evals,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.change_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.change_points.is_empty()
    }

    /// The `k` path entries of largest strength (earlier entries first on ties),
    /// sorted by position.
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.solution_path.len()).collect();
        order.sort_by(|&a, &b| self.strengths[b].total_cmp(&self.strengths[a]).then(a.cmp(&b)));
        let mut chosen: Vec<usize> = order.into_iter().take(k).map(|i| self.solution_path[i].0).collect();
        chosen.sort_unstable();
        chosen
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("segmentation serializes")
    }
}

/// Runs the configured search on every interval of length `>= cfg.min_len`, each
/// with its own oracle, in parallel. Candidates come back in interval order.
pub fn interval_candidates(
    gain: &dyn Gain,
    intervals: &[Interval],
    cfg: &SegmentationConfig,
) -> Result<Vec<CandidateRecord>> {
    cfg.validate()?;
    let found: Vec<Option<CandidateRecord>> = intervals
        .par_iter()
        .map(|&interval| -> Result<Option<CandidateRecord>> {
            if interval.len() < cfg.min_len {
                return Ok(None);
            }
            let mut oracle = GainOracle::new(gain);
            let outcome = cfg.search.run_or_fallback(&mut oracle, interval, &cfg.search_cfg)?;
            Ok(outcome.map(|o| CandidateRecord {
                interval,
                split: o.split,
                gain: o.gain,
                evals: o.evals,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

fn select(candidates: &[CandidateRecord], selection: &Selection, config: RunInfo) -> Segmentation {
    let total_evals = candidates.iter().map(|c| c.evals).sum();
    let path = selection.apply(candidates);
    let strengths = path.iter().map(|&(_, g)| g).collect();
    Segmentation::from_path(path, strengths, total_evals, config)
}

/// One search on `(0, T]`; the split is reported when its gain clears the threshold.
pub fn single_change(gain: &dyn Gain, cfg: &SegmentationConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let len = gain.len();
    let mut oracle = GainOracle::new(gain);
    let outcome = cfg
        .search
        .run_or_fallback(&mut oracle, Interval::new(0, len, len)?, &cfg.search_cfg)?;
    let path: Vec<(usize, f64)> = outcome
        .filter(|o| o.gain >= cfg.threshold)
        .map(|o| (o.split, o.gain))
        .into_iter()
        .collect();
    let strengths = path.iter().map(|&(_, g)| g).collect();
    Ok(Segmentation::from_path(
        path,
        strengths,
        oracle.eval_count(),
        RunInfo {
            method: Method::Single,
            search: cfg.search,
            min_len: cfg.min_len,
            threshold: Some(cfg.threshold),
            decay: None,
            selection: None,
            intervals: None,
        },
    ))
}

/// Search on the seeded intervals of decay `decay`, then select.
///
/// With [`SearchKind::FullGrid`] this is seeded binary segmentation.
pub fn oseedbs(gain: &dyn Gain, decay: f64, cfg: &SegmentationConfig, selection: &Selection) -> Result<Segmentation> {
    cfg.validate()?;
    selection.validate()?;
    let seeded = seeded_intervals(gain.len(), decay, cfg.min_len)?;
    let candidates = interval_candidates(gain, &seeded.intervals, cfg)?;
    Ok(select(
        &candidates,
        selection,
        RunInfo {
            method: Method::SeedBs,
            search: cfg.search,
            min_len: cfg.min_len,
            threshold: None,
            decay: Some(decay),
            selection: Some(*selection),
            intervals: Some(seeded.intervals.len()),
        },
    ))
}

/// `count` intervals with endpoints uniform on `{0, ..., T}`, ordered, and kept only
/// when `r - l >= min_len`.
pub fn random_intervals(len: usize, count: usize, min_len: usize, rng: &mut UniformStream) -> Result<Vec<Interval>> {
    if count == 0 {
        return Err(Error::config("number of random intervals must be >= 1"));
    }
    if min_len > len || min_len == 0 {
        return Err(Error::config(format!("min_len must lie in 1..={len}; got {min_len}")));
    }
    let mut intervals = Vec::with_capacity(count);
    while intervals.len() < count {
        let a = rng.below(len as u64 + 1) as usize;
        let b = rng.below(len as u64 + 1) as usize;
        let (l, r) = (a.min(b), a.max(b));
        if r - l >= min_len {
            intervals.push(Interval { l, r });
        }
    }
    Ok(intervals)
}

/// Wild binary segmentation with the configured search: the full range plus
/// `count` random intervals, then select.
pub fn wbs(
    gain: &dyn Gain,
    count: usize,
    rng: &mut UniformStream,
    cfg: &SegmentationConfig,
    selection: &Selection,
) -> Result<Segmentation> {
    cfg.validate()?;
    selection.validate()?;
    let len = gain.len();
    let mut intervals = vec![Interval::new(0, len, len)?];
    intervals.extend(random_intervals(len, count, cfg.min_len, rng)?);
    let candidates = interval_candidates(gain, &intervals, cfg)?;
    Ok(select(
        &candidates,
        selection,
        RunInfo {
            method: Method::Wbs,
            search: cfg.search,
            min_len: cfg.min_len,
            threshold: None,
            decay: None,
            selection: Some(*selection),
            intervals: Some(intervals.len()),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{CusumGain, PopulationCusumGain};
    use crate::rng::RngSpec;
    use crate::signal::{blocks_signal, Series, BLOCKS_CHANGE_POINTS};

    #[test]
    fn single_change_respects_threshold() {
        let gain = PopulationCusumGain::new(crate::signal::single_shift_signal(400, 1.0).unwrap());
        let cfg = SegmentationConfig::new(1.0, 2, SearchKind::Combined);
        let seg = single_change(&gain, &cfg).unwrap();
        assert_eq!(seg.change_points, vec![100]);
        assert_eq!(seg.config.method, Method::Single);
        let high = SegmentationConfig::new(seg.gains[0] + 1.0, 2, SearchKind::Combined);
        assert!(single_change(&gain, &high).unwrap().is_empty());
    }

    #[test]
    fn random_interval_contract() {
        let mut rng = RngSpec::new(3, 0).uniform();
        let intervals = random_intervals(1000, 5000, 2, &mut rng).unwrap();
        assert_eq!(intervals.len(), 5000);
        assert!(intervals.iter().all(|i| i.l < i.r && i.r <= 1000 && i.len() >= 2));
        let again = random_intervals(1000, 5000, 2, &mut RngSpec::new(3, 0).uniform()).unwrap();
        assert_eq!(intervals, again);
        assert!(random_intervals(10, 1, 11, &mut rng).is_err());
        assert!(random_intervals(10, 0, 2, &mut rng).is_err());
    }

    #[test]
    fn random_interval_mean_length() {
        // E|U - V| for independent uniforms on {0..T} is T(T + 2) / (3(T + 1)); the
        // rejected lengths 0 and 1 shift it by O(1).
        let len = 3000usize;
        let mut rng = RngSpec::new(8, 1).uniform();
        let intervals = random_intervals(len, 100_000, 2, &mut rng).unwrap();
        let mean = intervals.iter().map(|i| i.len() as f64).sum::<f64>() / intervals.len() as f64;
        let t = len as f64;
        let expected = t * (t + 2.0) / (3.0 * (t + 1.0));
        assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
        assert!((mean / (t / 3.0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn noiseless_blocks_via_seeded_not() {
        let gain = PopulationCusumGain::new(blocks_signal());
        for search in [SearchKind::Combined, SearchKind::FullGrid] {
            let cfg = SegmentationConfig::new(1.0, 32, search);
            let seg = oseedbs(
                &gain,
                std::f64::consts::FRAC_1_SQRT_2,
                &cfg,
                &Selection::Not { threshold: 1.0 },
            )
            .unwrap();
            assert_eq!(seg.change_points, BLOCKS_CHANGE_POINTS, "{search}");
            assert!(seg.total_evals > 0);
        }
    }

    #[test]
    fn constant_data_gives_empty_segmentation() {
        let series = Series::univariate(vec![2.5; 300], 0).unwrap();
        let gain = CusumGain::new(&series).unwrap();
        let cfg = SegmentationConfig::new(0.1, 2, SearchKind::Combined);
        let seg = oseedbs(&gain, 0.5, &cfg, &Selection::Not { threshold: 0.1 }).unwrap();
        assert!(seg.is_empty());
        let mut rng = RngSpec::new(1, 0).uniform();
        let seg = wbs(&gain, 50, &mut rng, &cfg, &Selection::Not { threshold: 0.1 }).unwrap();
        assert!(seg.is_empty());
    }

    #[test]
    fn json_schema() {
        let gain = PopulationCusumGain::new(blocks_signal());
        let cfg = SegmentationConfig::new(1.0, 2, SearchKind::FullGrid);
        let seg = obs(&gain, &cfg).unwrap();
        let value: serde_json::Value = serde_json::from_str(&seg.to_json()).unwrap();
        for key in ["change_points", "gains", "solution_path", "total_evals", "config"] {
            assert!(value.get(key).is_some(), "{key}");
        }
        assert_eq!(value["solution_path"][0].as_array().unwrap().len(), 2);
        let back: Segmentation = serde_json::from_value(value).unwrap();
        assert_eq!(back, seg);
    }

    #[test]
    fn invalid_configs() {
        assert!(SegmentationConfig::new(1.0, 1, SearchKind::Naive).validate().is_err());
        assert!(SegmentationConfig::new(f64::NAN, 2, SearchKind::Naive)
            .validate()
            .is_err());
        let none = Selection::Greedy {
            max_points: None,
            threshold: None,
        };
        assert!(none.validate().is_err());
    }
}
