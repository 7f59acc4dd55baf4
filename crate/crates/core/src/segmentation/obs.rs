use super::{Method, RunInfo, Segmentation, SegmentationConfig};
use crate::error::{Error, Result};
use crate::gain::{Gain, GainOracle};
use crate::signal::Interval;

/// Binary segmentation driven by the configured search.
///
/// On `(L, R]`: stop when `R - L < min_len`; otherwise search for the best split and,
/// if its gain is at least the threshold, record it and recurse left then right.
/// The solution path lists splits in that (pre-order) recursion order. A path
/// entry's strength is the smallest gain on its branch from the root, so lowering
/// the threshold to `x` would report exactly the entries with strength `>= x`.
pub fn obs(gain: &dyn Gain, cfg: &SegmentationConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let len = gain.len();
    if len <= cfg.min_len {
        return Err(Error::config(format!(
            "series of length {len} is not longer than min_len {}",
            cfg.min_len
        )));
    }
    let mut path = Vec::new();
    let mut strengths = Vec::new();
    let mut total_evals = 0;
    let mut stack = vec![(Interval { l: 0, r: len }, f64::INFINITY)];
    while let Some((segment, parent)) = stack.pop() {
        if segment.len() < cfg.min_len {
            continue;
        }
        let mut oracle = GainOracle::new(gain);
        let outcome = cfg.search.run_or_fallback(&mut oracle, segment, &cfg.search_cfg)?;
        total_evals += oracle.eval_count();
        let Some(outcome) = outcome else { continue };
        if outcome.gain < cfg.threshold {
            continue;
        }
        let strength = outcome.gain.min(parent);
        path.push((outcome.split, outcome.gain));
        strengths.push(strength);
        stack.push((
            Interval {
                l: outcome.split,
                r: segment.r,
            },
            strength,
        ));
        stack.push((
            Interval {
                l: segment.l,
                r: outcome.split,
            },
            strength,
        ));
    }
    Ok(Segmentation::from_path(
        path,
        strengths,
        total_evals,
        RunInfo {
            method: Method::Bs,
            search: cfg.search,
            min_len: cfg.min_len,
            threshold: Some(cfg.threshold),
            decay: None,
            selection: None,
            intervals: None,
        },
    ))
}
