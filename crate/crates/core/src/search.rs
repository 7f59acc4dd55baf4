//! Single change point search: optimistic variants and the full-grid baseline.
//!
//! All gains are evaluated in the fixed context `(L, R]` handed to the search. When
//! the gain requires a minimal segment length `g` (see [`Gain::min_seg`]), only
//! splits in `[L + g, R - g]` are ever probed; for `g = 1` this is the whole
//! interior and the searches follow their textbook definitions exactly.
//!
//! Ties are resolved deterministically: a probe `w` replaces the current middle
//! point when `G(w) >= G(s)`, and every argmax over a set of points takes the
//! smallest index.
//!
//! [`Gain::min_seg`]: crate::gain::Gain::min_seg

use crate::error::{Error, Result};
use crate::gain::GainOracle;
use crate::signal::Interval;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Relative step size `nu` in `(0, 1)`.
    pub step: f64,
    /// Brackets with `r - l <= stop_width` are scanned exhaustively.
    pub stop_width: usize,
    /// Also re-evaluate the bracket ends `l` and `r` (where they are admissible
    /// splits) in the final scan. The ends never beat the middle point, so this
    /// changes only the evaluation count; it matches the published cost figures.
    #[serde(default = "default_scan_ends")]
    pub scan_ends: bool,
    /// Dyadic points closer than this to either boundary are dropped
    /// ([`advanced_os_v2`] only).
    pub min_boundary_gap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            stop_width: 5,
            scan_ends: true,
            min_boundary_gap: 1,
        }
    }
}

fn default_scan_ends() -> bool {
    true
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step < 1.0) {
            return Err(Error::config(format!("step must lie in (0, 1); got {}", self.step)));
        }
        if self.stop_width < 3 {
            return Err(Error::config(format!(
                "stop_width must be >= 3; got {}",
                self.stop_width
            )));
        }
        if self.min_boundary_gap < 1 {
            return Err(Error::config("min_boundary_gap must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchKind {
    Naive,
    Advanced,
    AdvancedV2,
    Combined,
    FullGrid,
}

impl SearchKind {
    pub const ALL: [SearchKind; 5] = [
        SearchKind::Naive,
        SearchKind::Advanced,
        SearchKind::AdvancedV2,
        SearchKind::Combined,
        SearchKind::FullGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearchKind::Naive => "naive",
            SearchKind::Advanced => "advanced",
            SearchKind::AdvancedV2 => "advanced2",
            SearchKind::Combined => "combined",
            SearchKind::FullGrid => "full",
        }
    }

    pub fn run(self, oracle: &mut GainOracle<'_>, ctx: Interval, cfg: &SearchConfig) -> Result<SearchOutcome> {
        match self {
            SearchKind::Naive => naive_os(oracle, ctx, cfg),
            SearchKind::Advanced => advanced_os(oracle, ctx, cfg),
            SearchKind::AdvancedV2 => advanced_os_v2(oracle, ctx, cfg),
            SearchKind::Combined => combined_os(oracle, ctx, cfg),
            SearchKind::FullGrid => argmax_full_grid(oracle, ctx, 1),
        }
    }

    /// Whether this search's preconditions hold on `ctx` for boundary gap `gap`.
    pub fn admits(self, ctx: Interval, gap: usize, cfg: &SearchConfig) -> bool {
        let width = ctx.len();
        match self {
            SearchKind::FullGrid => width >= 2 * gap,
            SearchKind::AdvancedV2 => width > 2 * gap && 4 * gap.max(cfg.min_boundary_gap) < width,
            _ => width > 2 * gap,
        }
    }

    /// Runs this search where its preconditions hold, the full grid where only that
    /// one applies, and returns `None` when `ctx` has no admissible split at all.
    pub fn run_or_fallback(
        self,
        oracle: &mut GainOracle<'_>,
        ctx: Interval,
        cfg: &SearchConfig,
    ) -> Result<Option<SearchOutcome>> {
        let gap = oracle.min_seg().max(1);
        if self.admits(ctx, gap, cfg) {
            self.run(oracle, ctx, cfg).map(Some)
        } else if SearchKind::FullGrid.admits(ctx, gap, cfg) {
            argmax_full_grid(oracle, ctx, 1).map(Some)
        } else {
            Ok(None)
        }
    }
}

impl fmt::Display for SearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(SearchKind::Naive),
            "advanced" => Ok(SearchKind::Advanced),
            "advanced2" | "advanced-v2" => Ok(SearchKind::AdvancedV2),
            "combined" => Ok(SearchKind::Combined),
            "full" | "full-grid" => Ok(SearchKind::FullGrid),
            other => Err(Error::config(format!("unknown search kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub split: usize,
    pub gain: f64,
}

/// A `(l, s, r)` triple visited by the naive recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub l: usize,
    pub s: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub split: usize,
    pub gain: f64,
    pub evals: usize,
    /// Every oracle evaluation in call order.
    pub trace: Vec<Probe>,
    /// Brackets entered by the naive recursion, in order.
    pub steps: Vec<Bracket>,
}

struct Recorder<'o, 'g> {
    oracle: &'o mut GainOracle<'g>,
    ctx: Interval,
    trace: Vec<Probe>,
    steps: Vec<Bracket>,
}

impl<'o, 'g> Recorder<'o, 'g> {
    fn new(oracle: &'o mut GainOracle<'g>, ctx: Interval) -> Self {
        Self {
            oracle,
            ctx,
            trace: Vec::new(),
            steps: Vec::new(),
        }
    }

    fn probe(&mut self, s: usize) -> Result<f64> {
        let gain = self.oracle.evaluate(self.ctx.l, s, self.ctx.r)?;
        self.trace.push(Probe { split: s, gain });
        Ok(gain)
    }

    /// Argmax over `points` (ascending), smallest index on ties.
    fn best_of(&mut self, points: impl IntoIterator<Item = usize>) -> Result<Option<(usize, f64)>> {
        let mut best: Option<(usize, f64)> = None;
        for s in points {
            let g = self.probe(s)?;
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((s, g));
            }
        }
        Ok(best)
    }

    fn finish(self, split: usize, gain: f64) -> SearchOutcome {
        SearchOutcome {
            split,
            gain,
            evals: self.trace.len(),
            trace: self.trace,
            steps: self.steps,
        }
    }
}

fn check_context(oracle: &GainOracle<'_>, ctx: Interval) -> Result<()> {
    if ctx.l >= ctx.r || ctx.r > oracle.len() {
        return Err(Error::InvalidInterval {
            l: ctx.l,
            r: ctx.r,
            len: oracle.len(),
        });
    }
    Ok(())
}

/// Exclusive bracket ends `(lo, hi)` such that `lo + 1 ..= hi - 1` are exactly the
/// admissible splits for boundary gap `gap`.
fn admissible_bracket(ctx: Interval, gap: usize) -> Result<(usize, usize)> {
    let lo = ctx.l + gap - 1;
    let hi = (ctx.r + 1).saturating_sub(gap);
    if hi <= lo + 2 {
        return Err(Error::SearchTooShort {
            l: ctx.l,
            r: ctx.r,
            reason: "fewer than two admissible splits",
        });
    }
    Ok((lo, hi))
}

/// The naive recursion from the triple `(l, s, r)`; `gs` is `G(s)` when known.
fn refine(
    rec: &mut Recorder<'_, '_>,
    cfg: &SearchConfig,
    (lo, hi): (usize, usize),
    mut l: usize,
    mut s: usize,
    mut r: usize,
    mut gs: Option<f64>,
) -> Result<(usize, f64)> {
    let nu = cfg.step;
    loop {
        rec.steps.push(Bracket { l, s, r });
        if r - l <= cfg.stop_width {
            let mut best = rec.best_of(l + 1..r)?.ok_or(Error::SearchTooShort {
                l,
                r,
                reason: "empty bracket",
            })?;
            if cfg.scan_ends {
                for end in [l, r].into_iter().filter(|&e| lo < e && e < hi) {
                    let g = rec.probe(end)?;
                    if g > best.1 {
                        best = (end, g);
                    }
                }
            }
            return Ok(best);
        }
        let g_s = match gs {
            Some(g) => g,
            None => rec.probe(s)?,
        };
        if r - s > s - l {
            let w = ((r as f64 - (r - s) as f64 * nu).ceil() as usize).clamp(s + 1, r - 1);
            let g_w = rec.probe(w)?;
            if g_w >= g_s {
                (l, s, gs) = (s, w, Some(g_w));
            } else {
                (r, gs) = (w, Some(g_s));
            }
        } else {
            let w = ((l as f64 + (s - l) as f64 * nu).floor() as usize).clamp(l + 1, s - 1);
            let g_w = rec.probe(w)?;
            if g_w >= g_s {
                (r, s, gs) = (s, w, Some(g_w));
            } else {
                (l, gs) = (w, Some(g_s));
            }
        }
    }
}

fn naive_from(rec: &mut Recorder<'_, '_>, cfg: &SearchConfig, lo: usize, hi: usize) -> Result<(usize, f64)> {
    let nu = cfg.step;
    let s = (((lo as f64 + nu * hi as f64) / (1.0 + nu)).floor() as usize).clamp(lo + 1, hi - 1);
    refine(rec, cfg, (lo, hi), lo, s, hi, None)
}

/// Naive optimistic search on `(L, R]`.
///
/// Starts from `s = floor((L + nu R) / (1 + nu))`, repeatedly probes the larger of
/// the two outer segments and discards one of them, and scans the remaining points
/// once the bracket is at most `stop_width` wide.
pub fn naive_os(oracle: &mut GainOracle<'_>, ctx: Interval, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    check_context(oracle, ctx)?;
    if ctx.len() <= 2 {
        return Err(Error::SearchTooShort {
            l: ctx.l,
            r: ctx.r,
            reason: "naive search needs R - L > 2",
        });
    }
    let (lo, hi) = admissible_bracket(ctx, oracle.min_seg().max(1))?;
    let mut rec = Recorder::new(oracle, ctx);
    let (split, gain) = naive_from(&mut rec, cfg, lo, hi)?;
    Ok(rec.finish(split, gain))
}

/// Dyadic locations `floor(L + (R-L)/2^k)` and `ceil(R - (R-L)/2^k)` for
/// `k = 1..=floor(log2((R-L)/2))`, ascending and deduplicated.
pub fn dyadic_points(ctx: Interval) -> Vec<usize> {
    let width = ctx.len();
    if width < 4 {
        return Vec::new();
    }
    let levels = width.ilog2() as usize - 1;
    let mut points: Vec<usize> = (1..=levels)
        .flat_map(|k| [ctx.l + (width >> k), ctx.r - (width >> k)])
        .collect();
    points.sort_unstable();
    points.dedup();
    points
}

/// Advanced optimistic search: argmax over the dyadic grid, then the naive
/// recursion seeded with the dyadic neighbourhood of the best point.
pub fn advanced_os(oracle: &mut GainOracle<'_>, ctx: Interval, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    check_context(oracle, ctx)?;
    if ctx.len() <= 2 {
        return Err(Error::SearchTooShort {
            l: ctx.l,
            r: ctx.r,
            reason: "advanced search needs R - L > 2",
        });
    }
    let (lo, hi) = admissible_bracket(ctx, oracle.min_seg().max(1))?;
    let grid: Vec<usize> = dyadic_points(ctx).into_iter().filter(|&s| lo < s && s < hi).collect();
    let mut rec = Recorder::new(oracle, ctx);
    let (split, gain) = refine_around_best(&mut rec, cfg, &grid, lo, hi)?;
    Ok(rec.finish(split, gain))
}

/// Scans `grid`, then runs the naive recursion between the best grid point's
/// nearest grid neighbours (the context boundary where there is none), so the
/// bracket starts out with the middle gain at least as high as both ends.
fn refine_around_best(
    rec: &mut Recorder<'_, '_>,
    cfg: &SearchConfig,
    grid: &[usize],
    lo: usize,
    hi: usize,
) -> Result<(usize, f64)> {
    let Some((best, g_best)) = rec.best_of(grid.iter().copied())? else {
        return naive_from(rec, cfg, lo, hi);
    };
    let l = grid.iter().rev().find(|&&s| s < best).map_or(lo, |&s| s.max(lo));
    let r = grid.iter().find(|&&s| s > best).map_or(hi, |&s| s.min(hi));
    if r - l <= 2 {
        return Ok((best, g_best));
    }
    refine(rec, cfg, (lo, hi), l, best, r, Some(g_best))
}

/// Candidate grid of the boundary-aware variant: powers of two from both ends,
/// points within `gap` of a boundary removed, then the middle point added or
/// substituted when the two halves meet unevenly.
pub fn dyadic_points_v2(ctx: Interval, gap: usize) -> Vec<usize> {
    let (left, right, width) = (ctx.l, ctx.r, ctx.len());
    if width < 4 {
        return Vec::new();
    }
    let top = width.ilog2() - 1;
    let reach = 1usize << top;
    let mut points: Vec<usize> = (1..=top)
        .flat_map(|j| [left + (1 << j), right - (1 << j)])
        .filter(|&s| s - left >= gap && right - s >= gap)
        .collect();
    let mid = left + width / 2;
    if mid - (left + reach) > reach / 2 {
        points.push(mid);
    }
    if (right - reach) - (left + reach) < reach / 2 {
        points.retain(|&s| s != left + reach && s != right - reach);
        points.push(mid);
    }
    points.sort_unstable();
    points.dedup();
    points
}

/// Advanced optimistic search with boundary exclusion: dyadic points within
/// `max(min_boundary_gap, min_seg)` of either end are never probed.
pub fn advanced_os_v2(oracle: &mut GainOracle<'_>, ctx: Interval, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    check_context(oracle, ctx)?;
    let gap = cfg.min_boundary_gap.max(oracle.min_seg()).max(1);
    if 4 * gap >= ctx.len() {
        return Err(Error::SearchTooShort {
            l: ctx.l,
            r: ctx.r,
            reason: "boundary gap must be below (R - L) / 4",
        });
    }
    let (lo, hi) = admissible_bracket(ctx, gap)?;
    let grid: Vec<usize> = dyadic_points_v2(ctx, gap)
        .into_iter()
        .filter(|&s| lo < s && s < hi)
        .collect();
    let mut rec = Recorder::new(oracle, ctx);
    let (split, gain) = refine_around_best(&mut rec, cfg, &grid, lo, hi)?;
    Ok(rec.finish(split, gain))
}

/// Runs [`advanced_os`] and a fresh [`naive_os`] and keeps the higher gain,
/// preferring the advanced result on ties. Evaluations are the plain sum.
pub fn combined_os(oracle: &mut GainOracle<'_>, ctx: Interval, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let mut advanced = advanced_os(oracle, ctx, cfg)?;
    let naive = naive_os(oracle, ctx, cfg)?;
    if naive.gain > advanced.gain {
        advanced.split = naive.split;
        advanced.gain = naive.gain;
    }
    advanced.trace.extend(naive.trace);
    advanced.steps.extend(naive.steps);
    advanced.evals = advanced.trace.len();
    Ok(advanced)
}

/// Exhaustive argmax over `{L + g, ..., R - g}` with `g = max(min_seg, gain min_seg)`.
pub fn argmax_full_grid(oracle: &mut GainOracle<'_>, ctx: Interval, min_seg: usize) -> Result<SearchOutcome> {
    check_context(oracle, ctx)?;
    let gap = min_seg.max(oracle.min_seg()).max(1);
    if ctx.len() < 2 * gap {
        return Err(Error::SearchTooShort {
            l: ctx.l,
            r: ctx.r,
            reason: "empty grid",
        });
    }
    let mut rec = Recorder::new(oracle, ctx);
    let (split, gain) = rec.best_of(ctx.l + gap..=ctx.r - gap)?.expect("grid is non-empty");
    Ok(rec.finish(split, gain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{CusumGain, FnGain, PopulationCusumGain};
    use crate::signal::{PiecewiseSignal, Series};
    use proptest::prelude::*;

    fn ctx(l: usize, r: usize, len: usize) -> Interval {
        Interval::new(l, r, len).unwrap()
    }

    fn run(kind: SearchKind, gain: &dyn Gain, l: usize, r: usize) -> SearchOutcome {
        let mut oracle = GainOracle::new(gain);
        let out = kind
            .run(&mut oracle, ctx(l, r, gain.len()), &SearchConfig::default())
            .unwrap();
        assert_eq!(out.evals, oracle.eval_count());
        assert_eq!(out.evals, out.trace.len());
        out
    }

    use crate::gain::Gain;

    #[test]
    fn quadratic_peak_is_found() {
        let gain = FnGain::new(200, |_, s, _| -((s as f64 - 42.0).powi(2)));
        for kind in SearchKind::ALL {
            let out = run(kind, &gain, 0, 200);
            assert_eq!(out.split, 42, "{kind}");
            assert_eq!(out.gain, 0.0);
        }
    }

    #[test]
    fn dyadic_grids() {
        assert_eq!(dyadic_points(ctx(0, 16, 16)), vec![2, 4, 8, 12, 14]);
        assert_eq!(dyadic_points(ctx(0, 3, 3)), Vec::<usize>::new());
        assert_eq!(dyadic_points_v2(ctx(0, 32, 32), 1), vec![2, 4, 8, 16, 24, 28, 30]);
        assert_eq!(dyadic_points_v2(ctx(0, 64, 64), 8), vec![8, 16, 32, 48, 56]);
        // a wide middle gap gets the midpoint
        assert_eq!(dyadic_points_v2(ctx(0, 48, 48), 1), vec![2, 4, 8, 16, 32, 40, 44, 46]);
        assert_eq!(
            dyadic_points_v2(ctx(0, 60, 60), 1),
            vec![2, 4, 8, 16, 30, 44, 52, 56, 58]
        );
    }

    #[test]
    fn tiny_context_is_scanned() {
        let gain = FnGain::new(4, |_, s, _| [0.0, 1.0, 5.0, 2.0][s]);
        let out = run(SearchKind::Naive, &gain, 0, 4);
        assert!(out.evals <= 3);
        assert_eq!(out.split, 2);
        let mut oracle = GainOracle::new(&gain);
        assert!(naive_os(&mut oracle, ctx(0, 2, 4), &SearchConfig::default()).is_err());
    }

    #[test]
    fn full_grid_cost() {
        let gain = FnGain::new(200, |_, s, _| s as f64);
        let out = run(SearchKind::FullGrid, &gain, 0, 200);
        assert_eq!(out.evals, 199);
        assert_eq!(out.split, 199);
        let gain = gain.with_min_seg(10);
        let mut oracle = GainOracle::new(&gain);
        let out = argmax_full_grid(&mut oracle, ctx(0, 200, 200), 1).unwrap();
        assert_eq!(out.evals, 200 - 20 + 1);
        assert_eq!(out.split, 190);
    }

    #[test]
    fn step_series_examples() {
        let series = Series::univariate(vec![0.0, 0.0, 1.0, 1.0], 0).unwrap();
        let gain = CusumGain::new(&series).unwrap();
        for kind in [
            SearchKind::Naive,
            SearchKind::Advanced,
            SearchKind::Combined,
            SearchKind::FullGrid,
        ] {
            let out = run(kind, &gain, 0, 4);
            assert_eq!(out.split, 2, "{kind}");
            assert!((out.gain - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_gain_prefers_smallest_index() {
        let gain = FnGain::new(50, |_, _, _| 0.0);
        assert_eq!(run(SearchKind::FullGrid, &gain, 0, 50).split, 1);
        assert_eq!(run(SearchKind::FullGrid, &gain, 10, 40).split, 11);
    }

    #[test]
    fn config_is_validated() {
        let gain = FnGain::new(50, |_, _, _| 0.0);
        let mut oracle = GainOracle::new(&gain);
        for cfg in [
            SearchConfig {
                step: 0.0,
                ..Default::default()
            },
            SearchConfig {
                step: 1.0,
                ..Default::default()
            },
            SearchConfig {
                stop_width: 2,
                ..Default::default()
            },
            SearchConfig {
                min_boundary_gap: 0,
                ..Default::default()
            },
        ] {
            assert!(naive_os(&mut oracle, ctx(0, 50, 50), &cfg).is_err());
        }
        let cfg = SearchConfig {
            min_boundary_gap: 13,
            ..Default::default()
        };
        assert!(advanced_os_v2(&mut oracle, ctx(0, 50, 50), &cfg).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in SearchKind::ALL {
            assert_eq!(kind.name().parse::<SearchKind>().unwrap(), kind);
        }
        assert!("golden".parse::<SearchKind>().is_err());
    }

    #[test]
    fn single_change_is_located_exactly() {
        for (len, tau) in [
            (4096, 3),
            (4096, 4093),
            (1000, 500),
            (777, 123),
            (64, 1),
            (64, 63),
            (10_000, 6180),
        ] {
            let signal = PiecewiseSignal::new(len, vec![tau], vec![0.0, 1.0], 1.0).unwrap();
            let gain = PopulationCusumGain::new(signal);
            for kind in SearchKind::ALL {
                let out = run(kind, &gain, 0, len);
                assert_eq!(out.split, tau, "{kind} T={len} tau={tau}");
            }
        }
    }

    #[test]
    fn combined_prefers_advanced_on_ties() {
        // two equal peaks; whichever each search finds, ties keep the advanced split
        let gain = FnGain::new(300, |_, s, _| {
            let a = 10.0 - (s as f64 - 70.0).abs();
            let b = 10.0 - (s as f64 - 230.0).abs();
            a.max(b)
        });
        let advanced = run(SearchKind::Advanced, &gain, 0, 300);
        let naive = run(SearchKind::Naive, &gain, 0, 300);
        let combined = run(SearchKind::Combined, &gain, 0, 300);
        assert_eq!(advanced.gain, naive.gain);
        assert_eq!(combined.split, advanced.split);
        assert_eq!(combined.evals, advanced.evals + naive.evals);
    }

    #[test]
    fn brackets_are_nested() {
        let signal = PiecewiseSignal::new(5000, vec![1234, 3000], vec![0.0, 2.0, -1.0], 1.0).unwrap();
        let gain = PopulationCusumGain::new(signal);
        let out = run(SearchKind::Naive, &gain, 0, 5000);
        for pair in out.steps.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            assert!(a.l < a.s && a.s < a.r);
            assert!(a.l <= b.l && b.r <= a.r && b.r - b.l < a.r - a.l, "{a:?} -> {b:?}");
        }
    }

    #[test]
    fn naive_cost_is_logarithmic() {
        for len in [100usize, 1000, 10_000, 100_000, 1_000_000] {
            let signal = PiecewiseSignal::new(len, vec![len / 3], vec![0.0, 1.0], 1.0).unwrap();
            let gain = PopulationCusumGain::new(signal);
            let naive = run(SearchKind::Naive, &gain, 0, len);
            let bound = 2.0 * (len as f64).log2() + 6.0;
            assert!((naive.evals as f64) <= bound, "T={len}: {}", naive.evals);
            let advanced = run(SearchKind::Advanced, &gain, 0, len);
            assert!((advanced.evals as f64) <= 2.0 * bound, "T={len}: {}", advanced.evals);
        }
    }

    #[test]
    fn fallback_on_short_contexts() {
        let gain = FnGain::new(40, |_, s, _| s as f64).with_min_seg(5);
        let mut oracle = GainOracle::new(&gain);
        let cfg = SearchConfig::default();
        assert!(SearchKind::Naive
            .run_or_fallback(&mut oracle, ctx(0, 9, 40), &cfg)
            .unwrap()
            .is_none());
        let out = SearchKind::Naive
            .run_or_fallback(&mut oracle, ctx(0, 10, 40), &cfg)
            .unwrap()
            .unwrap();
        assert_eq!((out.split, out.evals), (5, 1));
        let out = SearchKind::Naive
            .run_or_fallback(&mut oracle, ctx(0, 40, 40), &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(out.split, 35);
        assert!(out.trace.iter().all(|p| (5..=35).contains(&p.split)));
    }

    proptest! {
        #[test]
        fn single_change_population_gain_is_solved(len in 5usize..3000, frac in 0.0..1.0f64, jump in -3.0..3.0f64) {
            prop_assume!(jump.abs() > 1e-3);
            let tau = 1 + ((len - 2) as f64 * frac) as usize;
            let signal = PiecewiseSignal::new(len, vec![tau], vec![0.0, jump], 1.0).unwrap();
            let gain = PopulationCusumGain::new(signal);
            for kind in SearchKind::ALL {
                let mut oracle = GainOracle::new(&gain);
                let out = kind.run_or_fallback(&mut oracle, ctx(0, len, len), &SearchConfig::default()).unwrap().unwrap();
                prop_assert_eq!(out.split, tau, "{} T={}", kind, len);
            }
        }

        #[test]
        fn naive_returns_weak_local_max(values in prop::collection::vec(0.0..1.0f64, 5..400), step in 0.2..0.8f64) {
            let len = values.len() + 1;
            let table = values.clone();
            let gain = FnGain::new(len, move |_, s, _| table[s - 1]);
            let mut oracle = GainOracle::new(&gain);
            let cfg = SearchConfig { step, ..Default::default() };
            let out = naive_os(&mut oracle, ctx(0, len, len), &cfg).unwrap();
            let s = out.split;
            prop_assert!(s >= 1 && s < len);
            prop_assert_eq!(out.gain, values[s - 1]);
            if s > 1 {
                prop_assert!(values[s - 1] >= values[s - 2]);
            }
            if s + 1 < len {
                prop_assert!(values[s - 1] >= values[s]);
            }
        }

        #[test]
        fn every_search_stays_admissible(len in 20usize..500, gap in 1usize..5, seed in 0u64..1000) {
            let gain = FnGain::new(len, move |l, s, r| ((s as u64 * 2654435761 + seed + (l + r) as u64) % 1000) as f64)
                .with_min_seg(gap);
            let cfg = SearchConfig::default();
            for kind in SearchKind::ALL {
                let mut oracle = GainOracle::new(&gain);
                if let Some(out) = kind.run_or_fallback(&mut oracle, ctx(0, len, len), &cfg).unwrap() {
                    prop_assert!(out.split >= gap && out.split <= len - gap);
                    prop_assert_eq!(out.evals, oracle.eval_count());
                    let best = out.trace.iter().map(|p| p.gain).fold(f64::MIN, f64::max);
                    prop_assert_eq!(out.gain, best.min(out.gain));
                }
            }
        }
    }
}
