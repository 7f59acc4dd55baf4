use super::CandidateRecord;
use std::collections::BTreeSet;

fn holds_any(accepted: &BTreeSet<usize>, c: &CandidateRecord) -> bool {
    c.interval.r > c.interval.l + 1 && accepted.range(c.interval.l + 1..c.interval.r).next().is_some()
}

/// Narrowest over threshold: among candidates with gain `>= threshold` whose
/// interval holds no accepted change point strictly inside, repeatedly accept the
/// narrowest (then leftmost). Returns `(split, gain)` in acceptance order.
pub fn not_selection(candidates: &[CandidateRecord], threshold: f64) -> Vec<(usize, f64)> {
    let mut order: Vec<&CandidateRecord> = candidates.iter().filter(|c| c.gain >= threshold).collect();
    order.sort_by_key(|c| (c.interval.len(), c.interval.l, c.interval.r));
    let mut accepted = BTreeSet::new();
    let mut path = Vec::new();
    for c in order {
        if !holds_any(&accepted, c) {
            accepted.insert(c.split);
            path.push((c.split, c.gain));
        }
    }
    path
}

/// Repeatedly accept the highest-gain candidate (then narrower, then leftmost) and
/// drop every candidate whose interval holds an accepted point strictly inside.
/// Stops after `max_points` acceptances or once gains fall below `threshold`.
pub fn greedy_selection(
    candidates: &[CandidateRecord],
    max_points: Option<usize>,
    threshold: Option<f64>,
) -> Vec<(usize, f64)> {
    let mut order: Vec<&CandidateRecord> = candidates.iter().collect();
    order.sort_by(|a, b| {
        b.gain
            .total_cmp(&a.gain)
            .then(a.interval.len().cmp(&b.interval.len()))
            .then(a.interval.l.cmp(&b.interval.l))
    });
    let budget = max_points.unwrap_or(usize::MAX);
    let mut accepted = BTreeSet::new();
    let mut path = Vec::new();
    for c in order {
        if path.len() >= budget || threshold.is_some_and(|t| c.gain < t) {
            break;
        }
        if !holds_any(&accepted, c) {
            accepted.insert(c.split);
            path.push((c.split, c.gain));
        }
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Interval;
    use proptest::prelude::*;

    fn cand(l: usize, r: usize, split: usize, gain: f64) -> CandidateRecord {
        CandidateRecord {
            interval: Interval { l, r },
            split,
            gain,
            evals: 1,
        }
    }

    #[test]
    fn not_examples() {
        assert_eq!(not_selection(&[cand(0, 10, 4, 2.0)], 1.0), vec![(4, 2.0)]);
        // nested: the inner one wins, the outer one then holds its split
        let nested = [cand(0, 100, 60, 9.0), cand(40, 60, 50, 3.0)];
        assert_eq!(not_selection(&nested, 1.0), vec![(50, 3.0)]);
        assert!(not_selection(&nested, 10.0).is_empty());
        assert!(not_selection(&[], 0.0).is_empty());
        // a change point on the boundary does not block
        let touching = [cand(0, 10, 5, 2.0), cand(5, 20, 12, 2.0)];
        assert_eq!(not_selection(&touching, 1.0), vec![(5, 2.0), (12, 2.0)]);
        // equal widths: leftmost first
        let twins = [cand(10, 30, 20, 2.0), cand(0, 20, 15, 2.0)];
        assert_eq!(not_selection(&twins, 1.0), vec![(15, 2.0)]);
    }

    #[test]
    fn greedy_examples() {
        let disjoint = [cand(0, 10, 5, 3.0), cand(10, 20, 15, 5.0), cand(20, 30, 25, 2.0)];
        assert_eq!(greedy_selection(&disjoint, Some(1), None), vec![(15, 5.0)]);
        assert_eq!(greedy_selection(&disjoint, Some(2), None), vec![(15, 5.0), (5, 3.0)]);
        assert_eq!(greedy_selection(&disjoint, Some(10), None).len(), 3);
        assert_eq!(greedy_selection(&disjoint, None, Some(2.5)).len(), 2);
        let overlapping = [cand(0, 30, 12, 5.0), cand(0, 20, 8, 4.0), cand(14, 30, 20, 3.0)];
        assert_eq!(
            greedy_selection(&overlapping, Some(3), None),
            vec![(12, 5.0), (20, 3.0)]
        );
        // equal gains: narrower first
        let tie = [cand(0, 30, 12, 5.0), cand(5, 20, 11, 5.0)];
        assert_eq!(greedy_selection(&tie, Some(2), None), vec![(11, 5.0)]);
    }

    fn candidates() -> impl Strategy<Value = Vec<CandidateRecord>> {
        prop::collection::vec((0usize..200, 2usize..100, 0.0..1.0f64, 0.0..10.0f64), 0..60).prop_map(|v| {
            v.into_iter()
                .map(|(l, w, f, g)| {
                    let split = l + 1 + ((w - 1) as f64 * f) as usize;
                    cand(l, l + w, split.min(l + w - 1), g)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn accepted_points_never_share_an_interval(cands in candidates(), threshold in 0.0..10.0f64) {
            for path in [not_selection(&cands, threshold), greedy_selection(&cands, None, Some(threshold))] {
                let points: BTreeSet<usize> = path.iter().map(|p| p.0).collect();
                prop_assert_eq!(points.len(), path.len());
                prop_assert!(path.iter().all(|p| p.1 >= threshold));
                // each accepted point's source interval held no earlier accepted point
                for (i, &(cp, gain)) in path.iter().enumerate() {
                    let earlier: BTreeSet<usize> = path[..i].iter().map(|p| p.0).collect();
                    let ok = cands.iter().any(|c| c.split == cp && c.gain == gain && !holds_any(&earlier, c));
                    prop_assert!(ok);
                }
            }
        }

        #[test]
        fn greedy_gains_are_non_increasing(cands in candidates(), k in 1usize..20) {
            let path = greedy_selection(&cands, Some(k), None);
            prop_assert!(path.len() <= k);
            prop_assert!(path.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
