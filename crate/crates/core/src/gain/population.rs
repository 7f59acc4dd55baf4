use super::{check_triple, Gain, GainKind};
use crate::error::Result;
use crate::signal::PiecewiseSignal;

/// CUSUM applied to the noiseless means `E[X_t]`, `O(K)` per call.
pub fn population_cusum(signal: &PiecewiseSignal, l: usize, s: usize, r: usize) -> Result<f64> {
    check_triple(l, s, r, signal.len())?;
    let n = (r - l) as f64;
    let left = (s - l) as f64;
    let right = (r - s) as f64;
    Ok((right / (n * left)).sqrt() * signal.mean_sum(l, s) - (left / (n * right)).sqrt() * signal.mean_sum(s, r))
}

/// Reduction in squared error from splitting `(l, r]` at `s`, on the means.
pub fn population_sq_gain(signal: &PiecewiseSignal, l: usize, s: usize, r: usize) -> Result<f64> {
    population_cusum(signal, l, s, r).map(|c| c * c)
}

#[derive(Debug, Clone)]
pub struct PopulationCusumGain {
    signal: PiecewiseSignal,
}

impl PopulationCusumGain {
    pub fn new(signal: PiecewiseSignal) -> Self {
        Self { signal }
    }
}

impl Gain for PopulationCusumGain {
    fn kind(&self) -> GainKind {
        GainKind::PopulationCusumAbs
    }

    fn len(&self) -> usize {
        self.signal.len()
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        population_cusum(&self.signal, l, s, r).map(f64::abs)
    }
}

#[derive(Debug, Clone)]
pub struct PopulationSqGain {
    signal: PiecewiseSignal,
}

impl PopulationSqGain {
    pub fn new(signal: PiecewiseSignal) -> Self {
        Self { signal }
    }
}

impl Gain for PopulationSqGain {
    fn kind(&self) -> GainKind {
        GainKind::PopulationSqError
    }

    fn len(&self) -> usize {
        self.signal.len()
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        population_sq_gain(&self.signal, l, s, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use crate::signal::{blocks_signal, cancellation_signal};

    #[test]
    fn single_change_closed_form() {
        // delta * sqrt(lambda (1 - lambda) T) = 0.5 * sqrt(0.25 * 400)
        let signal = PiecewiseSignal::new(400, vec![200], vec![0.0, 0.5], 1.0).unwrap();
        let v = population_cusum(&signal, 0, 200, 400).unwrap().abs();
        assert!((v - 5.0).abs() < 1e-12, "{v}");
        // numeric cross-check of the closed form at an unbalanced location
        let signal = PiecewiseSignal::new(1000, vec![100], vec![1.0, -1.0], 1.0).unwrap();
        let v = population_cusum(&signal, 0, 100, 1000).unwrap().abs();
        assert!((v - 2.0 * (0.1f64 * 0.9 * 1000.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn constant_signal_is_zero() {
        let signal = PiecewiseSignal::constant(100, 4.2, 1.0).unwrap();
        for s in 1..100 {
            assert!(population_cusum(&signal, 0, s, 100).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn cancellation_zeros() {
        let signal = cancellation_signal(256, 1.0).unwrap();
        assert_eq!(population_cusum(&signal, 0, 256 / 3, 256).unwrap(), 0.0);
        let mut k = 256;
        while k > 1 {
            k /= 2;
            assert_eq!(population_cusum(&signal, 0, k, 256).unwrap(), 0.0);
            assert_eq!(population_cusum(&signal, 0, 256 - k, 256).unwrap(), 0.0);
        }
    }

    #[test]
    fn squared_gain_matches_square() {
        let signal = blocks_signal();
        let mut u = RngSpec::new(11, 0).uniform();
        for _ in 0..1000 {
            let l = u.below(2046) as usize;
            let r = l + 2 + u.below((2048 - l - 1) as u64) as usize;
            let r = r.min(2048);
            let s = l + 1 + u.below((r - l - 1) as u64) as usize;
            let c = population_cusum(&signal, l, s, r).unwrap();
            let g = population_sq_gain(&signal, l, s, r).unwrap();
            assert!((g - c * c).abs() <= 1e-10 * (1.0 + g));
        }
    }

    #[test]
    fn piecewise_convex_single_change() {
        let signal = PiecewiseSignal::new(500, vec![180], vec![0.0, 1.3], 1.0).unwrap();
        let (l, r) = (0, 500);
        let g: Vec<f64> = (l + 1..r)
            .map(|s| population_sq_gain(&signal, l, s, r).unwrap())
            .collect();
        // g[i] is the gain at s = i + 1; check second differences away from the change point
        for s in l + 2..r - 1 {
            if s == 180 {
                continue;
            }
            let d2 = g[s] - 2.0 * g[s - 1] + g[s - 2];
            assert!(d2 >= -1e-9, "s = {s}: {d2}");
        }
    }
}
