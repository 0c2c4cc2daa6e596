//! Cycle-to-cycle period perturbation (jitter) measures.
//!
//! All averaging windows stay inside a single voiced run; denominators
//! use the mean period pooled over every run.

use crate::dsp;

use super::pulse::PulseTrain;

/// The five jitter measures. `insufficient` marks trains with fewer than
/// six periods, which report all zeros.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JitterMeasures {
    /// mean |T_i - T_{i-1}| / mean(T)
    pub local: f64,
    /// mean |T_i - T_{i-1}| in seconds
    pub local_abs: f64,
    /// mean |T_i - mean(T_{i-1}..T_{i+1})| / mean(T)
    pub rap: f64,
    /// like `rap` over a centered five-period window
    pub ppq5: f64,
    /// mean |(T_{i+1}-T_i) - (T_i-T_{i-1})| / mean(T); equals 3*rap
    pub ddp: f64,
    pub insufficient: bool,
}

pub fn jitter_features(pt: &PulseTrain) -> JitterMeasures {
    let pooled = pt.all_periods();
    if pooled.len() < 6 {
        return JitterMeasures { insufficient: true, ..Default::default() };
    }
    let mean_t = dsp::mean(&pooled);

    let mut abs_diff = Accum::default();
    let mut rap = Accum::default();
    let mut ppq5 = Accum::default();
    let mut ddp = Accum::default();

    for run in &pt.runs {
        let t = &run.periods;
        for w in t.windows(2) {
            abs_diff.push((w[1] - w[0]).abs());
        }
        for w in t.windows(3) {
            rap.push((w[1] - (w[0] + w[1] + w[2]) / 3.0).abs());
            ddp.push(((w[2] - w[1]) - (w[1] - w[0])).abs());
        }
        for w in t.windows(5) {
            let m = (w[0] + w[1] + w[2] + w[3] + w[4]) / 5.0;
            ppq5.push((w[2] - m).abs());
        }
    }

    JitterMeasures {
        local: abs_diff.mean() / mean_t,
        local_abs: abs_diff.mean(),
        rap: rap.mean() / mean_t,
        ppq5: ppq5.mean() / mean_t,
        ddp: ddp.mean() / mean_t,
        insufficient: false,
    }
}

#[derive(Default)]
pub(super) struct Accum {
    sum: f64,
    count: usize,
}

impl Accum {
    pub(super) fn push(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }

    pub(super) fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(periods: Vec<f64>) -> PulseTrain {
        let amps = vec![1.0; periods.len() + 1];
        PulseTrain::from_cycles(vec![(periods, amps)])
    }

    #[test]
    fn periodic_train_has_zero_jitter() {
        let j = jitter_features(&train(vec![0.01; 50]));
        assert!(!j.insufficient);
        assert_eq!(
            (j.local, j.local_abs, j.rap, j.ppq5, j.ddp),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn alternating_periods_match_hand_computation() {
        // 9.9 / 10.1 ms alternating: every |dT| = 0.2 ms, mean T = 10 ms.
        let periods: Vec<f64> =
            (0..100).map(|i| if i % 2 == 0 { 0.0099 } else { 0.0101 }).collect();
        let j = jitter_features(&train(periods));
        assert!((j.local - 0.0200).abs() < 1e-10, "local {}", j.local);
        assert!((j.local_abs - 2.0e-4).abs() < 1e-12, "local_abs {}", j.local_abs);
        assert!((j.rap - 0.013333333333).abs() < 1e-9, "rap {}", j.rap);
        assert!((j.ddp - 0.0400).abs() < 1e-10, "ddp {}", j.ddp);
    }

    #[test]
    fn insufficient_cycles_flagged() {
        let j = jitter_features(&train(vec![0.01; 5]));
        assert!(j.insufficient);
        assert_eq!(j.local, 0.0);
    }

    #[test]
    fn windows_do_not_cross_run_boundaries() {
        // Two runs with very different periods; pooled mean is affected
        // but no window term mixes the runs.
        let pt = PulseTrain::from_cycles(vec![
            (vec![0.010; 10], vec![1.0; 11]),
            (vec![0.020; 10], vec![1.0; 11]),
        ]);
        let j = jitter_features(&pt);
        // Within each run all periods are equal, so every perturbation
        // term is zero even though the pooled mean is 15 ms.
        assert_eq!(j.local_abs, 0.0);
        assert_eq!(j.ddp, 0.0);
    }
}
