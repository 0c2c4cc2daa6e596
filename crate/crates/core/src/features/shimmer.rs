//! Cycle-to-cycle amplitude perturbation (shimmer) measures.

use crate::dsp;

use super::jitter::Accum;
use super::pulse::PulseTrain;

/// The six shimmer measures. `insufficient` marks trains with fewer than
/// twelve cycle amplitudes, which report all zeros.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShimmerMeasures {
    /// mean |A_i - A_{i-1}| / mean(A)
    pub local: f64,
    /// mean |20 log10(A_{i+1}/A_i)| in dB
    pub local_db: f64,
    pub apq3: f64,
    pub apq5: f64,
    pub apq11: f64,
    /// equals 3*apq3
    pub dda: f64,
    pub insufficient: bool,
}

pub fn shimmer_features(pt: &PulseTrain) -> ShimmerMeasures {
    let pooled = pt.all_amplitudes();
    if pooled.len() < 12 {
        return ShimmerMeasures { insufficient: true, ..Default::default() };
    }
    let mean_a = dsp::mean(&pooled);
    if mean_a <= 0.0 {
        return ShimmerMeasures { insufficient: true, ..Default::default() };
    }

    let mut abs_diff = Accum::default();
    let mut db_diff = Accum::default();
    let mut apq3 = Accum::default();
    let mut apq5 = Accum::default();
    let mut apq11 = Accum::default();
    let mut dda = Accum::default();

    for run in &pt.runs {
        let a = &run.amplitudes;
        for w in a.windows(2) {
            abs_diff.push((w[1] - w[0]).abs());
            // Pairs touching a zero amplitude are skipped for the dB form.
            if w[0] > 0.0 && w[1] > 0.0 {
                db_diff.push((20.0 * (w[1] / w[0]).log10()).abs());
            }
        }
        for w in a.windows(3) {
            apq3.push((w[1] - (w[0] + w[1] + w[2]) / 3.0).abs());
            dda.push(((w[2] - w[1]) - (w[1] - w[0])).abs());
        }
        for w in a.windows(5) {
            let m = w.iter().sum::<f64>() / 5.0;
            apq5.push((w[2] - m).abs());
        }
        for w in a.windows(11) {
            let m = w.iter().sum::<f64>() / 11.0;
            apq11.push((w[5] - m).abs());
        }
    }

    ShimmerMeasures {
        local: abs_diff.mean() / mean_a,
        local_db: db_diff.mean(),
        apq3: apq3.mean() / mean_a,
        apq5: apq5.mean() / mean_a,
        apq11: apq11.mean() / mean_a,
        dda: dda.mean() / mean_a,
        insufficient: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(amps: Vec<f64>) -> PulseTrain {
        let periods = vec![0.01; amps.len() - 1];
        PulseTrain::from_cycles(vec![(periods, amps)])
    }

    #[test]
    fn constant_amplitudes_have_zero_shimmer() {
        let s = shimmer_features(&train(vec![0.7; 40]));
        assert!(!s.insufficient);
        // apqN windows divide by 3/5/11, so "zero" means a few ulps.
        for v in [s.local, s.local_db, s.apq3, s.apq5, s.apq11, s.dda] {
            assert!(v.abs() < 1e-12, "residual shimmer {v}");
        }
    }

    #[test]
    fn alternating_amplitudes_match_hand_computation() {
        let amps: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.9 } else { 1.1 }).collect();
        let s = shimmer_features(&train(amps));
        assert!((s.local - 0.2000).abs() < 1e-10, "local {}", s.local);
        let expect_db = (20.0 * (1.1f64 / 0.9).log10()).abs();
        assert!((s.local_db - expect_db).abs() < 1e-9, "local_db {}", s.local_db);
        assert!((expect_db - 1.7430).abs() < 1e-3);
    }

    #[test]
    fn zero_amplitude_pairs_are_skipped_in_db_form() {
        let mut amps = vec![1.0; 20];
        amps[10] = 0.0;
        let s = shimmer_features(&train(amps));
        assert!(s.local_db.is_finite());
        assert_eq!(s.local_db, 0.0); // all surviving pairs are 1.0/1.0
        assert!(s.local > 0.0);
    }

    #[test]
    fn insufficient_amplitudes_flagged() {
        let s = shimmer_features(&train(vec![1.0; 11]));
        assert!(s.insufficient);
    }
}
