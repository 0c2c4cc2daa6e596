//! Frame intensity and log-energy dynamics.

use crate::audio::AudioSegment;
use crate::dsp;

/// Reference power for dB SPL-style intensity: (2e-5)^2.
const REF_POWER: f64 = 4e-10;
const SILENCE_DB: f64 = -100.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntensityMeasures {
    pub min_db: f64,
    pub max_db: f64,
    pub mean_db: f64,
    pub mean_log_energy: f64,
    /// Standard deviations of the 1st/2nd/3rd difference of the
    /// log-energy contour.
    pub delta_std: f64,
    pub delta2_std: f64,
    pub delta3_std: f64,
}

pub fn intensity_features(seg: &AudioSegment) -> IntensityMeasures {
    let rate = seg.sample_rate as f64;
    let win = ((0.040 * rate).round() as usize).min(seg.samples.len()).max(1);
    let hop = ((dsp::HOP_S * rate).round() as usize).max(1);

    let mut intensity_db = Vec::new();
    let mut log_energy = Vec::new();
    let mut start = 0;
    while start + win <= seg.samples.len() {
        let frame = &seg.samples[start..start + win];
        let energy: f64 = frame.iter().map(|s| s * s).sum();
        let power = energy / win as f64;
        let db = if power > 0.0 {
            (10.0 * (power / REF_POWER).log10()).max(SILENCE_DB)
        } else {
            SILENCE_DB
        };
        intensity_db.push(db);
        log_energy.push((energy + 1e-12).ln());
        start += hop;
    }
    if intensity_db.is_empty() {
        // Segment shorter than one frame: treat it as a single frame.
        let energy: f64 = seg.samples.iter().map(|s| s * s).sum();
        let power = energy / seg.samples.len().max(1) as f64;
        let db = if power > 0.0 {
            (10.0 * (power / REF_POWER).log10()).max(SILENCE_DB)
        } else {
            SILENCE_DB
        };
        intensity_db.push(db);
        log_energy.push((energy + 1e-12).ln());
    }

    let d1 = diff(&log_energy);
    let d2 = diff(&d1);
    let d3 = diff(&d2);

    IntensityMeasures {
        min_db: intensity_db.iter().copied().fold(f64::INFINITY, f64::min),
        max_db: intensity_db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_db: dsp::mean(&intensity_db),
        mean_log_energy: dsp::mean(&log_energy),
        delta_std: dsp::std_pop(&d1),
        delta2_std: dsp::std_pop(&d2),
        delta3_std: dsp::std_pop(&d3),
    }
}

fn diff(xs: &[f64]) -> Vec<f64> {
    xs.windows(2).map(|w| w[1] - w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn stationary_sine_is_flat() {
        let seg = synth::sine(16000, 200.0, 2.0, 0.5);
        let m = intensity_features(&seg);
        assert!(m.delta_std < 1e-3, "delta_std {}", m.delta_std);
        assert!((m.max_db - m.min_db).abs() < 0.5);
    }

    #[test]
    fn tremolo_raises_delta_std() {
        let flat = intensity_features(&synth::sine(16000, 200.0, 2.0, 0.5));
        let trem = intensity_features(&synth::am_sine(16000, 200.0, 1.0, 0.8, 2.0, 0.5));
        assert!(
            trem.delta_std > flat.delta_std,
            "tremolo {} vs flat {}",
            trem.delta_std,
            flat.delta_std
        );
    }

    #[test]
    fn full_scale_square_wave_level() {
        let seg = synth::square(16000, 100.0, 1.0, 1.0);
        let m = intensity_features(&seg);
        let expect = 10.0 * (1.0f64 / REF_POWER).log10();
        assert!((expect - 93.9794).abs() < 1e-3);
        assert!((m.mean_db - expect).abs() < 0.01, "mean {}", m.mean_db);
    }

    #[test]
    fn silence_clamps_at_floor() {
        let seg = AudioSegment::new(vec![0.0; 16000], 16000).unwrap();
        let m = intensity_features(&seg);
        assert_eq!(m.min_db, SILENCE_DB);
        assert_eq!(m.max_db, SILENCE_DB);
    }
}
