//! The 71-dimensional acoustic feature vector: MFCC family (39), jitter
//! (5), shimmer (6), harmonicity (4), intensity (7), formants (4), pitch
//! (2), and pulse statistics (4).

pub mod formant;
pub mod harmonicity;
pub mod intensity;
pub mod jitter;
pub mod mfcc;
pub mod pitch;
pub mod pulse;
pub mod shimmer;

pub use formant::{formant_features, FormantMeasures};
pub use harmonicity::{harmonicity_features, HarmonicityMeasures};
pub use intensity::{intensity_features, IntensityMeasures};
pub use jitter::{jitter_features, JitterMeasures};
pub use mfcc::{mfcc_features, MfccAggregates};
pub use pitch::{estimate_pitch, pitch_features, PitchContour};
pub use pulse::{mark_pulses, pulse_features, PulseRun, PulseTrain};
pub use shimmer::{shimmer_features, ShimmerMeasures};

use crate::audio::{AudioSegment, Label};
use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 71;

/// Canonical feature names in CSV header order. These strings are part
/// of the external interface and must not change.
pub fn feature_names() -> &'static [&'static str; FEATURE_COUNT] {
    &FEATURE_NAMES
}

static FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "mfcc_0", "mfcc_1", "mfcc_2", "mfcc_3", "mfcc_4", "mfcc_5", "mfcc_6", "mfcc_7", "mfcc_8",
    "mfcc_9", "mfcc_10", "mfcc_11", "mfcc_12", "delta_mfcc_0", "delta_mfcc_1", "delta_mfcc_2",
    "delta_mfcc_3", "delta_mfcc_4", "delta_mfcc_5", "delta_mfcc_6", "delta_mfcc_7", "delta_mfcc_8",
    "delta_mfcc_9", "delta_mfcc_10", "delta_mfcc_11", "delta_mfcc_12", "delta2_mfcc_0",
    "delta2_mfcc_1", "delta2_mfcc_2", "delta2_mfcc_3", "delta2_mfcc_4", "delta2_mfcc_5",
    "delta2_mfcc_6", "delta2_mfcc_7", "delta2_mfcc_8", "delta2_mfcc_9", "delta2_mfcc_10",
    "delta2_mfcc_11", "delta2_mfcc_12", "jitter_local", "jitter_local_abs", "jitter_rap",
    "jitter_ppq5", "jitter_ddp", "shimmer_local", "shimmer_local_db", "shimmer_apq3",
    "shimmer_apq5", "shimmer_apq11", "shimmer_dda", "autocorr_harmonicity",
    "mean_autocorr_harmonicity", "hnr", "nhr", "intensity_min", "intensity_max", "intensity_mean",
    "log_energy_mean", "log_energy_delta_std", "log_energy_delta2_std", "log_energy_delta3_std",
    "f1", "f2", "f3", "f4", "pitch_min", "pitch_max", "num_pulses", "num_periods", "mean_period",
    "std_period",
];

/// One extracted segment: 71 finite values plus quality flags raised by
/// degenerate sub-measures (insufficient cycles, unvoiced audio, ...).
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub flags: Vec<String>,
    pub speaker_id: String,
    pub label: Label,
    pub segment_index: usize,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|&n| n == name).map(|i| self.values[i])
    }
}

/// Run the full extraction chain on one segment (at least one second of
/// audio). The output always holds exactly 71 finite values; degenerate
/// sub-measures contribute zeros plus a flag.
pub fn extract_all(seg: &AudioSegment) -> Result<FeatureVector> {
    if seg.duration() < 1.0 {
        return Err(Error::SegmentTooShort(format!(
            "{:.3} s, feature extraction needs at least 1 s",
            seg.duration()
        )));
    }

    let mut flags = Vec::new();

    let pc = estimate_pitch(seg, pitch::DEFAULT_FLOOR_HZ, pitch::DEFAULT_CEILING_HZ)?;
    let train = mark_pulses(seg, &pc);

    let jit = jitter_features(&train);
    if jit.insufficient {
        flags.push("insufficient_periods_for_jitter".to_string());
    }
    let shim = shimmer_features(&train);
    if shim.insufficient {
        flags.push("insufficient_amplitudes_for_shimmer".to_string());
    }
    let harm = harmonicity_features(&pc);
    if harm.unvoiced {
        flags.push("no_voiced_frames_for_harmonicity".to_string());
    }
    let inten = intensity_features(seg);
    let mfcc = mfcc_features(seg);
    if mfcc.degenerate {
        flags.push("segment_too_short_for_mfcc".to_string());
    }
    let formants = formant_features(seg)?;
    if formants.missing {
        flags.push("missing_formants".to_string());
    }
    let (pitch_min, pitch_max, pitch_flag) = pitch_features(&pc);
    if pitch_flag {
        flags.push("no_voiced_frames_for_pitch".to_string());
    }
    let (num_pulses, num_periods, mean_period, std_period) = pulse_features(&train);

    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend_from_slice(&mfcc.mean);
    values.extend_from_slice(&mfcc.delta_mean_abs);
    values.extend_from_slice(&mfcc.delta2_mean_abs);
    values.extend_from_slice(&[jit.local, jit.local_abs, jit.rap, jit.ppq5, jit.ddp]);
    values.extend_from_slice(&[
        shim.local,
        shim.local_db,
        shim.apq3,
        shim.apq5,
        shim.apq11,
        shim.dda,
    ]);
    values.extend_from_slice(&[harm.autocorr, harm.mean_autocorr, harm.hnr, harm.nhr]);
    values.extend_from_slice(&[
        inten.min_db,
        inten.max_db,
        inten.mean_db,
        inten.mean_log_energy,
        inten.delta_std,
        inten.delta2_std,
        inten.delta3_std,
    ]);
    values.extend_from_slice(&formants.f);
    values.extend_from_slice(&[pitch_min, pitch_max]);
    values.extend_from_slice(&[num_pulses, num_periods, mean_period, std_period]);
    debug_assert_eq!(values.len(), FEATURE_COUNT);

    for (i, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            flags.push(format!("nonfinite_{}", FEATURE_NAMES[i]));
            *v = 0.0;
        }
    }

    Ok(FeatureVector {
        values,
        flags,
        speaker_id: seg.speaker_id.clone(),
        label: seg.label,
        segment_index: seg.segment_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn names_are_unique_and_71() {
        let names = feature_names();
        assert_eq!(names.len(), 71);
        let mut sorted: Vec<&str> = names.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 71);
    }

    #[test]
    fn full_vector_is_finite_on_voiced_audio() {
        let seg = synth::voiced_phonation(
            16000,
            140.0,
            &[(700.0, 90.0), (1200.0, 110.0)],
            3.0,
            0.7,
            0.01,
            0.05,
            0.002,
            5,
        )
        .with_meta("spk1", Label::Pd);
        let fv = extract_all(&seg).unwrap();
        assert_eq!(fv.values.len(), 71);
        assert!(fv.values.iter().all(|v| v.is_finite()));
        assert_eq!(fv.speaker_id, "spk1");
        assert!(fv.get("jitter_local").unwrap() > 0.0);
        assert!(fv.get("hnr").unwrap() > 0.0);
    }

    #[test]
    fn silence_yields_flagged_zeros() {
        let seg = crate::audio::AudioSegment::new(vec![0.0; 32000], 16000).unwrap();
        let fv = extract_all(&seg).unwrap();
        assert_eq!(fv.values.len(), 71);
        assert!(!fv.flags.is_empty());
        assert_eq!(fv.get("jitter_local").unwrap(), 0.0);
        assert_eq!(fv.get("num_pulses").unwrap(), 0.0);
        assert_eq!(fv.get("f1").unwrap(), 0.0);
    }

    #[test]
    fn too_short_segment_is_an_error() {
        let seg = synth::sine(16000, 200.0, 0.5, 0.5);
        assert!(matches!(extract_all(&seg), Err(Error::SegmentTooShort(_))));
    }

    #[test]
    fn extraction_is_deterministic() {
        let seg = synth::voiced_phonation(
            16000,
            150.0,
            &[(650.0, 90.0), (1300.0, 110.0)],
            2.0,
            0.7,
            0.02,
            0.08,
            0.01,
            9,
        );
        let a = extract_all(&seg).unwrap();
        let b = extract_all(&seg).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn perturbed_voice_scores_higher_jitter_than_clean() {
        let clean = synth::voiced_phonation(
            16000, 140.0, &[(700.0, 90.0)], 2.0, 0.7, 0.001, 0.01, 0.0, 3,
        );
        let rough = synth::voiced_phonation(
            16000, 140.0, &[(700.0, 90.0)], 2.0, 0.7, 0.02, 0.01, 0.0, 3,
        );
        let a = extract_all(&clean).unwrap();
        let b = extract_all(&rough).unwrap();
        assert!(
            b.get("jitter_local").unwrap() > a.get("jitter_local").unwrap(),
            "rough {} vs clean {}",
            b.get("jitter_local").unwrap(),
            a.get("jitter_local").unwrap()
        );
    }
}
