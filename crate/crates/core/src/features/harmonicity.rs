//! Harmonicity measures derived from the per-frame normalized
//! autocorrelation peak r: HNR = 10 log10(r / (1 - r)) per frame,
//! averaged over voiced frames (Boersma 1993).

use crate::dsp;

use super::pitch::PitchContour;

const R_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HarmonicityMeasures {
    /// Mean correlation peak over voiced frames.
    pub autocorr: f64,
    /// Spread (standard deviation) of the correlation peak over voiced frames.
    pub mean_autocorr: f64,
    /// Mean per-frame harmonics-to-noise ratio in dB.
    pub hnr: f64,
    /// Mean per-frame noise-to-harmonics ratio (1 - r) / r.
    pub nhr: f64,
    /// Set when the contour has no voiced frames (all values zero).
    pub unvoiced: bool,
}

pub fn harmonicity_features(pc: &PitchContour) -> HarmonicityMeasures {
    let r_values: Vec<f64> = (0..pc.len())
        .filter(|&i| pc.is_voiced(i))
        .map(|i| pc.voicing_strength[i])
        .collect();
    if r_values.is_empty() {
        return HarmonicityMeasures { unvoiced: true, ..Default::default() };
    }

    let mut hnr_sum = 0.0;
    let mut nhr_sum = 0.0;
    for &r in &r_values {
        let r = r.clamp(R_CLAMP, 1.0 - R_CLAMP);
        hnr_sum += 10.0 * (r / (1.0 - r)).log10();
        nhr_sum += (1.0 - r) / r;
    }
    let n = r_values.len() as f64;

    HarmonicityMeasures {
        autocorr: dsp::mean(&r_values),
        mean_autocorr: dsp::std_pop(&r_values),
        hnr: hnr_sum / n,
        nhr: nhr_sum / n,
        unvoiced: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::pitch::estimate_pitch;
    use crate::synth;

    fn contour(r: Vec<f64>, voiced: bool) -> PitchContour {
        let n = r.len();
        PitchContour {
            frame_times: (0..n).map(|i| i as f64 * 0.01).collect(),
            f0: vec![if voiced { 100.0 } else { 0.0 }; n],
            voicing_strength: r,
        }
    }

    #[test]
    fn single_frame_formula_value() {
        let h = harmonicity_features(&contour(vec![0.99], true));
        assert!((h.hnr - 19.956).abs() < 1e-3, "hnr {}", h.hnr);
    }

    #[test]
    fn pure_sine_exceeds_40_db() {
        let seg = synth::sine(44100, 220.0, 1.0, 0.6);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let h = harmonicity_features(&pc);
        assert!(!h.unvoiced);
        assert!(h.hnr >= 40.0, "sine hnr {}", h.hnr);
    }

    #[test]
    fn noise_frames_score_negative_hnr_and_high_nhr() {
        // Force-voice a noise contour: each frame's r comes from real
        // noise, all well under 0.5.
        let seg = synth::white_noise(16000, 1.0, 0.3, 21);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        assert!(pc.voicing_strength.iter().all(|&r| r < 0.5));
        let forced = contour(pc.voicing_strength.clone(), true);
        let h = harmonicity_features(&forced);
        assert!(h.hnr <= 0.0, "noise hnr {}", h.hnr);
        assert!(h.nhr >= 1.0, "noise nhr {}", h.nhr);
    }

    #[test]
    fn unvoiced_contour_is_flagged() {
        let h = harmonicity_features(&contour(vec![0.3, 0.2], false));
        assert!(h.unvoiced);
        assert_eq!(h.hnr, 0.0);
    }

    #[test]
    fn extreme_r_is_clamped_before_log() {
        let h = harmonicity_features(&contour(vec![1.0, 0.0], true));
        assert!(h.hnr.is_finite());
        assert!(h.nhr.is_finite());
    }
}
