//! Fundamental-frequency estimation by short-term autocorrelation,
//! after Boersma (1993) but without the Viterbi path search: each frame
//! keeps its single best candidate, and voicing is a fixed threshold on
//! the normalized correlation peak.

use crate::audio::AudioSegment;
use crate::dsp;
use crate::error::{Error, Result};

pub const DEFAULT_FLOOR_HZ: f64 = 75.0;
pub const DEFAULT_CEILING_HZ: f64 = 500.0;
/// A frame is voiced iff its normalized autocorrelation peak reaches this.
pub const VOICING_THRESHOLD: f64 = 0.45;
/// Analysis window length in seconds (hop is the crate-wide 10 ms).
pub const WINDOW_S: f64 = 0.040;
/// Small per-octave bonus for higher-frequency candidates so that exact
/// period multiples of a periodic signal cannot win on rounding noise.
const OCTAVE_BIAS: f64 = 0.01;

/// Frame-by-frame pitch track. `f0 == 0` marks an unvoiced frame; the
/// correlation peak is kept for every frame (voiced or not) because the
/// harmonicity measures are built from it.
#[derive(Debug, Clone)]
pub struct PitchContour {
    pub frame_times: Vec<f64>,
    pub f0: Vec<f64>,
    pub voicing_strength: Vec<f64>,
}

impl PitchContour {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn is_voiced(&self, frame: usize) -> bool {
        self.f0[frame] > 0.0
    }

    pub fn voiced_f0(&self) -> Vec<f64> {
        self.f0.iter().copied().filter(|&f| f > 0.0).collect()
    }

    /// Voicing decision of the frame whose center lies nearest to `t`.
    pub fn voiced_at(&self, t: f64) -> bool {
        match self.nearest_frame(t) {
            Some(i) => self.is_voiced(i),
            None => false,
        }
    }

    pub fn nearest_frame(&self, t: f64) -> Option<usize> {
        if self.frame_times.is_empty() {
            return None;
        }
        let i = self.frame_times.partition_point(|&ft| ft < t);
        let candidates = [i.saturating_sub(1), i.min(self.frame_times.len() - 1)];
        candidates
            .into_iter()
            .min_by(|&a, &b| {
                (self.frame_times[a] - t)
                    .abs()
                    .total_cmp(&(self.frame_times[b] - t).abs())
            })
    }

    /// Maximal runs of consecutive voiced frames, as `(first, last)`
    /// inclusive frame indices.
    pub fn voiced_runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = None;
        for i in 0..self.len() {
            match (self.is_voiced(i), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, self.len() - 1));
        }
        runs
    }
}

/// Estimate the pitch contour of a segment.
///
/// Frames are 40 ms with a 10 ms hop. Within each frame the normalized
/// autocorrelation is searched over lags in `[1/ceiling, 1/floor]`; the
/// peak is refined by parabolic interpolation and the frame is voiced
/// iff the refined peak reaches [`VOICING_THRESHOLD`].
pub fn estimate_pitch(seg: &AudioSegment, floor: f64, ceiling: f64) -> Result<PitchContour> {
    if !(floor > 0.0 && ceiling > floor) {
        return Err(Error::InvalidInput("need 0 < floor < ceiling".into()));
    }
    let rate = seg.sample_rate as f64;
    if seg.duration() < 2.0 / floor {
        return Err(Error::SegmentTooShort(format!(
            "{:.3} s but pitch floor {floor} Hz needs {:.3} s",
            seg.duration(),
            2.0 / floor
        )));
    }
    let win = (WINDOW_S * rate).round() as usize;
    let hop = (dsp::HOP_S * rate).round() as usize;
    let win = win.min(seg.samples.len());

    let lag_min = ((rate / ceiling).ceil() as usize).max(2);
    let lag_max = ((rate / floor).floor() as usize).min(win.saturating_sub(2));
    if lag_min >= lag_max {
        return Err(Error::InvalidInput(
            "pitch search range empty at this sample rate".into(),
        ));
    }

    let mut frame_times = Vec::new();
    let mut f0 = Vec::new();
    let mut strength = Vec::new();

    let mut start = 0;
    while start + win <= seg.samples.len() {
        frame_times.push((start as f64 + win as f64 / 2.0) / rate);
        let frame = &seg.samples[start..start + win];
        let (lag, r) = best_lag(frame, lag_min, lag_max);
        strength.push(r.clamp(0.0, 1.0));
        if r >= VOICING_THRESHOLD && lag > 0.0 {
            f0.push((rate / lag).clamp(floor, ceiling));
        } else {
            f0.push(0.0);
        }
        start += hop;
    }

    Ok(PitchContour { frame_times, f0, voicing_strength: strength })
}

/// Best (refined lag, refined correlation) in the search range, or
/// `(0, 0)` for a silent frame.
fn best_lag(frame: &[f64], lag_min: usize, lag_max: usize) -> (f64, f64) {
    let n = frame.len();
    let mean = dsp::mean(frame);
    let centered: Vec<f64> = frame.iter().map(|s| s - mean).collect();
    let energy: f64 = centered.iter().map(|s| s * s).sum();
    if energy < 1e-18 {
        return (0.0, 0.0);
    }

    let raw = dsp::autocorrelation(&centered, lag_max + 1);

    // Cumulative energies normalize each lag against the energy of the
    // two sub-windows it actually correlates.
    let mut prefix = vec![0.0; n + 1];
    for (i, s) in centered.iter().enumerate() {
        prefix[i + 1] = prefix[i] + s * s;
    }
    let norm_r = |lag: usize| -> f64 {
        let head = prefix[n - lag];
        let tail = prefix[n] - prefix[lag];
        let denom = (head * tail).sqrt();
        if denom < 1e-18 {
            0.0
        } else {
            raw[lag] / denom
        }
    };

    let r: Vec<f64> = (0..=lag_max).map(norm_r).collect();
    let mut best = lag_min;
    let mut best_score = f64::NEG_INFINITY;
    for lag in lag_min..=lag_max {
        let score = r[lag] + OCTAVE_BIAS * (lag_min as f64 / lag as f64).log2();
        if score > best_score {
            best_score = score;
            best = lag;
        }
    }

    if best > lag_min && best < lag_max {
        let (offset, value) = dsp::parabolic_peak(r[best - 1], r[best], r[best + 1]);
        (best as f64 + offset, value.min(1.0))
    } else {
        (best as f64, r[best].min(1.0))
    }
}

/// Minimum and maximum voiced f0, `(0, 0)` with a flag when the contour
/// is fully unvoiced.
pub fn pitch_features(pc: &PitchContour) -> (f64, f64, bool) {
    let voiced = pc.voiced_f0();
    if voiced.is_empty() {
        return (0.0, 0.0, true);
    }
    let min = voiced.iter().copied().fold(f64::INFINITY, f64::min);
    let max = voiced.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn recovers_pulse_train_rate() {
        let seg = synth::pulse_train(44100, 200.0, 1.0, 0.8);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let mut voiced = pc.voiced_f0();
        assert!(!voiced.is_empty());
        voiced.sort_by(f64::total_cmp);
        let median = voiced[voiced.len() / 2];
        assert!((median - 200.0).abs() < 2.0, "median f0 {median}");
    }

    #[test]
    fn sine_is_fully_voiced_at_its_frequency() {
        let seg = synth::sine(44100, 440.0, 1.0, 0.5);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        assert!(pc.f0.iter().all(|&f| f > 0.0), "unvoiced frames in a sine");
        for &f in &pc.f0 {
            assert!((f - 440.0).abs() < 2.0, "f0 {f}");
        }
    }

    #[test]
    fn white_noise_is_mostly_unvoiced() {
        let seg = synth::white_noise(16000, 1.0, 0.3, 11);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let unvoiced = pc.f0.iter().filter(|&&f| f == 0.0).count();
        assert!(
            unvoiced as f64 >= 0.9 * pc.len() as f64,
            "{unvoiced}/{} unvoiced",
            pc.len()
        );
    }

    #[test]
    fn glide_spans_requested_range() {
        let seg = synth::chirp(16000, 150.0, 300.0, 2.0, 0.6);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let (min, max, flagged) = pitch_features(&pc);
        assert!(!flagged);
        assert!((min - 150.0).abs() < 5.0, "min {min}");
        assert!((max - 300.0).abs() < 5.0, "max {max}");
    }

    #[test]
    fn unvoiced_contour_is_flagged() {
        let seg = synth::white_noise(16000, 1.0, 0.3, 12);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let forced = PitchContour {
            frame_times: pc.frame_times.clone(),
            f0: vec![0.0; pc.len()],
            voicing_strength: pc.voicing_strength.clone(),
        };
        assert_eq!(pitch_features(&forced), (0.0, 0.0, true));
    }

    #[test]
    fn too_short_segment_is_rejected() {
        let seg = synth::sine(44100, 440.0, 0.02, 0.5);
        assert!(matches!(
            estimate_pitch(&seg, 75.0, 500.0),
            Err(Error::SegmentTooShort(_))
        ));
    }

    #[test]
    fn voiced_f0_stays_in_search_range() {
        let seg = synth::chirp(16000, 60.0, 600.0, 2.0, 0.6);
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        for &f in pc.f0.iter().filter(|&&f| f > 0.0) {
            assert!((75.0..=500.0).contains(&f));
        }
    }
}
