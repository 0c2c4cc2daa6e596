//! Audio ingest: WAV reading, mono conversion, resampling, noise
//! reduction, and fixed-length segmentation.
//!
//! The ingest contract assumes single-speaker audio; separating an
//! interviewer's voice from the subject's is out of scope and must
//! happen upstream.

mod denoise;
mod wav;

pub use denoise::{reduce_noise, NoiseProfile};
pub use wav::{read_wav, write_wav};

use crate::error::{Error, Result};

/// Class label attached to a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Label {
    /// Pathological voice (positive class).
    Pd,
    /// Healthy control (negative class).
    Hc,
    Unknown,
}

impl Label {
    /// Numeric encoding used throughout the pipeline: PD = 1, HC = 0.
    pub fn as_binary(self) -> Option<u8> {
        match self {
            Label::Pd => Some(1),
            Label::Hc => Some(0),
            Label::Unknown => None,
        }
    }

    pub fn parse(s: &str) -> Result<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pd" | "1" | "positive" => Ok(Label::Pd),
            "hc" | "0" | "control" | "healthy" => Ok(Label::Hc),
            "unknown" | "" => Ok(Label::Unknown),
            other => Err(Error::InvalidInput(format!("unrecognized label {other:?}"))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Pd => write!(f, "PD"),
            Label::Hc => write!(f, "HC"),
            Label::Unknown => write!(f, "unknown"),
        }
    }
}

/// A mono audio segment with provenance metadata.
///
/// Samples are normalized to [-1, 1]. Segments are immutable after
/// construction and safe to process in parallel.
#[derive(Debug, Clone)]
pub struct AudioSegment {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub speaker_id: String,
    pub label: Label,
    pub segment_index: usize,
}

impl AudioSegment {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<AudioSegment> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("empty sample sequence".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio samples".into()));
        }
        Ok(AudioSegment {
            samples,
            sample_rate,
            speaker_id: String::new(),
            label: Label::Unknown,
            segment_index: 0,
        })
    }

    pub fn with_meta(mut self, speaker_id: &str, label: Label) -> AudioSegment {
        self.speaker_id = speaker_id.to_string();
        self.label = label;
        self
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Band-limited resampling through a windowed-sinc kernel.
///
/// Duration is preserved within one sample period; identical input and
/// target rates return the samples untouched.
pub fn resample(seg: &AudioSegment, target_rate: u32) -> Result<AudioSegment> {
    if target_rate == 0 {
        return Err(Error::InvalidInput("target rate must be positive".into()));
    }
    if target_rate == seg.sample_rate {
        return Ok(seg.clone());
    }
    let ratio = target_rate as f64 / seg.sample_rate as f64;
    let out_len =
        ((seg.samples.len() as u64 * target_rate as u64) as f64 / seg.sample_rate as f64).round() as usize;
    let out_len = out_len.max(1);

    // Low-pass cutoff slightly under the narrower Nyquist; the kernel
    // half-width grows when downsampling so the transition band stays put.
    let cutoff = 0.95 * ratio.min(1.0);
    const BASE_TAPS: f64 = 32.0;
    let half_width = BASE_TAPS / cutoff.min(1.0);

    let n = seg.samples.len() as isize;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let t = i as f64 / ratio;
        let lo = (t - half_width).ceil() as isize;
        let hi = (t + half_width).floor() as isize;
        let mut acc = 0.0;
        let mut norm = 0.0;
        for k in lo..=hi {
            let u = t - k as f64;
            let w = 0.5 + 0.5 * (std::f64::consts::PI * u / half_width).cos();
            let s = sinc(cutoff * u) * cutoff * w;
            norm += s;
            if k >= 0 && k < n {
                acc += seg.samples[k as usize] * s;
            }
        }
        out.push(if norm.abs() > 1e-12 { acc / norm } else { 0.0 });
    }

    Ok(AudioSegment {
        samples: out,
        sample_rate: target_rate,
        speaker_id: seg.speaker_id.clone(),
        label: seg.label,
        segment_index: seg.segment_index,
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Split a recording into consecutive non-overlapping windows of
/// `window_s` seconds. A trailing remainder shorter than the window is
/// dropped. `segment_index` counts from 0; speaker id and label are
/// inherited.
pub fn segment(seg: &AudioSegment, window_s: f64) -> Result<Vec<AudioSegment>> {
    if !(window_s > 0.0) {
        return Err(Error::InvalidInput("window must be positive".into()));
    }
    let win = (window_s * seg.sample_rate as f64).round() as usize;
    if win == 0 {
        return Err(Error::InvalidInput("window shorter than one sample".into()));
    }
    let count = seg.samples.len() / win;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        out.push(AudioSegment {
            samples: seg.samples[i * win..(i + 1) * win].to_vec(),
            sample_rate: seg.sample_rate,
            speaker_id: seg.speaker_id.clone(),
            label: seg.label,
            segment_index: i,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn segment_counts_and_remainder_drop() {
        let rate = 8000;
        let seg = AudioSegment::new(vec![0.01; 65 * rate as usize], rate).unwrap();
        let parts = segment(&seg, 10.0).unwrap();
        assert_eq!(parts.len(), 6);
        assert!(parts.iter().all(|p| p.samples.len() == 10 * rate as usize));
        assert_eq!(parts[3].segment_index, 3);

        let exact = AudioSegment::new(vec![0.01; 10 * rate as usize], rate).unwrap();
        assert_eq!(segment(&exact, 10.0).unwrap().len(), 1);

        let short = AudioSegment::new(vec![0.01; 9 * rate as usize], rate).unwrap();
        assert!(segment(&short, 10.0).unwrap().is_empty());
    }

    #[test]
    fn segments_partition_a_prefix_bit_exactly() {
        let rate = 11025;
        let seg = synth::sine(rate, 123.0, 2.5, 0.7).with_meta("s", Label::Pd);
        let parts = segment(&seg, 1.0).unwrap();
        let rebuilt: Vec<f64> = parts.iter().flat_map(|p| p.samples.iter().copied()).collect();
        assert_eq!(rebuilt.len(), 2 * rate as usize);
        assert_eq!(&seg.samples[..rebuilt.len()], &rebuilt[..]);
        assert!(parts.iter().all(|p| p.speaker_id == "s" && p.label == Label::Pd));
    }

    #[test]
    fn resample_identity_when_rates_match() {
        let seg = synth::sine(44100, 440.0, 0.2, 0.5);
        let out = resample(&seg, 44100).unwrap();
        assert_eq!(out.samples, seg.samples);
    }

    #[test]
    fn resample_preserves_duration_and_tone() {
        let seg = synth::sine(44100, 440.0, 1.0, 0.8);
        let out = resample(&seg, 11025).unwrap();
        assert!((out.samples.len() as i64 - 11025).unsigned_abs() <= 1);

        // FFT-peak oracle: the dominant bin of the resampled signal must
        // still sit at 440 Hz (1 s of audio gives 1 Hz bins).
        let n = crate::dsp::next_pow2(out.samples.len());
        let w = crate::dsp::hann(out.samples.len());
        let windowed: Vec<f64> =
            out.samples.iter().zip(&w).map(|(s, w)| s * w).collect();
        let bins = crate::dsp::real_fft(&windowed, n);
        let peak = (1..n / 2)
            .max_by(|&a, &b| bins[a].norm().total_cmp(&bins[b].norm()))
            .unwrap();
        let freq = peak as f64 * 11025.0 / n as f64;
        assert!((freq - 440.0).abs() < 2.0, "peak at {freq} Hz");
    }

    #[test]
    fn label_parsing() {
        assert_eq!(Label::parse("PD").unwrap(), Label::Pd);
        assert_eq!(Label::parse("hc").unwrap(), Label::Hc);
        assert_eq!(Label::parse("1").unwrap(), Label::Pd);
        assert_eq!(Label::parse("0").unwrap(), Label::Hc);
        assert!(Label::parse("sick").is_err());
    }
}
