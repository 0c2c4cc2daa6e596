//! Boll-style spectral subtraction.
//!
//! A noise magnitude profile is estimated from a caller-designated
//! noise-only interval (default: the first 0.5 s). Each analysis frame
//! of the recording is then attenuated per frequency bin:
//!
//! `|Y| = max(|X| - over_subtraction * noise, floor * |X|)`
//!
//! with the original phase kept and the signal rebuilt by overlap-add.

use rustfft::num_complex::Complex;

use crate::dsp;
use crate::error::{Error, Result};

use super::AudioSegment;

pub const DEFAULT_FRAME: usize = 1024;
pub const DEFAULT_HOP: usize = 512;
pub const DEFAULT_OVER_SUBTRACTION: f64 = 1.5;
pub const DEFAULT_FLOOR: f64 = 0.05;
pub const DEFAULT_NOISE_WINDOW_S: f64 = 0.5;

/// Mean noise magnitude per frequency bin (`frame_size/2 + 1` bins).
#[derive(Debug, Clone)]
pub struct NoiseProfile {
    pub magnitude: Vec<f64>,
    pub frame_size: usize,
    pub hop: usize,
}

impl NoiseProfile {
    /// All-zero profile; reduce_noise with it is an identity (up to FFT
    /// round-off).
    pub fn zero(frame_size: usize, hop: usize) -> NoiseProfile {
        NoiseProfile {
            magnitude: vec![0.0; frame_size / 2 + 1],
            frame_size,
            hop,
        }
    }

    /// Estimate the profile from a noise-only interval `[start_s, end_s)`.
    pub fn from_interval(
        seg: &AudioSegment,
        start_s: f64,
        end_s: f64,
        frame_size: usize,
        hop: usize,
    ) -> Result<NoiseProfile> {
        if !frame_size.is_power_of_two() {
            return Err(Error::InvalidInput("frame size must be a power of two".into()));
        }
        if !(end_s > start_s) || start_s < 0.0 {
            return Err(Error::InvalidInput("bad noise interval".into()));
        }
        let lo = (start_s * seg.sample_rate as f64).round() as usize;
        let hi = ((end_s * seg.sample_rate as f64).round() as usize).min(seg.samples.len());
        if hi.saturating_sub(lo) < frame_size {
            return Err(Error::SegmentTooShort(format!(
                "noise interval holds {} samples, need at least {frame_size}",
                hi.saturating_sub(lo)
            )));
        }

        let window = dsp::hann(frame_size);
        let bins = frame_size / 2 + 1;
        let mut acc = vec![0.0; bins];
        let mut count = 0usize;
        let mut start = lo;
        while start + frame_size <= hi {
            let frame: Vec<f64> = seg.samples[start..start + frame_size]
                .iter()
                .zip(&window)
                .map(|(s, w)| s * w)
                .collect();
            let spec = dsp::real_fft(&frame, frame_size);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += spec[k].norm();
            }
            count += 1;
            start += hop;
        }
        let magnitude = acc.iter().map(|a| a / count as f64).collect();
        Ok(NoiseProfile { magnitude, frame_size, hop })
    }
}

/// Subtract the noise profile from every frame of `seg`.
///
/// Output length equals input length. Fails if the segment is shorter
/// than one analysis frame.
pub fn reduce_noise(
    seg: &AudioSegment,
    profile: &NoiseProfile,
    over_subtraction: f64,
    floor: f64,
) -> Result<AudioSegment> {
    let frame = profile.frame_size;
    let hop = profile.hop;
    if !frame.is_power_of_two() {
        return Err(Error::InvalidInput("frame size must be a power of two".into()));
    }
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::InvalidInput("floor must lie in (0, 1)".into()));
    }
    if over_subtraction < 1.0 {
        return Err(Error::InvalidInput("over_subtraction must be >= 1".into()));
    }
    if profile.magnitude.len() != frame / 2 + 1 {
        return Err(Error::DimensionMismatch {
            expected: frame / 2 + 1,
            got: profile.magnitude.len(),
        });
    }
    let n = seg.samples.len();
    if n < frame {
        return Err(Error::SegmentTooShort(format!(
            "{n} samples, need at least {frame}"
        )));
    }

    // Pad `hop` zeros front and a frame of zeros at the back so every
    // output sample is covered by two half-overlapping Hann frames,
    // which sum to exactly one.
    let padded_len = hop + n + frame;
    let mut padded = vec![0.0; padded_len];
    padded[hop..hop + n].copy_from_slice(&seg.samples);

    let window = dsp::hann(frame);
    let mut out = vec![0.0; padded_len];
    let mut start = 0usize;
    while start + frame <= padded_len {
        let mut buf: Vec<Complex<f64>> = padded[start..start + frame]
            .iter()
            .zip(&window)
            .map(|(s, w)| Complex::new(s * w, 0.0))
            .collect();
        dsp::fft_plan(frame, false).process(&mut buf);

        for k in 0..=frame / 2 {
            let mag = buf[k].norm();
            let gain = if mag > 0.0 {
                let cleaned = (mag - over_subtraction * profile.magnitude[k]).max(floor * mag);
                cleaned / mag
            } else {
                0.0
            };
            buf[k] *= gain;
            if k > 0 && k < frame / 2 {
                buf[frame - k] *= gain;
            }
        }

        let rebuilt = dsp::inverse_fft_real(&mut buf);
        for (i, v) in rebuilt.iter().enumerate() {
            out[start + i] += v;
        }
        start += hop;
    }

    let samples = out[hop..hop + n].to_vec();
    Ok(AudioSegment { samples, ..seg.clone() })
}
