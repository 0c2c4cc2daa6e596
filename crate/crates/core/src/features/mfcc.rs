//! Mel-frequency cepstral coefficients with delta and delta-delta
//! dynamics.
//!
//! 25 ms Hann frames at the shared 10 ms hop, power spectrum through a
//! 26-band triangular mel filterbank spanning 0..rate/2, log energies
//! floored at 1e-10, and an orthonormal DCT-II keeping c0..c12. Deltas
//! use the standard two-frame regression window with edge replication.
//! Per-segment aggregates are the mean of each base coefficient and the
//! mean absolute value of each delta / delta-delta contour (signed
//! derivative means would vanish on any roughly stationary segment).

use crate::audio::AudioSegment;
use crate::dsp;

pub const NUM_COEFFS: usize = 13;
pub const NUM_FILTERS: usize = 26;
const LOG_FLOOR: f64 = 1e-10;
const WINDOW_S: f64 = 0.025;

#[derive(Debug, Clone)]
pub struct MfccAggregates {
    /// Means of c0..c12.
    pub mean: [f64; NUM_COEFFS],
    /// Mean |delta| of each coefficient contour.
    pub delta_mean_abs: [f64; NUM_COEFFS],
    /// Mean |delta-delta| of each coefficient contour.
    pub delta2_mean_abs: [f64; NUM_COEFFS],
    /// Set when the segment was too short for even one frame.
    pub degenerate: bool,
}

impl Default for MfccAggregates {
    fn default() -> Self {
        MfccAggregates {
            mean: [0.0; NUM_COEFFS],
            delta_mean_abs: [0.0; NUM_COEFFS],
            delta2_mean_abs: [0.0; NUM_COEFFS],
            degenerate: true,
        }
    }
}

pub fn mfcc_features(seg: &AudioSegment) -> MfccAggregates {
    let frames = mfcc_frames(seg);
    if frames.is_empty() {
        return MfccAggregates::default();
    }
    let deltas = delta_contours(&frames);
    let delta2s = delta_contours(&deltas);

    let mut out = MfccAggregates { degenerate: false, ..Default::default() };
    let n = frames.len() as f64;
    for k in 0..NUM_COEFFS {
        out.mean[k] = frames.iter().map(|f| f[k]).sum::<f64>() / n;
        out.delta_mean_abs[k] = deltas.iter().map(|f| f[k].abs()).sum::<f64>() / n;
        out.delta2_mean_abs[k] = delta2s.iter().map(|f| f[k].abs()).sum::<f64>() / n;
    }
    out
}

/// Per-frame base coefficients c0..c12.
pub fn mfcc_frames(seg: &AudioSegment) -> Vec<[f64; NUM_COEFFS]> {
    let rate = seg.sample_rate as f64;
    let win = (WINDOW_S * rate).round() as usize;
    let hop = ((dsp::HOP_S * rate).round() as usize).max(1);
    if win == 0 || seg.samples.len() < win {
        return Vec::new();
    }
    // 512-point FFT at telephone-band rates; padded up for higher rates.
    let nfft = dsp::next_pow2(win).max(512);
    let window = dsp::hann(win);
    let bank = mel_filterbank(rate, nfft);
    let dct = dct_matrix(NUM_FILTERS);

    let mut frames = Vec::new();
    let mut start = 0;
    while start + win <= seg.samples.len() {
        let frame: Vec<f64> = seg.samples[start..start + win]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        let spec = dsp::real_fft(&frame, nfft);
        let power: Vec<f64> = spec[..=nfft / 2].iter().map(|c| c.norm_sqr()).collect();

        let mut coeffs = [0.0; NUM_COEFFS];
        let mut log_mel = [0.0; NUM_FILTERS];
        for (m, filt) in bank.iter().enumerate() {
            let e: f64 = filt.iter().map(|&(k, w)| w * power[k]).sum();
            log_mel[m] = e.max(LOG_FLOOR).ln();
        }
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = (0..NUM_FILTERS).map(|m| dct[k][m] * log_mel[m]).sum();
        }
        frames.push(coeffs);
        start += hop;
    }
    frames
}

/// Two-frame regression deltas with edge replication:
/// `d_t = sum_{n=1..2} n (c_{t+n} - c_{t-n}) / (2 (1 + 4))`.
fn delta_contours(frames: &[[f64; NUM_COEFFS]]) -> Vec<[f64; NUM_COEFFS]> {
    let n = frames.len();
    let clamp = |i: isize| -> usize { i.clamp(0, n as isize - 1) as usize };
    (0..n)
        .map(|t| {
            let mut d = [0.0; NUM_COEFFS];
            for k in 0..NUM_COEFFS {
                let mut acc = 0.0;
                for off in 1..=2isize {
                    acc += off as f64
                        * (frames[clamp(t as isize + off)][k] - frames[clamp(t as isize - off)][k]);
                }
                d[k] = acc / 10.0;
            }
            d
        })
        .collect()
}

/// HTK-style mel scale.
fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Sparse triangular filters as (bin, weight) lists.
fn mel_filterbank(rate: f64, nfft: usize) -> Vec<Vec<(usize, f64)>> {
    let mel_max = hz_to_mel(rate / 2.0);
    let points: Vec<f64> = (0..NUM_FILTERS + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (NUM_FILTERS + 1) as f64))
        .collect();
    let bin_hz = rate / nfft as f64;
    (0..NUM_FILTERS)
        .map(|m| {
            let (lo, mid, hi) = (points[m], points[m + 1], points[m + 2]);
            let mut taps = Vec::new();
            let k_lo = (lo / bin_hz).ceil() as usize;
            let k_hi = ((hi / bin_hz).floor() as usize).min(nfft / 2);
            for k in k_lo..=k_hi {
                let f = k as f64 * bin_hz;
                let w = if f < mid {
                    if mid > lo { (f - lo) / (mid - lo) } else { 0.0 }
                } else if hi > mid {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                if w > 0.0 {
                    taps.push((k, w));
                }
            }
            taps
        })
        .collect()
}

/// Orthonormal DCT-II rows for the first `NUM_COEFFS` coefficients.
fn dct_matrix(m: usize) -> Vec<Vec<f64>> {
    (0..NUM_COEFFS)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / m as f64).sqrt()
            } else {
                (2.0 / m as f64).sqrt()
            };
            (0..m)
                .map(|n| {
                    scale * (std::f64::consts::PI * k as f64 * (n as f64 + 0.5) / m as f64).cos()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn hop_periodic_sine_has_zero_deltas() {
        // 200 Hz at 16 kHz: the 160-sample hop holds exactly two periods,
        // so every frame is identical and all delta aggregates vanish.
        let seg = synth::sine(16000, 200.0, 2.0, 0.5);
        let m = mfcc_features(&seg);
        assert!(!m.degenerate);
        for k in 0..NUM_COEFFS {
            assert!(m.delta_mean_abs[k] < 1e-6, "delta[{k}] = {}", m.delta_mean_abs[k]);
            assert!(m.delta2_mean_abs[k] < 1e-6);
        }
    }

    #[test]
    fn silence_gives_constant_frames() {
        let seg = crate::audio::AudioSegment::new(vec![0.0; 16000], 16000).unwrap();
        let frames = mfcc_frames(&seg);
        assert!(frames.len() > 1);
        for f in &frames {
            assert_eq!(f, &frames[0]);
        }
        let m = mfcc_features(&seg);
        for k in 0..NUM_COEFFS {
            assert_eq!(m.delta_mean_abs[k], 0.0);
            assert_eq!(m.delta2_mean_abs[k], 0.0);
        }
    }

    #[test]
    fn gain_changes_only_c0() {
        // A touch of broadband noise keeps every mel band above the log
        // floor, where gain invariance genuinely holds.
        let quiet = synth::voiced_phonation(
            16000,
            120.0,
            &[(700.0, 80.0), (1200.0, 100.0)],
            1.0,
            0.25,
            0.0,
            0.0,
            1e-4,
            42,
        );
        let mut loud = quiet.clone();
        for s in loud.samples.iter_mut() {
            *s *= 2.0; // +6 dB
        }
        let a = mfcc_features(&quiet);
        let b = mfcc_features(&loud);
        assert!((a.mean[0] - b.mean[0]).abs() > 1e-3, "c0 should shift with gain");
        for k in 1..NUM_COEFFS {
            assert!(
                (a.mean[k] - b.mean[k]).abs() < 1e-6,
                "c{k} moved: {} vs {}",
                a.mean[k],
                b.mean[k]
            );
        }
    }

    #[test]
    fn different_vowels_are_far_apart() {
        let a = mfcc_features(&synth::vowel(16000, 120.0, &[(700.0, 80.0), (1200.0, 100.0)], 1.0, 0.6));
        let b = mfcc_features(&synth::vowel(16000, 120.0, &[(300.0, 80.0), (2300.0, 100.0)], 1.0, 0.6));
        let dist: f64 = (1..NUM_COEFFS)
            .map(|k| (a.mean[k] - b.mean[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dist > 0.5, "vowel distance {dist}");
    }

    #[test]
    fn too_short_segment_is_degenerate() {
        let seg = synth::sine(16000, 200.0, 0.01, 0.5);
        assert!(mfcc_features(&seg).degenerate);
    }
}
