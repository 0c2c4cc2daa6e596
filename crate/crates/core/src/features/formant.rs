//! Formant estimation: Burg LPC at 10 kHz, roots of the prediction
//! polynomial, bandwidth-filtered resonance candidates, median over
//! voiced frames.

use crate::audio::{resample, AudioSegment};
use crate::dsp;
use crate::error::Result;

use super::pitch::{estimate_pitch, DEFAULT_CEILING_HZ, DEFAULT_FLOOR_HZ};

const ANALYSIS_RATE: u32 = 10_000;
const LPC_ORDER: usize = 12;
const WINDOW_S: f64 = 0.025;
const MAX_BANDWIDTH_HZ: f64 = 400.0;
/// Candidates within this margin of DC or Nyquist are artifacts of the
/// pre-emphasis / spectral edges, not resonances.
const EDGE_MARGIN_HZ: f64 = 50.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FormantMeasures {
    /// First four resonance frequencies in ascending order (0 = missing).
    pub f: [f64; 4],
    /// Set when a formant slot had no candidates (or nothing was voiced).
    pub missing: bool,
}

pub fn formant_features(seg: &AudioSegment) -> Result<FormantMeasures> {
    let seg = if seg.sample_rate == ANALYSIS_RATE {
        seg.clone()
    } else {
        resample(seg, ANALYSIS_RATE)?
    };
    let rate = ANALYSIS_RATE as f64;

    let pc = match estimate_pitch(&seg, DEFAULT_FLOOR_HZ, DEFAULT_CEILING_HZ) {
        Ok(pc) => pc,
        Err(_) => return Ok(FormantMeasures { missing: true, ..Default::default() }),
    };

    // Pre-emphasis from 50 Hz: y[t] = x[t] - a x[t-1], a = exp(-2 pi 50 / rate).
    let alpha = (-2.0 * std::f64::consts::PI * 50.0 / rate).exp();
    let mut emphasized = Vec::with_capacity(seg.samples.len());
    emphasized.push(seg.samples[0]);
    for t in 1..seg.samples.len() {
        emphasized.push(seg.samples[t] - alpha * seg.samples[t - 1]);
    }

    let win = (WINDOW_S * rate).round() as usize;
    let hop = (dsp::HOP_S * rate).round() as usize;
    let window = dsp::hann(win);

    let mut per_slot: [Vec<f64>; 4] = Default::default();
    let mut start = 0;
    while start + win <= emphasized.len() {
        let center = (start as f64 + win as f64 / 2.0) / rate;
        if pc.voiced_at(center) {
            let frame: Vec<f64> = emphasized[start..start + win]
                .iter()
                .zip(&window)
                .map(|(s, w)| s * w)
                .collect();
            if let Some(coeffs) = burg(&frame, LPC_ORDER) {
                let candidates = resonances(&coeffs, rate);
                for (slot, &f) in candidates.iter().take(4).enumerate() {
                    per_slot[slot].push(f);
                }
            }
        }
        start += hop;
    }

    let mut out = FormantMeasures::default();
    let mut present = Vec::new();
    for values in per_slot.iter_mut() {
        if values.is_empty() {
            out.missing = true;
        } else {
            values.sort_by(f64::total_cmp);
            present.push(values[values.len() / 2]);
        }
    }
    // Slot medians are not automatically ordered when frames disagree on
    // candidate counts; the reported values are.
    present.sort_by(f64::total_cmp);
    out.f[..present.len()].copy_from_slice(&present);
    Ok(out)
}

/// Burg's method; returns `a[1..=order]` of the prediction polynomial
/// `A(z) = 1 + a1 z^-1 + ... + ap z^-p`, or None for degenerate frames.
pub fn burg(x: &[f64], order: usize) -> Option<Vec<f64>> {
    let n = x.len();
    if n <= order + 1 {
        return None;
    }
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    let mut a = vec![1.0];

    for m in 1..=order {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in m..n {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if den <= 0.0 || !den.is_finite() {
            return None;
        }
        let k = 2.0 * num / den;

        let mut next = vec![0.0; m + 1];
        for i in 0..=m {
            let prev = if i < a.len() { a[i] } else { 0.0 };
            let mirror = if m - i < a.len() { a[m - i] } else { 0.0 };
            next[i] = prev - k * mirror;
        }
        a = next;

        for t in (m..n).rev() {
            let ft = f[t];
            let bt = b[t - 1];
            f[t] = ft - k * bt;
            b[t] = bt - k * ft;
        }
    }
    Some(a[1..].to_vec())
}

/// Resonance frequencies from the roots of the LPC polynomial: keep
/// upper-half-plane roots with bandwidth under [`MAX_BANDWIDTH_HZ`],
/// sorted ascending.
fn resonances(lpc: &[f64], rate: f64) -> Vec<f64> {
    // A(z) = 1 + sum a_i z^-i  =>  z^p + a1 z^(p-1) + ... + ap = 0.
    let p = lpc.len();
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    coeffs.extend(lpc.iter().map(|&a| Complex::new(a, 0.0)));
    let roots = durand_kerner(&coeffs);

    let mut freqs: Vec<f64> = roots
        .iter()
        .filter(|z| z.im > 0.0)
        .filter_map(|z| {
            let freq = z.im.atan2(z.re) / (2.0 * std::f64::consts::PI) * rate;
            let mag = (z.re * z.re + z.im * z.im).sqrt();
            if mag <= 0.0 || mag >= 1.0 {
                return None;
            }
            let bandwidth = -mag.ln() * rate / std::f64::consts::PI;
            let nyquist = rate / 2.0;
            if freq > EDGE_MARGIN_HZ && freq < nyquist - EDGE_MARGIN_HZ && bandwidth < MAX_BANDWIDTH_HZ
            {
                Some(freq)
            } else {
                None
            }
        })
        .collect();
    freqs.sort_by(f64::total_cmp);
    let _ = p;
    freqs
}

use rustfft::num_complex::Complex;

/// Durand-Kerner simultaneous root iteration on a monic polynomial given
/// by descending coefficients (`coeffs[0] = 1`). Deterministic starting
/// points; converges comfortably for LPC-sized problems.
fn durand_kerner(coeffs: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let degree = coeffs.len() - 1;
    let eval = |z: Complex<f64>| -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for &c in coeffs {
            acc = acc * z + c;
        }
        acc
    };

    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..degree).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..degree {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm_sqr() < 1e-300 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-12 {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn burg_recovers_ar2_coefficients() {
        // Stationary AR(2) driven by white noise:
        // x[t] = 1.3 x[t-1] - 0.72 x[t-2] + e[t]
        let noise = synth::white_noise(1, 4096.0, 0.1, 17);
        let mut x = noise.samples;
        for t in 2..x.len() {
            x[t] += 1.3 * x[t - 1] - 0.72 * x[t - 2];
        }
        let a = burg(&x[512..], 2).unwrap();
        assert!((a[0] + 1.3).abs() < 0.05, "a1 {}", a[0]);
        assert!((a[1] - 0.72).abs() < 0.05, "a2 {}", a[1]);
    }

    #[test]
    fn durand_kerner_factors_known_roots() {
        // (z - 0.9)(z - 0.5e^{i pi/3})(z - 0.5e^{-i pi/3})
        let r = 0.5 * Complex::new((std::f64::consts::PI / 3.0).cos(), (std::f64::consts::PI / 3.0).sin());
        let roots_true = [Complex::new(0.9, 0.0), r, r.conj()];
        // expand
        let mut coeffs = vec![Complex::new(1.0, 0.0)];
        for root in roots_true {
            let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * root;
            }
            coeffs = next;
        }
        let mut found = durand_kerner(&coeffs);
        for t in roots_true {
            let (idx, _) = found
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - t).norm().total_cmp(&(b.1 - t).norm()))
                .unwrap();
            assert!((found[idx] - t).norm() < 1e-9);
            found.remove(idx);
        }
    }

    #[test]
    fn two_resonance_vowel_is_recovered() {
        let seg = synth::vowel(16000, 120.0, &[(700.0, 80.0), (1200.0, 100.0)], 1.5, 0.7);
        let m = formant_features(&seg).unwrap();
        assert!((m.f[0] - 700.0).abs() < 50.0, "f1 {}", m.f[0]);
        assert!((m.f[1] - 1200.0).abs() < 50.0, "f2 {}", m.f[1]);
    }

    #[test]
    fn outputs_sorted_ascending() {
        let seg = synth::vowel(
            16000,
            110.0,
            &[(600.0, 80.0), (1400.0, 110.0), (2500.0, 150.0), (3400.0, 210.0)],
            1.5,
            0.7,
        );
        let m = formant_features(&seg).unwrap();
        for w in m.f.windows(2) {
            if w[0] > 0.0 && w[1] > 0.0 {
                assert!(w[0] <= w[1], "{:?}", m.f);
            }
        }
    }

    #[test]
    fn unvoiced_audio_is_flagged() {
        let seg = synth::white_noise(16000, 1.0, 0.2, 3);
        let m = formant_features(&seg).unwrap();
        assert!(m.missing);
    }
}
