//! Deterministic synthetic test signals.
//!
//! Everything here is seeded and reproducible; the generators double as
//! ground-truth oracles for the DSP tests (known pitch, known pulse
//! instants, known resonance frequencies) and as the bundled corpus for
//! end-to-end runs.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::{write_wav, AudioSegment, Label};
use crate::error::{Error, Result};

pub fn sine(rate: u32, freq: f64, dur_s: f64, amp: f64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
        .collect();
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

pub fn square(rate: u32, freq: f64, dur_s: f64, amp: f64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let phase = (freq * i as f64 / rate as f64).fract();
            if phase < 0.5 {
                amp
            } else {
                -amp
            }
        })
        .collect();
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

/// Linear frequency glide from `f_start` to `f_end`.
pub fn chirp(rate: u32, f_start: f64, f_end: f64, dur_s: f64, amp: f64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let mut phase = 0.0f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate as f64;
        let f = f_start + (f_end - f_start) * t / dur_s;
        samples.push(amp * phase.sin());
        phase += 2.0 * PI * f / rate as f64;
    }
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

/// Amplitude-modulated sine (tremolo) with modulation `depth` in [0, 1].
pub fn am_sine(rate: u32, carrier: f64, mod_freq: f64, depth: f64, dur_s: f64, amp: f64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate as f64;
            let env = 1.0 - depth * 0.5 * (1.0 - (2.0 * PI * mod_freq * t).cos());
            amp * env * (2.0 * PI * carrier * t).sin()
        })
        .collect();
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

/// Zero-mean Gaussian noise with the given standard deviation.
pub fn white_noise(rate: u32, dur_s: f64, std: f64, seed: u64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| std * gaussian(&mut rng)).collect();
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one draw per call is plenty here.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Pulse instants with alternating-period perturbation.
///
/// Periods alternate between `t0 * (1 + jitter)` and `t0 * (1 - jitter)`,
/// so the local jitter of the sequence is exactly `2 * jitter`.
pub fn alternating_pulse_times(f0: f64, dur_s: f64, jitter: f64, lead_in_s: f64) -> Vec<f64> {
    let t0 = 1.0 / f0;
    let mut times = vec![lead_in_s];
    let mut sign = 1.0;
    loop {
        let next = times.last().unwrap() + t0 * (1.0 + sign * jitter);
        if next > dur_s - lead_in_s {
            break;
        }
        times.push(next);
        sign = -sign;
    }
    times
}

/// Render glottal-like pulses (raised-cosine bumps) at fractional-sample
/// instants. Each pulse peaks at exactly its listed amplitude.
pub fn render_pulses(
    rate: u32,
    dur_s: f64,
    times: &[f64],
    amps: &[f64],
    width_s: f64,
) -> AudioSegment {
    let centers: Vec<f64> = times.iter().map(|t| t * rate as f64).collect();
    let n = (dur_s * rate as f64).round() as usize;
    render_pulses_at_samples(rate, n, &centers, amps, width_s)
}

/// Like [`render_pulses`] but with bump centers given directly in
/// (possibly fractional) sample units.
pub fn render_pulses_at_samples(
    rate: u32,
    n: usize,
    centers: &[f64],
    amps: &[f64],
    width_s: f64,
) -> AudioSegment {
    let mut samples = vec![0.0; n];
    let half = width_s * rate as f64 / 2.0;
    for (center, a) in centers.iter().zip(amps) {
        let lo = ((center - half).ceil() as isize).max(0);
        let hi = ((center + half).floor() as isize).min(n as isize - 1);
        for k in lo..=hi {
            let u = (k as f64 - center) / half;
            samples[k as usize] += a * 0.5 * (1.0 + (PI * u).cos());
        }
    }
    AudioSegment::new(samples, rate).expect("valid synthetic signal")
}

/// Uniform pulse train at `f0` with unit-amplitude pulses.
pub fn pulse_train(rate: u32, f0: f64, dur_s: f64, amp: f64) -> AudioSegment {
    let times = alternating_pulse_times(f0, dur_s, 0.0, 0.05);
    let amps = vec![amp; times.len()];
    render_pulses(rate, dur_s, &times, &amps, 0.003)
}

/// Pulse train whose bump centers sit on exact integer sample positions,
/// so every rendered cycle is bit-identical. Ground truth for "zero
/// jitter must measure exactly zero" tests.
pub fn pulse_train_on_grid(rate: u32, period_samples: usize, dur_s: f64, amp: f64) -> AudioSegment {
    let n = (dur_s * rate as f64).round() as usize;
    let lead = (0.05 * rate as f64).round() as usize;
    let centers: Vec<f64> = (0..)
        .map(|k| lead + k * period_samples)
        .take_while(|&c| c + lead < n)
        .map(|c| c as f64)
        .collect();
    let amps = vec![amp; centers.len()];
    render_pulses_at_samples(rate, n, &centers, &amps, 0.003)
}

/// Two-pole resonator filter applied in place.
pub fn resonator(samples: &mut [f64], freq: f64, bandwidth: f64, rate: u32) {
    let r = (-PI * bandwidth / rate as f64).exp();
    let c1 = 2.0 * r * (2.0 * PI * freq / rate as f64).cos();
    let c2 = -r * r;
    let mut y1 = 0.0;
    let mut y2 = 0.0;
    for s in samples.iter_mut() {
        let y = *s + c1 * y1 + c2 * y2;
        y2 = y1;
        y1 = y;
        *s = y;
    }
}

/// Sustained vowel-like phonation: a pulse train driven through a cascade
/// of vocal-tract resonators, peak-normalized to `amp`.
pub fn vowel(rate: u32, f0: f64, formants: &[(f64, f64)], dur_s: f64, amp: f64) -> AudioSegment {
    voiced_phonation(rate, f0, formants, dur_s, amp, 0.0, 0.0, 0.0, 0)
}

/// Vowel-like phonation with controllable cycle perturbations and
/// additive noise; the generator behind the bundled corpus.
#[allow(clippy::too_many_arguments)]
pub fn voiced_phonation(
    rate: u32,
    f0: f64,
    formants: &[(f64, f64)],
    dur_s: f64,
    amp: f64,
    jitter: f64,
    shimmer: f64,
    noise_std: f64,
    seed: u64,
) -> AudioSegment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t0 = 1.0 / f0;
    let mut times = Vec::new();
    let mut amps = Vec::new();
    let mut t = 0.5; // noise-only lead-in for profile estimation
    let mut sign = 1.0;
    while t < dur_s - 0.05 {
        times.push(t);
        amps.push(1.0 + sign * shimmer + 0.2 * shimmer * gaussian(&mut rng));
        t += t0 * (1.0 + sign * jitter + 0.25 * jitter * gaussian(&mut rng));
        sign = -sign;
    }
    // Near-impulsive excitation: a flat source spectrum keeps the LPC
    // poles on the resonators instead of on source coloration.
    let mut seg = render_pulses(rate, dur_s, &times, &amps, 0.00015);
    for &(f, bw) in formants {
        resonator(&mut seg.samples, f, bw, rate);
    }
    let peak = seg.samples.iter().fold(0.0f64, |m, s| m.max(s.abs())).max(1e-9);
    for (i, s) in seg.samples.iter_mut().enumerate() {
        *s = *s / peak * amp + noise_std * gaussian(&mut rng);
        let _ = i;
    }
    seg
}

/// Write a small labelled corpus of synthetic phonations plus a
/// `manifest.csv` (columns `file,speaker_id,label`). Returns the manifest
/// path.
pub fn corpus(dir: &Path, n_files: usize, dur_s: f64, rate: u32, seed: u64) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::WriteFailed {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::from("file,speaker_id,label\n");
    for i in 0..n_files {
        let label = if i % 2 == 0 { Label::Hc } else { Label::Pd };
        let speaker = format!("spk{i:03}");
        let f0 = rng.random_range(110.0..190.0);
        let f1 = rng.random_range(550.0..800.0) - if label == Label::Pd { 80.0 } else { 0.0 };
        let f2 = rng.random_range(1150.0..1500.0);
        let (jit, shim, noise) = match label {
            Label::Pd => (0.020, 0.12, 0.012),
            _ => (0.003, 0.02, 0.003),
        };
        let seg = voiced_phonation(
            rate,
            f0,
            &[(f1, 90.0), (f2, 110.0), (2600.0, 160.0), (3500.0, 200.0)],
            dur_s,
            0.7,
            jit,
            shim,
            noise,
            seed ^ (i as u64).wrapping_mul(0x9e37_79b9),
        );
        let name = format!("{speaker}.wav");
        write_wav(&seg, &dir.join(&name))?;
        manifest.push_str(&format!("{name},{speaker},{label}\n"));
    }
    let manifest_path = dir.join("manifest.csv");
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::WriteFailed {
        path: manifest_path.clone(),
        reason: e.to_string(),
    })?;
    Ok(manifest_path)
}
