//! Glottal pulse marking and pulse statistics.
//!
//! Pulses are located at waveform peaks spaced roughly one period apart
//! inside each voiced run, walking outward from the strongest peak of
//! the run. Peak instants are refined to sub-sample precision so that
//! period perturbation measures are not dominated by grid quantization.

use crate::audio::AudioSegment;
use crate::dsp;

use super::pitch::PitchContour;

/// One contiguous voiced stretch of pulses.
///
/// `periods` are the differences between consecutive pulse instants of
/// this run (`times.len() - 1` of them); `amplitudes` hold the absolute
/// waveform peak of every pulse.
#[derive(Debug, Clone)]
pub struct PulseRun {
    pub times: Vec<f64>,
    pub periods: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

/// All pulses of a segment, grouped by voiced run so that period
/// sequences never straddle an unvoiced gap.
#[derive(Debug, Clone, Default)]
pub struct PulseTrain {
    pub runs: Vec<PulseRun>,
}

impl PulseTrain {
    /// Build a train directly from per-run cycle data; the ground-truth
    /// constructor used by tests and oracles. Periods must be positive,
    /// amplitudes non-negative, with one more amplitude than periods per
    /// run.
    pub fn from_cycles(runs: Vec<(Vec<f64>, Vec<f64>)>) -> PulseTrain {
        let runs = runs
            .into_iter()
            .map(|(periods, amplitudes)| {
                assert!(periods.iter().all(|&t| t > 0.0), "periods must be positive");
                assert!(amplitudes.iter().all(|&a| a >= 0.0));
                assert_eq!(amplitudes.len(), periods.len() + 1, "one amplitude per pulse");
                let mut times = vec![0.0];
                for &t in &periods {
                    times.push(times.last().unwrap() + t);
                }
                PulseRun { times, periods, amplitudes }
            })
            .collect();
        PulseTrain { runs }
    }

    pub fn num_pulses(&self) -> usize {
        self.runs.iter().map(|r| r.times.len()).sum()
    }

    pub fn num_periods(&self) -> usize {
        self.runs.iter().map(|r| r.periods.len()).sum()
    }

    pub fn all_periods(&self) -> Vec<f64> {
        self.runs.iter().flat_map(|r| r.periods.iter().copied()).collect()
    }

    pub fn all_amplitudes(&self) -> Vec<f64> {
        self.runs.iter().flat_map(|r| r.amplitudes.iter().copied()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.iter().all(|r| r.times.is_empty())
    }
}

/// A pulse candidate at integer sample `index` plus a parabolic
/// `frac` refinement in (-1, 1).
#[derive(Debug, Clone, Copy)]
struct Pulse {
    index: usize,
    frac: f64,
    amplitude: f64,
}

/// Mark glottal pulses inside every voiced run of the contour.
///
/// A fully unvoiced segment yields an empty train.
pub fn mark_pulses(seg: &AudioSegment, pc: &PitchContour) -> PulseTrain {
    let rate = seg.sample_rate as f64;
    let hop = (dsp::HOP_S * rate).round() as usize;
    let win = (super::pitch::WINDOW_S * rate).round() as usize;

    let mut runs = Vec::new();
    for (first, last) in pc.voiced_runs() {
        let span_lo = first * hop;
        let span_hi = (last * hop + win).min(seg.samples.len());
        if span_hi <= span_lo {
            continue;
        }
        let span = span_lo..span_hi;

        // Period (in samples) at an absolute sample position, linearly
        // interpolated between voiced frame centers.
        let period_at = |pos: usize| -> f64 {
            let t = pos as f64 / rate;
            let lo_t = pc.frame_times[first];
            let hi_t = pc.frame_times[last];
            let f = if t <= lo_t {
                pc.f0[first]
            } else if t >= hi_t {
                pc.f0[last]
            } else {
                let idx = first + ((t - lo_t) / dsp::HOP_S).floor() as usize;
                let idx = idx.min(last - 1);
                let frac = ((t - pc.frame_times[idx]) / dsp::HOP_S).clamp(0.0, 1.0);
                pc.f0[idx] * (1.0 - frac) + pc.f0[idx + 1] * frac
            };
            rate / f.max(1.0)
        };

        // Anchor on the strongest peak of the run, then walk both ways.
        let anchor = match argmax_abs(&seg.samples[span.clone()]) {
            Some(rel) => span_lo + rel,
            None => continue,
        };
        if seg.samples[anchor].abs() < 1e-9 {
            continue;
        }

        let mut pulses = vec![refine(seg, anchor)];
        let mut pos = anchor;
        loop {
            let t = period_at(pos);
            let lo = pos as f64 + 0.8 * t;
            let hi = pos as f64 + 1.2 * t;
            match window_peak(seg, lo, hi, span.end) {
                Some(p) => {
                    pos = p;
                    pulses.push(refine(seg, p));
                }
                None => break,
            }
        }
        pos = anchor;
        loop {
            let t = period_at(pos);
            let hi = pos as f64 - 0.8 * t;
            let lo = pos as f64 - 1.2 * t;
            match window_peak(seg, lo.max(span.start as f64), hi, span.end) {
                Some(p) if p < pos => {
                    pos = p;
                    pulses.push(refine(seg, p));
                }
                _ => break,
            }
        }
        pulses.sort_by_key(|p| p.index);
        pulses.dedup_by_key(|p| p.index);

        let dt = 1.0 / rate;
        let times: Vec<f64> = pulses.iter().map(|p| (p.index as f64 + p.frac) * dt).collect();
        // Period from index/frac differences so identical cycles give
        // bit-identical periods.
        let periods: Vec<f64> = pulses
            .windows(2)
            .map(|w| ((w[1].index - w[0].index) as f64 + (w[1].frac - w[0].frac)) * dt)
            .collect();
        let amplitudes: Vec<f64> = pulses.iter().map(|p| p.amplitude).collect();
        if !times.is_empty() {
            runs.push(PulseRun { times, periods, amplitudes });
        }
    }
    PulseTrain { runs }
}

fn argmax_abs(xs: &[f64]) -> Option<usize> {
    if xs.is_empty() {
        return None;
    }
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if x.abs() > xs[best].abs() {
            best = i;
        }
    }
    Some(best)
}

/// Strongest |x| inside the fractional window `[lo, hi]`, bounded by the
/// run end. Returns None when the window leaves the run or the peak is
/// negligible.
fn window_peak(seg: &AudioSegment, lo: f64, hi: f64, span_end: usize) -> Option<usize> {
    if hi < lo || hi < 0.0 || hi.floor() as usize >= span_end {
        return None;
    }
    let lo_i = lo.ceil().max(0.0) as usize;
    let hi_i = (hi.floor() as usize).min(span_end.saturating_sub(1));
    if lo_i > hi_i {
        return None;
    }
    let rel = argmax_abs(&seg.samples[lo_i..=hi_i])?;
    let idx = lo_i + rel;
    if seg.samples[idx].abs() < 1e-9 {
        None
    } else {
        Some(idx)
    }
}

/// Parabolic sub-sample refinement of the peak at `index`.
fn refine(seg: &AudioSegment, index: usize) -> Pulse {
    let x = &seg.samples;
    if index == 0 || index + 1 >= x.len() {
        return Pulse { index, frac: 0.0, amplitude: x[index].abs() };
    }
    let sign = if x[index] >= 0.0 { 1.0 } else { -1.0 };
    let (frac, value) = dsp::parabolic_peak(sign * x[index - 1], sign * x[index], sign * x[index + 1]);
    Pulse { index, frac, amplitude: value.abs() }
}

/// Pulse-count statistics: total pulses, periods, and the mean and
/// population standard deviation of the period durations. All zeros for
/// an empty train.
pub fn pulse_features(pt: &PulseTrain) -> (f64, f64, f64, f64) {
    let periods = pt.all_periods();
    (
        pt.num_pulses() as f64,
        pt.num_periods() as f64,
        dsp::mean(&periods),
        dsp::std_pop(&periods),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::pitch::estimate_pitch;
    use crate::synth;

    fn train_from(seg: &AudioSegment) -> PulseTrain {
        let pc = estimate_pitch(seg, 75.0, 500.0).unwrap();
        mark_pulses(seg, &pc)
    }

    #[test]
    fn impulse_train_periods_are_ten_ms() {
        let seg = synth::pulse_train(44100, 100.0, 1.0, 0.8);
        let pt = train_from(&seg);
        let periods = pt.all_periods();
        assert!(!periods.is_empty());
        for &t in &periods {
            assert!((t - 0.010).abs() < 0.0005, "period {t}");
        }
    }

    #[test]
    fn pulse_count_tracks_rate() {
        let seg = synth::pulse_train(44100, 100.0, 1.0, 0.8);
        let pt = train_from(&seg);
        let n = pt.num_pulses() as f64;
        // 0.9 s of voiced span at 100 Hz, allow edge losses.
        assert!((86.0..=102.0).contains(&n), "counted {n} pulses");
    }

    #[test]
    fn silence_gives_empty_train() {
        let seg = AudioSegment::new(vec![0.0; 16000], 16000).unwrap();
        let pc = estimate_pitch(&seg, 75.0, 500.0).unwrap();
        let pt = mark_pulses(&seg, &pc);
        assert!(pt.is_empty());
        assert_eq!(pulse_features(&pt), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn perfectly_periodic_train_has_zero_period_variance() {
        // Bumps on the integer sample grid: every rendered cycle is
        // sample-identical and periods must come out bit-equal.
        let seg = synth::pulse_train_on_grid(44100, 441, 1.0, 0.8);
        let pt = train_from(&seg);
        let periods = pt.all_periods();
        assert!(periods.len() > 50);
        for &t in &periods {
            assert_eq!(t, periods[0], "periods must be bit-identical");
        }
        let (_, _, mean_t, std_t) = pulse_features(&pt);
        assert!((mean_t - 0.010).abs() < 1e-4);
        // std is mean-subtraction limited, not exactly zero.
        assert!(std_t < 1e-15, "period jitter from quantization: {std_t}");
    }

    #[test]
    fn counts_are_consistent() {
        let pt = PulseTrain::from_cycles(vec![
            (vec![0.01; 100], vec![1.0; 101]),
            (vec![0.012; 10], vec![0.5; 11]),
        ]);
        assert_eq!(pt.num_pulses(), 112);
        assert_eq!(pt.num_periods(), 110);
    }
}
