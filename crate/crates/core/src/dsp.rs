//! Shared DSP primitives: FFT plan cache, windows, autocorrelation.
//!
//! All analysis windows in this crate are Hann and all contour hops are
//! 10 ms, so every per-frame contour (pitch, intensity, harmonicity,
//! MFCC) lands on the same time grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Hop shared by every frame-based analysis, in seconds.
pub const HOP_S: f64 = 0.010;

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

static PLANS: OnceLock<PlanCache> = OnceLock::new();

/// Fetch a cached FFT plan. Plans are immutable once created and safe to
/// run from multiple threads.
pub fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Periodic Hann window: `w[i] = 0.5 - 0.5 cos(2 pi i / n)`.
///
/// The periodic form overlap-adds to a constant at 50% hop, which the
/// spectral-subtraction reconstruction relies on.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Forward FFT of a real signal zero-padded to `n`; returns complex bins.
pub fn real_fft(x: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    fft_plan(n, false).process(&mut buf);
    buf
}

/// Inverse FFT returning the real part scaled by 1/n.
pub fn inverse_fft_real(bins: &mut [Complex<f64>]) -> Vec<f64> {
    let n = bins.len();
    fft_plan(n, true).process(bins);
    bins.iter().map(|c| c.re / n as f64).collect()
}

/// Raw (unnormalized) autocorrelation of `frame` for lags `0..=max_lag`,
/// computed through a zero-padded FFT.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    let n = next_pow2(frame.len() + max_lag + 1);
    let mut bins = real_fft(frame, n);
    for c in bins.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    let ac = inverse_fft_real(&mut bins);
    ac[..=max_lag.min(ac.len() - 1)].to_vec()
}

/// Parabolic interpolation around a discrete peak.
///
/// Given samples `(y_prev, y_peak, y_next)` at offsets -1, 0, +1, returns
/// `(offset, value)` of the fitted parabola's vertex with offset clamped
/// to [-1, 1].
pub fn parabolic_peak(y_prev: f64, y_peak: f64, y_next: f64) -> (f64, f64) {
    let denom = y_prev - 2.0 * y_peak + y_next;
    if denom.abs() < 1e-300 {
        return (0.0, y_peak);
    }
    let mut offset = 0.5 * (y_prev - y_next) / denom;
    if !offset.is_finite() {
        offset = 0.0;
    }
    offset = offset.clamp(-1.0, 1.0);
    let value = y_peak - 0.25 * (y_prev - y_next) * offset;
    (offset, value)
}

/// Mean of a slice (0 for empty input).
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Population standard deviation (0 for fewer than two samples).
pub fn std_pop(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Sample standard deviation with n-1 denominator (0 for fewer than two samples).
pub fn std_sample(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hann_overlap_adds_to_one_at_half_hop() {
        let n = 64;
        let w = hann(n);
        for i in 0..n / 2 {
            assert!((w[i] + w[i + n / 2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_direct_sum() {
        let frame: Vec<f64> = (0..50).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
        let ac = autocorrelation(&frame, 10);
        for lag in 0..=10 {
            let direct: f64 = (0..frame.len() - lag).map(|t| frame[t] * frame[t + lag]).sum();
            assert!(
                (ac[lag] - direct).abs() < 1e-9,
                "lag {lag}: fft {} vs direct {direct}",
                ac[lag]
            );
        }
    }

    #[test]
    fn parabolic_peak_recovers_true_vertex() {
        // y = 3 - 2(x-0.3)^2 sampled at -1, 0, 1
        let f = |x: f64| 3.0 - 2.0 * (x - 0.3) * (x - 0.3);
        let (off, val) = parabolic_peak(f(-1.0), f(0.0), f(1.0));
        assert!((off - 0.3).abs() < 1e-12);
        assert!((val - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fft_plan_cache_is_shared() {
        let a = fft_plan(256, false);
        let b = fft_plan(256, false);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
