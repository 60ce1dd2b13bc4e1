//! Normalized-autocorrelation F0 tracking.

use alloc::vec;
use alloc::vec::Vec;

use super::intensity::frame_db;
use super::{frames, hamming, samples_for, ScalarTrack, DB_FLOOR, F0_WIN_S, HOP_S};
use crate::corpus::Waveform;
#[allow(unused_imports)]
use crate::prelude::*;

pub const F0_MIN_HZ: f64 = 50.0;
pub const F0_MAX_HZ: f64 = 500.0;
/// Minimum peak normalized autocorrelation for a voiced frame.
pub const VOICING_THRESHOLD: f64 = 0.45;
/// Frames quieter than the loudest frame by more than this are unvoiced.
pub const VOICING_GATE_DB: f64 = 30.0;
/// Earliest peak within this distance of the best peak wins, which keeps
/// the tracker off sub-harmonics of strongly periodic frames.
const PEAK_SLACK: f64 = 0.03;

/// Normalized autocorrelation of `x` at `lag` over the overlapping part.
fn nacf(x: &[f64], lag: usize, prefix_energy: &[f64]) -> f64 {
    let n = x.len();
    if lag >= n {
        return 0.0;
    }
    let m = n - lag;
    let dot: f64 = x[..m].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
    let e0 = prefix_energy[m];
    let e1 = prefix_energy[n] - prefix_energy[lag];
    let den = (e0 * e1).sqrt();
    if den <= 1e-20 {
        0.0
    } else {
        dot / den
    }
}

/// Peak lag (fractional) and its correlation, if the frame has an interior
/// correlation peak inside the search range.
fn frame_period(frame: &[f64], min_lag: usize, max_lag: usize) -> Option<(f64, f64)> {
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
    let mut prefix = vec![0.0; x.len() + 1];
    for (i, v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v * v;
    }
    let max_lag = max_lag.min(x.len() / 2);
    if max_lag < min_lag + 1 || min_lag == 0 {
        return None;
    }
    let r: Vec<f64> = (min_lag - 1..=max_lag + 1).map(|lag| nacf(&x, lag, &prefix)).collect();
    let at = |lag: usize| r[lag + 1 - min_lag];
    let peaks: Vec<usize> = (min_lag..=max_lag)
        .filter(|&lag| at(lag) > at(lag - 1) && at(lag) >= at(lag + 1))
        .collect();
    let best = peaks.iter().map(|&l| at(l)).fold(f64::NEG_INFINITY, f64::max);
    let lag = *peaks.iter().find(|&&l| at(l) >= best - PEAK_SLACK)?;
    let (a, b, c) = (at(lag - 1), at(lag), at(lag + 1));
    let curvature = a - 2.0 * b + c;
    let shift = if curvature.abs() > 1e-12 {
        (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some((lag as f64 + shift, b))
}

/// 40 ms / 10 ms F0 track. Unvoiced frames carry `valid = false`, value 0.
pub fn f0_track(w: &Waveform) -> ScalarTrack {
    let rate = f64::from(w.rate());
    let win = samples_for(F0_WIN_S, w.rate());
    let hop = samples_for(HOP_S, w.rate());
    let min_lag = (rate / F0_MAX_HZ).ceil() as usize;
    let max_lag = (rate / F0_MIN_HZ).floor() as usize;
    let x = w.samples();

    let spans: Vec<(usize, usize)> = frames(x.len(), win, hop).collect();
    let levels: Vec<f64> = spans
        .iter()
        .map(|&(s, len)| frame_db(&x[s..s + len], &hamming(len)))
        .collect();
    let loudest = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gate = loudest - VOICING_GATE_DB;

    let mut values = vec![0.0; spans.len()];
    let mut valid = vec![false; spans.len()];
    for (i, &(s, len)) in spans.iter().enumerate() {
        if levels[i] <= gate || levels[i] <= DB_FLOOR {
            continue;
        }
        if let Some((lag, peak)) = frame_period(&x[s..s + len], min_lag, max_lag) {
            if peak >= VOICING_THRESHOLD {
                values[i] = (rate / lag).clamp(F0_MIN_HZ, F0_MAX_HZ);
                valid[i] = true;
            }
        }
    }
    ScalarTrack {
        values,
        valid,
        hop_s: HOP_S,
        win_s: F0_WIN_S,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, amp: f64, secs: f64) -> Waveform {
        let n = (16000.0 * secs) as usize;
        Waveform::new(
            (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / 16000.0).sin()).collect(),
            16000,
        )
        .unwrap()
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    #[test]
    fn sine_220() {
        let t = f0_track(&sine(220.0, 0.5, 1.0));
        let voiced = t.valid_values();
        assert!(voiced.len() as f64 / t.len() as f64 >= 0.9);
        assert!((median(voiced) - 220.0).abs() <= 5.0);
    }

    #[test]
    fn tone_sweep_within_two_percent() {
        for f in (80..=400).step_by(20) {
            let f = f as f64;
            let t = f0_track(&sine(f, 0.3, 0.5));
            let voiced = t.valid_values();
            assert!(!voiced.is_empty(), "{f} Hz unvoiced");
            let good = voiced.iter().filter(|&&v| (v - f).abs() <= 0.02 * f).count();
            assert!(good as f64 >= 0.9 * voiced.len() as f64, "{f} Hz: {good}/{}", voiced.len());
        }
    }

    #[test]
    fn noise_is_mostly_unvoiced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Uniform noise with RMS 0.5 (-6 dBFS).
        let a = 0.5 * 3f64.sqrt();
        let x: Vec<f64> = (0..16000).map(|_| rng.random_range(-a..a).clamp(-1.0, 1.0)).collect();
        let t = f0_track(&Waveform::new(x, 16000).unwrap());
        assert!(t.valid_count() as f64 / t.len() as f64 <= 0.2);
    }

    #[test]
    fn silence_is_unvoiced() {
        let t = f0_track(&Waveform::new(vec![0.0; 8000], 16000).unwrap());
        assert_eq!(t.valid_count(), 0);
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn voiced_values_in_search_range() {
        let t = f0_track(&sine(130.0, 0.4, 0.6));
        assert!(t.valid_points().all(|(_, v)| (F0_MIN_HZ..=F0_MAX_HZ).contains(&v)));
    }
}
