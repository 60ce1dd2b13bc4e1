use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{frames, hamming, magnitude_spectrum, pre_emphasis, samples_for, ScalarTrack, HOP_S, WIN_S};
use crate::corpus::Waveform;
#[allow(unused_imports)]
use crate::prelude::*;

pub const N_FILTERS: usize = 26;
pub const N_FFT: usize = 512;
const MEL_HIGH_HZ: f64 = 8000.0;
const LOG_FLOOR: f64 = 1e-10;
/// Cepstral coefficient emitted as the scalar MFCC series.
pub const SCALAR_COEFF: usize = 1;

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// `n_filters` triangular filters on the mel scale between 0 Hz and
/// `min(8 kHz, rate/2)`, one weight row per filter over the `n_fft/2 + 1` bins.
pub fn mel_filterbank(n_filters: usize, n_fft: usize, rate: f64) -> Vec<Vec<f64>> {
    let high = MEL_HIGH_HZ.min(rate / 2.0);
    let top = hz_to_mel(high);
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_filters + 1) as f64))
        .collect();
    (0..n_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..=n_fft / 2)
                .map(|k| {
                    let f = k as f64 * rate / n_fft as f64;
                    if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// DCT-II of the log mel energies of one (already pre-emphasized) frame.
pub fn mfcc_frame(frame: &[f64], bank: &[Vec<f64>]) -> Vec<f64> {
    let win = hamming(frame.len());
    let windowed: Vec<f64> = frame.iter().zip(&win).map(|(x, w)| x * w).collect();
    let spectrum = magnitude_spectrum(&windowed, N_FFT);
    let log_energy: Vec<f64> = bank
        .iter()
        .map(|weights| {
            let e: f64 = weights.iter().zip(&spectrum).map(|(w, s)| w * s).sum();
            e.max(LOG_FLOOR).ln()
        })
        .collect();
    let m = log_energy.len() as f64;
    (0..log_energy.len())
        .map(|k| {
            log_energy
                .iter()
                .enumerate()
                .map(|(j, &e)| e * (PI * k as f64 * (j as f64 + 0.5) / m).cos())
                .sum()
        })
        .collect()
}

/// Per-frame cepstral coefficient c1 (pre-emphasis 0.97, 25 ms Hamming,
/// 10 ms hop, 26 mel filters). Every frame is valid.
pub fn mfcc_scalar_track(w: &Waveform) -> ScalarTrack {
    let x = pre_emphasis(w.samples(), 0.97);
    let bank = mel_filterbank(N_FILTERS, N_FFT, f64::from(w.rate()));
    let win = samples_for(WIN_S, w.rate());
    let hop = samples_for(HOP_S, w.rate());
    let values = frames(x.len(), win, hop)
        .map(|(s, len)| mfcc_frame(&x[s..s + len], &bank)[SCALAR_COEFF])
        .collect();
    ScalarTrack::dense(values, HOP_S, WIN_S)
}
