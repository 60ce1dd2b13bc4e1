//! Framed scalar tracks computed from a waveform.
//!
//! Frame geometry is fixed: 25 ms analysis windows (40 ms for F0) advanced
//! by 10 ms. A signal shorter than one window yields a single frame that
//! spans the whole signal.

mod audibility;
mod fft;
mod filter;
mod formant;
mod intensity;
mod lpc;
mod mfcc;
mod pitch;

use alloc::vec::Vec;
#[allow(unused_imports)]
use crate::prelude::*;

pub use audibility::{audibility, AudibilitySegmentation, Run, MIN_RUN_FRAMES};
pub use fft::{fft_in_place, magnitude_spectrum};
pub use filter::{Band, Biquad};
pub use formant::{formant_tracks, FormantTracks};
pub use intensity::{band_intensity_track, frame_db, intensity_track, DB_FLOOR};
pub use lpc::{autocorrelation, levinson_durbin, polynomial_roots};
pub use mfcc::{mel_filterbank, mfcc_frame, mfcc_scalar_track};
pub use pitch::{f0_track, F0_MAX_HZ, F0_MIN_HZ, VOICING_THRESHOLD};

pub const HOP_S: f64 = 0.010;
pub const WIN_S: f64 = 0.025;
pub const F0_WIN_S: f64 = 0.040;

/// Per-frame values plus a validity mask (voiced / defined).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrack {
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub hop_s: f64,
    pub win_s: f64,
}

impl ScalarTrack {
    /// A track whose frames are all valid.
    pub fn dense(values: Vec<f64>, hop_s: f64, win_s: f64) -> Self {
        let valid = alloc::vec![true; values.len()];
        Self {
            values,
            valid,
            hop_s,
            win_s,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// `(frame index, value)` for every valid frame.
    pub fn valid_points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.valid)
            .enumerate()
            .filter(|(_, (_, &ok))| ok)
            .map(|(i, (&v, _))| (i, v))
    }

    pub fn valid_values(&self) -> Vec<f64> {
        self.valid_points().map(|(_, v)| v).collect()
    }
}

/// Number of frames of `win` samples advanced by `hop` over `n` samples.
pub fn frame_count(n: usize, win: usize, hop: usize) -> usize {
    if n <= win {
        1
    } else {
        (n - win) / hop + 1
    }
}

/// Start offsets and lengths of each analysis frame.
pub(crate) fn frames(n: usize, win: usize, hop: usize) -> impl Iterator<Item = (usize, usize)> {
    let count = frame_count(n, win, hop);
    (0..count).map(move |i| {
        let start = i * hop;
        (start, win.min(n - start))
    })
}

pub(crate) fn samples_for(seconds: f64, rate: u32) -> usize {
    (seconds * f64::from(rate)).round() as usize
}

pub(crate) fn hamming(len: usize) -> Vec<f64> {
    use core::f64::consts::PI;
    if len == 1 {
        return alloc::vec![1.0];
    }
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

pub(crate) fn pre_emphasis(x: &[f64], coeff: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for (i, &s) in x.iter().enumerate() {
        out.push(if i == 0 { s } else { s - coeff * x[i - 1] });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count_arithmetic() {
        assert_eq!(frame_count(16000, 400, 160), 98);
        assert_eq!(frame_count(16000, 640, 160), 97);
        assert_eq!(frame_count(399, 400, 160), 1);
        assert_eq!(frame_count(400, 400, 160), 1);
        assert_eq!(frame_count(560, 400, 160), 2);
    }

    #[test]
    fn short_signal_frame_spans_signal() {
        let f: Vec<_> = frames(100, 400, 160).collect();
        assert_eq!(f, [(0, 100)]);
    }

    #[test]
    fn hamming_endpoints() {
        let w = hamming(400);
        assert!((w[0] - 0.08).abs() < 1e-12);
        assert!((w[399] - 0.08).abs() < 1e-12);
    }
}
