use alloc::vec::Vec;

use super::{frames, hamming, samples_for, Band, Biquad, ScalarTrack, HOP_S, WIN_S};
use crate::corpus::Waveform;
#[allow(unused_imports)]
use crate::prelude::*;

/// Lowest level any intensity frame reports.
pub const DB_FLOOR: f64 = -80.0;

/// Level of one frame in dB re full scale: the Hamming-weighted RMS
/// `sqrt(sum w²x² / sum w²)`, so a full-scale square wave reads 0 dB.
pub fn frame_db(frame: &[f64], window: &[f64]) -> f64 {
    let (num, den) = frame
        .iter()
        .zip(window)
        .fold((0.0, 0.0), |(n, d), (&x, &w)| (n + w * w * x * x, d + w * w));
    let rms = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    (20.0 * (rms + 1e-10).log10()).max(DB_FLOOR)
}

pub(crate) fn level_track(x: &[f64], rate: u32, win_s: f64) -> ScalarTrack {
    let win = samples_for(win_s, rate);
    let hop = samples_for(HOP_S, rate);
    let values = frames(x.len(), win, hop)
        .map(|(start, len)| frame_db(&x[start..start + len], &hamming(len)))
        .collect::<Vec<_>>();
    ScalarTrack::dense(values, HOP_S, win_s)
}

/// 25 ms / 10 ms frame levels in dB, floored at -80 dB. Every frame is valid.
pub fn intensity_track(w: &Waveform) -> ScalarTrack {
    level_track(w.samples(), w.rate(), WIN_S)
}

/// Intensity of the waveform after a second-order low-pass (250 Hz) or
/// high-pass (1000 Hz) section.
pub fn band_intensity_track(w: &Waveform, band: Band) -> ScalarTrack {
    let filtered = Biquad::design(band, f64::from(w.rate())).apply(w.samples());
    level_track(&filtered, w.rate(), WIN_S)
}
