//! LPC formant tracking on voiced frames.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{autocorrelation, hamming, levinson_durbin, polynomial_roots, pre_emphasis, samples_for, ScalarTrack, WIN_S};
use crate::corpus::Waveform;
#[allow(unused_imports)]
use crate::prelude::*;

pub const LPC_ORDER: usize = 12;
pub const MAX_BANDWIDTH_HZ: f64 = 400.0;
pub const MIN_FORMANT_HZ: f64 = 90.0;
pub const MAX_FORMANT_HZ: f64 = 5500.0;

/// F1..F3 on the F0 track's frame grid and voicing mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FormantTracks {
    pub f1: ScalarTrack,
    pub f2: ScalarTrack,
    pub f3: ScalarTrack,
}

/// Candidate resonances `(frequency, bandwidth)` of one frame, ascending by
/// frequency, after the bandwidth and frequency-range filters.
pub fn frame_formants(frame: &[f64], rate: f64) -> Vec<(f64, f64)> {
    let win = hamming(frame.len());
    let x: Vec<f64> = frame.iter().zip(&win).map(|(s, w)| s * w).collect();
    let r = autocorrelation(&x, LPC_ORDER);
    let Some((a, _)) = levinson_durbin(&r, LPC_ORDER) else {
        return Vec::new();
    };
    let mut found: Vec<(f64, f64)> = polynomial_roots(&a)
        .into_iter()
        .filter(|z| z.im > 0.0)
        .map(|z| {
            let freq = z.arg() * rate / (2.0 * PI);
            let bw = -(rate / PI) * z.norm().ln();
            (freq, bw)
        })
        .filter(|&(f, bw)| bw < MAX_BANDWIDTH_HZ && f > MIN_FORMANT_HZ && f < MAX_FORMANT_HZ)
        .collect();
    found.sort_by(|p, q| p.0.total_cmp(&q.0));
    found.dedup_by(|p, q| p.0 <= q.0);
    found
}

/// The three lowest candidates, or `None` when fewer than three survive.
pub fn first_three(found: &[(f64, f64)]) -> Option<[f64; 3]> {
    match found {
        [a, b, c, ..] => Some([a.0, b.0, c.0]),
        _ => None,
    }
}

/// Formants for every voiced frame of `f0`, analysed over a 25 ms window
/// centred on that frame. A frame with fewer than three surviving
/// resonances is invalid in all three tracks.
pub fn formant_tracks(w: &Waveform, f0: &ScalarTrack) -> FormantTracks {
    let rate = f64::from(w.rate());
    let x = pre_emphasis(w.samples(), 0.97);
    let win = samples_for(WIN_S, w.rate());
    let hop = samples_for(f0.hop_s, w.rate());
    let f0_win = samples_for(f0.win_s, w.rate());
    let n = f0.len();

    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut valid = vec![false; n];
    for (i, _) in f0.valid_points() {
        let centre = i * hop + f0_win / 2;
        let start = centre.saturating_sub(win / 2).min(x.len().saturating_sub(win));
        let end = (start + win).min(x.len());
        if end - start < LPC_ORDER + 1 {
            continue;
        }
        if let Some(three) = first_three(&frame_formants(&x[start..end], rate)) {
            for k in 0..3 {
                out[k][i] = three[k];
            }
            valid[i] = true;
        }
    }
    let [f1, f2, f3] = out;
    let track = |values| ScalarTrack {
        values,
        valid: valid.clone(),
        hop_s: f0.hop_s,
        win_s: WIN_S,
    };
    FormantTracks {
        f1: track(f1),
        f2: track(f2),
        f3: track(f3),
    }
}
