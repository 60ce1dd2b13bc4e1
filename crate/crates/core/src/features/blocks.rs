use alloc::vec::Vec;

use super::stats::{extrema_series, mean, series_statistics, variance, N_STATS};
use crate::dsp::{AudibilitySegmentation, FormantTracks, ScalarTrack};
#[allow(unused_imports)]
use crate::prelude::*;

pub const TRACK_BLOCK_LEN: usize = 4 * N_STATS;
pub const F0_BLOCK_LEN: usize = TRACK_BLOCK_LEN + 4;
pub const FORMANT_BLOCK_LEN: usize = 15;
pub const DURATION_BLOCK_LEN: usize = 23;
pub const PERTURBATION_BLOCK_LEN: usize = 6;

/// Frames per jitter/shimmer PQ window.
pub const PQ_WINDOW: usize = 5;

/// Statistics of the minima, maxima, inter-extremum durations and the valid
/// values, in that order.
pub fn track_feature_block(track: &ScalarTrack) -> Vec<f64> {
    let e = extrema_series(track);
    let mut out = Vec::with_capacity(TRACK_BLOCK_LEN);
    for series in [&e.minima, &e.maxima, &e.durations, &track.valid_values()] {
        out.extend_from_slice(&series_statistics(series));
    }
    out
}

/// Track block plus skewness, fraction above mean and the ranges above and
/// below the mean of the voiced values.
pub fn f0_feature_block(f0: &ScalarTrack) -> Vec<f64> {
    let mut out = track_feature_block(f0);
    let v = f0.valid_values();
    if v.is_empty() {
        out.extend_from_slice(&[0.0; 4]);
        return out;
    }
    let m = mean(&v);
    let sd = variance(&v).sqrt();
    let skew = if v.len() < 2 || sd == 0.0 {
        0.0
    } else {
        v.iter().map(|x| ((x - m) / sd).powi(3)).sum::<f64>() / v.len() as f64
    };
    let above = v.iter().filter(|&&x| x > m).count() as f64 / v.len() as f64;
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    out.extend_from_slice(&[skew, above, max - m, m - min]);
    out
}

/// mean, std, max, min and range of F1..F3, grouped by statistic.
pub fn formant_feature_block(ft: &FormantTracks) -> Vec<f64> {
    let per: Vec<[f64; 5]> = [&ft.f1, &ft.f2, &ft.f3]
        .iter()
        .map(|t| {
            let v = t.valid_values();
            if v.is_empty() {
                return [0.0; 5];
            }
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            [mean(&v), variance(&v).sqrt(), max, min, max - min]
        })
        .collect();
    (0..5).flat_map(|s| per.iter().map(move |f| f[s])).collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn run_stats(durations: &[f64]) -> [f64; 4] {
    if durations.is_empty() {
        return [0.0; 4];
    }
    let max = durations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = durations.iter().copied().fold(f64::INFINITY, f64::min);
    [mean(durations), max, min, variance(durations).sqrt()]
}

/// The 23 audible/inaudible run measures. Zero denominators give 0.
pub fn duration_feature_block(seg: &AudibilitySegmentation, hop_s: f64) -> Vec<f64> {
    let dur = |audible: bool| -> Vec<f64> {
        seg.runs
            .iter()
            .filter(|r| r.audible == audible)
            .map(|r| r.len() as f64 * hop_s)
            .collect()
    };
    let frames = |audible: bool| -> f64 {
        seg.runs.iter().filter(|r| r.audible == audible).map(|r| r.len()).sum::<usize>() as f64
    };
    let (aud, inaud) = (dur(true), dur(false));
    let (a_stats, i_stats) = (run_stats(&aud), run_stats(&inaud));
    let (n_aud, n_inaud) = (aud.len() as f64, inaud.len() as f64);
    let (f_aud, f_inaud) = (frames(true), frames(false));
    let (d_aud, d_inaud) = (aud.iter().sum::<f64>(), inaud.iter().sum::<f64>());
    let total_dur = d_aud + d_inaud;

    let mut out = Vec::with_capacity(DURATION_BLOCK_LEN);
    out.extend_from_slice(&a_stats);
    out.extend_from_slice(&i_stats);
    out.extend_from_slice(&[n_aud, n_inaud, f_aud, f_inaud, a_stats[1], i_stats[1]]);
    out.extend_from_slice(&[
        ratio(f_aud, f_inaud),
        ratio(n_aud, n_inaud),
        ratio(f_aud, f_aud + f_inaud),
        ratio(n_aud, n_aud + n_inaud),
        ratio(f_aud, n_aud),
        ratio(d_aud, d_inaud),
        ratio(d_aud, total_dur),
        ratio(d_inaud, total_dur),
        ratio(a_stats[0], i_stats[0]),
    ]);
    out
}

/// Period-quotient and period-factor measures over a pooled set of runs.
fn perturbation(runs: &[Vec<f64>]) -> [f64; 3] {
    let long: Vec<&Vec<f64>> = runs.iter().filter(|r| r.len() >= 2).collect();
    let pooled: Vec<f64> = long.iter().flat_map(|r| r.iter().copied()).collect();
    let diffs: Vec<f64> = long
        .iter()
        .flat_map(|r| r.windows(2).map(|p| (p[1] - p[0]).abs()))
        .collect();
    let pf = ratio(mean(&diffs), mean(&pooled));

    let mut pq_max = f64::NEG_INFINITY;
    let mut pq_min = f64::INFINITY;
    for run in runs {
        for w in run.windows(PQ_WINDOW) {
            let m = mean(w);
            let pq = ratio(w.iter().map(|x| (x - m).abs()).sum::<f64>() / w.len() as f64, m);
            pq_max = pq_max.max(pq);
            pq_min = pq_min.min(pq);
        }
    }
    if pq_max == f64::NEG_INFINITY {
        return [pf, 0.0, 0.0];
    }
    [pf, pq_max, pq_min]
}

fn voiced_runs(f0: &ScalarTrack) -> Vec<Vec<usize>> {
    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, &ok) in f0.valid.iter().enumerate() {
        if ok {
            current.push(i);
        } else if !current.is_empty() {
            runs.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs
}

/// Intensity frame whose centre is nearest the centre of F0 frame `i`.
fn intensity_frame(i: usize, f0: &ScalarTrack, intensity: &ScalarTrack) -> usize {
    let centre = i as f64 * f0.hop_s + f0.win_s / 2.0;
    let j = ((centre - intensity.win_s / 2.0) / intensity.hop_s).round().max(0.0) as usize;
    j.min(intensity.len().saturating_sub(1))
}

/// jitter_PF, max/min jitter_PQ, shimmer_PF, max/min shimmer_PQ.
pub fn perturbation_block(f0: &ScalarTrack, intensity: &ScalarTrack) -> Vec<f64> {
    let runs = voiced_runs(f0);
    let periods: Vec<Vec<f64>> = runs
        .iter()
        .map(|r| r.iter().map(|&i| 1.0 / f0.values[i]).collect())
        .collect();
    let amplitudes: Vec<Vec<f64>> = if intensity.is_empty() {
        Vec::new()
    } else {
        runs.iter()
            .map(|r| {
                r.iter()
                    .map(|&i| 10f64.powf(intensity.values[intensity_frame(i, f0, intensity)] / 20.0))
                    .collect()
            })
            .collect()
    };
    let mut out = Vec::with_capacity(PERTURBATION_BLOCK_LEN);
    out.extend_from_slice(&perturbation(&periods));
    out.extend_from_slice(&perturbation(&amplitudes));
    out
}
