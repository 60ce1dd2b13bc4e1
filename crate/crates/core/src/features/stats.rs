//! Series statistics shared by every track-derived feature block.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::dsp::ScalarTrack;

pub const N_STATS: usize = 10;
pub const STAT_NAMES: [&str; N_STATS] = [
    "mean",
    "max",
    "min",
    "range",
    "var",
    "med",
    "q1",
    "q3",
    "iqr",
    "mean abs derivative",
];

/// Local extrema of a track's valid-frame subsequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extrema {
    pub minima: Vec<f64>,
    pub maxima: Vec<f64>,
    /// Seconds between consecutive extrema of either kind.
    pub durations: Vec<f64>,
}

/// Strict interior extrema over the valid frames. A plateau counts once, at
/// its first frame; gaps between extrema use original frame indices.
pub fn extrema_series(track: &ScalarTrack) -> Extrema {
    // Collapse plateaus to their first point.
    let mut points: Vec<(usize, f64)> = Vec::new();
    for (i, v) in track.valid_points() {
        if points.last().map_or(true, |&(_, last)| last != v) {
            points.push((i, v));
        }
    }
    let mut out = Extrema::default();
    let mut last_extremum: Option<usize> = None;
    for w in points.windows(3) {
        let (prev, (idx, cur), next) = (w[0].1, w[1], w[2].1);
        let is_max = prev < cur && cur > next;
        let is_min = prev > cur && cur < next;
        if !(is_max || is_min) {
            continue;
        }
        if is_max {
            out.maxima.push(cur);
        } else {
            out.minima.push(cur);
        }
        if let Some(last) = last_extremum {
            out.durations.push((idx - last) as f64 * track.hop_s);
        }
        last_extremum = Some(idx);
    }
    out
}

/// Quantile by linear interpolation between closest ranks of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => 0.0,
        1 => sorted[0],
        n => {
            let pos = p * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// mean, max, min, range, var, median, Q1, Q3, IQR and the mean absolute
/// first difference. Empty and singleton series give all zeros.
pub fn series_statistics(series: &[f64]) -> [f64; N_STATS] {
    if series.len() < 2 {
        return [0.0; N_STATS];
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let (q1, med, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let deriv = series.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>() / (series.len() - 1) as f64;
    [mean(series), max, min, max - min, variance(series), med, q1, q3, q3 - q1, deriv]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(values: &[f64]) -> ScalarTrack {
        ScalarTrack::dense(values.to_vec(), 0.01, 0.025)
    }

    #[test]
    fn alternating_extrema() {
        let e = extrema_series(&track(&[0.0, 1.0, 0.0, 1.0, 0.0]));
        assert_eq!(e.maxima, [1.0, 1.0]);
        assert_eq!(e.minima, [0.0]);
        assert_eq!(e.durations.len(), 2);
        assert!(e.durations.iter().all(|d| (d - 0.01).abs() < 1e-15));
    }

    #[test]
    fn monotone_has_no_extrema() {
        assert_eq!(extrema_series(&track(&[1.0, 2.0, 3.0, 3.0, 4.0])), Extrema::default());
        assert_eq!(extrema_series(&track(&[1.0, 2.0])), Extrema::default());
    }

    #[test]
    fn plateau_counts_once() {
        let e = extrema_series(&track(&[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(e.maxima, [1.0]);
        assert!(e.minima.is_empty());
        assert!(e.durations.is_empty());
    }

    #[test]
    fn invalid_frames_are_skipped_but_time_is_kept() {
        let mut t = track(&[0.0, 9.0, 1.0, 0.0, 5.0, 0.5, 1.0]);
        t.valid[1] = false;
        t.valid[4] = false;
        // Valid subsequence 0, 1, 0, 0.5, 1 at frames 0, 2, 3, 5, 6.
        let e = extrema_series(&t);
        assert_eq!(e.maxima, [1.0]);
        assert_eq!(e.minima, [0.0]);
        assert!((e.durations[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn stats_of_one_to_four() {
        let s = series_statistics(&[1.0, 2.0, 3.0, 4.0]);
        let expected = [2.5, 4.0, 1.0, 3.0, 1.25, 2.5, 1.75, 3.25, 1.5, 1.0];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn degenerate_stats() {
        assert_eq!(series_statistics(&[]), [0.0; 10]);
        assert_eq!(series_statistics(&[3.0]), [0.0; 10]);
        let c = 2.5;
        assert_eq!(series_statistics(&[c, c, c]), [c, c, c, 0.0, 0.0, c, c, c, 0.0, 0.0]);
    }

    #[test]
    fn derivative_uses_series_order() {
        // Sorted order would give 1.0; the series order gives (2 + 2) / 2.
        let s = series_statistics(&[1.0, 3.0, 1.0]);
        assert!((s[9] - 2.0).abs() < 1e-15);
    }
}
