use alloc::vec::Vec;

use super::ScalarTrack;

/// Frames quieter than the loudest frame by more than this are inaudible.
pub const AUDIBLE_RANGE_DB: f64 = 30.0;
/// Runs shorter than this are absorbed by a neighbour.
pub const MIN_RUN_FRAMES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub audible: bool,
}

impl Run {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Alternating audible/inaudible runs that tile `[0, n_frames)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudibilitySegmentation {
    pub runs: Vec<Run>,
}

impl AudibilitySegmentation {
    /// Run-length encodes `mask` without any merging.
    pub fn from_mask(mask: &[bool]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for (i, &a) in mask.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if r.audible == a => r.end = i + 1,
                _ => runs.push(Run {
                    start: i,
                    end: i + 1,
                    audible: a,
                }),
            }
        }
        Self { runs }
    }

    pub fn n_frames(&self) -> usize {
        self.runs.last().map_or(0, |r| r.end)
    }

    pub fn audible_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| r.audible)
    }

    /// Single left-to-right pass: a run shorter than `min_len` joins the
    /// run before it, or the run after it when it is first. Equal-audibility
    /// neighbours are coalesced as they meet.
    pub fn merge_short_runs(&self, min_len: usize) -> Self {
        if self.runs.len() <= 1 {
            return self.clone();
        }
        let mut out: Vec<Run> = Vec::with_capacity(self.runs.len());
        let mut pending_start: Option<usize> = None;
        for run in &self.runs {
            let mut run = *run;
            if let Some(s) = pending_start.take() {
                run.start = s;
            }
            if run.len() < min_len {
                match out.last_mut() {
                    Some(prev) => prev.end = run.end,
                    None => pending_start = Some(run.start),
                }
                continue;
            }
            match out.last_mut() {
                Some(prev) if prev.audible == run.audible => prev.end = run.end,
                _ => out.push(run),
            }
        }
        if let Some(s) = pending_start {
            // Everything was short: keep one run with the first run's type.
            out.push(Run {
                start: s,
                end: self.n_frames(),
                audible: self.runs[0].audible,
            });
        }
        Self { runs: out }
    }
}

/// Marks frames within 30 dB of the loudest frame as audible, then merges
/// runs shorter than three frames.
pub fn audibility(intensity: &ScalarTrack) -> AudibilitySegmentation {
    let loudest = intensity.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mask: Vec<bool> = intensity
        .values
        .iter()
        .map(|&v| v > loudest - AUDIBLE_RANGE_DB)
        .collect();
    AudibilitySegmentation::from_mask(&mask).merge_short_runs(MIN_RUN_FRAMES)
}
