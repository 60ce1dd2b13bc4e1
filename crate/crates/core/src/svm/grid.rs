use alloc::vec::Vec;

use super::{sign, train_smo, SmoConfig, SvmError, SvmProblem};

pub const GRID_C: [f64; 3] = [1.0, 10.0, 100.0];
/// Multiples of `1 / d`.
pub const GRID_GAMMA_SCALE: [f64; 3] = [0.1, 1.0, 10.0];
pub const GRID_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridResult {
    pub c: f64,
    pub gamma: f64,
    /// Fraction of points predicted correctly across the inner folds.
    pub accuracy: f64,
}

/// Inner cross-validation over `GRID_C x GRID_GAMMA_SCALE / d`. Point `i`
/// belongs to fold `i mod 5`. A fold whose training part has one class
/// predicts that class. Ties keep the earlier grid cell.
pub fn grid_search(p: &SvmProblem, cfg: &SmoConfig) -> Result<GridResult, SvmError> {
    let d = p.dim().max(1) as f64;
    let mut best: Option<GridResult> = None;
    for &c in &GRID_C {
        for &scale in &GRID_GAMMA_SCALE {
            let gamma = scale / d;
            let mut correct = 0usize;
            for fold in 0..GRID_FOLDS {
                let (train, test): (Vec<usize>, Vec<usize>) = (0..p.len()).partition(|i| i % GRID_FOLDS != fold);
                if test.is_empty() {
                    continue;
                }
                let pts = train.iter().map(|&i| p.points()[i].clone()).collect();
                let ys: Vec<i8> = train.iter().map(|&i| p.labels()[i]).collect();
                match SvmProblem::new(pts, ys.clone(), c, gamma) {
                    Ok(sub) => {
                        let (m, _) = train_smo(&sub, cfg);
                        for &i in &test {
                            if sign(m.decision_value(&p.points()[i])?) == p.labels()[i] {
                                correct += 1;
                            }
                        }
                    }
                    Err(SvmError::SingleClass) | Err(SvmError::Empty) => {
                        let only = ys.first().copied().unwrap_or(1);
                        correct += test.iter().filter(|&&i| p.labels()[i] == only).count();
                    }
                    Err(e) => return Err(e),
                }
            }
            let accuracy = correct as f64 / p.len() as f64;
            if best.is_none_or(|b| accuracy > b.accuracy) {
                best = Some(GridResult { c, gamma, accuracy });
            }
        }
    }
    best.ok_or(SvmError::Empty)
}
