//! Sequential minimal optimization with second-order working-set selection.
//!
//! Minimizes `f(a) = a'Qa / 2 - sum a` subject to `0 <= a_i <= C` and
//! `y'a = 0`, where `Q_ij = y_i y_j K(x_i, x_j)`. The gradient `G = Qa - 1`
//! is maintained incrementally. Index scans run in order and only a strictly
//! better candidate replaces the current one, so the path is deterministic.
//! Labels are oriented so the first point is positive before solving; the
//! dual is unchanged by a global flip, so negating every label yields
//! exactly negated decision values.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{rbf, SvmModel, SvmProblem};
#[allow(unused_imports)]
use crate::prelude::*;

/// Multipliers at or below this are dropped from the model.
pub const ALPHA_EPS: f64 = 1e-9;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    /// Iteration cap, in units of `max(n, 10)` iterations.
    pub max_passes: usize,
    /// Memory budget for cached kernel rows.
    pub cache_bytes: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_passes: 200,
            cache_bytes: 256 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub converged: bool,
    pub iterations: usize,
    /// Maximal violating-pair gap at exit.
    pub kkt_gap: f64,
    /// Dual objective `sum a - a'Qa / 2`.
    pub objective: f64,
    pub n_support: usize,
}

struct KernelRows<'a> {
    problem: &'a SvmProblem,
    rows: Vec<Option<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(problem: &'a SvmProblem, cache_bytes: usize) -> Self {
        let n = problem.len();
        let capacity = (cache_bytes / (n * 8).max(1)).clamp(2, n.max(2));
        Self {
            problem,
            rows: vec![None; n],
            order: VecDeque::new(),
            capacity,
        }
    }

    /// Row `i` of the kernel matrix (not of `Q`).
    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            if self.order.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.rows[old] = None;
                }
            }
            let p = self.problem;
            let xi = &p.points()[i];
            self.rows[i] = Some(p.points().iter().map(|xj| rbf(xi, xj, p.gamma())).collect());
            self.order.push_back(i);
        }
        self.rows[i].as_deref().unwrap_or(&[])
    }
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    // f(a) = sum a_i (G_i - 1) / 2; the dual is -f.
    -alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>() / 2.0
}

/// Solves the dual and returns the pruned model with diagnostics. Hitting
/// the iteration cap still yields a model; `converged` is then false.
pub fn train_smo(p: &SvmProblem, cfg: &SmoConfig) -> (SvmModel, TrainReport) {
    let n = p.len();
    let c = p.c();
    let orient = if p.labels()[0] < 0 { -1.0 } else { 1.0 };
    let y: Vec<f64> = p.labels().iter().map(|&l| orient * f64::from(l)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache = KernelRows::new(p, cfg.cache_bytes);
    let max_iter = cfg.max_passes.saturating_mul(n.max(10));

    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut gap;
    let mut converged = false;
    loop {
        // Maximal violator i in I_up by -y_t G_t.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel: Option<usize> = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
            if in_up && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            gap = 0.0;
            converged = true;
            break;
        };

        // Partner j in I_low minimizing the second-order objective decrease.
        let k_i = cache.row(i).to_vec();
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel: Option<usize> = None;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let diff = gmax + yg;
            if diff > 0.0 {
                let quad = 2.0 - 2.0 * k_i[t];
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(diff * diff) / quad;
                if obj < best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        gap = gmax + gmax2;
        let Some(j) = j_sel.filter(|_| gap >= cfg.tol) else {
            converged = true;
            break;
        };
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let k_ij = k_i[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (2.0 + 2.0 * (y[i] * y[j] * k_ij)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * (y[i] * y[j] * k_ij)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let k_j = cache.row(j).to_vec();
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k_i[t] * di + y[j] * k_j[t] * dj);
        }
    }

    // Bias from free multipliers, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > ALPHA_EPS {
            support_vectors.push(p.points()[t].clone());
            coefficients.push(alpha[t] * f64::from(p.labels()[t]));
        }
    }
    let report = TrainReport {
        converged,
        iterations,
        kkt_gap: gap,
        objective: dual_objective(&alpha, &grad),
        n_support: support_vectors.len(),
    };
    let model = SvmModel {
        support_vectors,
        coefficients,
        bias: -orient * rho,
        gamma: p.gamma(),
    };
    (model, report)
}
