//! Limited-memory BFGS with the two-loop recursion and Armijo backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::linalg::{all_finite, axpy, dot, norm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbfgsConfig {
    /// Number of stored (s, y) pairs.
    pub history: usize,
    /// Multiplier applied to the initial trial step of every line search.
    pub step_scale: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls to this value.
    pub grad_tol: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            step_scale: 1e-5,
            max_iters: 500,
            grad_tol: 1e-8,
            armijo_c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

struct History {
    cap: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl History {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy <= 1e-12 * norm(&s) * norm(&y) || !sy.is_finite() {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// `-H g` via the two-loop recursion, `H0 = γ I` with γ = sᵀy / yᵀy.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            axpy(-a, y, &mut q);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            axpy(a - b, s, &mut q);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

fn evaluate<F>(f: &mut F, x: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (value, grad) = f(x);
    if grad.len() != x.len() {
        return Err(Error::Shape(format!(
            "objective returned {} gradient entries for {} variables",
            grad.len(),
            x.len()
        )));
    }
    if !value.is_finite() || !all_finite(&grad) {
        return Err(Error::Numeric(format!(
            "non-finite objective or gradient (value {value}, |x| {})",
            norm(x)
        )));
    }
    Ok((value, grad))
}

pub fn lbfgs_minimize<F>(mut objective: F, x0: &[f64], config: &LbfgsConfig) -> Result<LbfgsReport>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    if config.history == 0 || config.step_scale <= 0.0 {
        return Err(Error::Config("lbfgs needs history >= 1 and step_scale > 0".into()));
    }
    let mut x = x0.to_vec();
    let (mut value, mut grad) = evaluate(&mut objective, &x)?;
    let mut history = History {
        cap: config.history,
        pairs: VecDeque::with_capacity(config.history),
    };
    let mut iterations = 0;

    loop {
        let gnorm = norm(&grad);
        if gnorm <= config.grad_tol {
            return Ok(LbfgsReport {
                x,
                value,
                grad_norm: gnorm,
                iterations,
                converged: true,
            });
        }
        if iterations >= config.max_iters {
            return Ok(LbfgsReport {
                x,
                value,
                grad_norm: gnorm,
                iterations,
                converged: false,
            });
        }

        let mut dir = history.direction(&grad);
        let mut slope = dot(&grad, &dir);
        if history.pairs.is_empty() || !(slope < 0.0) {
            history.pairs.clear();
            dir = grad.iter().map(|g| -g / gnorm).collect();
            slope = dot(&grad, &dir);
        }

        let base = if history.pairs.is_empty() { gnorm.min(1.0) } else { 1.0 };
        let mut step = config.step_scale * base;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (tv, tg) = objective(&trial);
            if tv.is_finite() && all_finite(&tg) && tv <= value + config.armijo_c1 * step * slope {
                accepted = Some((trial, tv, tg));
                break;
            }
            step *= config.backtrack;
        }

        iterations += 1;
        let Some((x_new, v_new, g_new)) = accepted else {
            if history.pairs.is_empty() {
                // steepest descent failed too: no further progress possible
                return Ok(LbfgsReport {
                    x,
                    value,
                    grad_norm: gnorm,
                    iterations,
                    converged: false,
                });
            }
            history.pairs.clear();
            continue;
        };
        if g_new.len() != x.len() {
            return Err(Error::Shape("gradient length changed between calls".into()));
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        history.push(s, y);
        x = x_new;
        value = v_new;
        grad = g_new;
    }
}
