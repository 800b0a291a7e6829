//! Quasi-Newton (BFGS) minimisation with backtracking line search.

use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{dot, norm};

/// A function to minimise. The default gradient is a forward difference
/// with step `1e-6 · (1 + |x_j|)`.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> Result<f64>;

    /// Gradient at `x`, where `value` is the already computed `f(x)`.
    fn gradient(&mut self, x: &[f64], value: f64) -> Result<Vec<f64>> {
        forward_difference(self, x, value)
    }
}

impl<F: FnMut(&[f64]) -> Result<f64>> Objective for F {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

pub const FD_RELATIVE_STEP: f64 = 1e-6;

pub fn forward_difference<O: Objective + ?Sized>(
    objective: &mut O,
    x: &[f64],
    fx: f64,
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let step = FD_RELATIVE_STEP * (1.0 + x[j].abs());
        probe[j] = x[j] + step;
        let f = objective.value(&probe)?;
        g.push((f - fx) / step);
        probe[j] = x[j];
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop once `‖∇f‖ <` this.
    pub gradient_tolerance: f64,
    /// Stop after three consecutive accepted steps whose relative decrease
    /// is below this.
    pub stall_tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            stall_tolerance: 1e-10,
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    /// The line search found no decrease, or decreases stalled.
    NoProgress,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Objective evaluations outside of gradient computations.
    pub evaluations: usize,
    pub termination: Termination,
    /// Objective at the start point and after every accepted step.
    pub history: Vec<f64>,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

struct Counting<'a, O: ?Sized> {
    inner: &'a mut O,
    evaluations: usize,
}

impl<O: Objective + ?Sized> Objective for Counting<'_, O> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        self.inner.value(x)
    }

    fn gradient(&mut self, x: &[f64], value: f64) -> Result<Vec<f64>> {
        self.inner.gradient(x, value)
    }
}

pub fn minimize<O: Objective + ?Sized>(
    objective: &mut O,
    x0: &[f64],
    options: &BfgsOptions,
) -> Result<Minimum> {
    let mut obj = Counting {
        inner: objective,
        evaluations: 0,
    };
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = obj.value(&x)?;
    let mut g = obj.gradient(&x, fx)?;
    let mut hinv = identity(n);
    let mut history = alloc::vec![fx];
    let mut stalls = 0;
    let mut restarted = true;
    let mut iterations = 0;

    let termination = loop {
        if norm(&g) < options.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= options.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let mut d = neg_mul(&hinv, &g);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hinv = identity(n);
            restarted = true;
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        // after a restart: unit length along -g, otherwise the full
        // quasi-Newton step
        let mut alpha = if restarted {
            1.0 / norm(&d).max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..options.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let ft = obj.value(&trial)?;
            if ft.is_finite() && ft <= fx + options.armijo * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            // minimiser of the quadratic through f(x), the slope and f(trial),
            // kept within [0.1, 0.5] of the rejected step
            alpha = if ft.is_finite() {
                let q = -slope * alpha * alpha / (2.0 * (ft - fx - slope * alpha));
                q.clamp(0.1 * alpha, 0.5 * alpha)
            } else {
                0.5 * alpha
            };
            if alpha * norm(&d) <= f64::EPSILON * (1.0 + norm(&x)) {
                break;
            }
        }
        let Some((x_new, f_new)) = accepted else {
            // one retry along steepest descent before giving up
            if restarted {
                break Termination::NoProgress;
            }
            hinv = identity(n);
            restarted = true;
            iterations -= 1;
            continue;
        };
        let g_new = obj.gradient(&x_new, f_new)?;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if restarted {
                let gamma = sy / dot(&y, &y);
                hinv = identity(n);
                for i in 0..n {
                    hinv[i * n + i] = gamma;
                }
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        restarted = false;

        let decrease = fx - f_new;
        if decrease <= options.stall_tolerance * (1.0 + fx.abs()) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
        if stalls >= 3 {
            break Termination::NoProgress;
        }
    };

    Ok(Minimum {
        x,
        value: fx,
        iterations,
        evaluations: obj.evaluations,
        termination,
        history,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = alloc::vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn neg_mul(h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], g)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
