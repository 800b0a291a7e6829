//! Dynamic-programming search for the warping that maximises
//! `⟨target, (moving ∘ γ) √γ̇⟩`.
//!
//! The search space is the set of piecewise-linear warpings whose breakpoints
//! lie on the `n × n` lattice of grid nodes, with each segment a step
//! `(di, dj)` taken from the coprime pairs with `1 ≤ di, dj ≤ max_step`.
//! On a segment from node `(i, j)` to `(k, l)` the warping is linear with
//! slope `s = dj / di`. The segment is sampled at `L + 1` equispaced points,
//! `L = max(di, dj)`, so every grid node on either axis is visited, and its
//! contribution to the objective is
//!
//! ```text
//! (h di / L) √s Σ_{r=0..L} w_r · target(i + r di / L) · moving(j + r dj / L)
//! ```
//!
//! with trapezoid weights `w_0 = w_L = ½` and both functions interpolated
//! linearly between nodes. The path objective is the sum of its segments and
//! the recursion maximises it exactly over all such paths.

use alloc::vec::Vec;

use super::Warping;
use crate::error::{invalid, Result};
use crate::grid::DiscretizedFunction;

pub const DEFAULT_MAX_STEP: usize = 7;

/// Relative window inside which two path objectives count as tied.
const TIE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    /// Largest step along either axis.
    pub max_step: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

/// Result of a dynamic-programming alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub warping: Warping,
    /// Lattice objective of the optimal path.
    pub objective: f64,
    /// Lattice nodes `(target index, moving index)` visited by the path.
    pub path: Vec<(usize, usize)>,
    /// Set when `moving` is identically zero and the identity was returned.
    pub zero_moving: bool,
}

/// All coprime steps `(di, dj)` with both components in `1..=max_step`.
pub fn step_set(max_step: usize) -> Vec<(usize, usize)> {
    let mut steps = Vec::new();
    for di in 1..=max_step {
        for dj in 1..=max_step {
            if gcd(di, dj) == 1 {
                steps.push((di, dj));
            }
        }
    }
    steps
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

struct Step {
    di: usize,
    dj: usize,
    /// `(di / L) √(dj / di)`.
    scale: f64,
    deviation: u32,
    /// Interior samples: target floor and fraction, moving floor and
    /// fraction, as offsets from the segment start.
    interior: Vec<(usize, f64, usize, f64)>,
}

impl Step {
    fn new(di: usize, dj: usize) -> Self {
        let len = di.max(dj);
        let split = |r: usize, d: usize| ((r * d) / len, ((r * d) % len) as f64 / len as f64);
        let interior = (1..len)
            .map(|r| {
                let (ti, tf) = split(r, di);
                let (mj, mf) = split(r, dj);
                (ti, tf, mj, mf)
            })
            .collect();
        Step {
            di,
            dj,
            scale: di as f64 / len as f64 * libm::sqrt(dj as f64 / di as f64),
            deviation: di.abs_diff(dj) as u32,
            interior,
        }
    }

    /// Filter coefficients over `moving[j..=j + dj]` for a segment starting
    /// at target index `i`.
    fn coefficients(&self, t: &[f64], i: usize, h: f64, out: &mut [f64]) {
        let out = &mut out[..=self.dj];
        out.iter_mut().for_each(|c| *c = 0.0);
        out[0] = 0.5 * t[i];
        out[self.dj] += 0.5 * t[i + self.di];
        for &(ti, tf, mj, mf) in &self.interior {
            let w = if tf != 0.0 {
                t[i + ti] * (1.0 - tf) + t[i + ti + 1] * tf
            } else {
                t[i + ti]
            };
            out[mj] += w * (1.0 - mf);
            if mf != 0.0 {
                out[mj + 1] += w * mf;
            }
        }
        let scale = h * self.scale;
        out.iter_mut().for_each(|c| *c *= scale);
    }
}

/// Lattice objective of an explicit node path, evaluated segment by segment.
pub fn path_objective(
    target: &DiscretizedFunction,
    moving: &DiscretizedFunction,
    path: &[(usize, usize)],
) -> Result<f64> {
    target.grid().check(&moving.grid())?;
    let h = target.grid().spacing();
    let (t, m) = (target.values(), moving.values());
    let mut coef = Vec::new();
    Ok(path
        .windows(2)
        .map(|w| {
            let ((i, j), (k, l)) = (w[0], w[1]);
            let step = Step::new(k - i, l - j);
            coef.resize(step.dj + 1, 0.0);
            step.coefficients(t, i, h, &mut coef);
            coef.iter().zip(&m[j..=l]).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum())
}

/// Aligns `moving` to `target` with the default lattice.
pub fn dp_align(target: &DiscretizedFunction, moving: &DiscretizedFunction) -> Result<Alignment> {
    dp_align_with(target, moving, &DpConfig::default())
}

pub fn dp_align_with(
    target: &DiscretizedFunction,
    moving: &DiscretizedFunction,
    config: &DpConfig,
) -> Result<Alignment> {
    let grid = target.grid();
    grid.check(&moving.grid())?;
    let n = grid.len();
    let h = grid.spacing();
    let t = target.values();
    let m = moving.values();

    if m.iter().all(|v| *v == 0.0) {
        log::warn!("dp_align: moving function is identically zero, returning identity");
        return Ok(Alignment {
            warping: Warping::identity(grid),
            objective: 0.0,
            path: (0..n).map(|k| (k, k)).collect(),
            zero_moving: true,
        });
    }

    let max_step = config.max_step.max(1);
    let steps: Vec<Step> = step_set(max_step)
        .into_iter()
        .map(|(di, dj)| Step::new(di, dj))
        .collect();

    let mut tables = Tables {
        score: alloc::vec![f64::NEG_INFINITY; n * n],
        deviation: alloc::vec![u32::MAX; n * n],
        back: alloc::vec![u8::MAX; n * n],
    };
    tables.score[0] = 0.0;
    tables.deviation[0] = 0;
    match max_step + 1 {
        0..=8 => sweep::<8>(t, m, h, max_step, &steps, &mut tables),
        9..=20 => sweep::<20>(t, m, h, max_step, &steps, &mut tables),
        _ => return Err(invalid("DP max_step must be at most 19")),
    }
    let Tables { score, back, .. } = tables;

    let mut path = Vec::new();
    let (mut k, mut l) = (n - 1, n - 1);
    path.push((k, l));
    while (k, l) != (0, 0) {
        let step = &steps[back[k * n + l] as usize];
        k -= step.di;
        l -= step.dj;
        path.push((k, l));
    }
    path.reverse();

    let mut values = alloc::vec![0.0; n];
    for w in path.windows(2) {
        let ((i, j), (k, l)) = (w[0], w[1]);
        let s = (l - j) as f64 / (k - i) as f64;
        for (r, v) in values[i..=k].iter_mut().enumerate() {
            *v = (j as f64 + r as f64 * s) * h;
        }
    }

    Ok(Alignment {
        warping: Warping::from_parts(grid, values),
        objective: score[n * n - 1],
        path,
        zero_moving: false,
    })
}

/// Fills the score, deviation and back-pointer tables row by row.
///
/// Segment objectives are linear filters of `moving`: a step ending at node
/// `(k, l)` contributes `Σ_q coef[q] · moving[l − dj + q]`. The coefficients
/// depend only on the row and the step, so each row tabulates them once,
/// right-aligned in `W`-wide blocks, and every node dots them against the
/// `W` moving values ending at `l`.
fn sweep<const W: usize>(
    t: &[f64],
    m: &[f64],
    h: f64,
    max_step: usize,
    steps: &[Step],
    tables: &mut Tables,
) {
    let n = t.len();
    let mut coef = alloc::vec![[0.0f64; W]; steps.len()];
    let mut scratch = [0.0f64; W];
    // moving values padded with W − 1 leading zeros
    let mut padded = alloc::vec![0.0f64; W - 1];
    padded.extend_from_slice(m);
    for k in 1..n {
        // nodes (k, l) reachable from the origin and able to reach the end
        let rem = n - 1 - k;
        let l_lo = k
            .div_ceil(max_step)
            .max(1)
            .max((n - 1).saturating_sub(rem * max_step));
        let l_hi = (k * max_step)
            .min(n - 1)
            .min(n - 1 - rem.div_ceil(max_step));
        for (s, step) in steps.iter().enumerate() {
            if step.di <= k {
                step.coefficients(t, k - step.di, h, &mut scratch);
                let c = &mut coef[s];
                c.fill(0.0);
                c[W - 1 - step.dj..].copy_from_slice(&scratch[..=step.dj]);
            }
        }
        for l in l_lo..=l_hi {
            let window: &[f64; W] = padded[l..l + W].try_into().expect("window width");
            let mut best = f64::NEG_INFINITY;
            let mut best_dev = u32::MAX;
            let mut best_step = u8::MAX;
            for (s, step) in steps.iter().enumerate() {
                if step.di > k || step.dj > l {
                    continue;
                }
                let prev_node = (k - step.di) * n + l - step.dj;
                let prev = tables.score[prev_node];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                // right-aligned blocks of short steps are zero before W − 4
                let gain = if step.dj < 4 {
                    dot::<4>(
                        coef[s][W - 4..].try_into().expect("tail"),
                        window[W - 4..].try_into().expect("tail"),
                    )
                } else {
                    dot(&coef[s], window)
                };
                let cand = prev + gain;
                let dev = tables.deviation[prev_node] + step.deviation;
                let tol = TIE_TOLERANCE * (1.0 + best.abs());
                // with best = -inf the first test is NaN-false and the tie
                // branch accepts because best_dev is u32::MAX
                let better = if cand > best + tol {
                    true
                } else if cand >= best - tol {
                    dev < best_dev || (dev == best_dev && cand > best)
                } else {
                    false
                };
                if better {
                    best = cand;
                    best_dev = dev;
                    best_step = s as u8;
                }
            }
            tables.score[k * n + l] = best;
            tables.deviation[k * n + l] = best_dev;
            tables.back[k * n + l] = best_step;
        }
    }
}

/// Dot product in four interleaved partial sums.
#[inline(always)]
fn dot<const W: usize>(a: &[f64; W], b: &[f64; W]) -> f64 {
    let mut acc = [0.0f64; 4];
    for q in (0..W).step_by(4) {
        for r in 0..4 {
            acc[r] += a[q + r] * b[q + r];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Per-node best objective, its cumulative slope deviation and the index of
/// the step that reached it, all row-major over the `n × n` lattice.
struct Tables {
    score: Vec<f64>,
    deviation: Vec<u32>,
    back: Vec<u8>,
}
