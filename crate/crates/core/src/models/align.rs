//! Groupwise alignment to an SRVF template.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{l2_norm, DiscretizedFunction};
use crate::warp::{
    compose, dp_align, invert, mean_warping, norm_action, srvf, value_action, Warping,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignOptions {
    pub max_iterations: usize,
    /// Stop once `‖μ_new − μ‖ / max(‖μ‖, 1)` falls below this.
    pub tolerance: f64,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            max_iterations: 20,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteAlignment {
    /// `f_i ∘ γ_i`.
    pub amplitudes: Vec<DiscretizedFunction>,
    /// Per-sample warpings, centred so their mean is the identity.
    pub phases: Vec<Warping>,
    /// SRVF template the aligned SRVFs cluster around.
    pub template: DiscretizedFunction,
    pub iterations: usize,
}

fn mean_function(fs: &[DiscretizedFunction]) -> Result<DiscretizedFunction> {
    let first = fs.first().ok_or(Error::EmptyList)?;
    let w = 1.0 / fs.len() as f64;
    let mut acc = DiscretizedFunction::zeros(first.grid());
    for f in fs {
        acc = acc.add_scaled(w, f)?;
    }
    Ok(acc)
}

/// Iteratively aligns the SRVFs of `fs` to their evolving mean.
pub fn complete_alignment(
    fs: &[DiscretizedFunction],
    options: &AlignOptions,
) -> Result<CompleteAlignment> {
    let first = fs.first().ok_or(Error::EmptyList)?;
    for f in fs {
        first.grid().check(&f.grid())?;
    }
    let qs: Vec<_> = fs.iter().map(srvf).collect();
    let mut template = mean_function(&qs)?;
    let mut phases: Vec<Warping> = fs.iter().map(|f| Warping::identity(f.grid())).collect();
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        let mut aligned = Vec::with_capacity(qs.len());
        for (q, phase) in qs.iter().zip(phases.iter_mut()) {
            *phase = dp_align(&template, q)?.warping;
            aligned.push(norm_action(q, phase)?);
        }
        let next = mean_function(&aligned)?;
        let change = l2_norm(&next.sub(&template)?) / l2_norm(&template).max(1.0);
        template = next;
        if change < options.tolerance {
            break;
        }
    }

    let inv = invert(&mean_warping(&phases)?);
    let phases = phases
        .iter()
        .map(|g| compose(g, &inv))
        .collect::<Result<Vec<_>>>()?;
    let template = norm_action(&template, &inv)?;
    let amplitudes = fs
        .iter()
        .zip(&phases)
        .map(|(f, g)| value_action(f, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompleteAlignment {
        amplitudes,
        phases,
        template,
        iterations,
    })
}
