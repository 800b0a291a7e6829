//! Elastic functional regression: `y = h(sup_γ ⟨β, (f ∘ γ)√γ̇⟩) + ε`.
//!
//! `β = Σ c_j b_j` is estimated by quasi-Newton descent on the residual sum
//! of squares with `h` held fixed, and `h` by polynomial least squares on the
//! resulting index values; the two steps alternate until the cost settles.

use alloc::vec::Vec;

use super::{fit_index_h, Dataset, IndexPolynomial, Mode};
use crate::basis::{BasisSpec, BasisSystem};
use crate::error::{invalid, Result};
use crate::grid::{inner_product, DiscretizedFunction, Grid};
use crate::optim::{forward_difference, minimize, BfgsOptions, Objective, Termination};
use crate::warp::{compose, dp_align, invert, mean_warping, norm_action, srvf, Warping};

/// How the quasi-Newton step obtains gradients of the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMethod {
    /// Forward differences with step `1e-6 · (1 + |c_j|)`.
    #[default]
    ForwardDifference,
    /// Differentiates with the optimal warpings held fixed:
    /// `∂x_i/∂c_j = ⟨b_j, (f_i ∘ γ_i)√γ̇_i⟩`. One alignment pass per gradient
    /// instead of `J`.
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub bfgs: BfgsOptions,
    pub gradient: GradientMethod,
    /// Outer loop stops once the relative cost change falls below this.
    pub outer_tolerance: f64,
    pub max_outer_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bfgs: BfgsOptions::default(),
            gradient: GradientMethod::default(),
            outer_tolerance: 1e-4,
            max_outer_iterations: 20,
        }
    }
}

fn represent(f: &DiscretizedFunction, mode: Mode) -> DiscretizedFunction {
    match mode {
        Mode::Function => f.clone(),
        Mode::Srvf => srvf(f),
    }
}

/// Aligned index of an already represented predictor:
/// `(⟨β, g ∗ γ*⟩, γ*, g ∗ γ*)`.
fn aligned_index(
    beta: &DiscretizedFunction,
    g: &DiscretizedFunction,
) -> Result<(f64, Warping, DiscretizedFunction)> {
    let gamma = dp_align(beta, g)?.warping;
    let warped = norm_action(g, &gamma)?;
    Ok((inner_product(beta, &warped)?, gamma, warped))
}

/// `sup_γ ⟨β, (f ∘ γ)√γ̇⟩` and the maximising warping. In SRVF mode `f` is
/// replaced by its SRVF first.
pub fn efrm_index_value(
    beta: &DiscretizedFunction,
    f: &DiscretizedFunction,
    mode: Mode,
) -> Result<(f64, Warping)> {
    beta.grid().check(&f.grid())?;
    let (value, gamma, _) = aligned_index(beta, &represent(f, mode))?;
    Ok((value, gamma))
}

struct Evaluation {
    c: Vec<f64>,
    cost: f64,
    index: Vec<f64>,
    warps: Vec<Warping>,
    warped: Vec<DiscretizedFunction>,
}

fn evaluate(
    c: &[f64],
    preds: &[DiscretizedFunction],
    y: &[f64],
    h: &IndexPolynomial,
    basis: &BasisSystem,
) -> Result<Evaluation> {
    let beta = basis.expand(c)?;
    let mut cost = 0.0;
    let mut index = Vec::with_capacity(preds.len());
    let mut warps = Vec::with_capacity(preds.len());
    let mut warped = Vec::with_capacity(preds.len());
    for (g, yi) in preds.iter().zip(y) {
        let (x, gamma, w) = aligned_index(&beta, g)?;
        let r = yi - h.eval(x);
        cost += r * r;
        index.push(x);
        warps.push(gamma);
        warped.push(w);
    }
    Ok(Evaluation {
        c: c.to_vec(),
        cost,
        index,
        warps,
        warped,
    })
}

fn residual_sum_of_squares(index: &[f64], y: &[f64], h: &IndexPolynomial) -> f64 {
    index
        .iter()
        .zip(y)
        .map(|(x, yi)| {
            let r = yi - h.eval(*x);
            r * r
        })
        .sum()
}

/// Residual sum of squares `Σ (y_i − h(x_i))²` at coefficients `c`.
pub fn efrm_cost(
    c: &[f64],
    data: &Dataset,
    h: &IndexPolynomial,
    basis: &BasisSystem,
    mode: Mode,
) -> Result<f64> {
    basis.grid().check(&data.grid())?;
    let preds: Vec<_> = data
        .predictors()
        .iter()
        .map(|f| represent(f, mode))
        .collect();
    Ok(evaluate(c, &preds, data.responses(), h, basis)?.cost)
}

struct CostObjective<'a> {
    preds: &'a [DiscretizedFunction],
    y: &'a [f64],
    h: &'a IndexPolynomial,
    basis: &'a BasisSystem,
    method: GradientMethod,
    last: Option<Evaluation>,
}

impl CostObjective<'_> {
    fn evaluation(&mut self, c: &[f64]) -> Result<&Evaluation> {
        if self.last.as_ref().is_none_or(|e| e.c != c) {
            self.last = Some(evaluate(c, self.preds, self.y, self.h, self.basis)?);
        }
        Ok(self.last.as_ref().expect("evaluation cached above"))
    }
}

impl Objective for CostObjective<'_> {
    fn value(&mut self, c: &[f64]) -> Result<f64> {
        Ok(self.evaluation(c)?.cost)
    }

    fn gradient(&mut self, c: &[f64], value: f64) -> Result<Vec<f64>> {
        match self.method {
            GradientMethod::ForwardDifference => forward_difference(self, c, value),
            GradientMethod::Envelope => {
                let (y, h, basis) = (self.y, self.h, self.basis);
                let e = self.evaluation(c)?;
                let mut g = alloc::vec![0.0; c.len()];
                for ((x, w), yi) in e.index.iter().zip(&e.warped).zip(y) {
                    let scale = -2.0 * (yi - h.eval(*x)) * h.derivative_at(*x);
                    for (gj, pj) in g.iter_mut().zip(basis.project(w)?) {
                        *gj += scale * pj;
                    }
                }
                Ok(g)
            }
        }
    }
}

/// Outcome of the `β` step with `h` fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit {
    pub c: Vec<f64>,
    /// Optimal warpings at `c`, one per sample.
    pub warps: Vec<Warping>,
    /// Index values `sup_γ ⟨β, f_i ∗ γ⟩` at `c`.
    pub index: Vec<f64>,
    pub initial_cost: f64,
    pub cost: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Cost after each accepted quasi-Newton step, starting point first.
    pub history: Vec<f64>,
}

impl BetaFit {
    /// `false` when the iteration cap was hit.
    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIterations
    }
}

fn fit_beta_represented(
    preds: &[DiscretizedFunction],
    y: &[f64],
    h: &IndexPolynomial,
    basis: &BasisSystem,
    init_c: &[f64],
    options: &FitOptions,
) -> Result<BetaFit> {
    if init_c.len() != basis.len() {
        return Err(invalid(alloc::format!(
            "{} initial coefficients for a basis of size {}",
            init_c.len(),
            basis.len()
        )));
    }
    let mut objective = CostObjective {
        preds,
        y,
        h,
        basis,
        method: options.gradient,
        last: None,
    };
    let m = minimize(&mut objective, init_c, &options.bfgs)?;
    let e = match objective.last.take() {
        Some(e) if e.c == m.x => e,
        _ => evaluate(&m.x, preds, y, h, basis)?,
    };
    Ok(BetaFit {
        c: m.x,
        warps: e.warps,
        index: e.index,
        initial_cost: m.history[0],
        cost: e.cost,
        iterations: m.iterations,
        termination: m.termination,
        history: m.history,
    })
}

/// Quasi-Newton minimisation of [`efrm_cost`] over `c` with `h` fixed.
/// Warpings are recomputed at every cost evaluation.
pub fn fit_beta(
    data: &Dataset,
    h: &IndexPolynomial,
    basis: &BasisSystem,
    mode: Mode,
    init_c: &[f64],
    options: &FitOptions,
) -> Result<BetaFit> {
    basis.grid().check(&data.grid())?;
    let preds: Vec<_> = data
        .predictors()
        .iter()
        .map(|f| represent(f, mode))
        .collect();
    fit_beta_represented(&preds, data.responses(), h, basis, init_c, options)
}

/// Moves `β` within its warping orbit so the training warps average to the
/// identity: with `γ̄` their mean, `β ← (β ∘ γ̄⁻¹)√(γ̄⁻¹)'` (re-projected onto
/// the basis) and `γ_i ← γ_i ∘ γ̄⁻¹`.
pub fn normalize_identifiability(
    c: &[f64],
    warps: &[Warping],
    basis: &BasisSystem,
) -> Result<(Vec<f64>, Vec<Warping>)> {
    let mean = mean_warping(warps)?;
    let inv = invert(&mean);
    let beta = norm_action(&basis.expand(c)?, &inv)?;
    let warps = warps
        .iter()
        .map(|g| compose(g, &inv))
        .collect::<Result<Vec<_>>>()?;
    Ok((basis.project(&beta)?, warps))
}

fn initial_coefficients(
    preds: &[DiscretizedFunction],
    y: &[f64],
    basis: &BasisSystem,
) -> Result<Vec<f64>> {
    let grid = basis.grid();
    let sy = libm::sqrt(y.iter().map(|v| v * v).sum::<f64>());
    let mut acc = DiscretizedFunction::zeros(grid);
    if sy > 0.0 {
        for (f, yi) in preds.iter().zip(y) {
            acc = acc.add_scaled(yi / sy, f)?;
        }
    }
    let c = basis.project(&acc)?;
    let ok = c.iter().all(|v| v.is_finite()) && c.iter().any(|v| v.abs() > 1e-12);
    Ok(if ok { c } else { alloc::vec![1.0; basis.len()] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    /// Residual sum of squares of the returned model on its training data.
    pub final_cost: f64,
    pub outer_iterations: usize,
    /// Quasi-Newton iterations summed over all outer iterations.
    pub inner_iterations: usize,
    /// Outer tolerance reached and no inner fit hit its iteration cap.
    pub converged: bool,
    /// Cost at the start and after each outer iteration.
    pub cost_history: Vec<f64>,
    /// `±1` such that `sign · β` has a non-negative inner product with the
    /// mean aligned training predictor.
    pub beta_sign: f64,
}

/// A fitted elastic regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct EfrmModel {
    basis: BasisSystem,
    c: Vec<f64>,
    beta: DiscretizedFunction,
    h: IndexPolynomial,
    mode: Mode,
    training_warps: Vec<Warping>,
    diagnostics: FitDiagnostics,
}

impl EfrmModel {
    /// Rebuilds a model from stored parameters (no training warps).
    pub fn from_parts(
        spec: BasisSpec,
        grid: Grid,
        c: Vec<f64>,
        h: IndexPolynomial,
        mode: Mode,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        let basis = spec.build(grid)?;
        let beta = basis.expand(&c)?;
        Ok(EfrmModel {
            basis,
            c,
            beta,
            h,
            mode,
            training_warps: Vec::new(),
            diagnostics,
        })
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn grid(&self) -> Grid {
        self.basis.grid()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn beta(&self) -> &DiscretizedFunction {
        &self.beta
    }

    /// `β` with the sign convention of [`FitDiagnostics::beta_sign`].
    pub fn canonical_beta(&self) -> DiscretizedFunction {
        self.beta.scaled(self.diagnostics.beta_sign)
    }

    pub fn h(&self) -> &IndexPolynomial {
        &self.h
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn training_warps(&self) -> &[Warping] {
        &self.training_warps
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    pub fn index(&self, f: &DiscretizedFunction) -> Result<f64> {
        Ok(efrm_index_value(&self.beta, f, self.mode)?.0)
    }

    pub fn predict(&self, f: &DiscretizedFunction) -> Result<f64> {
        Ok(self.h.eval(self.index(f)?))
    }
}

/// `ĥ(sup_γ ⟨β̂, f ∗ γ⟩)`.
pub fn predict_efrm(model: &EfrmModel, f: &DiscretizedFunction) -> Result<f64> {
    model.predict(f)
}

/// Fits with default options.
pub fn fit_efrm(data: &Dataset, degree: usize, basis: BasisSpec, mode: Mode) -> Result<EfrmModel> {
    fit_efrm_with(data, degree, basis, mode, &FitOptions::default())
}

/// Alternates the `β` step and the `h` step from `h(x) = x`, then imposes
/// the identifiability constraint and refits `h`.
pub fn fit_efrm_with(
    data: &Dataset,
    degree: usize,
    spec: BasisSpec,
    mode: Mode,
    options: &FitOptions,
) -> Result<EfrmModel> {
    if !(1..=3).contains(&degree) {
        return Err(invalid("index polynomial degree must be 1, 2 or 3"));
    }
    let basis = spec.build(data.grid())?;
    let preds: Vec<_> = data
        .predictors()
        .iter()
        .map(|f| represent(f, mode))
        .collect();
    let y = data.responses();

    let mut c = initial_coefficients(&preds, y, &basis)?;
    let mut h = IndexPolynomial::identity();
    let mut cost = evaluate(&c, &preds, y, &h, &basis)?.cost;
    let mut history = alloc::vec![cost];
    let mut inner_iterations = 0;
    let mut inner_converged = true;
    let mut outer_converged = false;
    let mut outer_iterations = 0;
    let mut warps = Vec::new();

    while outer_iterations < options.max_outer_iterations {
        outer_iterations += 1;
        let fit = fit_beta_represented(&preds, y, &h, &basis, &c, options)?;
        inner_iterations += fit.iterations;
        inner_converged &= fit.converged();
        let h_new = fit_index_h(&fit.index, y, degree)?;
        let cost_new = residual_sum_of_squares(&fit.index, y, &h_new);
        log::debug!(
            "outer iteration {outer_iterations}: cost {cost_new:.6e} after {} inner iterations",
            fit.iterations
        );
        c = fit.c;
        warps = fit.warps;
        // a refit that does not improve keeps the previous h
        let (accepted_h, accepted_cost) = if cost_new <= fit.cost {
            (h_new, cost_new)
        } else {
            (h, fit.cost)
        };
        h = accepted_h;
        let change = (cost - accepted_cost).abs() / cost.max(f64::MIN_POSITIVE);
        cost = accepted_cost;
        history.push(cost);
        if change < options.outer_tolerance {
            outer_converged = true;
            break;
        }
    }

    let (c, training_warps) = normalize_identifiability(&c, &warps, &basis)?;
    let e = evaluate(&c, &preds, y, &h, &basis)?;
    let h = fit_index_h(&e.index, y, degree)?;
    let final_cost = residual_sum_of_squares(&e.index, y, &h);
    if final_cost > 2.0 * cost + 1e-12 {
        log::info!("identifiability normalisation raised the training cost from {cost:.6e} to {final_cost:.6e}");
    }

    let beta = basis.expand(&c)?;
    let mut mean_aligned = DiscretizedFunction::zeros(basis.grid());
    for w in &e.warped {
        mean_aligned = mean_aligned.add_scaled(1.0 / e.warped.len() as f64, w)?;
    }
    let beta_sign = if inner_product(&beta, &mean_aligned)? < 0.0 {
        -1.0
    } else {
        1.0
    };

    Ok(EfrmModel {
        basis,
        c,
        beta,
        h,
        mode,
        training_warps,
        diagnostics: FitDiagnostics {
            final_cost,
            outer_iterations,
            inner_iterations,
            converged: outer_converged && inner_converged,
            cost_history: history,
            beta_sign,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm;
    use core::f64::consts::PI;

    fn fourier_sample(g: Grid, a: f64, b: f64) -> DiscretizedFunction {
        DiscretizedFunction::from_fn(g, |t| {
            a * core::f64::consts::SQRT_2 * libm::sin(2.0 * PI * t)
                + b * core::f64::consts::SQRT_2 * libm::cos(2.0 * PI * t)
        })
        .unwrap()
    }

    // sinusoids whose phase is within π/3 of β's, so the supremum over
    // warpings is attained by a smooth warping rather than in a limit
    fn coefficient_pairs(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|k| {
                let k = k as f64;
                let psi = PI / 4.0 + PI / 3.0 * libm::sin(1.3 * k + 0.2);
                let r = 1.0 + 0.5 * libm::sin(0.7 * k);
                (r * libm::cos(psi), r * libm::sin(psi))
            })
            .collect()
    }

    fn linear_data(g: Grid, n: usize) -> (Dataset, BasisSystem) {
        let basis = BasisSpec::fourier(2).build(g).unwrap();
        let beta = basis.expand(&[1.0, 1.0]).unwrap();
        let fs: Vec<_> = coefficient_pairs(n)
            .into_iter()
            .map(|(a, b)| fourier_sample(g, a, b))
            .collect();
        let y = fs
            .iter()
            .map(|f| efrm_index_value(&beta, f, Mode::Function).unwrap().0)
            .collect();
        (Dataset::new(fs, y).unwrap(), basis)
    }

    fn warp(g: Grid, a: f64) -> Warping {
        Warping::from_fn(g, |t| t + a * t * (1.0 - t)).unwrap()
    }

    #[test]
    fn index_value_properties() {
        let g = Grid::new(100).unwrap();
        let beta = fourier_sample(g, 1.0, 1.0);
        let (v, gamma) = efrm_index_value(&beta, &beta, Mode::Function).unwrap();
        let norm2 = inner_product(&beta, &beta).unwrap();
        assert!((v - norm2).abs() < 1e-2 * norm2);
        assert!(gamma.distance_to_identity() <= 2.0 / 99.0);

        for (a, b) in coefficient_pairs(10) {
            let f = fourier_sample(g, a, b);
            let (v, _) = efrm_index_value(&beta, &f, Mode::Function).unwrap();
            assert!(v <= l2_norm(&beta) * l2_norm(&f) + 1e-8);
            let moved = norm_action(&f, &warp(g, 0.4 * a.signum())).unwrap();
            let (w, _) = efrm_index_value(&beta, &moved, Mode::Function).unwrap();
            assert!((v - w).abs() <= 1e-2 * v.abs().max(1e-12), "{v} vs {w}");
        }
    }

    #[test]
    fn cost_examples() {
        let g = Grid::new(60).unwrap();
        let (data, basis) = linear_data(g, 12);
        let h = IndexPolynomial::identity();
        let cost = efrm_cost(&[1.0, 1.0], &data, &h, &basis, Mode::Function).unwrap();
        assert!(cost < 1e-6 * data.len() as f64);

        let h2 = IndexPolynomial::new(alloc::vec![1.0, 0.5, 2.0]).unwrap();
        let zero = efrm_cost(&[0.0, 0.0], &data, &h2, &basis, Mode::Function).unwrap();
        let want: f64 = data.responses().iter().map(|y| (y - 2.0) * (y - 2.0)).sum();
        assert!((zero - want).abs() < 1e-9 * want);

        let moved: Vec<_> = data
            .predictors()
            .iter()
            .map(|f| norm_action(f, &warp(g, -0.3)).unwrap())
            .collect();
        let moved = Dataset::new(moved, data.responses().to_vec()).unwrap();
        let c = [2.0, 0.2];
        let a = efrm_cost(&c, &data, &h, &basis, Mode::Function).unwrap();
        let b = efrm_cost(&c, &moved, &h, &basis, Mode::Function).unwrap();
        assert!((a - b).abs() <= 1e-2 * a, "{a} vs {b}");
    }

    #[test]
    fn fit_beta_behaviour() {
        let g = Grid::new(60).unwrap();
        let (data, basis) = linear_data(g, 15);
        let h = IndexPolynomial::identity();
        let opts = FitOptions::default();

        let at_truth = fit_beta(&data, &h, &basis, Mode::Function, &[1.0, 1.0], &opts).unwrap();
        assert!(at_truth.iterations <= 1, "{}", at_truth.iterations);
        assert!(at_truth.cost <= at_truth.initial_cost);

        let fit = fit_beta(&data, &h, &basis, Mode::Function, &[0.4, 1.8], &opts).unwrap();
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.cost <= fit.initial_cost);
        // the index only sees β up to its warping orbit; compare through it
        let fitted = basis.expand(&fit.c).unwrap();
        let truth = basis.expand(&[1.0, 1.0]).unwrap();
        let (v, _) = efrm_index_value(&truth, &fitted, Mode::Function).unwrap();
        let t2 = inner_product(&truth, &truth).unwrap();
        assert!((v - t2).abs() < 0.1 * t2, "{:?}", fit.c);
        assert!((l2_norm(&fitted) - l2_norm(&truth)).abs() < 0.1);
    }

    #[test]
    fn identifiability_normalisation() {
        let g = Grid::new(80).unwrap();
        let basis = BasisSpec::fourier(2).build(g).unwrap();
        let ids = alloc::vec![Warping::identity(g); 4];
        let (c, w) = normalize_identifiability(&[0.3, -1.2], &ids, &basis).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-10 && (c[1] + 1.2).abs() < 1e-10);
        assert!(w
            .iter()
            .all(|w| w.sup_distance(&Warping::identity(g)).unwrap() < 1e-10));

        let warps: Vec<_> = [0.5, 0.2, 0.45, -0.1].iter().map(|&a| warp(g, a)).collect();
        let (c1, w1) = normalize_identifiability(&[0.3, -1.2], &warps, &basis).unwrap();
        let tol = 2.0 / 79.0;
        assert!(mean_warping(&w1).unwrap().distance_to_identity() <= tol);
        let (c2, w2) = normalize_identifiability(&c1, &w1, &basis).unwrap();
        for (a, b) in w1.iter().zip(&w2) {
            assert!(a.sup_distance(b).unwrap() <= 4.0 / 79.0);
        }
        assert!((c1[0] - c2[0]).abs() < 4.0 / 79.0 && (c1[1] - c2[1]).abs() < 4.0 / 79.0);
        assert!(normalize_identifiability(&c1, &[], &basis).is_err());
    }

    #[test]
    fn exact_linear_data_is_recovered() {
        let g = Grid::new(60).unwrap();
        let (data, _) = linear_data(g, 15);
        let model = fit_efrm(&data, 1, BasisSpec::fourier(2), Mode::Function).unwrap();
        // the alternating fit itself is exact; imposing the identifiability
        // constraint afterwards moves β out of the span and costs accuracy
        let hist = &model.diagnostics().cost_history;
        assert!(hist.windows(2).all(|w| w[1] <= w[0]), "{hist:?}");
        assert!(*hist.last().unwrap() < 1e-6 * data.len() as f64, "{hist:?}");
        let rmse = libm::sqrt(model.diagnostics().final_cost / data.len() as f64);
        assert!(rmse < 1e-2, "{rmse}");
        let mean = mean_warping(model.training_warps()).unwrap();
        assert!(mean.distance_to_identity() <= 2.0 / 59.0);

        let zero = DiscretizedFunction::zeros(g);
        assert_eq!(predict_efrm(&model, &zero).unwrap(), model.h().eval(0.0));
        for f in data.predictors().iter().take(5) {
            let p = model.predict(f).unwrap();
            let q = model
                .predict(&norm_action(f, &warp(g, 0.35)).unwrap())
                .unwrap();
            assert!((p - q).abs() <= 1e-2 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn rebuilt_model_predicts_identically() {
        let g = Grid::new(40).unwrap();
        let (data, _) = linear_data(g, 10);
        let model = fit_efrm(&data, 2, BasisSpec::fourier(2), Mode::Srvf).unwrap();
        let copy = EfrmModel::from_parts(
            model.basis().spec(),
            g,
            model.coefficients().to_vec(),
            model.h().clone(),
            model.mode(),
            model.diagnostics().clone(),
        )
        .unwrap();
        for f in data.predictors() {
            assert_eq!(
                model.predict(f).unwrap().to_bits(),
                copy.predict(f).unwrap().to_bits()
            );
        }
    }
}
