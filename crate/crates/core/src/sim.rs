//! Simulation studies, cross-validation and error metrics.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::{BasisKind, BasisSpec};
use crate::error::{invalid, Result};
use crate::grid::{inner_product, l2_norm, DiscretizedFunction, Grid, DEFAULT_GRID_SIZE};
use crate::models::{
    efrm_index_value, fit_efrm_with, fit_flm, Dataset, EfrmModel, FitOptions, IndexPolynomial, Mode,
};
use crate::warp::{norm_action, value_action, Warping};

/// Independent generator for task `index` under a master seed.
pub fn task_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `γ(t) = t + α t (1 − t)` with `α ~ U(−a, a)`.
pub fn random_parametric_warping<R: Rng + ?Sized>(
    a: f64,
    grid: Grid,
    rng: &mut R,
) -> Result<Warping> {
    if !(0.0..1.0).contains(&a) {
        return Err(invalid(alloc::format!("warp amplitude {a} outside [0, 1)")));
    }
    if a == 0.0 {
        return Ok(Warping::identity(grid));
    }
    let alpha = rng.random_range(-a..a);
    Warping::from_fn(grid, |t| t + alpha * t * (1.0 - t))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientScheme {
    /// Drawn once from `N(0, 1)` using the configured seed.
    RandomNormal,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_samples: usize,
    pub grid_size: usize,
    /// Basis for both the predictors and `β`.
    pub basis: BasisSpec,
    pub beta: CoefficientScheme,
    pub warp_amplitude: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub h: IndexPolynomial,
}

/// `h(x) = x² + x`.
pub fn default_h() -> IndexPolynomial {
    IndexPolynomial::new(alloc::vec![1.0, 1.0, 0.0]).expect("valid coefficients")
}

impl SimConfig {
    /// Two-element Fourier predictors, `β` with coefficients `[1, 1]`.
    pub fn data1(seed: u64) -> Self {
        SimConfig {
            n_samples: 100,
            grid_size: DEFAULT_GRID_SIZE,
            basis: BasisSpec::fourier(2),
            beta: CoefficientScheme::Fixed(alloc::vec![1.0, 1.0]),
            warp_amplitude: 0.5,
            noise_sd: 0.01,
            seed,
            h: default_h(),
        }
    }

    /// Twenty-element B-spline predictors, random `β` coefficients.
    pub fn data2(seed: u64) -> Self {
        SimConfig {
            basis: BasisSpec::bspline(20),
            beta: CoefficientScheme::RandomNormal,
            ..SimConfig::data1(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(invalid("n_samples must be at least 1"));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(invalid("noise sd must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.warp_amplitude) {
            return Err(invalid("warp amplitude must lie in [0, 1)"));
        }
        if let CoefficientScheme::Fixed(c) = &self.beta {
            if c.len() != self.basis.size {
                return Err(invalid("fixed β coefficients do not match the basis size"));
            }
        }
        Ok(())
    }
}

/// Ground truth behind a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    pub beta_coefficients: Vec<f64>,
    pub beta: DiscretizedFunction,
    pub h: IndexPolynomial,
    /// Predictors before the injected warping.
    pub clean: Vec<DiscretizedFunction>,
    pub warps: Vec<Warping>,
    /// Noise-free index values.
    pub index: Vec<f64>,
    /// Sign making `⟨β, mean aligned predictor⟩ ≥ 0`.
    pub beta_sign: f64,
}

impl SimTruth {
    pub fn canonical_beta(&self) -> DiscretizedFunction {
        self.beta.scaled(self.beta_sign)
    }
}

/// Random predictors in the configured basis, warped by the parametric
/// family, with responses `h(sup_γ ⟨β, f_i ∗ γ⟩) + ε_i`.
pub fn simulate(cfg: &SimConfig) -> Result<(Dataset, SimTruth)> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid_size)?;
    let basis = cfg.basis.build(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let beta_coefficients = match &cfg.beta {
        CoefficientScheme::Fixed(c) => c.clone(),
        CoefficientScheme::RandomNormal => (0..basis.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect(),
    };
    let beta = basis.expand(&beta_coefficients)?;

    let mut clean = Vec::with_capacity(cfg.n_samples);
    let mut warps = Vec::with_capacity(cfg.n_samples);
    let mut predictors = Vec::with_capacity(cfg.n_samples);
    let mut index = Vec::with_capacity(cfg.n_samples);
    let mut responses = Vec::with_capacity(cfg.n_samples);
    let mut mean_aligned = DiscretizedFunction::zeros(grid);
    for _ in 0..cfg.n_samples {
        let c: Vec<f64> = (0..basis.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let f0 = basis.expand(&c)?;
        let gamma = random_parametric_warping(cfg.warp_amplitude, grid, &mut rng)?;
        let f = norm_action(&f0, &gamma)?;
        let (x, best) = efrm_index_value(&beta, &f, Mode::Function)?;
        mean_aligned =
            mean_aligned.add_scaled(1.0 / cfg.n_samples as f64, &norm_action(&f, &best)?)?;
        let eps: f64 = StandardNormal.sample(&mut rng);
        responses.push(cfg.h.eval(x) + cfg.noise_sd * eps);
        index.push(x);
        clean.push(f0);
        warps.push(gamma);
        predictors.push(f);
    }
    let beta_sign = if inner_product(&beta, &mean_aligned)? < 0.0 {
        -1.0
    } else {
        1.0
    };
    Ok((
        Dataset::new(predictors, responses)?,
        SimTruth {
            beta_coefficients,
            beta,
            h: cfg.h.clone(),
            clean,
            warps,
            index,
            beta_sign,
        },
    ))
}

/// [`simulate`] for the Fourier family.
pub fn simulate_data1(cfg: &SimConfig) -> Result<(Dataset, SimTruth)> {
    if cfg.basis.kind != BasisKind::Fourier {
        return Err(invalid("simulated data 1 uses a Fourier basis"));
    }
    simulate(cfg)
}

/// [`simulate`] for the B-spline family.
pub fn simulate_data2(cfg: &SimConfig) -> Result<(Dataset, SimTruth)> {
    if !matches!(cfg.basis.kind, BasisKind::BSpline { .. }) {
        return Err(invalid("simulated data 2 uses a B-spline basis"));
    }
    simulate(cfg)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() || y.is_empty() {
        return Err(invalid("rmse needs two non-empty vectors of equal length"));
    }
    let ss: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(libm::sqrt(ss / y.len() as f64))
}

/// `‖truth − estimate‖`.
pub fn rse_l2(truth: &DiscretizedFunction, estimate: &DiscretizedFunction) -> Result<f64> {
    Ok(l2_norm(&truth.sub(estimate)?))
}

/// `(∫_lo^hi (h − ĥ)²)^{1/2}` by the trapezoid rule on 257 points.
pub fn rse_polynomial(
    truth: &IndexPolynomial,
    estimate: &IndexPolynomial,
    lo: f64,
    hi: f64,
) -> f64 {
    const POINTS: usize = 257;
    let step = (hi - lo) / (POINTS - 1) as f64;
    let mut acc = 0.0;
    for k in 0..POINTS {
        let x = lo + step * k as f64;
        let d = truth.eval(x) - estimate.eval(x);
        let w = if k == 0 || k == POINTS - 1 { 0.5 } else { 1.0 };
        acc += w * d * d;
    }
    libm::sqrt(acc * step)
}

/// `1 − SS_res / SS_tot`, or `None` when the responses are constant.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<Option<f64>> {
    if y.len() != yhat.len() || y.is_empty() {
        return Err(invalid(
            "r_squared needs two non-empty vectors of equal length",
        ));
    }
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if ss_tot == 0.0 {
        return Ok(None);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Some(1.0 - ss_res / ss_tot))
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, libm::sqrt(var))
}

/// Result of a k-fold cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    pub sd_rmse: f64,
    /// Parameter errors averaged over folds, where ground truth is known.
    pub rse: Vec<(String, f64)>,
    /// Wall-clock time, recorded with the `std` feature.
    pub runtime_secs: Option<f64>,
}

/// Test-index sets of `k` near-equal folds after one seeded shuffle.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(invalid("k-fold cross-validation needs k ≥ 2"));
    }
    if n < k {
        return Err(invalid(alloc::format!("{n} samples cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

#[cfg(feature = "std")]
struct Timer(std::time::Instant);

#[cfg(feature = "std")]
impl Timer {
    fn start() -> Self {
        Timer(std::time::Instant::now())
    }
    fn elapsed(&self) -> Option<f64> {
        Some(self.0.elapsed().as_secs_f64())
    }
}

#[cfg(not(feature = "std"))]
struct Timer;

#[cfg(not(feature = "std"))]
impl Timer {
    fn start() -> Self {
        Timer
    }
    fn elapsed(&self) -> Option<f64> {
        None
    }
}

/// k-fold cross-validated RMSE of a fitting procedure.
pub fn kfold_cv<M>(
    data: &Dataset,
    k: usize,
    seed: u64,
    fit: impl FnMut(&Dataset) -> Result<M>,
    predict: impl Fn(&M, &DiscretizedFunction) -> Result<f64>,
) -> Result<EvalReport> {
    kfold_cv_with_rse(data, k, seed, fit, predict, |_| Vec::new())
}

/// [`kfold_cv`] that also averages per-fold parameter errors reported by
/// `rse` for each fitted model.
pub fn kfold_cv_with_rse<M>(
    data: &Dataset,
    k: usize,
    seed: u64,
    mut fit: impl FnMut(&Dataset) -> Result<M>,
    predict: impl Fn(&M, &DiscretizedFunction) -> Result<f64>,
    mut rse: impl FnMut(&M) -> Vec<(String, f64)>,
) -> Result<EvalReport> {
    let timer = Timer::start();
    let folds = fold_assignment(data.len(), k, seed)?;
    let mut fold_rmse = Vec::with_capacity(k);
    let mut rse_sum: Vec<(String, f64)> = Vec::new();
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let model = fit(&data.subset(&train)?)?;
        let mut y = Vec::with_capacity(test.len());
        let mut yhat = Vec::with_capacity(test.len());
        for &i in test {
            y.push(data.responses()[i]);
            yhat.push(predict(&model, &data.predictors()[i])?);
        }
        fold_rmse.push(rmse(&y, &yhat)?);
        for (name, v) in rse(&model) {
            match rse_sum.iter_mut().find(|(n, _)| *n == name) {
                Some(entry) => entry.1 += v,
                None => rse_sum.push((name, v)),
            }
        }
    }
    for entry in &mut rse_sum {
        entry.1 /= k as f64;
    }
    let (mean_rmse, sd_rmse) = mean_sd(&fold_rmse);
    Ok(EvalReport {
        fold_rmse,
        mean_rmse,
        sd_rmse,
        rse: rse_sum,
        runtime_secs: timer.elapsed(),
    })
}

/// Cross-validated RMSE of the elastic model for each index degree 1, 2, 3.
pub fn cv_degrees(
    data: &Dataset,
    k: usize,
    seed: u64,
    basis: BasisSpec,
    mode: Mode,
    options: &FitOptions,
) -> Result<Vec<(usize, EvalReport)>> {
    (1..=3)
        .map(|degree| {
            let report = kfold_cv(
                data,
                k,
                seed,
                |train| fit_efrm_with(train, degree, basis, mode, options),
                |m: &EfrmModel, f| m.predict(f),
            )?;
            Ok((degree, report))
        })
        .collect()
}

/// How test predictors are warped in the decay experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Contamination {
    /// `f ∘ γ`.
    Value,
    /// `(f ∘ γ)√γ̇`.
    Norm,
}

impl Contamination {
    pub fn name(self) -> &'static str {
        match self {
            Contamination::Value => "value",
            Contamination::Norm => "norm",
        }
    }

    pub fn apply(self, f: &DiscretizedFunction, g: &Warping) -> Result<DiscretizedFunction> {
        match self {
            Contamination::Value => value_action(f, g),
            Contamination::Norm => norm_action(f, g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayConfig {
    pub a_grid: Vec<f64>,
    pub n_runs: usize,
    /// Samples per run, split 80/20 into training and test.
    pub n_samples: usize,
    pub grid_size: usize,
    pub noise_sd: f64,
    /// Basis of the predictors, of `β` (coefficients all ones) and of the
    /// fitted linear model.
    pub basis: BasisSpec,
    pub seed: u64,
}

impl DecayConfig {
    pub fn new(a_grid: Vec<f64>, n_runs: usize, seed: u64) -> Self {
        DecayConfig {
            a_grid,
            n_runs,
            n_samples: 100,
            grid_size: DEFAULT_GRID_SIZE,
            noise_sd: 0.01,
            basis: BasisSpec::fourier(2),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub a: f64,
    pub contamination: Contamination,
    pub mean_r2: f64,
    pub sd_r2: f64,
    /// Runs with a defined R².
    pub n_runs: usize,
}

/// Test R² of a linear model trained on clean predictors, as the test
/// predictors are warped with growing amplitude.
pub fn decay_experiment(cfg: &DecayConfig, contamination: Contamination) -> Result<Vec<DecayRow>> {
    if cfg.n_runs == 0 {
        return Err(invalid("decay experiment needs at least one run"));
    }
    if let Some(a) = cfg.a_grid.iter().find(|a| !(0.0..1.0).contains(*a)) {
        return Err(invalid(alloc::format!("warp amplitude {a} outside [0, 1)")));
    }
    if cfg.n_samples < 5 {
        return Err(invalid("decay experiment needs at least 5 samples per run"));
    }
    let grid = Grid::new(cfg.grid_size)?;
    let basis = cfg.basis.build(grid)?;
    let beta = basis.expand(&alloc::vec![1.0; basis.len()])?;
    let n_test = cfg.n_samples / 5;
    let mut r2: Vec<Vec<f64>> = alloc::vec![Vec::new(); cfg.a_grid.len()];
    for run in 0..cfg.n_runs {
        let mut rng = task_rng(cfg.seed, 2 * run as u64);
        let mut fs = Vec::with_capacity(cfg.n_samples);
        let mut ys = Vec::with_capacity(cfg.n_samples);
        for _ in 0..cfg.n_samples {
            let c: Vec<f64> = (0..basis.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let f = basis.expand(&c)?;
            let eps: f64 = StandardNormal.sample(&mut rng);
            ys.push(inner_product(&beta, &f)? + cfg.noise_sd * eps);
            fs.push(f);
        }
        let mut order: Vec<usize> = (0..cfg.n_samples).collect();
        order.shuffle(&mut rng);
        let (test, train) = order.split_at(n_test);
        let data = Dataset::new(fs, ys)?;
        let model = fit_flm(&data.subset(train)?, cfg.basis)?;
        for (ai, &a) in cfg.a_grid.iter().enumerate() {
            // the same stream for every amplitude couples the draws across a
            let mut warp_rng = task_rng(cfg.seed, 2 * run as u64 + 1);
            let mut y = Vec::with_capacity(test.len());
            let mut yhat = Vec::with_capacity(test.len());
            for &i in test {
                let g = random_parametric_warping(a, grid, &mut warp_rng)?;
                let f = contamination.apply(&data.predictors()[i], &g)?;
                y.push(data.responses()[i]);
                yhat.push(model.predict(&f)?);
            }
            if let Some(v) = r_squared(&y, &yhat)? {
                r2[ai].push(v);
            }
        }
    }
    Ok(cfg
        .a_grid
        .iter()
        .zip(r2)
        .map(|(&a, vals)| {
            let (mean_r2, sd_r2) = if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_sd(&vals)
            };
            DecayRow {
                a,
                contamination,
                mean_r2,
                sd_r2,
                n_runs: vals.len(),
            }
        })
        .collect())
}
