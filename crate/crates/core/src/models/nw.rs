//! Nadaraya–Watson kernel regression on functional predictors.

use alloc::vec::Vec;

use super::align::{complete_alignment, AlignOptions};
use super::{mean, Dataset};
use crate::error::{invalid, Result};
use crate::grid::{l2_norm, DiscretizedFunction};
use crate::warp::{dp_align, norm_action, phase_distance, srvf, value_action};

pub const BANDWIDTH_GRID_POINTS: usize = 32;

pub const LAMBDA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NwDistance {
    /// `‖f − f_i‖`.
    L2,
    /// `λ ‖f − f_i ∗ γ_i‖ + (1 − λ) ‖√γ̇_i − 1‖` with `γ_i` aligning `f_i`
    /// to `f`.
    Shape { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NwPrediction {
    pub value: f64,
    /// All kernel weights underflowed and the response mean was returned.
    pub degenerate: bool,
}

/// Amplitude and phase parts of the distance from `f` to `g`.
fn shape_parts(f: &DiscretizedFunction, g: &DiscretizedFunction) -> Result<(f64, f64)> {
    let gamma = dp_align(f, g)?.warping;
    let amp = l2_norm(&f.sub(&norm_action(g, &gamma)?)?);
    Ok((amp, phase_distance(&gamma)))
}

fn distance(f: &DiscretizedFunction, g: &DiscretizedFunction, d: NwDistance) -> Result<f64> {
    match d {
        NwDistance::L2 => Ok(l2_norm(&f.sub(g)?)),
        NwDistance::Shape { lambda } => {
            let (a, p) = shape_parts(f, g)?;
            Ok(lambda * a + (1.0 - lambda) * p)
        }
    }
}

fn kernel_mean(pairs: impl Iterator<Item = (f64, f64)> + Clone, bandwidth: f64) -> NwPrediction {
    let (mut num, mut den, mut sum, mut count) = (0.0, 0.0, 0.0, 0usize);
    for (d, y) in pairs {
        let u = d / bandwidth;
        let w = libm::exp(-0.5 * u * u);
        num += w * y;
        den += w;
        sum += y;
        count += 1;
    }
    if den > 0.0 {
        NwPrediction {
            value: num / den,
            degenerate: false,
        }
    } else {
        NwPrediction {
            value: sum / count as f64,
            degenerate: true,
        }
    }
}

/// Gaussian-kernel weighted mean of the training responses. For the shape
/// distance the training predictors are expected to be pre-aligned.
pub fn nw_predict(
    train: &Dataset,
    f: &DiscretizedFunction,
    bandwidth: f64,
    d: NwDistance,
) -> Result<NwPrediction> {
    if !(bandwidth > 0.0) {
        return Err(invalid("bandwidth must be positive"));
    }
    let dist = train
        .predictors()
        .iter()
        .map(|g| distance(f, g, d))
        .collect::<Result<Vec<_>>>()?;
    let pred = kernel_mean(
        dist.iter().copied().zip(train.responses().iter().copied()),
        bandwidth,
    );
    if pred.degenerate {
        log::warn!("nw_predict: all kernel weights underflowed, using the response mean");
    }
    Ok(pred)
}

/// Leave-one-out squared error for a pairwise distance matrix.
pub fn loo_error(dist: &[Vec<f64>], y: &[f64], bandwidth: f64) -> f64 {
    (0..y.len())
        .map(|i| {
            let others = (0..y.len())
                .filter(move |&j| j != i)
                .map(move |j| (dist[i][j], y[j]));
            let r = y[i] - kernel_mean(others, bandwidth).value;
            r * r
        })
        .sum()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median off-diagonal distance, falling back to 1 when it vanishes.
fn reference_scale(dist: &[Vec<f64>]) -> f64 {
    let off: Vec<f64> = dist
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(|(_, d)| *d)
        })
        .collect();
    let m = median(off);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn bandwidth_grid(scale: f64) -> Vec<f64> {
    (0..BANDWIDTH_GRID_POINTS)
        .map(|k| {
            let e = -2.0 + 4.0 * k as f64 / (BANDWIDTH_GRID_POINTS - 1) as f64;
            scale * libm::pow(10.0, e)
        })
        .collect()
}

/// `(bandwidth, LOO error)` minimising the error over the grid. When every
/// bandwidth gives the same error the grid median (the scale itself) wins.
fn select_bandwidth(dist: &[Vec<f64>], y: &[f64]) -> (f64, f64) {
    let scale = reference_scale(dist);
    let errors: Vec<(f64, f64)> = bandwidth_grid(scale)
        .into_iter()
        .map(|b| (b, loo_error(dist, y, b)))
        .collect();
    let lo = errors.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let hi = errors.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * (1.0 + lo) {
        return (scale, lo);
    }
    errors
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, e| {
            if e.1 < best.1 {
                e
            } else {
                best
            }
        })
}

fn pairwise<T>(
    fs: &[DiscretizedFunction],
    mut entry: impl FnMut(&DiscretizedFunction, &DiscretizedFunction) -> Result<T>,
    diagonal: T,
) -> Result<Vec<Vec<T>>>
where
    T: Copy,
{
    fs.iter()
        .enumerate()
        .map(|(i, f)| {
            fs.iter()
                .enumerate()
                .map(|(j, g)| if i == j { Ok(diagonal) } else { entry(f, g) })
                .collect()
        })
        .collect()
}

fn check_size(train: &Dataset) -> Result<()> {
    if train.len() < 3 {
        return Err(invalid("bandwidth selection needs at least 3 samples"));
    }
    Ok(())
}

/// Leave-one-out choice of bandwidth for a fixed distance.
pub fn cv_bandwidth(train: &Dataset, d: NwDistance) -> Result<f64> {
    check_size(train)?;
    let dist = pairwise(train.predictors(), |f, g| distance(f, g, d), 0.0)?;
    Ok(select_bandwidth(&dist, train.responses()).0)
}

/// Joint leave-one-out choice of `(λ, bandwidth)` for the shape distance.
pub fn cv_lambda_bandwidth(train: &Dataset) -> Result<(f64, f64)> {
    check_size(train)?;
    let parts = pairwise(train.predictors(), shape_parts, (0.0, 0.0))?;
    let mut best = (LAMBDA_GRID[0], f64::NAN, f64::INFINITY);
    for &lambda in &LAMBDA_GRID {
        let dist: Vec<Vec<f64>> = parts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(a, p)| lambda * a + (1.0 - lambda) * p)
                    .collect()
            })
            .collect();
        let (b, err) = select_bandwidth(&dist, train.responses());
        if err < best.2 {
            best = (lambda, b, err);
        }
    }
    Ok((best.0, best.1))
}

/// A kernel regression model with cross-validated hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NwModel {
    pub train: Dataset,
    pub distance: NwDistance,
    pub bandwidth: f64,
    /// For the shape distance: SRVF template queries are aligned to first.
    pub template: Option<DiscretizedFunction>,
}

impl NwModel {
    pub fn fit_l2(data: &Dataset) -> Result<Self> {
        Ok(NwModel {
            train: data.clone(),
            distance: NwDistance::L2,
            bandwidth: cv_bandwidth(data, NwDistance::L2)?,
            template: None,
        })
    }

    /// Pre-aligns the predictors, then selects `(λ, bandwidth)`.
    pub fn fit_shape(data: &Dataset) -> Result<Self> {
        let aligned = complete_alignment(data.predictors(), &AlignOptions::default())?;
        let train = Dataset::new(aligned.amplitudes, data.responses().to_vec())?;
        let (lambda, bandwidth) = cv_lambda_bandwidth(&train)?;
        Ok(NwModel {
            train,
            distance: NwDistance::Shape { lambda },
            bandwidth,
            template: Some(aligned.template),
        })
    }

    pub fn predict(&self, f: &DiscretizedFunction) -> Result<f64> {
        let query = match &self.template {
            Some(t) => value_action(f, &dp_align(t, &srvf(f))?.warping)?,
            None => f.clone(),
        };
        Ok(nw_predict(&self.train, &query, self.bandwidth, self.distance)?.value)
    }

    pub fn response_mean(&self) -> f64 {
        mean(self.train.responses())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use core::f64::consts::PI;

    fn data(g: Grid, n: usize) -> Dataset {
        let fs: Vec<_> = (0..n)
            .map(|k| {
                let a = 0.3 + 0.2 * k as f64;
                DiscretizedFunction::from_fn(g, |t| a * libm::sin(2.0 * PI * t) + 0.1 * k as f64)
                    .unwrap()
            })
            .collect();
        let y = (0..n).map(|k| libm::sin(k as f64)).collect();
        Dataset::new(fs, y).unwrap()
    }

    #[test]
    fn kernel_limits() {
        let train = data(Grid::new(40).unwrap(), 6);
        let f = &train.predictors()[2];
        let narrow = nw_predict(&train, f, 1e-3, NwDistance::L2).unwrap();
        assert!((narrow.value - train.responses()[2]).abs() < 1e-10 && !narrow.degenerate);
        let wide = nw_predict(&train, f, 1e8, NwDistance::L2).unwrap();
        assert!((wide.value - mean(train.responses())).abs() < 1e-10);
        assert!(nw_predict(&train, f, 0.0, NwDistance::L2).is_err());
    }

    #[test]
    fn underflow_falls_back_to_the_mean() {
        let train = data(Grid::new(40).unwrap(), 5);
        let far = DiscretizedFunction::constant(train.grid(), 1e3);
        let p = nw_predict(&train, &far, 1e-3, NwDistance::L2).unwrap();
        assert!(p.degenerate);
        assert!((p.value - mean(train.responses())).abs() < 1e-12);
    }

    #[test]
    fn unit_lambda_is_amplitude_only() {
        let train = data(Grid::new(40).unwrap(), 5);
        let f = &train.predictors()[1];
        for g in train.predictors() {
            let (a, _) = shape_parts(f, g).unwrap();
            let d = distance(f, g, NwDistance::Shape { lambda: 1.0 }).unwrap();
            assert_eq!(d, a);
        }
    }

    #[test]
    fn selected_bandwidth_minimises_loo_error() {
        let train = data(Grid::new(40).unwrap(), 8);
        let b = cv_bandwidth(&train, NwDistance::L2).unwrap();
        let dist = pairwise(
            train.predictors(),
            |f, g| distance(f, g, NwDistance::L2),
            0.0,
        )
        .unwrap();
        let best = loo_error(&dist, train.responses(), b);
        for cand in bandwidth_grid(reference_scale(&dist)) {
            assert!(best <= loo_error(&dist, train.responses(), cand));
        }
    }

    #[test]
    fn duplicated_data_does_not_widen_the_bandwidth() {
        let train = data(Grid::new(40).unwrap(), 8);
        let b = cv_bandwidth(&train, NwDistance::L2).unwrap();
        let idx: Vec<usize> = (0..8).flat_map(|i| [i, i]).collect();
        let doubled = train.subset(&idx).unwrap();
        let b2 = cv_bandwidth(&doubled, NwDistance::L2).unwrap();
        assert!(b2 <= b, "{b2} > {b}");
    }

    #[test]
    fn constant_responses_pick_the_grid_median() {
        let g = Grid::new(40).unwrap();
        let mut train = data(g, 6);
        train = Dataset::new(train.predictors().to_vec(), alloc::vec![2.0; 6]).unwrap();
        let dist = pairwise(
            train.predictors(),
            |f, g| distance(f, g, NwDistance::L2),
            0.0,
        )
        .unwrap();
        let b = cv_bandwidth(&train, NwDistance::L2).unwrap();
        assert_eq!(b, reference_scale(&dist));
        let (_, bs) = cv_lambda_bandwidth(&train).unwrap();
        assert!(bs > 0.0);
    }
}
