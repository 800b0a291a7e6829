//! The elastic regression model and its baselines.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{DiscretizedFunction, Grid};
use crate::linalg::{least_squares, Matrix};

mod align;
mod efrm;
mod flm;
mod nw;

pub use align::{complete_alignment, AlignOptions, CompleteAlignment};
pub use efrm::{
    efrm_cost, efrm_index_value, fit_beta, fit_efrm, fit_efrm_with, normalize_identifiability,
    predict_efrm, BetaFit, EfrmModel, FitDiagnostics, FitOptions, GradientMethod,
};
pub use flm::{fit_flm, fit_paflm, predict_flm, predict_paflm, FlmModel, PaflmModel};
pub use nw::{
    cv_bandwidth, cv_lambda_bandwidth, loo_error, nw_predict, NwDistance, NwModel, NwPrediction,
    BANDWIDTH_GRID_POINTS, LAMBDA_GRID,
};

/// Whether the model works on the predictors or on their SRVFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Function,
    Srvf,
}

/// Paired functional predictors and scalar responses on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    predictors: Vec<DiscretizedFunction>,
    responses: Vec<f64>,
}

impl Dataset {
    pub fn new(predictors: Vec<DiscretizedFunction>, responses: Vec<f64>) -> Result<Self> {
        let first = predictors.first().ok_or(Error::EmptyList)?;
        if predictors.len() != responses.len() {
            return Err(invalid(alloc::format!(
                "{} predictors but {} responses",
                predictors.len(),
                responses.len()
            )));
        }
        let grid = first.grid();
        for f in &predictors {
            grid.check(&f.grid())?;
        }
        if let Some(i) = responses.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Dataset {
            predictors,
            responses,
        })
    }

    pub fn grid(&self) -> Grid {
        self.predictors[0].grid()
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn predictors(&self) -> &[DiscretizedFunction] {
        &self.predictors
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(
            indices
                .iter()
                .map(|&i| self.predictors[i].clone())
                .collect(),
            indices.iter().map(|&i| self.responses[i]).collect(),
        )
    }
}

/// A polynomial of degree 1, 2 or 3 with coefficients stored highest
/// degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPolynomial {
    coefficients: Vec<f64>,
}

impl IndexPolynomial {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if !(2..=4).contains(&coefficients.len()) {
            return Err(invalid("index polynomial degree must be 1, 2 or 3"));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(IndexPolynomial { coefficients })
    }

    /// `h(x) = x`.
    pub fn identity() -> Self {
        IndexPolynomial {
            coefficients: alloc::vec![1.0, 0.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        let d = self.degree();
        self.coefficients[..d]
            .iter()
            .enumerate()
            .fold(0.0, |acc, (k, c)| acc * x + (d - k) as f64 * c)
    }
}

/// Least-squares polynomial of the given degree through `(x_i, y_i)`.
///
/// The Vandermonde system is built in the centred and scaled variable
/// `u = (x − m) / s` and solved by QR, then mapped back to powers of `x`.
pub fn fit_index_h(x: &[f64], y: &[f64], degree: usize) -> Result<IndexPolynomial> {
    if !(1..=3).contains(&degree) {
        return Err(invalid("index polynomial degree must be 1, 2 or 3"));
    }
    if x.len() != y.len() {
        return Err(invalid("index and response lengths differ"));
    }
    if x.len() < degree + 1 {
        return Err(Error::DegenerateFit(degree));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs()))) {
        return Err(Error::DegenerateFit(degree));
    }
    let m = 0.5 * (lo + hi);
    let s = 0.5 * (hi - lo);
    let rows: Vec<Vec<f64>> = x
        .iter()
        .map(|&xi| {
            let u = (xi - m) / s;
            (0..=degree).map(|k| libm::pow(u, k as f64)).collect()
        })
        .collect();
    let a = least_squares(&Matrix::from_rows(&rows), y).map_err(|e| match e {
        Error::SingularDesign { .. } => Error::DegenerateFit(degree),
        other => other,
    })?;
    // Σ_k a_k ((x − m)/s)^k expanded in powers of x, lowest first
    let mut power = alloc::vec![0.0; degree + 1];
    let mut term = alloc::vec![1.0]; // ((x − m)/s)^k, lowest first
    for (k, ak) in a.iter().enumerate() {
        if k > 0 {
            let mut next = alloc::vec![0.0; term.len() + 1];
            for (p, t) in term.iter().enumerate() {
                next[p + 1] += t / s;
                next[p] -= t * m / s;
            }
            term = next;
        }
        for (p, t) in term.iter().enumerate() {
            power[p] += ak * t;
        }
    }
    power.reverse();
    IndexPolynomial::new(power)
}

/// Arithmetic mean.
pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_coeffs(p: &IndexPolynomial, want: &[f64], tol: f64) {
        assert_eq!(p.coefficients().len(), want.len());
        for (a, b) in p.coefficients().iter().zip(want) {
            assert!((a - b).abs() < tol, "{:?} vs {:?}", p.coefficients(), want);
        }
    }

    #[test]
    fn polynomial_evaluation() {
        let p = IndexPolynomial::new(alloc::vec![2.0, 3.0, 1.0]).unwrap();
        assert_eq!(p.eval(2.0), 15.0);
        assert_eq!(p.derivative_at(2.0), 11.0);
        assert_eq!(IndexPolynomial::identity().eval(-4.5), -4.5);
        assert!(IndexPolynomial::new(alloc::vec![1.0]).is_err());
        assert!(IndexPolynomial::new(alloc::vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn fits_exact_polynomials() {
        let x: Vec<f64> = (0..30).map(|i| -2.0 + 0.17 * i as f64).collect();
        let quad: Vec<f64> = x.iter().map(|x| 2.0 * x * x + 3.0 * x + 1.0).collect();
        assert_coeffs(&fit_index_h(&x, &quad, 2).unwrap(), &[2.0, 3.0, 1.0], 1e-8);
        assert_coeffs(&fit_index_h(&x, &x, 1).unwrap(), &[1.0, 0.0], 1e-10);
        let flat = alloc::vec![5.0; x.len()];
        assert_coeffs(&fit_index_h(&x, &flat, 1).unwrap(), &[0.0, 5.0], 1e-10);
    }

    #[test]
    fn equal_indices_are_degenerate() {
        let x = [1.5; 10];
        let y: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(fit_index_h(&x, &y, 2), Err(Error::DegenerateFit(2)));
        assert!(fit_index_h(&[0.0, 1.0], &[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn dataset_validation() {
        let g = Grid::new(5).unwrap();
        let f = DiscretizedFunction::zeros(g);
        assert!(Dataset::new(alloc::vec![], alloc::vec![]).is_err());
        assert!(Dataset::new(alloc::vec![f.clone()], alloc::vec![1.0, 2.0]).is_err());
        let other = DiscretizedFunction::zeros(Grid::new(6).unwrap());
        assert!(matches!(
            Dataset::new(alloc::vec![f.clone(), other], alloc::vec![1.0, 2.0]),
            Err(Error::GridMismatch { .. })
        ));
        let d = Dataset::new(alloc::vec![f.clone(), f], alloc::vec![1.0, 2.0]).unwrap();
        assert_eq!(d.subset(&[1]).unwrap().responses(), &[2.0]);
    }
}
