//! Functional linear model `y = α + ⟨β, f⟩ + ε`, optionally after
//! pre-aligning the predictors.

use alloc::vec::Vec;

use super::align::{complete_alignment, AlignOptions};
use super::Dataset;
use crate::basis::{BasisSpec, BasisSystem};
use crate::error::{Error, Result};
use crate::grid::DiscretizedFunction;
use crate::linalg::{dot, least_squares, Matrix};
use crate::warp::{dp_align, srvf, value_action};

#[derive(Debug, Clone, PartialEq)]
pub struct FlmModel {
    pub basis: BasisSystem,
    pub alpha: f64,
    pub c: Vec<f64>,
}

impl FlmModel {
    pub fn beta(&self) -> Result<DiscretizedFunction> {
        self.basis.expand(&self.c)
    }

    pub fn predict(&self, f: &DiscretizedFunction) -> Result<f64> {
        Ok(self.alpha + dot(&self.c, &self.basis.project(f)?))
    }
}

/// Ordinary least squares of `y` on `[1, ⟨b_1, f⟩, …, ⟨b_J, f⟩]`.
pub fn fit_flm(data: &Dataset, basis: BasisSpec) -> Result<FlmModel> {
    let basis = basis.build(data.grid())?;
    let columns = basis.len() + 1;
    if data.len() <= basis.len() {
        return Err(Error::SingularDesign {
            rank: data.len().min(columns),
            columns,
        });
    }
    let rows = data
        .predictors()
        .iter()
        .map(|f| {
            let mut row = alloc::vec![1.0];
            row.extend(basis.project(f)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let coef = least_squares(&Matrix::from_rows(&rows), data.responses())?;
    Ok(FlmModel {
        basis,
        alpha: coef[0],
        c: coef[1..].to_vec(),
    })
}

pub fn predict_flm(model: &FlmModel, f: &DiscretizedFunction) -> Result<f64> {
    model.predict(f)
}

/// FLM fitted on amplitudes from a groupwise alignment of the predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct PaflmModel {
    pub flm: FlmModel,
    /// SRVF template new predictors are aligned to.
    pub template: DiscretizedFunction,
}

impl PaflmModel {
    /// `f ∘ γ` with `γ` aligning the SRVF of `f` to the template.
    pub fn amplitude(&self, f: &DiscretizedFunction) -> Result<DiscretizedFunction> {
        let gamma = dp_align(&self.template, &srvf(f))?.warping;
        value_action(f, &gamma)
    }

    pub fn predict(&self, f: &DiscretizedFunction) -> Result<f64> {
        self.flm.predict(&self.amplitude(f)?)
    }
}

pub fn fit_paflm(data: &Dataset, basis: BasisSpec) -> Result<PaflmModel> {
    let aligned = complete_alignment(data.predictors(), &AlignOptions::default())?;
    let amplitudes = Dataset::new(aligned.amplitudes, data.responses().to_vec())?;
    Ok(PaflmModel {
        flm: fit_flm(&amplitudes, basis)?,
        template: aligned.template,
    })
}

pub fn predict_paflm(model: &PaflmModel, f: &DiscretizedFunction) -> Result<f64> {
    model.predict(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use core::f64::consts::PI;

    fn sample(g: Grid, k: usize) -> DiscretizedFunction {
        let (a, b, c) = (
            libm::sin(1.3 * k as f64),
            libm::cos(0.7 * k as f64 + 0.2),
            0.1 * k as f64 - 1.0,
        );
        DiscretizedFunction::from_fn(g, |t| {
            a * libm::sin(2.0 * PI * t) + b * libm::cos(2.0 * PI * t) + c * t * t
        })
        .unwrap()
    }

    #[test]
    fn recovers_an_exact_linear_model() {
        let g = Grid::new(100).unwrap();
        let spec = BasisSpec::fourier(2);
        let basis = spec.build(g).unwrap();
        let beta = basis.expand(&[0.8, -1.5]).unwrap();
        let fs: Vec<_> = (0..20).map(|k| sample(g, k)).collect();
        let y: Vec<f64> = fs
            .iter()
            .map(|f| 2.5 + crate::grid::inner_product(&beta, f).unwrap())
            .collect();
        let m = fit_flm(&Dataset::new(fs.clone(), y.clone()).unwrap(), spec).unwrap();
        assert!((m.alpha - 2.5).abs() < 1e-6);
        assert!((m.c[0] - 0.8).abs() < 1e-6 && (m.c[1] + 1.5).abs() < 1e-6);

        // residuals orthogonal to the design columns
        let res: Vec<f64> = fs
            .iter()
            .zip(&y)
            .map(|(f, yi)| yi - m.predict(f).unwrap())
            .collect();
        assert!(res.iter().sum::<f64>().abs() < 1e-8);
        for j in 0..2 {
            let s: f64 = fs
                .iter()
                .zip(&res)
                .map(|(f, r)| basis.project(f).unwrap()[j] * r)
                .sum();
            assert!(s.abs() < 1e-8);
        }
    }

    #[test]
    fn constant_responses() {
        let g = Grid::new(50).unwrap();
        let fs: Vec<_> = (0..10).map(|k| sample(g, k)).collect();
        let m = fit_flm(
            &Dataset::new(fs, alloc::vec![3.0; 10]).unwrap(),
            BasisSpec::fourier(2),
        )
        .unwrap();
        assert!((m.alpha - 3.0).abs() < 1e-8);
        assert!(m.c.iter().all(|c| c.abs() < 1e-8));
    }

    #[test]
    fn too_few_samples_is_singular() {
        let g = Grid::new(50).unwrap();
        let fs: Vec<_> = (0..4).map(|k| sample(g, k)).collect();
        let data = Dataset::new(fs, alloc::vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            fit_flm(&data, BasisSpec::fourier(4)),
            Err(Error::SingularDesign { .. })
        ));
    }

    #[test]
    fn paflm_on_aligned_data_matches_flm() {
        let g = Grid::new(60).unwrap();
        let base = DiscretizedFunction::from_fn(g, |t| libm::exp(-40.0 * (t - 0.35) * (t - 0.35)))
            .unwrap();
        let fs: Vec<_> = (1..=12)
            .map(|k| base.scaled(0.5 + 0.1 * k as f64))
            .collect();
        let y: Vec<f64> = (1..=12).map(|k| 1.0 + 0.3 * k as f64).collect();
        let data = Dataset::new(fs.clone(), y).unwrap();
        let flm = fit_flm(&data, BasisSpec::fourier(1)).unwrap();
        let paflm = fit_paflm(&data, BasisSpec::fourier(1)).unwrap();
        for f in &fs {
            let (a, b) = (flm.predict(f).unwrap(), paflm.predict(f).unwrap());
            assert!((a - b).abs() <= 1e-2 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}
