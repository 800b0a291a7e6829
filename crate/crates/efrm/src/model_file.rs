//! JSON model files.

use std::path::Path;

use efrm_core::basis::{BasisKind, BasisSpec};
use efrm_core::models::{
    EfrmModel, FitDiagnostics, FlmModel, IndexPolynomial, Mode, PaflmModel,
};
use efrm_core::{DiscretizedFunction, Grid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BasisName {
    Fourier,
    Bspline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Function,
    Srvf,
}

impl From<Mode> for ModeName {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Function => ModeName::Function,
            Mode::Srvf => ModeName::Srvf,
        }
    }
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Function => Mode::Function,
            ModeName::Srvf => Mode::Srvf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub basis: BasisName,
    #[serde(rename = "J")]
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bspline_order: Option<usize>,
    pub grid_size: usize,
}

impl BasisEntry {
    pub fn new(spec: BasisSpec, grid_size: usize) -> Self {
        let (basis, bspline_order) = match spec.kind {
            BasisKind::Fourier => (BasisName::Fourier, None),
            BasisKind::BSpline { order } => (BasisName::Bspline, Some(order)),
        };
        BasisEntry {
            basis,
            size: spec.size,
            bspline_order,
            grid_size,
        }
    }

    pub fn spec(&self) -> BasisSpec {
        match self.basis {
            BasisName::Fourier => BasisSpec::fourier(self.size),
            BasisName::Bspline => BasisSpec {
                kind: BasisKind::BSpline {
                    order: self
                        .bspline_order
                        .unwrap_or(efrm_core::basis::DEFAULT_BSPLINE_ORDER),
                },
                size: self.size,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub degree: usize,
    /// Highest degree first.
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsEntry {
    pub final_cost: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub cost_history: Vec<f64>,
    pub beta_sign: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Efrm {
        format_version: u32,
        #[serde(flatten)]
        basis: BasisEntry,
        c: Vec<f64>,
        h: IndexEntry,
        mode: ModeName,
        diagnostics: DiagnosticsEntry,
    },
    Flm {
        format_version: u32,
        #[serde(flatten)]
        basis: BasisEntry,
        alpha: f64,
        c: Vec<f64>,
    },
    Paflm {
        format_version: u32,
        #[serde(flatten)]
        basis: BasisEntry,
        alpha: f64,
        c: Vec<f64>,
        /// SRVF template on the model grid.
        template: Vec<f64>,
    },
}

/// A model ready for prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Efrm(EfrmModel),
    Flm(FlmModel),
    Paflm(PaflmModel),
}

impl Model {
    pub fn grid(&self) -> Grid {
        match self {
            Model::Efrm(m) => m.grid(),
            Model::Flm(m) => m.basis.grid(),
            Model::Paflm(m) => m.flm.basis.grid(),
        }
    }

    pub fn predict(&self, f: &DiscretizedFunction) -> efrm_core::Result<f64> {
        match self {
            Model::Efrm(m) => m.predict(f),
            Model::Flm(m) => m.predict(f),
            Model::Paflm(m) => m.predict(f),
        }
    }

    pub fn to_file(&self) -> ModelFile {
        match self {
            Model::Efrm(m) => {
                let d = m.diagnostics();
                ModelFile::Efrm {
                    format_version: FORMAT_VERSION,
                    basis: BasisEntry::new(m.basis().spec(), m.grid().len()),
                    c: m.coefficients().to_vec(),
                    h: IndexEntry {
                        degree: m.h().degree(),
                        coefficients: m.h().coefficients().to_vec(),
                    },
                    mode: m.mode().into(),
                    diagnostics: DiagnosticsEntry {
                        final_cost: d.final_cost,
                        outer_iterations: d.outer_iterations,
                        inner_iterations: d.inner_iterations,
                        converged: d.converged,
                        cost_history: d.cost_history.clone(),
                        beta_sign: d.beta_sign,
                    },
                }
            }
            Model::Flm(m) => ModelFile::Flm {
                format_version: FORMAT_VERSION,
                basis: BasisEntry::new(m.basis.spec(), m.basis.grid().len()),
                alpha: m.alpha,
                c: m.c.clone(),
            },
            Model::Paflm(m) => ModelFile::Paflm {
                format_version: FORMAT_VERSION,
                basis: BasisEntry::new(m.flm.basis.spec(), m.flm.basis.grid().len()),
                alpha: m.flm.alpha,
                c: m.flm.c.clone(),
                template: m.template.values().to_vec(),
            },
        }
    }

    pub fn from_file(file: ModelFile) -> efrm_core::Result<Model> {
        let check_version = |v: u32| {
            if v == FORMAT_VERSION {
                Ok(())
            } else {
                Err(efrm_core::Error::InvalidArgument(format!(
                    "unsupported model format version {v}"
                )))
            }
        };
        match file {
            ModelFile::Efrm {
                format_version,
                basis,
                c,
                h,
                mode,
                diagnostics: d,
            } => {
                check_version(format_version)?;
                let poly = IndexPolynomial::new(h.coefficients)?;
                if poly.degree() != h.degree {
                    return Err(efrm_core::Error::InvalidArgument(
                        "h degree does not match its coefficients".into(),
                    ));
                }
                Ok(Model::Efrm(EfrmModel::from_parts(
                    basis.spec(),
                    Grid::new(basis.grid_size)?,
                    c,
                    poly,
                    mode.into(),
                    FitDiagnostics {
                        final_cost: d.final_cost,
                        outer_iterations: d.outer_iterations,
                        inner_iterations: d.inner_iterations,
                        converged: d.converged,
                        cost_history: d.cost_history,
                        beta_sign: d.beta_sign,
                    },
                )?))
            }
            ModelFile::Flm {
                format_version,
                basis,
                alpha,
                c,
            } => {
                check_version(format_version)?;
                Ok(Model::Flm(flm(&basis, alpha, c)?))
            }
            ModelFile::Paflm {
                format_version,
                basis,
                alpha,
                c,
                template,
            } => {
                check_version(format_version)?;
                let flm = flm(&basis, alpha, c)?;
                let template = DiscretizedFunction::new(flm.basis.grid(), template)?;
                Ok(Model::Paflm(PaflmModel { flm, template }))
            }
        }
    }
}

fn flm(basis: &BasisEntry, alpha: f64, c: Vec<f64>) -> efrm_core::Result<FlmModel> {
    let system = basis.spec().build(Grid::new(basis.grid_size)?)?;
    if c.len() != system.len() {
        return Err(efrm_core::Error::InvalidArgument(format!(
            "{} coefficients for a basis of size {}",
            c.len(),
            system.len()
        )));
    }
    Ok(FlmModel {
        basis: system,
        alpha,
        c,
    })
}

pub fn save(model: &Model, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&model.to_file())
        .map_err(|e| CliError::Usage(format!("cannot serialise model: {e}")))?;
    crate::csvio::write_text(path, &(text + "\n"))
}

pub fn load(path: &Path) -> CliResult<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::parse(path, Some(e.line() as u64), e.to_string()))?;
    Model::from_file(file).map_err(|e| CliError::parse(path, None, e.to_string()))
}
