//! Command implementations.

use std::path::{Path, PathBuf};

use efrm_core::basis::{BasisKind, BasisSpec};
use efrm_core::models::{
    complete_alignment, fit_efrm_with, fit_flm, fit_paflm, AlignOptions, Dataset, EfrmModel,
    FitOptions, FlmModel, GradientMethod, Mode, NwModel, PaflmModel,
};
use efrm_core::sim::{
    decay_experiment, kfold_cv, rmse, CoefficientScheme, Contamination, DecayConfig,
    EvalReport, SimConfig,
};
use efrm_core::DiscretizedFunction;
use log::{info, warn};
use serde_json::json;

use crate::config::{ConfigFile, GradientName, MethodName};
use crate::csvio::{self, fmt_f64};
use crate::error::{CliError, CliResult};
use crate::model_file::{self, BasisName, Model, ModeName};
use crate::{AlignArgs, CrossvalArgs, DecayArgs, FitArgs, ModelArgs, PredictArgs, SimulateArgs};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_K: usize = 5;
pub const DEFAULT_RUNS: usize = 200;
pub const DEFAULT_A_GRID: [f64; 5] = [0.05, 0.15, 0.25, 0.35, 0.5];
pub const ALL_MODELS: [&str; 7] = ["efrm-1", "efrm-2", "efrm-3", "flm", "paflm", "np-l2", "np-shape"];

fn required(flag: Option<PathBuf>, file: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    flag.or_else(|| file.clone())
        .ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn basis_spec(basis: Option<BasisName>, j: Option<usize>, default: BasisSpec) -> BasisSpec {
    let kind = match basis {
        Some(BasisName::Fourier) => BasisKind::Fourier,
        Some(BasisName::Bspline) => BasisKind::BSpline {
            order: efrm_core::basis::DEFAULT_BSPLINE_ORDER,
        },
        None => default.kind,
    };
    BasisSpec {
        kind,
        size: j.unwrap_or(default.size),
    }
}

/// Model hyperparameters after applying flags, config file and defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Hyper {
    basis: BasisSpec,
    degree: usize,
    mode: Mode,
    gradient: GradientMethod,
}

impl Hyper {
    fn resolve(a: &ModelArgs, c: &ConfigFile) -> CliResult<Self> {
        let degree = a.h_degree.map(|d| d as usize).or(c.h_degree).unwrap_or(2);
        if !(1..=3).contains(&degree) {
            return Err(CliError::Usage(format!("h degree {degree} is not 1, 2 or 3")));
        }
        Ok(Hyper {
            basis: basis_spec(a.basis.or(c.basis), a.j.or(c.j), BasisSpec::fourier(2)),
            degree,
            mode: a.mode.or(c.mode).unwrap_or(ModeName::Function).into(),
            gradient: match a.gradient.or(c.gradient).unwrap_or(GradientName::Fd) {
                GradientName::Fd => GradientMethod::ForwardDifference,
                GradientName::Envelope => GradientMethod::Envelope,
            },
        })
    }

    fn options(&self) -> FitOptions {
        FitOptions {
            gradient: self.gradient,
            ..FitOptions::default()
        }
    }

    fn fit_efrm(&self, data: &Dataset, degree: usize) -> efrm_core::Result<EfrmModel> {
        fit_efrm_with(data, degree, self.basis, self.mode, &self.options())
    }
}

fn load_dataset(data: &Path, responses: &Path) -> CliResult<Dataset> {
    let fs = csvio::read_predictors(data)?;
    let y = csvio::read_responses(responses)?;
    if fs.len() != y.len() {
        return Err(CliError::Usage(format!(
            "{} has {} rows but {} has {}",
            data.display(),
            fs.len(),
            responses.display(),
            y.len()
        )));
    }
    if fs.is_empty() {
        return Err(CliError::parse(data, None, "no predictor rows"));
    }
    Ok(Dataset::new(fs, y)?)
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialise") + "\n";
    match path {
        Some(p) => csvio::write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_table(path: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    match path {
        Some(p) => csvio::write_table(p, header, rows),
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let wrap = |e: csv::Error| CliError::Usage(format!("cannot write to stdout: {e}"));
            w.write_record(header).map_err(wrap)?;
            for r in rows {
                w.write_record(r).map_err(wrap)?;
            }
            w.flush()
                .map_err(|e| CliError::io(PathBuf::from("<stdout>"), e))
        }
    }
}

fn values(fs: &[DiscretizedFunction]) -> Vec<Vec<f64>> {
    fs.iter().map(|f| f.values().to_vec()).collect()
}

pub fn simulate(a: &SimulateArgs, c: &ConfigFile) -> CliResult<()> {
    let out = required(a.out.clone(), &c.out, "out")?;
    let seed = a.seed.or(c.seed).unwrap_or(DEFAULT_SEED);
    let family = a.sim.or(c.sim).unwrap_or(1);
    let mut cfg = match family {
        1 => SimConfig::data1(seed),
        2 => SimConfig::data2(seed),
        other => return Err(CliError::Usage(format!("unknown simulation family {other}"))),
    };
    cfg.n_samples = a.n_samples.or(c.n_samples).unwrap_or(cfg.n_samples);
    cfg.grid_size = a.grid_size.or(c.grid_size).unwrap_or(cfg.grid_size);
    cfg.warp_amplitude = a.warp_amplitude.or(c.warp_amplitude).unwrap_or(cfg.warp_amplitude);
    cfg.noise_sd = a.noise_sd.or(c.noise_sd).unwrap_or(cfg.noise_sd);
    let basis = basis_spec(a.basis.or(c.basis), a.j.or(c.j), cfg.basis);
    if basis != cfg.basis {
        cfg.basis = basis;
        if let CoefficientScheme::Fixed(v) = &cfg.beta {
            if v.len() != basis.size {
                cfg.beta = CoefficientScheme::Fixed(vec![1.0; basis.size]);
            }
        }
    }

    let (data, truth) = efrm_core::sim::simulate(&cfg)?;
    create_dir(&out)?;
    let n = cfg.grid_size;
    csvio::write_functions(&out.join("predictors.csv"), &values(data.predictors()), n)?;
    csvio::write_column(&out.join("responses.csv"), "y", data.responses())?;
    let entry = model_file::BasisEntry::new(cfg.basis, n);
    let truth_json = json!({
        "sim": family,
        "seed": seed,
        "n_samples": cfg.n_samples,
        "basis": entry.basis,
        "J": entry.size,
        "grid_size": n,
        "warp_amplitude": cfg.warp_amplitude,
        "noise_sd": cfg.noise_sd,
        "beta_coefficients": truth.beta_coefficients,
        "beta": truth.beta.values(),
        "beta_sign": truth.beta_sign,
        "h": {
            "degree": truth.h.degree(),
            "coefficients": truth.h.coefficients(),
        },
        "index": truth.index,
        "warps": truth.warps.iter().map(|w| w.values().to_vec()).collect::<Vec<_>>(),
    });
    write_json(Some(&out.join("truth.json")), &truth_json)?;
    info!("wrote {} samples to {}", cfg.n_samples, out.display());
    Ok(())
}

fn fit_model(method: MethodName, hyper: &Hyper, data: &Dataset) -> efrm_core::Result<Model> {
    Ok(match method {
        MethodName::Efrm => Model::Efrm(hyper.fit_efrm(data, hyper.degree)?),
        MethodName::Flm => Model::Flm(fit_flm(data, hyper.basis)?),
        MethodName::Paflm => Model::Paflm(fit_paflm(data, hyper.basis)?),
    })
}

fn predict_all(model: &Model, fs: &[DiscretizedFunction]) -> efrm_core::Result<Vec<f64>> {
    fs.iter().map(|f| model.predict(f)).collect()
}

pub fn fit(a: &FitArgs, c: &ConfigFile) -> CliResult<()> {
    let data_path = required(a.data.data.clone(), &c.data, "data")?;
    let resp_path = required(a.data.responses.clone(), &c.responses, "responses")?;
    let model_path = required(a.model.clone(), &c.model, "model")?;
    let hyper = Hyper::resolve(&a.model_args, c)?;
    let method = a.method.or(c.method).unwrap_or(MethodName::Efrm);
    let data = load_dataset(&data_path, &resp_path)?;

    let model = fit_model(method, &hyper, &data)?;
    let fitted = predict_all(&model, data.predictors())?;
    let training_rmse = rmse(data.responses(), &fitted)?;
    let mut report = json!({
        "method": method_label(method, hyper.degree),
        "n_samples": data.len(),
        "training_rmse": training_rmse,
    });
    match &model {
        Model::Efrm(m) => {
            let d = m.diagnostics();
            if !d.converged {
                warn!("fit did not converge: final cost {}", d.final_cost);
            }
            report["final_cost"] = json!(d.final_cost);
            report["outer_iterations"] = json!(d.outer_iterations);
            report["inner_iterations"] = json!(d.inner_iterations);
            report["converged"] = json!(d.converged);
        }
        Model::Flm(_) | Model::Paflm(_) => {
            let rss: f64 = data
                .responses()
                .iter()
                .zip(&fitted)
                .map(|(y, p)| (y - p) * (y - p))
                .sum();
            report["final_cost"] = json!(rss);
            report["outer_iterations"] = json!(0);
            report["inner_iterations"] = json!(0);
            report["converged"] = json!(true);
        }
    }
    if let Some(k) = a.k.or(c.k) {
        let seed = a.seed.or(c.seed).unwrap_or(DEFAULT_SEED);
        let cv = kfold_cv(&data, k, seed, |d| fit_model(method, &hyper, d), |m, f| m.predict(f))?;
        let flm = kfold_cv(&data, k, seed, |d| fit_flm(d, hyper.basis), |m: &FlmModel, f| m.predict(f))?;
        report["cv"] = json!({
            "k": k,
            "seed": seed,
            "rmse_mean": cv.mean_rmse,
            "rmse_sd": cv.sd_rmse,
            "fold_rmse": cv.fold_rmse,
            "flm_rmse_mean": flm.mean_rmse,
            "flm_rmse_sd": flm.sd_rmse,
            "flm_fold_rmse": flm.fold_rmse,
        });
    }
    model_file::save(&model, &model_path)?;
    write_json(a.out.as_deref().or(c.out.as_deref()), &report)
}

fn method_label(method: MethodName, degree: usize) -> String {
    match method {
        MethodName::Efrm => format!("efrm-{degree}"),
        MethodName::Flm => "flm".into(),
        MethodName::Paflm => "paflm".into(),
    }
}

pub fn predict(a: &PredictArgs, c: &ConfigFile) -> CliResult<()> {
    let model_path = required(a.model.clone(), &c.model, "model")?;
    let data_path = required(a.data.clone(), &c.data, "data")?;
    let model = model_file::load(&model_path)?;
    let rows = csvio::read_predictor_rows(&data_path)?;
    let expected = model.grid().len();
    if let Some(found) = rows.first().map(Vec::len) {
        if found != expected {
            return Err(CliError::Usage(format!(
                "grid mismatch: model expects {expected} points per row, {} has {found}",
                data_path.display()
            )));
        }
    }
    let grid = model.grid();
    let fs = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            DiscretizedFunction::new(grid, r)
                .map_err(|e| CliError::parse(&data_path, Some(i as u64 + 1), e.to_string()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let predictions = predict_all(&model, &fs)?;
    let rows: Vec<Vec<String>> = predictions.iter().map(|p| vec![fmt_f64(*p)]).collect();
    emit_table(
        a.out.as_deref().or(c.out.as_deref()),
        &["prediction".to_string()],
        &rows,
    )
}

fn cross_validate(
    name: &str,
    data: &Dataset,
    k: usize,
    seed: u64,
    hyper: &Hyper,
) -> efrm_core::Result<EvalReport> {
    match name {
        "efrm-1" | "efrm-2" | "efrm-3" => {
            let degree = name[5..].parse().expect("degree suffix");
            kfold_cv(data, k, seed, |d| hyper.fit_efrm(d, degree), |m: &EfrmModel, f| m.predict(f))
        }
        "flm" => kfold_cv(data, k, seed, |d| fit_flm(d, hyper.basis), |m: &FlmModel, f| {
            m.predict(f)
        }),
        "paflm" => kfold_cv(data, k, seed, |d| fit_paflm(d, hyper.basis), |m: &PaflmModel, f| {
            m.predict(f)
        }),
        "np-l2" => kfold_cv(data, k, seed, NwModel::fit_l2, |m: &NwModel, f| m.predict(f)),
        "np-shape" => kfold_cv(data, k, seed, NwModel::fit_shape, |m: &NwModel, f| m.predict(f)),
        other => unreachable!("model name {other} validated earlier"),
    }
}

pub fn crossval(a: &CrossvalArgs, c: &ConfigFile) -> CliResult<()> {
    let data_path = required(a.data.data.clone(), &c.data, "data")?;
    let resp_path = required(a.data.responses.clone(), &c.responses, "responses")?;
    let hyper = Hyper::resolve(&a.model_args, c)?;
    let k = a.k.or(c.k).unwrap_or(DEFAULT_K);
    if k < 2 {
        return Err(CliError::Usage("--k must be at least 2".into()));
    }
    let seed = a.seed.or(c.seed).unwrap_or(DEFAULT_SEED);
    let models: Vec<String> = a
        .models
        .clone()
        .or_else(|| c.models.clone())
        .unwrap_or_else(|| ALL_MODELS.iter().map(|s| s.to_string()).collect());
    if let Some(bad) = models.iter().find(|m| !ALL_MODELS.contains(&m.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown model {bad:?}; expected one of {}",
            ALL_MODELS.join(", ")
        )));
    }
    let data = load_dataset(&data_path, &resp_path)?;

    let mut header: Vec<String> = ["model", "mean_rmse", "sd_rmse"].map(String::from).to_vec();
    header.extend((1..=k).map(|f| format!("fold_{f}")));
    let mut rows = Vec::with_capacity(models.len());
    for name in &models {
        info!("cross-validating {name}");
        let mut row = vec![name.clone()];
        match cross_validate(name, &data, k, seed, &hyper) {
            Ok(r) => {
                row.push(fmt_f64(r.mean_rmse));
                row.push(fmt_f64(r.sd_rmse));
                row.extend(r.fold_rmse.iter().copied().map(fmt_f64));
                if let Some(secs) = r.runtime_secs {
                    info!("{name}: {secs:.3} s");
                }
            }
            Err(e) => {
                warn!("{name} failed: {e}");
                row.extend(std::iter::repeat_n("NA".to_string(), k + 2));
            }
        }
        rows.push(row);
    }
    emit_table(a.out.as_deref().or(c.out.as_deref()), &header, &rows)
}

pub fn decay(a: &DecayArgs, c: &ConfigFile) -> CliResult<()> {
    let a_grid = a
        .a_grid
        .clone()
        .or_else(|| c.a_grid.clone())
        .unwrap_or_else(|| DEFAULT_A_GRID.to_vec());
    if a_grid.is_empty() {
        return Err(CliError::Usage("--a-grid is empty".into()));
    }
    let runs = a.runs.or(c.runs).unwrap_or(DEFAULT_RUNS);
    let seed = a.seed.or(c.seed).unwrap_or(DEFAULT_SEED);
    let mut cfg = DecayConfig::new(a_grid, runs, seed);
    cfg.n_samples = a.n_samples.or(c.n_samples).unwrap_or(cfg.n_samples);
    cfg.grid_size = a.grid_size.or(c.grid_size).unwrap_or(cfg.grid_size);
    cfg.noise_sd = a.noise_sd.or(c.noise_sd).unwrap_or(cfg.noise_sd);
    cfg.basis = basis_spec(a.basis.or(c.basis), a.j.or(c.j), cfg.basis);

    let header = ["a", "contamination_type", "mean_r2", "sd_r2", "n_runs"].map(String::from);
    let mut rows = Vec::new();
    for contamination in [Contamination::Value, Contamination::Norm] {
        for r in decay_experiment(&cfg, contamination)? {
            rows.push(vec![
                fmt_f64(r.a),
                r.contamination.name().to_string(),
                fmt_f64(r.mean_r2),
                fmt_f64(r.sd_r2),
                r.n_runs.to_string(),
            ]);
        }
    }
    emit_table(a.out.as_deref().or(c.out.as_deref()), &header, &rows)
}

pub fn align(a: &AlignArgs, c: &ConfigFile) -> CliResult<()> {
    let data_path = required(a.data.clone(), &c.data, "data")?;
    let out = required(a.out.clone(), &c.out, "out")?;
    let fs = csvio::read_predictors(&data_path)?;
    if fs.is_empty() {
        return Err(CliError::parse(&data_path, None, "no predictor rows"));
    }
    let n = fs[0].grid().len();
    let aligned = complete_alignment(&fs, &AlignOptions::default())?;
    info!("alignment finished after {} iterations", aligned.iterations);
    create_dir(&out)?;
    csvio::write_functions(&out.join("amplitudes.csv"), &values(&aligned.amplitudes), n)?;
    let phases: Vec<Vec<f64>> = aligned.phases.iter().map(|w| w.values().to_vec()).collect();
    csvio::write_functions(&out.join("phases.csv"), &phases, n)
}

