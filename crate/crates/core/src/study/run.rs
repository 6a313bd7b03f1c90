//! End-to-end study execution.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rayon::prelude::*;

use crate::diagnostics::{adf_test, AdfResult, LjungBoxResult};
use crate::error::{Error, Result};
use crate::irf::{irf_bands, BandOptions, IrfResult, Significance};
use crate::series::{align_daily, assemble_dataset, log_transform, make_dummy, parse_csv, CsvSchema, TimeSeries};
use crate::var::{companion_and_stability, fit_var, residual_whiteness, VarFit};
use crate::volatility::{extract_volatility, ArFit, GarchFit};

use super::config::{LagPolicy, StudyConfig, Variant};

#[derive(Debug, Clone)]
pub struct AdfRow {
    pub variable: String,
    pub result: std::result::Result<AdfResult, String>,
}

#[derive(Debug, Clone)]
pub struct VolatilitySummary {
    pub n_returns: usize,
    pub ar: ArFit,
    pub mean_lb: LjungBoxResult,
    pub garch: GarchFit,
}

#[derive(Debug, Clone)]
pub struct VariantReport {
    pub name: String,
    pub ordering: Vec<String>,
    pub exogenous: Vec<String>,
    pub p: usize,
    /// Whiteness p-values per tried lag order when the order was selected.
    pub lag_table: Option<Vec<(usize, Vec<f64>)>>,
    pub sample_start: NaiveDate,
    pub sample_end: NaiveDate,
    pub fit: VarFit,
    pub whiteness: Vec<LjungBoxResult>,
    pub spectral_radius: f64,
    pub stable: bool,
    pub irf: IrfResult,
    pub significance: Option<Significance>,
}

#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub name: String,
    pub result: std::result::Result<VariantReport, String>,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub adf: Vec<AdfRow>,
    pub volatility: std::result::Result<VolatilitySummary, String>,
    pub variants: Vec<VariantOutcome>,
    pub warnings: Vec<String>,
}

impl StudyReport {
    pub fn failed_variants(&self) -> usize {
        self.variants.iter().filter(|v| v.result.is_err()).count()
    }

    pub fn variant(&self, name: &str) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.name == name).and_then(|v| v.result.as_ref().ok())
    }
}

/// Reads every configured file from `data_dir`.
pub fn load_inputs(cfg: &StudyConfig, data_dir: &Path) -> Result<BTreeMap<String, String>> {
    cfg.files
        .iter()
        .map(|f| {
            let path = data_dir.join(&f.path);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            Ok((f.path.clone(), text))
        })
        .collect()
}

/// Parses, aligns and log-transforms the configured columns over the data range.
pub fn prepare_series(cfg: &StudyConfig, inputs: &BTreeMap<String, String>) -> Result<Vec<TimeSeries>> {
    let (start, end) = (cfg.data_range.start, cfg.data_range.end);
    let mut out = Vec::new();
    for f in &cfg.files {
        let text = inputs
            .get(&f.path)
            .ok_or_else(|| Error::Config(format!("no contents for `{}`", f.path)))?;
        let schema = CsvSchema {
            date_column: f.date_column.clone(),
            value_columns: f.columns.clone(),
        };
        let raw = parse_csv(text, &schema).map_err(|e| Error::Config(format!("{}: {e}", f.path)))?;
        for r in &raw {
            let ts = align_daily(r, start, end)?;
            out.push(if cfg.log_columns.contains(&r.name) { log_transform(&ts)? } else { ts });
        }
    }
    Ok(out)
}

/// Runs the whole study on already-loaded file contents.
pub fn run_study_inputs(cfg: &StudyConfig, inputs: &BTreeMap<String, String>) -> Result<StudyReport> {
    cfg.validate()?;
    let mut available = prepare_series(cfg, inputs)?;
    let mut warnings = Vec::new();

    let v = &cfg.volatility;
    let source = available
        .iter()
        .find(|s| s.name == v.source)
        .expect("validated source column");
    let volatility = extract_volatility(source, &v.ar_lags, v.order(), &v.output).and_then(|ex| {
        let smv = if v.log_output { log_transform(&ex.smv)? } else { ex.smv.clone() };
        Ok((ex, smv))
    });
    let volatility = match volatility {
        Ok((ex, smv)) => {
            if !ex.garch.converged {
                warnings.push(format!("GARCH for `{}` did not converge", v.source));
            }
            available.push(smv.renamed(v.output.clone()));
            Ok(VolatilitySummary {
                n_returns: ex.dsm.len(),
                ar: ex.ar,
                mean_lb: ex.mean_lb,
                garch: ex.garch,
            })
        }
        Err(e) => {
            warnings.push(format!("volatility extraction failed: {e}"));
            Err(e.to_string())
        }
    };

    for d in &cfg.dummies {
        available.push(make_dummy(&d.name, cfg.data_range.start, cfg.data_range.end, &d.dates)?);
    }

    let adf = adf_screen(cfg, &available);
    for row in &adf {
        if let Err(e) = &row.result {
            warnings.push(format!("ADF for `{}` failed: {e}", row.variable));
        }
    }

    let variants: Vec<VariantOutcome> = cfg
        .variants
        .par_iter()
        .map(|var| VariantOutcome {
            name: var.name.clone(),
            result: run_variant(cfg, &available, var).map_err(|e| e.to_string()),
        })
        .collect();
    for out in &variants {
        match &out.result {
            Err(e) => warnings.push(format!("variant `{}` failed: {e}", out.name)),
            Ok(r) => warnings.extend(variant_warnings(cfg, r)),
        }
    }

    Ok(StudyReport {
        config: cfg.clone(),
        adf,
        volatility,
        variants,
        warnings,
    })
}

/// Loads the configured files from `data_dir` and runs the study.
pub fn run_study(cfg: &StudyConfig, data_dir: &Path) -> Result<StudyReport> {
    cfg.validate()?;
    run_study_inputs(cfg, &load_inputs(cfg, data_dir)?)
}

fn adf_screen(cfg: &StudyConfig, available: &[TimeSeries]) -> Vec<AdfRow> {
    let mut names: Vec<&String> = Vec::new();
    for v in &cfg.variants {
        for n in &v.ordering {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    let (start, end) = (cfg.estimation_range.start, cfg.estimation_range.end);
    names
        .into_iter()
        .map(|name| {
            let result = available
                .iter()
                .find(|s| &s.name == name)
                .ok_or_else(|| Error::UnknownName(name.clone()))
                .and_then(|s| s.slice(start, end))
                .and_then(|s| {
                    let set = cfg.adf.setting(name);
                    adf_test(s.values(), set.spec, set.lags)
                })
                .map_err(|e| e.to_string());
            AdfRow {
                variable: name.clone(),
                result,
            }
        })
        .collect()
}

/// Dataset whose first `p` days are the presample for the estimation range.
fn variant_dataset(cfg: &StudyConfig, available: &[TimeSeries], var: &Variant, p: usize) -> Result<crate::series::Dataset> {
    let start = cfg.estimation_range.start - Days::new(p as u64);
    for name in var.ordering.iter().chain(&var.exogenous) {
        let s = available
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| Error::UnknownName(name.clone()))?;
        if s.start() > start {
            return Err(Error::InsufficientData {
                required: p,
                available: (cfg.estimation_range.start - s.start()).num_days().max(0) as usize,
            });
        }
    }
    assemble_dataset(available, &var.ordering, &var.exogenous, start, cfg.estimation_range.end)
}

fn run_variant(cfg: &StudyConfig, available: &[TimeSeries], var: &Variant) -> Result<VariantReport> {
    let h = cfg.var.whiteness_lags;
    let (fit, whiteness, lag_table) = match cfg.lag_policy(var) {
        LagPolicy::Fixed(p) => {
            let fit = fit_var(&variant_dataset(cfg, available, var, p)?, p, &var.exogenous)?;
            let white = residual_whiteness(&fit, h)?;
            (fit, white, None)
        }
        LagPolicy::Select { min, max, alpha } => {
            let mut table = Vec::new();
            let mut chosen = None;
            for p in min..=max {
                let fit = fit_var(&variant_dataset(cfg, available, var, p)?, p, &var.exogenous)?;
                let white = residual_whiteness(&fit, h)?;
                let pv: Vec<f64> = white.iter().map(|r| r.p_value).collect();
                let ok = white.iter().all(|r| r.is_white(alpha));
                table.push((p, pv));
                if ok {
                    chosen = Some((fit, white));
                    break;
                }
            }
            let Some((fit, white)) = chosen else {
                return Err(Error::NoWhiteLag {
                    p_min: min,
                    p_max: max,
                    alpha,
                    table,
                });
            };
            (fit, white, Some(table))
        }
    };
    let stability = companion_and_stability(&fit);
    let irf = irf_bands(
        &fit,
        &var.ordering,
        BandOptions {
            horizon: cfg.irf.horizon,
            n_draws: cfg.irf.n_draws,
            seed: cfg.irf.seed,
            scheme: cfg.irf.scheme,
        },
    )?;
    let readout = &cfg.irf;
    let significance = if var.ordering.contains(&readout.impulse) && var.ordering.contains(&readout.response) {
        Some(irf.significance(&readout.impulse, &readout.response, readout.early_window)?)
    } else {
        None
    };
    Ok(VariantReport {
        name: var.name.clone(),
        ordering: var.ordering.clone(),
        exogenous: var.exogenous.clone(),
        p: fit.p,
        lag_table,
        sample_start: cfg.estimation_range.start,
        sample_end: cfg.estimation_range.end,
        whiteness,
        spectral_radius: stability.spectral_radius,
        stable: stability.stable,
        irf,
        significance,
        fit,
    })
}

fn variant_warnings(cfg: &StudyConfig, r: &VariantReport) -> Vec<String> {
    let mut w = Vec::new();
    let name = &r.name;
    if !r.stable {
        w.push(format!("variant `{name}`: estimated VAR is not stable (spectral radius {:.4})", r.spectral_radius));
    }
    for (eq, lb) in r.ordering.iter().zip(&r.whiteness) {
        if !lb.is_white(0.05) {
            w.push(format!("variant `{name}`: residuals of `{eq}` fail whiteness at 5% (p = {:.4})", lb.p_value));
        }
    }
    if r.irf.n_explosive > 0 {
        w.push(format!("variant `{name}`: {} of {} draws explosive", r.irf.n_explosive, r.irf.n_draws));
    }
    if r.irf.n_rejected > 0 {
        w.push(format!("variant `{name}`: {} of {} draws rejected as non-finite", r.irf.n_rejected, r.irf.n_draws));
    }
    if r.irf.unreliable() {
        w.push(format!("variant `{name}`: bands flagged unreliable"));
    }
    if r.significance.is_none() {
        w.push(format!(
            "variant `{name}`: readout pair `{}` -> `{}` not in the system",
            cfg.irf.impulse, cfg.irf.response
        ));
    }
    w
}
