//! Report tables, text summary and JSON document.
//!
//! Floats are printed with ten significant digits in scientific notation and
//! every file uses LF line endings, so identical inputs give identical bytes.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::irf::IrfResult;

use super::plot::{panel_from_table, render_svg};
use super::run::{StudyReport, VariantReport};

pub fn num(v: f64) -> String {
    format!("{v:.9e}")
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn adf_table(report: &StudyReport) -> String {
    let rows: Vec<Vec<String>> = report
        .adf
        .iter()
        .map(|row| match &row.result {
            Ok(r) => vec![
                row.variable.clone(),
                r.spec.label().to_string(),
                r.lags.to_string(),
                r.nobs.to_string(),
                num(r.tau),
                num(r.crit_1),
                num(r.crit_5),
                num(r.crit_10),
                (r.reject_unit_root_5pct as u8).to_string(),
                String::new(),
            ],
            Err(e) => {
                let mut v = vec![row.variable.clone()];
                v.extend(std::iter::repeat_n(String::new(), 8));
                v.push(e.clone());
                v
            }
        })
        .collect();
    csv_text(
        &["variable", "spec", "lags", "nobs", "tau", "crit_1pct", "crit_5pct", "crit_10pct", "reject_5pct", "error"],
        &rows,
    )
}

pub fn volatility_table(report: &StudyReport) -> String {
    let mut rows = Vec::new();
    let mut push = |component: &str, parameter: String, value: f64| {
        rows.push(vec![component.to_string(), parameter, num(value)]);
    };
    if let Ok(v) = &report.volatility {
        push("data", "n_returns".into(), v.n_returns as f64);
        push("mean", "intercept".into(), v.ar.intercept);
        push("mean", "intercept_se".into(), v.ar.std_errors[0]);
        for (i, (&lag, &c)) in v.ar.lags.iter().zip(&v.ar.coefficients).enumerate() {
            push("mean", format!("ar_lag{lag}"), c);
            push("mean", format!("ar_lag{lag}_se"), v.ar.std_errors[i + 1]);
        }
        push("mean", "sigma2".into(), v.ar.sigma2);
        push("mean", "ljung_box_q".into(), v.mean_lb.q);
        push("mean", "ljung_box_p".into(), v.mean_lb.p_value);
        let g = &v.garch;
        push("garch", "omega".into(), g.params.omega);
        for (i, a) in g.params.alpha.iter().enumerate() {
            push("garch", format!("alpha_{}", i + 1), *a);
        }
        for (i, b) in g.params.beta.iter().enumerate() {
            push("garch", format!("beta_{}", i + 1), *b);
        }
        push("garch", "persistence".into(), g.params.persistence());
        push("garch", "loglik".into(), g.loglik);
        push("garch", "converged".into(), g.converged as u8 as f64);
        push("garch", "iterations".into(), g.iterations as f64);
        push("garch", "ljung_box_z2_q".into(), g.lb_z2.q);
        push("garch", "ljung_box_z2_p".into(), g.lb_z2.p_value);
    }
    csv_text(&["component", "parameter", "value"], &rows)
}

pub fn var_summary_table(report: &StudyReport) -> String {
    let rows: Vec<Vec<String>> = report
        .variants
        .iter()
        .map(|o| match &o.result {
            Ok(v) => vec![
                v.name.clone(),
                "ok".into(),
                v.ordering.join(";"),
                v.exogenous.join(";"),
                v.p.to_string(),
                v.fit.n_obs.to_string(),
                v.fit.n_regressors().to_string(),
                v.sample_start.to_string(),
                v.sample_end.to_string(),
                num(v.spectral_radius),
                (v.stable as u8).to_string(),
                num(v.fit.sigma_u.determinant().ln()),
                v.irf.n_draws.to_string(),
                v.irf.n_accepted.to_string(),
                v.irf.n_rejected.to_string(),
                v.irf.n_explosive.to_string(),
                (v.irf.unreliable() as u8).to_string(),
                String::new(),
            ],
            Err(e) => {
                let mut r = vec![o.name.clone(), "failed".into()];
                r.extend(std::iter::repeat_n(String::new(), 15));
                r.push(e.clone());
                r
            }
        })
        .collect();
    csv_text(
        &[
            "variant",
            "status",
            "ordering",
            "exogenous",
            "p",
            "n_obs",
            "n_regressors",
            "sample_start",
            "sample_end",
            "spectral_radius",
            "stable",
            "log_det_sigma_u",
            "n_draws",
            "n_accepted",
            "n_rejected",
            "n_explosive",
            "unreliable",
            "error",
        ],
        &rows,
    )
}

pub fn whiteness_table(report: &StudyReport) -> String {
    let mut rows = Vec::new();
    for v in report.variants.iter().filter_map(|o| o.result.as_ref().ok()) {
        for (eq, lb) in v.ordering.iter().zip(&v.whiteness) {
            rows.push(vec![
                v.name.clone(),
                eq.clone(),
                lb.h.to_string(),
                num(lb.q),
                lb.dof.to_string(),
                num(lb.p_value),
                (lb.is_white(0.05) as u8).to_string(),
            ]);
        }
    }
    csv_text(&["variant", "equation", "h", "q", "dof", "p_value", "white_5pct"], &rows)
}

fn join_horizons(h: &[usize]) -> String {
    h.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

pub fn significance_table(report: &StudyReport) -> String {
    let rows: Vec<Vec<String>> = report
        .variants
        .iter()
        .filter_map(|o| o.result.as_ref().ok())
        .filter_map(|v| v.significance.as_ref().map(|s| (v, s)))
        .map(|(v, s)| {
            vec![
                v.name.clone(),
                s.impulse.clone(),
                s.response.clone(),
                s.early_window.to_string(),
                join_horizons(&s.horizons),
                join_horizons(&s.early_horizons),
                (s.early_positive as u8).to_string(),
                (s.all_positive as u8).to_string(),
            ]
        })
        .collect();
    csv_text(
        &["variant", "impulse", "response", "early_window", "horizons", "early_horizons", "early_positive", "all_positive"],
        &rows,
    )
}

/// `(H+1) k k` rows: horizon outermost, then response, then impulse.
pub fn irf_table(irf: &IrfResult) -> String {
    let k = irf.k();
    let mut rows = Vec::with_capacity((irf.horizon + 1) * k * k);
    for h in 0..=irf.horizon {
        for i in 0..k {
            for j in 0..k {
                rows.push(vec![
                    h.to_string(),
                    irf.var_names[i].clone(),
                    irf.var_names[j].clone(),
                    num(irf.theta[h][(i, j)]),
                    num(irf.center[h][(i, j)]),
                    num(irf.lower(h, i, j)),
                    num(irf.upper(h, i, j)),
                ]);
            }
        }
    }
    csv_text(&["h", "response", "impulse", "theta", "center", "lower", "upper"], &rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrfRow {
    pub h: usize,
    pub response: String,
    pub impulse: String,
    pub theta: f64,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Reads back a table written by [`irf_table`].
pub fn parse_irf_table(text: &str) -> Result<Vec<IrfRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse { row: 1, message: e.to_string() })?.clone();
    let expected = ["h", "response", "impulse", "theta", "center", "lower", "upper"];
    if header.iter().ne(expected) {
        return Err(Error::Parse {
            row: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        let f = |j: usize| -> Result<f64> {
            rec[j].parse().map_err(|_| Error::Parse {
                row,
                message: format!("bad number `{}`", &rec[j]),
            })
        };
        rows.push(IrfRow {
            h: rec[0].parse().map_err(|_| Error::Parse { row, message: format!("bad horizon `{}`", &rec[0]) })?,
            response: rec[1].to_string(),
            impulse: rec[2].to_string(),
            theta: f(3)?,
            center: f(4)?,
            lower: f(5)?,
            upper: f(6)?,
        });
    }
    Ok(rows)
}

fn lb_json(lb: &crate::diagnostics::LjungBoxResult) -> Value {
    json!({"q": lb.q, "h": lb.h, "dof": lb.dof, "p_value": lb.p_value})
}

fn variant_json(v: &VariantReport) -> Value {
    let k = v.fit.k();
    let sigma: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| v.fit.sigma_u[(i, j)]).collect()).collect();
    json!({
        "name": v.name,
        "status": "ok",
        "ordering": v.ordering,
        "exogenous": v.exogenous,
        "p": v.p,
        "lag_table": v.lag_table,
        "sample_start": v.sample_start.to_string(),
        "sample_end": v.sample_end.to_string(),
        "n_obs": v.fit.n_obs,
        "n_regressors": v.fit.n_regressors(),
        "sigma_u": sigma,
        "spectral_radius": v.spectral_radius,
        "stable": v.stable,
        "whiteness": v.ordering.iter().zip(&v.whiteness)
            .map(|(n, lb)| json!({"equation": n, "ljung_box": lb_json(lb)}))
            .collect::<Vec<_>>(),
        "irf": {
            "horizon": v.irf.horizon,
            "scheme": v.irf.scheme,
            "seed": v.irf.seed,
            "n_draws": v.irf.n_draws,
            "n_accepted": v.irf.n_accepted,
            "n_rejected": v.irf.n_rejected,
            "n_explosive": v.irf.n_explosive,
            "unreliable": v.irf.unreliable(),
            "table": format!("irf_{}.csv", v.name),
        },
        "significance": v.significance,
    })
}

pub fn report_json(report: &StudyReport) -> String {
    let adf: Vec<Value> = report
        .adf
        .iter()
        .map(|row| match &row.result {
            Ok(r) => json!({"variable": row.variable, "result": r}),
            Err(e) => json!({"variable": row.variable, "error": e}),
        })
        .collect();
    let volatility = match &report.volatility {
        Ok(v) => json!({
            "n_returns": v.n_returns,
            "mean_model": v.ar,
            "mean_ljung_box": lb_json(&v.mean_lb),
            "garch": v.garch,
            "persistence": v.garch.params.persistence(),
        }),
        Err(e) => json!({"error": e}),
    };
    let variants: Vec<Value> = report
        .variants
        .iter()
        .map(|o| match &o.result {
            Ok(v) => variant_json(v),
            Err(e) => json!({"name": o.name, "status": "failed", "error": e}),
        })
        .collect();
    let doc = json!({
        "config": report.config,
        "seed": report.config.irf.seed,
        "adf": adf,
        "volatility": volatility,
        "variants": variants,
        "warnings": report.warnings,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

pub fn report_text(report: &StudyReport) -> String {
    let mut s = String::new();
    let cfg = &report.config;
    s.push_str("Study report\n");
    s.push_str(&format!(
        "data {}..{}, estimation {}..{}, seed {}, draws {}, horizon {}\n\n",
        cfg.data_range.start, cfg.data_range.end, cfg.estimation_range.start, cfg.estimation_range.end, cfg.irf.seed, cfg.irf.n_draws, cfg.irf.horizon
    ));
    s.push_str("Unit-root screen (ADF tau, 5% critical value)\n");
    for row in &report.adf {
        match &row.result {
            Ok(r) => s.push_str(&format!(
                "  {:<8} {:<14} lags {:>2}  tau {:>9.4}  cv5 {:>7.4}  {}\n",
                row.variable,
                r.spec.label(),
                r.lags,
                r.tau,
                r.crit_5,
                if r.reject_unit_root_5pct { "stationary" } else { "unit root not rejected" }
            )),
            Err(e) => s.push_str(&format!("  {:<8} error: {e}\n", row.variable)),
        }
    }
    s.push('\n');
    match &report.volatility {
        Ok(v) => {
            let g = &v.garch.params;
            s.push_str(&format!("Volatility of `{}` ({} returns)\n", cfg.volatility.source, v.n_returns));
            s.push_str(&format!("  mean model lags {:?}, Ljung-Box p {:.4}\n", v.ar.lags, v.mean_lb.p_value));
            s.push_str(&format!(
                "  omega {:.4e}, alpha {:?}, beta {:?}, persistence {:.4}\n",
                g.omega,
                g.alpha.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>(),
                g.beta.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>(),
                g.persistence()
            ));
            s.push_str(&format!(
                "  converged {}, Ljung-Box on z^2 p {:.4}\n\n",
                v.garch.converged, v.garch.lb_z2.p_value
            ));
        }
        Err(e) => s.push_str(&format!("Volatility extraction failed: {e}\n\n")),
    }
    for o in &report.variants {
        match &o.result {
            Ok(v) => {
                s.push_str(&format!(
                    "Variant {}: ordering {}, exogenous [{}], p {}, n_obs {}\n",
                    v.name,
                    v.ordering.join(" -> "),
                    v.exogenous.join(", "),
                    v.p,
                    v.fit.n_obs
                ));
                s.push_str(&format!("  spectral radius {:.4} ({})\n", v.spectral_radius, if v.stable { "stable" } else { "unstable" }));
                let white: Vec<String> = v.ordering.iter().zip(&v.whiteness).map(|(n, lb)| format!("{n} {:.3}", lb.p_value)).collect();
                s.push_str(&format!("  whiteness p-values: {}\n", white.join(", ")));
                match &v.significance {
                    Some(sig) => s.push_str(&format!(
                        "  {} <- {} shock: significant at [{}], early window 1..={} positive: {}\n",
                        sig.response,
                        sig.impulse,
                        join_horizons(&sig.horizons),
                        sig.early_window,
                        if sig.early_positive { "yes" } else { "no" }
                    )),
                    None => s.push_str("  readout pair not in this system\n"),
                }
            }
            Err(e) => s.push_str(&format!("Variant {}: FAILED: {e}\n", o.name)),
        }
    }
    s.push_str("\nWarnings\n");
    if report.warnings.is_empty() {
        s.push_str("  none\n");
    }
    for w in &report.warnings {
        s.push_str(&format!("  {w}\n"));
    }
    s
}

pub fn plot_file_name(variant: &str, impulse: &str, response: &str) -> String {
    format!("irf_{variant}_{impulse}_{response}.svg")
}

/// All report files as `(name, contents)`, in a fixed order.
pub fn report_files(report: &StudyReport) -> Result<Vec<(String, String)>> {
    let mut files = vec![
        ("config.json".to_string(), report.config.to_json()),
        ("report.json".to_string(), report_json(report)),
        ("report.txt".to_string(), report_text(report)),
        ("adf.csv".to_string(), adf_table(report)),
        ("volatility.csv".to_string(), volatility_table(report)),
        ("var_summary.csv".to_string(), var_summary_table(report)),
        ("whiteness.csv".to_string(), whiteness_table(report)),
        ("significance.csv".to_string(), significance_table(report)),
    ];
    let (imp, resp) = (&report.config.irf.impulse, &report.config.irf.response);
    for v in report.variants.iter().filter_map(|o| o.result.as_ref().ok()) {
        let table = irf_table(&v.irf);
        if v.significance.is_some() {
            let panel = panel_from_table(&v.name, &parse_irf_table(&table)?, imp, resp)?;
            files.push((plot_file_name(&v.name, imp, resp), render_svg(&panel)));
        }
        files.push((format!("irf_{}.csv", v.name), table));
    }
    Ok(files)
}

pub fn write_report(report: &StudyReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut written = Vec::new();
    for (name, text) in report_files(report)? {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        written.push(path);
    }
    Ok(written)
}
