//! Autocorrelation, Ljung-Box whiteness and augmented Dickey-Fuller tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::stats::chi_square_sf;

fn centered(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let ss: f64 = d.iter().map(|v| v * v).sum();
    // relative check so a constant series with rounding noise still counts as constant
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(ss > 0.0) || ss.sqrt() <= 1e-13 * scale * n.sqrt() {
        return Err(Error::ZeroVariance);
    }
    Ok((d, ss))
}

/// Sample autocorrelations at lags `1..=max_lag` with the common
/// denominator `sum (x_t - mean)^2`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be positive".into()));
    }
    if x.len() <= max_lag + 1 {
        return Err(Error::InsufficientData {
            required: max_lag + 2,
            available: x.len(),
        });
    }
    let (d, ss) = centered(x)?;
    Ok((1..=max_lag)
        .map(|k| d[k..].iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / ss)
        .collect())
}

/// Partial autocorrelations via the Durbin-Levinson recursion.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(x, max_lag)?;
    Ok(durbin_levinson(&rho))
}

fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rho.len());
    let mut phi: Vec<f64> = Vec::new();
    for k in 0..rho.len() {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let den = 1.0 - phi.iter().enumerate().map(|(j, p)| p * rho[j]).sum::<f64>();
        let kk = num / den;
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - kk * prev[prev.len() - 1 - j];
        }
        phi.push(kk);
        out.push(kk);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub q: f64,
    pub h: usize,
    pub dof: usize,
    pub p_value: f64,
}

impl LjungBoxResult {
    pub fn is_white(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// `Q = n(n+2) sum_k rho_k^2 / (n-k)` against a chi-square with `h - fitted_params` dof.
pub fn ljung_box(residuals: &[f64], h: usize, fitted_params: usize) -> Result<LjungBoxResult> {
    if h == 0 {
        return Err(Error::InvalidArgument("Ljung-Box horizon must be positive".into()));
    }
    if h <= fitted_params {
        return Err(Error::InvalidArgument(format!(
            "Ljung-Box horizon {h} leaves no degrees of freedom after {fitted_params} fitted parameters"
        )));
    }
    let n = residuals.len();
    let rho = acf(residuals, h)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    let dof = h - fitted_params;
    Ok(LjungBoxResult {
        q,
        h,
        dof,
        p_value: chi_square_sf(q, dof),
    })
}

/// Deterministic terms in the Dickey-Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfSpec {
    None,
    Constant,
    ConstantTrend,
}

impl AdfSpec {
    fn deterministic_terms(self) -> usize {
        match self {
            AdfSpec::None => 0,
            AdfSpec::Constant => 1,
            AdfSpec::ConstantTrend => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AdfSpec::None => "none",
            AdfSpec::Constant => "constant",
            AdfSpec::ConstantTrend => "constant_trend",
        }
    }
}

/// Augmentation lag policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfLags {
    Fixed(usize),
    /// Start from `max` (default `floor(12 (n/100)^0.25)`) and drop the last
    /// lag while its t-ratio is below the 10% two-sided normal value.
    Auto { max: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub tau: f64,
    pub spec: AdfSpec,
    pub lags: usize,
    pub nobs: usize,
    pub crit_1: f64,
    pub crit_5: f64,
    pub crit_10: f64,
    pub reject_unit_root_5pct: bool,
}

const SAMPLE_BREAKS: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];

/// Tau critical values (1%, 5%, 10%) per sample-size break.
const TAU_NONE: [[f64; 3]; 6] = [
    [-2.66, -1.95, -1.60],
    [-2.62, -1.95, -1.61],
    [-2.60, -1.95, -1.61],
    [-2.58, -1.95, -1.62],
    [-2.58, -1.95, -1.62],
    [-2.58, -1.95, -1.62],
];
const TAU_CONSTANT: [[f64; 3]; 6] = [
    [-3.75, -3.00, -2.63],
    [-3.58, -2.93, -2.60],
    [-3.51, -2.89, -2.58],
    [-3.46, -2.88, -2.57],
    [-3.44, -2.87, -2.57],
    [-3.43, -2.86, -2.57],
];
const TAU_TREND: [[f64; 3]; 6] = [
    [-4.38, -3.60, -3.24],
    [-4.15, -3.50, -3.18],
    [-4.04, -3.45, -3.15],
    [-3.99, -3.43, -3.13],
    [-3.98, -3.42, -3.13],
    [-3.96, -3.41, -3.12],
];

/// Critical values at 1%, 5%, 10%, linearly interpolated in `1/n` between
/// table breaks; samples below 25 use the 25 row.
pub fn adf_critical_values(spec: AdfSpec, n: usize) -> [f64; 3] {
    let table = match spec {
        AdfSpec::None => &TAU_NONE,
        AdfSpec::Constant => &TAU_CONSTANT,
        AdfSpec::ConstantTrend => &TAU_TREND,
    };
    let inv = 1.0 / (n.max(1) as f64);
    let inv_breaks: Vec<f64> = SAMPLE_BREAKS.iter().map(|b| 1.0 / b).collect();
    if inv >= inv_breaks[0] {
        return table[0];
    }
    for i in 1..SAMPLE_BREAKS.len() {
        let (hi, lo) = (inv_breaks[i - 1], inv_breaks[i]);
        if inv >= lo {
            let w = (inv - lo) / (hi - lo);
            let mut out = [0.0; 3];
            for (j, o) in out.iter_mut().enumerate() {
                *o = w * table[i - 1][j] + (1.0 - w) * table[i][j];
            }
            return out;
        }
    }
    table[SAMPLE_BREAKS.len() - 1]
}

struct AdfRegression {
    tau: f64,
    last_lag_t: Option<f64>,
    nobs: usize,
}

/// Regression of `dx_t` on deterministics, `x_{t-1}` and `lags` lagged
/// differences, using observations `t >= first` (index into `x`).
fn adf_regression(x: &[f64], spec: AdfSpec, lags: usize, first: usize) -> Result<AdfRegression> {
    let n = x.len();
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let rows: Vec<usize> = (first..n).collect();
    let nobs = rows.len();
    let det = spec.deterministic_terms();
    let k = det + 1 + lags;
    if nobs <= k + 1 {
        return Err(Error::InsufficientData {
            required: first + k + 2,
            available: n,
        });
    }
    let mut names: Vec<String> = Vec::with_capacity(k);
    if det >= 1 {
        names.push("const".into());
    }
    if det == 2 {
        names.push("trend".into());
    }
    names.push("level_lag1".into());
    names.extend((1..=lags).map(|i| format!("diff_lag{i}")));

    let design = DMatrix::from_fn(nobs, k, |r, c| {
        let t = rows[r];
        if c < det {
            if c == 0 {
                1.0
            } else {
                t as f64
            }
        } else if c == det {
            x[t - 1]
        } else {
            dx[t - 1 - (c - det)]
        }
    });
    let y = DVector::from_iterator(nobs, rows.iter().map(|&t| dx[t - 1]));
    let (fit, se) = ols(design, &y, &names)?;
    if !(se[det] > 0.0) {
        return Err(Error::RankDeficient {
            column: "level_lag1".into(),
        });
    }
    Ok(AdfRegression {
        tau: fit.coef[det] / se[det],
        last_lag_t: (lags > 0).then(|| fit.coef[k - 1] / se[k - 1]),
        nobs,
    })
}

/// Augmented Dickey-Fuller test of a unit root in `x`.
pub fn adf_test(x: &[f64], spec: AdfSpec, lags: AdfLags) -> Result<AdfResult> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in ADF input".into()));
    }
    let n = x.len();
    let chosen = match lags {
        AdfLags::Fixed(l) => l,
        AdfLags::Auto { max } => {
            let default_max = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
            let max = max.unwrap_or(default_max);
            // selection on the common sample fixed by the largest lag
            let mut l = max;
            while l > 0 {
                let reg = adf_regression(x, spec, l, max + 1)?;
                if reg.last_lag_t.is_some_and(|t| t.abs() >= 1.644_853_626_951_472_2) {
                    break;
                }
                l -= 1;
            }
            l
        }
    };
    let reg = adf_regression(x, spec, chosen, chosen + 1)?;
    let [crit_1, crit_5, crit_10] = adf_critical_values(spec, reg.nobs);
    Ok(AdfResult {
        tau: reg.tau,
        spec,
        lags: chosen,
        nobs: reg.nobs,
        crit_1,
        crit_5,
        crit_10,
        reject_unit_root_5pct: reg.tau < crit_5,
    })
}
