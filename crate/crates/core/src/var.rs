//! Reduced-form VAR(p) with contemporaneous exogenous regressors, estimated
//! equation by equation through a shared QR factorization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ljung_box, LjungBoxResult};
use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::series::Dataset;

/// Regression form of a VAR: `Y = X B + U`.
#[derive(Debug, Clone)]
pub struct VarRegression {
    /// `(T - p) × K` with columns `[const, y_{t-1}, .., y_{t-p}, exog_t]`.
    pub x: DMatrix<f64>,
    /// `(T - p) × k`.
    pub y: DMatrix<f64>,
    pub names: Vec<String>,
}

/// Builds the stacked regressors from raw endogenous (`T × k`) and
/// exogenous (`T × m`) data.
pub fn var_regression(endog: &DMatrix<f64>, exog: &DMatrix<f64>, p: usize, var_names: &[String], exog_names: &[String]) -> VarRegression {
    let (t_len, k) = endog.shape();
    let m = exog.ncols();
    let n_obs = t_len - p;
    let n_reg = 1 + k * p + m;
    let x = DMatrix::from_fn(n_obs, n_reg, |r, c| {
        let t = r + p;
        if c == 0 {
            1.0
        } else if c <= k * p {
            let lag = (c - 1) / k + 1;
            let var = (c - 1) % k;
            endog[(t - lag, var)]
        } else {
            exog[(t, c - 1 - k * p)]
        }
    });
    let y = endog.rows(p, n_obs).into_owned();
    let mut names = vec!["const".to_string()];
    for lag in 1..=p {
        names.extend(var_names.iter().map(|v| format!("{v}_lag{lag}")));
    }
    names.extend(exog_names.iter().cloned());
    VarRegression { x, y, names }
}

#[derive(Debug, Clone)]
pub struct VarFit {
    pub p: usize,
    pub var_names: Vec<String>,
    pub exog_names: Vec<String>,
    /// `A_1 .. A_p`, each `k × k`; entry `(i, j)` loads variable `j` in equation `i`.
    pub a: Vec<DMatrix<f64>>,
    pub c: DVector<f64>,
    /// `k × m` exogenous loadings.
    pub b: DMatrix<f64>,
    /// `n_obs × k`.
    pub residuals: DMatrix<f64>,
    /// `U'U / n_obs`.
    pub sigma_u: DMatrix<f64>,
    pub n_obs: usize,
    /// `K × k`, column `i` is equation `i`.
    pub coef: DMatrix<f64>,
    /// `(X'X)^{-1}`, shared by all equations.
    pub xtx_inv: DMatrix<f64>,
    /// Per-equation `SSR / (n_obs - K)`.
    pub sigma2: Vec<f64>,
    /// Estimation data, kept for resampling.
    pub endog: DMatrix<f64>,
    pub exog: DMatrix<f64>,
    /// Date of the first residual.
    pub first_date: chrono::NaiveDate,
}

impl VarFit {
    pub fn k(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_regressors(&self) -> usize {
        self.coef.nrows()
    }

    /// `sigma_i^2 (X'X)^{-1}` for equation `i`.
    pub fn coef_cov(&self, equation: usize) -> DMatrix<f64> {
        &self.xtx_inv * self.sigma2[equation]
    }

    pub fn std_errors(&self, equation: usize) -> Vec<f64> {
        (0..self.n_regressors())
            .map(|j| (self.sigma2[equation] * self.xtx_inv[(j, j)]).sqrt())
            .collect()
    }

    pub fn residual_column(&self, equation: usize) -> Vec<f64> {
        self.residuals.column(equation).iter().copied().collect()
    }
}

/// `A_1 .. A_p` from a stacked `K × k` coefficient matrix.
pub fn lag_matrices(coef: &DMatrix<f64>, k: usize, p: usize) -> Vec<DMatrix<f64>> {
    (0..p)
        .map(|l| DMatrix::from_fn(k, k, |i, j| coef[(1 + l * k + j, i)]))
        .collect()
}

pub fn residual_covariance(residuals: &DMatrix<f64>) -> DMatrix<f64> {
    residuals.transpose() * residuals / residuals.nrows() as f64
}

/// OLS fit of every equation on an intercept, lags `1..=p` of all
/// endogenous columns and the named exogenous columns at lag 0.
pub fn fit_var(ds: &Dataset, p: usize, exog: &[String]) -> Result<VarFit> {
    if p == 0 {
        return Err(Error::InvalidArgument("VAR lag order must be at least 1".into()));
    }
    let var_names = ds.endogenous_names();
    let k = var_names.len();
    let t_len = ds.len();
    let endog = DMatrix::from_fn(t_len, k, |t, j| {
        ds.endogenous().nth(j).expect("column count").series.values()[t]
    });
    let exog_cols = exog
        .iter()
        .map(|n| ds.column(n).ok_or_else(|| Error::UnknownName(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    let exog_m = DMatrix::from_fn(t_len, exog.len(), |t, j| exog_cols[j].series.values()[t]);
    let first_date = ds.start + chrono::Days::new(p as u64);
    fit_var_matrices(endog, exog_m, p, var_names, exog.to_vec(), first_date)
}

/// Same as [`fit_var`] on raw matrices.
pub fn fit_var_matrices(
    endog: DMatrix<f64>,
    exog: DMatrix<f64>,
    p: usize,
    var_names: Vec<String>,
    exog_names: Vec<String>,
    first_date: chrono::NaiveDate,
) -> Result<VarFit> {
    let (t_len, k) = endog.shape();
    let m = exog.ncols();
    let n_reg = 1 + k * p + m;
    let available = t_len.saturating_sub(p);
    if available <= n_reg {
        return Err(Error::DegreesOfFreedom {
            regressors: n_reg,
            required: n_reg,
            available,
        });
    }
    if endog.iter().chain(exog.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in VAR data".into()));
    }
    let reg = var_regression(&endog, &exog, p, &var_names, &exog_names);
    let ls = LeastSquares::new(reg.x, &reg.names)?;
    let n_obs = ls.nobs();
    let mut coef = DMatrix::zeros(n_reg, k);
    let mut residuals = DMatrix::zeros(n_obs, k);
    let mut sigma2 = Vec::with_capacity(k);
    for i in 0..k {
        let yi: DVector<f64> = reg.y.column(i).into_owned();
        let fit = ls.fit(&yi);
        coef.set_column(i, &fit.coef);
        residuals.set_column(i, &fit.residuals);
        sigma2.push(fit.sigma2);
    }
    let a = lag_matrices(&coef, k, p);
    let c = DVector::from_iterator(k, (0..k).map(|i| coef[(0, i)]));
    let b = DMatrix::from_fn(k, m, |i, j| coef[(1 + k * p + j, i)]);
    let sigma_u = residual_covariance(&residuals);
    Ok(VarFit {
        p,
        var_names,
        exog_names,
        a,
        c,
        b,
        sigma_u,
        n_obs,
        xtx_inv: ls.xtx_inverse(),
        coef,
        residuals,
        sigma2,
        endog,
        exog,
        first_date,
    })
}

/// Ljung-Box on each equation's residuals, no fitted-parameter correction.
pub fn residual_whiteness(fit: &VarFit, h: usize) -> Result<Vec<LjungBoxResult>> {
    if h == 0 {
        return Err(Error::InvalidArgument("whiteness horizon must be positive".into()));
    }
    if h >= fit.n_obs {
        return Err(Error::InvalidArgument(format!(
            "whiteness horizon {h} must be below the {} residuals",
            fit.n_obs
        )));
    }
    (0..fit.k())
        .map(|i| ljung_box(&fit.residual_column(i), h, 0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub p: usize,
    /// Per tried order, the per-equation whiteness p-values.
    pub table: Vec<(usize, Vec<f64>)>,
}

/// Smallest `p` in `[p_min, p_max]` whose residuals pass the whiteness test
/// in every equation at level `alpha`.
pub fn select_lag(ds: &Dataset, exog: &[String], p_min: usize, p_max: usize, alpha: f64, h: usize) -> Result<LagSelection> {
    if p_min == 0 || p_max < p_min {
        return Err(Error::InvalidArgument(format!("invalid lag range {p_min}..={p_max}")));
    }
    let mut table = Vec::new();
    for p in p_min..=p_max {
        let fit = fit_var(ds, p, exog)?;
        let pv: Vec<f64> = residual_whiteness(&fit, h)?.iter().map(|r| r.p_value).collect();
        let white = pv.iter().all(|&v| v >= alpha);
        table.push((p, pv));
        if white {
            return Ok(LagSelection { p, table });
        }
    }
    Err(Error::NoWhiteLag {
        p_min,
        p_max,
        alpha,
        table,
    })
}

#[derive(Debug, Clone)]
pub struct Stability {
    pub companion: DMatrix<f64>,
    pub spectral_radius: f64,
    pub stable: bool,
}

/// `[A_1 .. A_p; I 0]` of size `kp × kp`.
pub fn companion_matrix(a: &[DMatrix<f64>]) -> DMatrix<f64> {
    let k = a[0].nrows();
    let p = a.len();
    let mut m = DMatrix::zeros(k * p, k * p);
    for (l, al) in a.iter().enumerate() {
        m.view_mut((0, l * k), (k, k)).copy_from(al);
    }
    for i in 0..k * (p - 1) {
        m[(k + i, i)] = 1.0;
    }
    m
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    // The unbounded Schur iteration can stall on rare inputs; cap it and
    // fall back to Gelfand's formula.
    match nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 100 * m.nrows().max(10)) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        None => gelfand_radius(m),
    }
}

/// `||M^k||^(1/k)` for `k = 2^40`, by repeated squaring with rescaling.
fn gelfand_radius(m: &DMatrix<f64>) -> f64 {
    let mut p = m.clone();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..40 {
        let norm = p.norm();
        if norm == 0.0 {
            return 0.0;
        }
        p /= norm;
        log_scale += norm.ln() / k;
        p = &p * &p;
        k *= 2.0;
    }
    (log_scale + p.norm().ln() / k).exp()
}

pub fn companion_and_stability(fit: &VarFit) -> Stability {
    let companion = companion_matrix(&fit.a);
    let spectral_radius = spectral_radius(&companion);
    Stability {
        companion,
        spectral_radius,
        stable: spectral_radius < 1.0,
    }
}
