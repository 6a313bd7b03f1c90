//! Conditional volatility extraction: sparse AR mean model plus GARCH
//! variance fitted by Gaussian quasi-maximum likelihood.
//!
//! The variance recursion is
//!
//! ```text
//! h_t = omega + sum_{i=1..q} alpha_i e_{t-i}^2 + sum_{j=1..p} beta_j h_{t-j}
//! ```
//!
//! with presample `h` and `e^2` both set to the sample variance of `e`.
//! Fitting works in unconstrained coordinates: `omega = exp(t_0)` and the
//! `q + p` persistence weights are `c * exp(t_i) / (1 + sum_j exp(t_j))` with
//! `c = 1 - 1e-6`, which keeps every weight positive and their sum below `c`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ljung_box, LjungBoxResult};
use crate::error::{Error, Result};
use crate::linalg::ols;
use crate::optimize::{minimize_bfgs, BfgsOptions};
use crate::rng::substream;
use crate::series::{first_difference, TimeSeries};
use crate::stats::variance;

/// Upper bound on total persistence `sum alpha + sum beta`.
pub const PERSISTENCE_CAP: f64 = 1.0 - 1e-6;

/// Horizon of the Ljung-Box checks on mean residuals and on `z^2`.
pub const DIAGNOSTIC_LAGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArFit {
    pub lags: Vec<usize>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Standard errors: intercept first, then one per lag.
    pub std_errors: Vec<f64>,
    #[serde(skip)]
    pub residuals: Option<TimeSeries>,
    pub sigma2: f64,
}

impl ArFit {
    pub fn residuals(&self) -> &TimeSeries {
        self.residuals.as_ref().expect("residuals are set by fit_ar")
    }
}

/// OLS of `y_t` on an intercept and `y_{t-k}` for each `k` in `lags`,
/// conditioning on the first `max(lags)` observations.
pub fn fit_ar(y: &TimeSeries, lags: &[usize]) -> Result<ArFit> {
    let mut lags = lags.to_vec();
    lags.sort_unstable();
    lags.dedup();
    if lags.is_empty() || lags[0] == 0 {
        return Err(Error::InvalidArgument("AR lags must be a non-empty set of positive integers".into()));
    }
    let max_lag = *lags.last().unwrap();
    let n = y.len();
    if n <= max_lag + lags.len() + 1 {
        return Err(Error::InsufficientData {
            required: max_lag + lags.len() + 2,
            available: n,
        });
    }
    let v = y.values();
    let rows = n - max_lag;
    let k = lags.len() + 1;
    let design = DMatrix::from_fn(rows, k, |r, c| if c == 0 { 1.0 } else { v[r + max_lag - lags[c - 1]] });
    let target = DVector::from_iterator(rows, v[max_lag..].iter().copied());
    let mut names = vec!["intercept".to_string()];
    names.extend(lags.iter().map(|l| format!("{}_lag{l}", y.name)));
    let (fit, se) = ols(design, &target, &names)?;
    let residuals = TimeSeries::new(y.name.clone(), y.date_at(max_lag), fit.residuals.iter().copied().collect());
    Ok(ArFit {
        intercept: fit.coef[0],
        coefficients: fit.coef.iter().skip(1).copied().collect(),
        std_errors: se,
        sigma2: fit.sigma2,
        residuals: Some(residuals),
        lags,
    })
}

/// GARCH orders: `arch` lags of `e^2`, `garch` lags of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GarchOrder {
    pub arch: usize,
    pub garch: usize,
}

impl GarchOrder {
    pub fn new(arch: usize, garch: usize) -> Self {
        Self { arch, garch }
    }

    pub fn n_params(self) -> usize {
        self.arch + self.garch
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    /// ARCH weights on `e_{t-1}^2 .. e_{t-q}^2`.
    pub alpha: Vec<f64>,
    /// GARCH weights on `h_{t-1} .. h_{t-p}`.
    pub beta: Vec<f64>,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        Self { omega, alpha, beta }
    }

    pub fn order(&self) -> GarchOrder {
        GarchOrder::new(self.alpha.len(), self.beta.len())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>()
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::Constraint(format!("omega = {} must be positive", self.omega)));
        }
        if let Some(w) = self.alpha.iter().chain(&self.beta).find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Constraint(format!("weight {w} must be nonnegative")));
        }
        if !(self.persistence() < 1.0) {
            return Err(Error::Constraint(format!(
                "persistence {} must be below 1",
                self.persistence()
            )));
        }
        Ok(())
    }

    fn to_unconstrained(&self) -> Vec<f64> {
        let weights: Vec<f64> = self.alpha.iter().chain(&self.beta).copied().collect();
        let slack = PERSISTENCE_CAP - weights.iter().sum::<f64>();
        std::iter::once(self.omega.ln())
            .chain(weights.iter().map(|w| (w / slack).ln()))
            .collect()
    }

    fn from_unconstrained(theta: &[f64], order: GarchOrder) -> Self {
        // clamped so the weight sum stays strictly below the cap in floating point
        let e: Vec<f64> = theta[1..].iter().map(|t| t.clamp(-60.0, 25.0).exp()).collect();
        let denom = 1.0 + e.iter().sum::<f64>();
        let w: Vec<f64> = e.iter().map(|v| PERSISTENCE_CAP * v / denom).collect();
        Self {
            omega: theta[0].clamp(-700.0, 700.0).exp(),
            alpha: w[..order.arch].to_vec(),
            beta: w[order.arch..].to_vec(),
        }
    }
}

fn presample_value(eps: &[f64]) -> f64 {
    if eps.is_empty() {
        0.0
    } else {
        variance(eps)
    }
}

/// Variance recursion with explicit presample `h` and `e^2` values.
pub fn garch_filter_with_presample(params: &GarchParams, eps: &[f64], h0: f64, e2_0: f64) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(filter_unchecked(params, eps, h0, e2_0))
}

/// Conditional variances with the default presample (sample variance of `eps`).
pub fn garch_filter(params: &GarchParams, eps: &[f64]) -> Result<Vec<f64>> {
    let v = presample_value(eps);
    garch_filter_with_presample(params, eps, v, v)
}

fn filter_unchecked(params: &GarchParams, eps: &[f64], h0: f64, e2_0: f64) -> Vec<f64> {
    let n = eps.len();
    let mut h = Vec::with_capacity(n);
    for t in 0..n {
        let mut ht = params.omega;
        for (i, a) in params.alpha.iter().enumerate() {
            let lag = i + 1;
            ht += a * if t >= lag { eps[t - lag] * eps[t - lag] } else { e2_0 };
        }
        for (j, b) in params.beta.iter().enumerate() {
            let lag = j + 1;
            ht += b * if t >= lag { h[t - lag] } else { h0 };
        }
        h.push(ht);
    }
    h
}

/// `-1/2 sum (log h_t + e_t^2 / h_t)`.
pub fn garch_loglik(params: &GarchParams, eps: &[f64]) -> Result<f64> {
    let h = garch_filter(params, eps)?;
    Ok(loglik_from_path(&h, eps))
}

fn loglik_from_path(h: &[f64], eps: &[f64]) -> f64 {
    -0.5 * h.iter().zip(eps).map(|(h, e)| h.ln() + e * e / h).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedResiduals {
    pub z: Vec<f64>,
    pub lb_z2: LjungBoxResult,
}

/// `z_t = e_t / sqrt(h_t)` and a Ljung-Box test on `z^2` with `m = p + q`.
pub fn standardized_residuals(params: &GarchParams, eps: &[f64]) -> Result<StandardizedResiduals> {
    let h = garch_filter(params, eps)?;
    standardize(params.order(), eps, &h)
}

fn standardize(order: GarchOrder, eps: &[f64], h: &[f64]) -> Result<StandardizedResiduals> {
    if let Some(t) = h.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Constraint(format!("internal: non-positive conditional variance at t = {t}")));
    }
    let z: Vec<f64> = eps.iter().zip(h).map(|(e, h)| e / h.sqrt()).collect();
    let z2: Vec<f64> = z.iter().map(|v| v * v).collect();
    let lb_z2 = ljung_box(&z2, DIAGNOSTIC_LAGS.max(order.n_params() + 1), order.n_params())?;
    Ok(StandardizedResiduals { z, lb_z2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    #[serde(skip)]
    pub h_path: Vec<f64>,
    #[serde(skip)]
    pub z: Vec<f64>,
    pub loglik: f64,
    pub initial_loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub lb_z2: LjungBoxResult,
}

impl GarchFit {
    pub fn omega(&self) -> f64 {
        self.params.omega
    }

    pub fn alpha(&self) -> &[f64] {
        &self.params.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.params.beta
    }
}

/// Starting point: `omega = 0.1 var(e)`, ARCH mass 0.05, GARCH mass 0.85,
/// each split evenly across lags.
pub fn initial_params(eps: &[f64], order: GarchOrder) -> GarchParams {
    let v = presample_value(eps);
    let alpha = vec![0.05 / order.arch as f64; order.arch];
    let beta = if order.garch == 0 {
        Vec::new()
    } else {
        vec![0.85 / order.garch as f64; order.garch]
    };
    GarchParams::new(0.1 * v, alpha, beta)
}

/// Negative quasi-log-likelihood in unconstrained coordinates.
pub fn negative_loglik_unconstrained(theta: &[f64], order: GarchOrder, eps: &[f64]) -> f64 {
    let params = GarchParams::from_unconstrained(theta, order);
    let v = presample_value(eps);
    let h = filter_unchecked(&params, eps, v, v);
    -loglik_from_path(&h, eps)
}

/// Maps fitted parameters to the optimizer's coordinates.
pub fn unconstrained_coordinates(params: &GarchParams) -> Vec<f64> {
    params.to_unconstrained()
}

/// Gaussian QMLE of a GARCH(`order.arch`, `order.garch`) variance on `eps`.
///
/// Non-convergence is reported through `converged`, never hidden.
pub fn garch_fit(eps: &[f64], order: GarchOrder) -> Result<GarchFit> {
    if order.arch == 0 {
        return Err(Error::InvalidArgument("GARCH needs at least one ARCH lag".into()));
    }
    if eps.len() < 50 {
        return Err(Error::InsufficientData {
            required: 50,
            available: eps.len(),
        });
    }
    if eps.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("non-finite residual".into()));
    }
    let v = presample_value(eps);
    let scale = eps.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if !(v > 0.0) || v.sqrt() <= 1e-12 * scale {
        return Err(Error::ZeroVariance);
    }

    let start = initial_params(eps, order);
    let initial_loglik = garch_loglik(&start, eps)?;
    let objective = |theta: &[f64]| negative_loglik_unconstrained(theta, order, eps);
    let min = minimize_bfgs(objective, &start.to_unconstrained(), BfgsOptions::default());

    let mut params = GarchParams::from_unconstrained(&min.x, order);
    let mut converged = min.converged;
    let mut iterations = min.iterations;
    if !(-min.value >= initial_loglik) {
        // the line search only accepts decreases, so this cannot trigger on a
        // finite start; keep the start point rather than report a worse fit
        params = start;
        converged = false;
        iterations = 0;
    }
    params.validate()?;
    let h_path = filter_unchecked(&params, eps, v, v);
    let loglik = loglik_from_path(&h_path, eps);
    let std = standardize(order, eps, &h_path)?;
    Ok(GarchFit {
        params,
        h_path,
        z: std.z,
        loglik,
        initial_loglik,
        converged,
        iterations,
        lb_z2: std.lb_z2,
    })
}

/// Draws `e_t = z_t sqrt(h_t)` from the recursion started at the
/// unconditional variance, discarding the first `burn_in` draws.
pub fn simulate_garch(params: &GarchParams, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut rng = substream(seed, 0);
    let total = n + burn_in;
    let uv = params.unconditional_variance();
    let (q, p) = (params.alpha.len(), params.beta.len());
    let mut e2 = vec![uv; q.max(1)];
    let mut hh = vec![uv; p.max(1)];
    let mut out = Vec::with_capacity(n);
    for t in 0..total {
        let mut h = params.omega;
        for i in 0..q {
            h += params.alpha[i] * e2[i];
        }
        for j in 0..p {
            h += params.beta[j] * hh[j];
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let e = z * h.sqrt();
        e2.rotate_right(1);
        e2[0] = e * e;
        hh.rotate_right(1);
        hh[0] = h;
        if t >= burn_in {
            out.push(e);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityExtraction {
    /// First difference of the input index.
    pub dsm: TimeSeries,
    pub ar: ArFit,
    /// Ljung-Box on mean-model residuals, `m` = number of AR lags.
    pub mean_lb: LjungBoxResult,
    pub garch: GarchFit,
    /// Conditional variance path, dated like the mean residuals.
    pub smv: TimeSeries,
}

/// Difference the index, fit the AR mean model, fit GARCH to its residuals,
/// and publish the conditional variance path as `smv_name`.
pub fn extract_volatility(sm: &TimeSeries, ar_lags: &[usize], order: GarchOrder, smv_name: &str) -> Result<VolatilityExtraction> {
    let dsm = first_difference(sm)?;
    if dsm.values().iter().all(|&v| v == dsm.values()[0]) {
        return Err(Error::ZeroVariance);
    }
    let ar = fit_ar(&dsm, ar_lags)?;
    let resid = ar.residuals();
    let mean_lb = ljung_box(resid.values(), DIAGNOSTIC_LAGS.max(ar.lags.len() + 1), ar.lags.len())?;
    let garch = garch_fit(resid.values(), order)?;
    let smv = TimeSeries::new(smv_name, resid.start(), garch.h_path.clone());
    Ok(VolatilityExtraction {
        dsm,
        mean_lb,
        smv,
        garch,
        ar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::numerical_gradient;
    use crate::rng::standard_normals;
    use crate::series::parse_date;
    use crate::stats::{kurtosis, mean, pearson};

    fn ts(values: Vec<f64>) -> TimeSeries {
        TimeSeries::new("y", parse_date("2020-01-01").unwrap(), values)
    }

    fn g11() -> GarchParams {
        GarchParams::new(0.1, vec![0.1], vec![0.8])
    }

    #[test]
    fn ar_recovers_sparse_lags() {
        let n = 20_000;
        let e = standard_normals(&mut substream(3, 0), n + 200);
        let mut y = vec![0.0; n + 200];
        for t in 6..y.len() {
            y[t] = 0.4 * y[t - 1] + 0.3 * y[t - 6] + e[t];
        }
        let fit = fit_ar(&ts(y[200..].to_vec()), &[1, 6]).unwrap();
        assert!((fit.coefficients[0] - 0.4).abs() < 0.02, "{fit:?}");
        assert!((fit.coefficients[1] - 0.3).abs() < 0.02, "{fit:?}");
        assert_eq!(fit.residuals().len(), n - 6);
        assert_eq!(fit.residuals().start(), parse_date("2020-01-07").unwrap());
    }

    #[test]
    fn ar_residuals_orthogonal_to_regressors() {
        let e = standard_normals(&mut substream(4, 0), 3000);
        let y: Vec<f64> = e.iter().map(|v| 5.0 + 2.0 * v).collect();
        let fit = fit_ar(&ts(y.clone()), &[1, 6]).unwrap();
        let r = fit.residuals().values();
        let sd = variance(&y).sqrt();
        for &k in &[1usize, 6] {
            let dot: f64 = r.iter().enumerate().map(|(i, u)| u * (y[i + 6 - k] - mean(&y)) / sd).sum();
            assert!(dot.abs() / r.len() as f64 / variance(r).sqrt() < 1e-8);
        }
        assert!(mean(r).abs() < 1e-10);
    }

    #[test]
    fn ar_on_white_noise_is_insignificant() {
        let e = standard_normals(&mut substream(5, 0), 5000);
        let fit = fit_ar(&ts(e), &[1, 6]).unwrap();
        for (c, se) in fit.coefficients.iter().zip(&fit.std_errors[1..]) {
            assert!(c.abs() < 3.0 * se);
        }
    }

    #[test]
    fn ar_errors() {
        assert!(matches!(fit_ar(&ts(vec![2.0; 100]), &[1, 6]), Err(Error::RankDeficient { .. })));
        assert!(fit_ar(&ts(vec![1.0, 2.0, 3.0, 1.0, 2.0, 0.5, 1.0, 2.0]), &[1, 6]).is_err());
        assert!(fit_ar(&ts(vec![1.0; 100]), &[]).is_err());
    }

    #[test]
    fn filter_constant_variance_limit() {
        let eps = standard_normals(&mut substream(1, 0), 100);
        let p = GarchParams::new(0.7, vec![0.0], vec![0.0]);
        assert!(garch_filter(&p, &eps).unwrap().iter().all(|&h| h == 0.7));
    }

    #[test]
    fn filter_linear_recursion_closed_form() {
        let (omega, beta, h0) = (0.2, 0.6, 2.0);
        let p = GarchParams::new(omega, vec![0.15], vec![beta]);
        let h = garch_filter_with_presample(&p, &[0.0; 6], h0, 0.0).unwrap();
        // h[t-1] is the variance t steps after the presample
        for t in 1..=5 {
            let closed = omega * (1.0 - beta.powi(t)) / (1.0 - beta) + beta.powi(t) * h0;
            assert!((h[t as usize - 1] - closed).abs() < 1e-14);
        }
        // hand recursion
        let mut hand = h0;
        for v in h.iter().take(5) {
            hand = omega + beta * hand;
            assert_eq!(*v, hand);
        }
    }

    #[test]
    fn filter_rejects_bad_params() {
        let eps = [0.1, 0.2];
        assert!(garch_filter(&GarchParams::new(0.0, vec![0.1], vec![0.5]), &eps).is_err());
        assert!(garch_filter(&GarchParams::new(0.1, vec![-0.1], vec![0.5]), &eps).is_err());
        assert!(garch_filter(&GarchParams::new(0.1, vec![0.5], vec![0.5]), &eps).is_err());
    }

    #[test]
    fn reparameterization_roundtrip() {
        let p = GarchParams::new(0.3, vec![0.07, 0.02], vec![0.8]);
        let back = GarchParams::from_unconstrained(&p.to_unconstrained(), p.order());
        assert!((back.omega - 0.3).abs() < 1e-14);
        for (a, b) in back.alpha.iter().chain(&back.beta).zip([0.07, 0.02, 0.8]) {
            assert!((a - b).abs() < 1e-14);
        }
        let extreme = GarchParams::from_unconstrained(&[50.0, 40.0, 40.0], GarchOrder::new(1, 1));
        assert!(extreme.validate().is_ok());
        assert!(extreme.persistence() < PERSISTENCE_CAP);
    }

    #[test]
    fn simulate_is_deterministic() {
        let a = simulate_garch(&g11(), 500, 100, 9).unwrap();
        let b = simulate_garch(&g11(), 500, 100, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_garch(&g11(), 500, 100, 10).unwrap());
        assert!(simulate_garch(&GarchParams::new(0.1, vec![0.5], vec![0.6]), 10, 0, 1).is_err());
    }

    #[test]
    fn simulate_constant_variance_lln() {
        let e = simulate_garch(&GarchParams::new(4.0, vec![0.0], vec![0.0]), 100_000, 0, 2).unwrap();
        let v = variance(&e);
        assert!((v - 4.0).abs() < 0.2, "{v}");
    }

    #[test]
    fn simulate_garch_has_fat_tails() {
        let e = simulate_garch(&g11(), 100_000, 1000, 3).unwrap();
        assert!(kurtosis(&e) > 3.0);
    }

    #[test]
    fn fit_recovers_garch11() {
        let seeds = 50;
        let good = (0..seeds)
            .filter(|&s| {
                let eps = simulate_garch(&g11(), 10_000, 500, 100 + s).unwrap();
                let f = garch_fit(&eps, GarchOrder::new(1, 1)).unwrap();
                (f.omega() - 0.1).abs() <= 0.05 && (f.alpha()[0] - 0.1).abs() <= 0.05 && (f.beta()[0] - 0.8).abs() <= 0.05
            })
            .count();
        assert!(good as f64 >= 0.9 * seeds as f64, "{good}/{seeds}");
    }

    #[test]
    fn fit_on_iid_data_is_degenerate() {
        let sigma2: f64 = 2.5;
        let eps: Vec<f64> = standard_normals(&mut substream(21, 0), 5000).iter().map(|z| z * sigma2.sqrt()).collect();
        let f = garch_fit(&eps, GarchOrder::new(1, 1)).unwrap();
        let uv = f.params.unconditional_variance();
        assert!((uv - sigma2).abs() < 0.1 * sigma2, "{f:?}");
        assert!(f.alpha()[0] < 0.05, "{f:?}");
        let arch = garch_fit(&eps, GarchOrder::new(1, 0)).unwrap();
        assert!(arch.params.persistence() < 0.05, "{arch:?}");
        assert!((arch.params.unconditional_variance() - sigma2).abs() < 0.1 * sigma2);
    }

    #[test]
    fn fit_improves_on_start_and_matches_filter() {
        let eps = simulate_garch(&GarchParams::new(0.05, vec![0.08, 0.04], vec![0.8]), 3000, 200, 5).unwrap();
        let f = garch_fit(&eps, GarchOrder::new(2, 1)).unwrap();
        assert!(f.loglik >= f.initial_loglik);
        assert_eq!(garch_filter(&f.params, &eps).unwrap(), f.h_path);
        assert!(f.h_path.iter().all(|&h| h >= f.omega()));
        let zv = variance(&f.z);
        assert!((0.9..=1.1).contains(&zv), "{zv}");
    }

    #[test]
    fn fit_gradient_vanishes_at_optimum() {
        let eps = simulate_garch(&g11(), 10_000, 500, 77).unwrap();
        let f = garch_fit(&eps, GarchOrder::new(1, 1)).unwrap();
        assert!(f.converged);
        let theta = unconstrained_coordinates(&f.params);
        let g = numerical_gradient(&|t: &[f64]| negative_loglik_unconstrained(t, GarchOrder::new(1, 1), &eps), &theta);
        assert!(g.iter().all(|v| v.abs() < 1e-3), "{g:?}");
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let eps = simulate_garch(&g11(), 10_000, 500, 31).unwrap();
        let c = 7.0;
        let scaled: Vec<f64> = eps.iter().map(|e| c * e).collect();
        let a = garch_fit(&eps, GarchOrder::new(1, 1)).unwrap();
        let b = garch_fit(&scaled, GarchOrder::new(1, 1)).unwrap();
        assert!((b.omega() / (c * c) - a.omega()).abs() < 1e-3);
        assert!((a.alpha()[0] - b.alpha()[0]).abs() < 1e-3);
        assert!((a.beta()[0] - b.beta()[0]).abs() < 1e-3);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(garch_fit(&[0.0; 100], GarchOrder::new(1, 1)), Err(Error::ZeroVariance)));
        assert!(garch_fit(&[0.5; 10], GarchOrder::new(1, 1)).is_err());
        let eps = simulate_garch(&g11(), 200, 0, 1).unwrap();
        assert!(garch_fit(&eps, GarchOrder::new(0, 1)).is_err());
    }

    #[test]
    fn standardized_residuals_adequacy() {
        let seeds = 50;
        let white = (0..seeds)
            .filter(|&s| {
                let eps = simulate_garch(&g11(), 5000, 500, 400 + s).unwrap();
                let f = garch_fit(&eps, GarchOrder::new(1, 1)).unwrap();
                f.lb_z2.p_value > 0.05
            })
            .count();
        assert!(white as f64 >= 0.9 * seeds as f64, "{white}");
    }

    #[test]
    fn constant_variance_model_standardizes_exactly() {
        let eps = standard_normals(&mut substream(8, 0), 400);
        let p = GarchParams::new(1.7, vec![0.0], vec![0.0]);
        let s = standardized_residuals(&p, &eps).unwrap();
        for (z, e) in s.z.iter().zip(&eps) {
            assert_eq!(*z, e / 1.7f64.sqrt());
        }
    }

    #[test]
    fn misspecified_constant_variance_is_detected() {
        let seeds = 50;
        let detected = (0..seeds)
            .filter(|&s| {
                let eps = simulate_garch(&GarchParams::new(0.05, vec![0.15], vec![0.8]), 5000, 500, 600 + s).unwrap();
                let p = GarchParams::new(variance(&eps), vec![0.0], vec![0.0]);
                standardized_residuals(&p, &eps).unwrap().lb_z2.p_value < 0.05
            })
            .count();
        assert!(detected as f64 >= 0.9 * seeds as f64, "{detected}");
    }

    #[test]
    fn extraction_tracks_true_variance() {
        let n = 5000;
        let params = g11();
        let mut rng = substream(13, 0);
        let mut h = params.unconditional_variance();
        let mut e_prev = 0.0f64;
        let mut level = 100.0;
        let mut sm = Vec::with_capacity(n + 1);
        let mut truth = Vec::with_capacity(n);
        sm.push(level);
        for _ in 0..n {
            h = params.omega + params.alpha[0] * e_prev * e_prev + params.beta[0] * h;
            let z: f64 = StandardNormal.sample(&mut rng);
            e_prev = z * h.sqrt();
            level += e_prev;
            sm.push(level);
            truth.push(h);
        }
        let out = extract_volatility(&ts(sm), &[1, 6], GarchOrder::new(1, 1), "SMV").unwrap();
        assert_eq!(out.smv.len(), n - 6);
        assert!(out.smv.values().iter().all(|&v| v > 0.0));
        let r = pearson(out.smv.values(), &truth[6..]);
        assert!(r > 0.8, "r = {r}");
        assert!(out.garch.converged);
    }

    #[test]
    fn extraction_of_constant_index_fails() {
        assert!(matches!(
            extract_volatility(&ts(vec![100.0; 200]), &[1, 6], GarchOrder::new(2, 1), "SMV"),
            Err(Error::ZeroVariance)
        ));
    }
}
