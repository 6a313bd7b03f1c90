//! Orthogonalized impulse responses under a recursive ordering, with Monte
//! Carlo two-standard-deviation bands.
//!
//! Responses are reported in the fit's own variable labels: `theta[h][(i, j)]`
//! is the response of variable `i` at horizon `h` to a one-standard-deviation
//! orthogonal shock in variable `j`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normals, substream};
use crate::var::{companion_matrix, fit_var_matrices, lag_matrices, spectral_radius, VarFit};

/// Lower-triangular `P` with `P P' = s`.
pub fn cholesky_lower(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::InvalidArgument("Cholesky needs a square matrix".into()));
    }
    if (s - s.transpose()).amax() > 1e-10 {
        return Err(Error::InvalidArgument("Cholesky needs a symmetric matrix".into()));
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j + 1 });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut v = s[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / djj;
        }
    }
    Ok(l)
}

/// `Phi_0 = I`, `Phi_h = sum_{i=1..min(h,p)} A_i Phi_{h-i}`.
pub fn ma_coefficients(a: &[DMatrix<f64>], horizon: usize) -> Vec<DMatrix<f64>> {
    let k = a[0].nrows();
    let mut phi: Vec<DMatrix<f64>> = Vec::with_capacity(horizon + 1);
    phi.push(DMatrix::identity(k, k));
    for h in 1..=horizon {
        let mut m = DMatrix::zeros(k, k);
        for (i, ai) in a.iter().enumerate().take(h) {
            m += ai * &phi[h - 1 - i];
        }
        phi.push(m);
    }
    phi
}

/// Positions of `ordering` within `names`; errors unless it is a permutation.
pub fn permutation(names: &[String], ordering: &[String]) -> Result<Vec<usize>> {
    if ordering.len() != names.len() {
        return Err(Error::InvalidArgument(format!(
            "ordering {ordering:?} is not a permutation of {names:?}"
        )));
    }
    let mut used = vec![false; names.len()];
    ordering
        .iter()
        .map(|o| {
            let i = names
                .iter()
                .position(|n| n == o)
                .ok_or_else(|| Error::UnknownName(o.clone()))?;
            if std::mem::replace(&mut used[i], true) {
                return Err(Error::InvalidArgument(format!("`{o}` repeated in ordering")));
            }
            Ok(i)
        })
        .collect()
}

/// Impact matrix in original labels: `Pi' L Pi`, where `L` is the Cholesky
/// factor of `sigma` reordered by `perm`.
pub fn impact_matrix(sigma: &DMatrix<f64>, perm: &[usize]) -> Result<DMatrix<f64>> {
    let k = perm.len();
    let permuted = DMatrix::from_fn(k, k, |i, j| sigma[(perm[i], perm[j])]);
    let l = cholesky_lower(&permuted)?;
    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            out[(perm[i], perm[j])] = l[(i, j)];
        }
    }
    Ok(out)
}

/// `Theta_h = Phi_h B` for `h = 0..=horizon`.
pub fn orthogonal_responses(a: &[DMatrix<f64>], impact: &DMatrix<f64>, horizon: usize) -> Vec<DMatrix<f64>> {
    ma_coefficients(a, horizon)
        .into_iter()
        .map(|phi| phi * impact)
        .collect()
}

/// Point responses of `fit` under the recursive `ordering`.
pub fn irf_orthogonal(fit: &VarFit, ordering: &[String], horizon: usize) -> Result<Vec<DMatrix<f64>>> {
    let perm = permutation(&fit.var_names, ordering)?;
    let impact = impact_matrix(&fit.sigma_u, &perm)?;
    Ok(orthogonal_responses(&fit.a, &impact, horizon))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandScheme {
    /// Coefficients drawn from their asymptotic normal, `Sigma_u` fixed.
    #[default]
    Parametric,
    /// Residual rows resampled, data rebuilt recursively and refitted.
    ResidualBootstrap,
    /// `Sigma_u` drawn from an inverse Wishart around `U'U` with `n - K`
    /// degrees of freedom, then coefficients from the normal given that draw.
    NormalInverseWishart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    pub horizon: usize,
    pub n_draws: usize,
    pub seed: u64,
    pub scheme: BandScheme,
}

/// Share of explosive draws above which bands are flagged unreliable.
pub const UNRELIABLE_EXPLOSIVE_SHARE: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct IrfResult {
    pub horizon: usize,
    pub var_names: Vec<String>,
    pub ordering: Vec<String>,
    pub theta: Vec<DMatrix<f64>>,
    /// Monte Carlo mean per horizon; the band center.
    pub center: Vec<DMatrix<f64>>,
    /// Two standard deviations of the draws.
    pub half_width: Vec<DMatrix<f64>>,
    pub n_draws: usize,
    pub n_accepted: usize,
    pub n_rejected: usize,
    pub n_explosive: usize,
    pub seed: u64,
    pub scheme: BandScheme,
}

impl IrfResult {
    pub fn k(&self) -> usize {
        self.var_names.len()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.var_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn lower(&self, h: usize, i: usize, j: usize) -> f64 {
        self.center[h][(i, j)] - self.half_width[h][(i, j)]
    }

    pub fn upper(&self, h: usize, i: usize, j: usize) -> f64 {
        self.center[h][(i, j)] + self.half_width[h][(i, j)]
    }

    /// Horizons `h >= 1` whose band strictly excludes zero.
    pub fn sig_horizons(&self, response: usize, impulse: usize) -> Vec<usize> {
        (1..=self.horizon)
            .filter(|&h| self.lower(h, response, impulse) > 0.0 || self.upper(h, response, impulse) < 0.0)
            .collect()
    }

    pub fn unreliable(&self) -> bool {
        self.n_accepted < 2 || self.n_explosive as f64 > UNRELIABLE_EXPLOSIVE_SHARE * self.n_draws as f64
    }

    pub fn significance(&self, impulse: &str, response: &str, early_window: usize) -> Result<Significance> {
        let (i, j) = (self.index_of(response)?, self.index_of(impulse)?);
        let horizons = self.sig_horizons(i, j);
        let early: Vec<usize> = horizons.iter().copied().filter(|&h| h <= early_window).collect();
        let positive = |h: &usize| self.lower(*h, i, j) > 0.0;
        Ok(Significance {
            impulse: impulse.to_string(),
            response: response.to_string(),
            early_window,
            early_positive: !early.is_empty() && early.iter().all(positive),
            early_horizons: early,
            all_positive: !horizons.is_empty() && horizons.iter().all(positive),
            horizons,
        })
    }
}

/// Which horizons of one (impulse -> response) pair are significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub impulse: String,
    pub response: String,
    pub horizons: Vec<usize>,
    pub all_positive: bool,
    pub early_window: usize,
    pub early_horizons: Vec<usize>,
    /// Some horizon in `1..=early_window` is significant, and every such
    /// horizon has its band above zero.
    pub early_positive: bool,
}

enum Draw {
    Accepted { theta: Vec<DMatrix<f64>>, explosive: bool },
    Rejected,
}

fn parametric_draw(fit: &VarFit, chol_xtx: &DMatrix<f64>, impact: &DMatrix<f64>, horizon: usize, seed: u64, index: u64) -> Draw {
    let mut rng = substream(seed, index);
    let (n_reg, k) = fit.coef.shape();
    let mut coef = fit.coef.clone();
    for i in 0..k {
        let z = DVector::from_vec(standard_normals(&mut rng, n_reg));
        let shock = chol_xtx * z * fit.sigma2[i].sqrt();
        for r in 0..n_reg {
            coef[(r, i)] += shock[r];
        }
    }
    let a = lag_matrices(&coef, k, fit.p);
    finish_draw(&a, impact, horizon)
}

fn wishart_draw(fit: &VarFit, chol_xtx: &DMatrix<f64>, chol_s_inv: &DMatrix<f64>, perm: &[usize], horizon: usize, seed: u64, index: u64) -> Draw {
    let mut rng = substream(seed, index);
    let (n_reg, k) = fit.coef.shape();
    let nu = (fit.n_obs - n_reg) as f64;
    // Bartlett: W = L A A' L' ~ Wishart((U'U)^-1, nu), Sigma = W^-1
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        let chi = ChiSquared::new(nu - i as f64).expect("positive degrees of freedom");
        a[(i, i)] = chi.sample(&mut rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let la = chol_s_inv * a;
    let Some(sigma) = (&la * la.transpose()).try_inverse() else {
        return Draw::Rejected;
    };
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let Ok(chol_sigma) = cholesky_lower(&sigma) else {
        return Draw::Rejected;
    };
    let z = DMatrix::from_vec(n_reg, k, standard_normals(&mut rng, n_reg * k));
    let coef = &fit.coef + chol_xtx * z * chol_sigma.transpose();
    match impact_matrix(&sigma, perm) {
        Ok(impact) => finish_draw(&lag_matrices(&coef, k, fit.p), &impact, horizon),
        Err(_) => Draw::Rejected,
    }
}

fn bootstrap_draw(fit: &VarFit, perm: &[usize], horizon: usize, seed: u64, index: u64) -> Draw {
    let mut rng = substream(seed, index);
    let (t_len, k) = fit.endog.shape();
    let p = fit.p;
    let mut y = fit.endog.clone();
    for t in p..t_len {
        let pick = rng.random_range(0..fit.n_obs);
        let mut v: DVector<f64> = fit.c.clone() + fit.residuals.row(pick).transpose();
        for (l, al) in fit.a.iter().enumerate() {
            v += al * y.row(t - l - 1).transpose();
        }
        if fit.exog.ncols() > 0 {
            v += &fit.b * fit.exog.row(t).transpose();
        }
        for j in 0..k {
            y[(t, j)] = v[j];
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Draw::Rejected;
    }
    let refit = match fit_var_matrices(y, fit.exog.clone(), p, fit.var_names.clone(), fit.exog_names.clone(), fit.first_date) {
        Ok(f) => f,
        Err(_) => return Draw::Rejected,
    };
    match impact_matrix(&refit.sigma_u, perm) {
        Ok(impact) => finish_draw(&refit.a, &impact, horizon),
        Err(_) => Draw::Rejected,
    }
}

fn finish_draw(a: &[DMatrix<f64>], impact: &DMatrix<f64>, horizon: usize) -> Draw {
    let theta = orthogonal_responses(a, impact, horizon);
    if theta.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Draw::Rejected;
    }
    let explosive = !(spectral_radius(&companion_matrix(a)) < 1.0);
    Draw::Accepted { theta, explosive }
}

const CHUNK: usize = 256;

/// Point responses plus Monte Carlo bands.
///
/// Draw `d` uses random stream `d` of `seed`, and the moments are
/// accumulated in draw order, so the result does not depend on the number
/// of worker threads.
pub fn irf_bands(fit: &VarFit, ordering: &[String], opts: BandOptions) -> Result<IrfResult> {
    if opts.n_draws < 2 {
        return Err(Error::InvalidArgument("at least two Monte Carlo draws are needed".into()));
    }
    let perm = permutation(&fit.var_names, ordering)?;
    let impact = impact_matrix(&fit.sigma_u, &perm)?;
    let theta = orthogonal_responses(&fit.a, &impact, opts.horizon);
    let chol_xtx = match opts.scheme {
        BandScheme::Parametric | BandScheme::NormalInverseWishart => {
            let sym = (&fit.xtx_inv + fit.xtx_inv.transpose()) * 0.5;
            Some(cholesky_lower(&sym)?)
        }
        BandScheme::ResidualBootstrap => None,
    };
    let chol_s_inv = match opts.scheme {
        BandScheme::NormalInverseWishart => {
            let k = fit.k();
            if fit.n_obs < fit.n_regressors() + k {
                return Err(Error::DegreesOfFreedom {
                    regressors: fit.n_regressors(),
                    required: fit.n_regressors() + k,
                    available: fit.n_obs,
                });
            }
            let s = fit.residuals.transpose() * &fit.residuals;
            let s_inv = s.try_inverse().ok_or(Error::NotPositiveDefinite { pivot: k })?;
            Some(cholesky_lower(&((&s_inv + s_inv.transpose()) * 0.5))?)
        }
        _ => None,
    };

    let k = fit.k();
    let h1 = opts.horizon + 1;
    let mut count = 0usize;
    let mut mean = vec![DMatrix::<f64>::zeros(k, k); h1];
    let mut m2 = vec![DMatrix::<f64>::zeros(k, k); h1];
    let (mut rejected, mut explosive) = (0usize, 0usize);

    let mut start = 0;
    while start < opts.n_draws {
        let end = (start + CHUNK).min(opts.n_draws);
        let draws: Vec<Draw> = (start..end)
            .into_par_iter()
            .map(|d| match (opts.scheme, &chol_xtx, &chol_s_inv) {
                (BandScheme::Parametric, Some(c), _) => parametric_draw(fit, c, &impact, opts.horizon, opts.seed, d as u64),
                (BandScheme::NormalInverseWishart, Some(c), Some(w)) => wishart_draw(fit, c, w, &perm, opts.horizon, opts.seed, d as u64),
                _ => bootstrap_draw(fit, &perm, opts.horizon, opts.seed, d as u64),
            })
            .collect();
        for draw in draws {
            match draw {
                Draw::Rejected => rejected += 1,
                Draw::Accepted { theta: th, explosive: ex } => {
                    explosive += ex as usize;
                    count += 1;
                    let nf = count as f64;
                    for h in 0..h1 {
                        for (idx, &x) in th[h].iter().enumerate() {
                            let delta = x - mean[h][idx];
                            mean[h][idx] += delta / nf;
                            m2[h][idx] += delta * (x - mean[h][idx]);
                        }
                    }
                }
            }
        }
        start = end;
    }

    let half_width = m2
        .iter()
        .map(|m| {
            m.map(|v| {
                if count > 1 {
                    2.0 * (v / (count - 1) as f64).max(0.0).sqrt()
                } else {
                    f64::INFINITY
                }
            })
        })
        .collect();
    Ok(IrfResult {
        horizon: opts.horizon,
        var_names: fit.var_names.clone(),
        ordering: ordering.to_vec(),
        theta,
        center: mean,
        half_width,
        n_draws: opts.n_draws,
        n_accepted: count,
        n_rejected: rejected,
        n_explosive: explosive,
        seed: opts.seed,
        scheme: opts.scheme,
    })
}
