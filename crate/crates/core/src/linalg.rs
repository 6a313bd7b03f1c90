//! Least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on `|R_jj| / ||x_j||` below which column `j` counts as
/// linearly dependent on the columns before it.
const RANK_TOL: f64 = 1e-9;

/// Factorized design matrix, reusable for several right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    x: DMatrix<f64>,
}

impl LeastSquares {
    /// Factorizes `x` (`n × k`, `n > k`). `names` label the columns for
    /// rank-deficiency errors.
    pub fn new(x: DMatrix<f64>, names: &[String]) -> Result<Self> {
        let (n, k) = x.shape();
        if n <= k {
            return Err(Error::DegreesOfFreedom {
                regressors: k,
                required: k,
                available: n,
            });
        }
        let qr = x.clone().qr();
        let r = qr.r();
        for j in 0..k {
            let norm = x.column(j).norm();
            if norm == 0.0 || !(r[(j, j)].abs() > RANK_TOL * norm) {
                let column = names
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| format!("column {j}"));
                return Err(Error::RankDeficient { column });
            }
        }
        Ok(Self { q: qr.q(), r, x })
    }

    pub fn nobs(&self) -> usize {
        self.x.nrows()
    }

    pub fn nregressors(&self) -> usize {
        self.x.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Coefficients minimizing `||y - X b||`.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let qty = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&qty)
            .expect("R has a nonzero diagonal after the rank check")
    }

    /// `(X'X)^{-1} = R^{-1} R^{-T}`.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.nregressors();
        let r_inv = self
            .r
            .solve_upper_triangular(&DMatrix::identity(k, k))
            .expect("R has a nonzero diagonal after the rank check");
        &r_inv * r_inv.transpose()
    }

    pub fn fit(&self, y: &DVector<f64>) -> OlsFit {
        let coef = self.solve(y);
        let residuals = y - &self.x * &coef;
        let ssr = residuals.norm_squared();
        let dof = self.nobs() - self.nregressors();
        OlsFit {
            coef,
            residuals,
            ssr,
            sigma2: ssr / dof as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    pub ssr: f64,
    /// `SSR / (n - k)`.
    pub sigma2: f64,
}

/// One-shot OLS with classical standard errors.
pub fn ols(x: DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<(OlsFit, Vec<f64>)> {
    let ls = LeastSquares::new(x, names)?;
    let fit = ls.fit(y);
    let cov = ls.xtx_inverse();
    let se = (0..ls.nregressors())
        .map(|j| (fit.sigma2 * cov[(j, j)]).sqrt())
        .collect();
    Ok((fit, se))
}
