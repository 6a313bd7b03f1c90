//! Small numeric helpers: moments, chi-square tail, correlation.

use statrs::function::gamma::gamma_ur;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Variance with denominator `n`.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Upper tail `P(X > q)` of a chi-square with `dof` degrees of freedom,
/// through the regularized upper incomplete gamma function.
pub fn chi_square_sf(q: f64, dof: usize) -> f64 {
    assert!(dof > 0, "chi-square needs positive degrees of freedom");
    if q <= 0.0 {
        return 1.0;
    }
    if q.is_infinite() {
        return 0.0;
    }
    gamma_ur(dof as f64 / 2.0, q / 2.0).clamp(0.0, 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let v = variance(x);
    x.iter().map(|a| (a - m).powi(4)).sum::<f64>() / x.len() as f64 / (v * v)
}

/// Two-sided Kolmogorov-Smirnov distance between the sample and U(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = u - i as f64 / n;
            let hi = (i + 1) as f64 / n - u;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}
