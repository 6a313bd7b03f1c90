//! BFGS quasi-Newton minimizer with central-difference gradients.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Sup-norm of the last accepted step.
    pub step_tol: f64,
    /// Sup-norm of the gradient.
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            step_tol: 1e-6,
            grad_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Central differences with step `1e-5 * max(1, |x_i|)`.
pub fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0`. Non-finite function values are treated as `+inf`
/// and rejected by the line search.
pub fn minimize_bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: BfgsOptions) -> Minimum {
    let d = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x);
    let mut g = numerical_gradient(&eval, &x);
    // inverse Hessian approximation, row-major
    let mut hinv = vec![0.0; d * d];
    for i in 0..d {
        hinv[i * d + i] = 1.0;
    }
    let mut scaled = false;
    let mut iterations = 0;
    let mut converged = sup(&g) < opts.grad_tol * 1e-2;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = (0..d)
            .map(|i| -(0..d).map(|j| hinv[i * d + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            // lost positive definiteness: restart from steepest descent
            for (i, v) in hinv.iter_mut().enumerate() {
                *v = if i % (d + 1) == 0 { 1.0 } else { 0.0 };
            }
            scaled = false;
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if !scaled {
            // unscaled first step: cap its length at 1
            let norm = dot(&dir, &dir).sqrt();
            if norm > 1.0 {
                dir.iter_mut().for_each(|v| *v /= norm);
                slope /= norm;
            }
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let fv = eval(&xn);
            if fv <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fv));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            // no decrease along the search direction; judge on the gradient alone
            converged = sup(&g) < opts.grad_tol;
            break;
        };

        let gn = numerical_gradient(&eval, &xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= gamma);
                scaled = true;
            }
            let hy: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| hinv[i * d + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..d {
                for j in 0..d {
                    hinv[i * d + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }

        let step = sup(&s);
        x = xn;
        fx = fn_;
        g = gn;
        let gnorm = sup(&g);
        converged = (gnorm < opts.grad_tol && step < opts.step_tol) || gnorm < opts.grad_tol * 1e-2;
    }

    Minimum {
        x,
        value: fx,
        gradient: g,
        iterations,
        converged,
    }
}
