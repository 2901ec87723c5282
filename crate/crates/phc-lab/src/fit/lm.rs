//! Damped Gauss–Newton (Levenberg–Marquardt) engine with analytic Jacobians.
//!
//! All fit models in this crate are small and smooth; analytic Jacobians are
//! what makes the noiseless parameter-recovery bar reachable.

use nalgebra::{DMatrix, DVector};

/// A curve model y = f(x; p) with analytic gradient in the parameters.
pub trait FitModel {
    fn n_params(&self) -> usize;
    fn eval(&self, x: f64, p: &[f64]) -> f64;
    /// Writes ∂f/∂pᵢ into `out`.
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]);
    /// Project parameters back into their valid domain after a step.
    fn clamp(&self, _p: &mut [f64]) {}
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// 1σ parameter uncertainties from the scaled covariance, NaN-free;
    /// zero when the covariance is singular.
    pub uncertainties: Vec<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub struct LmConfig {
    pub max_iterations: usize,
    /// Convergence when the relative parameter step falls below this.
    pub step_tolerance: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-10,
        }
    }
}

fn chi2<M: FitModel>(model: &M, xs: &[f64], ys: &[f64], w: &[f64], p: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .zip(w)
        .map(|((&x, &y), &wi)| {
            let r = y - model.eval(x, p);
            wi * r * r
        })
        .sum()
}

/// Weighted Levenberg–Marquardt minimization of Σ wᵢ (yᵢ − f(xᵢ; p))².
pub fn levenberg_marquardt<M: FitModel>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    weights: &[f64],
    p0: &[f64],
    cfg: &LmConfig,
) -> LmOutcome {
    let n = xs.len();
    let np = model.n_params();
    assert_eq!(ys.len(), n);
    assert_eq!(weights.len(), n);
    assert_eq!(p0.len(), np);

    let mut p = p0.to_vec();
    model.clamp(&mut p);
    let mut cost = chi2(model, xs, ys, weights, &p);
    let initial_cost = cost;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_buf = vec![0.0; np];

    for it in 0..cfg.max_iterations {
        iterations = it + 1;
        // Build JᵀWJ and JᵀWr.
        let mut jtj = DMatrix::<f64>::zeros(np, np);
        let mut jtr = DVector::<f64>::zeros(np);
        for ((&x, &y), &wi) in xs.iter().zip(ys).zip(weights) {
            model.grad(x, &p, &mut grad_buf);
            let r = y - model.eval(x, &p);
            for i in 0..np {
                jtr[i] += wi * grad_buf[i] * r;
                for j in 0..np {
                    jtj[(i, j)] += wi * grad_buf[i] * grad_buf[j];
                }
            }
        }

        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj.clone();
            for i in 0..np {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = damped.clone().lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            model.clamp(&mut trial);
            let trial_cost = chi2(model, xs, ys, weights, &trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = p
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (b - a).abs() / a.abs().max(1e-30))
                    .fold(0.0f64, f64::max);
                p = trial;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-14);
                improved = true;
                if rel_step < cfg.step_tolerance {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !improved {
            // Stuck: accept convergence only if we actually descended.
            converged = cost < initial_cost || cost == 0.0;
            break;
        }
    }

    // Covariance from the final JᵀWJ, scaled by reduced chi-square.
    let mut jtj = DMatrix::<f64>::zeros(np, np);
    for (&x, &wi) in xs.iter().zip(weights) {
        model.grad(x, &p, &mut grad_buf);
        for i in 0..np {
            for j in 0..np {
                jtj[(i, j)] += wi * grad_buf[i] * grad_buf[j];
            }
        }
    }
    let dof = (n.saturating_sub(np)).max(1) as f64;
    let scale = cost / dof;
    let uncertainties = match jtj.try_inverse() {
        Some(cov) => (0..np)
            .map(|i| (cov[(i, i)] * scale).max(0.0).sqrt())
            .collect(),
        None => vec![0.0; np],
    };

    LmOutcome {
        residual_rms: (cost / n as f64).sqrt(),
        params: p,
        uncertainties,
        converged,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;
    impl FitModel for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, x: f64, p: &[f64]) -> f64 {
            p[0] * x + p[1]
        }
        fn grad(&self, x: f64, _p: &[f64], out: &mut [f64]) {
            out[0] = x;
            out[1] = 1.0;
        }
    }

    #[test]
    fn recovers_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let w = vec![1.0; xs.len()];
        let out = levenberg_marquardt(&Line, &xs, &ys, &w, &[1.0, 0.0], &LmConfig::default());
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-10);
        assert!((out.params[1] + 1.0).abs() < 1e-9);
    }
}
