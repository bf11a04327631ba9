//! Quasi-Newton (BFGS) minimization with Armijo backtracking.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct BfgsOptions {
    /// Converged when the largest gradient component is below this.
    pub gtol: f64,
    pub max_iter: usize,
    /// Maximum step halvings per line search.
    pub max_backtracks: usize,
    /// Diagonal of the initial inverse Hessian; identity (with first-step
    /// scaling) when absent.
    pub inverse_diagonal: Option<Vec<f64>>,
    /// Largest allowed step (infinity norm); longer steps are shortened.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { gtol: 1e-6, max_iter: 500, max_backtracks: 40, inverse_diagonal: None, max_step: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Set when the line search could not reduce `f`.
    pub stalled: bool,
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f` given a callback returning value and gradient.
pub fn bfgs(
    mut fg: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    x0: &[f64],
    opts: &BfgsOptions,
) -> Result<BfgsResult> {
    let n = x0.len();
    let mut eval = |x: &DVector<f64>, count: &mut usize| -> Result<(f64, DVector<f64>)> {
        *count += 1;
        let (f, g) = fg(x.as_slice())?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite objective at evaluation {count}")));
        }
        Ok((f, DVector::from_vec(g)))
    };
    let mut evaluations = 0;
    let mut x = DVector::from_column_slice(x0);
    let (mut f, mut g) = eval(&x, &mut evaluations)?;
    let h0 = |diag: &Option<Vec<f64>>| match diag {
        Some(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        None => DMatrix::identity(n, n),
    };
    let mut hinv = h0(&opts.inverse_diagonal);
    let mut scaled = opts.inverse_diagonal.is_some();
    let mut iterations = 0;
    let mut stalled = false;
    while iterations < opts.max_iter {
        if n == 0 || g.amax() < opts.gtol {
            break;
        }
        let mut p = -(&hinv * &g);
        let mut slope = p.dot(&g);
        if slope >= 0.0 {
            // lost descent direction: restart from the initial metric
            hinv = h0(&opts.inverse_diagonal);
            scaled = opts.inverse_diagonal.is_some();
            p = -(&hinv * &g);
            slope = p.dot(&g);
        }
        let longest = p.amax();
        if longest > opts.max_step {
            p *= opts.max_step / longest;
            slope = p.dot(&g);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let xn = &x + &p * alpha;
            let (fnew, gnew) = eval(&xn, &mut evaluations)?;
            if fnew <= f + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            stalled = true;
            break;
        };
        iterations += 1;
        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
            if !scaled {
                hinv *= sy / y.dot(&y);
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy^T + hy s^T) + (rho^2 yHy + rho) s s^T
            hinv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        let df = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if df.abs() < 1e-15 * f.abs().max(1.0) && g.amax() < 1e3 * opts.gtol {
            // no measurable progress left at machine precision
            break;
        }
    }
    let converged = g.amax() < opts.gtol;
    Ok(BfgsResult {
        x: x.as_slice().to_vec(),
        f,
        grad: g.as_slice().to_vec(),
        iterations,
        evaluations,
        converged,
        stalled,
    })
}
