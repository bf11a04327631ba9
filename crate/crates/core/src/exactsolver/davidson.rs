use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;
use nalgebra::{DMatrix, DVector};

pub struct DavidsonOptions {
    pub tol: f64,
    pub max_subspace: usize,
    pub max_iter: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_subspace: 40, max_iter: 1000 }
    }
}

fn orthonormalize_against(v: &mut DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
    let n = v.norm();
    if n > 0.0 {
        *v /= n;
    }
    n
}

/// Lowest `n_roots` eigenpairs of a symmetric operator given by `sigma`.
pub fn davidson(
    sigma: impl Fn(&DVector<f64>) -> DVector<f64>,
    diag: &DVector<f64>,
    guesses: Vec<DVector<f64>>,
    n_roots: usize,
    opts: &DavidsonOptions,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let dim = diag.len();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut images: Vec<DVector<f64>> = Vec::new();
    for mut g in guesses {
        if orthonormalize_against(&mut g, &basis) > 1e-8 {
            images.push(sigma(&g));
            basis.push(g);
        }
    }
    if basis.len() < n_roots {
        return Err(Error::Numerical("not enough independent Davidson guesses".into()));
    }
    for _ in 0..opts.max_iter {
        let m = basis.len();
        let mut small = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let x = basis[i].dot(&images[j]);
                small[(i, j)] = x;
                small[(j, i)] = x;
            }
        }
        let (vals, vecs) = sorted_symmetric_eigen(&small);
        let mut ritz = Vec::with_capacity(n_roots);
        let mut ritz_img = Vec::with_capacity(n_roots);
        let mut new_dirs = Vec::new();
        let mut converged = true;
        for k in 0..n_roots {
            let mut x = DVector::zeros(dim);
            let mut hx = DVector::zeros(dim);
            for i in 0..m {
                x.axpy(vecs[(i, k)], &basis[i], 1.0);
                hx.axpy(vecs[(i, k)], &images[i], 1.0);
            }
            let r = &hx - &x * vals[k];
            if r.norm() > opts.tol {
                converged = false;
                let mut t = DVector::from_fn(dim, |i, _| {
                    let d = diag[i] - vals[k];
                    r[i] / if d.abs() < 1e-8 { 1e-8_f64.copysign(d) } else { d }
                });
                t /= t.norm().max(1e-300);
                new_dirs.push(t);
            }
            ritz.push(x);
            ritz_img.push(hx);
        }
        if converged {
            return Ok((vals.iter().take(n_roots).copied().collect(), ritz));
        }
        if basis.len() + new_dirs.len() > opts.max_subspace {
            // restart from the current Ritz vectors (orthonormal by construction)
            basis = ritz;
            images = ritz_img;
        }
        let mut added = 0;
        for mut t in new_dirs {
            if orthonormalize_against(&mut t, &basis) > 1e-6 {
                images.push(sigma(&t));
                basis.push(t);
                added += 1;
            }
        }
        if added == 0 {
            return Err(Error::Numerical("Davidson subspace collapsed before convergence".into()));
        }
    }
    Err(Error::Numerical("Davidson did not converge".into()))
}
