//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled until its 1-norm is below 1/4, so an 18-term series
/// is accurate to machine precision before squaring back.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigendecomposition with eigenvalues sorted ascending and a deterministic
/// sign for every eigenvector (largest-magnitude component positive).
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Flips `v` so that its largest-magnitude component is positive. Ties go to
/// the lowest index.
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn symmetric_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sorted_symmetric_eigen(m);
    let d = DMatrix::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Largest absolute element.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Dense real symmetric 4-index array with row-major `[p][q][r][s]` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    #[inline]
    pub fn add(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Transforms every index with `c`: `out[a,b,c,d] = Σ c[p,a] c[q,b] c[r,c] c[s,d] in[p,q,r,s]`,
    /// done as four one-index passes.
    pub fn transform(&self, c: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        assert_eq!(c.nrows(), n);
        let m = c.ncols();
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for axis in 0..4 {
            let mut out_dims = dims;
            out_dims[axis] = m;
            let total: usize = out_dims.iter().product();
            let mut out = vec![0.0; total];
            let inner: usize = dims[axis + 1..].iter().product();
            let outer: usize = dims[..axis].iter().product();
            let len = dims[axis];
            for o in 0..outer {
                for a in 0..m {
                    let dst = (o * m + a) * inner;
                    for p in 0..len {
                        let w = c[(p, a)];
                        if w == 0.0 {
                            continue;
                        }
                        let src = (o * len + p) * inner;
                        for k in 0..inner {
                            out[dst + k] += w * cur[src + k];
                        }
                    }
                }
            }
            cur = out;
            dims = out_dims;
        }
        Tensor4 { n: m, data: cur }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7f64;
        let k = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let u = expm(&k);
        let expect = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!(max_abs(&(u - expect)) < 1e-14);
    }

    #[test]
    fn expm_large_norm_stays_orthogonal() {
        let n = 5;
        let mut k = DMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..p {
                let v = ((p * 7 + q * 3) as f64).sin() * 3.0;
                k[(p, q)] = v;
                k[(q, p)] = -v;
            }
        }
        let u = expm(&k);
        let err = max_abs(&(u.transpose() * &u - DMatrix::identity(n, n)));
        assert!(err < 1e-12, "{err}");
        let back = expm(&(-k));
        assert!(max_abs(&(back * u - DMatrix::identity(n, n))) < 1e-12);
    }

    #[test]
    fn tensor_transform_identity() {
        let mut t = Tensor4::zeros(3);
        for (i, v) in t.as_mut_slice().iter_mut().enumerate() {
            *v = (i as f64).cos();
        }
        let same = t.transform(&DMatrix::identity(3, 3));
        assert_eq!(same, t);
    }
}
