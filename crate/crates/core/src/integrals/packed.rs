use crate::linalg::Tensor4;

#[inline]
fn pair(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

/// Two-electron integrals `(pq|rs)` stored once per 8-fold symmetry class.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedEri {
    n: usize,
    data: Vec<f64>,
}

impl PackedEri {
    pub fn zeros(n: usize) -> Self {
        let np = n * (n + 1) / 2;
        Self { n, data: vec![0.0; np * (np + 1) / 2] }
    }

    pub fn n_orb(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn index(p: usize, q: usize, r: usize, s: usize) -> usize {
        pair(pair(p, q), pair(r, s))
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[Self::index(p, q, r, s)]
    }

    /// Writes the whole symmetry class of `(pq|rs)`.
    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        self.data[Self::index(p, q, r, s)] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dense(&self) -> Tensor4 {
        let n = self.n;
        let mut t = Tensor4::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        t.set(p, q, r, s, self.get(p, q, r, s));
                    }
                }
            }
        }
        t
    }

    /// Packs a dense tensor by averaging each symmetry class; also returns the
    /// largest deviation of any image from its class average.
    pub fn from_dense_symmetrized(t: &Tensor4) -> (Self, f64) {
        let n = t.dim();
        let mut out = Self::zeros(n);
        let mut count = vec![0u8; out.data.len()];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let k = Self::index(p, q, r, s);
                        out.data[k] += t.get(p, q, r, s);
                        count[k] += 1;
                    }
                }
            }
        }
        for (x, c) in out.data.iter_mut().zip(&count) {
            *x /= *c as f64;
        }
        let mut residual: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        residual = residual.max((t.get(p, q, r, s) - out.get(p, q, r, s)).abs());
                    }
                }
            }
        }
        (out, residual)
    }

    /// Sub-block over the listed orbitals, in list order.
    pub fn restrict(&self, orbs: &[usize]) -> Self {
        let m = orbs.len();
        let mut out = Self::zeros(m);
        for a in 0..m {
            for b in 0..=a {
                for c in 0..m {
                    for d in 0..=c {
                        out.set(a, b, c, d, self.get(orbs[a], orbs[b], orbs[c], orbs[d]));
                    }
                }
            }
        }
        out
    }
}
