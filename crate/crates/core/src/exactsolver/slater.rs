use crate::bits;
use crate::integrals::EmbeddedHamiltonian;

/// Spin-orbital integrals over interleaved spin orbitals: `h[P,Q]` and the
/// antisymmetrized `<PQ||RS>`.
pub struct SpinIntegrals {
    pub n_so: usize,
    pub e_core: f64,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl SpinIntegrals {
    pub fn new(emb: &EmbeddedHamiltonian) -> Self {
        let n = emb.n_act;
        let n_so = 2 * n;
        let mut h = vec![0.0; n_so * n_so];
        for p in 0..n_so {
            for q in 0..n_so {
                if p % 2 == q % 2 {
                    h[p * n_so + q] = emb.h_eff[(p / 2, q / 2)];
                }
            }
        }
        // <PQ|RS> = (pr|qs) delta(sP,sR) delta(sQ,sS)
        let phys = |p: usize, q: usize, r: usize, s: usize| -> f64 {
            if p % 2 == r % 2 && q % 2 == s % 2 {
                emb.v_act.get(p / 2, r / 2, q / 2, s / 2)
            } else {
                0.0
            }
        };
        let mut g = vec![0.0; n_so.pow(4)];
        for p in 0..n_so {
            for q in 0..n_so {
                for r in 0..n_so {
                    for s in 0..n_so {
                        g[((p * n_so + q) * n_so + r) * n_so + s] = phys(p, q, r, s) - phys(p, q, s, r);
                    }
                }
            }
        }
        Self { n_so, e_core: emb.e_core, h, g }
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_so + q]
    }

    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_so;
        self.g[((p * n + q) * n + r) * n + s]
    }

    pub fn diagonal(&self, det: u64) -> f64 {
        let occ = occupied(det, self.n_so);
        let mut e = self.e_core;
        for (k, &i) in occ.iter().enumerate() {
            e += self.h(i, i);
            for &j in &occ[..k] {
                e += self.g(i, j, i, j);
            }
        }
        e
    }

    /// Calls `f(target, value)` for every determinant connected to `det`
    /// by `H` (the diagonal first, then singles, then doubles).
    pub fn for_each_connection(&self, det: u64, mut f: impl FnMut(u64, f64)) {
        let n = self.n_so;
        let occ = occupied(det, n);
        let vir: Vec<usize> = (0..n).filter(|&k| det >> k & 1 == 0).collect();
        f(det, self.diagonal(det));
        for &i in &occ {
            for &a in &vir {
                if (i ^ a) & 1 != 0 {
                    continue;
                }
                let mut v = self.h(a, i);
                for &j in &occ {
                    v += self.g(a, j, i, j);
                }
                if v == 0.0 {
                    continue;
                }
                let (t, s) = bits::apply_ladder(det, &[(a, true), (i, false)]).expect("valid single");
                f(t, s * v);
            }
        }
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in vir.iter().enumerate() {
                    for &b in &vir[y + 1..] {
                        if (i & 1) + (j & 1) != (a & 1) + (b & 1) {
                            continue;
                        }
                        let v = self.g(a, b, i, j);
                        if v == 0.0 {
                            continue;
                        }
                        let (t, s) = bits::apply_ladder(det, &[(a, true), (b, true), (j, false), (i, false)])
                            .expect("valid double");
                        f(t, s * v);
                    }
                }
            }
        }
    }
}

fn occupied(det: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&k| det >> k & 1 == 1).collect()
}
