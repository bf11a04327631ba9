//! Active-space reduced density matrices and their full-space expansion.

mod expand;

pub use expand::FullSpaceRdms;

use crate::bits;
use crate::error::{Error, Result};
use crate::integrals::EmbeddedHamiltonian;
use crate::linalg::{sorted_symmetric_eigen, Tensor4};
use crate::operators::Mapping;
use crate::statevector::Statevector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt::Write;

/// Orbital basis in which a set of RDMs was measured.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BasisTag {
    pub active: Vec<usize>,
    pub stamp: u64,
}

/// One- and two-body reduced density matrices of an active-space state.
///
/// Spin-orbital views use interleaved ordering. `gamma[p,q] = <a†_p a_q>`,
/// `gamma2[p,q,r,s] = <a†_p a†_q a_s a_r>`; the spin-summed views are
/// `d1[t,u] = sum_a <a†_ta a_ua>` and
/// `d2[p,q,r,s] = sum_{a,b} <a†_pa a†_qb a_sb a_ra>`, so that
/// `E = e_core + sum h d1 + 1/2 sum (pr|qs) d2[p,q,r,s]`.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrices {
    pub n_act: usize,
    pub n_elec: f64,
    pub gamma: DMatrix<f64>,
    pub gamma2: Tensor4,
    pub d1: DMatrix<f64>,
    pub d2: Tensor4,
    pub tag: BasisTag,
    /// Largest imaginary part dropped while measuring.
    pub max_imag: f64,
}

impl ReducedDensityMatrices {
    /// RDMs from nonzero amplitudes over occupation bitstrings (interleaved
    /// spin orbitals of `n_act` spatial orbitals).
    pub fn from_occupation_amplitudes(amps: &[(u64, Complex64)], n_act: usize) -> Self {
        let n_so = 2 * n_act;
        let lookup: HashMap<u64, Complex64> = amps.iter().copied().collect();
        let mut g1 = vec![Complex64::new(0.0, 0.0); n_so * n_so];
        let mut g2 = vec![Complex64::new(0.0, 0.0); n_so.pow(4)];
        let idx4 = |p: usize, q: usize, r: usize, s: usize| ((p * n_so + q) * n_so + r) * n_so + s;
        for &(b, psi_b) in amps {
            let occ: Vec<usize> = (0..n_so).filter(|&k| b >> k & 1 == 1).collect();
            for &q in &occ {
                for p in 0..n_so {
                    if p != q && b >> p & 1 == 1 {
                        continue;
                    }
                    let (t, s) = bits::apply_ladder(b, &[(p, true), (q, false)]).expect("allowed hop");
                    if let Some(psi_t) = lookup.get(&t) {
                        g1[p * n_so + q] += psi_t.conj() * psi_b * s;
                    }
                }
            }
            for (x, &r) in occ.iter().enumerate() {
                for &s in &occ[x + 1..] {
                    let (mid, s1) = bits::apply_ladder(b, &[(s, false), (r, false)]).expect("occupied pair");
                    for p in 0..n_so {
                        if mid >> p & 1 == 1 {
                            continue;
                        }
                        for q in p + 1..n_so {
                            if mid >> q & 1 == 1 {
                                continue;
                            }
                            let (t, s2) = bits::apply_ladder(mid, &[(p, true), (q, true)]).expect("empty pair");
                            if let Some(psi_t) = lookup.get(&t) {
                                let v = psi_t.conj() * psi_b * (s1 * s2);
                                g2[idx4(p, q, r, s)] += v;
                                g2[idx4(q, p, r, s)] -= v;
                                g2[idx4(p, q, s, r)] -= v;
                                g2[idx4(q, p, s, r)] += v;
                            }
                        }
                    }
                }
            }
        }
        let max_imag = g1.iter().chain(&g2).map(|c| c.im.abs()).fold(0.0, f64::max);
        let mut gamma = DMatrix::from_fn(n_so, n_so, |p, q| g1[p * n_so + q].re);
        gamma = (&gamma + gamma.transpose()) * 0.5;
        let mut gamma2 = Tensor4::zeros(n_so);
        for (dst, src) in gamma2.as_mut_slice().iter_mut().zip(&g2) {
            *dst = src.re;
        }
        let norm: f64 = amps.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            gamma /= norm;
            for x in gamma2.as_mut_slice() {
                *x /= norm;
            }
        }
        Self::from_spin_orbital(gamma, gamma2, max_imag)
    }

    fn from_spin_orbital(gamma: DMatrix<f64>, gamma2: Tensor4, max_imag: f64) -> Self {
        let n_so = gamma.nrows();
        let n = n_so / 2;
        let d1 = DMatrix::from_fn(n, n, |t, u| gamma[(2 * t, 2 * u)] + gamma[(2 * t + 1, 2 * u + 1)]);
        let mut d2 = Tensor4::zeros(n);
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let mut v = 0.0;
                        for a in 0..2 {
                            for b in 0..2 {
                                v += gamma2.get(2 * p + a, 2 * q + b, 2 * r + a, 2 * s + b);
                            }
                        }
                        d2.set(p, q, r, s, v);
                    }
                }
            }
        }
        let n_elec = gamma.trace();
        Self { n_act: n, n_elec, gamma, gamma2, d1, d2, tag: BasisTag::default(), max_imag }
    }

    pub fn with_tag(mut self, tag: BasisTag) -> Self {
        self.tag = tag;
        self
    }

    /// Rotation of the active orbitals by orthogonal `u` (`phi'_a = sum_t phi_t u[t,a]`).
    pub fn rotated(&self, u: &DMatrix<f64>) -> Self {
        let n = self.n_act;
        let mut uso = DMatrix::zeros(2 * n, 2 * n);
        for t in 0..n {
            for a in 0..n {
                uso[(2 * t, 2 * a)] = u[(t, a)];
                uso[(2 * t + 1, 2 * a + 1)] = u[(t, a)];
            }
        }
        let gamma = uso.transpose() * &self.gamma * &uso;
        let gamma2 = self.gamma2.transform(&uso);
        let mut out = Self::from_spin_orbital(gamma, gamma2, self.max_imag);
        out.tag = self.tag.clone();
        out
    }

    /// `e_core + sum h d1 + 1/2 sum (pr|qs) d2[p,q,r,s]`.
    pub fn energy(&self, emb: &EmbeddedHamiltonian) -> f64 {
        energy_from_rdms(self, emb)
    }

    /// Collects violations of the structural RDM identities.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), Vec<String>> {
        let mut bad = Vec::new();
        let n_so = 2 * self.n_act;
        let n_el = self.n_elec.round();
        if (self.gamma.trace() - n_el).abs() > tol {
            bad.push(format!("trace {} is not integral", self.gamma.trace()));
        }
        if (self.d1.trace() - n_el).abs() > tol {
            bad.push(format!("spin-summed trace {}", self.d1.trace()));
        }
        let asym = (&self.gamma - self.gamma.transpose()).abs().max();
        if asym > tol {
            bad.push(format!("1-RDM asymmetry {asym:.3e}"));
        }
        if self.n_act > 0 {
            let (occ, _) = sorted_symmetric_eigen(&self.d1);
            if occ[0] < -tol || occ[occ.len() - 1] > 2.0 + tol {
                bad.push(format!("occupations outside [0,2]: {:.3e}..{:.3e}", occ[0], occ[occ.len() - 1]));
            }
        }
        let g = &self.gamma2;
        let mut anti: f64 = 0.0;
        let mut herm: f64 = 0.0;
        for p in 0..n_so {
            for q in 0..n_so {
                for r in 0..n_so {
                    for s in 0..n_so {
                        let x = g.get(p, q, r, s);
                        anti = anti.max((x + g.get(q, p, r, s)).abs()).max((x + g.get(p, q, s, r)).abs());
                        herm = herm.max((x - g.get(r, s, p, q)).abs());
                    }
                }
            }
        }
        if anti > tol {
            bad.push(format!("2-RDM antisymmetry violated by {anti:.3e}"));
        }
        if herm > tol {
            bad.push(format!("2-RDM hermiticity violated by {herm:.3e}"));
        }
        let mut ptrace: f64 = 0.0;
        for p in 0..n_so {
            for r in 0..n_so {
                let s: f64 = (0..n_so).map(|q| g.get(p, q, r, q)).sum();
                ptrace = ptrace.max((s - (n_el - 1.0) * self.gamma[(p, r)]).abs());
            }
        }
        if ptrace > tol {
            bad.push(format!("partial trace violated by {ptrace:.3e}"));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(bad)
        }
    }

    /// Plain-text dump: `p q value` lines, a blank line, then `p q r s value`
    /// (spin-summed, active indices, entries above 1e-12).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let n = self.n_act;
        for p in 0..n {
            for q in 0..n {
                if self.d1[(p, q)].abs() > 1e-12 {
                    writeln!(s, "{p} {q} {:.12e}", self.d1[(p, q)]).unwrap();
                }
            }
        }
        s.push('\n');
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for t in 0..n {
                        let v = self.d2.get(p, q, r, t);
                        if v.abs() > 1e-12 {
                            writeln!(s, "{p} {q} {r} {t} {v:.12e}").unwrap();
                        }
                    }
                }
            }
        }
        s
    }
}

/// `<a†_p a_q>` over spin orbitals from a statevector in the given mapping.
pub fn measure_1rdm(state: &Statevector, mapping: Mapping) -> Result<DMatrix<f64>> {
    Ok(measure_rdms(state, mapping)?.gamma)
}

/// `<a†_p a†_q a_s a_r>` over spin orbitals.
pub fn measure_2rdm(state: &Statevector, mapping: Mapping) -> Result<Tensor4> {
    Ok(measure_rdms(state, mapping)?.gamma2)
}

/// Both RDMs from a statevector whose register holds `2 n_act` spin orbitals.
pub fn measure_rdms(state: &Statevector, mapping: Mapping) -> Result<ReducedDensityMatrices> {
    let n_q = state.n_qubits();
    if n_q % 2 != 0 {
        return Err(Error::Dimension { expected: n_q + 1, found: n_q });
    }
    let amps: Vec<(u64, Complex64)> =
        state.nonzero(1e-14).into_iter().map(|(b, a)| (mapping.decode(b, n_q), a)).collect();
    let rdms = ReducedDensityMatrices::from_occupation_amplitudes(&amps, n_q / 2);
    let asym = (&rdms.gamma - rdms.gamma.transpose()).abs().max();
    if asym > 1e-10 || rdms.max_imag > 1e-8 {
        return Err(Error::Numerical(format!(
            "measured RDM not Hermitian/real (asymmetry {asym:.2e}, imaginary {:.2e})",
            rdms.max_imag
        )));
    }
    Ok(rdms)
}

pub fn energy_from_rdms(rdms: &ReducedDensityMatrices, emb: &EmbeddedHamiltonian) -> f64 {
    let n = emb.n_act;
    let mut e = emb.e_core;
    for p in 0..n {
        for q in 0..n {
            e += emb.h_eff[(p, q)] * rdms.d1[(p, q)];
        }
    }
    let mut two = 0.0;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    two += emb.v_act.get(p, r, q, s) * rdms.d2.get(p, q, r, s);
                }
            }
        }
    }
    e + 0.5 * two
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_rdms() {
        // alpha and beta of orbital 0 plus alpha of orbital 2
        let det = 0b01_00_11u64;
        let r = ReducedDensityMatrices::from_occupation_amplitudes(&[(det, Complex64::new(1.0, 0.0))], 3);
        for p in 0..6 {
            for q in 0..6 {
                let expect = if p == q && det >> p & 1 == 1 { 1.0 } else { 0.0 };
                assert_eq!(r.gamma[(p, q)], expect);
            }
        }
        for p in 0..6 {
            for q in 0..6 {
                for s in 0..6 {
                    for t in 0..6 {
                        let expect = r.gamma[(p, s)] * r.gamma[(q, t)] - r.gamma[(p, t)] * r.gamma[(q, s)];
                        assert!((r.gamma2.get(p, q, s, t) - expect).abs() < 1e-15);
                    }
                }
            }
        }
        assert!(r.check_invariants(1e-12).is_ok());
        assert_eq!(r.d1[(0, 0)], 2.0);
        assert_eq!(r.d1[(2, 2)], 1.0);
    }

    #[test]
    fn two_electron_superposition() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let amps = [(0b0011u64, Complex64::new(c, 0.0)), (0b1100u64, Complex64::new(-c, 0.0))];
        let r = ReducedDensityMatrices::from_occupation_amplitudes(&amps, 2);
        assert!(r.check_invariants(1e-12).is_ok());
        let v = r.gamma2.get(2, 3, 0, 1);
        assert!((v.abs() - 0.5).abs() < 1e-15);
        assert!((r.d1[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
