//! Exact statevector simulation over `2^n` complex amplitudes (qubit 0 is the
//! least significant bit of the basis index).

mod sparse;

pub use sparse::{Observable, SparseOperator, Support};

use crate::error::{domain, Error, Result};
use crate::operators::{FermionOperator, Mapping, PauliString, PauliSum};
use num_complex::Complex64;
use std::io::Write;

pub const MAX_QUBITS: usize = 24;
const DENSE_EXP_MAX_QUBITS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        let bytes = 16u128 << n_qubits;
        return Err(Error::Size(format!(
            "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit (state would need {:.1} GiB)",
            bytes as f64 / (1u64 << 30) as f64
        )));
    }
    Ok(())
}

impl Statevector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Result<Self> {
        check_size(n_qubits)?;
        if index >> n_qubits != 0 {
            return domain(format!("basis index {index} needs more than {n_qubits} qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return domain("amplitude count is not a power of two");
        }
        check_size(n)?;
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        for a in &mut self.amps {
            *a /= n;
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Nonzero amplitudes as `(basis index, amplitude)`.
    pub fn nonzero(&self, tol: f64) -> Vec<(u64, Complex64)> {
        self.amps.iter().enumerate().filter(|(_, a)| a.norm() > tol).map(|(i, a)| (i as u64, *a)).collect()
    }

    /// `exp(-i theta P / 2)` applied in place.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let mis = Complex64::new(0.0, -s);
        if p.x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                let (_, ph) = p.apply(b as u64);
                *a *= c + mis * ph;
            }
            return;
        }
        let top = 63 - p.x.leading_zeros();
        for b in 0..self.amps.len() as u64 {
            if b >> top & 1 == 1 {
                continue;
            }
            let (t, ph_b) = p.apply(b);
            let (_, ph_t) = p.apply(t);
            let (ab, at) = (self.amps[b as usize], self.amps[t as usize]);
            self.amps[b as usize] = ab * c + mis * ph_t * at;
            self.amps[t as usize] = at * c + mis * ph_b * ab;
        }
    }

    /// `exp(theta * coeff * P)` for purely imaginary `coeff` (antihermitian term).
    pub fn apply_pauli_exponential(&mut self, p: &PauliString, coeff: Complex64, theta: f64) {
        debug_assert!(coeff.re.abs() < 1e-12, "term is not antihermitian");
        self.apply_pauli_rotation(p, -2.0 * theta * coeff.im);
    }

    /// `P|psi>` into a new state.
    pub fn apply_pauli(&self, p: &PauliString) -> Statevector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let (t, ph) = p.apply(b as u64);
            out[t as usize] = ph * a;
        }
        Statevector { n_qubits: self.n_qubits, amps: out }
    }

    /// `<psi|H|psi>` for a Hermitian Pauli sum.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if !h.is_hermitian(1e-12) {
            return domain("expectation requires a Hermitian operator");
        }
        self.check_width(h.n_qubits)?;
        let value = h.expectation_complex(self);
        if value.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!("expectation has imaginary part {:.3e}", value.im)));
        }
        Ok(value.re)
    }

    fn check_width(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, found: n });
        }
        Ok(())
    }

    /// `exp(G)|psi>` for an antihermitian fermionic operator, by scaled Taylor
    /// series of its qubit image (dense, at most 16 qubits).
    pub fn apply_exact_antihermitian(&mut self, g: &FermionOperator, mapping: Mapping) -> Result<()> {
        if !g.is_antihermitian(1e-12) {
            return domain("generator is not antihermitian");
        }
        if self.n_qubits > DENSE_EXP_MAX_QUBITS {
            return Err(Error::Size(format!("exact exponential limited to {DENSE_EXP_MAX_QUBITS} qubits")));
        }
        let gq = mapping.map(g, self.n_qubits)?;
        self.apply_exponential_of_sum(&gq);
        Ok(())
    }

    /// `exp(A)|psi>` for a Pauli sum `A` by scaled Taylor expansion.
    pub fn apply_exponential_of_sum(&mut self, a: &PauliSum) {
        let bound: f64 = a.terms().map(|(_, c)| c.norm()).sum();
        let steps = (bound / 0.5).ceil().max(1.0) as usize;
        let scaled = a.scale(1.0 / steps as f64);
        for _ in 0..steps {
            let mut term = self.clone();
            let mut acc = self.clone();
            for k in 1..60 {
                term = scaled.apply(&term);
                let inv = 1.0 / k as f64;
                for x in term.amps.iter_mut() {
                    *x *= inv;
                }
                for (y, x) in acc.amps.iter_mut().zip(&term.amps) {
                    *y += x;
                }
                if term.norm() < 1e-17 {
                    break;
                }
            }
            *self = acc;
        }
    }

    /// Little-endian interleaved `re, im` doubles.
    pub fn dump_binary(&self, w: &mut impl Write) -> Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Basis state for a set of occupied spin orbitals under the given mapping.
pub fn prepare_reference(occupied: &[usize], n_qubits: usize, mapping: Mapping) -> Result<Statevector> {
    let mut occ = 0u64;
    for &k in occupied {
        if k >= n_qubits {
            return domain(format!("spin orbital {k} outside {n_qubits} qubits"));
        }
        if occ >> k & 1 == 1 {
            return domain(format!("spin orbital {k} listed twice"));
        }
        occ |= 1 << k;
    }
    check_size(n_qubits)?;
    Statevector::basis_state(n_qubits, mapping.encode(occ, n_qubits))
}

impl PauliSum {
    /// `H|psi>` over the full register.
    pub fn apply(&self, psi: &Statevector) -> Statevector {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
        for (p, c) in self.terms() {
            for (b, a) in psi.amps.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let (t, ph) = p.apply(b as u64);
                out[t as usize] += c * ph * a;
            }
        }
        Statevector { n_qubits: psi.n_qubits, amps: out }
    }

    /// `<psi|H|psi>` accumulated term by term in a fixed order.
    pub fn expectation_complex(&self, psi: &Statevector) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (p, c) in self.terms() {
            let mut v = Complex64::new(0.0, 0.0);
            for (b, a) in psi.amps.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let (t, ph) = p.apply(b as u64);
                v += psi.amps[t as usize].conj() * ph * a;
            }
            total += c * v;
        }
        total
    }
}
