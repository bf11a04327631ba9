use super::fermion::{FermionOperator, Ladder};
use super::pauli::{PauliString, PauliSum, I_POW};
use crate::bits;
use crate::error::{domain, Result};
use crate::integrals::EmbeddedHamiltonian;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Fermion-to-qubit encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mapping {
    #[default]
    JordanWigner,
    Parity,
}

impl Mapping {
    /// Qubit basis state encoding an occupation bitstring.
    pub fn encode(self, occ: u64, n_qubits: usize) -> u64 {
        match self {
            Mapping::JordanWigner => occ,
            Mapping::Parity => bits::parity_encode(occ, n_qubits),
        }
    }

    pub fn decode(self, state: u64, n_qubits: usize) -> u64 {
        match self {
            Mapping::JordanWigner => state,
            Mapping::Parity => bits::parity_decode(state, n_qubits),
        }
    }

    /// Pauli image of one ladder operator as `(string, coefficient)` pairs.
    pub fn ladder(self, k: usize, dagger: bool, n_qubits: usize) -> [(PauliString, Complex64); 2] {
        // a†: (X - iY)/2, a: (X + iY)/2 on the target qubit
        let y_sign = if dagger { -0.5 } else { 0.5 };
        let (mut px, mut py) = (PauliString::IDENTITY, PauliString::IDENTITY);
        match self {
            Mapping::JordanWigner => {
                let below = (1u64 << k) - 1;
                px.x = 1 << k;
                px.z = below;
                py.x = 1 << k;
                py.z = below | 1 << k;
            }
            Mapping::Parity => {
                let above = if k + 1 >= 64 { 0 } else { !((1u64 << (k + 1)) - 1) };
                let above = above & mask(n_qubits);
                px.x = above | 1 << k;
                px.z = if k > 0 { 1 << (k - 1) } else { 0 };
                py.x = above | 1 << k;
                py.z = 1 << k;
            }
        }
        [(px, Complex64::new(0.5, 0.0)), (py, Complex64::new(0.0, y_sign))]
    }

    pub fn map(self, op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
        map_operator(op, n_qubits, self)
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        !0
    } else {
        (1u64 << n) - 1
    }
}

fn map_product(ops: &[Ladder], n_qubits: usize, mapping: Mapping) -> Vec<(PauliString, Complex64)> {
    let mut acc: Vec<(PauliString, Complex64)> = vec![(PauliString::IDENTITY, Complex64::new(1.0, 0.0))];
    for &(k, dagger) in ops {
        let img = mapping.ladder(k, dagger, n_qubits);
        let mut next: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (a, ca) in &acc {
            for (b, cb) in &img {
                let (ph, p) = a.mul(b);
                *next.entry(p).or_default() += ca * cb * I_POW[ph as usize];
            }
        }
        acc = next.into_iter().filter(|(_, c)| c.norm() > 1e-15).collect();
    }
    acc
}

fn map_operator(op: &FermionOperator, n_qubits: usize, mapping: Mapping) -> Result<PauliSum> {
    if n_qubits > 64 {
        return domain("at most 64 qubits are supported");
    }
    let needed = op.n_modes();
    if needed > n_qubits {
        return domain(format!("operator acts on mode {} but only {n_qubits} qubits", needed - 1));
    }
    let mut out = PauliSum::zero(n_qubits);
    for (ops, c) in op.terms() {
        for (p, v) in map_product(ops, n_qubits, mapping) {
            out.add_term(c * v, p);
        }
    }
    Ok(out.pruned())
}

pub fn jordan_wigner(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    map_operator(op, n_qubits, Mapping::JordanWigner)
}

pub fn parity_map(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    map_operator(op, n_qubits, Mapping::Parity)
}

/// Second-quantized active-space Hamiltonian over interleaved spin orbitals.
pub fn hamiltonian_to_fermion(emb: &EmbeddedHamiltonian) -> FermionOperator {
    let n = emb.n_act;
    let mut op = FermionOperator::identity(emb.e_core);
    for p in 0..n {
        for q in 0..n {
            let h = emb.h_eff[(p, q)];
            if h == 0.0 {
                continue;
            }
            for spin in 0..2 {
                op.add_term(h, &[(2 * p + spin, true), (2 * q + spin, false)]);
            }
        }
    }
    // 1/2 sum (pr|qs) a†_{p s1} a†_{q s2} a_{s s2} a_{r s1}
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = emb.v_act.get(p, r, q, s);
                    if g == 0.0 {
                        continue;
                    }
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            let (pp, qq, rr, ss) = (2 * p + s1, 2 * q + s2, 2 * r + s1, 2 * s + s2);
                            if pp == qq || rr == ss {
                                continue;
                            }
                            op.add_term(0.5 * g, &[(pp, true), (qq, true), (ss, false), (rr, false)]);
                        }
                    }
                }
            }
        }
    }
    op
}

/// Total particle-number operator over `n_modes` spin orbitals.
pub fn number_operator(n_modes: usize) -> FermionOperator {
    (0..n_modes).fold(FermionOperator::zero(), |acc, k| acc + FermionOperator::hopping(k, k))
}

/// `S_z` over interleaved spin orbitals.
pub fn sz_operator(n_spatial: usize) -> FermionOperator {
    (0..n_spatial).fold(FermionOperator::zero(), |acc, p| {
        acc + FermionOperator::hopping(2 * p, 2 * p).scale(0.5)
            - FermionOperator::hopping(2 * p + 1, 2 * p + 1).scale(0.5)
    })
}
