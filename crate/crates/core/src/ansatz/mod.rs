//! Excitation generators, UCC circuits, ADAPT operator pools and the CNOT
//! cost model.

mod compiled;

pub use compiled::CompiledCircuit;

use crate::error::{domain, Result};
use crate::operators::{FermionOperator, Ladder, Mapping, PauliString};
use crate::statevector::{prepare_reference, Statevector, Support};
use serde::Serialize;

/// Particle-hole excitation `T = a†_a (a†_b) (a_j) a_i` with `from = [i, (j)]`
/// and `to = [a, (b)]`, both ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Excitation {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationKind {
    Single,
    Double,
}

impl Excitation {
    pub fn single(i: usize, a: usize) -> Self {
        Self { from: vec![i], to: vec![a] }
    }

    pub fn double(i: usize, j: usize, a: usize, b: usize) -> Self {
        Self { from: vec![i, j], to: vec![a, b] }
    }

    pub fn kind(&self) -> ExcitationKind {
        if self.from.len() == 1 {
            ExcitationKind::Single
        } else {
            ExcitationKind::Double
        }
    }

    /// Ladder string of `T`, leftmost operator first.
    pub fn ladder(&self) -> Vec<Ladder> {
        let mut ops: Vec<Ladder> = self.to.iter().map(|&a| (a, true)).collect();
        ops.extend(self.from.iter().rev().map(|&i| (i, false)));
        ops
    }

    pub fn modes(&self) -> u64 {
        self.from.iter().chain(&self.to).fold(0, |m, &k| m | 1 << k)
    }

    /// `T - T†`.
    pub fn generator(&self) -> FermionOperator {
        let t = FermionOperator::term(1.0, &self.ladder());
        t.clone() - t.adjoint()
    }

    /// Image under the alpha/beta mode swap, re-sorted; the returned sign
    /// accounts for the reordering of ladder operators.
    pub fn spin_flip(&self) -> (f64, Excitation) {
        let flip = |v: &[usize]| -> (f64, Vec<usize>) {
            let mut w: Vec<usize> = v.iter().map(|k| k ^ 1).collect();
            let sign = if w.len() == 2 && w[0] > w[1] {
                w.swap(0, 1);
                -1.0
            } else {
                1.0
            };
            (sign, w)
        };
        let (s1, from) = flip(&self.from);
        let (s2, to) = flip(&self.to);
        (s1 * s2, Excitation { from, to })
    }

    fn is_valid(&self) -> bool {
        let n = self.from.len();
        n == self.to.len()
            && (n == 1 || n == 2)
            && self.from.windows(2).all(|w| w[0] < w[1])
            && self.to.windows(2).all(|w| w[0] < w[1])
            && self.modes().count_ones() as usize == 2 * n
            && self.from.iter().map(|k| k & 1).sum::<usize>() == self.to.iter().map(|k| k & 1).sum::<usize>()
    }
}

/// Antihermitian fermionic generator `sum_k c_k (T_k - T_k†)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FermionicGenerator {
    pub components: Vec<(f64, Excitation)>,
}

impl FermionicGenerator {
    pub fn single_component(e: Excitation) -> Self {
        Self { components: vec![(1.0, e)] }
    }

    pub fn operator(&self) -> FermionOperator {
        self.components.iter().fold(FermionOperator::zero(), |acc, (c, e)| acc + e.generator().scale(*c))
    }
}

/// A circuit entry or pool element.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// `exp(theta * sum_k c_k (T_k - T_k†))`, applied component by component.
    Fermionic(FermionicGenerator),
    /// `exp(i theta P)`.
    Pauli(PauliString),
}

impl Generator {
    /// Pauli rotations `(P, a)` meaning `exp(i theta a P)`, in application order.
    pub fn rotations(&self, mapping: Mapping, n_qubits: usize) -> Vec<(PauliString, f64)> {
        match self {
            Generator::Pauli(p) => vec![(*p, 1.0)],
            Generator::Fermionic(g) => g
                .components
                .iter()
                .flat_map(|(c, e)| trotterize(e, mapping, n_qubits).into_iter().map(move |(p, a)| (p, a * c)))
                .collect(),
        }
    }

    pub fn label(&self, n_qubits: usize) -> String {
        match self {
            Generator::Pauli(p) => p.to_label(n_qubits),
            Generator::Fermionic(g) => g
                .components
                .iter()
                .map(|(c, e)| format!("{c:+}*{:?}->{:?}", e.from, e.to))
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

/// Single Trotter step of one excitation: its Pauli strings in lexicographic
/// order with real weights `a_k` (rotation `exp(i theta a_k P_k)`). The
/// strings of one excitation commute, so the product is exact.
pub fn trotterize(e: &Excitation, mapping: Mapping, n_qubits: usize) -> Vec<(PauliString, f64)> {
    let mapped = mapping.map(&e.generator(), n_qubits).expect("excitation fits the register");
    mapped
        .terms()
        .map(|(p, c)| {
            debug_assert!(c.re.abs() < 1e-12);
            (p, c.im)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolFlavor {
    Fermionic,
    Qubit,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorPool {
    pub flavor: PoolFlavor,
    pub elements: Vec<Generator>,
}

impl OperatorPool {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Active-space problem shape: spatial orbitals and electrons per spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl Shape {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        Self { n_orb, n_alpha, n_beta }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// High-spin reference: lowest `n_alpha` alpha and `n_beta` beta orbitals.
    pub fn reference(&self) -> Vec<usize> {
        let mut occ: Vec<usize> = (0..self.n_alpha).map(|p| 2 * p).chain((0..self.n_beta).map(|p| 2 * p + 1)).collect();
        occ.sort_unstable();
        occ
    }

    fn occupied_virtual(&self) -> (Vec<usize>, Vec<usize>) {
        let occ = self.reference();
        let vir = (0..self.n_qubits()).filter(|k| !occ.contains(k)).collect();
        (occ, vir)
    }

    pub fn singles(&self) -> Vec<Excitation> {
        let (occ, vir) = self.occupied_virtual();
        let mut out = Vec::new();
        for &i in &occ {
            for &a in &vir {
                if i & 1 == a & 1 {
                    out.push(Excitation::single(i, a));
                }
            }
        }
        out
    }

    pub fn doubles(&self) -> Vec<Excitation> {
        let (occ, vir) = self.occupied_virtual();
        let mut out = Vec::new();
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                for (y, &a) in vir.iter().enumerate() {
                    for &b in &vir[y + 1..] {
                        if (i & 1) + (j & 1) == (a & 1) + (b & 1) {
                            out.push(Excitation::double(i, j, a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Determinant sector of the reference in the qubit basis of `mapping`.
    pub fn sector(&self, mapping: Mapping) -> Support {
        Support::sector(self.n_orb, self.n_alpha, self.n_beta, mapping)
    }
}

/// Parameterized circuit applied to a reference determinant.
#[derive(Clone, Debug)]
pub struct AnsatzCircuit {
    pub shape: Shape,
    pub mapping: Mapping,
    pub reference: Vec<usize>,
    pub entries: Vec<(Generator, usize)>,
    pub n_params: usize,
}

/// Serializable description of a circuit.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CircuitSummary {
    pub entries: usize,
    pub parameters: usize,
    pub cnots: usize,
    pub flavor: Option<PoolFlavor>,
    pub cnot_model: &'static str,
}

impl AnsatzCircuit {
    pub fn empty(shape: Shape, mapping: Mapping) -> Self {
        Self { shape, mapping, reference: shape.reference(), entries: Vec::new(), n_params: 0 }
    }

    pub fn n_qubits(&self) -> usize {
        self.shape.n_qubits()
    }

    /// Appends a generator with a fresh parameter; returns its id.
    pub fn push(&mut self, g: Generator) -> usize {
        let id = self.n_params;
        self.entries.push((g, id));
        self.n_params += 1;
        id
    }

    pub fn reference_state(&self) -> Result<Statevector> {
        prepare_reference(&self.reference, self.n_qubits(), self.mapping)
    }

    pub fn is_fermionic(&self) -> bool {
        self.entries.iter().all(|(g, _)| matches!(g, Generator::Fermionic(_)))
    }

    pub fn flavor(&self) -> Option<PoolFlavor> {
        if self.entries.is_empty() {
            None
        } else if self.is_fermionic() {
            Some(PoolFlavor::Fermionic)
        } else {
            Some(PoolFlavor::Qubit)
        }
    }

    pub fn summary(&self) -> CircuitSummary {
        CircuitSummary {
            entries: self.entries.len(),
            parameters: self.n_params,
            cnots: count_cnots(self),
            flavor: self.flavor(),
            cnot_model: "2(w-1) per weight-w Pauli rotation; reference preparation excluded",
        }
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(crate::error::Error::Dimension { expected: self.n_params, found: theta.len() });
        }
        Ok(())
    }
}

fn circuit_from(shape: Shape, mapping: Mapping, excitations: Vec<Excitation>) -> AnsatzCircuit {
    let mut c = AnsatzCircuit::empty(shape, mapping);
    for e in excitations {
        debug_assert!(e.is_valid());
        c.push(Generator::Fermionic(FermionicGenerator::single_component(e)));
    }
    c
}

/// All spin-conserving particle-hole singles (ascending) then doubles
/// (lexicographic), one parameter each.
pub fn build_uccsd(shape: Shape, mapping: Mapping) -> AnsatzCircuit {
    let mut ex = shape.singles();
    ex.extend(shape.doubles());
    circuit_from(shape, mapping, ex)
}

pub fn build_uccd(shape: Shape, mapping: Mapping) -> AnsatzCircuit {
    circuit_from(shape, mapping, shape.doubles())
}

/// Spin-complemented particle-hole singles and doubles: each spin-orbital
/// excitation is paired with its alpha/beta-swapped image.
pub fn build_fermionic_pool(shape: Shape) -> Result<OperatorPool> {
    let mut elements = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for e in shape.singles().into_iter().chain(shape.doubles()) {
        if seen.contains(&e) {
            continue;
        }
        let (sign, f) = e.spin_flip();
        seen.insert(e.clone());
        let mut components = vec![(1.0, e.clone())];
        if f != e {
            if !f.is_valid() || seen.contains(&f) {
                continue;
            }
            seen.insert(f.clone());
            components.push((sign, f));
        } else if sign < 0.0 {
            // odd under the spin swap: cannot be spin-complemented
            continue;
        }
        elements.push(Generator::Fermionic(FermionicGenerator { components }));
    }
    if elements.is_empty() {
        return domain("operator pool is empty (no occupied-virtual pairs)");
    }
    Ok(OperatorPool { flavor: PoolFlavor::Fermionic, elements })
}

/// Individual Pauli strings of the fermionic pool with Z letters removed,
/// deduplicated in order of first appearance.
pub fn build_qubit_pool(shape: Shape, mapping: Mapping) -> Result<OperatorPool> {
    let fermionic = build_fermionic_pool(shape)?;
    let n = shape.n_qubits();
    let mut seen = std::collections::BTreeSet::new();
    let mut elements = Vec::new();
    for g in &fermionic.elements {
        for (p, _) in g.rotations(mapping, n) {
            let stripped = PauliString { x: p.x, z: p.z & p.x };
            if stripped.y_count() % 2 == 1 && seen.insert(stripped) {
                elements.push(Generator::Pauli(stripped));
            }
        }
    }
    Ok(OperatorPool { flavor: PoolFlavor::Qubit, elements })
}

/// CNOT cost: `2(w - 1)` per weight-`w` Pauli rotation.
pub fn count_cnots(c: &AnsatzCircuit) -> usize {
    c.entries
        .iter()
        .flat_map(|(g, _)| g.rotations(c.mapping, c.n_qubits()))
        .map(|(p, _)| 2 * (p.weight().max(1) as usize - 1))
        .sum()
}
