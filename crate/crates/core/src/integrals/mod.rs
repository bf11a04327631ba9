//! Molecular integrals: storage, FCIDUMP ingestion, active-space embedding and
//! orbital rotations.

mod fcidump;
mod packed;

pub use fcidump::{load_fixture, parse_fcidump, FixtureMeta};
pub use packed::PackedEri;

use crate::error::{domain, Result};
use crate::linalg::{expm, max_abs, Tensor4};
use nalgebra::DMatrix;

/// Spatial-orbital integrals in chemists' notation plus the core scalar.
///
/// Immutable after construction; every transform returns a new value.
#[derive(Clone, Debug)]
pub struct IntegralSet {
    pub n_orb: usize,
    pub n_elec: usize,
    /// Twice the spin projection, `n_alpha - n_beta`.
    pub ms2: i32,
    pub core_energy: f64,
    pub h: DMatrix<f64>,
    pub v: PackedEri,
    pub orbsym: Vec<i64>,
    pub isym: i64,
    /// Identifies the orbital basis; changes under every rotation.
    pub basis_stamp: u64,
}

impl IntegralSet {
    pub fn new(n_orb: usize, n_elec: usize, ms2: i32, core_energy: f64, h: DMatrix<f64>, v: PackedEri) -> Result<Self> {
        if h.nrows() != n_orb || h.ncols() != n_orb || v.n_orb() != n_orb {
            return domain("integral arrays do not match the orbital count");
        }
        if n_elec > 2 * n_orb {
            return domain(format!("{n_elec} electrons do not fit in {n_orb} orbitals"));
        }
        if (n_elec as i32 + ms2) % 2 != 0 || ms2.unsigned_abs() as usize > n_elec {
            return domain(format!("MS2={ms2} is incompatible with {n_elec} electrons"));
        }
        if max_abs(&(&h - h.transpose())) > 1e-12 {
            return domain("one-electron matrix is not symmetric");
        }
        Ok(Self { n_orb, n_elec, ms2, core_energy, h, v, orbsym: vec![1; n_orb], isym: 1, basis_stamp: 0 })
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_elec as i32 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.n_elec as i32 - self.ms2) / 2) as usize
    }

    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.v.get(p, q, r, s)
    }

    /// Energy of the determinant occupying the lowest `n_alpha` / `n_beta`
    /// orbitals (the Hartree-Fock determinant for canonical orbitals).
    pub fn hf_energy(&self) -> f64 {
        let na = self.n_alpha();
        let nb = self.n_beta();
        let mut e = self.core_energy;
        for i in 0..na {
            e += self.h[(i, i)];
        }
        for i in 0..nb {
            e += self.h[(i, i)];
        }
        let coulomb = |i: usize, j: usize| self.eri(i, i, j, j);
        let exchange = |i: usize, j: usize| self.eri(i, j, j, i);
        let mut two = 0.0;
        for i in 0..na {
            for j in 0..na {
                two += coulomb(i, j) - exchange(i, j);
            }
            for j in 0..nb {
                two += 2.0 * coulomb(i, j);
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                two += coulomb(i, j) - exchange(i, j);
            }
        }
        e + 0.5 * two
    }

    /// Orbital transformation `phi'_a = Σ_p phi_p c[p, a]` with orthogonal `c`.
    pub fn transform(&self, c: &DMatrix<f64>) -> IntegralSet {
        let h = c.transpose() * &self.h * c;
        let h = (&h + h.transpose()) * 0.5;
        let dense = self.v.to_dense().transform(c);
        let (v, residual) = PackedEri::from_dense_symmetrized(&dense);
        debug_assert!(residual < 1e-10, "re-symmetrization residual {residual}");
        IntegralSet {
            n_orb: self.n_orb,
            n_elec: self.n_elec,
            ms2: self.ms2,
            core_energy: self.core_energy,
            h,
            v,
            orbsym: self.orbsym.clone(),
            isym: self.isym,
            basis_stamp: stamp_of(self.basis_stamp, c),
        }
    }

    pub fn eri_dense(&self) -> Tensor4 {
        self.v.to_dense()
    }
}

fn stamp_of(prev: u64, c: &DMatrix<f64>) -> u64 {
    // FNV-1a over the previous stamp and the matrix bits.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325 ^ prev;
    for x in c.iter() {
        for b in x.to_bits().to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    hash
}

/// Rotates the orbitals by `U = exp(kappa)` with antisymmetric `kappa`.
pub fn rotate_orbitals(ints: &IntegralSet, kappa: &DMatrix<f64>) -> Result<IntegralSet> {
    if kappa.nrows() != ints.n_orb || kappa.ncols() != ints.n_orb {
        return domain("rotation generator does not match the orbital count");
    }
    let asym = max_abs(&(kappa + kappa.transpose()));
    if asym > 1e-10 {
        return domain(format!("rotation generator is not antisymmetric (|k + k^T| = {asym:.3e})"));
    }
    Ok(ints.transform(&expm(kappa)))
}

/// Partition of the orbitals into inactive (doubly occupied), active and
/// virtual sets.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ActiveSpace {
    pub inactive: Vec<usize>,
    pub active: Vec<usize>,
    pub virtual_: Vec<usize>,
    pub n_act_elec: usize,
}

/// Orbital class within an [`ActiveSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitalClass {
    Inactive,
    Active,
    Virtual,
}

impl ActiveSpace {
    /// Explicit partition; the three lists must partition `0..n_orb`.
    pub fn new(ints: &IntegralSet, inactive: Vec<usize>, active: Vec<usize>, virtual_: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; ints.n_orb];
        for &p in inactive.iter().chain(&active).chain(&virtual_) {
            if p >= ints.n_orb || seen[p] {
                return domain(format!("orbital {p} is out of range or listed twice"));
            }
            seen[p] = true;
        }
        if seen.iter().any(|s| !s) {
            return domain("inactive/active/virtual lists do not cover every orbital");
        }
        let inactive_elec = 2 * inactive.len();
        if inactive_elec > ints.n_elec {
            return domain("more inactive electrons than the system has");
        }
        let n_act_elec = ints.n_elec - inactive_elec;
        if n_act_elec > 2 * active.len() {
            return domain(format!("{n_act_elec} active electrons do not fit in {} active orbitals", active.len()));
        }
        Ok(Self { inactive, active, virtual_, n_act_elec })
    }

    /// Contiguous CAS(n_act_elec, n_act_orb) above the lowest doubly occupied orbitals.
    pub fn from_counts(ints: &IntegralSet, n_act_elec: usize, n_act_orb: usize) -> Result<Self> {
        if n_act_elec > ints.n_elec || (ints.n_elec - n_act_elec) % 2 != 0 {
            return domain(format!("CAS({n_act_elec},{n_act_orb}) leaves an odd or negative inactive electron count"));
        }
        let n_inact = (ints.n_elec - n_act_elec) / 2;
        if n_inact + n_act_orb > ints.n_orb {
            return domain(format!("CAS({n_act_elec},{n_act_orb}) exceeds {} orbitals", ints.n_orb));
        }
        Self::new(
            ints,
            (0..n_inact).collect(),
            (n_inact..n_inact + n_act_orb).collect(),
            (n_inact + n_act_orb..ints.n_orb).collect(),
        )
    }

    /// Every orbital active.
    pub fn full(ints: &IntegralSet) -> Self {
        Self { inactive: vec![], active: (0..ints.n_orb).collect(), virtual_: vec![], n_act_elec: ints.n_elec }
    }

    pub fn n_orb(&self) -> usize {
        self.inactive.len() + self.active.len() + self.virtual_.len()
    }

    /// Class of every orbital, indexed by orbital.
    pub fn classes(&self) -> Vec<OrbitalClass> {
        let mut out = vec![OrbitalClass::Virtual; self.n_orb()];
        for &i in &self.inactive {
            out[i] = OrbitalClass::Inactive;
        }
        for &t in &self.active {
            out[t] = OrbitalClass::Active;
        }
        out
    }

    pub fn n_act_alpha(&self, ms2: i32) -> usize {
        ((self.n_act_elec as i32 + ms2) / 2) as usize
    }

    pub fn n_act_beta(&self, ms2: i32) -> usize {
        ((self.n_act_elec as i32 - ms2) / 2) as usize
    }
}

/// Active-space Hamiltonian with the inactive orbitals folded into a scalar
/// and an effective one-electron matrix.
#[derive(Clone, Debug)]
pub struct EmbeddedHamiltonian {
    pub n_act: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub e_core: f64,
    pub h_eff: DMatrix<f64>,
    pub v_act: PackedEri,
}

pub fn embed_active_space(ints: &IntegralSet, cas: &ActiveSpace) -> Result<EmbeddedHamiltonian> {
    if cas.n_orb() != ints.n_orb {
        return domain("active space does not match the integral set");
    }
    if 2 * cas.inactive.len() + cas.n_act_elec != ints.n_elec {
        return domain("active electron count inconsistent with the inactive set");
    }
    let n_alpha = cas.n_act_alpha(ints.ms2);
    let n_beta = cas.n_act_beta(ints.ms2);
    if (cas.n_act_elec as i32) < ints.ms2.abs() || n_alpha > cas.active.len() || n_beta > cas.active.len() {
        return domain(format!(
            "{} active electrons with MS2={} do not fit in {} active orbitals",
            cas.n_act_elec,
            ints.ms2,
            cas.active.len()
        ));
    }
    let mut e_core = ints.core_energy;
    for &i in &cas.inactive {
        e_core += 2.0 * ints.h[(i, i)];
        for &j in &cas.inactive {
            e_core += 2.0 * ints.eri(i, i, j, j) - ints.eri(i, j, j, i);
        }
    }
    let n_act = cas.active.len();
    let mut h_eff = DMatrix::zeros(n_act, n_act);
    for (a, &u) in cas.active.iter().enumerate() {
        for (b, &v) in cas.active.iter().enumerate() {
            let mut x = ints.h[(u, v)];
            for &i in &cas.inactive {
                x += 2.0 * ints.eri(u, v, i, i) - ints.eri(u, i, i, v);
            }
            h_eff[(a, b)] = x;
        }
    }
    let v_act = ints.v.restrict(&cas.active);
    Ok(EmbeddedHamiltonian { n_act, n_alpha, n_beta, e_core, h_eff, v_act })
}

impl EmbeddedHamiltonian {
    pub fn n_act_elec(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    /// Embedded Hamiltonian of a whole integral set with no inactive orbitals.
    pub fn from_full(ints: &IntegralSet) -> EmbeddedHamiltonian {
        EmbeddedHamiltonian {
            n_act: ints.n_orb,
            n_alpha: ints.n_alpha(),
            n_beta: ints.n_beta(),
            e_core: ints.core_energy,
            h_eff: ints.h.clone(),
            v_act: ints.v.clone(),
        }
    }

    /// Energy of the determinant filling the lowest active orbitals.
    pub fn reference_energy(&self) -> f64 {
        let tmp = IntegralSet {
            n_orb: self.n_act,
            n_elec: self.n_act_elec(),
            ms2: self.n_alpha as i32 - self.n_beta as i32,
            core_energy: self.e_core,
            h: self.h_eff.clone(),
            v: self.v_act.clone(),
            orbsym: vec![1; self.n_act],
            isym: 1,
            basis_stamp: 0,
        };
        tmp.hf_energy()
    }
}
