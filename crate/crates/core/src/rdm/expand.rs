use super::ReducedDensityMatrices;
use crate::error::{domain, Result};
use crate::integrals::{ActiveSpace, IntegralSet, OrbitalClass};
use nalgebra::DMatrix;

/// Spin-summed RDMs over the whole orbital space, derived on demand from the
/// active-space RDMs and the doubly occupied inactive determinant.
#[derive(Clone, Debug)]
pub struct FullSpaceRdms {
    pub cas: ActiveSpace,
    pub stamp: u64,
    class: Vec<OrbitalClass>,
    /// Position of each orbital inside the active list.
    act_pos: Vec<usize>,
    d1_act: DMatrix<f64>,
    d2_act: crate::linalg::Tensor4,
}

impl FullSpaceRdms {
    pub fn new(rdms: &ReducedDensityMatrices, cas: &ActiveSpace) -> Result<Self> {
        if rdms.n_act != cas.active.len() {
            return domain(format!("RDMs cover {} active orbitals, active space has {}", rdms.n_act, cas.active.len()));
        }
        if !rdms.tag.active.is_empty() && rdms.tag.active != cas.active {
            return domain("RDMs were measured for a different active orbital set");
        }
        let class = cas.classes();
        let mut act_pos = vec![usize::MAX; class.len()];
        for (k, &t) in cas.active.iter().enumerate() {
            act_pos[t] = k;
        }
        Ok(Self {
            cas: cas.clone(),
            stamp: rdms.tag.stamp,
            class,
            act_pos,
            d1_act: rdms.d1.clone(),
            d2_act: rdms.d2.clone(),
        })
    }

    pub fn n_orb(&self) -> usize {
        self.class.len()
    }

    pub fn class(&self, p: usize) -> OrbitalClass {
        self.class[p]
    }

    /// Errors unless the integrals share the RDMs' orbital basis.
    pub fn check_basis(&self, ints: &IntegralSet) -> Result<()> {
        if ints.n_orb != self.n_orb() || ints.basis_stamp != self.stamp {
            return domain("RDMs and integrals refer to different orbital bases");
        }
        Ok(())
    }

    #[inline]
    fn act1(&self, t: usize, u: usize) -> f64 {
        self.d1_act[(self.act_pos[t], self.act_pos[u])]
    }

    pub fn d1(&self, p: usize, q: usize) -> f64 {
        use OrbitalClass::*;
        match (self.class[p], self.class[q]) {
            (Inactive, Inactive) if p == q => 2.0,
            (Active, Active) => self.act1(p, q),
            _ => 0.0,
        }
    }

    pub fn d1_matrix(&self) -> DMatrix<f64> {
        let n = self.n_orb();
        DMatrix::from_fn(n, n, |p, q| self.d1(p, q))
    }

    /// `sum_{a,b} <a†_pa a†_qb a_sb a_ra>`.
    pub fn d2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        use OrbitalClass::*;
        let c = [self.class[p], self.class[q], self.class[r], self.class[s]];
        if c.contains(&Virtual) {
            return 0.0;
        }
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        match c {
            [Active, Active, Active, Active] => {
                self.d2_act.get(self.act_pos[p], self.act_pos[q], self.act_pos[r], self.act_pos[s])
            }
            [Inactive, Inactive, Inactive, Inactive] => 4.0 * d(p, r) * d(q, s) - 2.0 * d(p, s) * d(q, r),
            [Inactive, Active, Inactive, Active] => 2.0 * d(p, r) * self.act1(q, s),
            [Active, Inactive, Active, Inactive] => 2.0 * d(q, s) * self.act1(p, r),
            [Inactive, Active, Active, Inactive] => -d(p, s) * self.act1(q, r),
            [Active, Inactive, Inactive, Active] => -d(q, r) * self.act1(p, s),
            _ => 0.0,
        }
    }

    /// Total energy from full-space integrals.
    pub fn energy(&self, ints: &IntegralSet) -> f64 {
        let n = self.n_orb();
        let occ: Vec<usize> = (0..n).filter(|&p| self.class[p] != OrbitalClass::Virtual).collect();
        let mut e = ints.core_energy;
        for &p in &occ {
            for &q in &occ {
                e += ints.h[(p, q)] * self.d1(p, q);
            }
        }
        let mut two = 0.0;
        for &p in &occ {
            for &q in &occ {
                for &r in &occ {
                    for &s in &occ {
                        let d = self.d2(p, q, r, s);
                        if d != 0.0 {
                            two += ints.eri(p, r, q, s) * d;
                        }
                    }
                }
            }
        }
        e + 0.5 * two
    }
}
