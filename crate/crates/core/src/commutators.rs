//! Expectation values of commutators of a spin-free one- plus two-body
//! operator `O = sum h_tu E_tu + 1/2 sum g_tuvw e_tuvw` with singlet
//! excitations `E_rs = sum_s a†_rs a_ss`, contracted against spin-summed RDMs.
//!
//! `h` must be symmetric and `g` must carry the 8-fold permutational symmetry
//! of real chemists'-notation integrals; the state must be real.

use crate::linalg::Tensor4;
use crate::rdm::FullSpaceRdms;
use nalgebra::DMatrix;

/// Spin-summed RDMs over the full orbital space, with the 2-RDM stored only
/// over non-virtual orbitals in the layout `gam[a,b,c,d] = <e_abcd> = d2[a,c,b,d]`.
#[derive(Clone, Debug)]
pub struct RdmView {
    pub n: usize,
    pub d1: DMatrix<f64>,
    occ: Vec<usize>,
    pos: Vec<Option<usize>>,
    gam: Tensor4,
}

impl RdmView {
    pub fn new(full: &FullSpaceRdms) -> Self {
        let n = full.n_orb();
        let occ: Vec<usize> = (0..n).filter(|&p| full.class(p) != crate::integrals::OrbitalClass::Virtual).collect();
        let mut pos = vec![None; n];
        for (k, &p) in occ.iter().enumerate() {
            pos[p] = Some(k);
        }
        let m = occ.len();
        let mut gam = Tensor4::zeros(m);
        for (ia, &a) in occ.iter().enumerate() {
            for (ib, &b) in occ.iter().enumerate() {
                for (ic, &c) in occ.iter().enumerate() {
                    for (id, &d) in occ.iter().enumerate() {
                        gam.set(ia, ib, ic, id, full.d2(a, c, b, d));
                    }
                }
            }
        }
        Self { n, d1: full.d1_matrix(), occ, pos, gam }
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occ
    }

    #[inline]
    fn gam(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        // indices are positions in `occ`
        self.gam.get(a, b, c, d)
    }
}

/// One- plus two-body operator with precomputed contractions against an
/// [`RdmView`].
pub struct Contracted<'a> {
    pub h: &'a DMatrix<f64>,
    pub g: &'a Tensor4,
    pub rdm: &'a RdmView,
    /// `(hD)_xy = sum_a h_ax D_ay`.
    hd: DMatrix<f64>,
    /// `Y_xy = sum_bcd g_xbcd <e_ybcd>`.
    y: DMatrix<f64>,
}

impl<'a> Contracted<'a> {
    pub fn new(h: &'a DMatrix<f64>, g: &'a Tensor4, rdm: &'a RdmView) -> Self {
        let n = rdm.n;
        let hd = h.transpose() * &rdm.d1;
        let occ = &rdm.occ;
        let mut y = DMatrix::zeros(n, n);
        for x in 0..n {
            for (iy, &yy) in occ.iter().enumerate() {
                let mut acc = 0.0;
                for (ib, &b) in occ.iter().enumerate() {
                    for (ic, &c) in occ.iter().enumerate() {
                        for (id, &d) in occ.iter().enumerate() {
                            acc += g.get(x, b, c, d) * rdm.gam(iy, ib, ic, id);
                        }
                    }
                }
                y[(x, yy)] = acc;
            }
        }
        Self { h, g, rdm, hd, y }
    }

    /// Generalized Fock matrix `F = hD + Y`; `<[O, E_rs]> = F_rs - F_sr`.
    pub fn fock(&self) -> DMatrix<f64> {
        &self.hd + &self.y
    }

    /// `<[O, E_rs]>`.
    pub fn commutator(&self, r: usize, s: usize) -> f64 {
        let f = |a: usize, b: usize| self.hd[(a, b)] + self.y[(a, b)];
        f(r, s) - f(s, r)
    }

    /// `<[[O, E_rs], E_pq]>`.
    pub fn double_commutator(&self, (r, s): (usize, usize), (p, q): (usize, usize)) -> f64 {
        let h = self.h;
        let d = &self.rdm.d1;
        let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut v =
            dl(p, s) * self.hd[(r, q)] - h[(s, p)] * d[(r, q)] - h[(q, r)] * d[(p, s)] + dl(q, r) * self.hd[(s, p)];
        v += dl(q, r) * self.y[(s, p)] + dl(p, s) * self.y[(r, q)];
        let pos = &self.rdm.pos;
        let occ = &self.rdm.occ;
        let g = self.g;
        let gm = |a, b, c, e| self.rdm.gam(a, b, c, e);
        // S1 = sum_cd g_qrcd G_pscd, S3 = sum_bc g_qbcr G_pbcs
        if let (Some(ip), Some(is)) = (pos[p], pos[s]) {
            let mut s1 = 0.0;
            let mut s3 = 0.0;
            for (ic, &c) in occ.iter().enumerate() {
                for (id, &e) in occ.iter().enumerate() {
                    s1 += g.get(q, r, c, e) * gm(ip, is, ic, id);
                    s3 += g.get(q, c, e, r) * gm(ip, ic, id, is);
                }
            }
            v -= s1 + s3;
        }
        // S2 = sum_bd g_qbsd G_pbrd
        if let (Some(ip), Some(ir)) = (pos[p], pos[r]) {
            let mut s2 = 0.0;
            for (ib, &b) in occ.iter().enumerate() {
                for (id, &e) in occ.iter().enumerate() {
                    s2 += g.get(q, b, s, e) * gm(ip, ib, ir, id);
                }
            }
            v += s2;
        }
        // S4 = sum_cd g_spcd G_rqcd, S5 = sum_ad g_apsd G_aqrd
        if let (Some(iq), Some(ir)) = (pos[q], pos[r]) {
            let mut s4 = 0.0;
            let mut s5 = 0.0;
            for (ic, &c) in occ.iter().enumerate() {
                for (id, &e) in occ.iter().enumerate() {
                    s4 += g.get(s, p, c, e) * gm(ir, iq, ic, id);
                    s5 += g.get(c, p, s, e) * gm(ic, iq, ir, id);
                }
            }
            v -= s4 + s5;
        }
        // S6 = sum_ac g_apcr G_aqcs
        if let (Some(iq), Some(is)) = (pos[q], pos[s]) {
            let mut s6 = 0.0;
            for (ia, &a) in occ.iter().enumerate() {
                for (ic, &c) in occ.iter().enumerate() {
                    s6 += g.get(a, p, c, r) * gm(ia, iq, ic, is);
                }
            }
            v += s6;
        }
        v
    }
}

impl RdmView {
    /// `E = core + sum h_pq D_pq + 1/2 sum g_abcd <e_abcd>` for integrals in
    /// the basis the RDMs are expressed in (not checked).
    pub fn energy(&self, core: f64, h: &DMatrix<f64>, g: &Tensor4) -> f64 {
        let mut e = core + h.component_mul(&self.d1).sum();
        let occ = &self.occ;
        let mut two = 0.0;
        for (ia, &a) in occ.iter().enumerate() {
            for (ib, &b) in occ.iter().enumerate() {
                for (ic, &c) in occ.iter().enumerate() {
                    for (id, &d) in occ.iter().enumerate() {
                        two += g.get(a, b, c, d) * self.gam(ia, ib, ic, id);
                    }
                }
            }
        }
        e += 0.5 * two;
        e
    }
}
