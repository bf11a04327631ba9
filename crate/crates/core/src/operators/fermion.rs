use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// A ladder operator: spin-orbital index and `true` for creation.
pub type Ladder = (usize, bool);

/// Linear combination of products of fermionic ladder operators.
///
/// Terms are kept in canonical normal order: creators left of annihilators,
/// each group sorted by descending index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

const PRUNE: f64 = 1e-14;

fn in_order(a: Ladder, b: Ladder) -> bool {
    match (a.1, b.1) {
        (true, false) => true,
        (false, true) => false,
        _ => a.0 > b.0,
    }
}

/// Normal-orders one product, pushing the resulting terms into `out`.
fn normal_order_into(coeff: Complex64, ops: Vec<Ladder>, out: &mut BTreeMap<Vec<Ladder>, Complex64>) {
    let mut stack = vec![(coeff, ops)];
    while let Some((c, mut ops)) = stack.pop() {
        let mut sign = 1.0;
        let mut vanished = false;
        // insertion sort with anticommutation bookkeeping
        let mut i = 1;
        while i < ops.len() {
            let mut j = i;
            while j > 0 && !in_order(ops[j - 1], ops[j]) {
                let (a, b) = (ops[j - 1], ops[j]);
                if a.0 == b.0 && a.1 == b.1 {
                    vanished = true;
                    break;
                }
                if a.0 == b.0 && !a.1 && b.1 {
                    // a_p a†_p = 1 - a†_p a_p
                    let mut contracted = ops.clone();
                    contracted.drain(j - 1..=j);
                    stack.push((c * sign, contracted));
                }
                ops.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
            if vanished {
                break;
            }
            // equal neighbours of the same kind after sorting also vanish
            if j > 0 && ops[j - 1] == ops[j] {
                vanished = true;
                break;
            }
            i += 1;
        }
        if vanished {
            continue;
        }
        *out.entry(ops).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
    }
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(c: impl Into<Complex64>) -> Self {
        Self::term(c, &[])
    }

    /// Single product term; normal-ordered on construction.
    pub fn term(c: impl Into<Complex64>, ops: &[Ladder]) -> Self {
        let mut out = Self::zero();
        out.add_term(c, ops);
        out
    }

    /// `a†_p a_q`.
    pub fn hopping(p: usize, q: usize) -> Self {
        Self::term(1.0, &[(p, true), (q, false)])
    }

    pub fn add_term(&mut self, c: impl Into<Complex64>, ops: &[Ladder]) {
        let c = c.into();
        if c.norm() == 0.0 {
            return;
        }
        normal_order_into(c, ops.to_vec(), &mut self.terms);
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), *c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest mode index plus one.
    pub fn n_modes(&self) -> usize {
        self.terms.keys().flat_map(|k| k.iter().map(|l| l.0 + 1)).max().unwrap_or(0)
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out.prune();
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (ops, c) in &self.terms {
            let rev: Vec<Ladder> = ops.iter().rev().map(|&(k, d)| (k, !d)).collect();
            normal_order_into(c.conj(), rev, &mut out.terms);
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut ops = a.clone();
                ops.extend_from_slice(b);
                normal_order_into(ca * cb, ops, &mut out.terms);
            }
        }
        out.prune();
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other) - other.mul(self)
    }

    fn max_diff(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_diff(&self.adjoint()) <= tol
    }

    pub fn is_antihermitian(&self, tol: f64) -> bool {
        (self.clone() + self.adjoint()).terms.values().all(|c| c.norm() <= tol)
    }
}

impl std::ops::Add for FermionOperator {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (k, c) in rhs.terms {
            *self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        self.prune();
        self
    }
}

impl std::ops::Sub for FermionOperator {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ops, c) in &self.terms {
            write!(f, "({:+.9}{:+.9}i)", c.re, c.im)?;
            for (k, d) in ops {
                write!(f, " {}{}", k, if *d { "^" } else { "" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
