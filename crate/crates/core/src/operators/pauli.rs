use crate::error::{domain, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Pauli string over at most 64 qubits in symplectic form: qubit `k` carries
/// I (x=0,z=0), X (1,0), Y (1,1) or Z (0,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn code(self) -> u8 {
        self as u8
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(k: usize, p: Pauli) -> Self {
        let (x, z) = match p {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        };
        Self { x: x << k, z: z << k }
    }

    pub fn letter(&self, k: usize) -> Pauli {
        match (self.x >> k & 1, self.z >> k & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest qubit touched plus one.
    pub fn extent(&self) -> usize {
        64 - (self.x | self.z).leading_zeros() as usize
    }

    /// Product `self * other` as (phase exponent k, string) with phase `i^k`.
    #[inline]
    pub fn mul(&self, other: &Self) -> (u32, PauliString) {
        let out = PauliString { x: self.x ^ other.x, z: self.z ^ other.z };
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4 * 64 - out.y_count();
        (k % 4, out)
    }

    pub fn commutes(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|b> = phase |b'>`.
    #[inline]
    pub fn apply(&self, b: u64) -> (u64, Complex64) {
        let sign_flips = (self.z & b).count_ones() % 2;
        let k = (self.y_count() + 2 * sign_flips) % 4;
        (b ^ self.x, I_POW[k as usize])
    }

    pub fn to_label(&self, n: usize) -> String {
        (0..n).map(|k| self.letter(k).symbol()).collect()
    }

    pub fn from_label(s: &str) -> Result<Self> {
        let mut out = PauliString::IDENTITY;
        for (k, ch) in s.chars().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return domain(format!("'{ch}' is not a Pauli letter")),
            };
            let single = PauliString::single(k, p);
            out.x |= single.x;
            out.z |= single.z;
        }
        Ok(out)
    }
}

pub(crate) const I_POW: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];

impl Ord for PauliString {
    /// Lexicographic over letters from qubit 0 upward with I < X < Y < Z.
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = (self.x ^ other.x) | (self.z ^ other.z);
        if diff == 0 {
            return Ordering::Equal;
        }
        let k = diff.trailing_zeros() as usize;
        self.letter(k).code().cmp(&other.letter(k).code())
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coefficient times a Pauli string on a fixed register width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub string: PauliString,
    pub n_qubits: usize,
}

impl PauliTerm {
    pub fn new(coeff: impl Into<Complex64>, string: PauliString, n_qubits: usize) -> Self {
        Self { coeff: coeff.into(), string, n_qubits }
    }
}

pub fn pauli_multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits != b.n_qubits {
        return domain(format!("Pauli length mismatch: {} vs {}", a.n_qubits, b.n_qubits));
    }
    let (k, s) = a.string.mul(&b.string);
    Ok(PauliTerm::new(a.coeff * b.coeff * I_POW[k as usize], s, a.n_qubits))
}

pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Weighted sum of Pauli strings with unique strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, c: impl Into<Complex64>) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(c, PauliString::IDENTITY);
        s
    }

    pub fn from_term(t: PauliTerm) -> Self {
        let mut s = Self::zero(t.n_qubits);
        s.add_term(t.coeff, t.string);
        s
    }

    pub fn add_term(&mut self, c: impl Into<Complex64>, p: PauliString) {
        let e = self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0));
        *e += c.into();
    }

    /// Drops terms with `|c| < threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    pub fn pruned(mut self) -> Self {
        self.prune(PRUNE_THRESHOLD);
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.terms.iter().map(|(p, c)| (*p, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits, "Pauli length mismatch");
        let mut out = Self::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (k, p) = a.mul(b);
                out.add_term(ca * cb * I_POW[k as usize], p);
            }
        }
        out.pruned()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits, "Pauli length mismatch");
        let mut out = Self::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.commutes(b) {
                    let (k, p) = a.mul(b);
                    out.add_term(ca * cb * I_POW[k as usize] * 2.0, p);
                }
            }
        }
        out.pruned()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Hermitian iff every coefficient is real within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// `|b'> <b|` action: for each term, target and amplitude.
    pub fn apply_to_basis(&self, b: u64) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.terms.iter().map(move |(p, c)| {
            let (t, ph) = p.apply(b);
            (t, c * ph)
        })
    }

    /// One term per line, `±c.ccccccccc IXYZ...`; the imaginary part is
    /// appended as `±c.ccccccccci` when nonzero.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            if c.im.abs() > PRUNE_THRESHOLD {
                s.push_str(&format!("{:+.9}{:+.9}i {}\n", c.re, c.im, p.to_label(self.n_qubits)));
            } else {
                s.push_str(&format!("{:+.9} {}\n", c.re, p.to_label(self.n_qubits)));
            }
        }
        s
    }
}

impl std::ops::Add for PauliSum {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.n_qubits, rhs.n_qubits, "Pauli length mismatch");
        for (p, c) in rhs.terms {
            self.add_term(c, p);
        }
        self.pruned()
    }
}

impl std::ops::Sub for PauliSum {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(label: &str) -> PauliTerm {
        PauliTerm::new(1.0, PauliString::from_label(label).unwrap(), label.len())
    }

    #[test]
    fn xy_is_iz() {
        let p = pauli_multiply(&term("X"), &term("Y")).unwrap();
        assert_eq!(p.string, PauliString::from_label("Z").unwrap());
        assert_eq!(p.coeff, Complex64::new(0.0, 1.0));
        let q = pauli_multiply(&term("Y"), &term("X")).unwrap();
        assert_eq!(q.coeff, Complex64::new(0.0, -1.0));
    }

    #[test]
    fn square_is_identity() {
        for l in ["XYZI", "YYYY", "ZIXY"] {
            let mut t = term(l);
            t.coeff = Complex64::new(0.5, 0.25);
            let p = pauli_multiply(&t, &t).unwrap();
            assert_eq!(p.string, PauliString::IDENTITY);
            assert!((p.coeff - t.coeff * t.coeff).norm() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(pauli_multiply(&term("XX"), &term("X")).is_err());
    }

    #[test]
    fn ordering_is_lexicographic() {
        let mut v: Vec<PauliString> =
            ["ZI", "IX", "XZ", "IZ", "YI", "II"].iter().map(|l| PauliString::from_label(l).unwrap()).collect();
        v.sort();
        let labels: Vec<String> = v.iter().map(|p| p.to_label(2)).collect();
        assert_eq!(labels, ["II", "IX", "IZ", "XZ", "YI", "ZI"]);
    }

    #[test]
    fn action_on_basis() {
        // Y|0> = i|1>, Y|1> = -i|0>
        let y = PauliString::from_label("Y").unwrap();
        assert_eq!(y.apply(0), (1, Complex64::new(0.0, 1.0)));
        assert_eq!(y.apply(1), (0, Complex64::new(0.0, -1.0)));
        let z = PauliString::from_label("IZ").unwrap();
        assert_eq!(z.apply(0b10), (0b10, Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn dump_format() {
        let mut s = PauliSum::zero(3);
        s.add_term(-0.5, PauliString::from_label("XIZ").unwrap());
        assert_eq!(s.dump(), "-0.500000000 XIZ\n");
    }
}
