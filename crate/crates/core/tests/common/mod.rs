#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use vqeac::integrals::{load_fixture, FixtureMeta, IntegralSet, PackedEri};
use vqeac::operators::FermionOperator;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> (IntegralSet, FixtureMeta) {
    let path = fixture_dir().join(format!("{name}.fcidump"));
    let (ints, meta) = load_fixture(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    (ints, meta.expect("fixture sidecar"))
}

pub fn ints(name: &str) -> IntegralSet {
    fixture(name).0
}

/// Every shipped fixture basename, sorted.
pub fn all_fixtures() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let name = e.ok()?.file_name().into_string().ok()?;
            name.strip_suffix(".fcidump").map(str::to_string)
        })
        .collect();
    names.sort();
    names
}

/// Random symmetric one-electron and 8-fold symmetric two-electron integrals.
pub fn random_ints(n: usize, n_elec: usize, rng: &mut ChaCha8Rng) -> IntegralSet {
    let mut h = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..=p {
            let x = rng.random_range(-1.0..1.0);
            h[(p, q)] = x;
            h[(q, p)] = x;
        }
    }
    let mut v = PackedEri::zeros(n);
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q >= r * (r + 1) / 2 + s {
                        v.set(p, q, r, s, rng.random_range(-0.3..0.3));
                    }
                }
            }
        }
    }
    IntegralSet::new(n, n_elec, 0, 0.0, h, v).unwrap()
}

/// Spin-summed `E_rs`.
pub fn excitation(r: usize, s: usize) -> FermionOperator {
    FermionOperator::hopping(2 * r, 2 * s) + FermionOperator::hopping(2 * r + 1, 2 * s + 1)
}
