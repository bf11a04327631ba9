mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use vqeac::exactsolver::{fci_solve_with, FciAlgorithm};
use vqeac::integrals::{embed_active_space, ActiveSpace, EmbeddedHamiltonian};
use vqeac::operators::{hamiltonian_to_fermion, Mapping};
use vqeac::statevector::Support;

/// Sector spectrum of the qubit Hamiltonian, materialized densely.
fn mapped_spectrum(emb: &EmbeddedHamiltonian, mapping: Mapping) -> Vec<f64> {
    let nq = 2 * emb.n_act;
    let h = mapping.map(&hamiltonian_to_fermion(emb), nq).unwrap();
    let support = Support::sector(emb.n_act, emb.n_alpha, emb.n_beta, mapping);
    let dim = support.len();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (j, &b) in support.states().iter().enumerate() {
        // single strings leave the sector; their sum does not
        let mut column = std::collections::BTreeMap::new();
        for (t, c) in h.apply_to_basis(b) {
            *column.entry(t).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        for (t, c) in column.into_iter().filter(|(_, c)| c.norm() > 1e-12) {
            assert!(c.im.abs() < 1e-12);
            let i = support.position(t).expect("Hamiltonian stays in its sector");
            m[(i, j)] += c.re;
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn cases() -> Vec<(&'static str, EmbeddedHamiltonian)> {
    let full = |n: &'static str| (n, EmbeddedHamiltonian::from_full(&common::ints(n)));
    let cas = |n: &'static str, e, o| {
        let ints = common::ints(n);
        (n, embed_active_space(&ints, &ActiveSpace::from_counts(&ints, e, o).unwrap()).unwrap())
    };
    vec![
        full("h2_sto3g_0.735"),
        full("h2_631g_1.0"),
        full("h4_chain_sto3g_1.0"),
        full("lih_sto3g_1.6"),
        cas("n2_sto3g_2.0", 6, 6),
        cas("beh2_sto3g_1.33", 4, 6),
    ]
}

#[test]
fn determinant_spectrum_equals_mapped_hamiltonian_spectrum() {
    for (name, emb) in cases() {
        let jw = mapped_spectrum(&emb, Mapping::JordanWigner);
        let parity = mapped_spectrum(&emb, Mapping::Parity);
        let sol = fci_solve_with(&emb, emb.n_alpha, emb.n_beta, jw.len(), FciAlgorithm::Dense).unwrap();
        for k in 0..jw.len() {
            assert!((jw[k] - parity[k]).abs() < 1e-10, "{name} root {k}");
            assert!((sol.energies[k] - jw[k]).abs() < 1e-10, "{name} root {k}: {} vs {}", sol.energies[k], jw[k]);
        }
    }
}

#[test]
fn davidson_agrees_with_dense() {
    for (name, emb) in cases() {
        let dense = fci_solve_with(&emb, emb.n_alpha, emb.n_beta, 1, FciAlgorithm::Dense).unwrap();
        let n_roots = dense.space.dimension().min(3);
        let dense = fci_solve_with(&emb, emb.n_alpha, emb.n_beta, n_roots, FciAlgorithm::Dense).unwrap();
        let dav = fci_solve_with(&emb, emb.n_alpha, emb.n_beta, n_roots, FciAlgorithm::Davidson).unwrap();
        for k in 0..n_roots {
            assert!((dense.energies[k] - dav.energies[k]).abs() < 1e-10, "{name} root {k}");
        }
        // eigenvectors agree up to sign (ground state is nondegenerate)
        let overlap = dense.vectors.column(0).dot(&dav.vectors.column(0));
        assert!((overlap.abs() - 1.0).abs() < 1e-8, "{name}: overlap {overlap}");
    }
}

#[test]
fn excited_roots_are_orthonormal() {
    let (_, emb) = cases().swap_remove(4);
    let sol = fci_solve_with(&emb, emb.n_alpha, emb.n_beta, 4, FciAlgorithm::Davidson).unwrap();
    let gram = sol.vectors.transpose() * &sol.vectors;
    assert!((gram - DMatrix::identity(4, 4)).abs().max() < 1e-10);
    assert!(sol.energies.windows(2).all(|w| w[0] <= w[1] + 1e-12));
}
