use proptest::prelude::*;
use vqeac::ansatz::{
    build_fermionic_pool, build_uccd, build_uccsd, count_cnots, AnsatzCircuit, CompiledCircuit, FermionicGenerator,
    Generator, Shape,
};
use vqeac::operators::{number_operator, sz_operator, Mapping, PauliSum};
use vqeac::statevector::Statevector;

/// Mean and variance of an observable.
fn moments(op: &PauliSum, psi: &Statevector) -> (f64, f64) {
    let mean = psi.expectation(op).unwrap();
    let sq = psi.expectation(&op.mul(op)).unwrap();
    (mean, sq - mean * mean)
}

fn assert_sector(c: &AnsatzCircuit, theta: &[f64]) -> Result<(), TestCaseError> {
    let psi = CompiledCircuit::new(c).unwrap().state(theta);
    let nq = c.n_qubits();
    let n = c.mapping.map(&number_operator(nq), nq).unwrap();
    let sz = c.mapping.map(&sz_operator(c.shape.n_orb), nq).unwrap();
    let (nm, nv) = moments(&n, &psi);
    let (sm, sv) = moments(&sz, &psi);
    prop_assert!((nm - (c.shape.n_alpha + c.shape.n_beta) as f64).abs() < 1e-10);
    prop_assert!((sm - 0.5 * (c.shape.n_alpha as f64 - c.shape.n_beta as f64)).abs() < 1e-10);
    prop_assert!(nv.abs() < 1e-10 && sv.abs() < 1e-10, "variances {nv} {sv}");
    Ok(())
}

fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        Just(Shape::new(2, 1, 1)),
        Just(Shape::new(3, 1, 1)),
        Just(Shape::new(3, 2, 1)),
        Just(Shape::new(4, 2, 2)),
        Just(Shape::new(4, 2, 1)),
    ]
}

fn mapping_strategy() -> impl Strategy<Value = Mapping> {
    prop_oneof![Just(Mapping::JordanWigner), Just(Mapping::Parity)]
}

fn pool_circuit(shape: Shape, mapping: Mapping, picks: &[usize]) -> AnsatzCircuit {
    let pool = build_fermionic_pool(shape).unwrap();
    let mut c = AnsatzCircuit::empty(shape, mapping);
    for &k in picks {
        c.push(pool.elements[k % pool.len()].clone());
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn uccsd_conserves_number_and_sz(
        shape in shape_strategy(),
        mapping in mapping_strategy(),
        seed in prop::collection::vec(-1.5..1.5f64, 64),
        doubles_only in any::<bool>(),
    ) {
        let c = if doubles_only { build_uccd(shape, mapping) } else { build_uccsd(shape, mapping) };
        let theta: Vec<f64> = (0..c.n_params).map(|k| seed[k % seed.len()] / (1 + k / seed.len()) as f64).collect();
        assert_sector(&c, &theta)?;
    }

    #[test]
    fn grown_fermionic_circuits_conserve_number_and_sz(
        shape in shape_strategy(),
        mapping in mapping_strategy(),
        picks in prop::collection::vec(0usize..1000, 1..6),
        angles in prop::collection::vec(-2.0..2.0f64, 6),
    ) {
        let c = pool_circuit(shape, mapping, &picks);
        assert_sector(&c, &angles[..c.n_params])?;
    }
}

#[test]
fn single_excitation_circuits_equal_exact_exponentials() {
    for mapping in [Mapping::JordanWigner, Mapping::Parity] {
        let shape = Shape::new(4, 2, 1);
        let excitations = shape.singles().into_iter().chain(shape.doubles());
        for (k, e) in excitations.enumerate() {
            let mut c = AnsatzCircuit::empty(shape, mapping);
            c.push(Generator::Fermionic(FermionicGenerator::single_component(e.clone())));
            let theta = 0.37 + 0.11 * k as f64;
            let got = CompiledCircuit::new(&c).unwrap().state(&[theta]);
            let mut want = c.reference_state().unwrap();
            want.apply_exact_antihermitian(&e.generator().scale(theta), mapping).unwrap();
            let deficit = 1.0 - want.inner(&got).norm_sqr();
            assert!(deficit < 1e-10, "{mapping:?} {e:?}: fidelity deficit {deficit}");
        }
    }
}

#[test]
fn circuits_are_reproducible() {
    let shape = Shape::new(6, 3, 3);
    for mapping in [Mapping::JordanWigner, Mapping::Parity] {
        let (a, b) = (build_uccsd(shape, mapping), build_uccsd(shape, mapping));
        assert_eq!(format!("{:?}", a.entries), format!("{:?}", b.entries));
        assert_eq!(count_cnots(&a), count_cnots(&b));
        let theta: Vec<f64> = (0..a.n_params).map(|k| 0.01 * (k as f64).sin()).collect();
        let sa = CompiledCircuit::new(&a).unwrap().state(&theta);
        let sb = CompiledCircuit::new(&b).unwrap().state(&theta);
        assert_eq!(sa.amplitudes(), sb.amplitudes());
    }
}

#[test]
fn zero_parameters_give_the_reference() {
    let c = build_uccsd(Shape::new(4, 2, 2), Mapping::Parity);
    let psi = CompiledCircuit::new(&c).unwrap().state(&vec![0.0; c.n_params]);
    let reference = c.reference_state().unwrap();
    assert!((psi.inner(&reference).norm() - 1.0).abs() < 1e-14);
    assert!(c.check_params(&[0.0]).is_err());
}
