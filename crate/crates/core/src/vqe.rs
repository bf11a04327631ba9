//! Variational loops: fixed-ansatz VQE and (qubit-)ADAPT-VQE.

use crate::ansatz::{AnsatzCircuit, CircuitSummary, CompiledCircuit, OperatorPool, PoolFlavor, Shape};
use crate::error::{domain, Result};
use crate::exactsolver::hamiltonian_on_support;
use crate::integrals::EmbeddedHamiltonian;
use crate::operators::Mapping;
use crate::optimize::{bfgs, inf_norm, BfgsOptions};
use crate::statevector::{Observable, SparseOperator, Statevector, Support};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct VqeOptions {
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self { gtol: 1e-6, max_iter: 500 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VqeResult {
    pub energy: f64,
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub circuit: CircuitSummary,
}

/// Active-space Hamiltonian compiled on the basis states a circuit can reach.
pub fn problem_hamiltonian(
    emb: &EmbeddedHamiltonian,
    mapping: Mapping,
    pool: Option<&OperatorPool>,
) -> Result<SparseOperator> {
    let shape = Shape::new(emb.n_act, emb.n_alpha, emb.n_beta);
    let support = match pool {
        Some(p) if p.flavor == PoolFlavor::Qubit => {
            let n_q = shape.n_qubits();
            let masks: Vec<u64> = p.elements.iter().flat_map(|g| g.rotations(mapping, n_q)).map(|(s, _)| s.x).collect();
            let occ = crate::bits::occupation_mask(&shape.reference());
            Support::closure(mapping.encode(occ, n_q), &masks, n_q)?
        }
        _ => shape.sector(mapping),
    };
    Ok(hamiltonian_on_support(emb, support, mapping))
}

pub fn energy_of(theta: &[f64], circuit: &AnsatzCircuit, h: &dyn Observable) -> Result<f64> {
    circuit.check_params(theta)?;
    Ok(CompiledCircuit::new(circuit)?.energy(theta, h))
}

/// Exact gradient of the Trotterized circuit energy (adjoint sweep).
pub fn analytic_gradient(theta: &[f64], circuit: &AnsatzCircuit, h: &dyn Observable) -> Result<Vec<f64>> {
    circuit.check_params(theta)?;
    Ok(CompiledCircuit::new(circuit)?.energy_and_gradient(theta, h).1)
}

/// Quasi-Newton minimization of the circuit energy from `theta0`.
pub fn minimize(circuit: &AnsatzCircuit, h: &dyn Observable, theta0: &[f64], opts: &VqeOptions) -> Result<VqeResult> {
    circuit.check_params(theta0)?;
    let compiled = CompiledCircuit::new(circuit)?;
    let bopts = BfgsOptions { gtol: opts.gtol, max_iter: opts.max_iter, ..Default::default() };
    let r = bfgs(
        |x| {
            let (e, g, _) = compiled.energy_and_gradient(x, h);
            Ok((e, g))
        },
        theta0,
        &bopts,
    )?;
    Ok(VqeResult {
        energy: r.f,
        grad_norm: inf_norm(&r.grad),
        theta: r.x,
        iterations: r.iterations,
        evaluations: r.evaluations,
        converged: r.converged,
        circuit: circuit.summary(),
    })
}

#[derive(Clone, Debug)]
pub struct AdaptOptions {
    pub max_iter: usize,
    /// Stop when every selection gradient is below this (Hartree).
    pub eps_grad: f64,
    pub vqe: VqeOptions,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self { max_iter: 50, eps_grad: 1e-4, vqe: VqeOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AdaptIteration {
    pub iteration: usize,
    pub selected: usize,
    pub operator: String,
    pub gradient: f64,
    pub energy: f64,
    pub cnots: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AdaptTrace {
    pub reference_energy: f64,
    pub iterations: Vec<AdaptIteration>,
    pub converged: bool,
}

impl AdaptTrace {
    /// `iteration,energy,grad,cnots` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,energy,grad,cnots\n");
        for it in &self.iterations {
            s.push_str(&format!("{},{:.12e},{:.12e},{}\n", it.iteration, it.energy, it.gradient, it.cnots));
        }
        s
    }
}

/// Selection gradients `dE/dtheta` at `theta = 0` for appending each pool
/// element to a circuit whose current state is `psi`.
pub fn pool_gradients(pool: &[CompiledCircuit], psi: &Statevector, h: &dyn Observable) -> Vec<f64> {
    let hpsi = h.apply(psi);
    pool.par_iter().map(|c| c.zero_angle_derivative(psi, &hpsi)).collect()
}

/// Index of the largest `|g|`; near-ties (within 1e-10) go to the lowest index.
pub fn select_operator(grads: &[f64]) -> Option<(usize, f64)> {
    let max = grads.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    grads.iter().position(|g| g.abs() >= max - 1e-10).map(|k| (k, grads[k]))
}

/// Compiles every pool element as a one-parameter circuit on `shape`.
pub fn compile_pool(pool: &OperatorPool, shape: Shape, mapping: Mapping) -> Result<Vec<CompiledCircuit>> {
    pool.elements
        .iter()
        .map(|g| {
            let mut c = AnsatzCircuit::empty(shape, mapping);
            c.push(g.clone());
            CompiledCircuit::new(&c)
        })
        .collect()
}

/// Grows `start` by the pool element with the largest energy gradient and
/// re-optimizes all parameters (warm start), until `max_iter` operators have
/// been added or every gradient is below `eps_grad`.
pub fn adapt_loop(
    pool: &OperatorPool,
    start: AnsatzCircuit,
    theta0: &[f64],
    h: &dyn Observable,
    opts: &AdaptOptions,
) -> Result<(AnsatzCircuit, VqeResult, AdaptTrace)> {
    if pool.is_empty() {
        return domain("ADAPT needs a nonempty operator pool");
    }
    let compiled_pool = compile_pool(pool, start.shape, start.mapping)?;
    let mut circuit = start;
    let mut result = minimize(&circuit, h, theta0, &opts.vqe)?;
    let mut trace =
        AdaptTrace { reference_energy: energy_of(&vec![0.0; circuit.n_params], &circuit, h)?, ..Default::default() };
    for it in 0..opts.max_iter {
        let psi = CompiledCircuit::new(&circuit)?.state(&result.theta);
        let grads = pool_gradients(&compiled_pool, &psi, h);
        let (k, g) = select_operator(&grads).expect("pool nonempty");
        if g.abs() < opts.eps_grad {
            trace.converged = true;
            break;
        }
        circuit.push(pool.elements[k].clone());
        let mut theta = result.theta.clone();
        theta.push(0.0);
        result = minimize(&circuit, h, &theta, &opts.vqe)?;
        trace.iterations.push(AdaptIteration {
            iteration: it + 1,
            selected: k,
            operator: pool.elements[k].label(circuit.n_qubits()),
            gradient: g.abs(),
            energy: result.energy,
            cnots: result.circuit.cnots,
        });
    }
    Ok((circuit, result, trace))
}
