use super::{AnsatzCircuit, Generator};
use crate::bits;
use crate::error::Result;
use crate::operators::{Mapping, PauliString};
use crate::statevector::{Observable, Statevector};
use num_complex::Complex64;

/// One elementary exponential of a compiled circuit.
#[derive(Clone, Debug)]
enum Op {
    /// `exp(angle * c (T - T†))` as explicit basis-state pairs `(x, y, s)`
    /// with `T|x> = s|y>` (Jordan-Wigner basis only).
    Excitation { coeff: f64, pairs: Vec<(u64, u64, f64)> },
    /// `exp(i angle a P)`.
    Rotation { p: PauliString, a: f64 },
}

/// Circuit lowered to elementary exponentials for fast evaluation and
/// adjoint-mode gradients.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    n_qubits: usize,
    reference: Statevector,
    ops: Vec<(Op, usize)>,
    n_params: usize,
}

impl CompiledCircuit {
    pub fn new(c: &AnsatzCircuit) -> Result<Self> {
        let n_qubits = c.n_qubits();
        let sector: Option<Vec<u64>> = if c.mapping == Mapping::JordanWigner {
            Some(c.shape.sector(Mapping::JordanWigner).states().to_vec())
        } else {
            None
        };
        let mut ops = Vec::new();
        for (g, id) in &c.entries {
            match (g, &sector) {
                (Generator::Fermionic(fg), Some(states)) => {
                    for (coeff, e) in &fg.components {
                        let from = bits::occupation_mask(&e.from);
                        let to = bits::occupation_mask(&e.to);
                        let ladder = e.ladder();
                        let pairs = states
                            .iter()
                            .filter(|&&b| b & from == from && b & to == 0)
                            .map(|&b| {
                                let (y, s) = bits::apply_ladder(b, &ladder).expect("pattern admits T");
                                (b, y, s)
                            })
                            .collect();
                        ops.push((Op::Excitation { coeff: *coeff, pairs }, *id));
                    }
                }
                _ => {
                    for (p, a) in g.rotations(c.mapping, n_qubits) {
                        ops.push((Op::Rotation { p, a }, *id));
                    }
                }
            }
        }
        Ok(Self { n_qubits, reference: c.reference_state()?, ops, n_params: c.n_params })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(op: &Op, psi: &mut Statevector, angle: f64) {
        match op {
            Op::Excitation { coeff, pairs } => {
                let (s, c) = (angle * coeff).sin_cos();
                let amps = psi.amplitudes_mut();
                for &(x, y, sign) in pairs {
                    let (ax, ay) = (amps[x as usize], amps[y as usize]);
                    amps[x as usize] = ax * c - ay * (sign * s);
                    amps[y as usize] = ay * c + ax * (sign * s);
                }
            }
            // exp(i t a P) = exp(-i (-2 t a) P / 2)
            Op::Rotation { p, a } => psi.apply_pauli_rotation(p, -2.0 * angle * a),
        }
    }

    /// `<lambda| G |psi>` where `G` is the derivative generator of `op`.
    fn generator_overlap(op: &Op, lambda: &Statevector, psi: &Statevector) -> Complex64 {
        let (l, v) = (lambda.amplitudes(), psi.amplitudes());
        match op {
            Op::Excitation { coeff, pairs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(x, y, s) in pairs {
                    acc += (l[y as usize].conj() * v[x as usize] - l[x as usize].conj() * v[y as usize]) * s;
                }
                acc * coeff
            }
            Op::Rotation { p, a } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (b, vb) in v.iter().enumerate() {
                    if vb.re == 0.0 && vb.im == 0.0 {
                        continue;
                    }
                    let (t, ph) = p.apply(b as u64);
                    acc += l[t as usize].conj() * ph * vb;
                }
                acc * Complex64::new(0.0, *a)
            }
        }
    }

    pub fn state(&self, theta: &[f64]) -> Statevector {
        assert_eq!(theta.len(), self.n_params, "parameter count mismatch");
        let mut psi = self.reference.clone();
        for (op, id) in &self.ops {
            Self::apply(op, &mut psi, theta[*id]);
        }
        psi
    }

    pub fn energy(&self, theta: &[f64], h: &dyn Observable) -> f64 {
        h.expectation(&self.state(theta))
    }

    /// Energy, exact gradient (adjoint sweep) and final state.
    pub fn energy_and_gradient(&self, theta: &[f64], h: &dyn Observable) -> (f64, Vec<f64>, Statevector) {
        let psi_final = self.state(theta);
        let mut lambda = h.apply(&psi_final);
        let energy = psi_final.inner(&lambda).re;
        let mut grad = vec![0.0; self.n_params];
        let mut psi = psi_final.clone();
        for (op, id) in self.ops.iter().rev() {
            grad[*id] += 2.0 * Self::generator_overlap(op, &lambda, &psi).re;
            Self::apply(op, &mut psi, -theta[*id]);
            Self::apply(op, &mut lambda, -theta[*id]);
        }
        (energy, grad, psi_final)
    }

    /// `dE/dtheta` at `theta = 0` of a one-parameter circuit applied on top of
    /// `psi` (`hpsi = H psi`): `2 Re <H psi| G psi>`.
    pub fn zero_angle_derivative(&self, psi: &Statevector, hpsi: &Statevector) -> f64 {
        self.ops.iter().map(|(op, _)| 2.0 * Self::generator_overlap(op, hpsi, psi).re).sum()
    }
}
