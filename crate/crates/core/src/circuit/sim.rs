use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{Gate, GateProgram};
use crate::coin::{rx, ry, rz};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, WalkerState};
use crate::linalg::{vdot, vec_norm, DenseMatrix, Mat2, ONE, ZERO};
use crate::walk::{dense_walk_matrix, WalkOperator};
use crate::Complex64 as C64;

/// Largest register `simulate` accepts.
pub const MAX_SIM_QUBITS: usize = 20;

fn apply_single(state: &mut [C64], q: usize, m: &Mat2) {
    let bit = 1usize << q;
    let [[a, b], [c, d]] = m.0;
    for i in 0..state.len() {
        if i & bit == 0 {
            let (x, y) = (state[i], state[i | bit]);
            state[i] = a * x + b * y;
            state[i | bit] = c * x + d * y;
        }
    }
}

fn apply_gate(state: &mut [C64], gate: &Gate) {
    match gate {
        Gate::X(q) => apply_single(state, *q, &Mat2::pauli_x()),
        Gate::H(q) => {
            let h = ONE * FRAC_1_SQRT_2;
            apply_single(state, *q, &Mat2::new(h, h, h, -h))
        }
        Gate::Rx(q, a) => apply_single(state, *q, &rx(*a)),
        Gate::Ry(q, a) => apply_single(state, *q, &ry(*a)),
        Gate::Rz(q, a) => apply_single(state, *q, &rz(*a)),
        Gate::Mcx { controls, target } => {
            let (mut mask, mut want) = (0usize, 0usize);
            for c in controls {
                mask |= 1 << c.qubit;
                if c.on_one {
                    want |= 1 << c.qubit;
                }
            }
            let t = 1usize << target;
            for i in 0..state.len() {
                if i & t == 0 && i & mask == want {
                    state.swap(i, i | t);
                }
            }
        }
    }
}

/// Runs `program` on `initial` (default `|0...0>`), returning the final
/// register-order statevector, index `c + 2u` plus work qubits above.
pub fn simulate(program: &GateProgram, initial: Option<&[C64]>) -> Result<Vec<C64>> {
    let n = program.qubits();
    if n > MAX_SIM_QUBITS {
        return Err(Error::RegisterTooLarge(n));
    }
    let dim = 1usize << n;
    let mut state = match initial {
        Some(v) if v.len() != dim => return Err(Error::LengthMismatch { expected: dim, found: v.len() }),
        Some(v) => v.to_vec(),
        None => {
            let mut v = vec![ZERO; dim];
            v[0] = ONE;
            v
        }
    };
    for g in program.gates() {
        g.validate(n)?;
        apply_gate(&mut state, g);
    }
    Ok(state)
}

/// Register index `c + 2u` to chirality-major index `c N + u`.
fn register_permutation(lat: Lattice) -> Vec<usize> {
    let n = lat.size();
    (0..2 * n).map(|r| (r & 1) * n + (r >> 1)).collect()
}

/// Reads a `k + 1` qubit register vector as a walker state.
pub fn register_to_walker(v: &[C64], lat: Lattice, basis_phi: f64) -> Result<WalkerState> {
    let perm = register_permutation(lat);
    if v.len() != perm.len() {
        return Err(Error::LengthMismatch { expected: perm.len(), found: v.len() });
    }
    let mut amps = vec![ZERO; v.len()];
    for (r, &i) in perm.iter().enumerate() {
        amps[i] = v[r];
    }
    WalkerState::from_amplitudes(lat, basis_phi, amps)
}

/// Register-order vector of a walker state.
pub fn walker_to_register(s: &WalkerState) -> Vec<C64> {
    let a = s.amplitudes();
    register_permutation(s.lattice()).into_iter().map(|i| a[i]).collect()
}

/// The dense walk operator with rows and columns in register order.
pub fn walk_matrix_register_order(op: &WalkOperator, lat: Lattice) -> Result<DenseMatrix> {
    Ok(dense_walk_matrix(op, lat)?.permuted(&register_permutation(lat)))
}

fn basis_images(program: &GateProgram) -> Result<Vec<Vec<C64>>> {
    let dim = 1usize << program.qubits();
    (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            simulate(program, Some(&e))
        })
        .collect()
}

/// Full unitary of a small program.
pub fn program_matrix(program: &GateProgram) -> Result<DenseMatrix> {
    if program.qubits() > 12 {
        return Err(Error::DenseTooLarge(1 << program.qubits()));
    }
    let cols = basis_images(program)?;
    Ok(DenseMatrix::from_fn(cols.len(), |r, c| cols[c][r]))
}

/// Largest column distance between the program and `reference` after one
/// global phase is removed.
pub fn verify(program: &GateProgram, reference: &DenseMatrix) -> Result<f64> {
    if program.qubits() > MAX_SIM_QUBITS {
        return Err(Error::RegisterTooLarge(program.qubits()));
    }
    let dim = 1usize << program.qubits();
    if reference.dim() != dim {
        return Err(Error::DimensionMismatch { expected: reference.dim(), found: dim });
    }
    let cols = basis_images(program)?;
    let refs: Vec<Vec<C64>> = (0..dim).map(|j| reference.column(j)).collect();
    let overlap: C64 = refs.iter().zip(&cols).map(|(r, p)| vdot(r, p)).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    Ok(refs
        .iter()
        .zip(&cols)
        .map(|(r, p)| {
            let d: Vec<C64> = p.iter().zip(r).map(|(x, y)| x - phase * y).collect();
            vec_norm(&d)
        })
        .fold(0.0, f64::max))
}
