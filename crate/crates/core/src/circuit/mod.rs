//! Gate-level realization of the walk on `k + 1` qubits.
//!
//! Qubit 0 holds the coin; qubits `1..=k` hold the position register,
//! little-endian, so register value `u` is `sum_j bit_j 2^j` with bit `j` on
//! qubit `j + 1` and `u = 0` is `|0...0>`. A statevector index is therefore
//! `c + 2u`. Work qubits needed to lower wide multi-controlled gates are
//! appended after the position register.

mod compile;
mod qasm;
mod sim;

pub use compile::{
    coin_gates, compile_decrement, compile_increment, compile_program, compile_state_prep, compile_step,
    compile_walk, decrement_gates, increment_gates, PositionPrep,
};
pub use qasm::{export_qasm, gate_report, lower, parse_qasm, qasm_round_trip_deviation, GateCountReport, LoweredGate};
pub use sim::{
    program_matrix, register_to_walker, simulate, verify, walk_matrix_register_order, walker_to_register,
    MAX_SIM_QUBITS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::WalkOperator;

/// A control line: the gate fires when `qubit` reads `on_one` (1) or 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Control { qubit, on_one: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Control { qubit, on_one: false }
    }
}

/// Elementary gates. Rotations follow `R_a(t) = exp(-i t sigma_a / 2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    /// Multi-controlled X with per-control polarity.
    Mcx { controls: Vec<Control>, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Mcx { controls, target } => {
                let mut v: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                v.push(*target);
                v
            }
        }
    }

    pub fn validate(&self, qubit_count: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= qubit_count {
                return Err(Error::QubitOutOfRange { qubit: q, count: qubit_count });
            }
            if qs[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) if !a.is_finite() => Err(Error::NonFinite("gate angle")),
            _ => Ok(()),
        }
    }
}

/// Bookkeeping carried alongside the gate list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub steps: usize,
    pub operator: Option<WalkOperator>,
    /// Coin rotations emitted (each a group of at most three single-qubit gates).
    pub coin_blocks: usize,
    /// Coin-controlled increment/decrement blocks emitted.
    pub shift_blocks: usize,
}

/// Ordered gate list on a fixed register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateProgram {
    qubits: usize,
    position_qubits: usize,
    gates: Vec<Gate>,
    pub meta: ProgramMeta,
}

impl GateProgram {
    /// Empty program on a coin qubit plus `position_qubits` position qubits.
    pub fn new(position_qubits: usize) -> Self {
        Self::with_qubits(position_qubits, position_qubits + 1)
    }

    /// Empty program with `qubits` total qubits, of which `1..=position_qubits`
    /// form the position register.
    pub fn with_qubits(position_qubits: usize, qubits: usize) -> Self {
        assert!(qubits > position_qubits, "register must hold the coin and position qubits");
        GateProgram { qubits, position_qubits, gates: Vec::new(), meta: ProgramMeta::default() }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn position_qubits(&self) -> usize {
        self.position_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends `other`, adding its counters to ours.
    pub fn append(&mut self, other: &GateProgram) -> Result<()> {
        if other.qubits > self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: other.qubits });
        }
        self.extend(other.gates.iter().cloned())?;
        self.meta.steps += other.meta.steps;
        self.meta.coin_blocks += other.meta.coin_blocks;
        self.meta.shift_blocks += other.meta.shift_blocks;
        if self.meta.operator.is_none() {
            self.meta.operator = other.meta.operator;
        }
        Ok(())
    }

    /// Number of multi-controlled gates (including plain X, CX).
    pub fn mcx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Mcx { .. })).count()
    }

    /// Number of single-qubit rotations.
    pub fn rotation_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Rx(..) | Gate::Ry(..) | Gate::Rz(..))).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_validation() {
        let mut p = GateProgram::new(2);
        assert!(p.push(Gate::X(2)).is_ok());
        assert!(matches!(p.push(Gate::X(3)), Err(Error::QubitOutOfRange { qubit: 3, count: 3 })));
        let dup = Gate::Mcx { controls: vec![Control::one(1)], target: 1 };
        assert!(matches!(p.push(dup), Err(Error::DuplicateQubit(1))));
        assert!(p.push(Gate::Rx(0, f64::INFINITY)).is_err());
        assert_eq!(p.len(), 1);
    }
}
