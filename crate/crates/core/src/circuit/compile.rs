use serde::{Deserialize, Serialize};

use super::{Control, Gate, GateProgram};
use crate::coin::CoinSpec;
use crate::error::{Error, Result};
use crate::lattice::MAX_POSITION_QUBITS;
use crate::walk::WalkOperator;

const COIN: usize = 0;

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > MAX_POSITION_QUBITS as usize {
        return Err(Error::InvalidQubitCount(k as u32));
    }
    Ok(())
}

/// Carry cascade `u -> u + 1 (mod 2^k)`, optionally gated on the coin.
///
/// Bit `j` (qubit `j + 1`) flips when all lower bits are one, so the
/// highest bit goes first.
pub fn increment_gates(k: usize, coin_control: Option<bool>) -> Vec<Gate> {
    (1..=k)
        .rev()
        .map(|j| {
            let mut controls: Vec<Control> = (1..j).map(Control::one).collect();
            if let Some(on_one) = coin_control {
                controls.push(Control { qubit: COIN, on_one });
            }
            Gate::Mcx { controls, target: j }
        })
        .collect()
}

/// Inverse of [`increment_gates`]: same gates, reversed.
pub fn decrement_gates(k: usize, coin_control: Option<bool>) -> Vec<Gate> {
    let mut g = increment_gates(k, coin_control);
    g.reverse();
    g
}

fn lower_mcx_zero(gates: Vec<Gate>) -> Vec<Gate> {
    // Uncontrolled single-target MCX is just X; keep the program readable.
    gates
        .into_iter()
        .map(|g| match g {
            Gate::Mcx { controls, target } if controls.is_empty() => Gate::X(target),
            other => other,
        })
        .collect()
}

pub fn compile_increment(k: usize) -> Result<GateProgram> {
    check_k(k)?;
    let mut p = GateProgram::new(k);
    p.extend(lower_mcx_zero(increment_gates(k, None)))?;
    Ok(p)
}

pub fn compile_decrement(k: usize) -> Result<GateProgram> {
    check_k(k)?;
    let mut p = GateProgram::new(k);
    p.extend(lower_mcx_zero(decrement_gates(k, None)))?;
    Ok(p)
}

/// `B_phi(theta)` on the coin qubit in circuit order `RZ(-phi), RX(theta), RZ(phi)`.
/// Identity coins produce no gates and zero-angle axis rotations are dropped.
pub fn coin_gates(coin: &CoinSpec) -> Vec<Gate> {
    if coin.is_identity() {
        return Vec::new();
    }
    let phi = coin.phi();
    let mut g = Vec::with_capacity(3);
    if phi != 0.0 {
        g.push(Gate::Rz(COIN, -phi));
    }
    g.push(Gate::Rx(COIN, coin.theta()));
    if phi != 0.0 {
        g.push(Gate::Rz(COIN, phi));
    }
    g
}

enum Block {
    Coin(CoinSpec),
    /// Right movers (coin 1) step up.
    Inc,
    /// Left movers (coin 0) step down.
    Dec,
}

fn blocks(op: &WalkOperator) -> Vec<Block> {
    use Block::*;
    match *op {
        WalkOperator::Sb { coin } => vec![Coin(coin), Inc, Dec],
        WalkOperator::Bs { coin } => vec![Inc, Dec, Coin(coin)],
        WalkOperator::Bsb { coin } => vec![Coin(coin.half()), Inc, Dec, Coin(coin.half())],
        WalkOperator::Sbs { coin } => vec![Dec, Coin(coin), Inc],
        WalkOperator::Sqw { first, second } => vec![Coin(first), Dec, Coin(second), Inc],
    }
}

/// One walk step on `k` position qubits.
pub fn compile_step(op: &WalkOperator, k: usize) -> Result<GateProgram> {
    check_k(k)?;
    let mut p = GateProgram::new(k);
    for b in blocks(op) {
        match b {
            Block::Coin(c) => {
                let g = coin_gates(&c);
                if !g.is_empty() {
                    p.meta.coin_blocks += 1;
                }
                p.extend(g)?;
            }
            Block::Inc => {
                p.extend(increment_gates(k, Some(true)))?;
                p.meta.shift_blocks += 1;
            }
            Block::Dec => {
                p.extend(decrement_gates(k, Some(false)))?;
                p.meta.shift_blocks += 1;
            }
        }
    }
    p.meta.steps = 1;
    p.meta.operator = Some(*op);
    Ok(p)
}

/// `steps` repetitions of [`compile_step`].
pub fn compile_walk(op: &WalkOperator, k: usize, steps: usize) -> Result<GateProgram> {
    let one = compile_step(op, k)?;
    let mut p = GateProgram::new(k);
    p.meta.operator = Some(*op);
    for _ in 0..steps {
        p.append(&one)?;
    }
    Ok(p)
}

/// Position part of a prepared state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositionPrep {
    /// Walker at `u = 0`.
    Origin,
    /// Equal superposition over all sites.
    Uniform,
}

/// Prepares `(cos(theta0/2), e^{i phi0} sin(theta0/2))` on the coin, up to
/// a global phase, and the requested position state.
pub fn compile_state_prep(theta0: f64, phi0: f64, position: PositionPrep, k: usize) -> Result<GateProgram> {
    check_k(k)?;
    let mut p = GateProgram::new(k);
    if theta0 != 0.0 {
        p.push(Gate::Ry(COIN, theta0))?;
    }
    if phi0 != 0.0 {
        p.push(Gate::Rz(COIN, phi0))?;
    }
    if position == PositionPrep::Uniform {
        p.extend((1..=k).map(Gate::H))?;
    }
    Ok(p)
}

/// State preparation followed by `steps` walk steps.
pub fn compile_program(
    theta0: f64,
    phi0: f64,
    position: PositionPrep,
    op: &WalkOperator,
    k: usize,
    steps: usize,
) -> Result<GateProgram> {
    let mut p = compile_state_prep(theta0, phi0, position, k)?;
    p.append(&compile_walk(op, k, steps)?)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::Variant;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn increment_k3_has_three_gates() {
        let p = compile_increment(3).unwrap();
        assert_eq!(p.len(), 3);
        let widths: Vec<usize> = p
            .gates()
            .iter()
            .map(|g| match g {
                Gate::Mcx { controls, .. } => controls.len(),
                Gate::X(_) => 0,
                _ => panic!("unexpected gate"),
            })
            .collect();
        assert_eq!(widths, vec![2, 1, 0]);
    }

    #[test]
    fn bsb_has_same_shift_blocks_as_sb_and_one_more_coin() {
        let c = CoinSpec::new(0.7, FRAC_PI_2).unwrap();
        for k in 1..=4 {
            let sb = compile_step(&WalkOperator::new(Variant::Sb, c), k).unwrap();
            let bsb = compile_step(&WalkOperator::new(Variant::Bsb, c), k).unwrap();
            assert_eq!(sb.meta.shift_blocks, bsb.meta.shift_blocks);
            assert_eq!(sb.mcx_count(), bsb.mcx_count());
            assert_eq!(bsb.meta.coin_blocks, sb.meta.coin_blocks + 1);
        }
    }

    #[test]
    fn zero_theta_is_shift_only() {
        let c = CoinSpec::new(0.0, FRAC_PI_2).unwrap();
        for v in Variant::ALL {
            let p = compile_step(&WalkOperator::new(v, c), 3).unwrap();
            assert_eq!(p.rotation_count(), 0, "{v}");
            assert_eq!(p.meta.coin_blocks, 0);
        }
    }

    #[test]
    fn dirac_basis_coin_is_bare_rx() {
        let g = coin_gates(&CoinSpec::new(0.4, 0.0).unwrap());
        assert_eq!(g, vec![Gate::Rx(0, 0.4)]);
    }

    #[test]
    fn zero_k_rejected() {
        assert!(compile_increment(0).is_err());
        assert!(compile_step(&WalkOperator::new(Variant::Sb, CoinSpec::identity(0.0)), 0).is_err());
    }
}
