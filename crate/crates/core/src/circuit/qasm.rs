use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{sim::simulate, Control, Gate, GateProgram};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, ONE, ZERO};
use crate::Complex64 as C64;

/// Gates of the exported text: the `qelib1.inc` subset we emit.
#[derive(Clone, Debug, PartialEq)]
pub enum LoweredGate {
    X(usize),
    H(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cx(usize, usize),
    Ccx(usize, usize, usize),
}

impl LoweredGate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            LoweredGate::X(q) | LoweredGate::H(q) | LoweredGate::Rx(q, _) | LoweredGate::Ry(q, _) | LoweredGate::Rz(q, _) => {
                vec![q]
            }
            LoweredGate::Cx(c, t) => vec![c, t],
            LoweredGate::Ccx(a, b, t) => vec![a, b, t],
        }
    }

    fn to_gate(&self) -> Gate {
        match *self {
            LoweredGate::X(q) => Gate::X(q),
            LoweredGate::H(q) => Gate::H(q),
            LoweredGate::Rx(q, a) => Gate::Rx(q, a),
            LoweredGate::Ry(q, a) => Gate::Ry(q, a),
            LoweredGate::Rz(q, a) => Gate::Rz(q, a),
            LoweredGate::Cx(c, t) => Gate::Mcx { controls: vec![Control::one(c)], target: t },
            LoweredGate::Ccx(a, b, t) => Gate::Mcx { controls: vec![Control::one(a), Control::one(b)], target: t },
        }
    }
}

/// Work qubits needed to lower the widest MCX.
fn work_qubits(program: &GateProgram) -> usize {
    program
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Mcx { controls, .. } => controls.len().saturating_sub(2),
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}

/// Toffoli V-chain: `m > 2` controls, `m - 2` clean work qubits starting
/// at `work`, each returned to `|0>`.
fn v_chain(c: &[usize], target: usize, work: usize, out: &mut Vec<LoweredGate>) {
    let m = c.len();
    let a = |i: usize| work + i;
    let mut compute = vec![LoweredGate::Ccx(c[0], c[1], a(0))];
    for (i, &ci) in c.iter().enumerate().take(m - 1).skip(2) {
        compute.push(LoweredGate::Ccx(ci, a(i - 2), a(i - 1)));
    }
    out.extend(compute.iter().cloned());
    out.push(LoweredGate::Ccx(c[m - 1], a(m - 3), target));
    out.extend(compute.into_iter().rev());
}

/// Lowers `program` to one- to three-qubit gates. Returns the gates and the
/// total register width including work qubits.
pub fn lower(program: &GateProgram) -> (Vec<LoweredGate>, usize) {
    let work = program.qubits();
    let total = work + work_qubits(program);
    let mut out = Vec::new();
    for g in program.gates() {
        match g {
            Gate::X(q) => out.push(LoweredGate::X(*q)),
            Gate::H(q) => out.push(LoweredGate::H(*q)),
            Gate::Rx(q, a) => out.push(LoweredGate::Rx(*q, *a)),
            Gate::Ry(q, a) => out.push(LoweredGate::Ry(*q, *a)),
            Gate::Rz(q, a) => out.push(LoweredGate::Rz(*q, *a)),
            Gate::Mcx { controls, target } => {
                let flips: Vec<usize> = controls.iter().filter(|c| !c.on_one).map(|c| c.qubit).collect();
                out.extend(flips.iter().map(|&q| LoweredGate::X(q)));
                let c: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                match c.len() {
                    0 => out.push(LoweredGate::X(*target)),
                    1 => out.push(LoweredGate::Cx(c[0], *target)),
                    2 => out.push(LoweredGate::Ccx(c[0], c[1], *target)),
                    _ => v_chain(&c, *target, work, &mut out),
                }
                out.extend(flips.iter().map(|&q| LoweredGate::X(q)));
            }
        }
    }
    (out, total)
}

/// OpenQASM 2.0 text for `program`.
pub fn export_qasm(program: &GateProgram) -> String {
    let (gates, total) = lower(program);
    let k = program.position_qubits();
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    s.push_str("// q[0]: coin, 0 = left mover, 1 = right mover\n");
    if k > 0 {
        let _ = writeln!(s, "// q[1..{k}]: position register, little-endian (q[1] = bit 0), u = 0 is |0...0>");
    }
    if total > program.qubits() {
        let _ = writeln!(s, "// q[{}..{}]: clean work qubits, returned to |0>", program.qubits(), total - 1);
    }
    let _ = writeln!(s, "// position_qubits: {k}");
    if let Some(op) = &program.meta.operator {
        let _ = writeln!(s, "// walk: {} x {} steps", op.variant(), program.meta.steps);
    }
    let _ = writeln!(s, "qreg q[{total}];");
    for g in &gates {
        let _ = match *g {
            LoweredGate::X(q) => writeln!(s, "x q[{q}];"),
            LoweredGate::H(q) => writeln!(s, "h q[{q}];"),
            LoweredGate::Rx(q, a) => writeln!(s, "rx({a}) q[{q}];"),
            LoweredGate::Ry(q, a) => writeln!(s, "ry({a}) q[{q}];"),
            LoweredGate::Rz(q, a) => writeln!(s, "rz({a}) q[{q}];"),
            LoweredGate::Cx(c, t) => writeln!(s, "cx q[{c}],q[{t}];"),
            LoweredGate::Ccx(a, b, t) => writeln!(s, "ccx q[{a}],q[{b}],q[{t}];"),
        };
    }
    s
}

fn parse_angle(text: &str) -> Option<f64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let factor = match num {
        "pi" => 1.0,
        _ => num.strip_suffix("*pi")?.parse::<f64>().ok()?,
    };
    Some(sign * factor * PI / den)
}

fn parse_qubit(text: &str) -> Option<usize> {
    text.trim().strip_prefix("q[")?.strip_suffix(']')?.parse().ok()
}

/// Parses the subset of OpenQASM 2.0 that [`export_qasm`] writes.
pub fn parse_qasm(text: &str) -> Result<GateProgram> {
    let err = |line: usize, message: &str| Error::QasmParse { line, message: message.to_string() };
    let mut position_qubits: Option<usize> = None;
    let mut program: Option<GateProgram> = None;
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (code, comment) = match raw.split_once("//") {
            Some((c, m)) => (c.trim(), Some(m.trim())),
            None => (raw.trim(), None),
        };
        if let Some(v) = comment.and_then(|m| m.strip_prefix("position_qubits:")) {
            position_qubits = Some(v.trim().parse().map_err(|_| err(line, "bad position_qubits"))?);
        }
        if code.is_empty() {
            continue;
        }
        let stmt = code.strip_suffix(';').ok_or_else(|| err(line, "missing ';'"))?.trim();
        if !seen_header {
            if stmt != "OPENQASM 2.0" {
                return Err(err(line, "expected OPENQASM 2.0 header"));
            }
            seen_header = true;
            continue;
        }
        if stmt.starts_with("include") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            if program.is_some() {
                return Err(err(line, "only one register is supported"));
            }
            let n = parse_qubit(rest).ok_or_else(|| err(line, "bad qreg"))?;
            if n == 0 {
                return Err(err(line, "empty register"));
            }
            let k = position_qubits.unwrap_or(n - 1);
            if k >= n {
                return Err(err(line, "position register larger than qreg"));
            }
            program = Some(GateProgram::with_qubits(k, n));
            continue;
        }
        let p = program.as_mut().ok_or_else(|| err(line, "gate before qreg"))?;
        let (head, operands) = match stmt.find(" q[") {
            Some(i) => stmt.split_at(i),
            None => return Err(err(line, "missing operands")),
        };
        let qs: Vec<usize> = operands
            .split(',')
            .map(parse_qubit)
            .collect::<Option<_>>()
            .ok_or_else(|| err(line, "bad operand"))?;
        let (name, arg) = match head.split_once('(') {
            Some((n, a)) => {
                let a = a.strip_suffix(')').ok_or_else(|| err(line, "unclosed parameter"))?;
                (n.trim(), Some(parse_angle(a).ok_or_else(|| err(line, "bad angle"))?))
            }
            None => (head.trim(), None),
        };
        let lowered = match (name, arg, qs.as_slice()) {
            ("x", None, &[q]) => LoweredGate::X(q),
            ("h", None, &[q]) => LoweredGate::H(q),
            ("rx", Some(a), &[q]) => LoweredGate::Rx(q, a),
            ("ry", Some(a), &[q]) => LoweredGate::Ry(q, a),
            ("rz", Some(a), &[q]) => LoweredGate::Rz(q, a),
            ("cx", None, &[c, t]) => LoweredGate::Cx(c, t),
            ("ccx", None, &[a, b, t]) => LoweredGate::Ccx(a, b, t),
            _ => return Err(err(line, &format!("unsupported statement '{stmt}'"))),
        };
        p.push(lowered.to_gate()).map_err(|e| err(line, &e.to_string()))?;
    }
    program.ok_or_else(|| err(text.lines().count().max(1), "no qreg declared"))
}

/// Exports, re-parses and re-simulates `program` on every computational
/// basis input, with work qubits starting in `|0>`. Returns the largest
/// output distance from the in-memory simulation; a work qubit left dirty
/// shows up as a large distance.
pub fn qasm_round_trip_deviation(program: &GateProgram) -> Result<f64> {
    let parsed = parse_qasm(&export_qasm(program))?;
    let dim = 1usize << program.qubits();
    let wide = 1usize << parsed.qubits();
    let devs: Vec<f64> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            let direct = simulate(program, Some(&e))?;
            let mut e_wide = vec![ZERO; wide];
            e_wide[j] = ONE;
            let via = simulate(&parsed, Some(&e_wide))?;
            let d: Vec<C64> = (0..wide).map(|i| via[i] - direct.get(i).copied().unwrap_or(ZERO)).collect();
            Ok(vec_norm(&d))
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Gate counts for a compiled program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCountReport {
    pub logical_gates: usize,
    pub decomposed_gates: usize,
    pub depth_estimate: usize,
    pub steps: usize,
    pub qubits: usize,
    pub work_qubits: usize,
    pub coin_blocks: usize,
    pub shift_blocks: usize,
}

/// Counts both the logical program and its lowered form. Depth is the
/// as-soon-as-possible layering of the lowered gates.
pub fn gate_report(program: &GateProgram) -> GateCountReport {
    let (gates, total) = lower(program);
    let mut level = vec![0usize; total];
    for g in &gates {
        let qs = g.qubits();
        let d = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for q in qs {
            level[q] = d;
        }
    }
    GateCountReport {
        logical_gates: program.len(),
        decomposed_gates: gates.len(),
        depth_estimate: level.into_iter().max().unwrap_or(0),
        steps: program.meta.steps,
        qubits: total,
        work_qubits: total - program.qubits(),
        coin_blocks: program.meta.coin_blocks,
        shift_blocks: program.meta.shift_blocks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{compile_step, compile_walk};
    use crate::coin::CoinSpec;
    use crate::walk::{Variant, WalkOperator};

    #[test]
    fn single_x() {
        let mut p = GateProgram::new(1);
        p.push(Gate::X(0)).unwrap();
        let text = export_qasm(&p);
        assert!(text.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
        assert!(text.lines().any(|l| l == "x q[0];"));
        assert!(text.lines().any(|l| l == "qreg q[2];"));
    }

    #[test]
    fn negative_control_is_x_conjugated() {
        let mut p = GateProgram::new(1);
        p.push(Gate::Mcx { controls: vec![Control::zero(0)], target: 1 }).unwrap();
        let text = export_qasm(&p);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with("//")).skip(3).collect();
        assert_eq!(body, vec!["x q[0];", "cx q[0],q[1];", "x q[0];"]);
    }

    #[test]
    fn v_chain_round_trip() {
        let c = CoinSpec::new(0.9, 1.1).unwrap();
        for v in Variant::ALL {
            let p = compile_walk(&WalkOperator::new(v, c), 4, 2).unwrap();
            let r = gate_report(&p);
            assert_eq!(r.work_qubits, 2, "k = 4 with a coin control needs 5-control MCX");
            assert!(qasm_round_trip_deviation(&p).unwrap() < 1e-10);
        }
    }

    #[test]
    fn parse_pi_angles() {
        assert_eq!(parse_angle("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_angle("-3*pi/4"), Some(-3.0 * PI / 4.0));
        assert_eq!(parse_angle("0.25"), Some(0.25));
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn parse_errors_have_line_numbers() {
        let bad = "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n";
        assert!(matches!(parse_qasm(bad), Err(Error::QasmParse { line: 3, .. })));
        assert!(matches!(parse_qasm("qreg q[2];"), Err(Error::QasmParse { line: 1, .. })));
        assert!(matches!(
            parse_qasm("OPENQASM 2.0;\nqreg q[2];\nx q[5];\n"),
            Err(Error::QasmParse { line: 3, .. })
        ));
    }

    #[test]
    fn report_counts() {
        let op = WalkOperator::new(Variant::Sb, CoinSpec::new(0.5, 0.0).unwrap());
        let p = compile_step(&op, 3).unwrap();
        let r = gate_report(&p);
        // one RX, two blocks of three MCX
        assert_eq!(r.logical_gates, 7);
        assert_eq!(r.shift_blocks, 2);
        assert_eq!(r.coin_blocks, 1);
        assert!(r.decomposed_gates > r.logical_gates);
        assert!(r.depth_estimate <= r.decomposed_gates);
    }
}
