use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{rngs::StdRng, Rng, SeedableRng};
use serde_json::{json, Value};

use qwalk_core::circuit::{
    compile_state_prep, compile_step, compile_walk, export_qasm, gate_report, qasm_round_trip_deviation,
    register_to_walker, simulate, verify, walk_matrix_register_order, PositionPrep,
};
use qwalk_core::coin::{CoinSpec, WEYL_DIRAC, WEYL_MAJORANA};
use qwalk_core::lattice::{build_state, change_basis, InitialStateSpec, Lattice, WalkerState};
use qwalk_core::linalg::{vdot, DenseMatrix};
use qwalk_core::momentum::{dispersion_table, expected_local_order, max_group_velocity, order_fit};
use qwalk_core::observables::{alpha_from_form, bloch_sweep, x_moment_form};
use qwalk_core::walk::{evolve, evolve_state, step, Observe, Variant, WalkOperator};

use crate::init::InitSpec;
use crate::{
    AlphaArgs, BlochArgs, CheckArgs, CircuitArgs, DispersionArgs, EntropyArgs, ObserveItem, OrderArgs, RunArgs,
    UsageError, Verdict, VerifyMode,
};

/// Numerical agreement demanded of verification checks.
const VERIFY_TOL: f64 = 1e-10;

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn json(&self, name: &str, value: &Value) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn coin(theta: f64, phi: f64) -> Result<CoinSpec> {
    Ok(CoinSpec::new(theta, phi)?)
}

/// Basis the operator's coins live in.
fn basis_of(op: &WalkOperator) -> f64 {
    op.coin().phi()
}

/// `min_a ||a - e^{ia} b||`, formed explicitly.
fn phase_aligned_distance(a: &[qwalk_core::Complex64], b: &[qwalk_core::Complex64]) -> f64 {
    let ov = vdot(b, a);
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { qwalk_core::Complex64::new(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x - ph * y).norm_sqr()).sum::<f64>().sqrt()
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub fn run(a: &RunArgs, out: &Path) -> Result<Verdict> {
    let op = a.op.operator()?;
    let k = match (a.qubits, a.init.own_qubits()?) {
        (Some(q), _) | (None, Some(q)) => q,
        (None, None) => 7,
    };
    let lat = Lattice::new(k)?;
    let s0 = a.init.build(lat, basis_of(&op))?;
    let observe = if a.observe.contains(&ObserveItem::All) {
        Observe::all()
    } else {
        Observe {
            distribution: a.observe.contains(&ObserveItem::Distribution),
            chirality: a.observe.contains(&ObserveItem::Chirality),
            entropy: a.observe.contains(&ObserveItem::Entropy),
            mean_x: a.observe.contains(&ObserveItem::MeanX),
        }
    };
    let ev = evolve(&s0, &op, a.steps, observe)?;
    let rec = &ev.record;
    if rec.wraparound {
        eprintln!(
            "warning: {} steps on {} sites can wrap around the lattice; signed <x> is not reported",
            a.steps,
            lat.size()
        );
    }

    let o = Output::new(out)?;
    let mut files = vec!["observables.csv", "final_state.json"];
    if let Some(csv) = rec.to_csv() {
        o.write("spacetime.csv", &csv)?;
        files.push("spacetime.csv");
    }
    o.write("observables.csv", &rec.observables_csv())?;
    o.write("final_state.json", &ev.final_state.to_json()?)?;
    let mut meta = rec.metadata_json(Some(&a.init.to_string()));
    meta["command"] = json!("run");
    meta["files"] = json!(files);
    meta["csv_columns"] = json!({
        "spacetime.csv": "t,x,P with x signed and ascending",
        "observables.csv": "t,pL,pR,entropy,mean_x (entropy in bits, empty when not recorded)",
    });
    o.json("spacetime.json", &meta)?;
    Ok(Verdict::Pass)
}

pub fn dispersion(a: &DispersionArgs, out: &Path) -> Result<Verdict> {
    if a.points == 0 {
        return Err(usage("--points must be positive"));
    }
    let mut csv = String::from("variant,k,omega_minus,omega_plus,omega_closed_form\n");
    let mut max_dev = 0.0f64;
    for &v in &a.ops {
        let op = WalkOperator::new(v, coin(a.theta, a.phi)?);
        for r in dispersion_table(&op, a.points)? {
            csv.push_str(&format!("{v},{},{},{},{}\n", r.k, r.omega_minus, r.omega_plus, r.omega_closed_form));
            max_dev = max_dev.max((r.omega_plus - r.omega_closed_form).abs()).max((r.omega_minus + r.omega_closed_form).abs());
        }
    }
    let vg = max_group_velocity(a.theta, a.phi, a.points.max(64))?;
    let vg_expected = (a.theta / 2.0).cos().abs();
    let pass = max_dev < VERIFY_TOL && (vg - vg_expected).abs() < 1e-6;

    let o = Output::new(out)?;
    o.write("dispersion.csv", &csv)?;
    o.json(
        "dispersion.json",
        &json!({
            "command": "dispersion",
            "theta": a.theta,
            "phi": a.phi,
            "points": a.points,
            "variants": a.ops.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "closed_form": "cos(omega) = cos(theta/2) cos(k)",
            "max_deviation": max_dev,
            "max_group_velocity": vg,
            "expected_group_velocity": vg_expected,
            "pass": pass,
        }),
    )?;
    println!(
        "dispersion: max deviation {max_dev:.2e}, max group velocity {vg:.9} (cos(theta/2) = {vg_expected:.9}): {}",
        if pass { "pass" } else { "FAIL" }
    );
    Ok(verdict(pass))
}

pub fn order(a: &OrderArgs, out: &Path) -> Result<Verdict> {
    let o = Output::new(out)?;
    let mut all_pass = true;
    let mut summary = serde_json::Map::new();
    for &v in &a.ops {
        let expected = expected_local_order(v)
            .ok_or_else(|| usage(format!("{v} has no single-coin continuum limit to fit an order against")))?;
        let fit = order_fit(v, a.kappa, a.m, a.phi, &a.eps)?;
        let pass = (fit.fitted_slope - expected).abs() <= 0.1;
        all_pass &= pass;
        o.write(&format!("order_{v}.csv"), &fit.to_csv())?;
        println!("{v}: slope {:.4} (expected {expected}): {}", fit.fitted_slope, if pass { "pass" } else { "FAIL" });
        summary.insert(
            v.name().into(),
            json!({ "slope": fit.fitted_slope, "expected": expected, "pass": pass, "errors": fit.errors }),
        );
    }
    o.json(
        "order.json",
        &json!({
            "command": "order",
            "kappa": a.kappa,
            "m": a.m,
            "phi": a.phi,
            "eps": a.eps,
            "tolerance": 0.1,
            "results": summary,
        }),
    )?;
    Ok(verdict(all_pass))
}

/// Closed form of alpha after a single step, where one is known.
fn alpha_t1(v: Variant, theta: f64) -> Option<f64> {
    if !(0.0..std::f64::consts::PI).contains(&theta) {
        return None;
    }
    match v {
        Variant::Sb => Some(theta),
        Variant::Bsb => Some(theta / 2.0),
        Variant::Sbs => Some(0.0),
        _ => None,
    }
}

pub fn alpha(a: &AlphaArgs, out: &Path) -> Result<Verdict> {
    let thetas: Vec<f64> = match &a.thetas {
        Some(t) => t.clone(),
        None if a.points == 0 => return Err(usage("--points must be positive")),
        None => (0..a.points).map(|j| std::f64::consts::PI * j as f64 / a.points as f64).collect(),
    };
    let lat = Lattice::new(a.qubits)?;
    let mut csv = String::from("variant,theta,T,alpha,alpha_closed_form_t1,b_y\n");
    let (mut closed_dev, mut max_by) = (0.0f64, 0.0f64);
    for &v in &a.ops {
        for &t in &a.steps {
            for &theta in &thetas {
                let op = WalkOperator::new(v, coin(theta, a.phi)?);
                let form = x_moment_form(&op, t, lat)?;
                let alpha = alpha_from_form(&form)?;
                let closed = if t == 1 { alpha_t1(v, theta) } else { None };
                if let Some(c) = closed {
                    closed_dev = closed_dev.max((alpha - c).abs());
                }
                max_by = max_by.max(form.b[1].abs());
                let cell = closed.map(|c| c.to_string()).unwrap_or_default();
                csv.push_str(&format!("{v},{theta},{t},{alpha},{cell},{}\n", form.b[1]));
            }
        }
    }
    let pass = closed_dev < VERIFY_TOL;
    let o = Output::new(out)?;
    o.write("alpha.csv", &csv)?;
    o.json(
        "alpha.json",
        &json!({
            "command": "alpha",
            "phi": a.phi,
            "k": a.qubits,
            "steps": a.steps,
            "thetas": thetas,
            "variants": a.ops.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "definition": "alpha = atan2(b_x, -b_z) of <x> = b0 + b . n over initial coin states n",
            "max_closed_form_deviation_t1": closed_dev,
            "max_abs_b_y": max_by,
            "pass": pass,
        }),
    )?;
    println!("alpha: T=1 closed-form deviation {closed_dev:.2e}, max |b_y| {max_by:.2e}");
    Ok(verdict(pass))
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

pub fn entropy(a: &EntropyArgs, out: &Path) -> Result<Verdict> {
    let (w0, w1) = a.window;
    if w1 > a.steps {
        return Err(usage(format!("window end {w1} exceeds --steps {}", a.steps)));
    }
    let lat = Lattice::new(a.qubits)?;
    let observe = Observe { distribution: false, chirality: false, entropy: true, mean_x: false };
    let mut csv = String::from("variant,phi0,t,entropy\n");
    let mut series = Vec::new();
    for &v in &a.ops {
        let op = WalkOperator::new(v, coin(a.theta, a.phi)?);
        for &phi0 in &a.phi0s {
            let s0 = build_state(&InitialStateSpec::point(a.theta0, phi0, 0), lat, a.phi)?;
            let s = evolve(&s0, &op, a.steps, observe)?.record.entropy.expect("entropy was requested");
            for (t, e) in s.iter().enumerate() {
                csv.push_str(&format!("{v},{phi0},{t},{e}\n"));
            }
            let (mean, variance) = mean_var(&s[w0..=w1]);
            series.push(json!({
                "variant": v.name(),
                "phi0": phi0,
                "mean": mean,
                "variance": variance,
                "min": s.iter().cloned().fold(f64::INFINITY, f64::min),
                "max": s.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                "initial": s[0],
            }));
            println!("{v} phi0={phi0:.4}: mean {mean:.6}, variance {variance:.3e} over t in [{w0}, {w1}]");
        }
    }
    let o = Output::new(out)?;
    o.write("entropy.csv", &csv)?;
    o.json(
        "entropy.json",
        &json!({
            "command": "entropy",
            "theta": a.theta,
            "phi": a.phi,
            "theta0": a.theta0,
            "k": a.qubits,
            "steps": a.steps,
            "window": [w0, w1],
            "units": "bits",
            "series": series,
        }),
    )?;
    Ok(Verdict::Pass)
}

pub fn bloch(a: &BlochArgs, out: &Path) -> Result<Verdict> {
    let op = a.op.operator()?;
    let lat = Lattice::new(a.qubits)?;
    let res = bloch_sweep(&op, a.steps, lat, a.resolution)?;
    let mut csv = String::from("theta0,phi0,mean_x,form_value\n");
    for s in &res.samples {
        csv.push_str(&format!("{},{},{},{}\n", s.theta0, s.phi0, s.mean_x, res.form.value(s.theta0, s.phi0)));
    }
    let alpha = alpha_from_form(&res.form).ok();
    let o = Output::new(out)?;
    o.write("bloch.csv", &csv)?;
    o.json(
        "bloch.json",
        &json!({
            "command": "bloch",
            "operator": op,
            "k": a.qubits,
            "steps": a.steps,
            "resolution": a.resolution,
            "b0": res.form.b0,
            "b": res.form.b,
            "alpha": alpha,
            "max_form_deviation": res.max_form_deviation,
        }),
    )?;
    println!("bloch: max deviation from moment form {:.2e}", res.max_form_deviation);
    Ok(Verdict::Pass)
}

pub fn circuit(a: &CircuitArgs, out: &Path) -> Result<Verdict> {
    let op = a.op.operator()?;
    let lat = Lattice::new(a.qubits)?;
    let k = a.qubits as usize;
    let (theta0, phi0, prep) = match a.init {
        InitSpec::Point { theta0, phi0, x0: 0 } => (theta0, phi0, PositionPrep::Origin),
        InitSpec::Uniform { theta0, phi0 } => (theta0, phi0, PositionPrep::Uniform),
        _ => return Err(usage("circuit --init supports a point source at x0=0 or uniform")),
    };
    let walk = compile_walk(&op, k, a.steps)?;
    let mut program = compile_state_prep(theta0, phi0, prep, k)?;
    program.append(&walk)?;
    let report = gate_report(&program);

    let dense_ok = match a.verify {
        VerifyMode::Never => false,
        VerifyMode::Auto => k <= 3,
        VerifyMode::Always if k > 6 => return Err(usage("dense verification needs --qubits <= 6")),
        VerifyMode::Always => true,
    };
    let dense_dev = if dense_ok {
        let w = walk_matrix_register_order(&op, lat)?;
        let mut r = DenseMatrix::identity(w.dim());
        for _ in 0..a.steps {
            r = &w * &r;
        }
        Some(verify(&walk, &r)?)
    } else {
        None
    };
    let trip_dev = if a.verify != VerifyMode::Never && k <= 6 { Some(qasm_round_trip_deviation(&program)?) } else { None };
    let state_dev = if a.verify != VerifyMode::Never && program.qubits() <= qwalk_core::circuit::MAX_SIM_QUBITS {
        let basis = basis_of(&op);
        let got = register_to_walker(&simulate(&program, None)?, lat, basis)?;
        let want = evolve_state(&a.init.build(lat, basis)?, &op, a.steps)?;
        Some(phase_aligned_distance(got.amplitudes(), want.amplitudes()))
    } else {
        None
    };
    let checks: Vec<f64> = [dense_dev, trip_dev, state_dev].into_iter().flatten().collect();
    let worst = checks.iter().cloned().fold(0.0, f64::max);
    let (pass, text) = if checks.is_empty() {
        (true, "skipped".to_string())
    } else if worst < VERIFY_TOL {
        (true, "pass (<1e-10)".to_string())
    } else {
        (false, format!("fail (max deviation {worst:.3e})"))
    };

    let o = Output::new(out)?;
    o.write("circuit.qasm", &export_qasm(&program))?;
    let mut counts = serde_json::to_value(&report)?;
    counts["coin_rotations"] = json!(walk.rotation_count());
    o.json(
        "circuit.json",
        &json!({
            "command": "circuit",
            "operator": op,
            "k": k,
            "steps": a.steps,
            "init": a.init.to_string(),
            "layout": {
                "coin": "q[0]",
                "position": format!("q[1..{k}], little-endian, u = 0 is |0...0>"),
                "work_qubits": report.work_qubits,
            },
            "gate_counts": counts,
            "verification": {
                "dense_deviation": dense_dev,
                "qasm_round_trip_deviation": trip_dev,
                "state_deviation": state_dev,
                "verdict": text,
            },
        }),
    )?;
    println!(
        "circuit: {} qubits, {} logical / {} decomposed gates, depth ~{}; verification {text}",
        report.qubits, report.logical_gates, report.decomposed_gates, report.depth_estimate
    );
    Ok(verdict(pass))
}

fn random_operators(rng: &mut StdRng, phi: f64) -> Result<Vec<WalkOperator>> {
    let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let c = coin(theta, phi)?;
    let mut ops: Vec<WalkOperator> = Variant::SINGLE_COIN.iter().map(|&v| WalkOperator::new(v, c)).collect();
    ops.push(WalkOperator::sqw(coin(rng.gen_range(-1.0..1.0), phi)?, c));
    Ok(ops)
}

fn distributions(s: &WalkerState, op: &WalkOperator, steps: usize) -> Result<Vec<Vec<f64>>> {
    Ok(evolve(s, op, steps, Observe::distribution_only())?.record.distribution.expect("requested"))
}

pub fn check(a: &CheckArgs, out: &Path) -> Result<Verdict> {
    let mut rng = StdRng::seed_from_u64(a.seed);
    let lat = Lattice::new(5)?;
    let (mut norm, mut basis, mut real, mut circ) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..a.samples {
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        for op in random_operators(&mut rng, phi)? {
            let s = WalkerState::random(lat, phi, &mut rng);
            norm = norm.max((evolve_state(&s, &op, 50)?.norm() - 1.0).abs());
        }

        let sd = WalkerState::random(lat, WEYL_DIRAC, &mut rng);
        let sm = change_basis(&sd, WEYL_MAJORANA);
        for op in random_operators(&mut rng, WEYL_DIRAC)? {
            let pa = distributions(&sd, &op, 10)?;
            let pb = distributions(&sm, &op.rotated(WEYL_MAJORANA), 10)?;
            for (ra, rb) in pa.iter().zip(&pb) {
                basis = ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).fold(basis, f64::max);
            }
        }

        for op in random_operators(&mut rng, WEYL_MAJORANA)? {
            let mut s = WalkerState::random_real(lat, WEYL_MAJORANA, &mut rng);
            for _ in 0..50 {
                s = step(&s, &op)?;
                real = real.max(s.max_imaginary());
            }
        }

        let k = rng.gen_range(1..=3u32);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        for op in random_operators(&mut rng, phi)? {
            let p = compile_step(&op, k as usize)?;
            circ = circ.max(verify(&p, &walk_matrix_register_order(&op, Lattice::new(k)?)?)?);
        }
    }
    let results = [
        ("norm preservation", norm, 1e-12),
        ("basis independence", basis, 1e-12),
        ("Majorana reality transport", real, 1e-12),
        ("circuit equivalence", circ, VERIFY_TOL),
    ];
    let mut all = true;
    let mut rows = Vec::new();
    for (name, value, tol) in results {
        let ok = value < tol;
        all &= ok;
        println!("{name}: {} (max deviation {value:.2e}, tolerance {tol:.0e})", if ok { "PASS" } else { "FAIL" });
        rows.push(json!({ "check": name, "max_deviation": value, "tolerance": tol, "pass": ok }));
    }
    let o = Output::new(out)?;
    o.json("check.json", &json!({ "command": "check", "seed": a.seed, "samples": a.samples, "results": rows }))?;
    Ok(verdict(all))
}
