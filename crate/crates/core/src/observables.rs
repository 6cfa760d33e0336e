//! Measurable quantities: position distribution, signed `<x>`, chirality
//! weights, the reduced coin density and its entropy, and the Bloch-sphere
//! map from initial coin state to `<x>`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{coin_spinor, Lattice, WalkerState};
use crate::linalg::{Mat2, ONE, ZERO};
use crate::walk::{evolve_state, wraps_around, WalkOperator};

/// Eigenvalues of the coin density are clamped to `[0, 1]` after allowing
/// this much rounding.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// `P(u) = |psi_L(u)|^2 + |psi_R(u)|^2`, indexed by register value.
pub fn position_distribution(s: &WalkerState) -> Vec<f64> {
    s.left().iter().zip(s.right()).map(|(l, r)| l.norm_sqr() + r.norm_sqr()).collect()
}

/// `sum_x x P(x)` with `P` indexed by register value.
pub fn mean_signed(lat: &Lattice, p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(u, w)| lat.signed(u) as f64 * w).sum()
}

/// Signed position expectation `<x>`.
pub fn expectation_x(s: &WalkerState) -> f64 {
    mean_signed(&s.lattice(), &position_distribution(s))
}

/// `(pL, pR)`: total weight of each chirality.
pub fn chirality_probabilities(s: &WalkerState) -> (f64, f64) {
    crate::lattice::chirality_weights(s)
}

/// Reduced density matrix of the coin, `Tr_x |psi><psi|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoinDensity {
    pub matrix: Mat2,
}

impl CoinDensity {
    /// Eigenvalues in ascending order, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = &self.matrix.0;
        let (a, d) = (m[0][0].re, m[1][1].re);
        let tr = a + d;
        let gap = ((a - d).powi(2) + 4.0 * m[0][1].norm_sqr()).sqrt();
        let lo = (tr - gap) / 2.0;
        let hi = (tr + gap) / 2.0;
        [lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.max_abs_diff(&self.matrix.adjoint()) <= tol
    }
}

/// `rho_c[c][c'] = sum_u psi(c, u) conj(psi(c', u))`.
pub fn reduced_coin_density(s: &WalkerState) -> CoinDensity {
    let (l, r) = (s.left(), s.right());
    let ll: f64 = l.iter().map(|z| z.norm_sqr()).sum();
    let rr: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    let lr: C64 = l.iter().zip(r).map(|(a, b)| a * b.conj()).sum();
    CoinDensity { matrix: Mat2::new(ONE * ll, lr, lr.conj(), ONE * rr) }
}

/// Von Neumann entropy of a coin density, in bits.
pub fn density_entropy(rho: &CoinDensity) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&lam| lam > EIGEN_CLAMP)
        .map(|&lam| -lam * lam.log2())
        .sum::<f64>()
        .clamp(0.0, 1.0)
        + 0.0 // a pure state sums to -0
}

/// Coin-position entanglement entropy in bits.
pub fn entanglement_entropy(s: &WalkerState) -> f64 {
    density_entropy(&reduced_coin_density(s))
}

/// Hermitian form `M` with `<x>(psi) = psi^dagger M psi` for point-source
/// initial states `psi (x) |u = 0>` after a fixed number of steps, and its
/// Bloch decomposition `<x> = b0 + b . n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentForm {
    pub matrix: Mat2,
    pub b0: f64,
    /// `(b_x, b_y, b_z)`, with `|0>` at `+z`.
    pub b: [f64; 3],
}

impl MomentForm {
    pub fn from_matrix(matrix: Mat2) -> Self {
        let m = &matrix.0;
        let b0 = (m[0][0].re + m[1][1].re) / 2.0;
        let bz = (m[0][0].re - m[1][1].re) / 2.0;
        // M01 = b_x - i b_y
        let b = [m[0][1].re, -m[0][1].im, bz];
        MomentForm { matrix, b0, b }
    }

    /// `psi^dagger M psi` for the coin spinor at `(theta0, phi0)`.
    pub fn value(&self, theta0: f64, phi0: f64) -> f64 {
        let psi = coin_spinor(theta0, phi0);
        let mpsi = self.matrix.apply(psi);
        (psi[0].conj() * mpsi[0] + psi[1].conj() * mpsi[1]).re
    }

    /// `b0 + b . n` for the Bloch vector at `(theta0, phi0)`.
    pub fn bloch_value(&self, theta0: f64, phi0: f64) -> f64 {
        let n = [theta0.sin() * phi0.cos(), theta0.sin() * phi0.sin(), theta0.cos()];
        self.b0 + self.b.iter().zip(n).map(|(b, n)| b * n).sum::<f64>()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn coin_basis_walk(op: &WalkOperator, steps: usize, lat: Lattice) -> Result<[WalkerState; 2]> {
    if wraps_around(steps, lat.size()) {
        return Err(Error::Wraparound { steps, size: lat.size() });
    }
    let basis = op.coin().phi();
    let n = lat.size();
    let mut out = Vec::with_capacity(2);
    for c in 0..2 {
        let mut amps = vec![ZERO; 2 * n];
        amps[c * n] = ONE;
        let s0 = WalkerState::from_amplitudes(lat, basis, amps)?;
        out.push(evolve_state(&s0, op, steps)?);
    }
    Ok([out[0].clone(), out[1].clone()])
}

/// `M[i][j] = <i, 0| (W^dagger)^T X W^T |j, 0>` with `X` the signed position.
pub fn x_moment_form(op: &WalkOperator, steps: usize, lat: Lattice) -> Result<MomentForm> {
    let finals = coin_basis_walk(op, steps, lat)?;
    let n = lat.size();
    let mut m = Mat2::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            let (a, b) = (finals[i].amplitudes(), finals[j].amplitudes());
            let mut acc = ZERO;
            for c in 0..2 {
                for u in 0..n {
                    let k = c * n + u;
                    acc += a[k].conj() * b[k] * lat.signed(u) as f64;
                }
            }
            m.0[i][j] = acc;
        }
    }
    Ok(MomentForm::from_matrix(m))
}

/// Rotation about the Bloch `y` axis that carries the massless extremal
/// axis (`-z`) onto the massive one: `atan2(b_x, -b_z)`.
pub fn alpha_from_form(form: &MomentForm) -> Result<f64> {
    let norm = form.b_norm();
    if norm < 1e-9 {
        return Err(Error::NoSignal(norm));
    }
    if form.b[0] == 0.0 {
        return Ok(0.0);
    }
    Ok(form.b[0].atan2(-form.b[2]))
}

pub fn alpha_shift(op: &WalkOperator, steps: usize, lat: Lattice) -> Result<f64> {
    alpha_from_form(&x_moment_form(op, steps, lat)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochSample {
    pub theta0: f64,
    pub phi0: f64,
    pub mean_x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlochSweepResult {
    pub form: MomentForm,
    pub samples: Vec<BlochSample>,
    /// Largest disagreement between simulated samples and the moment form.
    pub max_form_deviation: f64,
}

/// Tolerance for the sweep's cross-check against the moment form.
pub const SWEEP_TOL: f64 = 1e-10;

/// Tabulates `<x>` over a `resolution x resolution` grid of initial coin
/// states (`theta0` in `[0, pi]`, `phi0` in `[0, 2pi)`) by direct evolution,
/// and cross-checks every sample against the moment form.
pub fn bloch_sweep(op: &WalkOperator, steps: usize, lat: Lattice, resolution: usize) -> Result<BlochSweepResult> {
    if resolution < 8 {
        return Err(Error::DimensionMismatch { expected: 8, found: resolution });
    }
    let form = x_moment_form(op, steps, lat)?;
    let basis = op.coin().phi();
    let grid: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|i| {
            (0..resolution).map(move |j| {
                (PI * i as f64 / (resolution - 1) as f64, 2.0 * PI * j as f64 / resolution as f64)
            })
        })
        .collect();
    let samples = grid
        .par_iter()
        .map(|&(theta0, phi0)| {
            let spec = crate::lattice::InitialStateSpec::point(theta0, phi0, 0);
            let s0 = crate::lattice::build_state(&spec, lat, basis)?;
            let s = evolve_state(&s0, op, steps)?;
            Ok(BlochSample { theta0, phi0, mean_x: expectation_x(&s) })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_form_deviation = samples
        .iter()
        .map(|s| {
            let a = (s.mean_x - form.value(s.theta0, s.phi0)).abs();
            let b = (s.mean_x - form.bloch_value(s.theta0, s.phi0)).abs();
            a.max(b)
        })
        .fold(0.0, f64::max);
    if max_form_deviation > SWEEP_TOL {
        return Err(Error::Verification(format!(
            "Bloch sweep disagrees with the moment form by {max_form_deviation:e}"
        )));
    }
    Ok(BlochSweepResult { form, samples, max_form_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{CoinSpec, WEYL_MAJORANA};
    use crate::lattice::{build_state, dirac_plane_wave, majorana_plane_wave, InitialStateSpec};
    use crate::walk::{evolve, step, Observe, Variant};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn lat(k: u32) -> Lattice {
        Lattice::new(k).unwrap()
    }

    fn wm(v: Variant, theta: f64) -> WalkOperator {
        WalkOperator::new(v, CoinSpec::new(theta, WEYL_MAJORANA).unwrap())
    }

    fn point(theta0: f64, phi0: f64, l: Lattice) -> WalkerState {
        build_state(&InitialStateSpec::point(theta0, phi0, 0), l, WEYL_MAJORANA).unwrap()
    }

    #[test]
    fn distributions() {
        let l = lat(3);
        let p = position_distribution(&build_state(&InitialStateSpec::point(1.0, 0.3, 5), l, 0.0).unwrap());
        assert_eq!(p[5], 1.0);
        let p = position_distribution(&dirac_plane_wave(l, 1));
        assert!(p.iter().all(|x| (x - 0.125).abs() < 1e-15));

        let s = step(&point(0.0, 0.0, l), &wm(Variant::Sb, FRAC_PI_2)).unwrap();
        let p = position_distribution(&s);
        assert!((p[l.register(-1)] - 0.5).abs() < 1e-15);
        assert!((p[l.register(1)] - 0.5).abs() < 1e-15);
        assert!(expectation_x(&s).abs() < 1e-15);
    }

    #[test]
    fn massless_expectation() {
        let l = lat(4);
        for v in Variant::ALL {
            let e = evolve(&point(PI, 0.0, l), &wm(v, 0.0), 5, Observe::all()).unwrap();
            assert!((e.record.mean_x.unwrap()[5] - 5.0).abs() < 1e-12);
        }
        // Decoupled chiralities: <x> = T (|b|^2 - |a|^2) = -T cos(theta0).
        for &(t0, p0) in &[(0.3, 0.0), (1.2, 2.0), (2.5, -1.0)] {
            let e = evolve(&point(t0, p0, l), &wm(Variant::Bsb, 0.0), 6, Observe::all()).unwrap();
            assert!((e.record.mean_x.unwrap()[6] + 6.0 * t0.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn chirality_examples() {
        let l = lat(3);
        // theta = pi/8 gives omega = pi/16; after 4 steps omega t + delta = pi/2.
        let e = evolve(&majorana_plane_wave(l, FRAC_PI_4), &wm(Variant::Sb, PI / 8.0), 4, Observe::all()).unwrap();
        assert!(e.record.p_left.as_ref().unwrap()[4].abs() < 1e-12);
        assert!((e.record.p_right.as_ref().unwrap()[4] - 1.0).abs() < 1e-12);

        let e = evolve(&dirac_plane_wave(l, 1), &wm(Variant::Sb, 0.9), 9, Observe::all()).unwrap();
        for (pl, pr) in e.record.p_left.unwrap().iter().zip(e.record.p_right.unwrap()) {
            assert!((pl - 0.5).abs() < 1e-12 && (pr - 0.5).abs() < 1e-12);
        }
        let (pl, pr) = chirality_probabilities(&majorana_plane_wave(l, 0.0));
        assert!((pl - 1.0).abs() < 1e-15 && pr == 0.0);
    }

    #[test]
    fn coin_density_examples() {
        let l = lat(3);
        let (t0, p0) = (1.1, 0.7);
        let rho = reduced_coin_density(&point(t0, p0, l));
        // rank-one projector with the closed-form entries of the initial state
        let (s, c) = (t0 / 2.0).sin_cos();
        let want = Mat2::new(
            ONE * (c * c),
            C64::from_polar(c * s, -p0),
            C64::from_polar(c * s, p0),
            ONE * (s * s),
        );
        assert!(rho.matrix.max_abs_diff(&want) < 1e-15);
        assert!(rho.is_hermitian(1e-15));
        let ev = rho.eigenvalues();
        assert!(ev[0].abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        assert!(entanglement_entropy(&point(t0, p0, l)) < 1e-12);

        // (|0>|-1> + |1>|+1>)/sqrt2 is maximally entangled.
        let mut amps = vec![ZERO; 16];
        amps[l.register(-1)] = ONE * FRAC_1_SQRT_2;
        amps[8 + l.register(1)] = ONE * FRAC_1_SQRT_2;
        let s = WalkerState::from_amplitudes(l, 0.0, amps).unwrap();
        assert!(reduced_coin_density(&s).matrix.max_abs_diff(&Mat2::IDENTITY.scale(ONE * 0.5)) < 1e-15);
        assert!((entanglement_entropy(&s) - 1.0).abs() < 1e-15);

        let s = step(&point(0.0, 0.0, l), &wm(Variant::Sb, FRAC_PI_2)).unwrap();
        assert!((entanglement_entropy(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_form_closed_forms() {
        let l = lat(4);
        let f = x_moment_form(&wm(Variant::Sbs, 0.0), 5, l).unwrap();
        assert!(f.matrix.max_abs_diff(&Mat2::diag(ONE * -5.0, ONE * 5.0)) < 1e-12);
        assert!((f.b[2] + 5.0).abs() < 1e-12 && f.b[0].abs() < 1e-12);

        for &theta in &[0.2, 1.0, 2.5] {
            let f = x_moment_form(&wm(Variant::Sb, theta), 1, l).unwrap();
            let want = Mat2::pauli_x().scale(ONE * theta.sin()) - Mat2::pauli_z().scale(ONE * theta.cos());
            assert!(f.matrix.max_abs_diff(&want) < 1e-12);
            assert!(f.b[1].abs() < 1e-12);
            assert!((alpha_shift(&wm(Variant::Sb, theta), 1, l).unwrap() - theta).abs() < 1e-10);
            assert!((alpha_shift(&wm(Variant::Bsb, theta), 1, l).unwrap() - theta / 2.0).abs() < 1e-10);
            assert!(alpha_shift(&wm(Variant::Sbs, theta), 1, l).unwrap().abs() < 1e-10);
        }
        assert_eq!(alpha_shift(&wm(Variant::Bs, 0.0), 3, l).unwrap(), 0.0);
        assert!(matches!(x_moment_form(&wm(Variant::Sb, 0.3), 8, l), Err(Error::Wraparound { .. })));
    }

    #[test]
    fn sweep_symmetries() {
        let l = lat(4);
        let res = 9;
        let r = bloch_sweep(&wm(Variant::Sb, 0.0), 3, l, res).unwrap();
        for s in &r.samples {
            assert!((s.mean_x + 3.0 * s.theta0.cos()).abs() < 1e-12);
        }
        let r = bloch_sweep(&wm(Variant::Sb, 1.3), 4, l, 16).unwrap();
        assert!(r.max_form_deviation < SWEEP_TOL);
        for &p0 in &[0.4, 1.9] {
            let a = r.form.value(1.0, p0);
            let b = r.form.value(1.0, -p0);
            assert!((a - b).abs() < 1e-12);
        }
        for theta in [0.3, 1.7, 3.0] {
            let f = x_moment_form(&wm(Variant::Sb, theta), 5, l).unwrap();
            assert!(f.value(FRAC_PI_2, FRAC_PI_2).abs() < 1e-12);
            assert!(f.value(FRAC_PI_2, -FRAC_PI_2).abs() < 1e-12);
        }
        assert!(bloch_sweep(&wm(Variant::Sb, 1.0), 2, l, 4).is_err());
    }
}
