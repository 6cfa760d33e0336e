//! Periodic lattice, the two-component walker state, and the initial-state,
//! charge-conjugation and basis-change machinery.
//!
//! Amplitudes are stored chirality-major: index `c * N + u` with `c = 0` the
//! left-handed component and `c = 1` the right-handed one. Register value
//! `u` maps to the signed coordinate `x = ((u + N/2) mod N) - N/2`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coin::{reduce_angle, rz, WEYL_MAJORANA};
use crate::error::{Error, Result};
use crate::linalg::{vdot, vec_norm, ONE, ZERO};

/// Normalization tolerance applied to every state.
pub const NORM_TOL: f64 = 1e-10;
/// Inputs whose norm deviates by less than this are renormalized; larger
/// deviations are rejected.
pub const RENORM_LIMIT: f64 = 1e-6;

pub const MAX_POSITION_QUBITS: u32 = 16;

/// A periodic lattice of `N = 2^k` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    qubits: u32,
}

impl Lattice {
    pub fn new(qubits: u32) -> Result<Self> {
        if !(1..=MAX_POSITION_QUBITS).contains(&qubits) {
            return Err(Error::InvalidQubitCount(qubits));
        }
        Ok(Lattice { qubits })
    }

    /// Number of position qubits `k`.
    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn size(&self) -> usize {
        1 << self.qubits
    }

    /// Signed coordinate of register value `u`.
    pub fn signed(&self, u: usize) -> i64 {
        let n = self.size();
        ((u + n / 2) % n) as i64 - (n / 2) as i64
    }

    /// Register value of a signed (or any integer) coordinate.
    pub fn register(&self, x: i64) -> usize {
        x.rem_euclid(self.size() as i64) as usize
    }

    /// Register values ordered by increasing signed coordinate.
    pub fn signed_order(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.size();
        (0..n).map(move |i| (i + n / 2) % n)
    }
}

/// Position profile of an initial state.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// All weight on register value `u0`.
    Point(usize),
    /// Explicit normalized amplitudes `D(u)` over the whole lattice.
    Explicit(Vec<C64>),
}

/// Separable initial state `(cos(theta0/2)|0> + e^{i phi0} sin(theta0/2)|1>) (x) D`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialStateSpec {
    pub theta0: f64,
    pub phi0: f64,
    pub profile: Profile,
}

impl InitialStateSpec {
    pub fn point(theta0: f64, phi0: f64, u0: usize) -> Self {
        InitialStateSpec { theta0, phi0, profile: Profile::Point(u0) }
    }

    /// Coin spinor `(cos(theta0/2), e^{i phi0} sin(theta0/2))`.
    pub fn spinor(&self) -> [C64; 2] {
        coin_spinor(self.theta0, self.phi0)
    }
}

/// Bloch-sphere spinor with `|0>` at the north pole.
pub fn coin_spinor(theta0: f64, phi0: f64) -> [C64; 2] {
    let (s, c) = (theta0 / 2.0).sin_cos();
    [ONE * c, C64::from_polar(s, phi0)]
}

/// Discrete spinor field on a lattice, tagged with the gamma basis it is
/// expressed in.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    lattice: Lattice,
    basis_phi: f64,
    amps: Vec<C64>,
}

fn checked_normalize(amps: &mut [C64]) -> Result<()> {
    let norm = vec_norm(amps);
    if !norm.is_finite() || (norm - 1.0).abs() >= RENORM_LIMIT {
        return Err(Error::NotNormalized { norm });
    }
    if (norm - 1.0).abs() > 0.0 {
        amps.iter_mut().for_each(|z| *z /= norm);
    }
    Ok(())
}

impl WalkerState {
    /// Wraps chirality-major amplitudes. Slightly off-norm input is
    /// renormalized; anything further than `RENORM_LIMIT` is rejected.
    pub fn from_amplitudes(lattice: Lattice, basis_phi: f64, mut amps: Vec<C64>) -> Result<Self> {
        let expected = 2 * lattice.size();
        if amps.len() != expected {
            return Err(Error::LengthMismatch { expected, found: amps.len() });
        }
        if !basis_phi.is_finite() {
            return Err(Error::NonFinite("basis_phi"));
        }
        checked_normalize(&mut amps)?;
        Ok(WalkerState { lattice, basis_phi: reduce_angle(basis_phi), amps })
    }

    /// Product of a coin spinor with a position profile given per register value.
    pub fn product(lattice: Lattice, basis_phi: f64, spinor: [C64; 2], profile: &[C64]) -> Result<Self> {
        let n = lattice.size();
        if profile.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: profile.len() });
        }
        let mut amps = Vec::with_capacity(2 * n);
        amps.extend(profile.iter().map(|d| spinor[0] * d));
        amps.extend(profile.iter().map(|d| spinor[1] * d));
        Self::from_amplitudes(lattice, basis_phi, amps)
    }

    /// Random state with real and imaginary parts drawn uniformly from
    /// `[-1, 1)` and then normalized.
    pub fn random<R: Rng + ?Sized>(lattice: Lattice, basis_phi: f64, rng: &mut R) -> Self {
        let amps = (0..2 * lattice.size())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect::<Vec<_>>();
        Self::normalized(lattice, basis_phi, amps)
    }

    /// Random state with all-real amplitudes.
    pub fn random_real<R: Rng + ?Sized>(lattice: Lattice, basis_phi: f64, rng: &mut R) -> Self {
        let amps = (0..2 * lattice.size())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect::<Vec<_>>();
        Self::normalized(lattice, basis_phi, amps)
    }

    fn normalized(lattice: Lattice, basis_phi: f64, mut amps: Vec<C64>) -> Self {
        let norm = vec_norm(&amps);
        amps.iter_mut().for_each(|z| *z /= norm);
        WalkerState { lattice, basis_phi: reduce_angle(basis_phi), amps }
    }

    pub(crate) fn from_raw(lattice: Lattice, basis_phi: f64, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 2 * lattice.size());
        WalkerState { lattice, basis_phi, amps }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn basis_phi(&self) -> f64 {
        self.basis_phi
    }

    /// All amplitudes, chirality-major.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, c: usize, u: usize) -> C64 {
        self.amps[c * self.lattice.size() + u]
    }

    /// Left-handed (`c = 0`) slice.
    pub fn left(&self) -> &[C64] {
        &self.amps[..self.lattice.size()]
    }

    /// Right-handed (`c = 1`) slice.
    pub fn right(&self) -> &[C64] {
        &self.amps[self.lattice.size()..]
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.amps.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &WalkerState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Same amplitudes relabelled as living in another basis.
    pub fn with_basis(mut self, basis_phi: f64) -> Self {
        self.basis_phi = reduce_angle(basis_phi);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        file.into_state()
    }
}

/// On-disk checkpoint format: `{k, basis_phi, amplitudes: [[re, im], ...]}`
/// with `2N` chirality-major entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub k: u32,
    pub basis_phi: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&WalkerState> for StateFile {
    fn from(s: &WalkerState) -> Self {
        StateFile {
            k: s.lattice.qubits(),
            basis_phi: s.basis_phi,
            amplitudes: s.amps.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl StateFile {
    pub fn into_state(self) -> Result<WalkerState> {
        let lattice = Lattice::new(self.k)?;
        let amps = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        WalkerState::from_amplitudes(lattice, self.basis_phi, amps)
    }
}

/// Builds the separable state of `spec` in the basis `basis_phi`.
pub fn build_state(spec: &InitialStateSpec, lat: Lattice, basis_phi: f64) -> Result<WalkerState> {
    if !spec.theta0.is_finite() || !spec.phi0.is_finite() {
        return Err(Error::NonFinite("initial coin angles"));
    }
    let n = lat.size();
    let profile = match &spec.profile {
        Profile::Point(u0) => {
            if *u0 >= n {
                return Err(Error::PositionOutOfRange { u0: *u0, size: n });
            }
            let mut d = vec![ZERO; n];
            d[*u0] = ONE;
            d
        }
        Profile::Explicit(d) => {
            if d.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: d.len() });
            }
            let mut d = d.clone();
            checked_normalize(&mut d)?;
            d
        }
    };
    WalkerState::product(lat, basis_phi, spec.spinor(), &profile)
}

fn uniform(lat: Lattice) -> Vec<C64> {
    let n = lat.size();
    vec![ONE / (n as f64).sqrt(); n]
}

/// Zero-momentum Dirac plane wave in the Weyl-Majorana basis:
/// `(1, +-i)/sqrt2` times the uniform superposition.
pub fn dirac_plane_wave(lat: Lattice, energy_sign: i8) -> WalkerState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lower = if energy_sign >= 0 { C64::new(0.0, s) } else { C64::new(0.0, -s) };
    WalkerState::product(lat, WEYL_MAJORANA, [ONE * s, lower], &uniform(lat))
        .expect("plane wave is normalized by construction")
}

/// Zero-momentum Majorana plane wave `(cos delta, sin delta)` times the
/// uniform superposition, in the Weyl-Majorana basis.
pub fn majorana_plane_wave(lat: Lattice, delta: f64) -> WalkerState {
    let (s, c) = delta.sin_cos();
    WalkerState::product(lat, WEYL_MAJORANA, [ONE * c, ONE * s], &uniform(lat))
        .expect("plane wave is normalized by construction")
}

/// Charge conjugate in the state's own basis.
///
/// With `lambda = basis_phi - pi/2` the rotation away from the Weyl-Majorana
/// basis, the result is `(diag(1, e^{2 i lambda}) (x) I) conj(s)`. That is
/// `e^{-i lambda sigma_z} conj(s)` up to the global phase `e^{i lambda}`, chosen
/// so the Weyl-Majorana case is plain conjugation and the Weyl-Dirac case is
/// `sigma_z conj(s)`.
pub fn charge_conjugate(s: &WalkerState) -> WalkerState {
    let lambda = s.basis_phi - FRAC_PI_2;
    let phase = C64::from_polar(1.0, 2.0 * lambda);
    let n = s.lattice.size();
    let amps = s
        .amps
        .iter()
        .enumerate()
        .map(|(i, z)| if i < n { z.conj() } else { phase * z.conj() })
        .collect();
    WalkerState::from_raw(s.lattice, s.basis_phi, amps)
}

/// Distance from the Majorana condition, minimized over the unobservable
/// global phase: `min_a || s - e^{ia} C s ||`, attained at `e^{ia} = <Cs, s> / |<Cs, s>|`.
///
/// The difference is formed explicitly; the closed form
/// `sqrt(2 - 2 |<s, C s>|)` loses half the digits near zero.
pub fn majorana_residual(s: &WalkerState) -> f64 {
    let c = charge_conjugate(s);
    let overlap = vdot(&c.amps, &s.amps);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    s.amps
        .iter()
        .zip(&c.amps)
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Rotates the coin factor by `Rz(lambda)` and records the new basis.
pub fn change_basis(s: &WalkerState, lambda: f64) -> WalkerState {
    let v = rz(lambda);
    let (a, d) = (v.0[0][0], v.0[1][1]);
    let n = s.lattice.size();
    let amps = s.amps.iter().enumerate().map(|(i, z)| if i < n { a * z } else { d * z }).collect();
    WalkerState::from_raw(s.lattice, reduce_angle(s.basis_phi + lambda), amps)
}

/// `sum conj(a) b` over all amplitudes.
pub fn inner_product(a: &WalkerState, b: &WalkerState) -> Result<C64> {
    if a.lattice != b.lattice {
        return Err(Error::LatticeMismatch { left: a.lattice.size(), right: b.lattice.size() });
    }
    Ok(vdot(&a.amps, &b.amps))
}

/// Squared norms of the left- and right-handed slices.
pub fn chirality_weights(s: &WalkerState) -> (f64, f64) {
    let l = s.left().iter().map(|z| z.norm_sqr()).sum();
    let r = s.right().iter().map(|z| z.norm_sqr()).sum();
    (l, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::WEYL_DIRAC;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn lat(k: u32) -> Lattice {
        Lattice::new(k).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn lattice_bounds_and_signed_coordinates() {
        assert!(Lattice::new(0).is_err());
        assert!(Lattice::new(17).is_err());
        let l = lat(3);
        assert_eq!(l.size(), 8);
        let xs: Vec<i64> = (0..8).map(|u| l.signed(u)).collect();
        assert_eq!(xs, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(l.register(-1), 7);
        let ordered: Vec<i64> = l.signed_order().map(|u| l.signed(u)).collect();
        assert_eq!(ordered, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn point_sources() {
        let s = build_state(&InitialStateSpec::point(PI / 2.0, 0.0, 0), lat(3), WEYL_MAJORANA).unwrap();
        assert!(close(s.amplitude(0, 0), ONE * FRAC_1_SQRT_2));
        assert!(close(s.amplitude(1, 0), ONE * FRAC_1_SQRT_2));
        assert!((1..8).all(|u| s.amplitude(0, u) == ZERO && s.amplitude(1, u) == ZERO));

        let s = build_state(&InitialStateSpec::point(0.0, 1.234, 0), lat(3), WEYL_MAJORANA).unwrap();
        assert!(close(s.amplitude(0, 0), ONE));
        assert!(close(s.amplitude(1, 0), ZERO));

        let s = build_state(&InitialStateSpec::point(PI / 2.0, PI / 2.0, 0), lat(3), WEYL_MAJORANA).unwrap();
        assert!(close(s.amplitude(1, 0), C64::new(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn build_state_rejections() {
        let l = lat(2);
        let bad = InitialStateSpec::point(0.0, 0.0, 4);
        assert!(matches!(build_state(&bad, l, 0.0), Err(Error::PositionOutOfRange { u0: 4, size: 4 })));
        let unnormalized = InitialStateSpec {
            theta0: 0.0,
            phi0: 0.0,
            profile: Profile::Explicit(vec![ONE, ONE, ZERO, ZERO]),
        };
        match build_state(&unnormalized, l, 0.0) {
            Err(Error::NotNormalized { norm }) => assert!((norm - 2f64.sqrt()).abs() < 1e-12),
            other => panic!("expected rejection, got {other:?}"),
        }
        // Tiny deviations are absorbed.
        let nearly = InitialStateSpec {
            theta0: 0.0,
            phi0: 0.0,
            profile: Profile::Explicit(vec![ONE * (1.0 + 1e-8), ZERO, ZERO, ZERO]),
        };
        let s = build_state(&nearly, l, 0.0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_waves() {
        let s = dirac_plane_wave(lat(3), 1);
        let a = 1.0 / (2f64.sqrt() * 8f64.sqrt());
        for u in 0..8 {
            assert!(close(s.amplitude(0, u), ONE * a));
            assert!(close(s.amplitude(1, u), C64::new(0.0, a)));
        }
        assert!((dirac_plane_wave(lat(1), 1).norm() - 1.0).abs() < 1e-15);
        let minus = dirac_plane_wave(lat(3), -1);
        assert!(charge_conjugate(&s).max_abs_diff(&minus) < 1e-15);

        let m = majorana_plane_wave(lat(3), FRAC_PI_4);
        assert!(close(m.amplitude(0, 5), ONE * (FRAC_1_SQRT_2 / 8f64.sqrt())));
        assert_eq!(m.max_imaginary(), 0.0);
        assert!(majorana_residual(&m) < 1e-12);
        let m0 = majorana_plane_wave(lat(2), 0.0);
        assert!(m0.right().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn conjugation_examples() {
        let l = lat(2);
        let mut amps = vec![ZERO; 8];
        amps[0] = C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let s = WalkerState::from_amplitudes(l, WEYL_MAJORANA, amps).unwrap();
        assert!(close(charge_conjugate(&s).amplitude(0, 0), C64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)));

        let a = C64::new(0.6, 0.0);
        let b = C64::new(0.0, 0.8);
        let mut amps = vec![ZERO; 8];
        amps[0] = a;
        amps[4] = b;
        let s = WalkerState::from_amplitudes(l, WEYL_DIRAC, amps).unwrap();
        let c = charge_conjugate(&s);
        assert!(close(c.amplitude(0, 0), a.conj()));
        assert!(close(c.amplitude(1, 0), -b.conj()));
    }

    #[test]
    fn double_conjugation_returns_the_state() {
        let mut rng = StdRng::seed_from_u64(7);
        for &phi in &[0.0, 0.4, FRAC_PI_2, 3.0] {
            let s = WalkerState::random(lat(3), phi, &mut rng);
            let cc = charge_conjugate(&charge_conjugate(&s));
            assert!((inner_product(&s, &cc).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_examples() {
        let l = lat(3);
        let majorana = build_state(&InitialStateSpec::point(PI / 2.0, 0.0, 0), l, WEYL_MAJORANA).unwrap();
        assert!(majorana_residual(&majorana) < 1e-12);
        let dirac_wd = build_state(&InitialStateSpec::point(PI / 2.0, PI / 2.0, 0), l, WEYL_DIRAC).unwrap();
        assert!(majorana_residual(&dirac_wd) < 1e-12);
        let minus_wd = build_state(&InitialStateSpec::point(PI / 2.0, -PI / 2.0, 0), l, WEYL_DIRAC).unwrap();
        assert!(majorana_residual(&minus_wd) < 1e-12);

        // (|0> + i|1>)/sqrt2 in the Weyl-Majorana basis is orthogonal to its
        // conjugate, so the phase-minimized distance is sqrt(2).
        let dirac_wm = build_state(&InitialStateSpec::point(PI / 2.0, PI / 2.0, 0), l, WEYL_MAJORANA).unwrap();
        let c = charge_conjugate(&dirac_wm);
        let brute = (0..3600)
            .map(|j| {
                let ph = C64::from_polar(1.0, 2.0 * PI * j as f64 / 3600.0);
                dirac_wm
                    .amplitudes()
                    .iter()
                    .zip(c.amplitudes())
                    .map(|(x, y)| (x - ph * y).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((majorana_residual(&dirac_wm) - 2f64.sqrt()).abs() < 1e-12);
        assert!((brute - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn basis_change_examples() {
        let mut rng = StdRng::seed_from_u64(11);
        let s = WalkerState::random(lat(3), 0.3, &mut rng);
        assert!(change_basis(&s, 0.0).max_abs_diff(&s) < 1e-15);
        let back = change_basis(&change_basis(&s, 1.1), -1.1);
        assert!(back.max_abs_diff(&s) < 1e-15);
        assert!((back.basis_phi() - s.basis_phi()).abs() < 1e-12);

        let wd = build_state(&InitialStateSpec::point(PI / 2.0, PI / 2.0, 0), lat(3), WEYL_DIRAC).unwrap();
        let wm = change_basis(&wd, PI / 2.0);
        assert!((wm.basis_phi() - WEYL_MAJORANA).abs() < 1e-12);
        // Rz(pi/2)(1, i)/sqrt2 = e^{-i pi/4} (1, -1)/sqrt2.
        let phase = C64::from_polar(1.0, PI / 4.0);
        assert!(close(wm.amplitude(0, 0) * phase, ONE * FRAC_1_SQRT_2));
        assert!(close(wm.amplitude(1, 0) * phase, -ONE * FRAC_1_SQRT_2));
        assert!(majorana_residual(&wm) < 1e-12);
    }

    #[test]
    fn inner_products() {
        let l = lat(2);
        let a = build_state(&InitialStateSpec::point(0.7, 0.2, 0), l, 0.0).unwrap();
        let b = build_state(&InitialStateSpec::point(0.7, 0.2, 1), l, 0.0).unwrap();
        assert!(close(inner_product(&a, &a).unwrap(), ONE));
        assert!(close(inner_product(&a, &b).unwrap(), ZERO));
        let other = build_state(&InitialStateSpec::point(0.7, 0.2, 0), lat(3), 0.0).unwrap();
        assert!(matches!(inner_product(&a, &other), Err(Error::LatticeMismatch { .. })));
    }

    #[test]
    fn json_checkpoint_round_trip() {
        let mut rng = StdRng::seed_from_u64(3);
        let s = WalkerState::random(lat(2), 0.5, &mut rng);
        let text = s.to_json().unwrap();
        let back = WalkerState::from_json(&text).unwrap();
        assert_eq!(back.lattice(), s.lattice());
        assert!(back.max_abs_diff(&s) < 1e-15);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["k"], 2);
        assert_eq!(v["amplitudes"].as_array().unwrap().len(), 8);
        let short = r#"{"k": 2, "basis_phi": 0.0, "amplitudes": [[1.0, 0.0]]}"#;
        assert!(matches!(WalkerState::from_json(short), Err(Error::LengthMismatch { .. })));
    }
}
