//! Lorentz-covariant coin operators and the gamma-matrix bases they encode.
//!
//! A coin `B_phi(theta) = Rz(phi) Rx(theta) Rz(phi)^dagger` rotates the
//! chirality spinor by `theta` about the in-plane axis `(cos phi, sin phi, 0)`.
//! `theta / 2` is the mass per lattice step; `phi` selects the gamma basis:
//! `phi = 0` is the Weyl-Dirac basis and `phi = pi/2` the Weyl-Majorana basis,
//! where every coin is a real matrix.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, IM, ONE};

/// Basis angle of the Weyl-Dirac basis (`gamma0 = sigma_x`).
pub const WEYL_DIRAC: f64 = 0.0;
/// Basis angle of the Weyl-Majorana basis (`gamma0 = sigma_y`).
pub const WEYL_MAJORANA: f64 = FRAC_PI_2;

/// Tolerance for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-12;

/// Reduces an angle into `[0, 2pi)`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest signed distance between two angles, in `[-pi, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_angle(a - b);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::new(ONE * c, -IM * s, -IM * s, ONE * c)
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Mat2::new(ONE * c, -ONE * s, ONE * s, ONE * c)
}

/// `exp(-i phi sigma_z / 2)`.
pub fn rz(phi: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, -phi / 2.0), C64::from_polar(1.0, phi / 2.0))
}

/// Coin parameters: rotation angle `theta` (twice the mass per step) and
/// axis angle `phi`.
///
/// `phi` is reduced into `[0, 2pi)`. `theta` is kept as given: the coin has
/// period `4pi` in `theta`, and reducing it modulo `2pi` would flip the sign
/// of the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoinSpec {
    theta: f64,
    phi: f64,
}

impl CoinSpec {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        if !phi.is_finite() {
            return Err(Error::NonFinite("phi"));
        }
        Ok(CoinSpec { theta, phi: reduce_angle(phi) })
    }

    /// Identity coin, nominally in the given basis.
    pub fn identity(phi: f64) -> Self {
        CoinSpec { theta: 0.0, phi: reduce_angle(phi) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Mass per step in lattice units, `theta / 2`.
    pub fn mass(&self) -> f64 {
        self.theta / 2.0
    }

    /// The same-axis square root, `B_phi(theta / 2)`.
    pub fn half(&self) -> Self {
        CoinSpec { theta: self.theta / 2.0, phi: self.phi }
    }

    pub fn inverse(&self) -> Self {
        CoinSpec { theta: -self.theta, phi: self.phi }
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        CoinSpec { theta, phi: self.phi }
    }

    /// The coin seen from a basis rotated by `lambda`.
    pub fn rotated(&self, lambda: f64) -> Self {
        CoinSpec { theta: self.theta, phi: reduce_angle(self.phi + lambda) }
    }

    /// True when the coin acts as the identity (theta a multiple of 4pi).
    pub fn is_identity(&self) -> bool {
        let r = self.theta.rem_euclid(4.0 * std::f64::consts::PI);
        r.abs() < ANGLE_TOL || (4.0 * std::f64::consts::PI - r).abs() < ANGLE_TOL
    }

    pub fn matrix(&self) -> Mat2 {
        coin_matrix(self)
    }
}

/// Closed form of `B_phi(theta)`.
pub fn coin_matrix(spec: &CoinSpec) -> Mat2 {
    let (s, c) = (spec.theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, spec.phi);
    Mat2::new(ONE * c, -IM * e.conj() * s, -IM * e * s, ONE * c)
}

/// `Rz(lambda) coin Rz(lambda)^dagger`: the coin after a basis rotation.
pub fn conjugate_coin(coin: &Mat2, lambda: f64) -> Mat2 {
    let v = rz(lambda);
    v * *coin * v.adjoint()
}

/// `(gamma0, gamma1)` for the basis with axis angle `phi`, using the
/// chirality convention `gamma0 gamma1 = -sigma_z`.
pub fn gamma_matrices(phi: f64) -> (Mat2, Mat2) {
    let (s, c) = phi.sin_cos();
    let g0 = Mat2::pauli_x().scale(ONE * c) + Mat2::pauli_y().scale(ONE * s);
    // gamma0 squares to one, so gamma1 = gamma0 (-sigma_z).
    let g1 = g0 * Mat2::pauli_z().scale(-ONE);
    (g0, g1)
}

/// Checks `{gamma^mu, gamma^nu} = 2 g^{mu nu}` with `g = diag(1, -1)`.
pub fn gamma_check(phi: f64) -> bool {
    let (g0, g1) = gamma_matrices(phi);
    let gammas = [g0, g1];
    let metric = [1.0, -1.0];
    let product_ok = (g0 * g1).max_abs_diff(&Mat2::pauli_z().scale(-ONE)) <= ANGLE_TOL;
    let mut ok = product_ok;
    for mu in 0..2 {
        for nu in 0..2 {
            let anti = gammas[mu] * gammas[nu] + gammas[nu] * gammas[mu];
            let want = if mu == nu { Mat2::IDENTITY.scale(ONE * (2.0 * metric[mu])) } else { Mat2::ZERO };
            ok &= anti.max_abs_diff(&want) <= ANGLE_TOL;
        }
    }
    ok
}
