//! Momentum-space analysis of the walk.
//!
//! On a plane wave `e^{iku}` every walk step reduces to a 2x2 block. The
//! left-handed component picks up `e^{+ik}` from the shift and the
//! right-handed one `e^{-ik}`. Comparing these blocks with the exact
//! continuum propagator `exp(-i eps H(kappa))` at `k = eps kappa`,
//! `theta = 2 eps m` measures the local splitting error of each variant.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::coin::CoinSpec;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, IM, ONE};
use crate::walk::{Variant, WalkOperator};

/// Unitarity tolerance for blocks passed to [`eigenphases`].
pub const BLOCK_UNITARY_TOL: f64 = 1e-10;

/// One-step operator restricted to lattice momentum `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentumBlock {
    pub k: f64,
    pub matrix: Mat2,
}

fn phase(a: f64) -> C64 {
    C64::from_polar(1.0, a)
}

/// Builds the momentum block of `op` at lattice momentum `k`.
pub fn walk_block(op: &WalkOperator, k: f64) -> MomentumBlock {
    let full = Mat2::diag(phase(k), phase(-k));
    let minus = Mat2::diag(phase(k), ONE);
    let plus = Mat2::diag(ONE, phase(-k));
    let matrix = match *op {
        WalkOperator::Sb { coin } => full * coin.matrix(),
        WalkOperator::Bs { coin } => coin.matrix() * full,
        WalkOperator::Bsb { coin } => {
            let h = coin.half().matrix();
            h * full * h
        }
        WalkOperator::Sbs { coin } => plus * coin.matrix() * minus,
        WalkOperator::Sqw { first, second } => plus * second.matrix() * minus * first.matrix(),
    };
    MomentumBlock { k, matrix }
}

/// `exp(-i eps H(kappa))` with `H(kappa) = -kappa sigma_z + m (cos phi sigma_x + sin phi sigma_y)`,
/// evaluated in closed form.
pub fn exact_step_block(kappa: f64, m: f64, phi: f64, eps: f64) -> Mat2 {
    let v = [eps * m * phi.cos(), eps * m * phi.sin(), -eps * kappa];
    let a = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if a == 0.0 {
        return Mat2::IDENTITY;
    }
    let (s, c) = a.sin_cos();
    let n = [v[0] / a, v[1] / a, v[2] / a];
    let n_sigma = Mat2::pauli_x().scale(ONE * n[0]) + Mat2::pauli_y().scale(ONE * n[1]) + Mat2::pauli_z().scale(ONE * n[2]);
    Mat2::IDENTITY.scale(ONE * c) - n_sigma.scale(IM * s)
}

/// `omega(k) = arccos(cos(theta/2) cos k)`, in `[0, pi]`.
pub fn dispersion_omega(theta: f64, k: f64) -> f64 {
    ((theta / 2.0).cos() * k.cos()).clamp(-1.0, 1.0).acos()
}

/// Eigenphases of a 2x2 unitary, ascending.
///
/// The block is factored as `e^{i g} (cos w I - i sin w n.sigma)`, whose
/// eigenvalues are `e^{i (g -+ w)}`. This stays accurate at degenerate
/// points where the characteristic-polynomial route loses half its digits.
pub fn eigenphases(block: &Mat2) -> Result<(f64, f64)> {
    let defect = block.unitarity_defect();
    if defect > BLOCK_UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let g = block.det().arg() / 2.0;
    let v = block.scale(phase(-g));
    let cos_w = v.trace().re / 2.0;
    // i (V - V^dagger) / 2 = sin w (n . sigma)
    let a = (v - v.adjoint()).scale(IM * 0.5);
    let sin_w = (a.0[0][0].norm_sqr() + a.0[0][1].norm_sqr()).sqrt();
    let w = sin_w.atan2(cos_w);
    Ok((g - w, g + w))
}

pub fn block_eigenphases(block: &MomentumBlock) -> Result<(f64, f64)> {
    eigenphases(&block.matrix)
}

/// Local (one-step) error order of each variant: `None` for SQW, whose
/// order depends on how its two coins are chosen.
pub fn expected_local_order(variant: Variant) -> Option<f64> {
    match variant {
        Variant::Sb | Variant::Bs => Some(2.0),
        Variant::Bsb | Variant::Sbs => Some(3.0),
        Variant::Sqw => None,
    }
}

/// Spectral-norm distance between the walk block at `k = eps kappa`,
/// `theta = 2 eps m` and the exact propagator, after removing the best
/// global phase.
pub fn step_error(variant: Variant, kappa: f64, m: f64, phi: f64, eps: f64) -> Result<f64> {
    if variant == Variant::Sqw {
        return Err(Error::UnsupportedVariant("sqw has no single-coin lattice refinement".into()));
    }
    if eps.is_nan() || eps <= 0.0 || !eps.is_finite() {
        return Err(Error::NonFinite("eps must be positive"));
    }
    let k = eps * kappa;
    if !(k > -std::f64::consts::PI && k <= std::f64::consts::PI) {
        return Err(Error::MomentumOutOfRange(k));
    }
    let op = WalkOperator::new(variant, CoinSpec::new(2.0 * eps * m, phi)?);
    let walk = walk_block(&op, k).matrix;
    let exact = exact_step_block(kappa, m, phi, eps);
    let overlap = (exact.adjoint() * walk).trace();
    let aligned = if overlap.norm() > 0.0 { walk.scale(phase(-overlap.arg())) } else { walk };
    Ok((aligned - exact).spectral_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub variant: Variant,
    pub kappa: f64,
    pub m: f64,
    pub phi: f64,
    pub epsilons: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_slope: f64,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,error\n");
        for (e, err) in self.epsilons.iter().zip(&self.errors) {
            out.push_str(&format!("{e},{err}\n"));
        }
        out
    }
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits `log(error)` against `log(eps)`. Needs at least four step sizes
/// spanning at least one decade, and a non-vanishing commutator.
pub fn order_fit(variant: Variant, kappa: f64, m: f64, phi: f64, epsilons: &[f64]) -> Result<ScalingReport> {
    if kappa == 0.0 || m == 0.0 {
        return Err(Error::DegenerateFit(
            "with kappa = 0 or m = 0 shift and coin commute, the error vanishes and no slope exists".into(),
        ));
    }
    if epsilons.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 step sizes, got {}", epsilons.len())));
    }
    let lo = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().cloned().fold(0.0, f64::max);
    if lo.is_nan() || lo <= 0.0 || hi / lo < 10.0 {
        return Err(Error::DegenerateFit("step sizes must be positive and span a decade".into()));
    }
    let errors = epsilons
        .iter()
        .map(|&e| step_error(variant, kappa, m, phi, e))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = errors.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(Error::DegenerateFit(format!("error {bad:e} cannot be fitted on a log scale")));
    }
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(ScalingReport {
        variant,
        kappa,
        m,
        phi,
        epsilons: epsilons.to_vec(),
        errors,
        fitted_slope: ols_slope(&lx, &ly),
    })
}

/// One row of a dispersion table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionRow {
    pub k: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_closed_form: f64,
}

/// Eigenphases of the walk block next to the closed-form dispersion on a
/// uniform grid of `points` momenta in `(-pi, pi]`.
pub fn dispersion_table(op: &WalkOperator, points: usize) -> Result<Vec<DispersionRow>> {
    let theta = op.coin().theta();
    momentum_grid(points)
        .map(|k| {
            let (lo, hi) = block_eigenphases(&walk_block(op, k))?;
            Ok(DispersionRow { k, omega_plus: hi, omega_minus: lo, omega_closed_form: dispersion_omega(theta, k) })
        })
        .collect()
}

/// `points` momenta `-pi + 2 pi (j + 1) / points`, covering `(-pi, pi]`.
pub fn momentum_grid(points: usize) -> impl Iterator<Item = f64> {
    use std::f64::consts::PI;
    (0..points).map(move |j| -PI + 2.0 * PI * (j + 1) as f64 / points as f64)
}

/// Largest `|d omega / dk|` of the SB walk, by central differences of the
/// numerically computed eigenphase on a `points`-momentum grid.
pub fn max_group_velocity(theta: f64, phi: f64, points: usize) -> Result<f64> {
    let op = WalkOperator::new(Variant::Sb, CoinSpec::new(theta, phi)?);
    let omega = |k: f64| -> Result<f64> { Ok(block_eigenphases(&walk_block(&op, k))?.1) };
    let h = 1e-5;
    let mut best = 0.0_f64;
    for k in momentum_grid(points) {
        let v = (omega(k + h)? - omega(k - h)?) / (2.0 * h);
        best = best.max(v.abs());
    }
    Ok(best)
}
