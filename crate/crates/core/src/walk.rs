//! Walk-step rules and multi-step evolution.
//!
//! Every variant is a product of coins `B (x) I` and conditional shifts. The
//! full shift `S` moves the left-handed slice `u -> u - 1` and the
//! right-handed slice `u -> u + 1`; the half shifts `S-` and `S+` move only
//! one of the two slices, so `S = S+ S- = S- S+`.
//!
//! | variant | one step                     |
//! |---------|------------------------------|
//! | SB      | `S B`                        |
//! | BS      | `B S`                        |
//! | BSB     | `B(theta/2) S B(theta/2)`    |
//! | SBS     | `S+ B S-`                    |
//! | SQW     | `S+ B2 S- B1`                |
//!
//! Products read right to left: SB applies the coin first.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::{angle_distance, CoinSpec, ANGLE_TOL};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, WalkerState};
use crate::linalg::{DenseMatrix, Mat2, ONE};
use crate::observables;

/// Largest lattice for which a dense walk matrix is built.
pub const DENSE_MAX_SITES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sb,
    Bs,
    Bsb,
    Sbs,
    Sqw,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Sb, Variant::Bs, Variant::Bsb, Variant::Sbs, Variant::Sqw];
    /// The single-coin variants.
    pub const SINGLE_COIN: [Variant; 4] = [Variant::Sb, Variant::Bs, Variant::Bsb, Variant::Sbs];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Sb => "sb",
            Variant::Bs => "bs",
            Variant::Bsb => "bsb",
            Variant::Sbs => "sbs",
            Variant::Sqw => "sqw",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sb" => Ok(Variant::Sb),
            "bs" => Ok(Variant::Bs),
            "bsb" => Ok(Variant::Bsb),
            "sbs" => Ok(Variant::Sbs),
            "sqw" => Ok(Variant::Sqw),
            other => Err(Error::UnsupportedVariant(other.to_string())),
        }
    }
}

/// A one-step walk rule together with its coin(s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum WalkOperator {
    Sb { coin: CoinSpec },
    Bs { coin: CoinSpec },
    Bsb { coin: CoinSpec },
    Sbs { coin: CoinSpec },
    Sqw { first: CoinSpec, second: CoinSpec },
}

impl WalkOperator {
    /// Single-coin operator. For `Sqw` the coin is used as the second coin and
    /// the first is the identity, which reproduces SBS.
    pub fn new(variant: Variant, coin: CoinSpec) -> Self {
        match variant {
            Variant::Sb => WalkOperator::Sb { coin },
            Variant::Bs => WalkOperator::Bs { coin },
            Variant::Bsb => WalkOperator::Bsb { coin },
            Variant::Sbs => WalkOperator::Sbs { coin },
            Variant::Sqw => WalkOperator::Sqw { first: CoinSpec::identity(coin.phi()), second: coin },
        }
    }

    pub fn sqw(first: CoinSpec, second: CoinSpec) -> Self {
        WalkOperator::Sqw { first, second }
    }

    pub fn variant(&self) -> Variant {
        match self {
            WalkOperator::Sb { .. } => Variant::Sb,
            WalkOperator::Bs { .. } => Variant::Bs,
            WalkOperator::Bsb { .. } => Variant::Bsb,
            WalkOperator::Sbs { .. } => Variant::Sbs,
            WalkOperator::Sqw { .. } => Variant::Sqw,
        }
    }

    pub fn coins(&self) -> Vec<CoinSpec> {
        match *self {
            WalkOperator::Sb { coin }
            | WalkOperator::Bs { coin }
            | WalkOperator::Bsb { coin }
            | WalkOperator::Sbs { coin } => vec![coin],
            WalkOperator::Sqw { first, second } => vec![first, second],
        }
    }

    /// The main coin: the only coin, or the second coin of SQW.
    pub fn coin(&self) -> CoinSpec {
        match *self {
            WalkOperator::Sb { coin }
            | WalkOperator::Bs { coin }
            | WalkOperator::Bsb { coin }
            | WalkOperator::Sbs { coin } => coin,
            WalkOperator::Sqw { second, .. } => second,
        }
    }

    /// The operator in a basis rotated by `lambda`.
    pub fn rotated(&self, lambda: f64) -> Self {
        self.map_coins(|c| c.rotated(lambda))
    }

    pub fn map_coins(&self, f: impl Fn(&CoinSpec) -> CoinSpec) -> Self {
        match self {
            WalkOperator::Sb { coin } => WalkOperator::Sb { coin: f(coin) },
            WalkOperator::Bs { coin } => WalkOperator::Bs { coin: f(coin) },
            WalkOperator::Bsb { coin } => WalkOperator::Bsb { coin: f(coin) },
            WalkOperator::Sbs { coin } => WalkOperator::Sbs { coin: f(coin) },
            WalkOperator::Sqw { first, second } => WalkOperator::Sqw { first: f(first), second: f(second) },
        }
    }

    /// Checks that every non-identity coin is expressed in `basis_phi`.
    pub fn check_basis(&self, basis_phi: f64) -> Result<()> {
        for coin in self.coins() {
            if !coin.is_identity() && angle_distance(coin.phi(), basis_phi).abs() > ANGLE_TOL {
                return Err(Error::BasisMismatch { coin: coin.phi(), state: basis_phi });
            }
        }
        Ok(())
    }

    /// The factors of one step in application order.
    pub fn stages(&self) -> Vec<Stage> {
        use Stage::*;
        match *self {
            WalkOperator::Sb { coin } => vec![Coin(coin.matrix()), Shift],
            WalkOperator::Bs { coin } => vec![Shift, Coin(coin.matrix())],
            WalkOperator::Bsb { coin } => {
                let h = coin.half().matrix();
                vec![Coin(h), Shift, Coin(h)]
            }
            WalkOperator::Sbs { coin } => vec![HalfShift(Side::Minus), Coin(coin.matrix()), HalfShift(Side::Plus)],
            WalkOperator::Sqw { first, second } => vec![
                Coin(first.matrix()),
                HalfShift(Side::Minus),
                Coin(second.matrix()),
                HalfShift(Side::Plus),
            ],
        }
    }
}

/// Which half of the conditional shift to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Moves only the left-handed slice, `u -> u - 1`.
    Minus,
    /// Moves only the right-handed slice, `u -> u + 1`.
    Plus,
}

/// One factor of a walk step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stage {
    Coin(Mat2),
    Shift,
    HalfShift(Side),
}

fn coin_in_place(amps: &mut [C64], n: usize, u: &Mat2) {
    let (left, right) = amps.split_at_mut(n);
    for (l, r) in left.iter_mut().zip(right.iter_mut()) {
        let [a, b] = u.apply([*l, *r]);
        *l = a;
        *r = b;
    }
}

fn shift_left_slice(amps: &mut [C64], n: usize) {
    // new[u - 1] = old[u]
    amps[..n].rotate_left(1);
}

fn shift_right_slice(amps: &mut [C64], n: usize) {
    // new[u + 1] = old[u]
    amps[n..].rotate_right(1);
}

pub(crate) fn run_stages(amps: &mut [C64], n: usize, stages: &[Stage]) {
    for stage in stages {
        match stage {
            Stage::Coin(u) => coin_in_place(amps, n, u),
            Stage::Shift => {
                shift_left_slice(amps, n);
                shift_right_slice(amps, n);
            }
            Stage::HalfShift(Side::Minus) => shift_left_slice(amps, n),
            Stage::HalfShift(Side::Plus) => shift_right_slice(amps, n),
        }
    }
}

/// Applies `U` to the chirality pair at every site.
pub fn apply_coin(s: &WalkerState, u: &Mat2) -> WalkerState {
    let mut out = s.clone();
    let n = s.lattice().size();
    coin_in_place(out.amplitudes_mut(), n, u);
    out
}

/// Conditional shift: left-handed amplitudes hop left, right-handed hop right.
pub fn apply_shift(s: &WalkerState) -> WalkerState {
    let mut out = s.clone();
    run_stages(out.amplitudes_mut(), s.lattice().size(), &[Stage::Shift]);
    out
}

pub fn apply_half_shift(s: &WalkerState, side: Side) -> WalkerState {
    let mut out = s.clone();
    run_stages(out.amplitudes_mut(), s.lattice().size(), &[Stage::HalfShift(side)]);
    out
}

/// One walk step. Coins must be expressed in the state's basis.
pub fn step(s: &WalkerState, op: &WalkOperator) -> Result<WalkerState> {
    op.check_basis(s.basis_phi())?;
    let mut out = s.clone();
    run_stages(out.amplitudes_mut(), s.lattice().size(), &op.stages());
    Ok(out)
}

/// Which observables `evolve` records per step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observe {
    pub distribution: bool,
    pub chirality: bool,
    pub entropy: bool,
    pub mean_x: bool,
}

impl Observe {
    pub fn all() -> Self {
        Observe { distribution: true, chirality: true, entropy: true, mean_x: true }
    }

    pub fn none() -> Self {
        Observe { distribution: false, chirality: false, entropy: false, mean_x: false }
    }

    pub fn distribution_only() -> Self {
        Observe { distribution: true, ..Self::none() }
    }
}

impl Default for Observe {
    fn default() -> Self {
        Self::all()
    }
}

/// Per-step observables of an evolution, rows `t = 0..=steps`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacetimeRecord {
    pub lattice: Lattice,
    pub operator: WalkOperator,
    pub basis_phi: f64,
    pub steps: usize,
    /// Set when `steps >= N/2`: the light cone of a point source reaches
    /// around the lattice and signed coordinates become ambiguous.
    pub wraparound: bool,
    /// `P[t][u]`, indexed by register value.
    pub distribution: Option<Vec<Vec<f64>>>,
    pub p_left: Option<Vec<f64>>,
    pub p_right: Option<Vec<f64>>,
    /// Coin-position entanglement entropy in bits.
    pub entropy: Option<Vec<f64>>,
    /// Signed `<x>`; withheld when the run wraps around.
    pub mean_x: Option<Vec<f64>>,
}

/// Result of `evolve`: the record and the state after the last step.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub record: SpacetimeRecord,
    pub final_state: WalkerState,
}

/// True when a run of `steps` steps can wrap around a lattice of `n` sites.
pub fn wraps_around(steps: usize, n: usize) -> bool {
    steps >= n / 2
}

/// Applies `op` `steps` times, recording the requested observables after
/// every step (and for the initial state).
pub fn evolve(s0: &WalkerState, op: &WalkOperator, steps: usize, observe: Observe) -> Result<Evolution> {
    op.check_basis(s0.basis_phi())?;
    let lattice = s0.lattice();
    let n = lattice.size();
    let wraparound = wraps_around(steps, n);
    let want_mean = observe.mean_x && !wraparound;

    let mut distribution = observe.distribution.then(|| Vec::with_capacity(steps + 1));
    let mut p_left = observe.chirality.then(|| Vec::with_capacity(steps + 1));
    let mut p_right = observe.chirality.then(|| Vec::with_capacity(steps + 1));
    let mut entropy = observe.entropy.then(|| Vec::with_capacity(steps + 1));
    let mut mean_x = want_mean.then(|| Vec::with_capacity(steps + 1));

    let mut record_row = |s: &WalkerState| {
        if distribution.is_some() || mean_x.is_some() {
            let p = observables::position_distribution(s);
            if let Some(m) = mean_x.as_mut() {
                m.push(observables::mean_signed(&lattice, &p));
            }
            if let Some(d) = distribution.as_mut() {
                d.push(p);
            }
        }
        if let (Some(l), Some(r)) = (p_left.as_mut(), p_right.as_mut()) {
            let (pl, pr) = observables::chirality_probabilities(s);
            l.push(pl);
            r.push(pr);
        }
        if let Some(e) = entropy.as_mut() {
            e.push(observables::entanglement_entropy(s));
        }
    };

    let stages = op.stages();
    let mut state = s0.clone();
    record_row(&state);
    for _ in 0..steps {
        run_stages(state.amplitudes_mut(), n, &stages);
        record_row(&state);
    }

    Ok(Evolution {
        record: SpacetimeRecord {
            lattice,
            operator: *op,
            basis_phi: s0.basis_phi(),
            steps,
            wraparound,
            distribution,
            p_left,
            p_right,
            entropy,
            mean_x,
        },
        final_state: state,
    })
}

/// `W^t s` without recording anything.
pub fn evolve_state(s0: &WalkerState, op: &WalkOperator, steps: usize) -> Result<WalkerState> {
    op.check_basis(s0.basis_phi())?;
    let stages = op.stages();
    let n = s0.lattice().size();
    let mut state = s0.clone();
    for _ in 0..steps {
        run_stages(state.amplitudes_mut(), n, &stages);
    }
    Ok(state)
}

impl SpacetimeRecord {
    /// `t,x,P` rows, `x` signed and ascending within each `t`.
    pub fn to_csv(&self) -> Option<String> {
        let dist = self.distribution.as_ref()?;
        let mut out = String::from("t,x,P\n");
        for (t, row) in dist.iter().enumerate() {
            for u in self.lattice.signed_order() {
                out.push_str(&format!("{},{},{}\n", t, self.lattice.signed(u), row[u]));
            }
        }
        Some(out)
    }

    /// `t,pL,pR,entropy,mean_x` rows; unrecorded columns are left empty.
    pub fn observables_csv(&self) -> String {
        let mut out = String::from("t,pL,pR,entropy,mean_x\n");
        let cell = |v: &Option<Vec<f64>>, t: usize| v.as_ref().map(|v| v[t].to_string()).unwrap_or_default();
        for t in 0..=self.steps {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                t,
                cell(&self.p_left, t),
                cell(&self.p_right, t),
                cell(&self.entropy, t),
                cell(&self.mean_x, t)
            ));
        }
        out
    }

    /// JSON sidecar holding run metadata and the scalar series.
    pub fn metadata_json(&self, initial: Option<&str>) -> serde_json::Value {
        let warning = self.wraparound.then(|| {
            format!(
                "{} steps on {} sites: the walk can wrap around; signed <x> is not reported",
                self.steps,
                self.lattice.size()
            )
        });
        serde_json::json!({
            "lattice": { "k": self.lattice.qubits(), "N": self.lattice.size(), "boundary": "periodic" },
            "position_convention": "register u maps to x = ((u + N/2) mod N) - N/2",
            "operator": self.operator,
            "basis_phi": self.basis_phi,
            "steps": self.steps,
            "initial": initial,
            "wraparound": self.wraparound,
            "warning": warning,
            "entropy_units": "bits",
            "series": {
                "pL": self.p_left,
                "pR": self.p_right,
                "entropy": self.entropy,
                "mean_x": self.mean_x,
            }
        })
    }
}

fn dense_shift(lat: Lattice, move_left: bool, move_right: bool) -> DenseMatrix {
    let n = lat.size();
    let mut m = DenseMatrix::zeros(2 * n);
    for u in 0..n {
        let l_to = if move_left { (u + n - 1) % n } else { u };
        let r_to = if move_right { (u + 1) % n } else { u };
        m[(l_to, u)] = ONE;
        m[(n + r_to, n + u)] = ONE;
    }
    m
}

fn dense_coin(lat: Lattice, b: &Mat2) -> DenseMatrix {
    let n = lat.size();
    let mut m = DenseMatrix::zeros(2 * n);
    for u in 0..n {
        for c in 0..2 {
            for c2 in 0..2 {
                m[(c * n + u, c2 * n + u)] = b.0[c][c2];
            }
        }
    }
    m
}

/// The one-step operator as an explicit `2N x 2N` matrix in chirality-major
/// order, assembled from Kronecker factors rather than by stepping.
pub fn dense_walk_matrix(op: &WalkOperator, lat: Lattice) -> Result<DenseMatrix> {
    let n = lat.size();
    if n > DENSE_MAX_SITES {
        return Err(Error::DenseTooLarge(n));
    }
    let shift = dense_shift(lat, true, true);
    let minus = dense_shift(lat, true, false);
    let plus = dense_shift(lat, false, true);
    let m = match *op {
        WalkOperator::Sb { coin } => &shift * &dense_coin(lat, &coin.matrix()),
        WalkOperator::Bs { coin } => &dense_coin(lat, &coin.matrix()) * &shift,
        WalkOperator::Bsb { coin } => {
            let h = dense_coin(lat, &coin.half().matrix());
            &(&h * &shift) * &h
        }
        WalkOperator::Sbs { coin } => &(&plus * &dense_coin(lat, &coin.matrix())) * &minus,
        WalkOperator::Sqw { first, second } => {
            let b1 = dense_coin(lat, &first.matrix());
            let b2 = dense_coin(lat, &second.matrix());
            &(&(&plus * &b2) * &minus) * &b1
        }
    };
    Ok(m)
}
