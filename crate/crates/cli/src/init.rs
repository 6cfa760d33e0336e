use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use qwalk_core::coin::angle_distance;
use qwalk_core::lattice::{
    build_state, dirac_plane_wave, majorana_plane_wave, InitialStateSpec, Lattice, Profile, StateFile, WalkerState,
};
use qwalk_core::{coin::WEYL_MAJORANA, Complex64};

use crate::angle::parse_angle;
use crate::UsageError;

/// Initial state selected with `--init`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// Coin spinor at signed position `x0`.
    Point { theta0: f64, phi0: f64, x0: i64 },
    /// Coin spinor times the uniform superposition.
    Uniform { theta0: f64, phi0: f64 },
    MajoranaPlane { delta: f64 },
    DiracPlane { sign: i8 },
    /// Coin spinor times a position profile read from a JSON array of `[re, im]`.
    Profile { theta0: f64, phi0: f64, path: PathBuf },
    /// Full state from a `final_state.json`-style file.
    State { path: PathBuf },
}

impl InitSpec {
    /// Grammar: optional keyword (`point`, `uniform`, `majorana-plane`,
    /// `dirac-plane`) followed by `key=value` pairs, all comma-separated.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut kind = "point";
        let (mut theta0, mut phi0, mut x0) = (0.0, 0.0, 0i64);
        let mut delta = 0.0;
        let mut sign = 1i8;
        let mut profile = None;
        let mut state = None;
        for (i, tok) in text.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            match tok.split_once('=') {
                None if i == 0 => kind = tok,
                None => return Err(format!("unexpected '{tok}' in --init")),
                Some((key, value)) => match key {
                    "theta0" => theta0 = parse_angle(value)?,
                    "phi0" => phi0 = parse_angle(value)?,
                    "x0" => x0 = value.parse().map_err(|_| format!("invalid x0 '{value}'"))?,
                    "delta" => delta = parse_angle(value)?,
                    "sign" => {
                        sign = match value {
                            "+1" | "1" | "+" => 1,
                            "-1" | "-" => -1,
                            _ => return Err(format!("sign must be +1 or -1, got '{value}'")),
                        }
                    }
                    "profile" => profile = Some(PathBuf::from(value)),
                    "state" => state = Some(PathBuf::from(value)),
                    _ => return Err(format!("unknown --init key '{key}'")),
                },
            }
        }
        if let Some(path) = state {
            return Ok(InitSpec::State { path });
        }
        if let Some(path) = profile {
            return Ok(InitSpec::Profile { theta0, phi0, path });
        }
        match kind {
            "point" => Ok(InitSpec::Point { theta0, phi0, x0 }),
            "uniform" => Ok(InitSpec::Uniform { theta0, phi0 }),
            "majorana-plane" => Ok(InitSpec::MajoranaPlane { delta }),
            "dirac-plane" => Ok(InitSpec::DiracPlane { sign }),
            other => Err(format!("unknown initial state '{other}'")),
        }
    }

    /// Lattice size fixed by the spec itself, if any.
    pub fn own_qubits(&self) -> Result<Option<u32>> {
        match self {
            InitSpec::State { path } => Ok(Some(read_state_file(path)?.k)),
            _ => Ok(None),
        }
    }

    pub fn build(&self, lat: Lattice, basis_phi: f64) -> Result<WalkerState> {
        let plane_basis = || -> Result<()> {
            if angle_distance(basis_phi, WEYL_MAJORANA).abs() > 1e-12 {
                return Err(UsageError(
                    "plane-wave initial states are defined in the Weyl-Majorana basis; use --phi pi/2".into(),
                )
                .into());
            }
            Ok(())
        };
        let state = match self {
            InitSpec::Point { theta0, phi0, x0 } => {
                let half = lat.size() as i64 / 2;
                if *x0 < -half || *x0 >= half {
                    return Err(UsageError(format!("x0 = {x0} is outside [-{half}, {half})")).into());
                }
                build_state(&InitialStateSpec::point(*theta0, *phi0, lat.register(*x0)), lat, basis_phi)?
            }
            InitSpec::Uniform { theta0, phi0 } => {
                let amp = Complex64::new(1.0 / (lat.size() as f64).sqrt(), 0.0);
                let spec =
                    InitialStateSpec { theta0: *theta0, phi0: *phi0, profile: Profile::Explicit(vec![amp; lat.size()]) };
                build_state(&spec, lat, basis_phi)?
            }
            InitSpec::MajoranaPlane { delta } => {
                plane_basis()?;
                majorana_plane_wave(lat, *delta)
            }
            InitSpec::DiracPlane { sign } => {
                plane_basis()?;
                dirac_plane_wave(lat, *sign)
            }
            InitSpec::Profile { theta0, phi0, path } => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)
                    .map_err(|e| UsageError(format!("{}: expected a JSON array of [re, im]: {e}", path.display())))?;
                let profile = pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                let spec = InitialStateSpec { theta0: *theta0, phi0: *phi0, profile: Profile::Explicit(profile) };
                build_state(&spec, lat, basis_phi)?
            }
            InitSpec::State { path } => {
                let s = read_state_file(path)?.into_state()?;
                if s.lattice() != lat {
                    return Err(UsageError(format!(
                        "state file has k = {}, run uses k = {}",
                        s.lattice().qubits(),
                        lat.qubits()
                    ))
                    .into());
                }
                s
            }
        };
        Ok(state)
    }
}

impl std::fmt::Display for InitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitSpec::Point { theta0, phi0, x0 } => write!(f, "point,theta0={theta0},phi0={phi0},x0={x0}"),
            InitSpec::Uniform { theta0, phi0 } => write!(f, "uniform,theta0={theta0},phi0={phi0}"),
            InitSpec::MajoranaPlane { delta } => write!(f, "majorana-plane,delta={delta}"),
            InitSpec::DiracPlane { sign } => write!(f, "dirac-plane,sign={sign:+}"),
            InitSpec::Profile { theta0, phi0, path } => {
                write!(f, "profile={},theta0={theta0},phi0={phi0}", path.display())
            }
            InitSpec::State { path } => write!(f, "state={}", path.display()),
        }
    }
}

fn read_state_file(path: &PathBuf) -> Result<StateFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: not a state file: {e}", path.display())).into())
}
