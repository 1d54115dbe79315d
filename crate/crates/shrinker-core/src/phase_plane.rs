//! Closed-form primitives of the `(R, psi)` phase plane.
//!
//! A curve on a shrinking network is determined, up to rotation, by one
//! conserved quantity along the curve:
//!
//! ```text
//!     K(R) = exp((R^2 - 1) / 2) / R = c * sin(psi)
//! ```
//!
//! where `R` is the distance to the homothety center, `psi` is the angle from
//! the position vector to the unit tangent, and the energy `c >= 1` labels the
//! trajectory (`c = 1` is the unit circle). `K` has a strict minimum `K(1) =
//! 1` and diverges at both ends of `(0, oo)`, so each value `x > 1` has two
//! preimages: `R^-(x) < 1` on the left branch and `R^+(x) > 1` on the right.
//!
//! The curvature along a trajectory is `k = R sin(psi)`, and its turning
//! values solve `V(k) = eta` where `V(k) = k^2 - 2 ln k` is the curvature
//! potential and `eta = 1 + 2 ln c` is the energy in potential form. The
//! curvature minimum of the trajectory is exactly `R^-(c)` and the maximum is
//! `R^+(c)`, both attained where `psi = pi/2`.
//!
//! Closed trajectories with `c >= 2/sqrt(3)` carry six distinguished points
//! used throughout the catalog: the four points `A, B, C, D` where `K(R) =
//! sqrt(3) c / 2` (equivalently `psi ∈ {pi/3, 2pi/3}` at curvature `k =
//! sqrt(3) R / 2`), and the two branch turns `M, N` at `R = 1` where the
//! trajectory switches sides.

use crate::error::{Error, Result};
use crate::roots::newton_bracketed;
use serde::{Deserialize, Serialize};

/// Lowest energy at which the junction points `A, B, C, D` exist: `2/sqrt(3)`.
pub const C_STAR: f64 = 1.154_700_538_379_251_5;

/// `eta` value of [`C_STAR`]: `1 + ln(4/3)`.
pub const ETA_STAR: f64 = 1.287_682_072_451_780_9;

/// Upper end of the admissible window for upper-curve energies: `e^0.15325`.
pub const C_BAR: f64 = 1.165_616_346_606_914_1;

/// `eta` value of [`C_BAR`]: `1.3065`.
pub const ETA_BAR: f64 = 1.3065;

/// Energy threshold beyond which `h1 + 2 h2` exceeds `pi` outright: `e^0.19`.
pub const C_HAT: f64 = 1.209_249_597_657_251_5;

/// `eta` value of [`C_HAT`]: `1.38`.
pub const ETA_HAT: f64 = 1.38;

/// Open energy window `(C_STAR, C_BAR)` in which every upper curve of a
/// two-region network must live.
pub fn admissible_window() -> (f64, f64) {
    (C_STAR, C_BAR)
}

/// Trajectory label: energy `c > 1` together with its potential form
/// `eta = 1 + 2 ln c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    c: f64,
    eta: f64,
}

impl Energy {
    /// Builds from `c`. Requires `c > 1` strictly; the circle trajectory
    /// `c = 1` degenerates to a point in the phase plane and is rejected.
    pub fn from_c(c: f64) -> Result<Energy> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::Domain(format!("energy requires c > 1, got {c}")));
        }
        Ok(Energy { c, eta: 1.0 + 2.0 * c.ln() })
    }

    /// Builds from `eta = 1 + 2 ln c`. Requires `eta > 1`.
    pub fn from_eta(eta: f64) -> Result<Energy> {
        if !(eta > 1.0) || !eta.is_finite() {
            return Err(Error::Domain(format!("energy requires eta > 1, got {eta}")));
        }
        Ok(Energy { c: ((eta - 1.0) / 2.0).exp(), eta })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Smallest tangent angle on the trajectory, `asin(1/c)`, attained at `N`.
    pub fn psi_min(&self) -> f64 {
        (1.0 / self.c).asin()
    }

    /// Largest tangent angle, `pi - asin(1/c)`, attained at `M`.
    pub fn psi_max(&self) -> f64 {
        std::f64::consts::PI - self.psi_min()
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            c: f64,
            #[serde(default)]
            eta: Option<f64>,
        }
        let raw = Raw::deserialize(de)?;
        let e = Energy::from_c(raw.c).map_err(serde::de::Error::custom)?;
        if let Some(eta) = raw.eta {
            if (eta - e.eta).abs() > 1e-12 * e.eta.max(1.0) {
                return Err(serde::de::Error::custom(format!(
                    "inconsistent energy: eta {} does not match c {}",
                    eta, raw.c
                )));
            }
        }
        Ok(e)
    }
}

/// Side of the phase plane: `Left` is `R < 1`, `Right` is `R > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Left,
    Right,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::Left => Branch::Right,
            Branch::Right => Branch::Left,
        }
    }
}

/// A point on a fixed trajectory: tangent angle, branch, and the derived
/// radius and curvature. At the branch turns (`psi` at its extremes, `R = 1`)
/// the branch tag is conventional, not geometric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub psi: f64,
    pub branch: Branch,
    pub r: f64,
    pub k: f64,
}

impl PhasePoint {
    /// Point at tangent angle `psi` on the given branch. `psi` must lie in
    /// `[psi_min, psi_max]` for the trajectory.
    pub fn new(e: Energy, psi: f64, branch: Branch) -> Result<PhasePoint> {
        let (lo, hi) = (e.psi_min(), e.psi_max());
        // One ulp of slack: psi_min itself round-trips through sin/asin.
        let slack = 1e-14;
        if !(psi >= lo - slack && psi <= hi + slack) {
            return Err(Error::Domain(format!(
                "psi = {psi} outside [{lo}, {hi}] for c = {}",
                e.c()
            )));
        }
        let x = (e.c() * psi.sin()).max(1.0);
        let r = invert_k(x, branch)?;
        Ok(PhasePoint { psi, branch, r, k: r * psi.sin() })
    }

    /// Point at radius `r` on the lower half of the trajectory
    /// (`psi <= pi/2`). Requires `R^-(c) <= r <= R^+(c)`.
    pub fn from_radius_lower(e: Energy, r: f64) -> Result<PhasePoint> {
        let psi = psi_at_radius(e, r)?;
        Ok(PhasePoint {
            psi,
            branch: if r < 1.0 { Branch::Left } else { Branch::Right },
            r,
            k: r * psi.sin(),
        })
    }

    /// Point at radius `r` on the upper half (`psi >= pi/2`).
    pub fn from_radius_upper(e: Energy, r: f64) -> Result<PhasePoint> {
        let psi = std::f64::consts::PI - psi_at_radius(e, r)?;
        Ok(PhasePoint {
            psi,
            branch: if r < 1.0 { Branch::Left } else { Branch::Right },
            r,
            k: r * psi.sin(),
        })
    }
}

fn psi_at_radius(e: Energy, r: f64) -> Result<f64> {
    let kr = k_radial(r)?;
    let ratio = kr / e.c();
    if ratio > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "radius {r} is off the trajectory c = {} (K(R) = {kr} > c)",
            e.c()
        )));
    }
    Ok(ratio.min(1.0).asin())
}

/// The six distinguished points of a trajectory with `c >= 2/sqrt(3)`.
///
/// Counterclockwise traversal order: `N -> A -> B -> M -> C -> D -> N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecialPointLabel {
    /// `psi = pi/3`, right branch.
    A,
    /// `psi = 2pi/3`, right branch.
    B,
    /// `psi = 2pi/3`, left branch.
    C,
    /// `psi = pi/3`, left branch.
    D,
    /// Branch turn at `psi = psi_max`, `R = 1`.
    M,
    /// Branch turn at `psi = psi_min`, `R = 1`.
    N,
}

impl SpecialPointLabel {
    pub const ALL: [SpecialPointLabel; 6] = [
        SpecialPointLabel::A,
        SpecialPointLabel::B,
        SpecialPointLabel::C,
        SpecialPointLabel::D,
        SpecialPointLabel::M,
        SpecialPointLabel::N,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpecialPointLabel::A => "A",
            SpecialPointLabel::B => "B",
            SpecialPointLabel::C => "C",
            SpecialPointLabel::D => "D",
            SpecialPointLabel::M => "M",
            SpecialPointLabel::N => "N",
        }
    }
}

/// Conservation function `K(R) = exp((R^2 - 1)/2) / R` for `R > 0`.
pub fn k_radial(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("K(R) requires R > 0, got {r}")));
    }
    Ok(((r * r - 1.0) / 2.0).exp() / r)
}

/// Logarithm of [`k_radial`], better conditioned for inversion.
fn ln_k_radial(r: f64) -> f64 {
    (r * r - 1.0) / 2.0 - r.ln()
}

/// Branch inverse of `K`: the unique `R` with `K(R) = x` on the requested
/// side of `R = 1`. Requires `x >= 1`; `x = 1` maps to `R = 1` exactly.
///
/// Accuracy: `K(invert_k(x, b))` matches `x` to relative error
/// [`tolerances::INVERT_K_REL`].
pub fn invert_k(x: f64, branch: Branch) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("invert_k requires x >= 1, got {x}")));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let lnx = x.ln();
    // Solve g(R) = ln K(R) - ln x = 0. g is strictly monotone on each branch.
    let g = |r: f64| (ln_k_radial(r) - lnx, r - 1.0 / r);
    let dev = (x - 1.0).sqrt();
    match branch {
        Branch::Left => {
            // Near R = 1, ln K(R) ~ (R - 1)^2, so 1 - sqrt(x - 1) seeds well.
            let seed = (1.0 - dev).clamp(1e-6, 1.0);
            let mut lo = seed.min(0.5);
            while g(lo).0 < 0.0 {
                lo *= 0.5;
                if lo < 1e-300 {
                    return Err(Error::Domain(format!(
                        "invert_k: left bracket collapsed for x = {x}"
                    )));
                }
            }
            let root = newton_bracketed(g, lo, 1.0, seed.max(lo), 1e-14, 80)?;
            Ok(root.x)
        }
        Branch::Right => {
            let seed = (1.0 + dev).max(1.0);
            let mut hi = seed.max(1.5);
            while g(hi).0 < 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::Domain(format!(
                        "invert_k: right bracket diverged for x = {x}"
                    )));
                }
            }
            let root = newton_bracketed(g, 1.0, hi, seed.min(hi), 1e-14, 80)?;
            Ok(root.x)
        }
    }
}

/// Curvature potential `V(k) = k^2 - 2 ln k` for `k > 0`. Strict minimum
/// `V(1) = 1`.
pub fn v_potential(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("V(k) requires k > 0, got {k}")));
    }
    Ok(k * k - 2.0 * k.ln())
}

/// Minimum and maximum curvature along the trajectory: `(R^-(c), R^+(c))`,
/// the two solutions of `V(k) = eta`.
pub fn turning_curvatures(e: Energy) -> Result<(f64, f64)> {
    Ok((invert_k(e.c(), Branch::Left)?, invert_k(e.c(), Branch::Right)?))
}

/// One of the six distinguished trajectory points. `A, B, C, D` require
/// `c >= 2/sqrt(3)`; `M, N` exist for every `c > 1`.
pub fn special_point(e: Energy, label: SpecialPointLabel) -> Result<PhasePoint> {
    use std::f64::consts::{FRAC_PI_3, PI};
    let c = e.c();
    let junction_level = 3f64.sqrt() * c / 2.0;
    let junction = |branch: Branch, psi: f64| -> Result<PhasePoint> {
        // One-ulp slack: at the threshold energy the level is exactly 1 in
        // real arithmetic but may round a hair below.
        if junction_level < 1.0 - 1e-12 {
            return Err(Error::UndefinedPoint { label: label_str(label), c });
        }
        let r = invert_k(junction_level.max(1.0), branch)?;
        Ok(PhasePoint { psi, branch, r, k: r * psi.sin() })
    };
    match label {
        SpecialPointLabel::A => junction(Branch::Right, FRAC_PI_3),
        SpecialPointLabel::B => junction(Branch::Right, 2.0 * FRAC_PI_3),
        SpecialPointLabel::C => junction(Branch::Left, 2.0 * FRAC_PI_3),
        SpecialPointLabel::D => junction(Branch::Left, FRAC_PI_3),
        // Branch tags at the turns name the branch the counterclockwise
        // traversal enters next: right after N, left after M.
        SpecialPointLabel::M => Ok(PhasePoint {
            psi: PI - e.psi_min(),
            branch: Branch::Left,
            r: 1.0,
            k: e.psi_min().sin(),
        }),
        SpecialPointLabel::N => Ok(PhasePoint {
            psi: e.psi_min(),
            branch: Branch::Right,
            r: 1.0,
            k: e.psi_min().sin(),
        }),
    }
}

fn label_str(label: SpecialPointLabel) -> &'static str {
    label.as_str()
}
