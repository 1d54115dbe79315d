//! Census of lower-curve walks, their closure equations, and the resulting
//! two-region catalog: the Cisgeminate eye plus six degenerate networks.
//!
//! A lower curve visits the phase-plane stations counterclockwise and hops
//! `D -> C` or `A -> B` at each ray it emits. A [`TrajectoryPath`] records
//! the endpoints of the arcs between hops; its total polar-angle advance is
//! a fixed non-negative integer combination ([`HCombo`]) of the arc angles
//! `h1`, `h2`, `h3` and the start-dependent partials `h1o`, `h3o`. Closing
//! the network pins that total to `pi` (mirror assembly) or `2 pi` (closed
//! loop), one scalar equation per topology; a bracketed root solve in the
//! energy `c` then either produces a catalog entry or the bracket scan
//! refutes the case. [`check_exclusions`] re-confirms on a grid every
//! inequality used to reject the remaining topologies — a numeric spot
//! check of strict bounds, not a proof.

use crate::angle_functions::{
    delta_theta_mn_with, delta_theta_na_with, delta_theta_pa_with, delta_theta_with, h_circ_with,
    h_triple_with, t_period_with, ArcSpec,
};
use crate::error::{Error, Result};
use crate::integrators::QuadratureSpec;
use crate::phase_plane::{
    invert_k, k_radial, special_point, Branch, Energy, PhasePoint, SpecialPointLabel, C_BAR,
    C_HAT, C_STAR,
};
use crate::roots::brent;
use crate::tolerances;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt;

/// Station letters a walk may visit. `S` and `E` are the free start and end
/// of the curve (butt ends on rays of the outer network); `A`, `B`, `C`, `D`
/// are the four junction stations at curvature level `sqrt(3) c / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeLabel {
    S,
    E,
    A,
    B,
    C,
    D,
}

impl NodeLabel {
    pub fn as_char(self) -> char {
        match self {
            NodeLabel::S => 'S',
            NodeLabel::E => 'E',
            NodeLabel::A => 'A',
            NodeLabel::B => 'B',
            NodeLabel::C => 'C',
            NodeLabel::D => 'D',
        }
    }

    fn from_char(ch: char) -> Option<NodeLabel> {
        Some(match ch {
            'S' => NodeLabel::S,
            'E' => NodeLabel::E,
            'A' => NodeLabel::A,
            'B' => NodeLabel::B,
            'C' => NodeLabel::C,
            'D' => NodeLabel::D,
            _ => return None,
        })
    }

    fn station(self) -> Option<SpecialPointLabel> {
        Some(match self {
            NodeLabel::A => SpecialPointLabel::A,
            NodeLabel::B => SpecialPointLabel::B,
            NodeLabel::C => SpecialPointLabel::C,
            NodeLabel::D => SpecialPointLabel::D,
            NodeLabel::S | NodeLabel::E => return None,
        })
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Which side of the unit circle an endpoint radius sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Inside,
    Outside,
}

impl Region {
    fn branch(self) -> Branch {
        match self {
            Region::Inside => Branch::Left,
            Region::Outside => Branch::Right,
        }
    }

    fn start_station(self) -> NodeLabel {
        match self {
            Region::Inside => NodeLabel::D,
            Region::Outside => NodeLabel::A,
        }
    }

    fn end_station(self) -> NodeLabel {
        match self {
            Region::Inside => NodeLabel::C,
            Region::Outside => NodeLabel::B,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Inside => write!(f, "inside"),
            Region::Outside => write!(f, "outside"),
        }
    }
}

/// A lower-curve walk: the arc endpoints between consecutive ray hops, plus
/// the regions of the free start and end radii. Arcs traverse the station
/// cycle counterclockwise to the first occurrence of their target; hops are
/// always `D -> C` or `A -> B`. A zero-length arc like `(D, D)` marks a hop
/// taken immediately on arrival.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryPath {
    arcs: Vec<(NodeLabel, NodeLabel)>,
    start_region: Region,
    end_region: Region,
}

impl TrajectoryPath {
    pub fn new(
        arcs: Vec<(NodeLabel, NodeLabel)>,
        start_region: Region,
        end_region: Region,
    ) -> Result<TrajectoryPath> {
        let bad = |msg: String| Err(Error::InvalidPath(msg));
        if arcs.is_empty() {
            return bad("a walk needs at least one arc".into());
        }
        let last = arcs.len() - 1;
        for (i, &(a, b)) in arcs.iter().enumerate() {
            if a == NodeLabel::S && i != 0 {
                return bad("S may only open the first arc".into());
            }
            if b == NodeLabel::E && i != last {
                return bad("E may only close the final arc".into());
            }
            if a == NodeLabel::E || b == NodeLabel::S {
                return bad(format!("arc ({a}, {b}) runs against the walk direction"));
            }
        }
        match arcs[0].0 {
            NodeLabel::S => {}
            NodeLabel::D if start_region == Region::Inside => {}
            NodeLabel::A if start_region == Region::Outside => {}
            first => {
                return bad(format!(
                    "walk opens at {first} which contradicts an {start_region} start"
                ))
            }
        }
        match arcs[last].1 {
            NodeLabel::E => {}
            NodeLabel::C if end_region == Region::Inside => {}
            NodeLabel::B if end_region == Region::Outside => {}
            lastl => {
                return bad(format!(
                    "walk closes at {lastl} which contradicts an {end_region} end"
                ))
            }
        }
        for pair in arcs.windows(2) {
            let (hop_src, hop_dst) = (pair[0].1, pair[1].0);
            let ok = matches!(
                (hop_src, hop_dst),
                (NodeLabel::D, NodeLabel::C) | (NodeLabel::A, NodeLabel::B)
            );
            if !ok {
                return bad(format!("hop {hop_src} -> {hop_dst} is not D->C or A->B"));
            }
        }
        Ok(TrajectoryPath {
            arcs,
            start_region,
            end_region,
        })
    }

    /// Parse a walk written as letter pairs joined by `->`, e.g. `"SD->CE"`.
    pub fn parse(text: &str, start_region: Region, end_region: Region) -> Result<TrajectoryPath> {
        let mut arcs = Vec::new();
        for piece in text.split("->") {
            let piece = piece.trim();
            let mut chars = piece.chars();
            let (a, b, rest) = (chars.next(), chars.next(), chars.next());
            match (a, b, rest) {
                (Some(a), Some(b), None) => {
                    match (NodeLabel::from_char(a), NodeLabel::from_char(b)) {
                        (Some(a), Some(b)) => arcs.push((a, b)),
                        _ => {
                            return Err(Error::InvalidPath(format!(
                                "unknown station letter in `{piece}`"
                            )))
                        }
                    }
                }
                _ => {
                    return Err(Error::InvalidPath(format!(
                        "arc `{piece}` is not a two-letter station pair"
                    )))
                }
            }
        }
        TrajectoryPath::new(arcs, start_region, end_region)
    }

    pub fn arcs(&self) -> &[(NodeLabel, NodeLabel)] {
        &self.arcs
    }

    pub fn start_region(&self) -> Region {
        self.start_region
    }

    pub fn end_region(&self) -> Region {
        self.end_region
    }

    /// Number of ray hops, i.e. arcs minus one.
    pub fn hops(&self) -> usize {
        self.arcs.len() - 1
    }
}

impl fmt::Display for TrajectoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.arcs.iter().enumerate() {
            if i > 0 {
                write!(f, "->")?;
            }
            write!(f, "{a}{b}")?;
        }
        Ok(())
    }
}

/// Non-negative integer combination of the arc angles: the symbolic total
/// polar-angle advance of a walk. `h1o`/`h3o` are the start-level partial
/// arcs; `dtheta_pa` is the inner-radius sweep used by the eye's upper curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HCombo {
    pub h1_circ: u32,
    pub h1: u32,
    pub h2: u32,
    pub h3: u32,
    pub h3_circ: u32,
    pub dtheta_pa: u32,
}

impl HCombo {
    pub const fn of(h1: u32, h2: u32, h3: u32) -> HCombo {
        HCombo {
            h1_circ: 0,
            h1,
            h2,
            h3,
            h3_circ: 0,
            dtheta_pa: 0,
        }
    }

    pub fn is_start_free(&self) -> bool {
        self.h1_circ == 0 && self.h3_circ == 0 && self.dtheta_pa == 0
    }

    pub fn eval(&self, e: Energy, r_start: Option<f64>) -> Result<f64> {
        self.eval_with(e, r_start, &QuadratureSpec::default())
    }

    pub fn eval_with(&self, e: Energy, r_start: Option<f64>, quad: &QuadratureSpec) -> Result<f64> {
        let need_start = || {
            Error::Domain(
                "combination has start-dependent terms but no start radius was given".into(),
            )
        };
        let mut total = 0.0;
        if self.h1 + self.h2 + self.h3 > 0 {
            let h = h_triple_with(e, quad)?;
            total += f64::from(self.h1) * h.h1 + f64::from(self.h2) * h.h2 + f64::from(self.h3) * h.h3;
        }
        if self.h1_circ + self.h3_circ > 0 {
            let r = r_start.ok_or_else(need_start)?;
            let (h1c, h3c) = h_circ_with(e, r, quad)?;
            total += f64::from(self.h1_circ) * h1c + f64::from(self.h3_circ) * h3c;
        }
        if self.dtheta_pa > 0 {
            let r = r_start.ok_or_else(need_start)?;
            total += f64::from(self.dtheta_pa) * delta_theta_pa_with(e, r, quad)?;
        }
        Ok(total)
    }
}

impl fmt::Display for HCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = [
            (self.h1_circ, "h1o"),
            (self.h1, "h1"),
            (self.h2, "h2"),
            (self.h3, "h3"),
            (self.h3_circ, "h3o"),
            (self.dtheta_pa, "dtheta_PA"),
        ];
        let mut first = true;
        for (coef, name) in terms {
            if coef == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            if coef == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{coef}*{name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// One row of the walk census: a hop pattern together with its three region
/// variants (inside/inside, inside/outside, outside/outside) and their
/// symbolic angle totals.
#[derive(Debug, Clone)]
pub struct PathFamily {
    /// Letter form of the inside/inside variant, e.g. `"SD->CA->BE"`.
    pub letters: String,
    /// Number of `A -> B` hops in the pattern.
    pub ab_hops: u32,
    /// Region variants in the fixed order `[(In, In), (In, Out), (Out, Out)]`.
    pub columns: [(TrajectoryPath, HCombo); 3],
}

/// Enumerate every walk for a lower region bounded by `bottom_cell_size`
/// curve segments: `n = bottom_cell_size - 2` hops, ordered by the number
/// of `A -> B` hops and then by hop positions. A 2-sided region has no hops
/// and no census row.
pub fn enumerate_paths(bottom_cell_size: u32) -> Result<Vec<PathFamily>> {
    let n = match bottom_cell_size {
        2 => return Ok(Vec::new()),
        3..=5 => bottom_cell_size - 2,
        other => {
            return Err(Error::Domain(format!(
                "bottom cell size {other} is outside the classified range 2..=5"
            )))
        }
    };
    let mut out = Vec::new();
    for j in 0..=n {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() != j {
                continue;
            }
            let mut arcs = Vec::with_capacity(n as usize + 1);
            let mut prev_dst = NodeLabel::S;
            for hop in 0..n {
                let (src, dst) = if mask & (1 << hop) != 0 {
                    (NodeLabel::A, NodeLabel::B)
                } else {
                    (NodeLabel::D, NodeLabel::C)
                };
                arcs.push((prev_dst, src));
                prev_dst = dst;
            }
            arcs.push((prev_dst, NodeLabel::E));

            let build = |s: Region, e: Region| TrajectoryPath::new(arcs.clone(), s, e);
            let inside_inside = build(Region::Inside, Region::Inside)?;
            let mixed = build(Region::Inside, Region::Outside)?;
            let outside_outside = build(Region::Outside, Region::Outside)?;
            let letters = inside_inside.to_string();
            let columns = [
                (
                    inside_inside,
                    HCombo {
                        h1_circ: 2,
                        h1: n - 1,
                        h2: 2 * j,
                        h3: 0,
                        h3_circ: 0,
                        dtheta_pa: 0,
                    },
                ),
                (
                    mixed,
                    HCombo {
                        h1_circ: 1,
                        h1: n,
                        h2: 2 * j + 1,
                        h3: 0,
                        h3_circ: 1,
                        dtheta_pa: 0,
                    },
                ),
                (
                    outside_outside,
                    HCombo {
                        h1_circ: 0,
                        h1: n + 1,
                        h2: 2 * j + 2,
                        h3: 0,
                        h3_circ: 2,
                        dtheta_pa: 0,
                    },
                ),
            ];
            out.push(PathFamily {
                letters,
                ab_hops: j,
                columns,
            });
        }
    }
    Ok(out)
}

// Slack below the junction curvature level within which a free start is
// snapped onto the junction station itself; keeps walks through a degenerate
// start (psi_s = pi/3 to round-off) from wrapping a spurious full period.
const JUNCTION_SNAP: f64 = 1e-9;

fn resolve_start(
    path: &TrajectoryPath,
    e: Energy,
    r_start: f64,
) -> Result<(PhasePoint, bool)> {
    let c = e.c();
    let level = 3f64.sqrt() / 2.0 * c;
    let first = path.arcs[0].0;
    match first {
        NodeLabel::S => {
            let inside = r_start < 1.0;
            let region_ok = match path.start_region {
                Region::Inside => inside,
                Region::Outside => !inside,
            };
            if !region_ok {
                return Err(Error::Domain(format!(
                    "start radius {r_start} is not {} the unit circle",
                    path.start_region
                )));
            }
            let kr = k_radial(r_start)?;
            if kr > c * (1.0 + 1e-12) || kr < level * (1.0 - 1e-12) {
                return Err(Error::Domain(format!(
                    "start radius {r_start} lies outside the junction-to-turn band \
                     (curvature level {kr:.6}, admissible [{level:.6}, {c:.6}])"
                )));
            }
            if kr <= level * (1.0 + JUNCTION_SNAP) {
                let station = path.start_region.start_station();
                Ok((special_point(e, station.station().unwrap())?, true))
            } else {
                Ok((PhasePoint::from_radius_lower(e, r_start)?, false))
            }
        }
        NodeLabel::A | NodeLabel::D => {
            let p = special_point(e, first.station().unwrap())?;
            if (r_start - p.r).abs() > 1e-8 {
                return Err(Error::Domain(format!(
                    "start radius {r_start} does not match station {first} at radius {:.12}",
                    p.r
                )));
            }
            Ok((p, true))
        }
        other => Err(Error::InvalidPath(format!(
            "walk cannot open at station {other}"
        ))),
    }
}

fn resolve_end(
    path: &TrajectoryPath,
    e: Energy,
    r_start: f64,
    start_snapped: bool,
) -> Result<PhasePoint> {
    let last = path.arcs[path.arcs.len() - 1].1;
    match last {
        NodeLabel::E => {
            if start_snapped {
                let station = path.end_region.end_station();
                return special_point(e, station.station().unwrap());
            }
            let r_end = if path.start_region == path.end_region {
                r_start
            } else {
                let kr = k_radial(r_start)?.max(1.0);
                invert_k(kr, path.end_region.branch())?
            };
            PhasePoint::from_radius_upper(e, r_end)
        }
        NodeLabel::B | NodeLabel::C => special_point(e, last.station().unwrap()),
        other => Err(Error::InvalidPath(format!(
            "walk cannot close at station {other}"
        ))),
    }
}

/// Total polar-angle advance of a walk at energy `e`, starting from the
/// concrete radius `r_start`. Arcs are summed with the counterclockwise
/// first-occurrence rule; a start within round-off of the junction level is
/// evaluated at the station itself.
pub fn angle_sum(path: &TrajectoryPath, e: Energy, r_start: f64) -> Result<f64> {
    angle_sum_with(path, e, r_start, &QuadratureSpec::default())
}

pub fn angle_sum_with(
    path: &TrajectoryPath,
    e: Energy,
    r_start: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (s_point, start_snapped) = resolve_start(path, e, r_start)?;
    let e_point = resolve_end(path, e, r_start, start_snapped)?;
    let mut total = 0.0;
    for (i, &(a, b)) in path.arcs.iter().enumerate() {
        let from = match a {
            NodeLabel::S => s_point,
            other => match other.station() {
                Some(st) => special_point(e, st)?,
                None => return Err(Error::InvalidPath(format!("E inside arc {i}"))),
            },
        };
        let to = match b {
            NodeLabel::E => e_point,
            other => match other.station() {
                Some(st) => special_point(e, st)?,
                None => return Err(Error::InvalidPath(format!("S inside arc {i}"))),
            },
        };
        total += delta_theta_with(e, &ArcSpec { from, to }, quad)?;
    }
    Ok(total)
}

/// A closure condition `sum of arc angles = k * pi`, solved for the energy
/// on a bracket. Coefficients are kept as floats so doubled equations like
/// `2*h1+4*h2 = 2*pi` stay representable; census rows always produce the
/// integer combinations of [`HCombo`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureEquation {
    pub h1_circ: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h3_circ: f64,
    pub dtheta_pa: f64,
    /// Right-hand side in radians; always a rational multiple of pi.
    pub target: f64,
    /// Energy bracket searched for the root.
    pub bracket: (f64, f64),
}

/// Default bracket for equations solved directly: the full admissible
/// window, capped well past where every arc angle has leveled off.
pub const DEFAULT_BRACKET: (f64, f64) = (C_STAR + 1e-9, 50.0);

impl ClosureEquation {
    pub fn from_combo(combo: &HCombo, target: f64, bracket: (f64, f64)) -> ClosureEquation {
        ClosureEquation {
            h1_circ: f64::from(combo.h1_circ),
            h1: f64::from(combo.h1),
            h2: f64::from(combo.h2),
            h3: f64::from(combo.h3),
            h3_circ: f64::from(combo.h3_circ),
            dtheta_pa: f64::from(combo.dtheta_pa),
            target,
            bracket,
        }
    }

    pub fn is_start_free(&self) -> bool {
        self.h1_circ == 0.0 && self.h3_circ == 0.0 && self.dtheta_pa == 0.0
    }

    /// Parse `"a*h1+b*h2+c*h3 = k*pi"` with non-negative rational
    /// coefficients (`2`, `0.75`, `3/4`). Only the start-free terms are
    /// accepted; start-dependent equations are built programmatically.
    pub fn parse(input: &str) -> Result<ClosureEquation> {
        let fail = |reason: &str| Error::EquationParse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let (lhs, rhs) = input
            .split_once('=')
            .ok_or_else(|| fail("expected `terms = k*pi`"))?;

        let rhs = rhs.trim();
        let target = if rhs == "pi" {
            PI
        } else {
            let coef = rhs
                .strip_suffix("pi")
                .ok_or_else(|| fail("target must be a multiple of pi, e.g. `pi` or `3/4*pi`"))?
                .trim()
                .trim_end_matches('*')
                .trim();
            if coef.is_empty() {
                PI
            } else {
                parse_coefficient(coef).ok_or_else(|| fail("unreadable target multiple"))? * PI
            }
        };
        if !(target > 0.0) || !target.is_finite() {
            return Err(fail("target must be a positive multiple of pi"));
        }

        let mut h = [0.0f64; 3];
        let mut any = false;
        for term in lhs.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(fail("empty term on the left-hand side"));
            }
            let (coef, name) = match term.split_once('*') {
                Some((c, n)) => (
                    parse_coefficient(c.trim())
                        .ok_or_else(|| fail("coefficients must be non-negative rationals"))?,
                    n.trim(),
                ),
                None => (1.0, term),
            };
            let slot = match name {
                "h1" => 0,
                "h2" => 1,
                "h3" => 2,
                "h1o" | "h3o" | "dtheta_PA" => {
                    return Err(fail(
                        "start-dependent terms are not solvable here; only h1, h2, h3",
                    ))
                }
                _ => return Err(fail("terms must be h1, h2 or h3")),
            };
            h[slot] += coef;
            any = true;
        }
        if !any || h == [0.0; 3] {
            return Err(fail("left-hand side has no nonzero term"));
        }
        Ok(ClosureEquation {
            h1_circ: 0.0,
            h1: h[0],
            h2: h[1],
            h3: h[2],
            h3_circ: 0.0,
            dtheta_pa: 0.0,
            target,
            bracket: DEFAULT_BRACKET,
        })
    }

    /// Left-hand side minus the target at energy `e`.
    pub fn residual_at(&self, e: Energy, r_start: Option<f64>, quad: &QuadratureSpec) -> Result<f64> {
        let need_start = || {
            Error::Domain("equation has start-dependent terms but no start radius was given".into())
        };
        let mut total = 0.0;
        if self.h1 != 0.0 || self.h2 != 0.0 || self.h3 != 0.0 {
            let h = h_triple_with(e, quad)?;
            total += self.h1 * h.h1 + self.h2 * h.h2 + self.h3 * h.h3;
        }
        if self.h1_circ != 0.0 || self.h3_circ != 0.0 {
            let r = r_start.ok_or_else(need_start)?;
            let (h1c, h3c) = h_circ_with(e, r, quad)?;
            total += self.h1_circ * h1c + self.h3_circ * h3c;
        }
        if self.dtheta_pa != 0.0 {
            let r = r_start.ok_or_else(need_start)?;
            total += self.dtheta_pa * delta_theta_pa_with(e, r, quad)?;
        }
        Ok(total - self.target)
    }
}

fn parse_coefficient(text: &str) -> Option<f64> {
    let value = if let Some((p, q)) = text.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        if q <= 0.0 {
            return None;
        }
        p / q
    } else {
        text.parse().ok()?
    };
    (value >= 0.0 && value.is_finite()).then_some(value)
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, coef: f64, name: &str) -> fmt::Result {
    if coef == 1.0 {
        write!(f, "{name}")
    } else if coef.fract() == 0.0 && coef.abs() < 1e15 {
        write!(f, "{}*{name}", coef as i64)
    } else {
        write!(f, "{coef}*{name}")
    }
}

impl fmt::Display for ClosureEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = [
            (self.h1_circ, "h1o"),
            (self.h1, "h1"),
            (self.h2, "h2"),
            (self.h3, "h3"),
            (self.h3_circ, "h3o"),
            (self.dtheta_pa, "dtheta_PA"),
        ];
        let mut first = true;
        for (coef, name) in terms {
            if coef == 0.0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            write_coefficient(f, coef, name)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " = ")?;
        let ratio = self.target / PI;
        if ratio == 1.0 {
            write!(f, "pi")
        } else {
            write_coefficient(f, ratio, "pi")
        }
    }
}

/// Solved closure equation: the energy, the final residual, and whether the
/// bracket scan saw a non-monotone residual (in which case the root found is
/// the first crossing, and uniqueness is not established by the scan alone).
#[derive(Debug, Clone, Copy)]
pub struct ClosureRoot {
    pub energy: Energy,
    pub residual: f64,
    pub iterations: u32,
    pub ambiguous: bool,
}

/// Points in the bracket scan; 64 intervals resolves every census equation.
const SCAN_POINTS: usize = 65;

pub fn solve_closure(eq: &ClosureEquation) -> Result<ClosureRoot> {
    solve_closure_with(eq, &QuadratureSpec::default())
}

pub fn solve_closure_with(eq: &ClosureEquation, quad: &QuadratureSpec) -> Result<ClosureRoot> {
    if !eq.is_start_free() {
        return Err(Error::Domain(
            "equations with start-dependent terms are solved by the catalog builder, \
             not the direct bracket solver"
                .into(),
        ));
    }
    let (lo, hi) = eq.bracket;
    if !(lo > 1.0 && hi > lo) {
        return Err(Error::Domain(format!(
            "bracket [{lo}, {hi}] must satisfy 1 < lo < hi"
        )));
    }

    let mut xs = [0.0f64; SCAN_POINTS];
    let mut fs = [0.0f64; SCAN_POINTS];
    for i in 0..SCAN_POINTS {
        let t = i as f64 / (SCAN_POINTS - 1) as f64;
        xs[i] = lo + t * (hi - lo);
        fs[i] = eq.residual_at(Energy::from_c(xs[i])?, None, quad)?;
    }

    let mut crossings = 0usize;
    let mut first_crossing = None;
    for i in 0..SCAN_POINTS - 1 {
        if fs[i] == 0.0 || fs[i] * fs[i + 1] < 0.0 {
            crossings += 1;
            if first_crossing.is_none() {
                first_crossing = Some(i);
            }
        }
    }
    if fs[SCAN_POINTS - 1] == 0.0 {
        crossings += 1;
        if first_crossing.is_none() {
            first_crossing = Some(SCAN_POINTS - 2);
        }
    }

    let increasing = fs
        .windows(2)
        .all(|w| w[1] - w[0] >= -tolerances::MONOTONE_SLACK);
    let decreasing = fs
        .windows(2)
        .all(|w| w[1] - w[0] <= tolerances::MONOTONE_SLACK);
    let ambiguous = (!increasing && !decreasing) || crossings > 1;

    let Some(i) = first_crossing else {
        return Err(Error::NoRoot {
            equation: eq.to_string(),
            lo,
            hi,
        });
    };

    let root = brent(
        |c| eq.residual_at(Energy::from_c(c)?, None, quad),
        xs[i],
        xs[i + 1],
        1e-15,
        tolerances::ROOT_RESIDUAL,
        200,
    )?;
    if root.f.abs() > tolerances::ROOT_RESIDUAL {
        return Err(Error::Domain(format!(
            "root polish stalled at residual {:.3e} (target {:.0e})",
            root.f,
            tolerances::ROOT_RESIDUAL
        )));
    }
    Ok(ClosureRoot {
        energy: Energy::from_c(root.x)?,
        residual: root.f,
        iterations: root.iterations,
        ambiguous,
    })
}

/// How a degenerate network is assembled from two copies of its lower curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    /// Second copy is the mirror image across the x-axis.
    ReflectionXAxis,
    /// Second copy is the image under the point map through the origin.
    PointOrigin,
}

/// Geometric role of one of the three network edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveKind {
    /// A lower-curve walk in the rotating frame.
    Path(TrajectoryPath),
    /// A straight segment through the origin (the flat inner edge).
    Segment,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::Path(p) => write!(f, "{p}"),
            CurveKind::Segment => write!(f, "segment-through-origin"),
        }
    }
}

/// Energy of the inner edge. A straight segment is the infinite-energy
/// limit; no finite value exists for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerEnergy {
    Finite(Energy),
    Infinite,
}

/// One classified two-region network.
#[derive(Debug, Clone)]
pub struct ShrinkerSolution {
    pub name: String,
    pub path_up: CurveKind,
    pub path_down: CurveKind,
    pub gamma_in: CurveKind,
    pub equation: ClosureEquation,
    pub c_up: Energy,
    pub c_down: Energy,
    pub c_in: InnerEnergy,
    pub psi_up: f64,
    pub psi_in: f64,
    pub psi_down: f64,
    pub r_start: f64,
    pub r_end: f64,
    pub theta_up: f64,
    pub theta_in: f64,
    pub theta_down: f64,
    pub symmetry: Symmetry,
    pub multiplicity_notes: Vec<String>,
    pub notes: Vec<String>,
    pub residual: f64,
    pub ambiguous_root: bool,
}

struct CaseDef {
    name: &'static str,
    letters: &'static str,
    start: Region,
    end: Region,
    combo: HCombo,
    bracket: (f64, f64),
    symmetry: Symmetry,
    multiplicity_notes: &'static [&'static str],
    notes: &'static [&'static str],
}

// The eye and the fox close only on the window where the short upper arc
// N -> A exists with room to spare; their residuals are monotone there, so
// the narrow bracket doubles as a uniqueness certificate.
const BRACKET_UPPER_WINDOW: (f64, f64) = (C_STAR + 1e-9, C_BAR);

const CATALOG_CASES: [CaseDef; 7] = [
    CaseDef {
        name: "cisgeminate-eye",
        letters: "SA->BA->BE",
        start: Region::Inside,
        end: Region::Inside,
        combo: HCombo::of(1, 4, 0),
        bracket: BRACKET_UPPER_WINDOW,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "four rays of multiplicity 1, at polar angles h2, pi - h2 and their mirror images",
        ],
        notes: &[
            "the only nondegenerate entry: start and end sit exactly on the junction level, \
             so both partial arcs vanish and the walk evaluates at the stations",
            "h1+4*h2 is strictly increasing on the bracket; the root is unique",
        ],
    },
    CaseDef {
        name: "heart",
        letters: "DD->CB",
        start: Region::Inside,
        end: Region::Outside,
        combo: HCombo::of(1, 1, 1),
        bracket: DEFAULT_BRACKET,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "single ray along the positive x-axis: the mirror copy of the hop ray lands on \
             itself, multiplicity 2",
        ],
        notes: &["existence from the sign change of h1+h2+h3 - pi across the bracket"],
    },
    CaseDef {
        name: "broken-lens",
        letters: "DD->CA->BC",
        start: Region::Inside,
        end: Region::Inside,
        combo: HCombo::of(1, 2, 0),
        bracket: DEFAULT_BRACKET,
        symmetry: Symmetry::PointOrigin,
        multiplicity_notes: &[
            "four rays of multiplicity 1 at angles 0, h1+h2, pi and h1+h2-pi: the point map \
             sends each hop ray to a fresh direction; the only entry with every ray simple",
        ],
        notes: &[
            "h1+2*h2 rises through pi on the admissible window and then decays toward pi \
             from above, so the wide-bracket scan is not monotone even though the crossing \
             is unique",
            "same closure equation as the cat and the half lens: the three share one energy",
        ],
    },
    CaseDef {
        name: "cat",
        letters: "AA->BA->BB",
        start: Region::Outside,
        end: Region::Outside,
        combo: HCombo::of(1, 2, 0),
        bracket: DEFAULT_BRACKET,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "two rays of multiplicity 2, along the positive and negative x-axis: both hop \
             rays fall on the axis and are doubled by the reflection",
        ],
        notes: &["same closure equation as the broken lens and the half lens"],
    },
    CaseDef {
        name: "half-lens",
        letters: "DD->CA->BC",
        start: Region::Inside,
        end: Region::Inside,
        combo: HCombo::of(1, 2, 0),
        bracket: DEFAULT_BRACKET,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "axis ray of multiplicity 2 plus the mirror-paired side rays at angles \
             +-(h1+h2), each of multiplicity 1",
        ],
        notes: &[
            "mirror assembly of the same walk as the broken lens: each closed region is half \
             a lens; the figure-name assignment is inferred from the walk structure",
            "same closure equation as the broken lens and the cat",
        ],
    },
    CaseDef {
        name: "fox",
        letters: "AA->BA->BC",
        start: Region::Outside,
        end: Region::Inside,
        combo: HCombo::of(1, 3, 0),
        bracket: BRACKET_UPPER_WINDOW,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "axis ray of multiplicity 2 from the immediate hop, plus mirror-paired side \
             rays at +-(pi - h2) of multiplicity 1",
        ],
        notes: &["h1+3*h2 is strictly increasing on the bracket; the root is unique"],
    },
    CaseDef {
        name: "half-4-ray-star",
        letters: "DD->CD->CD->CC",
        start: Region::Inside,
        end: Region::Inside,
        combo: HCombo::of(2, 0, 0),
        bracket: DEFAULT_BRACKET,
        symmetry: Symmetry::ReflectionXAxis,
        multiplicity_notes: &[
            "axis rays at 0 and pi of multiplicity 2, plus mirror-paired side rays at \
             +-pi/2 of multiplicity 1",
        ],
        notes: &["h1 is strictly decreasing, so 2*h1 = pi has exactly one solution"],
    },
];

/// Build all seven two-region networks: the Cisgeminate eye followed by the
/// six degenerate entries. Every entry closes at `theta = pi` per copy with
/// a flat inner edge through the origin and `2 pi / 3` end angles.
pub fn build_catalog() -> Result<Vec<ShrinkerSolution>> {
    build_catalog_with(&QuadratureSpec::default())
}

pub fn build_catalog_with(quad: &QuadratureSpec) -> Result<Vec<ShrinkerSolution>> {
    CATALOG_CASES
        .iter()
        .map(|d| {
            build_case(d, quad).map_err(|err| match err {
                e @ Error::CatalogConstruction { .. } => e,
                other => Error::CatalogConstruction {
                    case: d.name.to_string(),
                    reason: other.to_string(),
                },
            })
        })
        .collect()
}

fn build_case(d: &CaseDef, quad: &QuadratureSpec) -> Result<ShrinkerSolution> {
    let path = TrajectoryPath::parse(d.letters, d.start, d.end)?;
    let eq = ClosureEquation::from_combo(&d.combo, PI, d.bracket);
    let root = solve_closure_with(&eq, quad)?;
    let e = root.energy;
    let level = 3f64.sqrt() / 2.0 * e.c();
    let r_start = invert_k(level, d.start.branch())?;
    let r_end = invert_k(level, d.end.branch())?;

    // Independent confirmation: walk the concrete arcs and compare against
    // the symbolic closure the root was solved from.
    let walk = angle_sum_with(&path, e, r_start, quad)?;
    let residual = root.residual.abs().max((walk - PI).abs());
    if residual > tolerances::CATALOG_RESIDUAL {
        return Err(Error::CatalogConstruction {
            case: d.name.to_string(),
            reason: format!(
                "walk total disagrees with the solved closure: residual {residual:.3e} \
                 exceeds {:.0e}",
                tolerances::CATALOG_RESIDUAL
            ),
        });
    }

    Ok(ShrinkerSolution {
        name: d.name.to_string(),
        path_up: CurveKind::Path(path.clone()),
        path_down: CurveKind::Path(path),
        gamma_in: CurveKind::Segment,
        equation: eq,
        c_up: e,
        c_down: e,
        c_in: InnerEnergy::Infinite,
        psi_up: FRAC_PI_3,
        psi_in: PI,
        psi_down: FRAC_PI_3,
        r_start,
        r_end,
        theta_up: PI,
        theta_in: PI,
        theta_down: PI,
        symmetry: d.symmetry,
        multiplicity_notes: d.multiplicity_notes.iter().map(|s| s.to_string()).collect(),
        notes: d.notes.iter().map(|s| s.to_string()).collect(),
        residual,
        ambiguous_root: root.ambiguous,
    })
}

/// Schema tag for the serialized catalog.
pub const CATALOG_SCHEMA: &str = "shrinker-catalog/1";

#[derive(Serialize)]
struct CatalogEntry<'a> {
    name: &'a str,
    path_up: String,
    path_down: String,
    gamma_in: String,
    equation: String,
    c: f64,
    eta: f64,
    psi_up: f64,
    psi_in: f64,
    psi_down: f64,
    r_start: f64,
    r_end: f64,
    theta_up: f64,
    theta_in: f64,
    theta_down: f64,
    symmetry: Symmetry,
    /// `null` means the inner edge is a straight segment with no finite energy.
    c_in: Option<f64>,
    multiplicity_notes: &'a [String],
    notes: &'a [String],
    residual: f64,
    ambiguous_root: bool,
}

#[derive(Serialize)]
struct CatalogDoc<'a> {
    schema: &'static str,
    solutions: Vec<CatalogEntry<'a>>,
}

/// Serialize the catalog as pretty-printed JSON under [`CATALOG_SCHEMA`].
/// Output is deterministic: same input, same bytes.
pub fn catalog_to_json(solutions: &[ShrinkerSolution]) -> Result<String> {
    let doc = CatalogDoc {
        schema: CATALOG_SCHEMA,
        solutions: solutions
            .iter()
            .map(|s| CatalogEntry {
                name: &s.name,
                path_up: s.path_up.to_string(),
                path_down: s.path_down.to_string(),
                gamma_in: s.gamma_in.to_string(),
                equation: s.equation.to_string(),
                c: s.c_up.c(),
                eta: s.c_up.eta(),
                psi_up: s.psi_up,
                psi_in: s.psi_in,
                psi_down: s.psi_down,
                r_start: s.r_start,
                r_end: s.r_end,
                theta_up: s.theta_up,
                theta_in: s.theta_in,
                theta_down: s.theta_down,
                symmetry: s.symmetry,
                c_in: match s.c_in {
                    InnerEnergy::Finite(e) => Some(e.c()),
                    InnerEnergy::Infinite => None,
                },
                multiplicity_notes: &s.multiplicity_notes,
                notes: &s.notes,
                residual: s.residual,
                ambiguous_root: s.ambiguous_root,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Sampling resolution for [`check_exclusions`]. Energies are log-spaced on
/// `[c_min, c_max]`; start angles for the partial-arc checks are spread over
/// the junction window `[pi/3, pi/2]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub c_min: f64,
    pub c_max: f64,
    pub c_points: usize,
    pub psi_points: usize,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec {
            c_min: C_STAR,
            c_max: 8.0,
            c_points: 512,
            psi_points: 17,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.c_min < C_STAR - 1e-12 {
            return Err(Error::Domain(format!(
                "grid lower energy {} is below the junction threshold {C_STAR}",
                self.c_min
            )));
        }
        if !(self.c_max > self.c_min) {
            return Err(Error::Domain("grid needs c_max > c_min".into()));
        }
        if self.c_points < 8 || self.psi_points < 3 {
            return Err(Error::Domain(
                "grid needs at least 8 energies and 3 start angles".into(),
            ));
        }
        Ok(())
    }

    fn c_grid(&self) -> Vec<f64> {
        log_grid(self.c_min.max(C_STAR), self.c_max, self.c_points)
    }

    /// Coarser energy grid for the two-parameter (c, psi_s) sweeps.
    fn c_grid_2d(&self) -> Vec<f64> {
        let n = self.c_points.min(128);
        log_grid(self.c_min.max(C_STAR), self.c_max, n)
    }

    /// Start angles in `[pi/3, pi/2)`: the right-partial checks degenerate
    /// to equality at `pi/2` exactly.
    fn psi_grid_excluding_upper(&self) -> Vec<f64> {
        let n = self.psi_points;
        (0..n)
            .map(|i| FRAC_PI_3 + (i as f64 / n as f64) * (FRAC_PI_2 - FRAC_PI_3))
            .collect()
    }

    /// Start angles in `(pi/3, pi/2]`: the mixed-partial check degenerates
    /// to equality at `pi/3` exactly.
    fn psi_grid_excluding_lower(&self) -> Vec<f64> {
        let n = self.psi_points;
        (0..n)
            .map(|i| FRAC_PI_3 + ((i + 1) as f64 / n as f64) * (FRAC_PI_2 - FRAC_PI_3))
            .collect()
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (a + t * (b - a)).exp()
        })
        .collect()
}

/// One sampled inequality failure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Violation {
    pub c: f64,
    pub psi_s: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// One confirmed inequality: the sampled points, any violations, and the
/// smallest slack seen (in radians for angle bounds).
#[derive(Debug, Clone, Serialize)]
pub struct ExclusionCheck {
    pub name: String,
    pub statement: String,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
    pub margin: f64,
}

/// Grid re-confirmation of the inequalities that reject every topology
/// other than the seven catalog entries.
#[derive(Debug, Clone, Serialize)]
pub struct ExclusionReport {
    pub grid: GridSpec,
    pub checks: Vec<ExclusionCheck>,
    pub disclaimer: String,
}

impl ExclusionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.violations.is_empty())
    }
}

struct CheckBuilder {
    name: &'static str,
    statement: &'static str,
    points: usize,
    violations: Vec<Violation>,
    margin: f64,
}

impl CheckBuilder {
    fn new(name: &'static str, statement: &'static str) -> CheckBuilder {
        CheckBuilder {
            name,
            statement,
            points: 0,
            violations: Vec::new(),
            margin: f64::INFINITY,
        }
    }

    /// Record a sample of a strict `lhs > rhs` claim.
    fn expect_gt(&mut self, c: f64, psi_s: Option<f64>, lhs: f64, rhs: f64) {
        self.points += 1;
        let slack = lhs - rhs;
        self.margin = self.margin.min(slack);
        if slack <= 0.0 {
            self.violations.push(Violation { c, psi_s, lhs, rhs });
        }
    }

    /// Record a sample of a strict `lhs < rhs` claim.
    fn expect_lt(&mut self, c: f64, psi_s: Option<f64>, lhs: f64, rhs: f64) {
        self.points += 1;
        let slack = rhs - lhs;
        self.margin = self.margin.min(slack);
        if slack <= 0.0 {
            self.violations.push(Violation { c, psi_s, lhs, rhs });
        }
    }

    /// Record a sample of a monotone-nonincreasing claim between adjacent
    /// grid values; quadrature noise below the shared slack is tolerated.
    fn expect_nonincreasing(&mut self, c: f64, prev: f64, next: f64) {
        self.points += 1;
        let slack = prev - next;
        self.margin = self.margin.min(slack);
        if slack < -tolerances::MONOTONE_SLACK {
            self.violations.push(Violation {
                c,
                psi_s: None,
                lhs: next,
                rhs: prev,
            });
        }
    }

    fn finish(self) -> ExclusionCheck {
        ExclusionCheck {
            name: self.name.to_string(),
            statement: self.statement.to_string(),
            points_checked: self.points,
            violations: self.violations,
            margin: self.margin,
        }
    }
}

pub fn check_exclusions(grid: &GridSpec) -> Result<ExclusionReport> {
    check_exclusions_with(grid, &QuadratureSpec::default())
}

pub fn check_exclusions_with(grid: &GridSpec, quad: &QuadratureSpec) -> Result<ExclusionReport> {
    grid.validate()?;
    let cs = grid.c_grid();
    let cs_2d = grid.c_grid_2d();
    let psis_right = grid.psi_grid_excluding_upper();
    let psis_mixed = grid.psi_grid_excluding_lower();

    let e_bar = Energy::from_c(C_BAR)?;
    let h_bar = h_triple_with(e_bar, quad)?;

    let mut checks = Vec::new();

    // Bottom curve with both ends outside: twice the right partial arc
    // beats h3, and adding the full period pushes the total past 4*pi/3.
    {
        let mut gt = CheckBuilder::new(
            "double-right-partial-vs-h3",
            "2*h3o(c, psi_s) > h3(c) for start angles in [pi/3, pi/2): an outside/outside \
             bottom curve sweeps at least 2*h1+2*h2+2*h3o > h1+T",
        );
        for &c in &cs_2d {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            for &psi in &psis_right {
                let r = invert_k((c * psi.sin()).max(1.0), Branch::Right)?;
                let (_, h3c) = h_circ_with(e, r, quad)?;
                gt.expect_gt(c, Some(psi), 2.0 * h3c, h.h3);
            }
        }
        checks.push(gt.finish());

        let mut budget = CheckBuilder::new(
            "h1-plus-period-vs-4pi3",
            "h1(c) + T(c) > 4*pi/3: the outside/outside angle floor exceeds the two-copy \
             budget 2*pi minus the two ray gaps",
        );
        for &c in &cs {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            budget.expect_gt(c, None, h.h1 + h.t, 4.0 * PI / 3.0);
        }
        checks.push(budget.finish());
    }

    // Bottom curve with mixed ends: the two partial arcs together dominate
    // h3, and the resulting floor h1 + h3 at the window edge already
    // overflows the budget when combined with the upper curve's sweep.
    {
        let mut gt = CheckBuilder::new(
            "mixed-partials-vs-h3",
            "h1o(c, psi_s) + h3o(c, psi_s) > h3(c) for start angles in (pi/3, pi/2]: a \
             mixed-end bottom curve sweeps at least h1 + h3",
        );
        for &c in &cs_2d {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            for &psi in &psis_mixed {
                let r = invert_k((c * psi.sin()).max(1.0), Branch::Right)?;
                let (h1c, h3c) = h_circ_with(e, r, quad)?;
                gt.expect_gt(c, Some(psi), h1c + h3c, h.h3);
            }
        }
        checks.push(gt.finish());

        let mut budget = CheckBuilder::new(
            "mixed-ends-angle-budget",
            "h1 and h3 are nonincreasing in c, h1 at the upper-window edge stays above \
             0.7027*pi, h3 there stays above pi/3, and 0.9947*pi + h1 + h3 > 2*pi: a \
             mixed-end bottom curve cannot share the circle with any upper curve",
        );
        budget.expect_gt(C_BAR, None, h_bar.h1, 0.7027 * PI);
        budget.expect_gt(C_BAR, None, h_bar.h3, FRAC_PI_3);
        budget.expect_gt(
            C_BAR,
            None,
            0.9947 * PI + h_bar.h1 + h_bar.h3,
            2.0 * PI,
        );
        let mut prev: Option<(f64, f64)> = None;
        for &c in &cs {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            if let Some((p1, p3)) = prev {
                budget.expect_nonincreasing(c, p1, h.h1);
                budget.expect_nonincreasing(c, p3, h.h3);
            }
            prev = Some((h.h1, h.h3));
        }
        checks.push(budget.finish());
    }

    // Five-sided bottom region: its floor 2*h1 plus the smallest upper
    // sweep h1+2*h2 overflows the two-copy budget on the upper window.
    {
        let mut gt = CheckBuilder::new(
            "five-cell-angle-budget",
            "(h1+2*h2)(c) + 2*h1(c) > 2*pi on the upper window: a five-sided bottom region \
             under any admissible upper curve overfills the circle",
        );
        for &c in &log_grid(C_STAR, C_BAR, grid.c_points.min(128)) {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            gt.expect_gt(c, None, h.h1 + 2.0 * h.h2 + 2.0 * h.h1, 2.0 * PI);
        }
        checks.push(gt.finish());
    }

    // Two-sided bottom region, both ends inside, low energy: the closed-form
    // budget with the sampled turn radius and start angle stays under 2*pi.
    {
        let mut small = CheckBuilder::new(
            "two-cell-small-psi-budget",
            "at the inner-branch window edge: the lower turn radius exceeds 0.6, the start \
             angle floor asin(1/c-hat) clears 0.3099*pi, and the resulting budget \
             sqrt(2)*pi - (pi - 2*0.3568*pi)/(1 - 0.36) + pi stays under 2*pi",
        );
        let r_minus_hat = invert_k(C_HAT, Branch::Left)?;
        small.expect_gt(C_HAT, None, r_minus_hat, 0.6);
        small.expect_gt(C_HAT, None, (1.0 / C_HAT).asin(), 0.3099 * PI);
        small.expect_lt(C_HAT, None, 2.0 * FRAC_PI_3 - 0.3099 * PI, 0.3568 * PI);
        small.expect_lt(
            C_HAT,
            None,
            2f64.sqrt() * PI - (PI - 2.0 * 0.3568 * PI) / (1.0 - 0.36) + PI,
            2.0 * PI,
        );
        checks.push(small.finish());

        let mut floor = CheckBuilder::new(
            "two-cell-period-floor",
            "T(c) > 1.3194*pi for energies up to c-hat: a closed orbit is too long to pair \
             with an inner sweep below pi",
        );
        for &c in &log_grid(1.001, C_HAT, grid.c_points.min(128)) {
            let e = Energy::from_c(c)?;
            floor.expect_gt(c, None, t_period_with(e, quad)?, 1.3194 * PI);
        }
        checks.push(floor.finish());

        let mut outside = CheckBuilder::new(
            "two-cell-outside-budget",
            "dtheta_MN(c_in) + T(c_down)/2 < 2*pi: an outside/outside two-sided bottom \
             region with any inner sweep underfills the circle, so it cannot close",
        );
        for &c in &log_grid(1.001, grid.c_max, grid.c_points.min(128)) {
            let e = Energy::from_c(c)?;
            let lhs = delta_theta_mn_with(e, quad)? + t_period_with(e, quad)? / 2.0;
            outside.expect_lt(c, None, lhs, 2.0 * PI);
        }
        checks.push(outside.finish());
    }

    // The left sweep M -> N never reaches pi: mixed two-sided regions and
    // every inner-curve bound lean on this.
    {
        let mut lt = CheckBuilder::new(
            "left-sweep-vs-pi",
            "dtheta_MN(c) < pi on the full energy range: the inner-branch sweep from the \
             upper to the lower turn never completes a half circle",
        );
        for &c in &log_grid(1.001, grid.c_max, grid.c_points) {
            let e = Energy::from_c(c)?;
            lt.expect_lt(c, None, delta_theta_mn_with(e, quad)?, PI);
        }
        checks.push(lt.finish());
    }

    // Upper-curve angle window: past the upper window edge the doubled short
    // arc keeps the total above pi, and at the edge the angle-ratio bound
    // pins the start angle above 0.3307*pi, giving the 0.9947*pi floor.
    {
        let mut gt = CheckBuilder::new(
            "upper-angle-window",
            "(h1+2*h2+2*dtheta_NA)(c) > pi for c past the upper-window edge, the ratio \
             sin(psi+pi/3)/sin(psi) at psi = 0.3307*pi still exceeds the edge energy ratio, \
             and pi/3 + 2*0.3307*pi >= 0.9947*pi: the upper sweep is confined to \
             (0.9947*pi, pi]",
        );
        for &c in &log_grid(C_BAR, grid.c_max, grid.c_points.min(256)) {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            let na = delta_theta_na_with(e, quad)?;
            gt.expect_gt(c, None, h.h1 + 2.0 * h.h2 + 2.0 * na, PI);
        }
        let psi0 = 0.3307 * PI;
        gt.expect_gt(
            C_BAR,
            Some(psi0),
            (psi0 + FRAC_PI_3).sin() / psi0.sin(),
            C_BAR / C_STAR,
        );
        gt.expect_gt(C_BAR, Some(psi0), FRAC_PI_3 + 2.0 * psi0, 0.9947 * PI);
        checks.push(gt.finish());
    }

    // A three-ray star would need h1+2*h2 = 2*pi/3; the sum never gets down
    // there.
    {
        let mut gt = CheckBuilder::new(
            "three-ray-star-closure",
            "h1(c) + 2*h2(c) > 2*pi/3 on the full energy range: no single-region network \
             with three rays closes",
        );
        for &c in &cs {
            let e = Energy::from_c(c)?;
            let h = h_triple_with(e, quad)?;
            gt.expect_gt(c, None, h.h1 + 2.0 * h.h2, 2.0 * FRAC_PI_3);
        }
        checks.push(gt.finish());
    }

    Ok(ExclusionReport {
        grid: *grid,
        checks,
        disclaimer: "Grid confirmation of strict inequalities at sampled points; margins are \
                     the smallest sampled slack. This spot-checks the case analysis, it does \
                     not prove it."
            .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle_functions::h_triple;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn combo_tuple(c: &HCombo) -> (u32, u32, u32, u32, u32) {
        (c.h1_circ, c.h1, c.h2, c.h3_circ, c.h3)
    }

    #[test]
    fn census_families_match_pinned_rows() {
        assert!(enumerate_paths(2).unwrap().is_empty());
        let three = enumerate_paths(3).unwrap();
        let four = enumerate_paths(4).unwrap();
        let five = enumerate_paths(5).unwrap();
        assert_eq!(three.len(), 2);
        assert_eq!(four.len(), 4);
        assert_eq!(five.len(), 8);

        let letters: Vec<&str> = five.iter().map(|f| f.letters.as_str()).collect();
        assert_eq!(
            letters,
            vec![
                "SD->CD->CD->CE",
                "SA->BD->CD->CE",
                "SD->CA->BD->CE",
                "SD->CD->CA->BE",
                "SA->BA->BD->CE",
                "SA->BD->CA->BE",
                "SD->CA->BA->BE",
                "SA->BA->BA->BE",
            ]
        );

        // Three-sided region, no A->B hop: (2*h1o | h1o+h1+h2+h3o | 2*h1+2*h2+2*h3o).
        let f = &three[0];
        assert_eq!(f.letters, "SD->CE");
        assert_eq!(combo_tuple(&f.columns[0].1), (2, 0, 0, 0, 0));
        assert_eq!(combo_tuple(&f.columns[1].1), (1, 1, 1, 1, 0));
        assert_eq!(combo_tuple(&f.columns[2].1), (0, 2, 2, 2, 0));

        // One A->B hop: (2*h1o+2*h2 | h1o+h1+3*h2+h3o | 2*h1+4*h2+2*h3o).
        let f = &three[1];
        assert_eq!(f.letters, "SA->BE");
        assert_eq!(f.ab_hops, 1);
        assert_eq!(combo_tuple(&f.columns[0].1), (2, 0, 2, 0, 0));
        assert_eq!(combo_tuple(&f.columns[1].1), (1, 1, 3, 1, 0));
        assert_eq!(combo_tuple(&f.columns[2].1), (0, 2, 4, 2, 0));

        // Four-sided, mixed hops: outside column 3*h1+4*h2+2*h3o.
        let f = &four[2];
        assert_eq!(f.letters, "SD->CA->BE");
        assert_eq!(combo_tuple(&f.columns[1].1), (1, 2, 3, 1, 0));
        assert_eq!(combo_tuple(&f.columns[2].1), (0, 3, 4, 2, 0));

        // Four-sided, both hops A->B: outside column 3*h1+6*h2+2*h3o.
        let f = &four[3];
        assert_eq!(f.letters, "SA->BA->BE");
        assert_eq!(combo_tuple(&f.columns[2].1), (0, 3, 6, 2, 0));

        // Five-sided, all hops A->B, mixed ends: h1o+3*h1+7*h2+h3o.
        let f = &five[7];
        assert_eq!(combo_tuple(&f.columns[1].1), (1, 3, 7, 1, 0));

        assert!(enumerate_paths(6).is_err());
    }

    #[test]
    fn path_parse_round_trip_and_rejects() {
        let p = TrajectoryPath::parse("SD->CA->BE", Region::Inside, Region::Outside).unwrap();
        assert_eq!(p.to_string(), "SD->CA->BE");
        assert_eq!(p.hops(), 2);
        let q = TrajectoryPath::parse(&p.to_string(), Region::Inside, Region::Outside).unwrap();
        assert_eq!(p, q);

        // Hop must be D->C or A->B.
        assert!(TrajectoryPath::parse("SD->DE", Region::Inside, Region::Inside).is_err());
        // Start letter must match the start region.
        assert!(TrajectoryPath::parse("AD->CE", Region::Inside, Region::Inside).is_err());
        // S cannot appear mid-walk.
        assert!(TrajectoryPath::parse("SD->SE", Region::Inside, Region::Inside).is_err());
        // Arc pieces are letter pairs.
        assert!(TrajectoryPath::parse("SDE", Region::Inside, Region::Inside).is_err());
        assert!(TrajectoryPath::parse("SX->CE", Region::Inside, Region::Inside).is_err());
    }

    #[test]
    fn equation_parse_and_display() {
        let eq = ClosureEquation::parse("h1+4*h2 = pi").unwrap();
        assert_eq!((eq.h1, eq.h2, eq.h3), (1.0, 4.0, 0.0));
        assert_eq!(eq.target, PI);
        assert_eq!(eq.to_string(), "h1+4*h2 = pi");

        let eq = ClosureEquation::parse("2*h1=pi").unwrap();
        assert_eq!(eq.to_string(), "2*h1 = pi");

        let eq = ClosureEquation::parse("h1 + 2*h2 = 2*pi").unwrap();
        assert_eq!(eq.target, 2.0 * PI);
        assert_eq!(eq.to_string(), "h1+2*h2 = 2*pi");

        let eq = ClosureEquation::parse("3/4*h1 = 3/4*pi").unwrap();
        assert!((eq.h1 - 0.75).abs() < 1e-15);
        assert!((eq.target - 0.75 * PI).abs() < 1e-12);

        let eq = ClosureEquation::parse("0.5*h1+h3=0.25*pi").unwrap();
        assert_eq!((eq.h1, eq.h3), (0.5, 1.0));

        for bad in [
            "h1-h2=pi",
            "h4=pi",
            "h1=2",
            "=pi",
            "h1o=pi",
            "h1+h2",
            "h1 = -1*pi",
        ] {
            assert!(
                matches!(
                    ClosureEquation::parse(bad),
                    Err(Error::EquationParse { .. })
                ),
                "`{bad}` should fail to parse"
            );
        }
    }

    #[test]
    fn walks_match_symbolic_totals() {
        // Every census row, every region column, ten random start radii:
        // the concrete walk total must equal the symbolic combination.
        let quad = QuadratureSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let families: Vec<PathFamily> = (3..=5)
            .flat_map(|n| enumerate_paths(n).unwrap())
            .collect();
        for _ in 0..10 {
            let c = rng.gen_range(1.2..2.5);
            let e = Energy::from_c(c).unwrap();
            // Keep clear of both window edges so no snapping kicks in.
            let psi_s = rng.gen_range(FRAC_PI_3 + 0.02..FRAC_PI_2 - 0.02);
            let k_level = c * psi_s.sin();
            for family in &families {
                for (path, combo) in &family.columns {
                    let r_start = invert_k(k_level, path.start_region().branch()).unwrap();
                    let walked = angle_sum_with(path, e, r_start, &quad).unwrap();
                    let symbolic = combo.eval_with(e, Some(r_start), &quad).unwrap();
                    assert!(
                        (walked - symbolic).abs() < tolerances::ANGLE_SUM_MATCH,
                        "{path} at c={c}, psi_s={psi_s}: walk {walked} vs combo {symbolic}"
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_walks_collapse_to_station_totals() {
        let quad = QuadratureSpec::default();
        let e = Energy::from_c(1.3).unwrap();
        let h = h_triple(e).unwrap();
        let level = 3f64.sqrt() / 2.0 * 1.3;
        let r_d = invert_k(level, Branch::Left).unwrap();
        let r_a = invert_k(level, Branch::Right).unwrap();
        let tol = tolerances::ANGLE_SUM_MATCH;

        let cases: [(&str, Region, Region, f64, f64); 7] = [
            // Start at the junction level: partial arcs vanish.
            ("SD->CD->CE", Region::Inside, Region::Inside, r_d, h.h1),
            ("SA->BA->BE", Region::Inside, Region::Inside, r_d, h.h1 + 4.0 * h.h2),
            // Fully degenerate walks written with concrete stations.
            ("DD->CB", Region::Inside, Region::Outside, r_d, h.h1 + h.h2 + h.h3),
            ("DD->CA->BC", Region::Inside, Region::Inside, r_d, h.h1 + 2.0 * h.h2),
            ("AA->BA->BB", Region::Outside, Region::Outside, r_a, h.h1 + 2.0 * h.h2),
            ("AA->BA->BC", Region::Outside, Region::Inside, r_a, h.h1 + 3.0 * h.h2),
            ("DD->CD->CD->CC", Region::Inside, Region::Inside, r_d, 2.0 * h.h1),
        ];
        for (letters, start, end, r, expected) in cases {
            let path = TrajectoryPath::parse(letters, start, end).unwrap();
            let total = angle_sum_with(&path, e, r, &quad).unwrap();
            assert!(
                (total - expected).abs() < tol,
                "{letters}: walked {total}, expected {expected}"
            );
        }
    }

    #[test]
    fn start_radius_is_validated() {
        let e = Energy::from_c(1.3).unwrap();
        let path = TrajectoryPath::parse("SD->CE", Region::Inside, Region::Inside).unwrap();
        // Outside radius for an inside start.
        assert!(angle_sum(&path, e, 1.1).is_err());
        // Below the junction band.
        assert!(angle_sum(&path, e, 0.3).is_err());
        // Station-letter start requires the station radius.
        let concrete = TrajectoryPath::parse("DD->CB", Region::Inside, Region::Outside).unwrap();
        assert!(angle_sum(&concrete, e, 0.9).is_err());
    }

    #[test]
    fn solver_finds_the_eye_root() {
        let combo = HCombo::of(1, 4, 0);
        let eq = ClosureEquation::from_combo(&combo, PI, BRACKET_UPPER_WINDOW);
        let root = solve_closure(&eq).unwrap();
        let c = root.energy.c();
        assert!(c > C_STAR && c < C_BAR, "c0 = {c}");
        assert!(root.residual.abs() < tolerances::ROOT_RESIDUAL);
        assert!(!root.ambiguous, "residual is monotone on the upper window");
        let h = h_triple(root.energy).unwrap();
        assert!((h.h1 + 4.0 * h.h2 - PI).abs() < 1e-10);
    }

    #[test]
    fn solver_reports_unreachable_targets() {
        let eq = ClosureEquation::parse("h1+2*h2 = 2*pi").unwrap();
        match solve_closure(&eq) {
            Err(Error::NoRoot { equation, .. }) => assert_eq!(equation, "h1+2*h2 = 2*pi"),
            other => panic!("expected NoRoot, got {other:?}"),
        }
    }

    #[test]
    fn doubled_lens_equation_matches_single() {
        // 2*h1+4*h2 = 2*pi is the closed-loop form of h1+2*h2 = pi.
        let single = solve_closure(&ClosureEquation::parse("h1+2*h2=pi").unwrap()).unwrap();
        let doubled = solve_closure(&ClosureEquation::parse("2*h1+4*h2=2*pi").unwrap()).unwrap();
        assert!((single.energy.c() - doubled.energy.c()).abs() < 1e-9);
    }

    #[test]
    fn catalog_has_seven_entries_with_shared_structure() {
        let catalog = build_catalog().unwrap();
        let names: Vec<&str> = catalog.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "cisgeminate-eye",
                "heart",
                "broken-lens",
                "cat",
                "half-lens",
                "fox",
                "half-4-ray-star",
            ]
        );
        for s in &catalog {
            assert!(s.residual < tolerances::CATALOG_RESIDUAL, "{}", s.name);
            assert_eq!(s.c_up, s.c_down, "{}", s.name);
            assert_eq!(s.c_in, InnerEnergy::Infinite, "{}", s.name);
            assert_eq!(s.gamma_in, CurveKind::Segment, "{}", s.name);
            assert_eq!((s.psi_up, s.psi_down), (FRAC_PI_3, FRAC_PI_3), "{}", s.name);
            assert_eq!((s.theta_up, s.theta_in, s.theta_down), (PI, PI, PI));
            assert!(s.c_up.c() > C_STAR, "{}", s.name);
            assert!(!s.multiplicity_notes.is_empty(), "{}", s.name);
        }

        let by_name = |n: &str| catalog.iter().find(|s| s.name == n).unwrap();
        let eye = by_name("cisgeminate-eye");
        assert!(eye.c_up.c() < C_BAR);
        assert!(!eye.ambiguous_root);
        assert_eq!(eye.r_start, eye.r_end);
        assert!(eye.r_start < 1.0);

        // The lens trio shares one closure equation, hence one energy.
        let (bl, cat, hl) = (by_name("broken-lens"), by_name("cat"), by_name("half-lens"));
        assert_eq!(bl.c_up.c().to_bits(), hl.c_up.c().to_bits());
        assert_eq!(bl.c_up.c().to_bits(), cat.c_up.c().to_bits());
        assert_eq!(bl.symmetry, Symmetry::PointOrigin);
        assert!(cat.r_start > 1.0 && cat.r_end > 1.0);

        // Other energies are pairwise distinct.
        let fox = by_name("fox");
        let heart = by_name("heart");
        let star = by_name("half-4-ray-star");
        assert!(!fox.ambiguous_root);
        assert!(!star.ambiguous_root);
        for (a, b) in [
            (heart, fox),
            (heart, star),
            (fox, star),
            (heart, bl),
            (fox, bl),
            (star, bl),
            (eye, heart),
            (eye, bl),
            (eye, fox),
            (eye, star),
        ] {
            assert!(
                (a.c_up.c() - b.c_up.c()).abs() > tolerances::DISTINCT_ENERGY,
                "{} vs {}",
                a.name,
                b.name
            );
        }

        // Fox ends inside after starting outside.
        assert!(fox.r_start > 1.0 && fox.r_end < 1.0);
    }

    #[test]
    fn catalog_json_is_deterministic_and_tagged() {
        let catalog = build_catalog().unwrap();
        let one = catalog_to_json(&catalog).unwrap();
        let two = catalog_to_json(&catalog).unwrap();
        assert_eq!(one, two);
        let doc: serde_json::Value = serde_json::from_str(&one).unwrap();
        assert_eq!(doc["schema"], CATALOG_SCHEMA);
        assert_eq!(doc["solutions"].as_array().unwrap().len(), 7);
        assert_eq!(doc["solutions"][0]["name"], "cisgeminate-eye");
        assert!(doc["solutions"][0]["c_in"].is_null());
        assert_eq!(doc["solutions"][2]["symmetry"], "point-origin");
    }

    #[test]
    fn exclusion_checks_pass_on_a_coarse_grid() {
        let grid = GridSpec {
            c_min: C_STAR,
            c_max: 8.0,
            c_points: 48,
            psi_points: 7,
        };
        let report = check_exclusions(&grid).unwrap();
        assert!(report.checks.len() >= 8);
        for check in &report.checks {
            assert!(check.points_checked > 0, "{}", check.name);
            assert!(
                check.violations.is_empty(),
                "{}: {:?}",
                check.name,
                check.violations.first()
            );
            assert!(check.margin > 0.0, "{}: margin {}", check.name, check.margin);
        }
        assert!(report.all_pass());
        // Serializes cleanly.
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("three-ray-star-closure"));
    }
}
