//! Plane realization of the two-region networks.
//!
//! The phase plane fixes each curve only up to rotation; this module pins
//! the rotation by placing the walk's start vertex on the positive x-axis
//! and integrating position jointly with the phase, so every sampled point
//! carries its own `(R, psi, k)` annotation. Junction directions are taken
//! from the integrated tangents wherever a real curve provides them, which
//! makes the downstream 2π/3 checks measure the reconstruction rather than
//! the bookkeeping.
//!
//! Conventions: walks run counterclockwise from `(r_start, 0)`; the flat
//! inner edge runs from the start vertex through the origin to the far
//! vertex; the second copy is produced by reflection across the x-axis or
//! by the point map, per the solution's symmetry. Assembled curves are
//! emitted in the order `gamma_up`, `gamma_in`, `gamma_down`. Rays are
//! stored unbounded (origin plus unit direction) and only clipped when
//! drawn.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{
    dopri5_run, CrossingDirection, FlowEvent, Stop, TurnLabel, THETA_BUDGET,
};
use crate::phase_plane::{k_radial, turning_curvatures, Branch, Energy, PhasePoint};
use crate::shrinker_catalog::{CurveKind, NodeLabel, Region, ShrinkerSolution, Symmetry};
use crate::tolerances;

/// Schema tag written into every serialized network document.
pub const NET_SCHEMA: &str = "shrinker-net/1";

/// Default sampling step. Together with the curvature-aware cap inside
/// [`reconstruct_arc`] it keeps adjacent tangents within
/// [`tolerances::MAX_TURN_RAD`] on every catalog network.
pub const DEFAULT_MAX_DS: f64 = 0.005;

/// Phase data at one sampled point: measured radius `r = |point|`, angle
/// `psi` from position to tangent, and the curvature implied by the phase
/// state. `|k - r sin(psi)|` measures how far the integrated position has
/// drifted off the phase trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleAnnotation {
    pub r: f64,
    pub psi: f64,
    pub k: f64,
}

/// One sampled curve with a multiplicity tag. Mirror copies flip the signs
/// of `psi` and `k` (reflection reverses the curvature convention); point
/// copies keep the annotations verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polyline {
    pub multiplicity: u32,
    pub points: Vec<[f64; 2]>,
    pub annotations: Vec<SampleAnnotation>,
}

/// Unbounded radial ray: origin on the network, unit direction parallel to
/// the origin's position vector, and a multiplicity for coincident copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ray {
    pub origin: [f64; 2],
    pub direction: [f64; 2],
    pub multiplicity: u32,
}

/// Triple junction: meeting point and the three outgoing unit directions,
/// pairwise 2π/3 apart. Merged vertices are stored as several coincident
/// records, one per triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Junction {
    pub point: [f64; 2],
    pub directions: [[f64; 2]; 3],
}

/// Assembled network: sampled curves, radial rays, junction records, and
/// the measured closure gap at the far vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkGeometry {
    pub schema: String,
    pub name: String,
    pub closure_gap: f64,
    pub curves: Vec<Polyline>,
    pub rays: Vec<Ray>,
    pub junctions: Vec<Junction>,
}

fn hypot2(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn dir(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

fn unit(p: [f64; 2]) -> [f64; 2] {
    let n = hypot2(p);
    [p[0] / n, p[1] / n]
}

/// Unsigned angle between two unit vectors, in `[0, pi]`.
fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

impl NetworkGeometry {
    /// Network with no geometry at all; still a valid, exportable document.
    pub fn empty(name: &str) -> NetworkGeometry {
        NetworkGeometry {
            schema: NET_SCHEMA.to_string(),
            name: name.to_string(),
            closure_gap: 0.0,
            curves: Vec::new(),
            rays: Vec::new(),
            junctions: Vec::new(),
        }
    }

    /// Structural invariants: unit Herring triples at every junction,
    /// radial rays, on-trajectory samples, bounded adjacent turning, and
    /// curve endpoints landing on declared junction points.
    pub fn validate(&self) -> Result<()> {
        if self.schema != NET_SCHEMA {
            return Err(Error::Serialization(format!(
                "unknown network schema `{}` (expected `{NET_SCHEMA}`)",
                self.schema
            )));
        }
        for (ji, j) in self.junctions.iter().enumerate() {
            for d in &j.directions {
                if !(d[0].is_finite() && d[1].is_finite()) {
                    return Err(Error::Domain(format!("junction {ji} direction is not finite")));
                }
                let n = hypot2(*d);
                if (n - 1.0).abs() > 1e-9 {
                    return Err(Error::Domain(format!(
                        "junction {ji} direction has norm {n}, expected a unit vector"
                    )));
                }
            }
            for (u, v) in [(0, 1), (0, 2), (1, 2)] {
                let ang = angle_between(j.directions[u], j.directions[v]);
                let err = (ang - 2.0 * FRAC_PI_3).abs();
                if err > tolerances::HERRING {
                    return Err(Error::Domain(format!(
                        "junction {ji} at ({:.6}, {:.6}): directions {u} and {v} meet at \
                         {ang} rad, off 2pi/3 by {err:.3e}",
                        j.point[0], j.point[1]
                    )));
                }
            }
        }
        for (ri, ray) in self.rays.iter().enumerate() {
            if ray.multiplicity == 0 {
                return Err(Error::Domain(format!("ray {ri} has multiplicity 0")));
            }
            let n = hypot2(ray.direction);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("ray {ri} direction has norm {n}")));
            }
            let cross = ray.direction[0] * ray.origin[1] - ray.direction[1] * ray.origin[0];
            let dot = ray.direction[0] * ray.origin[0] + ray.direction[1] * ray.origin[1];
            let scale = hypot2(ray.origin).max(1.0);
            if cross.abs() > tolerances::RAY_RADIAL * scale || dot < -tolerances::RAY_RADIAL {
                return Err(Error::Domain(format!(
                    "ray {ri} is not radial: cross {cross:.3e} with its origin"
                )));
            }
        }
        for (ci, curve) in self.curves.iter().enumerate() {
            if curve.multiplicity == 0 {
                return Err(Error::Domain(format!("curve {ci} has multiplicity 0")));
            }
            if curve.points.len() < 2 {
                return Err(Error::Domain(format!("curve {ci} has fewer than two points")));
            }
            if curve.points.len() != curve.annotations.len() {
                return Err(Error::Domain(format!(
                    "curve {ci}: {} points but {} annotations",
                    curve.points.len(),
                    curve.annotations.len()
                )));
            }
            for (p, a) in curve.points.iter().zip(&curve.annotations) {
                if !(p[0].is_finite() && p[1].is_finite() && a.r.is_finite() && a.k.is_finite()) {
                    return Err(Error::Domain(format!("curve {ci} has a non-finite sample")));
                }
                let r_meas = hypot2(*p);
                if (r_meas - a.r).abs() > tolerances::SHRINKER_RESIDUAL {
                    return Err(Error::Domain(format!(
                        "curve {ci}: sample radius {r_meas} disagrees with annotation {}",
                        a.r
                    )));
                }
                let res = (a.k - a.r * a.psi.sin()).abs();
                if res > tolerances::SHRINKER_RESIDUAL {
                    return Err(Error::Domain(format!(
                        "curve {ci}: shrinker residual {res:.3e} at ({:.6}, {:.6})",
                        p[0], p[1]
                    )));
                }
            }
            let mut prev_dir: Option<[f64; 2]> = None;
            for w in curve.points.windows(2) {
                let chord = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
                let len = hypot2(chord);
                // Chords below roundoff scale carry no reliable direction.
                if len < 1e-9 {
                    continue;
                }
                let d = [chord[0] / len, chord[1] / len];
                if let Some(pd) = prev_dir {
                    // Corners are legitimate exactly where a junction sits.
                    let at_junction = self
                        .junctions
                        .iter()
                        .any(|j| dist(w[0], j.point) <= tolerances::JUNCTION_MEET);
                    let turn = angle_between(pd, d);
                    if turn > tolerances::MAX_TURN_RAD + 1e-9 && !at_junction {
                        return Err(Error::Domain(format!(
                            "curve {ci}: adjacent chords turn by {turn} rad at \
                             ({:.6}, {:.6}), above the sampling cap",
                            w[0][0], w[0][1]
                        )));
                    }
                }
                prev_dir = Some(d);
            }
            for endpoint in [curve.points[0], *curve.points.last().expect("nonempty")] {
                let best = self
                    .junctions
                    .iter()
                    .map(|j| dist(endpoint, j.point))
                    .fold(f64::INFINITY, f64::min);
                if best > tolerances::JUNCTION_MEET {
                    return Err(Error::NetworkClosure {
                        location: format!("curve {ci} endpoint ({:.6}, {:.6})", endpoint[0], endpoint[1]),
                        gap: best,
                        budget: tolerances::JUNCTION_MEET,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Mirror copy across the x-axis; flips the tangent-angle and curvature
/// signs in the annotations.
pub fn reflect_across_x(line: &Polyline) -> Polyline {
    Polyline {
        multiplicity: line.multiplicity,
        points: line.points.iter().map(|p| [p[0], -p[1]]).collect(),
        annotations: line
            .annotations
            .iter()
            .map(|a| SampleAnnotation { r: a.r, psi: -a.psi, k: -a.k })
            .collect(),
    }
}

/// Point-map copy through the origin; a rotation by π, so annotations are
/// kept verbatim.
pub fn reflect_through_origin(line: &Polyline) -> Polyline {
    Polyline {
        multiplicity: line.multiplicity,
        points: line.points.iter().map(|p| [-p[0], -p[1]]).collect(),
        annotations: line.annotations.clone(),
    }
}

/// Symmetric Hausdorff distance between two sampled curves (point to
/// polyline, both ways).
pub fn hausdorff_distance(a: &Polyline, b: &Polyline) -> f64 {
    fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        if len2 == 0.0 {
            return dist(p, a);
        }
        let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
        dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
    }
    fn one_sided(from: &[[f64; 2]], to: &[[f64; 2]]) -> f64 {
        let mut worst = 0.0f64;
        for &p in from {
            let mut best = f64::INFINITY;
            for w in to.windows(2) {
                best = best.min(point_segment(p, w[0], w[1]));
                if best == 0.0 {
                    break;
                }
            }
            worst = worst.max(best);
        }
        worst
    }
    one_sided(&a.points, &b.points).max(one_sided(&b.points, &a.points))
}

/// One integrated curve leg, with the flowed polar angle kept per sample so
/// the sampled positions can be cross-checked against the phase run.
struct Leg {
    points: Vec<[f64; 2]>,
    annotations: Vec<SampleAnnotation>,
    #[allow(dead_code)] // consumed by the cross-check tests
    thetas: Vec<f64>,
    delta_theta: f64,
    psi_end: f64,
    #[allow(dead_code)]
    phi_end: f64,
}

fn flow_leg(
    e: Energy,
    position: [f64; 2],
    start: PhasePoint,
    stop: FlowEvent,
    max_ds: f64,
) -> Result<Leg> {
    let c = e.c();
    let r0 = hypot2(position);
    if (r0 - start.r).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "|position| = {r0} disagrees with the phase radius {}",
            start.r
        )));
    }
    if !(max_ds > 0.0) {
        return Err(Error::Domain(format!("sampling step must be positive, got {max_ds}")));
    }
    let start_residual = (k_radial(start.r)? - c * start.psi.sin()).abs() / c;
    if start_residual > 1e-8 {
        return Err(Error::Domain(format!(
            "start point (R = {}, psi = {}) is not on the trajectory c = {c} \
             (residual {start_residual})",
            start.r, start.psi
        )));
    }
    let theta0 = position[1].atan2(position[0]);

    // Same stop-event mapping as the phase-only flow, on the joint state
    // [r, theta, psi, phi, x, y].
    let (stop_spec, event_fn): (Stop, Box<dyn Fn(&[f64; 6]) -> f64>) = match stop {
        FlowEvent::PsiCrossing { target, direction } => {
            if !(target >= e.psi_min() - 1e-12 && target <= e.psi_max() + 1e-12) {
                return Err(Error::Domain(format!(
                    "psi target {target} outside [{}, {}] for c = {c}",
                    e.psi_min(),
                    e.psi_max()
                )));
            }
            (Stop::Event(direction), Box::new(move |y: &[f64; 6]| y[2] - target))
        }
        FlowEvent::BranchTurn(TurnLabel::M) => (
            Stop::Event(CrossingDirection::Falling),
            Box::new(|y: &[f64; 6]| y[0] - 1.0),
        ),
        FlowEvent::BranchTurn(TurnLabel::N) => (
            Stop::Event(CrossingDirection::Rising),
            Box::new(|y: &[f64; 6]| y[0] - 1.0),
        ),
        FlowEvent::ArcLengthReached(s_target) => {
            if !(s_target >= 0.0) {
                return Err(Error::Domain(format!(
                    "arc-length target must be >= 0, got {s_target}"
                )));
            }
            (Stop::ArcLength(s_target), Box::new(|_| 0.0))
        }
        FlowEvent::ThetaReached(t) => {
            if !(t >= 0.0 && t < THETA_BUDGET) {
                return Err(Error::Domain(format!(
                    "theta target must lie in [0, {THETA_BUDGET}), got {t}"
                )));
            }
            (Stop::Event(CrossingDirection::Rising), Box::new(move |y: &[f64; 6]| y[1] - t))
        }
    };

    // Cap steps so one step turns the tangent by at most the sampling
    // budget even at the trajectory's largest curvature.
    let (_, kmax) = turning_curvatures(e)?;
    let h_max = max_ds.min(tolerances::MAX_TURN_RAD / kmax).min(0.2);

    let rhs = |y: &[f64; 6]| -> [f64; 6] {
        let (r, psi, phi) = (y[0], y[2], y[3]);
        let sp = psi.sin();
        [psi.cos(), sp / r, (r - 1.0 / r) * sp, r * sp, phi.cos(), phi.sin()]
    };
    let y0 = [start.r, 0.0, start.psi, theta0 + start.psi, position[0], position[1]];
    let budget = move |_s: f64, y: &[f64; 6]| -> Option<Error> {
        if y[1] > THETA_BUDGET {
            Some(Error::EventNotReached { c, budget: THETA_BUDGET })
        } else {
            None
        }
    };
    let residual = move |y: &[f64; 6]| -> f64 {
        match k_radial(y[0]) {
            Ok(kr) => (kr - c * y[2].sin()).abs() / c,
            Err(_) => f64::INFINITY,
        }
    };
    let annot = |y: &[f64; 6]| SampleAnnotation {
        r: y[4].hypot(y[5]),
        psi: y[2],
        k: y[0] * y[2].sin(),
    };

    let mut points = vec![position];
    let mut annotations = vec![SampleAnnotation { r: r0, psi: start.psi, k: start.k }];
    let mut thetas = vec![0.0f64];
    let out = dopri5_run(
        &rhs,
        y0,
        h_max,
        stop_spec,
        &|_s, y| event_fn(y),
        &budget,
        &residual,
        |_s, y| {
            points.push([y[4], y[5]]);
            annotations.push(annot(y));
            thetas.push(y[1]);
        },
    )?;
    let yf = out.y;
    let event_err = match stop {
        FlowEvent::PsiCrossing { target, .. } => (yf[2] - target).abs(),
        FlowEvent::BranchTurn(_) => (yf[0] - 1.0).abs(),
        FlowEvent::ThetaReached(t) => (yf[1] - t).abs(),
        FlowEvent::ArcLengthReached(t) => (out.s - t).abs(),
    };
    if event_err > tolerances::EVENT_RESIDUAL {
        return Err(Error::Domain(format!(
            "flow endpoint missed the stop manifold by {event_err:.3e} (c = {c})"
        )));
    }
    if thetas.last() != Some(&yf[1]) {
        points.push([yf[4], yf[5]]);
        annotations.push(annot(&yf));
        thetas.push(yf[1]);
    }
    Ok(Leg {
        points,
        annotations,
        thetas,
        delta_theta: yf[1],
        psi_end: yf[2],
        phi_end: yf[3],
    })
}

/// Reconstructs one smooth trajectory arc in the plane.
///
/// `position` places the start point (its norm must equal `start.r` within
/// 1e-10); the tangent there is `atan2 + psi`, and position is integrated
/// jointly with the phase until `stop`, sampling at most `max_ds` of arc
/// length apart (tightened so adjacent tangents turn by at most half a
/// degree). The endpoint lands on the stop manifold within
/// [`tolerances::EVENT_RESIDUAL`].
pub fn reconstruct_arc(
    e: Energy,
    position: [f64; 2],
    start: PhasePoint,
    stop: FlowEvent,
    max_ds: f64,
) -> Result<Polyline> {
    let leg = flow_leg(e, position, start, stop, max_ds)?;
    Ok(Polyline {
        multiplicity: 1,
        points: leg.points,
        annotations: leg.annotations,
    })
}

fn station_phase(st: NodeLabel) -> Result<(f64, Branch)> {
    Ok(match st {
        NodeLabel::A => (FRAC_PI_3, Branch::Right),
        NodeLabel::B => (2.0 * FRAC_PI_3, Branch::Right),
        NodeLabel::C => (2.0 * FRAC_PI_3, Branch::Left),
        NodeLabel::D => (FRAC_PI_3, Branch::Left),
        other => {
            return Err(Error::InvalidPath(format!(
                "station {other:?} cannot appear inside a walk"
            )))
        }
    })
}

fn map_point(sym: Symmetry, p: [f64; 2]) -> [f64; 2] {
    match sym {
        Symmetry::ReflectionXAxis => [p[0], -p[1]],
        Symmetry::PointOrigin => [-p[0], -p[1]],
    }
}

fn map_dir(sym: Symmetry, d: [f64; 2]) -> [f64; 2] {
    map_point(sym, d)
}

// Coincidence budgets for folding symmetry images onto their originals.
// Junction points agree to the closure gap (~1e-9); directions to the event
// accuracy. Both sit far below any real geometric separation.
const FOLD_POINT: f64 = 1e-8;
const FOLD_DIR: f64 = 1e-7;

fn same_junction(a: &Junction, b: &Junction) -> bool {
    if dist(a.point, b.point) > FOLD_POINT {
        return false;
    }
    a.directions.iter().all(|da| {
        b.directions
            .iter()
            .any(|db| (da[0] - db[0]).hypot(da[1] - db[1]) <= FOLD_DIR)
    })
}

/// Builds the full plane network for one catalog solution.
///
/// `gamma_up` chains the walk's arcs with a π/3 tangent jump at every hop,
/// recording a triple-junction record and a radial ray per hop plus the two
/// end-vertex triples (degenerate opening or closing arcs contribute their
/// zero-length edge directions). `gamma_in` is the straight inner edge,
/// `gamma_down` the symmetry copy; junction and ray records of the copy are
/// the symmetry images, folded onto coincident originals so doubled rays
/// carry multiplicity 2. Errors with the measured gap if the walk misses
/// the far vertex by more than [`tolerances::NETWORK_CLOSURE`].
pub fn assemble_network(sol: &ShrinkerSolution, max_ds: f64) -> Result<NetworkGeometry> {
    if sol.residual.abs() > tolerances::CATALOG_RESIDUAL {
        return Err(Error::Domain(format!(
            "solution `{}` carries residual {:.3e}, above the assembly gate {:.0e}",
            sol.name,
            sol.residual,
            tolerances::CATALOG_RESIDUAL
        )));
    }
    let path = match (&sol.path_up, &sol.path_down) {
        (CurveKind::Path(up), CurveKind::Path(down)) if up == down => up,
        (CurveKind::Path(_), CurveKind::Path(_)) => {
            return Err(Error::Domain(
                "the two walk copies differ; only symmetric assemblies are supported".into(),
            ))
        }
        _ => return Err(Error::Domain("walk copies must be trajectory paths".into())),
    };
    if sol.gamma_in != CurveKind::Segment {
        return Err(Error::Domain(
            "inner edge must be the straight segment through the origin".into(),
        ));
    }
    let e = sol.c_up;
    let start_station = match path.start_region() {
        Region::Inside => NodeLabel::D,
        Region::Outside => NodeLabel::A,
    };
    let end_station = match path.end_region() {
        Region::Inside => NodeLabel::C,
        Region::Outside => NodeLabel::B,
    };

    let mut pos = [sol.r_start, 0.0];
    let mut theta_acc = 0.0f64;
    let mut psi_nominal = sol.psi_up;
    let mut psi_meas = sol.psi_up;
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut annotations: Vec<SampleAnnotation> = Vec::new();
    let mut hop_junctions: Vec<Junction> = Vec::new();
    let mut rays: Vec<Ray> = Vec::new();

    let arcs = path.arcs();
    for (i, &(a, b)) in arcs.iter().enumerate() {
        let a_st = if a == NodeLabel::S { start_station } else { a };
        let b_st = if b == NodeLabel::E { end_station } else { b };
        if a_st != b_st {
            let start_pp = if psi_nominal <= FRAC_PI_2 {
                PhasePoint::from_radius_lower(e, hypot2(pos))?
            } else {
                PhasePoint::from_radius_upper(e, hypot2(pos))?
            };
            let (psi_t, branch_t) = station_phase(b_st)?;
            let stop = FlowEvent::PsiCrossing {
                target: psi_t,
                direction: match branch_t {
                    Branch::Right => CrossingDirection::Rising,
                    Branch::Left => CrossingDirection::Falling,
                },
            };
            let leg = flow_leg(e, pos, start_pp, stop, max_ds)?;
            if points.is_empty() {
                points.extend_from_slice(&leg.points);
                annotations.extend_from_slice(&leg.annotations);
            } else {
                points.extend_from_slice(&leg.points[1..]);
                annotations.extend_from_slice(&leg.annotations[1..]);
            }
            theta_acc += leg.delta_theta;
            pos = *points.last().expect("leg samples");
            psi_nominal = psi_t;
            psi_meas = leg.psi_end;
        }
        if i + 1 < arcs.len() {
            // Hop: the tangent jumps by +π/3 at a fixed point, shedding a
            // radial ray. Backward, forward, and ray directions form the
            // Herring triple.
            let phi_in = theta_acc + psi_meas;
            let ray_dir = unit(pos);
            rays.push(Ray { origin: pos, direction: ray_dir, multiplicity: 1 });
            hop_junctions.push(Junction {
                point: pos,
                directions: [ray_dir, dir(phi_in + FRAC_PI_3), dir(phi_in + PI)],
            });
            psi_nominal += FRAC_PI_3;
            psi_meas += FRAC_PI_3;
        }
    }

    let far = [-sol.r_end, 0.0];
    let gap = dist(pos, far);
    if gap > tolerances::NETWORK_CLOSURE {
        return Err(Error::NetworkClosure {
            location: format!("`{}` far vertex", sol.name),
            gap,
            budget: tolerances::NETWORK_CLOSURE,
        });
    }
    let sweep_err = (theta_acc - sol.theta_up).abs();
    if sweep_err > tolerances::TURNING_MATCH {
        return Err(Error::NetworkClosure {
            location: format!("`{}` polar sweep", sol.name),
            gap: sweep_err,
            budget: tolerances::TURNING_MATCH,
        });
    }

    // End-vertex triples. The walk edge contributes its measured tangent;
    // the inner edge is exact; the copy's edge follows from the symmetry
    // (for the point map, the copy arrives at the start vertex carrying the
    // far-end tangent rotated by π, which is the same unit vector).
    let phi_e = theta_acc + psi_meas;
    let down_at_s = match sol.symmetry {
        Symmetry::ReflectionXAxis => dir(-sol.psi_up),
        Symmetry::PointOrigin => dir(phi_e),
    };
    let down_at_e = match sol.symmetry {
        Symmetry::ReflectionXAxis => map_dir(sol.symmetry, dir(phi_e + PI)),
        Symmetry::PointOrigin => dir(sol.psi_up + PI),
    };
    let vertex_s = Junction {
        point: [sol.r_start, 0.0],
        directions: [dir(sol.psi_up), down_at_s, [-1.0, 0.0]],
    };
    let vertex_e = Junction {
        point: pos,
        directions: [dir(phi_e + PI), down_at_e, [1.0, 0.0]],
    };

    let mut junctions = Vec::with_capacity(2 * (hop_junctions.len() + 2));
    junctions.push(vertex_s);
    junctions.extend(hop_junctions);
    junctions.push(vertex_e);

    // The copy's records are the symmetry images, folded onto coincident
    // originals; a ray landing on itself doubles instead.
    for j in junctions.clone() {
        let image = Junction {
            point: map_point(sol.symmetry, j.point),
            directions: j.directions.map(|d| map_dir(sol.symmetry, d)),
        };
        if !junctions.iter().any(|have| same_junction(have, &image)) {
            junctions.push(image);
        }
    }
    for ray in rays.clone() {
        let image = Ray {
            origin: map_point(sol.symmetry, ray.origin),
            direction: map_dir(sol.symmetry, ray.direction),
            multiplicity: ray.multiplicity,
        };
        match rays.iter_mut().find(|have| {
            dist(have.origin, image.origin) <= FOLD_POINT
                && dist(have.direction, image.direction) <= FOLD_DIR
        }) {
            Some(have) => have.multiplicity += image.multiplicity,
            None => rays.push(image),
        }
    }

    let gamma_up = Polyline { multiplicity: 1, points, annotations };
    let gamma_in = Polyline {
        multiplicity: 1,
        points: vec![[sol.r_start, 0.0], [0.0, 0.0], [-sol.r_end, 0.0]],
        annotations: vec![
            SampleAnnotation { r: sol.r_start, psi: PI, k: 0.0 },
            SampleAnnotation { r: 0.0, psi: PI, k: 0.0 },
            SampleAnnotation { r: sol.r_end, psi: 0.0, k: 0.0 },
        ],
    };
    let gamma_down = match sol.symmetry {
        Symmetry::ReflectionXAxis => reflect_across_x(&gamma_up),
        Symmetry::PointOrigin => reflect_through_origin(&gamma_up),
    };

    let net = NetworkGeometry {
        schema: NET_SCHEMA.to_string(),
        name: sol.name.clone(),
        closure_gap: gap,
        curves: vec![gamma_up, gamma_in, gamma_down],
        rays,
        junctions,
    };
    net.validate()?;
    Ok(net)
}

/// Bounded faces of the network's curve graph, each returned as the sample
/// chain around it (counterclockwise). Clusters curve endpoints, sorts the
/// incident edge-ends by angle, and walks the rotation system.
pub fn closed_regions(net: &NetworkGeometry) -> Vec<Vec<[f64; 2]>> {
    let curves: Vec<&Polyline> = net.curves.iter().filter(|c| c.points.len() >= 2).collect();
    if curves.is_empty() {
        return Vec::new();
    }
    let mut centers: Vec<[f64; 2]> = Vec::new();
    let mut cluster = |p: [f64; 2]| -> usize {
        for (i, c) in centers.iter().enumerate() {
            if dist(*c, p) <= tolerances::NETWORK_CLOSURE {
                return i;
            }
        }
        centers.push(p);
        centers.len() - 1
    };
    // Half-edge 2i runs curve i forward, 2i+1 backward.
    let mut origin = Vec::with_capacity(2 * curves.len());
    let mut key_angle = Vec::with_capacity(2 * curves.len());
    let first_chord = |pts: &[[f64; 2]], reverse: bool| -> [f64; 2] {
        let n = pts.len();
        if reverse {
            for i in (0..n - 1).rev() {
                let d = [pts[i][0] - pts[n - 1][0], pts[i][1] - pts[n - 1][1]];
                if hypot2(d) > 1e-12 {
                    return d;
                }
            }
        } else {
            for p in &pts[1..] {
                let d = [p[0] - pts[0][0], p[1] - pts[0][1]];
                if hypot2(d) > 1e-12 {
                    return d;
                }
            }
        }
        [1.0, 0.0]
    };
    for c in &curves {
        let u = cluster(c.points[0]);
        let v = cluster(*c.points.last().expect("nonempty"));
        let fwd = first_chord(&c.points, false);
        let rev = first_chord(&c.points, true);
        origin.push(u);
        key_angle.push(fwd[1].atan2(fwd[0]));
        origin.push(v);
        key_angle.push(rev[1].atan2(rev[0]));
    }
    let mut rings: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
    for (he, &v) in origin.iter().enumerate() {
        rings[v].push(he);
    }
    for ring in &mut rings {
        ring.sort_by(|&a, &b| key_angle[a].partial_cmp(&key_angle[b]).expect("finite angles"));
    }
    let ring_index: Vec<usize> = {
        let mut idx = vec![0usize; origin.len()];
        for ring in &rings {
            for (i, &he) in ring.iter().enumerate() {
                idx[he] = i;
            }
        }
        idx
    };
    // Face rule: continue with the clockwise predecessor of the twin, which
    // traces bounded faces counterclockwise (positive signed area).
    let next = |he: usize| -> usize {
        let twin = he ^ 1;
        let ring = &rings[origin[twin]];
        ring[(ring_index[twin] + ring.len() - 1) % ring.len()]
    };
    let mut seen = vec![false; origin.len()];
    let mut regions = Vec::new();
    for start in 0..origin.len() {
        if seen[start] {
            continue;
        }
        let mut chain: Vec<[f64; 2]> = Vec::new();
        let mut he = start;
        loop {
            seen[he] = true;
            let c = curves[he / 2];
            if he % 2 == 0 {
                chain.extend_from_slice(&c.points[..c.points.len() - 1]);
            } else {
                chain.extend(c.points.iter().rev().skip(1));
            }
            he = next(he);
            if he == start {
                break;
            }
        }
        let mut twice_area = 0.0;
        for (i, p) in chain.iter().enumerate() {
            let q = chain[(i + 1) % chain.len()];
            twice_area += p[0] * q[1] - q[0] * p[1];
        }
        if twice_area > 1e-9 {
            regions.push(chain);
        }
    }
    regions
}

/// Certifies that the outer boundary (the curves that stay away from the
/// origin, chained into a loop) is star-shaped around the origin: the polar
/// angle along the loop is monotone with total winding 2π, and the radial
/// function evaluates at every one of `probes` directions.
pub fn outer_boundary_is_star_shaped(net: &NetworkGeometry, probes: usize) -> Result<()> {
    let outer: Vec<&Polyline> = net
        .curves
        .iter()
        .filter(|c| c.points.len() >= 2 && c.points.iter().all(|p| hypot2(*p) > 1e-6))
        .collect();
    if outer.is_empty() {
        return Err(Error::Domain("no curves stay clear of the origin".into()));
    }
    let mut loop_pts: Vec<[f64; 2]> = outer[0].points.clone();
    let mut used = vec![false; outer.len()];
    used[0] = true;
    while used.iter().any(|u| !u) {
        let tail = *loop_pts.last().expect("nonempty");
        let mut found = false;
        for (i, c) in outer.iter().enumerate() {
            if used[i] {
                continue;
            }
            if dist(tail, c.points[0]) <= tolerances::NETWORK_CLOSURE {
                loop_pts.extend_from_slice(&c.points[1..]);
            } else if dist(tail, *c.points.last().expect("nonempty")) <= tolerances::NETWORK_CLOSURE
            {
                loop_pts.extend(c.points.iter().rev().skip(1));
            } else {
                continue;
            }
            used[i] = true;
            found = true;
            break;
        }
        if !found {
            return Err(Error::Domain(
                "outer curves do not chain into a single loop".into(),
            ));
        }
    }
    if dist(*loop_pts.last().expect("nonempty"), loop_pts[0]) > tolerances::NETWORK_CLOSURE {
        return Err(Error::Domain("outer boundary does not close".into()));
    }
    // Unwrapped polar angle along the loop.
    let mut thetas = Vec::with_capacity(loop_pts.len());
    let mut radii = Vec::with_capacity(loop_pts.len());
    let mut prev_raw = loop_pts[0][1].atan2(loop_pts[0][0]);
    let mut acc = prev_raw;
    for (i, p) in loop_pts.iter().enumerate() {
        let raw = p[1].atan2(p[0]);
        if i > 0 {
            let mut dt = raw - prev_raw;
            while dt > PI {
                dt -= TAU;
            }
            while dt < -PI {
                dt += TAU;
            }
            if dt < -1e-12 {
                return Err(Error::Domain(format!(
                    "polar angle retreats by {dt:.3e} at sample {i}; the radial function \
                     is multivalued there"
                )));
            }
            acc += dt;
        }
        thetas.push(acc);
        radii.push(hypot2(*p));
        prev_raw = raw;
    }
    let total = thetas.last().expect("nonempty") - thetas[0];
    if (total - TAU).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "outer boundary winds by {total} instead of 2pi"
        )));
    }
    // Evaluate the radial function at every probe direction.
    for j in 0..probes {
        let alpha = thetas[0] + TAU * (j as f64) / (probes as f64);
        let idx = match thetas.binary_search_by(|t| t.partial_cmp(&alpha).expect("finite")) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
        .min(thetas.len() - 2);
        let (t0, t1) = (thetas[idx], thetas[idx + 1]);
        let r = if t1 > t0 {
            let w = ((alpha - t0) / (t1 - t0)).clamp(0.0, 1.0);
            radii[idx] * (1.0 - w) + radii[idx + 1] * w
        } else {
            radii[idx]
        };
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!(
                "radial function failed to evaluate at probe direction {alpha}"
            )));
        }
    }
    Ok(())
}

/// Rendering options for the SVG export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Rays are clipped at this distance from the origin.
    pub ray_extent: f64,
    /// Draw the unit circle for scale.
    pub unit_circle: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { ray_extent: 3.0, unit_circle: false }
    }
}

/// Export target for [`export`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExportFormat {
    Svg(SvgOptions),
    Json,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the network as a standalone SVG 1.1 document: filled bounded
/// regions, curve paths, clipped rays, junction markers, the origin marker,
/// and optionally the unit circle.
pub fn export_svg(net: &NetworkGeometry, opts: &SvgOptions) -> String {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut grow = |p: [f64; 2]| {
        lo[0] = lo[0].min(p[0]);
        lo[1] = lo[1].min(p[1]);
        hi[0] = hi[0].max(p[0]);
        hi[1] = hi[1].max(p[1]);
    };
    grow([0.0, 0.0]);
    if opts.unit_circle {
        grow([1.0, 1.0]);
        grow([-1.0, -1.0]);
    }
    for c in &net.curves {
        for &p in &c.points {
            grow(p);
        }
    }
    for r in &net.rays {
        grow(r.origin);
        let t = (opts.ray_extent - hypot2(r.origin)).max(0.0);
        grow([r.origin[0] + t * r.direction[0], r.origin[1] + t * r.direction[1]]);
    }
    for j in &net.junctions {
        grow(j.point);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(0.5);
    let margin = 0.06 * span;
    let (w, h) = (hi[0] - lo[0] + 2.0 * margin, hi[1] - lo[1] + 2.0 * margin);
    let stroke = span / 320.0;
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"{:.6} {:.6} {:.6} {:.6}\" width=\"640\" height=\"640\">\n",
        lo[0] - margin,
        -hi[1] - margin,
        w,
        h
    ));
    s.push_str(&format!("<title>{}</title>\n", xml_escape(&net.name)));
    s.push_str("<g transform=\"scale(1,-1)\">\n");
    for region in closed_regions(net) {
        s.push_str("<path class=\"region\" fill=\"#8fb8dd\" fill-opacity=\"0.35\" stroke=\"none\" d=\"");
        for (i, p) in region.iter().enumerate() {
            s.push_str(&format!("{}{:.6},{:.6}", if i == 0 { "M" } else { " L" }, p[0], p[1]));
        }
        s.push_str(" Z\"/>\n");
    }
    if opts.unit_circle {
        s.push_str(&format!(
            "<circle class=\"unit-circle\" cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" \
             stroke=\"#999999\" stroke-width=\"{:.6}\" stroke-dasharray=\"{:.6} {:.6}\"/>\n",
            0.5 * stroke,
            2.0 * stroke,
            2.0 * stroke
        ));
    }
    for c in &net.curves {
        let width = stroke * (1.0 + 0.9 * f64::from(c.multiplicity - 1));
        s.push_str(&format!(
            "<path class=\"curve\" data-multiplicity=\"{}\" fill=\"none\" stroke=\"#1a1a1a\" \
             stroke-width=\"{:.6}\" stroke-linecap=\"round\" d=\"",
            c.multiplicity, width
        ));
        for (i, p) in c.points.iter().enumerate() {
            s.push_str(&format!("{}{:.6},{:.6}", if i == 0 { "M" } else { " L" }, p[0], p[1]));
        }
        s.push_str("\"/>\n");
    }
    for r in &net.rays {
        let t = (opts.ray_extent - hypot2(r.origin)).max(0.0);
        let end = [r.origin[0] + t * r.direction[0], r.origin[1] + t * r.direction[1]];
        let width = stroke * (1.0 + 0.9 * f64::from(r.multiplicity - 1));
        s.push_str(&format!(
            "<line class=\"ray\" data-multiplicity=\"{}\" stroke=\"#707070\" \
             stroke-width=\"{:.6}\" x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\"/>\n",
            r.multiplicity, width, r.origin[0], r.origin[1], end[0], end[1]
        ));
    }
    // One marker per distinct junction point; merged vertices share one.
    let mut marked: Vec<[f64; 2]> = Vec::new();
    for j in &net.junctions {
        if marked.iter().any(|m| dist(*m, j.point) <= FOLD_POINT) {
            continue;
        }
        marked.push(j.point);
        s.push_str(&format!(
            "<circle class=\"junction\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" \
             fill=\"#c0392b\"/>\n",
            j.point[0],
            j.point[1],
            2.2 * stroke
        ));
    }
    s.push_str(&format!(
        "<circle class=\"origin\" cx=\"0\" cy=\"0\" r=\"{:.6}\" fill=\"none\" \
         stroke=\"#555555\" stroke-width=\"{:.6}\"/>\n",
        1.6 * stroke,
        0.5 * stroke
    ));
    s.push_str("</g>\n</svg>\n");
    s
}

/// Serializes the network as the `shrinker-net/1` JSON document. The
/// encoding uses shortest round-trip decimals, so parsing and re-exporting
/// reproduces the bytes exactly.
pub fn export_json(net: &NetworkGeometry) -> Result<String> {
    Ok(serde_json::to_string(net)?)
}

/// Parses and validates a `shrinker-net/1` document.
pub fn network_from_json(text: &str) -> Result<NetworkGeometry> {
    let net: NetworkGeometry = serde_json::from_str(text)?;
    net.validate()?;
    Ok(net)
}

/// Writes the chosen export to `sink`.
pub fn export<W: Write>(net: &NetworkGeometry, format: &ExportFormat, mut sink: W) -> Result<()> {
    let text = match format {
        ExportFormat::Svg(opts) => export_svg(net, opts),
        ExportFormat::Json => export_json(net)?,
    };
    sink.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle_functions::h_triple;
    use crate::phase_plane::{invert_k, special_point, SpecialPointLabel, C_BAR, C_STAR};
    use crate::shrinker_catalog::{build_catalog, solve_closure, ClosureEquation, HCombo};
    use std::sync::OnceLock;

    fn energy(c: f64) -> Energy {
        Energy::from_c(c).unwrap()
    }

    fn catalog() -> &'static [ShrinkerSolution] {
        static CATALOG: OnceLock<Vec<ShrinkerSolution>> = OnceLock::new();
        CATALOG.get_or_init(|| build_catalog().expect("catalog builds"))
    }

    fn by_name(name: &str) -> &'static ShrinkerSolution {
        catalog().iter().find(|s| s.name == name).expect("catalog entry")
    }

    fn unwrap_theta(points: &[[f64; 2]]) -> f64 {
        let mut acc = 0.0;
        let mut prev = points[0][1].atan2(points[0][0]);
        for p in &points[1..] {
            let raw = p[1].atan2(p[0]);
            let mut dt = raw - prev;
            while dt > PI {
                dt -= TAU;
            }
            while dt < -PI {
                dt += TAU;
            }
            acc += dt;
            prev = raw;
        }
        acc
    }

    #[test]
    fn near_circle_arc_returns_to_the_lower_turn() {
        let e = energy(1.0 + 1e-6);
        let n = special_point(e, SpecialPointLabel::N).unwrap();
        let line = reconstruct_arc(e, [n.r, 0.0], n, FlowEvent::BranchTurn(TurnLabel::N), 0.01)
            .unwrap();
        let end = *line.points.last().unwrap();
        assert!((hypot2(end) - 1.0).abs() < 1e-9);
        let psi_end = line.annotations.last().unwrap().psi;
        assert!((psi_end - e.psi_min()).abs() < 1e-4);
        for a in &line.annotations {
            assert!((a.r - 1.0).abs() < 2e-3);
        }
        let sweep = unwrap_theta(&line.points);
        assert!((sweep - std::f64::consts::SQRT_2 * PI).abs() < 1e-3);
    }

    #[test]
    fn d_to_a_arc_lands_on_the_outer_station_radius() {
        let eq = ClosureEquation::from_combo(&HCombo::of(1, 4, 0), PI, (C_STAR + 1e-9, C_BAR));
        let root = solve_closure(&eq).unwrap();
        let e = root.energy;
        let level = 3f64.sqrt() / 2.0 * e.c();
        let d = special_point(e, SpecialPointLabel::D).unwrap();
        let stop = FlowEvent::PsiCrossing {
            target: FRAC_PI_3,
            direction: CrossingDirection::Rising,
        };
        let line = reconstruct_arc(e, [d.r, 0.0], d, stop, 0.01).unwrap();
        let r_a = invert_k(level, Branch::Right).unwrap();
        assert!((hypot2(*line.points.last().unwrap()) - r_a).abs() < 1e-9);
    }

    #[test]
    fn sampled_polar_angle_matches_the_flowed_angle() {
        let e = energy(1.3);
        let d = special_point(e, SpecialPointLabel::D).unwrap();
        let stop = FlowEvent::PsiCrossing {
            target: 2.0 * FRAC_PI_3,
            direction: CrossingDirection::Rising,
        };
        let leg = flow_leg(e, [d.r, 0.0], d, stop, 0.01).unwrap();
        let mut acc = 0.0;
        let mut prev = leg.points[0][1].atan2(leg.points[0][0]);
        for (i, p) in leg.points.iter().enumerate() {
            if i > 0 {
                let raw = p[1].atan2(p[0]);
                let mut dt = raw - prev;
                while dt > PI {
                    dt -= TAU;
                }
                while dt < -PI {
                    dt += TAU;
                }
                acc += dt;
                prev = raw;
            }
            assert!(
                (acc - leg.thetas[i]).abs() < 1e-9,
                "sample {i}: atan2 unwrap {acc} vs flowed {}",
                leg.thetas[i]
            );
        }
        assert!((leg.phi_end - (d.psi + leg.delta_theta + FRAC_PI_3)).abs() < 1e-9);
    }

    #[test]
    fn eye_assembly_closes_with_mirror_symmetry() {
        let sol = by_name("cisgeminate-eye");
        let net = assemble_network(sol, DEFAULT_MAX_DS).unwrap();
        assert!(net.closure_gap < 1e-7, "gap {}", net.closure_gap);
        assert_eq!(net.junctions.len(), 6);
        assert_eq!(net.curves.len(), 3);
        assert_eq!(net.rays.len(), 4);
        assert!(net.rays.iter().all(|r| r.multiplicity == 1));
        let h = h_triple(sol.c_up).unwrap();
        let mut angles: Vec<f64> = net
            .rays
            .iter()
            .map(|r| r.direction[1].atan2(r.direction[0]))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-(PI - h.h2), -h.h2, h.h2, PI - h.h2];
        for (got, want) in angles.iter().zip(expect) {
            assert!((got - want).abs() < 1e-8, "ray at {got}, expected {want}");
        }
        let mirrored = reflect_across_x(&net.curves[0]);
        assert!(hausdorff_distance(&net.curves[2], &mirrored) < 1e-7);
        assert_eq!(closed_regions(&net).len(), 2);
        outer_boundary_is_star_shaped(&net, 4096).unwrap();
    }

    #[test]
    fn heart_axis_ray_is_doubled() {
        let sol = by_name("heart");
        let net = assemble_network(sol, DEFAULT_MAX_DS).unwrap();
        assert_eq!(net.rays.len(), 1);
        assert_eq!(net.rays[0].multiplicity, 2);
        assert!(dist(net.rays[0].origin, [sol.r_start, 0.0]) < 1e-9);
        assert!(dist(net.rays[0].direction, [1.0, 0.0]) < 1e-9);
        assert_eq!(net.junctions.len(), 3);
        assert_eq!(closed_regions(&net).len(), 2);
    }

    #[test]
    fn broken_lens_keeps_every_ray_simple() {
        let sol = by_name("broken-lens");
        let net = assemble_network(sol, DEFAULT_MAX_DS).unwrap();
        assert_eq!(net.rays.len(), 4);
        assert!(net.rays.iter().all(|r| r.multiplicity == 1));
        assert_eq!(net.junctions.len(), 6);
        let image = reflect_through_origin(&net.curves[0]);
        assert!(hausdorff_distance(&net.curves[2], &image) < 1e-12);
        outer_boundary_is_star_shaped(&net, 4096).unwrap();
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let net = assemble_network(by_name("heart"), 0.02).unwrap();
        let text = export_json(&net).unwrap();
        let parsed = network_from_json(&text).unwrap();
        assert_eq!(parsed, net);
        assert_eq!(export_json(&parsed).unwrap(), text);
    }

    #[test]
    fn empty_network_documents_are_minimal() {
        let net = NetworkGeometry::empty("nothing");
        net.validate().unwrap();
        let json = export_json(&net).unwrap();
        let parsed = network_from_json(&json).unwrap();
        assert_eq!(parsed, net);
        let svg = export_svg(&net, &SvgOptions::default());
        assert!(svg.contains("<svg"));
        assert!(svg.contains("class=\"origin\""));
        assert!(!svg.contains("class=\"curve\""));
        assert!(!svg.contains("class=\"ray\""));
    }

    #[test]
    fn svg_element_counts_reflect_the_structure() {
        let eye = assemble_network(by_name("cisgeminate-eye"), 0.02).unwrap();
        let svg = export_svg(&eye, &SvgOptions { ray_extent: 3.0, unit_circle: true });
        assert_eq!(svg.matches("class=\"region\"").count(), 2);
        assert_eq!(svg.matches("class=\"curve\"").count(), 3);
        assert_eq!(svg.matches("class=\"ray\"").count(), 4);
        assert_eq!(svg.matches("class=\"unit-circle\"").count(), 1);
        assert_eq!(svg.matches("class=\"junction\"").count(), 6);

        let heart = assemble_network(by_name("heart"), 0.02).unwrap();
        let svg = export_svg(&heart, &SvgOptions::default());
        assert_eq!(svg.matches("class=\"ray\"").count(), 1);
        assert!(svg.contains("data-multiplicity=\"2\""));
    }

    #[test]
    fn sink_failures_surface_as_io_errors() {
        struct Broken;
        impl Write for Broken {
            fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
                Err(std::io::Error::other("sink rejected the write"))
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let net = NetworkGeometry::empty("nothing");
        let err = export(&net, &ExportFormat::Json, Broken).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
