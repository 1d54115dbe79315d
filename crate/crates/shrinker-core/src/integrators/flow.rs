//! Phase-plane ODE flow: Dormand–Prince 5(4) with PI step control and
//! directed event location.
//!
//! The counterclockwise arc-length parametrization of a trajectory with
//! energy `c` obeys
//!
//! ```text
//!     R'     = cos(psi)
//!     theta' = sin(psi) / R
//!     psi'   = (R - 1/R) sin(psi)
//!     phi'   = R sin(psi)          (phi = theta + psi, the tangent angle)
//! ```
//!
//! `theta` is strictly increasing, which gives every run a natural clock: a
//! single period turns by less than `sqrt(2) pi`, so a flow that accumulates
//! `1.5 sqrt(2) pi` of polar angle without meeting its stop event has missed
//! it and errors out.
//!
//! This engine shares nothing with the quadrature route: it never evaluates
//! the curvature-potential integrals, so agreement between the two is a real
//! cross-check, not a tautology.

use crate::error::{Error, Result};
use crate::phase_plane::{k_radial, Branch, Energy, PhasePoint};
use crate::roots::brent;
use crate::tolerances;
use serde::Serialize;
use std::f64::consts::PI;

/// Instantaneous flow state: arc length and the four integrated quantities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowState {
    pub s: f64,
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
    pub phi: f64,
}

/// Which branch turn to stop at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TurnLabel {
    /// Upper turn: `psi = psi_max`, `R` crosses 1 downward.
    M,
    /// Lower turn: `psi = psi_min`, `R` crosses 1 upward.
    N,
}

/// Sign of the event-function crossing to accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingDirection {
    Rising,
    Falling,
    Any,
}

/// Stop condition for a flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FlowEvent {
    /// First crossing of `psi = target` with the given direction.
    PsiCrossing { target: f64, direction: CrossingDirection },
    /// First branch turn of the given kind (`R = 1`).
    BranchTurn(TurnLabel),
    /// Exact arc-length target (no root finding involved).
    ArcLengthReached(f64),
    /// First time the accumulated polar angle reaches the target.
    ThetaReached(f64),
}

/// Result of a flow run.
#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub end: PhasePoint,
    pub delta_theta: f64,
    pub delta_phi: f64,
    pub delta_s: f64,
    /// Accepted-step samples; populated when a sampling cap was requested.
    pub trace: Vec<FlowState>,
}

/// Polar-angle travel budget: 1.5 periods, each below `sqrt(2) pi`.
pub(crate) const THETA_BUDGET: f64 = 1.5 * std::f64::consts::SQRT_2 * PI;

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand–Prince step of size `h` from `y` with `f1 = rhs(y)` (FSAL).
/// Returns `(y_new, f_new, scaled_error_norm)`.
fn dp_step<const N: usize>(
    rhs: &impl Fn(&[f64; N]) -> [f64; N],
    y: &[f64; N],
    f1: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> ([f64; N], [f64; N], f64) {
    let k1 = *f1;
    let k2 = rhs(&axpy(y, h, &[(A21, &k1)]));
    let k3 = rhs(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(&axpy(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(&y_new);
    let mut err_sq = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        err_sq += (e / sc) * (e / sc);
    }
    (y_new, k7, (err_sq / N as f64).sqrt())
}

/// Cubic Hermite interpolation across an accepted step, used only to bracket
/// events before they are polished against the true flow.
fn hermite<const N: usize>(
    y0: &[f64; N],
    f0: &[f64; N],
    y1: &[f64; N],
    f1: &[f64; N],
    h: f64,
    t: f64,
) -> [f64; N] {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

pub(crate) enum Stop {
    /// Directed zero of the event function.
    Event(CrossingDirection),
    /// Integrate to this exact arc length.
    ArcLength(f64),
}

pub(crate) struct RunOutput<const N: usize> {
    pub s: f64,
    pub y: [f64; N],
}

/// Integrates `y' = rhs(y)` from `y0` at `s = 0` until the stop condition.
///
/// `event` is the scalar whose first directed zero (at `s` beyond a small
/// departure guard) ends the run; it is bracketed on a Hermite scan of each
/// accepted step and then polished by Brent iterations against freshly
/// integrated states, locating `s` to [`tolerances::EVENT_ARC_LENGTH`].
/// `budget` maps a state to the exhausted-budget error, `residual` is
/// checked against [`tolerances::CONSERVATION_RESIDUAL`] after every
/// accepted step, and `on_accept` observes accepted states (for traces).
#[allow(clippy::too_many_arguments)]
pub(crate) fn dopri5_run<const N: usize>(
    rhs: &impl Fn(&[f64; N]) -> [f64; N],
    y0: [f64; N],
    h_max: f64,
    stop: Stop,
    event: &impl Fn(f64, &[f64; N]) -> f64,
    budget: &impl Fn(f64, &[f64; N]) -> Option<Error>,
    residual: &impl Fn(&[f64; N]) -> f64,
    mut on_accept: impl FnMut(f64, &[f64; N]),
) -> Result<RunOutput<N>> {
    let rtol = tolerances::FLOW_RTOL;
    let atol = tolerances::FLOW_ATOL;
    let mut s = 0.0f64;
    let mut y = y0;
    let mut f = rhs(&y);
    let mut h = 1e-3f64.min(h_max);
    let mut facold = 1e-4f64;
    let mut rejects_in_a_row = 0u32;
    // Events fired essentially at the start point are departures from the
    // stop manifold, not arrivals back on it.
    let departure_guard = 100.0 * tolerances::EVENT_ARC_LENGTH;

    loop {
        if let Some(err) = budget(s, &y) {
            return Err(err);
        }
        let mut h_try = h.min(h_max);
        if let Stop::ArcLength(target) = stop {
            if s >= target {
                return Ok(RunOutput { s, y });
            }
            let remaining = target - s;
            if remaining <= h_try * 1.2 {
                h_try = remaining;
            }
        }
        let (y_new, f_new, err) = dp_step(rhs, &y, &f, h_try, rtol, atol);
        if !err.is_finite() {
            return Err(Error::StepSizeUnderflow { s, h: h_try });
        }
        if err > 1.0 {
            rejects_in_a_row += 1;
            if rejects_in_a_row > 40 || h_try < 1e-14 * s.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { s, h: h_try });
            }
            let fac = (err.powf(0.2) / 0.9).clamp(0.2, 10.0);
            h = h_try / fac;
            continue;
        }
        rejects_in_a_row = 0;
        let s_new = s + h_try;

        if let Stop::Event(direction) = stop {
            if let Some(s_hit) =
                locate_event(rhs, s, &y, &f, s_new, &y_new, &f_new, h_try, event, direction, departure_guard)?
            {
                // Re-integrate to the located arc length for the final state.
                let (y_hit, _, _) = dp_step(rhs, &y, &f, s_hit - s, rtol, atol);
                return Ok(RunOutput { s: s_hit, y: y_hit });
            }
        }

        s = s_new;
        y = y_new;
        f = f_new;
        let res = residual(&y);
        if res > tolerances::CONSERVATION_RESIDUAL {
            return Err(Error::ConservationDrift {
                residual: res,
                budget: tolerances::CONSERVATION_RESIDUAL,
            });
        }
        on_accept(s, &y);
        if let Stop::ArcLength(target) = stop {
            if (s - target).abs() <= tolerances::EVENT_ARC_LENGTH {
                return Ok(RunOutput { s: target, y });
            }
        }
        // PI controller (Hairer's coefficients: order 5, beta = 0.04).
        let fac11 = err.max(1e-16).powf(0.17);
        let fac = (fac11 / facold.powf(0.04) / 0.9).clamp(0.1, 5.0);
        facold = err.max(1e-4);
        h = h_try / fac;
    }
}

/// Scans one accepted step for the first directed zero of the event
/// function; returns its arc length if found.
#[allow(clippy::too_many_arguments)]
fn locate_event<const N: usize>(
    rhs: &impl Fn(&[f64; N]) -> [f64; N],
    s0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    s1: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    h: f64,
    event: &impl Fn(f64, &[f64; N]) -> f64,
    direction: CrossingDirection,
    departure_guard: f64,
) -> Result<Option<f64>> {
    const SCAN: usize = 16;
    let accepts = |ga: f64, gb: f64| -> bool {
        match direction {
            CrossingDirection::Rising => ga < 0.0 && gb >= 0.0,
            CrossingDirection::Falling => ga > 0.0 && gb <= 0.0,
            CrossingDirection::Any => (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0),
        }
    };
    let mut sa = s0;
    let mut ga = event(s0, y0);
    for j in 1..=SCAN {
        let t = j as f64 / SCAN as f64;
        let sb = s0 + t * h;
        let yb = if j == SCAN { *y1 } else { hermite(y0, f0, y1, f1, h, t) };
        let gb = event(sb, &yb);
        if accepts(ga, gb) && sb > s0.max(departure_guard) {
            // Polish against the true flow, not the interpolant. Widen the
            // bracket one scan cell to absorb Hermite error.
            let lo = (sa - h / SCAN as f64).max(s0);
            let hi = (sb + h / SCAN as f64).min(s1);
            let g_true = |s: f64| -> Result<f64> {
                if s <= s0 {
                    return Ok(event(s0, y0));
                }
                let (ys, _, _) = dp_step(
                    rhs,
                    y0,
                    f0,
                    s - s0,
                    tolerances::FLOW_RTOL,
                    tolerances::FLOW_ATOL,
                );
                Ok(event(s, &ys))
            };
            // The widened bracket may lose the sign change if Hermite error
            // was tiny; fall back to the scan cell itself.
            let (mut blo, mut bhi) = (lo, hi);
            if g_true(blo)?.signum() == g_true(bhi)?.signum() {
                blo = sa;
                bhi = sb;
                if g_true(blo)?.signum() == g_true(bhi)?.signum() {
                    ga = gb;
                    sa = sb;
                    continue;
                }
            }
            let root = brent(
                g_true,
                blo,
                bhi,
                0.5 * tolerances::EVENT_ARC_LENGTH,
                f64::INFINITY,
                120,
            )?;
            if root.x > departure_guard {
                return Ok(Some(root.x));
            }
        }
        ga = gb;
        sa = sb;
    }
    Ok(None)
}

/// Right-hand side of the phase flow.
#[inline]
fn phase_rhs(y: &[f64; 4]) -> [f64; 4] {
    let (r, psi) = (y[0], y[2]);
    let sp = psi.sin();
    [psi.cos(), sp / r, (r - 1.0 / r) * sp, r * sp]
}

/// Flows counterclockwise from `start` until `stop`.
///
/// Returns the final phase point together with the accumulated polar angle
/// `delta_theta`, tangent angle `delta_phi`, and arc length `delta_s`. When
/// `sample_max_ds` is given, accepted steps are capped at that length and
/// recorded in the trace (start state included).
///
/// The run enforces three health checks: the conserved quantity
/// `K(R) - c sin(psi)` stays within [`tolerances::CONSERVATION_RESIDUAL`]
/// (relative to `c`), the step size never collapses, and the stop event must
/// arrive within 1.5 periods of polar angle.
pub fn flow(
    e: Energy,
    start: PhasePoint,
    stop: FlowEvent,
    sample_max_ds: Option<f64>,
) -> Result<FlowOutcome> {
    let c = e.c();
    let start_residual = (k_radial(start.r)? - c * start.psi.sin()).abs() / c;
    if start_residual > 1e-8 {
        return Err(Error::Domain(format!(
            "start point (R = {}, psi = {}) is not on the trajectory c = {c} (residual {start_residual})",
            start.r, start.psi
        )));
    }
    let (stop_spec, event_fn): (Stop, Box<dyn Fn(f64, &[f64; 4]) -> f64>) = match stop {
        FlowEvent::PsiCrossing { target, direction } => {
            if !(target >= e.psi_min() - 1e-12 && target <= e.psi_max() + 1e-12) {
                return Err(Error::Domain(format!(
                    "psi target {target} outside [{}, {}] for c = {c}",
                    e.psi_min(),
                    e.psi_max()
                )));
            }
            (Stop::Event(direction), Box::new(move |_, y| y[2] - target))
        }
        FlowEvent::BranchTurn(TurnLabel::M) => (
            Stop::Event(CrossingDirection::Falling),
            Box::new(|_, y| y[0] - 1.0),
        ),
        FlowEvent::BranchTurn(TurnLabel::N) => (
            Stop::Event(CrossingDirection::Rising),
            Box::new(|_, y| y[0] - 1.0),
        ),
        FlowEvent::ArcLengthReached(s) => {
            if !(s >= 0.0) {
                return Err(Error::Domain(format!("arc-length target must be >= 0, got {s}")));
            }
            (Stop::ArcLength(s), Box::new(|_, _| 0.0))
        }
        FlowEvent::ThetaReached(t) => {
            if !(t >= 0.0 && t < THETA_BUDGET) {
                return Err(Error::Domain(format!(
                    "theta target must lie in [0, {THETA_BUDGET}), got {t}"
                )));
            }
            (Stop::Event(CrossingDirection::Rising), Box::new(move |_, y| y[1] - t))
        }
    };

    let y0 = [start.r, 0.0, start.psi, start.psi];
    let mut trace = Vec::new();
    let sampling = sample_max_ds.is_some();
    if sampling {
        trace.push(FlowState { s: 0.0, r: y0[0], theta: y0[1], psi: y0[2], phi: y0[3] });
    }
    let h_max = sample_max_ds.unwrap_or(0.2);
    if !(h_max > 0.0) {
        return Err(Error::Domain(format!("sampling step must be positive, got {h_max}")));
    }
    let budget = move |_s: f64, y: &[f64; 4]| -> Option<Error> {
        if y[1] > THETA_BUDGET {
            Some(Error::EventNotReached { c, budget: THETA_BUDGET })
        } else {
            None
        }
    };
    let residual = move |y: &[f64; 4]| -> f64 {
        match k_radial(y[0]) {
            Ok(kr) => (kr - c * y[2].sin()).abs() / c,
            Err(_) => f64::INFINITY,
        }
    };
    let out = dopri5_run(
        &phase_rhs,
        y0,
        h_max,
        stop_spec,
        &|s, y| event_fn(s, y),
        &budget,
        &residual,
        |s, y| {
            if sampling {
                trace.push(FlowState { s, r: y[0], theta: y[1], psi: y[2], phi: y[3] });
            }
        },
    )?;
    let [r, theta, psi, phi] = out.y;
    if sampling {
        trace.push(FlowState { s: out.s, r, theta, psi, phi });
    }
    let branch = classify_branch(e, r, psi);
    let end = PhasePoint { psi, branch, r, k: r * psi.sin() };
    Ok(FlowOutcome {
        end,
        delta_theta: theta,
        delta_phi: phi - start.psi,
        delta_s: out.s,
        trace,
    })
}

/// Branch tag for a flowed endpoint. At the turns (`R = 1` within event
/// accuracy) the tag follows the traversal convention: right after `N`
/// (lower turn), left after `M` (upper turn).
fn classify_branch(e: Energy, r: f64, psi: f64) -> Branch {
    if (r - 1.0).abs() < 1e-9 {
        let mid = 0.5 * (e.psi_min() + e.psi_max());
        if psi < mid {
            Branch::Right
        } else {
            Branch::Left
        }
    } else if r < 1.0 {
        Branch::Left
    } else {
        Branch::Right
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{special_point, SpecialPointLabel};

    fn energy(c: f64) -> Energy {
        Energy::from_c(c).unwrap()
    }

    #[test]
    fn full_period_closes_in_phase_plane() {
        let e = energy(1.3);
        let a = special_point(e, SpecialPointLabel::A).unwrap();
        let out = flow(
            e,
            a,
            FlowEvent::PsiCrossing {
                target: std::f64::consts::FRAC_PI_3,
                direction: CrossingDirection::Rising,
            },
            None,
        )
        .unwrap();
        assert!((out.end.r - a.r).abs() < tolerances::PERIOD_CLOSURE);
        assert!((out.end.psi - a.psi).abs() < tolerances::PERIOD_CLOSURE);
        // One full period turns by T in both theta and phi.
        assert!((out.delta_theta - out.delta_phi).abs() < tolerances::THETA_IDENTITY);
        assert!(out.delta_theta > PI && out.delta_theta < std::f64::consts::SQRT_2 * PI);
    }

    #[test]
    fn theta_phi_psi_identity_holds_on_partial_arcs() {
        let e = energy(1.18);
        let d = special_point(e, SpecialPointLabel::D).unwrap();
        let out = flow(
            e,
            d,
            FlowEvent::PsiCrossing {
                target: 2.0 * std::f64::consts::FRAC_PI_3,
                direction: CrossingDirection::Rising,
            },
            None,
        )
        .unwrap();
        let dpsi = out.end.psi - d.psi;
        assert!((out.delta_theta - (out.delta_phi - dpsi)).abs() < tolerances::THETA_IDENTITY);
    }

    #[test]
    fn branch_turns_land_on_unit_radius() {
        let e = energy(1.4);
        let b = special_point(e, SpecialPointLabel::B).unwrap();
        let out = flow(e, b, FlowEvent::BranchTurn(TurnLabel::M), None).unwrap();
        assert!((out.end.r - 1.0).abs() < 1e-10);
        assert!((out.end.psi - e.psi_max()).abs() < 1e-9);
        assert_eq!(out.end.branch, Branch::Left);

        let out2 = flow(e, out.end, FlowEvent::BranchTurn(TurnLabel::N), None).unwrap();
        assert!((out2.end.r - 1.0).abs() < 1e-10);
        assert!((out2.end.psi - e.psi_min()).abs() < 1e-9);
        assert_eq!(out2.end.branch, Branch::Right);
    }

    #[test]
    fn arc_length_stop_is_exact() {
        let e = energy(1.25);
        let a = special_point(e, SpecialPointLabel::A).unwrap();
        let out = flow(e, a, FlowEvent::ArcLengthReached(0.8), None).unwrap();
        assert!((out.delta_s - 0.8).abs() <= tolerances::EVENT_ARC_LENGTH);
    }

    #[test]
    fn theta_target_is_hit() {
        let e = energy(1.25);
        let a = special_point(e, SpecialPointLabel::A).unwrap();
        let out = flow(e, a, FlowEvent::ThetaReached(1.0), None).unwrap();
        assert!((out.delta_theta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unreachable_event_exhausts_budget() {
        let e = energy(1.25);
        let a = special_point(e, SpecialPointLabel::A).unwrap();
        // theta = 6.6 needs more than one period (T < sqrt(2) pi ~ 4.44)
        // but stays under the budget, so it is legal; 6.7 exceeds it.
        assert!(flow(e, a, FlowEvent::ThetaReached(6.6), None).is_ok());
        assert!(matches!(
            flow(e, a, FlowEvent::ThetaReached(6.7), None),
            Err(Error::Domain(_))
        ));
        // psi only touches psi_min from above: a rising crossing never
        // happens and the travel budget must fire.
        let r = flow(
            e,
            a,
            FlowEvent::PsiCrossing {
                target: e.psi_min(),
                direction: CrossingDirection::Rising,
            },
            None,
        );
        assert!(matches!(r, Err(Error::EventNotReached { .. })));
    }

    #[test]
    fn near_circle_period_approaches_sqrt2_pi() {
        let e = energy(1.0 + 1e-4);
        let n = special_point(e, SpecialPointLabel::N).unwrap();
        let start = PhasePoint::new(e, 0.5 * (n.psi + e.psi_max()), Branch::Right).unwrap();
        let out = flow(
            e,
            start,
            FlowEvent::PsiCrossing { target: start.psi, direction: CrossingDirection::Rising },
            None,
        )
        .unwrap();
        assert!((out.delta_theta - std::f64::consts::SQRT_2 * PI).abs() < 1e-2);
    }

    #[test]
    fn trace_respects_sampling_cap() {
        let e = energy(1.3);
        let a = special_point(e, SpecialPointLabel::A).unwrap();
        let out = flow(e, a, FlowEvent::ArcLengthReached(1.0), Some(0.01)).unwrap();
        assert!(out.trace.len() >= 100);
        for w in out.trace.windows(2) {
            assert!(w[1].s - w[0].s <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn off_trajectory_start_is_rejected() {
        let e = energy(1.3);
        let bogus = PhasePoint { psi: 1.0, branch: Branch::Left, r: 0.5, k: 0.5 };
        assert!(flow(e, bogus, FlowEvent::ArcLengthReached(1.0), None).is_err());
    }
}
