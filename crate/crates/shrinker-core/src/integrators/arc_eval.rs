//! Flow-route evaluation of the walk functionals: the same counterclockwise
//! arcs as the quadrature route, computed by integrating the phase ODE to a
//! directed stop event. No curvature-potential integral is ever evaluated
//! here, so agreement with the quadrature numbers is a genuine cross-check.

use crate::angle_functions::{ArcSpec, HTriple};
use crate::error::{Error, Result};
use crate::integrators::flow::{flow, CrossingDirection, FlowEvent, TurnLabel};
use crate::phase_plane::{special_point, Branch, Energy, SpecialPointLabel};

// psi is rising exactly on the outer branch, so a (psi, branch) target is
// one directed crossing. The turns are tangential in psi and stop on the
// R = 1 crossing instead.
fn stop_event(e: Energy, to: &crate::phase_plane::PhasePoint) -> FlowEvent {
    if (to.psi - e.psi_max()).abs() < 1e-12 {
        FlowEvent::BranchTurn(TurnLabel::M)
    } else if (to.psi - e.psi_min()).abs() < 1e-12 {
        FlowEvent::BranchTurn(TurnLabel::N)
    } else {
        FlowEvent::PsiCrossing {
            target: to.psi,
            direction: match to.branch {
                Branch::Right => CrossingDirection::Rising,
                Branch::Left => CrossingDirection::Falling,
            },
        }
    }
}

/// Polar-angle advance along the arc `from -> to`, by ODE flow to the first
/// occurrence of the target point. Coincident endpoints are a zero arc, as
/// in the quadrature route.
pub fn delta_theta_flow(e: Energy, arc: &ArcSpec) -> Result<f64> {
    if arc.from.branch == arc.to.branch && (arc.from.psi - arc.to.psi).abs() < 1e-13 {
        return Ok(0.0);
    }
    let out = flow(e, arc.from, stop_event(e, &arc.to), None)?;
    if (out.end.r - arc.to.r).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "flow stopped at R = {} but the arc targets R = {}; endpoints disagree",
            out.end.r, arc.to.r
        )));
    }
    Ok(out.delta_theta)
}

/// The three junction-arc angles and the period, each from its own flow leg.
pub fn h_triple_flow(e: Energy) -> Result<HTriple> {
    let a = special_point(e, SpecialPointLabel::A)?;
    let b = special_point(e, SpecialPointLabel::B)?;
    let c = special_point(e, SpecialPointLabel::C)?;
    let d = special_point(e, SpecialPointLabel::D)?;
    let h1 = delta_theta_flow(e, &ArcSpec { from: c, to: d })?;
    let h2 = delta_theta_flow(e, &ArcSpec { from: d, to: a })?;
    let h3 = delta_theta_flow(e, &ArcSpec { from: a, to: b })?;
    Ok(HTriple {
        h1,
        h2,
        h3,
        t: h1 + 2.0 * h2 + h3,
    })
}

/// Full polar-angle period by flowing turn-to-turn twice; defined for every
/// `c > 1`, junctions or not.
pub fn t_period_flow(e: Energy) -> Result<f64> {
    let m = special_point(e, SpecialPointLabel::M)?;
    let n = special_point(e, SpecialPointLabel::N)?;
    let up = delta_theta_flow(e, &ArcSpec { from: n, to: m })?;
    let down = delta_theta_flow(e, &ArcSpec { from: m, to: n })?;
    Ok(up + down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle_functions::{delta_theta, h_triple, t_period};
    use crate::tolerances;

    #[test]
    fn both_engines_agree_on_the_junction_arcs() {
        for c in [1.2, 1.3, 2.0, 4.0] {
            let e = Energy::from_c(c).unwrap();
            let q = h_triple(e).unwrap();
            let f = h_triple_flow(e).unwrap();
            for (a, b) in [(q.h1, f.h1), (q.h2, f.h2), (q.h3, f.h3), (q.t, f.t)] {
                assert!(
                    (a - b).abs() < tolerances::ENGINE_AGREEMENT,
                    "c = {c}: quadrature {a} vs flow {b}"
                );
            }
        }
    }

    #[test]
    fn both_engines_agree_on_the_period_below_the_junction_window() {
        for c in [1.02, 1.1, crate::phase_plane::C_STAR - 1e-3] {
            let e = Energy::from_c(c).unwrap();
            let q = t_period(e).unwrap();
            let f = t_period_flow(e).unwrap();
            assert!(
                (q - f).abs() < tolerances::ENGINE_AGREEMENT,
                "c = {c}: quadrature {q} vs flow {f}"
            );
        }
    }

    #[test]
    fn zero_arcs_are_zero_and_station_walks_match() {
        let e = Energy::from_c(1.4).unwrap();
        let d = special_point(e, SpecialPointLabel::D).unwrap();
        assert_eq!(
            delta_theta_flow(e, &ArcSpec { from: d, to: d }).unwrap(),
            0.0
        );
        // A wrapped arc: B back around to C passes the upper turn.
        let b = special_point(e, SpecialPointLabel::B).unwrap();
        let c_pt = special_point(e, SpecialPointLabel::C).unwrap();
        let via_flow = delta_theta_flow(e, &ArcSpec { from: b, to: c_pt }).unwrap();
        let via_quad = delta_theta(e, &ArcSpec { from: b, to: c_pt }).unwrap();
        assert!((via_flow - via_quad).abs() < tolerances::ENGINE_AGREEMENT);
    }
}
