//! Polar-angle functionals of a trajectory.
//!
//! Along any counterclockwise arc the polar angle advances by
//! `delta_theta = delta_phi - delta_psi`, where `delta_phi` integrates the
//! curvature (evaluated in the curvature variable by
//! [`integrators::delta_phi_k`]) and `delta_psi` is the signed tangent-angle
//! change read off the endpoints. The named functionals are the arcs between
//! the distinguished points:
//!
//! ```text
//!     h1 = delta_theta(C -> D)      left branch through the curvature minimum
//!     h2 = delta_theta(D -> A)      lower sweep through the turn N
//!        = delta_theta(B -> C)      upper sweep through the turn M
//!     h3 = delta_theta(A -> B)      right branch through the curvature maximum
//!     T  = h1 + 2 h2 + h3           full period
//! ```
//!
//! together with the partial-arc variants used by network angle budgets:
//! `delta_theta_MN` (turn to turn), `delta_theta_NA`, `delta_theta_PA`
//! (radius-parametrized lower sweep into `A`), and the start-dependent
//! `h1°`/`h3°` pair for curves that begin between junction level and turning
//! point.
//!
//! Evaluation here is quadrature-only: these functions never invoke the ODE
//! flow, keeping the two engines independently checkable.

use crate::error::{Error, Result};
use crate::integrators::{delta_phi_k, integrate, EndpointSingularity, QuadratureSpec};
use crate::phase_plane::{
    invert_k, k_radial, special_point, turning_curvatures, Branch, Energy, PhasePoint,
    SpecialPointLabel,
};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_3, PI};

/// The three arc angles and the period of one trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HTriple {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub t: f64,
}

/// A counterclockwise arc between two points of the same trajectory.
#[derive(Debug, Clone, Copy)]
pub struct ArcSpec {
    pub from: PhasePoint,
    pub to: PhasePoint,
}

/// Cyclic trajectory coordinate in `[0, 2)`: 0 at the lower turn `N`, 0.5 at
/// the curvature maximum, 1 at the upper turn `M`, 1.5 at the curvature
/// minimum. Well defined at the turns regardless of their branch tag.
fn cyclic_tau(e: Energy, p: &PhasePoint) -> f64 {
    let span = e.psi_max() - e.psi_min();
    let frac = ((p.psi - e.psi_min()) / span).clamp(0.0, 1.0);
    let tau = match p.branch {
        Branch::Right => frac,
        Branch::Left => 2.0 - frac,
    };
    if tau >= 2.0 {
        tau - 2.0
    } else {
        tau
    }
}

/// Tangent angle at cyclic coordinate `tau`.
fn psi_of_tau(e: Energy, tau: f64) -> f64 {
    let span = e.psi_max() - e.psi_min();
    let frac = if tau <= 1.0 { tau } else { 2.0 - tau };
    e.psi_min() + frac * span
}

/// Curvature at cyclic coordinate `tau`.
fn k_of_tau(e: Energy, tau: f64) -> Result<f64> {
    let psi = psi_of_tau(e, tau);
    let branch = if tau <= 1.0 { Branch::Right } else { Branch::Left };
    let r = invert_k((e.c() * psi.sin()).max(1.0), branch)?;
    Ok(r * psi.sin())
}

fn check_on_trajectory(e: Energy, p: &PhasePoint) -> Result<()> {
    let res = (k_radial(p.r)? - e.c() * p.psi.sin()).abs() / e.c();
    if res > 1e-8 {
        return Err(Error::Domain(format!(
            "point (R = {}, psi = {}) is not on the trajectory c = {} (residual {res})",
            p.r,
            p.psi,
            e.c()
        )));
    }
    Ok(())
}

/// Polar-angle advance along the counterclockwise arc `spec.from ->
/// spec.to`. An empty arc (`from == to` in phase coordinates) yields 0; the
/// result always lies in `[0, T)`.
pub fn delta_theta(e: Energy, spec: &ArcSpec) -> Result<f64> {
    delta_theta_with(e, spec, &QuadratureSpec::default())
}

/// [`delta_theta`] with an explicit quadrature request.
pub fn delta_theta_with(e: Energy, spec: &ArcSpec, quad: &QuadratureSpec) -> Result<f64> {
    check_on_trajectory(e, &spec.from)?;
    check_on_trajectory(e, &spec.to)?;
    let tau_a = cyclic_tau(e, &spec.from);
    let tau_b = cyclic_tau(e, &spec.to);
    let mut span = tau_b - tau_a;
    if span < 0.0 {
        span += 2.0;
    }
    if span == 0.0 {
        return Ok(0.0);
    }
    // Split the unwrapped interval at the quarter marks (turns and turning
    // curvatures); each piece has monotone curvature and known endpoints.
    let mut total = 0.0;
    let mut cursor = tau_a;
    let end = tau_a + span;
    while cursor < end - 1e-15 {
        let next_quarter = (cursor / 0.5).floor() * 0.5 + 0.5;
        let stop = next_quarter.min(end);
        let (lo, hi) = (wrap2(cursor), wrap2_end(stop));
        let k_lo = k_of_tau(e, lo)?;
        let k_hi = k_of_tau(e, hi)?;
        let dphi = delta_phi_k(e, k_lo.min(k_hi), k_lo.max(k_hi), quad)?;
        let dpsi = psi_of_tau(e, hi) - psi_of_tau(e, lo);
        total += dphi - dpsi;
        cursor = stop;
    }
    Ok(total)
}

fn wrap2(tau: f64) -> f64 {
    if tau >= 2.0 {
        tau - 2.0
    } else {
        tau
    }
}

/// Like [`wrap2`] but keeps an exact 2.0 at 2.0 (interval right endpoint).
fn wrap2_end(tau: f64) -> f64 {
    if tau > 2.0 {
        tau - 2.0
    } else {
        tau
    }
}

/// Junction-level curvatures `(k_D, k_A)`: the curvature at the left and
/// right junction points. Requires `c >= 2/sqrt(3)`.
fn junction_curvatures(e: Energy) -> Result<(f64, f64)> {
    let d = special_point(e, SpecialPointLabel::D)?;
    let a = special_point(e, SpecialPointLabel::A)?;
    Ok((d.k, a.k))
}

/// The three arc angles and the period. Requires `c >= 2/sqrt(3)`.
pub fn h_triple(e: Energy) -> Result<HTriple> {
    h_triple_with(e, &QuadratureSpec::default())
}

/// [`h_triple`] with an explicit quadrature request.
pub fn h_triple_with(e: Energy, quad: &QuadratureSpec) -> Result<HTriple> {
    let (kmin, kmax) = turning_curvatures(e)?;
    let (k_d, k_a) = junction_curvatures(e)?;
    let h1 = 2.0 * delta_phi_k(e, kmin, k_d, quad)? + FRAC_PI_3;
    let h2 = delta_phi_k(e, k_d, k_a, quad)?;
    let h3 = 2.0 * delta_phi_k(e, k_a, kmax, quad)? - FRAC_PI_3;
    Ok(HTriple { h1, h2, h3, t: h1 + 2.0 * h2 + h3 })
}

/// Polar-angle advance from the upper turn `M` to the lower turn `N` (the
/// whole left sweep). Defined for every `c > 1`.
pub fn delta_theta_mn(e: Energy) -> Result<f64> {
    delta_theta_mn_with(e, &QuadratureSpec::default())
}

pub fn delta_theta_mn_with(e: Energy, quad: &QuadratureSpec) -> Result<f64> {
    let (kmin, _) = turning_curvatures(e)?;
    let k_turn = 1.0 / e.c();
    let dphi = 2.0 * delta_phi_k(e, kmin, k_turn, quad)?;
    Ok(dphi + PI - 2.0 * e.psi_min())
}

/// Full polar-angle period of the trajectory loop. Agrees with
/// [`HTriple::t`] when the junction stations exist, but stays defined for
/// every `c > 1`: the tangent angle is periodic, so the period is the full
/// curvature sweep `2 delta_phi(k_min -> k_max)` with no endpoint terms.
pub fn t_period(e: Energy) -> Result<f64> {
    t_period_with(e, &QuadratureSpec::default())
}

pub fn t_period_with(e: Energy, quad: &QuadratureSpec) -> Result<f64> {
    let (kmin, kmax) = turning_curvatures(e)?;
    Ok(2.0 * delta_phi_k(e, kmin, kmax, quad)?)
}

/// Polar-angle advance from the lower turn `N` to the junction point `A`.
/// Vanishes at `c = 2/sqrt(3)`, where `A` and `N` coincide.
pub fn delta_theta_na(e: Energy) -> Result<f64> {
    delta_theta_na_with(e, &QuadratureSpec::default())
}

pub fn delta_theta_na_with(e: Energy, quad: &QuadratureSpec) -> Result<f64> {
    let (_, k_a) = junction_curvatures(e)?;
    let k_turn = 1.0 / e.c();
    let dphi = delta_phi_k(e, k_turn.min(k_a), k_a.max(k_turn), quad)?;
    Ok(dphi + e.psi_min() - FRAC_PI_3)
}

/// Polar-angle advance from the lower-sweep point at radius `r0` to the
/// junction point `A`, evaluated in the radius variable:
///
/// ```text
///     integral over [r0, R_A] of  K(R) dR / (R sqrt(c^2 - K(R)^2))
/// ```
///
/// The start point is `P(r0) = (r0, asin(K(r0)/c))` on the lower half;
/// radius is strictly increasing along the whole sweep, which carries the
/// integral across the turn `N` without decomposition. Requires `r0 <= 1`
/// and `r0` strictly above the trajectory's minimum radius `R^-(c)`, where
/// the integrand's square root vanishes.
pub fn delta_theta_pa(e: Energy, r0: f64) -> Result<f64> {
    delta_theta_pa_with(e, r0, &QuadratureSpec::default())
}

pub fn delta_theta_pa_with(e: Energy, r0: f64, quad: &QuadratureSpec) -> Result<f64> {
    let c = e.c();
    if !(r0 > 0.0 && r0 <= 1.0) {
        return Err(Error::Domain(format!("delta_theta_pa requires 0 < r0 <= 1, got {r0}")));
    }
    let r_lo = invert_k(c, Branch::Left)?;
    if r0 <= r_lo {
        return Err(Error::Domain(format!(
            "r0 = {r0} at or below the trajectory minimum radius {r_lo} for c = {c}"
        )));
    }
    let a = special_point(e, SpecialPointLabel::A)?;
    let density = |r: f64| -> Result<f64> {
        let kr = k_radial(r)?;
        let disc = (c - kr) * (c + kr);
        if disc <= 0.0 {
            return Err(Error::Domain(format!(
                "radius {r} reached the turning circle of c = {c}"
            )));
        }
        Ok(kr / (r * disc.sqrt()))
    };
    // The density blows up like an inverse square root if r0 sits near the
    // minimum radius; tanh-sinh absorbs that without case analysis.
    let spec = QuadratureSpec { singularity: EndpointSingularity::SqrtLeft, ..*quad };
    let q = integrate(density, r0, a.r, &spec)?;
    Ok(q.value)
}

/// Start-dependent partial angles for curves that begin at tangent angle
/// `psi_s ∈ [pi/3, pi/2]` (between junction level and turning point):
///
/// - `h1°`: advance from the left-branch start down to `D`;
/// - `h3°`: advance from the right-branch start at the same `psi_s` up to
///   `B`.
///
/// The start is identified by a radius on either lower arc; both partial
/// angles for its `psi` level are returned. Errors when the radius does not
/// lie on the `C->D` or `A->B` lower portions.
pub fn h_circ(e: Energy, r_start: f64) -> Result<(f64, f64)> {
    h_circ_with(e, r_start, &QuadratureSpec::default())
}

pub fn h_circ_with(e: Energy, r_start: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let c = e.c();
    let kr = k_radial(r_start)?;
    let level = 3f64.sqrt() * c / 2.0;
    // K decreases toward 1 along both lower arcs' radius ranges; psi_s in
    // [pi/3, pi/2] means K(r_start) in [sqrt(3) c / 2, c].
    if kr > c * (1.0 + 1e-12) || kr < level * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "start radius {r_start} has K = {kr}, outside the junction-to-turn band [{level}, {c}] \
             (not on the lower C->D or A->B arcs)"
        )));
    }
    let psi_s = (kr / c).min(1.0).asin();
    let (_, kmax) = turning_curvatures(e)?;
    let (k_d, k_a) = junction_curvatures(e)?;
    let sl = invert_k(kr.max(1.0), Branch::Left)?;
    let sr = invert_k(kr.max(1.0), Branch::Right)?;
    let k_sl = sl * psi_s.sin();
    let k_sr = sr * psi_s.sin();

    // Left start -> D: curvature rises from k(S) to k_D below the turn.
    let h1c = delta_phi_k(e, k_sl.min(k_d), k_d.max(k_sl), quad)? + (psi_s - FRAC_PI_3);
    // Right start -> B: through the curvature maximum and back to the
    // junction level.
    let h3c = delta_phi_k(e, k_sr.min(kmax), kmax, quad)?
        + delta_phi_k(e, k_a, kmax, quad)?
        - (2.0 * FRAC_PI_3 - psi_s);
    Ok((h1c, h3c))
}

/// Memoizing evaluation context for the `h` functions. Root solvers and
/// grid sweeps hit the same energies repeatedly; the cache is keyed by the
/// bit pattern of `c` and is deliberately not shareable across threads
/// (each context owns its map).
pub struct HCache {
    quad: QuadratureSpec,
    map: RefCell<HashMap<u64, HTriple>>,
}

impl HCache {
    pub fn new(quad: QuadratureSpec) -> Self {
        HCache { quad, map: RefCell::new(HashMap::new()) }
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn h_triple(&self, e: Energy) -> Result<HTriple> {
        let key = e.c().to_bits();
        if let Some(hit) = self.map.borrow().get(&key) {
            return Ok(*hit);
        }
        let h = h_triple_with(e, &self.quad)?;
        self.map.borrow_mut().insert(key, h);
        Ok(h)
    }
}

impl Default for HCache {
    fn default() -> Self {
        HCache::new(QuadratureSpec::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{C_BAR, C_STAR};

    fn energy(c: f64) -> Energy {
        Energy::from_c(c).unwrap()
    }

    fn sp(e: Energy, l: SpecialPointLabel) -> PhasePoint {
        special_point(e, l).unwrap()
    }

    #[test]
    fn arc_names_match_their_delta_theta() {
        let e = energy(1.19);
        let h = h_triple(e).unwrap();
        let a = sp(e, SpecialPointLabel::A);
        let b = sp(e, SpecialPointLabel::B);
        let c = sp(e, SpecialPointLabel::C);
        let d = sp(e, SpecialPointLabel::D);
        let h1 = delta_theta(e, &ArcSpec { from: c, to: d }).unwrap();
        let h2_low = delta_theta(e, &ArcSpec { from: d, to: a }).unwrap();
        let h2_high = delta_theta(e, &ArcSpec { from: b, to: c }).unwrap();
        let h3 = delta_theta(e, &ArcSpec { from: a, to: b }).unwrap();
        assert!((h1 - h.h1).abs() < 1e-10);
        assert!((h2_low - h.h2).abs() < 1e-10);
        assert!((h2_high - h.h2).abs() < 1e-10);
        assert!((h3 - h.h3).abs() < 1e-10);
    }

    #[test]
    fn period_decomposes_through_the_turns() {
        let e = energy(1.3);
        let h = h_triple(e).unwrap();
        let m = sp(e, SpecialPointLabel::M);
        let n = sp(e, SpecialPointLabel::N);
        let upper = delta_theta(e, &ArcSpec { from: n, to: m }).unwrap();
        let lower = delta_theta(e, &ArcSpec { from: m, to: n }).unwrap();
        assert!((upper + lower - h.t).abs() < 1e-10);
        assert!((lower - delta_theta_mn(e).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn empty_arc_vanishes() {
        let e = energy(1.3);
        let a = sp(e, SpecialPointLabel::A);
        assert_eq!(delta_theta(e, &ArcSpec { from: a, to: a }).unwrap(), 0.0);
    }

    #[test]
    fn junction_window_collapses_at_threshold() {
        // Both windows shrink like sqrt(c - threshold) ~ 3e-5 here.
        let e = energy(C_STAR + 1e-9);
        let h = h_triple(e).unwrap();
        assert!(h.h2.abs() < 1e-3);
        assert!(delta_theta_na(e).unwrap().abs() < 1e-3);
    }

    #[test]
    fn period_window_and_ordering() {
        for c in [C_STAR + 1e-6, 1.16, C_BAR, 1.3, 2.0, 5.0] {
            let e = energy(c);
            let h = h_triple(e).unwrap();
            assert!(h.h1 > h.h3 && h.h3 > 0.0, "ordering failed at c = {c}");
            assert!(h.t > PI && h.t < std::f64::consts::SQRT_2 * PI, "period window at c = {c}");
            let (kmin, kmax) = turning_curvatures(e).unwrap();
            let direct = 2.0 * delta_phi_k(e, kmin, kmax, &QuadratureSpec::default()).unwrap();
            assert!((h.t - direct).abs() < 1e-9, "period consistency at c = {c}");
        }
    }

    #[test]
    fn radius_form_meets_the_turn_form_at_unit_radius() {
        for c in [1.16, 1.165, C_BAR] {
            let e = energy(c);
            let via_radius = delta_theta_pa(e, 1.0).unwrap();
            let via_turn = delta_theta_na(e).unwrap();
            assert!(
                (via_radius - via_turn).abs() < 1e-9,
                "c = {c}: {via_radius} vs {via_turn}"
            );
        }
    }

    #[test]
    fn radius_form_domain() {
        let e = energy(1.2);
        let rmin = invert_k(e.c(), Branch::Left).unwrap();
        assert!(delta_theta_pa(e, rmin - 1e-6).is_err());
        assert!(delta_theta_pa(e, 0.0).is_err());
        assert!(delta_theta_pa(e, 1.2).is_err());
        assert!(delta_theta_pa(e, rmin + 1e-4).is_ok());
    }

    #[test]
    fn partial_angles_hit_their_extremes() {
        let e = energy(1.2);
        let h = h_triple(e).unwrap();
        let d = sp(e, SpecialPointLabel::D);
        // Start exactly at the junction level: h1 part empty, h3 part full.
        let (h1c, h3c) = h_circ(e, d.r).unwrap();
        assert!(h1c.abs() < 1e-10);
        assert!((h3c - h.h3).abs() < 1e-10);
        // Start at the turning point: half of the h1 dip.
        let (kmin, _) = turning_curvatures(e).unwrap();
        let (h1c, h3c) = h_circ(e, kmin).unwrap();
        assert!((h1c - h.h1 / 2.0).abs() < 1e-10);
        assert!(h3c > 0.0 && h3c < h.h3);
    }

    #[test]
    fn partial_angles_reject_radii_off_the_lower_arcs() {
        let e = energy(1.2);
        // Radius below the curvature minimum: outside every arc.
        assert!(h_circ(e, 0.1).is_err());
        // Unit radius is past the junction band only when K(1) < level.
        assert!(h_circ(e, 1.0).is_err());
    }

    #[test]
    fn cache_returns_identical_values() {
        let cache = HCache::default();
        let e = energy(1.18);
        let a = cache.h_triple(e).unwrap();
        let b = cache.h_triple(e).unwrap();
        assert_eq!(a.h1.to_bits(), b.h1.to_bits());
        assert_eq!(a.t.to_bits(), b.t.to_bits());
    }

    #[test]
    fn mixed_start_angles_exceed_the_closed_arc() {
        // h1° + h3° at any admissible start level dominates h3 itself.
        let e = energy(1.16);
        let d = sp(e, SpecialPointLabel::D);
        let h = h_triple(e).unwrap();
        for f in [0.05, 0.3, 0.7, 0.95] {
            let (kmin, _) = turning_curvatures(e).unwrap();
            let r = kmin + f * (d.r - kmin);
            let (h1c, h3c) = h_circ(e, r).unwrap();
            assert!(h1c + h3c > h.h3, "failed at fraction {f}");
        }
    }
}
