//! Numerical engines: singularity-aware quadrature and the phase-plane flow.
//!
//! Two fully independent routes compute every trajectory functional. The
//! quadrature route integrates closed-form densities in the curvature
//! variable; the flow route integrates the arc-length ODE system with event
//! detection. Nothing is shared between them past the phase-plane
//! primitives, so their agreement (enforced in tests to 1e-8) validates
//! both.

mod arc_eval;
mod flow;
mod gauss_kronrod;
mod tanh_sinh;

pub use arc_eval::{delta_theta_flow, h_triple_flow, t_period_flow};
pub use flow::{flow, CrossingDirection, FlowEvent, FlowOutcome, FlowState, TurnLabel};
pub(crate) use flow::{dopri5_run, Stop, THETA_BUDGET};

use crate::error::{Error, Result};
use crate::phase_plane::{turning_curvatures, v_potential, Energy};
use crate::tolerances;

/// Endpoint behavior of an integrand, used to pick the quadrature engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointSingularity {
    /// Smooth up to both endpoints.
    #[default]
    None,
    /// Inverse-square-root blowup at the lower endpoint.
    SqrtLeft,
    /// Inverse-square-root blowup at the upper endpoint.
    SqrtRight,
    /// Blowup at both endpoints.
    SqrtBoth,
}

/// Quadrature request: absolute tolerance, refinement depth budget, and the
/// declared endpoint behavior.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_depth: u32,
    pub singularity: EndpointSingularity,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: tolerances::QUAD_ABS,
            max_depth: tolerances::QUAD_MAX_DEPTH,
            singularity: EndpointSingularity::None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::Domain("quadrature max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Quadrature result: value, attained error bound, evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error_bound: f64,
    pub evaluations: u64,
}

/// Integrates `f` over `[a, b]` per `spec`.
///
/// Smooth integrands go to adaptive Gauss–Kronrod; declared endpoint
/// singularities go to tanh-sinh, whose double-exponential weight decay
/// absorbs them. A convergence failure returns the best estimate and its
/// bound inside the error.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    let (value, error_bound, evaluations) = match spec.singularity {
        EndpointSingularity::None => {
            gauss_kronrod::adaptive(f, a, b, spec.abs_tol, spec.max_depth)?
        }
        _ => tanh_sinh::integrate(f, a, b, spec.abs_tol, spec.max_depth)?,
    };
    Ok(Quadrature { value, error_bound, evaluations })
}

/// Tangent-angle change along the trajectory between curvatures `k1 <= k2`:
///
/// ```text
///     delta_phi = integral of dk / sqrt(eta - V(k))  over [k1, k2]
/// ```
///
/// The density has inverse-square-root singularities where the interval
/// touches the turning curvatures. Both are removed analytically by the
/// substitution `k = k_turn -+ u^2`, leaving smooth integrands:
///
/// ```text
///     left piece:   G(u) = (eta - V(k_min + u^2)) / u^2
///     right piece:  G(u) = (eta - V(k_max - u^2)) / u^2
/// ```
///
/// with a Taylor form next to `u = 0` where the direct quotient cancels.
///
/// Errors: `k1 > k2`, or the interval extending beyond the turning
/// curvatures (beyond a 1e-9 slack, which is clamped).
pub fn delta_phi_k(e: Energy, k1: f64, k2: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let (kmin_raw, kmax_raw) = turning_curvatures(e)?;
    let eta = e.eta();
    // Polish the turning curvatures on V(k) = eta so the substitution's
    // origin sits on the level set to machine accuracy.
    let polish = |mut k: f64| -> f64 {
        for _ in 0..2 {
            let v = k * k - 2.0 * k.ln();
            let dv = 2.0 * k - 2.0 / k;
            if dv != 0.0 {
                k -= (v - eta) / dv;
            }
        }
        k
    };
    let kmin = polish(kmin_raw);
    let kmax = polish(kmax_raw);

    if k1 > k2 + 1e-13 {
        return Err(Error::Domain(format!("delta_phi_k requires k1 <= k2, got {k1} > {k2}")));
    }
    let slack = 1e-9;
    if k1 < kmin - slack || k2 > kmax + slack {
        return Err(Error::Domain(format!(
            "curvature interval [{k1}, {k2}] leaves [{kmin}, {kmax}] for c = {}",
            e.c()
        )));
    }
    let k1 = k1.clamp(kmin, kmax);
    let k2 = k2.clamp(kmin, kmax);
    if k2 <= k1 {
        return Ok(0.0);
    }

    // Endpoints this close to a turning curvature are the turning point:
    // dk/ds vanishes there, so the curvature coordinate cannot resolve
    // offsets below roundoff, and an endpoint off by one ulp in k would
    // shift the integral by O(sqrt(ulp)) ~ 1e-8. Snapping pins `u = 0`.
    const TURNING_SNAP: f64 = 1e-11;

    let piece_spec = QuadratureSpec {
        abs_tol: 0.5 * spec.abs_tol,
        max_depth: spec.max_depth,
        singularity: EndpointSingularity::None,
    };
    let mut total = 0.0;

    // Left piece: [k1, min(k2, 1)] with k = kmin + u^2.
    if k1 < 1.0 {
        let hi = k2.min(1.0);
        let u_lo = if k1 - kmin <= TURNING_SNAP { 0.0 } else { (k1 - kmin).sqrt() };
        let u_hi = (hi - kmin).max(0.0).sqrt();
        let g = |u: f64| -> Result<f64> {
            let d = u * u;
            let g = if d < 1e-6 {
                2.0 * (1.0 / kmin - kmin)
                    - (1.0 + 1.0 / (kmin * kmin)) * d
                    + 2.0 / (3.0 * kmin * kmin * kmin) * d * d
            } else {
                let k = kmin + d;
                (eta - v_potential(k)?) / d
            };
            if g <= 0.0 {
                return Err(Error::Domain(format!(
                    "curvature density lost positivity at u = {u} (c = {})",
                    e.c()
                )));
            }
            Ok(2.0 / g.sqrt())
        };
        let q = integrate(g, u_lo, u_hi, &piece_spec)?;
        total += q.value;
    }

    // Right piece: [max(k1, 1), k2] with k = kmax - u^2 (u decreasing in k).
    if k2 > 1.0 {
        let lo = k1.max(1.0);
        let u_lo = if kmax - k2 <= TURNING_SNAP { 0.0 } else { (kmax - k2).sqrt() };
        let u_hi = (kmax - lo).max(0.0).sqrt();
        let g = |u: f64| -> Result<f64> {
            let d = u * u;
            let g = if d < 1e-6 {
                2.0 * (kmax - 1.0 / kmax)
                    - (1.0 + 1.0 / (kmax * kmax)) * d
                    - 2.0 / (3.0 * kmax * kmax * kmax) * d * d
            } else {
                let k = kmax - d;
                (eta - v_potential(k)?) / d
            };
            if g <= 0.0 {
                return Err(Error::Domain(format!(
                    "curvature density lost positivity at u = {u} (c = {})",
                    e.c()
                )));
            }
            Ok(2.0 / g.sqrt())
        };
        let q = integrate(g, u_lo, u_hi, &piece_spec)?;
        total += q.value;
    }

    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::{invert_k, Branch};
    use std::f64::consts::PI;

    #[test]
    fn dispatch_handles_the_reference_singular_integral() {
        let spec = QuadratureSpec {
            singularity: EndpointSingularity::SqrtLeft,
            ..Default::default()
        };
        let q = integrate(|x: f64| Ok(1.0 / x.sqrt()), 0.0, 1.0, &spec).unwrap();
        assert!((q.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn engines_agree_on_smooth_integrands() {
        let smooth = QuadratureSpec::default();
        let forced_ts = QuadratureSpec {
            singularity: EndpointSingularity::SqrtBoth,
            ..Default::default()
        };
        let a = integrate(|x: f64| Ok((3.0 * x).cos() * x.exp()), 0.0, 2.0, &smooth).unwrap();
        let b = integrate(|x: f64| Ok((3.0 * x).cos() * x.exp()), 0.0, 2.0, &forced_ts).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_spec() {
        let bad = QuadratureSpec { abs_tol: 0.0, ..Default::default() };
        assert!(integrate(|_| Ok(1.0), 0.0, 1.0, &bad).is_err());
        let bad_depth = QuadratureSpec { max_depth: 0, ..Default::default() };
        assert!(integrate(|_| Ok(1.0), 0.0, 1.0, &bad_depth).is_err());
    }

    #[test]
    fn delta_phi_spans_the_full_turning_interval() {
        // Over one full oscillation the tangent turns by T = delta_theta of a
        // period; half of it accumulates between the turning curvatures.
        let e = Energy::from_c(1.3).unwrap();
        let (kmin, kmax) = turning_curvatures(e).unwrap();
        let spec = QuadratureSpec::default();
        let half = delta_phi_k(e, kmin, kmax, &spec).unwrap();
        assert!(half > PI / 2.0 && half < std::f64::consts::SQRT_2 * PI / 2.0 + 0.2);
        // Additivity across an interior split point.
        let mid = 0.5 * (kmin + kmax);
        let a = delta_phi_k(e, kmin, mid, &spec).unwrap();
        let b = delta_phi_k(e, mid, kmax, &spec).unwrap();
        assert!((a + b - half).abs() < 1e-10);
    }

    #[test]
    fn delta_phi_domain_checks() {
        let e = Energy::from_c(1.3).unwrap();
        let (kmin, kmax) = turning_curvatures(e).unwrap();
        let spec = QuadratureSpec::default();
        assert_eq!(delta_phi_k(e, kmin, kmin, &spec).unwrap(), 0.0);
        assert!(delta_phi_k(e, kmin - 1e-3, 1.0, &spec).is_err());
        assert!(delta_phi_k(e, 1.0, kmax + 1e-3, &spec).is_err());
        assert!(delta_phi_k(e, 1.0, 0.9, &spec).is_err());
    }

    #[test]
    fn junction_arc_contribution_vanishes_at_high_energy() {
        // The tangent turn from the curvature minimum up to the lower-left
        // junction point shrinks to zero as c grows: the whole left dip
        // collapses against the junction level sqrt(3) c / 2.
        let e = Energy::from_c(100.0).unwrap();
        let (kmin, _) = turning_curvatures(e).unwrap();
        let level = 3f64.sqrt() * e.c() / 2.0;
        let k_d = 3f64.sqrt() / 2.0 * invert_k(level, Branch::Left).unwrap();
        let spec = QuadratureSpec::default();
        let v = delta_phi_k(e, kmin, k_d, &spec).unwrap();
        assert!(v >= 0.0 && v < 0.01, "got {v}");
    }
}

