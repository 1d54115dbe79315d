//! Centralized numeric budgets.
//!
//! Every tolerance that gates a result lives here so that the relationships
//! between them stay visible: quadrature must beat the engine-agreement
//! budget, the flow must beat the conservation budget, root residuals must
//! beat the catalog acceptance budget, and so on.

/// Default absolute quadrature tolerance. Two decades tighter than the
/// engine-agreement budget so that quadrature error never dominates it.
pub const QUAD_ABS: f64 = 1e-11;

/// Default maximum refinement depth for adaptive quadrature (interval
/// bisection levels or tanh-sinh level doublings).
pub const QUAD_MAX_DEPTH: u32 = 14;

/// Relative accuracy of the branch inverses of `K`: `K(invert_k(x)) = x`
/// to this relative error.
pub const INVERT_K_REL: f64 = 1e-13;

/// Relative error controller target for the ODE flow.
pub const FLOW_RTOL: f64 = 1e-12;

/// Absolute error controller floor for the ODE flow.
pub const FLOW_ATOL: f64 = 1e-14;

/// Flow events are located to this accuracy in arc length.
pub const EVENT_ARC_LENGTH: f64 = 1e-12;

/// Budget for `|K(R) - c sin(psi)| / c` along any accepted flow step.
pub const CONSERVATION_RESIDUAL: f64 = 1e-9;

/// Quadrature route and flow route must agree on any angle functional to
/// this absolute error.
pub const ENGINE_AGREEMENT: f64 = 1e-8;

/// `delta_theta = delta_phi - delta_psi` must hold along any flow to this
/// absolute error.
pub const THETA_IDENTITY: f64 = 1e-9;

/// A full phase-plane period must close in `(R, psi)` to this error.
pub const PERIOD_CLOSURE: f64 = 1e-9;

/// Closure-equation roots are polished until the residual is below this.
pub const ROOT_RESIDUAL: f64 = 1e-11;

/// Catalog entries re-verify their equation residual against this budget.
pub const CATALOG_RESIDUAL: f64 = 1e-9;

/// Numeric angle sum along an enumerated path must match its symbolic
/// coefficient combination to this absolute error.
pub const ANGLE_SUM_MATCH: f64 = 1e-10;

/// Unit tangent directions at a junction must be pairwise 2π/3 apart to
/// this absolute angle error.
pub const HERRING: f64 = 1e-6;

/// Rays must be radial: the cross product of direction and origin offset
/// stays below this.
pub const RAY_RADIAL: f64 = 1e-8;

/// Curve endpoints participating in one junction must coincide to this
/// distance.
pub const JUNCTION_MEET: f64 = 1e-7;

/// Pointwise shrinker residual `|k - R sin(psi)|` along sampled curves.
pub const SHRINKER_RESIDUAL: f64 = 1e-8;

/// Assembled networks whose symmetry copies miss by more than this raise a
/// closure error.
pub const NETWORK_CLOSURE: f64 = 1e-6;

/// Monotonicity scans allow this much slack before flagging a violation,
/// absorbing quadrature noise on near-flat differences.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Distinct catalog energies must differ by more than this.
pub const DISTINCT_ENERGY: f64 = 1e-6;

/// Energies this close to the circle value `c = 1` are rejected for arc
/// evaluation: the trajectory degenerates to a point in the phase plane.
pub const CIRCLE_GUARD: f64 = 1e-6;

/// Reproduced table cells that are multiples of π must agree with the
/// printed digits to 4 decimals (in units of π), unless the recomputation
/// is strictly tighter in the claimed direction.
pub const TABLE_PI_AGREEMENT: f64 = 5e-5;

/// Flow endpoint must land on the requested event manifold to this error.
pub const EVENT_RESIDUAL: f64 = 1e-9;

/// Accumulated polar sweep along an assembled curve must match the abstract
/// walk total to this error.
pub const TURNING_MATCH: f64 = 1e-8;

/// Sampled polylines keep adjacent tangent turning below half a degree.
pub const MAX_TURN_RAD: f64 = 0.5 * std::f64::consts::PI / 180.0;
