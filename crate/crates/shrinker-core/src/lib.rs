//! Phase-plane analysis of self-similarly shrinking planar networks with two
//! closed regions.
//!
//! A homothetically shrinking network is a union of curves satisfying
//! `k + <x, N> = 0` that meet in triple junctions at 2π/3 angles. Each smooth
//! piece is a curve whose trace in the `(R, ψ)` phase plane (distance to the
//! origin vs. angle from position vector to tangent) is a closed trajectory
//! determined by one conserved quantity, the energy `c`. This crate provides:
//!
//! - [`phase_plane`]: closed-form primitives of that phase plane (the
//!   conservation function `K`, the curvature potential `V`, branch inverses,
//!   turning curvatures, distinguished trajectory points).
//! - [`integrators`]: two independent evaluation engines for trajectory
//!   functionals: singularity-aware quadrature and an ODE flow with event
//!   detection. Their agreement is the core correctness property here.
//! - [`angle_functions`]: the named polar-angle functionals (`h1`, `h2`,
//!   `h3`, `T`, partial-arc variants) built on the quadrature engine.
//! - [`shrinker_catalog`]: topology enumeration, closure equations, root
//!   solving, and the catalog of all two-region networks: the Cisgeminate
//!   eye plus six degenerate networks.
//! - [`geometry`]: physical curve reconstruction, network assembly (junctions,
//!   radial rays, symmetry copies), and SVG/JSON export.
//! - [`report_verify`]: reproduction of the numeric bound tables consumed by
//!   the classification, as a machine-readable report.

pub mod angle_functions;
pub mod error;
pub mod geometry;
pub mod integrators;
pub mod phase_plane;
pub mod report_verify;
pub mod roots;
pub mod shrinker_catalog;
pub mod tolerances;

pub use angle_functions::{ArcSpec, HCache, HTriple};
pub use error::{Error, Result};
pub use geometry::{
    assemble_network, closed_regions, export, export_json, export_svg, hausdorff_distance,
    network_from_json, outer_boundary_is_star_shaped, reconstruct_arc, reflect_across_x,
    reflect_through_origin, ExportFormat, Junction, NetworkGeometry, Polyline, Ray,
    SampleAnnotation, SvgOptions, DEFAULT_MAX_DS, NET_SCHEMA,
};
pub use integrators::{
    delta_theta_flow, h_triple_flow, t_period_flow, FlowEvent, FlowState, QuadratureSpec,
    TurnLabel,
};
pub use phase_plane::{Branch, Energy, PhasePoint, SpecialPointLabel};
pub use report_verify::{
    bound_l, bound_r, f_psi0, run_verification, verify_tables, BoundRow, Relation,
    VerificationReport, VerificationSummary,
};
pub use shrinker_catalog::{
    build_catalog, check_exclusions, enumerate_paths, solve_closure, ClosureEquation, ClosureRoot,
    ExclusionReport, GridSpec, HCombo, ShrinkerSolution, TrajectoryPath,
};
