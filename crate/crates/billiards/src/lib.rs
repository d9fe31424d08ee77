//! Open billiards in the exterior of strictly convex obstacles in R^n.
//!
//! The crate simulates the billiard map between disjoint spheres and
//! ellipsoids, builds periodic orbits for a prescribed symbolic coding by
//! minimizing the total path length, propagates convex-front curvature
//! operators along trajectories, and estimates the largest Lyapunov exponent
//! from the per-bounce expansion factors. One-parameter scene deformations
//! allow numerical continuity and differentiability studies of the exponent.

pub mod dynamics;
pub mod error;
pub mod fronts;
pub mod geometry;
pub mod lyapunov;
pub mod orbits;
pub mod presets;
pub mod scene;

pub use error::{Error, Result};
pub use geometry::{DeformationFamily, DeformationRule, Matrix, Obstacle, RuleKind, Vector};
pub use scene::{EclipseReport, Scene, SceneBounds};

/// Shared numerical tolerances.
pub mod tol {
    /// Maximum signed distance for a point to count as on an obstacle boundary.
    pub const BOUNDARY: f64 = 1e-9;
    /// Unit-norm and orthogonality tolerance for vectors and frames.
    pub const UNIT: f64 = 1e-12;
    /// Collisions with |<v, nu>| below this are rejected as grazing.
    pub const GRAZING: f64 = 1e-10;
    /// Smallest admissible ray parameter for an intersection.
    pub const MIN_RAY_T: f64 = 1e-12;
    /// Window after a reflection inside which the current obstacle is ignored.
    pub const SELF_HIT: f64 = 1e-9;
    /// Two intersection parameters closer than this tie-break by obstacle index.
    pub const TIE_BREAK: f64 = 1e-12;
    /// Symmetry tolerance for curvature operators.
    pub const SYMMETRY: f64 = 1e-10;
    /// Default reflection-law residual target for the periodic orbit solver.
    pub const ORBIT_RESIDUAL: f64 = 1e-12;
}
