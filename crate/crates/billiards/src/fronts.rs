//! Convex-front curvature propagation along a trajectory.
//!
//! A front is described in the hyperplane orthogonal to the current velocity
//! by a symmetric positive semi-definite curvature operator K and a tracked
//! unit direction w. Free flight over distance d shrinks the operator to
//! K (I + d K)^{-1}; a collision conjugates by the projection between the
//! incoming and outgoing hyperplanes and adds the boundary kick
//! 2 cos(phi) V* N V. The tracked direction stretches by |w + d K w| per
//! flight, which is the per-bounce expansion factor 1 + d ell.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{mirror, orthonormal_complement, Matrix, Vector};
use crate::scene::Scene;
use crate::tol;

/// Front state just after a reflection: an orthonormal frame of the
/// hyperplane orthogonal to the outgoing velocity, the curvature operator in
/// that frame, and the tracked unit direction in frame coordinates.
#[derive(Debug, Clone)]
pub struct FrontState {
    pub frame: Matrix,
    pub k: Matrix,
    pub w_hat: Vector,
}

/// Front state carried through a free flight, still expressed in the frame
/// of the departure hyperplane.
#[derive(Debug, Clone)]
pub struct FlownFront {
    pub frame: Matrix,
    pub k_minus: Matrix,
    /// Unnormalized transported direction w + d K w (frame coordinates).
    pub w_flown: Vector,
    /// |w + d K w| = 1 + d ell, recorded before the collision renormalizes.
    pub factor: f64,
}

/// Everything a collision update needs at the reflection point.
#[derive(Debug, Clone)]
pub struct CollisionData {
    pub nu: Vector,
    pub v_in: Vector,
    pub v_out: Vector,
    pub cos_phi: f64,
    pub shape: Matrix,
    pub shape_frame: Matrix,
}

impl CollisionData {
    pub fn at(scene: &Scene, obstacle: usize, q: &Vector, v_in: &Vector) -> Result<Self> {
        let nu = scene.obstacles[obstacle].outward_normal(q)?;
        let v_out = crate::dynamics::reflect(v_in, &nu)?;
        let cos_phi = nu.dot(&v_out);
        let (shape, shape_frame) = scene.obstacles[obstacle].shape_operator(q)?;
        Ok(CollisionData { nu, v_in: v_in.clone(), v_out, cos_phi, shape, shape_frame })
    }
}

/// Projection parallel to `along` onto the hyperplane orthogonal to `perp`.
/// Used for all four transfer operators between the incoming hyperplane, the
/// outgoing hyperplane, and the boundary tangent space.
pub fn project_along(w: &Vector, along: &Vector, perp: &Vector) -> Vector {
    w - along * (w.dot(perp) / along.dot(perp))
}

impl FrontState {
    /// Flat initial front (K = 0, a parallel beam) orthogonal to `v`, with
    /// the tracked direction seeded from an ambient vector.
    pub fn flat(v: &Vector, w_seed: &Vector) -> Result<Self> {
        let n = v.len();
        if (v.norm() - 1.0).abs() > tol::UNIT {
            return Err(Error::domain("front velocity must be a unit vector"));
        }
        let frame = orthonormal_complement(v);
        let mut w = frame.transpose() * (w_seed - v * w_seed.dot(v));
        if w.norm() < 1e-10 {
            w = Vector::zeros(n - 1);
            w[0] = 1.0;
        }
        let w_hat = w.normalize();
        Ok(FrontState { frame, k: Matrix::zeros(n - 1, n - 1), w_hat })
    }

    /// Curvature of the front in the tracked direction, <K w, w>.
    pub fn directional_curvature(&self) -> f64 {
        (&self.k * &self.w_hat).dot(&self.w_hat)
    }

    /// Carry the front through a free flight of length d >= 0.
    pub fn fly(&self, d: f64) -> Result<FlownFront> {
        let k_minus = free_flight(&self.k, d)?;
        let w_flown = &self.w_hat + &self.k * &self.w_hat * d;
        let factor = w_flown.norm();
        Ok(FlownFront { frame: self.frame.clone(), k_minus, w_flown, factor })
    }
}

/// Free-flight curvature update K (I + d K)^{-1}, computed without inverting
/// K so that flat fronts (zero eigenvalues) are exact. Eigenvalues map as
/// k -> k / (1 + d k).
pub fn free_flight(k: &Matrix, d: f64) -> Result<Matrix> {
    if d < 0.0 {
        return Err(Error::domain("flight length must be nonnegative"));
    }
    let m = k.nrows();
    if (k - k.transpose()).amax() > tol::SYMMETRY {
        return Err(Error::domain("curvature operator must be symmetric"));
    }
    let a = Matrix::identity(m, m) + k * d;
    // I + dK is positive definite for K >= 0, d >= 0
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::internal("I + dK not positive definite in free flight"))?;
    let mut result = chol.solve(k);
    let rt = result.transpose();
    result = (result + rt) * 0.5;
    Ok(result)
}

/// Per-bounce expansion data: |w + d K w| along with ell and delta.
pub fn expansion_factor(front: &FrontState, d: f64) -> Result<(f64, f64, f64)> {
    if d <= 0.0 {
        return Err(Error::domain("expansion factor needs a positive flight length"));
    }
    let kw = &front.k * &front.w_hat;
    let factor = (&front.w_hat + &kw * d).norm();
    // same quantity through the expanded square, as a consistency guard
    let k_hat = kw.dot(&front.w_hat);
    let expanded = (1.0 + 2.0 * d * k_hat + d * d * kw.norm_squared()).sqrt();
    if (factor - expanded).abs() > 1e-12 * factor.max(1.0) {
        return Err(Error::internal(format!(
            "expansion factor mismatch: {factor} vs {expanded}"
        )));
    }
    let ell = (factor - 1.0) / d;
    Ok((factor, ell, 1.0 / factor))
}

/// Collision update: conjugate the flown operator across the reflection and
/// add the boundary kick, on a fresh orthonormal frame of the outgoing
/// hyperplane. Also transports the tracked direction.
pub fn collision_update(flown: &FlownFront, data: &CollisionData) -> Result<FrontState> {
    if data.cos_phi <= tol::GRAZING {
        return Err(Error::Grazing { bounce: 0, dot: data.cos_phi });
    }
    let n = data.nu.len();
    // New frame: mirror images of the old frame span the outgoing
    // hyperplane; re-orthonormalize to kill rounding drift.
    let mut new_frame = Matrix::zeros(n, n - 1);
    for j in 0..n - 1 {
        let mut col = mirror(&flown.frame.column(j).into_owned(), &data.nu);
        col -= &data.v_out * col.dot(&data.v_out);
        for i in 0..j {
            let prev = new_frame.column(i).into_owned();
            col -= &prev * col.dot(&prev);
        }
        let norm = col.norm();
        if norm < 1e-8 {
            return Err(Error::internal("degenerate frame after collision"));
        }
        new_frame.set_column(j, &(col / norm));
    }

    let apply_k_minus = |w: &Vector| -> Vector {
        &flown.frame * (&flown.k_minus * (flown.frame.transpose() * w))
    };
    let apply_shape = |w: &Vector| -> Vector {
        &data.shape_frame * (&data.shape * (data.shape_frame.transpose() * w))
    };

    let mut k_new = Matrix::zeros(n - 1, n - 1);
    for j in 0..n - 1 {
        let e = new_frame.column(j).into_owned();
        // into the incoming hyperplane, through the flown operator, and back
        let into_minus = project_along(&e, &data.nu, &data.v_in);
        let conjugated = project_along(&apply_k_minus(&into_minus), &data.nu, &data.v_out);
        // boundary kick 2 cos(phi) V* N V
        let tangent = project_along(&e, &data.v_out, &data.nu);
        let kicked = project_along(&apply_shape(&tangent), &data.nu, &data.v_out);
        let total = conjugated + kicked * (2.0 * data.cos_phi);
        k_new.set_column(j, &(new_frame.transpose() * total));
    }
    let defect = (&k_new - k_new.transpose()).amax();
    if defect > tol::SYMMETRY {
        return Err(Error::internal(format!(
            "curvature operator lost symmetry at a collision (defect {defect:.3e})"
        )));
    }
    let kt = k_new.transpose();
    k_new = (k_new + kt) * 0.5;

    // Tracked direction: the flown vector crosses the collision by the same
    // parallel projection, then is renormalized.
    let w_ambient = &flown.frame * &flown.w_flown;
    let transported = project_along(&w_ambient, &data.nu, &data.v_out);
    let w_hat = (new_frame.transpose() * transported).normalize();

    Ok(FrontState { frame: new_frame, k: k_new, w_hat })
}

/// Per-flight output of the front propagation.
#[derive(Debug, Clone)]
pub struct BounceExpansion {
    /// Flight index: flight j leaves reflection j. Flight 0 leaves the flat
    /// initial front, so the Lyapunov sum starts at flight 1.
    pub flight: usize,
    pub obstacle: usize,
    pub d: f64,
    pub cos_phi: f64,
    pub ell: f64,
    pub factor: f64,
}

/// Drives a front along a trajectory's records, yielding one expansion per
/// flight and keeping the post-collision front inspectable.
pub struct FrontTrack<'a> {
    scene: &'a Scene,
    traj: &'a Trajectory,
    front: FrontState,
    next_flight: usize,
}

impl<'a> FrontTrack<'a> {
    pub fn new(scene: &'a Scene, traj: &'a Trajectory, w_seed: &Vector) -> Result<Self> {
        let first = traj
            .records
            .first()
            .ok_or_else(|| Error::domain("cannot propagate a front along an empty trajectory"))?;
        let front = FrontState::flat(&first.v, w_seed)?;
        Ok(FrontTrack { scene, traj, front, next_flight: 0 })
    }

    pub fn front(&self) -> &FrontState {
        &self.front
    }

    /// Advance one flight (and the collision that ends it, when the
    /// trajectory continues). Returns `None` once the records are exhausted.
    pub fn advance(&mut self) -> Result<Option<BounceExpansion>> {
        let j = self.next_flight;
        if j >= self.traj.records.len() {
            return Ok(None);
        }
        let rec = &self.traj.records[j];
        let flown = self.front.fly(rec.d)?;
        let expansion = BounceExpansion {
            flight: j,
            obstacle: rec.obstacle,
            d: rec.d,
            cos_phi: rec.cos_phi,
            ell: (flown.factor - 1.0) / rec.d,
            factor: flown.factor,
        };
        if let Some(next) = self.traj.records.get(j + 1) {
            let data = CollisionData {
                nu: next.nu.clone(),
                v_in: rec.v.clone(),
                v_out: next.v.clone(),
                cos_phi: next.cos_phi,
                shape: self.scene.obstacles[next.obstacle].shape_operator(&next.q)?.0,
                shape_frame: self.scene.obstacles[next.obstacle].shape_operator(&next.q)?.1,
            };
            self.front = collision_update(&flown, &data)?;
        }
        self.next_flight += 1;
        Ok(Some(expansion))
    }
}
