//! Periodic orbits for a prescribed symbolic coding, found by minimizing the
//! total path length over the obstacle boundaries: projected gradient descent
//! to enter the basin, then a Newton polish on the reflection residual.

use crate::dynamics::{PhaseState, Record, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{orthonormal_complement, Vector};
use crate::scene::Scene;
use crate::tol;

/// A periodic word of obstacle indices with no immediate repetitions,
/// including across the wrap-around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coding(Vec<usize>);

impl Coding {
    pub fn new(word: Vec<usize>) -> Result<Self> {
        if word.len() < 2 {
            return Err(Error::domain("a coding needs at least two symbols"));
        }
        for j in 0..word.len() {
            let next = word[(j + 1) % word.len()];
            if word[j] == next {
                return Err(Error::domain(format!(
                    "coding repeats obstacle {} at positions {j}, {}",
                    word[j],
                    (j + 1) % word.len()
                )));
            }
        }
        Ok(Coding(word))
    }

    pub fn period(&self) -> usize {
        self.0.len()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn symbol(&self, j: usize) -> usize {
        self.0[j % self.0.len()]
    }

    pub fn validate_for(&self, scene: &Scene) -> Result<()> {
        if let Some(&bad) = self.0.iter().find(|&&s| s >= scene.len()) {
            return Err(Error::domain(format!(
                "coding references obstacle {bad}, scene has {}",
                scene.len()
            )));
        }
        Ok(())
    }

    /// The same orbit read from a different starting symbol.
    pub fn rotated(&self, offset: usize) -> Coding {
        let p = self.0.len();
        Coding((0..p).map(|j| self.0[(j + offset) % p]).collect())
    }
}

/// Cyclic path length of boundary points following a coding, together with
/// the tangential gradient at each point. The gradient vanishes exactly when
/// the reflection law holds everywhere.
pub fn length_functional(
    scene: &Scene,
    coding: &Coding,
    points: &[Vector],
) -> Result<(f64, Vec<Vector>)> {
    coding.validate_for(scene)?;
    let p = coding.period();
    if points.len() != p {
        return Err(Error::domain("one boundary point per coding symbol required"));
    }
    let mut value = 0.0;
    let mut flights = Vec::with_capacity(p);
    for j in 0..p {
        let chord = &points[(j + 1) % p] - &points[j];
        let len = chord.norm();
        if len < 1e-12 {
            return Err(Error::domain("degenerate configuration: coincident points"));
        }
        value += len;
        flights.push(chord / len);
    }
    let mut gradients = Vec::with_capacity(p);
    for j in 0..p {
        let ambient = &flights[(j + p - 1) % p] - &flights[j];
        let nu = scene.obstacles[coding.symbol(j)].outward_normal(&points[j])?;
        gradients.push(&ambient - &nu * ambient.dot(&nu));
    }
    Ok((value, gradients))
}

/// A converged periodic orbit: one phase state per coding symbol, with the
/// final reflection residual.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub coding: Coding,
    pub points: Vec<Vector>,
    pub states: Vec<PhaseState>,
    pub residual: f64,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// Per-period flight lengths d_j = |q_{j+1} - q_j|.
    pub fn flight_lengths(&self) -> Vec<f64> {
        let p = self.period();
        (0..p).map(|j| (&self.points[(j + 1) % p] - &self.points[j]).norm()).collect()
    }

    /// Collision cosines <nu_j, v_j> at each orbit point.
    pub fn collision_cosines(&self, scene: &Scene) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| Ok(scene.obstacles[s.obstacle].outward_normal(&s.q)?.dot(&s.v)))
            .collect()
    }

    /// The orbit unrolled into an m-bounce trajectory. Periodicity makes the
    /// per-bounce data exact for any m, unlike iterating the map, whose
    /// rounding noise is amplified by the positive Lyapunov exponent.
    pub fn trajectory(&self, scene: &Scene, m: usize) -> Result<Trajectory> {
        let p = self.period();
        let lengths = self.flight_lengths();
        let mut period_records = Vec::with_capacity(p);
        for j in 0..p {
            let state = &self.states[j];
            let nu = scene.obstacles[state.obstacle].outward_normal(&state.q)?;
            let cos_phi = nu.dot(&state.v);
            if cos_phi <= tol::GRAZING {
                return Err(Error::Grazing { bounce: j, dot: cos_phi });
            }
            period_records.push(Record {
                obstacle: state.obstacle,
                q: state.q.clone(),
                v: state.v.clone(),
                nu,
                d: lengths[j],
                cos_phi,
            });
        }
        let records = (0..m).map(|j| period_records[j % p].clone()).collect();
        Ok(Trajectory { records, escaped: false, dim: scene.dim })
    }
}

/// Reflection residual: per point, the tangential part of the change of
/// flight direction; its maximum norm vanishes exactly on a billiard orbit.
fn residual_vectors(scene: &Scene, coding: &Coding, points: &[Vector]) -> Result<Vec<Vector>> {
    let p = coding.period();
    let mut flights = Vec::with_capacity(p);
    for j in 0..p {
        let chord = &points[(j + 1) % p] - &points[j];
        flights.push(chord.normalize());
    }
    let mut residuals = Vec::with_capacity(p);
    for j in 0..p {
        let change = &flights[j] - &flights[(j + p - 1) % p];
        let nu = scene.obstacles[coding.symbol(j)].outward_normal(&points[j])?;
        residuals.push(&change - &nu * change.dot(&nu));
    }
    Ok(residuals)
}

fn max_residual(scene: &Scene, coding: &Coding, points: &[Vector]) -> Result<f64> {
    Ok(residual_vectors(scene, coding, points)?
        .iter()
        .map(Vector::norm)
        .fold(0.0, f64::max))
}

/// Finds the periodic orbit realizing `coding` by minimizing the cyclic path
/// length, then polishing the reflection residual below `tol` with a damped
/// Newton iteration in boundary tangent coordinates.
pub fn find_periodic_orbit(scene: &Scene, coding: &Coding, tol: f64) -> Result<PeriodicOrbit> {
    find_periodic_orbit_from(scene, coding, tol, None)
}

/// Same as [`find_periodic_orbit`], warm-started from a previous solution's
/// points (projected back onto the current boundaries).
pub fn find_periodic_orbit_from(
    scene: &Scene,
    coding: &Coding,
    tol: f64,
    warm_start: Option<&[Vector]>,
) -> Result<PeriodicOrbit> {
    coding.validate_for(scene)?;
    if !(tol > 0.0) {
        return Err(Error::domain("orbit residual tolerance must be positive"));
    }
    let report = scene.check_no_eclipse();
    if !report.holds {
        return Err(Error::domain(format!(
            "no-eclipse condition fails for triple {:?}; orbit existence is not guaranteed",
            report.violation
        )));
    }
    let p = coding.period();
    let mut points: Vec<Vector> = match warm_start {
        Some(prev) if prev.len() == p => (0..p)
            .map(|j| scene.obstacles[coding.symbol(j)].project(&prev[j]))
            .collect(),
        _ => (0..p)
            .map(|j| {
                let prev = &scene.obstacles[coding.symbol((j + p - 1) % p)].center;
                let next = &scene.obstacles[coding.symbol((j + 1) % p)].center;
                scene.obstacles[coding.symbol(j)].project(&((prev + next) * 0.5))
            })
            .collect(),
    };

    const MAX_ITER: usize = 100_000;
    let mut iterations = 0;

    // Phase 1: projected gradient descent with backtracking.
    let (mut value, mut gradients) = length_functional(scene, coding, &points)?;
    let mut step = 0.25;
    while iterations < MAX_ITER {
        let grad_sq: f64 = gradients.iter().map(|g| g.norm_squared()).sum();
        if grad_sq.sqrt() < 1e-7 {
            break;
        }
        let candidate: Vec<Vector> = points
            .iter()
            .zip(&gradients)
            .enumerate()
            .map(|(j, (q, g))| scene.obstacles[coding.symbol(j)].project(&(q - g * step)))
            .collect();
        iterations += 1;
        match length_functional(scene, coding, &candidate) {
            Ok((cand_value, cand_grad)) if cand_value <= value - 1e-4 * step * grad_sq => {
                points = candidate;
                value = cand_value;
                gradients = cand_grad;
                step = (step * 1.3).min(4.0);
            }
            _ => {
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
        }
    }

    // Phase 2: Newton on the tangential reflection residual, one tangent
    // chart per point, finite-difference Jacobian.
    let n = scene.dim;
    let dofs = p * (n - 1);
    let mut residual = max_residual(scene, coding, &points)?;
    let mut newton_rounds = 0;
    while residual > tol && iterations < MAX_ITER && newton_rounds < 60 {
        newton_rounds += 1;
        let frames: Vec<_> = (0..p)
            .map(|j| {
                let nu = scene.obstacles[coding.symbol(j)].outward_normal(&points[j])?;
                Ok(orthonormal_complement(&nu))
            })
            .collect::<Result<Vec<_>>>()?;
        let pack = |vecs: &[Vector]| -> nalgebra::DVector<f64> {
            let mut out = nalgebra::DVector::zeros(dofs);
            for j in 0..p {
                let coords = frames[j].transpose() * &vecs[j];
                for i in 0..n - 1 {
                    out[j * (n - 1) + i] = coords[i];
                }
            }
            out
        };
        let move_points = |base: &[Vector], delta: &nalgebra::DVector<f64>| -> Vec<Vector> {
            (0..p)
                .map(|j| {
                    let local = delta.rows(j * (n - 1), n - 1).into_owned();
                    let shifted = &base[j] + &frames[j] * local;
                    scene.obstacles[coding.symbol(j)].project(&shifted)
                })
                .collect()
        };
        let r0 = pack(&residual_vectors(scene, coding, &points)?);
        let mut jac = nalgebra::DMatrix::zeros(dofs, dofs);
        let h = 1e-7;
        for col in 0..dofs {
            let mut delta = nalgebra::DVector::zeros(dofs);
            delta[col] = h;
            let moved = move_points(&points, &delta);
            iterations += 1;
            let r1 = pack(&residual_vectors(scene, coding, &moved)?);
            jac.set_column(col, &((r1 - &r0) / h));
        }
        let Some(solution) = jac.lu().solve(&r0) else {
            return Err(Error::Solver { iterations, residual });
        };
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let trial = move_points(&points, &(-&solution * damping));
            iterations += 1;
            let trial_res = max_residual(scene, coding, &trial)?;
            if trial_res < residual {
                points = trial;
                residual = trial_res;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if residual > tol {
        return Err(Error::Solver { iterations, residual });
    }

    let mut states = Vec::with_capacity(p);
    for j in 0..p {
        let v = (&points[(j + 1) % p] - &points[j]).normalize();
        states.push(PhaseState::new(scene, points[j].clone(), v, coding.symbol(j))?);
    }
    Ok(PeriodicOrbit { coding: coding.clone(), points, states, residual })
}
