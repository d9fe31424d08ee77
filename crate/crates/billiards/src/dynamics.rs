//! The billiard map: specular reflection, next-obstacle selection, and
//! trajectory tracing with per-bounce records.

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::scene::Scene;
use crate::tol;

/// A point of the boundary phase space: position on some obstacle boundary
/// and an outgoing unit velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q: Vector,
    pub v: Vector,
    pub obstacle: usize,
}

impl PhaseState {
    pub fn new(scene: &Scene, q: Vector, v: Vector, obstacle: usize) -> Result<Self> {
        if obstacle >= scene.len() {
            return Err(Error::domain(format!("obstacle index {obstacle} out of range")));
        }
        if (v.norm() - 1.0).abs() > tol::UNIT {
            return Err(Error::domain("velocity must be a unit vector"));
        }
        let nu = scene.obstacles[obstacle].outward_normal(&q)?;
        if nu.dot(&v) < 0.0 {
            return Err(Error::domain("velocity must point out of the obstacle"));
        }
        Ok(PhaseState { q, v, obstacle })
    }
}

/// One reflection along a trajectory: where it happened, the outgoing
/// velocity, the boundary normal, the collision cosine, and the flight
/// length to the next reflection.
#[derive(Debug, Clone)]
pub struct Record {
    pub obstacle: usize,
    pub q: Vector,
    pub v: Vector,
    pub nu: Vector,
    pub d: f64,
    pub cos_phi: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub escaped: bool,
    pub dim: usize,
}

impl Trajectory {
    pub fn bounces(&self) -> usize {
        self.records.len()
    }

    pub fn coding(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.obstacle).collect()
    }
}

/// Specular reflection of an incoming direction at a boundary with outward
/// unit normal `nu`. Requires a genuinely transversal collision.
pub fn reflect(v: &Vector, nu: &Vector) -> Result<Vector> {
    let dot = v.dot(nu);
    if dot >= -tol::GRAZING {
        return Err(Error::Grazing { bounce: 0, dot });
    }
    let reflected = v - nu * (2.0 * dot);
    Ok(reflected.normalize())
}

/// Successful outcome of one application of the billiard map.
#[derive(Debug, Clone)]
pub struct Step {
    pub next: PhaseState,
    pub d: f64,
    pub cos_phi: f64,
    pub nu: Vector,
}

/// One application of the billiard map. Returns `None` when the ray escapes
/// every obstacle. The current obstacle is only excluded within the self-hit
/// window; a genuine re-hit of a strictly convex obstacle is impossible and
/// reported as an internal error.
pub fn billiard_step(scene: &Scene, state: &PhaseState) -> Result<Option<Step>> {
    let mut best: Option<(f64, Vector, usize)> = None;
    for (idx, obstacle) in scene.obstacles.iter().enumerate() {
        let hit = match obstacle.ray_intersect(&state.q, &state.v) {
            Ok(h) => h,
            Err(Error::Domain(_)) if idx != state.obstacle => {
                return Err(Error::internal(format!(
                    "trajectory point found inside obstacle {idx}"
                )))
            }
            Err(e) => return Err(e),
        };
        let Some((t, point)) = hit else { continue };
        if idx == state.obstacle && t < tol::SELF_HIT {
            continue;
        }
        match &best {
            Some((tb, _, _)) if t >= tb - tol::TIE_BREAK => {}
            _ => best = Some((t, point, idx)),
        }
    }
    let Some((t, point, idx)) = best else {
        return Ok(None);
    };
    if idx == state.obstacle {
        return Err(Error::internal(
            "strictly convex obstacle re-hit itself; geometry is inconsistent",
        ));
    }
    let nu = scene.obstacles[idx].outward_normal(&point)?;
    let v_out = reflect(&state.v, &nu)?;
    let cos_phi = nu.dot(&v_out);
    Ok(Some(Step {
        next: PhaseState { q: point, v: v_out, obstacle: idx },
        d: t,
        cos_phi,
        nu,
    }))
}

/// Iterates the billiard map up to `m` times, recording each completed
/// flight. Stops early with `escaped = true` when the ray leaves the scene.
/// Grazing collisions abort with the bounce index reached.
pub fn trace(scene: &Scene, start: &PhaseState, m: usize) -> Result<Trajectory> {
    if m == 0 {
        return Err(Error::domain("trace requires at least one bounce"));
    }
    let mut records = Vec::with_capacity(m);
    let mut current = start.clone();
    let mut nu = scene.obstacles[current.obstacle].outward_normal(&current.q)?;
    let mut cos_phi = nu.dot(&current.v);
    let mut escaped = false;
    for bounce in 0..m {
        match billiard_step(scene, &current) {
            Ok(Some(step)) => {
                records.push(Record {
                    obstacle: current.obstacle,
                    q: current.q.clone(),
                    v: current.v.clone(),
                    nu: nu.clone(),
                    d: step.d,
                    cos_phi,
                });
                current = step.next;
                nu = step.nu;
                cos_phi = step.cos_phi;
            }
            Ok(None) => {
                escaped = true;
                break;
            }
            Err(Error::Grazing { dot, .. }) => return Err(Error::Grazing { bounce, dot }),
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory { records, escaped, dim: scene.dim })
}
