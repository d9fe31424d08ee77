//! Obstacle assemblies: disjointness, the no-eclipse condition, and the
//! global geometric bounds feeding the Lyapunov exponent bracket.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{Obstacle, ObstacleKind};

/// A finite collection of disjoint strictly convex obstacles.
#[derive(Debug, Clone)]
pub struct Scene {
    pub obstacles: Vec<Obstacle>,
    pub dim: usize,
}

/// Result of the no-eclipse test over all obstacle triples.
#[derive(Debug, Clone, PartialEq)]
pub struct EclipseReport {
    pub holds: bool,
    /// True when fewer than three obstacles exist, so no triple constrains.
    pub vacuous: bool,
    /// True when ellipsoids forced the circumscribed-ball approximation.
    pub conservative: bool,
    /// First violating triple (i, k; blocked-by j), zero-based.
    pub violation: Option<(usize, usize, usize)>,
}

/// Global geometric bounds used by the curvature corridor and the exponent
/// bracket. `cos_phi_max` is the cosine of the largest collision angle, i.e.
/// the smallest cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneBounds {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub cos_phi_max: f64,
    /// Set when cos_phi_max comes from the obstacle-aperture fallback rather
    /// than observed collisions.
    pub conservative_phi: bool,
    pub from_trajectory: bool,
}

impl Scene {
    pub fn new(obstacles: Vec<Obstacle>) -> Result<Self> {
        if obstacles.len() < 2 {
            return Err(Error::domain("a scene needs at least two obstacles"));
        }
        let dim = obstacles[0].dim();
        if obstacles.iter().any(|o| o.dim() != dim) {
            return Err(Error::domain("all obstacles must share one dimension"));
        }
        if !(2..=8).contains(&dim) {
            return Err(Error::domain(format!("dimension {dim} outside supported range 2..=8")));
        }
        let scene = Scene { obstacles, dim };
        for i in 0..scene.obstacles.len() {
            for k in i + 1..scene.obstacles.len() {
                let gap = scene.pairwise_gap(i, k);
                if gap <= 0.0 {
                    return Err(Error::domain(format!(
                        "obstacles {i} and {k} are not disjoint (gap {gap:.3e})"
                    )));
                }
            }
        }
        Ok(scene)
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    /// Minimum distance between the boundaries of obstacles i and k.
    /// Spheres use the closed form; ellipsoid pairs use alternating nearest
    /// point projections, which converge for disjoint convex bodies.
    pub fn pairwise_gap(&self, i: usize, k: usize) -> f64 {
        let a = &self.obstacles[i];
        let b = &self.obstacles[k];
        if a.kind == ObstacleKind::Sphere && b.kind == ObstacleKind::Sphere {
            return (&a.center - &b.center).norm() - a.radii[0] - b.radii[0];
        }
        let mut p = a.project(&b.center);
        let mut q = b.project(&p);
        let mut gap = (&p - &q).norm();
        for _ in 0..200 {
            p = a.project(&q);
            q = b.project(&p);
            let next = (&p - &q).norm();
            if (gap - next).abs() < 1e-14 {
                gap = next;
                break;
            }
            gap = next;
        }
        // signed: negative when the projections cross (overlapping bodies)
        if a.contains(&q) || b.contains(&p) {
            -gap
        } else {
            gap
        }
    }

    /// Verifies condition (H): for any ordered triple i != j != k, the convex
    /// hull of K_i and K_k stays clear of K_j. Ball triples are exact; any
    /// ellipsoid is replaced by its circumscribed ball, which can only
    /// over-report violations.
    pub fn check_no_eclipse(&self) -> EclipseReport {
        let z = self.obstacles.len();
        if z < 3 {
            return EclipseReport { holds: true, vacuous: true, conservative: false, violation: None };
        }
        let conservative = self.obstacles.iter().any(|o| o.kind == ObstacleKind::Ellipsoid);
        for i in 0..z {
            for k in i + 1..z {
                for j in 0..z {
                    if j == i || j == k {
                        continue;
                    }
                    if self.hull_clearance(i, k, j) <= 0.0 {
                        return EclipseReport {
                            holds: false,
                            vacuous: false,
                            conservative,
                            violation: Some((i, k, j)),
                        };
                    }
                }
            }
        }
        EclipseReport { holds: true, vacuous: false, conservative, violation: None }
    }

    /// Clearance between the hull of the circumscribed balls of i and k and
    /// the circumscribed ball of j. The hull of two balls is the union of the
    /// interpolated balls B(c(t), r(t)), so the clearance is
    /// min_t |c_j - c(t)| - r(t) - r_j, a convex function of t.
    pub fn hull_clearance(&self, i: usize, k: usize, j: usize) -> f64 {
        let ci = &self.obstacles[i].center;
        let ck = &self.obstacles[k].center;
        let cj = &self.obstacles[j].center;
        let ri = self.obstacles[i].max_radius();
        let rk = self.obstacles[k].max_radius();
        let rj = self.obstacles[j].max_radius();
        let f = |t: f64| -> f64 {
            let c = ci * (1.0 - t) + ck * t;
            let r = (1.0 - t) * ri + t * rk;
            (cj - c).norm() - r - rj
        };
        golden_minimize(f, 0.0, 1.0, 1e-10).1
    }

    /// Curvature, flight-length, and collision-angle bounds. An optional
    /// trajectory tightens d and cos(phi) with observed per-bounce values.
    pub fn geometric_bounds(&self, trajectory: Option<&Trajectory>) -> SceneBounds {
        let kappa_min = self.obstacles.iter().map(Obstacle::kappa_min).fold(f64::INFINITY, f64::min);
        let kappa_max = self.obstacles.iter().map(Obstacle::kappa_max).fold(0.0, f64::max);
        match trajectory {
            Some(traj) if !traj.records.is_empty() => {
                let mut d_min = f64::INFINITY;
                let mut d_max: f64 = 0.0;
                let mut cos_min = f64::INFINITY;
                for rec in &traj.records {
                    d_min = d_min.min(rec.d);
                    d_max = d_max.max(rec.d);
                    cos_min = cos_min.min(rec.cos_phi);
                }
                SceneBounds {
                    kappa_min,
                    kappa_max,
                    d_min,
                    d_max,
                    cos_phi_max: cos_min,
                    conservative_phi: false,
                    from_trajectory: true,
                }
            }
            _ => {
                let mut d_min = f64::INFINITY;
                let mut d_max: f64 = 0.0;
                for i in 0..self.len() {
                    for k in i + 1..self.len() {
                        let gap = self.pairwise_gap(i, k);
                        d_min = d_min.min(gap);
                        d_max = d_max.max(gap);
                    }
                }
                let (cos_phi_max, conservative_phi) = self.aperture_cos_phi();
                SceneBounds {
                    kappa_min,
                    kappa_max,
                    d_min,
                    d_max,
                    cos_phi_max,
                    conservative_phi,
                    from_trajectory: false,
                }
            }
        }
    }

    /// Conservative collision-angle bound without a trajectory. For two
    /// obstacles the only bounded orbit is the common-perpendicular one, with
    /// normal incidence. For three or more, a bounce on B between A and C can
    /// be at most half the widest angle that the cones to A and C subtend
    /// from a point of B; that angle is maximized over the circumscribed
    /// sphere of B inside the plane of the three centers.
    fn aperture_cos_phi(&self) -> (f64, bool) {
        if self.len() == 2 {
            return (1.0, false);
        }
        let mut theta_max: f64 = 0.0;
        for b in 0..self.len() {
            for a in 0..self.len() {
                for c in a + 1..self.len() {
                    if a == b || c == b {
                        continue;
                    }
                    theta_max = theta_max.max(self.pair_angle_from(b, a, c));
                }
            }
        }
        let phi = (theta_max / 2.0).min(std::f64::consts::FRAC_PI_2 - 1e-6);
        (phi.cos().max(1e-9), true)
    }

    fn pair_angle_from(&self, b: usize, a: usize, c: usize) -> f64 {
        let cb = &self.obstacles[b].center;
        let ca = &self.obstacles[a].center;
        let cc = &self.obstacles[c].center;
        let rb = self.obstacles[b].max_radius();
        let ra = self.obstacles[a].max_radius();
        let rc = self.obstacles[c].max_radius();
        // plane through the three centers (fall back to any plane through
        // the a-b axis when degenerate)
        let e1v = ca - cb;
        let e1 = e1v.normalize();
        let mut e2v = (cc - cb) - &e1 * (cc - cb).dot(&e1);
        if e2v.norm() < 1e-12 {
            let basis = crate::geometry::orthonormal_complement(&e1);
            e2v = basis.column(0).into_owned();
        }
        let e2 = e2v.normalize();
        let angle_at = |t: f64| -> f64 {
            let q = cb + (&e1 * t.cos() + &e2 * t.sin()) * rb;
            let da = ca - &q;
            let dc = cc - &q;
            let base = (da.dot(&dc) / (da.norm() * dc.norm())).clamp(-1.0, 1.0).acos();
            let half_a = (ra / da.norm()).clamp(-1.0, 1.0).asin();
            let half_c = (rc / dc.norm()).clamp(-1.0, 1.0).asin();
            base + half_a + half_c
        };
        let samples = 720;
        let mut best_t = 0.0;
        let mut best = f64::NEG_INFINITY;
        for s in 0..samples {
            let t = 2.0 * std::f64::consts::PI * (s as f64) / (samples as f64);
            let v = angle_at(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        let step = 2.0 * std::f64::consts::PI / (samples as f64);
        let (_, refined) = golden_minimize(|t| -angle_at(t), best_t - step, best_t + step, 1e-12);
        -refined
    }
}

impl SceneBounds {
    /// Upper curvature bound 1/d_min + 2 kappa_max / cos(phi_max).
    pub fn eta_max(&self) -> f64 {
        1.0 / self.d_min + 2.0 * self.kappa_max / self.cos_phi_max
    }
}

/// Golden-section minimization of a scalar function on [lo, hi]; returns
/// (argmin, min). Exact for unimodal functions, which covers the convex
/// capsule clearance.
pub fn golden_minimize(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (mut xm, mut fm) = (x, fx);
    for (xx, ff) in [(lo, f(lo)), (hi, f(hi))] {
        if ff < fm {
            xm = xx;
            fm = ff;
        }
    }
    (xm, fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Matrix, Vector};
    use approx::assert_relative_eq;

    fn vec3(x: f64, y: f64, z: f64) -> Vector {
        Vector::from_vec(vec![x, y, z])
    }

    fn sphere(x: f64, y: f64, z: f64, r: f64) -> Obstacle {
        Obstacle::sphere(vec3(x, y, z), r).unwrap()
    }

    fn equilateral(side: f64, r: f64) -> Scene {
        let h = side * 3.0_f64.sqrt() / 2.0;
        Scene::new(vec![
            sphere(0.0, 0.0, 0.0, r),
            sphere(side, 0.0, 0.0, r),
            sphere(side / 2.0, h, 0.0, r),
        ])
        .unwrap()
    }

    #[test]
    fn overlapping_obstacles_are_rejected() {
        let result = Scene::new(vec![sphere(0.0, 0.0, 0.0, 1.0), sphere(1.5, 0.0, 0.0, 1.0)]);
        assert!(matches!(result, Err(Error::Domain(_))));
    }

    #[test]
    fn no_eclipse_on_wide_triangle() {
        let report = equilateral(10.0, 1.0).check_no_eclipse();
        assert!(report.holds);
        assert!(!report.vacuous);
        assert!(!report.conservative);
    }

    #[test]
    fn collinear_spheres_violate_no_eclipse() {
        let scene = Scene::new(vec![
            sphere(0.0, 0.0, 0.0, 1.0),
            sphere(4.0, 0.0, 0.0, 1.0),
            sphere(8.0, 0.0, 0.0, 1.0),
        ])
        .unwrap();
        let report = scene.check_no_eclipse();
        assert!(!report.holds);
        // hull of obstacles 0 and 2 swallows obstacle 1
        assert_eq!(report.violation, Some((0, 2, 1)));
    }

    #[test]
    fn two_obstacles_are_vacuously_eclipse_free() {
        let scene = Scene::new(vec![sphere(-2.0, 0.0, 0.0, 1.0), sphere(2.0, 0.0, 0.0, 1.0)]).unwrap();
        let report = scene.check_no_eclipse();
        assert!(report.holds && report.vacuous);
    }

    #[test]
    fn no_eclipse_is_permutation_invariant() {
        let obstacles = vec![
            sphere(0.0, 0.0, 0.0, 1.0),
            sphere(4.0, 0.0, 0.0, 1.0),
            sphere(8.0, 0.0, 0.0, 1.0),
            sphere(4.0, 9.0, 0.0, 1.0),
        ];
        let base = Scene::new(obstacles.clone()).unwrap().check_no_eclipse().holds;
        let perms: Vec<Vec<usize>> = vec![vec![3, 1, 0, 2], vec![2, 0, 3, 1], vec![1, 3, 2, 0]];
        for p in perms {
            let shuffled: Vec<Obstacle> = p.iter().map(|&i| obstacles[i].clone()).collect();
            assert_eq!(Scene::new(shuffled).unwrap().check_no_eclipse().holds, base);
        }
    }

    #[test]
    fn golden_section_matches_dense_sampling() {
        let scene = equilateral(6.0, 1.0);
        for (i, k, j) in [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)] {
            let ci = &scene.obstacles[i].center;
            let ck = &scene.obstacles[k].center;
            let cj = &scene.obstacles[j].center;
            let f = |t: f64| {
                let c = ci * (1.0 - t) + ck * t;
                (cj - c).norm() - (1.0 - t) - t - 1.0
            };
            let golden = scene.hull_clearance(i, k, j);
            let mut dense = f64::INFINITY;
            for s in 0..=10_000 {
                dense = dense.min(f(s as f64 / 10_000.0));
            }
            assert!((golden - dense).abs() < 1e-7, "golden {golden} dense {dense}");
        }
    }

    #[test]
    fn bounds_for_two_unit_spheres() {
        let scene = Scene::new(vec![sphere(-2.0, 0.0, 0.0, 1.0), sphere(2.0, 0.0, 0.0, 1.0)]).unwrap();
        let b = scene.geometric_bounds(None);
        assert_relative_eq!(b.kappa_min, 1.0);
        assert_relative_eq!(b.kappa_max, 1.0);
        assert_relative_eq!(b.d_min, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.d_max, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.cos_phi_max, 1.0);
        assert!(!b.conservative_phi);
    }

    #[test]
    fn bounds_for_equilateral_triangle() {
        let b = equilateral(6.0, 1.0).geometric_bounds(None);
        assert_relative_eq!(b.d_min, 4.0, epsilon = 1e-12);
        assert_relative_eq!(b.d_max, 4.0, epsilon = 1e-12);
        assert!(b.conservative_phi);
        assert!(b.cos_phi_max > 0.0 && b.cos_phi_max < 1.0);
    }

    #[test]
    fn ellipsoid_gap_via_alternating_projections() {
        let e1 = Obstacle::ellipsoid(vec3(0.0, 0.0, 0.0), vec3(2.0, 1.0, 1.0), Matrix::identity(3, 3))
            .unwrap();
        let e2 = Obstacle::ellipsoid(vec3(6.0, 0.0, 0.0), vec3(1.0, 1.5, 1.0), Matrix::identity(3, 3))
            .unwrap();
        let scene = Scene::new(vec![e1, e2]).unwrap();
        // axis-aligned configuration: nearest points sit on the x axis
        assert_relative_eq!(scene.pairwise_gap(0, 1), 3.0, epsilon = 1e-9);
    }
}
