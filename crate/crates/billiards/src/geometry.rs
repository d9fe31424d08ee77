//! Obstacle geometry: boundary evaluation, outward normals, shape operators,
//! ray intersections, and one-parameter deformation families.
//!
//! Obstacles are spheres and ellipsoids. Both are handled through the body
//! map q = c + R (a .* z), |z| = 1, with R the orthogonal axis matrix and a
//! the semi-axis lengths, so every boundary quantity has a closed form.

use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::tol;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

/// Orthonormal basis of the hyperplane orthogonal to `v`, as the columns of
/// an n x (n-1) matrix. Built from the Householder reflection that maps `v`
/// onto a coordinate axis.
pub fn orthonormal_complement(v: &Vector) -> Matrix {
    let n = v.len();
    let norm = v.norm();
    assert!(norm > 0.0, "cannot complement the zero vector");
    let vhat = v / norm;
    let k = vhat.iamax();
    let sign = if vhat[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = vhat.clone();
    u[k] += sign;
    let uu = u.dot(&u);
    let mut basis = Matrix::zeros(n, n - 1);
    let mut col = 0;
    for j in 0..n {
        if j == k {
            continue;
        }
        // column j of H = I - 2 u u^T / (u^T u)
        let coef = 2.0 * u[j] / uu;
        for i in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            basis[(i, col)] = e - coef * u[i];
        }
        col += 1;
    }
    basis
}

/// Mirror reflection x - 2 <x, nu> nu across the hyperplane orthogonal to `nu`.
pub fn mirror(x: &Vector, nu: &Vector) -> Vector {
    x - nu * (2.0 * x.dot(nu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    Sphere,
    Ellipsoid,
}

/// A strictly convex obstacle with analytic boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub kind: ObstacleKind,
    pub center: Vector,
    pub radii: Vector,
    pub orientation: Matrix,
}

impl Obstacle {
    pub fn sphere(center: Vector, radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::domain(format!("sphere radius must be positive, got {radius}")));
        }
        let n = center.len();
        if n < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        Ok(Obstacle {
            kind: ObstacleKind::Sphere,
            radii: Vector::from_element(n, radius),
            orientation: Matrix::identity(n, n),
            center,
        })
    }

    pub fn ellipsoid(center: Vector, radii: Vector, orientation: Matrix) -> Result<Self> {
        let n = center.len();
        if n < 2 {
            return Err(Error::domain("dimension must be at least 2"));
        }
        if radii.len() != n || orientation.nrows() != n || orientation.ncols() != n {
            return Err(Error::domain("ellipsoid radii/orientation dimensions mismatch"));
        }
        if radii.iter().any(|&r| r <= 0.0) {
            return Err(Error::domain("ellipsoid radii must be strictly positive"));
        }
        let defect = (orientation.transpose() * &orientation - Matrix::identity(n, n)).norm();
        if defect > 1e-12 * (n as f64) {
            return Err(Error::domain(format!(
                "orientation matrix is not orthogonal (defect {defect:.3e})"
            )));
        }
        Ok(Obstacle { kind: ObstacleKind::Ellipsoid, center, radii, orientation })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.min()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.max()
    }

    /// Smallest principal curvature over the whole boundary.
    pub fn kappa_min(&self) -> f64 {
        self.min_radius() / (self.max_radius() * self.max_radius())
    }

    /// Largest principal curvature over the whole boundary.
    pub fn kappa_max(&self) -> f64 {
        self.max_radius() / (self.min_radius() * self.min_radius())
    }

    /// Body coordinates of an ambient point.
    fn body(&self, q: &Vector) -> Vector {
        self.orientation.transpose() * (q - &self.center)
    }

    /// Pre-image of an ambient point under the unit-sphere map.
    fn preimage(&self, q: &Vector) -> Vector {
        let mut z = self.body(q);
        for i in 0..z.len() {
            z[i] /= self.radii[i];
        }
        z
    }

    fn from_body(&self, y: &Vector) -> Vector {
        &self.center + &self.orientation * y
    }

    /// Point on the boundary at the given unit-sphere pre-image direction.
    pub fn boundary_point(&self, z_unit: &Vector) -> Vector {
        let mut y = z_unit.normalize();
        for i in 0..y.len() {
            y[i] *= self.radii[i];
        }
        self.from_body(&y)
    }

    /// Signed distance proxy: (|z| - 1) * r_min, a lower bound on the
    /// geometric distance for points near the boundary. Negative inside.
    pub fn boundary_residual(&self, q: &Vector) -> f64 {
        (self.preimage(q).norm() - 1.0) * self.min_radius()
    }

    pub fn contains(&self, q: &Vector) -> bool {
        self.preimage(q).norm() < 1.0
    }

    fn check_on_boundary(&self, q: &Vector) -> Result<()> {
        let res = self.boundary_residual(q);
        if res.abs() > tol::BOUNDARY {
            return Err(Error::domain(format!(
                "point is off the obstacle boundary (residual {res:.3e})"
            )));
        }
        Ok(())
    }

    /// Gradient direction of the implicit function, M (q - c) with
    /// M = R diag(a^-2) R^T.
    fn implicit_gradient(&self, q: &Vector) -> Vector {
        let mut y = self.body(q);
        for i in 0..y.len() {
            y[i] /= self.radii[i] * self.radii[i];
        }
        &self.orientation * y
    }

    /// Outward unit normal at a boundary point.
    pub fn outward_normal(&self, q: &Vector) -> Result<Vector> {
        self.check_on_boundary(q)?;
        let g = self.implicit_gradient(q);
        let norm = g.norm();
        if norm == 0.0 {
            return Err(Error::internal("degenerate normal"));
        }
        Ok(g / norm)
    }

    /// Shape operator (second fundamental form w.r.t. the outward normal) at
    /// a boundary point, returned as a symmetric (n-1) x (n-1) matrix in an
    /// orthonormal tangent frame, together with that frame (columns).
    pub fn shape_operator(&self, q: &Vector) -> Result<(Matrix, Matrix)> {
        self.check_on_boundary(q)?;
        let g = self.implicit_gradient(q);
        let gnorm = g.norm();
        let nu = g / gnorm;
        let frame = orthonormal_complement(&nu);
        let n = self.dim();
        // S = E^T M E / |g| with M = R diag(a^-2) R^T
        let mut me = Matrix::zeros(n, n - 1);
        for j in 0..n - 1 {
            let col = frame.column(j).into_owned();
            let mut y = self.orientation.transpose() * col;
            for i in 0..n {
                y[i] /= self.radii[i] * self.radii[i];
            }
            me.set_column(j, &(&self.orientation * y));
        }
        let mut s = frame.transpose() * me / gnorm;
        let st = s.transpose();
        s = (s + st) * 0.5;
        Ok((s, frame))
    }

    /// First intersection of the ray origin + t dir with the boundary, for
    /// t > MIN_RAY_T. The origin must not lie strictly inside.
    pub fn ray_intersect(&self, origin: &Vector, dir: &Vector) -> Result<Option<(f64, Vector)>> {
        let z0 = self.preimage(origin);
        let c = z0.dot(&z0) - 1.0;
        if c < -tol::BOUNDARY / self.min_radius() {
            return Err(Error::domain("ray origin lies inside the obstacle"));
        }
        let mut w = self.orientation.transpose() * dir;
        for i in 0..w.len() {
            w[i] /= self.radii[i];
        }
        let a = w.dot(&w);
        let b = 2.0 * z0.dot(&w);
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Ok(None);
        }
        let sq = disc.sqrt();
        let qq = if b >= 0.0 { -(b + sq) / 2.0 } else { -(b - sq) / 2.0 };
        let t1 = qq / a;
        let t2 = if qq.abs() > 0.0 { c / qq } else { t1 };
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut t = if lo > tol::MIN_RAY_T {
            lo
        } else if hi > tol::MIN_RAY_T {
            hi
        } else {
            return Ok(None);
        };
        // One Newton step on F(t) = |z0 + t w|^2 - 1 sharpens the root.
        let zt = &z0 + &w * t;
        let f = zt.dot(&zt) - 1.0;
        let fp = 2.0 * zt.dot(&w);
        if fp.abs() > 1e-300 {
            let tn = t - f / fp;
            if tn > tol::MIN_RAY_T {
                t = tn;
            }
        }
        Ok(Some((t, origin + dir * t)))
    }

    /// Nearest boundary point to an ambient point.
    pub fn project(&self, x: &Vector) -> Vector {
        let y = self.body(x);
        if self.kind == ObstacleKind::Sphere {
            let r = self.radii[0];
            let norm = y.norm();
            if norm == 0.0 {
                let mut e = Vector::zeros(self.dim());
                e[0] = r;
                return self.from_body(&e);
            }
            return self.from_body(&(y * (r / norm)));
        }
        // Ellipsoid: solve the secular equation for the Lagrange multiplier t,
        // q_i = a_i^2 y_i / (a_i^2 + t), g(t) = sum (a_i y_i / (a_i^2+t))^2 - 1.
        let a = &self.radii;
        let g = |t: f64| -> f64 {
            let mut s = 0.0;
            for i in 0..y.len() {
                let d = a[i] * y[i] / (a[i] * a[i] + t);
                s += d * d;
            }
            s - 1.0
        };
        let amin2 = self.min_radius() * self.min_radius();
        let (mut lo, mut hi);
        if g(0.0) >= 0.0 {
            lo = 0.0;
            hi = y.norm() * self.max_radius() + amin2;
            while g(hi) > 0.0 {
                hi *= 2.0;
            }
        } else {
            lo = -amin2 * (1.0 - 1e-12);
            hi = 0.0;
            if g(lo) < 0.0 {
                // interior point aligned with the short axis plane
                lo = -amin2 * (1.0 - 1e-3);
                while g(lo) < 0.0 && lo < -amin2 * 1e-12 {
                    lo *= 0.5;
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let mut q = Vector::zeros(y.len());
        for i in 0..y.len() {
            q[i] = a[i] * a[i] * y[i] / (a[i] * a[i] + t);
        }
        self.from_body(&q)
    }

    fn translated(&self, shift: &Vector) -> Obstacle {
        let mut o = self.clone();
        o.center += shift;
        o
    }

    fn scaled(&self, factor: f64) -> Obstacle {
        let mut o = self.clone();
        o.radii *= factor;
        o
    }

    fn rotated_in_plane(&self, i: usize, j: usize, angle: f64) -> Obstacle {
        let n = self.dim();
        let mut rot = Matrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        rot[(i, i)] = c;
        rot[(j, j)] = c;
        rot[(i, j)] = -s;
        rot[(j, i)] = s;
        let mut o = self.clone();
        o.orientation = rot * &self.orientation;
        o
    }
}

/// One deformation rule applied to a single obstacle.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleKind {
    /// Shift the center by alpha times a fixed vector.
    Translate(Vector),
    /// Scale all radii by (1 + alpha).
    Scale,
    /// Rotate the axis frame by angle alpha in the coordinate plane (i, j).
    RotateInPlane { axes: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationRule {
    pub target: usize,
    pub kind: RuleKind,
}

/// A one-parameter family of scenes K(alpha), alpha in [0, b]. Rules are
/// polynomial or trigonometric in alpha, hence smooth of every order.
#[derive(Debug, Clone)]
pub struct DeformationFamily {
    pub base: Scene,
    pub rules: Vec<DeformationRule>,
    pub alpha_max: f64,
}

impl DeformationFamily {
    pub fn new(base: Scene, rules: Vec<DeformationRule>, alpha_max: f64) -> Result<Self> {
        if alpha_max < 0.0 || !alpha_max.is_finite() {
            return Err(Error::domain("deformation interval must be [0, b] with b >= 0"));
        }
        for rule in &rules {
            if rule.target >= base.obstacles.len() {
                return Err(Error::domain(format!(
                    "deformation rule targets obstacle {} out of range",
                    rule.target
                )));
            }
            match &rule.kind {
                RuleKind::Translate(v) => {
                    if v.len() != base.dim {
                        return Err(Error::domain("translation vector dimension mismatch"));
                    }
                }
                RuleKind::Scale => {
                    if 1.0 + alpha_max <= 0.0 {
                        return Err(Error::domain("scale rule degenerates on [0, b]"));
                    }
                }
                RuleKind::RotateInPlane { axes: (i, j) } => {
                    if *i == *j || *i >= base.dim || *j >= base.dim {
                        return Err(Error::domain("rotation plane axes out of range"));
                    }
                }
            }
        }
        Ok(DeformationFamily { base, rules, alpha_max })
    }

    /// Constant family: every alpha yields the base scene.
    pub fn constant(base: Scene, alpha_max: f64) -> Result<Self> {
        Self::new(base, Vec::new(), alpha_max)
    }

    fn check_alpha(&self, alpha: f64) -> Result<()> {
        if !(0.0..=self.alpha_max).contains(&alpha) {
            return Err(Error::domain(format!(
                "alpha {alpha} outside deformation interval [0, {}]",
                self.alpha_max
            )));
        }
        Ok(())
    }

    /// The deformed obstacle at parameter alpha. At alpha = 0 the base
    /// obstacle is returned exactly.
    pub fn obstacle_at(&self, index: usize, alpha: f64) -> Result<Obstacle> {
        self.check_alpha(alpha)?;
        if index >= self.base.obstacles.len() {
            return Err(Error::domain(format!("obstacle index {index} out of range")));
        }
        let mut obstacle = self.base.obstacles[index].clone();
        if alpha == 0.0 {
            return Ok(obstacle);
        }
        for rule in self.rules.iter().filter(|r| r.target == index) {
            obstacle = match &rule.kind {
                RuleKind::Translate(v) => obstacle.translated(&(v * alpha)),
                RuleKind::Scale => obstacle.scaled(1.0 + alpha),
                RuleKind::RotateInPlane { axes: (i, j) } => obstacle.rotated_in_plane(*i, *j, alpha),
            };
        }
        Ok(obstacle)
    }

    /// The full deformed scene at parameter alpha.
    pub fn scene_at(&self, alpha: f64) -> Result<Scene> {
        self.check_alpha(alpha)?;
        if alpha == 0.0 {
            return Ok(self.base.clone());
        }
        let obstacles = (0..self.base.obstacles.len())
            .map(|i| self.obstacle_at(i, alpha))
            .collect::<Result<Vec<_>>>()?;
        Scene::new(obstacles)
    }
}
