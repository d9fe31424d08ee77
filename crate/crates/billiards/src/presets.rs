//! Ready-made example scenes and deformation families used by the test
//! batteries and shipped alongside the CLI configs.

use crate::geometry::{DeformationFamily, DeformationRule, Obstacle, RuleKind, Vector};
use crate::scene::Scene;

fn vec3(x: f64, y: f64, z: f64) -> Vector {
    Vector::from_vec(vec![x, y, z])
}

/// Two unit spheres with boundary gap 2, centers on the x axis.
pub fn two_spheres() -> Scene {
    Scene::new(vec![
        Obstacle::sphere(vec3(-2.0, 0.0, 0.0), 1.0).unwrap(),
        Obstacle::sphere(vec3(2.0, 0.0, 0.0), 1.0).unwrap(),
    ])
    .unwrap()
}

/// The two-sphere scene embedded in R^n.
pub fn two_spheres_nd(n: usize) -> Scene {
    let mut c0 = Vector::zeros(n);
    let mut c1 = Vector::zeros(n);
    c0[0] = -2.0;
    c1[0] = 2.0;
    Scene::new(vec![
        Obstacle::sphere(c0, 1.0).unwrap(),
        Obstacle::sphere(c1, 1.0).unwrap(),
    ])
    .unwrap()
}

/// The two-sphere scene with all lengths multiplied by `s`.
pub fn two_spheres_scaled(s: f64) -> Scene {
    Scene::new(vec![
        Obstacle::sphere(vec3(-2.0 * s, 0.0, 0.0), s).unwrap(),
        Obstacle::sphere(vec3(2.0 * s, 0.0, 0.0), s).unwrap(),
    ])
    .unwrap()
}

/// Three unit spheres at the vertices of an equilateral triangle in the
/// z = 0 plane. Side 4.5 keeps the gaps small enough that the post-collision
/// curvature floor stays above 2 kappa_min along the symmetric orbit.
pub fn three_spheres_equilateral() -> Scene {
    three_spheres_equilateral_side(4.5)
}

pub fn three_spheres_equilateral_side(side: f64) -> Scene {
    let h = side * 3.0_f64.sqrt() / 2.0;
    Scene::new(vec![
        Obstacle::sphere(vec3(0.0, 0.0, 0.0), 1.0).unwrap(),
        Obstacle::sphere(vec3(side, 0.0, 0.0), 1.0).unwrap(),
        Obstacle::sphere(vec3(side / 2.0, h, 0.0), 1.0).unwrap(),
    ])
    .unwrap()
}

/// A scalene triangle of spheres with unequal radii.
pub fn three_spheres_asymmetric() -> Scene {
    Scene::new(vec![
        Obstacle::sphere(vec3(0.0, 0.0, 0.0), 1.0).unwrap(),
        Obstacle::sphere(vec3(3.8, 0.0, 0.0), 0.9).unwrap(),
        Obstacle::sphere(vec3(1.7, 3.2, 0.0), 1.1).unwrap(),
    ])
    .unwrap()
}

/// Radius deformation r(alpha) = 1 + alpha on both spheres, centers fixed at
/// (+-2.5, 0, 0): the boundary gap shrinks as 3 - 2 alpha while the
/// curvature drops as 1/(1 + alpha).
pub fn radius_family() -> DeformationFamily {
    let base = Scene::new(vec![
        Obstacle::sphere(vec3(-2.5, 0.0, 0.0), 1.0).unwrap(),
        Obstacle::sphere(vec3(2.5, 0.0, 0.0), 1.0).unwrap(),
    ])
    .unwrap();
    DeformationFamily::new(
        base,
        vec![
            DeformationRule { target: 0, kind: RuleKind::Scale },
            DeformationRule { target: 1, kind: RuleKind::Scale },
        ],
        0.2,
    )
    .unwrap()
}

/// Translation deformation pulling the second sphere radially outward, so
/// the gap grows as 2 + alpha.
pub fn translation_family() -> DeformationFamily {
    DeformationFamily::new(
        two_spheres(),
        vec![DeformationRule { target: 1, kind: RuleKind::Translate(vec3(1.0, 0.0, 0.0)) }],
        0.2,
    )
    .unwrap()
}

/// A family whose rules are all absent: lambda_1(alpha) must be constant.
pub fn constant_family() -> DeformationFamily {
    DeformationFamily::constant(two_spheres(), 0.2).unwrap()
}

/// Closed-form quantities for the axial period-2 orbit between two spheres
/// of curvature `kappa` separated by boundary gap `d`: the curvature
/// operator converges to k I with d k^2 - 2 kappa d k - 2 kappa = 0, and the
/// exponent is log(1 + d k).
pub mod axial {
    /// Positive root k = kappa + sqrt(kappa^2 + 2 kappa / d).
    pub fn fixed_point_curvature(kappa: f64, d: f64) -> f64 {
        kappa + (kappa * kappa + 2.0 * kappa / d).sqrt()
    }

    pub fn lambda1(kappa: f64, d: f64) -> f64 {
        (1.0 + d * fixed_point_curvature(kappa, d)).ln()
    }
}
