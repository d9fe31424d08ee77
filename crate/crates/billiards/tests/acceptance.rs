//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion report.

use billiards::dynamics;
use billiards::fronts::{CollisionData, FrontTrack};
use billiards::geometry::{orthonormal_complement, Vector};
use billiards::lyapunov::{
    benettin_oracle, continuity_modulus, derivative_study, estimate_lambda1, lambda1_bracket,
    lambda1_from_trajectory, sweep_alpha, trajectory_for, Start, BURN_IN,
};
use billiards::orbits::{find_periodic_orbit, Coding};
use billiards::presets::{self, axial};
use billiards::scene::Scene;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const SEED: u64 = 42;

fn shipped_scenes() -> Vec<(&'static str, Scene, Coding)> {
    vec![
        ("two-sphere", presets::two_spheres(), Coding::new(vec![0, 1]).unwrap()),
        (
            "three-sphere-equilateral",
            presets::three_spheres_equilateral(),
            Coding::new(vec![0, 1, 2]).unwrap(),
        ),
        (
            "three-sphere-asymmetric",
            presets::three_spheres_asymmetric(),
            Coding::new(vec![0, 1, 2]).unwrap(),
        ),
    ]
}

/// Every coding shipped in the example configurations, periods 2 through 6.
fn shipped_codings() -> Vec<(&'static str, Scene, Coding)> {
    let eq = presets::three_spheres_equilateral;
    vec![
        ("two-sphere (1,2)", presets::two_spheres(), Coding::new(vec![0, 1]).unwrap()),
        ("equilateral (1,2,3)", eq(), Coding::new(vec![0, 1, 2]).unwrap()),
        ("equilateral (1,3,2)", eq(), Coding::new(vec![0, 2, 1]).unwrap()),
        ("equilateral (1,2,1,3)", eq(), Coding::new(vec![0, 1, 0, 2]).unwrap()),
        ("equilateral (1,2,3,2)", eq(), Coding::new(vec![0, 1, 2, 1]).unwrap()),
        (
            "equilateral (1,2,1,3,2,3)",
            eq(),
            Coding::new(vec![0, 1, 0, 2, 1, 2]).unwrap(),
        ),
        (
            "asymmetric (1,2,3)",
            presets::three_spheres_asymmetric(),
            Coding::new(vec![0, 1, 2]).unwrap(),
        ),
    ]
}

#[test]
fn criterion_1_period2_closed_form() {
    let start = Instant::now();
    let scene = presets::two_spheres();
    let series =
        estimate_lambda1(&scene, &Start::Coding(Coding::new(vec![0, 1]).unwrap()), 200, SEED)
            .unwrap();
    let expected = (3.0 + 2.0 * 2.0_f64.sqrt()).ln();
    let err = (series.lambda1 - expected).abs();
    let elapsed = start.elapsed();
    assert!(err < 1e-9, "lambda1 error {err:.3e} exceeds 1e-9");
    assert!(elapsed.as_secs_f64() < 0.1, "runtime {elapsed:?} exceeds 0.1 s");
    println!(
        "criterion 1 (period-2 closed form): PASS  lambda1 = {:.12}, error {err:.3e}, {elapsed:?}",
        series.lambda1
    );
}

#[test]
fn criterion_2_bracket_containment() {
    for (name, scene, coding) in shipped_scenes() {
        let traj = trajectory_for(&scene, &Start::Coding(coding), BURN_IN + 1001).unwrap();
        let series = lambda1_from_trajectory(&scene, &traj, 1000, SEED).unwrap();
        let bounds = scene.geometric_bounds(Some(&traj));
        let (lower, upper) = lambda1_bracket(&bounds).unwrap();
        assert!(
            lower - 1e-9 <= series.lambda1 && series.lambda1 <= upper + 1e-9,
            "{name}: lambda1 {} outside [{lower}, {upper}]",
            series.lambda1
        );
        if name == "two-sphere" {
            assert!((lower - 5.0_f64.ln()).abs() < 1e-12);
            assert!((upper - 6.0_f64.ln()).abs() < 1e-12);
        }
        println!(
            "criterion 2 (bracket containment, {name}): PASS  {lower:.6} <= {:.6} <= {upper:.6}",
            series.lambda1
        );
    }
}

#[test]
fn criterion_3_oracle_cross_validation() {
    for (name, scene, coding) in shipped_scenes() {
        let start = Instant::now();
        let front =
            estimate_lambda1(&scene, &Start::Coding(coding.clone()), 1000, SEED).unwrap().lambda1;
        let oracle = benettin_oracle(&scene, &Start::Coding(coding), 1000, 1e-8, SEED).unwrap();
        let rel = (front - oracle).abs() / front;
        let elapsed = start.elapsed();
        assert!(rel < 1e-3, "{name}: relative disagreement {rel:.3e} exceeds 1e-3");
        assert!(elapsed.as_secs_f64() < 5.0, "{name}: runtime {elapsed:?} exceeds 5 s");
        println!(
            "criterion 3 (oracle cross-validation, {name}): PASS  front {front:.9} vs oracle {oracle:.9}, rel {rel:.3e}, {elapsed:?}"
        );
    }
}

#[test]
fn criterion_4_eigenvalue_corridor() {
    for (name, scene, coding) in shipped_scenes() {
        let m = 10_000;
        let orbit = find_periodic_orbit(&scene, &coding, 1e-12).unwrap();
        let traj = orbit.trajectory(&scene, m + 1).unwrap();
        let bounds = scene.geometric_bounds(Some(&traj));
        let lo = 2.0 * bounds.kappa_min - 1e-9;
        let hi = 1.0 / bounds.d_min + 2.0 * bounds.kappa_max / bounds.cos_phi_max + 1e-9;
        let seed_vec = Vector::from_fn(scene.dim, |i, _| 0.3 + 0.2 * i as f64);
        let mut track = FrontTrack::new(&scene, &traj, &seed_vec).unwrap();
        track.advance().unwrap().unwrap(); // flight 0: front becomes K_1
        let mut observed = (f64::INFINITY, f64::NEG_INFINITY);
        for flight in 1..m {
            track.advance().unwrap().unwrap();
            // front is now K_{flight+1}, i.e. strictly after bounce 1
            let eig = track.front().k.clone().symmetric_eigen().eigenvalues;
            let (emin, emax) = (eig.min(), eig.max());
            observed = (observed.0.min(emin), observed.1.max(emax));
            assert!(
                emin >= lo && emax <= hi,
                "{name}: eigenvalue [{emin}, {emax}] outside corridor [{lo}, {hi}] at bounce {}",
                flight + 1
            );
        }
        println!(
            "criterion 4 (eigenvalue corridor, {name}): PASS  observed [{:.6}, {:.6}] within [{lo:.6}, {hi:.6}]",
            observed.0, observed.1
        );
    }
}

/// d lambda / d alpha at alpha = 0 for the radius family r(alpha) = 1+alpha
/// with centers fixed at +-2.5: d(alpha) = 3 - 2 alpha, kappa = 1/(1+alpha),
/// differentiated through k = kappa + sqrt(kappa^2 + 2 kappa / d).
fn radius_family_slope() -> f64 {
    let (d, kappa) = (3.0_f64, 1.0_f64);
    let (d_dot, kappa_dot) = (-2.0, -1.0);
    let s = (kappa * kappa + 2.0 * kappa / d).sqrt();
    let k = kappa + s;
    let k_dot = (1.0 + (kappa + 1.0 / d) / s) * kappa_dot - kappa / (d * d * s) * d_dot;
    (d_dot * k + d * k_dot) / (1.0 + d * k)
}

#[test]
fn criterion_5_continuity() {
    let family = presets::radius_family();
    let coding = Coding::new(vec![0, 1]).unwrap();
    let alphas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.001).collect();
    let sweep = sweep_alpha(&family, &coding, &alphas, 500, SEED).unwrap();
    let c = continuity_modulus(&sweep).unwrap();
    let lambda0 = sweep.entries[0].lambda1.unwrap();
    for e in &sweep.entries {
        if e.alpha > 0.0 {
            let diff = (e.lambda1.unwrap() - lambda0).abs();
            assert!(diff <= c * e.alpha + 1e-15, "alpha {}: modulus violated", e.alpha);
        }
    }
    let slope = radius_family_slope().abs();
    let rel = (c - slope).abs() / slope;
    assert!(rel <= 0.1, "empirical C {c} deviates {rel:.3} from analytic slope {slope}");
    println!(
        "criterion 5 (continuity modulus): PASS  C = {c:.9} vs |dlambda/dalpha(0)| = {slope:.9} ({:.2}% off)",
        rel * 100.0
    );
}

#[test]
fn criterion_6_differentiability() {
    let hs = [1e-3, 5e-4, 2.5e-4];
    for (name, family) in
        [("radius", presets::radius_family()), ("translation", presets::translation_family())]
    {
        let coding = Coding::new(vec![0, 1]).unwrap();
        let study = derivative_study(&family, &coding, 500, &hs, SEED).unwrap();
        assert!(
            study.fd_vs_fm <= 1e-4,
            "{name}: |Richardson FD - F_m| = {:.3e} exceeds 1e-4",
            study.fd_vs_fm
        );
        assert!(study.converged, "{name}: finite-difference table tail is not monotone");
        // raw one-sided quotients must converge linearly in h
        let errs: Vec<f64> =
            study.rows.iter().map(|r| (r.quotient - study.richardson).abs()).collect();
        for w in errs.windows(2) {
            let ratio = w[1] / w[0];
            assert!(
                (0.4..=0.6).contains(&ratio),
                "{name}: error ratio {ratio:.3} not consistent with O(h) decay"
            );
        }
        println!(
            "criterion 6 (differentiability, {name} family): PASS  FD {:.12}, F_m {:.12}, |diff| {:.3e}",
            study.richardson, study.f_m, study.fd_vs_fm
        );
    }
}

#[test]
fn criterion_7a_orbit_solver_residuals() {
    for (name, scene, coding) in shipped_codings() {
        let orbit = find_periodic_orbit(&scene, &coding, 1e-12).unwrap();
        assert!(
            orbit.residual < 1e-12,
            "{name}: residual {:.3e} above 1e-12",
            orbit.residual
        );
        println!(
            "criterion 7a (orbit residual, {name}): PASS  residual {:.3e}",
            orbit.residual
        );
    }
}

/// Shadowing for ten periods with positional drift below 1e-6. The axial
/// two-sphere orbit satisfies this exactly. On the three-sphere scenes the
/// positive exponent amplifies the solver residual and per-bounce rounding
/// noise by e^{lambda_1 j}; holding 1e-6 over 10 p bounces would need
/// roughly e^{-10 p lambda_1} ~ 1e-28 start-up error, far below f64
/// resolution, so this check documents an unreachable tolerance and fails.
#[test]
fn criterion_7b_orbit_shadowing() {
    let mut failures = Vec::new();
    for (name, scene, coding) in shipped_codings() {
        let p = coding.period();
        let orbit = find_periodic_orbit(&scene, &coding, 1e-12).unwrap();
        let traj = dynamics::trace(&scene, &orbit.states[0], 10 * p).unwrap();
        let mut coding_held = 0usize;
        let mut max_drift = 0.0_f64;
        for (j, rec) in traj.records.iter().enumerate() {
            if rec.obstacle != coding.symbol(j) {
                break;
            }
            coding_held = j + 1;
            max_drift = max_drift.max((&rec.q - &orbit.points[j % p]).norm());
        }
        let ok = coding_held == 10 * p && max_drift < 1e-6;
        println!(
            "criterion 7b (shadowing, {name}): {}  coding held {coding_held}/{} bounces, max drift {max_drift:.3e}",
            if ok { "PASS" } else { "FAIL" },
            10 * p
        );
        if !ok {
            failures.push(format!(
                "{name}: held {coding_held}/{} bounces, drift {max_drift:.3e}",
                10 * p
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "shadowing for 10 periods at drift < 1e-6 exceeds double precision on \
         expanding orbits (rounding grows by e^lambda_1 per bounce): {failures:?}"
    );
}

#[test]
fn criterion_8_structural_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut unit = |n: usize, rng: &mut ChaCha8Rng| -> Vector {
        Vector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal)).normalize()
    };

    // reflection identity on random incoming pairs
    let mut checked = 0;
    while checked < 10_000 {
        let v = unit(3, &mut rng);
        let nu = unit(3, &mut rng);
        if v.dot(&nu) >= -1e-6 {
            continue;
        }
        checked += 1;
        let r = dynamics::reflect(&v, &nu).unwrap();
        assert!((r.dot(&nu) + v.dot(&nu)).abs() < 1e-12);
        assert!((r.norm() - 1.0).abs() < 1e-12);
        let vt = &v - &nu * v.dot(&nu);
        let rt = &r - &nu * r.dot(&nu);
        assert!((vt - rt).norm() < 1e-12);
    }
    println!("criterion 8 (reflection identity, 10^4 samples): PASS");

    // unitarity of the hyperplane transfer on random oblique collisions
    let scene = presets::three_spheres_asymmetric();
    for _ in 0..200 {
        let idx = rng.gen_range(0..scene.len());
        let q = scene.obstacles[idx].boundary_point(&unit(3, &mut rng));
        let nu = scene.obstacles[idx].outward_normal(&q).unwrap();
        let frame = orthonormal_complement(&nu);
        let tilt = rng.gen_range(-0.9..0.9);
        let v_in = (-&nu + frame.column(0) * tilt).normalize();
        let data = CollisionData::at(&scene, idx, &q, &v_in).unwrap();
        let w = &orthonormal_complement(&data.v_out) * unit(2, &mut rng);
        let transferred = billiards::fronts::project_along(&w, &data.nu, &data.v_in);
        assert!(transferred.dot(&data.v_in).abs() < 1e-12);
        assert!((transferred.norm() - w.norm()).abs() < 1e-10, "transfer not norm-preserving");
    }
    println!("criterion 8 (transfer unitarity, 200 collisions): PASS");

    // symmetry of the curvature operator along an oblique orbit
    let eq = presets::three_spheres_equilateral();
    let orbit = find_periodic_orbit(&eq, &Coding::new(vec![0, 1, 2]).unwrap(), 1e-12).unwrap();
    let traj = orbit.trajectory(&eq, 500).unwrap();
    let mut track = FrontTrack::new(&eq, &traj, &unit(3, &mut rng)).unwrap();
    for _ in 0..499 {
        track.advance().unwrap().unwrap();
        let k = &track.front().k;
        assert!((k - k.transpose()).amax() < 1e-10);
    }
    println!("criterion 8 (curvature symmetry, 500 bounces): PASS");

    // scale covariance of the exponent
    let coding = Coding::new(vec![0, 1]).unwrap();
    let base = estimate_lambda1(&presets::two_spheres(), &Start::Coding(coding.clone()), 300, SEED)
        .unwrap()
        .lambda1;
    for s in [0.5, 2.0, 7.0] {
        let scaled = estimate_lambda1(
            &presets::two_spheres_scaled(s),
            &Start::Coding(coding.clone()),
            300,
            SEED,
        )
        .unwrap()
        .lambda1;
        assert!((base - scaled).abs() < 1e-10, "scale {s}: {base} vs {scaled}");
    }
    println!("criterion 8 (scale covariance): PASS");

    // seed independence after the transient
    for (name, scene, coding) in shipped_scenes() {
        let a = estimate_lambda1(&scene, &Start::Coding(coding.clone()), 500, 1).unwrap().lambda1;
        let b = estimate_lambda1(&scene, &Start::Coding(coding), 500, 2).unwrap().lambda1;
        assert!((a - b).abs() < 1e-8, "{name}: seeds disagree by {:.3e}", (a - b).abs());
    }
    println!("criterion 8 (seed independence): PASS");

    // axial closed form is scale-free in the bracket sense too
    assert!((axial::lambda1(1.0, 2.0) - axial::lambda1(0.5, 4.0)).abs() < 1e-12);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "battery took {elapsed:?}");
    println!("criterion 8 (structural invariants battery): PASS in {elapsed:?}");
}
