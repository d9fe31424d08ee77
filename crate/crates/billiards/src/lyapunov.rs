//! Largest-Lyapunov-exponent estimation from the front recursion, the
//! analytic bracket, an independent two-trajectory oracle, and deformation
//! studies (sweeps, derivatives, continuity modulus).

use crate::dynamics::{self, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::fronts::FrontTrack;
use crate::geometry::{orthonormal_complement, DeformationFamily, Vector};
use crate::orbits::{find_periodic_orbit_from, Coding, PeriodicOrbit};
use crate::scene::{Scene, SceneBounds};
use crate::tol;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Flights discarded before the running average starts. The flat initial
/// front relaxes to the invariant front geometrically, but a plain average
/// would keep an O(1/m) shadow of the transient; discarding a fixed window
/// makes the partial sums converge at the orbit's own geometric rate.
pub const BURN_IN: usize = 128;

/// Internal step for the per-bounce derivative stencils in alpha.
const PER_BOUNCE_STEP: f64 = 1e-5;

/// Where an exponent estimate starts: an explicit phase point, or a coding
/// whose periodic orbit supplies an escape-proof trajectory.
#[derive(Debug, Clone)]
pub enum Start {
    State(PhaseState),
    Coding(Coding),
}

/// One accumulated bounce of a Lyapunov series.
#[derive(Debug, Clone)]
pub struct BounceRow {
    /// 1-based index within the averaged window.
    pub bounce: usize,
    pub obstacle: usize,
    pub d: f64,
    pub cos_phi: f64,
    pub ell: f64,
    pub log_factor: f64,
    /// Running average lambda_1^(j) up to this bounce.
    pub partial: f64,
}

/// Per-bounce logs and partial sums of the exponent estimate.
#[derive(Debug, Clone)]
pub struct LyapunovSeries {
    pub rows: Vec<BounceRow>,
    pub lambda1: f64,
    pub m: usize,
    pub burn_in: usize,
}

fn w_seed(dim: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

/// Builds the bounce records an estimator consumes. A coding start is
/// unrolled from its periodic orbit; iterating the map instead would fall
/// off the unstable orbit within a few dozen bounces in double precision.
pub fn trajectory_for(scene: &Scene, start: &Start, bounces: usize) -> Result<Trajectory> {
    match start {
        Start::State(state) => {
            let traj = dynamics::trace(scene, state, bounces)?;
            if traj.bounces() < bounces {
                return Err(Error::Escape { bounce: traj.bounces() });
            }
            Ok(traj)
        }
        Start::Coding(coding) => {
            let orbit = find_periodic_orbit_from(scene, coding, tol::ORBIT_RESIDUAL, None)?;
            orbit.trajectory(scene, bounces)
        }
    }
}

/// Accumulates (1/m) sum of log(1 + d_j ell_j) over the m flights after the
/// burn-in window, propagating the front along the given records.
pub fn lambda1_from_trajectory(
    scene: &Scene,
    traj: &Trajectory,
    m: usize,
    seed: u64,
) -> Result<LyapunovSeries> {
    if m == 0 {
        return Err(Error::domain("the averaging window must contain bounces"));
    }
    let needed = BURN_IN + m + 1;
    if traj.bounces() < needed {
        return Err(Error::domain(format!(
            "trajectory too short: {} bounces, need {needed}",
            traj.bounces()
        )));
    }
    let seed_vec = w_seed(scene.dim, seed);
    let mut track = FrontTrack::new(scene, traj, &seed_vec)?;
    // flight 0 leaves the flat front with unit factor and is not counted
    track
        .advance()?
        .ok_or_else(|| Error::internal("trajectory vanished under the front track"))?;
    let mut rows = Vec::with_capacity(m);
    let mut sum = 0.0;
    for flight in 1..=BURN_IN + m {
        let exp = track
            .advance()?
            .ok_or_else(|| Error::internal("front track ended before the window"))?;
        if flight <= BURN_IN {
            continue;
        }
        let bounce = flight - BURN_IN;
        let log_factor = exp.factor.ln();
        sum += log_factor;
        rows.push(BounceRow {
            bounce,
            obstacle: exp.obstacle,
            d: exp.d,
            cos_phi: exp.cos_phi,
            ell: exp.ell,
            log_factor,
            partial: sum / bounce as f64,
        });
    }
    Ok(LyapunovSeries { lambda1: sum / m as f64, rows, m, burn_in: BURN_IN })
}

/// Largest-exponent estimate along a trajectory: the time average of
/// log(1 + d_j ell_j) over m bounces. Deterministic given the seed, which
/// fixes the tracked front direction.
pub fn estimate_lambda1(scene: &Scene, start: &Start, m: usize, seed: u64) -> Result<LyapunovSeries> {
    let traj = trajectory_for(scene, start, BURN_IN + m + 1)?;
    lambda1_from_trajectory(scene, &traj, m, seed)
}

/// Analytic bracket log(1 + d_min 2 kappa_min) <= lambda_1 <=
/// log(1 + d_max (1/d_min + 2 kappa_max / cos phi_max)).
pub fn lambda1_bracket(bounds: &SceneBounds) -> Result<(f64, f64)> {
    if !(bounds.d_min > 0.0 && bounds.d_max >= bounds.d_min) {
        return Err(Error::domain(format!(
            "flight-length bounds must satisfy 0 < d_min <= d_max, got [{}, {}]",
            bounds.d_min, bounds.d_max
        )));
    }
    if !(bounds.kappa_min > 0.0 && bounds.kappa_max >= bounds.kappa_min) {
        return Err(Error::domain("curvature bounds must be positive and ordered"));
    }
    if !(bounds.cos_phi_max > 0.0 && bounds.cos_phi_max <= 1.0) {
        return Err(Error::domain("cos phi_max must lie in (0, 1]"));
    }
    let lower = (1.0 + bounds.d_min * 2.0 * bounds.kappa_min).ln();
    let upper = (1.0 + bounds.d_max * bounds.eta_max()).ln();
    Ok((lower, upper))
}

fn phase_distance(qa: &Vector, va: &Vector, qb: &Vector, vb: &Vector) -> f64 {
    ((qa - qb).norm_squared() + (va - vb).norm_squared()).sqrt()
}

/// Independent estimate from a reference trajectory and a shadow offset by
/// eps in a random phase direction, renormalized after every bounce. Shares
/// only the stepping kernel with the front recursion.
pub fn benettin_oracle(scene: &Scene, start: &Start, m: usize, eps: f64, seed: u64) -> Result<f64> {
    if !(1e-10..=1e-6).contains(&eps) {
        return Err(Error::domain(format!("offset eps must lie in [1e-10, 1e-6], got {eps}")));
    }
    let traj = trajectory_for(scene, start, BURN_IN + m + 2)?;
    let mut attempt_eps = eps;
    let mut last_err = None;
    for _ in 0..4 {
        match benettin_run(scene, &traj, m, attempt_eps, seed) {
            Ok(v) => return Ok(v),
            Err(e @ Error::Oracle { .. }) => {
                last_err = Some(e);
                attempt_eps /= 10.0;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::internal("oracle retries exhausted")))
}

fn benettin_run(scene: &Scene, traj: &Trajectory, m: usize, eps: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let first = &traj.records[0];
    let obstacle = &scene.obstacles[first.obstacle];

    // offset the start along a random boundary tangent and a random
    // velocity rotation, eps/sqrt(2) each
    let nu0 = obstacle.outward_normal(&first.q)?;
    let draw = |rng: &mut ChaCha8Rng| {
        Vector::from_fn(scene.dim, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
    };
    let a = draw(&mut rng);
    let tangent = {
        let t = &a - &nu0 * a.dot(&nu0);
        let frame = orthonormal_complement(&nu0);
        if t.norm() < 1e-10 { frame.column(0).into_owned() } else { t.normalize() }
    };
    let b = draw(&mut rng);
    let vdir = {
        let t = &b - &first.v * b.dot(&first.v);
        let frame = orthonormal_complement(&first.v);
        if t.norm() < 1e-10 { frame.column(0).into_owned() } else { t.normalize() }
    };
    let delta = eps / 2.0_f64.sqrt();
    let q_shadow = obstacle.project(&(&first.q + &tangent * delta));
    let v_shadow = (&first.v + &vdir * delta).normalize();
    let mut shadow = PhaseState::new(scene, q_shadow, v_shadow, first.obstacle)
        .map_err(|e| Error::Oracle { bounce: 0, reason: format!("shadow start invalid: {e}") })?;
    let mut baseline = phase_distance(&shadow.q, &shadow.v, &first.q, &first.v);
    if baseline <= 0.0 {
        return Err(Error::Oracle { bounce: 0, reason: "degenerate shadow offset".into() });
    }

    let mut sum = 0.0;
    for bounce in 1..=BURN_IN + m {
        let step = match dynamics::billiard_step(scene, &shadow)? {
            Some(s) => s,
            None => {
                return Err(Error::Oracle { bounce, reason: "shadow escaped the scene".into() })
            }
        };
        let reference = &traj.records[bounce];
        if step.next.obstacle != reference.obstacle {
            return Err(Error::Oracle {
                bounce,
                reason: format!(
                    "shadow changed coding: hit {} instead of {}",
                    step.next.obstacle, reference.obstacle
                ),
            });
        }
        let sep = phase_distance(&step.next.q, &step.next.v, &reference.q, &reference.v);
        if sep <= 0.0 {
            return Err(Error::Oracle { bounce, reason: "shadow collapsed onto reference".into() });
        }
        if bounce > BURN_IN {
            sum += (sep / baseline).ln();
        }
        // renormalize the separation back to eps around the reference
        let scale = eps / sep;
        let q_new = scene.obstacles[reference.obstacle]
            .project(&(&reference.q + (&step.next.q - &reference.q) * scale));
        let v_new = (&reference.v + (&step.next.v - &reference.v) * scale).normalize();
        shadow = PhaseState::new(scene, q_new, v_new, reference.obstacle).map_err(|e| {
            Error::Oracle { bounce, reason: format!("renormalized shadow invalid: {e}") }
        })?;
        baseline = phase_distance(&shadow.q, &shadow.v, &reference.q, &reference.v);
        if baseline <= 0.0 {
            return Err(Error::Oracle { bounce, reason: "renormalization collapsed".into() });
        }
    }
    Ok(sum / m as f64)
}

/// One grid point of a deformation sweep. Solver trouble at a single alpha
/// is recorded, not fatal.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub alpha: f64,
    pub lambda1: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub fd_deriv: Option<f64>,
    pub f_m: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub m: usize,
    pub seed: u64,
}

struct AlphaEvaluation {
    lambda1: f64,
    series: LyapunovSeries,
    orbit: PeriodicOrbit,
    bounds: SceneBounds,
}

/// Solve, propagate, and bound one parameter value. Warm starts come from
/// the base orbit so grid points stay independent tasks.
fn evaluate_alpha(
    family: &DeformationFamily,
    coding: &Coding,
    alpha: f64,
    m: usize,
    seed: u64,
    warm: Option<&[Vector]>,
) -> Result<AlphaEvaluation> {
    let scene = family.scene_at(alpha)?;
    let orbit = find_periodic_orbit_from(&scene, coding, tol::ORBIT_RESIDUAL, warm)?;
    let traj = orbit.trajectory(&scene, BURN_IN + m + 1)?;
    let series = lambda1_from_trajectory(&scene, &traj, m, seed)?;
    let bounds = scene.geometric_bounds(Some(&traj));
    Ok(AlphaEvaluation { lambda1: series.lambda1, series, orbit, bounds })
}

/// Per-bounce (d_j, ell_j) pairs over the averaged window at one alpha.
fn window_pairs(
    family: &DeformationFamily,
    coding: &Coding,
    alpha: f64,
    m: usize,
    seed: u64,
    warm: Option<&[Vector]>,
) -> Result<Vec<(f64, f64)>> {
    let eval = evaluate_alpha(family, coding, alpha, m, seed, warm)?;
    Ok(eval.series.rows.iter().map(|r| (r.d, r.ell)).collect())
}

/// Per-bounce derivative estimator F_m = (1/m) sum df_j/dalpha with
/// f_j = log(1 + d_j ell_j), using difference stencils on the matched
/// per-bounce quantities. One-sided at the interval ends.
pub fn f_m_at(
    family: &DeformationFamily,
    coding: &Coding,
    alpha: f64,
    m: usize,
    seed: u64,
    warm: Option<&[Vector]>,
    step: f64,
) -> Result<f64> {
    let b = family.alpha_max;
    if step <= 0.0 || 2.0 * step > b {
        return Err(Error::domain("per-bounce derivative step does not fit the interval"));
    }
    let here = window_pairs(family, coding, alpha, m, seed, warm)?;
    // (d_dot, ell_dot) per bounce from a second-order stencil
    let derivs: Vec<(f64, f64)> = if alpha + step <= b && alpha - step >= 0.0 {
        let plus = window_pairs(family, coding, alpha + step, m, seed, warm)?;
        let minus = window_pairs(family, coding, alpha - step, m, seed, warm)?;
        plus.iter()
            .zip(&minus)
            .map(|(p, mi)| ((p.0 - mi.0) / (2.0 * step), (p.1 - mi.1) / (2.0 * step)))
            .collect()
    } else if alpha + 2.0 * step <= b {
        let p1 = window_pairs(family, coding, alpha + step, m, seed, warm)?;
        let p2 = window_pairs(family, coding, alpha + 2.0 * step, m, seed, warm)?;
        here.iter()
            .zip(p1.iter().zip(&p2))
            .map(|(h, (a1, a2))| {
                (
                    (-3.0 * h.0 + 4.0 * a1.0 - a2.0) / (2.0 * step),
                    (-3.0 * h.1 + 4.0 * a1.1 - a2.1) / (2.0 * step),
                )
            })
            .collect()
    } else {
        let m1 = window_pairs(family, coding, alpha - step, m, seed, warm)?;
        let m2 = window_pairs(family, coding, alpha - 2.0 * step, m, seed, warm)?;
        here.iter()
            .zip(m1.iter().zip(&m2))
            .map(|(h, (a1, a2))| {
                (
                    (3.0 * h.0 - 4.0 * a1.0 + a2.0) / (2.0 * step),
                    (3.0 * h.1 - 4.0 * a1.1 + a2.1) / (2.0 * step),
                )
            })
            .collect()
    };
    let mut sum = 0.0;
    for ((d, ell), (d_dot, ell_dot)) in here.iter().zip(&derivs) {
        sum += (d_dot * ell + d * ell_dot) / (1.0 + d * ell);
    }
    Ok(sum / here.len() as f64)
}

/// Re-solves the orbit and the exponent on every grid point, with bracket
/// bounds from that point's own trajectory, grid finite differences of
/// lambda_1, and the per-bounce derivative column.
pub fn sweep_alpha(
    family: &DeformationFamily,
    coding: &Coding,
    alphas: &[f64],
    m: usize,
    seed: u64,
) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::domain("sweep grid is empty"));
    }
    for &a in alphas {
        if !(0.0..=family.alpha_max).contains(&a) {
            return Err(Error::domain(format!("grid point {a} outside [0, {}]", family.alpha_max)));
        }
    }
    let base = evaluate_alpha(family, coding, 0.0, m, seed, None);
    let warm_points = base.as_ref().ok().map(|e| e.orbit.points.clone());
    let fm_step = PER_BOUNCE_STEP.min(family.alpha_max / 4.0);

    let mut entries: Vec<SweepEntry> = alphas
        .par_iter()
        .map(|&alpha| {
            let result = if alpha == 0.0 {
                match &base {
                    Ok(eval) => Ok((eval.lambda1, eval.bounds)),
                    Err(e) => Err(e.clone()),
                }
            } else {
                evaluate_alpha(family, coding, alpha, m, seed, warm_points.as_deref())
                    .map(|e| (e.lambda1, e.bounds))
            };
            match result {
                Ok((lambda1, bounds)) => {
                    let (lower, upper) = match lambda1_bracket(&bounds) {
                        Ok(pair) => (Some(pair.0), Some(pair.1)),
                        Err(_) => (None, None),
                    };
                    let f_m =
                        f_m_at(family, coding, alpha, m, seed, warm_points.as_deref(), fm_step)
                            .ok();
                    SweepEntry {
                        alpha,
                        lambda1: Some(lambda1),
                        lower,
                        upper,
                        fd_deriv: None,
                        f_m,
                        error: None,
                    }
                }
                Err(e) => SweepEntry {
                    alpha,
                    lambda1: None,
                    lower: None,
                    upper: None,
                    fd_deriv: None,
                    f_m: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    // central differences of lambda_1 across the grid, one-sided at the ends
    let lambdas: Vec<Option<(f64, f64)>> =
        entries.iter().map(|e| e.lambda1.map(|l| (e.alpha, l))).collect();
    for i in 0..entries.len() {
        let left = if i > 0 { lambdas[i - 1] } else { None };
        let right = if i + 1 < entries.len() { lambdas[i + 1] } else { None };
        let here = lambdas[i];
        entries[i].fd_deriv = match (left, here, right) {
            (Some((a0, l0)), _, Some((a2, l2))) if a2 > a0 => Some((l2 - l0) / (a2 - a0)),
            (None, Some((a1, l1)), Some((a2, l2))) if a2 > a1 => Some((l2 - l1) / (a2 - a1)),
            (Some((a0, l0)), Some((a1, l1)), None) if a1 > a0 => Some((l1 - l0) / (a1 - a0)),
            _ => None,
        };
    }
    Ok(SweepResult { entries, m, seed })
}

/// One row of the finite-difference table in a derivative study.
#[derive(Debug, Clone)]
pub struct FdRow {
    pub h: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone)]
pub struct DerivativeStudy {
    pub rows: Vec<FdRow>,
    /// Richardson (polynomial) extrapolation of the quotients to h = 0.
    pub richardson: f64,
    /// Per-bounce derivative estimator at alpha = 0.
    pub f_m: f64,
    pub fd_vs_fm: f64,
    /// False when the extrapolation tail is not monotone.
    pub converged: bool,
}

/// Polynomial extrapolation of (x_i, y_i) to x = 0 (Neville scheme).
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let mut t = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            t[i] = (xs[i] * t[i + 1] - xs[j] * t[i]) / (xs[i] - xs[j]);
        }
    }
    t[0]
}

/// Derivative of lambda_1 at alpha = 0 two ways: one-sided difference
/// quotients over the h grid with Richardson extrapolation, and the
/// per-bounce formula F_m.
pub fn derivative_study(
    family: &DeformationFamily,
    coding: &Coding,
    m: usize,
    hs: &[f64],
    seed: u64,
) -> Result<DerivativeStudy> {
    if hs.is_empty() {
        return Err(Error::domain("derivative study needs an h grid"));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("h grid must be strictly decreasing"));
    }
    let h_min = *hs.last().unwrap();
    if h_min < 1e-6 {
        return Err(Error::domain("smallest h must be at least 1e-6"));
    }
    if hs[0] > family.alpha_max {
        return Err(Error::domain("largest h exceeds the deformation interval"));
    }
    let base = evaluate_alpha(family, coding, 0.0, m, seed, None)?;
    let warm = Some(base.orbit.points.as_slice());
    let rows: Vec<FdRow> = hs
        .par_iter()
        .map(|&h| {
            let eval = evaluate_alpha(family, coding, h, m, seed, warm)?;
            Ok(FdRow { h, quotient: (eval.lambda1 - base.lambda1) / h })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.quotient).collect();
    let richardson = extrapolate_to_zero(&xs, &ys);
    let f_m = f_m_at(family, coding, 0.0, m, seed, warm, (h_min / 2.0).max(5e-7))?;
    let errs: Vec<f64> = rows.iter().map(|r| (r.quotient - richardson).abs()).collect();
    let converged = errs.windows(2).all(|w| w[1] <= w[0] * 1.05 + 1e-12);
    Ok(DerivativeStudy { rows, richardson, f_m, fd_vs_fm: (richardson - f_m).abs(), converged })
}

/// Empirical Lipschitz estimate max |lambda_1(alpha) - lambda_1(0)| / alpha
/// over the sweep grid.
pub fn continuity_modulus(sweep: &SweepResult) -> Result<f64> {
    let valid: Vec<(f64, f64)> = sweep
        .entries
        .iter()
        .filter_map(|e| e.lambda1.map(|l| (e.alpha, l)))
        .collect();
    if valid.len() < 3 {
        return Err(Error::domain("continuity modulus needs at least three valid grid points"));
    }
    let Some(&(_, lambda0)) = valid.iter().find(|(a, _)| *a == 0.0) else {
        return Err(Error::domain("continuity modulus needs the alpha = 0 grid point"));
    };
    Ok(valid
        .iter()
        .filter(|(a, _)| *a > 0.0)
        .map(|(a, l)| (l - lambda0).abs() / a)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{self, axial};
    use approx::assert_relative_eq;

    fn coding01() -> Coding {
        Coding::new(vec![0, 1]).unwrap()
    }

    fn coding012() -> Coding {
        Coding::new(vec![0, 1, 2]).unwrap()
    }

    #[test]
    fn two_sphere_exponent_hits_closed_form() {
        let scene = presets::two_spheres();
        let series = estimate_lambda1(&scene, &Start::Coding(coding01()), 200, 7).unwrap();
        let expected = (3.0 + 2.0 * 2.0_f64.sqrt()).ln();
        assert!((series.lambda1 - expected).abs() < 1e-9, "{}", series.lambda1);
        assert!(series.lambda1 > 0.0);
        assert_eq!(series.rows.len(), 200);
    }

    #[test]
    fn scaled_scene_matches_its_own_quadratic() {
        // radius 2, gap 4: same exponent by scale covariance
        let scene = presets::two_spheres_scaled(2.0);
        let series = estimate_lambda1(&scene, &Start::Coding(coding01()), 200, 7).unwrap();
        assert!((series.lambda1 - axial::lambda1(0.5, 4.0)).abs() < 1e-9);
        assert!((series.lambda1 - axial::lambda1(1.0, 2.0)).abs() < 1e-10);
    }

    #[test]
    fn exponent_is_dimension_independent_for_axial_orbit() {
        for n in [2usize, 4, 6] {
            let scene = presets::two_spheres_nd(n);
            let series = estimate_lambda1(&scene, &Start::Coding(coding01()), 150, 3).unwrap();
            assert!(
                (series.lambda1 - axial::lambda1(1.0, 2.0)).abs() < 1e-9,
                "n = {n}: {}",
                series.lambda1
            );
        }
    }

    #[test]
    fn reflected_coding_gives_equal_exponent() {
        let scene = presets::three_spheres_equilateral();
        let a = estimate_lambda1(&scene, &Start::Coding(coding012()), 300, 5).unwrap();
        let b =
            estimate_lambda1(&scene, &Start::Coding(Coding::new(vec![0, 2, 1]).unwrap()), 300, 5)
                .unwrap();
        assert!((a.lambda1 - b.lambda1).abs() < 1e-11);
    }

    #[test]
    fn bracket_for_two_sphere_scene() {
        let scene = presets::two_spheres();
        let bounds = scene.geometric_bounds(None);
        let (lower, upper) = lambda1_bracket(&bounds).unwrap();
        assert_relative_eq!(lower, 5.0_f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(upper, 6.0_f64.ln(), epsilon = 1e-12);
        let lambda = axial::lambda1(1.0, 2.0);
        assert!(lower <= lambda && lambda <= upper);
    }

    #[test]
    fn bracket_is_strictly_ordered_and_rejects_degenerate_input() {
        let scene = presets::two_spheres();
        let mut bounds = scene.geometric_bounds(None);
        let (lower, upper) = lambda1_bracket(&bounds).unwrap();
        assert!(lower < upper);
        bounds.d_min = 0.0;
        assert!(matches!(lambda1_bracket(&bounds), Err(Error::Domain(_))));
    }

    #[test]
    fn seed_only_changes_transient() {
        let scene = presets::three_spheres_equilateral();
        let a = estimate_lambda1(&scene, &Start::Coding(coding012()), 500, 1).unwrap();
        let b = estimate_lambda1(&scene, &Start::Coding(coding012()), 500, 2).unwrap();
        assert!((a.lambda1 - b.lambda1).abs() < 1e-8);
    }

    #[test]
    fn partial_sums_have_decreasing_cauchy_tail() {
        let scene = presets::three_spheres_equilateral();
        let series = estimate_lambda1(&scene, &Start::Coding(coding012()), 800, 5).unwrap();
        let at = |m: usize| series.rows[m - 1].partial;
        let d1 = (at(200) - at(100)).abs();
        let d2 = (at(400) - at(200)).abs();
        let d3 = (at(800) - at(400)).abs();
        assert!(d2 <= d1 + 1e-12);
        assert!(d3 <= d2 + 1e-12);
    }

    #[test]
    fn scale_covariance_of_the_exponent() {
        let base = estimate_lambda1(
            &presets::two_spheres(),
            &Start::Coding(coding01()),
            300,
            11,
        )
        .unwrap();
        for s in [0.5, 3.0, 10.0] {
            let scaled = estimate_lambda1(
                &presets::two_spheres_scaled(s),
                &Start::Coding(coding01()),
                300,
                11,
            )
            .unwrap();
            assert!(
                (base.lambda1 - scaled.lambda1).abs() < 1e-10,
                "scale {s}: {} vs {}",
                base.lambda1,
                scaled.lambda1
            );
        }
    }

    #[test]
    fn benettin_agrees_with_front_recursion() {
        let scene = presets::two_spheres();
        let series = estimate_lambda1(&scene, &Start::Coding(coding01()), 1000, 9).unwrap();
        let oracle = benettin_oracle(&scene, &Start::Coding(coding01()), 1000, 1e-8, 9).unwrap();
        assert!(
            (series.lambda1 - oracle).abs() / series.lambda1 < 1e-3,
            "front {} oracle {oracle}",
            series.lambda1
        );
    }

    #[test]
    fn benettin_rejects_oversized_offset() {
        let scene = presets::two_spheres();
        assert!(matches!(
            benettin_oracle(&scene, &Start::Coding(coding01()), 100, 1e-3, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn escape_propagates_bounce_index() {
        let scene = presets::two_spheres();
        let q = Vector::from_vec(vec![-2.0, 0.0, 1.0]);
        let v = Vector::from_vec(vec![0.0, 0.0, 1.0]);
        let state = PhaseState::new(&scene, q, v, 0).unwrap();
        match estimate_lambda1(&scene, &Start::State(state), 100, 1) {
            Err(Error::Escape { bounce }) => assert!(bounce < 10),
            other => panic!("expected escape, got {other:?}"),
        }
    }

    fn radius_family_lambda(alpha: f64) -> f64 {
        let d = 3.0 - 2.0 * alpha;
        let kappa = 1.0 / (1.0 + alpha);
        axial::lambda1(kappa, d)
    }

    /// d lambda / d alpha for the radius family, by the chain rule through
    /// k = kappa + sqrt(kappa^2 + 2 kappa / d).
    fn radius_family_dlambda(alpha: f64) -> f64 {
        let d = 3.0 - 2.0 * alpha;
        let kappa = 1.0 / (1.0 + alpha);
        let d_dot = -2.0;
        let kappa_dot = -1.0 / ((1.0 + alpha) * (1.0 + alpha));
        let s = (kappa * kappa + 2.0 * kappa / d).sqrt();
        let k = kappa + s;
        let dk_dkappa = 1.0 + (kappa + 1.0 / d) / s;
        let dk_dd = -kappa / (d * d * s);
        let k_dot = dk_dkappa * kappa_dot + dk_dd * d_dot;
        (d_dot * k + d * k_dot) / (1.0 + d * k)
    }

    #[test]
    fn sweep_matches_per_alpha_closed_form() {
        let family = presets::radius_family();
        let alphas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.01).collect();
        let sweep = sweep_alpha(&family, &coding01(), &alphas, 200, 13).unwrap();
        for entry in &sweep.entries {
            let lambda = entry.lambda1.expect("every alpha solves");
            let expected = radius_family_lambda(entry.alpha);
            assert!(
                (lambda - expected).abs() < 1e-9,
                "alpha {}: {lambda} vs {expected}",
                entry.alpha
            );
            let (lo, hi) = (entry.lower.unwrap(), entry.upper.unwrap());
            assert!(lo <= lambda && lambda <= hi);
        }
    }

    #[test]
    fn sweep_alpha_zero_is_bit_identical_to_base_run() {
        let family = presets::radius_family();
        let base = estimate_lambda1(&family.base, &Start::Coding(coding01()), 200, 13).unwrap();
        let sweep = sweep_alpha(&family, &coding01(), &[0.0, 0.05, 0.1], 200, 13).unwrap();
        assert_eq!(sweep.entries[0].lambda1.unwrap().to_bits(), base.lambda1.to_bits());
    }

    #[test]
    fn translation_family_is_strictly_increasing() {
        let family = presets::translation_family();
        let alphas: Vec<f64> = (0..=8).map(|i| i as f64 * 0.01).collect();
        let sweep = sweep_alpha(&family, &coding01(), &alphas, 200, 3).unwrap();
        let lambdas: Vec<f64> = sweep.entries.iter().map(|e| e.lambda1.unwrap()).collect();
        for w in lambdas.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn derivative_study_matches_analytic_derivative() {
        let family = presets::radius_family();
        let study =
            derivative_study(&family, &coding01(), 300, &[1e-3, 5e-4, 2.5e-4], 17).unwrap();
        let analytic = radius_family_dlambda(0.0);
        assert!(
            (study.richardson - analytic).abs() < 1e-6,
            "richardson {} vs analytic {analytic}",
            study.richardson
        );
        assert!(study.fd_vs_fm < 1e-4);
        assert!(study.converged);
    }

    #[test]
    fn constant_family_has_zero_derivative_and_flat_sweep() {
        let family = presets::constant_family();
        let study = derivative_study(&family, &coding01(), 200, &[1e-3, 5e-4, 2.5e-4], 5).unwrap();
        assert!(study.f_m.abs() < 1e-13);
        assert!(study.richardson.abs() < 1e-13);
        let sweep = sweep_alpha(&family, &coding01(), &[0.0, 0.05, 0.1], 200, 5).unwrap();
        let l0 = sweep.entries[0].lambda1.unwrap();
        for e in &sweep.entries {
            assert_eq!(e.lambda1.unwrap().to_bits(), l0.to_bits());
        }
    }

    #[test]
    fn translation_family_fd_vs_fm() {
        let family = presets::translation_family();
        let study = derivative_study(&family, &coding01(), 500, &[4e-4, 2e-4, 1e-4], 3).unwrap();
        assert!(study.fd_vs_fm < 1e-4, "|FD - F_m| = {}", study.fd_vs_fm);
    }

    #[test]
    fn continuity_modulus_behaviour() {
        let constant = sweep_alpha(
            &presets::constant_family(),
            &coding01(),
            &[0.0, 0.005, 0.01],
            200,
            5,
        )
        .unwrap();
        assert!(continuity_modulus(&constant).unwrap() < 1e-13);

        let family = presets::radius_family();
        let alphas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.001).collect();
        let sweep = sweep_alpha(&family, &coding01(), &alphas, 500, 5).unwrap();
        let c = continuity_modulus(&sweep).unwrap();
        let slope = radius_family_dlambda(0.0).abs();
        assert!((c - slope).abs() / slope < 0.1, "C {c} vs |slope| {slope}");

        let sweep_double = sweep_alpha(&family, &coding01(), &alphas, 1000, 5).unwrap();
        let c2 = continuity_modulus(&sweep_double).unwrap();
        assert!((c2 - c).abs() / c < 0.2);
    }
}
