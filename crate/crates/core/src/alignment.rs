//! Rotation/starting-point estimation against a template via the Procrustes
//! reformulation in coefficient space, plus the elastic pseudo-distance.

use crate::basis::{CoefMatrix, ReparamShift};
use crate::error::{Error, Result};
use crate::smoothing::{SmoothCurve, StandardizedCurve};
use std::f64::consts::PI;

/// The four deformation variables mapping a shape to an observed curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformation {
    pub translation: [f64; 2],
    pub rho: f64,
    pub theta: f64,
    pub delta: f64,
}

impl Deformation {
    pub fn new(translation: [f64; 2], rho: f64, theta: f64, delta: f64) -> Result<Self> {
        if rho <= 0.0 {
            return Err(Error::Domain { value: rho, domain: "(0,inf)" });
        }
        if !(0.0..=2.0 * PI).contains(&theta) {
            return Err(Error::Domain { value: theta, domain: "[0,2pi]" });
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Domain { value: delta, domain: "[0,1]" });
        }
        Ok(Deformation { translation, rho, theta, delta })
    }
}

/// Candidate values for the starting-point shift, strictly increasing in (0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    deltas: Vec<f64>,
}

impl CandidateGrid {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        for w in deltas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Domain { value: w[1], domain: "strictly increasing" });
            }
        }
        if deltas[0] <= 0.0 || *deltas.last().unwrap() > 1.0 {
            return Err(Error::Domain { value: deltas[0], domain: "(0,1]" });
        }
        Ok(CandidateGrid { deltas })
    }

    /// The dense grid {step*k : k = 1..floor(1/step)}; step 0.01 gives the
    /// default 100-point grid.
    pub fn from_step(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::Domain { value: step, domain: "(0,1]" });
        }
        let k_max = (1.0 / step).floor() as usize;
        CandidateGrid::new((1..=k_max).map(|k| k as f64 * step).collect())
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

impl Default for CandidateGrid {
    fn default() -> Self {
        CandidateGrid::from_step(0.01).expect("valid step")
    }
}

/// Outcome of aligning a standardized curve to a template.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    pub theta_hat: f64,
    pub delta_hat: f64,
    pub objective: f64,
    pub shape: StandardizedCurve,
}

/// The rotation angle minimizing |a - O_theta u|_F^2 and the minimal value.
///
/// With A = <a1,u1> + <a2,u2> and B = <a1,u2> - <a2,u1> the minimizer has
/// cos = A/r, sin = -B/r with r = sqrt(A^2+B^2), and the objective is
/// |a|^2 + |u|^2 - 2r.
pub fn procrustes_angle(a: &CoefMatrix, u: &CoefMatrix) -> Result<(f64, f64)> {
    a.check_size(u)?;
    let (big_a, big_b) = cross_terms(a, u);
    let r = big_a.hypot(big_b);
    if r == 0.0 {
        return Err(Error::AmbiguousAngle);
    }
    let theta = (-big_b).atan2(big_a).rem_euclid(2.0 * PI);
    let objective = (a.norm().powi(2) + u.norm().powi(2) - 2.0 * r).max(0.0);
    Ok((theta, objective))
}

fn cross_terms(a: &CoefMatrix, u: &CoefMatrix) -> (f64, f64) {
    let m = a.size();
    let mut big_a = 0.0;
    let mut big_b = 0.0;
    for j in 0..m {
        big_a += a.get(0, j) * u.get(0, j) + a.get(1, j) * u.get(1, j);
        big_b += a.get(0, j) * u.get(1, j) - a.get(1, j) * u.get(0, j);
    }
    (big_a, big_b)
}

/// Grid-search alignment: for each candidate delta the optimal angle is closed
/// form; the pair with the minimal objective wins (ties keep the smallest
/// delta).
pub fn align_to_template(
    x_star: &StandardizedCurve,
    mu: &StandardizedCurve,
    grid: &CandidateGrid,
) -> Result<AlignmentResult> {
    let alpha = x_star.coefs();
    let u = mu.coefs();
    alpha.check_size(u)?;

    let mut best: Option<(f64, f64, f64)> = None; // (objective, theta, delta)
    for &delta in grid.deltas() {
        let shift = ReparamShift::new(delta)?;
        let shifted = alpha.reparam(shift);
        let (theta, objective) = procrustes_angle(&shifted, u)?;
        let better = match best {
            None => true,
            Some((b, ..)) => objective < b,
        };
        if better {
            best = Some((objective, theta, delta));
        }
    }
    let (objective, theta_hat, delta_hat) = best.expect("grid is nonempty");
    let shape = recover_shape(x_star, theta_hat, delta_hat)?;
    Ok(AlignmentResult { theta_hat, delta_hat, objective, shape })
}

/// Try both the curve and its reflection, keep the better objective.
/// Returns the winning alignment and whether the reflection won.
pub fn align_with_reflection(
    x_star: &StandardizedCurve,
    mu: &StandardizedCurve,
    grid: &CandidateGrid,
) -> Result<(AlignmentResult, bool)> {
    let direct = align_to_template(x_star, mu, grid)?;
    let reflected_curve = StandardizedCurve::from_unnormalized(&x_star.coefs().rotate(0.0, true))?;
    let mirrored = align_to_template(&reflected_curve, mu, grid)?;
    if mirrored.objective < direct.objective {
        Ok((mirrored, true))
    } else {
        Ok((direct, false))
    }
}

/// Undo an estimated deformation: O_theta^T (X* o gamma_{1-delta}) computed in
/// coefficient space.
pub fn recover_shape(
    x_star: &StandardizedCurve,
    theta: f64,
    delta: f64,
) -> Result<StandardizedCurve> {
    let shift = ReparamShift::new(delta)?;
    let coefs = x_star.coefs().reparam(shift).rotate(-theta, false);
    StandardizedCurve::from_unnormalized(&coefs)
}

/// Apply the forward deformation X* = O_theta (shape o gamma_delta) in
/// coefficient space. Inverse of `recover_shape`.
pub fn apply_rotation_shift(shape: &StandardizedCurve, theta: f64, delta: f64) -> Result<StandardizedCurve> {
    let shift = ReparamShift::new(delta)?;
    let coefs = shape.coefs().warp(shift).rotate(theta, false);
    StandardizedCurve::from_unnormalized(&coefs)
}

/// Elastic pseudo-distance: min over the delta grid and the closed-form angle
/// of |f o gamma_delta - O_theta g|_H.
pub fn elastic_distance(
    f: &StandardizedCurve,
    g: &StandardizedCurve,
    grid: &CandidateGrid,
) -> Result<f64> {
    f.coefs().check_size(g.coefs())?;
    let mut best = f64::INFINITY;
    for &delta in grid.deltas() {
        let shift = ReparamShift::new(delta)?;
        let warped = f.coefs().warp(shift);
        let objective = match procrustes_angle(&warped, g.coefs()) {
            Ok((_, obj)) => obj,
            // orthogonal under all rotations: the objective is flat in theta
            Err(Error::AmbiguousAngle) => warped.norm().powi(2) + g.coefs().norm().powi(2),
            Err(e) => return Err(e),
        };
        if objective < best {
            best = objective;
        }
    }
    Ok(best.max(0.0).sqrt())
}

/// Standardize and align a fitted curve in one step, returning the estimated
/// deformation quadruple and the recovered shape.
pub fn estimate_deformation(
    curve: &SmoothCurve,
    mu: &StandardizedCurve,
    grid: &CandidateGrid,
) -> Result<(Deformation, StandardizedCurve)> {
    let (x_star, translation, rho) = curve.standardize()?;
    let result = align_to_template(&x_star, mu, grid)?;
    let def = Deformation::new(translation, rho, result.theta_hat, result.delta_hat)?;
    Ok((def, result.shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_shape(rng: &mut impl Rng, m: usize) -> StandardizedCurve {
        let row_x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let row_y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        StandardizedCurve::from_unnormalized(&CoefMatrix::from_rows(&row_x, &row_y).unwrap())
            .unwrap()
    }

    #[test]
    fn procrustes_identical_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_shape(&mut rng, 10);
        let (theta, obj) = procrustes_angle(a.coefs(), a.coefs()).unwrap();
        assert_abs_diff_eq!(theta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(obj, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn procrustes_recovers_constructed_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_shape(&mut rng, 10);
        let a = u.coefs().rotate(PI / 3.0, false);
        let (theta, obj) = procrustes_angle(&a, u.coefs()).unwrap();
        assert_abs_diff_eq!(theta, PI / 3.0, epsilon = 1e-12);
        assert!(obj < 1e-12);
    }

    /// Brute-force grid oracle: the closed-form angle is never beaten by any
    /// of 3600 grid angles.
    #[test]
    fn procrustes_beats_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = random_shape(&mut rng, 8);
            let u = random_shape(&mut rng, 8);
            let (_, obj) = procrustes_angle(a.coefs(), u.coefs()).unwrap();
            for k in 0..3600 {
                let theta = 2.0 * PI * k as f64 / 3600.0;
                let diff_norm = {
                    let rotated = u.coefs().rotate(theta, false);
                    (a.coefs().entries() - rotated.entries()).norm()
                };
                assert!(obj <= diff_norm * diff_norm + 1e-10);
            }
        }
    }

    #[test]
    fn procrustes_ambiguous_when_orthogonal() {
        // a lives purely in frequency 1, u purely in frequency 2
        let a = CoefMatrix::from_rows(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let u = CoefMatrix::from_rows(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(procrustes_angle(&a, &u), Err(Error::AmbiguousAngle)));
    }

    #[test]
    fn self_alignment_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mu = random_shape(&mut rng, 10);
        let grid = CandidateGrid::default();
        let res = align_to_template(&mu, &mu, &grid).unwrap();
        assert!(res.objective < 1e-12);
        // exact match sits at the identity shift, represented on this grid by 1.0
        assert_abs_diff_eq!(res.delta_hat, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.theta_hat.rem_euclid(2.0 * PI), 0.0, epsilon = 1e-8);
    }

    /// Forward-synthesis oracle: deform by a grid (theta0, delta0), realign,
    /// recover both parameters and the original shape.
    #[test]
    fn alignment_recovers_synthesized_deformation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = CandidateGrid::default();
        for _ in 0..25 {
            let mu = random_shape(&mut rng, 10);
            let delta0 = grid.deltas()[rng.gen_range(0..grid.len())];
            let theta0 = rng.gen_range(0.0..2.0 * PI);
            let x_star = apply_rotation_shift(&mu, theta0, delta0).unwrap();
            let res = align_to_template(&x_star, &mu, &grid).unwrap();
            assert!(res.objective < 1e-12, "objective {}", res.objective);
            assert_abs_diff_eq!(res.delta_hat, delta0, epsilon = 1e-8);
            assert_abs_diff_eq!(
                (res.theta_hat - theta0 + PI).rem_euclid(2.0 * PI) - PI,
                0.0,
                epsilon = 1e-8
            );
            assert!((res.shape.coefs().entries() - mu.coefs().entries()).norm() < 1e-10);
        }
    }

    #[test]
    fn recover_shape_identity_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let shape = random_shape(&mut rng, 10);
        let same = recover_shape(&shape, 0.0, 0.0).unwrap();
        assert!((same.coefs().entries() - shape.coefs().entries()).norm() < 1e-15);
        for _ in 0..20 {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let delta = rng.gen_range(0.0..1.0);
            let forward = apply_rotation_shift(&shape, theta, delta).unwrap();
            let back = recover_shape(&forward, theta, delta).unwrap();
            assert!((back.coefs().entries() - shape.coefs().entries()).norm() < 1e-10);
            assert_abs_diff_eq!(back.coefs().norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn elastic_distance_to_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_shape(&mut rng, 10);
        let grid = CandidateGrid::default();
        let d = elastic_distance(&f, &f, &grid).unwrap();
        assert!(d < 1e-10, "d = {d}");
    }

    #[test]
    fn elastic_distance_invariant_under_grid_deformation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = CandidateGrid::default();
        for _ in 0..10 {
            let f = random_shape(&mut rng, 10);
            let g = random_shape(&mut rng, 10);
            let d = elastic_distance(&f, &g, &grid).unwrap();
            let delta1 = grid.deltas()[rng.gen_range(0..grid.len())];
            let theta1 = rng.gen_range(0.0..2.0 * PI);
            let deformed = apply_rotation_shift(&f, theta1, delta1).unwrap();
            let d2 = elastic_distance(&deformed, &g, &grid).unwrap();
            // on-grid deformations are absorbed exactly
            assert_abs_diff_eq!(d, d2, epsilon = 1e-8);
        }
    }

    #[test]
    fn elastic_distance_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let grid = CandidateGrid::default();
        for _ in 0..10 {
            let f = random_shape(&mut rng, 10);
            let g = random_shape(&mut rng, 10);
            let dfg = elastic_distance(&f, &g, &grid).unwrap();
            let dgf = elastic_distance(&g, &f, &grid).unwrap();
            assert_abs_diff_eq!(dfg, dgf, epsilon = 1e-10);
        }
    }

    /// Refining the grid can only (weakly) improve the objective.
    #[test]
    fn objective_monotone_under_grid_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mu = random_shape(&mut rng, 10);
        let x = random_shape(&mut rng, 10);
        let mut prev = f64::INFINITY;
        for step in [0.1, 0.01, 0.001] {
            let grid = CandidateGrid::from_step(step).unwrap();
            let res = align_to_template(&x, &mu, &grid).unwrap();
            assert!(res.objective <= prev + 1e-12);
            prev = res.objective;
        }
    }

    #[test]
    fn reflection_flag_recovers_mirrored_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = CandidateGrid::default();
        let mu = random_shape(&mut rng, 10);
        let mirrored = StandardizedCurve::from_unnormalized(&mu.coefs().rotate(0.4, true)).unwrap();
        let (res, used_reflection) = align_with_reflection(&mirrored, &mu, &grid).unwrap();
        assert!(used_reflection);
        assert!(res.objective < 1e-12);
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert!(CandidateGrid::new(vec![]).is_err());
        assert!(CandidateGrid::new(vec![0.0, 0.5]).is_err());
        assert!(CandidateGrid::new(vec![0.5, 0.5]).is_err());
    }
}
