//! Least-squares recovery of functional form from discretely observed closed
//! contours, and standardization (translation/scale removal).

use crate::basis::{BasisSpec, CoefMatrix};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix2xX};

/// Ordered samples (t_i, x_i, y_i) of a closed contour on [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    params: Vec<f64>,
    points: Vec<[f64; 2]>,
}

impl DiscreteCurve {
    pub fn new(params: Vec<f64>, points: Vec<[f64; 2]>) -> Result<Self> {
        if params.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                got: points.len(),
            });
        }
        for (i, w) in params.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Parse {
                    line: i + 2,
                    msg: format!("parameters not strictly increasing: {} then {}", w[0], w[1]),
                });
            }
        }
        if let Some(&t) = params.first() {
            if t < 0.0 {
                return Err(Error::Domain { value: t, domain: "[0,1]" });
            }
        }
        if let Some(&t) = params.last() {
            if t > 1.0 {
                return Err(Error::Domain { value: t, domain: "[0,1]" });
            }
        }
        Ok(DiscreteCurve { params, points })
    }

    /// Points traversed in order, parametrized by cumulative index i/n.
    pub fn from_points_uniform(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        let params = (0..n).map(|i| i as f64 / n as f64).collect();
        DiscreteCurve::new(params, points)
    }

    /// Arc-length parametrization (closing segment included in total length).
    pub fn from_points_arclength(points: Vec<[f64; 2]>) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::NotEnoughSamples { needed: 2, got: n });
        }
        let seg = |a: &[f64; 2], b: &[f64; 2]| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let mut total = 0.0;
        for i in 0..n {
            total += seg(&points[i], &points[(i + 1) % n]);
        }
        if total == 0.0 {
            return Err(Error::DegenerateCurve);
        }
        let mut params = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            params.push(acc / total);
            acc += seg(&points[i], &points[(i + 1) % n]);
        }
        // guard against duplicate parameters from repeated points
        for w in params.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::DegenerateCurve);
            }
        }
        DiscreteCurve::new(params, points)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn reversed(&self) -> DiscreteCurve {
        // keep the first point first so the starting point is unchanged
        let mut pts = self.points.clone();
        pts[1..].reverse();
        DiscreteCurve {
            params: self.params.clone(),
            points: pts,
        }
    }
}

/// A fitted functional curve: constant coefficient c0 plus the 2 x M
/// coefficient matrix of the non-constant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCurve {
    c0: [f64; 2],
    coefs: CoefMatrix,
}

impl SmoothCurve {
    pub fn new(c0: [f64; 2], coefs: CoefMatrix) -> Self {
        SmoothCurve { c0, coefs }
    }

    pub fn c0(&self) -> [f64; 2] {
        self.c0
    }

    pub fn coefs(&self) -> &CoefMatrix {
        &self.coefs
    }

    pub fn basis_spec(&self) -> BasisSpec {
        self.coefs.basis_spec()
    }

    pub fn point_at(&self, t: f64) -> Result<[f64; 2]> {
        let psi = self.basis_spec().eval(t)?;
        let mut p = self.c0;
        for j in 0..self.coefs.size() {
            p[0] += self.coefs.get(0, j) * psi[j];
            p[1] += self.coefs.get(1, j) * psi[j];
        }
        Ok(p)
    }

    /// Pointwise evaluation c0 + coefs . psi(t) on a grid.
    pub fn evaluate(&self, grid: &[f64]) -> Result<DiscreteCurve> {
        let mut points = Vec::with_capacity(grid.len());
        for &t in grid {
            points.push(self.point_at(t)?);
        }
        DiscreteCurve::new(grid.to_vec(), points)
    }

    /// Split into (shape, T, rho): T = c0, rho = |coefs|_F, shape = coefs/rho.
    pub fn standardize(&self) -> Result<(StandardizedCurve, [f64; 2], f64)> {
        let rho = self.coefs.norm();
        if rho == 0.0 {
            return Err(Error::DegenerateCurve);
        }
        let shape = StandardizedCurve::new(self.coefs.scale(1.0 / rho))?;
        Ok((shape, self.c0, rho))
    }
}

/// Centered, unit H-norm curve: an element of the pre-shape sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedCurve {
    coefs: CoefMatrix,
}

impl StandardizedCurve {
    pub fn new(coefs: CoefMatrix) -> Result<Self> {
        let norm = coefs.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Model(format!(
                "standardized curve must have unit norm, got {norm}"
            )));
        }
        Ok(StandardizedCurve { coefs })
    }

    /// Normalize an arbitrary nonzero coefficient matrix.
    pub fn from_unnormalized(coefs: &CoefMatrix) -> Result<Self> {
        let norm = coefs.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateCurve);
        }
        Ok(StandardizedCurve {
            coefs: coefs.scale(1.0 / norm),
        })
    }

    pub fn coefs(&self) -> &CoefMatrix {
        &self.coefs
    }

    pub fn to_smooth(&self) -> SmoothCurve {
        SmoothCurve::new([0.0, 0.0], self.coefs.clone())
    }
}

/// Per-coordinate ordinary least squares of the observations against
/// (psi_0, psi_1, ..., psi_M).
///
/// A duplicated closed-curve endpoint (t=0 and t=1 with equal points) is
/// dropped before fitting.
pub fn fit_fourier(curve: &DiscreteCurve, spec: BasisSpec) -> Result<SmoothCurve> {
    let mut n = curve.len();
    let m = spec.size();
    let mut drop_last = false;
    if n >= 2 {
        let (t0, tn) = (curve.params[0], curve.params[n - 1]);
        if t0 == 0.0 && tn == 1.0 && curve.points[0] == curve.points[n - 1] {
            drop_last = true;
            n -= 1;
        }
    }
    if n < m + 1 {
        return Err(Error::NotEnoughSamples { needed: m + 1, got: n });
    }

    let mut design = DMatrix::zeros(n, m + 1);
    let mut rhs = DMatrix::zeros(n, 2);
    for i in 0..n {
        design[(i, 0)] = 1.0;
        let psi = spec.eval(curve.params[i])?;
        for j in 0..m {
            design[(i, j + 1)] = psi[j];
        }
        rhs[(i, 0)] = curve.points[i][0];
        rhs[(i, 1)] = curve.points[i][1];
    }
    let _ = drop_last;

    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(min_sv > max_sv * 1e-12) {
        return Err(Error::SingularFit);
    }
    let sol = svd.solve(&rhs, max_sv * 1e-14).map_err(|_| Error::SingularFit)?;

    let c0 = [sol[(0, 0)], sol[(0, 1)]];
    let mut coefs = Matrix2xX::zeros(m);
    for j in 0..m {
        coefs[(0, j)] = sol[(j + 1, 0)];
        coefs[(1, j)] = sol[(j + 1, 1)];
    }
    Ok(SmoothCurve::new(c0, CoefMatrix::new(coefs)?))
}

/// n equidistant points on [0,1] including both endpoints.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SQRT_2;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_smooth(rng: &mut impl Rng, m: usize) -> SmoothCurve {
        let row_x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let row_y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SmoothCurve::new(
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            CoefMatrix::from_rows(&row_x, &row_y).unwrap(),
        )
    }

    #[test]
    fn exact_recovery_of_in_span_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = BasisSpec::new(10).unwrap();
        for _ in 0..20 {
            let truth = random_smooth(&mut rng, 10);
            let grid = uniform_grid(101);
            let sampled = truth.evaluate(&grid).unwrap();
            let fitted = fit_fourier(&sampled, spec).unwrap();
            assert_abs_diff_eq!(fitted.c0()[0], truth.c0()[0], epsilon = 1e-8);
            assert_abs_diff_eq!(fitted.c0()[1], truth.c0()[1], epsilon = 1e-8);
            assert!((fitted.coefs().entries() - truth.coefs().entries()).norm() < 1e-8);
        }
    }

    #[test]
    fn evaluate_roundtrip_after_exact_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = BasisSpec::new(6).unwrap();
        let truth = random_smooth(&mut rng, 6);
        let grid = uniform_grid(51);
        let sampled = truth.evaluate(&grid).unwrap();
        let fitted = fit_fourier(&sampled, spec).unwrap();
        let resampled = fitted.evaluate(&grid).unwrap();
        for (a, b) in sampled.points().iter().zip(resampled.points()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-8);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-8);
        }
    }

    #[test]
    fn periodicity_at_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_smooth(&mut rng, 8);
        let p0 = c.point_at(0.0).unwrap();
        let p1 = c.point_at(1.0).unwrap();
        assert_abs_diff_eq!(p0[0], p1[0], epsilon = 1e-12);
        assert_abs_diff_eq!(p0[1], p1[1], epsilon = 1e-12);
    }

    #[test]
    fn constant_curve_evaluates_to_c0() {
        let spec = BasisSpec::new(4).unwrap();
        let c = SmoothCurve::new([2.5, -1.0], CoefMatrix::zeros(spec));
        let grid = uniform_grid(11);
        let pts = c.evaluate(&grid).unwrap();
        for p in pts.points() {
            assert_abs_diff_eq!(p[0], 2.5, epsilon = 1e-15);
            assert_abs_diff_eq!(p[1], -1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn evaluate_rejects_out_of_domain_grid() {
        let spec = BasisSpec::new(4).unwrap();
        let c = SmoothCurve::new([0.0, 0.0], CoefMatrix::zeros(spec));
        assert!(c.evaluate(&[0.0, 1.2]).is_err());
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let spec = BasisSpec::new(10).unwrap();
        let pts: Vec<[f64; 2]> = (0..5).map(|i| [i as f64, 0.0]).collect();
        let curve = DiscreteCurve::from_points_uniform(pts).unwrap();
        assert!(matches!(
            fit_fourier(&curve, spec),
            Err(Error::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn duplicate_endpoint_is_dropped() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = BasisSpec::new(4).unwrap();
        let truth = random_smooth(&mut rng, 4);
        let grid = uniform_grid(41); // includes both t=0 and t=1, equal points
        let sampled = truth.evaluate(&grid).unwrap();
        let fitted = fit_fourier(&sampled, spec).unwrap();
        assert!((fitted.coefs().entries() - truth.coefs().entries()).norm() < 1e-8);
    }

    /// T equals the integral of the curve computed by quadrature.
    #[test]
    fn translation_matches_quadrature_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_smooth(&mut rng, 8);
        let n = 10_000;
        let mut integral = [0.0, 0.0];
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let p = c.point_at(t).unwrap();
            integral[0] += p[0] / n as f64;
            integral[1] += p[1] / n as f64;
        }
        let (_, t_hat, _) = c.standardize().unwrap();
        assert_abs_diff_eq!(t_hat[0], integral[0], epsilon = 1e-8);
        assert_abs_diff_eq!(t_hat[1], integral[1], epsilon = 1e-8);
    }

    #[test]
    fn standardize_unit_norm_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_smooth(&mut rng, 8);
        let (shape, t, rho) = c.standardize().unwrap();
        assert_abs_diff_eq!(shape.coefs().norm(), 1.0, epsilon = 1e-12);
        let rebuilt = shape.coefs().scale(rho);
        assert!((rebuilt.entries() - c.coefs().entries()).norm() < 1e-12);
        assert_eq!(t, c.c0());
    }

    #[test]
    fn standardize_degenerate_curve_is_an_error() {
        let spec = BasisSpec::new(4).unwrap();
        let c = SmoothCurve::new([1.0, 1.0], CoefMatrix::zeros(spec));
        assert!(matches!(c.standardize(), Err(Error::DegenerateCurve)));
    }

    /// Scaling and translating a curve leaves its standardized shape unchanged.
    #[test]
    fn standardize_invariant_under_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let c = random_smooth(&mut rng, 8);
            let (shape, _, rho) = c.standardize().unwrap();
            let factor = rng.gen_range(0.1..5.0);
            let shifted = SmoothCurve::new(
                [c.c0()[0] + rng.gen_range(-3.0..3.0), c.c0()[1] + rng.gen_range(-3.0..3.0)],
                c.coefs().scale(factor),
            );
            let (shape2, _, rho2) = shifted.standardize().unwrap();
            assert!((shape.coefs().entries() - shape2.coefs().entries()).norm() < 1e-10);
            assert_abs_diff_eq!(rho2, rho * factor, epsilon = 1e-10 * rho.max(1.0));
        }
    }

    /// Heart-curve fit residual compared against a dense-grid projection oracle.
    #[test]
    fn heart_fit_matches_dense_projection_oracle() {
        let spec = BasisSpec::new(10).unwrap();
        let b = [16.0, 13.0, -5.0, -2.0, -1.0];
        let heart = |t: f64| -> [f64; 2] {
            let x = b[0] * (std::f64::consts::PI * (2.0 * t - 1.0)).sin().powi(3);
            let y: f64 = (1..=4)
                .map(|k| b[k] * (k as f64 * std::f64::consts::PI * (2.0 * t - 1.0)).cos())
                .sum();
            [x, y]
        };

        // oracle: project onto the basis by 1e5-point quadrature
        let n = 100_000;
        let mut oracle_c0 = [0.0, 0.0];
        let mut oracle = vec![[0.0; 2]; 10];
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let p = heart(t);
            let psi = spec.eval(t).unwrap();
            oracle_c0[0] += p[0] / n as f64;
            oracle_c0[1] += p[1] / n as f64;
            for j in 0..10 {
                oracle[j][0] += p[0] * psi[j] / n as f64;
                oracle[j][1] += p[1] * psi[j] / n as f64;
            }
        }

        // fit from 101 equidistant samples
        let grid = uniform_grid(101);
        let pts: Vec<[f64; 2]> = grid.iter().map(|&t| heart(t)).collect();
        let sampled = DiscreteCurve::new(grid.clone(), pts).unwrap();
        let fitted = fit_fourier(&sampled, spec).unwrap();

        // fitted residual RMSE on the sampling grid must not exceed the
        // oracle projection residual (plus numerical slack)
        let rmse = |c: &SmoothCurve| -> f64 {
            let mut acc = 0.0;
            for &t in &grid {
                let p = heart(t);
                let q = c.point_at(t).unwrap();
                acc += (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            }
            (acc / grid.len() as f64).sqrt()
        };
        let mut oracle_rows_x = [0.0; 10];
        let mut oracle_rows_y = [0.0; 10];
        for j in 0..10 {
            oracle_rows_x[j] = oracle[j][0];
            oracle_rows_y[j] = oracle[j][1];
        }
        let oracle_curve = SmoothCurve::new(
            oracle_c0,
            CoefMatrix::from_rows(&oracle_rows_x, &oracle_rows_y).unwrap(),
        );
        assert!(rmse(&fitted) <= rmse(&oracle_curve) + 1e-8);
        // the heart is exactly in the span of the M=10 basis
        assert!(rmse(&fitted) < 1e-10);
        // cross-check one analytic coefficient: sin^3 expands with -3/4 weight
        // on the first sine harmonic
        assert_abs_diff_eq!(
            fitted.coefs().get(0, 0),
            -3.0 * 16.0 / (4.0 * SQRT_2),
            epsilon = 1e-8
        );
    }
}
