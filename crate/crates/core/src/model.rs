//! Joint-PCA generative model: curves are mapped to a mixed variable Z
//! (scaled shape coefficients plus a 4-vector of transformed deformation
//! parameters), each block gets its own PCA, and the concatenated scores
//! follow a joint Gaussian law that can be sampled to generate new curves.

use crate::alignment::{elastic_distance, CandidateGrid, Deformation};
use crate::basis::{CoefMatrix, ReparamShift};
use crate::error::{Error, Result};
use crate::smoothing::{SmoothCurve, StandardizedCurve};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

const DELTA_EPS: f64 = 1e-9;

/// The mixed variable: scaled shape coefficients and the tangent-transformed
/// deformation 4-vector (shift, angle, translation).
#[derive(Debug, Clone, PartialEq)]
pub struct ZRecord {
    pub z1: CoefMatrix,
    pub z2: [f64; 4],
}

/// Z = G1(X): z1 = rho * shape, z2 = (tan(pi/2 (delta-1/2)),
/// tan(theta/8 - pi/4), T1, T2).
///
/// delta on the boundary would send the first entry to +-infinity; it is
/// clamped into (0,1) with a warning instead (grid-estimated deltas can land
/// exactly on 1).
pub fn build_z(shape: &StandardizedCurve, def: &Deformation) -> ZRecord {
    let mut delta = def.delta;
    if delta < DELTA_EPS || delta > 1.0 - DELTA_EPS {
        log::warn!("delta {delta} clamped away from the boundary for the tangent transform");
        delta = delta.clamp(DELTA_EPS, 1.0 - DELTA_EPS);
    }
    let z2 = [
        (PI / 2.0 * (delta - 0.5)).tan(),
        (def.theta / 8.0 - PI / 4.0).tan(),
        def.translation[0],
        def.translation[1],
    ];
    ZRecord {
        z1: shape.coefs().scale(def.rho),
        z2,
    }
}

/// X = G1^{-1}(Z) = O_theta (z1 o gamma_delta) + T in coefficient space.
///
/// delta = (2/pi) atan(z21) + 1/2 (the algebraic inverse of the forward
/// tangent transform), theta = 8 atan(z22) + 2pi reduced mod 2pi. Sampled
/// z21 values outside the image of the forward transform put delta outside
/// [0,1]; the warp is 1-periodic in delta, so reducing mod 1 is exact.
pub fn invert_z(z: &ZRecord) -> SmoothCurve {
    let delta = ((2.0 / PI) * z.z2[0].atan() + 0.5).rem_euclid(1.0);
    let theta = (8.0 * z.z2[1].atan() + 2.0 * PI).rem_euclid(2.0 * PI);
    let shift = ReparamShift::new(delta).expect("delta reduced into [0,1)");
    let coefs = z.z1.warp(shift).rotate(theta, false);
    SmoothCurve::new([z.z2[2], z.z2[3]], coefs)
}

/// One PCA block: mean, orthonormal components (retained columns only), the
/// full nonincreasing eigenvalue sequence, and the retained count.
#[derive(Debug, Clone)]
pub struct PcaModel {
    mean: DVector<f64>,
    components: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    retained: usize,
}

impl PcaModel {
    pub fn fit(rows: &[DVector<f64>], var_threshold: f64) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::NotEnoughSamples { needed: 2, got: n });
        }
        if !(var_threshold > 0.0 && var_threshold <= 1.0) {
            return Err(Error::Domain { value: var_threshold, domain: "(0,1]" });
        }
        let dim = rows[0].len();
        let mut mean = DVector::zeros(dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            mean += r;
        }
        mean /= n as f64;

        let mut cov = DMatrix::zeros(dim, dim);
        for r in rows {
            let c = r - &mean;
            cov.syger(1.0 / (n as f64 - 1.0), &c, &c, 1.0);
        }
        // syger fills the lower triangle; mirror it
        for i in 0..dim {
            for j in (i + 1)..dim {
                cov[(i, j)] = cov[(j, i)];
            }
        }

        let eig = cov.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let eigenvalues: Vec<f64> = order
            .iter()
            .map(|&i| eig.eigenvalues[i].max(0.0))
            .collect();

        let total: f64 = eigenvalues.iter().sum();
        let retained = if total <= 0.0 {
            0
        } else {
            let mut cum = 0.0;
            let mut k = eigenvalues.len();
            for (i, ev) in eigenvalues.iter().enumerate() {
                cum += ev;
                if cum >= var_threshold * total * (1.0 - 1e-12) {
                    k = i + 1;
                    break;
                }
            }
            k
        };

        let mut components = DMatrix::zeros(dim, retained);
        for (col, &i) in order.iter().take(retained).enumerate() {
            components.set_column(col, &eig.eigenvectors.column(i));
        }
        Ok(PcaModel { mean, components, eigenvalues, retained })
    }

    pub fn from_parts(
        mean: DVector<f64>,
        components: DMatrix<f64>,
        eigenvalues: Vec<f64>,
        retained: usize,
    ) -> Result<Self> {
        if components.ncols() != retained || components.nrows() != mean.len() {
            return Err(Error::Model("inconsistent PCA dimensions".into()));
        }
        let gram = components.transpose() * &components;
        if (gram - DMatrix::<f64>::identity(retained, retained)).norm() > 1e-8 {
            return Err(Error::Model("PCA components are not orthonormal".into()));
        }
        for w in eigenvalues.windows(2) {
            if w[1] > w[0] + 1e-12 {
                return Err(Error::Model("PCA eigenvalues are not nonincreasing".into()));
            }
        }
        Ok(PcaModel { mean, components, eigenvalues, retained })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn retained(&self) -> usize {
        self.retained
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Retained eigenvalues only.
    pub fn retained_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.retained]
    }

    /// Fraction of total variance carried by each component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.eigenvalues.len()];
        }
        self.eigenvalues.iter().map(|ev| ev / total).collect()
    }

    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.components.transpose() * (x - &self.mean))
    }

    pub fn reconstruct(&self, scores: &DVector<f64>) -> Result<DVector<f64>> {
        if scores.len() != self.retained {
            return Err(Error::DimensionMismatch { expected: self.retained, got: scores.len() });
        }
        Ok(&self.mean + &self.components * scores)
    }
}

/// Concatenated shape-block and deformation-block scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    xi: Vec<f64>,
    split: usize,
}

impl ScoreVector {
    pub fn new(xi: Vec<f64>, split: usize) -> Result<Self> {
        if split > xi.len() {
            return Err(Error::DimensionMismatch { expected: xi.len(), got: split });
        }
        Ok(ScoreVector { xi, split })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn shape_scores(&self) -> &[f64] {
        &self.xi[..self.split]
    }

    pub fn deformation_scores(&self) -> &[f64] {
        &self.xi[self.split..]
    }
}

/// The fitted joint model: one PCA per Z block and the empirical covariance
/// of the concatenated scores.
#[derive(Debug, Clone)]
pub struct JointGaussianModel {
    pca1: PcaModel,
    pca2: PcaModel,
    sigma: DMatrix<f64>,
    basis_size: usize,
    var_threshold: f64,
}

impl JointGaussianModel {
    pub fn from_parts(
        pca1: PcaModel,
        pca2: PcaModel,
        sigma: DMatrix<f64>,
        basis_size: usize,
        var_threshold: f64,
    ) -> Result<Self> {
        let k = pca1.retained() + pca2.retained();
        if sigma.nrows() != k || sigma.ncols() != k {
            return Err(Error::Model("score covariance has wrong dimensions".into()));
        }
        if (&sigma - sigma.transpose()).norm() > 1e-10 * (1.0 + sigma.norm()) {
            return Err(Error::Model("score covariance is not symmetric".into()));
        }
        if pca1.dim() != 2 * basis_size || pca2.dim() != 4 {
            return Err(Error::Model("PCA blocks inconsistent with basis size".into()));
        }
        Ok(JointGaussianModel { pca1, pca2, sigma, basis_size, var_threshold })
    }

    pub fn pca1(&self) -> &PcaModel {
        &self.pca1
    }

    pub fn pca2(&self) -> &PcaModel {
        &self.pca2
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn var_threshold(&self) -> f64 {
        self.var_threshold
    }

    pub fn retained(&self) -> (usize, usize) {
        (self.pca1.retained(), self.pca2.retained())
    }

    /// The curve at xi = 0 (the mean Z record mapped back to a curve).
    pub fn mean_curve(&self) -> SmoothCurve {
        let z = self.reconstruct_z(&ScoreVector {
            xi: vec![0.0; self.pca1.retained() + self.pca2.retained()],
            split: self.pca1.retained(),
        })
        .expect("zero scores always reconstruct");
        invert_z(&z)
    }

    pub fn project(&self, z: &ZRecord) -> Result<ScoreVector> {
        if z.z1.size() != self.basis_size {
            return Err(Error::DimensionMismatch {
                expected: self.basis_size,
                got: z.z1.size(),
            });
        }
        let xi1 = self.pca1.project(&DVector::from_vec(z.z1.to_flat()))?;
        let xi2 = self.pca2.project(&DVector::from_vec(z.z2.to_vec()))?;
        let mut xi = xi1.iter().copied().collect::<Vec<_>>();
        xi.extend(xi2.iter().copied());
        Ok(ScoreVector { xi, split: self.pca1.retained() })
    }

    /// G2^{-1}: scores back to a Z record.
    pub fn reconstruct_z(&self, scores: &ScoreVector) -> Result<ZRecord> {
        let xi1 = DVector::from_vec(scores.shape_scores().to_vec());
        let xi2 = DVector::from_vec(scores.deformation_scores().to_vec());
        let z1_flat = self.pca1.reconstruct(&xi1)?;
        let z2 = self.pca2.reconstruct(&xi2)?;
        Ok(ZRecord {
            z1: CoefMatrix::from_flat(z1_flat.as_slice())?,
            z2: [z2[0], z2[1], z2[2], z2[3]],
        })
    }
}

/// Fit both PCA blocks and the joint score covariance (divisor n-1).
pub fn fit_joint_model(zs: &[ZRecord], var_threshold: f64) -> Result<JointGaussianModel> {
    let n = zs.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: n });
    }
    let m = zs[0].z1.size();
    for z in zs {
        if z.z1.size() != m {
            return Err(Error::DimensionMismatch { expected: m, got: z.z1.size() });
        }
    }
    let rows1: Vec<DVector<f64>> = zs.iter().map(|z| DVector::from_vec(z.z1.to_flat())).collect();
    let rows2: Vec<DVector<f64>> = zs.iter().map(|z| DVector::from_vec(z.z2.to_vec())).collect();
    let pca1 = PcaModel::fit(&rows1, var_threshold)?;
    let pca2 = PcaModel::fit(&rows2, var_threshold)?;

    let k = pca1.retained() + pca2.retained();
    let mut scores = DMatrix::zeros(n, k);
    for i in 0..n {
        let xi1 = pca1.project(&rows1[i])?;
        let xi2 = pca2.project(&rows2[i])?;
        for (j, v) in xi1.iter().chain(xi2.iter()).enumerate() {
            scores[(i, j)] = *v;
        }
    }
    // scores are centered by construction (projection of centered data)
    let mut sigma = scores.transpose() * &scores / (n as f64 - 1.0);
    sigma = (&sigma + sigma.transpose()) * 0.5;

    JointGaussianModel::from_parts(pca1, pca2, sigma, m, var_threshold)
}

/// G2: project a Z record onto the retained components of both blocks.
pub fn project_scores(model: &JointGaussianModel, z: &ZRecord) -> Result<ScoreVector> {
    model.project(z)
}

fn gaussian_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = sigma.nrows();
    let eig = sigma.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let mut factor = DMatrix::zeros(k, k);
    for j in 0..k {
        let ev = eig.eigenvalues[j];
        if ev < -1e-8 * max_ev.max(1.0) {
            return Err(Error::Model(format!(
                "score covariance is not positive semidefinite (eigenvalue {ev})"
            )));
        }
        let s = ev.max(0.0).sqrt();
        factor.set_column(j, &(eig.eigenvectors.column(j) * s));
    }
    Ok(factor)
}

/// Draw curves from the fitted model. With `with_deformation` the full score
/// vector is Gaussian with covariance Sigma; otherwise only the shape block
/// varies and the deformation block stays at its training mean.
pub fn sample_curves(
    model: &JointGaussianModel,
    n: usize,
    seed: u64,
    with_deformation: bool,
) -> Result<Vec<SmoothCurve>> {
    let (m1, m2) = model.retained();
    let factor = if with_deformation {
        gaussian_factor(model.sigma())?
    } else {
        gaussian_factor(&model.sigma().view((0, 0), (m1, m1)).into_owned())?
    };
    let k = factor.nrows();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
        let xi_block = &factor * raw;
        let mut xi = vec![0.0; m1 + m2];
        for (j, v) in xi_block.iter().enumerate() {
            xi[j] = *v;
        }
        let z = model.reconstruct_z(&ScoreVector { xi, split: m1 })?;
        out.push(invert_z(&z));
    }
    Ok(out)
}

/// (D1, D2): mean and min elastic distance from the standardized generated
/// curve to the dataset shapes.
pub fn similarity_metrics(
    gen: &SmoothCurve,
    dataset: &[StandardizedCurve],
    grid: &CandidateGrid,
) -> Result<(f64, f64)> {
    if dataset.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    let (shape, _, _) = gen.standardize()?;
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    for reference in dataset {
        let d = elastic_distance(&shape, reference, grid)?;
        sum += d;
        min = min.min(d);
    }
    Ok((sum / dataset.len() as f64, min))
}

/// PCA directly on the stacked (c0, c1..cM) coefficients of unaligned curves.
/// The comparison baseline: no deformation modeling.
#[derive(Debug, Clone)]
pub struct BaselineMfpca {
    pca: PcaModel,
}

impl BaselineMfpca {
    pub fn fit(curves: &[SmoothCurve], var_threshold: f64) -> Result<Self> {
        let n = curves.len();
        if n < 2 {
            return Err(Error::NotEnoughSamples { needed: 2, got: n });
        }
        let m = curves[0].coefs().size();
        let rows: Vec<DVector<f64>> = curves
            .iter()
            .map(|c| {
                let mut v = vec![c.c0()[0], c.c0()[1]];
                v.extend(c.coefs().to_flat());
                DVector::from_vec(v)
            })
            .collect();
        for c in curves {
            if c.coefs().size() != m {
                return Err(Error::DimensionMismatch { expected: m, got: c.coefs().size() });
            }
        }
        Ok(BaselineMfpca { pca: PcaModel::fit(&rows, var_threshold)? })
    }

    pub fn pca(&self) -> &PcaModel {
        &self.pca
    }

    fn vector_to_curve(&self, v: &DVector<f64>) -> Result<SmoothCurve> {
        let c0 = [v[0], v[1]];
        let coefs = CoefMatrix::from_flat(&v.as_slice()[2..])?;
        Ok(SmoothCurve::new(c0, coefs))
    }

    pub fn mean_curve(&self) -> Result<SmoothCurve> {
        self.vector_to_curve(self.pca.mean())
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<SmoothCurve>> {
        let k = self.pca.retained();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let scores = DVector::from_iterator(
                k,
                self.pca.retained_eigenvalues().iter().map(|ev| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g * ev.sqrt()
                }),
            );
            out.push(self.vector_to_curve(&self.pca.reconstruct(&scores)?)?);
        }
        Ok(out)
    }
}

/// Convenience wrapper matching the one-shot baseline sampling contract.
pub fn baseline_mfpca(
    curves: &[SmoothCurve],
    var_threshold: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<SmoothCurve>> {
    BaselineMfpca::fit(curves, var_threshold)?.sample(n, seed)
}
