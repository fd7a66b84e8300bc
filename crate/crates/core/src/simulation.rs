//! Heart-curve simulation study: synthetic deformed samples, the cyclic MSE
//! metrics, and the scenario harness.

use crate::alignment::{apply_rotation_shift, estimate_deformation, CandidateGrid, Deformation};
use crate::basis::{BasisSpec, CoefMatrix, SQRT_2};
use crate::error::{Error, Result};
use crate::smoothing::{fit_fourier, uniform_grid, DiscreteCurve, StandardizedCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// S1 observes the rotated/shifted pre-shapes; S2 additionally scales and
/// translates them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    S1,
    S2,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::S1 => write!(f, "S1"),
            Scenario::S2 => write!(f, "S2"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Scenario::S1),
            "S2" => Ok(Scenario::S2),
            _ => Err(Error::Model(format!("unknown scenario '{s}' (expected S1 or S2)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub sigma: f64,
    pub scenario: Scenario,
    pub seed: u64,
    pub grid_points: usize,
    pub basis_size: usize,
    pub delta_grid_step: f64,
}

impl SimConfig {
    pub fn new(n: usize, sigma: f64, scenario: Scenario, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        if sigma <= 0.0 {
            return Err(Error::Domain { value: sigma, domain: "(0,inf)" });
        }
        Ok(SimConfig {
            n,
            sigma,
            scenario,
            seed,
            grid_points: 101,
            basis_size: 10,
            delta_grid_step: 0.01,
        })
    }
}

/// Simulated curves together with the deformations that produced them.
#[derive(Debug, Clone)]
pub struct GroundTruthSample {
    pub curves: Vec<DiscreteCurve>,
    pub deformations: Vec<Deformation>,
}

/// Mean amplitude vector of the heart construction.
pub const HEART_MEAN: [f64; 5] = [16.0, 13.0, -5.0, -2.0, -1.0];

/// Coefficients of the scaled heart shape
/// (b0 sin^3(pi(2t-1)), sum_k b_k cos(k pi(2t-1))) in the Fourier basis.
///
/// sin^3(pi(2t-1)) = (-3 sin(2 pi t) + sin(6 pi t))/4 and
/// cos(k pi(2t-1)) = (-1)^k cos(2 k pi t), so the curve lies exactly in the
/// span once M >= 8; for smaller M the coefficients are the L2 projection.
pub fn heart_coefs(b: &[f64; 5], spec: BasisSpec) -> CoefMatrix {
    let m = spec.size();
    let mut row_x = vec![0.0; m];
    let mut row_y = vec![0.0; m];
    // sine column for frequency f is 2(f-1), cosine column 2(f-1)+1
    if m >= 2 {
        row_x[0] = -3.0 * b[0] / (4.0 * SQRT_2);
    }
    if m >= 6 {
        row_x[4] = b[0] / (4.0 * SQRT_2);
    }
    for k in 1..=4usize {
        let col = 2 * (k - 1) + 1;
        if col < m {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            row_y[col] = sign * b[k] / SQRT_2;
        }
    }
    CoefMatrix::from_rows(&row_x, &row_y).expect("valid even basis size")
}

/// The standardized mean heart, used as the alignment template.
pub fn mean_heart_template(spec: BasisSpec) -> StandardizedCurve {
    StandardizedCurve::from_unnormalized(&heart_coefs(&HEART_MEAN, spec))
        .expect("mean heart is nondegenerate")
}

/// Draw n deformed heart curves on the common grid.
///
/// Per curve the draw order is fixed: the five amplitudes, then delta, then
/// the translation (theta is tied to delta).
pub fn simulate_hearts(cfg: &SimConfig) -> Result<GroundTruthSample> {
    let spec = BasisSpec::new(cfg.basis_size)?;
    let grid = uniform_grid(cfg.grid_points);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut curves = Vec::with_capacity(cfg.n);
    let mut deformations = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut b = HEART_MEAN;
        for v in b.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *v += cfg.sigma * g;
        }
        let delta: f64 = rng.gen_range(0.0..1.0);
        let theta = 2.0 * PI * delta;
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        let translation = [g1, g2];

        let scaled = heart_coefs(&b, spec);
        let rho = scaled.norm();
        if rho == 0.0 {
            return Err(Error::DegenerateCurve);
        }
        let shape = StandardizedCurve::from_unnormalized(&scaled)?;
        let x_star = apply_rotation_shift(&shape, theta, delta)?;

        let (observed, truth) = match cfg.scenario {
            Scenario::S1 => {
                let curve = x_star.to_smooth().evaluate(&grid)?;
                (curve, Deformation::new([0.0, 0.0], 1.0, theta, delta)?)
            }
            Scenario::S2 => {
                let curve = crate::smoothing::SmoothCurve::new(
                    translation,
                    x_star.coefs().scale(rho),
                )
                .evaluate(&grid)?;
                (curve, Deformation::new(translation, rho, theta, delta)?)
            }
        };
        curves.push(observed);
        deformations.push(truth);
    }
    Ok(GroundTruthSample { curves, deformations })
}

/// Per-parameter mean squared errors; theta and delta are compared on the
/// unit circle to respect their cyclic domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub mse_translation: f64,
    pub mse_rho: f64,
    pub mse_theta: f64,
    pub mse_delta: f64,
}

pub fn angular_mse(truth: &[Deformation], est: &[Deformation]) -> Result<MseReport> {
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: est.len() });
    }
    if truth.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    let n = truth.len() as f64;
    let circle_sq = |a: f64, b: f64| -> f64 {
        (a.cos() - b.cos()).powi(2) + (a.sin() - b.sin()).powi(2)
    };
    let mut acc = MseReport {
        mse_translation: 0.0,
        mse_rho: 0.0,
        mse_theta: 0.0,
        mse_delta: 0.0,
    };
    for (t, e) in truth.iter().zip(est) {
        acc.mse_translation += ((t.translation[0] - e.translation[0]).powi(2)
            + (t.translation[1] - e.translation[1]).powi(2))
            / n;
        acc.mse_rho += (t.rho - e.rho).powi(2) / n;
        acc.mse_theta += circle_sq(t.theta, e.theta) / n;
        acc.mse_delta += circle_sq(2.0 * PI * t.delta, 2.0 * PI * e.delta) / n;
    }
    Ok(acc)
}

/// One row of the scenario report; translation/scale cells are absent for S1.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub sigma: f64,
    pub mse_delta: f64,
    pub mse_theta: f64,
    pub mse_translation: Option<f64>,
    pub mse_rho: Option<f64>,
}

impl ScenarioReport {
    pub fn csv_header() -> &'static str {
        "scenario,sigma,mse_delta,mse_theta,mse_T,mse_rho"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:e}"));
        format!(
            "{},{},{:e},{:e},{},{}",
            self.scenario,
            self.sigma,
            self.mse_delta,
            self.mse_theta,
            opt(self.mse_translation),
            opt(self.mse_rho)
        )
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3e}"));
        write!(
            f,
            "{} sigma={:<6} MSE_delta={:.3e} MSE_theta={:.3e} MSE_T={} MSE_rho={}",
            self.scenario,
            self.sigma,
            self.mse_delta,
            self.mse_theta,
            opt(self.mse_translation),
            opt(self.mse_rho)
        )
    }
}

/// Simulate, smooth, standardize, align to the mean-heart template, and
/// score the estimated deformations.
pub fn run_scenario(cfg: &SimConfig) -> Result<ScenarioReport> {
    let spec = BasisSpec::new(cfg.basis_size)?;
    let sample = simulate_hearts(cfg)?;
    let template = mean_heart_template(spec);
    let grid = CandidateGrid::from_step(cfg.delta_grid_step)?;

    let mut estimates = Vec::with_capacity(cfg.n);
    for curve in &sample.curves {
        let smooth = fit_fourier(curve, spec)?;
        let (def, _) = estimate_deformation(&smooth, &template, &grid)?;
        estimates.push(def);
    }
    let mse = angular_mse(&sample.deformations, &estimates)?;
    let (mse_translation, mse_rho) = match cfg.scenario {
        Scenario::S1 => (None, None),
        Scenario::S2 => (Some(mse.mse_translation), Some(mse.mse_rho)),
    };
    Ok(ScenarioReport {
        scenario: cfg.scenario,
        sigma: cfg.sigma,
        mse_delta: mse.mse_delta,
        mse_theta: mse.mse_theta,
        mse_translation,
        mse_rho,
    })
}
