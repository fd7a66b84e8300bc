//! Alignment and generative modeling of closed planar curves.
//!
//! A closed planar curve is deformed from its underlying shape by four
//! variables: translation, scale, rotation, and a cyclic starting-point
//! shift. This crate recovers all four in Fourier coefficient space (the
//! shift becomes a sparse orthogonal transfer matrix, the rotation a
//! closed-form Procrustes angle), then fits a joint-PCA Gaussian model over
//! shape and deformation that can generate new curves.

pub mod alignment;
pub mod basis;
pub mod error;
pub mod io;
pub mod model;
pub mod simulation;
pub mod smoothing;
pub mod svg;
pub mod trace;

pub use alignment::{
    align_to_template, align_with_reflection, elastic_distance, estimate_deformation,
    procrustes_angle, recover_shape, AlignmentResult, CandidateGrid, Deformation,
};
pub use basis::{coeff_norm_inner, BasisSpec, CoefMatrix, ReparamShift, TransferMatrix};
pub use error::{Error, Result};
pub use model::{
    baseline_mfpca, build_z, fit_joint_model, invert_z, project_scores, sample_curves,
    similarity_metrics, JointGaussianModel, PcaModel, ScoreVector, ZRecord,
};
pub use simulation::{angular_mse, run_scenario, simulate_hearts, Scenario, SimConfig};
pub use smoothing::{fit_fourier, uniform_grid, DiscreteCurve, SmoothCurve, StandardizedCurve};
pub use trace::{trace_contour, BinaryImage, StartPolicy};
