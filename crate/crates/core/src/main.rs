//! Command-line front end: smoothing, alignment, model fitting and sampling,
//! simulation, distances, and contour tracing.

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvealign::alignment::{align_with_reflection, CandidateGrid};
use curvealign::basis::BasisSpec;
use curvealign::error::{Error, Result};
use curvealign::model::{build_z, fit_joint_model, sample_curves};
use curvealign::simulation::{run_scenario, Scenario, ScenarioReport, SimConfig};
use curvealign::smoothing::{fit_fourier, uniform_grid, StandardizedCurve};
use curvealign::svg::svg_export;
use curvealign::trace::{trace_contour, StartPolicy};
use curvealign::io;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "curvealign", version, about = "Closed planar curve alignment and shape modeling")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Fourier basis size M (even, >= 2)
    #[arg(long = "basis", global = true, default_value_t = 10)]
    basis: usize,

    /// Starting-point search grid step h; candidates are {h, 2h, ..., 1}
    #[arg(long = "grid-step", global = true, default_value_t = 0.01)]
    grid_step: f64,

    /// Random seed for sampling and simulation
    #[arg(long = "seed", global = true, default_value_t = 0)]
    seed: u64,

    /// Explained-variance threshold for component retention
    #[arg(long = "threshold", global = true, default_value_t = 0.9)]
    threshold: f64,

    /// Also try the reflected curve during alignment and keep the better fit
    #[arg(long = "reflect", global = true)]
    reflect: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a Fourier expansion to a discrete curve and resample it
    Smooth {
        /// Input curve CSV (t,x,y)
        #[arg(long)]
        input: PathBuf,
        /// Output CSV for the smoothed curve
        #[arg(long)]
        output: PathBuf,
        /// Number of output sample points
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Optional SVG plot of the smoothed curve
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Estimate rotation, starting point, scale, and translation against a template
    Align {
        /// Input curve CSV
        #[arg(long)]
        input: PathBuf,
        /// Template curve CSV (standardized after smoothing)
        #[arg(long)]
        template: PathBuf,
        /// Optional output CSV with the recovered shape
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit the joint shape-and-deformation model from a sample of curves
    Fit {
        /// Input curve CSVs; the first becomes the alignment template
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output model JSON
        #[arg(long)]
        output: PathBuf,
        /// Optional template curve CSV (default: first input)
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Sample new curves from a fitted model
    Generate {
        /// Model JSON produced by `fit`
        #[arg(long)]
        model: PathBuf,
        /// Number of curves to draw
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Directory for the generated curve CSVs
        #[arg(long = "output-dir")]
        output_dir: PathBuf,
        /// Sample shapes only; keep deformations at their training mean
        #[arg(long = "no-deformation")]
        no_deformation: bool,
        /// Number of output sample points per curve
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Optional SVG overlay of the generated curves
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the synthetic deformed-heart benchmark
    Simulate {
        /// Scenario: S1 (rotation/start only) or S2 (full deformation)
        #[arg(long)]
        scenario: String,
        /// Amplitude noise level
        #[arg(long)]
        sigma: f64,
        /// Sample size
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Optional CSV report path (header + one row)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Elastic pseudo-distance between two curves
    Distance {
        /// Two curve CSVs
        #[arg(num_args = 2, required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Extract the boundary of the largest blob in a PGM/PBM image
    Trace {
        /// Input image (binary PGM P5 or PBM P4)
        #[arg(long)]
        image: PathBuf,
        /// Output curve CSV
        #[arg(long)]
        output: PathBuf,
        /// Where the boundary walk starts
        #[arg(long = "start-policy", value_enum, default_value_t = StartArg::Topleft)]
        start_policy: StartArg,
        /// Reverse traversal orientation (clockwise output)
        #[arg(long)]
        reverse: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Topleft,
    MinOriginDistance,
}

impl From<StartArg> for StartPolicy {
    fn from(a: StartArg) -> StartPolicy {
        match a {
            StartArg::Topleft => StartPolicy::TopLeft,
            StartArg::MinOriginDistance => StartPolicy::MinOriginDistance,
        }
    }
}

fn load_template(path: &PathBuf, spec: BasisSpec) -> Result<StandardizedCurve> {
    let curve = io::read_curve_csv_path(path)?;
    let smooth = fit_fourier(&curve, spec)?;
    let (shape, _, _) = smooth.standardize()?;
    Ok(shape)
}

fn run(cli: Cli) -> Result<()> {
    let spec = BasisSpec::new(cli.common.basis)?;
    let grid = CandidateGrid::from_step(cli.common.grid_step)?;
    match cli.command {
        Command::Smooth { input, output, points, svg } => {
            if points < 2 {
                return Err(Error::Domain { value: points as f64, domain: "[2,inf)" });
            }
            let curve = io::read_curve_csv_path(&input)?;
            let smooth = fit_fourier(&curve, spec)?;
            let resampled = smooth.evaluate(&uniform_grid(points))?;
            io::write_curve_csv_path(&output, &resampled)?;
            if let Some(svg_path) = svg {
                std::fs::write(svg_path, svg_export(std::slice::from_ref(&smooth))?)?;
            }
            Ok(())
        }
        Command::Align { input, template, output } => {
            let mu = load_template(&template, spec)?;
            let curve = io::read_curve_csv_path(&input)?;
            let smooth = fit_fourier(&curve, spec)?;
            let (shape, translation, rho) = smooth.standardize()?;
            let (result, reflected) = if cli.common.reflect {
                align_with_reflection(&shape, &mu, &grid)?
            } else {
                (curvealign::alignment::align_to_template(&shape, &mu, &grid)?, false)
            };
            println!(
                "theta={:.12} delta={:.12} rho={:.12} T=({:.12},{:.12}) objective={:.6e} reflected={}",
                result.theta_hat,
                result.delta_hat,
                rho,
                translation[0],
                translation[1],
                result.objective,
                reflected
            );
            if let Some(out) = output {
                let recovered = result.shape.to_smooth().evaluate(&uniform_grid(101))?;
                io::write_curve_csv_path(&out, &recovered)?;
            }
            Ok(())
        }
        Command::Fit { inputs, output, template } => {
            let mut smooths = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let curve = io::read_curve_csv_path(path)?;
                smooths.push(fit_fourier(&curve, spec)?);
            }
            let mu = match &template {
                Some(path) => load_template(path, spec)?,
                None => smooths[0].standardize()?.0,
            };
            let mut zs = Vec::with_capacity(smooths.len());
            for smooth in &smooths {
                let (def, shape) =
                    curvealign::alignment::estimate_deformation(smooth, &mu, &grid)?;
                zs.push(build_z(&shape, &def));
            }
            let model = fit_joint_model(&zs, cli.common.threshold)?;
            io::write_model_path(&output, &model)?;
            let (m1, m2) = model.retained();
            println!("retained: shape={m1} deformation={m2}");
            Ok(())
        }
        Command::Generate { model, count, output_dir, no_deformation, points, svg } => {
            let model = io::read_model_path(&model)?;
            let curves = sample_curves(&model, count, cli.common.seed, !no_deformation)?;
            std::fs::create_dir_all(&output_dir)?;
            let grid_t = uniform_grid(points);
            for (i, curve) in curves.iter().enumerate() {
                let sampled = curve.evaluate(&grid_t)?;
                io::write_curve_csv_path(&output_dir.join(format!("curve_{i:04}.csv")), &sampled)?;
            }
            if let Some(svg_path) = svg {
                std::fs::write(svg_path, svg_export(&curves)?)?;
            }
            Ok(())
        }
        Command::Simulate { scenario, sigma, n, output } => {
            let scenario: Scenario = scenario.parse()?;
            let mut cfg = SimConfig::new(n, sigma, scenario, cli.common.seed)?;
            cfg.basis_size = cli.common.basis;
            cfg.delta_grid_step = cli.common.grid_step;
            let report = run_scenario(&cfg)?;
            println!("{report}");
            if let Some(path) = output {
                let text = format!("{}\n{}\n", ScenarioReport::csv_header(), report.csv_row());
                std::fs::write(path, text)?;
            }
            Ok(())
        }
        Command::Distance { inputs } => {
            let f = load_template(&inputs[0], spec)?;
            let g = load_template(&inputs[1], spec)?;
            let d = curvealign::alignment::elastic_distance(&f, &g, &grid)?;
            println!("{d:.12}");
            Ok(())
        }
        Command::Trace { image, output, start_policy, reverse } => {
            let img = io::read_netpbm_path(&image)?;
            let mut curve = trace_contour(&img, start_policy.into())?;
            if reverse {
                curve = curve.reversed();
            }
            io::write_curve_csv_path(&output, &curve)?;
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
