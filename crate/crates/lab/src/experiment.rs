//! The four experiment kinds on top of the core crate: spectral analysis,
//! perturbation marching, their comparison, and sweeps over config keys.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use shockstab_core::gas::cons_to_prim;
use shockstab_core::marching::{self, fit_growth_rate, GrowthFit, MonitorSeries, RunConfig};
use shockstab_core::reconstruction::{smoothness_indicators, weights_js, weights_z, WENO_EPSILON};
use shockstab_core::shock::{
    self, converge_1d, entropy_increase, project_to_2d, ShockProblemConfig,
};
use shockstab_core::stability::{
    self, assemble, eigensolve, eigenvector_cells, localize, AssemblyOptions,
};
use shockstab_core::{
    Error, GasModel, MeanField, ReconConfig, Scheme, Smoothing, Spectrum, StabilityMatrix,
    VariableSpace, WenoVariant,
};

use crate::config::{ExperimentConfig, Mode};

/// `max Re λ` above this counts as unstable; below it is eigensolver noise.
pub const UNSTABLE_THRESHOLD: f64 = 1e-10;
/// Largest relative gap between `λ_num` and `max Re λ` counted as agreement.
pub const GAP_TOLERANCE: f64 = 0.15;
/// Floor of the gap denominator, so near-neutral points are not judged on
/// noise.
pub const GAP_FLOOR: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    /// A numerical failure of a single-point run, already rendered.
    #[error("{0}")]
    Point(String),
}

impl LabError {
    /// Process exit code: 2 for configuration errors, 3 for numerical
    /// failures, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numerical(Error::InvalidConfig(_))
            | LabError::Numerical(Error::InvalidGas { .. })
            | LabError::Numerical(Error::MachNumber { .. })
            | LabError::Numerical(Error::ShockPosition { .. }) => 2,
            LabError::Numerical(_) | LabError::Point(_) => 3,
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
}

impl Verdict {
    pub fn of(max_real: f64) -> Self {
        if max_real > UNSTABLE_THRESHOLD {
            Verdict::Unstable
        } else {
            Verdict::Stable
        }
    }
}

pub fn problem_config(cfg: &ExperimentConfig) -> Result<ShockProblemConfig, Error> {
    let p = &cfg.problem;
    let pc = ShockProblemConfig {
        mach: p.mach,
        epsilon: p.epsilon,
        nx: p.nx,
        ny: p.ny,
        h: p.h,
        cfl: p.cfl,
        gas: GasModel::new(p.gamma)?,
        shock_column: p.shock_column,
        tolerance: p.tolerance,
        accept_tolerance: p.accept_tolerance,
        max_steps: p.max_steps,
        steady: p.steady,
        damping: p.damping.then(Default::default),
        outflow: p.outflow,
    };
    pc.validate()?;
    Ok(pc)
}

pub fn scheme_of(cfg: &ExperimentConfig) -> Scheme {
    let s = &cfg.scheme;
    let recon = ReconConfig {
        order: s.order,
        variant: s.weno,
        space: s.space,
        weno_epsilon: WENO_EPSILON,
        cap: s.cap,
        projection: s.projection,
    };
    let column = cfg.problem.shock_column;
    let mut scheme = Scheme::new(s.solver, s.order)
        .with_recon(recon)
        .with_shock_zone(column, s.zone_end.unwrap_or(column));
    scheme.smoothing = Smoothing { delta0: s.delta0 };
    scheme
}

/// Steady 2D base flow: the converged 1D profile replicated across rows.
#[derive(Debug, Clone)]
pub struct BaseFlow {
    pub problem: ShockProblemConfig,
    pub scheme: Scheme,
    pub field: MeanField,
    pub steady: SteadySummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadySummary {
    pub residual: f64,
    pub steps: usize,
    pub capped: bool,
}

pub fn base_flow(cfg: &ExperimentConfig) -> Result<BaseFlow, Error> {
    let problem = problem_config(cfg)?;
    let scheme = scheme_of(cfg);
    let profile = converge_1d(&problem, &scheme)?;
    let mut field = project_to_2d(&profile.field, problem.ny);
    field.apply_boundaries(&problem.boundaries(), &problem.gas)?;
    let steady = SteadySummary {
        residual: profile.residual,
        steps: profile.steps,
        capped: profile.capped,
    };
    Ok(BaseFlow {
        problem,
        scheme,
        field,
        steady,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSummary {
    pub max_real: f64,
    pub leading_re: f64,
    pub leading_im: f64,
    /// `max Re λ · h / u_L`: the growth rate per upstream flow-through time
    /// of one cell.
    pub normalized_max_real: f64,
    pub verdict: Verdict,
    pub entropy_increase: f64,
    pub argmax_column: isize,
    /// Unstable-mode amplitude per column `1..=nx`.
    pub profile: Vec<f64>,
    pub dimension: usize,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub summary: AnalysisSummary,
    pub spectrum: Spectrum,
    /// Leading eigenvector, four components per interior cell.
    pub eigvec: Vec<[Complex64; 4]>,
    pub eigvec_primitive: bool,
    pub matrix: StabilityMatrix,
}

pub fn analyze(base: &BaseFlow, cfg: &ExperimentConfig) -> Result<Analysis, Error> {
    let bc = base.problem.boundaries();
    let gas = &base.problem.gas;
    let opts = AssemblyOptions {
        jacobian: cfg.run.jacobian,
        steady_tolerance: Some(base.problem.accept_tolerance),
    };
    let matrix = assemble(&base.field, &base.scheme, &bc, gas, &opts)?;
    let spectrum = eigensolve(&matrix.to_dense())?;
    let primitive = cfg.run.primitive_eigvec;
    let eigvec = eigenvector_cells(
        &spectrum.eigenvector,
        matrix.unknowns,
        &base.field,
        gas,
        primitive,
    )?;
    let loc = localize(&eigvec, base.field.nx());
    let u_left = base.problem.upstream().u;
    let summary = AnalysisSummary {
        max_real: spectrum.max_real,
        leading_re: spectrum.leading.re,
        leading_im: spectrum.leading.im,
        normalized_max_real: spectrum.max_real * base.problem.h / u_left,
        verdict: Verdict::of(spectrum.max_real),
        entropy_increase: entropy_increase(&base.field, &base.problem)?,
        argmax_column: loc.argmax_column,
        profile: loc.profile,
        dimension: matrix.dim(),
    };
    let eigvec_primitive = primitive || matrix.unknowns == stability::Unknowns::Primitive;
    Ok(Analysis {
        summary,
        spectrum,
        eigvec,
        eigvec_primitive,
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarchSummary {
    pub steps: usize,
    pub fallbacks: usize,
    pub end_time: f64,
    pub collapse: Option<f64>,
    pub final_vinf: f64,
    pub peak_vinf: f64,
    pub lambda_num: Option<f64>,
    pub fit_r2: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MarchRun {
    pub summary: MarchSummary,
    pub series: MonitorSeries,
    pub fit: Option<GrowthFit>,
}

pub fn march(base: &BaseFlow, cfg: &ExperimentConfig) -> Result<MarchRun, Error> {
    let run = RunConfig {
        cfl: base.problem.cfl,
        end_time: cfg.run.end_time,
        amplitude: cfg.run.amplitude,
        seed: cfg.run.seed,
        stop_level: cfg.run.stop_level,
    };
    let out = marching::march(
        &base.field,
        &base.scheme,
        &base.problem.boundaries(),
        &base.problem.gas,
        &run,
    )?;
    let series = out.series;
    let (fit, fit_error) = match fit_growth_rate(&series) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = MarchSummary {
        steps: out.steps,
        fallbacks: out.fallbacks,
        end_time: series.t.last().copied().unwrap_or(0.0),
        collapse: series.collapse,
        final_vinf: series.v.last().copied().unwrap_or(0.0),
        peak_vinf: series.v.iter().copied().fold(0.0, f64::max),
        lambda_num: fit.map(|f| f.rate),
        fit_r2: fit.map(|f| f.r2),
        fit_window: fit.map(|f| f.window),
        fit_error,
    };
    Ok(MarchRun {
        summary,
        series,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    Disagree,
    /// The fitter found no exponential stage.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationSummary {
    /// `|λ_num − max Re λ| / max(|max Re λ|, 0.05)`.
    pub gap: Option<f64>,
    pub agreement: Agreement,
}

pub fn compare(max_real: f64, lambda_num: Option<f64>) -> ValidationSummary {
    match lambda_num {
        Some(l) => {
            let gap = (l - max_real).abs() / max_real.abs().max(GAP_FLOOR);
            let agreement = if gap <= GAP_TOLERANCE {
                Agreement::Agree
            } else {
                Agreement::Disagree
            };
            ValidationSummary {
                gap: Some(gap),
                agreement,
            }
        }
        None => ValidationSummary {
            gap: None,
            agreement: Agreement::Indeterminate,
        },
    }
}

/// Nonlinear weights of the left state of a face for the density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaceWeights {
    /// The face lies between `face` and `face + 1`.
    pub face: isize,
    pub beta: [f64; 3],
    pub weights: [f64; 3],
}

/// Smoothness indicators and weights of `ρ` at face `face + 1/2` on row 1,
/// in the variant of `scheme`.
pub fn density_face_weights(field: &MeanField, scheme: &Scheme, face: isize) -> FaceWeights {
    let w: [f64; 5] = core::array::from_fn(|k| field.get(face - 2 + k as isize, 1).rho);
    let beta = smoothness_indicators(&w);
    let eps = scheme.recon.weno_epsilon;
    let weights = match scheme.recon.variant {
        WenoVariant::Js => weights_js(&beta, eps),
        WenoVariant::Z => weights_z(&beta, eps),
        WenoVariant::Linear => shockstab_core::reconstruction::LINEAR_WEIGHTS,
    };
    FaceWeights {
        face,
        beta,
        weights,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub axes: Vec<Axis>,
    pub scheme: String,
    pub mach: f64,
    pub epsilon: f64,
    pub space: &'static str,
    pub steady: Option<SteadySummary>,
    pub analysis: Option<AnalysisSummary>,
    pub march: Option<MarchSummary>,
    pub validation: Option<ValidationSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub summary: PointSummary,
    pub base: Option<BaseFlow>,
    pub analysis: Option<Analysis>,
    pub march: Option<MarchRun>,
}

fn space_name(space: VariableSpace) -> &'static str {
    match space {
        VariableSpace::Conservative => "conservative",
        VariableSpace::Primitive => "primitive",
        VariableSpace::Characteristic => "characteristic",
    }
}

/// Runs one configuration in `mode`. Numerical failures are returned in
/// the outcome's `error` field, together with whatever finished before.
pub fn run_point(cfg: &ExperimentConfig, mode: Mode, axes: Vec<(String, String)>) -> PointOutcome {
    let mut outcome = PointOutcome {
        summary: PointSummary {
            axes: axes
                .into_iter()
                .map(|(key, value)| Axis { key, value })
                .collect(),
            scheme: scheme_of(cfg).label(),
            mach: cfg.problem.mach,
            epsilon: cfg.problem.epsilon,
            space: space_name(cfg.scheme.space),
            steady: None,
            analysis: None,
            march: None,
            validation: None,
            error: None,
        },
        base: None,
        analysis: None,
        march: None,
    };
    if let Err(e) = fill_point(&mut outcome, cfg, mode) {
        outcome.summary.error = Some(e.to_string());
    }
    outcome
}

fn fill_point(outcome: &mut PointOutcome, cfg: &ExperimentConfig, mode: Mode) -> Result<(), Error> {
    let base = base_flow(cfg)?;
    outcome.summary.steady = Some(base.steady);
    let base = outcome.base.insert(base);
    if mode != Mode::March {
        let a = analyze(base, cfg)?;
        outcome.summary.analysis = Some(a.summary.clone());
        outcome.analysis = Some(a);
    }
    if matches!(mode, Mode::March | Mode::Validate) {
        let m = march(base, cfg)?;
        outcome.summary.march = Some(m.summary.clone());
        if let Some(a) = &outcome.summary.analysis {
            outcome.summary.validation = Some(compare(a.max_real, m.summary.lambda_num));
        }
        outcome.march = Some(m);
    }
    Ok(())
}

/// Every point of the configuration, in sweep order, run in parallel.
pub fn run_all(cfg: &ExperimentConfig) -> Vec<PointOutcome> {
    let mode = cfg.run.mode;
    cfg.points()
        .into_par_iter()
        .map(|(axes, point)| run_point(&point, mode, axes))
        .collect()
}

/// Validates the configuration without running it.
pub fn check(cfg: &ExperimentConfig) -> Result<(), Error> {
    for (_, point) in cfg.points() {
        problem_config(&point)?;
        shock::intermediate_state(
            point.problem.mach,
            point.problem.epsilon,
            &GasModel::new(point.problem.gamma)?,
        )?;
    }
    Ok(())
}

/// Primitive state per interior cell of `field`, row-major from `(1, 1)`.
pub fn primitive_rows(
    field: &MeanField,
    gas: &GasModel,
) -> Result<Vec<(isize, isize, [f64; 4])>, Error> {
    field
        .interior()
        .map(|c| {
            let w = cons_to_prim(&field.get(c.i, c.j), gas)?;
            Ok((c.i, c.j, [w.rho, w.u, w.v, w.p]))
        })
        .collect()
}
