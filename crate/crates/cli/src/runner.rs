//! Runs a configured experiment and writes its reports.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use morley::adaptive::{adaptive_loop, AdaptiveOptions, AdaptiveStep};
use morley::hhj_equiv::Diagnostics;
use morley::interpolation::f_functional;
use morley::mesh::io::write_mesh;
use morley::postprocess::{ConvergenceTable, ErrorColumn};
use morley::study::{for_each_level, solve_level};
use morley::{EigenOptions, MorleySpace, SinProduct};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, ReferenceSource};
use crate::error::CliError;
use crate::report::{self, ResultRow};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct LevelInfo {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub triangles: usize,
    pub seconds: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateSummary {
    pub pairwise: Vec<Option<f64>>,
    pub least_squares: Option<f64>,
    pub last: Option<f64>,
}

impl RateSummary {
    fn from_column(c: &ErrorColumn<f64>) -> Self {
        RateSummary {
            pairwise: c.rates.pairwise.clone(),
            least_squares: c.rates.least_squares,
            last: c.rates.last,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Reference {
    pub kind: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub eigen_index: usize,
    pub csv: String,
    pub reference: Reference,
    pub rate_m: Option<RateSummary>,
    pub rate_r: Option<RateSummary>,
    pub rate_exp: Option<RateSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptiveSummary {
    pub csv: String,
    pub eigen_index: usize,
    pub theta: f64,
    pub iterations: usize,
    pub final_dofs: usize,
    pub final_lambda_r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsRow {
    pub level: usize,
    pub t0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub remainder: f64,
    /// Orthogonality defect divided by the product of the two norms.
    pub orthogonality: f64,
    pub superconvergence: f64,
    /// `(lambda - lambda_M) N / (F(u, Omega) |Omega|)`.
    pub expansion_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub level: Option<usize>,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub domain: String,
    pub bc: String,
    pub levels: [usize; 2],
    pub eigen: Vec<usize>,
    pub methods: Vec<String>,
    pub alpha: f64,
    pub reference: String,
    pub seed: u64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub status: String,
    pub config: ConfigEcho,
    pub levels: Vec<LevelInfo>,
    pub results: Vec<EigenSummary>,
    pub adaptive: Option<AdaptiveSummary>,
    pub diagnostics: Option<Vec<DiagnosticsRow>>,
    pub failures: Vec<Failure>,
}

/// Eigenvalues `((m^2 + n^2) pi^2)^2` of the simply supported unit square in
/// increasing order, with multiplicity.
pub fn square_eigenvalues(count: usize) -> Vec<f64> {
    let n = (count as f64).sqrt().ceil() as usize + 2;
    let mut v: Vec<(usize, f64)> = (1..=n)
        .flat_map(|a| (1..=n).map(move |b| (a * a + b * b, 0.0)))
        .collect();
    v.sort_by_key(|p| p.0);
    v.into_iter()
        .take(count)
        .map(|(k, _)| {
            let s = k as f64 * std::f64::consts::PI * std::f64::consts::PI;
            s * s
        })
        .collect()
}

struct LevelData {
    info: LevelInfo,
    lambda_m: Vec<f64>,
    lambda_r: Vec<f64>,
}

fn file_reference(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v = text
        .split_whitespace()
        .map(|x| x.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::config(format!("reference file {}: {e}", path.display())))?;
    if v.len() != n {
        return Err(CliError::config(format!(
            "reference file {} has {} values for {n} eigenpairs",
            path.display(),
            v.len()
        )));
    }
    Ok(v)
}

fn create_dir(p: &Path) -> Result<(), CliError> {
    fs::create_dir_all(p).map_err(|e| CliError::io(p, e))
}

/// Runs the experiment, writing CSVs, mesh dumps and `summary.json` into the
/// output directory. Level failures are recorded in the summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    cfg.validate()?;
    let reference_source = cfg.reference();
    // Read file references up front so a bad file fails before computing.
    let fixed_reference: Option<Vec<f64>> = match &reference_source {
        ReferenceSource::Analytic(Some(v)) => Some(v.clone()),
        ReferenceSource::Analytic(None) => {
            let all = square_eigenvalues(cfg.max_eigen());
            Some(cfg.eigen.iter().map(|&i| all[i - 1]).collect())
        }
        ReferenceSource::File(p) => Some(file_reference(p, cfg.eigen.len())?),
        ReferenceSource::FinestLambdaR => None,
    };
    create_dir(&cfg.out)?;
    let mesh_dir = cfg.out.join("meshes");
    if cfg.write_meshes {
        create_dir(&mesh_dir)?;
    }

    let opts = EigenOptions::<f64>::new(cfg.max_eigen()).tol(cfg.tol).seed(cfg.seed);
    let eigen_u = SinProduct::new(2.0, 1, 1);
    let want_diag = cfg.has(Method::Diagnostics);
    let mut levels: Vec<LevelData> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failures = Vec::new();
    let (first, last) = cfg.levels;
    let outcome = for_each_level::<f64>(cfg.domain, first..=last, |level, mesh| {
        let start = Instant::now();
        let result = (|| -> Result<(), CliError> {
            if cfg.write_meshes {
                let path = mesh_dir.join(format!("{}_L{level}.mesh", cfg.domain.name()));
                let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                write_mesh(mesh, BufWriter::new(file))?;
            }
            let space = MorleySpace::new(mesh, cfg.bc)?;
            let s = solve_level(&space, &opts)?;
            if want_diag {
                let lambda = eigen_u.biharmonic_eigenvalue();
                let um = space.field_from_active(&s.eigen[0].vector);
                let d = Diagnostics::new(&space, lambda, &eigen_u, s.eigen[0].value, &um)?;
                let t = d.terms();
                let (o, scale) = d.orthogonality();
                let f = f_functional(&eigen_u, mesh);
                diagnostics.push(DiagnosticsRow {
                    level,
                    t0: t.t0,
                    i1: t.i1,
                    i2: t.i2,
                    i3: t.i3,
                    remainder: t.remainder,
                    orthogonality: if scale > 0.0 { o / scale } else { o },
                    superconvergence: d.superconvergence_error(),
                    expansion_ratio: (lambda - s.eigen[0].value) / f.weighted,
                });
            }
            levels.push(LevelData {
                info: LevelInfo {
                    level,
                    h: mesh.mesh_size(),
                    dofs: space.dofs.n_active(),
                    triangles: mesh.n_triangles(),
                    seconds: start.elapsed().as_secs_f64(),
                    max_residual: s.eigen.iter().map(|e| e.residual).fold(0.0, f64::max),
                },
                lambda_m: s.eigen.iter().map(|e| e.value).collect(),
                lambda_r: s.lambda_r,
            });
            Ok(())
        })();
        result.map_err(|e| {
            failures.push(Failure {
                level: Some(level),
                kind: e.kind.clone(),
                message: e.message.clone(),
            });
            morley::Error::InvalidInput(e.message)
        })
    });
    // A failed level stops the study; the failure is already recorded.
    let _ = outcome;

    let alpha = cfg.alpha();
    let mut results = Vec::new();
    for (slot, &idx) in cfg.eigen.iter().enumerate() {
        if levels.is_empty() {
            break;
        }
        let i = idx - 1;
        let (reference, kind) = match &fixed_reference {
            Some(v) => (v[slot], reference_source.to_string()),
            None => (levels.last().unwrap().lambda_r[i], "finest_lambda_R".to_owned()),
        };
        let input: Vec<(usize, f64, usize, f64, Option<f64>)> = levels
            .iter()
            .map(|l| (l.info.level, l.info.h, l.info.dofs, l.lambda_m[i], Some(l.lambda_r[i])))
            .collect();
        let table = ConvergenceTable::new(reference, alpha, &input);
        let cm = table.lambda_m();
        let cr = table.lambda_r();
        let ce = table.lambda_exp();
        let has_r = cfg.has(Method::Recovery);
        let has_e = cfg.has(Method::Extrapolation);
        let rows: Vec<ResultRow> = table
            .rows
            .iter()
            .enumerate()
            .map(|(k, r)| ResultRow {
                level: r.level,
                h: r.h,
                dofs: r.dofs,
                lambda_m: r.lambda_m,
                lambda_r: r.lambda_r.filter(|_| has_r),
                lambda_exp: r.lambda_exp.filter(|_| has_e),
                err_m: cm.errors[k],
                err_r: cr.errors[k].filter(|_| has_r),
                err_exp: ce.errors[k].filter(|_| has_e),
                rate_m: cm.rates.pairwise[k],
                rate_r: cr.rates.pairwise[k].filter(|_| has_r),
                rate_exp: ce.rates.pairwise[k].filter(|_| has_e),
            })
            .collect();
        let name = format!("results_{}_{}_eig{idx}.csv", cfg.domain.name(), cfg.bc.name());
        report::write_results_csv(&cfg.out.join(&name), &rows)?;
        results.push(EigenSummary {
            eigen_index: idx,
            csv: name,
            reference: Reference { kind, value: reference },
            rate_m: Some(RateSummary::from_column(&cm)),
            rate_r: has_r.then(|| RateSummary::from_column(&cr)),
            rate_exp: has_e.then(|| RateSummary::from_column(&ce)),
        });
    }

    let mut adaptive = None;
    if cfg.has(Method::Adaptive) && failures.is_empty() {
        let idx = *cfg.eigen.iter().min().unwrap();
        let aopts = AdaptiveOptions {
            theta: cfg.theta,
            max_iterations: cfg.adaptive_max_iterations,
            max_dofs: cfg.adaptive_max_dofs,
            eigen_index: idx - 1,
            start_level: cfg.adaptive_start_level,
            eigen: opts.clone(),
        };
        match adaptive_loop(cfg.domain, cfg.bc, &aopts) {
            Ok(run) => {
                let name = format!("adaptive_{}_{}_eig{idx}.csv", cfg.domain.name(), cfg.bc.name());
                report::write_adaptive_csv(&cfg.out.join(&name), &run.steps)?;
                let last: &AdaptiveStep<f64> = run.steps.last().expect("at least one adaptive step");
                adaptive = Some(AdaptiveSummary {
                    csv: name,
                    eigen_index: idx,
                    theta: cfg.theta,
                    iterations: run.steps.len(),
                    final_dofs: last.dofs,
                    final_lambda_r: last.lambda_r,
                });
            }
            Err(e) => failures.push(Failure {
                level: None,
                kind: e.kind().to_owned(),
                message: format!("adaptive loop: {e}"),
            }),
        }
    }

    let status = |failures: &[Failure], levels: &[LevelData]| {
        match (failures.is_empty(), levels.is_empty()) {
            (true, _) => "ok",
            (false, false) => "partial",
            (false, true) => "failed",
        }
        .to_owned()
    };
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        status: status(&failures, &levels),
        config: ConfigEcho {
            domain: cfg.domain.name().to_owned(),
            bc: cfg.bc.name().to_owned(),
            levels: [first, last],
            eigen: cfg.eigen.clone(),
            methods: cfg.methods.iter().map(|m| m.name().to_owned()).collect(),
            alpha,
            reference: reference_source.to_string(),
            seed: cfg.seed,
            tol: cfg.tol,
        },
        levels: levels.into_iter().map(|l| l.info).collect(),
        results,
        adaptive,
        diagnostics: want_diag.then_some(diagnostics),
        failures,
    };
    let path: PathBuf = cfg.out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::new("serialize", e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}
