//! End-to-end experiment commands behind the CLI: generate datasets, fit
//! methods, compare variants, dump singular spectra.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::adaptive::{admd_fit, AdmdReport, AppliedFilter, BranchTaken};
use crate::config::{DatasetSpec, MethodKind, MethodSpec};
use crate::datasets;
use crate::delay::fit_delay_dmd;
use crate::dmd::{fit_dmd, DmdModel, RankRule, SnapshotMatrix};
use crate::error::{AdmdError, Result};
use crate::evaluation::{error_series, singular_spectrum, SpectrumReport};
use crate::io;
use crate::sketch::RNG_ALGORITHM;

/// Result of running one method on one dataset.
#[derive(Debug)]
pub struct MethodOutcome {
    pub label: String,
    pub branch: String,
    pub measurements_used: usize,
    pub rank: usize,
    pub rank_before: Option<usize>,
    pub errors: Vec<Option<f64>>,
    pub times: Vec<f64>,
    pub model: DmdModel,
    /// (iterations, residual, converged) when the robust filter ran.
    pub ialm: Option<(usize, f64, bool)>,
    pub sketch: Option<(String, usize)>,
    pub q: usize,
    pub wall_seconds: f64,
}

impl MethodOutcome {
    pub fn max_error(&self) -> Option<f64> {
        self.errors
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))))
    }

    pub fn final_error(&self) -> Option<f64> {
        self.errors.last().copied().flatten()
    }
}

/// Fit one method; `seed` overrides any seed carried by the method spec
/// so that all randomness flows from the single run seed.
pub fn run_method(x: &SnapshotMatrix, method: &MethodSpec, seed: u64) -> Result<MethodOutcome> {
    let times: Vec<f64> = (0..x.snapshot_count()).map(|j| x.time_at(j)).collect();
    match &method.kind {
        MethodKind::Standard { eps_rank, q } => {
            let start = Instant::now();
            let model = if *q == 1 {
                fit_dmd(x, RankRule::Threshold(*eps_rank))?
            } else {
                fit_delay_dmd(x, *q, RankRule::Threshold(*eps_rank))?
            };
            let wall = start.elapsed().as_secs_f64();
            let errors = error_series(&model, x)?;
            Ok(MethodOutcome {
                label: method.name.clone(),
                branch: "standard".into(),
                measurements_used: x.state_dim(),
                rank: model.rank(),
                rank_before: None,
                errors,
                times,
                model,
                ialm: None,
                sketch: None,
                q: *q,
                wall_seconds: wall,
            })
        }
        MethodKind::Adaptive(cfg) => {
            let mut cfg = cfg.clone();
            cfg.seed = seed;
            let report = admd_fit(x, &cfg)?;
            Ok(outcome_from_report(report, method.name.clone(), times))
        }
    }
}

fn outcome_from_report(report: AdmdReport, label: String, times: Vec<f64>) -> MethodOutcome {
    let (branch, ialm, sketch, q) = match &report.branch {
        BranchTaken::LowRank { q, sketch } => (
            "lowrank".to_string(),
            None,
            sketch.as_ref().map(|d| (d.kind.to_string(), d.a)),
            *q,
        ),
        BranchTaken::FullRank { filter } => {
            let ialm = match filter {
                AppliedFilter::Ialm {
                    iterations,
                    residual,
                    converged,
                } => Some((*iterations, *residual, *converged)),
                AppliedFilter::Dft { .. } => None,
            };
            (format!("fullrank-{}", filter.label()), ialm, None, 1)
        }
    };
    MethodOutcome {
        label,
        branch,
        measurements_used: report.measurements_used,
        rank: report.rank_after,
        rank_before: Some(report.rank_before),
        errors: report.error_series,
        times,
        model: report.model,
        ialm,
        sketch,
        q,
        wall_seconds: report.wall_time.as_secs_f64(),
    }
}

/// Generate a dataset into `out_dir/snapshots.mat` + `out_dir/meta.txt`;
/// byte-identical for identical parameters and seed.
pub fn cmd_generate(ds: &DatasetSpec, out_dir: &Path, seed: u64) -> Result<(PathBuf, PathBuf)> {
    let (snap, meta_extra): (SnapshotMatrix, Vec<(String, String)>) = match ds {
        DatasetSpec::HiddenDynamics(p) => (
            datasets::hidden_dynamics(p)?,
            vec![
                ("nx".into(), p.nx.to_string()),
                ("nt".into(), p.nt.to_string()),
            ],
        ),
        DatasetSpec::DoubleGyre(p) => (
            datasets::double_gyre_vorticity(p)?,
            vec![
                ("nx".into(), p.nx.to_string()),
                ("ny".into(), p.ny.to_string()),
                ("nt".into(), p.nt.to_string()),
                ("layout".into(), "x-fastest".into()),
            ],
        ),
        DatasetSpec::Surrogate(p) => {
            let seeded = datasets::SurrogateParams {
                seed,
                ..p.clone()
            };
            (
                datasets::surrogate_turbulence(&seeded)?,
                vec![
                    ("m".into(), p.m.to_string()),
                    ("n".into(), p.n.to_string()),
                    ("waves".into(), p.waves.to_string()),
                    ("noise_std".into(), io::format_g17(p.noise_std)),
                    ("outlier_frac".into(), io::format_g17(p.outlier_frac)),
                    ("outlier_mag".into(), io::format_g17(p.outlier_mag)),
                ],
            )
        }
    };
    let mat_path = out_dir.join("snapshots.mat");
    let meta_path = out_dir.join("meta.txt");
    io::write_matrix(&mat_path, snap.data().view())?;
    let mut meta = io::Meta::new();
    meta.push("dataset", ds.name());
    meta.push("rows", snap.state_dim());
    meta.push("cols", snap.snapshot_count());
    meta.push("dt", io::format_g17(snap.dt()));
    meta.push("seed", seed);
    meta.push("rng", RNG_ALGORITHM);
    meta.push("format_version", io::MATRIX_FORMAT_VERSION);
    meta.push("generator_version", env!("CARGO_PKG_VERSION"));
    for (k, v) in meta_extra {
        meta.push(&k, v);
    }
    meta.write(&meta_path)?;
    Ok((mat_path, meta_path))
}

/// Load a snapshot matrix: `dt` comes from an explicit override, else the
/// `meta.txt` sidecar, else 1.0.
pub fn load_snapshots(input: &Path, dt_override: Option<f64>) -> Result<SnapshotMatrix> {
    let data = io::read_matrix(input)?;
    let dt = match dt_override {
        Some(dt) => dt,
        None => {
            let sidecar = io::sidecar_path(input);
            if sidecar.exists() {
                let meta = io::Meta::read(&sidecar)?;
                match meta.get("dt") {
                    Some(v) => v.parse().map_err(|_| AdmdError::Format {
                        path: sidecar.clone(),
                        offset: 0,
                        what: format!("cannot parse dt value `{v}`"),
                    })?,
                    None => 1.0,
                }
            } else {
                1.0
            }
        }
    };
    SnapshotMatrix::new(data, dt)
}

fn report_text(outcome: &MethodOutcome, input: &Path, seed: u64) -> String {
    let mut meta = io::Meta::new();
    meta.push("method", &outcome.label);
    meta.push("branch", &outcome.branch);
    meta.push("input", input.display());
    meta.push("q", outcome.q);
    match &outcome.sketch {
        Some((kind, a)) => {
            meta.push("sketch", kind);
            meta.push("sketch_a", a);
        }
        None => meta.push("sketch", "none"),
    }
    if let Some(r) = outcome.rank_before {
        meta.push("rank_before", r);
    }
    meta.push("rank", outcome.rank);
    meta.push("measurements_used", outcome.measurements_used);
    if let Some((iterations, residual, converged)) = outcome.ialm {
        meta.push("ialm_iterations", iterations);
        meta.push("ialm_residual", io::format_g17(residual));
        meta.push("ialm_converged", converged);
    }
    match outcome.max_error() {
        Some(e) => meta.push("max_error", io::format_g17(e)),
        None => meta.push("max_error", "undefined"),
    }
    match outcome.final_error() {
        Some(e) => meta.push("final_error", io::format_g17(e)),
        None => meta.push("final_error", "undefined"),
    }
    meta.push("wall_time_s", format!("{:.6}", outcome.wall_seconds));
    meta.push("seed", seed);
    meta.push("rng", RNG_ALGORITHM);
    meta.to_text()
}

#[derive(Debug)]
pub struct FitArtifacts {
    pub spectrum_csv: PathBuf,
    pub errors_csv: PathBuf,
    pub report_txt: PathBuf,
    pub outcome: MethodOutcome,
}

/// Fit one method on a stored snapshot matrix and write
/// `spectrum.csv`, `errors.csv`, `report.txt` into `out_dir`.
pub fn cmd_fit(
    input: &Path,
    method: &MethodSpec,
    out_dir: &Path,
    seed: u64,
    strict: bool,
    dt_override: Option<f64>,
) -> Result<FitArtifacts> {
    let x = load_snapshots(input, dt_override)?;
    let outcome = run_method(&x, method, seed)?;
    if strict {
        if let Some((iterations, residual, false)) = outcome.ialm {
            return Err(AdmdError::NonConvergence {
                iterations,
                residual,
            });
        }
    }
    let spectrum = SpectrumReport::from_model(&outcome.model);
    let spectrum_csv = out_dir.join("spectrum.csv");
    let errors_csv = out_dir.join("errors.csv");
    let report_txt = out_dir.join("report.txt");
    io::atomic_write(&spectrum_csv, io::spectrum_csv(&spectrum).as_bytes())?;
    io::atomic_write(
        &errors_csv,
        io::errors_csv(&outcome.times, &outcome.errors).as_bytes(),
    )?;
    io::atomic_write(&report_txt, report_text(&outcome, input, seed).as_bytes())?;
    Ok(FitArtifacts {
        spectrum_csv,
        errors_csv,
        report_txt,
        outcome,
    })
}

/// Run at least two methods on the same input and tabulate them.
pub fn cmd_compare(
    input: &Path,
    methods: &[MethodSpec],
    out_dir: &Path,
    seed: u64,
    strict: bool,
    dt_override: Option<f64>,
) -> Result<(PathBuf, Vec<MethodOutcome>)> {
    if methods.len() < 2 {
        return Err(AdmdError::InvalidParameter(format!(
            "compare needs at least 2 methods, got {}",
            methods.len()
        )));
    }
    let x = load_snapshots(input, dt_override)?;
    let mut outcomes = Vec::with_capacity(methods.len());
    for m in methods {
        let outcome = run_method(&x, m, seed)?;
        if strict {
            if let Some((iterations, residual, false)) = outcome.ialm {
                return Err(AdmdError::NonConvergence {
                    iterations,
                    residual,
                });
            }
        }
        outcomes.push(outcome);
    }
    let rows: Vec<io::CompareRow> = outcomes
        .iter()
        .map(|o| io::CompareRow {
            name: o.label.clone(),
            measurements_used: o.measurements_used,
            rank: o.rank,
            max_error: o.max_error(),
            final_error: o.final_error(),
        })
        .collect();
    let path = out_dir.join("compare.csv");
    io::atomic_write(&path, io::compare_csv(&rows).as_bytes())?;
    Ok((path, outcomes))
}

/// Write the singular-value spectrum of a stored matrix.
pub fn cmd_spectrum(input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let data = io::read_matrix(input)?;
    let sv = singular_spectrum(data.view())?;
    let path = out_dir.join("singular_values.csv");
    io::atomic_write(&path, io::singular_values_csv(&sv).as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{AdmdConfig, SketchSpec};
    use crate::datasets::HiddenDynamicsParams;

    fn tmpdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("admd-runner-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn generate_then_fit_hidden_dynamics() {
        let dir = tmpdir("genfit");
        let ds = DatasetSpec::HiddenDynamics(HiddenDynamicsParams::default());
        let (mat, meta) = cmd_generate(&ds, &dir, 1).unwrap();
        assert!(mat.exists() && meta.exists());
        let method = MethodSpec {
            name: "standard".into(),
            kind: MethodKind::Standard {
                eps_rank: 1e-12,
                q: 1,
            },
        };
        let artifacts = cmd_fit(&mat, &method, &dir, 1, false, None).unwrap();
        assert_eq!(artifacts.outcome.rank, 4);
        assert_eq!(artifacts.outcome.measurements_used, 100);
        let max = artifacts.outcome.max_error().unwrap();
        assert!(max <= 1e-8, "hidden dynamics error {max:.3e}");
        let report = std::fs::read_to_string(&artifacts.report_txt).unwrap();
        assert!(report.contains("measurements_used = 100"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn generate_is_deterministic() {
        let da = tmpdir("det-a");
        let db = tmpdir("det-b");
        let ds = DatasetSpec::Surrogate(crate::datasets::SurrogateParams {
            m: 50,
            n: 30,
            ..Default::default()
        });
        let (ma, _) = cmd_generate(&ds, &da, 9).unwrap();
        let (mb, _) = cmd_generate(&ds, &db, 9).unwrap();
        assert_eq!(std::fs::read(&ma).unwrap(), std::fs::read(&mb).unwrap());
        let (mc, _) = cmd_generate(&ds, &db, 10).unwrap();
        assert_ne!(std::fs::read(&ma).unwrap(), std::fs::read(&mc).unwrap());
        std::fs::remove_dir_all(&da).ok();
        std::fs::remove_dir_all(&db).ok();
    }

    #[test]
    fn compare_requires_two_methods() {
        let dir = tmpdir("cmp");
        let ds = DatasetSpec::HiddenDynamics(HiddenDynamicsParams {
            nx: 30,
            nt: 20,
            ..Default::default()
        });
        let (mat, _) = cmd_generate(&ds, &dir, 1).unwrap();
        let method = MethodSpec {
            name: "standard".into(),
            kind: MethodKind::Standard {
                eps_rank: 1e-12,
                q: 1,
            },
        };
        let err = cmd_compare(&mat, &[method], &dir, 1, false, None).unwrap_err();
        assert!(matches!(err, AdmdError::InvalidParameter(_)));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fit_missing_file_names_path() {
        let method = MethodSpec {
            name: "standard".into(),
            kind: MethodKind::Standard {
                eps_rank: 1e-12,
                q: 1,
            },
        };
        let missing = Path::new("/definitely/not/here.mat");
        let err = cmd_fit(missing, &method, Path::new("/tmp"), 1, false, None).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("not/here.mat"), "diagnostic: {text}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn sketched_fit_report_accounts_measurements() {
        let dir = tmpdir("sketchfit");
        let ds = DatasetSpec::HiddenDynamics(HiddenDynamicsParams::default());
        let (mat, _) = cmd_generate(&ds, &dir, 5).unwrap();
        let method = MethodSpec {
            name: "admd-gauss".into(),
            kind: MethodKind::Adaptive(AdmdConfig {
                sketch: SketchSpec::Gaussian { a: 10 },
                ..Default::default()
            }),
        };
        let artifacts = cmd_fit(&mat, &method, &dir, 5, false, None).unwrap();
        assert_eq!(artifacts.outcome.measurements_used, 10);
        let report = std::fs::read_to_string(&artifacts.report_txt).unwrap();
        assert!(report.contains("measurements_used = 10"));
        assert!(report.contains("sketch = gaussian"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
