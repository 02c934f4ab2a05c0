//! The adaptive dispatcher: classify the data's numeric rank, pick the
//! matching pre-processing branch, fit the model, and assemble a report.
//!
//! Rank-deficient data goes through delay embedding and (optionally) a
//! random sketch of the augmented rows; full-rank data is first tamed by
//! either the spatial DFT mask or the robust low-rank recovery, chosen
//! explicitly or by an outlier heuristic.

use std::time::{Duration, Instant};

use ndarray::ArrayView2;

use crate::delay::hankel_pair;
use crate::dmd::{fit_from_pair, numeric_rank, DmdModel, RankRule, SnapshotMatrix};
use crate::error::{AdmdError, Result};
use crate::evaluation::error_series;
use crate::filters::{dft_filter, rpca_ialm, DftFilterPolicy, RpcaParams};
use crate::sketch::{fit_sketched_dmd, ProjectionOperator, RNG_ALGORITHM};
use crate::DEFAULT_SEED;

/// Low- vs full-rank classification of a data matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankClassKind {
    LowRank,
    FullRank,
}

/// Numeric rank with its classification ratio.
#[derive(Debug, Clone, Copy)]
pub struct RankClass {
    pub kind: RankClassKind,
    pub rank: usize,
    /// `rank / min(M, N)`.
    pub ratio: f64,
}

/// `LowRank` when the numeric rank is at most `rho_lowrank * min(M, N)`.
pub fn classify(x: ArrayView2<'_, f64>, eps_rank: f64, rho_lowrank: f64) -> Result<RankClass> {
    if !rho_lowrank.is_finite() || rho_lowrank <= 0.0 || rho_lowrank > 1.0 {
        return Err(AdmdError::InvalidParameter(format!(
            "classification ratio must lie in (0, 1], got {rho_lowrank}"
        )));
    }
    let rank = numeric_rank(x, eps_rank)?;
    let min_dim = x.nrows().min(x.ncols()).max(1);
    let ratio = rank as f64 / min_dim as f64;
    let kind = if ratio <= rho_lowrank {
        RankClassKind::LowRank
    } else {
        RankClassKind::FullRank
    };
    Ok(RankClass { kind, rank, ratio })
}

/// Sketch requested for the low-rank branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchSpec {
    None,
    Gaussian { a: usize },
    Achlioptas { a: usize, s: u32 },
    RowSample { a: usize },
}

impl SketchSpec {
    pub fn label(&self) -> &'static str {
        match self {
            SketchSpec::None => "none",
            SketchSpec::Gaussian { .. } => "gaussian",
            SketchSpec::Achlioptas { .. } => "achlioptas",
            SketchSpec::RowSample { .. } => "rowsample",
        }
    }
}

/// Filter requested for the full-rank branch.
#[derive(Debug, Clone, PartialEq)]
pub enum FullRankFilter {
    Dft(DftFilterPolicy),
    Ialm(RpcaParams),
    /// Pick by the sparse-outlier heuristic.
    Auto,
}

/// Complete dispatcher configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmdConfig {
    /// Relative rank threshold.
    pub eps_rank: f64,
    /// Low-rank classification ratio.
    pub rho_lowrank: f64,
    /// Delay window on the low-rank branch.
    pub q: usize,
    pub sketch: SketchSpec,
    pub fullrank_filter: FullRankFilter,
    pub seed: u64,
}

impl Default for AdmdConfig {
    fn default() -> Self {
        Self {
            eps_rank: crate::dmd::DEFAULT_RANK_EPS,
            rho_lowrank: 0.5,
            q: 1,
            sketch: SketchSpec::None,
            fullrank_filter: FullRankFilter::Auto,
            seed: DEFAULT_SEED,
        }
    }
}

impl AdmdConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.eps_rank.is_finite() || self.eps_rank <= 0.0 {
            return Err(AdmdError::InvalidParameter(
                "rank threshold must be positive".into(),
            ));
        }
        if !self.rho_lowrank.is_finite() || self.rho_lowrank <= 0.0 || self.rho_lowrank > 1.0 {
            return Err(AdmdError::InvalidParameter(
                "classification ratio must lie in (0, 1]".into(),
            ));
        }
        if self.q < 1 {
            return Err(AdmdError::InvalidParameter("q must be at least 1".into()));
        }
        match self.sketch {
            SketchSpec::Achlioptas { s, .. } if s != 1 && s != 3 => {
                return Err(AdmdError::InvalidParameter(
                    "achlioptas sparsity s must be 1 or 3".into(),
                ))
            }
            SketchSpec::Gaussian { a }
            | SketchSpec::Achlioptas { a, .. }
            | SketchSpec::RowSample { a }
                if a == 0 =>
            {
                return Err(AdmdError::InvalidParameter(
                    "sketch dimension a must be at least 1".into(),
                ))
            }
            _ => {}
        }
        if let FullRankFilter::Ialm(params) = &self.fullrank_filter {
            params.validate()?;
        }
        Ok(())
    }
}

/// Sketch actually constructed on the low-rank branch.
#[derive(Debug, Clone)]
pub struct SketchDescriptor {
    pub kind: &'static str,
    pub a: usize,
    /// Row dimension the operator was built for (the augmented dimension).
    pub input_rows: usize,
}

/// Filter actually applied on the full-rank branch.
#[derive(Debug, Clone)]
pub enum AppliedFilter {
    Dft {
        tau_rel: f64,
    },
    Ialm {
        iterations: usize,
        residual: f64,
        converged: bool,
    },
}

impl AppliedFilter {
    pub fn label(&self) -> &'static str {
        match self {
            AppliedFilter::Dft { .. } => "dft",
            AppliedFilter::Ialm { .. } => "ialm",
        }
    }
}

/// Which pipeline ran, with the pre-processing that was actually applied.
#[derive(Debug, Clone)]
pub enum BranchTaken {
    LowRank {
        q: usize,
        sketch: Option<SketchDescriptor>,
    },
    FullRank {
        filter: AppliedFilter,
    },
}

impl BranchTaken {
    pub fn label(&self) -> &'static str {
        match self {
            BranchTaken::LowRank { .. } => "lowrank",
            BranchTaken::FullRank { .. } => "fullrank",
        }
    }
}

/// Everything a fit produces: the branch, accounting, model and errors.
#[derive(Debug, Clone)]
pub struct AdmdReport {
    pub branch: BranchTaken,
    /// `a` when sketched, `M` otherwise.
    pub measurements_used: usize,
    /// Numeric rank of the raw data.
    pub rank_before: usize,
    /// Rank retained by the fitted model.
    pub rank_after: usize,
    pub model: DmdModel,
    /// Per-snapshot relative errors against the raw input.
    pub error_series: Vec<Option<f64>>,
    pub wall_time: Duration,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub config: AdmdConfig,
}

/// Column-wise robust z-score scan: true when more than 0.1% of entries
/// deviate from their column median by over 6 scaled MADs.
pub(crate) fn has_large_sparse_outliers(x: ArrayView2<'_, f64>) -> bool {
    const Z_CUT: f64 = 6.0;
    const FRACTION_CUT: f64 = 1e-3;
    let (m, n) = x.dim();
    if m == 0 || n == 0 {
        return false;
    }
    let mut flagged = 0usize;
    let mut buf: Vec<f64> = Vec::with_capacity(m);
    for j in 0..n {
        buf.clear();
        buf.extend(x.column(j).iter().copied());
        buf.sort_by(f64::total_cmp);
        let median = buf[m / 2];
        let mut dev: Vec<f64> = x.column(j).iter().map(|v| (v - median).abs()).collect();
        dev.sort_by(f64::total_cmp);
        let mad = dev[m / 2];
        let scale = 1.4826 * mad;
        if scale == 0.0 {
            flagged += x.column(j).iter().filter(|&&v| v != median).count();
        } else {
            flagged += x
                .column(j)
                .iter()
                .filter(|&&v| (v - median).abs() > Z_CUT * scale)
                .count();
        }
    }
    flagged as f64 > FRACTION_CUT * (m * n) as f64
}

/// Run the full adaptive pipeline on `x`.
///
/// The error series is always measured against the raw input, even when a
/// filter pre-processed the data, so variants stay comparable.
pub fn admd_fit(x: &SnapshotMatrix, config: &AdmdConfig) -> Result<AdmdReport> {
    config.validate()?;
    let start = Instant::now();
    let m = x.state_dim();
    let rank_class = classify(x.data().view(), config.eps_rank, config.rho_lowrank)?;
    let rule = RankRule::Threshold(config.eps_rank);

    let (model, branch, measurements_used) = match rank_class.kind {
        RankClassKind::LowRank => {
            let (x1, x2) = hankel_pair(x, config.q)?;
            let aug_rows = x1.nrows();
            match config.sketch {
                SketchSpec::None => {
                    let model = fit_from_pair(x1.view(), x2.view(), x.dt(), rule, m)?;
                    (
                        model,
                        BranchTaken::LowRank {
                            q: config.q,
                            sketch: None,
                        },
                        m,
                    )
                }
                spec => {
                    let op = match spec {
                        SketchSpec::Gaussian { a } => {
                            ProjectionOperator::gaussian(aug_rows, a, config.seed)?
                        }
                        SketchSpec::Achlioptas { a, s } => {
                            ProjectionOperator::achlioptas(aug_rows, a, s, config.seed)?
                        }
                        SketchSpec::RowSample { a } => {
                            ProjectionOperator::row_sample(aug_rows, a, config.seed)?
                        }
                        SketchSpec::None => unreachable!(),
                    };
                    let a = op.sketch_dim();
                    let model =
                        fit_sketched_dmd(x1.view(), x2.view(), &op, x.dt(), rule, m)?;
                    (
                        model,
                        BranchTaken::LowRank {
                            q: config.q,
                            sketch: Some(SketchDescriptor {
                                kind: spec.label(),
                                a,
                                input_rows: aug_rows,
                            }),
                        },
                        a,
                    )
                }
            }
        }
        RankClassKind::FullRank => {
            let choice = match &config.fullrank_filter {
                FullRankFilter::Auto => {
                    if has_large_sparse_outliers(x.data().view()) {
                        FullRankFilter::Ialm(RpcaParams::default())
                    } else {
                        FullRankFilter::Dft(DftFilterPolicy::default())
                    }
                }
                other => other.clone(),
            };
            let (processed, applied) = match choice {
                FullRankFilter::Dft(policy) => (
                    dft_filter(x.data().view(), &policy)?,
                    AppliedFilter::Dft {
                        tau_rel: policy.tau_rel(),
                    },
                ),
                FullRankFilter::Ialm(params) => {
                    let result = rpca_ialm(x.data().view(), &params)?;
                    (
                        result.low_rank,
                        AppliedFilter::Ialm {
                            iterations: result.iterations,
                            residual: result.residual,
                            converged: result.converged,
                        },
                    )
                }
                FullRankFilter::Auto => unreachable!(),
            };
            let filtered = SnapshotMatrix::new(processed, x.dt())?;
            let model = crate::dmd::fit_dmd(&filtered, rule)?;
            (model, BranchTaken::FullRank { filter: applied }, m)
        }
    };

    let errors = error_series(&model, x)?;
    let rank_after = model.rank();
    Ok(AdmdReport {
        branch,
        measurements_used,
        rank_before: rank_class.rank,
        rank_after,
        model,
        error_series: errors,
        wall_time: start.elapsed(),
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM,
        config: config.clone(),
    })
}
