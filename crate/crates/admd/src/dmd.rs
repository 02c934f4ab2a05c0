//! Exact dynamic mode decomposition on snapshot pairs.
//!
//! A snapshot matrix `X` holds one state vector per column at uniform time
//! spacing `dt`. Fitting splits `X` into the leading and trailing column
//! blocks, projects the one-step map onto the dominant left singular
//! subspace of the first block, and eigendecomposes the reduced operator.
//! The resulting modes, per-step eigenvalues and continuous-time rates
//! reconstruct the state at arbitrary `t`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{c64, Eig, JobSvd, LeastSquaresSvd, SVDDC};

use crate::error::{AdmdError, Result};

/// Real snapshot data with its sampling interval.
///
/// Columns are states at uniformly spaced times; construction validates
/// that at least two snapshots are present, `dt > 0`, and all entries are
/// finite.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    data: Array2<f64>,
    dt: f64,
}

impl SnapshotMatrix {
    pub fn new(data: Array2<f64>, dt: f64) -> Result<Self> {
        if data.ncols() < 2 {
            return Err(AdmdError::TooFewSnapshots { got: data.ncols() });
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(AdmdError::InvalidInput(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(AdmdError::NonFinite);
        }
        Ok(Self { data, dt })
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// State dimension M (rows).
    pub fn state_dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of snapshots N (columns).
    pub fn snapshot_count(&self) -> usize {
        self.data.ncols()
    }

    /// Time stamp of column `j`, with the first snapshot at t = 0.
    pub fn time_at(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }
}

/// How many singular directions the fit retains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Keep singular values above `eps_rel * sigma_max`.
    Threshold(f64),
    /// Keep exactly this many directions.
    Fixed(usize),
}

/// Default relative threshold separating numerical rank from noise floor.
pub const DEFAULT_RANK_EPS: f64 = 1e-12;

/// Count of singular values of `x` greater than `eps_rel` times the largest.
///
/// The zero matrix has rank 0; the threshold scales with the data so the
/// classification is invariant under rescaling `x`.
pub fn numeric_rank(x: ArrayView2<'_, f64>, eps_rel: f64) -> Result<usize> {
    if !eps_rel.is_finite() || eps_rel <= 0.0 {
        return Err(AdmdError::InvalidParameter(format!(
            "rank threshold must be positive and finite, got {eps_rel}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AdmdError::NonFinite);
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Ok(0);
    }
    let (_, sv, _) = x.svddc(JobSvd::None)?;
    Ok(rank_from_singular_values(sv.as_slice().unwrap(), eps_rel))
}

pub(crate) fn rank_from_singular_values(sv: &[f64], eps_rel: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = eps_rel * smax;
    sv.iter().filter(|&&s| s > thr).count()
}

/// The leading (columns 1..N-1) and trailing (columns 2..N) snapshot blocks.
pub fn split_snapshots(x: &SnapshotMatrix) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
    let n = x.snapshot_count();
    let x1 = x.data.slice(s![.., ..n - 1]);
    let x2 = x.data.slice(s![.., 1..]);
    (x1, x2)
}

/// Truncated SVD of the leading snapshot block.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: Array2<f64>,
    sigma: Array1<f64>,
    v: Array2<f64>,
    rank: usize,
}

impl SvdFactors {
    /// Thin SVD of `x1` truncated according to `rule`.
    pub fn compute(x1: ArrayView2<'_, f64>, rule: RankRule) -> Result<Self> {
        let (u, sv, vt) = x1.svddc(JobSvd::Some)?;
        let u = u.expect("left singular vectors requested");
        let vt = vt.expect("right singular vectors requested");
        let sv_slice = sv.as_slice().unwrap();
        let max_rank = sv.len().min(x1.nrows()).min(x1.ncols());
        let rank = match rule {
            RankRule::Threshold(eps_rel) => {
                if !eps_rel.is_finite() || eps_rel <= 0.0 {
                    return Err(AdmdError::InvalidParameter(format!(
                        "rank threshold must be positive and finite, got {eps_rel}"
                    )));
                }
                rank_from_singular_values(sv_slice, eps_rel)
            }
            RankRule::Fixed(r) => {
                if r < 1 || r > max_rank {
                    return Err(AdmdError::InvalidParameter(format!(
                        "fixed rank {r} outside 1..={max_rank}"
                    )));
                }
                if sv_slice[r - 1] <= 0.0 {
                    return Err(AdmdError::SingularTruncation { index: r - 1 });
                }
                r
            }
        };
        if rank == 0 {
            return Err(AdmdError::DegenerateData);
        }
        Ok(Self {
            u: u.slice(s![.., ..rank]).to_owned(),
            sigma: sv.slice(s![..rank]).to_owned(),
            v: vt.slice(s![..rank, ..]).t().to_owned(),
            rank,
        })
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn sigma(&self) -> &Array1<f64> {
        &self.sigma
    }

    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// The rank-r operator `U^T X2 V Sigma^{-1}` whose eigenvalues are the
/// per-step DMD eigenvalues.
pub fn reduced_operator(
    x1: ArrayView2<'_, f64>,
    x2: ArrayView2<'_, f64>,
    svd: &SvdFactors,
) -> Result<Array2<f64>> {
    if x1.dim() != x2.dim() {
        return Err(AdmdError::DimensionMismatch(format!(
            "snapshot blocks {:?} vs {:?}",
            x1.dim(),
            x2.dim()
        )));
    }
    if svd.u.nrows() != x1.nrows() || svd.v.nrows() != x1.ncols() {
        return Err(AdmdError::DimensionMismatch(
            "SVD factors do not match the snapshot block".into(),
        ));
    }
    if let Some(index) = svd.sigma.iter().position(|&s| s <= 0.0) {
        return Err(AdmdError::SingularTruncation { index });
    }
    let mut st = svd.u.t().dot(&x2).dot(&svd.v);
    for (j, mut col) in st.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v / svd.sigma[j]);
    }
    Ok(st)
}

pub(crate) fn eig_dense(a: &Array2<f64>) -> Result<(Array1<c64>, Array2<c64>)> {
    Ok(a.eig()?)
}

pub(crate) fn to_complex(x: ArrayView2<'_, f64>) -> Array2<c64> {
    x.mapv(|v| c64::new(v, 0.0))
}

/// Fitted DMD model: spatial modes with per-step and continuous spectra.
///
/// `model_dim` is the row dimension the modes live in (the augmented
/// dimension when fitted on delay-stacked data); `physical_dim` is the
/// original state dimension that reconstructions are truncated to.
#[derive(Debug, Clone)]
pub struct DmdModel {
    modes: Array2<c64>,
    discrete_eigs: Array1<c64>,
    continuous_eigs: Array1<c64>,
    amplitudes: Array1<c64>,
    dt: f64,
    rank: usize,
    physical_dim: usize,
}

impl DmdModel {
    /// Modes as columns, `model_dim x rank`.
    pub fn modes(&self) -> &Array2<c64> {
        &self.modes
    }

    /// Per-step eigenvalues `mu`.
    pub fn discrete_eigs(&self) -> &Array1<c64> {
        &self.discrete_eigs
    }

    /// Continuous rates `omega = ln(mu) / dt` (principal branch).
    pub fn continuous_eigs(&self) -> &Array1<c64> {
        &self.continuous_eigs
    }

    /// Mode amplitudes `b` fitted against the first snapshot.
    pub fn amplitudes(&self) -> &Array1<c64> {
        &self.amplitudes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Row dimension of the modes (augmented when delay-embedded).
    pub fn model_dim(&self) -> usize {
        self.modes.nrows()
    }

    /// Original state dimension reconstructions are truncated to.
    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    /// `Phi diag(exp(omega t)) b` over the full model dimension.
    ///
    /// `t` may lie outside the training window; extrapolation is the
    /// caller's judgement call, not an error.
    pub fn reconstruct(&self, t: f64) -> Array1<c64> {
        let steps = t / self.dt;
        let weights: Array1<c64> = self
            .discrete_eigs
            .iter()
            .zip(self.amplitudes.iter())
            .map(|(mu, b)| mu.powf(steps) * b)
            .collect();
        self.modes.dot(&weights)
    }

    /// Reconstruction truncated to the physical state dimension.
    pub fn reconstruct_physical(&self, t: f64) -> Array1<c64> {
        let full = self.reconstruct(t);
        full.slice(s![..self.physical_dim]).to_owned()
    }
}

/// Build a model from modes and per-step eigenvalues: derives the
/// continuous spectrum, fits amplitudes against the first snapshot by
/// least squares, and orders modes by |amplitude| (ties by |mu|).
pub(crate) fn assemble_model(
    modes: Array2<c64>,
    discrete: Array1<c64>,
    dt: f64,
    first_snapshot: ArrayView1<'_, f64>,
    physical_dim: usize,
) -> Result<DmdModel> {
    let rank = discrete.len();
    if modes.ncols() != rank {
        return Err(AdmdError::DimensionMismatch(format!(
            "{} modes vs {} eigenvalues",
            modes.ncols(),
            rank
        )));
    }
    if modes.nrows() != first_snapshot.len() {
        return Err(AdmdError::DimensionMismatch(format!(
            "modes have {} rows but the first snapshot has {} entries",
            modes.nrows(),
            first_snapshot.len()
        )));
    }
    let continuous: Array1<c64> = discrete.mapv(|mu| mu.ln() / dt);
    let rhs: Array1<c64> = first_snapshot.mapv(|v| c64::new(v, 0.0));
    let amplitudes = modes.least_squares(&rhs)?.solution;

    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&i, &j| {
        amplitudes[j]
            .norm()
            .total_cmp(&amplitudes[i].norm())
            .then(discrete[j].norm().total_cmp(&discrete[i].norm()))
    });

    let modes_sorted = {
        let mut out = Array2::<c64>::zeros((modes.nrows(), rank));
        for (dst, &src) in order.iter().enumerate() {
            out.column_mut(dst).assign(&modes.column(src));
        }
        out
    };
    let pick = |a: &Array1<c64>| -> Array1<c64> { order.iter().map(|&i| a[i]).collect() };

    Ok(DmdModel {
        modes: modes_sorted,
        discrete_eigs: pick(&discrete),
        continuous_eigs: pick(&continuous),
        amplitudes: pick(&amplitudes),
        dt,
        rank,
        physical_dim,
    })
}

pub(crate) fn fit_from_pair(
    x1: ArrayView2<'_, f64>,
    x2: ArrayView2<'_, f64>,
    dt: f64,
    rule: RankRule,
    physical_dim: usize,
) -> Result<DmdModel> {
    if x1.iter().all(|&v| v == 0.0) {
        return Err(AdmdError::DegenerateData);
    }
    let svd = SvdFactors::compute(x1, rule)?;
    let st = reduced_operator(x1, x2, &svd)?;
    let (mu, y) = eig_dense(&st)?;
    let phi = to_complex(svd.u().view()).dot(&y);
    assemble_model(phi, mu, dt, x1.column(0), physical_dim)
}

/// Fit an exact DMD model on the snapshot matrix.
pub fn fit_dmd(x: &SnapshotMatrix, rule: RankRule) -> Result<DmdModel> {
    let (x1, x2) = split_snapshots(x);
    fit_from_pair(x1, x2, x.dt(), rule, x.state_dim())
}
