//! Random projection and row-sampling operators.
//!
//! A sketch compresses the state dimension before the DMD fit: `Y = R X`
//! with `R` an `a x M` random matrix, or a plain row extraction for the
//! sensor-placement variant. Entry scales are chosen so the gram matrix
//! `R^T R` is the identity in expectation, which leaves the DMD spectrum
//! untouched while shrinking the SVD cost. Modes are recovered in the full
//! state space from the unsketched trailing block.

use ndarray::{Array2, ArrayView2};
use ndarray_linalg::c64;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::dmd::{assemble_model, eig_dense, reduced_operator, DmdModel, RankRule, SvdFactors};
use crate::error::{AdmdError, Result};

/// Stream RNG used for every seeded draw in the crate.
pub const RNG_ALGORITHM: &str = "chacha12";

pub(crate) fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Flavor of the sketching operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    /// Dense i.i.d. normal entries with variance 1/a.
    Gaussian,
    /// Sparse sign entries `{-sqrt(s), 0, +sqrt(s)}` scaled by 1/sqrt(a).
    Achlioptas { s: u32 },
    /// Row extraction without replacement.
    RowSample,
}

impl SketchKind {
    pub fn label(&self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Achlioptas { .. } => "achlioptas",
            SketchKind::RowSample => "rowsample",
        }
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Dense(Array2<f64>),
    Rows(Vec<usize>),
}

/// An `a x M` sketching operator together with its provenance (kind, seed).
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    kind: SketchKind,
    payload: Payload,
    a: usize,
    m: usize,
    seed: u64,
}

fn check_dims(m: usize, a: usize) -> Result<()> {
    if a == 0 {
        return Err(AdmdError::InvalidParameter(
            "sketch dimension a must be at least 1".into(),
        ));
    }
    if a > m {
        return Err(AdmdError::SketchTooLarge { a, m });
    }
    Ok(())
}

impl ProjectionOperator {
    /// Dense Gaussian sketch: entries i.i.d. `N(0, 1/a)`.
    pub fn gaussian(m: usize, a: usize, seed: u64) -> Result<Self> {
        check_dims(m, a)?;
        let mut rng = seeded_rng(seed);
        let scale = (1.0 / a as f64).sqrt();
        let normal = StandardNormal;
        let mat = Array2::from_shape_fn((a, m), |_| {
            let z: f64 = normal.sample(&mut rng);
            z * scale
        });
        Ok(Self {
            kind: SketchKind::Gaussian,
            payload: Payload::Dense(mat),
            a,
            m,
            seed,
        })
    }

    /// Sparse sign sketch: raw entries `-sqrt(s), 0, +sqrt(s)` with
    /// probabilities `1/(2s), 1 - 1/s, 1/(2s)`, then scaled by `1/sqrt(a)`.
    pub fn achlioptas(m: usize, a: usize, s: u32, seed: u64) -> Result<Self> {
        if s != 1 && s != 3 {
            return Err(AdmdError::InvalidParameter(format!(
                "achlioptas sparsity s must be 1 or 3, got {s}"
            )));
        }
        check_dims(m, a)?;
        let mut rng = seeded_rng(seed);
        let root_s = (s as f64).sqrt();
        let scale = 1.0 / (a as f64).sqrt();
        let neg_cut = 1.0 / (2.0 * s as f64);
        let pos_cut = 1.0 / s as f64;
        let unif = rand::distributions::Uniform::new(0.0f64, 1.0);
        let mat = Array2::from_shape_fn((a, m), |_| {
            let u = unif.sample(&mut rng);
            if u < neg_cut {
                -root_s * scale
            } else if u < pos_cut {
                root_s * scale
            } else {
                0.0
            }
        });
        Ok(Self {
            kind: SketchKind::Achlioptas { s },
            payload: Payload::Dense(mat),
            a,
            m,
            seed,
        })
    }

    /// Uniform row sample without replacement ("sensors at a few nodes").
    pub fn row_sample(m: usize, a: usize, seed: u64) -> Result<Self> {
        check_dims(m, a)?;
        let mut rng = seeded_rng(seed);
        let indices = rand::seq::index::sample(&mut rng, m, a).into_vec();
        Ok(Self {
            kind: SketchKind::RowSample,
            payload: Payload::Rows(indices),
            a,
            m,
            seed,
        })
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    /// Sketch dimension `a`.
    pub fn sketch_dim(&self) -> usize {
        self.a
    }

    /// Expected input row count `M`.
    pub fn state_dim(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Dense operator matrix, if this is not a row sample.
    pub fn dense_matrix(&self) -> Option<&Array2<f64>> {
        match &self.payload {
            Payload::Dense(m) => Some(m),
            Payload::Rows(_) => None,
        }
    }

    /// Selected row indices, if this is a row sample.
    pub fn row_indices(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::Dense(_) => None,
            Payload::Rows(ix) => Some(ix),
        }
    }

    /// Apply the operator: `R X`, or row extraction for a row sample.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.m {
            return Err(AdmdError::DimensionMismatch(format!(
                "operator expects {} rows, data has {}",
                self.m,
                x.nrows()
            )));
        }
        Ok(match &self.payload {
            Payload::Dense(r) => r.dot(&x),
            Payload::Rows(ix) => {
                let mut out = Array2::<f64>::zeros((ix.len(), x.ncols()));
                for (dst, &src) in ix.iter().enumerate() {
                    out.row_mut(dst).assign(&x.row(src));
                }
                out
            }
        })
    }
}

/// Recover full-dimensional DMD modes from a sketched fit:
/// `Phi = X2_full V_c Sigma_c^{-1} W`, with `V_c, Sigma_c` from the SVD of
/// the sketched leading block and `W` the eigenvectors of the sketched
/// reduced operator.
pub fn lift_modes(
    x2_full: ArrayView2<'_, f64>,
    sketched_svd: &SvdFactors,
    eigvecs: &Array2<c64>,
) -> Result<Array2<c64>> {
    let r = sketched_svd.rank();
    if x2_full.ncols() != sketched_svd.v().nrows() {
        return Err(AdmdError::DimensionMismatch(format!(
            "trailing block has {} columns, sketched SVD expects {}",
            x2_full.ncols(),
            sketched_svd.v().nrows()
        )));
    }
    if eigvecs.dim() != (r, r) {
        return Err(AdmdError::DimensionMismatch(format!(
            "eigenvector matrix {:?} does not match rank {r}",
            eigvecs.dim()
        )));
    }
    let mut base = x2_full.dot(sketched_svd.v());
    for (j, mut col) in base.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v / sketched_svd.sigma()[j]);
    }
    Ok(crate::dmd::to_complex(base.view()).dot(eigvecs))
}

/// DMD on sketched snapshots with full-space mode recovery.
///
/// The spectrum comes from the compressed pair `(R X1, R X2)`; modes are
/// lifted through the unsketched `X2` so reconstructions and amplitudes
/// live in the original state space.
pub fn fit_sketched_dmd(
    x1_full: ArrayView2<'_, f64>,
    x2_full: ArrayView2<'_, f64>,
    op: &ProjectionOperator,
    dt: f64,
    rule: RankRule,
    physical_dim: usize,
) -> Result<DmdModel> {
    let x1c = op.apply(x1_full)?;
    let x2c = op.apply(x2_full)?;
    if x1c.iter().all(|&v| v == 0.0) {
        return Err(AdmdError::DegenerateData);
    }
    let svd = SvdFactors::compute(x1c.view(), rule)?;
    let st = reduced_operator(x1c.view(), x2c.view(), &svd)?;
    let (mu, w) = eig_dense(&st)?;
    let phi = lift_modes(x2_full, &svd, &w)?;
    assemble_model(phi, mu, dt, x1_full.column(0), physical_dim)
}

/// Convenience wrapper over [`fit_sketched_dmd`] starting from a snapshot
/// matrix instead of a pre-split pair.
pub fn fit_sketched_snapshots(
    x: &crate::dmd::SnapshotMatrix,
    op: &ProjectionOperator,
    rule: RankRule,
) -> Result<DmdModel> {
    let (x1, x2) = crate::dmd::split_snapshots(x);
    fit_sketched_dmd(x1, x2, op, x.dt(), rule, x.state_dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::{fit_dmd, numeric_rank, split_snapshots, SnapshotMatrix};
    use ndarray::Array2;
    use rand::Rng;

    fn low_rank_snapshots(seed: u64, m: usize, n: usize, r: usize) -> SnapshotMatrix {
        let mut rng = seeded_rng(seed);
        let left = Array2::from_shape_fn((m, r), |_| rng.gen_range(-1.0..1.0));
        let right = Array2::from_shape_fn((r, n), |_| rng.gen_range(-1.0..1.0));
        SnapshotMatrix::new(left.dot(&right), 1.0).unwrap()
    }

    #[test]
    fn gaussian_scalar_case_is_standard_normal_scale() {
        // a = M = 1: variance 1/a = 1, one draw of N(0,1).
        let op = ProjectionOperator::gaussian(1, 1, 9).unwrap();
        let m = op.dense_matrix().unwrap();
        assert_eq!(m.dim(), (1, 1));
        assert!(m[[0, 0]].abs() < 10.0);
    }

    #[test]
    fn gaussian_rejects_oversized_sketch() {
        assert!(matches!(
            ProjectionOperator::gaussian(5, 6, 0),
            Err(AdmdError::SketchTooLarge { a: 6, m: 5 })
        ));
        assert!(ProjectionOperator::gaussian(5, 0, 0).is_err());
    }

    #[test]
    fn gaussian_gram_diagonal_near_one() {
        // Monte Carlo oracle: mean of diag(R^T R) over >= 100 seeds stays
        // within 3 sqrt(2/a) of 1.
        let m = 1000;
        let a = 50;
        let mut acc = 0.0;
        let seeds = 100u64;
        for seed in 0..seeds {
            let op = ProjectionOperator::gaussian(m, a, seed).unwrap();
            let r = op.dense_matrix().unwrap();
            let mut diag_sum = 0.0;
            for j in 0..m {
                let col = r.column(j);
                diag_sum += col.dot(&col);
            }
            acc += diag_sum / m as f64;
        }
        let mean = acc / seeds as f64;
        let tol = 3.0 * (2.0 / a as f64).sqrt();
        assert!((mean - 1.0).abs() <= tol, "gram diagonal mean {mean}");
    }

    #[test]
    fn same_seed_same_operator() {
        let a1 = ProjectionOperator::gaussian(40, 7, 123).unwrap();
        let a2 = ProjectionOperator::gaussian(40, 7, 123).unwrap();
        assert_eq!(a1.dense_matrix().unwrap(), a2.dense_matrix().unwrap());
        let b1 = ProjectionOperator::achlioptas(40, 7, 3, 5).unwrap();
        let b2 = ProjectionOperator::achlioptas(40, 7, 3, 5).unwrap();
        assert_eq!(b1.dense_matrix().unwrap(), b2.dense_matrix().unwrap());
        let c1 = ProjectionOperator::row_sample(40, 7, 9).unwrap();
        let c2 = ProjectionOperator::row_sample(40, 7, 9).unwrap();
        assert_eq!(c1.row_indices().unwrap(), c2.row_indices().unwrap());
    }

    #[test]
    fn achlioptas_s1_has_no_zeros() {
        let a = 6;
        let op = ProjectionOperator::achlioptas(200, a, 1, 31).unwrap();
        let expect = 1.0 / (a as f64).sqrt();
        for &v in op.dense_matrix().unwrap() {
            assert!(
                (v - expect).abs() < 1e-15 || (v + expect).abs() < 1e-15,
                "entry {v} is not +-1/sqrt(a)"
            );
        }
    }

    #[test]
    fn achlioptas_s3_zero_fraction() {
        // 60k draws: empirical zero fraction concentrates at 2/3.
        let m = 600;
        let a = 100;
        let op = ProjectionOperator::achlioptas(m, a, 3, 77).unwrap();
        let zeros = op
            .dense_matrix()
            .unwrap()
            .iter()
            .filter(|&&v| v == 0.0)
            .count();
        let frac = zeros as f64 / (m * a) as f64;
        assert!((frac - 2.0 / 3.0).abs() <= 0.01, "zero fraction {frac}");
    }

    #[test]
    fn achlioptas_mean_near_zero() {
        let op = ProjectionOperator::achlioptas(500, 80, 3, 4).unwrap();
        let r = op.dense_matrix().unwrap();
        let mean = r.sum() / r.len() as f64;
        assert!(mean.abs() < 1e-3, "mean {mean}");
    }

    #[test]
    fn achlioptas_rejects_bad_s() {
        assert!(ProjectionOperator::achlioptas(10, 2, 2, 0).is_err());
        assert!(ProjectionOperator::achlioptas(10, 2, 0, 0).is_err());
    }

    #[test]
    fn row_sample_full_is_permutation() {
        let m = 12;
        let op = ProjectionOperator::row_sample(m, m, 6).unwrap();
        let mut ix = op.row_indices().unwrap().to_vec();
        ix.sort_unstable();
        assert_eq!(ix, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn row_sample_indices_distinct() {
        for seed in 0..50 {
            let op = ProjectionOperator::row_sample(30, 13, seed).unwrap();
            let mut ix = op.row_indices().unwrap().to_vec();
            ix.sort_unstable();
            ix.dedup();
            assert_eq!(ix.len(), 13);
        }
    }

    #[test]
    fn row_sample_single_pick_uniform() {
        // a = 1, M = 5 over 10^4 seeds: frequency 1/5 within 0.02.
        let mut counts = [0usize; 5];
        let trials = 10_000u64;
        for seed in 0..trials {
            let op = ProjectionOperator::row_sample(5, 1, seed).unwrap();
            counts[op.row_indices().unwrap()[0]] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let f = c as f64 / trials as f64;
            assert!((f - 0.2).abs() <= 0.02, "index {i} frequency {f}");
        }
    }

    #[test]
    fn apply_full_row_sample_reorders_rows() {
        let x = Array2::from_shape_fn((6, 4), |(i, j)| (i * 10 + j) as f64);
        let op = ProjectionOperator::row_sample(6, 6, 3).unwrap();
        let y = op.apply(x.view()).unwrap();
        for (dst, &src) in op.row_indices().unwrap().iter().enumerate() {
            assert_eq!(y.row(dst), x.row(src));
        }
    }

    #[test]
    fn apply_checks_dimensions() {
        let op = ProjectionOperator::gaussian(8, 3, 0).unwrap();
        let x = Array2::<f64>::zeros((7, 4));
        assert!(matches!(
            op.apply(x.view()),
            Err(AdmdError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sketch_cannot_raise_rank() {
        // Exact-arithmetic rank inequality, checked on exactly low-rank data.
        let x = low_rank_snapshots(8, 60, 30, 5);
        let full_rank = numeric_rank(x.data().view(), 1e-10).unwrap();
        for seed in 0..10 {
            let op = ProjectionOperator::gaussian(60, 12, seed).unwrap();
            let y = op.apply(x.data().view()).unwrap();
            let r = numeric_rank(y.view(), 1e-10).unwrap();
            assert!(r <= full_rank, "sketched rank {r} above {full_rank}");
        }
    }

    #[test]
    fn jl_norm_preservation() {
        // Gaussian sketch at a = 64 keeps squared norms of unit vectors
        // within 0.5 for at least 95% of 1000 draws.
        let m = 200;
        let a = 64;
        let op = ProjectionOperator::gaussian(m, a, 99).unwrap();
        let mut rng = seeded_rng(1234);
        let mut good = 0usize;
        let trials = 1000;
        for _ in 0..trials {
            let v = ndarray::Array1::from_shape_fn(m, |_| {
                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                z
            });
            let nrm = v.dot(&v).sqrt();
            let unit = v / nrm;
            let proj = op
                .apply(unit.insert_axis(ndarray::Axis(1)).view())
                .unwrap();
            let sq = proj.iter().map(|x| x * x).sum::<f64>();
            if (sq - 1.0).abs() <= 0.5 {
                good += 1;
            }
        }
        assert!(good >= 950, "only {good}/1000 norms preserved");
    }

    #[test]
    fn spectrum_preserved_for_generic_sketches() {
        // Exact rank-r data, a >= r: the nonzero sketched eigenvalues
        // agree with the full fit across 20 seeds.
        let x = low_rank_snapshots(100, 50, 25, 4);
        let full = fit_dmd(&x, RankRule::Threshold(1e-10)).unwrap();
        let mut full_eigs: Vec<_> = full
            .discrete_eigs()
            .iter()
            .cloned()
            .filter(|z| z.norm() > 1e-8)
            .collect();
        full_eigs.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        for seed in 0..20 {
            let op = ProjectionOperator::gaussian(50, 8, seed).unwrap();
            let model = fit_sketched_snapshots(&x, &op, RankRule::Threshold(1e-10)).unwrap();
            let sk: Vec<_> = model
                .discrete_eigs()
                .iter()
                .cloned()
                .filter(|z| z.norm() > 1e-8)
                .collect();
            assert_eq!(sk.len(), full_eigs.len(), "seed {seed}");
            for want in &full_eigs {
                let d = sk.iter().map(|g| (g - want).norm()).fold(f64::INFINITY, f64::min);
                assert!(d <= 1e-6, "seed {seed}: eigenvalue {want} off by {d:.3e}");
            }
        }
    }

    #[test]
    fn lifted_modes_reconstruct_exact_low_rank_data() {
        // Rank-3 linear dynamics embedded in 40 dimensions: the sketched
        // fit must reproduce the training snapshots and agree with the
        // full fit_dmd reconstruction.
        let mut rng = seeded_rng(42);
        let embed = Array2::from_shape_fn((40, 3), |_| rng.gen_range(-1.0..1.0));
        let theta = 0.4_f64;
        let dynamics = ndarray::array![
            [0.97 * theta.cos(), -0.97 * theta.sin(), 0.0],
            [0.97 * theta.sin(), 0.97 * theta.cos(), 0.0],
            [0.0, 0.0, 0.9]
        ];
        let n = 20;
        let mut coeffs = Array2::<f64>::zeros((3, n));
        coeffs.column_mut(0).assign(&ndarray::array![1.0, -0.7, 0.5]);
        for j in 1..n {
            let prev = coeffs.column(j - 1).to_owned();
            coeffs.column_mut(j).assign(&dynamics.dot(&prev));
        }
        let x = SnapshotMatrix::new(embed.dot(&coeffs), 1.0).unwrap();

        let op = ProjectionOperator::gaussian(40, 6, 11).unwrap();
        let model = fit_sketched_snapshots(&x, &op, RankRule::Threshold(1e-10)).unwrap();
        let full = fit_dmd(&x, RankRule::Threshold(1e-10)).unwrap();
        for j in 0..x.snapshot_count() {
            let pred = model.reconstruct(x.time_at(j));
            let truth = x.data().column(j);
            let den = truth.dot(&truth).sqrt();
            let num = pred
                .iter()
                .zip(truth.iter())
                .map(|(p, t)| {
                    let d = p - ndarray_linalg::c64::new(*t, 0.0);
                    d.norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            assert!(num / den <= 1e-8, "snapshot {j} error {:.2e}", num / den);
            let full_pred = full.reconstruct(x.time_at(j));
            let diff = pred
                .iter()
                .zip(full_pred.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff / den <= 1e-8, "snapshot {j} route gap {:.2e}", diff / den);
        }
    }

    #[test]
    fn rank_one_lifted_mode_is_parallel_to_left_singular_vector() {
        let x = low_rank_snapshots(7, 30, 12, 1);
        let op = ProjectionOperator::gaussian(30, 4, 2).unwrap();
        let model = fit_sketched_snapshots(&x, &op, RankRule::Threshold(1e-10)).unwrap();
        assert_eq!(model.rank(), 1);
        let (x1, _) = split_snapshots(&x);
        let svd = SvdFactors::compute(x1, RankRule::Fixed(1)).unwrap();
        let u0 = svd.u().column(0);
        let mode = model.modes().column(0);
        // Cosine of the angle between the mode and u0 must be 1.
        let dot: ndarray_linalg::c64 = mode
            .iter()
            .zip(u0.iter())
            .map(|(m, u)| m * ndarray_linalg::c64::new(*u, 0.0))
            .sum();
        let nm = mode.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nu = u0.dot(&u0).sqrt();
        assert!((dot.norm() / (nm * nu) - 1.0).abs() < 1e-8);
    }
}
