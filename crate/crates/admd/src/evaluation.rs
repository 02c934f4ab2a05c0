//! Reporting quantities: per-snapshot relative error, discrete and
//! continuous eigenspectra, and singular-value spectra.

use ndarray::{ArrayView1, ArrayView2};
use ndarray_linalg::{c64, JobSvd, SVDDC};

use crate::dmd::{DmdModel, SnapshotMatrix};
use crate::error::{AdmdError, Result};

/// `||Re(pred) - truth||_2 / ||truth||_2`, or `None` when the truth
/// vector is zero (the ratio is undefined and must not be reported as 0).
pub fn relative_error(pred: ArrayView1<'_, c64>, truth: ArrayView1<'_, f64>) -> Option<f64> {
    assert_eq!(pred.len(), truth.len(), "prediction/truth length mismatch");
    let den = truth.dot(&truth).sqrt();
    if den == 0.0 {
        return None;
    }
    let num = pred
        .iter()
        .zip(truth.iter())
        .map(|(p, t)| {
            let d = p.re - t;
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Some(num / den)
}

/// Relative error of the model reconstruction at every snapshot time of
/// `x`, real parts compared against the real data.
pub fn error_series(model: &DmdModel, x: &SnapshotMatrix) -> Result<Vec<Option<f64>>> {
    if model.physical_dim() != x.state_dim() {
        return Err(AdmdError::DimensionMismatch(format!(
            "model physical dimension {} vs data dimension {}",
            model.physical_dim(),
            x.state_dim()
        )));
    }
    Ok((0..x.snapshot_count())
        .map(|j| {
            let pred = model.reconstruct_physical(x.time_at(j));
            relative_error(pred.view(), x.data().column(j))
        })
        .collect())
}

/// All singular values of `x`, descending.
pub fn singular_spectrum(x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AdmdError::NonFinite);
    }
    let (_, sv, _) = x.svddc(JobSvd::None)?;
    Ok(sv.to_vec())
}

/// One spectrum line per retained mode.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumRow {
    pub index: usize,
    /// Per-step eigenvalue.
    pub discrete: c64,
    pub magnitude: f64,
    /// Continuous-time rate `ln(mu)/dt`.
    pub continuous: c64,
    pub amplitude_abs: f64,
}

/// Tabulated eigenspectrum of a fitted model.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    rows: Vec<SpectrumRow>,
}

impl SpectrumReport {
    pub fn from_model(model: &DmdModel) -> Self {
        let rows = (0..model.rank())
            .map(|k| {
                let mu = model.discrete_eigs()[k];
                SpectrumRow {
                    index: k,
                    discrete: mu,
                    magnitude: mu.norm(),
                    continuous: model.continuous_eigs()[k],
                    amplitude_abs: model.amplitudes()[k].norm(),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[SpectrumRow] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::{fit_dmd, RankRule};
    use ndarray::{array, Array1, Array2};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn as_complex(v: &[f64]) -> Array1<c64> {
        v.iter().map(|&x| c64::new(x, 0.0)).collect()
    }

    #[test]
    fn relative_error_basics() {
        let truth = array![3.0, 4.0, 0.0];
        let exact = as_complex(&[3.0, 4.0, 0.0]);
        assert_eq!(relative_error(exact.view(), truth.view()), Some(0.0));
        let double = as_complex(&[6.0, 8.0, 0.0]);
        let e = relative_error(double.view(), truth.view()).unwrap();
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn relative_error_unit_perturbation() {
        // truth with norm 5, prediction off by 0.5 along e1: error 0.1.
        let truth = array![3.0, 4.0];
        let pred = as_complex(&[3.5, 4.0]);
        let e = relative_error(pred.view(), truth.view()).unwrap();
        assert!((e - 0.1).abs() < 1e-15);
    }

    #[test]
    fn relative_error_zero_truth_is_missing() {
        let truth = array![0.0, 0.0];
        let pred = as_complex(&[1.0, 0.0]);
        assert_eq!(relative_error(pred.view(), truth.view()), None);
    }

    #[test]
    fn error_series_exact_linear_system() {
        let a = array![[0.95, 0.1], [-0.1, 0.95]];
        let n = 20;
        let mut data = Array2::<f64>::zeros((2, n));
        data.column_mut(0).assign(&array![1.0, 0.3]);
        for j in 1..n {
            let prev = data.column(j - 1).to_owned();
            data.column_mut(j).assign(&a.dot(&prev));
        }
        let x = SnapshotMatrix::new(data, 0.1).unwrap();
        let model = fit_dmd(&x, RankRule::Threshold(1e-12)).unwrap();
        let errs = error_series(&model, &x).unwrap();
        assert_eq!(errs.len(), n);
        for (j, e) in errs.iter().enumerate() {
            let e = e.expect("nonzero snapshots");
            assert!(e <= 1e-8, "snapshot {j} error {e:.3e}");
        }
    }

    #[test]
    fn error_series_checks_dimensions() {
        let x = SnapshotMatrix::new(Array2::from_elem((3, 5), 1.0), 1.0).unwrap();
        let model = fit_dmd(&x, RankRule::Threshold(1e-12)).unwrap();
        let other = SnapshotMatrix::new(Array2::from_elem((4, 5), 1.0), 1.0).unwrap();
        assert!(matches!(
            error_series(&model, &other),
            Err(AdmdError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn singular_spectrum_identity() {
        let x = Array2::<f64>::eye(3);
        let sv = singular_spectrum(x.view()).unwrap();
        assert_eq!(sv.len(), 3);
        for s in sv {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_spectrum_rank_two_construction() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let left = Array2::from_shape_fn((12, 2), |_| rng.gen_range(-1.0..1.0));
        let right = Array2::from_shape_fn((2, 9), |_| rng.gen_range(-1.0..1.0));
        let x = left.dot(&right);
        let sv = singular_spectrum(x.view()).unwrap();
        let above = sv.iter().filter(|&&s| s > 1e-12 * sv[0]).count();
        assert_eq!(above, 2);
        for w in sv.windows(2) {
            assert!(w[0] >= w[1], "spectrum must descend");
        }
    }

    #[test]
    fn unit_circle_diagnostic_on_marginally_stable_system() {
        // Block-diagonal rotations: every true eigenvalue has modulus 1,
        // so every reported modulus must sit on the unit circle.
        let thetas = [0.2f64, 0.9, 2.1];
        let mut a = Array2::<f64>::zeros((6, 6));
        for (b, &th) in thetas.iter().enumerate() {
            let (c, s) = (th.cos(), th.sin());
            a[[2 * b, 2 * b]] = c;
            a[[2 * b, 2 * b + 1]] = -s;
            a[[2 * b + 1, 2 * b]] = s;
            a[[2 * b + 1, 2 * b + 1]] = c;
        }
        let n = 40;
        let mut data = Array2::<f64>::zeros((6, n));
        data.column_mut(0)
            .assign(&array![1.0, -0.4, 0.8, 0.2, -0.6, 0.9]);
        for j in 1..n {
            let prev = data.column(j - 1).to_owned();
            data.column_mut(j).assign(&a.dot(&prev));
        }
        let x = SnapshotMatrix::new(data, 0.5).unwrap();
        let model = fit_dmd(&x, RankRule::Threshold(1e-12)).unwrap();
        let report = SpectrumReport::from_model(&model);
        assert_eq!(report.rows().len(), 6);
        for row in report.rows() {
            assert!(
                (row.magnitude - 1.0).abs() <= 1e-6,
                "eigenvalue modulus {} off the unit circle",
                row.magnitude
            );
            // |mu| = exp(Re omega * dt) ties the two spectra together.
            let want = (row.continuous.re * model.dt()).exp();
            assert!((row.magnitude - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn error_series_is_deterministic() {
        let x = hidden_sample();
        let model = fit_dmd(&x, RankRule::Threshold(1e-12)).unwrap();
        let a = error_series(&model, &x).unwrap();
        let b = error_series(&model, &x).unwrap();
        assert_eq!(a, b);
    }

    fn hidden_sample() -> SnapshotMatrix {
        crate::datasets::hidden_dynamics(&crate::datasets::HiddenDynamicsParams {
            nx: 40,
            nt: 30,
            ..Default::default()
        })
        .unwrap()
    }
}
