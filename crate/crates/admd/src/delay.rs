//! Time-delay (Hankel) augmentation of snapshot data.
//!
//! Stacking `q` time-shifted copies of the state enriches the row space so
//! a linear fit can resolve dynamics the raw snapshot rank hides. With
//! `q = 1` the augmented pair is exactly the classic snapshot split.

use ndarray::{s, Array2};

use crate::dmd::{fit_from_pair, DmdModel, RankRule, SnapshotMatrix};
use crate::error::{AdmdError, Result};

/// Delay window: the state and `q - 1` shifted copies are stacked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayConfig {
    q: usize,
}

impl DelayConfig {
    pub fn new(q: usize) -> Result<Self> {
        if q < 1 {
            return Err(AdmdError::InvalidParameter(
                "delay window q must be at least 1".into(),
            ));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of time-shifted copies added on top of the state itself.
    pub fn shifted_copies(&self) -> usize {
        self.q - 1
    }
}

/// Hankel-augmented snapshot pair.
///
/// Column `j` of the first matrix stacks snapshots `j .. j+q-1`; the second
/// matrix stacks `j+1 .. j+q`. Both have `N - q` columns and `q * M` rows,
/// so the second stays exactly one step ahead of the first.
pub fn hankel_pair(x: &SnapshotMatrix, q: usize) -> Result<(Array2<f64>, Array2<f64>)> {
    let n = x.snapshot_count();
    let m = x.state_dim();
    if q < 1 {
        return Err(AdmdError::InvalidParameter(
            "delay window q must be at least 1".into(),
        ));
    }
    if q > n - 1 {
        return Err(AdmdError::InsufficientSnapshots { q, n, max: n - 1 });
    }
    let cols = n - q;
    let mut x1 = Array2::<f64>::zeros((q * m, cols));
    let mut x2 = Array2::<f64>::zeros((q * m, cols));
    for block in 0..q {
        let rows = s![block * m..(block + 1) * m, ..];
        x1.slice_mut(rows)
            .assign(&x.data().slice(s![.., block..block + cols]));
        x2.slice_mut(rows)
            .assign(&x.data().slice(s![.., block + 1..block + 1 + cols]));
    }
    Ok((x1, x2))
}

/// Delay-coordinate DMD: the standard fit run on the Hankel pair, with
/// reconstructions truncated back to the physical state dimension.
pub fn fit_delay_dmd(x: &SnapshotMatrix, q: usize, rule: RankRule) -> Result<DmdModel> {
    let (x1, x2) = hankel_pair(x, q)?;
    fit_from_pair(x1.view(), x2.view(), x.dt(), rule, x.state_dim())
}
