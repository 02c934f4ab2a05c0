//! Full-rank pre-processors: robust low-rank + sparse splitting via
//! inexact augmented Lagrange multipliers, and a per-column DFT filter
//! that drops low-amplitude spatial coefficients.

use ndarray::{Array2, ArrayView2};
use ndarray_linalg::{JobSvd, SVDDC};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{AdmdError, Result};

/// Shrinkage operator `sign(x) * max(|x| - tau, 0)`.
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    let shrunk = x.abs() - tau;
    if shrunk > 0.0 {
        shrunk * x.signum()
    } else {
        0.0
    }
}

/// Elementwise shrinkage of a matrix.
pub fn soft_threshold_matrix(x: ArrayView2<'_, f64>, tau: f64) -> Array2<f64> {
    x.mapv(|v| soft_threshold(v, tau))
}

/// Proximal operator of the nuclear norm: shrink the singular values of
/// `x` by `tau` and rebuild.
pub fn singular_value_threshold(x: ArrayView2<'_, f64>, tau: f64) -> Result<Array2<f64>> {
    if tau < 0.0 {
        return Err(AdmdError::InvalidParameter(format!(
            "singular value threshold must be nonnegative, got {tau}"
        )));
    }
    let (u, sv, vt) = x.svddc(JobSvd::Some)?;
    let u = u.expect("left singular vectors requested");
    let vt = vt.expect("right singular vectors requested");
    let k = sv.len();
    let mut out = Array2::<f64>::zeros(x.dim());
    for i in 0..k {
        let s = soft_threshold(sv[i], tau);
        if s == 0.0 {
            continue;
        }
        let ui = u.column(i);
        let vi = vt.row(i);
        for (r, &uv) in ui.iter().enumerate() {
            let w = s * uv;
            for (c, &vv) in vi.iter().enumerate() {
                out[[r, c]] += w * vv;
            }
        }
    }
    Ok(out)
}

/// Parameters of the inexact-ALM robust decomposition.
///
/// The coupling weight used by the solver is `lambda0 = lambda /
/// sqrt(max(M, N))`, always derived from `lambda` and the data shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RpcaParams {
    /// Sparsity weight before dimension scaling; 1 works across problems.
    pub lambda: f64,
    /// Initial penalty; `None` selects `1.25 / sigma_1(X)`.
    pub mu0: Option<f64>,
    /// Penalty growth factor per iteration.
    pub rho: f64,
    /// Relative Frobenius residual declaring convergence.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RpcaParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            mu0: None,
            rho: 1.5,
            tol: 1e-7,
            max_iter: 1000,
        }
    }
}

impl RpcaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(AdmdError::InvalidParameter("lambda must be positive".into()));
        }
        if let Some(mu0) = self.mu0 {
            if !mu0.is_finite() || mu0 <= 0.0 {
                return Err(AdmdError::InvalidParameter("mu0 must be positive".into()));
            }
        }
        if !self.rho.is_finite() || self.rho <= 1.0 {
            return Err(AdmdError::InvalidParameter(
                "penalty growth rho must exceed 1".into(),
            ));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(AdmdError::InvalidParameter("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(AdmdError::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Dimension-scaled sparsity weight.
    pub fn lambda0(&self, m: usize, n: usize) -> f64 {
        self.lambda / (m.max(n) as f64).sqrt()
    }
}

/// Outcome of the robust decomposition `X = L + S`.
#[derive(Debug, Clone)]
pub struct RpcaResult {
    pub low_rank: Array2<f64>,
    pub sparse: Array2<f64>,
    pub iterations: usize,
    /// Final `||X - L - S||_F / ||X||_F`.
    pub residual: f64,
    /// False when `max_iter` ran out; the best iterate is still returned.
    pub converged: bool,
}

fn frobenius(x: ArrayView2<'_, f64>) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Split `x` into a low-rank and a sparse part by inexact augmented
/// Lagrange multipliers, alternating singular-value thresholding on the
/// low-rank block with elementwise shrinkage on the sparse block under a
/// growing penalty.
pub fn rpca_ialm(x: ArrayView2<'_, f64>, params: &RpcaParams) -> Result<RpcaResult> {
    params.validate()?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AdmdError::NonFinite);
    }
    let (m, n) = x.dim();
    let norm_x = frobenius(x);
    if norm_x == 0.0 {
        return Ok(RpcaResult {
            low_rank: Array2::zeros((m, n)),
            sparse: Array2::zeros((m, n)),
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }

    let lambda0 = params.lambda0(m, n);
    let (_, sv, _) = x.svddc(JobSvd::None)?;
    let sigma1 = sv[0];
    let max_abs = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    // Dual seeded so the first multiplier step is well scaled.
    let dual_scale = sigma1.max(max_abs / lambda0);
    let mut dual = x.mapv(|v| v / dual_scale);

    let mu0 = params.mu0.unwrap_or(1.25 / sigma1);
    let mu_max = mu0 * 1e7;
    let mut mu = mu0;

    let x_own = x.to_owned();
    let mut low_rank = Array2::<f64>::zeros((m, n));
    let mut sparse = Array2::<f64>::zeros((m, n));
    let mut residual = f64::INFINITY;

    for iter in 1..=params.max_iter {
        let mut target = &x_own - &sparse;
        target.zip_mut_with(&dual, |t, &y| *t += y / mu);
        low_rank = singular_value_threshold(target.view(), 1.0 / mu)?;

        let mut resid_l = &x_own - &low_rank;
        let mut shrink_target = resid_l.clone();
        shrink_target.zip_mut_with(&dual, |t, &y| *t += y / mu);
        sparse = soft_threshold_matrix(shrink_target.view(), lambda0 / mu);

        resid_l -= &sparse;
        dual.zip_mut_with(&resid_l, |y, &r| *y += mu * r);
        mu = (mu * params.rho).min(mu_max);

        residual = frobenius(resid_l.view()) / norm_x;
        if residual <= params.tol {
            return Ok(RpcaResult {
                low_rank,
                sparse,
                iterations: iter,
                residual,
                converged: true,
            });
        }
    }

    Ok(RpcaResult {
        low_rank,
        sparse,
        iterations: params.max_iter,
        residual,
        converged: false,
    })
}

/// Per-column spatial DFT mask: coefficients below `tau_rel` times the
/// column's peak magnitude are zeroed (conjugate pairs together, so the
/// inverse transform stays real).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DftFilterPolicy {
    tau_rel: f64,
}

impl DftFilterPolicy {
    pub fn new(tau_rel: f64) -> Result<Self> {
        if !tau_rel.is_finite() || !(0.0..1.0).contains(&tau_rel) {
            return Err(AdmdError::InvalidParameter(format!(
                "relative DFT threshold must lie in [0, 1), got {tau_rel}"
            )));
        }
        Ok(Self { tau_rel })
    }

    pub fn tau_rel(&self) -> f64 {
        self.tau_rel
    }
}

impl Default for DftFilterPolicy {
    fn default() -> Self {
        Self { tau_rel: 1e-3 }
    }
}

/// Apply the spatial DFT mask column by column.
pub fn dft_filter(x: ArrayView2<'_, f64>, policy: &DftFilterPolicy) -> Result<Array2<f64>> {
    let (m, n) = x.dim();
    if m < 2 {
        return Err(AdmdError::InvalidInput(
            "DFT filtering needs at least 2 spatial nodes".into(),
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AdmdError::NonFinite);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    let mut out = Array2::<f64>::zeros((m, n));
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    for j in 0..n {
        for i in 0..m {
            buf[i] = Complex::new(x[[i, j]], 0.0);
        }
        fwd.process(&mut buf);
        let peak = buf.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if peak > 0.0 && policy.tau_rel > 0.0 {
            let thr = policy.tau_rel * peak;
            // Decide per conjugate pair (k, m-k) so masking keeps the
            // spectrum Hermitian.
            for k in 0..=m / 2 {
                let mirror = (m - k) % m;
                let mag = buf[k].norm().max(buf[mirror].norm());
                if mag < thr {
                    buf[k] = Complex::new(0.0, 0.0);
                    buf[mirror] = Complex::new(0.0, 0.0);
                }
            }
        }
        inv.process(&mut buf);
        let scale = 1.0 / m as f64;
        for i in 0..m {
            out[[i, j]] = buf[i].re * scale;
        }
    }
    Ok(out)
}
