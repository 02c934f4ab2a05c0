//! Deterministic snapshot generators used by the experiments and tests:
//! a periodically perturbed double-gyre vorticity field, a two-tone
//! growing/decaying wave superposition, and a full-rank multi-scale
//! traveling-wave surrogate with dense noise and sparse outliers.

use ndarray::Array2;
use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dmd::SnapshotMatrix;
use crate::error::{AdmdError, Result};
use crate::sketch::seeded_rng;
use crate::DEFAULT_SEED;

/// Double-gyre stream-function parameters on the domain [0,2] x [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleGyreParams {
    pub amplitude: f64,
    pub omega: f64,
    pub eps: f64,
    /// Grid nodes along x (in [0, 2]).
    pub nx: usize,
    /// Grid nodes along y (in [0, 1]).
    pub ny: usize,
    pub nt: usize,
    pub dt: f64,
}

impl Default for DoubleGyreParams {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            omega: 2.0 * std::f64::consts::PI / 10.0,
            eps: 0.25,
            nx: 128,
            ny: 64,
            nt: 201,
            dt: 0.1,
        }
    }
}

fn gyre_f(x: f64, s: f64, eps: f64) -> f64 {
    eps * s * x * x + x - 2.0 * eps * s * x
}

fn gyre_fx(x: f64, s: f64, eps: f64) -> f64 {
    2.0 * eps * s * x + 1.0 - 2.0 * eps * s
}

/// Second-order derivative along one grid line: central in the interior,
/// one-sided three-point stencils at the ends.
fn derivative_line(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    debug_assert!(n >= 3);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
}

/// Vorticity snapshots of the perturbed double gyre.
///
/// Velocities come from the stream-function; the vorticity
/// `dv/dx - du/dy` is discretized with second-order differences and each
/// field is flattened x-fastest into one column per time step.
pub fn double_gyre_vorticity(params: &DoubleGyreParams) -> Result<SnapshotMatrix> {
    let DoubleGyreParams {
        amplitude,
        omega,
        eps,
        nx,
        ny,
        nt,
        dt,
    } = *params;
    if nx < 3 || ny < 3 {
        return Err(AdmdError::InvalidParameter(
            "double gyre needs nx, ny >= 3 for the difference stencils".into(),
        ));
    }
    if nt < 2 {
        return Err(AdmdError::InvalidParameter("need at least 2 snapshots".into()));
    }
    let pi = std::f64::consts::PI;
    let hx = 2.0 / (nx - 1) as f64;
    let hy = 1.0 / (ny - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|i| i as f64 * hx).collect();
    let ys: Vec<f64> = (0..ny).map(|j| j as f64 * hy).collect();

    let m = nx * ny;
    let mut data = Array2::<f64>::zeros((m, nt));
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut dvdx_row = vec![0.0; nx];
    let mut dudy_col = vec![0.0; ny];
    let mut line = vec![0.0; nx.max(ny)];

    for k in 0..nt {
        let t = k as f64 * dt;
        let s = (omega * t).sin();
        for (j, &y) in ys.iter().enumerate() {
            let sin_py = (pi * y).sin();
            let cos_py = (pi * y).cos();
            for (i, &x) in xs.iter().enumerate() {
                let f = gyre_f(x, s, eps);
                let fx = gyre_fx(x, s, eps);
                let idx = j * nx + i;
                // u = -dPsi/dy, v = dPsi/dx for Psi = A sin(pi f) sin(pi y).
                u[idx] = -pi * amplitude * (pi * f).sin() * cos_py;
                v[idx] = pi * amplitude * (pi * f).cos() * sin_py * fx;
            }
        }
        // dv/dx along each y-row.
        for j in 0..ny {
            line[..nx].copy_from_slice(&v[j * nx..(j + 1) * nx]);
            derivative_line(&line[..nx], hx, &mut dvdx_row);
            for i in 0..nx {
                data[[j * nx + i, k]] = dvdx_row[i];
            }
        }
        // Subtract du/dy along each x-column.
        for i in 0..nx {
            for j in 0..ny {
                line[j] = u[j * nx + i];
            }
            derivative_line(&line[..ny], hy, &mut dudy_col);
            for j in 0..ny {
                data[[j * nx + i, k]] -= dudy_col[j];
            }
        }
    }
    SnapshotMatrix::new(data, dt)
}

/// Parameters of the two-tone wave superposition on x in [0, 15],
/// t in [0, 4].
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenDynamicsParams {
    pub k1: f64,
    pub omega1: f64,
    pub gamma1: f64,
    pub k2: f64,
    pub omega2: f64,
    pub gamma2: f64,
    pub nx: usize,
    pub nt: usize,
}

impl Default for HiddenDynamicsParams {
    fn default() -> Self {
        Self {
            k1: 1.0,
            omega1: 1.0,
            gamma1: 1.0,
            k2: 0.4,
            omega2: 3.7,
            gamma2: -0.2,
            nx: 100,
            nt: 81,
        }
    }
}

pub const HIDDEN_DYNAMICS_X_MAX: f64 = 15.0;
pub const HIDDEN_DYNAMICS_T_MAX: f64 = 4.0;

/// Snapshots of
/// `sin(k1 x - w1 t) e^(g1 t) + sin(k2 x - w2 t) e^(g2 t)`.
///
/// The trigonometric expansion of each term spans two spatial profiles,
/// so the exact snapshot rank never exceeds 4.
pub fn hidden_dynamics(params: &HiddenDynamicsParams) -> Result<SnapshotMatrix> {
    let p = params;
    if p.nx < 2 || p.nt < 2 {
        return Err(AdmdError::InvalidParameter(
            "hidden dynamics needs nx, nt >= 2".into(),
        ));
    }
    let dx = HIDDEN_DYNAMICS_X_MAX / (p.nx - 1) as f64;
    let dt = HIDDEN_DYNAMICS_T_MAX / (p.nt - 1) as f64;
    let data = Array2::from_shape_fn((p.nx, p.nt), |(i, j)| {
        let x = i as f64 * dx;
        let t = j as f64 * dt;
        (p.k1 * x - p.omega1 * t).sin() * (p.gamma1 * t).exp()
            + (p.k2 * x - p.omega2 * t).sin() * (p.gamma2 * t).exp()
    });
    SnapshotMatrix::new(data, dt)
}

/// Full-rank surrogate: seeded multi-scale traveling waves plus dense
/// Gaussian noise and sparse large-magnitude outliers.
///
/// `noise_std` and `outlier_mag` are relative to the RMS of the clean
/// wave field, so the corruption level is scale-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    pub m: usize,
    pub n: usize,
    /// Number of traveling-wave components (exact clean rank <= 2 * waves).
    pub waves: usize,
    pub noise_std: f64,
    pub outlier_frac: f64,
    pub outlier_mag: f64,
    pub dt: f64,
    pub seed: u64,
}

/// Largest spatial wavenumber the surrogate draws from.
pub const MAX_SURROGATE_WAVENUMBER: usize = 40;

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            m: 1600,
            n: 100,
            waves: 8,
            noise_std: 0.02,
            outlier_frac: 0.0002,
            outlier_mag: 6.0,
            dt: 0.05,
            seed: DEFAULT_SEED,
        }
    }
}

pub fn surrogate_turbulence(params: &SurrogateParams) -> Result<SnapshotMatrix> {
    let p = params;
    if p.m < 2 || p.n < 2 {
        return Err(AdmdError::InvalidParameter("surrogate needs m, n >= 2".into()));
    }
    if p.waves == 0 {
        return Err(AdmdError::InvalidParameter(
            "surrogate needs at least one wave component".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p.outlier_frac) {
        return Err(AdmdError::InvalidParameter(
            "outlier fraction must lie in [0, 1]".into(),
        ));
    }
    if p.noise_std < 0.0 || p.outlier_mag < 0.0 {
        return Err(AdmdError::InvalidParameter(
            "noise and outlier magnitudes must be nonnegative".into(),
        ));
    }
    if !p.dt.is_finite() || p.dt <= 0.0 {
        return Err(AdmdError::InvalidParameter("dt must be positive".into()));
    }
    if p.waves > MAX_SURROGATE_WAVENUMBER {
        return Err(AdmdError::InvalidParameter(format!(
            "surrogate supports at most {MAX_SURROGATE_WAVENUMBER} wave components"
        )));
    }
    let mut rng = seeded_rng(p.seed);
    let two_pi = 2.0 * std::f64::consts::PI;

    struct Wave {
        wavenumber: f64,
        frequency: f64,
        phase: f64,
        amplitude: f64,
    }
    // Distinct integer wavenumbers keep each component on its own pair of
    // DFT bins.
    let numbers = rand::seq::index::sample(&mut rng, MAX_SURROGATE_WAVENUMBER, p.waves);
    let waves: Vec<Wave> = numbers
        .iter()
        .enumerate()
        .map(|(c, k)| Wave {
            wavenumber: (k + 1) as f64,
            frequency: rng.gen_range(0.5..5.0),
            phase: rng.gen_range(0.0..two_pi),
            amplitude: 0.5f64.powi(c as i32),
        })
        .collect();

    let mut data = Array2::<f64>::zeros((p.m, p.n));
    for j in 0..p.n {
        let t = j as f64 * p.dt;
        for i in 0..p.m {
            let x = two_pi * i as f64 / p.m as f64;
            let mut acc = 0.0;
            for w in &waves {
                acc += w.amplitude * (w.wavenumber * x - w.frequency * t + w.phase).sin();
            }
            data[[i, j]] = acc;
        }
    }

    let rms = (data.iter().map(|v| v * v).sum::<f64>() / (p.m * p.n) as f64).sqrt();
    if p.noise_std > 0.0 {
        let normal = StandardNormal;
        for v in data.iter_mut() {
            let z: f64 = normal.sample(&mut rng);
            *v += p.noise_std * rms * z;
        }
    }
    if p.outlier_frac > 0.0 && p.outlier_mag > 0.0 {
        let count = ((p.m * p.n) as f64 * p.outlier_frac).floor() as usize;
        let picks = rand::seq::index::sample(&mut rng, p.m * p.n, count);
        for flat in picks {
            let (i, j) = (flat / p.n, flat % p.n);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            data[[i, j]] += sign * p.outlier_mag * rms;
        }
    }
    SnapshotMatrix::new(data, p.dt)
}
