//! Optimization and root-finding on top of the key-rate bound: optimal
//! displacement, maximum tolerable excess noise, the squeezing requirement
//! for direct reconciliation, security regions and distance curves.
//!
//! Displacement optimization runs a coarse logarithmic scan over
//! [`SIGMA_MIN`, `SIGMA_MAX`] followed by golden-section refinement in log
//! space. Grid sweeps evaluate nodes in parallel; results are assembled in
//! input order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{Channel, Preparation};
use crate::rates::{key_rate, Direction, ProtocolConfig};

/// Displacement-variance search domain (SNU).
pub const SIGMA_MIN: f64 = 1e-4;
pub const SIGMA_MAX: f64 = 100.0;
/// Points in the coarse logarithmic scan that precedes refinement.
pub const COARSE_SCAN_POINTS: usize = 60;
/// Relative width at which golden-section refinement stops.
pub const GOLDEN_REL_TOL: f64 = 1e-6;

/// Whether one displacement variance is applied to both quadratures or the
/// two are optimized separately by coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizationMode {
    Symmetric,
    Independent,
}

/// Result of a displacement optimization. `secure` is true only when the
/// optimized rate is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacementOptimum {
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub rate: f64,
    pub secure: bool,
}

/// Maximum tolerable excess noise at fixed squeezing, transmittance and
/// reconciliation efficiency, with the displacement re-optimized at every
/// bisection step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseToleranceResult {
    pub v: f64,
    pub beta: f64,
    pub eta: f64,
    pub epsilon_max: f64,
    pub sigma_opt_x: f64,
    pub sigma_opt_p: f64,
    pub iterations: u32,
    pub converged: bool,
    pub secure: bool,
}

/// Largest signal-state variance still giving a positive direct-
/// reconciliation rate (1 when coherent states suffice, 0 when nothing does).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxSqueezedVariance {
    pub v_max: f64,
    pub secure: bool,
}

/// Axis spacing for sweep grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep axis: `count` values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    min: f64,
    max: f64,
    count: usize,
    spacing: Spacing,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if count < 2 {
            return Err(Error::Domain(format!(
                "axis needs at least 2 points, got {count}"
            )));
        }
        if min >= max || !min.is_finite() || !max.is_finite() {
            return Err(Error::Domain(format!(
                "axis needs min < max, got [{min}, {max}]"
            )));
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(Error::Domain(format!(
                "log spacing requires positive bounds, got min = {min}"
            )));
        }
        Ok(Self {
            min,
            max,
            count,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// A two-parameter sweep over squeezing and displacement at fixed channel,
/// efficiency and direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepGrid {
    pub v_axis: Axis,
    pub sigma_axis: Axis,
    pub eta: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub direction: Direction,
}

/// A point on the security boundary in the `(V, sigma)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub v: f64,
    pub sigma: f64,
}

/// Sign map of the key rate over a sweep grid plus the extracted boundary.
/// `secure[i][j]` corresponds to `v_values[i]`, `sigma_values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityRegion {
    pub v_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub secure: Vec<Vec<bool>>,
    pub boundary: Vec<BoundaryPoint>,
}

/// One node of a rate-versus-distance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistancePoint {
    pub distance_km: f64,
    pub eta: f64,
    pub sigma_opt_x: f64,
    pub sigma_opt_p: f64,
    pub rate: f64,
}

fn rate_at(
    v: f64,
    sigma_x: f64,
    sigma_p: f64,
    ch: &Channel,
    beta: f64,
    direction: Direction,
) -> Result<f64> {
    let cfg =
        ProtocolConfig::homodyne(Preparation::new(v, sigma_x, sigma_p)?, *ch, beta, direction)?;
    Ok(key_rate(&cfg)?.rate)
}

/// Golden-section maximization in log space on [lo, hi].
fn golden_max_log(f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    while b - a > GOLDEN_REL_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d.exp())?;
        }
    }
    let x = (0.5 * (a + b)).exp();
    Ok((x, f(x)?))
}

/// Coarse log scan followed by golden-section refinement around the best node.
fn maximize_over_sigma(f: &dyn Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let n = COARSE_SCAN_POINTS;
    let (l0, l1) = (SIGMA_MIN.ln(), SIGMA_MAX.ln());
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut xs = Vec::with_capacity(n);
    for i in 0..n {
        let x = (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp();
        xs.push(x);
        let r = f(x)?;
        if r > best.1 {
            best = (i, r);
        }
    }
    let lo = xs[best.0.saturating_sub(1)];
    let hi = xs[(best.0 + 1).min(n - 1)];
    let (x, r) = golden_max_log(f, lo, hi)?;
    // the refined point can only improve on the coarse node
    let (x, r) = if r >= best.1 {
        (x, r)
    } else {
        (xs[best.0], best.1)
    };
    Ok((x.clamp(SIGMA_MIN, SIGMA_MAX), r))
}

/// Maximizes the key rate over the displacement variance(s).
///
/// Symmetric mode applies one sigma to both quadratures; independent mode
/// runs coordinate descent on `(sigma_x, sigma_p)` with the same
/// one-dimensional method, up to 20 sweeps or a rate change below 1e-8.
pub fn optimize_displacement(
    v: f64,
    ch: &Channel,
    beta: f64,
    direction: Direction,
    mode: OptimizationMode,
) -> Result<DisplacementOptimum> {
    match mode {
        OptimizationMode::Symmetric => {
            let f = |s: f64| rate_at(v, s, s, ch, beta, direction);
            let (s, rate) = maximize_over_sigma(&f)?;
            Ok(DisplacementOptimum {
                sigma_x: s,
                sigma_p: s,
                rate,
                secure: rate > 0.0,
            })
        }
        OptimizationMode::Independent => {
            let (mut sx, mut sp) = (1.0, 1.0);
            let mut rate = f64::NEG_INFINITY;
            let mut prev = f64::NEG_INFINITY;
            for _ in 0..20 {
                let fx = |s: f64| rate_at(v, s, sp, ch, beta, direction);
                let (x, _) = maximize_over_sigma(&fx)?;
                sx = x;
                let fp = |s: f64| rate_at(v, sx, s, ch, beta, direction);
                let (p, r) = maximize_over_sigma(&fp)?;
                sp = p;
                rate = r;
                if (rate - prev).abs() < 1e-8 {
                    break;
                }
                prev = rate;
            }
            Ok(DisplacementOptimum {
                sigma_x: sx,
                sigma_p: sp,
                rate,
                secure: rate > 0.0,
            })
        }
    }
}

/// Excess-noise bisection domain and tolerance (SNU).
const EPSILON_HI: f64 = 2.0;
const EPSILON_TOL: f64 = 1e-5;

/// Finds the largest excess noise with a positive optimized key rate by
/// bisection on `[0, 2]` SNU to 1e-5 absolute, re-optimizing the displacement
/// at every step.
pub fn max_tolerable_noise(
    v: f64,
    eta: f64,
    beta: f64,
    direction: Direction,
    mode: OptimizationMode,
) -> Result<NoiseToleranceResult> {
    let opt_at = |eps: f64| -> Result<DisplacementOptimum> {
        optimize_displacement(v, &Channel::new(eta, eps)?, beta, direction, mode)
    };
    let at_zero = opt_at(0.0)?;
    if !at_zero.secure {
        return Ok(NoiseToleranceResult {
            v,
            beta,
            eta,
            epsilon_max: 0.0,
            sigma_opt_x: at_zero.sigma_x,
            sigma_opt_p: at_zero.sigma_p,
            iterations: 0,
            converged: true,
            secure: false,
        });
    }
    let mut best = at_zero;
    let at_hi = opt_at(EPSILON_HI)?;
    if at_hi.secure {
        return Ok(NoiseToleranceResult {
            v,
            beta,
            eta,
            epsilon_max: EPSILON_HI,
            sigma_opt_x: at_hi.sigma_x,
            sigma_opt_p: at_hi.sigma_p,
            iterations: 0,
            converged: false,
            secure: true,
        });
    }
    let (mut lo, mut hi) = (0.0, EPSILON_HI);
    let mut iterations = 0;
    while hi - lo > EPSILON_TOL {
        let mid = 0.5 * (lo + hi);
        let opt = opt_at(mid)?;
        if opt.secure {
            lo = mid;
            best = opt;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(NoiseToleranceResult {
        v,
        beta,
        eta,
        epsilon_max: 0.5 * (lo + hi),
        sigma_opt_x: best.sigma_x,
        sigma_opt_p: best.sigma_p,
        iterations,
        converged: true,
        secure: true,
    })
}

/// Noise-tolerance table over reconciliation efficiencies and signal
/// variances at fixed transmittance (cells evaluated in parallel, returned in
/// row-major `betas x vs` order).
pub fn noise_tolerance_table(
    betas: &[f64],
    vs: &[f64],
    eta: f64,
    direction: Direction,
    mode: OptimizationMode,
) -> Result<Vec<NoiseToleranceResult>> {
    let cells: Vec<(f64, f64)> = betas
        .iter()
        .flat_map(|&b| vs.iter().map(move |&v| (b, v)))
        .collect();
    cells
        .par_iter()
        .map(|&(beta, v)| max_tolerable_noise(v, eta, beta, direction, mode))
        .collect()
}

/// Bisection on the signal variance for the largest `V` with a positive
/// optimized direct-reconciliation rate over a pure-loss channel.
/// Requires `eta` in (0.5, 1].
pub fn max_squeezed_variance_dr(eta: f64, beta: f64) -> Result<MaxSqueezedVariance> {
    if !(eta > 0.5 && eta <= 1.0) {
        return Err(Error::Domain(format!(
            "direct reconciliation requires eta in (0.5, 1], got {eta}"
        )));
    }
    const V_LO: f64 = 1e-3;
    const V_TOL: f64 = 1e-4;
    let ch = Channel::new(eta, 0.0)?;
    let rate = |v: f64| -> Result<f64> {
        Ok(optimize_displacement(v, &ch, beta, Direction::Dr, OptimizationMode::Symmetric)?.rate)
    };
    if rate(1.0)? > 0.0 {
        return Ok(MaxSqueezedVariance {
            v_max: 1.0,
            secure: true,
        });
    }
    if rate(V_LO)? <= 0.0 {
        return Ok(MaxSqueezedVariance {
            v_max: 0.0,
            secure: false,
        });
    }
    let (mut lo, mut hi) = (V_LO, 1.0);
    while hi - lo > V_TOL {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxSqueezedVariance {
        v_max: 0.5 * (lo + hi),
        secure: true,
    })
}

/// The analytic efficiency threshold `beta = 1/eta - 1` below which coherent
/// states cannot be secure in direct reconciliation (individual-attack
/// bound). Defined for `eta` in (0.5, 1).
pub fn dr_coherent_beta_threshold(eta: f64) -> Result<f64> {
    if !(eta > 0.5 && eta < 1.0) {
        return Err(Error::Domain(format!(
            "threshold defined for eta in (0.5, 1), got {eta}"
        )));
    }
    Ok(1.0 / eta - 1.0)
}

/// Displacement-variance window `(1/(1+sqrt(beta)), 1/(1-sqrt(beta)))` that
/// admits a positive rate in the strong-squeezing limit `V -> 0`. The upper
/// limit is unbounded at `beta = 1`; the window collapses to `(1, 1)` at
/// `beta = 0`.
pub fn sigma_limits_high_squeezing(beta: f64) -> Result<(f64, f64)> {
    if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    let s = beta.sqrt();
    let hi = if beta == 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - s)
    };
    Ok((1.0 / (1.0 + s), hi))
}

/// Transmittance of `d` kilometres of fibre at the standard attenuation of
/// 0.2 dB/km: `eta = 10^(-0.02 d)`.
pub fn distance_to_transmittance(distance_km: f64) -> Result<f64> {
    if !distance_km.is_finite() || distance_km < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {distance_km}"
        )));
    }
    Ok(10f64.powf(-0.02 * distance_km))
}

const BOUNDARY_SIGMA_TOL: f64 = 1e-4;

/// Evaluates the sign of the key rate on the grid and extracts the security
/// boundary by per-column bisection (in sigma) between sign changes.
pub fn security_region(grid: &SweepGrid) -> Result<SecurityRegion> {
    let v_values = grid.v_axis.values();
    let sigma_values = grid.sigma_axis.values();
    let ch = Channel::new(grid.eta, grid.epsilon)?;

    let columns: Vec<(Vec<bool>, Vec<BoundaryPoint>)> = v_values
        .par_iter()
        .map(|&v| -> Result<(Vec<bool>, Vec<BoundaryPoint>)> {
            let rates = sigma_values
                .iter()
                .map(|&s| rate_at(v, s, s, &ch, grid.beta, grid.direction))
                .collect::<Result<Vec<f64>>>()?;
            let secure: Vec<bool> = rates.iter().map(|&r| r > 0.0).collect();
            let mut boundary = Vec::new();
            for j in 1..sigma_values.len() {
                if secure[j] != secure[j - 1] {
                    let (mut lo, mut hi) = (sigma_values[j - 1], sigma_values[j]);
                    let lo_secure = secure[j - 1];
                    while hi - lo > BOUNDARY_SIGMA_TOL {
                        let mid = 0.5 * (lo + hi);
                        if (rate_at(v, mid, mid, &ch, grid.beta, grid.direction)? > 0.0)
                            == lo_secure
                        {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    boundary.push(BoundaryPoint {
                        v,
                        sigma: 0.5 * (lo + hi),
                    });
                }
            }
            Ok((secure, boundary))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut secure = Vec::with_capacity(v_values.len());
    let mut boundary = Vec::new();
    for (col, mut pts) in columns {
        secure.push(col);
        boundary.append(&mut pts);
    }
    Ok(SecurityRegion {
        v_values,
        sigma_values,
        secure,
        boundary,
    })
}

/// Optimized key rate at each distance of `distances_km` (parallel over
/// nodes, returned in input order).
pub fn rate_vs_distance_curve(
    v: f64,
    epsilon: f64,
    beta: f64,
    direction: Direction,
    distances_km: &[f64],
    mode: OptimizationMode,
) -> Result<Vec<DistancePoint>> {
    distances_km
        .par_iter()
        .map(|&d| -> Result<DistancePoint> {
            let eta = distance_to_transmittance(d)?;
            let ch = Channel::new(eta, epsilon)?;
            let opt = optimize_displacement(v, &ch, beta, direction, mode)?;
            Ok(DistancePoint {
                distance_km: d,
                eta,
                sigma_opt_x: opt.sigma_x,
                sigma_opt_p: opt.sigma_p,
                rate: opt.rate,
            })
        })
        .collect()
}
