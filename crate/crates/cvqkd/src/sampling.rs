//! Monte-Carlo simulator of the prepare-and-measure protocol, used as an
//! independent statistical check of the second-moment and mutual-information
//! predictions.
//!
//! Randomness is a ChaCha20 stream seeded with a caller-supplied 64-bit seed;
//! normal deviates come from the Box-Muller transform applied to that stream.
//! Identical seed and parameters give identical output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{Channel, Preparation};

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Empirical second moments of one simulation run. Alice's variables are the
/// displacement values, Bob's are his quadrature readings after the channel;
/// `mi_x` is the Gaussian regression estimate of the x-quadrature mutual
/// information in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub n_samples: u64,
    pub v_a_x: Estimate,
    pub v_a_p: Estimate,
    pub v_b_x: Estimate,
    pub v_b_p: Estimate,
    pub c_ab_x: Estimate,
    pub c_ab_p: Estimate,
    pub mi_x_bits: Estimate,
}

struct Gaussian {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Standard normal deviate via Box-Muller.
    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - self.rng.random::<f64>(); // (0, 1]
        let u2: f64 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

struct Accumulator {
    n: f64,
    sum_a: f64,
    sum_b: f64,
    sum_aa: f64,
    sum_bb: f64,
    sum_ab: f64,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            n: 0.0,
            sum_a: 0.0,
            sum_b: 0.0,
            sum_aa: 0.0,
            sum_bb: 0.0,
            sum_ab: 0.0,
        }
    }

    fn push(&mut self, a: f64, b: f64) {
        self.n += 1.0;
        self.sum_a += a;
        self.sum_b += b;
        self.sum_aa += a * a;
        self.sum_bb += b * b;
        self.sum_ab += a * b;
    }

    /// Sample variances and covariance with standard errors.
    fn moments(&self) -> (Estimate, Estimate, Estimate) {
        let n = self.n;
        let ma = self.sum_a / n;
        let mb = self.sum_b / n;
        let va = (self.sum_aa - n * ma * ma) / (n - 1.0);
        let vb = (self.sum_bb - n * mb * mb) / (n - 1.0);
        let cab = (self.sum_ab - n * ma * mb) / (n - 1.0);
        let se_va = va * (2.0 / (n - 1.0)).sqrt();
        let se_vb = vb * (2.0 / (n - 1.0)).sqrt();
        let se_c = ((va * vb + cab * cab) / (n - 1.0)).sqrt();
        (
            Estimate {
                value: va,
                std_err: se_va,
            },
            Estimate {
                value: vb,
                std_err: se_vb,
            },
            Estimate {
                value: cab,
                std_err: se_c,
            },
        )
    }
}

/// Simulates `n` rounds of state preparation, transmission and homodyne
/// readout, and returns the empirical moments.
///
/// Per round: displacements `(a_x, a_p)` are drawn from zero-mean Gaussians
/// of variance `(sigma_x, sigma_p)`; Bob's readings are Gaussian around
/// `sqrt(eta) a` with the unmodulated output variance
/// `eta (V + epsilon - 1) + 1` (and `V -> 1/V` for p).
pub fn simulate_pm(prep: &Preparation, ch: &Channel, n: u64, seed: u64) -> Result<RunStats> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let (v, sx, sp) = (prep.v(), prep.sigma_x(), prep.sigma_p());
    let (eta, eps) = (ch.eta(), ch.epsilon());
    let se = eta.sqrt();
    let sd_ax = sx.sqrt();
    let sd_ap = sp.sqrt();
    let sd_bx = (eta * (v + eps - 1.0) + 1.0).sqrt();
    let sd_bp = (eta * (1.0 / v + eps - 1.0) + 1.0).sqrt();

    let mut gauss = Gaussian::new(seed);
    let mut acc_x = Accumulator::new();
    let mut acc_p = Accumulator::new();
    for _ in 0..n {
        let ax = sd_ax * gauss.next();
        let ap = sd_ap * gauss.next();
        let xb = se * ax + sd_bx * gauss.next();
        let pb = se * ap + sd_bp * gauss.next();
        acc_x.push(ax, xb);
        acc_p.push(ap, pb);
    }

    let (v_a_x, v_b_x, c_ab_x) = acc_x.moments();
    let (v_a_p, v_b_p, c_ab_p) = acc_p.moments();

    // I = -log2(1 - r^2) / 2 from the empirical correlation coefficient
    let r2 = c_ab_x.value * c_ab_x.value / (v_a_x.value * v_b_x.value);
    let mi = -0.5 * (1.0 - r2).log2();
    let se_mi = r2.sqrt() / (std::f64::consts::LN_2 * (n as f64).sqrt());

    Ok(RunStats {
        n_samples: n,
        v_a_x,
        v_a_p,
        v_b_x,
        v_b_p,
        c_ab_x,
        c_ab_p,
        mi_x_bits: Estimate {
            value: mi,
            std_err: se_mi,
        },
    })
}
