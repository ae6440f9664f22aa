//! Protocol state preparation: the prepare-and-measure to entanglement-based
//! parameter mapping, the three-mode source + heterodyne covariance matrix,
//! and the untrusted-channel transform.
//!
//! The prepare-and-measure picture: Alice sends x-squeezed states of variance
//! `V` (`V = 1` coherent), displaced by independent zero-mean Gaussians of
//! variance `sigma_x` and `sigma_p`. The equivalent entangled source couples
//! two oppositely squeezed modes on a balanced beamsplitter; Alice measures
//! her half with a heterodyne whose free port carries a squeezed state of
//! variance `Vm`. Mode order in the three-mode state is `(A, C, B)`: A is the
//! x-measured heterodyne port, C the conjugate port, B the signal mode.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{apply_beamsplitter, CovMatrix};

/// Signal-state parameters of the prepare-and-measure scheme (SNU).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preparation {
    v: f64,
    sigma_x: f64,
    sigma_p: f64,
}

impl Preparation {
    /// `v` is the squeezed quadrature variance (`v = 1` for coherent states),
    /// `sigma_x`/`sigma_p` the displacement variances. All must be positive;
    /// zero modulation is approximated by a small value such as `1e-6`
    /// because the entangled-source mapping is singular at `sigma_x = 0`.
    pub fn new(v: f64, sigma_x: f64, sigma_p: f64) -> Result<Self> {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "squeezed variance v must be positive, got {v}"
            )));
        }
        if !sigma_x.is_finite() || sigma_x <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma_x must be positive (the source mapping is singular at 0), got {sigma_x}"
            )));
        }
        if !sigma_p.is_finite() || sigma_p <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma_p must be positive (the source mapping is singular at 0), got {sigma_p}"
            )));
        }
        Ok(Self {
            v,
            sigma_x,
            sigma_p,
        })
    }

    /// Same displacement variance applied to both quadratures.
    pub fn symmetric(v: f64, sigma: f64) -> Result<Self> {
        Self::new(v, sigma, sigma)
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }
}

/// Equivalent entangled-source parameters: squeezed (`v1`) and anti-squeezed
/// (`v2`) x-variances of the source modes and the squeezed variance `vm` of
/// the heterodyne-port state. Source modes are pure: `(v, 1/v)` in `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprSource {
    v1: f64,
    v2: f64,
    vm: f64,
}

impl EprSource {
    pub fn new(v1: f64, v2: f64, vm: f64) -> Result<Self> {
        if !(v1 > 0.0 && v2 > 0.0 && vm > 0.0) {
            return Err(Error::Domain(format!(
                "source variances must be positive, got ({v1}, {v2}, {vm})"
            )));
        }
        if v1 > v2 {
            return Err(Error::Domain(format!(
                "expected v1 <= v2 (squeezed before anti-squeezed), got ({v1}, {v2})"
            )));
        }
        Ok(Self { v1, v2, vm })
    }

    pub fn v1(&self) -> f64 {
        self.v1
    }

    pub fn v2(&self) -> f64 {
        self.v2
    }

    pub fn vm(&self) -> f64 {
        self.vm
    }

    /// The p-squeezed variant of the protocol, obtained by the substitution
    /// `v1 -> 1/v1`, `v2 -> 1/v2`, `vm -> 1/vm` (mode labels swap so that
    /// the squeezed variance stays first).
    pub fn swapped_quadratures(&self) -> EprSource {
        EprSource {
            v1: 1.0 / self.v2,
            v2: 1.0 / self.v1,
            vm: 1.0 / self.vm,
        }
    }
}

/// Untrusted channel with transmittance `eta` in (0, 1] and excess noise
/// `epsilon >= 0` (SNU, referred to the channel input).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    eta: f64,
    epsilon: f64,
}

impl Channel {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Domain(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        Ok(Self { eta, epsilon })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same transmittance with excess noise replaced by `epsilon`.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.eta, epsilon)
    }
}

/// Index of mode A (Alice's x-measured heterodyne port) in the three-mode state.
pub const MODE_A: usize = 0;
/// Index of mode C (the conjugate heterodyne port).
pub const MODE_C: usize = 1;
/// Index of mode B (the signal mode sent to Bob).
pub const MODE_B: usize = 2;

/// Maps the prepare-and-measure parameters onto the equivalent entangled
/// source:
///
/// `V_{1,2} = V + sigma_x -/+ sqrt((V+sigma_x)(sigma_x + V sigma_p (V+sigma_x)) / (1 + V sigma_p))`
/// and `V_m = V^2 sigma_p (V+sigma_x) / (sigma_x (1 + V sigma_p))`.
pub fn pm_to_epr(prep: &Preparation) -> Result<EprSource> {
    let (v, sx, sp) = (prep.v(), prep.sigma_x(), prep.sigma_p());
    let b = v + sx;
    let arg = b * (sx + v * sp * b) / (1.0 + v * sp);
    if arg < 0.0 {
        return Err(Error::Numerical(format!(
            "negative square-root argument {arg} in source mapping"
        )));
    }
    let s = arg.sqrt();
    let vm = v * v * sp * b / (sx * (1.0 + v * sp));
    EprSource::new(b - s, b + s, vm)
}

/// Builds the pure three-mode covariance matrix, modes ordered `(A, C, B)`,
/// before the channel.
///
/// The source modes `(v2, 1/v2)` and `(v1, 1/v1)` couple on a balanced
/// beamsplitter into Alice's mode and the signal; Alice's mode then couples
/// with the `(vm, 1/vm)` state on a second balanced beamsplitter to form the
/// heterodyne ports A and C.
pub fn build_three_mode_state(src: &EprSource) -> Result<CovMatrix> {
    let s2 = CovMatrix::single_mode(src.v2(), 1.0 / src.v2())?;
    let m = CovMatrix::single_mode(src.vm(), 1.0 / src.vm())?;
    let s1 = CovMatrix::single_mode(src.v1(), 1.0 / src.v1())?;
    let g = CovMatrix::direct_sum(&[s2, m, s1]);
    // (s2, m, s1) -> (A0, m, B) -> (A, C, B)
    let g = apply_beamsplitter(&g, 0, 2, 0.5)?;
    apply_beamsplitter(&g, 0, 1, 0.5)
}

/// Applies the untrusted channel to one mode: diagonal entries map
/// `v -> eta (v + epsilon - 1) + 1` and every covariance with that mode
/// scales by `sqrt(eta)`.
pub fn apply_channel(gamma: &CovMatrix, bob_mode: usize, ch: &Channel) -> Result<CovMatrix> {
    let n = gamma.n_modes();
    if bob_mode >= n {
        return Err(Error::Shape(format!(
            "mode index {bob_mode} out of range for {n} modes"
        )));
    }
    let se = ch.eta().sqrt();
    let mut m = gamma.matrix().clone();
    for q in 0..2 {
        let i = 2 * bob_mode + q;
        for j in 0..2 * n {
            m[(i, j)] *= se;
        }
    }
    for q in 0..2 {
        let i = 2 * bob_mode + q;
        for j in 0..2 * n {
            m[(j, i)] *= se;
        }
        m[(i, i)] += (1.0 - ch.eta()) + ch.eta() * ch.epsilon();
    }
    CovMatrix::from_matrix(m)
}

/// The two-mode Alice-Bob covariance matrix after the channel, built from the
/// closed-form entries (mode order `(A, B)`):
///
/// `V_A^x = (v1+v2+2vm)/4`, `V_A^p = 1/(4v1)+1/(4v2)+1/(2vm)`,
/// `V_B^x = (v1+v2)/2`, `V_B^p = 1/(2v1)+1/(2v2)`,
/// `C^x = (v2-v1)/(2 sqrt 2)`, `C^p = (1/v2-1/v1)/(2 sqrt 2)`;
/// Bob's diagonal maps through the channel and correlations scale by
/// `sqrt(eta)`. Equals the `(A, B)` reduction of
/// [`build_three_mode_state`] + [`apply_channel`].
pub fn two_mode_alice_bob(src: &EprSource, ch: &Channel) -> Result<CovMatrix> {
    let (v1, v2, vm) = (src.v1(), src.v2(), src.vm());
    let (eta, eps) = (ch.eta(), ch.epsilon());
    let va_x = (v1 + v2 + 2.0 * vm) / 4.0;
    let va_p = 1.0 / (4.0 * v1) + 1.0 / (4.0 * v2) + 1.0 / (2.0 * vm);
    let vb_x = (v1 + v2) / 2.0;
    let vb_p = 1.0 / (2.0 * v1) + 1.0 / (2.0 * v2);
    let cx = (v2 - v1) / (2.0 * 2.0_f64.sqrt());
    let cp = (1.0 / v2 - 1.0 / v1) / (2.0 * 2.0_f64.sqrt());
    let se = eta.sqrt();
    let m = nalgebra::dmatrix![
        va_x, 0.0, se * cx, 0.0;
        0.0, va_p, 0.0, se * cp;
        se * cx, 0.0, eta * (vb_x + eps - 1.0) + 1.0, 0.0;
        0.0, se * cp, 0.0, eta * (vb_p + eps - 1.0) + 1.0;
    ];
    CovMatrix::from_matrix(m)
}

/// Closed form of Alice's conditional state after Bob's x-homodyne:
/// `diag(V_A^x - eta (v1-v2)^2 / (8 + 4 eta (v1+v2+2 epsilon-2)), V_A^p)`.
pub fn conditional_alice_after_bob_x(src: &EprSource, ch: &Channel) -> Result<CovMatrix> {
    let (v1, v2, vm) = (src.v1(), src.v2(), src.vm());
    let (eta, eps) = (ch.eta(), ch.epsilon());
    let va_x = (v1 + v2 + 2.0 * vm) / 4.0;
    let va_p = 1.0 / (4.0 * v1) + 1.0 / (4.0 * v2) + 1.0 / (2.0 * vm);
    let num = eta * (v1 - v2) * (v1 - v2);
    let den = 8.0 + 4.0 * eta * (v1 + v2 + 2.0 * eps - 2.0);
    CovMatrix::single_mode(va_x - num / den, va_p)
}

/// Conditional variance of Bob's x-quadrature given Alice's measurement:
/// `(2 - eta (v1-v2)^2 / (v1+v2+2vm) + eta (v1+v2+2 epsilon-2)) / 2`.
/// Equals the matrix-path value `V_B - C_AB^2 / V_A`.
pub fn conditional_variance_b_given_a(prep: &Preparation, ch: &Channel) -> Result<f64> {
    let src = pm_to_epr(prep)?;
    let (v1, v2, vm) = (src.v1(), src.v2(), src.vm());
    let (eta, eps) = (ch.eta(), ch.epsilon());
    Ok(0.5
        * (2.0 - eta * (v1 - v2) * (v1 - v2) / (v1 + v2 + 2.0 * vm)
            + eta * (v1 + v2 + 2.0 * eps - 2.0)))
}

/// Bob's x-variance after the channel, from the prepare-and-measure picture.
pub fn bob_variance_x(prep: &Preparation, ch: &Channel) -> f64 {
    ch.eta() * (prep.v() + prep.sigma_x() + ch.epsilon() - 1.0) + 1.0
}

/// The trusted three-mode state after the channel acting on mode B.
pub fn trusted_state(prep: &Preparation, ch: &Channel) -> Result<CovMatrix> {
    let src = pm_to_epr(prep)?;
    let g = build_three_mode_state(&src)?;
    apply_channel(&g, MODE_B, ch)
}
