//! Mutual information, Holevo quantities for direct and reverse
//! reconciliation, and the key-rate lower bound under collective attacks.
//!
//! The eavesdropper is assumed to hold a purification of everything outside
//! the trusted laboratories, so her entropy equals the entropy of the full
//! trusted three-mode state `(A, C, B)` after the channel, and her
//! conditional entropy equals the entropy of the trusted modes that remain
//! after the reference party's homodyne measurement. For a purely lossy
//! channel this is identical to modelling Eve as the reflected beamsplitter
//! port, which is also available here as the closed-form route
//! ([`holevo_pure_loss_rr`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{condition_on_homodyne, g_function, von_neumann_entropy, Quadrature};
use crate::protocol::{
    pm_to_epr, trusted_state, two_mode_alice_bob, Channel, Preparation, MODE_A, MODE_B,
};

/// Which party's data is the reference for error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Direct reconciliation: Alice's data is the reference.
    Dr,
    /// Reverse reconciliation: Bob's data is the reference.
    Rr,
}

/// Bob's detection scheme. Heterodyne is supported for mutual-information
/// queries only; the Holevo bound is computed for homodyne detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detection {
    Homodyne,
    Heterodyne,
}

/// Which route produced the Holevo quantity in a [`KeyRateReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolevoMethod {
    Purification,
    PureLossAnalytic,
}

/// Complete protocol configuration for one key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub prep: Preparation,
    pub ch: Channel,
    pub beta: f64,
    pub direction: Direction,
    pub detection: Detection,
}

impl ProtocolConfig {
    pub fn new(
        prep: Preparation,
        ch: Channel,
        beta: f64,
        direction: Direction,
        detection: Detection,
    ) -> Result<Self> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self {
            prep,
            ch,
            beta,
            direction,
            detection,
        })
    }

    /// Homodyne configuration, the common case.
    pub fn homodyne(
        prep: Preparation,
        ch: Channel,
        beta: f64,
        direction: Direction,
    ) -> Result<Self> {
        Self::new(prep, ch, beta, direction, Detection::Homodyne)
    }
}

/// One key-rate evaluation: mutual information, Holevo bound and the
/// resulting lower bound `rate = beta * i_ab - chi`, all in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub i_ab: f64,
    pub chi: f64,
    pub rate: f64,
    pub method: HolevoMethod,
}

/// Both eavesdropper-entropy readings for direct reconciliation, for
/// diagnostic comparison. `chi_full_state` conditions the entropy of the
/// complete trusted `(A, C, B)` state and is the value used by
/// [`holevo_dr`]; `chi_reduced_two_mode` instead takes Eve's entropy from
/// the two-mode Alice-Bob reduction, which is not consistent with the
/// lossless limit and is kept only for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrEntropyReadings {
    pub s_e_full_state: f64,
    pub s_e_reduced_two_mode: f64,
    pub s_conditional: f64,
    pub chi_full_state: f64,
    pub chi_reduced_two_mode: f64,
    pub discrepancy: f64,
}

/// Entropy differences this close to zero from below are floating-point
/// cancellation and are floored to 0.
const CHI_FLOOR_TOL: f64 = 1e-9;

fn floor_chi(d: f64) -> Result<f64> {
    if d >= 0.0 {
        Ok(d)
    } else if d >= -CHI_FLOOR_TOL {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "Holevo quantity came out negative: {d}"
        )))
    }
}

/// Shannon mutual information between Alice and Bob in bits:
/// `I = log2(1 + sigma_x eta / (lambda + eta (V + epsilon - 1))) / 2` with
/// `lambda = 1` for homodyne and `lambda = 2` for heterodyne detection.
pub fn mutual_information(cfg: &ProtocolConfig) -> Result<f64> {
    let lambda = match cfg.detection {
        Detection::Homodyne => 1.0,
        Detection::Heterodyne => 2.0,
    };
    let (v, sx) = (cfg.prep.v(), cfg.prep.sigma_x());
    let (eta, eps) = (cfg.ch.eta(), cfg.ch.epsilon());
    Ok(0.5 * (1.0 + sx * eta / (lambda + eta * (v + eps - 1.0))).log2())
}

/// Holevo bound for reverse reconciliation via the purification route:
/// entropy of the trusted three-mode state minus the entropy of the trusted
/// modes conditioned on Bob's x-homodyne.
pub fn holevo_rr(cfg: &ProtocolConfig) -> Result<f64> {
    let g = trusted_state(&cfg.prep, &cfg.ch)?;
    let s_e = von_neumann_entropy(&g)?;
    let cond = condition_on_homodyne(&g, MODE_B, Quadrature::X)?;
    floor_chi(s_e - von_neumann_entropy(&cond)?)
}

/// Holevo bound for reverse reconciliation over a purely lossy channel from
/// the closed-form symplectic eigenvalues of Eve's reflected mode:
///
/// `lambda_1 = sqrt(prod_i (V_B^i (1-eta) + eta))` and `lambda_2` the same
/// with the x-factor reduced by `C_BE^2 / (V_B^x eta + 1 - eta)`, where
/// `C_BE = sqrt(eta (1-eta)) (1 - V_B^x)`; then
/// `chi = G((lambda_1-1)/2) - G((lambda_2-1)/2)`.
pub fn holevo_pure_loss_rr(cfg: &ProtocolConfig) -> Result<f64> {
    if cfg.ch.epsilon() != 0.0 {
        return Err(Error::MethodMisuse(format!(
            "pure-loss route requires epsilon = 0, got {}",
            cfg.ch.epsilon()
        )));
    }
    let eta = cfg.ch.eta();
    let vb_x = cfg.prep.v() + cfg.prep.sigma_x();
    let vb_p = 1.0 / cfg.prep.v() + cfg.prep.sigma_p();
    let ve_x = vb_x * (1.0 - eta) + eta;
    let ve_p = vb_p * (1.0 - eta) + eta;
    let l1 = (ve_x * ve_p).sqrt();
    let c_be = (eta * (1.0 - eta)).sqrt() * (1.0 - vb_x);
    let l2 = ((ve_x - c_be * c_be / (vb_x * eta + 1.0 - eta)) * ve_p).sqrt();
    // both eigenvalues are >= 1 up to round-off
    floor_chi(g_function(((l1 - 1.0) / 2.0).max(0.0))? - g_function(((l2 - 1.0) / 2.0).max(0.0))?)
}

/// Holevo bound for direct reconciliation: entropy of the trusted three-mode
/// state minus the entropy of modes `(C, B)` conditioned on Alice's
/// x-homodyne of mode A.
pub fn holevo_dr(cfg: &ProtocolConfig) -> Result<f64> {
    let g = trusted_state(&cfg.prep, &cfg.ch)?;
    let s_e = von_neumann_entropy(&g)?;
    let cond = condition_on_homodyne(&g, MODE_A, Quadrature::X)?;
    floor_chi(s_e - von_neumann_entropy(&cond)?)
}

/// Computes both direct-reconciliation entropy readings and their
/// discrepancy; see [`DrEntropyReadings`].
pub fn holevo_dr_readings(cfg: &ProtocolConfig) -> Result<DrEntropyReadings> {
    let src = pm_to_epr(&cfg.prep)?;
    let g = trusted_state(&cfg.prep, &cfg.ch)?;
    let s_e_full = von_neumann_entropy(&g)?;
    let s_e_reduced = von_neumann_entropy(&two_mode_alice_bob(&src, &cfg.ch)?)?;
    let cond = condition_on_homodyne(&g, MODE_A, Quadrature::X)?;
    let s_cond = von_neumann_entropy(&cond)?;
    Ok(DrEntropyReadings {
        s_e_full_state: s_e_full,
        s_e_reduced_two_mode: s_e_reduced,
        s_conditional: s_cond,
        chi_full_state: floor_chi(s_e_full - s_cond)?,
        chi_reduced_two_mode: s_e_reduced - s_cond,
        discrepancy: s_e_reduced - s_e_full,
    })
}

/// Correlation between Bob's mode and the cloner mode of an entangling-cloner
/// attack, `sqrt(eta (1-eta)) (1 - V_B^x + eta epsilon)`. Diagnostic only:
/// it vanishes at the decoupling point `V_B^x = 1` for a purely lossy channel
/// and quantifies residual coupling otherwise.
pub fn entangling_cloner_correlation(prep: &Preparation, ch: &Channel) -> f64 {
    let vb_x = prep.v() + prep.sigma_x();
    (ch.eta() * (1.0 - ch.eta())).sqrt() * (1.0 - vb_x + ch.eta() * ch.epsilon())
}

/// Pure-loss agreement between the purification and analytic reverse-
/// reconciliation routes is enforced at this tolerance on every evaluation.
const CROSS_PATH_GUARD: f64 = 1e-6;

/// Key-rate lower bound `rate = beta * I_AB - chi` for the configured
/// direction. Homodyne detection only; the purification route is
/// authoritative, with the analytic pure-loss route run as a consistency
/// guard when `epsilon = 0` and direction is reverse.
pub fn key_rate(cfg: &ProtocolConfig) -> Result<KeyRateReport> {
    if cfg.detection != Detection::Homodyne {
        return Err(Error::UnsupportedConfig(
            "key rate is defined for homodyne detection only".into(),
        ));
    }
    let i_ab = mutual_information(cfg)?;
    let chi = match cfg.direction {
        Direction::Dr => holevo_dr(cfg)?,
        Direction::Rr => {
            let chi = holevo_rr(cfg)?;
            if cfg.ch.epsilon() == 0.0 {
                let analytic = holevo_pure_loss_rr(cfg)?;
                if (chi - analytic).abs() > CROSS_PATH_GUARD {
                    return Err(Error::Numerical(format!(
                        "purification ({chi}) and pure-loss ({analytic}) routes disagree"
                    )));
                }
            }
            chi
        }
    };
    Ok(KeyRateReport {
        i_ab,
        chi,
        rate: cfg.beta * i_ab - chi,
        method: HolevoMethod::Purification,
    })
}

/// Key rate with the Holevo quantity from the analytic pure-loss route
/// (reverse reconciliation, `epsilon = 0` only).
pub fn key_rate_pure_loss_analytic(cfg: &ProtocolConfig) -> Result<KeyRateReport> {
    if cfg.detection != Detection::Homodyne {
        return Err(Error::UnsupportedConfig(
            "key rate is defined for homodyne detection only".into(),
        ));
    }
    if cfg.direction != Direction::Rr {
        return Err(Error::MethodMisuse(
            "analytic pure-loss route applies to reverse reconciliation".into(),
        ));
    }
    let i_ab = mutual_information(cfg)?;
    let chi = holevo_pure_loss_rr(cfg)?;
    Ok(KeyRateReport {
        i_ab,
        chi,
        rate: cfg.beta * i_ab - chi,
        method: HolevoMethod::PureLossAnalytic,
    })
}
