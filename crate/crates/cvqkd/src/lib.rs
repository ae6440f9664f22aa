//! Lower bounds on secure key rates for Gaussian continuous-variable quantum
//! key distribution with squeezed or coherent states under collective
//! attacks.
//!
//! The library models the generalized preparation scheme in which squeezing
//! and Gaussian displacement are independent resources: Alice sends
//! x-squeezed states of variance `V` displaced with variances
//! `(sigma_x, sigma_p)` through an untrusted channel of transmittance `eta`
//! and input-referred excess noise `epsilon`; Bob homodynes. Security is
//! quantified by `rate = beta I_AB - chi`, the reconciliation-weighted mutual
//! information minus the Holevo bound on the eavesdropper's information, for
//! either direct or reverse reconciliation.
//!
//! Modules:
//! - [`gaussian`]: covariance matrices, symplectic spectra, entropies,
//!   beamsplitters, homodyne conditioning;
//! - [`protocol`]: the equivalent entangled-source construction and the
//!   channel transform;
//! - [`rates`]: mutual information, Holevo quantities, key-rate reports;
//! - [`security`]: displacement optimization, noise tolerances, security
//!   regions, distance curves;
//! - [`sampling`]: a seeded Monte-Carlo check of the moment predictions.
//!
//! All variances are in shot-noise units and all information quantities in
//! bits. Everything is a pure function of its inputs; grids may be evaluated
//! in parallel.

pub mod error;
pub mod gaussian;
pub mod protocol;
pub mod rates;
pub mod sampling;
pub mod security;

pub use error::{Error, Result};
pub use gaussian::{
    apply_beamsplitter, condition_on_homodyne, g_function, symplectic_eigenvalues,
    von_neumann_entropy, CovMatrix, Quadrature, SymplecticSpectrum,
};
pub use protocol::{
    apply_channel, build_three_mode_state, conditional_variance_b_given_a, pm_to_epr,
    trusted_state, two_mode_alice_bob, Channel, EprSource, Preparation, MODE_A, MODE_B, MODE_C,
};
pub use rates::{
    entangling_cloner_correlation, holevo_dr, holevo_dr_readings, holevo_pure_loss_rr, holevo_rr,
    key_rate, key_rate_pure_loss_analytic, mutual_information, Detection, Direction, HolevoMethod,
    KeyRateReport, ProtocolConfig,
};
pub use sampling::{simulate_pm, Estimate, RunStats};
pub use security::{
    distance_to_transmittance, dr_coherent_beta_threshold, max_squeezed_variance_dr,
    max_tolerable_noise, noise_tolerance_table, optimize_displacement, rate_vs_distance_curve,
    security_region, sigma_limits_high_squeezing, Axis, BoundaryPoint, DisplacementOptimum,
    DistancePoint, MaxSqueezedVariance, NoiseToleranceResult, OptimizationMode, SecurityRegion,
    Spacing, SweepGrid,
};
