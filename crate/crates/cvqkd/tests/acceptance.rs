//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line with the measured numbers before asserting.
//!
//! Known honest failures (kept faithful rather than loosened; see the
//! project README for the analysis):
//! - `criterion_1`: the published noise-tolerance value for
//!   `beta = 0.2, V = 1` (1e-3, the only one-significant-figure entry of the
//!   table) is not reproducible within 10% by symmetric-displacement
//!   optimization, which yields 5.5e-4; the other seven cells reproduce.
//! - `criterion_5`: the high-squeezing displacement window is an
//!   eta -> 0 asymptote; at eta = 0.1, beta = 0.9 the true sign changes sit
//!   at sigma = 0.487 and 63.6, outside the 1e-2 brackets around the
//!   asymptotic bounds. The same brackets do hold as beta -> 0 (see the
//!   oracle suite).

use std::time::Instant;

use rayon::prelude::*;

use cvqkd::{
    condition_on_homodyne, holevo_pure_loss_rr, holevo_rr, key_rate, max_tolerable_noise,
    mutual_information, optimize_displacement, pm_to_epr, sigma_limits_high_squeezing, simulate_pm,
    symplectic_eigenvalues, two_mode_alice_bob, Channel, Direction, OptimizationMode, Preparation,
    ProtocolConfig, Quadrature,
};

fn rr_config(v: f64, sx: f64, sp: f64, eta: f64, eps: f64, beta: f64) -> ProtocolConfig {
    ProtocolConfig::homodyne(
        Preparation::new(v, sx, sp).unwrap(),
        Channel::new(eta, eps).unwrap(),
        beta,
        Direction::Rr,
    )
    .unwrap()
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Published maximum-tolerable-noise table: beta x {V=1, V=0.5} at eta = 0.1,
/// reverse reconciliation, within 10% relative. Runtime must stay under 60 s.
#[test]
fn criterion_1_noise_tolerance_table() {
    let start = Instant::now();
    let expected: [(f64, f64, f64); 4] = [
        (0.2, 1.0e-3, 1.3e-2),
        (0.4, 3.7e-3, 3.4e-2),
        (0.6, 1.2e-2, 6.3e-2),
        (0.8, 3.8e-2, 1.1e-1),
    ];
    let cells: Vec<(f64, f64, f64)> = expected
        .par_iter()
        .map(|&(beta, _, _)| {
            let v1 =
                max_tolerable_noise(1.0, 0.1, beta, Direction::Rr, OptimizationMode::Symmetric)
                    .unwrap();
            let v05 =
                max_tolerable_noise(0.5, 0.1, beta, Direction::Rr, OptimizationMode::Symmetric)
                    .unwrap();
            (beta, v1.epsilon_max, v05.epsilon_max)
        })
        .collect();

    let mut all_ok = true;
    for ((beta, exp1, exp05), (_, got1, got05)) in expected.iter().zip(&cells) {
        for (v, exp, got) in [(1.0, exp1, got1), (0.5, exp05, got05)] {
            let rel = (got - exp) / exp;
            let ok = rel.abs() <= 0.10;
            all_ok &= ok;
            println!(
                "{} criterion 1 cell beta={beta} V={v}: eps_max={got:.4e} expected {exp:.1e} ({:+.1}%)",
                status(ok),
                100.0 * rel
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let time_ok = elapsed < 60.0;
    println!(
        "{} criterion 1 runtime: {elapsed:.1} s (limit 60 s)",
        status(time_ok)
    );
    println!(
        "{} criterion 1: noise-tolerance table reproduction",
        status(all_ok && time_ok)
    );
    assert!(time_ok, "table computation exceeded 60 s");
    assert!(
        all_ok,
        "not all table cells within 10%; symmetric-displacement optimization \
         cannot reach 1e-3 for beta=0.2, V=1 (computed ~5.5e-4)"
    );
}

/// Reverse-reconciliation Holevo quantity vanishes at sigma_x = 1 - V over a
/// purely lossy channel, to 1e-8 bits on the stated grid.
#[test]
fn criterion_2_decoupling_identity() {
    let mut worst = 0.0f64;
    for v in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for eta in [0.1, 0.5, 0.9] {
            let chi = holevo_rr(&rr_config(v, 1.0 - v, 1.0 - v, eta, 0.0, 1.0)).unwrap();
            worst = worst.max(chi.abs());
        }
    }
    let ok = worst <= 1e-8;
    println!(
        "{} criterion 2: decoupling identity, worst |chi| = {worst:.2e}",
        status(ok)
    );
    assert!(ok);
}

/// The purification route and the closed-form pure-loss route agree to 1e-9
/// bits over the 27-point grid, and generic conditioning matches the
/// closed-form conditional matrix to 1e-12.
#[test]
fn criterion_3_cross_route_equality() {
    let mut worst_chi = 0.0f64;
    let mut worst_cond = 0.0f64;
    for v in [0.1, 0.5, 1.0] {
        for s in [0.1, 1.0, 5.0] {
            for eta in [0.1, 0.5, 0.9] {
                let cfg = rr_config(v, s, s, eta, 0.0, 1.0);
                let purif = holevo_rr(&cfg).unwrap();
                let analytic = holevo_pure_loss_rr(&cfg).unwrap();
                worst_chi = worst_chi.max((purif - analytic).abs());

                for eps in [0.0, 0.05] {
                    let src = pm_to_epr(&Preparation::new(v, s, s).unwrap()).unwrap();
                    let ch = Channel::new(eta, eps).unwrap();
                    let generic = condition_on_homodyne(
                        &two_mode_alice_bob(&src, &ch).unwrap(),
                        1,
                        Quadrature::X,
                    )
                    .unwrap();
                    let closed = cvqkd::protocol::conditional_alice_after_bob_x(&src, &ch).unwrap();
                    worst_cond = worst_cond.max((generic.matrix() - closed.matrix()).abs().max());
                }
            }
        }
    }
    let ok = worst_chi <= 1e-9 && worst_cond <= 1e-12;
    println!(
        "{} criterion 3: cross-route equality, worst chi gap {worst_chi:.2e}, worst conditioning gap {worst_cond:.2e}",
        status(ok)
    );
    assert!(worst_chi <= 1e-9);
    assert!(worst_cond <= 1e-12);
}

/// The optimized direct-reconciliation rate for coherent states at eta = 0.6
/// changes sign at beta = 2/3 +/- 0.01 (displacement optimized in both
/// quadratures).
#[test]
fn criterion_4_dr_beta_threshold() {
    let ch = Channel::new(0.6, 0.0).unwrap();
    let secure = |beta: f64| -> bool {
        optimize_displacement(1.0, &ch, beta, Direction::Dr, OptimizationMode::Independent)
            .unwrap()
            .rate
            > 0.0
    };
    let (mut lo, mut hi) = (0.60, 0.75);
    assert!(
        !secure(lo) && secure(hi),
        "threshold not bracketed by [0.60, 0.75]"
    );
    while hi - lo > 5e-4 {
        let mid = 0.5 * (lo + hi);
        if secure(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let threshold = 0.5 * (lo + hi);
    let target = 2.0 / 3.0;
    let ok = (threshold - target).abs() <= 0.01;
    println!(
        "{} criterion 4: DR sign change at beta = {threshold:.4} (target {target:.4} +/- 0.01)",
        status(ok)
    );
    assert!(ok, "threshold {threshold} not within 0.01 of 2/3");
}

/// Strong-squeezing displacement window: at V = 1e-3, beta = 0.9, eta = 0.1,
/// the rate sign changes within 1e-2 of each analytic bound.
#[test]
fn criterion_5_high_squeezing_window() {
    let beta = 0.9;
    let (lo, hi) = sigma_limits_high_squeezing(beta).unwrap();
    let rate = |s: f64| {
        key_rate(&rr_config(1e-3, s, s, 0.1, 0.0, beta))
            .unwrap()
            .rate
    };
    let d = 1e-2;
    let checks = [
        ("below lower bound", rate(lo - d), -1.0),
        ("above lower bound", rate(lo + d), 1.0),
        ("below upper bound", rate(hi - d), 1.0),
        ("above upper bound", rate(hi + d), -1.0),
    ];
    let mut ok = true;
    for (name, r, want_sign) in checks {
        let pass = r.signum() == want_sign;
        ok &= pass;
        println!(
            "{} criterion 5 {name}: rate = {r:+.3e} (expected sign {want_sign:+})",
            status(pass)
        );
    }
    println!(
        "{} criterion 5: sign changes within 1e-2 of ({lo:.3}, {hi:.2})",
        status(ok)
    );
    assert!(
        ok,
        "the analytic window is an eta -> 0 asymptote; at eta = 0.1 the true \
         sign changes are near sigma = 0.487 and 63.6"
    );
}

/// The source construction reproduces the intended signal ensemble:
/// V_B^x = V + sigma_x and V_B^p = 1/V + sigma_p to 1e-10, and the
/// three-mode state is globally pure to 1e-9, over 1000 random preparations.
#[test]
fn criterion_6_prepare_and_measure_consistency() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(20260810);
    let mut worst_var = 0.0f64;
    let mut worst_purity = 0.0f64;
    for _ in 0..1000 {
        let v = rng.random_range(0.05..1.0);
        let sx = 10f64.powf(rng.random_range(-3.0..1.0));
        let sp = 10f64.powf(rng.random_range(-3.0..1.0));
        let src = pm_to_epr(&Preparation::new(v, sx, sp).unwrap()).unwrap();
        let g = cvqkd::build_three_mode_state(&src).unwrap();
        worst_var = worst_var
            .max((g.variance(cvqkd::MODE_B, Quadrature::X) - (v + sx)).abs())
            .max((g.variance(cvqkd::MODE_B, Quadrature::P) - (1.0 / v + sp)).abs());
        for &nu in symplectic_eigenvalues(&g).unwrap().values() {
            worst_purity = worst_purity.max((nu - 1.0).abs());
        }
    }
    let ok = worst_var <= 1e-10 && worst_purity <= 1e-9;
    println!(
        "{} criterion 6: prepare-and-measure consistency, worst variance gap {worst_var:.2e}, worst purity gap {worst_purity:.2e}",
        status(ok)
    );
    assert!(worst_var <= 1e-10);
    assert!(worst_purity <= 1e-9);
}

/// Monte-Carlo oracle: at 1e6 samples, the empirical Bob variance, the
/// Alice-Bob covariance and the mutual-information estimate each match the
/// analytic values within 4 standard errors in at least 95 of 100 seeded runs.
#[test]
fn criterion_7_monte_carlo_oracle() {
    let prep = Preparation::new(0.5, 1.0, 1.0).unwrap();
    let ch = Channel::new(0.1, 0.1).unwrap();
    let cfg = ProtocolConfig::homodyne(prep, ch, 1.0, Direction::Rr).unwrap();
    let vb_expected = cvqkd::protocol::bob_variance_x(&prep, &ch);
    let c_expected = ch.eta().sqrt() * prep.sigma_x();
    let mi_expected = mutual_information(&cfg).unwrap();

    let hits: Vec<(bool, bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let s = simulate_pm(&prep, &ch, 1_000_000, seed).unwrap();
            (
                (s.v_b_x.value - vb_expected).abs() <= 4.0 * s.v_b_x.std_err,
                (s.c_ab_x.value - c_expected).abs() <= 4.0 * s.c_ab_x.std_err,
                (s.mi_x_bits.value - mi_expected).abs() <= 4.0 * s.mi_x_bits.std_err,
            )
        })
        .collect();
    let vb_ok = hits.iter().filter(|h| h.0).count();
    let c_ok = hits.iter().filter(|h| h.1).count();
    let mi_ok = hits.iter().filter(|h| h.2).count();
    let ok = vb_ok >= 95 && c_ok >= 95 && mi_ok >= 95;
    println!(
        "{} criterion 7: Monte-Carlo agreement V_B {vb_ok}/100, C_AB {c_ok}/100, MI {mi_ok}/100",
        status(ok)
    );
    assert!(ok);
}

/// Figure-shape properties: rate versus displacement is unimodal over its
/// positive range; the maximum tolerable noise is nonincreasing and
/// near-linear in the signal variance; more squeezing reaches farther.
#[test]
fn criterion_8_figure_shape_properties() {
    // (a) positive-rate region of rate(sigma) is contiguous with one peak
    let mut unimodal_ok = true;
    for (dir, eta) in [(Direction::Dr, 0.6), (Direction::Rr, 0.1)] {
        for beta in [0.9, 0.95] {
            for v in [0.1, 0.5, 1.0] {
                let mut rates = Vec::with_capacity(200);
                for i in 0..200 {
                    let s =
                        (1e-4_f64.ln() + (100.0_f64.ln() - 1e-4_f64.ln()) * i as f64 / 199.0).exp();
                    let cfg = ProtocolConfig::homodyne(
                        Preparation::new(v, s, s).unwrap(),
                        Channel::new(eta, 0.0).unwrap(),
                        beta,
                        dir,
                    )
                    .unwrap();
                    rates.push(key_rate(&cfg).unwrap().rate);
                }
                let pos: Vec<usize> = (0..200).filter(|&i| rates[i] > 0.0).collect();
                if pos.is_empty() {
                    unimodal_ok = false;
                    continue;
                }
                let contiguous = pos[pos.len() - 1] - pos[0] + 1 == pos.len();
                let seg: Vec<f64> = pos.iter().map(|&i| rates[i]).collect();
                let peak = seg
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap()
                    .0;
                let rising = seg[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12);
                let falling = seg[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
                unimodal_ok &= contiguous && rising && falling;
            }
        }
    }
    println!(
        "{} criterion 8a: rate vs sigma unimodal on tested grids",
        status(unimodal_ok)
    );

    // (b) eps_max nonincreasing in V with a near-linear trend (RR, eta = 0.1)
    let vs: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
    let eps: Vec<f64> = vs
        .par_iter()
        .map(|&v| {
            max_tolerable_noise(v, 0.1, 0.6, Direction::Rr, OptimizationMode::Symmetric)
                .unwrap()
                .epsilon_max
        })
        .collect();
    let monotone = eps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    // least-squares line over V in [0.1, 0.9]
    let n = vs.len() as f64;
    let (sx, sy): (f64, f64) = (vs.iter().sum(), eps.iter().sum());
    let sxx: f64 = vs.iter().map(|x| x * x).sum();
    let sxy: f64 = vs.iter().zip(&eps).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let range =
        eps.iter().cloned().fold(f64::MIN, f64::max) - eps.iter().cloned().fold(f64::MAX, f64::min);
    let max_resid = vs
        .iter()
        .zip(&eps)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    let linear_ok = monotone && max_resid < 0.15 * range;
    println!(
        "{} criterion 8b: eps_max nonincreasing in V, max residual {:.1}% of range",
        status(linear_ok),
        100.0 * max_resid / range
    );

    // (c) maximum distance ordering V=0.1 > V=0.5 > V=1 at beta=0.95, eps=0.1
    let last_positive = |v: f64| -> f64 {
        let mut last = -1.0;
        let mut d = 0.0;
        while d <= 300.0 {
            let eta = cvqkd::distance_to_transmittance(d).unwrap();
            let opt = optimize_displacement(
                v,
                &Channel::new(eta, 0.1).unwrap(),
                0.95,
                Direction::Rr,
                OptimizationMode::Symmetric,
            )
            .unwrap();
            if opt.rate > 0.0 {
                last = d;
            } else {
                break;
            }
            d += 2.0;
        }
        last
    };
    let dists: Vec<f64> = [0.1, 0.5, 1.0]
        .par_iter()
        .map(|&v| last_positive(v))
        .collect();
    let ordering_ok = dists[0] > dists[1] && dists[1] > dists[2] && dists[2] > 0.0;
    println!(
        "{} criterion 8c: max distance km (V=0.1, 0.5, 1) = ({}, {}, {})",
        status(ordering_ok),
        dists[0],
        dists[1],
        dists[2]
    );

    assert!(unimodal_ok);
    assert!(linear_ok);
    assert!(ordering_ok);
}

/// Small-transmittance mutual-information asymptotic:
/// `I ln4 / (sigma_x eta) -> 1`, within 1% at eta = 1e-3.
#[test]
fn criterion_9_small_eta_asymptotic() {
    let mut ok = true;
    for sx in [0.5, 1.0, 2.0] {
        for v in [0.2, 1.0] {
            let cfg = rr_config(v, sx, sx, 1e-3, 0.0, 1.0);
            let i = mutual_information(&cfg).unwrap();
            let ratio = i * 4.0_f64.ln() / (sx * 1e-3);
            let pass = (0.99..=1.01).contains(&ratio);
            ok &= pass;
            if !pass {
                println!("FAIL criterion 9 at sigma_x={sx}, V={v}: ratio {ratio:.5}");
            }
        }
    }
    println!(
        "{} criterion 9: small-eta mutual-information asymptotic",
        status(ok)
    );
    assert!(ok);
}
