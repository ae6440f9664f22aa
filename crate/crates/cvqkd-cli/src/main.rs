//! `cvqkd` command line: single key-rate evaluations, displacement
//! optimization, noise tolerances, security regions, distance curves, a
//! Monte-Carlo simulator and a numerical self-check. Scalar results are
//! emitted as JSON, sweeps as CSV (RFC 4180). All floating-point output uses
//! scientific notation with 9 significant digits; variances are in
//! shot-noise units, rates in bits per symbol.
//!
//! Exit codes: 0 success; 1 a result asserted security and the configuration
//! is not secure; 2 invalid arguments; 3 numerical failure.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cvqkd::{
    condition_on_homodyne, distance_to_transmittance, entangling_cloner_correlation,
    holevo_pure_loss_rr, holevo_rr, key_rate, max_tolerable_noise, noise_tolerance_table,
    optimize_displacement, pm_to_epr, rate_vs_distance_curve, security_region, simulate_pm,
    two_mode_alice_bob, Axis, Channel, Detection, Direction, Error as LibError, OptimizationMode,
    Preparation, ProtocolConfig, Quadrature, Spacing, SweepGrid,
};

const EXIT_NOT_SECURE: u8 = 1;
const EXIT_INVALID_ARGS: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cvqkd",
    about = "Key-rate lower bounds for Gaussian CV-QKD under collective attacks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Dr,
    Rr,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Dr => Direction::Dr,
            DirectionArg::Rr => Direction::Rr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectionArg {
    Homodyne,
    Heterodyne,
}

impl From<DetectionArg> for Detection {
    fn from(d: DetectionArg) -> Self {
        match d {
            DetectionArg::Homodyne => Detection::Homodyne,
            DetectionArg::Heterodyne => Detection::Heterodyne,
        }
    }
}

/// Channel given either as a transmittance or as a fibre length.
#[derive(Args)]
struct ChannelArgs {
    /// Channel transmittance in (0, 1]
    #[arg(long, group = "channel", required = true)]
    eta: Option<f64>,
    /// Fibre length in km (0.2 dB/km attenuation), alternative to --eta
    #[arg(long, group = "channel")]
    distance_km: Option<f64>,
    /// Channel excess noise in SNU, referred to the channel input
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

impl ChannelArgs {
    fn channel(&self) -> Result<Channel, LibError> {
        let eta = match (self.eta, self.distance_km) {
            (Some(e), None) => e,
            (None, Some(d)) => distance_to_transmittance(d)?,
            // clap's argument group guarantees exactly one
            _ => unreachable!("--eta and --distance-km are mutually exclusive"),
        };
        Channel::new(eta, self.epsilon)
    }
}

/// Displacement variances: `--sigma` sets both quadratures, the per-
/// quadrature flags override it.
#[derive(Args)]
struct SigmaArgs {
    /// Displacement variance applied to both quadratures (SNU)
    #[arg(long)]
    sigma: Option<f64>,
    /// x-quadrature displacement variance, overrides --sigma
    #[arg(long)]
    sigma_x: Option<f64>,
    /// p-quadrature displacement variance, overrides --sigma
    #[arg(long)]
    sigma_p: Option<f64>,
}

impl SigmaArgs {
    fn resolve(&self) -> Result<(f64, f64), String> {
        let sx = self.sigma_x.or(self.sigma);
        let sp = self.sigma_p.or(self.sigma);
        match (sx, sp) {
            (Some(x), Some(p)) => Ok((x, p)),
            _ => {
                Err("missing displacement: provide --sigma or both --sigma-x and --sigma-p".into())
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Key-rate lower bound for one configuration (JSON)
    Keyrate {
        /// Squeezed variance of the signal state (SNU, 1 = coherent)
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Reconciliation efficiency in [0, 1]
        #[arg(long)]
        beta: f64,
        /// Reconciliation direction
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Detection scheme (the key rate itself requires homodyne)
        #[arg(long, value_enum, default_value = "homodyne")]
        detection: DetectionArg,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Displacement variance maximizing the key rate (JSON)
    Optimize {
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Optimize sigma_x and sigma_p separately instead of one shared sigma
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Maximum tolerable channel excess noise (JSON)
    NoiseMax {
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Noise-tolerance table: beta in {0.2,0.4,0.6,0.8} x V in {1, 0.5},
    /// eta = 0.1, reverse reconciliation (CSV)
    Table1 {
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Key-rate sign over a (V, sigma) grid with the security boundary (CSV)
    Region {
        #[arg(long)]
        v_min: f64,
        #[arg(long)]
        v_max: f64,
        #[arg(long, default_value_t = 21)]
        v_steps: usize,
        /// Space the V axis logarithmically
        #[arg(long)]
        v_log: bool,
        #[arg(long)]
        sigma_min: f64,
        #[arg(long)]
        sigma_max: f64,
        #[arg(long, default_value_t = 21)]
        sigma_steps: usize,
        /// Space the sigma axis logarithmically
        #[arg(long)]
        sigma_log: bool,
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Grid CSV destination (stdout when omitted)
        #[arg(long)]
        output: Option<std::path::PathBuf>,
        /// Boundary CSV destination (appended to stdout when omitted)
        #[arg(long)]
        boundary_output: Option<std::path::PathBuf>,
    },
    /// Optimized key rate versus fibre length (CSV)
    Curve {
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Largest distance in km
        #[arg(long)]
        d_max: f64,
        /// Distance step in km
        #[arg(long, default_value_t = 1.0)]
        d_step: f64,
        #[arg(long)]
        independent: bool,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Monte-Carlo moments of the prepare-and-measure scheme (JSON)
    Simulate {
        #[arg(long)]
        v: f64,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Number of samples
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Seed for the deterministic generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Runs the built-in numerical consistency checks
    Selfcheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match build_pool() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INVALID_ARGS);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

/// `CVQKD_THREADS` caps sweep parallelism; 0 or unset picks the default.
fn build_pool() -> Result<rayon::ThreadPool, String> {
    let threads = match std::env::var("CVQKD_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("CVQKD_THREADS must be a nonnegative integer, got {s:?}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())
}

fn classify(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<LibError>() {
        Some(LibError::Domain(_))
        | Some(LibError::Shape(_))
        | Some(LibError::MethodMisuse(_))
        | Some(LibError::UnsupportedConfig(_)) => EXIT_INVALID_ARGS,
        Some(_) => EXIT_NUMERICAL,
        None => EXIT_NUMERICAL,
    }
}

fn fmt9(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.8e}")
}

fn write_out(path: Option<&std::path::Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(path: Option<&std::path::Path>, value: &T) -> anyhow::Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_out(path, &s)
}

fn mode_of(independent: bool) -> OptimizationMode {
    if independent {
        OptimizationMode::Independent
    } else {
        OptimizationMode::Symmetric
    }
}

fn run(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Keyrate {
            v,
            sigma,
            channel,
            beta,
            direction,
            detection,
            output,
        } => {
            let (sx, sp) = sigma.resolve().map_err(invalid_args)?;
            let prep = Preparation::new(v, sx, sp)?;
            let ch = channel.channel()?;
            let cfg = ProtocolConfig::new(prep, ch, beta, direction.into(), detection.into())?;
            let report = key_rate(&cfg)?;
            emit_json(
                output.as_deref(),
                &json!({ "config": cfg, "report": report }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize {
            v,
            channel,
            beta,
            direction,
            independent,
            output,
        } => {
            let ch = channel.channel()?;
            let opt = optimize_displacement(v, &ch, beta, direction.into(), mode_of(independent))?;
            emit_json(output.as_deref(), &opt)?;
            Ok(if opt.secure {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_SECURE)
            })
        }
        Command::NoiseMax {
            v,
            channel,
            beta,
            direction,
            independent,
            output,
        } => {
            let ch = channel.channel()?;
            let res =
                max_tolerable_noise(v, ch.eta(), beta, direction.into(), mode_of(independent))?;
            emit_json(output.as_deref(), &res)?;
            Ok(if res.secure {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_SECURE)
            })
        }
        Command::Table1 { output } => {
            let betas = [0.2, 0.4, 0.6, 0.8];
            let vs = [1.0, 0.5];
            let cells = noise_tolerance_table(
                &betas,
                &vs,
                0.1,
                Direction::Rr,
                OptimizationMode::Symmetric,
            )?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["beta", "epsilon_max_v1_snu", "epsilon_max_v05_snu"])?;
            for (i, &beta) in betas.iter().enumerate() {
                w.write_record([
                    fmt9(beta),
                    fmt9(cells[2 * i].epsilon_max),
                    fmt9(cells[2 * i + 1].epsilon_max),
                ])?;
            }
            write_out(output.as_deref(), &String::from_utf8(w.into_inner()?)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Region {
            v_min,
            v_max,
            v_steps,
            v_log,
            sigma_min,
            sigma_max,
            sigma_steps,
            sigma_log,
            channel,
            beta,
            direction,
            output,
            boundary_output,
        } => {
            let ch = channel.channel()?;
            let grid = SweepGrid {
                v_axis: Axis::new(v_min, v_max, v_steps, spacing_of(v_log))?,
                sigma_axis: Axis::new(sigma_min, sigma_max, sigma_steps, spacing_of(sigma_log))?,
                eta: ch.eta(),
                epsilon: ch.epsilon(),
                beta,
                direction: direction.into(),
            };
            let region = security_region(&grid)?;

            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["v_snu", "sigma_snu", "secure"])?;
            for (i, &v) in region.v_values.iter().enumerate() {
                for (j, &s) in region.sigma_values.iter().enumerate() {
                    w.write_record([fmt9(v), fmt9(s), (region.secure[i][j] as u8).to_string()])?;
                }
            }
            let grid_csv = String::from_utf8(w.into_inner()?)?;

            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["v_snu", "sigma_boundary_snu"])?;
            for p in &region.boundary {
                w.write_record([fmt9(p.v), fmt9(p.sigma)])?;
            }
            let boundary_csv = String::from_utf8(w.into_inner()?)?;

            match (output.as_deref(), boundary_output.as_deref()) {
                (out, Some(bp)) => {
                    write_out(out, &grid_csv)?;
                    std::fs::write(bp, boundary_csv)?;
                }
                (Some(op), None) => {
                    std::fs::write(op, grid_csv)?;
                    print!("{boundary_csv}");
                }
                (None, None) => {
                    print!("{grid_csv}\n{boundary_csv}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve {
            v,
            epsilon,
            beta,
            direction,
            d_max,
            d_step,
            independent,
            output,
        } => {
            if d_max < 0.0 || d_step <= 0.0 {
                return Err(invalid_args("--d-max must be >= 0 and --d-step > 0".into()).into());
            }
            let mut distances = Vec::new();
            let mut d = 0.0;
            while d <= d_max + 1e-9 {
                distances.push(d);
                d += d_step;
            }
            let curve = rate_vs_distance_curve(
                v,
                epsilon,
                beta,
                direction.into(),
                &distances,
                mode_of(independent),
            )?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "distance_km",
                "eta",
                "sigma_opt_snu",
                "rate_bits_per_symbol",
            ])?;
            for p in &curve {
                w.write_record([
                    fmt9(p.distance_km),
                    fmt9(p.eta),
                    fmt9(p.sigma_opt_x),
                    fmt9(p.rate),
                ])?;
            }
            write_out(output.as_deref(), &String::from_utf8(w.into_inner()?)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            v,
            sigma,
            channel,
            n,
            seed,
            output,
        } => {
            let (sx, sp) = sigma.resolve().map_err(invalid_args)?;
            let prep = Preparation::new(v, sx, sp)?;
            let ch = channel.channel()?;
            let stats = simulate_pm(&prep, &ch, n, seed)?;
            emit_json(
                output.as_deref(),
                &json!({ "prep": prep, "channel": ch, "seed": seed, "stats": stats }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selfcheck => selfcheck(),
    }
}

fn spacing_of(log: bool) -> Spacing {
    if log {
        Spacing::Log
    } else {
        Spacing::Linear
    }
}

fn invalid_args(msg: String) -> LibError {
    LibError::Domain(msg)
}

/// Cross-route and decoupling consistency checks over fixed grids.
fn selfcheck() -> anyhow::Result<ExitCode> {
    let mut ok = true;

    // purification route vs analytic pure-loss route
    let mut worst = 0.0f64;
    for v in [0.1, 0.5, 1.0] {
        for s in [0.1, 1.0, 5.0] {
            for eta in [0.1, 0.5, 0.9] {
                let cfg = ProtocolConfig::homodyne(
                    Preparation::new(v, s, s)?,
                    Channel::new(eta, 0.0)?,
                    1.0,
                    Direction::Rr,
                )?;
                worst = worst.max((holevo_rr(&cfg)? - holevo_pure_loss_rr(&cfg)?).abs());
            }
        }
    }
    report(
        &mut ok,
        "holevo cross-route agreement (27 points)",
        worst,
        1e-9,
    );

    // Holevo decoupling at sigma_x = 1 - V over a lossy channel
    let mut worst = 0.0f64;
    for v in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for eta in [0.1, 0.5, 0.9] {
            let cfg = ProtocolConfig::homodyne(
                Preparation::new(v, 1.0 - v, 1.0 - v)?,
                Channel::new(eta, 0.0)?,
                1.0,
                Direction::Rr,
            )?;
            worst = worst.max(holevo_rr(&cfg)?.abs());
        }
    }
    report(
        &mut ok,
        "decoupling identity (sigma_x = 1 - V)",
        worst,
        1e-8,
    );

    // generic conditioning vs the closed-form conditional matrix
    let mut worst = 0.0f64;
    for v in [0.1, 0.5, 1.0] {
        for s in [0.1, 1.0, 5.0] {
            for eta in [0.1, 0.5, 0.9] {
                let src = pm_to_epr(&Preparation::new(v, s, s)?)?;
                let ch = Channel::new(eta, 0.05)?;
                let generic =
                    condition_on_homodyne(&two_mode_alice_bob(&src, &ch)?, 1, Quadrature::X)?;
                let closed = cvqkd::protocol::conditional_alice_after_bob_x(&src, &ch)?;
                worst = worst.max((generic.matrix() - closed.matrix()).abs().max());
            }
        }
    }
    report(&mut ok, "closed-form conditional matrix", worst, 1e-12);

    // cloner-correlation diagnostic vanishes at the decoupling point
    let corr =
        entangling_cloner_correlation(&Preparation::new(0.5, 0.5, 0.5)?, &Channel::new(0.3, 0.0)?);
    report(
        &mut ok,
        "cloner correlation at decoupling",
        corr.abs(),
        1e-12,
    );

    if ok {
        println!("selfcheck: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("selfcheck: FAILED");
        Ok(ExitCode::from(EXIT_NUMERICAL))
    }
}

fn report(ok: &mut bool, name: &str, worst: f64, tol: f64) {
    let pass = worst <= tol;
    *ok &= pass;
    println!(
        "{} {name}: worst {} (tolerance {})",
        if pass { "PASS" } else { "FAIL" },
        fmt9(worst),
        fmt9(tol)
    );
}
