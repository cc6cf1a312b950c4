use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kronmac::experiment::{evaluate_system, run_experiment, write_csv, Precoding, Tolerances};
use kronmac::monte_carlo::ergodic_estimate;
use kronmac::selftest::run_selftest;
use kronmac::{
    scenario_two_user, shannon_de, shannon_integral_check, solve_fixed_point, ArrayGeometry, CorrelationMatrix,
    Error, PrecoderSet, Side, SystemConfig, UserLink, UserSubset,
};
use num_complex::Complex64;

#[derive(Parser)]
#[command(version, about = "Deterministic equivalents for correlated MIMO multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file
    Run { config: PathBuf },
    /// Solve the fixed-point equations at z
    FixedPoint {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        z_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        z_im: f64,
    },
    /// Shannon-transform equivalent and its integral cross-check
    Shannon {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 1e6)]
        upper: f64,
    },
    /// Iterative water-filling for a user subset
    Waterfill {
        #[command(flatten)]
        system: SystemArgs,
        /// One-based user indices, e.g. 1,2 (default: all users)
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
    },
    /// All subset sum-rate constraints as CSV on stdout
    RateRegion {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value_t = PrecodingArg::Uniform)]
        precoding: PrecodingArg,
    },
    /// Monte Carlo estimate against the deterministic equivalent
    Montecarlo {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form and oracle checks
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    /// One user, R = T = I
    Mp,
    TwoUserLinear,
    TwoUserCubic,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecodingArg {
    Uniform,
    Optimal,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::Mp)]
    scenario: ScenarioArg,
    /// Antennas per array
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Antenna spacing in wavelengths
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
}

impl SystemArgs {
    fn build(&self) -> kronmac::Result<SystemConfig> {
        let cfg = match self.scenario {
            ScenarioArg::Mp => {
                let link = UserLink::new(
                    CorrelationMatrix::identity(self.n, Side::Receive),
                    CorrelationMatrix::identity(self.n, Side::Transmit),
                    1.0,
                )?;
                SystemConfig::new(vec![link], 1.0)?
            }
            ScenarioArg::TwoUserLinear => scenario_two_user(ArrayGeometry::Linear, self.n, self.spacing, 1.0)?,
            ScenarioArg::TwoUserCubic => scenario_two_user(ArrayGeometry::Cubic, self.n, self.spacing, 1.0)?,
        };
        cfg.with_snr_db(self.snr_db)
    }
}

fn subset(cfg: &SystemConfig, one_based: &[usize]) -> kronmac::Result<UserSubset> {
    if one_based.is_empty() {
        return Ok(cfg.all_users());
    }
    let members: Vec<usize> = one_based.iter().map(|&k| k.wrapping_sub(1)).collect();
    let s = UserSubset::from_members(&members)?;
    cfg.check_subset(s)?;
    Ok(s)
}

fn library_exit(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

type Outcome = Result<u8, (u8, String)>;

fn lib<T>(r: kronmac::Result<T>) -> Result<T, (u8, String)> {
    r.map_err(|e| (library_exit(&e), e.to_string()))
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Run { config } => {
            let summary = run_experiment(&config).map_err(|e| (e.exit_code() as u8, e.to_string()))?;
            println!(
                "wrote {} rows to {} (metadata {})",
                summary.rows.len(),
                summary.csv_path.display(),
                summary.sidecar_path.display()
            );
        }
        Command::FixedPoint { system, z_re, z_im } => {
            let cfg = lib(system.build())?;
            let sol = lib(solve_fixed_point(&cfg, Complex64::new(z_re, z_im), None))?;
            for (k, (e, d)) in sol.e.iter().zip(&sol.delta).enumerate() {
                println!("user {}: e = {:.12} {:+.12}i, delta = {:.12} {:+.12}i", k + 1, e.re, e.im, d.re, d.im);
            }
            println!("iterations = {}, residual = {:.3e}", sol.iterations, sol.residual);
        }
        Command::Shannon { system, upper } => {
            let cfg = lib(system.build())?;
            let closed = lib(shannon_de(&cfg, cfg.sigma2(), None))?;
            let integral = lib(shannon_integral_check(&cfg, cfg.sigma2(), upper))?;
            println!("closed form = {:.12} nats", closed.value);
            println!("integral    = {:.12} nats", integral);
            println!("gap         = {:.3e}", (closed.value - integral).abs());
        }
        Command::Waterfill { system, subset: members } => {
            let cfg = lib(system.build())?;
            let s = lib(subset(&cfg, &members))?;
            let r = lib(kronmac::iterative_waterfill(&cfg, s))?;
            for (i, k) in s.members().enumerate() {
                let powers: Vec<String> = r.powers[i].iter().map(|p| format!("{p:.6}")).collect();
                println!("user {}: mu = {:.6}, powers = [{}]", k + 1, r.water_levels[i], powers.join(", "));
            }
            println!(
                "objective = {:.10} nats, KKT residual = {:.3e}, outer iterations = {}",
                r.objective, r.kkt_residual, r.outer_iterations
            );
            if !r.converged {
                return Err((3, "water-filling did not converge; best iterate shown".into()));
            }
        }
        Command::RateRegion { system, precoding } => {
            let cfg = lib(system.build())?;
            let p = match precoding {
                PrecodingArg::Uniform => Precoding::Uniform,
                PrecodingArg::Optimal => Precoding::Optimal,
            };
            let label = system.scenario.to_possible_value().expect("named variant").get_name().to_owned();
            let rows = evaluate_system(&cfg, &label, p, &Tolerances::default(), None)
                .map_err(|e| (e.exit_code() as u8, e.to_string()))?;
            write_csv(std::io::stdout().lock(), &rows, false).map_err(|e| (2, e.to_string()))?;
        }
        Command::Montecarlo {
            system,
            subset: members,
            trials,
            seed,
        } => {
            let cfg = lib(system.build())?;
            let s = lib(subset(&cfg, &members))?;
            let r = lib(ergodic_estimate(&cfg, Some(&PrecoderSet::uniform(&cfg)), s, trials, seed))?;
            println!("trials       = {}", r.trials);
            println!("mean         = {:.8} nats", r.mean);
            println!("std error    = {:.3e}", r.std_error);
            println!("det. equiv.  = {:.8} nats", r.det_equiv);
            println!("rel. gap     = {:.3e}", r.rel_gap);
        }
        Command::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err((1, "selftest failed".into()));
            }
        }
    }
    Ok(0)
}
