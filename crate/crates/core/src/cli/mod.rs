//! Command-line front end.
//!
//! Every command resolves its inputs from defaults, the `SPINRAD_REL_TOL`
//! environment variable, an optional `--config` file and flags, in that
//! order of increasing precedence. Output is CSV headed by a comment block
//! with the fully resolved configuration; `spinrad replay <file>` re-runs
//! from that block and reproduces the file byte for byte.
//!
//! Errors go to standard error as `error[<code>]: <message>`. Exit codes:
//! 0 success, 1 I/O failure, 2 usage, configuration or domain error,
//! 3 numerical failure.

mod commands;
pub mod config;
pub mod units;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::Error;
use config::{Origin, RawConfig, REL_TOL_ENV};

pub use commands::render;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Config(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) | CliError::Lib(Error::Config(_)) => "config",
            CliError::Io(_) => "io",
            CliError::Lib(Error::Domain(_)) => "domain",
            CliError::Lib(Error::Degenerate(_)) => "degenerate",
            CliError::Lib(Error::Numerical { .. }) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Lib(Error::Numerical { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Lib(Error::Domain(m) | Error::Config(m) | Error::Degenerate(m)) => f.write_str(m),
            CliError::Lib(Error::Numerical { message, best_estimate }) => {
                write!(f, "{message} (best estimate {best_estimate:e})")
            }
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(
    name = "spinrad",
    version,
    about = "Radiation, friction torque and heating of a particle spinning near a dielectric plate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plate kernels ψ_e and ψ_m over a grid of n and x = ωz₀/c.
    Psi(Flags),
    /// Intensity, torque and heating rate for one configuration.
    Rates(Flags),
    /// Equilibrium particle temperature and the intensity radiated there.
    Equilibrium(Flags),
    /// Normalized intensity I/I₀ and T₁/T₂ against Ω/θ₂.
    Curve(Flags),
    /// Intensity factor I₀ over lists of n and T₂.
    Table(Flags),
    /// Spin-down and heating trajectory.
    Dynamics(Flags),
    /// Rates over a grid of one configuration value.
    Sweep(Flags),
    /// Re-runs the command recorded in the header of an output file.
    Replay(ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Psi(_) => "psi",
            Command::Rates(_) => "rates",
            Command::Equilibrium(_) => "equilibrium",
            Command::Curve(_) => "curve",
            Command::Table(_) => "table",
            Command::Dynamics(_) => "dynamics",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        }
    }
}

/// Configuration flags shared by all commands. A command rejects flags it
/// does not use. Lengths need a unit (nm, um, cm); temperatures are in K
/// and frequencies in s^-1 unless suffixed.
#[derive(Debug, Clone, Default, clap::Args)]
struct Flags {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Material preset (SiO2, graphite) or a custom name with --slope-e or --sigma.
    #[arg(long)]
    material: Option<String>,
    /// Particle radius.
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<String>,
    /// Electric polarizability slope A_e in s.
    #[arg(long, allow_hyphen_values = true)]
    slope_e: Option<String>,
    /// Magnetic polarizability slope A_m in s.
    #[arg(long, allow_hyphen_values = true)]
    slope_m: Option<String>,
    /// Static conductivity σ₀ in s^-1 (Drude slope 3/4πσ₀).
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    /// Plate refractive index; `start:stop:count` for psi.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Dimensionless distance ωz₀/c; `start:stop:count` allowed.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Grid spacing for ranges: linear or log.
    #[arg(long)]
    spacing: Option<String>,
    /// Particle–plate distance.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    /// Angular velocity Ω.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Particle temperature.
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    /// Plate and background temperature.
    #[arg(long, allow_hyphen_values = true)]
    t2: Option<String>,
    /// Relative tolerance of kernel quadratures.
    #[arg(long, allow_hyphen_values = true)]
    rel_tol: Option<String>,
    /// Curve mode: equilibrium or fixed (T₁ = T₂).
    #[arg(long)]
    mode: Option<String>,
    /// Number of curve points.
    #[arg(long)]
    points: Option<String>,
    /// Smallest Ω/θ₂ of a curve.
    #[arg(long, allow_hyphen_values = true)]
    ratio_min: Option<String>,
    /// Largest Ω/θ₂ of a curve.
    #[arg(long, allow_hyphen_values = true)]
    ratio_max: Option<String>,
    /// Comma-separated refractive indices for table.
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated plate temperatures for table.
    #[arg(long)]
    t2_list: Option<String>,
    /// End time of a trajectory in s.
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    /// Output interval of a trajectory in s.
    #[arg(long, allow_hyphen_values = true)]
    stride: Option<String>,
    /// Local relative error per integration step.
    #[arg(long, allow_hyphen_values = true)]
    step_tol: Option<String>,
    /// Moment of inertia in g·cm².
    #[arg(long, allow_hyphen_values = true)]
    moment_of_inertia: Option<String>,
    /// Heat capacity in erg/K.
    #[arg(long, allow_hyphen_values = true)]
    heat_capacity: Option<String>,
    /// Integrate outside the small-distance regime (exploratory).
    #[arg(long)]
    experimental_large_x: bool,
    /// Swept value: radius, n, z0, omega, t1 or t2.
    #[arg(long)]
    axis: Option<String>,
    /// Sweep grid `start:stop:count` in the units of the axis.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
}

impl Flags {
    fn to_raw(&self) -> RawConfig {
        let mut raw = RawConfig::default();
        let fields: [(&str, &Option<String>); 26] = [
            ("material", &self.material),
            ("radius", &self.radius),
            ("slope_e", &self.slope_e),
            ("slope_m", &self.slope_m),
            ("sigma", &self.sigma),
            ("n", &self.n),
            ("x", &self.x),
            ("spacing", &self.spacing),
            ("z0", &self.z0),
            ("omega", &self.omega),
            ("t1", &self.t1),
            ("t2", &self.t2),
            ("rel_tol", &self.rel_tol),
            ("mode", &self.mode),
            ("points", &self.points),
            ("ratio_min", &self.ratio_min),
            ("ratio_max", &self.ratio_max),
            ("n_list", &self.n_list),
            ("t2_list", &self.t2_list),
            ("t_end", &self.t_end),
            ("stride", &self.stride),
            ("step_tol", &self.step_tol),
            ("moment_of_inertia", &self.moment_of_inertia),
            ("heat_capacity", &self.heat_capacity),
            ("axis", &self.axis),
            ("values", &self.values),
        ];
        for (key, value) in fields {
            if let Some(v) = value {
                raw.set(key, v.clone(), Origin::Flag);
            }
        }
        if self.experimental_large_x {
            raw.set("experimental_large_x", "true".into(), Origin::Flag);
        }
        raw
    }
}

#[derive(Debug, clap::Args)]
struct ReplayArgs {
    /// Output file whose header is replayed.
    file: PathBuf,
    /// Where to write the reproduced output (standard output if absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(content.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn base_config() -> RawConfig {
    let mut raw = RawConfig::default();
    if let Ok(v) = std::env::var(REL_TOL_ENV) {
        raw.set("rel_tol", v, Origin::Env);
    }
    raw
}

/// Splits an output file into its recorded command and configuration.
pub fn parse_header(text: &str, path: &str) -> Result<(String, RawConfig), CliError> {
    let mut lines = text.lines();
    let command = lines
        .next()
        .and_then(|l| l.strip_prefix("# spinrad "))
        .map(|c| c.trim().to_string())
        .ok_or_else(|| CliError::Config(format!("{path}:1: no '# spinrad <command>' header")))?;
    let mut config = String::from("\n");
    for line in lines {
        match line.strip_prefix("# ") {
            Some(rest) => {
                config.push_str(rest);
                config.push('\n');
            }
            None => break,
        }
    }
    Ok((command, RawConfig::parse(&config, path)?))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    crate::kernels::branch_self_test()?;
    let name = cli.command.name();
    match cli.command {
        Command::Replay(args) => {
            let path = args.file.display().to_string();
            let (command, raw) = parse_header(&read_file(&args.file)?, &path)?;
            let mut merged = base_config();
            merged.overlay(raw);
            emit(args.output.as_deref(), &render(&command, merged)?)
        }
        Command::Psi(flags)
        | Command::Rates(flags)
        | Command::Equilibrium(flags)
        | Command::Curve(flags)
        | Command::Table(flags)
        | Command::Dynamics(flags)
        | Command::Sweep(flags) => {
            let mut raw = base_config();
            if let Some(path) = &flags.config {
                raw.overlay(RawConfig::parse(&read_file(path)?, &path.display().to_string())?);
            }
            raw.overlay(flags.to_raw());
            emit(flags.output.as_deref(), &render(name, raw)?)
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    eprint!("{e}");
                    2
                }
                _ => {
                    let text = e.to_string();
                    eprint!("error[usage]: {}", text.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}
