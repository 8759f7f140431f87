//! Command-line front end: flags and config files resolve to a [`RunConfig`],
//! which [`report::build_report`] turns into a JSON report.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{ConfigError, ConfigFile, Format, Input, Preset, RunConfig, Scenario};

use crate::recycler::TimeoutPolicy;
use config::Axis;

/// JSON Schema for reports.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ionmzi",
    version,
    about = "Heralded ion-ion entanglement in a single-photon interferometer"
)]
pub struct Cli {
    /// Scenario to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Scenario>,
    /// JSON config file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// |a|^2 for ion L.
    #[arg(long, allow_negative_numbers = true)]
    pub a2: Option<f64>,
    /// |b|^2 for ion L.
    #[arg(long, allow_negative_numbers = true)]
    pub b2: Option<f64>,
    /// |alpha|^2 for ion U (defaults to a2).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha2: Option<f64>,
    /// |beta|^2 for ion U.
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phase_alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phase_beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phase_a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phase_b: Option<f64>,
    /// Weight of psi+ in the mixed input.
    #[arg(long, allow_negative_numbers = true)]
    pub fidelity: Option<f64>,

    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_passes: Option<u32>,
    #[arg(long, value_enum)]
    pub timeout: Option<TimeoutArg>,

    /// Scenario evaluated at each sweep point.
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<u32>,

    #[arg(long, allow_negative_numbers = true)]
    pub p_cav: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xi: Option<f64>,
    /// Input photons per second.
    #[arg(long, allow_negative_numbers = true)]
    pub photon_rate: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub finesse: Option<f64>,
    /// Cavity length in m.
    #[arg(long, allow_negative_numbers = true)]
    pub length: Option<f64>,
    /// Wavelength in m.
    #[arg(long, allow_negative_numbers = true)]
    pub wavelength: Option<f64>,
    /// Dipole matrix element in C m.
    #[arg(long, allow_negative_numbers = true)]
    pub dipole: Option<f64>,
    /// Non-cavity loss rate in 1/s.
    #[arg(long, allow_negative_numbers = true)]
    pub loss_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum TimeoutArg {
    Stop,
    Reinject,
}

impl From<TimeoutArg> for TimeoutPolicy {
    fn from(t: TimeoutArg) -> Self {
        match t {
            TimeoutArg::Stop => TimeoutPolicy::Stop,
            TimeoutArg::Reinject => TimeoutPolicy::Reinject,
        }
    }
}

impl Cli {
    fn flags(&self) -> ConfigFile {
        ConfigFile {
            scenario: self.command,
            preset: self.preset,
            format: self.format,
            a2: self.a2,
            b2: self.b2,
            alpha2: self.alpha2,
            beta2: self.beta2,
            phase_alpha: self.phase_alpha,
            phase_beta: self.phase_beta,
            phase_a: self.phase_a,
            phase_b: self.phase_b,
            fidelity: self.fidelity,
            trials: self.trials,
            seed: self.seed,
            max_passes: self.max_passes,
            timeout: self.timeout.map(Into::into),
            sweep_scenario: self.scenario,
            axis: self.axis,
            from: self.from,
            to: self.to,
            points: self.points,
            p_cav: self.p_cav,
            eta: self.eta,
            xi: self.xi,
            photon_rate: self.photon_rate,
            finesse: self.finesse,
            length: self.length,
            wavelength: self.wavelength,
            dipole: self.dipole,
            loss_rate: self.loss_rate,
        }
    }

    /// Merges the config file (if any) under the flags and validates.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        RunConfig::from_file(&base.overlay(&self.flags()))
    }
}

/// Runs the tool and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match report::build_report(&cfg) {
        Ok(r) => {
            let _ = out.write_all(report::render(&cfg, &r).as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_NUMERIC
        }
    }
}
