use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::efficiency::{published, CavityModel, CavityParams, EfficiencyParams};
use crate::protocol::{rho_ul, IonPairState};
use crate::recycler::{RecycleConfig, TimeoutPolicy};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[value(name = "single-pass", alias = "single_pass")]
    SinglePass,
    Iterate,
    Mixed,
    #[value(name = "monte-carlo", alias = "monte_carlo")]
    MonteCarlo,
    Throughput,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::SinglePass => "single_pass",
            Scenario::Iterate => "iterate",
            Scenario::Mixed => "mixed",
            Scenario::MonteCarlo => "monte_carlo",
            Scenario::Throughput => "throughput",
            Scenario::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Mixed input with F = 0.7 at the published cavity operating point.
    PaperMixed,
    /// Product input with |a|^2 = 0.7 at the published cavity operating point.
    PaperProduct,
    /// Published cavity constants only.
    PaperCavity,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::PaperMixed => "paper-mixed",
            Preset::PaperProduct => "paper-product",
            Preset::PaperCavity => "paper-cavity",
        }
    }

    /// Provenance string carried into reports.
    pub fn source(self) -> &'static str {
        match self {
            Preset::PaperMixed => {
                "published operating point, mixed-state input: F=0.7, p_cav=0.01, eta=0.7, \
                 5000 photons/s; claimed yield: eight pairs per second"
            }
            Preset::PaperProduct => {
                "published operating point, product input: |a|^2=0.7, p_cav=0.01, eta=0.7, \
                 5000 photons/s; claimed yield: five pairs per second"
            }
            Preset::PaperCavity => {
                "published cavity constants: finesse 19000, length 3 mm, quoted decay rate \
                 9.9e6/s, p_cav=0.01"
            }
        }
    }

    pub fn claimed_pairs_per_second(self) -> Option<f64> {
        match self {
            Preset::PaperMixed => Some(published::CLAIMED_MIXED_PAIRS),
            Preset::PaperProduct => Some(published::CLAIMED_PRODUCT_PAIRS),
            Preset::PaperCavity => None,
        }
    }

    /// Fills keys left unset in `cfg`.
    fn apply(self, cfg: &mut ConfigFile) {
        fn fill(slot: &mut Option<f64>, v: f64) {
            slot.get_or_insert(v);
        }
        match self {
            Preset::PaperMixed => {
                if !cfg.has_product_keys() {
                    fill(&mut cfg.fidelity, published::MIXED_FIDELITY);
                }
            }
            Preset::PaperProduct => {
                if cfg.fidelity.is_none() && cfg.a2.is_none() && cfg.b2.is_none() {
                    cfg.a2 = Some(published::PRODUCT_A2);
                }
            }
            Preset::PaperCavity => {}
        }
        fill(&mut cfg.finesse, published::FINESSE);
        fill(&mut cfg.length, published::CAVITY_LENGTH);
        let physical = cfg.wavelength.is_some() && cfg.dipole.is_some() && cfg.loss_rate.is_some();
        if !physical {
            fill(&mut cfg.p_cav, published::P_CAV);
        }
        fill(&mut cfg.eta, published::DETECTOR_EFFICIENCY);
        fill(&mut cfg.xi, published::OUT_COUPLING);
        fill(&mut cfg.photon_rate, published::PHOTON_RATE);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    A2,
    Alpha2,
    Fidelity,
    Eta,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::A2 => "a2",
            Axis::Alpha2 => "alpha2",
            Axis::Fidelity => "fidelity",
            Axis::Eta => "eta",
        }
    }
}

/// Every key accepted in a config file. Command-line flags map onto the
/// same keys and take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_passes: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout: Option<TimeoutPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_cav: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dipole: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_rate: Option<f64>,
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::new("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde names the offending field in backticks
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_owned)
                .unwrap_or_else(|| "config".to_owned());
            ConfigError::new(key, msg)
        })
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ConfigFile) -> Self {
        overlay_fields!(self, top; scenario, preset, format, a2, b2, alpha2, beta2,
            phase_alpha, phase_beta, phase_a, phase_b, fidelity, trials, seed, max_passes,
            timeout, sweep_scenario, axis, from, to, points, p_cav, eta, xi, photon_rate,
            finesse, length, wavelength, dipole, loss_rate);
        self
    }

    fn has_product_keys(&self) -> bool {
        [
            self.a2,
            self.b2,
            self.alpha2,
            self.beta2,
            self.phase_alpha,
            self.phase_beta,
            self.phase_a,
            self.phase_b,
        ]
        .iter()
        .any(Option::is_some)
    }
}

/// Invalid configuration. `key` names the offending setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Product input entered as moduli squared and phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub alpha2: f64,
    pub a2: f64,
    pub phase_alpha: f64,
    pub phase_beta: f64,
    pub phase_a: f64,
    pub phase_b: f64,
}

impl ProductSpec {
    pub fn amplitudes(&self) -> [Complex64; 4] {
        [
            Complex64::from_polar(self.alpha2.sqrt(), self.phase_alpha),
            Complex64::from_polar((1.0 - self.alpha2).sqrt(), self.phase_beta),
            Complex64::from_polar(self.a2.sqrt(), self.phase_a),
            Complex64::from_polar((1.0 - self.a2).sqrt(), self.phase_b),
        ]
    }

    pub fn ion_pair(&self) -> crate::Result<IonPairState> {
        let [alpha, beta, a, b] = self.amplitudes();
        IonPairState::product(alpha, beta, a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Product(ProductSpec),
    Mixed { fidelity: f64 },
}

impl Input {
    /// Weighted ion states represented by this input.
    pub fn ensemble(&self) -> crate::Result<Vec<(f64, IonPairState)>> {
        match self {
            Input::Product(p) => Ok(vec![(1.0, p.ion_pair()?)]),
            Input::Mixed { fidelity } => rho_ul(*fidelity),
        }
    }

    pub fn with_axis(&self, axis: Axis, value: f64) -> Input {
        match (*self, axis) {
            (Input::Product(mut p), Axis::A2) => {
                p.a2 = value;
                Input::Product(p)
            }
            (Input::Product(mut p), Axis::Alpha2) => {
                p.alpha2 = value;
                Input::Product(p)
            }
            (Input::Mixed { .. }, Axis::Fidelity) => Input::Mixed { fidelity: value },
            (other, _) => other,
        }
    }
}

/// Throughput settings as entered; resolved to [`EfficiencyParams`] on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSpec {
    pub p_cav: Option<f64>,
    pub eta: f64,
    pub xi: f64,
    pub photon_rate: f64,
    pub finesse: Option<f64>,
    pub length: Option<f64>,
    pub wavelength: Option<f64>,
    pub dipole: Option<f64>,
    pub loss_rate: Option<f64>,
}

impl ThroughputSpec {
    pub fn params(&self) -> EfficiencyParams {
        let cavity = match self.p_cav {
            Some(p_cav) => CavityModel::OperatingPoint { p_cav },
            None => CavityModel::Physical(CavityParams {
                finesse: self.finesse.unwrap_or(f64::NAN),
                length: self.length.unwrap_or(f64::NAN),
                wavelength: self.wavelength.unwrap_or(f64::NAN),
                dipole: self.dipole.unwrap_or(f64::NAN),
                loss_rate: self.loss_rate.unwrap_or(f64::NAN),
            }),
        };
        EfficiencyParams {
            cavity,
            eta: self.eta,
            xi: self.xi,
            photon_rate: self.photon_rate,
        }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        ThroughputSpec { eta, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub points: u32,
    /// An `a2` sweep also moves `alpha2` when the latter was not set.
    pub alpha_tracks_a2: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points as usize;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub preset: Option<Preset>,
    pub format: Format,
    pub input: Option<Input>,
    pub trials: u64,
    pub seed: u64,
    pub recycle: RecycleConfig,
    pub throughput: Option<ThroughputSpec>,
    pub sweep: Option<SweepSpec>,
}

fn unit(key: &str, v: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(ConfigError::new(
            key,
            format!("{key} must lie in [0,1], got {v}"),
        ))
    }
}

fn finite(key: &str, v: Option<f64>, default: f64) -> Result<f64, ConfigError> {
    let v = v.unwrap_or(default);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("{key} must be finite")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(
            key,
            format!("{key} must be positive, got {v}"),
        ))
    }
}

/// Resolves a squared modulus given directly or through its complement.
fn modulus(
    key: &str,
    direct: Option<f64>,
    complement_key: &str,
    complement: Option<f64>,
) -> Result<Option<f64>, ConfigError> {
    match (direct, complement) {
        (Some(x), None) => unit(key, x).map(Some),
        (None, Some(y)) => unit(complement_key, y).map(|y| Some(1.0 - y)),
        (Some(x), Some(y)) => {
            let x = unit(key, x)?;
            let y = unit(complement_key, y)?;
            if (x + y - 1.0).abs() > 1e-9 {
                Err(ConfigError::new(
                    complement_key,
                    format!("{key} + {complement_key} must equal 1, got {}", x + y),
                ))
            } else {
                Ok(Some(x))
            }
        }
        (None, None) => Ok(None),
    }
}

fn resolve_input(cfg: &ConfigFile) -> Result<Option<Input>, ConfigError> {
    let product = cfg.has_product_keys();
    match (cfg.fidelity, product) {
        (Some(_), true) => Err(ConfigError::new(
            "fidelity",
            "fidelity selects the mixed input and cannot be combined with product amplitudes",
        )),
        (Some(f), false) => Ok(Some(Input::Mixed {
            fidelity: unit("fidelity", f)?,
        })),
        (None, true) => {
            let a2 = modulus("a2", cfg.a2, "b2", cfg.b2)?;
            let alpha2 = modulus("alpha2", cfg.alpha2, "beta2", cfg.beta2)?;
            let a2 = match (a2, alpha2) {
                (Some(a2), _) => a2,
                (None, Some(al)) => al,
                (None, None) => unreachable!("product keys without moduli are only phases"),
            };
            Ok(Some(Input::Product(ProductSpec {
                alpha2: alpha2.unwrap_or(a2),
                a2,
                phase_alpha: finite("phase_alpha", cfg.phase_alpha, 0.0)?,
                phase_beta: finite("phase_beta", cfg.phase_beta, 0.0)?,
                phase_a: finite("phase_a", cfg.phase_a, 0.0)?,
                phase_b: finite("phase_b", cfg.phase_b, 0.0)?,
            })))
        }
        (None, false) => Ok(None),
    }
}

fn resolve_throughput(cfg: &ConfigFile) -> Result<ThroughputSpec, ConfigError> {
    let eta = unit(
        "eta",
        cfg.eta
            .ok_or_else(|| ConfigError::new("eta", "eta is required (or use --preset)"))?,
    )?;
    let xi = unit("xi", cfg.xi.unwrap_or(1.0))?;
    let photon_rate = cfg.photon_rate.ok_or_else(|| {
        ConfigError::new("photon_rate", "photon_rate is required (or use --preset)")
    })?;
    if !(photon_rate >= 0.0 && photon_rate.is_finite()) {
        return Err(ConfigError::new(
            "photon_rate",
            "photon_rate must be non-negative",
        ));
    }
    let opt_pos = |key: &str, v: Option<f64>| v.map(|x| positive(key, x)).transpose();
    let spec = ThroughputSpec {
        p_cav: cfg.p_cav.map(|p| unit("p_cav", p)).transpose()?,
        eta,
        xi,
        photon_rate,
        finesse: opt_pos("finesse", cfg.finesse)?,
        length: opt_pos("length", cfg.length)?,
        wavelength: opt_pos("wavelength", cfg.wavelength)?,
        dipole: opt_pos("dipole", cfg.dipole)?,
        loss_rate: opt_pos("loss_rate", cfg.loss_rate)?,
    };
    if spec.p_cav.is_none() {
        for (key, v) in [
            ("finesse", spec.finesse),
            ("length", spec.length),
            ("wavelength", spec.wavelength),
            ("dipole", spec.dipole),
            ("loss_rate", spec.loss_rate),
        ] {
            if v.is_none() {
                return Err(ConfigError::new(
                    key,
                    format!("{key} is required to evaluate p_cav when p_cav is not given"),
                ));
            }
        }
    }
    Ok(spec)
}

impl RunConfig {
    /// Validates a merged set of keys.
    pub fn from_file(raw: &ConfigFile) -> Result<Self, ConfigError> {
        let mut cfg = raw.clone();
        if let Some(p) = cfg.preset {
            p.apply(&mut cfg);
        }
        let scenario = cfg
            .scenario
            .ok_or_else(|| ConfigError::new("scenario", "a scenario (subcommand) is required"))?;
        let input = resolve_input(&cfg)?;
        let sweep = if scenario == Scenario::Sweep {
            let target = cfg
                .sweep_scenario
                .ok_or_else(|| ConfigError::new("sweep_scenario", "sweep requires --scenario"))?;
            if matches!(target, Scenario::Sweep | Scenario::MonteCarlo) {
                return Err(ConfigError::new(
                    "sweep_scenario",
                    "sweep supports single_pass, iterate, mixed and throughput",
                ));
            }
            let axis = cfg
                .axis
                .ok_or_else(|| ConfigError::new("axis", "sweep requires an axis"))?;
            let points = cfg.points.unwrap_or(0);
            if points < 2 {
                return Err(ConfigError::new(
                    "points",
                    "sweep requires at least 2 points",
                ));
            }
            let from = finite("from", cfg.from, f64::NAN)?;
            let to = finite("to", cfg.to, f64::NAN)?;
            if matches!(axis, Axis::A2 | Axis::Alpha2 | Axis::Fidelity | Axis::Eta) {
                unit("from", from)?;
                unit("to", to)?;
            }
            Some(SweepSpec {
                scenario: target,
                axis,
                from,
                to,
                points,
                alpha_tracks_a2: axis == Axis::A2 && cfg.alpha2.is_none() && cfg.beta2.is_none(),
            })
        } else {
            None
        };

        let effective = sweep.map_or(scenario, |s| s.scenario);
        // the swept axis supplies the input when none was given
        let input = match (input, sweep.map(|s| s.axis)) {
            (None, Some(Axis::Fidelity)) => Some(Input::Mixed { fidelity: 0.0 }),
            (None, Some(Axis::A2 | Axis::Alpha2)) => Some(Input::Product(ProductSpec {
                alpha2: 0.0,
                a2: 0.0,
                phase_alpha: 0.0,
                phase_beta: 0.0,
                phase_a: 0.0,
                phase_b: 0.0,
            })),
            (i, _) => i,
        };
        if let Some(s) = sweep {
            let ok = match (s.axis, &input) {
                (Axis::A2 | Axis::Alpha2, Some(Input::Product(_))) => true,
                (Axis::Fidelity, Some(Input::Mixed { .. })) => true,
                (Axis::Eta, Some(_)) => s.scenario == Scenario::Throughput,
                _ => false,
            };
            if !ok {
                return Err(ConfigError::new(
                    "axis",
                    format!("axis {} does not apply to the given input", s.axis.name()),
                ));
            }
        }
        match (effective, &input) {
            (Scenario::Mixed, Some(Input::Mixed { .. })) => {}
            (Scenario::Mixed, _) => {
                return Err(ConfigError::new("fidelity", "mixed requires --fidelity"));
            }
            (Scenario::Throughput, _) => {}
            (_, None) => {
                return Err(ConfigError::new(
                    "a2",
                    "an input is required: --a2/--b2/--alpha2 for product states or --fidelity",
                ));
            }
            _ => {}
        }
        let throughput = if effective == Scenario::Throughput {
            Some(resolve_throughput(&cfg)?)
        } else {
            None
        };

        let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(ConfigError::new("trials", "trials must be at least 1"));
        }
        let max_passes = cfg
            .max_passes
            .unwrap_or(crate::recycler::DEFAULT_MAX_PASSES);
        if max_passes == 0 {
            return Err(ConfigError::new(
                "max_passes",
                "max_passes must be at least 1",
            ));
        }
        let format = cfg.format.unwrap_or(if scenario == Scenario::Sweep {
            Format::Csv
        } else {
            Format::Json
        });
        Ok(RunConfig {
            scenario,
            preset: cfg.preset,
            format,
            input,
            trials,
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
            recycle: RecycleConfig {
                max_passes,
                timeout: cfg.timeout.unwrap_or_default(),
                ..RecycleConfig::default()
            },
            throughput,
            sweep,
        })
    }

    /// The keys that reproduce this configuration when parsed again.
    pub fn to_file(&self) -> ConfigFile {
        let mut f = ConfigFile {
            scenario: Some(self.scenario),
            preset: self.preset,
            format: Some(self.format),
            trials: Some(self.trials),
            seed: Some(self.seed),
            max_passes: Some(self.recycle.max_passes),
            timeout: Some(self.recycle.timeout),
            ..ConfigFile::default()
        };
        match self.input {
            Some(Input::Product(p)) => {
                f.a2 = Some(p.a2);
                if !self.sweep.is_some_and(|s| s.alpha_tracks_a2) {
                    f.alpha2 = Some(p.alpha2);
                }
                f.phase_alpha = Some(p.phase_alpha);
                f.phase_beta = Some(p.phase_beta);
                f.phase_a = Some(p.phase_a);
                f.phase_b = Some(p.phase_b);
            }
            Some(Input::Mixed { fidelity }) => f.fidelity = Some(fidelity),
            None => {}
        }
        if let Some(t) = self.throughput {
            f.p_cav = t.p_cav;
            f.eta = Some(t.eta);
            f.xi = Some(t.xi);
            f.photon_rate = Some(t.photon_rate);
            f.finesse = t.finesse;
            f.length = t.length;
            f.wavelength = t.wavelength;
            f.dipole = t.dipole;
            f.loss_rate = t.loss_rate;
        }
        if let Some(s) = self.sweep {
            f.sweep_scenario = Some(s.scenario);
            f.axis = Some(s.axis);
            f.from = Some(s.from);
            f.to = Some(s.to);
            f.points = Some(s.points);
        }
        f
    }
}
