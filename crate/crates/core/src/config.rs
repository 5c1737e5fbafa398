//! TOML simulation configuration with defaults for the 60 kHz, 16 x 16 grid.
//!
//! ```toml
//! [grid]
//! K = 16
//! L = 16
//! bandwidth_hz = 60000.0
//! ```
//!
//! is a complete file; every other key falls back to its default. Unknown keys
//! are rejected and every error names the offending field path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::SchemeId;
use crate::channel::{ChannelProfile, ChannelStats};
use crate::detect::{Alphabet, Detector};
use crate::domain::DDGrid;
use crate::error::{Error, Result};
use crate::montecarlo::{Scenario, StopRule};
use crate::pulse::DEFAULT_HALF_WIDTH;

const DEFAULT_BANDWIDTH: f64 = 60e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub bandwidth_hz: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            k: 16,
            l: 16,
            bandwidth_hz: DEFAULT_BANDWIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub rolloff: f64,
    pub half_width_taps: usize,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            rolloff: 0.0,
            half_width_taps: DEFAULT_HALF_WIDTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    #[serde(rename = "P")]
    pub p: usize,
    pub tau_max_s: f64,
    pub nu_max_hz: f64,
    pub fractional: bool,
    /// Defaults to `1 / P`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_variance: Option<f64>,
    /// Fixed geometry; relative paths resolve against the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_file: Option<PathBuf>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            p: 4,
            tau_max_s: 8.0 / DEFAULT_BANDWIDTH,
            nu_max_hz: 937.0,
            fractional: true,
            gain_variance: None,
            profile_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub master_seed: u64,
    pub min_errors: u64,
    pub max_trials: u64,
    /// Trials between stopping checks.
    pub batch: u64,
    pub detector: String,
    pub alphabet: String,
    pub schemes: Vec<String>,
    pub snr_grid_db: Vec<f64>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            master_seed: 1,
            min_errors: 200,
            max_trials: 20_000,
            batch: crate::montecarlo::DEFAULT_BATCH,
            detector: "mmse".into(),
            alphabet: "bpsk".into(),
            schemes: SchemeId::ALL.iter().map(|s| s.name().to_string()).collect(),
            snr_grid_db: (0..=12).map(|i| 2.5 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub csv_path: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_script: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            csv_path: PathBuf::from("ber.csv"),
            plot_script: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiversitySection {
    /// Slope `s` of the precoder phase `s q / N`.
    pub pr_phase_scale: f64,
    /// Roll-off of the pulse used with fractional profiles.
    pub profile_rolloff: f64,
    pub snr_grid_db: Vec<f64>,
}

impl Default for DiversitySection {
    fn default() -> Self {
        Self {
            pr_phase_scale: 1.0,
            profile_rolloff: 0.0,
            snr_grid_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
        }
    }
}

/// Axis values and fixed parameters for the Doppler, delay and roll-off sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// SNR of the Doppler and delay sweeps.
    pub snr_db: f64,
    pub nu_max_hz: Vec<f64>,
    /// Delay spread held fixed while Doppler is swept.
    pub fixed_tau_max_s: f64,
    pub tau_max_s: Vec<f64>,
    /// Doppler spread held fixed while delay is swept.
    pub fixed_nu_max_hz: f64,
    pub rolloffs: Vec<f64>,
    pub rolloff_snr_db: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let ts = 1.0 / DEFAULT_BANDWIDTH;
        Self {
            snr_db: 20.0,
            nu_max_hz: vec![500.0, 1000.0, 1875.0, 3750.0, 5625.0, 7500.0, 9375.0, 11250.0],
            fixed_tau_max_s: 2.0 * ts,
            tau_max_s: (1..=8).map(|i| i as f64 * ts).collect(),
            fixed_nu_max_hz: 937.0,
            rolloffs: vec![0.1, 0.5, 0.9],
            rolloff_snr_db: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diversity: DiversitySection,
    #[serde(default)]
    pub sweep: SweepSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            pulse: PulseSection::default(),
            channel: ChannelSection::default(),
            run: RunSection::default(),
            output: OutputSection::default(),
            diversity: DiversitySection::default(),
            sweep: SweepSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

fn check(ok: bool, field: &str, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(field, msg))
    }
}

fn check_monotone(values: &[f64], field: &str) -> Result<()> {
    check(!values.is_empty(), field, "must list at least one value")?;
    check(values.iter().all(|v| v.is_finite()), field, "values must be finite")?;
    check(values.windows(2).all(|w| w[0] < w[1]), field, "values must be strictly increasing")
}

impl SimConfig {
    /// Parses TOML text; `base_dir` anchors relative paths.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            msg,
        };
        let de = toml::Deserializer::parse(text).map_err(|e| parse_err(e.to_string()))?;
        let mut cfg: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().message().to_string();
            if path == "." || path.is_empty() {
                parse_err(inner)
            } else {
                parse_err(format!("{path}: {inner}"))
            }
        })?;
        cfg.base_dir = origin.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.base_dir.as_os_str().is_empty() {
            cfg.base_dir = PathBuf::from(".");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        check(g.k >= 1, "grid.K", "must be at least 1")?;
        check(g.l >= 1, "grid.L", "must be at least 1")?;
        check(g.bandwidth_hz.is_finite() && g.bandwidth_hz > 0.0, "grid.bandwidth_hz", "must be positive")?;

        let p = &self.pulse;
        check((0.0..=1.0).contains(&p.rolloff), "pulse.rolloff", format!("{} is outside [0, 1]", p.rolloff))?;
        check(p.half_width_taps >= 1, "pulse.half_width_taps", "must be at least 1")?;

        let c = &self.channel;
        check(c.p >= 1, "channel.P", "must be at least 1")?;
        check(c.tau_max_s.is_finite() && c.tau_max_s >= 0.0, "channel.tau_max_s", "must be nonnegative")?;
        check(c.nu_max_hz.is_finite() && c.nu_max_hz >= 0.0, "channel.nu_max_hz", "must be nonnegative")?;
        if let Some(v) = c.gain_variance {
            check(v.is_finite() && v > 0.0, "channel.gain_variance", "must be positive")?;
        }
        let ts = 1.0 / g.bandwidth_hz;
        check(
            ((c.tau_max_s / ts).round() as usize) < g.l,
            "channel.tau_max_s",
            format!("rounds to {} delay bins, the grid has only {}", (c.tau_max_s / ts).round(), g.l),
        )?;
        if let Some(path) = &c.profile_file {
            let full = self.resolve(path);
            check(full.is_file(), "channel.profile_file", format!("{} does not exist", full.display()))?;
        }

        let r = &self.run;
        check(r.max_trials >= 1, "run.max_trials", "must be at least 1")?;
        check(r.batch >= 1, "run.batch", "must be at least 1")?;
        Detector::from_name(&r.detector)?;
        Alphabet::from_name(&r.alphabet).map_err(|_| Error::validation("run.alphabet", format!("unknown alphabet `{}`", r.alphabet)))?;
        check(!r.schemes.is_empty(), "run.schemes", "must list at least one scheme")?;
        for s in &r.schemes {
            s.parse::<SchemeId>().map_err(|_| Error::validation("run.schemes", format!("unknown scheme `{s}`")))?;
        }
        check_monotone(&r.snr_grid_db, "run.snr_grid_db")?;

        let d = &self.diversity;
        check(d.pr_phase_scale.is_finite(), "diversity.pr_phase_scale", "must be finite")?;
        check((0.0..=1.0).contains(&d.profile_rolloff), "diversity.profile_rolloff", "must lie in [0, 1]")?;
        check_monotone(&d.snr_grid_db, "diversity.snr_grid_db")?;

        let s = &self.sweep;
        check(s.snr_db.is_finite(), "sweep.snr_db", "must be finite")?;
        check(s.rolloff_snr_db.is_finite(), "sweep.rolloff_snr_db", "must be finite")?;
        check_monotone(&s.nu_max_hz, "sweep.nu_max_hz")?;
        check(s.nu_max_hz.iter().all(|v| *v >= 0.0), "sweep.nu_max_hz", "must be nonnegative")?;
        check_monotone(&s.tau_max_s, "sweep.tau_max_s")?;
        check(
            s.tau_max_s.iter().all(|v| *v >= 0.0 && ((v / ts).round() as usize) < g.l),
            "sweep.tau_max_s",
            "every delay spread must be nonnegative and fit in the frame",
        )?;
        check(
            s.fixed_tau_max_s >= 0.0 && ((s.fixed_tau_max_s / ts).round() as usize) < g.l,
            "sweep.fixed_tau_max_s",
            "must be nonnegative and fit in the frame",
        )?;
        check(s.fixed_nu_max_hz.is_finite() && s.fixed_nu_max_hz >= 0.0, "sweep.fixed_nu_max_hz", "must be nonnegative")?;
        check_monotone(&s.rolloffs, "sweep.rolloffs")?;
        check(s.rolloffs.iter().all(|v| (0.0..=1.0).contains(v)), "sweep.rolloffs", "must lie in [0, 1]")?;
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn grid(&self) -> Result<DDGrid> {
        DDGrid::from_bandwidth(self.grid.k, self.grid.l, self.grid.bandwidth_hz)
    }

    pub fn schemes(&self) -> Result<Vec<SchemeId>> {
        self.run.schemes.iter().map(|s| s.parse()).collect()
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            min_errors: self.run.min_errors,
            max_trials: self.run.max_trials,
            batch: self.run.batch,
        }
    }

    pub fn channel_stats(&self) -> Result<ChannelStats> {
        let c = &self.channel;
        let mut stats = ChannelStats::new(c.p, c.tau_max_s, c.nu_max_hz, c.fractional)?;
        if let Some(v) = c.gain_variance {
            stats.gain_variance = v;
        }
        Ok(stats)
    }

    pub fn profile(&self) -> Result<Option<ChannelProfile>> {
        self.channel
            .profile_file
            .as_ref()
            .map(|p| ChannelProfile::load(&self.resolve(p)))
            .transpose()
    }

    /// Link scenario at the first SNR of the grid.
    pub fn scenario(&self) -> Result<Scenario> {
        let scenario = Scenario {
            grid: self.grid()?,
            rolloff: self.pulse.rolloff,
            half_width_taps: self.pulse.half_width_taps,
            stats: self.channel_stats()?,
            profile: self.profile()?,
            snr_db: self.run.snr_grid_db[0],
            alphabet: Alphabet::from_name(&self.run.alphabet)?,
            detector: Detector::from_name(&self.run.detector)?,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}
