//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baselines::SchemeId;
use crate::config::SimConfig;
use crate::ddmatrix::PhaseRotation;
use crate::diversity::{DDProfile, DiversitySystem, PairAnalysis};
use crate::error::{Error, Result};
use crate::montecarlo::{
    run_bound_overlay, run_rolloff_study, run_sweep, run_transform_benchmark, snr_at_ber, write_ber_csv, BerCurve,
    CsvRow, SweepAxis, SweepSpec,
};
use crate::plot::{write_plot_script, FigureKind};
use crate::pulse::PulseSpec;
use crate::verify::run_verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dzt-otfs", version, about = "Delay-Doppler link simulator built on the discrete Zak transform")]
pub struct Cli {
    /// TOML configuration; built-in defaults apply without one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed, overriding `run.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, env = "DZT_OTFS_WORKERS")]
    pub workers: Option<usize>,

    /// CSV destination, overriding `output.csv_path`.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Also write a matplotlib script that redraws the CSV.
    #[arg(long, global = true)]
    pub plot_script: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SchemeArg {
    /// One of dzt, twostep, ofdm or all; defaults to `run.schemes`.
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RolloffAxis {
    Doppler,
    Delay,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrMode {
    Off,
    On,
    Both,
}

impl PrMode {
    fn choices(self) -> &'static [bool] {
        match self {
            PrMode::Off => &[false],
            PrMode::On => &[true],
            PrMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER against SNR over `run.snr_grid_db`.
    BerVsSnr(SchemeArg),
    /// BER against maximum Doppler over `sweep.nu_max_hz`.
    BerVsDoppler(SchemeArg),
    /// BER against maximum delay over `sweep.tau_max_s`.
    BerVsDelay(SchemeArg),
    /// DZT-OTFS BER for each of `sweep.rolloffs`.
    RolloffStudy {
        #[arg(long, value_enum, default_value = "both")]
        axis: RolloffAxis,
    },
    /// Rank histogram of symbol difference matrices.
    RankProfile {
        #[arg(long, default_value = "s1")]
        system: String,
        /// A, B, C, D or a path to a profile TOML file.
        #[arg(long, default_value = "A")]
        profile: String,
        #[arg(long, value_enum, default_value = "both")]
        pr: PrMode,
        /// Absolute singular-value floor used for rank decisions.
        #[arg(long, default_value_t = crate::diversity::DEFAULT_RANK_FLOOR)]
        rank_floor: f64,
    },
    /// Simulated ML BER beside the union upper and lower bounds.
    PepBounds {
        #[arg(long, default_value = "s1")]
        system: String,
        #[arg(long, default_value = "A")]
        profile: String,
        #[arg(long, value_enum, default_value = "off")]
        pr: PrMode,
    },
    /// Run the identity and oracle checks; exits 3 on any failure.
    Verify,
    /// Time DZT and two-step frame transforms.
    BenchTransforms {
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        repetitions: usize,
    },
}

impl Command {
    fn default_csv(&self) -> &'static str {
        match self {
            Command::BerVsSnr(_) => "ber_vs_snr.csv",
            Command::BerVsDoppler(_) => "ber_vs_doppler.csv",
            Command::BerVsDelay(_) => "ber_vs_delay.csv",
            Command::RolloffStudy { .. } => "rolloff_study.csv",
            Command::RankProfile { .. } => "rank_profile.csv",
            Command::PepBounds { .. } => "pep_bounds.csv",
            Command::Verify => "verify.csv",
            Command::BenchTransforms { .. } => "bench_transforms.csv",
        }
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    Verify(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(_) => EXIT_VALIDATION,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Verify(_) => "verification",
            CliError::Lib(e) => match e {
                Error::Validation { .. } => "validation",
                Error::Parse { .. } => "parse",
                Error::Io { .. } | Error::Csv(_) => "io",
                _ => "model",
            },
        }
    }

    /// Single `key=value` line for scripts; values with spaces are quoted.
    pub fn error_line(&self) -> String {
        let message = match self {
            CliError::Usage(m) | CliError::Verify(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        };
        let mut line = format!("error code={} kind={}", self.exit_code(), self.kind());
        if let CliError::Lib(Error::Validation { field, .. }) = self {
            line += &format!(" field={field}");
        }
        let flat = message.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("; ");
        line += &format!(" message={flat:?}");
        line
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Results go to files and stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            eprintln!("{}", CliError::Usage(e.kind().to_string()).error_line());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.error_line());
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.run.master_seed = seed;
    }
    let csv_path = match (&cli.output, &cli.config) {
        (Some(p), _) => p.clone(),
        (None, Some(_)) => cfg.resolve(&cfg.output.csv_path),
        (None, None) => PathBuf::from(cli.command.default_csv()),
    };
    let plot_path = cli
        .plot_script
        .clone()
        .or_else(|| cli.config.as_ref().and(cfg.output.plot_script.as_ref()).map(|p| cfg.resolve(p)));
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let ctx = Context {
        cfg,
        csv_path,
        plot_path,
    };
    pool.install(|| dispatch(&cli.command, &ctx))
}

struct Context {
    cfg: SimConfig,
    csv_path: PathBuf,
    plot_path: Option<PathBuf>,
}

impl Context {
    fn seed(&self) -> u64 {
        self.cfg.run.master_seed
    }

    fn create_csv(&self) -> Result<std::fs::File> {
        if let Some(dir) = self.csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::File::create(&self.csv_path).map_err(|e| Error::io(&self.csv_path, e))
    }

    fn finish(&self, kind: FigureKind) -> Result<()> {
        println!("wrote {}", self.csv_path.display());
        if let Some(script) = &self.plot_path {
            write_plot_script(kind, &self.csv_path, script)?;
            println!("wrote {}", script.display());
        }
        Ok(())
    }
}

fn dispatch(command: &Command, ctx: &Context) -> Result<(), CliError> {
    match command {
        Command::BerVsSnr(s) => ber_sweep(ctx, SweepAxis::SnrDb, s),
        Command::BerVsDoppler(s) => ber_sweep(ctx, SweepAxis::NuMax, s),
        Command::BerVsDelay(s) => ber_sweep(ctx, SweepAxis::TauMax, s),
        Command::RolloffStudy { axis } => rolloff_study(ctx, *axis),
        Command::RankProfile {
            system,
            profile,
            pr,
            rank_floor,
        } => rank_profile(ctx, system, profile, *pr, *rank_floor),
        Command::PepBounds { system, profile, pr } => pep_bounds(ctx, system, profile, *pr),
        Command::Verify => verify(ctx),
        Command::BenchTransforms { sizes, repetitions } => bench(ctx, sizes, *repetitions),
    }
}

fn schemes(ctx: &Context, arg: &SchemeArg) -> Result<Vec<SchemeId>> {
    match &arg.scheme {
        Some(s) => SchemeId::parse_list(s),
        None => ctx.cfg.schemes(),
    }
}

/// Sweep specification for one axis, with the fixed parameters of that
/// sweep applied to the base scenario.
fn sweep_spec(ctx: &Context, axis: SweepAxis, schemes: Vec<SchemeId>) -> Result<SweepSpec> {
    let cfg = &ctx.cfg;
    let mut base = cfg.scenario()?;
    let values = match axis {
        SweepAxis::SnrDb => cfg.run.snr_grid_db.clone(),
        SweepAxis::NuMax => {
            base.snr_db = cfg.sweep.snr_db;
            base.stats.tau_max = cfg.sweep.fixed_tau_max_s;
            cfg.sweep.nu_max_hz.clone()
        }
        SweepAxis::TauMax => {
            base.snr_db = cfg.sweep.snr_db;
            base.stats.nu_max = cfg.sweep.fixed_nu_max_hz;
            cfg.sweep.tau_max_s.clone()
        }
        SweepAxis::Rolloff => cfg.sweep.rolloffs.clone(),
    };
    Ok(SweepSpec {
        axis,
        axis_values: values,
        base,
        schemes,
        stop: cfg.stop_rule(),
        master_seed: cfg.run.master_seed,
        point_offset: 0,
    })
}

/// Dopplers at or beyond half the Doppler span wrap onto other bins.
fn report_aliasing(spec: &SweepSpec) {
    let grid = &spec.base.grid;
    let limit = grid.doppler_bins() as f64 / 2.0;
    let resolution = grid.doppler_resolution();
    let values: Vec<f64> = match spec.axis {
        SweepAxis::NuMax => spec.axis_values.clone(),
        _ => vec![spec.base.stats.nu_max],
    };
    for nu in values {
        if nu / resolution >= limit {
            eprintln!(
                "note: nu_max_hz={nu} spans {:.2} Doppler bins; Dopplers of {:.1} Hz or more alias modulo K={}",
                nu / resolution,
                limit * resolution,
                grid.doppler_bins()
            );
        }
    }
}

fn report_low_confidence(label: &str, curve: &BerCurve) {
    for p in curve.points.iter().filter(|p| p.low_confidence) {
        eprintln!(
            "warning: {label} at {}={} stopped after {} trials with {} bit errors",
            curve.axis.name(),
            p.axis_value,
            p.trials,
            p.bit_errors
        );
    }
}

fn ber_sweep(ctx: &Context, axis: SweepAxis, arg: &SchemeArg) -> Result<(), CliError> {
    let spec = sweep_spec(ctx, axis, schemes(ctx, arg)?)?;
    report_aliasing(&spec);
    let curves = run_sweep(&spec)?;
    let rows: Vec<CsvRow<'_>> = curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|p| CsvRow {
                scheme: c.scheme.name().to_string(),
                axis_name: axis.name(),
                point: p,
            })
        })
        .collect();
    write_ber_csv(ctx.create_csv()?, &rows, ctx.seed(), &ctx.cfg.hash())?;
    for c in &curves {
        report_low_confidence(c.scheme.name(), c);
        if axis == SweepAxis::SnrDb {
            match snr_at_ber(&c.axis_values(), &c.bers(), 1e-3) {
                Some(db) => println!("{}: BER 1e-3 at {db:.2} dB", c.scheme),
                None => println!("{}: BER 1e-3 not crossed", c.scheme),
            }
        }
    }
    let kind = match axis {
        SweepAxis::SnrDb => FigureKind::Snr,
        SweepAxis::NuMax => FigureKind::Doppler,
        _ => FigureKind::Delay,
    };
    Ok(ctx.finish(kind)?)
}

fn rolloff_study(ctx: &Context, which: RolloffAxis) -> Result<(), CliError> {
    let axes: &[SweepAxis] = match which {
        RolloffAxis::Doppler => &[SweepAxis::NuMax],
        RolloffAxis::Delay => &[SweepAxis::TauMax],
        RolloffAxis::Both => &[SweepAxis::NuMax, SweepAxis::TauMax],
    };
    let mut results = Vec::new();
    let mut offset = 0;
    for &axis in axes {
        let mut spec = sweep_spec(ctx, axis, vec![SchemeId::DztOtfs])?;
        spec.base.snr_db = ctx.cfg.sweep.rolloff_snr_db;
        // Separate streams per axis so the two studies are independent.
        spec.point_offset = offset;
        offset += spec.axis_values.len();
        report_aliasing(&spec);
        for (gamma, curve) in run_rolloff_study(&ctx.cfg.sweep.rolloffs, axis, &spec)? {
            report_low_confidence(&format!("rolloff {gamma}"), &curve);
            results.push((format!("dzt rolloff={gamma}"), curve));
        }
    }
    let rows: Vec<CsvRow<'_>> = results
        .iter()
        .flat_map(|(label, c)| {
            c.points.iter().map(|p| CsvRow {
                scheme: label.clone(),
                axis_name: c.axis.name(),
                point: p,
            })
        })
        .collect();
    write_ber_csv(ctx.create_csv()?, &rows, ctx.seed(), &ctx.cfg.hash())?;
    Ok(ctx.finish(FigureKind::Rolloff)?)
}

fn load_profile(name: &str) -> Result<DDProfile> {
    let path = Path::new(name);
    if name.ends_with(".toml") || path.is_file() {
        let geometry = crate::channel::ChannelProfile::load(path)?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(DDProfile { name: label, geometry });
    }
    DDProfile::from_name(name)
}

/// The named system fixes the grid; the profile fixes the number of paths.
fn diversity_system(name: &str, profile: &DDProfile) -> Result<DiversitySystem> {
    let system = DiversitySystem::from_name(name)?;
    if system.path_count != profile.path_count() {
        eprintln!(
            "note: system {} runs with P={} to match profile {}",
            system.name,
            profile.path_count(),
            profile.name
        );
    }
    Ok(system.for_profile(profile))
}

fn diversity_pulse(ctx: &Context) -> Result<PulseSpec> {
    PulseSpec::raised_cosine(ctx.cfg.diversity.profile_rolloff, 1.0, ctx.cfg.pulse.half_width_taps)
}

fn rotation(ctx: &Context, on: bool) -> Option<PhaseRotation> {
    on.then(|| PhaseRotation::new(ctx.cfg.diversity.pr_phase_scale))
}

fn rank_profile(ctx: &Context, system: &str, profile: &str, pr: PrMode, floor: f64) -> Result<(), CliError> {
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(Error::validation("rank_floor", "must be a nonnegative number").into());
    }
    let profile = load_profile(profile)?;
    let system = diversity_system(system, &profile)?;
    let pulse = diversity_pulse(ctx)?;
    let mut w = csv::Writer::from_writer(ctx.create_csv()?);
    let p = system.path_count;
    let mut header = vec!["system".to_string(), "profile".into(), "with_pr".into()];
    header.extend((0..=p).map(|r| format!("rank_{r}")));
    header.extend(["min_rank".into(), "seed".into(), "config_hash".into()]);
    w.write_record(&header).map_err(Error::from)?;
    let hash = ctx.cfg.hash();
    for &on in pr.choices() {
        let hist = PairAnalysis::enumerate(&system, &profile, &pulse, rotation(ctx, on))?.histogram(floor);
        let mut rec = vec![system.name.clone(), profile.name.clone(), on.to_string()];
        rec.extend(hist.counts.iter().map(|c| c.to_string()));
        rec.extend([hist.min_rank.to_string(), ctx.seed().to_string(), hash.clone()]);
        w.write_record(&rec).map_err(Error::from)?;
        let shown: Vec<String> = hist
            .counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(r, c)| format!("rank {r}: {c}"))
            .collect();
        println!(
            "{} profile {} {}: {} (min rank {})",
            system.name,
            profile.name,
            if on { "with PR" } else { "without PR" },
            shown.join(", "),
            hist.min_rank
        );
    }
    w.flush().map_err(|e| Error::io(&ctx.csv_path, e))?;
    println!("wrote {}", ctx.csv_path.display());
    Ok(())
}

fn pep_bounds(ctx: &Context, system: &str, profile: &str, pr: PrMode) -> Result<(), CliError> {
    let profile = load_profile(profile)?;
    let system = diversity_system(system, &profile)?;
    let pulse = diversity_pulse(ctx)?;
    let stop = ctx.cfg.stop_rule();
    let snr = &ctx.cfg.diversity.snr_grid_db;
    let mut w = csv::Writer::from_writer(ctx.create_csv()?);
    w.write_record([
        "system",
        "profile",
        "with_pr",
        "snr_db",
        "trials",
        "bit_errors",
        "ber",
        "ci_halfwidth",
        "upper",
        "lower",
        "min_rank",
        "seed",
        "config_hash",
    ])
    .map_err(Error::from)?;
    let hash = ctx.cfg.hash();
    for &on in pr.choices() {
        let overlay = run_bound_overlay(&system, &profile, &pulse, snr, rotation(ctx, on), &stop, ctx.seed())?;
        let label = format!("{} {} pr={on}", system.name, profile.name);
        for (i, p) in overlay.simulated.iter().enumerate() {
            if p.low_confidence {
                eprintln!("warning: {label} at {} dB stopped after {} trials with {} bit errors", p.snr_db, p.trials, p.bit_errors);
            }
            w.write_record([
                overlay.system.clone(),
                overlay.profile.clone(),
                on.to_string(),
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.bit_errors.to_string(),
                p.ber.to_string(),
                p.ci_halfwidth.to_string(),
                overlay.bounds.upper[i].to_string(),
                overlay.bounds.lower[i].to_string(),
                overlay.bounds.min_rank.to_string(),
                ctx.seed().to_string(),
                hash.clone(),
            ])
            .map_err(Error::from)?;
        }
    }
    w.flush().map_err(|e| Error::io(&ctx.csv_path, e))?;
    let kind = if pr == PrMode::Off { FigureKind::Bounds } else { FigureKind::PhaseRotation };
    Ok(ctx.finish(kind)?)
}

fn verify(ctx: &Context) -> Result<(), CliError> {
    let report = run_verification(ctx.seed());
    let mut out = std::io::stdout().lock();
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{:<4} {:<18} instances={:<7} max_error={:.3e} tolerance={:.1e}",
            if c.passed() { "ok" } else { "FAIL" },
            c.name,
            c.instances,
            c.max_error,
            c.tolerance
        );
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
        Err(CliError::Verify(format!("failed checks: {}", failed.join(", "))))
    }
}

fn bench(ctx: &Context, sizes: &[usize], repetitions: usize) -> Result<(), CliError> {
    let costs = run_transform_benchmark(sizes, repetitions)?;
    let mut w = csv::Writer::from_writer(ctx.create_csv()?);
    w.write_record(["K", "L", "repetitions", "dzt_seconds", "sfft_seconds", "seed", "config_hash"])
        .map_err(Error::from)?;
    let hash = ctx.cfg.hash();
    for c in &costs {
        w.write_record([
            c.doppler_bins.to_string(),
            c.delay_bins.to_string(),
            c.repetitions.to_string(),
            c.dzt_seconds.to_string(),
            c.sfft_seconds.to_string(),
            ctx.seed().to_string(),
            hash.clone(),
        ])
        .map_err(Error::from)?;
        println!(
            "K=L={}: dzt {:.3e} s, two-step {:.3e} s, ratio {:.2}",
            c.doppler_bins,
            c.dzt_seconds,
            c.sfft_seconds,
            c.sfft_seconds / c.dzt_seconds
        );
    }
    w.flush().map_err(|e| Error::io(&ctx.csv_path, e))?;
    println!("wrote {}", ctx.csv_path.display());
    Ok(())
}
