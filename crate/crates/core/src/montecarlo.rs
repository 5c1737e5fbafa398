//! Monte Carlo BER sweeps, bound overlays and the transform benchmark.
//!
//! Trial `t` of sweep point `p` draws everything (bits, channel, noise) from
//! stream `(master_seed, trial_stream_id(p, t))`, and every scheme sees the
//! same draws. Trials run in fixed-size batches; after each batch a scheme
//! stops once it has `min_errors` bit errors or `max_trials` trials. Counts
//! are summed in trial order, so results do not depend on the worker count.

use std::path::Path;

use rayon::prelude::*;

use crate::baselines::{LinkSimulator, LinkSpec, SchemeId};
use crate::channel::{cp_len_for, generate_channel, noise_vector, ChannelProfile, ChannelStats};
use crate::ddmatrix::PhaseRotation;
use crate::detect::{Alphabet, Detector};
use crate::diversity::{build_symbol_matrix, BerBounds, DDProfile, DiversitySystem, PairAnalysis};
use crate::domain::{derive_stream, trial_stream_id, ChannelRealization, DDGrid, RngStream, C64};
use crate::error::{Error, Result};
use crate::pulse::PulseSpec;
use crate::transforms::{transform_cost_benchmark, TransformCost, ZakTransform};

/// Trials evaluated between stopping checks.
pub const DEFAULT_BATCH: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SnrDb,
    NuMax,
    TauMax,
    Rolloff,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NuMax => "nu_max_hz",
            SweepAxis::TauMax => "tau_max_s",
            SweepAxis::Rolloff => "rolloff",
        }
    }
}

/// Linear noise variance for an SNR in dB with unit-energy symbols.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// All parameters of one link experiment at a single sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: DDGrid,
    pub rolloff: f64,
    pub half_width_taps: usize,
    pub stats: ChannelStats,
    /// Fixed geometry instead of random delays and Dopplers. Paths without a
    /// fixed gain draw `CN(0, stats.gain_variance)`.
    pub profile: Option<ChannelProfile>,
    pub snr_db: f64,
    pub alphabet: Alphabet,
    pub detector: Detector,
}

impl Scenario {
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match axis {
            SweepAxis::SnrDb => s.snr_db = value,
            SweepAxis::NuMax => s.stats.nu_max = value,
            SweepAxis::TauMax => s.stats.tau_max = value,
            SweepAxis::Rolloff => s.rolloff = value,
        }
        s.validate()?;
        Ok(s)
    }

    pub fn axis_value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::SnrDb => self.snr_db,
            SweepAxis::NuMax => self.stats.nu_max,
            SweepAxis::TauMax => self.stats.tau_max,
            SweepAxis::Rolloff => self.rolloff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stats.validate()?;
        self.pulse()?;
        if !self.snr_db.is_finite() {
            return Err(Error::validation("run.snr_grid_db", "SNR must be finite"));
        }
        if self.profile.is_none() && self.stats.max_delay_int(&self.grid) >= self.grid.delay_bins() {
            return Err(Error::DelayExceedsFrame {
                delay: self.stats.tau_max / self.grid.symbol_period(),
                limit: self.grid.delay_bins(),
            });
        }
        Ok(())
    }

    pub fn pulse(&self) -> Result<PulseSpec> {
        PulseSpec::raised_cosine(self.rolloff, self.grid.symbol_period(), self.half_width_taps)
    }

    /// OFDM prefix: covers the largest delay the scenario can produce.
    pub fn ofdm_cp_len(&self) -> usize {
        match &self.profile {
            Some(p) => p.paths.iter().map(|q| q.delay_bins.ceil() as usize).max().unwrap_or(0),
            None => cp_len_for(self.stats.tau_max, &self.grid),
        }
    }

    pub fn link(&self) -> Result<LinkSpec> {
        Ok(LinkSpec {
            grid: self.grid,
            pulse: self.pulse()?,
            alphabet: self.alphabet.clone(),
            detector: self.detector,
            ofdm_cp_len: self.ofdm_cp_len(),
        })
    }

    pub fn draw_channel(&self, rng: &mut RngStream) -> Result<ChannelRealization> {
        match &self.profile {
            None => generate_channel(&self.stats, &self.grid, rng),
            Some(p) => {
                let gains: Vec<C64> = p
                    .paths
                    .iter()
                    .map(|q| q.gain.unwrap_or_else(|| rng.complex_gaussian(self.stats.gain_variance)))
                    .collect();
                p.realization_with_gains(&gains)
            }
        }
    }
}

/// Trial draws shared by every scheme.
struct TrialDraw {
    bits: Vec<bool>,
    chan: ChannelRealization,
    noise: Vec<C64>,
}

fn draw_trial(scenario: &Scenario, n0: f64, rng: &mut RngStream, bits_per_frame: usize) -> Result<TrialDraw> {
    let bits = (0..bits_per_frame).map(|_| rng.bit()).collect();
    let chan = scenario.draw_channel(rng)?;
    let noise = noise_vector(scenario.grid.len(), n0, rng);
    Ok(TrialDraw { bits, chan, noise })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
    pub batch: u64,
}

impl StopRule {
    pub fn new(min_errors: u64, max_trials: u64) -> Self {
        Self {
            min_errors,
            max_trials,
            batch: DEFAULT_BATCH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_trials == 0 {
            return Err(Error::validation("run.max_trials", "must be positive"));
        }
        if self.batch == 0 {
            return Err(Error::validation("run.batch", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub base: Scenario,
    pub schemes: Vec<SchemeId>,
    pub stop: StopRule,
    pub master_seed: u64,
    /// Offset added to sweep point indices when deriving streams, so separate
    /// sweeps over the same seed can be made independent or deliberately paired.
    pub point_offset: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis_values.is_empty() {
            return Err(Error::validation("axis_values", "at least one sweep value is required"));
        }
        let increasing = self.axis_values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.axis_values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::validation("axis_values", "sweep values must be strictly monotone"));
        }
        if self.schemes.is_empty() {
            return Err(Error::validation("run.schemes", "at least one scheme is required"));
        }
        self.stop.validate()?;
        for v in &self.axis_values {
            self.base.with_axis(self.axis, *v)?;
        }
        Ok(())
    }
}

/// One row of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub axis_value: f64,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Half-width of the 95% normal-approximation binomial interval.
    pub ci_halfwidth: f64,
    /// The trial budget ran out before `min_errors` errors were seen.
    pub low_confidence: bool,
}

impl BerPoint {
    fn new(axis_value: f64, snr_db: f64, trials: u64, bit_errors: u64, bits: u64, min_errors: u64) -> Self {
        let ber = if bits == 0 { 0.0 } else { bit_errors as f64 / bits as f64 };
        Self {
            axis_value,
            snr_db,
            trials,
            bit_errors,
            bits,
            ber,
            ci_halfwidth: binomial_ci_halfwidth(ber, bits),
            low_confidence: bit_errors < min_errors,
        }
    }

    /// Binomial standard deviation of `ber`.
    pub fn sigma(&self) -> f64 {
        binomial_sigma(self.ber, self.bits)
    }
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

pub fn binomial_ci_halfwidth(p: f64, n: u64) -> f64 {
    1.96 * binomial_sigma(p, n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub scheme: SchemeId,
    pub axis: SweepAxis,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn bers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber).collect()
    }

    pub fn axis_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.axis_value).collect()
    }
}

/// Counts one point for several schemes with shared draws.
fn run_point(
    scenario: &Scenario,
    schemes: &[SchemeId],
    stop: &StopRule,
    master_seed: u64,
    point: usize,
) -> Result<Vec<(u64, u64)>> {
    let link = scenario.link()?;
    let bits_per_frame = link.bits_per_frame();
    let sim = LinkSimulator::new(link);
    let n0 = noise_variance(scenario.snr_db);
    let mut totals = vec![(0u64, 0u64); schemes.len()];
    let mut active: Vec<usize> = (0..schemes.len()).collect();
    let mut next = 0u64;
    while !active.is_empty() {
        let end = (next + stop.batch).min(stop.max_trials);
        let batch: Vec<Vec<u64>> = (next..end)
            .into_par_iter()
            .map(|t| {
                let mut rng = derive_stream(master_seed, trial_stream_id(point, t));
                let draw = draw_trial(scenario, n0, &mut rng, bits_per_frame)?;
                active
                    .iter()
                    .map(|&s| {
                        let got = sim.run(schemes[s], &draw.bits, &draw.chan, n0, &draw.noise)?;
                        Ok(got.iter().zip(&draw.bits).filter(|(a, b)| a != b).count() as u64)
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<_>>()?;
        for (slot, &s) in active.iter().enumerate() {
            for errs in &batch {
                totals[s].0 += 1;
                totals[s].1 += errs[slot];
            }
        }
        next = end;
        active.retain(|&s| totals[s].1 < stop.min_errors && totals[s].0 < stop.max_trials);
    }
    Ok(totals)
}

/// BER curves, one per scheme, over the sweep axis.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<BerCurve>> {
    spec.validate()?;
    let bits_per_frame = (spec.base.grid.len() * spec.base.alphabet.bits_per_symbol()) as u64;
    let mut curves: Vec<BerCurve> = spec
        .schemes
        .iter()
        .map(|s| BerCurve {
            scheme: *s,
            axis: spec.axis,
            points: Vec::with_capacity(spec.axis_values.len()),
        })
        .collect();
    for (idx, &value) in spec.axis_values.iter().enumerate() {
        let scenario = spec.base.with_axis(spec.axis, value)?;
        let totals = run_point(&scenario, &spec.schemes, &spec.stop, spec.master_seed, spec.point_offset + idx)?;
        for (curve, (trials, errors)) in curves.iter_mut().zip(totals) {
            curve.points.push(BerPoint::new(
                value,
                scenario.snr_db,
                trials,
                errors,
                trials * bits_per_frame,
                spec.stop.min_errors,
            ));
        }
    }
    Ok(curves)
}

/// DZT-OTFS BER curves for several roll-offs over a Doppler or delay axis.
///
/// Every roll-off reuses the same per-point streams, so the curves are paired
/// trial by trial.
pub fn run_rolloff_study(gammas: &[f64], axis: SweepAxis, spec: &SweepSpec) -> Result<Vec<(f64, BerCurve)>> {
    if !matches!(axis, SweepAxis::NuMax | SweepAxis::TauMax) {
        return Err(Error::validation("axis", "roll-off studies sweep nu_max or tau_max"));
    }
    if gammas.is_empty() {
        return Err(Error::validation("rolloffs", "at least one roll-off is required"));
    }
    gammas
        .iter()
        .map(|&g| {
            let mut s = spec.clone();
            s.axis = axis;
            s.base.rolloff = g;
            s.schemes = vec![SchemeId::DztOtfs];
            let curve = run_sweep(&s)?.pop().expect("one scheme requested");
            Ok((g, curve))
        })
        .collect()
}

/// Simulated ML BER next to the union bounds for one diversity system.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundOverlay {
    pub system: String,
    pub profile: String,
    pub with_pr: bool,
    pub simulated: Vec<BerPoint>,
    pub bounds: BerBounds,
}

/// ML simulation over a fixed geometry with gains `CN(0, 1/P)`, plus the
/// bounds on the same SNR grid.
#[allow(clippy::too_many_arguments)]
pub fn run_bound_overlay(
    system: &DiversitySystem,
    profile: &DDProfile,
    pulse: &PulseSpec,
    snr_db: &[f64],
    rotation: Option<PhaseRotation>,
    stop: &StopRule,
    master_seed: u64,
) -> Result<BoundOverlay> {
    stop.validate()?;
    let analysis = PairAnalysis::enumerate(system, profile, pulse, rotation)?;
    let bounds = analysis.ber_bounds(snr_db);
    let grid = system.grid;
    let n = grid.len();
    let p = system.path_count;
    let ops = profile.path_operators(pulse, &grid)?;
    let q_count = system.alphabet.candidate_count(n)?;
    // Candidate outputs per path: products[q][i] = x_q M_i.
    let products: Vec<CandidateRows> = (0..q_count)
        .map(|q| {
            let x = system.alphabet.candidate(q, n);
            let x = match rotation {
                Some(pr) => pr.apply(&x),
                None => x,
            };
            let m = build_symbol_matrix(&x, &ops);
            (0..p).map(|i| m.row(i).iter().copied().collect()).collect()
        })
        .collect();
    let zak = ZakTransform::new(grid);
    let bits_per_frame = system.bits_per_frame();
    let variance = 1.0 / p as f64;
    let mut simulated = Vec::with_capacity(snr_db.len());
    for (idx, &db) in snr_db.iter().enumerate() {
        let n0 = noise_variance(db);
        let (mut trials, mut errors) = (0u64, 0u64);
        while errors < stop.min_errors && trials < stop.max_trials {
            let end = (trials + stop.batch).min(stop.max_trials);
            let batch: u64 = (trials..end)
                .into_par_iter()
                .map(|t| {
                    let mut rng = derive_stream(master_seed, trial_stream_id(idx, t));
                    let q_sent = rng.uniform_int(q_count - 1);
                    let h: Vec<C64> = (0..p).map(|_| rng.complex_gaussian(variance)).collect();
                    let noise = zak.dzt_vec(&noise_vector(n, n0, &mut rng));
                    let mut y = combine(&products[q_sent], &h);
                    y.iter_mut().zip(&noise).for_each(|(a, b)| *a += b);
                    let q_hat = ml_over_products(&y, &products, &h);
                    ((q_sent ^ q_hat) as u64).count_ones() as u64
                })
                .sum();
            errors += batch;
            trials = end;
        }
        simulated.push(BerPoint::new(
            db,
            db,
            trials,
            errors,
            trials * bits_per_frame as u64,
            stop.min_errors,
        ));
    }
    Ok(BoundOverlay {
        system: system.name.clone(),
        profile: profile.name.clone(),
        with_pr: rotation.is_some(),
        simulated,
        bounds,
    })
}

type CandidateRows = Vec<Vec<C64>>;

fn combine(rows: &CandidateRows, h: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::default(); rows[0].len()];
    for (row, g) in rows.iter().zip(h) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += g * v;
        }
    }
    out
}

/// ML index with ties to the lowest index. Each base-`|A|` digit of a
/// candidate index is that symbol's bit label, so `q_sent ^ q_hat` counts bit
/// errors.
fn ml_over_products(y: &[C64], products: &[CandidateRows], h: &[C64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (q, rows) in products.iter().enumerate() {
        let out = combine(rows, h);
        let d: f64 = y.iter().zip(&out).map(|(a, b)| (a - b).norm_sqr()).sum();
        if d < best.1 {
            best = (q, d);
        }
    }
    best.0
}

/// Least-squares slope of `log10(ber)` against `snr_db / 10`, in decades per
/// 10 dB, over points with nonzero BER inside `[lo_db, hi_db]`.
pub fn fit_slope(snr_db: &[f64], ber: &[f64], lo_db: f64, hi_db: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = snr_db
        .iter()
        .zip(ber)
        .filter(|(s, b)| **s >= lo_db - 1e-9 && **s <= hi_db + 1e-9 && **b > 0.0)
        .map(|(s, b)| (s / 10.0, b.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// SNR at which a curve crosses `target`, by linear interpolation of
/// `log10(ber)` between the bracketing points.
pub fn snr_at_ber(snr_db: &[f64], ber: &[f64], target: f64) -> Option<f64> {
    let lt = target.log10();
    for i in 1..snr_db.len() {
        let (b0, b1) = (ber[i - 1], ber[i]);
        if b0 >= target && b1 <= target && b0 > 0.0 {
            if b1 <= 0.0 {
                return Some(snr_db[i]);
            }
            let (l0, l1) = (b0.log10(), b1.log10());
            if l0 == l1 {
                return Some(snr_db[i - 1]);
            }
            return Some(snr_db[i - 1] + (lt - l0) / (l1 - l0) * (snr_db[i] - snr_db[i - 1]));
        }
    }
    None
}

/// Transform costs for each square size `K = L`.
pub fn run_transform_benchmark(sizes: &[usize], repetitions: usize) -> Result<Vec<TransformCost>> {
    sizes
        .iter()
        .map(|&s| transform_cost_benchmark(s, s, repetitions))
        .collect()
}

/// Header shared by every BER CSV.
pub const CSV_HEADER: [&str; 10] = [
    "scheme",
    "axis_name",
    "axis_value",
    "snr_db",
    "trials",
    "bit_errors",
    "ber",
    "ci_halfwidth",
    "seed",
    "config_hash",
];

/// A labelled BER row for CSV output. `scheme` may carry a suffix such as a
/// roll-off tag.
pub struct CsvRow<'a> {
    pub scheme: String,
    pub axis_name: &'a str,
    pub point: &'a BerPoint,
}

pub fn write_ber_csv<W: std::io::Write>(out: W, rows: &[CsvRow<'_>], seed: u64, config_hash: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let p = r.point;
        w.write_record([
            r.scheme.clone(),
            r.axis_name.to_string(),
            p.axis_value.to_string(),
            p.snr_db.to_string(),
            p.trials.to_string(),
            p.bit_errors.to_string(),
            p.ber.to_string(),
            p.ci_halfwidth.to_string(),
            seed.to_string(),
            config_hash.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<csv>"), e))?;
    Ok(())
}
