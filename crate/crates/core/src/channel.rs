//! Random doubly-dispersive channels and the sample-level transceiver path.
//!
//! After cyclic-prefix removal each path acts on the `N`-sample frame as
//! `y_i[m] = sum_n x[n] e_i[n] g_i[(m - n) mod N]` and the paths add up with
//! effective gains `h'_i`. [`apply_channel_with_cp`] spells out the prefix,
//! linear convolution and prefix removal explicitly and serves as the
//! reference for that circular model.

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::domain::{ChannelPath, ChannelRealization, DDGrid, RngStream, TimeSignal, C64};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::pulse::{doppler_sequence, sample_delay_sequence, PulseSpec};

/// Statistics of the random channel: uniform power-delay profile, Jakes-like
/// Doppler `nu = nu_max cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub path_count: usize,
    pub tau_max: f64,
    pub nu_max: f64,
    pub gain_variance: f64,
    pub fractional: bool,
}

impl ChannelStats {
    pub fn new(path_count: usize, tau_max: f64, nu_max: f64, fractional: bool) -> Result<Self> {
        let stats = Self {
            path_count,
            tau_max,
            nu_max,
            gain_variance: 1.0 / path_count.max(1) as f64,
            fractional,
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        if self.path_count == 0 {
            return Err(Error::validation("channel.P", "at least one path is required"));
        }
        if !(self.tau_max.is_finite() && self.tau_max >= 0.0) {
            return Err(Error::validation("channel.tau_max_s", "must be nonnegative"));
        }
        if !(self.nu_max.is_finite() && self.nu_max >= 0.0) {
            return Err(Error::validation("channel.nu_max_hz", "must be nonnegative"));
        }
        if !(self.gain_variance.is_finite() && self.gain_variance > 0.0) {
            return Err(Error::validation("channel.gain_variance", "must be positive"));
        }
        Ok(())
    }

    /// `round(tau_max / Ts)`
    pub fn max_delay_int(&self, grid: &DDGrid) -> usize {
        (self.tau_max / grid.symbol_period()).round() as usize
    }
}

/// Prefix length `ceil(tau_max / Ts)`.
pub fn cp_len_for(tau_max: f64, grid: &DDGrid) -> usize {
    // Guard against 8.000000001 from the division of a rounded period.
    let ratio = tau_max / grid.symbol_period();
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

pub fn generate_channel(stats: &ChannelStats, grid: &DDGrid, rng: &mut RngStream) -> Result<ChannelRealization> {
    stats.validate()?;
    let alpha_max = stats.max_delay_int(grid);
    if alpha_max >= grid.delay_bins() {
        return Err(Error::DelayExceedsFrame {
            delay: alpha_max as f64,
            limit: grid.delay_bins(),
        });
    }
    let doppler_per_hz = grid.len() as f64 * grid.symbol_period();
    let mut paths = Vec::with_capacity(stats.path_count);
    for _ in 0..stats.path_count {
        let delay_int = rng.uniform_int(alpha_max);
        let mut delay_frac = if stats.fractional { rng.uniform(-0.5, 0.5) } else { 0.0 };
        if delay_int == 0 {
            // A zero integer delay cannot take a negative fraction.
            delay_frac = delay_frac.abs();
        }
        let theta = rng.uniform(-PI, PI);
        let doppler = stats.nu_max * theta.cos() * doppler_per_hz;
        let doppler = if stats.fractional { doppler } else { doppler.round() };
        let doppler_int = doppler.round();
        let gain = rng.complex_gaussian(stats.gain_variance);
        paths.push(ChannelPath::new(
            gain,
            delay_int,
            delay_frac,
            doppler_int as i64,
            doppler - doppler_int,
        )?);
    }
    ChannelRealization::new(paths)
}

/// Per-path sampled response over an `N`-sample frame.
#[derive(Debug, Clone)]
pub(crate) struct PathResponse {
    pub gain: C64,
    pub doppler: Vec<C64>,
    /// Nonzero entries of `delay` as `(offset, value)`.
    pub taps: Vec<(usize, f64)>,
}

pub(crate) fn path_responses(chan: &ChannelRealization, pulse: &PulseSpec, grid: &DDGrid) -> Result<Vec<PathResponse>> {
    let n = grid.len();
    chan.paths()
        .iter()
        .map(|p| {
            let delay = sample_delay_sequence(p.delay_bins(), n, pulse)?;
            let taps = delay
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(d, v)| (d, *v))
                .collect();
            Ok(PathResponse {
                gain: p.effective_gain(grid),
                doppler: doppler_sequence(p.doppler_bins(), n),
                taps,
            })
        })
        .collect()
}

/// Noiseless channel output on the circular (prefix-removed) frame.
pub fn apply_channel_time(
    x: &TimeSignal,
    chan: &ChannelRealization,
    pulse: &PulseSpec,
    grid: &DDGrid,
) -> Result<TimeSignal> {
    if x.cp_len() != 0 {
        return Err(Error::validation("x", "pass the frame without its cyclic prefix"));
    }
    if x.body_len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: x.body_len(),
        });
    }
    let n = grid.len();
    let mut y = vec![C64::default(); n];
    for resp in path_responses(chan, pulse, grid)? {
        for (idx, (&xn, &en)) in x.body().iter().zip(&resp.doppler).enumerate() {
            let s = resp.gain * xn * en;
            for &(d, g) in &resp.taps {
                y[(idx + d) % n] += s * g;
            }
        }
    }
    Ok(TimeSignal::new(y))
}

/// Reference transceiver with an explicit prefix: prepend `cp_len` samples,
/// convolve linearly with the truncated pulse in absolute time, then discard
/// the prefix. Doppler phases are referenced to the first body sample.
///
/// Agrees with [`apply_channel_time`] whenever every delay and Doppler is an
/// integer and `cp_len` covers the largest delay; otherwise pulse tails and
/// non-periodic Doppler phases leave a residual.
pub fn apply_channel_with_cp(
    x: &TimeSignal,
    chan: &ChannelRealization,
    pulse: &PulseSpec,
    grid: &DDGrid,
    cp_len: usize,
) -> Result<TimeSignal> {
    let n = grid.len();
    let tx = x.with_cyclic_prefix(cp_len)?;
    let w = pulse.half_width_taps as f64;
    let mut y = vec![C64::default(); n];
    for p in chan.paths() {
        let h = p.effective_gain(grid);
        let (delay, doppler) = (p.delay_bins(), p.doppler_bins());
        for (m, out) in y.iter_mut().enumerate() {
            let t_rx = (m + cp_len) as f64;
            for (idx, &s) in tx.samples().iter().enumerate() {
                let lag = t_rx - idx as f64 - delay;
                if lag.abs() > w {
                    continue;
                }
                let t_tx = idx as f64 - cp_len as f64;
                let phase = C64::from_polar(1.0, 2.0 * PI * doppler * t_tx / n as f64);
                *out += h * s * phase * pulse.autocorr_bins(lag);
            }
        }
    }
    Ok(TimeSignal::new(y))
}

/// Adds circularly-symmetric white Gaussian noise of variance `n0` per sample.
pub fn add_noise(y: &TimeSignal, n0: f64, rng: &mut RngStream) -> Result<TimeSignal> {
    if !(n0.is_finite() && n0 >= 0.0) {
        return Err(Error::validation("n0", format!("noise variance {n0} must be nonnegative")));
    }
    if n0 == 0.0 {
        return Ok(y.clone());
    }
    let noisy = y
        .body()
        .iter()
        .map(|v| v + rng.complex_gaussian(n0))
        .collect();
    Ok(TimeSignal::new(noisy))
}

pub(crate) fn noise_vector(len: usize, n0: f64, rng: &mut RngStream) -> Vec<C64> {
    (0..len).map(|_| rng.complex_gaussian(n0)).collect()
}

/// `N x N` operator `G_T` with `y = x G_T`:
/// `G_T[n, m] = sum_i h'_i e_i[n] g_i[(m - n) mod N]`.
pub fn build_time_operator(chan: &ChannelRealization, pulse: &PulseSpec, grid: &DDGrid) -> Result<CMatrix> {
    let n = grid.len();
    let mut g = CMatrix::zeros(n, n);
    for resp in path_responses(chan, pulse, grid)? {
        accumulate_path_operator(&mut g, &resp, resp.gain);
    }
    Ok(g)
}

pub(crate) fn accumulate_path_operator(g: &mut CMatrix, resp: &PathResponse, gain: C64) {
    let n = g.nrows();
    for (row, &e) in resp.doppler.iter().enumerate() {
        let s = gain * e;
        for &(d, tap) in &resp.taps {
            g[(row, (row + d) % n)] += s * tap;
        }
    }
}

/// A deterministic channel geometry read from a profile file, with delays and
/// Dopplers in grid bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    pub paths: Vec<ProfilePath>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePath {
    pub delay_bins: f64,
    pub doppler_bins: f64,
    /// Fixed gain; `None` leaves the gain to the caller.
    pub gain: Option<C64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    path: Vec<ProfileEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    delay: f64,
    doppler: f64,
    gain: Option<[f64; 2]>,
}

impl ChannelProfile {
    /// Parses the profile format:
    ///
    /// ```toml
    /// [[path]]
    /// delay = 0.2      # bins of Ts
    /// doppler = -0.3   # bins of 1/(K L Ts)
    /// gain = [1.0, 0.0] # optional [re, im]
    /// ```
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            msg: e.to_string(),
        })?;
        if file.path.is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                msg: "profile lists no paths".into(),
            });
        }
        let paths = file
            .path
            .into_iter()
            .map(|e| ProfilePath {
                delay_bins: e.delay,
                doppler_bins: e.doppler,
                gain: e.gain.map(|[re, im]| C64::new(re, im)),
            })
            .collect::<Vec<_>>();
        for (i, p) in paths.iter().enumerate() {
            ChannelPath::from_bins(C64::new(1.0, 0.0), p.delay_bins, p.doppler_bins).map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                msg: format!("path[{i}]: {e}"),
            })?;
        }
        Ok(Self { paths })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn from_bins(delays: &[f64], dopplers: &[f64]) -> Self {
        assert_eq!(delays.len(), dopplers.len());
        Self {
            paths: delays
                .iter()
                .zip(dopplers)
                .map(|(&d, &v)| ProfilePath {
                    delay_bins: d,
                    doppler_bins: v,
                    gain: None,
                })
                .collect(),
        }
    }

    /// Realization with the profile's fixed gains, or `default_gain` where none is set.
    pub fn realization(&self, default_gain: C64) -> Result<ChannelRealization> {
        let paths = self
            .paths
            .iter()
            .map(|p| ChannelPath::from_bins(p.gain.unwrap_or(default_gain), p.delay_bins, p.doppler_bins))
            .collect::<Result<Vec<_>>>()?;
        ChannelRealization::new(paths)
    }

    /// Realization with caller-supplied gains, one per path.
    pub fn realization_with_gains(&self, gains: &[C64]) -> Result<ChannelRealization> {
        self.realization(C64::new(1.0, 0.0))?.with_gains(gains)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::derive_stream;
    use crate::linalg::{max_abs_diff, row_times};

    fn grid(k: usize, l: usize) -> DDGrid {
        DDGrid::new(k, l, 1.0).unwrap()
    }

    fn rc(gamma: f64, w: usize) -> PulseSpec {
        PulseSpec::raised_cosine(gamma, 1.0, w).unwrap()
    }

    fn random_signal(n: usize, rng: &mut RngStream) -> TimeSignal {
        TimeSignal::new((0..n).map(|_| rng.complex_gaussian(1.0)).collect())
    }

    fn single(gain: C64, delay: f64, doppler: f64) -> ChannelRealization {
        ChannelRealization::new(vec![ChannelPath::from_bins(gain, delay, doppler).unwrap()]).unwrap()
    }

    fn random_channel(g: &DDGrid, p: usize, integer: bool, rng: &mut RngStream) -> ChannelRealization {
        let paths = (0..p)
            .map(|_| {
                let mut d = rng.uniform_int(g.delay_bins() - 1) as f64;
                let mut v = rng.uniform_int(2 * g.doppler_bins()) as f64 - g.doppler_bins() as f64;
                if !integer {
                    d = (d + rng.uniform(0.0, 0.5)).min(g.len() as f64 - 1.0);
                    v += rng.uniform(-0.5, 0.5);
                }
                ChannelPath::from_bins(rng.complex_gaussian(1.0), d, v).unwrap()
            })
            .collect();
        ChannelRealization::new(paths).unwrap()
    }

    #[test]
    fn integer_delay_is_a_circular_shift() {
        let g = grid(4, 8);
        let mut rng = derive_stream(1, 0);
        let x = random_signal(32, &mut rng);
        let y = apply_channel_time(&x, &single(C64::new(1.0, 0.0), 3.0, 0.0), &rc(0.5, 64), &g).unwrap();
        for m in 0..32 {
            assert!((y.body()[m] - x.body()[(m + 32 - 3) % 32]).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_gains_give_zero_output() {
        let g = grid(4, 4);
        let mut rng = derive_stream(2, 0);
        let x = random_signal(16, &mut rng);
        let chan = random_channel(&g, 3, false, &mut rng)
            .with_gains(&[C64::default(); 3])
            .unwrap();
        let y = apply_channel_time(&x, &chan, &rc(0.0, 16), &g).unwrap();
        assert!(y.body().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn circular_model_matches_explicit_prefix_for_integer_geometry() {
        let g = grid(4, 4);
        let mut rng = derive_stream(3, 0);
        for _ in 0..20 {
            let x = random_signal(16, &mut rng);
            let chan = random_channel(&g, 3, true, &mut rng);
            let cp = chan.max_delay_bins().ceil() as usize;
            for pulse in [rc(0.5, 16), rc(0.0, 16)] {
                let a = apply_channel_time(&x, &chan, &pulse, &g).unwrap();
                let b = apply_channel_with_cp(&x, &chan, &pulse, &g, cp).unwrap();
                assert!(max_abs_diff(a.body(), b.body()) < 1e-9);
            }
        }
    }

    #[test]
    fn time_operator_reproduces_sample_path() {
        let g = grid(4, 4);
        let mut rng = derive_stream(4, 0);
        let mut worst: f64 = 0.0;
        for trial in 0..100 {
            let x = random_signal(16, &mut rng);
            let chan = random_channel(&g, 1 + trial % 4, trial % 2 == 0, &mut rng);
            let pulse = rc(if trial % 3 == 0 { 0.0 } else { 0.5 }, 16);
            let op = build_time_operator(&chan, &pulse, &g).unwrap();
            let a = row_times(x.body(), &op);
            let b = apply_channel_time(&x, &chan, &pulse, &g).unwrap();
            worst = worst.max(max_abs_diff(&a, b.body()));
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn identity_channel_operator() {
        let g = grid(3, 5);
        let op = build_time_operator(&single(C64::new(1.0, 0.0), 0.0, 0.0), &rc(0.5, 16), &g).unwrap();
        assert!(crate::linalg::max_abs_diff_matrix(&op, &CMatrix::identity(15, 15)) < 1e-15);
    }

    #[test]
    fn pure_doppler_operator_is_unit_diagonal() {
        let g = grid(4, 4);
        let op = build_time_operator(&single(C64::new(1.0, 0.0), 0.0, 3.0), &rc(0.5, 16), &g).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if i == j {
                    assert!((op[(i, j)].norm() - 1.0).abs() < 1e-14);
                } else {
                    assert!(op[(i, j)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_doppler_channels_commute_with_shifts() {
        let g = grid(4, 4);
        let mut rng = derive_stream(5, 0);
        let x = random_signal(16, &mut rng);
        let paths = (0..3)
            .map(|_| ChannelPath::from_bins(rng.complex_gaussian(1.0), rng.uniform(0.0, 3.0), 0.0).unwrap())
            .collect();
        let chan = ChannelRealization::new(paths).unwrap();
        let pulse = rc(0.3, 16);
        let y = apply_channel_time(&x, &chan, &pulse, &g).unwrap();
        let s = 5;
        let shifted = TimeSignal::new((0..16).map(|n| x.body()[(n + 16 - s) % 16]).collect());
        let ys = apply_channel_time(&shifted, &chan, &pulse, &g).unwrap();
        for n in 0..16 {
            assert!((ys.body()[n] - y.body()[(n + 16 - s) % 16]).norm() < 1e-12);
        }
    }

    #[test]
    fn linear_in_signal_and_gains() {
        let g = grid(4, 4);
        let mut rng = derive_stream(6, 0);
        let pulse = rc(0.2, 16);
        let x1 = random_signal(16, &mut rng);
        let x2 = random_signal(16, &mut rng);
        let chan = random_channel(&g, 3, false, &mut rng);
        let a = C64::new(0.3, -1.2);
        let mix = TimeSignal::new(x1.body().iter().zip(x2.body()).map(|(u, v)| u + a * v).collect());
        let y1 = apply_channel_time(&x1, &chan, &pulse, &g).unwrap();
        let y2 = apply_channel_time(&x2, &chan, &pulse, &g).unwrap();
        let ym = apply_channel_time(&mix, &chan, &pulse, &g).unwrap();
        let want: Vec<C64> = y1.body().iter().zip(y2.body()).map(|(u, v)| u + a * v).collect();
        assert!(max_abs_diff(ym.body(), &want) < 1e-12);

        let gains: Vec<C64> = chan.paths().iter().map(|p| p.gain * a).collect();
        let ys = apply_channel_time(&x1, &chan.with_gains(&gains).unwrap(), &pulse, &g).unwrap();
        let want: Vec<C64> = y1.body().iter().map(|v| v * a).collect();
        assert!(max_abs_diff(ys.body(), &want) < 1e-12);
    }

    #[test]
    fn operator_energy_matches_path_power_for_distinct_integer_delays() {
        let g = grid(8, 8);
        let mut rng = derive_stream(7, 0);
        let paths = [(0.0, 2.0), (1.0, -3.0), (3.0, 0.0), (5.0, 7.0)]
            .iter()
            .map(|&(d, v)| ChannelPath::from_bins(rng.complex_gaussian(1.0), d, v).unwrap())
            .collect();
        let chan = ChannelRealization::new(paths).unwrap();
        let op = build_time_operator(&chan, &rc(0.5, 16), &g).unwrap();
        let fro = op.iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        let total: f64 = chan.paths().iter().map(|p| p.gain.norm_sqr()).sum();
        assert!((fro - total).abs() < 1e-9 * total);
    }

    #[test]
    fn generation_respects_limits() {
        let g = DDGrid::from_bandwidth(16, 16, 60e3).unwrap();
        let mut rng = derive_stream(8, 0);
        let still = ChannelStats::new(4, 8.0 / 60e3, 0.0, true).unwrap();
        for _ in 0..200 {
            let c = generate_channel(&still, &g, &mut rng).unwrap();
            assert!(c.paths().iter().all(|p| p.doppler_bins() == 0.0));
            assert!(c.paths().iter().all(|p| p.delay_bins() >= 0.0 && p.delay_int <= 8));
        }
        let flat = ChannelStats::new(4, 0.0, 937.0, false).unwrap();
        for _ in 0..200 {
            let c = generate_channel(&flat, &g, &mut rng).unwrap();
            assert!(c.paths().iter().all(|p| p.delay_int == 0 && p.delay_frac == 0.0));
            assert!(c.paths().iter().all(|p| p.doppler_frac == 0.0));
        }
        let too_long = ChannelStats::new(4, 16.0 / 60e3, 0.0, true).unwrap();
        assert!(matches!(
            generate_channel(&too_long, &g, &mut rng),
            Err(Error::DelayExceedsFrame { .. })
        ));
    }

    #[test]
    fn gain_power_and_doppler_law() {
        let g = DDGrid::from_bandwidth(16, 16, 60e3).unwrap();
        let stats = ChannelStats::new(4, 2.0 / 60e3, 1000.0, true).unwrap();
        let mut rng = derive_stream(9, 0);
        let draws = 25_000;
        let mut power = 0.0;
        let mut count = 0usize;
        let bins = 10;
        let mut hist = vec![0usize; bins];
        for _ in 0..draws {
            for p in generate_channel(&stats, &g, &mut rng).unwrap().paths() {
                power += p.gain.norm_sqr();
                count += 1;
                let u = (p.doppler_hz(&g) / 1000.0).clamp(-1.0, 1.0 - 1e-12);
                hist[((u + 1.0) / 2.0 * bins as f64) as usize] += 1;
            }
        }
        let mean = power / count as f64;
        assert!((mean - 0.25).abs() < 0.02 * 0.25, "E|h|^2 = {mean}");
        // Arcsine law: P(a < nu/nu_max < b) = (asin b - asin a) / pi.
        for (i, &c) in hist.iter().enumerate() {
            let a = -1.0 + 2.0 * i as f64 / bins as f64;
            let b = a + 2.0 / bins as f64;
            let want = (b.asin() - a.asin()) / PI;
            let got = c as f64 / count as f64;
            let sigma = (want * (1.0 - want) / count as f64).sqrt();
            assert!((got - want).abs() < 5.0 * sigma, "bin {i}: {got} vs {want}");
        }
    }

    #[test]
    fn noise_moments() {
        let mut rng = derive_stream(10, 0);
        let n0 = 0.37;
        let y = add_noise(&TimeSignal::zeros(1_000_000), n0, &mut rng).unwrap();
        let n = y.body().len() as f64;
        let var = y.body().iter().map(|v| v.norm_sqr()).sum::<f64>() / n;
        let re = y.body().iter().map(|v| v.re * v.re).sum::<f64>() / n;
        let im = y.body().iter().map(|v| v.im * v.im).sum::<f64>() / n;
        let cross = y.body().iter().map(|v| v.re * v.im).sum::<f64>() / n;
        assert!((var - n0).abs() < 0.01 * n0);
        assert!((re - n0 / 2.0).abs() < 0.01 * n0);
        assert!((im - n0 / 2.0).abs() < 0.01 * n0);
        assert!(cross.abs() < 0.01 * n0);

        let x = random_signal(8, &mut rng);
        assert_eq!(add_noise(&x, 0.0, &mut rng).unwrap(), x);
    }

    #[test]
    fn prefix_length() {
        let g = DDGrid::from_bandwidth(16, 16, 60e3).unwrap();
        assert_eq!(cp_len_for(8.0 / 60e3, &g), 8);
        assert_eq!(cp_len_for(8.2 / 60e3, &g), 9);
        assert_eq!(cp_len_for(0.0, &g), 0);
    }

    #[test]
    fn profile_file_round_trip() {
        let text = "[[path]]\ndelay = 0.2\ndoppler = -0.3\n\n[[path]]\ndelay = 1.4\ndoppler = 1.4\ngain = [0.5, -0.5]\n";
        let prof = ChannelProfile::parse(text, Path::new("mem")).unwrap();
        assert_eq!(prof.paths.len(), 2);
        assert_eq!(prof.paths[1].gain, Some(C64::new(0.5, -0.5)));
        let chan = prof.realization(C64::new(1.0, 0.0)).unwrap();
        assert_eq!(chan.paths()[0].gain, C64::new(1.0, 0.0));
        assert!((chan.paths()[1].delay_bins() - 1.4).abs() < 1e-12);

        assert!(ChannelProfile::parse("[[path]]\ndelay = 1\n", Path::new("mem")).is_err());
        assert!(ChannelProfile::parse("[[path]]\ndelay = 1.0\ndoppler = 0.0\nspeed = 3\n", Path::new("mem")).is_err());
        assert!(ChannelProfile::parse("[[path]]\ndelay = -1.0\ndoppler = 0.0\n", Path::new("mem")).is_err());
    }
}
