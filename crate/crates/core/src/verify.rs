//! Self-checks run by the `verify` subcommand. Each check draws its own
//! random instances from a fixed stream, so a report is reproducible.

use crate::baselines::{
    ofdm_effective_channel, ofdm_transmit_receive_samplewise, two_step_demodulate, two_step_effective_channel,
    two_step_modulate, two_step_pulse,
};
use crate::channel::{apply_channel_time, noise_vector};
use crate::ddmatrix::{build_effective_channel, effective_channel_oracle};
use crate::domain::{derive_stream, C64, ChannelPath, ChannelRealization, DDFrame, DDGrid, RngStream};
use crate::error::Result;
use crate::linalg::{max_abs_diff, max_abs_diff_matrix, row_times};
use crate::pulse::PulseSpec;
use crate::transforms::ZakTransform;

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    /// Largest observed deviation, in the units the check compares.
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error.is_finite() && self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

fn random_frame(grid: DDGrid, rng: &mut RngStream) -> DDFrame {
    DDFrame::from_fn(grid, |_, _| rng.complex_gaussian(1.0))
}

fn random_channel(grid: &DDGrid, paths: usize, fractional: bool, rng: &mut RngStream) -> Result<ChannelRealization> {
    let (k, l) = (grid.doppler_bins() as f64, grid.delay_bins() as f64);
    let paths = (0..paths)
        .map(|_| {
            let mut delay = rng.uniform_int(grid.delay_bins() - 1) as f64;
            let mut doppler = rng.uniform_int(grid.doppler_bins() - 1) as f64 - (k / 2.0).floor();
            if fractional {
                delay = (delay + rng.uniform(0.0, 1.0)).min(l - 1.0);
                doppler += rng.uniform(-0.5, 0.5);
            }
            ChannelPath::from_bins(rng.complex_gaussian(1.0 / paths as f64), delay, doppler)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelRealization::new(paths)
}

fn zak_round_trip(seed: u64) -> CheckResult {
    let mut rng = derive_stream(seed, 1);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, l) in [(1, 7), (2, 2), (4, 8), (16, 16), (64, 64), (32, 128)] {
        let grid = DDGrid::new(k, l, 1.0).expect("valid grid");
        let zak = ZakTransform::new(grid);
        for _ in 0..3 {
            let x = random_frame(grid, &mut rng);
            let t = zak.idzt_vec(x.as_flat());
            let back = zak.dzt_vec(&t);
            worst = worst.max(max_abs_diff(&back, x.as_flat()));
            let t2: Vec<C64> = (0..grid.len()).map(|_| rng.complex_gaussian(1.0)).collect();
            worst = worst.max(max_abs_diff(&zak.idzt_vec(&zak.dzt_vec(&t2)), &t2));
            let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max((norm(&t) - x.norm()).abs() / x.norm());
            count += 1;
        }
    }
    CheckResult {
        name: "zak_round_trip",
        instances: count,
        max_error: worst,
        tolerance: 1e-12,
    }
}

/// Effective channel against both the transform-conjugated time operator and
/// a direct pass through the sample-level channel.
fn effective_channel(seed: u64) -> CheckResult {
    let mut rng = derive_stream(seed, 2);
    let mut worst = 0.0f64;
    let mut count = 0;
    for size in [2, 4, 8] {
        let grid = DDGrid::new(size, size, 1.0).expect("valid grid");
        let zak = ZakTransform::new(grid);
        for gamma in [0.0, 0.5] {
            let pulse = PulseSpec::raised_cosine(gamma, 1.0, 16).expect("valid pulse");
            for fractional in [false, true] {
                for _ in 0..4 {
                    let chan = random_channel(&grid, 3, fractional, &mut rng).expect("valid channel");
                    let h = build_effective_channel(&chan, &pulse, &grid).expect("channel builds");
                    let oracle = effective_channel_oracle(&chan, &pulse, &grid).expect("oracle builds");
                    worst = worst.max(max_abs_diff_matrix(h.matrix(), oracle.matrix()));
                    let x = random_frame(grid, &mut rng);
                    let y = apply_channel_time(&zak.idzt(&x), &chan, &pulse, &grid).expect("channel applies");
                    let got = zak.dzt(&y).expect("sizes match");
                    worst = worst.max(max_abs_diff(got.as_flat(), &h.apply(x.as_flat())));
                    count += 1;
                }
            }
        }
    }
    CheckResult {
        name: "effective_channel",
        instances: count,
        max_error: worst,
        tolerance: 1e-9,
    }
}

fn two_step_channel(seed: u64) -> CheckResult {
    let mut rng = derive_stream(seed, 3);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, l) in [(4, 4), (8, 4), (8, 8)] {
        let grid = DDGrid::new(k, l, 1.0).expect("valid grid");
        for fractional in [false, true] {
            for _ in 0..5 {
                let chan = random_channel(&grid, 3, fractional, &mut rng).expect("valid channel");
                let h = two_step_effective_channel(&chan, &grid).expect("channel builds");
                let x = random_frame(grid, &mut rng);
                let t = two_step_modulate(&x);
                let y = apply_channel_time(&t, &chan, &two_step_pulse(&grid), &grid).expect("channel applies");
                let got = two_step_demodulate(&y, &grid).expect("sizes match");
                worst = worst.max(max_abs_diff(got.as_flat(), &h.apply(x.as_flat())));
                count += 1;
            }
        }
    }
    CheckResult {
        name: "two_step_channel",
        instances: count,
        max_error: worst,
        tolerance: 1e-9,
    }
}

/// Per-symbol OFDM matrices against the prefixed sample stream. The stream
/// model keeps inter-symbol tails, so the comparison uses integer delays that
/// fit in the prefix and a pulse window no wider than it.
fn ofdm_channel(seed: u64) -> CheckResult {
    let mut rng = derive_stream(seed, 4);
    let mut worst = 0.0f64;
    let mut count = 0;
    let grid = DDGrid::new(4, 8, 1.0).expect("valid grid");
    let cp = 4;
    for gamma in [0.0, 0.5] {
        let pulse = PulseSpec {
            half_width_taps: cp,
            ..PulseSpec::raised_cosine(gamma, 1.0, cp).expect("valid pulse")
        };
        for _ in 0..5 {
            let paths = (0..3)
                .map(|_| {
                    let d = rng.uniform_int(cp) as f64;
                    let v = rng.uniform(-2.0, 2.0);
                    ChannelPath::from_bins(rng.complex_gaussian(1.0 / 3.0), d, v)
                })
                .collect::<Result<Vec<_>>>()
                .expect("valid paths");
            let chan = ChannelRealization::new(paths).expect("valid channel");
            let hf = ofdm_effective_channel(&chan, &pulse, &grid, cp).expect("channel builds");
            let x: Vec<C64> = (0..grid.len()).map(|_| rng.complex_gaussian(1.0)).collect();
            let l = grid.delay_bins();
            let want: Vec<C64> = (0..grid.doppler_bins())
                .flat_map(|s| row_times(&x[s * l..(s + 1) * l], &hf[s]))
                .collect();
            let got = ofdm_transmit_receive_samplewise(&x, &chan, &pulse, &grid, cp).expect("stream runs");
            worst = worst.max(max_abs_diff(&got, &want));
            count += 1;
        }
    }
    CheckResult {
        name: "ofdm_channel",
        instances: count,
        max_error: worst,
        tolerance: 1e-9,
    }
}

/// Sample mean, per-component variance and pseudo-variance of the noise, in
/// units of their standard errors. The tolerance is five of those.
fn noise_statistics(seed: u64) -> CheckResult {
    let mut rng = derive_stream(seed, 5);
    let n0 = 0.37;
    let n = 200_000;
    let v = noise_vector(n, n0, &mut rng);
    let nf = n as f64;
    let mean: C64 = v.iter().sum::<C64>() / nf;
    let power = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / nf;
    let pseudo: C64 = v.iter().map(|z| z * z).sum::<C64>() / nf;
    // Standard errors for CN(0, n0): mean components n0/2, power n0, pseudo n0.
    let se_mean = (n0 / 2.0 / nf).sqrt();
    let se_power = n0 / nf.sqrt();
    let se_pseudo = n0 / (2.0 * nf).sqrt();
    let z = [
        mean.re.abs() / se_mean,
        mean.im.abs() / se_mean,
        (power - n0).abs() / se_power,
        pseudo.norm() / se_pseudo,
    ];
    CheckResult {
        name: "noise_statistics",
        instances: n,
        max_error: z.into_iter().fold(0.0, f64::max),
        tolerance: 5.0,
    }
}

/// Streams rebuilt from the same seed and id repeat exactly; distinct ids
/// do not collide. The error is the number of violations.
fn rng_determinism(seed: u64) -> CheckResult {
    let draw = |id: u64| {
        let mut r = derive_stream(seed, id);
        (0..64).map(|_| r.complex_gaussian(1.0)).collect::<Vec<_>>()
    };
    let mut violations = 0usize;
    for id in 0..32 {
        if draw(id) != draw(id) {
            violations += 1;
        }
        if id > 0 && draw(id) == draw(id - 1) {
            violations += 1;
        }
    }
    let mut other = derive_stream(seed.wrapping_add(1), 0);
    if draw(0)[0] == other.complex_gaussian(1.0) {
        violations += 1;
    }
    CheckResult {
        name: "rng_determinism",
        instances: 32,
        max_error: violations as f64,
        tolerance: 0.0,
    }
}

/// Runs every check with instances drawn from `seed`.
pub fn run_verification(seed: u64) -> VerifyReport {
    VerifyReport {
        checks: vec![
            zak_round_trip(seed),
            effective_channel(seed),
            two_step_channel(seed),
            ofdm_channel(seed),
            noise_statistics(seed),
            rng_determinism(seed),
        ],
    }
}
