//! Composite (transmit-matched-filter) pulse `g(t)` and the sampled delay and
//! Doppler sequences that describe one path in the discrete model.

use std::f64::consts::PI;

use crate::domain::{cis_turns, C64};
use crate::error::{Error, Result};

/// Default truncation half-width in taps.
pub const DEFAULT_HALF_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Raised-cosine autocorrelation with roll-off in `[0, 1]`.
    RaisedCosine { rolloff: f64 },
    /// Autocorrelation of a one-sample rectangular pulse: a unit triangle.
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub symbol_period: f64,
    /// `g` is treated as zero beyond `half_width_taps` sample periods.
    pub half_width_taps: usize,
}

impl PulseSpec {
    pub fn raised_cosine(rolloff: f64, symbol_period: f64, half_width_taps: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::validation("pulse.rolloff", format!("{rolloff} is outside [0, 1]")));
        }
        Self::checked(PulseShape::RaisedCosine { rolloff }, symbol_period, half_width_taps)
    }

    pub fn rectangular(symbol_period: f64) -> Result<Self> {
        Self::checked(PulseShape::Rectangular, symbol_period, 1)
    }

    fn checked(shape: PulseShape, symbol_period: f64, half_width_taps: usize) -> Result<Self> {
        if !(symbol_period.is_finite() && symbol_period > 0.0) {
            return Err(Error::validation("pulse.symbol_period", "must be positive"));
        }
        if half_width_taps == 0 {
            return Err(Error::validation("pulse.half_width_taps", "must be at least 1"));
        }
        Ok(Self {
            shape,
            symbol_period,
            half_width_taps,
        })
    }

    pub fn rolloff(&self) -> Option<f64> {
        match self.shape {
            PulseShape::RaisedCosine { rolloff } => Some(rolloff),
            PulseShape::Rectangular => None,
        }
    }

    /// `g(t)` with `t` in seconds, zero outside the truncation window.
    pub fn autocorr(&self, t: f64) -> f64 {
        self.autocorr_bins(t / self.symbol_period)
    }

    /// `g(u Ts)` with `u` measured in sample periods.
    pub fn autocorr_bins(&self, u: f64) -> f64 {
        if u.abs() > self.half_width_taps as f64 {
            return 0.0;
        }
        match self.shape {
            PulseShape::RaisedCosine { rolloff } => raised_cosine(u, rolloff),
            PulseShape::Rectangular => (1.0 - u.abs()).max(0.0),
        }
    }
}

/// `g(t)` for a raised-cosine composite pulse; see [`PulseSpec::autocorr`].
pub fn rc_autocorr(t: f64, spec: &PulseSpec) -> f64 {
    spec.autocorr(t)
}

/// Below this distance from `|u| = 1/(2 gamma)` the closed-form limit is used.
/// The direct quotient loses about `1e-16 / d` relative accuracy there while
/// the limit is off by `O(d)`, so both stay near `1e-8`.
const SINGULAR_BAND: f64 = 1e-8;

fn raised_cosine(u: f64, rolloff: f64) -> f64 {
    let u = u.abs();
    if u == 0.0 {
        return 1.0;
    }
    let sinc = sin_pi(u) / (PI * u);
    if rolloff == 0.0 {
        return sinc;
    }
    let edge = 1.0 - 2.0 * rolloff * u.abs();
    if edge.abs() < SINGULAR_BAND {
        // cos(pi gamma u) and 1 - (2 gamma u)^2 vanish together; their ratio
        // tends to pi/4.
        let u0 = 1.0 / (2.0 * rolloff);
        return PI / 4.0 * sin_pi(u0) / (PI * u0);
    }
    sinc * cos_pi(rolloff * u) / (1.0 - (2.0 * rolloff * u).powi(2))
}

/// `sin(pi x)`, exactly zero at integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let s = (PI * (x - n)).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// `cos(pi x)`, exactly zero at half-integers.
pub(crate) fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Samples `g_i[n] = g((n - l_i) Ts)` over one period of length `n_len`.
///
/// Indices are circular: every alias `n - l_i + j n_len` inside the truncation
/// window contributes, which is what an `n_len`-point circular convolution with
/// the truncated pulse requires.
pub fn sample_delay_sequence(delay_bins: f64, n_len: usize, spec: &PulseSpec) -> Result<Vec<f64>> {
    if !(delay_bins.is_finite() && delay_bins >= 0.0) {
        return Err(Error::InvalidPath(format!("negative delay {delay_bins}")));
    }
    if delay_bins >= n_len as f64 {
        return Err(Error::DelayExceedsFrame {
            delay: delay_bins,
            limit: n_len,
        });
    }
    let w = spec.half_width_taps as f64;
    let period = n_len as f64;
    Ok((0..n_len)
        .map(|n| {
            let base = n as f64 - delay_bins;
            let first = ((-w - base) / period).ceil() as i64;
            let last = ((w - base) / period).floor() as i64;
            (first..=last)
                .map(|j| spec.autocorr_bins(base + j as f64 * period))
                .sum()
        })
        .collect())
}

/// `e_i[n] = e^{j 2 pi k_i n / N}` for `n < N`.
pub fn doppler_sequence(doppler_bins: f64, n_len: usize) -> Vec<C64> {
    let n_total = n_len as f64;
    (0..n_len)
        .map(|n| cis_turns(doppler_bins * n as f64 / n_total))
        .collect()
}
