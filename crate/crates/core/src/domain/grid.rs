use std::f64::consts::PI;

use super::C64;
use crate::error::{Error, Result};

/// Uniform `K x L` delay-Doppler grid.
///
/// `K` counts Doppler bins, `L` counts delay bins. The delay resolution is one
/// sample period `Ts = 1/B` and the Doppler resolution is `1/(K L Ts)`, so the
/// resolution product times `N = K L` is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DDGrid {
    doppler_bins: usize,
    delay_bins: usize,
    symbol_period: f64,
}

impl DDGrid {
    pub fn new(doppler_bins: usize, delay_bins: usize, symbol_period: f64) -> Result<Self> {
        if doppler_bins == 0 || delay_bins == 0 {
            return Err(Error::InvalidGrid(format!(
                "bin counts must be positive (K={doppler_bins}, L={delay_bins})"
            )));
        }
        if !(symbol_period.is_finite() && symbol_period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "symbol period must be positive, got {symbol_period}"
            )));
        }
        Ok(Self {
            doppler_bins,
            delay_bins,
            symbol_period,
        })
    }

    pub fn from_bandwidth(doppler_bins: usize, delay_bins: usize, bandwidth_hz: f64) -> Result<Self> {
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "bandwidth must be positive, got {bandwidth_hz}"
            )));
        }
        Self::new(doppler_bins, delay_bins, 1.0 / bandwidth_hz)
    }

    /// `K`
    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    /// `L`
    pub fn delay_bins(&self) -> usize {
        self.delay_bins
    }

    /// `N = K L`
    pub fn len(&self) -> usize {
        self.doppler_bins * self.delay_bins
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbol_period(&self) -> f64 {
        self.symbol_period
    }

    pub fn bandwidth(&self) -> f64 {
        1.0 / self.symbol_period
    }

    pub fn delay_resolution(&self) -> f64 {
        self.symbol_period
    }

    pub fn doppler_resolution(&self) -> f64 {
        1.0 / (self.len() as f64 * self.symbol_period)
    }

    pub fn flat_index(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < self.doppler_bins && l < self.delay_bins);
        k + self.doppler_bins * l
    }

    pub fn unflat_index(&self, q: usize) -> (usize, usize) {
        debug_assert!(q < self.len());
        (q % self.doppler_bins, q / self.doppler_bins)
    }
}

/// Symbols (or any complex values) on a delay-Doppler grid. Stored flat in
/// vectorization order, so `flatten` is a copy.
#[derive(Debug, Clone, PartialEq)]
pub struct DDFrame {
    grid: DDGrid,
    values: Vec<C64>,
}

impl DDFrame {
    pub fn zeros(grid: DDGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: DDGrid, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let values = (0..grid.len())
            .map(|q| {
                let (k, l) = grid.unflat_index(q);
                f(k, l)
            })
            .collect();
        Self { grid, values }
    }

    /// Inverse of [`DDFrame::flatten`].
    pub fn unflatten(grid: DDGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &DDGrid {
        &self.grid
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.values[self.grid.flat_index(k, l)]
    }

    pub fn set(&mut self, k: usize, l: usize, v: C64) {
        let q = self.grid.flat_index(k, l);
        self.values[q] = v;
    }

    /// Row vector with `out[k + K l] = Z[k, l]`.
    pub fn flatten(&self) -> Vec<C64> {
        self.values.clone()
    }

    pub fn as_flat(&self) -> &[C64] {
        &self.values
    }

    pub fn into_flat(self) -> Vec<C64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }
}

/// A sampled time-domain frame, optionally carrying a cyclic prefix in front
/// of the `N`-sample body.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<C64>,
    cp_len: usize,
}

impl TimeSignal {
    pub fn new(samples: Vec<C64>) -> Self {
        Self { samples, cp_len: 0 }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); len])
    }

    /// Prepends the last `cp_len` body samples. Fails if the signal already
    /// has a prefix or the prefix would be longer than the body.
    pub fn with_cyclic_prefix(&self, cp_len: usize) -> Result<Self> {
        if self.cp_len != 0 {
            return Err(Error::validation("cp_len", "signal already carries a cyclic prefix"));
        }
        let n = self.samples.len();
        if cp_len > n {
            return Err(Error::validation(
                "cp_len",
                format!("prefix of {cp_len} samples exceeds body of {n}"),
            ));
        }
        let mut samples = Vec::with_capacity(n + cp_len);
        samples.extend_from_slice(&self.samples[n - cp_len..]);
        samples.extend_from_slice(&self.samples);
        Ok(Self { samples, cp_len })
    }

    pub fn strip_cyclic_prefix(&self) -> Self {
        Self::new(self.body().to_vec())
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    /// All samples including any prefix.
    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn body(&self) -> &[C64] {
        &self.samples[self.cp_len..]
    }

    pub fn body_len(&self) -> usize {
        self.samples.len() - self.cp_len
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    pub fn norm(&self) -> f64 {
        l2_norm(self.body())
    }
}

pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{j 2 pi x}`
pub(crate) fn cis_turns(x: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * x)
}
