use super::grid::cis_turns;
use super::{DDGrid, C64};
use crate::error::{Error, Result};

/// One resolvable propagation path.
///
/// Delay and Doppler are stored in grid bins, split into an integer part and a
/// fractional part in `[-0.5, 0.5]`. The physical values follow from the grid:
/// `tau = (delay_int + delay_frac) Ts`, `nu = (doppler_int + doppler_frac) / (K L Ts)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub gain: C64,
    pub delay_int: usize,
    pub delay_frac: f64,
    pub doppler_int: i64,
    pub doppler_frac: f64,
}

impl ChannelPath {
    pub fn new(
        gain: C64,
        delay_int: usize,
        delay_frac: f64,
        doppler_int: i64,
        doppler_frac: f64,
    ) -> Result<Self> {
        let path = Self {
            gain,
            delay_int,
            delay_frac,
            doppler_int,
            doppler_frac,
        };
        path.validate()?;
        Ok(path)
    }

    /// Splits real-valued bin offsets with round-to-nearest.
    pub fn from_bins(gain: C64, delay_bins: f64, doppler_bins: f64) -> Result<Self> {
        if !(delay_bins.is_finite() && delay_bins >= 0.0) {
            return Err(Error::InvalidPath(format!(
                "delay must be a nonnegative number of bins, got {delay_bins}"
            )));
        }
        if !doppler_bins.is_finite() {
            return Err(Error::InvalidPath(format!("doppler {doppler_bins} is not finite")));
        }
        let delay_int = delay_bins.round();
        let doppler_int = doppler_bins.round();
        Self::new(
            gain,
            delay_int as usize,
            delay_bins - delay_int,
            doppler_int as i64,
            doppler_bins - doppler_int,
        )
    }

    fn validate(&self) -> Result<()> {
        let frac_ok = |v: f64| v.is_finite() && (-0.5..=0.5).contains(&v);
        if !frac_ok(self.delay_frac) || !frac_ok(self.doppler_frac) {
            return Err(Error::InvalidPath(format!(
                "fractional parts must lie in [-0.5, 0.5] (delay {}, doppler {})",
                self.delay_frac, self.doppler_frac
            )));
        }
        if self.delay_bins() < 0.0 {
            return Err(Error::InvalidPath(format!(
                "negative delay {} bins",
                self.delay_bins()
            )));
        }
        if !(self.gain.re.is_finite() && self.gain.im.is_finite()) {
            return Err(Error::InvalidPath("gain is not finite".into()));
        }
        Ok(())
    }

    /// `l_i = alpha_i + a_i`
    pub fn delay_bins(&self) -> f64 {
        self.delay_int as f64 + self.delay_frac
    }

    /// `k_i = beta_i + b_i`
    pub fn doppler_bins(&self) -> f64 {
        self.doppler_int as f64 + self.doppler_frac
    }

    pub fn delay_seconds(&self, grid: &DDGrid) -> f64 {
        self.delay_bins() * grid.delay_resolution()
    }

    pub fn doppler_hz(&self, grid: &DDGrid) -> f64 {
        self.doppler_bins() * grid.doppler_resolution()
    }

    /// `h'_i = h_i e^{j 2 pi tau_i nu_i}`; in bins this is `e^{j 2 pi l_i k_i / N}`.
    pub fn effective_gain(&self, grid: &DDGrid) -> C64 {
        self.gain * cis_turns(self.delay_bins() * self.doppler_bins() / grid.len() as f64)
    }

    pub fn with_gain(mut self, gain: C64) -> Self {
        self.gain = gain;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    paths: Vec<ChannelPath>,
}

impl ChannelRealization {
    pub fn new(paths: Vec<ChannelPath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidPath("a channel needs at least one path".into()));
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[ChannelPath] {
        &self.paths
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn max_delay_bins(&self) -> f64 {
        self.paths.iter().map(|p| p.delay_bins()).fold(0.0, f64::max)
    }

    pub fn max_abs_doppler_bins(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| p.doppler_bins().abs())
            .fold(0.0, f64::max)
    }

    /// True when some Doppler lies outside the unambiguous span `[-K/2, K/2)`
    /// of the Doppler axis and therefore wraps around it.
    pub fn doppler_aliases(&self, grid: &DDGrid) -> bool {
        self.max_abs_doppler_bins() >= grid.doppler_bins() as f64 / 2.0
    }

    /// Same geometry, gains replaced in order.
    pub fn with_gains(&self, gains: &[C64]) -> Result<Self> {
        if gains.len() != self.paths.len() {
            return Err(Error::LengthMismatch {
                expected: self.paths.len(),
                actual: gains.len(),
            });
        }
        Ok(Self {
            paths: self
                .paths
                .iter()
                .zip(gains)
                .map(|(p, &g)| p.with_gain(g))
                .collect(),
        })
    }
}
