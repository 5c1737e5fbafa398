//! Two-step OTFS and CP-OFDM reference links, and the shared per-trial
//! pipeline that runs any scheme over the same channel and noise samples.
//!
//! Two-step OTFS here is ISFFT followed by a rectangular-window Heisenberg
//! transform without per-slot prefixes, and its channel uses the triangular
//! autocorrelation of a one-sample rectangular pulse. OFDM sends `K` symbols
//! of `L` subcarriers, each with its own prefix, and the receiver equalizes
//! each symbol with the full `L x L` inter-carrier matrix.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::channel::{build_time_operator, noise_vector};
use crate::ddmatrix::{idzt_matrix, EffectiveChannel};
use crate::detect::{ml_detect_index, Alphabet, Detector};
use crate::domain::{cis_turns, ChannelRealization, DDFrame, DDGrid, RngStream, TimeSignal, C64};
use crate::error::{Error, Result};
use crate::linalg::{mmse_row, row_times, CMatrix};
use crate::transforms::{SymplecticTransform, ZakTransform};
use crate::pulse::PulseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    DztOtfs,
    TwoStepOtfs,
    Ofdm,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::DztOtfs, SchemeId::TwoStepOtfs, SchemeId::Ofdm];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::DztOtfs => "dzt",
            SchemeId::TwoStepOtfs => "twostep",
            SchemeId::Ofdm => "ofdm",
        }
    }

    /// Parses one scheme name or `all`.
    pub fn parse_list(name: &str) -> Result<Vec<SchemeId>> {
        if name.eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        Ok(vec![name.parse()?])
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dzt" | "dzt-otfs" => Ok(SchemeId::DztOtfs),
            "twostep" | "two-step" => Ok(SchemeId::TwoStepOtfs),
            "ofdm" => Ok(SchemeId::Ofdm),
            other => Err(Error::validation(
                "scheme",
                format!("unknown scheme `{other}` (expected dzt, twostep, ofdm or all)"),
            )),
        }
    }
}

pub fn two_step_modulate(frame: &DDFrame) -> TimeSignal {
    let symp = SymplecticTransform::new(*frame.grid());
    symp.heisenberg(&symp.isfft(frame))
}

pub fn two_step_demodulate(signal: &TimeSignal, grid: &DDGrid) -> Result<DDFrame> {
    let symp = SymplecticTransform::new(*grid);
    Ok(symp.sfft(&symp.wigner(signal)?))
}

/// Composite pulse seen by the two-step link.
pub fn two_step_pulse(grid: &DDGrid) -> PulseSpec {
    PulseSpec::rectangular(grid.symbol_period()).expect("grid symbol period is positive")
}

/// Two-step modulation map as a matrix on row vectors.
pub fn two_step_matrix(grid: &DDGrid) -> CMatrix {
    let symp = SymplecticTransform::new(*grid);
    let mut s = symp.scratch();
    let n = grid.len();
    let mut m = CMatrix::zeros(n, n);
    let mut unit = vec![C64::default(); n];
    let mut out = vec![C64::default(); n];
    for q in 0..n {
        unit[q] = C64::new(1.0, 0.0);
        symp.modulate_into(&unit, &mut out, &mut s);
        for (c, v) in out.iter().enumerate() {
            m[(q, c)] = *v;
        }
        unit[q] = C64::default();
    }
    m
}

/// `H_2 = M_2 G_T M_2^H` with `G_T` built from the rectangular pulse.
pub fn two_step_effective_channel(chan: &ChannelRealization, grid: &DDGrid) -> Result<EffectiveChannel> {
    let m = two_step_matrix(grid);
    let g = build_time_operator(chan, &two_step_pulse(grid), grid)?;
    EffectiveChannel::from_matrix(*grid, &m * g * m.adjoint())
}

/// Time-domain operator of OFDM symbol `s` after prefix removal.
///
/// Inputs are the `L` body samples (the prefix repeats the tail), outputs the
/// `L` received body samples. Each path contributes
/// `h'_i e_i(T_s + t) g(m - t - l_i)` for every transmitted sample at offset
/// `t` in `[-cp_len, L)` from the body start `T_s = s (L + cp_len)`, so the
/// Doppler phase advances over prefixes too. Pulse tails reaching into the
/// previous symbol are dropped.
pub fn ofdm_symbol_operator(
    chan: &ChannelRealization,
    pulse: &PulseSpec,
    grid: &DDGrid,
    cp_len: usize,
    symbol: usize,
) -> Result<CMatrix> {
    let l = grid.delay_bins();
    let n_total = grid.len() as f64;
    let start = (symbol * (l + cp_len)) as f64;
    let w = pulse.half_width_taps as f64;
    let mut g = CMatrix::zeros(l, l);
    for p in chan.paths() {
        if p.delay_bins() > cp_len as f64 + w {
            return Err(Error::DelayExceedsFrame {
                delay: p.delay_bins(),
                limit: cp_len,
            });
        }
        let h = p.effective_gain(grid);
        let (delay, doppler) = (p.delay_bins(), p.doppler_bins());
        for t in -(cp_len as i64)..l as i64 {
            let e = h * cis_turns(doppler * (start + t as f64) / n_total);
            let row = t.rem_euclid(l as i64) as usize;
            for m in 0..l {
                let lag = m as f64 - t as f64 - delay;
                if lag.abs() <= w {
                    let v = pulse.autocorr_bins(lag);
                    if v != 0.0 {
                        g[(row, m)] += e * v;
                    }
                }
            }
        }
    }
    Ok(g)
}

/// Unitary `L`-point DFT pair for OFDM on row vectors:
/// `t[n] = L^{-1/2} sum_m X[m] e^{j 2 pi m n / L}`.
struct OfdmDft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl OfdmDft {
    fn new(l: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(l),
            inverse: planner.plan_fft_inverse(l),
            scale: 1.0 / (l as f64).sqrt(),
        }
    }

    fn to_time(&self, x: &[C64]) -> Vec<C64> {
        let mut v = x.to_vec();
        self.inverse.process(&mut v);
        v.iter_mut().for_each(|z| *z *= self.scale);
        v
    }

    fn to_freq(&self, t: &[C64]) -> Vec<C64> {
        let mut v = t.to_vec();
        self.forward.process(&mut v);
        v.iter_mut().for_each(|z| *z *= self.scale);
        v
    }

    fn matrix(&self, l: usize) -> CMatrix {
        CMatrix::from_fn(l, l, |m, n| cis_turns((m * n) as f64 / l as f64) * self.scale)
    }
}

/// Per-symbol frequency-domain matrices with `y_f = x_f H_f + v_f`.
pub fn ofdm_effective_channel(
    chan: &ChannelRealization,
    pulse: &PulseSpec,
    grid: &DDGrid,
    cp_len: usize,
) -> Result<Vec<CMatrix>> {
    let l = grid.delay_bins();
    let f = OfdmDft::new(l).matrix(l);
    (0..grid.doppler_bins())
        .map(|s| {
            let g = ofdm_symbol_operator(chan, pulse, grid, cp_len, s)?;
            Ok(&f * g * f.adjoint())
        })
        .collect()
}

/// Sample-level OFDM reference: builds the whole prefixed stream, convolves
/// it with every path in absolute time, strips the prefixes and returns the
/// received subcarrier values, `K L` entries ordered symbol by symbol.
///
/// Agrees with [`ofdm_effective_channel`] when delays are integers no larger
/// than the prefix.
pub fn ofdm_transmit_receive_samplewise(
    x_f: &[C64],
    chan: &ChannelRealization,
    pulse: &PulseSpec,
    grid: &DDGrid,
    cp_len: usize,
) -> Result<Vec<C64>> {
    let (k, l) = (grid.doppler_bins(), grid.delay_bins());
    if x_f.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: x_f.len(),
        });
    }
    let dft = OfdmDft::new(l);
    let sym_len = l + cp_len;
    let mut stream = Vec::with_capacity(k * sym_len);
    for s in 0..k {
        let body = TimeSignal::new(dft.to_time(&x_f[s * l..(s + 1) * l]));
        stream.extend(body.with_cyclic_prefix(cp_len)?.into_samples());
    }
    // Absolute time of stream sample j is j - cp_len.
    let time_of = |j: usize| j as f64 - cp_len as f64;
    let n_total = grid.len() as f64;
    let w = pulse.half_width_taps as f64;
    let mut out = Vec::with_capacity(grid.len());
    for s in 0..k {
        let mut body = vec![C64::default(); l];
        for (m, y) in body.iter_mut().enumerate() {
            let t_rx = time_of(s * sym_len + cp_len + m);
            for p in chan.paths() {
                let h = p.effective_gain(grid);
                for (j, x) in stream.iter().enumerate() {
                    let lag = t_rx - time_of(j) - p.delay_bins();
                    if lag.abs() > w {
                        continue;
                    }
                    *y += h * x * cis_turns(p.doppler_bins() * time_of(j) / n_total) * pulse.autocorr_bins(lag);
                }
            }
        }
        out.extend(dft.to_freq(&body));
    }
    Ok(out)
}

/// Everything a trial needs besides the channel and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub grid: DDGrid,
    /// Composite pulse of the DZT-OTFS and OFDM links.
    pub pulse: PulseSpec,
    pub alphabet: Alphabet,
    pub detector: Detector,
    /// Prefix per OFDM symbol.
    pub ofdm_cp_len: usize,
}

impl LinkSpec {
    pub fn bits_per_frame(&self) -> usize {
        self.grid.len() * self.alphabet.bits_per_symbol()
    }
}

/// Planned transforms for one [`LinkSpec`], reused across trials.
pub struct LinkSimulator {
    spec: LinkSpec,
    zak: ZakTransform,
    symp: SymplecticTransform,
    dft: OfdmDft,
    rect: PulseSpec,
}

impl LinkSimulator {
    pub fn new(spec: LinkSpec) -> Self {
        let grid = spec.grid;
        Self {
            zak: ZakTransform::new(grid),
            symp: SymplecticTransform::new(grid),
            dft: OfdmDft::new(grid.delay_bins()),
            rect: two_step_pulse(&grid),
            spec,
        }
    }

    pub fn spec(&self) -> &LinkSpec {
        &self.spec
    }

    /// Sends `bits` over `chan` with time-domain noise samples `noise`
    /// (length `N`) and returns the detected bits.
    ///
    /// The DZT and two-step receivers equalize in the time domain,
    /// `x_t = y G^H (G G^H + N0 I)^{-1}`, and then demodulate; because both
    /// modulation maps are unitary this equals MMSE on the delay-Doppler
    /// effective channel.
    pub fn run(
        &self,
        scheme: SchemeId,
        bits: &[bool],
        chan: &ChannelRealization,
        n0: f64,
        noise: &[C64],
    ) -> Result<Vec<bool>> {
        let grid = &self.spec.grid;
        let n = grid.len();
        if bits.len() != self.spec.bits_per_frame() {
            return Err(Error::LengthMismatch {
                expected: self.spec.bits_per_frame(),
                actual: bits.len(),
            });
        }
        if noise.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: noise.len(),
            });
        }
        let alphabet = &self.spec.alphabet;
        let x = alphabet.modulate(bits);
        match scheme {
            SchemeId::DztOtfs | SchemeId::TwoStepOtfs => {
                let (pulse, x_t) = if scheme == SchemeId::DztOtfs {
                    (&self.spec.pulse, self.zak.idzt_vec(&x))
                } else {
                    let mut t = vec![C64::default(); n];
                    self.symp.modulate_into(&x, &mut t, &mut self.symp.scratch());
                    (&self.rect, t)
                };
                let g = build_time_operator(chan, pulse, grid)?;
                let mut y = row_times(&x_t, &g);
                y.iter_mut().zip(noise).for_each(|(a, b)| *a += b);
                match self.spec.detector {
                    Detector::Mmse => {
                        let est_t = mmse_row(&y, &g, n0)?;
                        let est = if scheme == SchemeId::DztOtfs {
                            self.zak.dzt_vec(&est_t)
                        } else {
                            let mut d = vec![C64::default(); n];
                            self.symp.demodulate_into(&est_t, &mut d, &mut self.symp.scratch());
                            d
                        };
                        Ok(alphabet.hard_bits(&est))
                    }
                    Detector::Ml => {
                        let m = if scheme == SchemeId::DztOtfs {
                            idzt_matrix(grid)
                        } else {
                            two_step_matrix(grid)
                        };
                        let q = ml_detect_index(&y, &(m * g), alphabet)?;
                        Ok(alphabet.candidate_bits(q, n))
                    }
                }
            }
            SchemeId::Ofdm => {
                let l = grid.delay_bins();
                let mut out = Vec::with_capacity(bits.len());
                for s in 0..grid.doppler_bins() {
                    let g = ofdm_symbol_operator(chan, &self.spec.pulse, grid, self.spec.ofdm_cp_len, s)?;
                    let t = self.dft.to_time(&x[s * l..(s + 1) * l]);
                    let mut y = row_times(&t, &g);
                    y.iter_mut().zip(&noise[s * l..(s + 1) * l]).for_each(|(a, b)| *a += b);
                    match self.spec.detector {
                        Detector::Mmse => {
                            let est = self.dft.to_freq(&mmse_row(&y, &g, n0)?);
                            out.extend(alphabet.hard_bits(&est));
                        }
                        Detector::Ml => {
                            let f = self.dft.matrix(l);
                            let q = ml_detect_index(&y, &(f * g), alphabet)?;
                            out.extend(alphabet.candidate_bits(q, l));
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

/// One frame through `scheme`: modulate, channel, white noise of variance
/// `n0` drawn from `rng`, demodulate and detect. Passing clones of one stream
/// to several schemes gives them identical noise.
pub fn run_scheme(
    scheme: SchemeId,
    bits: &[bool],
    chan: &ChannelRealization,
    link: &LinkSpec,
    n0: f64,
    rng: &mut RngStream,
) -> Result<Vec<bool>> {
    let noise = noise_vector(link.grid.len(), n0, rng);
    LinkSimulator::new(link.clone()).run(scheme, bits, chan, n0, &noise)
}
