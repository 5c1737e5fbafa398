//! Discrete Zak transform pair, symplectic Fourier pair and the
//! rectangular-window Heisenberg/Wigner maps used by two-step OTFS.
//!
//! Conventions (all unitary):
//!
//! * IDZT: `x[n] = K^{-1/2} sum_k Z[k, n mod L] e^{j 2 pi floor(n/L) k / K}`
//! * DZT:  `Z[k, l] = K^{-1/2} sum_{n<K} y[l + n L] e^{-j 2 pi k n / K}`
//! * ISFFT: `X[n, m] = (K L)^{-1/2} sum_{k,l} Z[k, l] e^{j 2 pi (n k / K - m l / L)}`
//!   with `n` the time slot (`K` slots) and `m` the subcarrier (`L` subcarriers).
//! * Heisenberg (rectangular window, no per-slot prefix):
//!   `s[n L + t] = L^{-1/2} sum_m X[n, m] e^{j 2 pi m t / L}`.
//!
//! The DZT costs `L` FFTs of length `K`; the two-step chain costs an extra
//! `2K` FFTs of length `L`.

use std::sync::Arc;
use std::time::Instant;

use rustfft::{Fft, FftPlanner};

use crate::domain::{DDFrame, DDGrid, TimeSignal, C64};
use crate::error::{Error, Result};

/// Planned DZT/IDZT for one grid.
pub struct ZakTransform {
    grid: DDGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

/// Reusable buffers for [`ZakTransform::inverse_into`] and
/// [`ZakTransform::forward_into`].
pub struct ZakScratch {
    block: Vec<C64>,
    fft: Vec<C64>,
}

/// Delay columns handled per pass; a block of `BLOCK` columns of length `K`
/// stays cache resident while it is transformed and scattered.
const BLOCK: usize = 16;

/// Extra elements between columns of the block buffer. Without it, columns
/// of a power-of-two length fall in the same cache sets and the strided
/// scatter evicts itself.
const PAD: usize = 8;

impl ZakTransform {
    pub fn new(grid: DDGrid) -> Self {
        let mut planner = FftPlanner::new();
        let k = grid.doppler_bins();
        Self {
            grid,
            forward: planner.plan_fft_forward(k),
            inverse: planner.plan_fft_inverse(k),
            scale: 1.0 / (k as f64).sqrt(),
        }
    }

    pub fn grid(&self) -> &DDGrid {
        &self.grid
    }

    pub fn scratch(&self) -> ZakScratch {
        let fft_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        ZakScratch {
            block: vec![C64::default(); BLOCK * (self.grid.doppler_bins() + PAD)],
            fft: vec![C64::default(); fft_len],
        }
    }

    /// DD row vector (flat, `k + K l`) to time samples.
    ///
    /// The DD vector is `L` contiguous Doppler columns. Each block of columns
    /// gets a batched inverse FFT and is then scattered to `x[l + n L]`.
    pub fn inverse_into(&self, dd: &[C64], time: &mut [C64], s: &mut ZakScratch) {
        self.inverse_with_scale(dd, time, s, self.scale);
    }

    pub(crate) fn inverse_with_scale(&self, dd: &[C64], time: &mut [C64], s: &mut ZakScratch, scale: f64) {
        let (k_bins, l_bins) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let stride = k_bins + PAD;
        for l0 in (0..l_bins).step_by(BLOCK) {
            let width = BLOCK.min(l_bins - l0);
            for j in 0..width {
                let col = &mut s.block[j * stride..j * stride + k_bins];
                col.copy_from_slice(&dd[(l0 + j) * k_bins..(l0 + j + 1) * k_bins]);
                self.inverse.process_with_scratch(col, &mut s.fft);
            }
            for n in 0..k_bins {
                let row = &mut time[n * l_bins + l0..n * l_bins + l0 + width];
                for (j, out) in row.iter_mut().enumerate() {
                    *out = s.block[j * stride + n] * scale;
                }
            }
        }
    }

    /// Time samples to DD row vector.
    pub fn forward_into(&self, time: &[C64], dd: &mut [C64], s: &mut ZakScratch) {
        self.forward_with_scale(time, dd, s, self.scale);
    }

    pub(crate) fn forward_with_scale(&self, time: &[C64], dd: &mut [C64], s: &mut ZakScratch, scale: f64) {
        let (k_bins, l_bins) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let stride = k_bins + PAD;
        for l0 in (0..l_bins).step_by(BLOCK) {
            let width = BLOCK.min(l_bins - l0);
            for n in 0..k_bins {
                let row = &time[n * l_bins + l0..n * l_bins + l0 + width];
                for (j, v) in row.iter().enumerate() {
                    s.block[j * stride + n] = v * scale;
                }
            }
            for j in 0..width {
                let col = &mut s.block[j * stride..j * stride + k_bins];
                self.forward.process_with_scratch(col, &mut s.fft);
                dd[(l0 + j) * k_bins..(l0 + j + 1) * k_bins].copy_from_slice(col);
            }
        }
    }

    pub fn idzt_vec(&self, dd: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); self.grid.len()];
        self.inverse_into(dd, &mut out, &mut self.scratch());
        out
    }

    pub fn dzt_vec(&self, time: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); self.grid.len()];
        self.forward_into(time, &mut out, &mut self.scratch());
        out
    }

    pub fn idzt(&self, frame: &DDFrame) -> TimeSignal {
        TimeSignal::new(self.idzt_vec(frame.as_flat()))
    }

    pub fn dzt(&self, signal: &TimeSignal) -> Result<DDFrame> {
        check_plain_frame(signal, &self.grid)?;
        DDFrame::unflatten(self.grid, self.dzt_vec(signal.body()))
    }
}

fn check_plain_frame(signal: &TimeSignal, grid: &DDGrid) -> Result<()> {
    if signal.cp_len() != 0 {
        return Err(Error::validation("signal", "strip the cyclic prefix before transforming"));
    }
    if signal.body_len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: signal.body_len(),
        });
    }
    Ok(())
}

pub fn idzt(frame: &DDFrame) -> TimeSignal {
    ZakTransform::new(*frame.grid()).idzt(frame)
}

pub fn dzt(signal: &TimeSignal, grid: &DDGrid) -> Result<DDFrame> {
    ZakTransform::new(*grid).dzt(signal)
}

/// Time-frequency grid of `K` slots by `L` subcarriers, stored `n + K m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfGrid {
    grid: DDGrid,
    values: Vec<C64>,
}

impl TfGrid {
    pub fn get(&self, slot: usize, subcarrier: usize) -> C64 {
        self.values[slot + self.grid.doppler_bins() * subcarrier]
    }

    pub fn as_flat(&self) -> &[C64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Planned ISFFT/SFFT plus the rectangular Heisenberg/Wigner maps.
pub struct SymplecticTransform {
    grid: DDGrid,
    /// Doppler-axis stage: per-column FFTs plus the reordering to slot-major
    /// time, shared in shape with the IDZT.
    columns: ZakTransform,
    fwd_k: Arc<dyn Fft<f64>>,
    inv_k: Arc<dyn Fft<f64>>,
    fwd_l: Arc<dyn Fft<f64>>,
    inv_l: Arc<dyn Fft<f64>>,
}

pub(crate) struct SymplecticScratch {
    k: Vec<C64>,
    l: Vec<C64>,
    tf: Vec<C64>,
    fft: Vec<C64>,
    columns: ZakScratch,
}

impl SymplecticTransform {
    pub fn new(grid: DDGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            columns: ZakTransform::new(grid),
            fwd_k: planner.plan_fft_forward(grid.doppler_bins()),
            inv_k: planner.plan_fft_inverse(grid.doppler_bins()),
            fwd_l: planner.plan_fft_forward(grid.delay_bins()),
            inv_l: planner.plan_fft_inverse(grid.delay_bins()),
        }
    }

    pub(crate) fn scratch(&self) -> SymplecticScratch {
        SymplecticScratch {
            k: vec![C64::default(); self.grid.doppler_bins()],
            l: vec![C64::default(); self.grid.delay_bins()],
            tf: vec![C64::default(); self.grid.len()],
            fft: vec![C64::default(); self.fft_scratch_len()],
            columns: self.columns.scratch(),
        }
    }

    fn fft_scratch_len(&self) -> usize {
        [&self.fwd_k, &self.inv_k, &self.fwd_l, &self.inv_l]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0)
    }

    fn isfft_into(&self, dd: &[C64], tf: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / ((kb * lb) as f64).sqrt();
        // Doppler -> slot: inverse DFT along k, column by column.
        for l in 0..lb {
            s.k.copy_from_slice(&dd[l * kb..(l + 1) * kb]);
            self.inv_k.process(&mut s.k);
            tf[l * kb..(l + 1) * kb].copy_from_slice(&s.k);
        }
        // delay -> subcarrier: forward DFT along l, slot by slot.
        for n in 0..kb {
            for (l, v) in s.l.iter_mut().enumerate() {
                *v = tf[n + l * kb];
            }
            self.fwd_l.process(&mut s.l);
            for (m, v) in s.l.iter().enumerate() {
                tf[n + m * kb] = v * scale;
            }
        }
    }

    fn sfft_into(&self, tf: &[C64], dd: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / ((kb * lb) as f64).sqrt();
        for n in 0..kb {
            for (m, v) in s.l.iter_mut().enumerate() {
                *v = tf[n + m * kb];
            }
            self.inv_l.process(&mut s.l);
            for (l, v) in s.l.iter().enumerate() {
                dd[n + l * kb] = *v;
            }
        }
        for l in 0..lb {
            s.k.copy_from_slice(&dd[l * kb..(l + 1) * kb]);
            self.fwd_k.process(&mut s.k);
            for (k, v) in s.k.iter().enumerate() {
                dd[k + l * kb] = v * scale;
            }
        }
    }

    fn heisenberg_into(&self, tf: &[C64], time: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / (lb as f64).sqrt();
        for n in 0..kb {
            for (m, v) in s.l.iter_mut().enumerate() {
                *v = tf[n + m * kb];
            }
            self.inv_l.process(&mut s.l);
            for (t, v) in s.l.iter().enumerate() {
                time[n * lb + t] = v * scale;
            }
        }
    }

    fn wigner_into(&self, time: &[C64], tf: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / (lb as f64).sqrt();
        for n in 0..kb {
            s.l.copy_from_slice(&time[n * lb..(n + 1) * lb]);
            self.fwd_l.process(&mut s.l);
            for (m, v) in s.l.iter().enumerate() {
                tf[n + m * kb] = v * scale;
            }
        }
    }

    pub fn isfft(&self, frame: &DDFrame) -> TfGrid {
        let mut s = self.scratch();
        let mut values = vec![C64::default(); self.grid.len()];
        self.isfft_into(frame.as_flat(), &mut values, &mut s);
        TfGrid {
            grid: self.grid,
            values,
        }
    }

    pub fn sfft(&self, tf: &TfGrid) -> DDFrame {
        let mut s = self.scratch();
        let mut values = vec![C64::default(); self.grid.len()];
        self.sfft_into(&tf.values, &mut values, &mut s);
        DDFrame::unflatten(self.grid, values).expect("grid-sized buffer")
    }

    pub fn heisenberg(&self, tf: &TfGrid) -> TimeSignal {
        let mut s = self.scratch();
        let mut out = vec![C64::default(); self.grid.len()];
        self.heisenberg_into(&tf.values, &mut out, &mut s);
        TimeSignal::new(out)
    }

    pub fn wigner(&self, signal: &TimeSignal) -> Result<TfGrid> {
        check_plain_frame(signal, &self.grid)?;
        let mut s = self.scratch();
        let mut values = vec![C64::default(); self.grid.len()];
        self.wigner_into(signal.body(), &mut values, &mut s);
        Ok(TfGrid {
            grid: self.grid,
            values,
        })
    }

    /// Two-step modulation (ISFFT then Heisenberg) on a flat DD row vector.
    ///
    /// Batched form: inverse FFTs along Doppler written out slot-major, then
    /// the forward delay-to-subcarrier FFT of the ISFFT and the inverse
    /// subcarrier FFT of the Heisenberg map on every slot.
    pub(crate) fn modulate_into(&self, dd: &[C64], time: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / ((kb * lb) as f64).sqrt() / (lb as f64).sqrt();
        self.columns.inverse_with_scale(dd, time, &mut s.columns, scale);
        self.fwd_l.process_with_scratch(time, &mut s.fft);
        self.inv_l.process_with_scratch(time, &mut s.fft);
    }

    /// Two-step demodulation (Wigner then SFFT), batched as in
    /// [`Self::modulate_into`].
    pub(crate) fn demodulate_into(&self, time: &[C64], dd: &mut [C64], s: &mut SymplecticScratch) {
        let (kb, lb) = (self.grid.doppler_bins(), self.grid.delay_bins());
        let scale = 1.0 / ((kb * lb) as f64).sqrt() / (lb as f64).sqrt();
        s.tf.copy_from_slice(time);
        self.fwd_l.process_with_scratch(&mut s.tf, &mut s.fft);
        self.inv_l.process_with_scratch(&mut s.tf, &mut s.fft);
        self.columns.forward_with_scale(&s.tf, dd, &mut s.columns, scale);
    }
}

pub fn isfft(frame: &DDFrame) -> TfGrid {
    SymplecticTransform::new(*frame.grid()).isfft(frame)
}

pub fn sfft(tf: &TfGrid) -> DDFrame {
    SymplecticTransform::new(tf.grid).sfft(tf)
}

/// Straight evaluation of the transform definitions, `O(N K)`. Used as the
/// reference the FFT paths are checked against.
pub mod direct {
    use crate::domain::{cis_turns as cis, DDFrame, DDGrid, C64};

    pub fn idzt(frame: &DDFrame) -> Vec<C64> {
        let g = frame.grid();
        let (kb, lb) = (g.doppler_bins(), g.delay_bins());
        let scale = 1.0 / (kb as f64).sqrt();
        (0..g.len())
            .map(|n| {
                let (l, block) = (n % lb, n / lb);
                (0..kb)
                    .map(|k| frame.get(k, l) * cis((block * k) as f64 / kb as f64))
                    .sum::<C64>()
                    * scale
            })
            .collect()
    }

    /// DZT evaluated at arbitrary (possibly out-of-range) Doppler index `k`.
    pub fn dzt_at(y: &[C64], grid: &DDGrid, k: i64, l: usize) -> C64 {
        let (kb, lb) = (grid.doppler_bins(), grid.delay_bins());
        (0..kb)
            .map(|n| y[l + n * lb] * cis(-(k as f64) * n as f64 / kb as f64))
            .sum::<C64>()
            / (kb as f64).sqrt()
    }

    pub fn dzt(y: &[C64], grid: &DDGrid) -> DDFrame {
        DDFrame::from_fn(*grid, |k, l| dzt_at(y, grid, k as i64, l))
    }
}

/// Median wall-clock seconds for one frame round trip of each scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCost {
    pub doppler_bins: usize,
    pub delay_bins: usize,
    pub repetitions: usize,
    /// IDZT followed by DZT.
    pub dzt_seconds: f64,
    /// ISFFT + Heisenberg followed by Wigner + SFFT.
    pub sfft_seconds: f64,
}

pub fn transform_cost_benchmark(doppler_bins: usize, delay_bins: usize, repetitions: usize) -> Result<TransformCost> {
    if !doppler_bins.is_power_of_two() || !delay_bins.is_power_of_two() {
        return Err(Error::validation(
            "grid",
            format!("benchmark sizes must be powers of two (K={doppler_bins}, L={delay_bins})"),
        ));
    }
    if repetitions == 0 {
        return Err(Error::validation("repetitions", "must be positive"));
    }
    let grid = DDGrid::new(doppler_bins, delay_bins, 1.0)?;
    let n = grid.len();
    let zak = ZakTransform::new(grid);
    let symp = SymplecticTransform::new(grid);
    let input: Vec<C64> = (0..n)
        .map(|q| C64::new(((q * 37) % 11) as f64 - 5.0, ((q * 13) % 7) as f64 - 3.0))
        .collect();
    let mut time = vec![C64::default(); n];
    let mut back = vec![C64::default(); n];
    let mut zak_scratch = zak.scratch();
    let mut scratch = symp.scratch();

    // Interleave the two measurements so slow drifts hit both equally.
    let mut dzt_times = Vec::with_capacity(repetitions);
    let mut sfft_times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t = Instant::now();
        zak.inverse_into(&input, &mut time, &mut zak_scratch);
        zak.forward_into(&time, &mut back, &mut zak_scratch);
        dzt_times.push(t.elapsed().as_secs_f64());
        std::hint::black_box(&back);

        let t = Instant::now();
        symp.modulate_into(&input, &mut time, &mut scratch);
        symp.demodulate_into(&time, &mut back, &mut scratch);
        sfft_times.push(t.elapsed().as_secs_f64());
        std::hint::black_box(&back);
    }
    Ok(TransformCost {
        doppler_bins,
        delay_bins,
        repetitions,
        dzt_seconds: median(&mut dzt_times),
        sfft_seconds: median(&mut sfft_times),
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
