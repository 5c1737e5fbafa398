//! Delay-Doppler effective channel `H` with `y_DD = x_DD H + v_DD`.
//!
//! `H = sum_i h'_i E_i G_i`, one Doppler factor and one delay factor per path,
//! both written in the DZT domain:
//!
//! * `E_i` is block diagonal with one `K x K` block per delay column `u`:
//!   `B_u[r, c] = K^{-1/2} Z_e[(c - r) mod K, u]`, where `Z_e` is the DZT of the
//!   Doppler sequence `e_i`. Sample-wise multiplication becomes a circular
//!   convolution along Doppler.
//! * `G_i` has diagonal `K x K` blocks; block `(u, l)` (input delay `u`,
//!   output delay `l`) is `sqrt(K) diag_k Z_g[k, l - u]`. Negative delay
//!   offsets wrap with the quasi-periodic twist
//!   `Z_g[k, j - L] = e^{-j 2 pi k / K} Z_g[k, j]`.
//!
//! The factors act on row vectors left to right: Doppler first, then delay.
//! [`effective_channel_oracle`] builds the same matrix by conjugating the
//! time-domain operator with the IDZT/DZT pair and is the reference for all of
//! the above.

use std::io::Write;
use std::path::Path;

use crate::channel::build_time_operator;
use crate::domain::{cis_turns, ChannelPath, ChannelRealization, DDGrid, RngStream, C64};
use crate::error::{Error, Result};
use crate::linalg::{row_times, CMatrix};
use crate::pulse::{doppler_sequence, sample_delay_sequence, PulseSpec};
use crate::transforms::ZakTransform;

/// Doppler factor `E_i` from a length-`N` Doppler sequence.
pub fn build_doppler_factor(e: &[C64], grid: &DDGrid) -> Result<CMatrix> {
    check_len(e.len(), grid)?;
    let (kb, lb) = (grid.doppler_bins(), grid.delay_bins());
    let ze = ZakTransform::new(*grid).dzt_vec(e);
    let scale = 1.0 / (kb as f64).sqrt();
    let mut out = CMatrix::zeros(grid.len(), grid.len());
    for u in 0..lb {
        for r in 0..kb {
            for c in 0..kb {
                out[(r + kb * u, c + kb * u)] = ze[(c + kb - r) % kb + kb * u] * scale;
            }
        }
    }
    Ok(out)
}

/// Delay factor `G_i` from a length-`N` sampled pulse sequence.
pub fn build_delay_factor(g: &[f64], grid: &DDGrid) -> Result<CMatrix> {
    check_len(g.len(), grid)?;
    let (kb, lb) = (grid.doppler_bins(), grid.delay_bins());
    let zg = delay_symbol(g, grid);
    let mut out = CMatrix::zeros(grid.len(), grid.len());
    for u in 0..lb {
        for l in 0..lb {
            for k in 0..kb {
                out[(k + kb * u, k + kb * l)] = zg[(k, l as isize - u as isize)];
            }
        }
    }
    Ok(out)
}

fn check_len(len: usize, grid: &DDGrid) -> Result<()> {
    if len != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: len,
        });
    }
    Ok(())
}

/// `sqrt(K) Z_g[k, j]` for `j` in `-(L-1)..L`, with the twist applied to
/// negative offsets.
struct DelaySymbol {
    kb: usize,
    lb: usize,
    values: Vec<C64>,
}

impl std::ops::Index<(usize, isize)> for DelaySymbol {
    type Output = C64;

    fn index(&self, (k, j): (usize, isize)) -> &C64 {
        let col = (j + self.lb as isize - 1) as usize;
        &self.values[k + self.kb * col]
    }
}

fn delay_symbol(g: &[f64], grid: &DDGrid) -> DelaySymbol {
    let (kb, lb) = (grid.doppler_bins(), grid.delay_bins());
    let gc: Vec<C64> = g.iter().map(|v| C64::new(*v, 0.0)).collect();
    let zg = ZakTransform::new(*grid).dzt_vec(&gc);
    let root = (kb as f64).sqrt();
    let mut values = vec![C64::default(); kb * (2 * lb - 1)];
    for j in -(lb as isize - 1)..lb as isize {
        let col = (j + lb as isize - 1) as usize;
        for k in 0..kb {
            values[k + kb * col] = if j >= 0 {
                zg[k + kb * j as usize] * root
            } else {
                zg[k + kb * (j + lb as isize) as usize] * root * cis_turns(-(k as f64) / kb as f64)
            };
        }
    }
    DelaySymbol { kb, lb, values }
}

/// `E_i G_i` for one path with unit gain, built entrywise without forming the
/// two factors: entry `(r + K u, c + K l)` is `B_u[r, c] sqrt(K) Z_g[c, l - u]`.
pub fn path_operator(path: &ChannelPath, pulse: &PulseSpec, grid: &DDGrid) -> Result<CMatrix> {
    let (kb, lb) = (grid.doppler_bins(), grid.delay_bins());
    let e = doppler_sequence(path.doppler_bins(), grid.len());
    let g = sample_delay_sequence(path.delay_bins(), grid.len(), pulse)?;
    let ze = ZakTransform::new(*grid).dzt_vec(&e);
    let zg = delay_symbol(&g, grid);
    let scale = 1.0 / (kb as f64).sqrt();
    let mut out = CMatrix::zeros(grid.len(), grid.len());
    for l in 0..lb {
        for u in 0..lb {
            let j = l as isize - u as isize;
            for c in 0..kb {
                let d = zg[(c, j)];
                if d == C64::default() {
                    continue;
                }
                for r in 0..kb {
                    out[(r + kb * u, c + kb * l)] = ze[(c + kb - r) % kb + kb * u] * scale * d;
                }
            }
        }
    }
    Ok(out)
}

/// End-to-end delay-Doppler channel for the row-vector model `y = x H + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    grid: DDGrid,
    h: CMatrix,
}

impl EffectiveChannel {
    pub const CONVENTION: &'static str = "row-vector, y = xH + v";

    pub fn from_matrix(grid: DDGrid, h: CMatrix) -> Result<Self> {
        if h.shape() != (grid.len(), grid.len()) {
            return Err(Error::InvalidGrid(format!(
                "effective channel must be {n}x{n}, got {r}x{c}",
                n = grid.len(),
                r = h.nrows(),
                c = h.ncols()
            )));
        }
        Ok(Self { grid, h })
    }

    pub fn grid(&self) -> &DDGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn into_matrix(self) -> CMatrix {
        self.h
    }

    /// `x H`
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        row_times(x, &self.h)
    }

    /// Writes `row,col,re,im` for every entry, row-major.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "row,col,re,im").map_err(|e| Error::io(path, e))?;
        for r in 0..self.h.nrows() {
            for c in 0..self.h.ncols() {
                let v = self.h[(r, c)];
                writeln!(out, "{r},{c},{:e},{:e}", v.re, v.im).map_err(|e| Error::io(path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// `H = sum_i h'_i E_i G_i`, paths summed in order.
pub fn build_effective_channel(chan: &ChannelRealization, pulse: &PulseSpec, grid: &DDGrid) -> Result<EffectiveChannel> {
    let mut h = CMatrix::zeros(grid.len(), grid.len());
    for p in chan.paths() {
        let op = path_operator(p, pulse, grid)?;
        h += op * p.effective_gain(grid);
    }
    EffectiveChannel::from_matrix(*grid, h)
}

/// IDZT as an `N x N` matrix acting on row vectors: `x_time = x_DD M`.
pub fn idzt_matrix(grid: &DDGrid) -> CMatrix {
    let zak = ZakTransform::new(*grid);
    let n = grid.len();
    let mut m = CMatrix::zeros(n, n);
    let mut unit = vec![C64::default(); n];
    for q in 0..n {
        unit[q] = C64::new(1.0, 0.0);
        for (col, v) in zak.idzt_vec(&unit).into_iter().enumerate() {
            m[(q, col)] = v;
        }
        unit[q] = C64::default();
    }
    m
}

/// Reference `H = M G_T M^H` from the time-domain operator and the unitary
/// IDZT matrix `M`.
pub fn effective_channel_oracle(chan: &ChannelRealization, pulse: &PulseSpec, grid: &DDGrid) -> Result<EffectiveChannel> {
    let m = idzt_matrix(grid);
    let g = build_time_operator(chan, pulse, grid)?;
    EffectiveChannel::from_matrix(*grid, &m * g * m.adjoint())
}

/// `y = x H + v` with `v` the DZT of white time-domain noise of variance `n0`.
pub fn dd_transmit_receive(x: &[C64], h: &EffectiveChannel, n0: f64, rng: &mut RngStream) -> Result<Vec<C64>> {
    check_len(x.len(), h.grid())?;
    if !(n0.is_finite() && n0 >= 0.0) {
        return Err(Error::validation("n0", format!("noise variance {n0} must be nonnegative")));
    }
    let mut y = h.apply(x);
    if n0 > 0.0 {
        let noise = crate::channel::noise_vector(x.len(), n0, rng);
        let v = ZakTransform::new(*h.grid()).dzt_vec(&noise);
        for (a, b) in y.iter_mut().zip(v) {
            *a += b;
        }
    }
    Ok(y)
}

/// Diagonal precoder `x~[q] = e^{j scale q / N} x[q]`. The default slope is 1,
/// so the phase advances by `q / N` radians per index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRotation {
    pub scale: f64,
}

impl Default for PhaseRotation {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl PhaseRotation {
    pub fn new(scale: f64) -> Self {
        Self { scale }
    }

    pub fn phase(&self, q: usize, n: usize) -> C64 {
        C64::from_polar(1.0, self.scale * q as f64 / n as f64)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = x.len();
        x.iter().enumerate().map(|(q, v)| v * self.phase(q, n)).collect()
    }

    pub fn invert(&self, x: &[C64]) -> Vec<C64> {
        let n = x.len();
        x.iter().enumerate().map(|(q, v)| v * self.phase(q, n).conj()).collect()
    }
}

/// [`PhaseRotation::apply`] with the default slope.
pub fn phase_rotate(x: &[C64]) -> Vec<C64> {
    PhaseRotation::default().apply(x)
}
