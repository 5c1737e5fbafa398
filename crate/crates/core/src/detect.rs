//! Symbol alphabets, exhaustive ML detection and linear MMSE detection for
//! the row-vector model `y = x H + v`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::domain::C64;
use crate::error::{Error, Result};
use crate::linalg::{mmse_row, CMatrix};

/// Largest `N log2 |A|` the ML search will enumerate.
pub const ML_SEARCH_LIMIT_BITS: usize = 20;

/// Detector used by the link simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Ml,
    Mmse,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::Ml => "ml",
            Detector::Mmse => "mmse",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ml" => Ok(Detector::Ml),
            "mmse" => Ok(Detector::Mmse),
            other => Err(Error::validation("run.detector", format!("unknown detector `{other}` (expected ml or mmse)"))),
        }
    }
}

/// Unit-average-energy constellation with a fixed bit labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    name: &'static str,
    symbols: Vec<C64>,
    bits_per_symbol: usize,
}

impl Alphabet {
    /// Bit 0 maps to `+1`, bit 1 to `-1`.
    pub fn bpsk() -> Self {
        Self {
            name: "bpsk",
            symbols: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            bits_per_symbol: 1,
        }
    }

    /// Gray-labelled QPSK: label `b1 b0` maps to `((1 - 2 b0) + j (1 - 2 b1)) / sqrt 2`.
    pub fn qpsk() -> Self {
        let s = FRAC_1_SQRT_2;
        Self {
            name: "qpsk",
            symbols: vec![
                C64::new(s, s),
                C64::new(-s, s),
                C64::new(s, -s),
                C64::new(-s, -s),
            ],
            bits_per_symbol: 2,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" => Ok(Self::qpsk()),
            other => Err(Error::validation("alphabet", format!("unknown alphabet `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn symbols(&self) -> &[C64] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Maps `bits.len() / bits_per_symbol` groups of bits, least significant first.
    pub fn modulate(&self, bits: &[bool]) -> Vec<C64> {
        assert_eq!(bits.len() % self.bits_per_symbol, 0, "bit count must fill whole symbols");
        bits.chunks(self.bits_per_symbol)
            .map(|chunk| {
                let idx = chunk.iter().enumerate().fold(0, |acc, (i, b)| acc | (usize::from(*b) << i));
                self.symbols[idx]
            })
            .collect()
    }

    pub fn label_bits(&self, index: usize, out: &mut Vec<bool>) {
        out.extend((0..self.bits_per_symbol).map(|i| (index >> i) & 1 == 1));
    }

    pub fn nearest(&self, v: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in self.symbols.iter().enumerate() {
            let d = (v - s).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn hard_decision(&self, soft: &[C64]) -> Vec<C64> {
        soft.iter().map(|v| self.symbols[self.nearest(*v)]).collect()
    }

    pub fn hard_bits(&self, soft: &[C64]) -> Vec<bool> {
        let mut bits = Vec::with_capacity(soft.len() * self.bits_per_symbol);
        for v in soft {
            self.label_bits(self.nearest(*v), &mut bits);
        }
        bits
    }

    /// Candidate vector number `q`: `x[n] = A[(q / |A|^n) mod |A|]`.
    pub fn candidate(&self, q: usize, n: usize) -> Vec<C64> {
        let m = self.size();
        let mut rest = q;
        (0..n)
            .map(|_| {
                let s = self.symbols[rest % m];
                rest /= m;
                s
            })
            .collect()
    }

    /// Bit labels of candidate `q`, symbol by symbol.
    pub fn candidate_bits(&self, q: usize, n: usize) -> Vec<bool> {
        let m = self.size();
        let mut rest = q;
        let mut bits = Vec::with_capacity(n * self.bits_per_symbol);
        for _ in 0..n {
            self.label_bits(rest % m, &mut bits);
            rest /= m;
        }
        bits
    }

    /// `|A|^n`, or an error when it exceeds the enumeration limit.
    pub fn candidate_count(&self, n: usize) -> Result<usize> {
        let bits = n * self.bits_per_symbol;
        if bits > ML_SEARCH_LIMIT_BITS {
            return Err(Error::SearchSpaceTooLarge {
                bits,
                limit: ML_SEARCH_LIMIT_BITS,
            });
        }
        Ok(1 << bits)
    }
}

/// Index of the ML candidate; ties go to the lowest index.
///
/// `x H` is split as `x_lo H_lo + x_hi H_hi` over the low and high halves of
/// the symbol positions, so each candidate costs one length-`N` sum and
/// distance instead of a full product.
pub fn ml_detect_index(y: &[C64], h: &CMatrix, alphabet: &Alphabet) -> Result<usize> {
    let n = h.nrows();
    let cols = h.ncols();
    if y.len() != cols {
        return Err(Error::LengthMismatch {
            expected: cols,
            actual: y.len(),
        });
    }
    let total = alphabet.candidate_count(n)?;
    let m = alphabet.size();
    let n_lo = n / 2;
    let lo_count = m.pow(n_lo as u32);
    let partial = |offset: usize, len: usize| -> Vec<Vec<C64>> {
        (0..m.pow(len as u32))
            .map(|q| {
                let x = alphabet.candidate(q, len);
                (0..cols)
                    .map(|c| x.iter().enumerate().map(|(i, s)| s * h[(offset + i, c)]).sum())
                    .collect()
            })
            .collect()
    };
    let lo = partial(0, n_lo);
    let hi = partial(n_lo, n - n_lo);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for q in 0..total {
        let (a, b) = (&lo[q % lo_count], &hi[q / lo_count]);
        let mut d = 0.0;
        for c in 0..cols {
            d += (y[c] - a[c] - b[c]).norm_sqr();
            if d >= best_d {
                break;
            }
        }
        if d < best_d {
            best = q;
            best_d = d;
        }
    }
    Ok(best)
}

/// `argmin_x ||y - x H||^2` over all `|A|^N` candidates.
pub fn ml_detect(y: &[C64], h: &CMatrix, alphabet: &Alphabet) -> Result<Vec<C64>> {
    let q = ml_detect_index(y, h, alphabet)?;
    Ok(alphabet.candidate(q, h.nrows()))
}

/// Soft MMSE estimate `y H^H (H H^H + n0 I)^{-1}`.
pub fn mmse_equalize(y: &[C64], h: &CMatrix, n0: f64) -> Result<Vec<C64>> {
    if y.len() != h.ncols() {
        return Err(Error::LengthMismatch {
            expected: h.ncols(),
            actual: y.len(),
        });
    }
    if !(n0.is_finite() && n0 >= 0.0) {
        return Err(Error::validation("n0", format!("noise variance {n0} must be nonnegative")));
    }
    mmse_row(y, h, n0)
}

/// MMSE equalization followed by per-symbol nearest-point decisions.
pub fn mmse_detect(y: &[C64], h: &CMatrix, n0: f64, alphabet: &Alphabet) -> Result<Vec<C64>> {
    Ok(alphabet.hard_decision(&mmse_equalize(y, h, n0)?))
}
