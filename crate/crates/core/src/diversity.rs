//! Rank criterion and pairwise-error bounds for ML detection over the
//! delay-Doppler channel.
//!
//! With unit-gain path operators `M_i = e^{j 2 pi l_i k_i / N} E_i G_i`, the
//! received vector is `y = h X + v` where row `i` of the `P x N` symbol matrix
//! `X` is `x M_i` and `h` holds the raw path gains. The diversity of a
//! geometry is the smallest rank of `X_a - X_b` over distinct symbol vectors.

use rayon::prelude::*;

use crate::channel::ChannelProfile;
use crate::ddmatrix::{path_operator, PhaseRotation};
use crate::detect::Alphabet;
use crate::domain::{DDGrid, C64};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, rank_threshold, row_times, singular_values, CMatrix};
use crate::pulse::{PulseSpec, DEFAULT_HALF_WIDTH};

/// Enumeration limit for rank profiles: `|A|^N <= 2^10`.
pub const RANK_ENUMERATION_LIMIT_BITS: usize = 10;

/// Absolute floor under which singular values count as zero.
pub const DEFAULT_RANK_FLOOR: f64 = 1e-9;

/// A small grid plus alphabet on which every symbol pair is enumerated.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversitySystem {
    pub name: String,
    pub grid: DDGrid,
    pub path_count: usize,
    pub alphabet: Alphabet,
}

impl DiversitySystem {
    /// `K = L = 2`, two paths, BPSK.
    pub fn system1() -> Self {
        Self::new("s1", 2, 2, 2, Alphabet::bpsk()).expect("valid built-in system")
    }

    /// `K = 2`, `L = 4`, four paths, BPSK.
    pub fn system2() -> Self {
        Self::new("s2", 2, 4, 4, Alphabet::bpsk()).expect("valid built-in system")
    }

    pub fn new(name: &str, k: usize, l: usize, path_count: usize, alphabet: Alphabet) -> Result<Self> {
        if path_count == 0 {
            return Err(Error::validation("system.P", "at least one path is required"));
        }
        Ok(Self {
            name: name.to_string(),
            grid: DDGrid::new(k, l, 1.0)?,
            path_count,
            alphabet,
        })
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "s1" | "system1" => Ok(Self::system1()),
            "s2" | "system2" => Ok(Self::system2()),
            other => Err(Error::validation("system", format!("unknown system `{other}` (expected s1 or s2)"))),
        }
    }

    /// Same grid and alphabet with the path count of `profile`.
    pub fn for_profile(&self, profile: &DDProfile) -> Self {
        Self {
            path_count: profile.path_count(),
            ..self.clone()
        }
    }

    pub fn symbol_count(&self) -> usize {
        self.grid.len()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.grid.len() * self.alphabet.bits_per_symbol()
    }
}

/// A named deterministic path geometry in grid bins; gains stay symbolic.
#[derive(Debug, Clone, PartialEq)]
pub struct DDProfile {
    pub name: String,
    pub geometry: ChannelProfile,
}

impl DDProfile {
    pub fn new(name: &str, delays: &[f64], dopplers: &[f64]) -> Self {
        Self {
            name: name.to_string(),
            geometry: ChannelProfile::from_bins(delays, dopplers),
        }
    }

    /// Two paths, same delay, Dopplers 0 and 1.
    pub fn a() -> Self {
        Self::new("A", &[0.0, 0.0], &[0.0, 1.0])
    }

    /// Two paths, delays 0 and 1, Dopplers 0 and 1.
    pub fn b() -> Self {
        Self::new("B", &[0.0, 1.0], &[0.0, 1.0])
    }

    /// Four paths on the corners of a 2 x 2 delay-Doppler square.
    pub fn c() -> Self {
        Self::new("C", &[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 0.0, 1.0])
    }

    /// Four paths with fractional delays and Dopplers.
    pub fn d() -> Self {
        Self::new("D", &[0.2, 1.4, 2.3, 3.6], &[-0.3, 1.4, 0.8, -0.2])
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "A" => Ok(Self::a()),
            "B" => Ok(Self::b()),
            "C" => Ok(Self::c()),
            "D" => Ok(Self::d()),
            _ => Err(Error::validation("profile", format!("unknown profile `{name}` (expected A-D)"))),
        }
    }

    pub fn path_count(&self) -> usize {
        self.geometry.paths.len()
    }

    /// Unit-gain operators `e^{j 2 pi l k / N} E G`, one per path.
    pub fn path_operators(&self, pulse: &PulseSpec, grid: &DDGrid) -> Result<Vec<CMatrix>> {
        let chan = self.geometry.realization(C64::new(1.0, 0.0))?;
        chan.paths()
            .iter()
            .map(|p| Ok(path_operator(p, pulse, grid)? * p.effective_gain(grid)))
            .collect()
    }
}

/// Raised cosine with zero roll-off and the default truncation, used for the
/// built-in profiles.
pub fn default_profile_pulse() -> PulseSpec {
    PulseSpec::raised_cosine(0.0, 1.0, DEFAULT_HALF_WIDTH).expect("valid default pulse")
}

/// `P x N` symbol matrix with row `i` equal to `x M_i`.
pub fn build_symbol_matrix(x: &[C64], path_ops: &[CMatrix]) -> CMatrix {
    let n = x.len();
    let mut out = CMatrix::zeros(path_ops.len(), n);
    for (i, m) in path_ops.iter().enumerate() {
        for (c, v) in row_times(x, m).into_iter().enumerate() {
            out[(i, c)] = v;
        }
    }
    out
}

/// Counts of difference-matrix ranks over ordered pairs of distinct vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankHistogram {
    /// `counts[r]` for `r = 0..=P`.
    pub counts: Vec<usize>,
    pub min_rank: usize,
}

impl RankHistogram {
    fn from_counts(counts: Vec<usize>) -> Self {
        let min_rank = counts.iter().position(|c| *c > 0).unwrap_or(0);
        Self { counts, min_rank }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, rank: usize) -> usize {
        self.counts.get(rank).copied().unwrap_or(0)
    }
}

/// One unordered pair of candidate vectors.
#[derive(Debug, Clone)]
struct PairSpectrum {
    bit_distance: u32,
    /// Singular values of `X_a - X_b`, descending.
    singular: Vec<f64>,
}

/// Exhaustive pair enumeration for one system, geometry and precoder choice.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    system: DiversitySystem,
    profile_name: String,
    with_pr: bool,
    pairs: Vec<PairSpectrum>,
}

impl PairAnalysis {
    /// Enumerates every pair `a < b`; the ordered counts are twice these.
    pub fn enumerate(
        system: &DiversitySystem,
        profile: &DDProfile,
        pulse: &PulseSpec,
        rotation: Option<PhaseRotation>,
    ) -> Result<Self> {
        let n = system.symbol_count();
        let bits = system.bits_per_frame();
        if bits > RANK_ENUMERATION_LIMIT_BITS {
            return Err(Error::SearchSpaceTooLarge {
                bits,
                limit: RANK_ENUMERATION_LIMIT_BITS,
            });
        }
        if profile.path_count() != system.path_count {
            return Err(Error::validation(
                "profile",
                format!(
                    "profile {} has {} paths but system {} expects {}",
                    profile.name,
                    profile.path_count(),
                    system.name,
                    system.path_count
                ),
            ));
        }
        let ops = profile.path_operators(pulse, &system.grid)?;
        let q_count = system.alphabet.candidate_count(n)?;
        let symbol_matrices: Vec<CMatrix> = (0..q_count)
            .map(|q| {
                let x = system.alphabet.candidate(q, n);
                let x = match rotation {
                    Some(pr) => pr.apply(&x),
                    None => x,
                };
                build_symbol_matrix(&x, &ops)
            })
            .collect();
        let labels: Vec<u64> = (0..q_count)
            .map(|q| {
                system
                    .alphabet
                    .candidate_bits(q, n)
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, b)| acc | (u64::from(*b) << i))
            })
            .collect();
        let pairs = (0..q_count)
            .into_par_iter()
            .flat_map_iter(|a| {
                let (symbol_matrices, labels) = (&symbol_matrices, &labels);
                (a + 1..q_count).map(move |b| PairSpectrum {
                    bit_distance: (labels[a] ^ labels[b]).count_ones(),
                    singular: singular_values(&(&symbol_matrices[a] - &symbol_matrices[b])),
                })
            })
            .collect();
        Ok(Self {
            system: system.clone(),
            profile_name: profile.name.clone(),
            with_pr: rotation.is_some(),
            pairs,
        })
    }

    pub fn system(&self) -> &DiversitySystem {
        &self.system
    }

    pub fn profile_name(&self) -> &str {
        &self.profile_name
    }

    pub fn with_pr(&self) -> bool {
        self.with_pr
    }

    fn candidate_count(&self) -> usize {
        self.system.alphabet.size().pow(self.system.symbol_count() as u32)
    }

    fn rank(&self, pair: &PairSpectrum, abs_floor: f64) -> usize {
        numerical_rank(&pair.singular, self.system.path_count, self.system.symbol_count(), abs_floor)
    }

    pub fn histogram(&self, abs_floor: f64) -> RankHistogram {
        let mut counts = vec![0usize; self.system.path_count + 1];
        for pair in &self.pairs {
            counts[self.rank(pair, abs_floor)] += 2;
        }
        RankHistogram::from_counts(counts)
    }

    /// Bounds on the bit error probability at each SNR (dB, `rho = 1/N0`).
    ///
    /// `upper = (1 / (Q N log2|A|)) sum_{a != b} d_H(a, b) PEP(a, b)` and
    /// `lower` restricts the sum to minimum-rank pairs.
    pub fn ber_bounds(&self, snr_db: &[f64]) -> BerBounds {
        let hist = self.histogram(DEFAULT_RANK_FLOOR);
        let norm = 1.0 / (self.candidate_count() * self.system.bits_per_frame()) as f64;
        let p = self.system.path_count;
        let (rows, cols) = (p, self.system.symbol_count());
        let mut upper = Vec::with_capacity(snr_db.len());
        let mut lower = Vec::with_capacity(snr_db.len());
        for &db in snr_db {
            let rho = 10f64.powf(db / 10.0);
            let (mut up, mut low) = (0.0, 0.0);
            for pair in &self.pairs {
                let smax = pair.singular.first().copied().unwrap_or(0.0);
                let tol = rank_threshold(smax, rows, cols, DEFAULT_RANK_FLOOR);
                let eig: Vec<f64> = pair.singular.iter().filter(|s| **s > tol).map(|s| s * s).collect();
                let term = 2.0 * pair.bit_distance as f64 * pep_from_eigenvalues(&eig, rho, p);
                up += term;
                if eig.len() == hist.min_rank {
                    low += term;
                }
            }
            upper.push(up * norm);
            lower.push(low * norm);
        }
        BerBounds {
            snr_db: snr_db.to_vec(),
            upper,
            lower,
            min_rank: hist.min_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerBounds {
    pub snr_db: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub min_rank: usize,
}

/// Rank histogram over all ordered pairs of distinct candidate vectors.
pub fn rank_profile(
    system: &DiversitySystem,
    profile: &DDProfile,
    pulse: &PulseSpec,
    with_pr: bool,
    rotation: PhaseRotation,
) -> Result<RankHistogram> {
    let pr = with_pr.then_some(rotation);
    Ok(PairAnalysis::enumerate(system, profile, pulse, pr)?.histogram(DEFAULT_RANK_FLOOR))
}

/// Chernoff bound `prod_l 1 / (1 + rho lambda_l / (4 P))` over the nonzero
/// eigenvalues of `D D^H`.
pub fn pep_from_eigenvalues(eig: &[f64], rho: f64, path_count: usize) -> f64 {
    let c = rho / (4.0 * path_count as f64);
    eig.iter().map(|l| 1.0 / (1.0 + c * l)).product()
}

/// High-SNR form `prod_l (rho lambda_l / (4 P))^{-1}`.
pub fn pep_high_snr(eig: &[f64], rho: f64, path_count: usize) -> f64 {
    let c = rho / (4.0 * path_count as f64);
    eig.iter().map(|l| 1.0 / (c * l)).product()
}

/// Nonzero eigenvalues of `(X_a - X_b)(X_a - X_b)^H`, descending.
pub fn difference_eigenvalues(xa: &CMatrix, xb: &CMatrix, abs_floor: f64) -> Vec<f64> {
    let d = xa - xb;
    let sv = singular_values(&d);
    let tol = rank_threshold(sv.first().copied().unwrap_or(0.0), d.nrows(), d.ncols(), abs_floor);
    sv.into_iter().filter(|s| *s > tol).map(|s| s * s).collect()
}

/// Pairwise error bound for symbol matrices `X_a`, `X_b` at linear SNR `rho`.
pub fn pep_bound(xa: &CMatrix, xb: &CMatrix, rho: f64, path_count: usize) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::validation("rho", format!("SNR {rho} must be positive")));
    }
    Ok(pep_from_eigenvalues(
        &difference_eigenvalues(xa, xb, DEFAULT_RANK_FLOOR),
        rho,
        path_count,
    ))
}

/// Upper and lower BER bounds for one system and geometry.
pub fn ber_bounds(
    system: &DiversitySystem,
    profile: &DDProfile,
    pulse: &PulseSpec,
    snr_db: &[f64],
    with_pr: bool,
    rotation: PhaseRotation,
) -> Result<BerBounds> {
    let pr = with_pr.then_some(rotation);
    Ok(PairAnalysis::enumerate(system, profile, pulse, pr)?.ber_bounds(snr_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddmatrix::build_effective_channel;
    use crate::domain::derive_stream;
    use crate::linalg::max_abs_diff;

    fn pulse() -> PulseSpec {
        default_profile_pulse()
    }

    #[test]
    fn symbol_matrix_reproduces_effective_channel() {
        let mut rng = derive_stream(41, 0);
        for (sys, prof) in [
            (DiversitySystem::system1(), DDProfile::a()),
            (DiversitySystem::system1(), DDProfile::b()),
            (DiversitySystem::system2(), DDProfile::c()),
            (DiversitySystem::system2(), DDProfile::d()),
        ] {
            let ops = prof.path_operators(&pulse(), &sys.grid).unwrap();
            for _ in 0..5 {
                let x: Vec<C64> = (0..sys.grid.len()).map(|_| rng.complex_gaussian(1.0)).collect();
                let h: Vec<C64> = (0..sys.path_count).map(|_| rng.complex_gaussian(1.0)).collect();
                let chan = prof.geometry.realization_with_gains(&h).unwrap();
                let heff = build_effective_channel(&chan, &pulse(), &sys.grid).unwrap();
                let xmat = build_symbol_matrix(&x, &ops);
                let hx = row_times(&h, &xmat);
                assert!(max_abs_diff(&hx, &heff.apply(&x)) < 1e-10);
            }
        }
    }

    #[test]
    fn zero_vector_and_identity_path() {
        let g = DDGrid::new(2, 2, 1.0).unwrap();
        let prof = DDProfile::new("I", &[0.0], &[0.0]);
        let ops = prof.path_operators(&pulse(), &g).unwrap();
        let zero = build_symbol_matrix(&[C64::default(); 4], &ops);
        assert!(zero.iter().all(|v| *v == C64::default()));
        let x = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.5, 0.5)];
        let row = build_symbol_matrix(&x, &ops);
        let got: Vec<C64> = row.row(0).iter().copied().collect();
        assert!(max_abs_diff(&got, &x) < 1e-14);
    }

    #[test]
    fn system1_profiles() {
        let s1 = DiversitySystem::system1();
        let pr = PhaseRotation::default();
        let a = rank_profile(&s1, &DDProfile::a(), &pulse(), false, pr).unwrap();
        assert_eq!(a.counts, vec![0, 32, 208]);
        assert_eq!(a.min_rank, 1);
        let a_pr = rank_profile(&s1, &DDProfile::a(), &pulse(), true, pr).unwrap();
        assert_eq!(a_pr.counts, vec![0, 0, 240]);
        assert_eq!(a_pr.min_rank, 2);
        for with_pr in [false, true] {
            let b = rank_profile(&s1, &DDProfile::b(), &pulse(), with_pr, pr).unwrap();
            assert_eq!(b.counts, vec![0, 0, 240]);
        }
    }

    #[test]
    fn histogram_invariants() {
        let s1 = DiversitySystem::system1();
        let an = PairAnalysis::enumerate(&s1, &DDProfile::a(), &pulse(), None).unwrap();
        for floor in [1e-7, 1e-9, 1e-11] {
            let h = an.histogram(floor);
            assert_eq!(h.total(), 16 * 15);
            assert!(h.counts.iter().all(|c| c % 2 == 0));
            assert!(h.counts.len() == 3);
        }
    }

    #[test]
    fn enumeration_guards() {
        let big = DiversitySystem::new("big", 4, 4, 2, Alphabet::bpsk()).unwrap();
        assert!(matches!(
            PairAnalysis::enumerate(&big, &DDProfile::a(), &pulse(), None),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
        let s1 = DiversitySystem::system1();
        assert!(PairAnalysis::enumerate(&s1, &DDProfile::c(), &pulse(), None).is_err());
        assert!(DiversitySystem::from_name("s3").is_err());
        assert!(DDProfile::from_name("e").is_err());
        assert_eq!(DDProfile::from_name("d").unwrap(), DDProfile::d());
    }

    #[test]
    fn pep_edge_cases() {
        let x = CMatrix::from_fn(2, 4, |i, j| C64::new((i + j) as f64, 0.0));
        assert_eq!(pep_bound(&x, &x, 10.0, 2).unwrap(), 1.0);
        let y = CMatrix::from_fn(2, 4, |i, j| C64::new((i * j) as f64, 1.0));
        assert!((pep_bound(&x, &y, 1e-12, 2).unwrap() - 1.0).abs() < 1e-9);
        assert!(pep_bound(&x, &y, 0.0, 2).is_err());
        // Single path with lambda = 4P and rho = 1 gives 1/2.
        assert_eq!(pep_from_eigenvalues(&[4.0], 1.0, 1), 0.5);
        assert!((pep_high_snr(&[4.0, 8.0], 100.0, 2) - 1.0 / (50.0 * 100.0)).abs() < 1e-15);
        let a = CMatrix::from_element(1, 1, C64::new(2.0, 0.0));
        let b = CMatrix::zeros(1, 1);
        assert!((pep_bound(&a, &b, 1.0, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bounds_order_and_slope() {
        let s1 = DiversitySystem::system1();
        let snr = [25.0, 30.0, 35.0];
        let b = ber_bounds(&s1, &DDProfile::a(), &pulse(), &snr, false, PhaseRotation::default()).unwrap();
        for i in 0..3 {
            assert!(b.lower[i] <= b.upper[i]);
            assert!(b.lower[i] > 0.0);
        }
        let slope = (b.upper[2].log10() - b.upper[0].log10()) / 1.0;
        assert!((slope + 1.0).abs() < 0.15, "{slope}");
        assert_eq!(b.min_rank, 1);
    }
}
