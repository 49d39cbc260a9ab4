//! Named register states, seeded random states and amplitude-file ingestion.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qlinalg::{tensor_product, ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

/// Allowed deviation of `sum |a_i|^2` from one.
pub const NORM_TOL: f64 = 1e-12;

/// Normalized state vector of an `n_qubits` register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Validation(format!("amplitude count {len} is not 2^n with n >= 1")));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!("state norm^2 is {norm}, expected 1")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state from its bit string, e.g. `"011"`.
    pub fn basis(label: &str) -> Result<Self> {
        let n = label.len();
        let idx =
            usize::from_str_radix(label, 2).map_err(|_| Error::Validation(format!("invalid basis label {label:?}")))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amps = self.amplitudes.iter().flat_map(|a| other.amplitudes.iter().map(move |b| a * b)).collect();
        PureState { n_qubits: self.n_qubits + other.n_qubits, amplitudes: amps }
    }

    pub fn density(&self) -> DensityMatrix {
        density_of(self)
    }
}

/// Initial states used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedState {
    /// Equal superposition of all weight-1 basis states.
    W,
    /// Equal superposition of all weight-(n-1) basis states.
    WBar,
    /// `(|0...0> + |1...1>)/sqrt(2)`.
    Ghz,
    /// `(|W> + |Wbar>)/sqrt(2)` on three qubits.
    WWBar,
}

impl NamedState {
    pub const ALL: [NamedState; 4] = [NamedState::W, NamedState::WBar, NamedState::Ghz, NamedState::WWBar];

    pub fn label(self) -> &'static str {
        match self {
            NamedState::W => "W",
            NamedState::WBar => "WBAR",
            NamedState::Ghz => "GHZ",
            NamedState::WWBar => "WWBAR",
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NamedState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace(['_', '-'], "").as_str() {
            "W" => Ok(NamedState::W),
            "WBAR" => Ok(NamedState::WBar),
            "GHZ" => Ok(NamedState::Ghz),
            "WWBAR" => Ok(NamedState::WWBar),
            _ => Err(Error::Validation(format!("unknown state name {s:?}"))),
        }
    }
}

fn uniform_over(n: usize, indices: impl Iterator<Item = usize>) -> Result<PureState> {
    let idx: Vec<usize> = indices.collect();
    let a = Complex64::new(1.0 / (idx.len() as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for i in idx {
        amps[i] = a;
    }
    PureState::new(amps)
}

/// Builds one of the named register states on `n` qubits.
///
/// W, WBAR and GHZ exist for `n >= 2`; WWBAR is defined for three qubits only.
pub fn named_state(name: NamedState, n: usize) -> Result<PureState> {
    let unsupported = || Error::Validation(format!("state {name} is not defined on {n} qubits"));
    match name {
        NamedState::W if n >= 2 => uniform_over(n, (0..n).map(|b| 1 << b)),
        NamedState::WBar if n >= 2 => uniform_over(n, (0..n).map(|b| ((1 << n) - 1) ^ (1 << b))),
        NamedState::Ghz if n >= 2 => uniform_over(n, [0, (1 << n) - 1].into_iter()),
        NamedState::WWBar if n == 3 => uniform_over(3, (0..8usize).filter(|i| matches!(i.count_ones(), 1 | 2))),
        _ => Err(unsupported()),
    }
}

/// Rank-one projector `|psi><psi|`.
pub fn density_of(psi: &PureState) -> DensityMatrix {
    DensityMatrix::from_valid(ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes))
}

/// Seeded Haar-distributed pure state from normalized complex Gaussian amplitudes.
pub fn random_pure_state(n: usize, seed: u64) -> Result<PureState> {
    if n == 0 {
        return Err(Error::Validation("random state needs at least one qubit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> =
        (0..1usize << n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    PureState::normalized(amps)
}

/// Seeded mixed state `G G^dagger / Tr(G G^dagger)` with `G` a `2^n x rank`
/// complex Gaussian matrix.
pub fn random_mixed_state(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if n == 0 || rank == 0 {
        return Err(Error::Validation("random mixed state needs n >= 1 and rank >= 1".into()));
    }
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_data =
        (0..dim * rank).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let g = ComplexMatrix::from_row_major(dim, rank, g_data)?;
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    DensityMatrix::new(w.scale(Complex64::new(1.0 / tr, 0.0)))
}

/// Tensor product of single-register states, first factor on qubit 1.
pub fn product_state(factors: &[PureState]) -> Result<PureState> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::Validation("product of zero states".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.tensor(f)))
}

/// Density matrix of a product of mixed states, first factor on qubit 1.
pub fn product_density(factors: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::Validation("product of zero states".into()))?;
    let m = rest.iter().fold(first.matrix().clone(), |acc, f| tensor_product(&acc, f.matrix()));
    DensityMatrix::new(m)
}

/// Parses an amplitude listing: one `re im` pair per line in basis-label order.
/// Blank lines and `#` comments are ignored.
pub fn parse_amplitudes(text: &str) -> Result<PureState> {
    let mut amps = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse =
            |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: {s:?} is not a number", lineno + 1)));
        match fields.as_slice() {
            [re, im] => amps.push(Complex64::new(parse(re)?, parse(im)?)),
            _ => return Err(Error::Parse(format!("line {}: expected \"re im\", got {line:?}", lineno + 1))),
        }
    }
    PureState::new(amps)
}

pub fn load_amplitudes(path: &Path) -> Result<PureState> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_amplitudes(&text)
}
