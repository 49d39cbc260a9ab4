//! Exact reduced dynamics of qubits coupled to independent zero-temperature
//! Lorentzian reservoirs.
//!
//! A single qubit coupled to a bosonic bath through a rotating-wave exchange
//! term evolves as an amplitude-damping channel whose coherence amplitude
//! `h(t)` obeys the memory-kernel equation
//!
//! ```text
//! dh/dt = -∫_0^t f(t - s) h(s) ds,    h(0) = 1,
//! f(τ)  = ∫ dω J(ω) exp(i(ω0 - ω)τ).
//! ```
//!
//! For the Lorentzian `J(ω) = (1/2π) γ0 λ² / ((ω0 - ω - Δ)² + λ²)` the
//! substitution `x = ω0 - ω - Δ` gives `f(τ) = e^{iΔτ} (γ0 λ²/2π) ∫ dx e^{ixτ}/(x² + λ²)`.
//! Closing the contour in the upper half plane for `τ > 0` picks up the pole
//! at `x = iλ` with residue `e^{-λτ}/(2iλ)`, so
//!
//! ```text
//! f(τ) = (γ0 λ / 2) exp((iΔ - λ) τ).
//! ```
//!
//! Because the kernel is a single exponential, `g(t) = ∫_0^t e^{(iΔ-λ)(t-s)} h(s) ds`
//! turns the integro-differential equation into the local linear system
//! `h' = -(γ0 λ/2) g`, `g' = (iΔ - λ) g + h`, i.e.
//! `h'' + (λ - iΔ) h' + (γ0 λ/2) h = 0` with `h(0) = 1`, `h'(0) = 0`. Its
//! solution is
//!
//! ```text
//! h(t) = e^{-(λ-iΔ)t/2} [cosh(Ωt/2) + ((λ-iΔ)/Ω) sinh(Ωt/2)],
//! Ω    = sqrt((λ - iΔ)² - 2 γ0 λ),
//! ```
//!
//! which is [`HForm::Standard`]. [`HForm::PaperVerbatim`] keeps the
//! alternative printed form `e^{-(λ-iΔ)t}[...]²`, which equals the square of
//! the standard amplitude; [`h_oracle`] integrates the local system directly
//! and discriminates between the two.
//!
//! Times are measured in units of `1/γ0`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::qlinalg::{check_qubit, qubit_bit, ComplexMatrix, DensityMatrix};
use crate::{Error, Result};

/// Slack allowed on `|h| <= 1` before the channel is declared unphysical.
pub const H_MODULUS_TOL: f64 = 1e-9;

/// Below this value of `|Ω| t` the closed form switches to its series expansion.
const SERIES_CUTOFF: f64 = 1e-4;

const REGIME_REL_EPS: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lorentzian bath parameters `(γ0, λ, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    gamma0: f64,
    lambda: f64,
    delta: f64,
}

impl BathParams {
    pub fn new(gamma0: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::Validation(format!("gamma0 must be positive and finite, got {gamma0}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Validation(format!("lambda must be positive and finite, got {lambda}")));
        }
        if !delta.is_finite() {
            return Err(Error::Validation(format!("delta must be finite, got {delta}")));
        }
        Ok(Self { gamma0, lambda, delta })
    }

    /// Parameters in the natural time unit `γ0 = 1`.
    pub fn scaled(lambda: f64, delta: f64) -> Result<Self> {
        Self::new(1.0, lambda, delta)
    }

    /// Same bath with the system-reservoir coupling switched off. Only useful
    /// for checking limits; it does not pass [`BathParams::new`].
    pub fn uncoupled(lambda: f64, delta: f64) -> Self {
        Self { gamma0: 0.0, lambda, delta }
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Spectral density `J(ω)` as a function of the detuning `ω0 - ω`.
    pub fn spectral_density(&self, detuning: f64) -> f64 {
        let x = detuning - self.delta;
        self.gamma0 * self.lambda * self.lambda / (2.0 * std::f64::consts::PI * (x * x + self.lambda * self.lambda))
    }

    /// Bath correlation function `f(τ) = (γ0 λ/2) e^{(iΔ-λ)τ}` for `τ >= 0`.
    pub fn correlation(&self, tau: f64) -> Complex64 {
        0.5 * self.gamma0 * self.lambda * (Complex64::new(-self.lambda, self.delta) * tau).exp()
    }

    /// `Ω = sqrt((λ - iΔ)² - 2 γ0 λ)`, principal branch.
    pub fn omega(&self) -> Complex64 {
        let a = Complex64::new(self.lambda, -self.delta);
        (a * a - 2.0 * self.gamma0 * self.lambda).sqrt()
    }

    pub fn regime(&self) -> Regime {
        regime(self)
    }
}

/// Memory regime of the bath relative to the boundary `γ0 = λ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Markovian,
    NonMarkovian,
    Boundary,
}

pub fn regime(p: &BathParams) -> Regime {
    let half = 0.5 * p.lambda;
    let eps = REGIME_REL_EPS * p.gamma0.max(half);
    if p.gamma0 < half - eps {
        Regime::Markovian
    } else if p.gamma0 > half + eps {
        Regime::NonMarkovian
    } else {
        Regime::Boundary
    }
}

/// Which closed form of `h(t)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HForm {
    /// Solution of the memory-kernel equation.
    #[default]
    Standard,
    /// Squared-bracket variant with the full `e^{-(λ-iΔ)t}` prefactor.
    PaperVerbatim,
}

impl FromStr for HForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "standard" => Ok(HForm::Standard),
            "paper_verbatim" | "verbatim" => Ok(HForm::PaperVerbatim),
            other => Err(Error::Validation(format!("unknown h form {other:?} (expected standard|paper-verbatim)"))),
        }
    }
}

impl fmt::Display for HForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HForm::Standard => "standard",
            HForm::PaperVerbatim => "paper-verbatim",
        })
    }
}

fn h_standard(t: f64, p: &BathParams) -> Complex64 {
    let a = Complex64::new(p.lambda, -p.delta);
    let omega = p.omega();
    if omega.norm() * t < SERIES_CUTOFF {
        // sinh(x)/Ω = (t/2)(1 + x²/6 + x⁴/120) with x = Ωt/2
        let x = 0.5 * omega * t;
        let x2 = x * x;
        let sinh_over_omega = 0.5 * t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
        return (-0.5 * a * t).exp() * (x.cosh() + a * sinh_over_omega);
    }
    // Expanded into the two characteristic modes; both have Re <= 0 so
    // nothing overflows at long times.
    let plus = ((omega - a) * (0.5 * t)).exp();
    let minus = ((-omega - a) * (0.5 * t)).exp();
    0.5 * (plus + minus) + a * (plus - minus) / (2.0 * omega)
}

/// Closed-form coherence amplitude `h(t)`.
pub fn h_closed(t: f64, p: &BathParams, form: HForm) -> Complex64 {
    if p.gamma0 == 0.0 {
        return ONE;
    }
    let h = h_standard(t, p);
    match form {
        HForm::Standard => h,
        // e^{-(λ-iΔ)t} B² = (e^{-(λ-iΔ)t/2} B)²
        HForm::PaperVerbatim => h * h,
    }
}

/// Integrates the memory-kernel equation with fixed-step RK4 and returns `h`
/// at each grid time. The grid must start at 0 and be non-decreasing.
pub fn h_oracle(p: &BathParams, t_grid: &[f64]) -> Result<Vec<Complex64>> {
    match t_grid.first() {
        None => return Ok(Vec::new()),
        Some(&t0) if t0 != 0.0 => return Err(Error::Validation(format!("oracle grid must start at t = 0, got {t0}"))),
        _ => {}
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
        return Err(Error::Validation(format!("oracle grid not ascending at {} -> {}", w[0], w[1])));
    }
    if p.gamma0 == 0.0 {
        return Ok(vec![ONE; t_grid.len()]);
    }

    let coupling = 0.5 * p.gamma0 * p.lambda;
    let decay = Complex64::new(-p.lambda, p.delta);
    let rhs = |h: Complex64, g: Complex64| (-coupling * g, decay * g + h);
    let max_step = (0.001 / p.gamma0).min(0.05 / p.lambda);

    let mut h = ONE;
    let mut g = ZERO;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(h);
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        if span > 0.0 {
            let n_sub = (span / max_step).ceil().max(1.0);
            let dt = span / n_sub;
            if w[0] + dt == w[0] || !n_sub.is_finite() || n_sub > 1e10 {
                return Err(Error::StepUnderflow { t: w[0], spacing: span });
            }
            for _ in 0..n_sub as u64 {
                let (k1h, k1g) = rhs(h, g);
                let (k2h, k2g) = rhs(h + 0.5 * dt * k1h, g + 0.5 * dt * k1g);
                let (k3h, k3g) = rhs(h + 0.5 * dt * k2h, g + 0.5 * dt * k2g);
                let (k4h, k4g) = rhs(h + dt * k3h, g + dt * k3g);
                h += dt / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
                g += dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
            }
        }
        out.push(h);
    }
    Ok(out)
}

/// Amplitude-damping Kraus operators `K0 = diag(1, h)`, `K1 = sqrt(1-|h|²) |0><1|`.
///
/// Moduli within [`H_MODULUS_TOL`] above one are pulled back onto the unit circle;
/// anything larger is a model violation.
pub fn kraus_pair(h: Complex64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let h = checked_amplitude(h)?;
    let decay = (1.0 - h.norm_sqr()).max(0.0).sqrt();
    let k0 = ComplexMatrix::from_diagonal(&[ONE, h]);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1[(0, 1)] = Complex64::new(decay, 0.0);
    Ok((k0, k1))
}

fn checked_amplitude(h: Complex64) -> Result<Complex64> {
    let m = h.norm();
    if !m.is_finite() || m > 1.0 + H_MODULUS_TOL {
        return Err(Error::NumericalContract(format!("|h| = {m} exceeds 1")));
    }
    Ok(if m > 1.0 { h / m } else { h })
}

/// Choi matrix `Σ_ij |i><j| ⊗ E(|i><j|)` of the channel with the given Kraus operators.
pub fn choi_matrix(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d = kraus[0].rows();
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(i, j)] = ONE;
            for k in kraus {
                let img = k.matmul(&unit).matmul(&k.adjoint());
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] += img[(a, b)];
                    }
                }
            }
        }
    }
    choi
}

/// Set of qubits (1-based) attached to reservoirs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CouplingMask {
    coupled: BTreeSet<usize>,
}

impl CouplingMask {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let coupled: BTreeSet<usize> = indices.into_iter().collect();
        if coupled.contains(&0) {
            return Err(Error::IndexOutOfRange { index: 0, n_qubits: coupled.len() });
        }
        Ok(Self { coupled })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(n_qubits: usize) -> Self {
        Self { coupled: (1..=n_qubits).collect() }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.coupled.iter().try_for_each(|&q| check_qubit(n_qubits, q))
    }

    pub fn contains(&self, q: usize) -> bool {
        self.coupled.contains(&q)
    }

    pub fn len(&self) -> usize {
        self.coupled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coupled.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.coupled.iter().copied()
    }
}

impl fmt::Display for CouplingMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coupled.iter().map(|q| q.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for CouplingMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        let idx = s
            .split([',', ' '])
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad qubit index {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(idx)
    }
}

/// Applies a single-qubit channel to qubit `q` of an `n`-qubit matrix.
fn apply_local(rho: &ComplexMatrix, n: usize, q: usize, kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let bit = 1usize << qubit_bit(n, q);
    let dim = rho.rows();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        let (r_bit, r_base) = (usize::from(r & bit != 0), r & !bit);
        for c in 0..dim {
            let (c_bit, c_base) = (usize::from(c & bit != 0), c & !bit);
            let mut acc = ZERO;
            for k in kraus {
                for a in 0..2 {
                    let kra = k[(r_bit, a)];
                    if kra == ZERO {
                        continue;
                    }
                    let ra = r_base | (a * bit);
                    for b in 0..2 {
                        let kcb = k[(c_bit, b)];
                        if kcb == ZERO {
                            continue;
                        }
                        acc += kra * rho[(ra, c_base | (b * bit))] * kcb.conj();
                    }
                }
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Applies independent damping channels with per-qubit amplitudes `(qubit, h)`.
pub fn apply_channels_each(rho: &DensityMatrix, amplitudes: &[(usize, Complex64)]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    let mut m = rho.matrix().clone();
    for &(q, h) in amplitudes {
        check_qubit(n, q)?;
        let (k0, k1) = kraus_pair(h)?;
        m = apply_local(&m, n, q, &[k0, k1]);
    }
    DensityMatrix::new(m)
}

/// Applies the damping channel with amplitude `h` to every qubit in `mask`.
pub fn apply_channels(rho: &DensityMatrix, mask: &CouplingMask, h: Complex64) -> Result<DensityMatrix> {
    mask.validate(rho.n_qubits())?;
    let amps: Vec<(usize, Complex64)> = mask.iter().map(|q| (q, h)).collect();
    apply_channels_each(rho, &amps)
}

/// Infinite-time decay of qubit `j`: Kraus operators `|0><0|` and `|0><1|`.
pub fn probe(rho: &DensityMatrix, j: usize) -> Result<DensityMatrix> {
    apply_channels(rho, &CouplingMask::new([j])?, ZERO)
}

/// Probes every qubit in `sites` in turn.
pub fn probe_all(rho: &DensityMatrix, sites: &[usize]) -> Result<DensityMatrix> {
    sites.iter().try_fold(rho.clone(), |acc, &j| probe(&acc, j))
}

/// Per-qubit reservoir assignment; `None` leaves a qubit uncoupled.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoirs {
    baths: Vec<Option<BathParams>>,
}

impl Reservoirs {
    /// Identical baths on every qubit in `mask`.
    pub fn homogeneous(n_qubits: usize, params: BathParams, mask: &CouplingMask) -> Result<Self> {
        mask.validate(n_qubits)?;
        Ok(Self { baths: (1..=n_qubits).map(|q| mask.contains(q).then_some(params)).collect() })
    }

    pub fn per_qubit(baths: Vec<Option<BathParams>>) -> Self {
        Self { baths }
    }

    pub fn n_qubits(&self) -> usize {
        self.baths.len()
    }

    pub fn mask(&self) -> CouplingMask {
        CouplingMask {
            coupled: self.baths.iter().enumerate().filter(|(_, b)| b.is_some()).map(|(i, _)| i + 1).collect(),
        }
    }

    /// `(qubit, h(t))` for every coupled qubit.
    pub fn amplitudes(&self, t: f64, form: HForm) -> Vec<(usize, Complex64)> {
        self.baths.iter().enumerate().filter_map(|(i, b)| b.map(|p| (i + 1, h_closed(t, &p, form)))).collect()
    }

    /// State at time `t` starting from `rho0`.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64, form: HForm) -> Result<DensityMatrix> {
        if rho0.n_qubits() != self.n_qubits() {
            return Err(Error::Validation(format!(
                "reservoirs defined for {} qubits, state has {}",
                self.n_qubits(),
                rho0.n_qubits()
            )));
        }
        apply_channels_each(rho0, &self.amplitudes(t, form))
    }
}
