//! Time sweeps and post-processing of coherence time series.
//!
//! A sweep evaluates every coherence quantity on a uniform grid in `γ0 t`.
//! Samples are independent, so they are computed in parallel and collected in
//! grid order; the result does not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::CoherenceRecord;
use crate::qlinalg::DensityMatrix;
use crate::reservoir::{apply_channels, h_closed, BathParams, CouplingMask, HForm, Reservoirs};
use crate::states::{density_of, PureState};
use crate::{Error, Result};

/// Values at or below this cannot enter a logarithmic fit.
pub const LOG_FLOOR: f64 = 1e-12;

/// Minimum height and prominence of a local maximum used for envelope fits.
pub const PEAK_FLOOR: f64 = 1e-10;

/// Default grid: 2000 points on `[0, 20]`.
pub const DEFAULT_T_MAX: f64 = 20.0;
pub const DEFAULT_POINTS: usize = 2000;

/// Ratio between the revival and death thresholds.
pub const REVIVAL_HYSTERESIS: f64 = 10.0;

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub h: Complex64,
    pub record: CoherenceRecord,
}

/// Ordered samples of a sweep together with the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub state_name: String,
    pub params: BathParams,
    pub mask: CouplingMask,
    pub form: HForm,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn h_values(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.h).collect()
    }

    pub fn records(&self) -> Vec<CoherenceRecord> {
        self.samples.iter().map(|s| s.record).collect()
    }

    /// Values of `field` at every sample.
    pub fn values(&self, field: Field) -> Result<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| field.value(s).ok_or_else(|| Error::Validation(format!("field {field} needs a 3-qubit register"))))
            .collect()
    }
}

/// Selects one scalar column of a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    AbsH,
    Total,
    Local,
    Global,
    C12,
    C13,
    C23,
    C1_23,
    Tripartite,
    Bipartite,
    Monogamy,
}

impl Field {
    pub const ALL: [Field; 11] = [
        Field::AbsH,
        Field::Total,
        Field::Local,
        Field::Global,
        Field::C12,
        Field::C13,
        Field::C23,
        Field::C1_23,
        Field::Tripartite,
        Field::Bipartite,
        Field::Monogamy,
    ];

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Field::AbsH => "abs_h",
            Field::Total => "C_total",
            Field::Local => "C_L",
            Field::Global => "C_G",
            Field::C12 => "C_12",
            Field::C13 => "C_13",
            Field::C23 => "C_23",
            Field::C1_23 => "C_1_23",
            Field::Tripartite => "C_TG",
            Field::Bipartite => "C_BG",
            Field::Monogamy => "M",
        }
    }

    pub fn value(self, s: &Sample) -> Option<f64> {
        let r = &s.record;
        let t = r.tripartite;
        match self {
            Field::AbsH => Some(s.h.norm()),
            Field::Total => Some(r.total),
            Field::Local => Some(r.local),
            Field::Global => Some(r.global),
            Field::C12 => t.map(|t| t.c12),
            Field::C13 => t.map(|t| t.c13),
            Field::C23 => t.map(|t| t.c23),
            Field::C1_23 => t.map(|t| t.c1_23),
            Field::Tripartite => t.map(|t| t.tg),
            Field::Bipartite => t.map(|t| t.bg),
            Field::Monogamy => t.map(|t| t.monogamy),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_prefix("c_").unwrap_or(&key);
        let field = match key {
            "abs_h" => Field::AbsH,
            "total" | "c" => Field::Total,
            "l" | "local" => Field::Local,
            "g" | "global" => Field::Global,
            "12" => Field::C12,
            "13" => Field::C13,
            "23" => Field::C23,
            "1_23" | "1:23" => Field::C1_23,
            "tg" => Field::Tripartite,
            "bg" => Field::Bipartite,
            "m" | "monogamy" => Field::Monogamy,
            _ => return Err(Error::Validation(format!("unknown field {s:?}"))),
        };
        Ok(field)
    }
}

/// Uniform grid of `n_points` times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Validation(format!("t_max must be positive, got {t_max}")));
    }
    if n_points < 2 {
        return Err(Error::Validation(format!("need at least 2 grid points, got {n_points}")));
    }
    let last = (n_points - 1) as f64;
    Ok((0..n_points).map(|k| t_max * k as f64 / last).collect())
}

/// Evolves a pure initial state under identical baths on `mask` and records
/// all coherence quantities on a uniform grid.
pub fn sweep(
    state: &PureState,
    params: BathParams,
    mask: &CouplingMask,
    t_max: f64,
    n_points: usize,
    form: HForm,
) -> Result<TimeSeries> {
    sweep_density(&density_of(state), params, mask, t_max, n_points, form)
}

/// [`sweep`] starting from an arbitrary density matrix.
pub fn sweep_density(
    rho0: &DensityMatrix,
    params: BathParams,
    mask: &CouplingMask,
    t_max: f64,
    n_points: usize,
    form: HForm,
) -> Result<TimeSeries> {
    mask.validate(rho0.n_qubits())?;
    let grid = uniform_grid(t_max, n_points)?;
    let samples = grid
        .par_iter()
        .map(|&t| {
            let h = h_closed(t, &params, form);
            let rho = apply_channels(rho0, mask, h)?;
            let record = CoherenceRecord::evaluate(&rho)?;
            if !record.is_finite() {
                return Err(Error::NumericalContract(format!("non-finite coherence at t = {t}")));
            }
            Ok(Sample { t, h, record })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries { state_name: String::new(), params, mask: mask.clone(), form, samples })
}

/// Coherence records for per-qubit (possibly heterogeneous) reservoirs.
pub fn sweep_reservoirs(
    rho0: &DensityMatrix,
    reservoirs: &Reservoirs,
    times: &[f64],
    form: HForm,
) -> Result<Vec<CoherenceRecord>> {
    times.par_iter().map(|&t| CoherenceRecord::evaluate(&reservoirs.evolve(rho0, t, form)?)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Semilog,
    Envelope,
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "semilog" => Ok(FitMethod::Semilog),
            "envelope" => Ok(FitMethod::Envelope),
            other => Err(Error::Validation(format!("unknown fit method {other:?} (expected semilog|envelope)"))),
        }
    }
}

/// Exponential decay fitted on a logarithmic scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Decay rate in units of `γ0`; `value ≈ exp(intercept - rate·t)`.
    pub rate: f64,
    /// Natural log of the fitted value at `t = 0`.
    pub intercept: f64,
    pub window: (f64, f64),
    pub method: FitMethod,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, r²)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r2.clamp(0.0, 1.0))
}

fn log_fit(ts: &[f64], vs: &[f64], method: FitMethod) -> Result<DecayFit> {
    if ts.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", ts.len())));
    }
    if let Some((t, v)) = ts.iter().zip(vs).find(|(_, &v)| !(v > LOG_FLOOR)) {
        return Err(Error::Fit(format!("value {v:e} at t = {t} is not positive; trim the window")));
    }
    let logs: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(ts, &logs);
    Ok(DecayFit { rate: -slope, intercept, window: (ts[0], ts[ts.len() - 1]), method, r_squared, n_points: ts.len() })
}

fn select_window(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Fit(format!("window ({lo}, {hi}) is empty")));
    }
    Ok(times.iter().zip(values).filter(|(&t, _)| t >= lo && t <= hi).map(|(&t, &v)| (t, v)).unzip())
}

/// Least-squares line through `(t, ln v)` for samples with `t` in `window`.
pub fn fit_semilog_values(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (ts, vs) = select_window(times, values, window)?;
    let mut fit = log_fit(&ts, &vs, FitMethod::Semilog)?;
    fit.window = window;
    Ok(fit)
}

pub fn fit_semilog(series: &TimeSeries, field: Field, window: (f64, f64)) -> Result<DecayFit> {
    fit_semilog_values(&series.times(), &series.values(field)?, window)
}

/// Indices of strict interior local maxima above [`PEAK_FLOOR`]. Of two equal
/// neighbouring samples only the earlier one qualifies.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            let (prev, v, next) = (values[i - 1], values[i], values[i + 1]);
            v > prev && v >= next && v > PEAK_FLOOR && v - prev.min(next) > PEAK_FLOOR
        })
        .collect()
}

/// Semilog fit through the local maxima of an oscillating decay.
pub fn fit_envelope_values(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    let peaks = local_maxima(values);
    if peaks.len() < 3 {
        return Err(Error::Fit(format!("envelope fit needs at least 3 local maxima, found {}", peaks.len())));
    }
    let ts: Vec<f64> = peaks.iter().map(|&i| times[i]).collect();
    let vs: Vec<f64> = peaks.iter().map(|&i| values[i]).collect();
    log_fit(&ts, &vs, FitMethod::Envelope)
}

pub fn fit_envelope(series: &TimeSeries, field: Field) -> Result<DecayFit> {
    fit_envelope_values(&series.times(), &series.values(field)?)
}

/// Envelope fit restricted to samples inside `window`.
pub fn fit_envelope_window(series: &TimeSeries, field: Field, window: (f64, f64)) -> Result<DecayFit> {
    let (ts, vs) = select_window(&series.times(), &series.values(field)?, window)?;
    fit_envelope_values(&ts, &vs)
}

/// Coherence dropping below a threshold and later reappearing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevivalEvent {
    /// First sample below `eps`.
    pub death_time: f64,
    /// First later sample above `REVIVAL_HYSTERESIS · eps`.
    pub revival_time: f64,
    /// Largest value between the revival and the next death (or the end).
    pub peak_after: f64,
}

pub fn detect_revivals_values(times: &[f64], values: &[f64], eps: f64) -> Vec<RevivalEvent> {
    let revive_at = REVIVAL_HYSTERESIS * eps;
    let mut events: Vec<RevivalEvent> = Vec::new();
    let mut death: Option<f64> = None;
    let mut open: Option<usize> = None;
    for (&t, &v) in times.iter().zip(values) {
        match death {
            None if v < eps => {
                death = Some(t);
                open = None;
            }
            None => {
                if let Some(k) = open {
                    events[k].peak_after = events[k].peak_after.max(v);
                }
            }
            Some(d) if v > revive_at => {
                events.push(RevivalEvent { death_time: d, revival_time: t, peak_after: v });
                open = Some(events.len() - 1);
                death = None;
            }
            Some(_) => {}
        }
    }
    events
}

pub fn detect_revivals(series: &TimeSeries, field: Field, eps: f64) -> Result<Vec<RevivalEvent>> {
    Ok(detect_revivals_values(&series.times(), &series.values(field)?, eps))
}

/// Mean of the final 10 % of samples when their spread is below `tol`.
pub fn steady_state_values(values: &[f64], tol: f64) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let k = values.len().div_ceil(10).max(2);
    let tail = &values[values.len() - k..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    (hi - lo < tol).then(|| tail.iter().sum::<f64>() / k as f64)
}

pub fn steady_state(series: &TimeSeries, field: Field, tol: f64) -> Result<Option<f64>> {
    Ok(steady_state_values(&series.values(field)?, tol))
}

/// Sign behaviour of the monogamy of coherence over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    AlwaysNonPositive,
    AlwaysNonNegative,
    Mixed,
}

/// Classifies values treating `|v| < tol` as sign-neutral. An all-zero series
/// counts as non-positive.
pub fn sign_class(values: &[f64], tol: f64) -> SignClass {
    let pos = values.iter().any(|&v| v >= tol);
    let neg = values.iter().any(|&v| v <= -tol);
    match (pos, neg) {
        (true, true) => SignClass::Mixed,
        (true, false) => SignClass::AlwaysNonNegative,
        _ => SignClass::AlwaysNonPositive,
    }
}

pub fn monogamy_sign(series: &TimeSeries, tol: f64) -> Result<SignClass> {
    Ok(sign_class(&series.values(Field::Monogamy)?, tol))
}
