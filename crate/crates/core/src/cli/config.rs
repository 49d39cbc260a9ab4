//! Experiment configuration: a line-oriented `key = value` format.
//!
//! ```text
//! # comment
//! state = wwbar          # named state or path to an amplitude file
//! lambda = 0.01
//! delta = 0.5
//! mask = 1,2,3           # omitted: every qubit is coupled
//! t_max = 20
//! n_points = 2000
//! h_form = standard
//! outputs = run.csv
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{sweep, TimeSeries, DEFAULT_POINTS, DEFAULT_T_MAX};
use crate::reservoir::{BathParams, CouplingMask, HForm};
use crate::states::{load_amplitudes, named_state, NamedState, PureState};
use crate::{Error, Result};

/// Register size used for named states unless `qubits` says otherwise.
pub const DEFAULT_QUBITS: usize = 3;

macro_rules! preset {
    ($name:literal) => {
        ($name, include_str!(concat!("../../presets/", $name, ".conf")))
    };
}

/// Shipped figure presets as `(name, config text)`.
pub const PRESETS: &[(&str, &str)] = &[
    preset!("fig2_markov"),
    preset!("fig2_markov_strict"),
    preset!("fig2_nonmarkov"),
    preset!("fig2_inset"),
    preset!("fig3_ghz_nonmarkov_1"),
    preset!("fig3_ghz_nonmarkov_2"),
    preset!("fig3_ghz_nonmarkov_3"),
    preset!("fig3_ghz_markov_1"),
    preset!("fig3_ghz_markov_2"),
    preset!("fig3_ghz_markov_3"),
    preset!("fig3_w_nonmarkov_1"),
    preset!("fig3_w_nonmarkov_2"),
    preset!("fig3_w_nonmarkov_3"),
    preset!("fig3_w_markov_1"),
    preset!("fig3_w_markov_2"),
    preset!("fig3_w_markov_3"),
    preset!("fig4_ghz_resonant"),
    preset!("fig4_ghz_detuned"),
    preset!("fig4_w_resonant"),
    preset!("fig4_w_detuned"),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Named(NamedState),
    File(PathBuf),
}

impl StateSpec {
    /// Named states win over file names; relative paths resolve against `base`.
    fn parse(value: &str, base: Option<&Path>) -> Self {
        match NamedState::from_str(value) {
            Ok(name) => StateSpec::Named(name),
            Err(_) => {
                let path = PathBuf::from(value);
                match base {
                    Some(dir) if path.is_relative() => StateSpec::File(dir.join(path)),
                    _ => StateSpec::File(path),
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Named(n) => n.label().to_string(),
            StateSpec::File(p) => p.display().to_string(),
        }
    }
}

/// Partially specified configuration; later sources override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDraft {
    pub state: Option<StateSpec>,
    pub qubits: Option<usize>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub mask: Option<CouplingMask>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub h_form: Option<HForm>,
    pub outputs: Vec<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse(format!("line {line}: invalid value {value:?} for {key}")))
}

impl ConfigDraft {
    /// Parses config text; `base` anchors relative file paths.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut draft = ConfigDraft::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {line_no}: expected `key = value`")))?;
            let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
            if seen.contains(&key) {
                return Err(Error::Parse(format!("line {line_no}: duplicate key {key}")));
            }
            match key.as_str() {
                "state" => draft.state = Some(StateSpec::parse(value, base)),
                "qubits" => draft.qubits = Some(parse_value(&key, value, line_no)?),
                "lambda" => draft.lambda = Some(parse_value(&key, value, line_no)?),
                "delta" => draft.delta = Some(parse_value(&key, value, line_no)?),
                "mask" => draft.mask = Some(value.parse()?),
                "t_max" => draft.t_max = Some(parse_value(&key, value, line_no)?),
                "n_points" => draft.n_points = Some(parse_value(&key, value, line_no)?),
                "h_form" => draft.h_form = Some(value.parse()?),
                "outputs" => {
                    draft.outputs = value
                        .split(',')
                        .map(str::trim)
                        .filter(|p| !p.is_empty())
                        .map(|p| match base {
                            Some(dir) if Path::new(p).is_relative() => dir.join(p),
                            _ => PathBuf::from(p),
                        })
                        .collect()
                }
                _ => return Err(Error::Parse(format!("line {line_no}: unknown key {key:?}"))),
            }
            seen.push(key);
        }
        Ok(draft)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    pub fn from_preset(name: &str) -> Result<Self> {
        let text = preset(name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Validation(format!("unknown preset {name:?}; available: {}", names.join(", ")))
        })?;
        Self::parse(text, None)
    }

    pub fn set_state(&mut self, value: &str) {
        self.state = Some(StateSpec::parse(value, None));
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let missing = |k: &str| Error::Validation(format!("missing required setting {k}"));
        let state = self.state.ok_or_else(|| missing("state"))?;
        let lambda = self.lambda.ok_or_else(|| missing("lambda"))?;
        let delta = self.delta.ok_or_else(|| missing("delta"))?;
        let params = BathParams::scaled(lambda, delta)?;
        let initial = match &state {
            StateSpec::Named(name) => named_state(*name, self.qubits.unwrap_or(DEFAULT_QUBITS))?,
            StateSpec::File(path) => {
                if !path.is_file() {
                    return Err(Error::Io(format!("amplitude file {} not found", path.display())));
                }
                let psi = load_amplitudes(path)?;
                if let Some(n) = self.qubits.filter(|&n| n != psi.n_qubits()) {
                    return Err(Error::Validation(format!(
                        "qubits = {n} but {} holds a {}-qubit state",
                        path.display(),
                        psi.n_qubits()
                    )));
                }
                psi
            }
        };
        let n = initial.n_qubits();
        let mask = self.mask.unwrap_or_else(|| CouplingMask::full(n));
        mask.validate(n)?;
        let t_max = self.t_max.unwrap_or(DEFAULT_T_MAX);
        let n_points = self.n_points.unwrap_or(DEFAULT_POINTS);
        crate::analysis::uniform_grid(t_max, n_points)?;
        Ok(ExperimentConfig {
            state,
            initial,
            params,
            mask,
            t_max,
            n_points,
            h_form: self.h_form.unwrap_or_default(),
            outputs: self.outputs,
        })
    }
}

/// Fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub state: StateSpec,
    pub initial: PureState,
    pub params: BathParams,
    pub mask: CouplingMask,
    pub t_max: f64,
    pub n_points: usize,
    pub h_form: HForm,
    pub outputs: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn n_qubits(&self) -> usize {
        self.initial.n_qubits()
    }

    pub fn sweep(&self) -> Result<TimeSeries> {
        let mut series = sweep(&self.initial, self.params, &self.mask, self.t_max, self.n_points, self.h_form)?;
        series.state_name = self.state.label();
        Ok(series)
    }
}
