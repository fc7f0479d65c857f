//! Input document: observable, pre- and postselection, options and an
//! optional witness section.

use std::collections::BTreeMap;

use serde::Deserialize;
use weakval::linalg::ComplexRepr;
use weakval::noise::{self, ChannelFamily, KrausChannel};
use weakval::phase::{pauli_compose, PauliString};
use weakval::qstate::{mix, num_qubits_for, DensityMatrixState, GateSequence, PureState};
use weakval::{Complex64, ComplexMatrix};

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub observable: ObservableSpec,
    pub preselect: StateSpec,
    #[serde(default)]
    pub postselect: Option<StateSpec>,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Matrix(ComplexMatrix),
    Pauli(BTreeMap<String, ComplexRepr>),
}

/// Exactly one field must be set; `density` and `mixture` are only valid for
/// preselection.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    vector: Option<Vec<ComplexRepr>>,
    gates: Option<GateSequence>,
    density: Option<ComplexMatrix>,
    mixture: Option<Vec<MixtureEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureEntry {
    p: f64,
    state: StateSpec,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub epsilon_orth: Option<f64>,
    pub epsilon_mag: Option<f64>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    /// Accepted for forward compatibility; known keys are `eig_tol`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub theta: f64,
    /// Noise applied after the ideal gate.
    pub noise: Option<ChannelSpec>,
    /// The complete physical operation, used as is.
    pub channel: Option<ChannelSpec>,
    pub sweep: Option<SweepSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub family: ChannelFamily,
    pub grid: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity,
    Depolarizing { epsilon: f64 },
    AmplitudeDamping { gamma: f64 },
    PhaseDamping { lambda: f64 },
    /// `e^{−iδθ A}` with the problem's observable as generator.
    Overrotation { delta_theta: f64 },
    Kraus {
        ops: Vec<ComplexMatrix>,
        #[serde(default)]
        label: Option<String>,
    },
}

pub enum Preselect {
    Pure(PureState),
    Mixed(DensityMatrixState),
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("cannot parse input: {e}")))
    }

    pub fn observable(&self) -> Result<ComplexMatrix, CliError> {
        let a = match &self.observable {
            ObservableSpec::Matrix(m) => m.clone(),
            ObservableSpec::Pauli(map) => {
                let mut parsed = BTreeMap::new();
                for (k, v) in map {
                    parsed.insert(PauliString::new(k)?, Complex64::from(*v));
                }
                pauli_compose(&parsed)?
            }
        };
        if !weakval::linalg::is_hermitian(&a, weakval::linalg::HERMITIAN_TOL) {
            return Err(weakval::Error::NotHermitian {
                residual: a.hermitian_residual(),
            }
            .into());
        }
        Ok(a)
    }

    pub fn preselect(&self, dim: usize) -> Result<Preselect, CliError> {
        self.preselect.build(dim, "preselect", true)
    }

    pub fn pure_preselect(&self, dim: usize) -> Result<Option<PureState>, CliError> {
        Ok(match self.preselect(dim)? {
            Preselect::Pure(p) => Some(p),
            Preselect::Mixed(_) => None,
        })
    }

    pub fn postselect(&self, dim: usize) -> Result<Option<PureState>, CliError> {
        let Some(spec) = &self.postselect else {
            return Ok(None);
        };
        match spec.build(dim, "postselect", false)? {
            Preselect::Pure(p) => Ok(Some(p)),
            Preselect::Mixed(_) => unreachable!("mixed forms rejected for postselect"),
        }
    }

    pub fn require_postselect(&self, dim: usize) -> Result<PureState, CliError> {
        self.postselect(dim)?
            .ok_or_else(|| CliError::input("this command needs a \"postselect\" state"))
    }

    pub fn eig_tol(&self) -> f64 {
        self.options
            .tolerances
            .get("eig_tol")
            .copied()
            .unwrap_or(weakval::weakcore::DEFAULT_EIG_TOL)
    }
}

impl StateSpec {
    fn build(&self, dim: usize, field: &str, allow_mixed: bool) -> Result<Preselect, CliError> {
        let forms = [
            self.vector.is_some(),
            self.gates.is_some(),
            self.density.is_some(),
            self.mixture.is_some(),
        ];
        let count = forms.iter().filter(|&&f| f).count();
        if count != 1 {
            return Err(CliError::input(format!(
                "{field} needs exactly one of \"vector\", \"gates\"{}, found {count}",
                if allow_mixed { ", \"density\", \"mixture\"" } else { "" }
            )));
        }
        if !allow_mixed && (self.density.is_some() || self.mixture.is_some()) {
            return Err(CliError::input(format!("{field} must be a pure state (\"vector\" or \"gates\")")));
        }
        if let Some(v) = &self.vector {
            if v.len() != dim {
                return Err(dimension(field, dim, v.len()));
            }
            let amps = v.iter().map(|&z| Complex64::from(z)).collect();
            return Ok(Preselect::Pure(PureState::new(amps)?));
        }
        if let Some(seq) = &self.gates {
            let n = num_qubits_for(dim)?;
            return Ok(Preselect::Pure(PureState::from_sequence(seq.clone(), n)?));
        }
        if let Some(m) = &self.density {
            if m.dim() != dim {
                return Err(dimension(field, dim, m.dim()));
            }
            return Ok(Preselect::Mixed(DensityMatrixState::new(m.clone())?));
        }
        let entries = self.mixture.as_ref().expect("one form present");
        let mut pairs = Vec::with_capacity(entries.len());
        for (k, e) in entries.iter().enumerate() {
            match e.state.build(dim, &format!("{field}.mixture[{k}].state"), false)? {
                Preselect::Pure(p) => pairs.push((e.p, p)),
                Preselect::Mixed(_) => unreachable!(),
            }
        }
        Ok(Preselect::Mixed(mix(&pairs)?))
    }
}

fn dimension(field: &str, expected: usize, found: usize) -> CliError {
    CliError::input(format!(
        "{field} has dimension {found} but the observable has dimension {expected}"
    ))
}

impl ChannelSpec {
    pub fn build(&self, a: &ComplexMatrix) -> Result<KrausChannel, CliError> {
        Ok(match self {
            ChannelSpec::Identity => KrausChannel::identity(a.dim()),
            ChannelSpec::Depolarizing { epsilon } => noise::depolarizing(*epsilon)?,
            ChannelSpec::AmplitudeDamping { gamma } => noise::amplitude_damping(*gamma)?,
            ChannelSpec::PhaseDamping { lambda } => noise::phase_damping(*lambda)?,
            ChannelSpec::Overrotation { delta_theta } => noise::coherent_overrotation(a, *delta_theta)?,
            ChannelSpec::Kraus { ops, label } => {
                KrausChannel::new(ops.clone(), label.clone().unwrap_or_else(|| "kraus".into()))?
            }
        })
    }
}
