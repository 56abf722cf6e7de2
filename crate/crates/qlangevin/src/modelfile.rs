//! JSON model files.
//!
//! ```json
//! {"system": {"dim": 2, "H_S": [[[0,0],[0,0]],[[0,0],[1,0]]]},
//!  "bath": {"gamma": [0, 1], "state": {"type": "gibbs", "beta": 1.0}},
//!  "coupling": {"type": "ladder"}}
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs. With a ladder coupling
//! `V` is omitted and generated as `V_i = |e_0⟩⟨e_i|`.

use std::fs;
use std::path::Path;

use qlangevin_core::model::{ladder_couplings, BathSpec, ModelSpec, SystemSpec};
use qlangevin_core::{CMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub system: SystemSection,
    pub bath: BathSection,
    #[serde(default)]
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub dim: usize,
    #[serde(rename = "H_S")]
    pub h_s: RawMatrix,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<RawMatrix>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub gamma: Vec<f64>,
    pub state: BathState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BathState {
    Gibbs { beta: f64 },
    Weights { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Coupling {
    #[default]
    Explicit,
    Ladder,
}

fn to_matrix(raw: &RawMatrix, dim: usize, what: &str) -> Result<CMatrix, CliError> {
    if raw.len() != dim || raw.iter().any(|row| row.len() != dim) {
        return Err(CliError::Input(format!("{what} must be {dim}x{dim}")));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| C64::new(raw[r][c][0], raw[r][c][1])))
}

fn from_matrix(m: &CMatrix) -> RawMatrix {
    m.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl ModelFile {
    pub fn to_model(&self) -> Result<ModelSpec, CliError> {
        let d = self.system.dim;
        if d == 0 {
            return Err(CliError::Input("system.dim must be positive".into()));
        }
        let h = to_matrix(&self.system.h_s, d, "system.H_S")?;
        let couplings = match (self.coupling, &self.system.v) {
            (Coupling::Explicit, Some(vs)) => vs
                .iter()
                .enumerate()
                .map(|(i, v)| to_matrix(v, d, &format!("system.V[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            (Coupling::Explicit, None) => {
                return Err(CliError::Input("explicit coupling needs system.V".into()));
            }
            (Coupling::Ladder, None) => ladder_couplings(d)?,
            (Coupling::Ladder, Some(_)) => {
                return Err(CliError::Input("system.V must be omitted for a ladder coupling".into()));
            }
        };
        let gamma = self.bath.gamma.clone();
        let bath = match &self.bath.state {
            BathState::Gibbs { beta } => BathSpec::gibbs(gamma, *beta)?,
            BathState::Weights { weights } => BathSpec::with_weights(gamma, weights.clone())?,
        };
        Ok(ModelSpec::new(SystemSpec::new(h, couplings)?, bath)?)
    }

    /// Explicit-coupling file describing `model`.
    pub fn from_model(model: &ModelSpec) -> Self {
        let bath = model.bath();
        let state = match bath.inverse_temperature() {
            Some(beta) => BathState::Gibbs { beta },
            None => BathState::Weights { weights: bath.weights().to_vec() },
        };
        ModelFile {
            system: SystemSection {
                dim: model.system_dim(),
                h_s: from_matrix(model.hamiltonian()),
                v: Some(model.couplings().iter().map(from_matrix).collect()),
            },
            bath: BathSection { gamma: bath.gamma().to_vec(), state },
            coupling: Coupling::Explicit,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }
}

pub fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let file = ModelFile::from_json(&text).map_err(|source| CliError::Parse { path: path.into(), source })?;
    file.to_model()
}

pub fn save_model(model: &ModelSpec, path: &Path) -> Result<(), CliError> {
    let mut text = ModelFile::from_model(model).to_json();
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}
