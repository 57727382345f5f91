//! Scenario schema: one JSON config describes a model, an ordered task
//! list, a seed and caps. Complex entries are [re, im] pairs, matrices
//! row-major.

use riqmc::micromaser::MicromaserJson;
use riqmc::tensor::DensityState;
use riqmc::transition::{matrix_from_pairs, CouplingModel, Direction};
use riqmc::Result as CoreResult;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub caps: Caps,
}

fn default_seed() -> u64 {
    0
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct Caps {
    /// Hard cap on the joint dimension N·dⁿ of dense chain objects.
    pub max_chain_dim: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Micromaser family: JC preset {n_levels, lambda, omega0_t} or
    /// explicit blocks.
    Micromaser(MicromaserJson),
    /// Explicit coupling unitary with reference states.
    Coupling {
        system_dim: usize,
        ancilla_dim: usize,
        unitary: Vec<[f64; 2]>,
        phi: Vec<[f64; 2]>,
        psi: Vec<[f64; 2]>,
        #[serde(default = "default_direction")]
        direction: Direction,
    },
}

fn default_direction() -> Direction {
    Direction::Forward
}

impl ModelSpec {
    pub fn build(&self) -> CoreResult<CouplingModel> {
        match self {
            ModelSpec::Micromaser(j) => riqmc::micromaser::build_micromaser(&j.to_params()?),
            ModelSpec::Coupling {
                system_dim,
                ancilla_dim,
                unitary,
                phi,
                psi,
                direction,
            } => {
                let u = matrix_from_pairs(unitary, system_dim * ancilla_dim)?;
                let phi = DensityState::on_system(matrix_from_pairs(phi, *system_dim)?)?;
                let psi = DensityState::on_system(matrix_from_pairs(psi, *ancilla_dim)?)?;
                CouplingModel::new(u, phi, psi, *direction)
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    /// Computational basis state |index⟩.
    Basis { index: usize },
    /// Explicit density matrix, row-major [re, im] pairs.
    Density { matrix: Vec<[f64; 2]>, dim: usize },
}

impl StateSpec {
    pub fn build(&self, expect_dim: usize) -> CoreResult<DensityState> {
        match self {
            StateSpec::Basis { index } => DensityState::basis_state(*index, expect_dim),
            StateSpec::Density { matrix, dim } => {
                DensityState::on_system(matrix_from_pairs(matrix, *dim)?)
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Task {
    /// Stationary-state report for T_ψ.
    Stationary,
    /// Asymptotic-completeness certificate; optionally a Z' defect
    /// profile over `profile_n` iterations.
    CertifyAc {
        #[serde(default)]
        profile_n: usize,
    },
    /// Injectivity criterion report.
    D1 {
        #[serde(default = "default_n_small")]
        n_max: usize,
    },
    /// Observability rank growth of the reverse transition.
    Observability {
        #[serde(default = "default_n_obs")]
        n_max: usize,
    },
    /// Preparing-sequence synthesis.
    Synth {
        target: StateSpec,
        method: SynthKind,
        #[serde(default = "default_n_synth")]
        n_max: usize,
    },
    /// Constant-input protocol.
    Protocol {
        input: StateSpec,
        #[serde(default = "default_n_protocol")]
        n_max: usize,
    },
    /// Parameter sweep over micromaser presets.
    Sweep {
        parameter: SweepParameter,
        values: Vec<f64>,
        task: Box<Task>,
    },
}

fn default_n_small() -> usize {
    20
}
fn default_n_obs() -> usize {
    4
}
fn default_n_synth() -> usize {
    8
}
fn default_n_protocol() -> usize {
    100
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Forward,
    Mixed,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Omega0T,
    Lambda,
}

impl Task {
    pub fn name(&self) -> String {
        match self {
            Task::Stationary => "stationary".into(),
            Task::CertifyAc { .. } => "certify-ac".into(),
            Task::D1 { .. } => "d1".into(),
            Task::Observability { .. } => "observability".into(),
            Task::Synth { .. } => "synth".into(),
            Task::Protocol { .. } => "protocol".into(),
            Task::Sweep { parameter, .. } => format!("sweep-{parameter:?}").to_lowercase(),
        }
    }

    /// Largest chain length the task will materialize densely.
    pub fn dense_chain_need(&self) -> Option<usize> {
        match self {
            Task::Synth { n_max, .. } => Some(*n_max),
            Task::Observability { n_max } => Some(*n_max),
            Task::D1 { .. } | Task::CertifyAc { .. } | Task::Stationary => None,
            Task::Protocol { .. } => None,
            Task::Sweep { task, .. } => task.dense_chain_need(),
        }
    }
}

/// Parses with JSON-pointer paths on schema violations.
pub fn parse_scenario(text: &str) -> Result<Scenario, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        // render segments as a JSON pointer: a.b[3].c -> /a/b/3/c
        let raw = e.path().to_string();
        let pointer = format!(
            "/{}",
            raw.replace('[', "/").replace(']', "").replace('.', "/")
        );
        format!("config error at {pointer}: {}", e.inner())
    })
}
