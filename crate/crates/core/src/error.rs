use thiserror::Error;

use crate::mdp::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty objective")]
    EmptyObjective,

    #[error("oracle scale exceeded: {states} states, {actions} actions (limit 10 states, 3 actions)")]
    OracleScaleExceeded { states: usize, actions: usize },

    #[error("state index {index} out of range (model has {len} states)")]
    StateOutOfRange { index: usize, len: usize },

    #[error("action index {index} out of range (model has {len} actions)")]
    ActionOutOfRange { index: usize, len: usize },

    #[error("objective index {index} out of range ({len} objectives)")]
    ObjectiveOutOfRange { index: usize, len: usize },

    #[error("unknown objective name `{0}`")]
    UnknownObjective(String),

    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("no transition from state {from} to state {to} at position {position} of the sequence")]
    InvalidTransition { position: usize, from: usize, to: usize },

    #[error("dead state {0}: the strategy allows no action here")]
    DeadState(String),

    #[error("start state {0} is outside the strategy's domain")]
    OutsideDomain(String),

    #[error("rank unbounded; composed strategy undefined")]
    UnboundedRank,

    #[error("level sets were computed in {found} mode, expected {expected}")]
    ModeMismatch { expected: &'static str, found: &'static str },

    #[error("level sets belong to a product with {expected} states, got {found}")]
    ProductMismatch { expected: usize, found: usize },

    #[error("invalid gridworld config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invalid probability `{0}`")]
    InvalidProbability(String),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
