//! Shipped models and the trace properties they are expected to satisfy.

mod check;

pub use check::{
    check_improv_consistency, check_mutual_exclusion, check_wait_gate, CheckError, CheckReport,
};

use crate::dsl::{self, Diagnostic, ModelAst};

pub const BUILTIN: &[&str] = &["chord", "factorial", "ccfomi", "filters", "stress"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (builtin models: chord, factorial, ccfomi, filters, stress)")]
    UnknownModel(String),
    #[error("builtin model `{name}` does not validate: {diagnostics:?}")]
    Invalid {
        name: String,
        diagnostics: Vec<Diagnostic>,
    },
}

/// Source text of a builtin model.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "chord" => include_str!("../../../../models/chord.ntcc"),
        "factorial" => include_str!("../../../../models/factorial.ntcc"),
        "ccfomi" => include_str!("../../../../models/ccfomi.ntcc"),
        "filters" => include_str!("../../../../models/filters.ntcc"),
        "stress" => include_str!("../../../../models/stress.ntcc"),
        _ => return None,
    })
}

/// Event input shipped with a builtin model, if any.
pub fn default_input(name: &str) -> Option<&'static str> {
    match name {
        "ccfomi" => Some(include_str!("../../../../models/inputs/ccfomi_player.jsonl")),
        "factorial" => Some(include_str!("../../../../models/inputs/factorial.jsonl")),
        _ => None,
    }
}

pub fn load_builtin(name: &str) -> Result<ModelAst, ModelError> {
    let src = source(name).ok_or_else(|| ModelError::UnknownModel(name.to_string()))?;
    dsl::load(src).map_err(|diagnostics| ModelError::Invalid {
        name: name.to_string(),
        diagnostics,
    })
}
