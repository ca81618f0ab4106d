//! The native JSON format for periodic sets.
//!
//! One object per set: {"id", "dim", "rank", "basis", "motif_frac",
//! "species"}. Motif coordinates are fractional along the basis and
//! absolute in the remaining directions; distances are in Angstroms. A file
//! may hold a single object or an array of them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PeriodicSet;

#[derive(Debug, Error)]
pub enum NativeError {
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NativeSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub dim: usize,
    pub rank: usize,
    pub basis: Vec<Vec<f64>>,
    pub motif_frac: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(NativeSet),
    Many(Vec<NativeSet>),
}

impl From<&PeriodicSet> for NativeSet {
    fn from(set: &PeriodicSet) -> Self {
        NativeSet {
            id: set.id().map(str::to_string),
            dim: set.dim(),
            rank: set.rank(),
            basis: set.basis().to_vec(),
            motif_frac: set.motif().to_vec(),
            species: set.species().map(<[String]>::to_vec),
        }
    }
}

impl TryFrom<NativeSet> for PeriodicSet {
    type Error = NativeError;

    fn try_from(n: NativeSet) -> Result<PeriodicSet, NativeError> {
        PeriodicSet::new(n.dim, n.rank, n.basis, n.motif_frac, n.species, n.id)
            .map_err(|e| NativeError::SchemaViolation(e.to_string()))
    }
}

/// Parses one set or an array of sets from JSON text.
pub fn read_native(text: &str) -> Result<Vec<PeriodicSet>, NativeError> {
    let parsed: OneOrMany = serde_json::from_str(text)
        .map_err(|e| NativeError::SchemaViolation(e.to_string()))?;
    let raw = match parsed {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    };
    raw.into_iter().map(PeriodicSet::try_from).collect()
}

/// Serializes one set as pretty JSON.
pub fn write_native(set: &PeriodicSet) -> String {
    serde_json::to_string_pretty(&NativeSet::from(set)).expect("plain data serializes")
}

/// Serializes a list of sets as a JSON array.
pub fn write_native_list(sets: &[PeriodicSet]) -> String {
    let raw: Vec<NativeSet> = sets.iter().map(NativeSet::from).collect();
    serde_json::to_string_pretty(&raw).expect("plain data serializes")
}
