//! JSON instance files.
//!
//! ```json
//! {"kind": "spg", "decomposition": "P(e(top),e(bottom))",
//!  "costs": {"top": ["0", "1", "inf"], "bottom": ["0", "10", "10"]},
//!  "n": 2, "n_hat": 2}
//! ```
//!
//! Rationals are strings (`"3"`, `"7/2"`, `"inf"` for cost tables) so that no
//! value passes through floating point.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costfn::{CostTable, TableParseError};
use crate::multicast::{MulticastError, MulticastInstance, PredictionAssignment, WeightedEdge};
use crate::rational;
use crate::spg::{Network, SpgError, SpgTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Spg(SpgSpec),
    Multicast(MulticastSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpgSpec {
    pub decomposition: String,
    pub costs: BTreeMap<String, Vec<String>>,
    pub n: usize,
    pub n_hat: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticastSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub source: String,
    pub terminals: Vec<String>,
    pub predictions: Vec<String>,
    /// Terminal name to predicted vertex name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {location}: {message}")]
    Invalid {
        path: String,
        location: String,
        message: String,
    },
}

fn invalid(path: &str, location: impl Into<String>, message: impl ToString) -> InstanceError {
    InstanceError::Invalid {
        path: path.to_string(),
        location: location.into(),
        message: message.to_string(),
    }
}

impl InstanceFile {
    /// Parses a document; `origin` names it in diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Json {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &FsPath) -> Result<Self, InstanceError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: origin.clone(),
            source,
        })?;
        Self::from_json(&text, &origin)
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance files always serialize");
        out.push('\n');
        out
    }

    /// Checks every constraint by building the in-memory instance.
    pub fn validate(&self, origin: &str) -> Result<(), InstanceError> {
        match self {
            InstanceFile::Spg(spec) => spec.network(origin).map(|_| ()),
            InstanceFile::Multicast(spec) => spec.instance(origin).map(|_| ()),
        }
    }
}

impl SpgSpec {
    pub fn network(&self, origin: &str) -> Result<Network, InstanceError> {
        let tree = SpgTree::parse(&self.decomposition).map_err(|e| invalid(origin, "decomposition", e))?;
        let mut tables = BTreeMap::new();
        for (edge, entries) in &self.costs {
            let table = CostTable::parse(entries).map_err(|e| {
                let index = match &e {
                    TableParseError::Entry { index, .. } => *index,
                    TableParseError::Invalid(v) => v.index(),
                };
                let message = match e {
                    TableParseError::Entry { source, .. } => source.to_string(),
                    TableParseError::Invalid(v) => v.to_string(),
                };
                invalid(origin, format!("costs.{edge}[{index}]"), message)
            })?;
            tables.insert(edge.clone(), table);
        }
        let net = Network::with_costs(tree, &tables).map_err(|e| {
            let location = match &e {
                SpgError::MissingCost(edge) | SpgError::UnknownEdge(edge) => format!("costs.{edge}"),
                _ => "costs".to_string(),
            };
            invalid(origin, location, e)
        })?;
        for (field, value) in [("n", self.n), ("n_hat", self.n_hat)] {
            if value == 0 {
                return Err(invalid(origin, field, "must be at least 1"));
            }
            if value > net.horizon() {
                return Err(invalid(
                    origin,
                    field,
                    format!("{value} exceeds the cost-table horizon {}", net.horizon()),
                ));
            }
        }
        Ok(net)
    }
}

impl MulticastSpec {
    pub fn instance(&self, origin: &str) -> Result<(MulticastInstance, Option<PredictionAssignment>), InstanceError> {
        let lookup = |location: String, name: &str| {
            self.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| invalid(origin, location, format!("unknown vertex `{name}`")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let weight = rational::parse(&e.weight).map_err(|err| invalid(origin, format!("edges[{i}].weight"), err))?;
            edges.push(WeightedEdge {
                u: lookup(format!("edges[{i}].u"), &e.u)?,
                v: lookup(format!("edges[{i}].v"), &e.v)?,
                weight,
            });
        }
        let source = lookup("source".into(), &self.source)?;
        let set = |field: &str, names: &[String]| {
            names
                .iter()
                .enumerate()
                .map(|(i, n)| lookup(format!("{field}[{i}]"), n))
                .collect::<Result<Vec<_>, _>>()
        };
        let terminals = set("terminals", &self.terminals)?;
        let predictions = set("predictions", &self.predictions)?;
        let inst = MulticastInstance::new(self.vertices.clone(), edges, source, &terminals, &predictions).map_err(|e| {
            let location = match &e {
                MulticastError::Disconnected(_) | MulticastError::UnknownVertex(_) => "vertices",
                MulticastError::DuplicateVertex(_) => "vertices",
                _ => "edges",
            };
            invalid(origin, location, e)
        })?;
        let assignment = match &self.assignment {
            None => None,
            Some(map) => {
                let mut eta = BTreeMap::new();
                for (t, h) in map {
                    let tv = lookup(format!("assignment.{t}"), t)?;
                    let hv = lookup(format!("assignment.{t}"), h)?;
                    eta.insert(tv, hv);
                }
                let eta = PredictionAssignment(eta);
                crate::multicast::error_of(&inst, &eta).map_err(|e| invalid(origin, "assignment", e))?;
                Some(eta)
            }
        };
        Ok((inst, assignment))
    }
}
