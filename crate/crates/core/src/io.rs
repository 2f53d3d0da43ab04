//! Instance files.
//!
//! An instance is a JSON document:
//!
//! ```json
//! {
//!   "blocks": [["a", "b"], ["c"]],
//!   "disjoint_blocks": true,
//!   "objective": {"kind": "modular", "payload": {"weights": {"a": 3, "b": 2, "c": 5}}},
//!   "constraints": [
//!     {"kind": "budget", "payload": {"costs": [2, 1]}, "budget": 2, "scope_block": 0},
//!     {"kind": "cardinality", "budget": 1, "scope_block": 1}
//!   ]
//! }
//! ```
//!
//! Items are named in `blocks`; a name listed in several blocks is one shared
//! item. Item order is first appearance. Constraint payload arrays are
//! aligned with the items of their scope block. Table values are indexed by
//! bitmask over item order (objective) or scope order (constraint). See the
//! README for every kind.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{CachedFn, Cardinality, Coverage, Modular, SetFunction, Table};
use crate::kalman::{KalmanInstance, KalmanObjective};
use crate::latency::LatencyProfile;
use crate::problem::{ConstraintSpec, GroundSet, ProblemInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub blocks: Vec<Vec<String>>,
    #[serde(default)]
    pub disjoint_blocks: bool,
    pub objective: ObjectiveSpec,
    pub constraints: Vec<ConstraintEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "payload",
    rename_all = "lowercase",
    deny_unknown_fields
)]
pub enum ObjectiveSpec {
    Modular(ModularWeights),
    Coverage(NamedCoverage),
    Table(TableValues),
    Kalman(KalmanPayload),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularWeights {
    pub weights: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCoverage {
    /// Points covered by each item.
    pub covers: BTreeMap<String, Vec<usize>>,
    /// Weight of each point; unit weights when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableValues {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KalmanPayload {
    pub state_dim: usize,
    pub horizon: usize,
    pub sensors_per_step: usize,
    /// `horizon` row-major `state_dim x state_dim` matrices.
    pub a: Vec<Vec<f64>>,
    /// `horizon + 1` row-major `sensors_per_step x state_dim` matrices.
    pub c: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub pi0: Vec<f64>,
    /// Noise level of every sensor, per step.
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    #[serde(flatten)]
    pub spec: ConstraintKind,
    pub budget: f64,
    pub scope_block: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum ConstraintKind {
    Budget(Costs),
    Cardinality,
    Latency(Latencies),
    Table(TableValues),
    Coverage(IndexedCoverage),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Costs {
    pub costs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Latencies {
    pub c: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexedCoverage {
    pub covers: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_weights: Option<Vec<f64>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

fn matrix(name: &str, rows: usize, cols: usize, data: &[f64]) -> Result<DMatrix<f64>> {
    if data.len() != rows * cols {
        return Err(Error::InvalidInput(format!(
            "{name} needs {rows}x{cols} = {} entries, got {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

fn aligned(name: &str, block: usize, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidInput(format!(
            "{name} for block {block} has {got} entries but the block has {expected} items"
        )));
    }
    Ok(())
}

fn known_names<'a>(
    ground: &GroundSet,
    mut keys: impl Iterator<Item = &'a String>,
    what: &str,
) -> Result<()> {
    if let Some(extra) = keys.find(|k| ground.item_id(k).is_none()) {
        return Err(Error::InvalidElement(format!(
            "{what} for unknown item '{extra}'"
        )));
    }
    Ok(())
}

fn coverage(covers: Vec<Vec<usize>>, point_weights: Option<Vec<f64>>) -> Result<Coverage> {
    match point_weights {
        Some(w) => Coverage::weighted(covers, w),
        None => Ok(Coverage::new(covers)),
    }
}

impl KalmanPayload {
    pub fn to_instance(&self) -> Result<KalmanInstance> {
        let n = self.state_dim;
        let m = self.sensors_per_step;
        if self.a.len() != self.horizon || self.c.len() != self.horizon + 1 {
            return Err(Error::InvalidInput(format!(
                "horizon {} needs {} dynamics and {} measurement matrices",
                self.horizon,
                self.horizon,
                self.horizon + 1
            )));
        }
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(k, x)| matrix(&format!("a[{k}]"), n, n, x))
            .collect::<Result<_>>()?;
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(k, x)| matrix(&format!("c[{k}]"), m, n, x))
            .collect::<Result<_>>()?;
        KalmanInstance::new(
            a,
            c,
            matrix("w", n, n, &self.w)?,
            matrix("pi0", n, n, &self.pi0)?,
            self.sigma.clone(),
        )
    }

    pub fn from_instance(k: &KalmanInstance) -> Self {
        let flat = |m: &DMatrix<f64>| m.transpose().iter().copied().collect::<Vec<_>>();
        KalmanPayload {
            state_dim: k.state_dim(),
            horizon: k.horizon(),
            sensors_per_step: k.sensors_per_step(),
            a: k.a().iter().map(flat).collect(),
            c: k.c().iter().map(flat).collect(),
            w: flat(k.w()),
            pi0: flat(k.pi0()),
            sigma: k.sigma().to_vec(),
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        let ground = GroundSet::from_blocks(&self.blocks)?;
        let objective = self.objective(&ground)?;
        let constraints = self
            .constraints
            .iter()
            .map(|c| self.constraint(&ground, c))
            .collect::<Result<Vec<_>>>()?;
        ProblemInstance::from_cached(ground, objective, constraints, self.disjoint_blocks)
    }

    fn objective(&self, ground: &GroundSet) -> Result<CachedFn> {
        let f: Box<dyn SetFunction> = match &self.objective {
            ObjectiveSpec::Modular(m) => {
                known_names(ground, m.weights.keys(), "weight")?;
                let w = ground
                    .names()
                    .iter()
                    .map(|n| {
                        m.weights
                            .get(n)
                            .copied()
                            .ok_or_else(|| Error::InvalidInput(format!("no weight for item '{n}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Box::new(Modular::new(w))
            }
            ObjectiveSpec::Coverage(c) => {
                known_names(ground, c.covers.keys(), "cover")?;
                let covers = ground
                    .names()
                    .iter()
                    .map(|n| c.covers.get(n).cloned().unwrap_or_default())
                    .collect();
                Box::new(coverage(covers, c.point_weights.clone())?)
            }
            ObjectiveSpec::Table(t) => Box::new(Table::new(ground.len(), t.values.clone())?),
            ObjectiveSpec::Kalman(k) => {
                let sizes = ground.block_sizes();
                if ground.has_overlap()
                    || sizes.len() != k.horizon + 1
                    || sizes.iter().any(|&s| s != k.sensors_per_step)
                {
                    return Err(Error::InvalidInput(format!(
                        "a kalman objective needs {} disjoint blocks of {} sensors",
                        k.horizon + 1,
                        k.sensors_per_step
                    )));
                }
                Box::new(KalmanObjective::new(k.to_instance()?)?)
            }
        };
        Ok(CachedFn::new(f.into()))
    }

    fn constraint(&self, ground: &GroundSet, c: &ConstraintEntry) -> Result<ConstraintSpec> {
        let b = c.scope_block;
        if b >= ground.block_count() {
            return Err(Error::InvalidInput(format!(
                "scope_block {b} does not exist"
            )));
        }
        let size = ground.block(b).len();
        let h: Box<dyn SetFunction> = match &c.spec {
            ConstraintKind::Budget(x) => {
                aligned("costs", b, size, x.costs.len())?;
                Box::new(Modular::new(x.costs.clone()))
            }
            ConstraintKind::Cardinality => Box::new(Cardinality::new(size)),
            ConstraintKind::Latency(x) => {
                aligned("latencies", b, size, x.c.len())?;
                Box::new(LatencyProfile::new(x.c.clone(), x.t.clone())?)
            }
            ConstraintKind::Table(x) => Box::new(Table::new(size, x.values.clone())?),
            ConstraintKind::Coverage(x) => {
                aligned("covers", b, size, x.covers.len())?;
                Box::new(coverage(x.covers.clone(), x.point_weights.clone())?)
            }
        };
        Ok(ConstraintSpec::from_cached(
            CachedFn::new(h.into()),
            b,
            c.budget,
        ))
    }
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    InstanceFile::load(path)?.build()
}
