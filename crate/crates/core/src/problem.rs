//! Ground set, constraints and problem instances.
//!
//! An instance maximizes a monotone objective `f` over subsets `A` of the
//! ground set subject to `h_i(A ∩ S_i) <= H_i` for every constraint `i`. The
//! ground set is partitioned into blocks `S_1..S_n`; each constraint is scoped
//! to one block. Blocks may share items when the instance does not assert
//! disjointness: the same item name listed in two blocks is one logical item,
//! seen by the objective once and by both constraints.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{checked_gain, CachedFn, Restricted, SetFunction};
use crate::set::ItemSet;

/// Position of an item inside a block. Both indices are zero-based; the
/// total order is lexicographic on `(block, local)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Element {
    pub block: usize,
    pub local: usize,
}

/// The ground set `S = S_1 ∪ .. ∪ S_n`.
///
/// Items are numbered in order of first appearance when the blocks are read
/// in `(block, local)` order, so item order agrees with element order.
#[derive(Clone, Debug)]
pub struct GroundSet {
    names: Vec<String>,
    blocks: Vec<Vec<usize>>,
    memberships: Vec<Vec<Element>>,
}

impl GroundSet {
    pub fn from_blocks<S: AsRef<str>>(blocks: &[Vec<S>]) -> Result<Self> {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut memberships: Vec<Vec<Element>> = Vec::new();
        let mut out = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            let mut items = Vec::with_capacity(block.len());
            for (local, name) in block.iter().enumerate() {
                let name = name.as_ref();
                let id = *ids.entry(name.to_string()).or_insert_with(|| {
                    names.push(name.to_string());
                    memberships.push(Vec::new());
                    names.len() - 1
                });
                if items.contains(&id) {
                    return Err(Error::InvalidInput(format!(
                        "item '{name}' listed twice in block {b}"
                    )));
                }
                memberships[id].push(Element { block: b, local });
                items.push(id);
            }
            out.push(items);
        }
        Ok(GroundSet {
            names,
            blocks: out,
            memberships,
        })
    }

    /// Disjoint blocks of the given sizes, items named `s{block}_{local}`.
    pub fn disjoint(sizes: &[usize]) -> Self {
        let blocks: Vec<Vec<String>> = sizes
            .iter()
            .enumerate()
            .map(|(b, &m)| (0..m).map(|k| format!("s{b}_{k}")).collect())
            .collect();
        Self::from_blocks(&blocks).expect("generated names are unique")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Item ids of block `b`, in local order.
    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn name(&self, item: usize) -> &str {
        &self.names[item]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn item_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Every `(block, local)` position holding `item`.
    pub fn elements_of(&self, item: usize) -> &[Element] {
        &self.memberships[item]
    }

    pub fn item_at(&self, e: Element) -> Result<usize> {
        self.blocks
            .get(e.block)
            .and_then(|b| b.get(e.local))
            .copied()
            .ok_or_else(|| Error::InvalidElement(format!("({}, {})", e.block, e.local)))
    }

    pub fn has_overlap(&self) -> bool {
        self.memberships.iter().any(|m| m.len() > 1)
    }

    pub fn empty_set(&self) -> ItemSet {
        ItemSet::empty(self.len())
    }

    pub fn full_set(&self) -> ItemSet {
        ItemSet::full(self.len())
    }

    /// Checked construction of a subset from item ids.
    pub fn set_of(&self, items: &[usize]) -> Result<ItemSet> {
        let mut s = self.empty_set();
        for &v in items {
            if v >= self.len() {
                return Err(Error::InvalidElement(format!("item #{v}")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn set_of_names<S: AsRef<str>>(&self, names: &[S]) -> Result<ItemSet> {
        let mut s = self.empty_set();
        for n in names {
            let id = self
                .item_id(n.as_ref())
                .ok_or_else(|| Error::InvalidElement(n.as_ref().to_string()))?;
            s.insert(id);
        }
        Ok(s)
    }

    pub fn names_of(&self, set: &ItemSet) -> Vec<String> {
        set.iter().map(|v| self.names[v].clone()).collect()
    }
}

/// `h(A ∩ S_b) <= budget`, with `h` defined over the local indices of block `b`.
#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    h: CachedFn,
    scope_block: usize,
    budget: f64,
    scope: Vec<usize>,
    local_of: Vec<Option<usize>>,
}

impl ConstraintSpec {
    /// Unresolved constraint; the scope is filled in by [`ProblemInstance::new`].
    pub fn new<F: SetFunction + 'static>(h: F, scope_block: usize, budget: f64) -> Self {
        Self::from_cached(CachedFn::from_fn(h), scope_block, budget)
    }

    pub fn from_cached(h: CachedFn, scope_block: usize, budget: f64) -> Self {
        ConstraintSpec {
            h,
            scope_block,
            budget,
            scope: Vec::new(),
            local_of: Vec::new(),
        }
    }

    pub fn h(&self) -> &CachedFn {
        &self.h
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn scope_block(&self) -> usize {
        self.scope_block
    }

    /// Item ids of the scope, in local order.
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn in_scope(&self, item: usize) -> bool {
        self.local_of.get(item).is_some_and(Option::is_some)
    }

    /// `A ∩ S_i` in local coordinates.
    pub fn localize(&self, set: &ItemSet) -> ItemSet {
        ItemSet::from_items(
            self.scope.len(),
            set.iter()
                .filter_map(|v| self.local_of.get(v).copied().flatten()),
        )
    }

    /// `h_i(A ∩ S_i)`.
    pub fn load(&self, set: &ItemSet) -> Result<f64> {
        self.h.evaluate(&self.localize(set))
    }

    /// `δ^i_B(A) = h_i((A ∪ B) ∩ S_i) - h_i(A ∩ S_i)`, with the monotonicity guard.
    pub fn marginal(&self, a: &ItemSet, b: &ItemSet) -> Result<f64> {
        let base = self.localize(a);
        let mut grown = base.clone();
        let extra = self.localize(b);
        for v in extra.iter() {
            grown.insert(v);
        }
        if grown == base {
            return Ok(0.0);
        }
        checked_gain(self.h.evaluate(&grown)? - self.h.evaluate(&base)?)
    }

    /// `δ^i_v(A)` for a single item.
    pub fn marginal_of(&self, a: &ItemSet, v: usize) -> Result<f64> {
        let Some(lv) = self.local_of.get(v).copied().flatten() else {
            return Ok(0.0);
        };
        let base = self.localize(a);
        if base.contains(lv) {
            return Ok(0.0);
        }
        checked_gain(self.h.evaluate(&base.with(lv))? - self.h.evaluate(&base)?)
    }

    fn resolve(&mut self, ground: &GroundSet) -> Result<()> {
        if self.scope_block >= ground.block_count() {
            return Err(Error::InvalidInput(format!(
                "constraint scope_block {} but only {} blocks",
                self.scope_block,
                ground.block_count()
            )));
        }
        self.scope = ground.block(self.scope_block).to_vec();
        if self.h.universe() != self.scope.len() {
            return Err(Error::InvalidInput(format!(
                "constraint on block {} is defined over {} items but the block has {}",
                self.scope_block,
                self.h.universe(),
                self.scope.len()
            )));
        }
        if self.budget.is_nan() || self.budget < 0.0 {
            return Err(Error::InvalidInput(format!(
                "budget {} must be a nonnegative number",
                self.budget
            )));
        }
        self.local_of = vec![None; ground.len()];
        for (k, &v) in self.scope.iter().enumerate() {
            self.local_of[v] = Some(k);
        }
        Ok(())
    }
}

/// `f(A ∪ B) - f(A)`, with the monotonicity guard.
pub fn marginal_gain(f: &CachedFn, a: &ItemSet, b: &ItemSet) -> Result<f64> {
    let ab = a.union(b);
    if &ab == a {
        return Ok(0.0);
    }
    checked_gain(f.evaluate(&ab)? - f.evaluate(a)?)
}

/// One failed check of [`ProblemInstance::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum Violation {
    ObjectiveNotNormalized {
        value: f64,
    },
    ConstraintNotNormalized {
        constraint: usize,
        value: f64,
    },
    ZeroSingletonCost {
        constraint: usize,
        item: String,
        value: f64,
    },
    Overlap {
        item: String,
        blocks: Vec<usize>,
    },
    EvaluationFailed {
        what: String,
        message: String,
    },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::ObjectiveNotNormalized { .. } => "objective-not-normalized",
            Violation::ConstraintNotNormalized { .. } => "constraint-not-normalized",
            Violation::ZeroSingletonCost { .. } => "zero-singleton-cost",
            Violation::Overlap { .. } => "overlap",
            Violation::EvaluationFailed { .. } => "evaluation-failed",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code() == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<_> = self.violations.iter().map(Violation::code).collect();
        write!(f, "{}", codes.join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    ground: GroundSet,
    objective: CachedFn,
    constraints: Vec<ConstraintSpec>,
    disjoint_blocks: bool,
}

impl ProblemInstance {
    pub fn new<F: SetFunction + 'static>(
        ground: GroundSet,
        objective: F,
        constraints: Vec<ConstraintSpec>,
        disjoint_blocks: bool,
    ) -> Result<Self> {
        Self::from_cached(
            ground,
            CachedFn::from_fn(objective),
            constraints,
            disjoint_blocks,
        )
    }

    pub fn from_cached(
        ground: GroundSet,
        objective: CachedFn,
        mut constraints: Vec<ConstraintSpec>,
        disjoint_blocks: bool,
    ) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidInput(
                "at least one constraint is required".into(),
            ));
        }
        if objective.universe() != ground.len() {
            return Err(Error::InvalidInput(format!(
                "objective is defined over {} items but the ground set has {}",
                objective.universe(),
                ground.len()
            )));
        }
        let mut covered = ground.empty_set();
        for c in &mut constraints {
            c.resolve(&ground)?;
            for &v in c.scope() {
                covered.insert(v);
            }
        }
        if covered.len() != ground.len() {
            let missing: Vec<_> = ground.names_of(&ground.full_set().difference(&covered));
            return Err(Error::InvalidInput(format!(
                "items not covered by any constraint scope: {}",
                missing.join(", ")
            )));
        }
        Ok(ProblemInstance {
            ground,
            objective,
            constraints,
            disjoint_blocks,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn item_count(&self) -> usize {
        self.ground.len()
    }

    pub fn objective(&self) -> &CachedFn {
        &self.objective
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn disjoint_blocks(&self) -> bool {
        self.disjoint_blocks
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.constraints
            .iter()
            .map(ConstraintSpec::budget)
            .collect()
    }

    pub fn evaluate(&self, set: &ItemSet) -> Result<f64> {
        self.objective.evaluate(set)
    }

    pub fn marginal_gain(&self, a: &ItemSet, b: &ItemSet) -> Result<f64> {
        marginal_gain(&self.objective, a, b)
    }

    /// `δ_v(A)` for a single item.
    pub fn gain_of(&self, a: &ItemSet, v: usize) -> Result<f64> {
        if a.contains(v) {
            return Ok(0.0);
        }
        checked_gain(self.objective.evaluate(&a.with(v))? - self.objective.evaluate(a)?)
    }

    pub fn constraint_marginal(&self, i: usize, a: &ItemSet, b: &ItemSet) -> Result<f64> {
        self.constraints[i].marginal(a, b)
    }

    /// `A ∈ F`: every `h_i(A ∩ S_i) <= H_i`.
    pub fn is_feasible(&self, set: &ItemSet) -> Result<bool> {
        for c in &self.constraints {
            if c.load(set)? > c.budget() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Indices of the constraints whose scope contains `item`.
    pub fn constraints_of(&self, item: usize) -> impl Iterator<Item = usize> + '_ {
        self.constraints
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.in_scope(item))
            .map(|(i, _)| i)
    }

    /// Check normalization, positive singleton costs and (if asserted) block
    /// disjointness. Violations are returned as data.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        match self.objective.evaluate(&self.ground.empty_set()) {
            Ok(v) if v != 0.0 => violations.push(Violation::ObjectiveNotNormalized { value: v }),
            Ok(_) => {}
            Err(e) => violations.push(Violation::EvaluationFailed {
                what: "objective".into(),
                message: e.to_string(),
            }),
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let n = c.scope().len();
            match c.h().evaluate(&ItemSet::empty(n)) {
                Ok(v) if v != 0.0 => violations.push(Violation::ConstraintNotNormalized {
                    constraint: i,
                    value: v,
                }),
                Ok(_) => {}
                Err(e) => violations.push(Violation::EvaluationFailed {
                    what: format!("constraint {i}"),
                    message: e.to_string(),
                }),
            }
            for (k, &item) in c.scope().iter().enumerate() {
                match c.h().evaluate(&ItemSet::from_items(n, [k])) {
                    Ok(v) if v.is_nan() || v <= 0.0 => {
                        violations.push(Violation::ZeroSingletonCost {
                            constraint: i,
                            item: self.ground.name(item).to_string(),
                            value: v,
                        })
                    }
                    Ok(_) => {}
                    Err(e) => violations.push(Violation::EvaluationFailed {
                        what: format!("constraint {i}"),
                        message: e.to_string(),
                    }),
                }
            }
        }
        if self.disjoint_blocks {
            for item in 0..self.ground.len() {
                let elems = self.ground.elements_of(item);
                if elems.len() > 1 {
                    violations.push(Violation::Overlap {
                        item: self.ground.name(item).to_string(),
                        blocks: elems.iter().map(|e| e.block).collect(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// `Err(InvalidInstance)` unless [`validate`](Self::validate) is clean.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(report))
        }
    }

    /// The sub-problem on block `b` alone: ground set `S_b`, the objective
    /// restricted to `S_b`, and the constraints scoped to `b`.
    pub fn restrict_to_block(&self, b: usize) -> Result<ProblemInstance> {
        if b >= self.ground.block_count() {
            return Err(Error::InvalidInput(format!("no block {b}")));
        }
        let items = self.ground.block(b).to_vec();
        let names: Vec<String> = items
            .iter()
            .map(|&v| self.ground.name(v).to_string())
            .collect();
        let ground = GroundSet::from_blocks(&[names])?;
        let objective = CachedFn::new(Arc::new(Restricted::new(
            self.objective.inner().clone(),
            items,
        )));
        let constraints = self
            .constraints
            .iter()
            .filter(|c| c.scope_block == b)
            .map(|c| ConstraintSpec::from_cached(c.h.fresh(), 0, c.budget))
            .collect();
        ProblemInstance::from_cached(ground, objective, constraints, true)
    }

    /// Same instance with empty memo caches.
    pub fn fresh(&self) -> ProblemInstance {
        ProblemInstance {
            ground: self.ground.clone(),
            objective: self.objective.fresh(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintSpec {
                    h: c.h.fresh(),
                    ..c.clone()
                })
                .collect(),
            disjoint_blocks: self.disjoint_blocks,
        }
    }
}
