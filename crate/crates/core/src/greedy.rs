//! The two greedy solvers.
//!
//! Both repeatedly pick the remaining item with the largest ratio of
//! objective gain to constraint cost, keep it if the result stays within
//! budget and discard it otherwise. Discarded items are never revisited.
//!
//! Ties go to the lowest item, then the lowest constraint index. A zero cost
//! with positive gain is an infinite ratio; among infinite ratios the larger
//! gain wins. Zero gain over zero cost is a ratio of 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ext;
use crate::problem::ProblemInstance;
use crate::set::ItemSet;

/// Gain-per-cost with the conventions above.
pub fn greedy_ratio(gain: f64, cost: f64) -> f64 {
    if cost > 0.0 {
        gain / cost
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug)]
struct Choice {
    item: usize,
    constraint: usize,
    ratio: f64,
    gain: f64,
    cost: f64,
}

impl Choice {
    fn beats(&self, other: &Choice) -> bool {
        self.ratio > other.ratio
            || (self.ratio == f64::INFINITY
                && other.ratio == f64::INFINITY
                && self.gain > other.gain)
    }
}

fn pick(candidates: impl Iterator<Item = Result<Choice>>) -> Result<Option<Choice>> {
    let mut best: Option<Choice> = None;
    for c in candidates {
        let c = c?;
        if best.as_ref().is_none_or(|b| c.beats(b)) {
            best = Some(c);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    BudgetViolation,
}

/// One iteration of a greedy loop.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub candidate: String,
    pub item: usize,
    #[serde(serialize_with = "ext::serialize")]
    pub ratio: f64,
    pub objective_marginal: f64,
    pub constraint_marginal: f64,
    pub constraint_index: usize,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalChoice {
    AcceptedSet,
    BestSingleton,
}

/// Decision record of the parallel solver on one block.
#[derive(Clone, Debug, Serialize)]
pub struct BlockTrace {
    pub block: usize,
    pub constraint_index: Option<usize>,
    pub steps: Vec<StepRecord>,
    /// Items kept by the loop, in order.
    pub accepted: Vec<usize>,
    pub rejected: Vec<(usize, RejectReason)>,
    /// Number of items kept before the first rejection.
    pub truncation_index: usize,
    pub first_rejected: Option<usize>,
    /// Highest-value singleton over the whole block.
    pub best_singleton: Option<usize>,
    /// Highest-value singleton that fits the budget; this is the fallback
    /// compared against the accepted set.
    pub best_feasible_singleton: Option<usize>,
    pub final_choice: FinalChoice,
    /// Items this block contributes to the solution.
    pub chosen: Vec<usize>,
}

impl BlockTrace {
    /// True when the overall best singleton does not fit the budget.
    pub fn singleton_infeasible(&self) -> bool {
        self.best_singleton != self.best_feasible_singleton
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParallelResult {
    pub solution: ItemSet,
    pub value: f64,
    pub traces: Vec<BlockTrace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptedStep {
    pub item: usize,
    pub constraint_index: usize,
    #[serde(serialize_with = "ext::serialize")]
    pub ratio: f64,
    pub objective_marginal: f64,
    pub constraint_marginal: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RejectedStep {
    pub item: usize,
    #[serde(serialize_with = "ext::serialize")]
    pub ratio: f64,
    pub reason: RejectReason,
}

/// Decision record of the general solver.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralTrace {
    pub steps: Vec<StepRecord>,
    pub accepted: Vec<AcceptedStep>,
    pub rejected: Vec<RejectedStep>,
    /// Number of items accepted before the first rejection.
    pub prefix_length: usize,
}

impl GeneralTrace {
    pub fn accepted_items(&self) -> Vec<usize> {
        self.accepted.iter().map(|s| s.item).collect()
    }

    /// `A_j`: the first `j` accepted items.
    pub fn prefix_set(&self, universe: usize, j: usize) -> ItemSet {
        ItemSet::from_items(universe, self.accepted[..j].iter().map(|s| s.item))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralResult {
    pub solution: ItemSet,
    pub value: f64,
    pub trace: GeneralTrace,
}

/// Per-block greedy on disjoint blocks, blocks run on the default executor.
pub fn parallel_greedy(instance: &ProblemInstance) -> Result<ParallelResult> {
    parallel_greedy_with(instance, Exec::default())
}

pub fn parallel_greedy_with(instance: &ProblemInstance, exec: Exec) -> Result<ParallelResult> {
    if !instance.disjoint_blocks() {
        return Err(Error::UnsupportedStructure(
            "the parallel solver needs disjoint blocks".into(),
        ));
    }
    instance.ensure_valid()?;
    let ground = instance.ground();
    let mut owner: Vec<Option<usize>> = vec![None; ground.block_count()];
    for (i, c) in instance.constraints().iter().enumerate() {
        if owner[c.scope_block()].replace(i).is_some() {
            return Err(Error::UnsupportedStructure(format!(
                "block {} has more than one constraint",
                c.scope_block()
            )));
        }
    }
    let traces = exec
        .map_range(0..ground.block_count(), |b| {
            block_greedy(instance, b, owner[b])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let solution = ItemSet::from_items(
        instance.item_count(),
        traces.iter().flat_map(|t| t.chosen.iter().copied()),
    );
    let value = instance.evaluate(&solution)?;
    Ok(ParallelResult {
        solution,
        value,
        traces,
    })
}

fn block_greedy(instance: &ProblemInstance, b: usize, ci: Option<usize>) -> Result<BlockTrace> {
    let items = instance.ground().block(b);
    let n = instance.item_count();
    let mut trace = BlockTrace {
        block: b,
        constraint_index: ci,
        steps: Vec::new(),
        accepted: Vec::new(),
        rejected: Vec::new(),
        truncation_index: 0,
        first_rejected: None,
        best_singleton: None,
        best_feasible_singleton: None,
        final_choice: FinalChoice::AcceptedSet,
        chosen: Vec::new(),
    };
    let Some(ci) = ci else {
        return Ok(trace);
    };
    let c = &instance.constraints()[ci];
    let empty = ItemSet::empty(n);

    let mut best: Option<(usize, f64)> = None;
    let mut best_feasible: Option<(usize, f64)> = None;
    for &v in items {
        let single = empty.with(v);
        let fv = instance.evaluate(&single)?;
        if best.is_none_or(|(_, x)| fv > x) {
            best = Some((v, fv));
        }
        if c.load(&single)? <= c.budget() && best_feasible.is_none_or(|(_, x)| fv > x) {
            best_feasible = Some((v, fv));
        }
    }
    trace.best_singleton = best.map(|(v, _)| v);
    trace.best_feasible_singleton = best_feasible.map(|(v, _)| v);

    let mut remaining: Vec<usize> = items.to_vec();
    let mut current = empty.clone();
    while !remaining.is_empty() {
        let choice = pick(remaining.iter().map(|&v| {
            let gain = instance.gain_of(&current, v)?;
            let cost = c.marginal_of(&current, v)?;
            Ok(Choice {
                item: v,
                constraint: ci,
                ratio: greedy_ratio(gain, cost),
                gain,
                cost,
            })
        }))?
        .expect("nonempty candidate list");
        let grown = current.with(choice.item);
        let accepted = c.load(&grown)? <= c.budget();
        trace.steps.push(StepRecord {
            step: trace.steps.len(),
            candidate: instance.ground().name(choice.item).to_string(),
            item: choice.item,
            ratio: choice.ratio,
            objective_marginal: choice.gain,
            constraint_marginal: choice.cost,
            constraint_index: ci,
            accepted,
        });
        if accepted {
            current = grown;
            trace.accepted.push(choice.item);
            if trace.first_rejected.is_none() {
                trace.truncation_index += 1;
            }
        } else {
            trace
                .rejected
                .push((choice.item, RejectReason::BudgetViolation));
            trace.first_rejected.get_or_insert(choice.item);
        }
        remaining.retain(|&v| v != choice.item);
    }

    trace.chosen = trace.accepted.clone();
    if let Some((v, fv)) = best_feasible {
        if fv > instance.evaluate(&current)? {
            trace.final_choice = FinalChoice::BestSingleton;
            trace.chosen = vec![v];
        }
    }
    Ok(trace)
}

/// `(l_i, v*)` for every block: the accepted-prefix length before the first
/// rejection and the first rejected item, if any.
pub fn truncation_points(traces: &[BlockTrace]) -> Vec<(usize, Option<usize>)> {
    traces
        .iter()
        .map(|t| (t.truncation_index, t.first_rejected))
        .collect()
}

/// Greedy over all items and constraints jointly. Runs on one thread.
pub fn general_greedy(instance: &ProblemInstance) -> Result<GeneralResult> {
    instance.ensure_valid()?;
    let n = instance.item_count();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut current = ItemSet::empty(n);
    let mut trace = GeneralTrace {
        steps: Vec::new(),
        accepted: Vec::new(),
        rejected: Vec::new(),
        prefix_length: 0,
    };
    let constraints = instance.constraints();
    while !remaining.is_empty() {
        let mut candidates = Vec::new();
        for &v in &remaining {
            let gain = instance.gain_of(&current, v)?;
            for (i, c) in constraints.iter().enumerate() {
                if !c.in_scope(v) {
                    continue;
                }
                let cost = c.marginal_of(&current, v)?;
                candidates.push(Choice {
                    item: v,
                    constraint: i,
                    ratio: greedy_ratio(gain, cost),
                    gain,
                    cost,
                });
            }
        }
        let choice = pick(candidates.into_iter().map(Ok))?.expect("every item has a constraint");
        let grown = current.with(choice.item);
        let accepted = instance.is_feasible(&grown)?;
        trace.steps.push(StepRecord {
            step: trace.steps.len(),
            candidate: instance.ground().name(choice.item).to_string(),
            item: choice.item,
            ratio: choice.ratio,
            objective_marginal: choice.gain,
            constraint_marginal: choice.cost,
            constraint_index: choice.constraint,
            accepted,
        });
        if accepted {
            current = grown;
            trace.accepted.push(AcceptedStep {
                item: choice.item,
                constraint_index: choice.constraint,
                ratio: choice.ratio,
                objective_marginal: choice.gain,
                constraint_marginal: choice.cost,
            });
            if trace.rejected.is_empty() {
                trace.prefix_length += 1;
            }
        } else {
            trace.rejected.push(RejectedStep {
                item: choice.item,
                ratio: choice.ratio,
                reason: RejectReason::BudgetViolation,
            });
        }
        remaining.retain(|&v| v != choice.item);
    }
    let value = instance.evaluate(&current)?;
    Ok(GeneralResult {
        solution: current,
        value,
        trace,
    })
}
