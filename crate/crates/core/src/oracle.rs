//! Exhaustive solver for small instances.
//!
//! Subsets are visited depth-first in lexicographic order of their sorted
//! item lists (`∅, {0}, {0,1}, {0,1,2}, .., {0,2}, ..`). Constraint functions
//! are monotone, so feasibility is closed under taking subsets and an
//! infeasible set's whole subtree can be skipped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::problem::ProblemInstance;
use crate::set::ItemSet;

/// Largest ground set the oracle accepts.
pub const ORACLE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    /// Skip supersets of infeasible sets.
    pub prune: bool,
    pub exec: Exec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            prune: true,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    /// First optimal set in enumeration order.
    pub optimum: ItemSet,
    pub value: f64,
    /// Feasible sets visited.
    pub enumerated: u64,
    /// Feasible sets whose value equals the optimum exactly.
    pub ties: u64,
}

struct Search<'a> {
    instance: &'a ProblemInstance,
    prune: bool,
    best: Option<(f64, ItemSet)>,
    enumerated: u64,
    ties: u64,
}

impl Search<'_> {
    fn feasible(&self, set: &ItemSet) -> Result<bool> {
        for c in self.instance.constraints() {
            let load = c.h().evaluate_uncached(&c.localize(set))?;
            if load > c.budget() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn visit(
        &mut self,
        set: &mut ItemSet,
        next: usize,
        sink: &mut dyn FnMut(&ItemSet),
    ) -> Result<()> {
        let feasible = self.feasible(set)?;
        if feasible {
            self.enumerated += 1;
            let value = self.instance.objective().evaluate_uncached(set)?;
            match &self.best {
                Some((b, _)) if value < *b => {}
                Some((b, _)) if value == *b => self.ties += 1,
                _ => {
                    self.best = Some((value, set.clone()));
                    self.ties = 1;
                }
            }
            sink(set);
        } else if self.prune {
            return Ok(());
        }
        for v in next..self.instance.item_count() {
            set.insert(v);
            self.visit(set, v + 1, sink)?;
            set.remove(v);
        }
        Ok(())
    }
}

fn check_size(instance: &ProblemInstance) -> Result<()> {
    let n = instance.item_count();
    if n > ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            size: n,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Optimal feasible set with default options.
pub fn brute_force_opt(instance: &ProblemInstance) -> Result<OracleResult> {
    brute_force_opt_with(instance, OracleOptions::default())
}

pub fn brute_force_opt_with(
    instance: &ProblemInstance,
    opts: OracleOptions,
) -> Result<OracleResult> {
    check_size(instance)?;
    let n = instance.item_count();
    // Root ∅ first, then one subtree per smallest item.
    let root = {
        let mut s = Search {
            instance,
            prune: opts.prune,
            best: None,
            enumerated: 0,
            ties: 0,
        };
        let empty = ItemSet::empty(n);
        if s.feasible(&empty)? {
            s.enumerated = 1;
            s.ties = 1;
            s.best = Some((instance.objective().evaluate_uncached(&empty)?, empty));
        }
        (s.best, s.enumerated, s.ties)
    };
    let root_feasible = root.0.is_some();
    let subtrees = opts.exec.map_range(0..n, |v| {
        let mut s = Search {
            instance,
            prune: opts.prune,
            best: None,
            enumerated: 0,
            ties: 0,
        };
        if root_feasible || !opts.prune {
            let mut set = ItemSet::from_items(n, [v]);
            s.visit(&mut set, v + 1, &mut |_| {})?;
        }
        Ok::<_, Error>((s.best, s.enumerated, s.ties))
    });

    let (mut best, mut enumerated, mut ties) = root;
    for part in subtrees {
        let (b, e, t) = part?;
        enumerated += e;
        if let Some((value, set)) = b {
            match &best {
                Some((cur, _)) if value < *cur => {}
                Some((cur, _)) if value == *cur => ties += t,
                _ => {
                    best = Some((value, set));
                    ties = t;
                }
            }
        }
    }
    let (value, optimum) = best.ok_or_else(|| {
        Error::InvalidInput("no feasible set; the empty set violates a budget".into())
    })?;
    Ok(OracleResult {
        optimum,
        value,
        enumerated,
        ties,
    })
}

/// Every feasible set, in lexicographic order.
pub fn exhaustive_feasible(instance: &ProblemInstance) -> Result<Vec<ItemSet>> {
    check_size(instance)?;
    let mut out = Vec::new();
    let mut s = Search {
        instance,
        prune: true,
        best: None,
        enumerated: 0,
        ties: 0,
    };
    let mut set = ItemSet::empty(instance.item_count());
    s.visit(&mut set, 0, &mut |a| out.push(a.clone()))?;
    Ok(out)
}
