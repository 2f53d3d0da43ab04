//! Sequential-communication latency.
//!
//! Each selected element first computes for `c_v` time units and then
//! transmits for `t_v` over a single shared channel. Transmissions happen one
//! at a time in the given order, so the completion time of a sequence folds
//! as `T <- max(T, c_v) + t_v`. The set function `h_c` uses the order of
//! nondecreasing compute latency, which minimizes that completion time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{RatioBounds, SetFunction};
use crate::set::ItemSet;

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyProfile {
    c: Vec<f64>,
    t: Vec<f64>,
}

/// Per-element slack `r_v = min { c_v + t_v - c_u : c_u >= c_v }`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlackReport {
    pub r: Vec<f64>,
    pub satisfied: bool,
    pub violating: Vec<usize>,
}

impl LatencyProfile {
    pub fn new(c: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if c.len() != t.len() {
            return Err(Error::InvalidInput(format!(
                "latency profile has {} compute and {} transmit entries",
                c.len(),
                t.len()
            )));
        }
        if let Some(x) = c.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "compute latency {x} must be finite and >= 0"
            )));
        }
        if let Some(x) = t.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "transmit latency {x} must be finite and > 0"
            )));
        }
        Ok(LatencyProfile { c, t })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn compute(&self) -> &[f64] {
        &self.c
    }

    pub fn transmit(&self) -> &[f64] {
        &self.t
    }

    /// Completion time of transmitting `seq` in the given order.
    pub fn seq_latency(&self, seq: &[usize]) -> Result<f64> {
        let mut seen = vec![false; self.len()];
        for &v in seq {
            if v >= self.len() {
                return Err(Error::InvalidElement(format!("latency element #{v}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidSequence(format!(
                    "element #{v} appears twice"
                )));
            }
        }
        Ok(self.fold(seq.iter().copied()))
    }

    fn fold(&self, seq: impl Iterator<Item = usize>) -> f64 {
        seq.fold(0.0, |total, v| {
            if self.c[v] < total {
                total + self.t[v]
            } else {
                self.c[v] + self.t[v]
            }
        })
    }

    /// Elements of `set` by nondecreasing compute latency, ties by index.
    pub fn sorted_order(&self, set: &ItemSet) -> Vec<usize> {
        let mut order = set.to_vec();
        order.sort_by(|&a, &b| self.c[a].total_cmp(&self.c[b]));
        order
    }

    /// `h_c(A)`: latency of `A` in sorted order.
    pub fn h_c(&self, set: &ItemSet) -> f64 {
        self.fold(self.sorted_order(set).into_iter())
    }

    pub fn check_assumption3(&self) -> SlackReport {
        let r: Vec<f64> = (0..self.len())
            .map(|v| {
                (0..self.len())
                    .filter(|&u| self.c[u] >= self.c[v])
                    .map(|u| self.c[v] + self.t[v] - self.c[u])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let violating: Vec<usize> = (0..self.len())
            .filter(|&v| r[v].is_nan() || r[v] <= 0.0)
            .collect();
        SlackReport {
            satisfied: violating.is_empty(),
            r,
            violating,
        }
    }

    /// `1 - min_v r_v / t_v`, the textbook bound on the extended curvature.
    ///
    /// It ignores that `h_c({v}) = c_v + t_v`, so it undershoots whenever
    /// some compute latency is positive; see [`Self::curvature_bound`].
    pub fn prop2_curvature_bound(&self) -> Result<f64> {
        self.slack_ratio_bound(|v| self.t[v])
    }

    /// `1 - min_v r_v / (c_v + t_v)`: a valid upper bound on the extended
    /// curvature. Marginals of `v` lie in `[r_v, t_v]` on nonempty sets and
    /// equal `c_v + t_v` on the empty set.
    pub fn curvature_bound(&self) -> Result<f64> {
        self.slack_ratio_bound(|v| self.c[v] + self.t[v])
    }

    fn slack_ratio_bound(&self, largest: impl Fn(usize) -> f64) -> Result<f64> {
        let slack = self.check_assumption3();
        if !slack.satisfied {
            return Err(Error::Precondition(format!(
                "compute latency dominates transmission for elements {:?}",
                slack.violating
            )));
        }
        let worst = (0..self.len())
            .map(|v| slack.r[v] / largest(v))
            .fold(f64::INFINITY, f64::min);
        Ok(if worst.is_finite() { 1.0 - worst } else { 0.0 })
    }
}

impl SetFunction for LatencyProfile {
    fn universe(&self) -> usize {
        self.len()
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        Ok(self.h_c(set))
    }

    fn kind(&self) -> &'static str {
        "latency"
    }

    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        let alpha_ext = self.curvature_bound().ok()?;
        Some(Ok(RatioBounds {
            alpha: alpha_ext,
            alpha_ext,
            ..RatioBounds::TRIVIAL
        }))
    }
}
