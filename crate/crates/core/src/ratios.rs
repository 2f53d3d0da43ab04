//! Submodularity ratio, DR ratio, curvatures and the guarantee formulas.
//!
//! For a monotone `f` with marginals `δ_v(A) = f(A ∪ {v}) - f(A)`:
//!
//! * `γ` (submodularity ratio) is the min over `A, B` of
//!   `Σ_{v ∈ A\B} δ_v(B) / (f(A ∪ B) - f(B))`;
//! * `κ` (DR ratio) is the min of `δ_v(A) / δ_v(B)` over `A ⊆ B`, `v ∉ B`;
//! * `α` (curvature) is one minus the min of `δ_v(A) / δ_v(B)` over `B ⊆ A`,
//!   `v ∉ A`;
//! * `α̃` (extended curvature) is the same with `A, B` unrelated.
//!
//! Pairs whose denominator is at most [`DEN_TOL`] are skipped. When nothing
//! constrains a ratio it takes its information-free value: `γ = κ = 1`,
//! `α = α̃ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ext;
use crate::function::{checked_gain, CachedFn, RatioBounds};
use crate::greedy::{greedy_ratio, BlockTrace, GeneralTrace};
use crate::problem::ProblemInstance;
use crate::set::ItemSet;

/// Largest universe accepted by [`exact_ratios`].
pub const EXACT_LIMIT: usize = 12;

/// Denominators at or below this are treated as zero.
pub const DEN_TOL: f64 = 1e-12;

const CLAMP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Bound,
}

/// A pair of sets (and possibly an item) attaining an extremal ratio.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub v: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Witnesses {
    pub gamma: Option<Witness>,
    pub kappa: Option<Witness>,
    pub alpha: Option<Witness>,
    pub alpha_ext: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub gamma: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub alpha_ext: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
}

impl RatioReport {
    pub fn from_bounds(b: RatioBounds) -> Self {
        RatioReport {
            gamma: b.gamma,
            kappa: b.kappa,
            alpha: b.alpha,
            alpha_ext: b.alpha_ext,
            method: Method::Bound,
            witnesses: None,
        }
    }
}

fn clamp_unit(x: f64) -> f64 {
    if (-CLAMP_TOL..0.0).contains(&x) {
        0.0
    } else if x > 1.0 && x <= 1.0 + CLAMP_TOL {
        1.0
    } else {
        x
    }
}

fn mask_items(mask: u64) -> Vec<usize> {
    (0..64).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Running minimum that keeps the first attaining argument.
#[derive(Clone, Copy)]
struct Min<W> {
    value: f64,
    arg: Option<W>,
}

impl<W: Copy> Min<W> {
    fn new() -> Self {
        Min {
            value: f64::INFINITY,
            arg: None,
        }
    }

    fn offer(&mut self, value: f64, arg: W) {
        if value < self.value {
            self.value = value;
            self.arg = Some(arg);
        }
    }

    /// Merge a later segment into this one.
    fn merge(mut self, later: Self) -> Self {
        if later.value < self.value {
            self = later;
        }
        self
    }
}

/// Values and marginals of `f` over every subset of its universe.
pub struct Tabulated {
    n: usize,
    values: Vec<f64>,
    /// `gains[v][mask]` = `δ_v(mask)` for `v ∉ mask`.
    gains: Vec<Vec<f64>>,
}

impl Tabulated {
    pub fn new(f: &CachedFn, exec: Exec) -> Result<Self> {
        let n = f.universe();
        if n > EXACT_LIMIT {
            return Err(Error::SizeLimit {
                size: n,
                limit: EXACT_LIMIT,
            });
        }
        let values = exec
            .map_range(0..1usize << n, |m| {
                f.evaluate_uncached(&ItemSet::from_mask(n, m as u64))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(n, values)
    }

    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        let mut gains = vec![vec![0.0; 1 << n]; n];
        for (v, row) in gains.iter_mut().enumerate() {
            for m in 0..1usize << n {
                if m >> v & 1 == 0 {
                    row[m] = checked_gain(values[m | 1 << v] - values[m])?;
                }
            }
        }
        Ok(Tabulated { n, values, gains })
    }

    pub fn value(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn gain(&self, v: usize, mask: u64) -> f64 {
        self.gains[v][mask as usize]
    }

    fn full(&self) -> u64 {
        (1u64 << self.n) - 1
    }
}

/// All four ratios of `f` by exhaustive scan; `f` must have at most
/// [`EXACT_LIMIT`] items.
pub fn exact_ratios(f: &CachedFn) -> Result<RatioReport> {
    exact_ratios_with(f, Exec::default())
}

pub fn exact_ratios_with(f: &CachedFn, exec: Exec) -> Result<RatioReport> {
    let t = Tabulated::new(f, exec)?;
    Ok(ratios_of_table(&t, exec))
}

pub fn ratios_of_table(t: &Tabulated, exec: Exec) -> RatioReport {
    let full = t.full();
    let n = t.n;

    // γ depends on (A, B) only through A \ B, so disjoint pairs suffice.
    // The outer loop runs over A in increasing mask order, B over subsets of
    // the complement in increasing order.
    let gamma = exec
        .map_range(0..1usize << n, |a| {
            let a = a as u64;
            let mut best = Min::new();
            let comp = full & !a;
            let mut b = 0u64;
            loop {
                let den = t.value(a | b) - t.value(b);
                if a != 0 && den > DEN_TOL {
                    let mut num = 0.0;
                    for v in 0..n {
                        if a >> v & 1 == 1 {
                            num += t.gain(v, b);
                        }
                    }
                    best.offer(num / den, (a, b));
                }
                if b == comp {
                    break;
                }
                b = (b.wrapping_sub(comp)) & comp;
            }
            best
        })
        .into_iter()
        .fold(Min::new(), Min::merge);

    // κ and α share the nested pairs X ⊆ Y, v ∉ Y:
    // κ uses δ_v(X) / δ_v(Y) and α uses δ_v(Y) / δ_v(X).
    let (kappa, alpha) = exec
        .map_range(0..1usize << n, |x| {
            let x = x as u64;
            let mut k = Min::new();
            let mut al = Min::new();
            let comp = full & !x;
            let mut extra = 0u64;
            loop {
                let y = x | extra;
                for v in 0..n {
                    if y >> v & 1 == 1 {
                        continue;
                    }
                    let gx = t.gain(v, x);
                    let gy = t.gain(v, y);
                    if gy > DEN_TOL {
                        k.offer(gx / gy, (x, y, v));
                    }
                    if gx > DEN_TOL {
                        al.offer(gy / gx, (y, x, v));
                    }
                }
                if extra == comp {
                    break;
                }
                extra = (extra.wrapping_sub(comp)) & comp;
            }
            (k, al)
        })
        .into_iter()
        .fold((Min::new(), Min::new()), |(k0, a0), (k1, a1)| {
            (k0.merge(k1), a0.merge(a1))
        });

    // For unrelated A, B the min of δ_v(A) / δ_v(B) splits into
    // min_A δ_v(A) over max_B δ_v(B); division is monotone under rounding,
    // so this equals the pairwise minimum exactly.
    let mut alpha_ext: Min<(u64, u64, usize)> = Min::new();
    for v in 0..n {
        let mut lo = (f64::INFINITY, 0u64);
        let mut hi = (f64::NEG_INFINITY, 0u64);
        for m in 0..=full {
            if m >> v & 1 == 1 {
                continue;
            }
            let g = t.gain(v, m);
            if g < lo.0 {
                lo = (g, m);
            }
            if g > hi.0 {
                hi = (g, m);
            }
        }
        if hi.0 > DEN_TOL {
            alpha_ext.offer(lo.0 / hi.0, (lo.1, hi.1, v));
        }
    }

    let w3 = |w: Option<(u64, u64, usize)>| {
        w.map(|(a, b, v)| Witness {
            a: mask_items(a),
            b: mask_items(b),
            v: Some(v),
        })
    };
    RatioReport {
        gamma: clamp_unit(if gamma.arg.is_some() {
            gamma.value
        } else {
            1.0
        }),
        kappa: clamp_unit(if kappa.arg.is_some() {
            kappa.value
        } else {
            1.0
        }),
        alpha: clamp_unit(if alpha.arg.is_some() {
            1.0 - alpha.value
        } else {
            0.0
        }),
        alpha_ext: clamp_unit(if alpha_ext.arg.is_some() {
            1.0 - alpha_ext.value
        } else {
            0.0
        }),
        method: Method::Exact,
        witnesses: Some(Witnesses {
            gamma: gamma.arg.map(|(a, b)| Witness {
                a: mask_items(a),
                b: mask_items(b),
                v: None,
            }),
            kappa: w3(kappa.arg),
            alpha: w3(alpha.arg),
            alpha_ext: w3(alpha_ext.arg),
        }),
    }
}

/// Analytic bounds for the function's kind, or the trivial bounds.
pub fn bounded_ratios(f: &CachedFn) -> Result<RatioReport> {
    let b = match f.inner().ratio_bounds() {
        Some(b) => b?,
        None => RatioBounds::TRIVIAL,
    };
    Ok(RatioReport::from_bounds(b))
}

/// Exact ratios when the universe is at most `cap`, bounds otherwise.
pub fn ratios_auto(f: &CachedFn, cap: usize, exec: Exec) -> Result<RatioReport> {
    if f.universe() <= cap.min(EXACT_LIMIT) {
        exact_ratios_with(f, exec)
    } else {
        bounded_ratios(f)
    }
}

/// `γ̃_f`: min over truncated blocks of `f(B_i) / δ_{v*}(A_{l_i})`, where
/// `B_i` is the block's fallback singleton. `+inf` when no block contributes.
pub fn greedy_submodularity_ratio(
    instance: &ProblemInstance,
    traces: &[BlockTrace],
) -> Result<f64> {
    let n = instance.item_count();
    let mut out = f64::INFINITY;
    for t in traces {
        let Some(vstar) = t.first_rejected else {
            continue;
        };
        let prefix = ItemSet::from_items(n, t.accepted[..t.truncation_index].iter().copied());
        let den = instance.gain_of(&prefix, vstar)?;
        if den <= DEN_TOL {
            continue;
        }
        let num = match t.best_feasible_singleton {
            Some(b) => instance.evaluate(&ItemSet::from_items(n, [b]))?,
            None => 0.0,
        };
        out = out.min(num / den);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMode {
    /// Compare against the items of an optimal solution.
    Exact,
    /// Compare against every item not yet selected.
    LowerBound,
}

/// `ψ_j` for each accepted step: the chosen ratio over the best ratio among
/// reference items not yet selected. Only pairs with positive constraint
/// cost count; an empty comparison yields `+inf`.
pub fn greedy_choice_ratios(
    instance: &ProblemInstance,
    trace: &GeneralTrace,
    reference: Option<&ItemSet>,
    mode: PsiMode,
) -> Result<Vec<f64>> {
    let n = instance.item_count();
    let range = match mode {
        PsiMode::Exact => reference.ok_or(Error::MissingReference)?.clone(),
        PsiMode::LowerBound => ItemSet::full(n),
    };
    let constraints = instance.constraints();
    let mut out = Vec::with_capacity(trace.accepted.len());
    for (j, step) in trace.accepted.iter().enumerate() {
        let a = trace.prefix_set(n, j);
        let gain = instance.gain_of(&a, step.item)?;
        let cost = constraints[step.constraint_index].marginal_of(&a, step.item)?;
        let chosen = greedy_ratio(gain, cost);
        let mut best = 0.0f64;
        for v in range.difference(&a).iter() {
            let gv = instance.gain_of(&a, v)?;
            for c in constraints.iter().filter(|c| c.in_scope(v)) {
                let cv = c.marginal_of(&a, v)?;
                if cv > 0.0 {
                    best = best.max(gv / cv);
                }
            }
        }
        out.push(if best > 0.0 {
            chosen / best
        } else {
            f64::INFINITY
        });
    }
    Ok(out)
}

/// Everything the guarantee formulas consume.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuaranteeInputs {
    pub gamma_f: f64,
    pub kappa_f: f64,
    pub alpha_f: f64,
    #[serde(serialize_with = "ext::serialize")]
    pub gamma_tilde_f: f64,
    /// Extended curvature of each constraint function.
    pub alpha_tilde: Vec<f64>,
    #[serde(serialize_with = "ext::serialize_vec")]
    pub psi: Vec<f64>,
    /// `δ^{i_j}_{q_{j+1}}(A_j)` for each accepted step.
    pub constraint_marginals: Vec<f64>,
    pub budgets: Vec<f64>,
    pub prefix_length: usize,
    /// `h_i(A_l ∩ S_i)` for each constraint.
    pub prefix_loads: Vec<f64>,
}

impl GuaranteeInputs {
    /// Objective and constraint ratios only; trace-dependent fields empty.
    pub fn from_ratios(f: &RatioReport, h: &[RatioReport], budgets: Vec<f64>) -> Self {
        GuaranteeInputs {
            gamma_f: f.gamma,
            kappa_f: f.kappa,
            alpha_f: f.alpha,
            gamma_tilde_f: f64::INFINITY,
            alpha_tilde: h.iter().map(|r| r.alpha_ext).collect(),
            psi: Vec::new(),
            constraint_marginals: Vec::new(),
            budgets,
            prefix_length: 0,
            prefix_loads: Vec::new(),
        }
    }

    /// Fill the trace-dependent fields from a general-solver trace.
    pub fn with_general_trace(
        mut self,
        instance: &ProblemInstance,
        trace: &GeneralTrace,
        psi: Vec<f64>,
    ) -> Result<Self> {
        let n = instance.item_count();
        let constraints = instance.constraints();
        self.constraint_marginals = trace
            .accepted
            .iter()
            .enumerate()
            .map(|(j, s)| {
                constraints[s.constraint_index].marginal_of(&trace.prefix_set(n, j), s.item)
            })
            .collect::<Result<_>>()?;
        self.psi = psi;
        self.prefix_length = trace.prefix_length;
        let prefix = trace.prefix_set(n, trace.prefix_length);
        self.prefix_loads = constraints
            .iter()
            .map(|c| c.load(&prefix))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    fn budget_sum(&self) -> f64 {
        self.budgets.iter().sum()
    }

    fn min_exp_term(&self) -> f64 {
        self.alpha_tilde
            .iter()
            .map(|a| 1.0 - (-(1.0 - a) * self.gamma_f).exp())
            .fold(1.0, f64::min)
    }

    /// Largest extended curvature among the constraints.
    pub fn alpha_h(&self) -> f64 {
        self.alpha_tilde.iter().copied().fold(0.0, f64::max)
    }
}

/// Guarantee for the parallel solver.
pub fn theorem1_bound(inputs: &GuaranteeInputs) -> f64 {
    (1.0 - inputs.alpha_f) * inputs.kappa_f * remark1_bound(inputs)
}

/// Guarantee for the parallel solver when `f` is separable across blocks.
pub fn remark1_bound(inputs: &GuaranteeInputs) -> f64 {
    inputs.gamma_tilde_f.min(1.0) / 2.0 * inputs.min_exp_term()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumBound {
    #[serde(serialize_with = "ext::serialize")]
    pub b: f64,
    pub bound_tight: f64,
    pub bound_exp: f64,
}

impl SumBound {
    const ZERO: SumBound = SumBound {
        b: 0.0,
        bound_tight: 0.0,
        bound_exp: 0.0,
    };

    /// `1 - (1 - b/k)^k` and `1 - e^{-b}`, with `b/k` capped at 1.
    fn from_b(b: f64, k: usize) -> SumBound {
        if k == 0 || b <= 0.0 {
            return SumBound {
                b: b.max(0.0),
                ..Self::ZERO
            };
        }
        let step = (b / k as f64).min(1.0);
        SumBound {
            b,
            bound_tight: 1.0 - (1.0 - step).powi(k as i32),
            bound_exp: 1.0 - (-b).exp(),
        }
    }
}

fn scale(inputs: &GuaranteeInputs, k: usize) -> Result<Option<f64>> {
    if k == 0 {
        return Ok(None);
    }
    let total = inputs.budget_sum();
    if total <= 0.0 {
        return Err(Error::DegenerateBudget);
    }
    let coef = (1.0 - inputs.alpha_h()) * inputs.gamma_f;
    Ok(if coef > 0.0 { Some(coef / total) } else { None })
}

/// Guarantee for the general solver.
pub fn theorem2_bound(inputs: &GuaranteeInputs) -> Result<SumBound> {
    let k = inputs.psi.len();
    let Some(s) = scale(inputs, k)? else {
        return Ok(SumBound::ZERO);
    };
    let sum: f64 = inputs
        .psi
        .iter()
        .zip(&inputs.constraint_marginals)
        .map(|(&p, &d)| if d == 0.0 { 0.0 } else { p * d })
        .sum();
    Ok(SumBound::from_b(s * sum, k))
}

/// Guarantee for the general solver from the loads of the accepted prefix.
pub fn remark2_bound(inputs: &GuaranteeInputs) -> Result<SumBound> {
    let l = inputs.prefix_length;
    let Some(s) = scale(inputs, l)? else {
        return Ok(SumBound::ZERO);
    };
    let load: f64 = inputs.prefix_loads.iter().sum();
    Ok(SumBound::from_b(s * load, l))
}

/// Guarantee for the general solver under per-block cardinality caps.
pub fn matroid_bound(inputs: &GuaranteeInputs) -> Result<f64> {
    let l = inputs.prefix_length;
    if l == 0 {
        return Ok(0.0);
    }
    let total = inputs.budget_sum();
    if total <= 0.0 {
        return Err(Error::DegenerateBudget);
    }
    Ok(1.0 - (1.0 - (inputs.gamma_f / total).min(1.0)).powi(l as i32))
}
