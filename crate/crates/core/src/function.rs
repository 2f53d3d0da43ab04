//! Set functions and their memoized evaluation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::set::ItemSet;

/// Marginal gains in `[-MONOTONE_TOL, 0)` are floating noise and clamp to zero.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Largest universe for which explicit lookup tables are accepted.
pub const TABLE_LIMIT: usize = 20;

/// A map from subsets of `{0, .., universe-1}` to reals.
///
/// Implementations must be deterministic: equal sets give bit-identical values.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn universe(&self) -> usize;

    fn value(&self, set: &ItemSet) -> Result<f64>;

    /// Short name of the kind, used in reports.
    fn kind(&self) -> &'static str;

    /// Analytic bounds on the ratios of this function, if the kind has any.
    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        None
    }
}

/// Certified bounds: `gamma` and `kappa` are lower bounds, `alpha` and
/// `alpha_ext` upper bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioBounds {
    pub gamma: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub alpha_ext: f64,
}

impl RatioBounds {
    /// Holds for every monotone function.
    pub const TRIVIAL: RatioBounds = RatioBounds {
        gamma: 0.0,
        kappa: 0.0,
        alpha: 1.0,
        alpha_ext: 1.0,
    };

    /// Exact for modular functions.
    pub const MODULAR: RatioBounds = RatioBounds {
        gamma: 1.0,
        kappa: 1.0,
        alpha: 0.0,
        alpha_ext: 0.0,
    };
}

/// Clamp a raw marginal according to [`MONOTONE_TOL`].
pub fn checked_gain(gain: f64) -> Result<f64> {
    if gain >= 0.0 {
        Ok(gain)
    } else if gain >= -MONOTONE_TOL {
        Ok(0.0)
    } else {
        Err(Error::MonotonicityViolation { gain })
    }
}

/// `f(A) = sum of w_v over v in A`.
#[derive(Clone, Debug)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Modular { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn universe(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        Ok(set.iter().map(|v| self.weights[v]).sum())
    }

    fn kind(&self) -> &'static str {
        "modular"
    }

    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        Some(Ok(RatioBounds::MODULAR))
    }
}

/// `h(A) = |A|`.
#[derive(Clone, Debug)]
pub struct Cardinality {
    universe: usize,
}

impl Cardinality {
    pub fn new(universe: usize) -> Self {
        Cardinality { universe }
    }
}

impl SetFunction for Cardinality {
    fn universe(&self) -> usize {
        self.universe
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        Ok(set.len() as f64)
    }

    fn kind(&self) -> &'static str {
        "cardinality"
    }

    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        Some(Ok(RatioBounds::MODULAR))
    }
}

/// Weighted coverage: each item covers a subset of a universe of points and
/// `f(A)` is the total weight of the points covered by `A`.
#[derive(Clone, Debug)]
pub struct Coverage {
    covers: Vec<Vec<usize>>,
    point_weights: Vec<f64>,
}

impl Coverage {
    /// Unit point weights.
    pub fn new(covers: Vec<Vec<usize>>) -> Self {
        let points = covers.iter().flatten().map(|&p| p + 1).max().unwrap_or(0);
        Coverage {
            covers,
            point_weights: vec![1.0; points],
        }
    }

    pub fn weighted(covers: Vec<Vec<usize>>, point_weights: Vec<f64>) -> Result<Self> {
        if let Some(&p) = covers.iter().flatten().find(|&&p| p >= point_weights.len()) {
            return Err(Error::InvalidInput(format!(
                "coverage point {p} has no weight ({} weights given)",
                point_weights.len()
            )));
        }
        Ok(Coverage {
            covers,
            point_weights,
        })
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    pub fn point_weights(&self) -> &[f64] {
        &self.point_weights
    }
}

impl SetFunction for Coverage {
    fn universe(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        let mut hit = vec![false; self.point_weights.len()];
        for v in set.iter() {
            for &p in &self.covers[v] {
                hit[p] = true;
            }
        }
        Ok(hit
            .iter()
            .zip(&self.point_weights)
            .filter(|(h, _)| **h)
            .map(|(_, w)| w)
            .sum())
    }

    fn kind(&self) -> &'static str {
        "coverage"
    }

    // Coverage is submodular; curvature is left at the trivial bound.
    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        Some(Ok(RatioBounds {
            gamma: 1.0,
            kappa: 1.0,
            ..RatioBounds::TRIVIAL
        }))
    }
}

/// Explicit lookup table over all `2^n` subsets; entry `k` is the value of
/// the set whose bitmask is `k`.
#[derive(Clone, Debug)]
pub struct Table {
    universe: usize,
    values: Vec<f64>,
}

impl Table {
    pub fn new(universe: usize, values: Vec<f64>) -> Result<Self> {
        if universe > TABLE_LIMIT {
            return Err(Error::SizeLimit {
                size: universe,
                limit: TABLE_LIMIT,
            });
        }
        if values.len() != 1 << universe {
            return Err(Error::InvalidInput(format!(
                "table over {universe} items needs {} values, got {}",
                1usize << universe,
                values.len()
            )));
        }
        Ok(Table { universe, values })
    }

    /// Tabulate any function over a small universe.
    pub fn tabulate(f: &dyn SetFunction) -> Result<Self> {
        let n = f.universe();
        if n > TABLE_LIMIT {
            return Err(Error::SizeLimit {
                size: n,
                limit: TABLE_LIMIT,
            });
        }
        let values = (0..1u64 << n)
            .map(|m| f.value(&ItemSet::from_mask(n, m)))
            .collect::<Result<Vec<_>>>()?;
        Table::new(n, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SetFunction for Table {
    fn universe(&self) -> usize {
        self.universe
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        let mask = set.mask().expect("table universes fit in a mask");
        Ok(self.values[mask as usize])
    }

    fn kind(&self) -> &'static str {
        "table"
    }
}

/// `inner` viewed through an injection of a smaller universe: local item `k`
/// is `inner`'s item `map[k]`.
#[derive(Clone, Debug)]
pub struct Restricted {
    inner: Arc<dyn SetFunction>,
    map: Vec<usize>,
}

impl Restricted {
    pub fn new(inner: Arc<dyn SetFunction>, map: Vec<usize>) -> Self {
        Restricted { inner, map }
    }
}

impl SetFunction for Restricted {
    fn universe(&self) -> usize {
        self.map.len()
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        let lifted = ItemSet::from_items(self.inner.universe(), set.iter().map(|k| self.map[k]));
        self.inner.value(&lifted)
    }

    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    // Restriction shrinks every quantifier range, so bounds carry over.
    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        self.inner.ratio_bounds()
    }
}

/// A shared set function with an optional memo cache.
///
/// The cache allows concurrent readers; inserts take a short write lock.
/// Cached and uncached evaluation return bit-identical values.
#[derive(Clone)]
pub struct CachedFn {
    inner: Arc<dyn SetFunction>,
    cache: Option<Arc<RwLock<HashMap<ItemSet, f64>>>>,
}

impl fmt::Debug for CachedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CachedFn")
            .field("inner", &self.inner)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl CachedFn {
    pub fn new(inner: Arc<dyn SetFunction>) -> Self {
        CachedFn {
            inner,
            cache: Some(Arc::default()),
        }
    }

    pub fn uncached(inner: Arc<dyn SetFunction>) -> Self {
        CachedFn { inner, cache: None }
    }

    pub fn from_fn<F: SetFunction + 'static>(f: F) -> Self {
        Self::new(Arc::new(f))
    }

    pub fn inner(&self) -> &Arc<dyn SetFunction> {
        &self.inner
    }

    pub fn universe(&self) -> usize {
        self.inner.universe()
    }

    pub fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    /// `f(A)`, memoized.
    pub fn evaluate(&self, set: &ItemSet) -> Result<f64> {
        if set.universe() != self.universe() {
            return Err(Error::InvalidElement(format!(
                "set over a universe of {} items passed to a function over {}",
                set.universe(),
                self.universe()
            )));
        }
        let Some(cache) = &self.cache else {
            return self.inner.value(set);
        };
        if let Some(&v) = cache.read().get(set) {
            return Ok(v);
        }
        let v = self.inner.value(set)?;
        cache.write().insert(set.clone(), v);
        Ok(v)
    }

    /// `f(A)` bypassing the cache (for exhaustive scans that would flood it).
    pub fn evaluate_uncached(&self, set: &ItemSet) -> Result<f64> {
        if set.universe() != self.universe() {
            return Err(Error::InvalidElement(format!(
                "set over a universe of {} items passed to a function over {}",
                set.universe(),
                self.universe()
            )));
        }
        self.inner.value(set)
    }

    pub fn cached_len(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.read().len())
    }

    pub fn clear_cache(&self) {
        if let Some(c) = &self.cache {
            c.write().clear();
        }
    }

    /// Same function with a fresh, independent cache.
    pub fn fresh(&self) -> Self {
        CachedFn {
            inner: self.inner.clone(),
            cache: self.cache.as_ref().map(|_| Arc::default()),
        }
    }
}
