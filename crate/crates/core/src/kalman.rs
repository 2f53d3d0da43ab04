//! Kalman-filter sensor scheduling.
//!
//! For a linear time-varying system `x_{k+1} = A_k x_k + w_k`,
//! `y_k = C_k x_k + v_k`, each row of `C_k` is a candidate sensor at step
//! `k`. Item `(k, i)` has index `k * m + i`. Selecting a set `A` of sensors
//! over steps `0..=l` yields the prior covariance `P_{l,A}` by the Riccati
//! recursion
//!
//! ```text
//! P_{k+1} = W + A_k (P_k^-1 + J_k)^-1 A_k^T,   J_k = sum_{v in A_k} C_v^T C_v / sigma_v^2
//! ```
//!
//! and `g(A) = Tr((P_l^-1 + J_l)^-1)` is the posterior mean-square error at
//! step `l`. The objective is the error reduction `f_s(A) = g(∅) - g(A)`.
//!
//! Note the asymmetry: `P_{l,A}` only sees sensors from steps `< l`; the
//! step-`l` sensors enter through the outer `J_l` term.
//!
//! All inverses go through Cholesky factors. With `P = L L^T` and
//! `K = I + L^T J L = G G^T` we have `(P^-1 + J)^-1 = L K^-1 L^T`, and `K` is
//! bounded below by the identity, so the solves stay well conditioned.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::function::{RatioBounds, SetFunction};
use crate::set::ItemSet;

/// Relative eigenvalue floor for positive-definiteness checks.
pub const SPD_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KalmanInstance {
    a: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
    w: DMatrix<f64>,
    pi0: DMatrix<f64>,
    sigma: Vec<Vec<f64>>,
}

/// Prior covariance at a given step.
#[derive(Clone, Debug)]
pub struct InfoState {
    pub p: DMatrix<f64>,
    pub step: usize,
}

fn check_spd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("{name} must be square")));
    }
    let asym = (m - m.transpose()).abs().max();
    let scale = m.abs().max().max(1.0);
    if asym > 1e-10 * scale {
        return Err(Error::InvalidInput(format!("{name} is not symmetric")));
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if min.is_nan() || min <= SPD_TOL * m.trace().abs() {
        return Err(Error::InvalidInput(format!(
            "{name} is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
        .ok_or_else(|| Error::Conditioning(format!("{what} is not positive definite")))
}

/// Factor `(P^-1 + J)^-1` as `L K^-1 L^T`; returns `(L, G)` with `K = G G^T`.
fn posterior_factors(
    p: &DMatrix<f64>,
    info: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, Cholesky<f64, Dyn>)> {
    let l = cholesky(p, "covariance")?.l();
    let n = p.nrows();
    let mut k = DMatrix::identity(n, n) + l.transpose() * info * &l;
    symmetrize(&mut k);
    let g = cholesky(&k, "information update")?;
    Ok((l, g))
}

/// One Riccati step `P' = W + A (P^-1 + J)^-1 A^T`, where `info` is `J`.
pub fn riccati_step(
    state: &InfoState,
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    info: &DMatrix<f64>,
) -> Result<InfoState> {
    let (l, g) = posterior_factors(&state.p, info)?;
    // A L K^-1 L^T A^T = X^T X with X = G^-1 (A L)^T
    let x = g
        .l_dirty()
        .solve_lower_triangular(&(a * &l).transpose())
        .ok_or_else(|| Error::Conditioning("singular factor".into()))?;
    let mut p = w + x.transpose() * x;
    symmetrize(&mut p);
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning("non-finite covariance".into()));
    }
    Ok(InfoState {
        p,
        step: state.step + 1,
    })
}

impl KalmanInstance {
    /// `a` has `horizon` entries and `c`, `sigma` have `horizon + 1`.
    pub fn new(
        a: Vec<DMatrix<f64>>,
        c: Vec<DMatrix<f64>>,
        w: DMatrix<f64>,
        pi0: DMatrix<f64>,
        sigma: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = w.nrows();
        if c.is_empty() {
            return Err(Error::InvalidInput(
                "need measurement matrices for steps 0..=horizon".into(),
            ));
        }
        if a.len() + 1 != c.len() || sigma.len() != c.len() {
            return Err(Error::InvalidInput(format!(
                "horizon mismatch: {} dynamics, {} measurement, {} noise entries",
                a.len(),
                c.len(),
                sigma.len()
            )));
        }
        check_spd("W", &w)?;
        if pi0.shape() != (n, n) {
            return Err(Error::InvalidInput("Pi0 and W differ in dimension".into()));
        }
        check_spd("Pi0", &pi0)?;
        if let Some(k) = a.iter().position(|ak| ak.shape() != (n, n)) {
            return Err(Error::InvalidInput(format!("A_{k} is not {n}x{n}")));
        }
        let m = c[0].nrows();
        for (k, ck) in c.iter().enumerate() {
            if ck.shape() != (m, n) {
                return Err(Error::InvalidInput(format!("C_{k} is not {m}x{n}")));
            }
            if sigma[k].len() != m {
                return Err(Error::InvalidInput(format!(
                    "step {k} needs {m} noise levels"
                )));
            }
        }
        let all = a.iter().chain(&c).flat_map(|m| m.iter());
        if all.chain(sigma.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite system entry".into()));
        }
        if sigma.iter().flatten().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::InvalidInput("noise levels must be positive".into()));
        }
        Ok(KalmanInstance {
            a,
            c,
            w,
            pi0,
            sigma,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    pub fn sensors_per_step(&self) -> usize {
        self.c[0].nrows()
    }

    pub fn item_count(&self) -> usize {
        self.c.len() * self.sensors_per_step()
    }

    pub fn a(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    pub fn c(&self) -> &[DMatrix<f64>] {
        &self.c
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn pi0(&self) -> &DMatrix<f64> {
        &self.pi0
    }

    pub fn sigma(&self) -> &[Vec<f64>] {
        &self.sigma
    }

    /// `J_k` for the step-`k` sensors of `set`, summed in index order.
    pub fn information(&self, k: usize, set: &ItemSet) -> DMatrix<f64> {
        let m = self.sensors_per_step();
        let n = self.state_dim();
        let mut j = DMatrix::zeros(n, n);
        for i in 0..m {
            if set.contains(k * m + i) {
                let row = self.c[k].row(i);
                j += row.transpose() * row / (self.sigma[k][i] * self.sigma[k][i]);
            }
        }
        j
    }

    /// `P_{l,A}`.
    pub fn prior_at_horizon(&self, set: &ItemSet) -> Result<InfoState> {
        let mut state = InfoState {
            p: self.pi0.clone(),
            step: 0,
        };
        for k in 0..self.horizon() {
            state = riccati_step(&state, &self.a[k], &self.w, &self.information(k, set))?;
        }
        Ok(state)
    }

    pub fn g_value(&self, set: &ItemSet) -> Result<f64> {
        self.check_set(set)?;
        let prior = self.prior_at_horizon(set)?;
        let (l, g) = posterior_factors(&prior.p, &self.information(self.horizon(), set))?;
        // Tr(L K^-1 L^T) = ||G^-1 L^T||_F^2
        let y = g
            .l_dirty()
            .solve_lower_triangular(&l.transpose())
            .ok_or_else(|| Error::Conditioning("singular factor".into()))?;
        Ok(y.norm_squared())
    }

    pub fn f_s(&self, set: &ItemSet) -> Result<f64> {
        Ok(self.g_value(&ItemSet::empty(self.item_count()))? - self.g_value(set)?)
    }

    /// `(γ̲, ᾱ)`: a lower bound on the submodularity and DR ratios of `f_s`
    /// and an upper bound on its (extended) curvature.
    pub fn prop1_bounds(&self) -> Result<(f64, f64)> {
        let n = self.item_count();
        let empty = self.prior_at_horizon(&ItemSet::empty(n))?;
        let full_set = ItemSet::full(n);
        let full = self.prior_at_horizon(&full_set)?;
        let lambda_min = 1.0 / SymmetricEigen::new(empty.p).eigenvalues.max();
        let inv = cholesky(&full.p, "covariance")?.inverse();
        let mut m = inv + self.information(self.horizon(), &full_set);
        symmetrize(&mut m);
        let lambda_max = SymmetricEigen::new(m).eigenvalues.max();
        let gamma = lambda_min / lambda_max;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Conditioning(format!("ratio bound {gamma}")));
        }
        Ok((gamma, 1.0 - gamma * gamma))
    }

    fn check_set(&self, set: &ItemSet) -> Result<()> {
        if set.universe() != self.item_count() {
            return Err(Error::InvalidElement(format!(
                "set over {} items for a system with {} sensors",
                set.universe(),
                self.item_count()
            )));
        }
        Ok(())
    }
}

/// `f_s` as a set function. `g(∅)` is computed once up front.
#[derive(Clone, Debug)]
pub struct KalmanObjective {
    instance: Arc<KalmanInstance>,
    g_empty: f64,
}

impl KalmanObjective {
    pub fn new(instance: KalmanInstance) -> Result<Self> {
        let g_empty = instance.g_value(&ItemSet::empty(instance.item_count()))?;
        Ok(KalmanObjective {
            instance: Arc::new(instance),
            g_empty,
        })
    }

    pub fn instance(&self) -> &KalmanInstance {
        &self.instance
    }
}

impl SetFunction for KalmanObjective {
    fn universe(&self) -> usize {
        self.instance.item_count()
    }

    fn value(&self, set: &ItemSet) -> Result<f64> {
        if set.is_empty() {
            return Ok(0.0);
        }
        Ok(self.g_empty - self.instance.g_value(set)?)
    }

    fn kind(&self) -> &'static str {
        "kalman"
    }

    /// The eigenvalue bounds are only used for single-step problems. With a
    /// longer horizon, exhaustive checks find curvatures above `1 - γ̲²` and
    /// DR ratios below `γ̲`, so no bound is claimed.
    fn ratio_bounds(&self) -> Option<Result<RatioBounds>> {
        if self.instance.horizon() > 0 {
            return None;
        }
        Some(
            self.instance
                .prop1_bounds()
                .map(|(gamma, alpha)| RatioBounds {
                    gamma,
                    kappa: gamma,
                    alpha,
                    alpha_ext: alpha,
                }),
        )
    }
}
