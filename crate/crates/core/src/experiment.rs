//! Random sensor-scheduling experiments.
//!
//! Every instance schedules Kalman-filter sensors over steps `0..=l` with one
//! sequential-latency budget per step. System matrices have i.i.d. standard
//! normal entries, `W = 2I`, `Π_0 = I`, and every sensor has noise level
//! `σ_v`. Compute and transmit latencies are exponential draws, and each
//! step's budget is a fixed fraction of the latency of sending all of its
//! sensors.
//!
//! Each instance draws from its own ChaCha8 stream: the generator is seeded
//! with the experiment seed and the stream number is derived from
//! `(σ_v, trial, m)`. Instances therefore do not depend on the order in
//! which trials run.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ext;
use crate::greedy::{general_greedy, parallel_greedy};
use crate::io::{
    ConstraintEntry, ConstraintKind, InstanceFile, KalmanPayload, Latencies, ObjectiveSpec,
};
use crate::latency::LatencyProfile;
use crate::oracle::{brute_force_opt_with, OracleOptions};
use crate::problem::ProblemInstance;
use crate::ratios::{
    greedy_choice_ratios, greedy_submodularity_ratio, ratios_auto, theorem1_bound, theorem2_bound,
    GuaranteeInputs, Method, PsiMode,
};
use crate::set::ItemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// The parameter is the rate `λ` (mean `1/λ`).
    Rate,
    /// The parameter is the mean.
    Mean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyParams {
    pub compute: f64,
    pub transmit: f64,
    pub parameterization: Parameterization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub state_dim: usize,
    pub sensors_per_step: usize,
    pub horizon: usize,
    pub sigma_range: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub latency: LatencyParams,
    /// `H_k = budget_fraction * h_k(S_k)`.
    pub budget_fraction: f64,
    /// Largest universe for which ratios are computed exactly; larger
    /// functions use analytic bounds.
    pub ratio_cap: usize,
    /// Sensors per step for the runtime sweep.
    pub sensors_sweep: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::paper_fig1()
    }
}

impl ExperimentConfig {
    /// 3 states, 3 sensors per step, horizon 2, `σ_v` in 1..=30, 50 trials.
    pub fn paper_fig1() -> Self {
        ExperimentConfig {
            state_dim: 3,
            sensors_per_step: 3,
            horizon: 2,
            sigma_range: (1..=30).map(f64::from).collect(),
            trials: 50,
            seed: 0,
            latency: LatencyParams {
                compute: 0.5,
                transmit: 0.2,
                parameterization: Parameterization::Rate,
            },
            budget_fraction: 0.5,
            ratio_cap: crate::ratios::EXACT_LIMIT,
            sensors_sweep: vec![3],
        }
    }

    /// 10 states, 20..=30 sensors per step, 5 trials.
    pub fn paper_fig2() -> Self {
        ExperimentConfig {
            state_dim: 10,
            sensors_per_step: 20,
            sigma_range: vec![1.0],
            trials: 5,
            sensors_sweep: (20..=30).collect(),
            ..Self::paper_fig1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("experiment config: {m}")));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.state_dim == 0 || self.sensors_per_step == 0 {
            return bad("state_dim and sensors_per_step must be positive");
        }
        if !(self.latency.compute > 0.0 && self.latency.transmit > 0.0) {
            return bad("latency parameters must be positive");
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return bad("budget_fraction must be in (0, 1]");
        }
        if self.sigma_range.is_empty()
            || self
                .sigma_range
                .iter()
                .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return bad("sigma_range must be a nonempty list of positive numbers");
        }
        if self.sensors_sweep.contains(&0) {
            return bad("sensors_sweep entries must be positive");
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn exp(&self, p: f64) -> Exp<f64> {
        let rate = match self.latency.parameterization {
            Parameterization::Rate => p,
            Parameterization::Mean => 1.0 / p,
        };
        Exp::new(rate).expect("validated positive rate")
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream number for one instance.
pub fn stream_id(sigma: f64, trial: usize, m: usize) -> u64 {
    splitmix(splitmix(sigma.to_bits()) ^ splitmix(trial as u64) ^ splitmix((m as u64) << 32 | 0xa5))
}

/// The instance for `(σ_v, trial)` with `m` sensors per step, as a file.
pub fn gen_instance_file(
    config: &ExperimentConfig,
    sigma: f64,
    trial: usize,
    m: usize,
) -> Result<InstanceFile> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream_id(sigma, trial, m));
    let n = config.state_dim;
    let l = config.horizon;
    let mut normal = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    };
    let a: Vec<Vec<f64>> = (0..l).map(|_| normal(n * n)).collect();
    let c: Vec<Vec<f64>> = (0..=l).map(|_| normal(m * n)).collect();
    let identity = |s: f64| -> Vec<f64> {
        (0..n * n)
            .map(|i| if i % (n + 1) == 0 { s } else { 0.0 })
            .collect()
    };
    let kalman = KalmanPayload {
        state_dim: n,
        horizon: l,
        sensors_per_step: m,
        a,
        c,
        w: identity(2.0),
        pi0: identity(1.0),
        sigma: vec![vec![sigma; m]; l + 1],
    };
    let compute = config.exp(config.latency.compute);
    let transmit = config.exp(config.latency.transmit);
    let mut constraints = Vec::with_capacity(l + 1);
    for k in 0..=l {
        let cs: Vec<f64> = (0..m).map(|_| compute.sample(&mut rng)).collect();
        let ts: Vec<f64> = (0..m).map(|_| transmit.sample(&mut rng)).collect();
        let full = LatencyProfile::new(cs.clone(), ts.clone())?.h_c(&ItemSet::full(m));
        constraints.push(ConstraintEntry {
            spec: ConstraintKind::Latency(Latencies { c: cs, t: ts }),
            budget: config.budget_fraction * full,
            scope_block: k,
        });
    }
    Ok(InstanceFile {
        blocks: (0..=l)
            .map(|k| (0..m).map(|i| format!("s{k}_{i}")).collect())
            .collect(),
        disjoint_blocks: true,
        objective: ObjectiveSpec::Kalman(kalman),
        constraints,
    })
}

pub fn gen_instance(
    config: &ExperimentConfig,
    sigma: f64,
    trial: usize,
) -> Result<ProblemInstance> {
    gen_instance_file(config, sigma, trial, config.sensors_per_step)?.build()
}

/// One row of the performance experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub sigma_v: f64,
    pub trial: usize,
    pub f_alg1: f64,
    pub f_alg2: f64,
    pub f_opt: f64,
    pub ratio_alg1: f64,
    pub ratio_alg2: f64,
    pub guarantee_thm1: f64,
    pub guarantee_thm2: f64,
    pub gamma_f: f64,
    pub kappa_f: f64,
    pub alpha_f: f64,
    #[serde(serialize_with = "ext::serialize")]
    pub gamma_tilde_f: f64,
    pub alpha_h: f64,
    pub exact_ratios: bool,
    pub solution_alg1: Vec<usize>,
    pub solution_alg2: Vec<usize>,
    pub wall_time_alg1: f64,
    pub wall_time_alg2: f64,
}

fn ratio(value: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        value / opt
    } else {
        1.0
    }
}

/// Build, solve and analyze one instance.
pub fn run_trial(config: &ExperimentConfig, sigma: f64, trial: usize) -> Result<TrialRecord> {
    let inst = gen_instance(config, sigma, trial)?;

    let run1 = inst.fresh();
    let t0 = Instant::now();
    let alg1 = parallel_greedy(&run1)?;
    let wall1 = t0.elapsed().as_secs_f64();

    let run2 = inst.fresh();
    let t0 = Instant::now();
    let alg2 = general_greedy(&run2)?;
    let wall2 = t0.elapsed().as_secs_f64();

    let opt = brute_force_opt_with(
        &inst,
        OracleOptions {
            prune: true,
            exec: Exec::Sequential,
        },
    )?;

    let f_report = ratios_auto(inst.objective(), config.ratio_cap, Exec::Sequential)?;
    let h_reports = inst
        .constraints()
        .iter()
        .map(|c| ratios_auto(c.h(), config.ratio_cap, Exec::Sequential))
        .collect::<Result<Vec<_>>>()?;
    let exact =
        f_report.method == Method::Exact && h_reports.iter().all(|r| r.method == Method::Exact);

    let mut inputs = GuaranteeInputs::from_ratios(&f_report, &h_reports, inst.budgets());
    inputs.gamma_tilde_f = greedy_submodularity_ratio(&inst, &alg1.traces)?;
    let psi = greedy_choice_ratios(&inst, &alg2.trace, Some(&opt.optimum), PsiMode::Exact)?;
    let inputs = inputs.with_general_trace(&inst, &alg2.trace, psi)?;

    Ok(TrialRecord {
        sigma_v: sigma,
        trial,
        f_alg1: alg1.value,
        f_alg2: alg2.value,
        f_opt: opt.value,
        ratio_alg1: ratio(alg1.value, opt.value),
        ratio_alg2: ratio(alg2.value, opt.value),
        guarantee_thm1: theorem1_bound(&inputs),
        guarantee_thm2: theorem2_bound(&inputs)?.bound_tight,
        gamma_f: inputs.gamma_f,
        kappa_f: inputs.kappa_f,
        alpha_f: inputs.alpha_f,
        gamma_tilde_f: inputs.gamma_tilde_f,
        alpha_h: inputs.alpha_h(),
        exact_ratios: exact,
        solution_alg1: alg1.solution.to_vec(),
        solution_alg2: alg2.solution.to_vec(),
        wall_time_alg1: wall1,
        wall_time_alg2: wall2,
    })
}

/// All `(σ_v, trial)` pairs, trials spread over `exec`. Rows come back
/// sorted by `(σ_v, trial)`.
pub fn run_performance_experiment(
    config: &ExperimentConfig,
    exec: Exec,
) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let jobs: Vec<(f64, usize)> = config
        .sigma_range
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();
    let mut rows = exec
        .map(&jobs, |&(s, t)| run_trial(config, s, t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.sigma_v.total_cmp(&b.sigma_v).then(a.trial.cmp(&b.trial)));
    Ok(rows)
}

pub const PERFORMANCE_COLUMNS: [&str; 17] = [
    "sigma_v",
    "trial",
    "f_alg1",
    "f_alg2",
    "f_opt",
    "ratio_alg1",
    "ratio_alg2",
    "guarantee_thm1",
    "guarantee_thm2",
    "gamma_f",
    "kappa_f",
    "alpha_f",
    "gamma_tilde_f",
    "alpha_h",
    "exact_ratios",
    "solution_alg1",
    "solution_alg2",
];

pub const TIMING_COLUMNS: [&str; 2] = ["wall_time_alg1", "wall_time_alg2"];

fn items(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Per-trial CSV. Wall times are appended only when `timing` is set, so the
/// default output is reproducible byte for byte.
pub fn write_performance_csv<W: std::io::Write>(
    rows: &[TrialRecord],
    out: W,
    timing: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = PERFORMANCE_COLUMNS.to_vec();
    if timing {
        header.extend(TIMING_COLUMNS);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            ext::fmt(r.sigma_v),
            r.trial.to_string(),
            ext::fmt(r.f_alg1),
            ext::fmt(r.f_alg2),
            ext::fmt(r.f_opt),
            ext::fmt(r.ratio_alg1),
            ext::fmt(r.ratio_alg2),
            ext::fmt(r.guarantee_thm1),
            ext::fmt(r.guarantee_thm2),
            ext::fmt(r.gamma_f),
            ext::fmt(r.kappa_f),
            ext::fmt(r.alpha_f),
            ext::fmt(r.gamma_tilde_f),
            ext::fmt(r.alpha_h),
            r.exact_ratios.to_string(),
            items(&r.solution_alg1),
            items(&r.solution_alg2),
        ];
        if timing {
            rec.push(ext::fmt(r.wall_time_alg1));
            rec.push(ext::fmt(r.wall_time_alg2));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-`σ_v` means of the performance experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSummary {
    pub sigma_v: f64,
    pub trials: usize,
    pub mean_ratio_alg1: f64,
    pub mean_ratio_alg2: f64,
    pub mean_guarantee_thm1: f64,
    pub mean_guarantee_thm2: f64,
    /// Trials where some guarantee exceeded the actual ratio.
    pub violations: usize,
}

impl SigmaSummary {
    pub fn alg2_better(&self) -> bool {
        self.mean_ratio_alg2 > self.mean_ratio_alg1
    }

    pub fn conservative(&self) -> bool {
        self.mean_guarantee_thm1 <= self.mean_ratio_alg1
            && self.mean_guarantee_thm2 <= self.mean_ratio_alg2
    }
}

/// Slack for comparing a guarantee against an actual ratio.
pub const GUARANTEE_TOL: f64 = 1e-9;

pub fn summarize(rows: &[TrialRecord]) -> Vec<SigmaSummary> {
    let mut out: Vec<SigmaSummary> = Vec::new();
    for group in rows.chunk_by(|a, b| a.sigma_v == b.sigma_v) {
        let k = group.len() as f64;
        let mean = |f: fn(&TrialRecord) -> f64| group.iter().map(f).sum::<f64>() / k;
        out.push(SigmaSummary {
            sigma_v: group[0].sigma_v,
            trials: group.len(),
            mean_ratio_alg1: mean(|r| r.ratio_alg1),
            mean_ratio_alg2: mean(|r| r.ratio_alg2),
            mean_guarantee_thm1: mean(|r| r.guarantee_thm1),
            mean_guarantee_thm2: mean(|r| r.guarantee_thm2),
            violations: group
                .iter()
                .filter(|r| {
                    r.ratio_alg1 < r.guarantee_thm1 - GUARANTEE_TOL
                        || r.ratio_alg2 < r.guarantee_thm2 - GUARANTEE_TOL
                })
                .count(),
        });
    }
    out
}

pub fn write_summary_csv<W: std::io::Write>(rows: &[SigmaSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sigma_v",
        "trials",
        "mean_ratio_alg1",
        "mean_ratio_alg2",
        "mean_guarantee_thm1",
        "mean_guarantee_thm2",
        "violations",
        "alg2_better",
        "conservative",
    ])?;
    for s in rows {
        w.write_record([
            ext::fmt(s.sigma_v),
            s.trials.to_string(),
            ext::fmt(s.mean_ratio_alg1),
            ext::fmt(s.mean_ratio_alg2),
            ext::fmt(s.mean_guarantee_thm1),
            ext::fmt(s.mean_guarantee_thm2),
            s.violations.to_string(),
            s.alg2_better().to_string(),
            s.conservative().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the runtime sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuntimeRecord {
    pub m: usize,
    pub trials: usize,
    pub mean_time_alg1: f64,
    pub mean_time_alg2: f64,
    pub mean_f_alg1: f64,
    pub mean_f_alg2: f64,
}

impl RuntimeRecord {
    pub fn alg1_faster(&self) -> bool {
        self.mean_time_alg1 < self.mean_time_alg2
    }
}

impl fmt::Display for RuntimeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={:>3}  alg1 {:.4}s  alg2 {:.4}s  alg1 faster: {}",
            self.m,
            self.mean_time_alg1,
            self.mean_time_alg2,
            self.alg1_faster()
        )
    }
}

/// Times both solvers for every `m` in the sweep. Trials run one after
/// another so timings do not compete for cores; the parallel solver still
/// fans out over blocks.
pub fn run_runtime_experiment(config: &ExperimentConfig) -> Result<Vec<RuntimeRecord>> {
    config.validate()?;
    let sigma = config.sigma_range[0];
    let mut out = Vec::with_capacity(config.sensors_sweep.len());
    for &m in &config.sensors_sweep {
        let (mut t1, mut t2, mut f1, mut f2) = (0.0, 0.0, 0.0, 0.0);
        for trial in 0..config.trials {
            let inst = gen_instance_file(config, sigma, trial, m)?.build()?;
            let run = inst.fresh();
            let t0 = Instant::now();
            let r1 = parallel_greedy(&run)?;
            t1 += t0.elapsed().as_secs_f64();
            let run = inst.fresh();
            let t0 = Instant::now();
            let r2 = general_greedy(&run)?;
            t2 += t0.elapsed().as_secs_f64();
            f1 += r1.value;
            f2 += r2.value;
        }
        let k = config.trials as f64;
        out.push(RuntimeRecord {
            m,
            trials: config.trials,
            mean_time_alg1: t1 / k,
            mean_time_alg2: t2 / k,
            mean_f_alg1: f1 / k,
            mean_f_alg2: f2 / k,
        });
    }
    Ok(out)
}

pub const RUNTIME_COLUMNS: [&str; 7] = [
    "m",
    "trials",
    "mean_time_alg1",
    "mean_time_alg2",
    "mean_f_alg1",
    "mean_f_alg2",
    "alg1_faster",
];

pub fn write_runtime_csv<W: std::io::Write>(rows: &[RuntimeRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNTIME_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.trials.to_string(),
            ext::fmt(r.mean_time_alg1),
            ext::fmt(r.mean_time_alg2),
            ext::fmt(r.mean_f_alg1),
            ext::fmt(r.mean_f_alg2),
            r.alg1_faster().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_protocol_shape() {
        let cfg = ExperimentConfig::paper_fig1();
        let inst = gen_instance(&cfg, 1.0, 0).unwrap();
        assert_eq!(inst.item_count(), 9);
        assert_eq!(inst.ground().block_sizes(), vec![3, 3, 3]);
        let file = gen_instance_file(&cfg, 1.0, 0, 3).unwrap();
        let ObjectiveSpec::Kalman(k) = &file.objective else {
            panic!("kalman objective expected")
        };
        assert_eq!(k.w, vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(k.pi0, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        for c in &file.constraints {
            let ConstraintKind::Latency(l) = &c.spec else {
                panic!()
            };
            let full = LatencyProfile::new(l.c.clone(), l.t.clone())
                .unwrap()
                .h_c(&ItemSet::full(3));
            assert_eq!(c.budget, full / 2.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ExperimentConfig::paper_fig1();
        assert_eq!(
            gen_instance_file(&cfg, 4.0, 7, 3).unwrap(),
            gen_instance_file(&cfg, 4.0, 7, 3).unwrap()
        );
        assert_ne!(
            gen_instance_file(&cfg, 4.0, 7, 3).unwrap(),
            gen_instance_file(&cfg, 4.0, 8, 3).unwrap()
        );
    }

    #[test]
    fn single_trial_row() {
        let cfg = ExperimentConfig {
            sigma_range: vec![2.0],
            trials: 1,
            ..ExperimentConfig::paper_fig1()
        };
        let rows = run_performance_experiment(&cfg, Exec::Sequential).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.exact_ratios);
        assert!(r.ratio_alg1 >= r.guarantee_thm1 - GUARANTEE_TOL);
        assert!(r.ratio_alg2 >= r.guarantee_thm2 - GUARANTEE_TOL);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.budget_fraction = 1.5;
        assert!(cfg.validate().is_err());
    }
}
