use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nonsubmax::experiment::{self, ExperimentConfig};
use nonsubmax::io::{load_instance, InstanceFile};
use nonsubmax::ratios::{bounded_ratios, exact_ratios_with, ratios_auto, RatioReport, EXACT_LIMIT};
use nonsubmax::{brute_force_opt, general_greedy, parallel_greedy, plot, Exec, ProblemInstance};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "nonsubmax",
    version,
    about = "Greedy maximization under multiple set-function constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Parallel,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PaperFig1,
    PaperFig2,
}

impl Preset {
    fn config(self) -> ExperimentConfig {
        match self {
            Preset::PaperFig1 => ExperimentConfig::paper_fig1(),
            Preset::PaperFig2 => ExperimentConfig::paper_fig2(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Perf,
    Runtime,
}

#[derive(Subcommand)]
enum Command {
    /// Run a greedy solver and print the solution as JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "parallel")]
        alg: Alg,
        /// Write the decision trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Find the exact optimum by enumeration.
    Oracle { instance: PathBuf },
    /// Ratios of the objective and every constraint function.
    Ratios {
        instance: PathBuf,
        /// Exhaustive scan (universe of at most 12 items).
        #[arg(long, conflicts_with = "bounds")]
        exact: bool,
        /// Analytic bounds only.
        #[arg(long)]
        bounds: bool,
        /// Include the sets attaining each ratio.
        #[arg(long)]
        witnesses: bool,
    },
    /// Write an experiment config and every instance it generates.
    Gen {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run an experiment and write its CSV.
    Bench {
        #[arg(value_enum)]
        kind: BenchKind,
        /// Experiment config; defaults to the matching preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// Append wall-clock columns to the performance CSV.
        #[arg(long)]
        timing: bool,
        /// Also write per-noise-level means of a performance run here.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Run trials one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Render SVG charts from an experiment CSV.
    Plot {
        csv: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<ProblemInstance> {
    load_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn solve(path: &Path, alg: Alg, trace: Option<&Path>) -> Result<()> {
    let inst = load(path)?;
    let (name, solution, value, trace_json) = match alg {
        Alg::Parallel => {
            let r = parallel_greedy(&inst)?;
            (
                "parallel",
                r.solution,
                r.value,
                serde_json::to_value(&r.traces)?,
            )
        }
        Alg::General => {
            let r = general_greedy(&inst)?;
            (
                "general",
                r.solution,
                r.value,
                serde_json::to_value(&r.trace)?,
            )
        }
    };
    if let Some(p) = trace {
        write_json(p, &trace_json)?;
    }
    print(&json!({
        "algorithm": name,
        "solution": inst.ground().names_of(&solution),
        "items": solution,
        "value": value,
        "feasible": inst.is_feasible(&solution)?,
    }))
}

fn oracle(path: &Path) -> Result<()> {
    let inst = load(path)?;
    let r = brute_force_opt(&inst)?;
    print(&json!({
        "optimum": inst.ground().names_of(&r.optimum),
        "items": r.optimum,
        "value": r.value,
        "enumerated": r.enumerated,
        "ties": r.ties,
    }))
}

fn ratio_json(mut r: RatioReport, witnesses: bool) -> Result<Value> {
    if !witnesses {
        r.witnesses = None;
    }
    Ok(serde_json::to_value(r)?)
}

fn ratios(path: &Path, exact: bool, bounds: bool, witnesses: bool) -> Result<()> {
    let inst = load(path)?;
    let compute = |f: &nonsubmax::CachedFn| -> Result<RatioReport> {
        Ok(if exact {
            exact_ratios_with(f, Exec::default())?
        } else if bounds {
            bounded_ratios(f)?
        } else {
            ratios_auto(f, EXACT_LIMIT, Exec::default())?
        })
    };
    let objective = ratio_json(compute(inst.objective())?, witnesses)?;
    let constraints = inst
        .constraints()
        .iter()
        .map(|c| ratio_json(compute(c.h())?, witnesses))
        .collect::<Result<Vec<_>>>()?;
    print(&json!({ "objective": objective, "constraints": constraints }))
}

fn gen(preset: Preset, seed: u64, out: &Path) -> Result<()> {
    let config = ExperimentConfig {
        seed,
        ..preset.config()
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("config.json"), &serde_json::to_value(&config)?)?;
    let mut count = 0;
    for &m in &config.sensors_sweep {
        for &sigma in &config.sigma_range {
            for trial in 0..config.trials {
                let file: InstanceFile = experiment::gen_instance_file(&config, sigma, trial, m)?;
                let name = format!("m{m}_sigma{sigma}_trial{trial}.json");
                file.save(&out.join(name))?;
                count += 1;
            }
        }
    }
    eprintln!(
        "wrote config.json and {count} instances to {}",
        out.display()
    );
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn bench(
    kind: BenchKind,
    config: Option<&Path>,
    out: &Path,
    timing: bool,
    summary: Option<&Path>,
    sequential: bool,
) -> Result<()> {
    let config = match (config, kind) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, BenchKind::Perf) => ExperimentConfig::paper_fig1(),
        (None, BenchKind::Runtime) => ExperimentConfig::paper_fig2(),
    };
    match kind {
        BenchKind::Perf => {
            let exec = if sequential {
                Exec::Sequential
            } else {
                Exec::default()
            };
            let rows = experiment::run_performance_experiment(&config, exec)?;
            experiment::write_performance_csv(&rows, create(out)?, timing)?;
            let means = experiment::summarize(&rows);
            for s in &means {
                eprintln!(
                    "sigma_v={:<4} ratio alg1 {:.4} alg2 {:.4}  guarantee thm1 {:.4} thm2 {:.4}  alg2 better: {}",
                    s.sigma_v,
                    s.mean_ratio_alg1,
                    s.mean_ratio_alg2,
                    s.mean_guarantee_thm1,
                    s.mean_guarantee_thm2,
                    s.alg2_better()
                );
            }
            if let Some(p) = summary {
                experiment::write_summary_csv(&means, create(p)?)?;
            }
        }
        BenchKind::Runtime => {
            let rows = experiment::run_runtime_experiment(&config)?;
            experiment::write_runtime_csv(&rows, create(out)?)?;
            for r in &rows {
                eprintln!("{r}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            instance,
            alg,
            trace,
        } => solve(&instance, alg, trace.as_deref()),
        Command::Oracle { instance } => oracle(&instance),
        Command::Ratios {
            instance,
            exact,
            bounds,
            witnesses,
        } => ratios(&instance, exact, bounds, witnesses),
        Command::Gen { preset, seed, out } => gen(preset, seed, &out),
        Command::Bench {
            kind,
            config,
            out,
            timing,
            summary,
            sequential,
        } => bench(
            kind,
            config.as_deref(),
            &out,
            timing,
            summary.as_deref(),
            sequential,
        ),
        Command::Plot { csv, out } => {
            for p in plot::plot_csv(&csv, &out)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<nonsubmax::Error>())
                .map_or(2, nonsubmax::Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
