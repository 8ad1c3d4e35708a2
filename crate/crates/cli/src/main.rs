use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_bandits::analysis::{kappa_bounds, regret_bound_constants, AnalysisError};
use causal_bandits::environment::{sample_prior_center, PriorConfig, RegretOracle};
use causal_bandits::harness::{
    build_instance, build_setup, export_csv, gen_enhanced_parallel, gen_hierarchical, resolved_beta, run_experiment,
    summarize, sweep, write_sidecar, ExperimentConfig, GeneratedGraph, HarnessError, RegretSummary,
};
use causal_bandits::rng::{stream, Purpose};
use causal_bandits::sem::{graph_stats, write_graph_file};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "causal-bandits", version, about = "Causal bandit experiments on linear SEMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its regret table.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override any config key, e.g. `--set policy.sigma=0.5`.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run every `*.toml` config in a directory and summarize final regret.
    Sweep {
        dir: PathBuf,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write the summary table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print graph statistics and theory constants for a config.
    Inspect {
        config: PathBuf,
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        overrides: Vec<String>,
        /// Instance whose second moments determine the kappa bounds.
        #[arg(long, default_value_t = 0)]
        instance: usize,
        /// Also write the key-value pairs as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Emit a benchmark graph in the text graph format.
    GenGraph {
        #[command(subcommand)]
        family: Family,
        /// Seed for the prior-center weights written to the file.
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    Hierarchical {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        layers: usize,
    },
    EnhancedParallel {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        structure_seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, overrides } => cmd_run(&config, seed, out, overrides),
        Command::Sweep { dir, overrides, out } => cmd_sweep(&dir, &overrides, out.as_deref()),
        Command::Inspect { config, overrides, instance, csv } => cmd_inspect(&config, &overrides, instance, csv.as_deref()),
        Command::GenGraph { family, seed, out } => cmd_gen_graph(family, seed, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn print_summary(s: &RegretSummary) {
    println!(
        "{}: mean cumulative regret at T={} over {} runs = {} (stderr over runs {}, over instances {})",
        s.label, s.horizon, s.runs, s.mean, s.stderr_runs, s.stderr_instances
    );
}

fn cmd_run(path: &Path, seed: Option<u64>, out: Option<PathBuf>, overrides: Vec<String>) -> Result<(), HarnessError> {
    let mut config = ExperimentConfig::load(path, &overrides)?;
    if let Some(s) = seed {
        config.run.base_seed = s;
    }
    if out.is_some() {
        config.run.output = out;
    }
    let table = run_experiment(&config)?;
    let out = config.run.output.clone().unwrap_or_else(|| PathBuf::from("regret.csv"));
    export_csv(&table, &out)?;
    let sidecar = write_sidecar(&config, &out)?;
    print_summary(&summarize(&config.label(), &table));
    println!("wrote {} and {}", out.display(), sidecar.display());
    Ok(())
}

fn cmd_sweep(dir: &Path, overrides: &[String], out: Option<&Path>) -> Result<(), HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::Config(format!("no .toml configs in {}", dir.display())));
    }
    let configs = paths.iter().map(|p| ExperimentConfig::load(p, overrides)).collect::<Result<Vec<_>, _>>()?;
    let rows = sweep(&configs)?;
    println!("label,horizon,runs,mean_cum_regret,stderr_runs,stderr_instances");
    let lines: Vec<String> = rows
        .iter()
        .map(|s| format!("{},{},{},{},{},{}", s.label, s.horizon, s.runs, s.mean, s.stderr_runs, s.stderr_instances))
        .collect();
    for l in &lines {
        println!("{l}");
    }
    if let Some(out) = out {
        let mut text = String::from("label,horizon,runs,mean_cum_regret,stderr_runs,stderr_instances\n");
        for l in &lines {
            text.push_str(l);
            text.push('\n');
        }
        fs::write(out, text).map_err(|e| HarnessError::Config(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}

fn cmd_inspect(path: &Path, overrides: &[String], instance: usize, csv: Option<&Path>) -> Result<(), HarnessError> {
    let config = ExperimentConfig::load(path, overrides)?;
    let setup = build_setup(&config)?;
    let params = build_instance(&config, &setup, instance)?;
    let oracle = RegretOracle::new(&params, &setup.arms)?;
    let stats = graph_stats(&setup.dag);
    let nu_norm = params.noise().mean().iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut entries: Vec<(String, String)> = vec![
        ("label".into(), config.label()),
        ("nodes".into(), setup.dag.node_count().to_string()),
        ("edges".into(), setup.dag.edge_count().to_string()),
        ("max_degree".into(), stats.max_degree.to_string()),
        ("longest_path".into(), stats.longest_path.to_string()),
        ("arms".into(), setup.arms.len().to_string()),
        ("best_action".into(), oracle.best_action().to_bit_string(setup.dag.node_count())),
        ("best_mean".into(), oracle.best_mean().to_string()),
        ("max_column_norm".into(), params.max_column_norm().to_string()),
        ("policy_beta".into(), resolved_beta(&config, &setup.dag).to_string()),
    ];
    match kappa_bounds(&params, &setup.arms) {
        Ok((kmin, kmax)) => {
            match regret_bound_constants(
                setup.dag.node_count(),
                config.run.horizon,
                stats.max_degree,
                stats.longest_path,
                config.run.obs_bound,
                nu_norm,
                kmin,
                kmax,
            ) {
                Ok(c) => entries.extend(c.entries().into_iter().map(|(k, v)| (k.to_string(), v.to_string()))),
                Err(e) => {
                    entries.push(("kappa_min".into(), kmin.to_string()));
                    entries.push(("kappa_max".into(), kmax.to_string()));
                    entries.push(("theory_constants".into(), format!("unavailable: {e}")));
                }
            }
        }
        Err(e @ AnalysisError::SingularMoment { .. }) | Err(e @ AnalysisError::NoMoments) => {
            entries.push(("theory_constants".into(), format!("unavailable: {e}")));
        }
        Err(e) => return Err(e.into()),
    }
    let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &entries {
        println!("{k:width$} = {v}");
    }
    if let Some(csv) = csv {
        let mut w = csv::Writer::from_path(csv)
            .map_err(|e| HarnessError::Csv { path: csv.to_path_buf(), message: e.to_string() })?;
        let wrap = |e: csv::Error| HarnessError::Csv { path: csv.to_path_buf(), message: e.to_string() };
        w.write_record(["key", "value"]).map_err(wrap)?;
        for (k, v) in &entries {
            w.write_record([k, v]).map_err(wrap)?;
        }
        w.flush().map_err(|e| HarnessError::Config(format!("{}: {e}", csv.display())))?;
    }
    Ok(())
}

fn cmd_gen_graph(family: Family, seed: u64, out: Option<&Path>) -> Result<(), HarnessError> {
    let GeneratedGraph { dag, .. } = match family {
        Family::Hierarchical { d, layers } => gen_hierarchical(d, layers)?,
        Family::EnhancedParallel { nodes, structure_seed } => {
            gen_enhanced_parallel(nodes, &mut stream(structure_seed, 0, 0, Purpose::Structure))?
        }
    };
    let center = sample_prior_center(&dag, &PriorConfig::default(), &mut stream(seed, 0, 0, Purpose::PriorCenter))?;
    let text = write_graph_file(&dag, &center.obs_weights, &center.int_weights);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?,
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}
