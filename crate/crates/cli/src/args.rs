use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use antgene::parallel::{parse_threads, THREADS_ENV};
use antgene::HybridParams;

#[derive(Debug, Parser)]
#[command(name = "antgene", version, about = "Hybrid ant colony / genetic algorithm TSP solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and write the tour, trace and summary.
    Run(RunArgs),
    /// Time the same seeded solve at several worker counts.
    Bench(BenchArgs),
    /// Compare solver results against the exact optimum on random instances.
    Oracle(OracleArgs),
    /// Run the double-bridge pheromone experiment.
    Bridge(BridgeArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InstanceSource {
    /// TSPLIB instance file.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
    /// Random instance: N cities uniform in the unit square, from SEED.
    #[arg(long, value_name = "N:SEED", value_parser = parse_gen)]
    pub gen: Option<(usize, u64)>,
}

fn parse_gen(s: &str) -> Result<(usize, u64), String> {
    let (n, seed) = s
        .split_once(':')
        .ok_or_else(|| format!("expected N:SEED, got `{s}`"))?;
    let n = n.parse().map_err(|_| format!("bad city count `{n}`"))?;
    let seed = seed.parse().map_err(|_| format!("bad seed `{seed}`"))?;
    Ok((n, seed))
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Trail exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Visibility exponent.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Fraction of trail kept per evaporation step, in (0, 1].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of ants.
    #[arg(long)]
    pub ants: Option<usize>,
    /// Deposit constant.
    #[arg(long)]
    pub q: Option<f64>,
    /// Initial trail (default: ants / nearest-neighbour tour length).
    #[arg(long)]
    pub tau0: Option<f64>,
    /// GA population size (default: number of ants).
    #[arg(long)]
    pub pop_size: Option<usize>,
    #[arg(long)]
    pub crossover_rate: Option<f64>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub elitism: Option<usize>,
    /// Iteration budget.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Stop after this many iterations without improvement.
    #[arg(long)]
    pub stagnation: Option<usize>,
    /// Skip 2-opt on ant tours.
    #[arg(long)]
    pub no_local_search: bool,
    /// Skip the GA stage (plain Ant System).
    #[arg(long)]
    pub no_ga: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores. Overrides ANTGENE_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl SolverArgs {
    /// Layers flags over `base`, with `ANTGENE_THREADS` between the two for
    /// the worker count.
    pub fn apply(&self, base: HybridParams) -> HybridParams {
        let env_threads = parse_threads(std::env::var(THREADS_ENV).ok().as_deref());
        self.apply_with_env(base, env_threads)
    }

    pub fn apply_with_env(&self, mut p: HybridParams, env_threads: Option<usize>) -> HybridParams {
        let pop_follows_ants = p.ga.pop_size == p.aco.ants;
        macro_rules! set {
            ($field:ident => $target:expr) => {
                if let Some(v) = self.$field {
                    $target = v;
                }
            };
        }
        set!(alpha => p.aco.alpha);
        set!(beta => p.aco.beta);
        set!(delta => p.aco.delta);
        set!(ants => p.aco.ants);
        set!(q => p.aco.q);
        if self.tau0.is_some() {
            p.aco.tau0 = self.tau0;
        }
        match self.pop_size {
            Some(v) => p.ga.pop_size = v,
            None if pop_follows_ants => p.ga.pop_size = p.aco.ants,
            None => {}
        }
        set!(crossover_rate => p.ga.crossover_rate);
        set!(mutation_rate => p.ga.mutation_rate);
        set!(elitism => p.ga.elitism);
        set!(iterations => p.max_iterations);
        set!(stagnation => p.stagnation_limit);
        set!(seed => p.seed);
        if self.no_local_search {
            p.local_search = false;
        }
        if self.no_ga {
            p.ga_enabled = false;
        }
        p.threads = self.threads.or(env_threads).unwrap_or(p.threads);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long, default_value = "antgene-out")]
    pub out: PathBuf,
    /// Artifacts besides the tour file.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
    /// Also compute the exact optimum (at most 16 cities) and report the gap.
    #[arg(long)]
    pub oracle_check: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker counts to compare.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub thread_list: Vec<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Cities per instance (at most 16).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Instance seeds: a range `A-B` or a comma list.
    #[arg(long, default_value = "1-100", value_parser = parse_seeds)]
    pub seeds: SeedList,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the per-seed CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    if let Some((a, b)) = s.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed `{b}`"))?;
        if a > b {
            return Err(format!("empty seed range {a}-{b}"));
        }
        return Ok(SeedList((a..=b).collect()));
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("bad seed `{x}`")))
        .collect::<Result<Vec<_>, _>>()
        .map(SeedList)
}

#[derive(Debug, Args)]
pub struct BridgeArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long)]
    pub ants: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Write the per-iteration CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
