mod args;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use antgene::harness::{self, BridgeConfig};
use antgene::instance::{parse_tsplib, random_instance};
use antgene::{HybridParams, Instance};

use args::{BenchArgs, BridgeArgs, Cli, Command, Format, InstanceSource, OracleArgs, RunArgs};

type CliResult<T> = Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bridge(a) => cmd_bridge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load_instance(source: &InstanceSource) -> CliResult<(Instance, String)> {
    match (&source.file, source.gen) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let inst = parse_tsplib(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok((inst, path.display().to_string()))
        }
        (None, Some((n, seed))) => {
            let inst = random_instance(n, seed).map_err(|e| e.to_string())?;
            Ok((inst, format!("gen:{n}:{seed}")))
        }
        (None, None) => Err("no instance source given".into()),
    }
}

/// Files written so far; removed again if the command fails part-way.
#[derive(Default)]
struct Artifacts {
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, path: PathBuf, contents: &str) -> CliResult<()> {
        fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    fn discard(self) {
        for p in self.written {
            let _ = fs::remove_file(p);
        }
    }
}

#[derive(Serialize)]
struct InstanceInfo {
    source: String,
    name: Option<String>,
    n: usize,
}

#[derive(Serialize)]
struct OracleInfo {
    optimum: f64,
    found: f64,
    gap: f64,
}

#[derive(Serialize)]
struct Timings {
    workers: usize,
    construction_secs: f64,
    update_secs: f64,
    ga_secs: f64,
    total_secs: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    instance: InstanceInfo,
    params: &'a HybridParams,
    seed: u64,
    best_length: f64,
    iterations: usize,
    oracle: Option<OracleInfo>,
    timings: Timings,
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let (inst, source) = load_instance(&args.source)?;
    let params = args.solver.apply(HybridParams::default());
    params.validate().map_err(|e| e.to_string())?;
    if args.oracle_check && inst.n() > antgene::instance::oracle::HELD_KARP_LIMIT {
        return Err(format!(
            "--oracle-check needs at most {} cities, instance has {}",
            antgene::instance::oracle::HELD_KARP_LIMIT,
            inst.n()
        ));
    }

    let start = Instant::now();
    let (best, trace) = antgene::solve(&inst, &params).map_err(|e| e.to_string())?;
    let total_secs = start.elapsed().as_secs_f64();
    let oracle = if args.oracle_check {
        let (optimum, found) =
            harness::compare_with_optimum(&inst, best.order()).map_err(|e| e.to_string())?;
        Some(OracleInfo {
            optimum,
            found,
            gap: (found - optimum) / optimum,
        })
    } else {
        None
    };
    let (construction_secs, update_secs, ga_secs) = trace.total_secs();
    let summary = Summary {
        instance: InstanceInfo {
            source,
            name: inst.name().map(str::to_owned),
            n: inst.n(),
        },
        params: &params,
        seed: params.seed,
        best_length: best.length(),
        iterations: trace.iterations(),
        oracle,
        timings: Timings {
            workers: antgene::EngineConfig::new(params.threads).resolved_threads(),
            construction_secs,
            update_secs,
            ga_secs,
            total_secs,
        },
    };

    let mut artifacts = Artifacts::default();
    let result = write_run_artifacts(&args.out, &args.format, &best, &trace, &summary, &mut artifacts);
    if let Err(e) = result {
        artifacts.discard();
        return Err(e);
    }
    println!(
        "best length {} after {} iterations; artifacts in {}",
        best.length(),
        trace.iterations(),
        args.out.display()
    );
    Ok(())
}

fn write_run_artifacts(
    out: &Path,
    formats: &[Format],
    best: &antgene::Tour,
    trace: &antgene::RunTrace,
    summary: &Summary<'_>,
    artifacts: &mut Artifacts,
) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    artifacts.write(out.join("tour.txt"), &best.to_tour_file())?;
    if formats.contains(&Format::Csv) {
        artifacts.write(out.join("trace.csv"), &trace.to_csv())?;
    }
    if formats.contains(&Format::Json) {
        let json = serde_json::to_string_pretty(summary).map_err(|e| e.to_string())?;
        artifacts.write(out.join("summary.json"), &(json + "\n"))?;
    }
    if formats.contains(&Format::Svg) {
        artifacts.write(out.join("trace.svg"), &svg::convergence_plot(trace))?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let (inst, _) = load_instance(&args.source)?;
    let base = HybridParams {
        max_iterations: 20,
        ..HybridParams::default()
    };
    let mut params = args.solver.apply(base);
    if args.solver.stagnation.is_none() {
        // every row does the full iteration budget
        params.stagnation_limit = params.max_iterations;
    }
    params.validate().map_err(|e| e.to_string())?;
    let rows = harness::bench(&inst, &params, &args.thread_list).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), &harness::bench_csv(&rows))
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    if args.n > antgene::instance::oracle::HELD_KARP_LIMIT {
        return Err(format!(
            "oracle comparison needs n <= {}, got {}",
            antgene::instance::oracle::HELD_KARP_LIMIT,
            args.n
        ));
    }
    let base = HybridParams {
        max_iterations: 200,
        ..HybridParams::default()
    };
    let params = args.solver.apply(base);
    params.validate().map_err(|e| e.to_string())?;
    let report = harness::oracle_sweep(args.n, &args.seeds.0, &params).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), &report.to_csv())?;
    eprintln!(
        "optimal on {}/{} seeds (fraction {})",
        report.optimal_count(),
        report.rows.len(),
        report.optimal_fraction()
    );
    Ok(())
}

fn cmd_bridge(args: BridgeArgs) -> CliResult<()> {
    let mut config = BridgeConfig {
        iterations: args.iterations,
        seed: args.seed,
        ..BridgeConfig::default()
    };
    if let Some(v) = args.ants {
        config.aco.ants = v;
    }
    if let Some(v) = args.alpha {
        config.aco.alpha = v;
    }
    if let Some(v) = args.beta {
        config.aco.beta = v;
    }
    if let Some(v) = args.delta {
        config.aco.delta = v;
    }
    if let Some(v) = args.q {
        config.aco.q = v;
    }
    let report = harness::run_bridge(&config).map_err(|e| e.to_string())?;
    emit(args.out.as_deref(), &report.to_csv())?;
    let last = report.final_record();
    eprintln!(
        "final tau short {} long {}; short branch dominates: {}; short-branch share over last 10 iterations: {}",
        last.tau_short,
        last.tau_long,
        report.short_dominates(),
        report.short_fraction(10)
    );
    Ok(())
}
