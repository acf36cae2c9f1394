use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use basisnet::basis::{derive_ci_partition, partition_from_explicit, BasisPartition};
use basisnet::bench::{format_table, run_bench, BenchConfig, Scale};
use basisnet::brg::{build_brg, export_dot, BrgDump, DotAnnotations};
use basisnet::caps::Caps;
use basisnet::format::{parse_net, parse_partition, NetFile};
use basisnet::oracle::{build_rg, rg_nonblocking};
use basisnet::report::Report;
use basisnet::verify::{check_nonblocking, verify_brg, VerifyOptions};
use basisnet::TransitionSet;

/// Non-blockingness verification of bounded Petri nets with basis reachability graphs.
#[derive(Parser)]
#[command(name = "basisnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide non-blockingness. Exit 0: non-blocking, 1: blocking, 2: error.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the basis reachability graph and export it.
    Brg {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Graphviz output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// JSON dump (states as token vectors, edges as triples).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sweep initial tokens and GMEC bounds, one table row per instance.
    Bench {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// `place=v1,v2,...`; repeat for several places (cartesian product).
        #[arg(long = "scale")]
        scales: Vec<Scale>,
        /// GMEC bound(s) to substitute for every constraint.
        #[arg(long = "k", value_delimiter = ',')]
        bounds: Vec<i64>,
        /// Also build the full reachability graph for |R| and a cross-check.
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        oracle: Switch,
    },
    /// Build the full reachability graph and decide non-blockingness on it directly.
    Rg {
        file: PathBuf,
        #[arg(long)]
        caps: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// `auto`, or a file of `explicit a,b,...` lines giving the explicit transitions.
    #[arg(long, default_value = "auto")]
    partition: String,
    /// Transitions to keep explicit when deriving the partition.
    #[arg(long, value_delimiter = ',')]
    explicit: Vec<String>,
    /// Cap overrides, e.g. `brg=100000,saturation=1000`.
    #[arg(long)]
    caps: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

fn load(path: &Path) -> Result<NetFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_net(&text).with_context(|| format!("parsing {}", path.display()))
}

fn caps(flag: Option<&str>) -> Result<Caps> {
    let mut caps = Caps::from_env()?;
    if let Some(spec) = flag {
        caps.apply(spec)?;
    }
    Ok(caps)
}

fn forced_explicit(file: &NetFile, extra: &[String]) -> Result<TransitionSet> {
    let mut set = file.forced_explicit_set()?;
    set.extend(file.plant.net.transition_set(extra)?);
    Ok(set)
}

/// The user-supplied partition, or `None` for `auto`.
fn user_partition(file: &NetFile, spec: &str) -> Result<Option<BasisPartition>> {
    if spec == "auto" {
        return Ok(None);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading partition {spec}"))?;
    let explicit = parse_partition(&text, &file.plant.net)
        .with_context(|| format!("parsing partition {spec}"))?;
    let pi = partition_from_explicit(&file.plant.net, &file.plant.final_spec, &explicit)?;
    if !pi.flags().is_ci() {
        bail!("partition {spec} is not a CI-partition ({})", pi.flags());
    }
    Ok(Some(pi))
}

fn write_output(path: &Path, content: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        print!("{content}");
        Ok(())
    } else {
        fs::write(path, content).with_context(|| format!("writing {}", path.display()))
    }
}

fn verdict_code(nonblocking: bool) -> ExitCode {
    ExitCode::from(if nonblocking { 0 } else { 1 })
}

fn cmd_verify(file: &Path, common: &Common, report: Option<&Path>) -> Result<ExitCode> {
    let net_file = load(file)?;
    let caps = caps(common.caps.as_deref())?;
    let pi = user_partition(&net_file, &common.partition)?;
    let opts = VerifyOptions {
        limits: caps.brg_limits(),
        forced_explicit: forced_explicit(&net_file, &common.explicit)?,
    };
    let plant = &net_file.plant;
    let analysis = check_nonblocking(plant, pi.as_ref(), &opts)?;
    let r = Report::from_analysis(&analysis, plant);
    let v = &analysis.verdict;
    let to_stdout = report.is_some_and(|p| p.as_os_str() == "-");
    if !to_stdout {
        println!(
            "basis markings: {}, edges: {}, final basis markings: {}",
            v.stats.states, v.stats.edges, v.stats.final_basis
        );
        match v.blocking_witness {
            None => println!("non-blocking"),
            Some(s) => println!(
                "blocking: Mb{s} = {} cannot reach a final marking",
                analysis.brg.state(s)
            ),
        }
    }
    if let Some(path) = report {
        write_output(path, &r.to_json())?;
    }
    Ok(verdict_code(v.nonblocking))
}

fn cmd_brg(
    file: &Path,
    common: &Common,
    dot: Option<&Path>,
    json: Option<&Path>,
) -> Result<ExitCode> {
    let net_file = load(file)?;
    let caps = caps(common.caps.as_deref())?;
    let plant = &net_file.plant;
    let pi = match user_partition(&net_file, &common.partition)? {
        Some(pi) => pi,
        None => derive_ci_partition(
            &plant.net,
            &plant.final_spec,
            &forced_explicit(&net_file, &common.explicit)?,
        )?,
    };
    let brg = build_brg(plant, &pi, caps.brg_limits())?;
    let verdict = verify_brg(&brg, plant, caps.saturation)?;
    let names =
        |ts: &[usize]| -> Vec<&str> { ts.iter().map(|&t| plant.net.transition_name(t)).collect() };
    eprintln!("explicit: {}", names(pi.explicit()).join(","));
    eprintln!("implicit: {}", names(pi.implicit()).join(","));
    eprintln!(
        "basis markings: {}, edges: {}",
        brg.state_count(),
        brg.edge_count()
    );
    if let Some(path) = dot {
        let notes = DotAnnotations {
            final_states: verdict.final_basis.iter().copied().collect(),
            dead_states: verdict.dead_end_states.iter().copied().collect(),
        };
        write_output(path, &export_dot(&brg, &plant.net, &notes))?;
    }
    if let Some(path) = json {
        let dump = BrgDump::from_brg(&brg, &plant.net);
        write_output(path, &(serde_json::to_string_pretty(&dump)? + "\n"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    file: &Path,
    common: &Common,
    scales: Vec<Scale>,
    bounds: Vec<i64>,
    oracle: Switch,
) -> Result<ExitCode> {
    let net_file = load(file)?;
    if common.partition != "auto" {
        bail!("bench derives a partition per row; --partition must be auto");
    }
    let config = BenchConfig {
        scales,
        bounds,
        oracle: oracle == Switch::On,
        caps: caps(common.caps.as_deref())?,
        forced_explicit: forced_explicit(&net_file, &common.explicit)?,
    };
    let rows = run_bench(&net_file.plant, &config);
    print!("{}", format_table(&rows));
    let mismatch = rows.iter().any(|r| {
        r.outcome
            .as_ref()
            .is_ok_and(|r| r.oracle_nonblocking.is_some_and(|o| o != r.nonblocking))
    });
    if mismatch {
        bail!("verdict differs from the reachability-graph check on at least one row");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_rg(file: &Path, caps_flag: Option<&str>) -> Result<ExitCode> {
    let net_file = load(file)?;
    let caps = caps(caps_flag)?;
    let plant = &net_file.plant;
    let rg = build_rg(&plant.net, &plant.initial, caps.rg_states)?;
    let v = rg_nonblocking(&rg, &plant.final_spec)?;
    println!(
        "reachable markings: {}, edges: {}, dead markings: {}",
        rg.state_count(),
        rg.edges.len(),
        rg.dead.len()
    );
    match v.witness {
        None => println!("non-blocking"),
        Some(s) => println!("blocking: {} cannot reach a final marking", rg.states[s]),
    }
    Ok(verdict_code(v.nonblocking))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify {
            file,
            common,
            report,
        } => cmd_verify(&file, &common, report.as_deref()),
        Command::Brg {
            file,
            common,
            dot,
            json,
        } => cmd_brg(&file, &common, dot.as_deref(), json.as_deref()),
        Command::Bench {
            file,
            common,
            scales,
            bounds,
            oracle,
        } => cmd_bench(&file, &common, scales, bounds, oracle),
        Command::Rg { file, caps } => cmd_rg(&file, caps.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
