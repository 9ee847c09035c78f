//! Command-line front end: every capability of the toolkit as a subcommand
//! with stable file I/O. Numeric text output uses 12 significant digits;
//! exit codes: 0 success, 2 usage, 3 data validation, 4 infeasible,
//! 5 internal.

use std::io::{BufRead, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use loglift::format::{parse_extended, sig12};
use loglift::{
    BruteForceOptions, ChannelMatrix, ChannelSampler, Error, ExperimentConfig, GreedyMove,
    JointDistribution, LiftTable, Mechanism, Metric, Partition, PrivacyReport, RandomizationMode,
    RelaxationParams, Scenario,
};

#[derive(Parser)]
#[command(
    name = "loglift",
    version,
    about = "Lift-bounded release mechanisms and privacy-utility analysis for finite joint distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check a joint distribution; print its marginals.
    Validate {
        /// Joint distribution file (.json for the structured form,
        /// delimited text otherwise).
        input: PathBuf,
    },
    /// Emit the per-pair lift table and the critical threshold ladder.
    Lift {
        input: PathBuf,
        /// Write the lift table here instead of stdout.
        #[arg(long)]
        table_out: Option<PathBuf>,
        /// Write the ladder here instead of stdout.
        #[arg(long)]
        ladder_out: Option<PathBuf>,
    },
    /// Emit the kept / randomized split of X at a threshold.
    Partition {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Emit the block-structured release channel for a threshold.
    Mechanism {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
        mode: ModeArg,
        /// Write the channel matrix here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the full privacy report for a partition or a threshold.
    Report {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Breach-probability budget; 0 describes the strict release.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Magnitude cap; a number or "inf".
        #[arg(long, default_value = "inf")]
        epsilon_bar: String,
        /// Comma-separated labels to keep (the rest are randomized);
        /// defaults to the watchdog split at --epsilon.
        #[arg(long, conflicts_with = "randomized")]
        kept: Option<String>,
        /// Comma-separated labels to randomize (the rest are kept).
        #[arg(long)]
        randomized: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the greedy relaxed partitioning; emit the report and move trace.
    Greedy {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        /// Magnitude cap; a number or "inf".
        #[arg(long)]
        epsilon_bar: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustively search all bi-partitions for the best feasible loss.
    Bruteforce {
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        /// Magnitude cap; a number or "inf".
        #[arg(long)]
        epsilon_bar: String,
        /// Drop the cap from the feasibility filter.
        #[arg(long)]
        no_eps_bar_cap: bool,
        /// Largest alphabet accepted (the search visits 2^|X| partitions).
        #[arg(long, default_value_t = 20)]
        max_alphabet: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo experiment over random joints; emit CDF and summary files.
    Simulate {
        #[arg(long)]
        trials: usize,
        /// Sensitive alphabet size.
        #[arg(long)]
        ns: usize,
        /// Useful alphabet size.
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        seed: u64,
        /// Scenarios as eps:delta:eps_bar triples separated by commas,
        /// e.g. "2:0:inf,1:0.005:2". delta 0 means the strict watchdog.
        #[arg(long)]
        scenarios: String,
        /// Metrics to record (max_lift_before, eps_c_after, nmil);
        /// default all three.
        #[arg(long)]
        metrics: Option<String>,
        /// Write the CDF table here.
        #[arg(long)]
        cdf_out: Option<PathBuf>,
        /// Write the JSON summary here.
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// Worker threads (outputs do not depend on this).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Apply a stored channel to a stream of symbols (one label per line).
    Sanitize {
        /// Channel matrix file written by `mechanism`.
        #[arg(long)]
        channel: PathBuf,
        /// Input symbol stream; stdin if omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output stream; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Merge,
}

impl From<ModeArg> for RandomizationMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Uniform => RandomizationMode::Uniform,
            ModeArg::Merge => RandomizationMode::Merge,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Infeasible => 4,
        Error::Io(_) => 5,
        Error::Trial { source, .. } => exit_code(source),
        _ => 3,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate { input } => validate(&input),
        Command::Lift {
            input,
            table_out,
            ladder_out,
        } => lift(&input, table_out.as_deref(), ladder_out.as_deref()),
        Command::Partition { input, epsilon } => partition(&input, epsilon),
        Command::Mechanism {
            input,
            epsilon,
            mode,
            output,
        } => mechanism(&input, epsilon, mode, output.as_deref()),
        Command::Report {
            input,
            epsilon,
            delta,
            epsilon_bar,
            kept,
            randomized,
            output,
        } => report(
            &input,
            epsilon,
            delta,
            &epsilon_bar,
            kept.as_deref(),
            randomized.as_deref(),
            output.as_deref(),
        ),
        Command::Greedy {
            input,
            epsilon,
            delta,
            epsilon_bar,
            output,
        } => greedy(&input, epsilon, delta, &epsilon_bar, output.as_deref()),
        Command::Bruteforce {
            input,
            epsilon,
            delta,
            epsilon_bar,
            no_eps_bar_cap,
            max_alphabet,
            output,
        } => bruteforce(
            &input,
            epsilon,
            delta,
            &epsilon_bar,
            no_eps_bar_cap,
            max_alphabet,
            output.as_deref(),
        ),
        Command::Simulate {
            trials,
            ns,
            nx,
            seed,
            scenarios,
            metrics,
            cdf_out,
            summary_out,
            jobs,
        } => simulate(
            trials,
            ns,
            nx,
            seed,
            &scenarios,
            metrics.as_deref(),
            cdf_out.as_deref(),
            summary_out.as_deref(),
            jobs,
        ),
        Command::Sanitize {
            channel,
            input,
            output,
            seed,
        } => sanitize(&channel, input.as_deref(), output.as_deref(), seed),
    }
}

fn validate(input: &Path) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    println!(
        "valid joint distribution: |S| = {}, |X| = {}",
        joint.n_s(),
        joint.n_x()
    );
    print!("p_s:");
    for (label, &p) in joint.s_labels().iter().zip(joint.p_s()) {
        print!(" {label}={}", sig12(p));
    }
    println!();
    print!("p_x:");
    for (label, &p) in joint.x_labels().iter().zip(joint.p_x()) {
        print!(" {label}={}", sig12(p));
    }
    println!();
    Ok(())
}

fn lift(input: &Path, table_out: Option<&Path>, ladder_out: Option<&Path>) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    let table = LiftTable::from_joint(&joint);
    match table_out {
        Some(path) => table.write_csv(&joint, std::fs::File::create(path)?)?,
        None => {
            println!("# lift table (s, x, lift)");
            let stdout = std::io::stdout();
            table.write_csv(&joint, stdout.lock())?;
        }
    }
    let ladder = table.critical_epsilons();
    match ladder_out {
        Some(path) => ladder.write_csv(&joint, std::fs::File::create(path)?)?,
        None => {
            println!("# critical ladder (rank, x, eps)");
            let stdout = std::io::stdout();
            ladder.write_csv(&joint, stdout.lock())?;
        }
    }
    Ok(())
}

fn partition(input: &Path, epsilon: f64) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    let partition = loglift::watchdog_partition(&joint, epsilon);
    println!("kept: {}", labels_of(&joint, partition.kept()));
    println!("randomized: {}", labels_of(&joint, partition.randomized()));
    Ok(())
}

fn mechanism(
    input: &Path,
    epsilon: f64,
    mode: ModeArg,
    output: Option<&Path>,
) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    let partition = loglift::watchdog_partition(&joint, epsilon);
    let mech = Mechanism::build(&joint, partition, mode.into())?;
    let matrix = mech.to_channel_matrix(&joint);
    match output {
        Some(path) => matrix.write_csv(std::fs::File::create(path)?)?,
        None => {
            let stdout = std::io::stdout();
            matrix.write_csv(stdout.lock())?;
        }
    }
    Ok(())
}

fn parse_labels(joint: &JointDistribution, list: &str) -> Result<Vec<usize>, Error> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|label| {
            joint
                .x_index(label)
                .ok_or_else(|| Error::Parse(format!("unknown X label {label:?}")))
        })
        .collect()
}

fn report(
    input: &Path,
    epsilon: f64,
    delta: f64,
    epsilon_bar: &str,
    kept: Option<&str>,
    randomized: Option<&str>,
    output: Option<&Path>,
) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    let eps_bar = parse_extended(epsilon_bar)?;
    let partition = if let Some(list) = kept {
        Partition::from_kept(&parse_labels(&joint, list)?, joint.n_x())?
    } else if let Some(list) = randomized {
        Partition::from_randomized(&parse_labels(&joint, list)?, joint.n_x())?
    } else {
        loglift::watchdog_partition(&joint, epsilon)
    };
    let report = PrivacyReport::evaluate(&joint, partition, epsilon, delta, eps_bar)?;
    write_json(&report, output)
}

/// Report plus the greedy move trace, as one JSON object.
#[derive(Serialize)]
struct TracedReport {
    #[serde(flatten)]
    report: PrivacyReport,
    trace: Vec<GreedyMove>,
}

fn greedy(
    input: &Path,
    epsilon: f64,
    delta: f64,
    epsilon_bar: &str,
    output: Option<&Path>,
) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    let params = RelaxationParams::new(epsilon, delta, parse_extended(epsilon_bar)?)?;
    let outcome = loglift::greedy_partition(&joint, &params)?;
    write_json(
        &TracedReport {
            report: outcome.report,
            trace: outcome.trace,
        },
        output,
    )
}

fn bruteforce(
    input: &Path,
    epsilon: f64,
    delta: f64,
    epsilon_bar: &str,
    no_eps_bar_cap: bool,
    max_alphabet: usize,
    output: Option<&Path>,
) -> Result<(), Error> {
    let joint = loglift::load_joint(input)?;
    if joint.n_x() > 16 {
        eprintln!(
            "note: exhaustive search over 2^{} bi-partitions; this may take a while",
            joint.n_x()
        );
    }
    let params = RelaxationParams::new(epsilon, delta, parse_extended(epsilon_bar)?)?;
    let options = BruteForceOptions {
        max_alphabet,
        enforce_eps_bar: !no_eps_bar_cap,
    };
    let report = loglift::brute_force_partition(&joint, &params, &options)?;
    write_json(&report, output)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    trials: usize,
    ns: usize,
    nx: usize,
    seed: u64,
    scenarios: &str,
    metrics: Option<&str>,
    cdf_out: Option<&Path>,
    summary_out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(), Error> {
    let spec = loglift::DistributionSpec::new(ns, nx, seed)?;
    let scenarios = parse_scenarios(scenarios)?;
    let metrics = match metrics {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Metric>, _>>()?,
        None => Metric::ALL.to_vec(),
    };
    let config = ExperimentConfig::new(trials, spec, scenarios, metrics)?;

    let result = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(|| loglift::run_experiment(&config)),
        None => loglift::run_experiment(&config),
    }?;

    match cdf_out {
        Some(path) => loglift::write_cdf_csv(&result, std::fs::File::create(path)?)?,
        None => {
            let stdout = std::io::stdout();
            loglift::write_cdf_csv(&result, stdout.lock())?;
        }
    }
    if let Some(path) = summary_out {
        loglift::write_summary_json(&result, std::fs::File::create(path)?)?;
    }
    for sr in &result.scenarios {
        let frac = sr
            .fraction_eps_c_below(sr.scenario.eps)
            .map(sig12)
            .unwrap_or_else(|| "n/a".to_string());
        let mean_nmil = sr
            .mean(Metric::Nmil)
            .map(sig12)
            .unwrap_or_else(|| "n/a".to_string());
        eprintln!(
            "scenario {}: trials={} empty={} frac(eps_c<eps)={} mean_nmil={}",
            sr.scenario.id(),
            sr.records.len(),
            sr.n_empty(),
            frac,
            mean_nmil
        );
    }
    Ok(())
}

fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            let bad = |msg: &str| Error::Parse(format!("scenario {item:?}: {msg}"));
            match parts.as_slice() {
                [eps, delta] | [eps, delta, _] if delta.trim() == "0" => {
                    let eps: f64 = eps.parse().map_err(|_| bad("bad eps"))?;
                    parts.get(2).map(|e| parse_extended(e)).transpose()?;
                    Ok(Scenario::watchdog(eps))
                }
                [eps, delta, eps_bar] => {
                    let eps: f64 = eps.parse().map_err(|_| bad("bad eps"))?;
                    let delta: f64 = delta.parse().map_err(|_| bad("bad delta"))?;
                    Ok(Scenario::relaxed(eps, delta, parse_extended(eps_bar)?))
                }
                _ => Err(bad("expected eps:delta:eps_bar")),
            }
        })
        .collect()
}

fn sanitize(
    channel: &Path,
    input: Option<&Path>,
    output: Option<&Path>,
    seed: u64,
) -> Result<(), Error> {
    let matrix = ChannelMatrix::read_csv(std::fs::File::open(channel)?)?;
    let mut sampler = ChannelSampler::new(&matrix, seed);

    let reader: Box<dyn Read> = match input {
        Some(path) => Box::new(std::fs::File::open(path)?),
        None => Box::new(std::io::stdin()),
    };
    let mut writer: Box<dyn Write> = match output {
        Some(path) => Box::new(BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    };

    for line in std::io::BufReader::new(reader).lines() {
        let line = line?;
        let label = line.trim();
        if label.is_empty() {
            continue;
        }
        writeln!(writer, "{}", sampler.sanitize(label)?)?;
    }
    writer.flush()?;
    Ok(())
}

fn labels_of(joint: &JointDistribution, indices: &[usize]) -> String {
    indices
        .iter()
        .map(|&x| joint.x_labels()[x].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    match output {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}
