use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpe_core::orchestrator::{write_trials_csv, CampaignReport};
use dpe_core::phase_sim::{exact_distribution, MAX_PRECISION};
use dpe_core::rng::{derive_seed, rng_from_seed, PHASE_STREAM};
use dpe_core::stitch::mine_overlap_counterexample;
use dpe_core::verify::{self, CheckSummary};
use dpe_core::{
    demonstrate_scheme1_failure, mine_k0_counterexample, plan_distributed, resource_report,
    run_node_sampled, run_node_statevector, run_trials, t_for, Backend, CampaignConfig, Error,
    MinerOutcome, NodeConfig, PhaseSource, PhaseSpec,
};
use serde_json::json;

/// Overlap-stitched distributed phase estimation: verification suites,
/// counterexample miners and Monte Carlo campaigns.
#[derive(Parser)]
#[command(name = "dpe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check the bit-string and stitching properties up to --n bits.
    VerifyProps(VerifyArgs),
    /// Search for a stitching failure with 2-bit overlaps; control run with 3.
    MineK0(MineArgs),
    /// Show that plain catenation of independent estimates can be far off.
    Scheme1Demo(Scheme1Args),
    /// Run a single estimation node on one phase.
    Node(NodeArgs),
    /// Monte Carlo campaign of the distributed algorithm.
    Campaign(CampaignArgs),
    /// Per-node and centralized qubit and gate counts.
    Resources(GeometryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Sampled,
    Statevector,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Sampled => Backend::Sampled,
            BackendArg::Statevector => Backend::Statevector,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest string length swept exhaustively.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(3..=14))]
    n: u32,
    /// Restrict the stitching sweep to one window length.
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=64))]
    n0: Option<u32>,
    /// Random stitching cases at 48 bits.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    n: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    n0: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Scheme1Args {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(2..=20))]
    n: u32,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..=20))]
    k: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NodeArgs {
    /// Target number of correct leading digits; sets t with --epsilon.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    n: u32,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// `<int>/2^<int>` or `random`.
    #[arg(long, default_value = "random")]
    omega: String,
    /// Precision of a random phase; defaults to n + 16.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    p: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Sampled)]
    backend: BackendArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    n: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=64))]
    n0: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    k: u32,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// `<int>/2^<int>` or `random`.
    #[arg(long, default_value = "random")]
    omega: String,
    /// Precision of random phases; defaults to n + 16.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=64))]
    p: Option<u32>,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Sampled)]
    backend: BackendArg,
}

/// Why a command did not succeed.
enum Failure {
    /// A verified property or bound did not hold.
    Check(String),
    /// The invocation cannot be carried out as given.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(msg) => Failure::Check(format!("i/o error: {msg}")),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(format!("i/o error: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::VerifyProps(a) => verify_props(a),
        Command::MineK0(a) => mine_k0(a),
        Command::Scheme1Demo(a) => scheme1_demo(a),
        Command::Node(a) => node(a),
        Command::Campaign(a) => campaign(a),
        Command::Resources(a) => resources(a),
    };
    eprintln!("wall clock: {:.3?}", started.elapsed());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}

fn sink(output: &Output) -> io::Result<Box<dyn Write>> {
    Ok(match &output.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn reject_csv(format: Format, command: &str) -> Outcome {
    match format {
        Format::Csv => Err(Failure::Usage(format!(
            "--format csv is not available for {command}"
        ))),
        _ => Ok(()),
    }
}

fn parse_phase(omega: &str, p: Option<u32>, n: u32) -> Result<PhaseSource, Failure> {
    if omega == "random" {
        let precision = p.unwrap_or(n + 16);
        if precision > MAX_PRECISION {
            return Err(Failure::Usage(format!(
                "--p defaults to n + 16 = {precision}, above the {MAX_PRECISION}-bit limit; pass --p"
            )));
        }
        return Ok(PhaseSource::UniformRandom { precision });
    }
    let phase: PhaseSpec = omega
        .parse()
        .map_err(|e: Error| Failure::Usage(format!("--omega: {e}")))?;
    if let Some(p) = p {
        if p != phase.precision() {
            return Err(Failure::Usage(format!(
                "--p {p} contradicts the precision of --omega {omega}"
            )));
        }
    }
    Ok(PhaseSource::Fixed { omega: phase })
}

fn verify_props(a: VerifyArgs) -> Outcome {
    let format = a.output.format.unwrap_or(Format::Text);
    reject_csv(format, "verify-props")?;
    let n0s: Vec<u32> = match a.n0 {
        Some(n0) => vec![n0],
        None => vec![3, 4, 5],
    };
    let steps = verify::correction_step(3..=6);
    let sweep = verify::stitch_exhaustive(a.n, &n0s);
    let checks: Vec<CheckSummary> = vec![
        verify::distance_is_min_offset(a.n),
        verify::metric_axioms(a.n),
        verify::prefix_transfer(a.n),
        verify::suffix_transfer(a.n),
        steps.unique_offset,
        steps.unique_correction,
        steps.additive_correction,
        sweep.equality,
        sweep.overlap_gap,
        sweep.identity,
        verify::stitch_randomized(48, a.trials, a.seed),
    ];
    let two = verify::overlap_census(2, a.n, &n0s);
    let three = verify::overlap_census(3, a.n, &n0s);

    let mut w = sink(&a.output)?;
    match format {
        Format::Json => {
            let doc = json!({
                "n_max": a.n,
                "N0": n0s,
                "checks": checks,
                "overlap_2": two,
                "overlap_3": three,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
        _ => {
            writeln!(w, "{:<40} {:>14} {:>10}", "check", "cases", "violations")?;
            for c in &checks {
                writeln!(w, "{:<40} {:>14} {:>10}", c.name, c.cases, c.violations)?;
            }
            for census in [&two, &three] {
                writeln!(
                    w,
                    "{:<40} {:>14} {:>10}",
                    format!("overlap {} counterexamples", census.overlap),
                    census.cases,
                    census.counterexamples
                )?;
            }
        }
    }
    w.flush()?;

    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Check(format!("violations in: {}", failed.join(", "))));
    }
    if three.counterexamples != 0 {
        return Err(Failure::Check("3-bit overlaps admitted a counterexample".into()));
    }
    Ok(())
}

fn mine_k0(a: MineArgs) -> Outcome {
    let format = a.output.format.unwrap_or(Format::Json);
    reject_csv(format, "mine-k0")?;
    let found = mine_k0_counterexample(a.n, a.n0);
    if let MinerOutcome::NotApplicable { reason } = &found {
        return Err(Failure::Usage(format!("invalid geometry: {reason}")));
    }
    let control = mine_overlap_counterexample(a.n, a.n0, 3);

    let mut w = sink(&a.output)?;
    match (&found, format) {
        (MinerOutcome::Witness(rec), Format::Json) => writeln!(w, "{}", rec.to_json_line())?,
        (MinerOutcome::Witness(rec), _) => {
            writeln!(w, "omega          {}", rec.omega)?;
            writeln!(w, "windows        {:?}", rec.plan.starts)?;
            writeln!(w, "perturbations  {:?}", rec.perturbations)?;
            writeln!(w, "stitched       {}", rec.stitched)?;
            writeln!(w, "d_total        {}", rec.d_total)?;
            writeln!(w, "d_last         {}", rec.d_last)?;
            for alt in &rec.alternatives {
                writeln!(w, "alternative    {alt}")?;
            }
        }
        (other, _) => writeln!(w, "{}", serde_json::to_string(other).expect("serializable"))?,
    }
    w.flush()?;

    match &control {
        MinerOutcome::Witness(rec) => Err(Failure::Check(format!(
            "3-bit overlap control found a witness: {}",
            rec.to_json_line()
        ))),
        MinerOutcome::NoWitness { searched } => {
            eprintln!("control with 3-bit overlaps: no witness in {searched} cases");
            Ok(())
        }
        MinerOutcome::NotApplicable { reason } => {
            eprintln!("control with 3-bit overlaps not applicable: {reason}");
            Ok(())
        }
    }
}

fn scheme1_demo(a: Scheme1Args) -> Outcome {
    let format = a.output.format.unwrap_or(Format::Json);
    reject_csv(format, "scheme1-demo")?;
    if a.k > a.n {
        return Err(Failure::Usage(format!("--k {} exceeds --n {}", a.k, a.n)));
    }
    let found = demonstrate_scheme1_failure(a.n, a.k)?;
    let mut w = sink(&a.output)?;
    match &found {
        Some(rec) => writeln!(w, "{}", rec.to_json_line())?,
        None => writeln!(w, "{}", json!({ "verdict": "no_witness" }))?,
    }
    w.flush()?;
    match found {
        Some(_) => Ok(()),
        None => Err(Failure::Check("no catenation failure found".into())),
    }
}

fn node(a: NodeArgs) -> Outcome {
    let format = a.output.format.unwrap_or(Format::Json);
    let t = t_for(a.n, a.epsilon)?;
    let source = parse_phase(&a.omega, a.p, a.n)?;
    let phase = match source {
        PhaseSource::Fixed { omega } => omega,
        PhaseSource::UniformRandom { precision } => {
            let mut rng = rng_from_seed(derive_seed(a.seed, PHASE_STREAM));
            PhaseSpec::random(precision, &mut rng)?
        }
    };
    let cfg = NodeConfig::new(t, 0);
    let estimate = match Backend::from(a.backend) {
        Backend::Sampled => run_node_sampled(&phase, &cfg, a.seed)?,
        Backend::Statevector => run_node_statevector(&phase, &cfg, a.seed)?,
    };
    let truth_t = phase.expansion_prefix(t)?;
    let truth_n = phase.expansion_prefix(a.n)?;
    let d_t = estimate.distance(&truth_t)?;
    let d_n = estimate.prefix(a.n)?.distance(&truth_n)?;

    let mut w = sink(&a.output)?;
    match format {
        Format::Csv => exact_distribution(&phase, &cfg)?.write_csv(&mut w)?,
        Format::Json => {
            let doc = json!({
                "omega": phase,
                "t": t,
                "seed": a.seed,
                "backend": Backend::from(a.backend),
                "estimate": estimate,
                "target": truth_t,
                "distance_t": d_t,
                "estimate_prefix": estimate.prefix(a.n)?,
                "distance_n": d_n,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
        Format::Text => {
            writeln!(w, "omega     {phase}")?;
            writeln!(w, "t         {t}")?;
            writeln!(w, "estimate  {estimate}")?;
            writeln!(w, "target    {truth_t}")?;
            writeln!(w, "D_t       {d_t}")?;
            writeln!(w, "D_n       {d_n}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn campaign(a: CampaignArgs) -> Outcome {
    let g = &a.geometry;
    let format = g.output.format.unwrap_or(Format::Json);
    let dplan = plan_distributed(g.n, g.n0, g.k, g.epsilon)?;
    let phase_source = parse_phase(&a.omega, a.p, g.n)?;
    let config = CampaignConfig {
        trials: a.trials,
        phase_source,
        seed: a.seed,
        backend: a.backend.into(),
    };
    let started = Instant::now();
    let records = run_trials(&dplan, &config)?;
    let report = CampaignReport::from_records(&dplan, &config, &records, started.elapsed());

    let mut w = sink(&g.output)?;
    match format {
        Format::Json => writeln!(w, "{}", report.to_json())?,
        Format::Csv => write_trials_csv(&records, &mut w)?,
        Format::Text => {
            writeln!(w, "trials                  {}", report.trials)?;
            writeln!(w, "success rate            {:.6}", report.success_rate)?;
            writeln!(w, "threshold 1-eps-3sigma  {:.6}", report.threshold)?;
            writeln!(w, "stitch failures         {}", report.stitch_failures)?;
            writeln!(w, "equality violations     {}", report.theorem1_equality_violations)?;
            for (i, r) in report.per_node_success_rates.iter().enumerate() {
                writeln!(w, "node {:<3} rate           {r:.6}", i + 1)?;
            }
            writeln!(w)?;
            writeln!(w, "{}", report.resources)?;
        }
    }
    w.flush()?;
    eprintln!(
        "success rate {:.6} (threshold {:.6}), campaign time {:.3?}",
        report.success_rate, report.threshold, report.wall_clock
    );
    if report.truncation_risk {
        eprintln!("warning: phase precision is below the deepest digit any node reads");
    }

    if report.theorem1_equality_violations > 0 {
        return Err(Failure::Check(format!(
            "{} trials broke the last-window equality",
            report.theorem1_equality_violations
        )));
    }
    if !report.meets_bound {
        return Err(Failure::Check(format!(
            "success rate {:.6} below threshold {:.6}",
            report.success_rate, report.threshold
        )));
    }
    Ok(())
}

fn resources(a: GeometryArgs) -> Outcome {
    let format = a.output.format.unwrap_or(Format::Text);
    reject_csv(format, "resources")?;
    let dplan = plan_distributed(a.n, a.n0, a.k, a.epsilon)?;
    let report = resource_report(&dplan);
    let mut w = sink(&a.output)?;
    match format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?,
        _ => writeln!(w, "{report}")?,
    }
    w.flush()?;
    Ok(())
}
