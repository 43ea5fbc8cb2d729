//! Command-line laboratory for random walks on Eulerian digraphs.
//!
//! Subcommands mirror the library modules: `validate` and `gen` for graphs,
//! `mix` / `spectral` / `hit` / `explore` for the measurement suites,
//! `gadget` and `dioph` for the laziness-sensitivity experiments, and
//! `audit-all` for the bundled bound-audit battery.
//!
//! Exit codes: 0 clean, 1 audit violations, 2 input or usage errors.
//! Identical `(config, seed)` pairs produce byte-identical CSV regardless
//! of `--workers`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eulerwalk::chain::{Holding, LazyChain};
use eulerwalk::corpus;
use eulerwalk::explore;
use eulerwalk::graph::{self, EulerianMultigraph, GadgetSpec};
use eulerwalk::hitting::{self, Trajectory};
use eulerwalk::mixing::{self, Metric, ThresholdOutcome};
use eulerwalk::report::{AuditVerdict, ExperimentReport, OutputFormat};
use eulerwalk::sensitivity;
use eulerwalk::spectral;

/// Directory consulted when `--graph` names a file that does not exist
/// relative to the working directory.
const CORPUS_DIR_ENV: &str = "EULERWALK_CORPUS";

#[derive(Parser)]
#[command(name = "eulerwalk", version, about = "Random-walk measurements on Eulerian digraphs")]
struct Cli {
    /// Master seed for every Monte Carlo component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Tv,
    Linf,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a graph: Eulerian, connected, regular.
    Validate {
        #[arg(long)]
        graph: String,
    },
    /// Generate a graph and write it in the text format.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Distance profiles and threshold times.
    Mix(MixArgs),
    /// Spectral profile and the integral uniform-mixing bound.
    Spectral(SpectralArgs),
    /// Hitting matrices, cover times, moving-target collisions.
    Hit(HitArgs),
    /// Exploration times with phase audits.
    Explore(ExploreArgs),
    /// Two-cycle gadget experiments.
    Gadget(GadgetArgs),
    /// Orbit gap and continued-fraction diagnostics.
    Dioph(DiophArgs),
    /// Run the bundled corpus audit battery.
    AuditAll,
}

#[derive(Subcommand)]
enum GenFamily {
    /// Biased cycle with forward/backward edge multiplicities.
    BiasedCycle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        forward: u32,
        #[arg(long, default_value_t = 1)]
        backward: u32,
    },
    /// Random connected Eulerian digraph by cycle superposition.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: u64,
    },
    /// The two-cycle gadget, holding map included.
    Gadget {
        #[arg(long)]
        n: usize,
        /// Holding probability on the marked arc: `golden`, or a number.
        #[arg(long, default_value = "golden")]
        alpha: String,
    },
}

#[derive(Args)]
struct MixArgs {
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum, default_value_t = MetricArg::Tv)]
    metric: MetricArg,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Comma-separated times; when present, emit the exact distance profile
    /// instead of a threshold search.
    #[arg(long)]
    times: Option<String>,
    /// Write the assembled kernel as `u,v,probability` CSV for debugging.
    #[arg(long)]
    dump_kernel: Option<PathBuf>,
    /// Output path (alias kept for workflows that pass `--csv`).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    graph: String,
    /// Emit the profile breakpoints.
    #[arg(long)]
    profile: bool,
    /// Evaluate the integral bound at this accuracy and audit it against
    /// the exactly measured uniform-mixing time.
    #[arg(long)]
    gmt_a: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct HitArgs {
    #[arg(long)]
    graph: String,
    /// Full expected-hitting-time matrix.
    #[arg(long, conflicts_with_all = ["cover", "collide"])]
    matrix: bool,
    /// Monte Carlo cover time from vertex 0.
    #[arg(long, conflicts_with = "collide")]
    cover: bool,
    /// Moving-target collision: `STATIC:<v>`, `SWEEP`, or `ANTIPODAL`.
    #[arg(long)]
    collide: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    graph: String,
    /// Comma-separated exploration targets.
    #[arg(long, default_value = "1,2,4,8")]
    k: String,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    /// Also print the cycle labelling order.
    #[arg(long)]
    dump_labelling: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GadgetArgs {
    /// Comma-separated cycle lengths, each divisible by 4.
    #[arg(long, default_value = "32,64,128")]
    n: String,
    /// `golden`, or a number in [0, 1); repeatable via commas.
    #[arg(long, default_value = "golden,0.5")]
    alpha: String,
    /// Exact threshold times (the scaling experiment). Default.
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Monte Carlo return-probability profile over the renewal window.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DiophArgs {
    /// `golden`, or a number in (0, 1).
    #[arg(long, default_value = "golden")]
    xi: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            eprintln!("error: worker pool already initialized");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<usize> {
    let started = Instant::now();
    let (mut report, extra_out) = match &cli.command {
        Command::Validate { graph } => (cmd_validate(graph)?, None),
        Command::Gen { family } => return cmd_gen(cli, family),
        Command::Mix(args) => (cmd_mix(args)?, args.csv.clone()),
        Command::Spectral(args) => (cmd_spectral(args)?, args.csv.clone()),
        Command::Hit(args) => (cmd_hit(args, cli.seed)?, args.csv.clone()),
        Command::Explore(args) => (cmd_explore(args, cli.seed)?, args.csv.clone()),
        Command::Gadget(args) => (cmd_gadget(args, cli.seed)?, args.csv.clone()),
        Command::Dioph(args) => (cmd_dioph(args)?, None),
        Command::AuditAll => (cmd_audit_all(cli.seed)?, None),
    };
    report.set_wall_clock(started.elapsed());
    let violations = report.violations();
    let format = match cli.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    let out = extra_out.or_else(|| cli.out.clone());
    match out {
        Some(path) => report.emit(format, std::fs::File::create(path)?)?,
        None => report.emit(format, std::io::stdout().lock())?,
    }
    Ok(violations)
}

// ---- graph sourcing -----------------------------------------------------------

/// Load a graph from a path, the corpus directory, or a generator spec of
/// the form `cycle:<n>:<fwd>:<back>`, `gadget:<n>:<alpha>` or
/// `random:<n>:<m>:<seed>`.
fn load_graph(source: &str) -> anyhow::Result<(EulerianMultigraph, Option<Vec<f64>>)> {
    if let Some(spec) = source.strip_prefix("cycle:") {
        let parts: Vec<&str> = spec.split(':').collect();
        anyhow::ensure!(parts.len() == 3, "expected cycle:<n>:<forward>:<backward>");
        let g = EulerianMultigraph::biased_cycle(
            parts[0].parse()?,
            parts[1].parse()?,
            parts[2].parse()?,
        )?;
        return Ok((g, None));
    }
    if let Some(spec) = source.strip_prefix("gadget:") {
        let parts: Vec<&str> = spec.split(':').collect();
        anyhow::ensure!(parts.len() == 2, "expected gadget:<n>:<alpha>");
        let gadget = GadgetSpec::new(parts[0].parse()?, parse_alpha(parts[1])?)?.build();
        return Ok((gadget.graph, Some(gadget.holding)));
    }
    if let Some(spec) = source.strip_prefix("random:") {
        let parts: Vec<&str> = spec.split(':').collect();
        anyhow::ensure!(parts.len() == 3, "expected random:<n>:<m>:<seed>");
        let g = EulerianMultigraph::random_eulerian(
            parts[0].parse()?,
            parts[1].parse()?,
            parts[2].parse()?,
        )?;
        return Ok((g, None));
    }
    let path = Path::new(source);
    let resolved = if path.exists() {
        path.to_path_buf()
    } else if let Ok(dir) = std::env::var(CORPUS_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        anyhow::ensure!(
            candidate.exists(),
            "graph file {source} not found (also tried {})",
            candidate.display()
        );
        candidate
    } else {
        anyhow::bail!("graph file {source} not found");
    };
    let text = std::fs::read_to_string(resolved)?;
    Ok(graph::parse_graph(&text)?)
}

/// Holding map from the file when present, uniform 1/2 laziness otherwise.
fn chain_from(source: &str) -> anyhow::Result<LazyChain> {
    let (g, holding) = load_graph(source)?;
    let holding = match holding {
        Some(h) => Holding::PerVertex(h),
        None => Holding::Constant(0.5),
    };
    Ok(LazyChain::from_graph(&g, holding)?)
}

fn parse_alpha(text: &str) -> anyhow::Result<f64> {
    if text.eq_ignore_ascii_case("golden") {
        Ok(sensitivity::golden_ratio_conjugate())
    } else {
        Ok(text.parse()?)
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(anyhow::Error::from))
        .collect()
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

// ---- subcommands ----------------------------------------------------------------

fn cmd_validate(source: &str) -> anyhow::Result<ExperimentReport> {
    let (g, _) = load_graph(source)?;
    let class = g.validate();
    let mut report = ExperimentReport::new(
        format!("validate --graph {source}"),
        &["n", "m", "eulerian", "connected", "regular_degree"],
    );
    report.push_row(vec![
        g.vertex_count().to_string(),
        g.edge_count().to_string(),
        class.eulerian.to_string(),
        class.connected.to_string(),
        class
            .regular_degree
            .map_or_else(String::new, |d| d.to_string()),
    ]);
    Ok(report)
}

fn cmd_gen(cli: &Cli, family: &GenFamily) -> anyhow::Result<usize> {
    let text = match family {
        GenFamily::BiasedCycle {
            n,
            forward,
            backward,
        } => graph::write_graph(
            &EulerianMultigraph::biased_cycle(*n, *forward, *backward)?,
            None,
        ),
        GenFamily::Random { n, edges } => graph::write_graph(
            &EulerianMultigraph::random_eulerian(*n, *edges, cli.seed)?,
            None,
        ),
        GenFamily::Gadget { n, alpha } => {
            let gadget = GadgetSpec::new(*n, parse_alpha(alpha)?)?.build();
            graph::write_graph(&gadget.graph, Some(&gadget.holding))
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_mix(args: &MixArgs) -> anyhow::Result<ExperimentReport> {
    let chain = chain_from(&args.graph)?;
    if let Some(path) = &args.dump_kernel {
        let mut text = String::from("u,v,probability\n");
        for (u, row) in chain.rows().iter().enumerate() {
            for &(v, p) in row {
                let _ = writeln!(text, "{u},{v},{p}");
            }
        }
        std::fs::write(path, text)?;
    }
    if let Some(times) = &args.times {
        let times: Vec<u64> = parse_list(times)?;
        let profile = mixing::distance_profile(&chain, &times)?;
        let mut report = ExperimentReport::new(
            format!("mix --graph {} --times {:?}", args.graph, times),
            &["t", "d1", "dinf", "dbar"],
        );
        for (i, &t) in profile.times.iter().enumerate() {
            report.push_row(vec![
                t.to_string(),
                fmt_f64(profile.d1[i]),
                fmt_f64(profile.dinf[i]),
                fmt_f64(profile.dbar[i]),
            ]);
        }
        return Ok(report);
    }
    let metric = match args.metric {
        MetricArg::Tv => Metric::Tv,
        MetricArg::Linf => Metric::LInf,
    };
    let metric_name = match metric {
        Metric::Tv => "tv",
        Metric::LInf => "linf",
    };
    let outcome = mixing::threshold_time(&chain, metric, args.eps)?;
    let mut report = ExperimentReport::new(
        format!(
            "mix --graph {} --metric {metric_name} --eps {}",
            args.graph, args.eps
        ),
        &["metric", "epsilon", "threshold_steps", "reached"],
    );
    let (steps, reached) = match outcome {
        ThresholdOutcome::Reached(t) => (t.to_string(), "true"),
        ThresholdOutcome::NotReached { cap } => (cap.to_string(), "false"),
    };
    report.push_row(vec![
        metric_name.into(),
        fmt_f64(args.eps),
        steps,
        reached.into(),
    ]);
    Ok(report)
}

fn cmd_spectral(args: &SpectralArgs) -> anyhow::Result<ExperimentReport> {
    let chain = chain_from(&args.graph)?;
    let mut report = ExperimentReport::new(
        format!("spectral --graph {}", args.graph),
        &["record", "x", "y", "witness"],
    );
    if args.profile {
        let profile = spectral::spectral_profile(&chain, spectral::SubsetMode::ConnectedOnly)?;
        for bp in &profile.breakpoints {
            let witness = bp
                .witness
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            report.push_row(vec![
                "breakpoint".into(),
                fmt_f64(bp.mass),
                fmt_f64(bp.lambda),
                witness,
            ]);
        }
    }
    if let Some(a) = args.gmt_a {
        let bound = spectral::gmt_bound(&chain, a)?;
        report.push_row(vec![
            "gmt_bound".into(),
            fmt_f64(a),
            bound.bound_steps.to_string(),
            String::new(),
        ]);
        if let ThresholdOutcome::Reached(t) = mixing::threshold_time(&chain, Metric::LInf, a)? {
            report.push_row(vec![
                "t_unif".into(),
                fmt_f64(a),
                t.to_string(),
                String::new(),
            ]);
            report.audits.push(AuditVerdict {
                bound: format!("integral bound dominates t_unif({a})"),
                checked: 1,
                violations: usize::from(bound.bound_steps < t),
                first_violation: (bound.bound_steps < t)
                    .then(|| format!("bound {} < measured {t}", bound.bound_steps)),
            });
        }
    }
    Ok(report)
}

fn cmd_hit(args: &HitArgs, seed: u64) -> anyhow::Result<ExperimentReport> {
    let chain = chain_from(&args.graph)?;
    if args.matrix {
        let h = hitting::hitting_times(&chain)?;
        let mut report = ExperimentReport::new(
            format!("hit --graph {} --matrix", args.graph),
            &["u", "v", "hitting_time"],
        );
        for u in 0..chain.state_count() {
            for v in 0..chain.state_count() {
                report.push_row(vec![u.to_string(), v.to_string(), fmt_f64(h.entry(u, v))]);
            }
        }
        return Ok(report);
    }
    if args.cover {
        let est = hitting::cover_time(&chain, 0, args.replicas, seed)?;
        let g = chain.graph();
        let bound =
            16.0 * (g.edge_count() * g.vertex_count() as u64) as f64 / g.min_degree() as f64;
        let mut report = ExperimentReport::new(
            format!(
                "hit --graph {} --cover --replicas {} --seed {seed}",
                args.graph, args.replicas
            ),
            &["start", "replicas", "mean", "stderr", "bound"],
        );
        report.push_row(vec![
            "0".into(),
            args.replicas.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.stderr),
            fmt_f64(bound),
        ]);
        report.audits.push(AuditVerdict {
            bound: "cover within 16 m n / d_min".into(),
            checked: 1,
            violations: usize::from(est.mean > bound + 3.0 * est.stderr),
            first_violation: None,
        });
        return Ok(report);
    }
    let Some(collide) = &args.collide else {
        anyhow::bail!("choose one of --matrix, --cover, --collide");
    };
    let traj = parse_trajectory(collide, &chain)?;
    let g = chain.graph();
    let horizon = 100 * g.edge_count() * g.vertex_count() as u64;
    let est = hitting::moving_target_collision(&chain, 0, &traj, args.replicas, horizon, seed)?;
    let mut report = ExperimentReport::new(
        format!(
            "hit --graph {} --collide {collide} --replicas {} --seed {seed}",
            args.graph, args.replicas
        ),
        &[
            "start",
            "trajectory",
            "replicas",
            "horizon",
            "mean",
            "stderr",
            "truncated_fraction",
        ],
    );
    report.push_row(vec![
        "0".into(),
        collide.clone(),
        args.replicas.to_string(),
        horizon.to_string(),
        fmt_f64(est.mean),
        fmt_f64(est.stderr),
        fmt_f64(est.truncated_fraction),
    ]);
    report.audits.push(AuditVerdict {
        bound: "collision estimate not truncation-dominated".into(),
        checked: 1,
        violations: usize::from(est.flagged),
        first_violation: est
            .flagged
            .then(|| format!("{:.1}% truncated", est.truncated_fraction * 100.0)),
    });
    Ok(report)
}

fn parse_trajectory(text: &str, chain: &LazyChain) -> anyhow::Result<Trajectory> {
    if let Some(v) = text.strip_prefix("STATIC:") {
        let v: usize = v.parse()?;
        anyhow::ensure!(v < chain.state_count(), "target vertex out of range");
        return Ok(Trajectory::Static(v));
    }
    match text {
        "SWEEP" => Ok(Trajectory::Sweep((0..chain.state_count()).collect())),
        "ANTIPODAL" => Ok(Trajectory::antipodal_sweep(chain, 0)),
        _ => anyhow::bail!("trajectory must be STATIC:<v>, SWEEP or ANTIPODAL"),
    }
}

fn cmd_explore(args: &ExploreArgs, seed: u64) -> anyhow::Result<ExperimentReport> {
    let (g, _) = load_graph(&args.graph)?;
    // Exploration audits run the simple (non-lazy) walk.
    let chain = corpus::nonlazy_chain(&g)?;
    let k_grid: Vec<usize> = parse_list(&args.k)?;
    let audit = explore::exploration_audit(&chain, &k_grid, args.replicas, seed)?;
    let mut report = ExperimentReport::new(
        format!(
            "explore --graph {} --k {:?} --replicas {} --seed {seed}",
            args.graph, k_grid, args.replicas
        ),
        &["k", "mean", "stderr", "bound", "ok"],
    );
    for row in &audit.rows {
        report.push_row(vec![
            row.k.to_string(),
            fmt_f64(row.mean),
            fmt_f64(row.stderr),
            fmt_f64(row.bound),
            row.ok.to_string(),
        ]);
    }
    report.audits.push(AuditVerdict {
        bound: if audit.regular {
            "exploration within 512 k^2".into()
        } else {
            "exploration within 288 k^3".into()
        },
        checked: audit.rows.len(),
        violations: audit.violations,
        first_violation: None,
    });
    if args.dump_labelling {
        let lab = explore::ham_labelling(&g, 0)?;
        let mut order = String::new();
        for v in &lab.order {
            let _ = write!(order, "{v} ");
        }
        eprintln!("labelling: {}", order.trim_end());
    }
    Ok(report)
}

fn cmd_gadget(args: &GadgetArgs, seed: u64) -> anyhow::Result<ExperimentReport> {
    let sizes: Vec<usize> = parse_list(&args.n)?;
    let alphas: Vec<f64> = args
        .alpha
        .split(',')
        .map(|s| parse_alpha(s.trim()))
        .collect::<anyhow::Result<_>>()?;
    if args.mc {
        let mut report = ExperimentReport::new(
            format!("gadget --n {sizes:?} --alpha {alphas:?} --mc --seed {seed}"),
            &["n", "alpha", "t", "scaled_return_probability"],
        );
        for &n in &sizes {
            for &alpha in &alphas {
                let spec = GadgetSpec::new(n, alpha)?;
                let window = renewal_window_times(n);
                let profile = sensitivity::return_probability_profile(
                    spec,
                    &window,
                    sensitivity::ProfileMode::MonteCarlo {
                        replicas: args.replicas,
                        seed,
                    },
                )?;
                for (t, p) in profile {
                    report.push_row(vec![
                        n.to_string(),
                        fmt_f64(alpha),
                        t.to_string(),
                        fmt_f64(p * n as f64),
                    ]);
                }
            }
        }
        return Ok(report);
    }
    // Exact thresholds are the default.
    let experiment = sensitivity::sensitivity_experiment(&sizes, &alphas, 0.25, 20_000_000)?;
    let mut report = ExperimentReport::new(
        format!("gadget --n {sizes:?} --alpha {alphas:?} --exact"),
        &["n", "alpha", "t_mix", "t_unif", "fitted_exponent"],
    );
    for row in &experiment.rows {
        let exponent = experiment
            .fitted
            .iter()
            .find(|(a, _)| *a == row.alpha)
            .map(|(_, e)| *e)
            .unwrap_or(f64::NAN);
        report.push_row(vec![
            row.n.to_string(),
            fmt_f64(row.alpha),
            row.thresholds.t_mix.steps().unwrap_or(0).to_string(),
            row.thresholds.t_unif.steps().unwrap_or(0).to_string(),
            fmt_f64(exponent),
        ]);
    }
    let ordered = experiment
        .rows
        .iter()
        .all(|r| r.thresholds.t_mix.steps() <= r.thresholds.t_unif.steps());
    report.audits.push(AuditVerdict {
        bound: "t_mix <= t_unif at every grid point".into(),
        checked: experiment.rows.len(),
        violations: usize::from(!ordered),
        first_violation: None,
    });
    Ok(report)
}

/// Log-spaced times across `[n^{3/2}, 10 n^{3/2}]`.
fn renewal_window_times(n: usize) -> Vec<u64> {
    let lo = (n as f64).powf(1.5);
    let hi = 10.0 * lo;
    let mut times = vec![lo as u64];
    let mut t = lo;
    while t < hi {
        t = (t * 1.25).ceil();
        times.push((t as u64).min(hi as u64));
    }
    times.dedup();
    times
}

fn cmd_dioph(args: &DiophArgs) -> anyhow::Result<ExperimentReport> {
    let xi = parse_alpha(&args.xi)?;
    let gap = sensitivity::sequence_gap(xi, args.n)?;
    let cf = sensitivity::cf_expand(xi, 12)?;
    let mut report = ExperimentReport::new(
        format!("dioph --xi {xi} --n {}", args.n),
        &["xi", "n", "gap", "max_interval_count", "cf_prefix"],
    );
    let cf_prefix = cf.coefficients[1..]
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    report.push_row(vec![
        fmt_f64(xi),
        args.n.to_string(),
        fmt_f64(gap.gap),
        gap.max_interval_count.to_string(),
        cf_prefix,
    ]);
    if args.xi.eq_ignore_ascii_case("golden") {
        // Partial quotients all 1: gap within 2/n, occupancy within 3.
        report.audits.push(AuditVerdict {
            bound: "orbit gap within 2/n and window occupancy within B + 2".into(),
            checked: 2,
            violations: usize::from(gap.gap > 2.0 / args.n as f64)
                + usize::from(gap.max_interval_count > 3),
            first_violation: None,
        });
    }
    Ok(report)
}

fn cmd_audit_all(seed: u64) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        format!("audit-all --seed {seed}"),
        &["graph", "bound", "checked", "violations"],
    );
    let mut verdicts: Vec<(String, AuditVerdict)> = Vec::new();

    // Exact structural audits, simple walk.
    for entry in corpus::random_eulerian_small()
        .into_iter()
        .chain(corpus::regular_small())
    {
        let chain = corpus::nonlazy_chain(&entry.graph)?;
        for verdict in hitting::bound_audit(&chain, 300, seed)?.verdicts {
            verdicts.push((entry.name.clone(), verdict));
        }
    }

    // Integral bound dominance and submultiplicativity, lazy walk.
    for entry in corpus::random_eulerian_small() {
        let chain = corpus::lazy_chain(&entry.graph)?;
        for a in [0.25, 0.125] {
            let bound = spectral::gmt_bound(&chain, a)?;
            let measured = mixing::threshold_time(&chain, Metric::LInf, a)?
                .steps()
                .expect("small corpus chains mix within the cap");
            verdicts.push((
                entry.name.clone(),
                AuditVerdict {
                    bound: format!("integral bound dominates t_unif({a})"),
                    checked: 1,
                    violations: usize::from(bound.bound_steps < measured),
                    first_violation: None,
                },
            ));
        }
        let mut violations = 0;
        let mut state = seed;
        for _ in 0..20 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let s = state >> 33 & 63;
            let t = state >> 40 & 63;
            if !mixing::submultiplicativity_audit(&chain, s, t)?.holds {
                violations += 1;
            }
        }
        verdicts.push((
            entry.name.clone(),
            AuditVerdict {
                bound: "dinf(s+t) within dinf(s) l1(t)".into(),
                checked: 20,
                violations,
                first_violation: None,
            },
        ));
    }

    // Cover-time bound, simple walk, Monte Carlo.
    for entry in corpus::random_eulerian_small()
        .into_iter()
        .chain(corpus::regular_small())
    {
        let chain = corpus::nonlazy_chain(&entry.graph)?;
        let est = hitting::cover_time(&chain, 0, 1000, seed)?;
        let g = &entry.graph;
        let bound =
            16.0 * (g.edge_count() * g.vertex_count() as u64) as f64 / g.min_degree() as f64;
        verdicts.push((
            entry.name.clone(),
            AuditVerdict {
                bound: "cover within 16 m n / d_min".into(),
                checked: 1,
                violations: usize::from(est.mean > bound + 3.0 * est.stderr),
                first_violation: None,
            },
        ));
    }

    // Visit-count bound on regular graphs.
    for entry in corpus::regular_small() {
        let chain = corpus::nonlazy_chain(&entry.graph)?;
        let n = entry.graph.vertex_count() as u64;
        let t = 10 * n * n;
        let est = hitting::visit_count(&chain, 0, t, 1000, seed)?;
        let bound = 8.0 * (t as f64).sqrt();
        verdicts.push((
            entry.name.clone(),
            AuditVerdict {
                bound: "visits within 8 sqrt(t)".into(),
                checked: 1,
                violations: usize::from(est.mean > bound + 3.0 * est.stderr),
                first_violation: None,
            },
        ));
    }

    // Exploration bounds with phase audits.
    for entry in corpus::regular_medium().into_iter().take(2) {
        let chain = corpus::nonlazy_chain(&entry.graph)?;
        let n = entry.graph.vertex_count();
        let ks: Vec<usize> = [1usize, 2, 4, 8, 16, 32, 64]
            .into_iter()
            .filter(|&k| k <= n)
            .collect();
        let audit = explore::exploration_audit(&chain, &ks, 1000, seed)?;
        verdicts.push((
            entry.name.clone(),
            AuditVerdict {
                bound: "exploration within 512 k^2".into(),
                checked: audit.rows.len(),
                violations: audit.violations,
                first_violation: None,
            },
        ));
    }

    // Orbit gap at the golden rotation.
    let gap = sensitivity::sequence_gap(sensitivity::golden_ratio_conjugate(), 100_000)?;
    verdicts.push((
        "golden-orbit".into(),
        AuditVerdict {
            bound: "orbit gap within 2/n and window occupancy within B + 2".into(),
            checked: 2,
            violations: usize::from(gap.gap > 2.0 / 100_000.0)
                + usize::from(gap.max_interval_count > 3),
            first_violation: None,
        },
    ));

    for (name, verdict) in verdicts {
        report.push_row(vec![
            name,
            verdict.bound.clone(),
            verdict.checked.to_string(),
            verdict.violations.to_string(),
        ]);
        report.audits.push(verdict);
    }
    Ok(report)
}
