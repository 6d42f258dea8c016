use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use voteops_core::experiment::{
    predict_for_config, run_concentration, run_sweep, run_zero_inf_table, solve_behavior,
    ExperimentError, SweepConfig, SweepRule,
};
use voteops_core::gsr::{parse_profile, rule_by_name, GammaMajorityRule, RULE_NAMES};
use voteops_core::vo_solver::{VoError, PREORDER_ENUM_MAX};
use voteops_core::{
    Alternative, Alternatives, Behavior, BigRational, GsRule, GsrError, Method, SolveOptions,
    VoValue, VoteDistribution, VoteOpsError,
};

mod config;
mod output;

#[derive(Parser)]
#[command(name = "voteops", version, about = "Vote-operation solver and scaling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run a Monte Carlo scaling sweep.
    Sweep(SweepArgs),
    /// Fractions of trials whose solution is 0 or infinite.
    Table(TableArgs),
    /// Fraction of sampled profiles inside the concentration set.
    Concentration(ConcentrationArgs),
    /// List the rules available for `m` alternatives.
    Rules {
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Predict how the solution scales with n.
    Predict(PredictArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Preorder,
    Bfs,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Preorder => Method::PreorderEnum,
            MethodArg::Bfs => Method::BruteForceBfs,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    rule: String,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_parser = parse_behavior)]
    behavior: Behavior,
    /// Label of the target alternative.
    #[arg(long)]
    target: Option<String>,
    /// Pool distribution for CAV (default uniform).
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Bound on the number of operations the BFS explores.
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with sweep parameters; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long, value_parser = parse_behavior)]
    behavior: Option<Behavior>,
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated profile sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot script for the summary.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated rule names (default: every rule small enough to enumerate).
    #[arg(long, value_delimiter = ',')]
    rule: Option<Vec<String>>,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_behavior,
          default_value = "uco-c,uco-d,bribery-c,bribery-d,mov")]
    behavior: Vec<Behavior>,
    #[arg(long, default_value = "a")]
    target: String,
    #[arg(long, default_value_t = 1001)]
    n: u64,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the table as CSV into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConcentrationArgs {
    #[arg(long)]
    rule: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    dist: Option<PathBuf>,
    /// `β`, an integer or fraction such as `5` or `7/2`.
    #[arg(long)]
    beta: String,
    #[arg(long, value_delimiter = ',', default_value = "100,400,1600,6400")]
    n: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    rule: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long, value_parser = parse_behavior)]
    behavior: Behavior,
    #[arg(long)]
    target: Option<String>,
}

fn parse_behavior(s: &str) -> Result<Behavior, String> {
    s.parse()
}

/// How a command failed, which decides the exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Refused(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Refused(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Refused(m) | Failure::Other(m) => m,
        }
    }
}

impl From<GsrError> for Failure {
    fn from(e: GsrError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VoteOpsError> for Failure {
    fn from(e: VoteOpsError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VoError> for Failure {
    fn from(e: VoError) -> Self {
        match e {
            VoError::TooLarge { .. } | VoError::NoCap => Failure::Refused(e.to_string()),
            VoError::Overflow => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Vo(v) => v.into(),
            ExperimentError::Ops(o) => o.into(),
            ExperimentError::Gsr(g) => g.into(),
            ExperimentError::Pool(m) => Failure::Other(m),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_rule(name: &str, m: usize) -> Result<GsRule, Failure> {
    Ok(rule_by_name(name, m)?)
}

fn load_dist(path: Option<&Path>, alternatives: &Alternatives) -> Result<VoteDistribution, Failure> {
    match path {
        None => Ok(VoteDistribution::uniform(alternatives.clone())),
        Some(p) => VoteDistribution::from_json(&read(p)?, alternatives.clone())
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
    }
}

fn find_target(alternatives: &Alternatives, label: Option<&str>) -> Result<Option<Alternative>, Failure> {
    label
        .map(|l| {
            alternatives
                .find(l)
                .ok_or_else(|| Failure::Usage(format!("unknown alternative `{l}`")))
        })
        .transpose()
}

fn solve(args: SolveArgs) -> Outcome {
    let profile = parse_profile(&read(&args.profile)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.profile.display())))?;
    let rule = load_rule(&args.rule, profile.m())?;
    // the rule uses letter labels; match the profile's by position
    let alts = profile.alternatives();
    let target = find_target(alts, args.target.as_deref())?;
    let pool = load_dist(args.dist.as_deref(), rule.alternatives())?;
    let opts = SolveOptions {
        bfs_cap: args.cap.or(SolveOptions::default().bfs_cap),
        ..SolveOptions::default()
    };
    let out = solve_behavior(
        &rule,
        args.behavior,
        &profile,
        &pool,
        target,
        args.method.into(),
        &opts,
    )?;
    match (&out.value, &out.best) {
        (VoValue::Finite(k), Some((ops, goal, sol))) => {
            let w = sol.witness.as_deref().unwrap_or_default();
            let list: Vec<String> = w.iter().map(u64::to_string).collect();
            println!("value={k} witness=[{}]", list.join(","));
            if let Some(c) = goal.target() {
                println!("target={}", alts.label(c));
            }
            for (t, &x) in w.iter().enumerate() {
                if x > 0 {
                    println!("  {x} x {}", ops.labels()[t]);
                }
            }
        }
        (v, _) => println!("value={v}"),
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Outcome {
    let file = match &args.config {
        Some(p) => config::SweepFile::parse(&read(p)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => config::SweepFile::default(),
    };
    let base = args
        .config
        .as_deref()
        .and_then(Path::parent)
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let need = |what: &str| Failure::Usage(format!("sweep needs `{what}` (flag or config field)"));
    let rule_name = args.rule.or(file.rule).ok_or_else(|| need("rule"))?;
    let behavior = args.behavior.or(file.behavior).ok_or_else(|| need("behavior"))?;
    let n_values = args.n.or(file.n_values).ok_or_else(|| need("n_values"))?;
    let trials = args.trials.or(file.trials).ok_or_else(|| need("trials"))?;
    let rule = match rule_name.strip_prefix("gamma-majority:") {
        Some(g) => SweepRule::GammaMajority(GammaMajorityRule::parse(g)?),
        None => {
            let m = args.m.or(file.m).ok_or_else(|| need("m"))?;
            SweepRule::Gsr(load_rule(&rule_name, m)?)
        }
    };
    let alts = Alternatives::new(rule.m())?;
    let dist_path = args.dist.or(file.dist.map(|d| base.join(d)));
    let pi = match (&dist_path, &file.pi) {
        (Some(p), _) => load_dist(Some(p), &alts)?,
        (None, Some(inline)) => VoteDistribution::from_json(&inline.to_string(), alts.clone())?,
        (None, None) => VoteDistribution::uniform(alts.clone()),
    };
    let pi_prime = file
        .pool_dist
        .map(|p| load_dist(Some(&base.join(p)), &alts))
        .transpose()?;
    let mut cfg = SweepConfig::new(rule, behavior, pi, n_values, trials, args.seed);
    cfg.pi_prime = pi_prime;
    cfg.target = find_target(&alts, args.target.or(file.target).as_deref())?;
    if let Some(m) = args.method.map(Method::from).or(file.method.map(Method::from)) {
        cfg.method = m;
    }
    if let Some(cap) = args.cap.or(file.cap) {
        cfg.solve.bfs_cap = Some(cap);
    }
    if let Some(limit) = file.node_limit {
        cfg.solve.node_limit = limit;
    }
    if let Some(t) = file.thresholds {
        cfg.thresholds = t;
    }
    cfg.jobs = args.jobs.or(file.jobs).unwrap_or(1);
    let out = run_sweep(&cfg)?;
    fs::create_dir_all(&args.out)?;
    output::write_trials(&args.out.join("trials.csv"), &out.trials)?;
    let summary = args.out.join("summary.csv");
    output::write_summary(&summary, &out.report)?;
    fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&out.report).map_err(|e| Failure::Other(e.to_string()))?,
    )?;
    if args.gnuplot {
        fs::write(args.out.join("plot.gp"), output::gnuplot_script(&out.report, "summary.csv"))?;
    }
    output::print_report(&out.report);
    Ok(())
}

fn table(args: TableArgs) -> Outcome {
    let names: Vec<String> = match args.rule {
        Some(r) => r,
        None => RULE_NAMES
            .iter()
            .filter(|n| rule_by_name(n, args.m).is_ok_and(|r| r.k() <= PREORDER_ENUM_MAX))
            .map(|n| n.to_string())
            .collect(),
    };
    let rules = names
        .iter()
        .map(|n| load_rule(n, args.m))
        .collect::<Result<Vec<_>, _>>()?;
    let alts = Alternatives::new(args.m)?;
    let target = find_target(&alts, Some(&args.target))?.expect("given");
    let rows = run_zero_inf_table(
        &rules,
        &args.behavior,
        target,
        args.n,
        args.trials,
        args.seed,
        &SolveOptions::default(),
        args.jobs,
    )?;
    println!("{:<12} {:<10} {:>9} {:>9} {:>9}", "rule", "behavior", "zero", "inf", "unknown");
    for r in &rows {
        println!(
            "{:<12} {:<10} {:>9.4} {:>9.4} {:>9.4}",
            r.rule, r.behavior.to_string(), r.zero_frac, r.inf_frac, r.unknown_frac
        );
    }
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        output::write_rows(&dir.join("table.csv"), &rows)?;
    }
    Ok(())
}

fn concentration(args: ConcentrationArgs) -> Outcome {
    let rule = load_rule(&args.rule, args.m)?;
    let pi = load_dist(args.dist.as_deref(), rule.alternatives())?;
    let beta: BigRational = args
        .beta
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("beta `{}` is not a rational number", args.beta)))?;
    if beta <= BigRational::from_integer(1.into()) {
        return Err(Failure::Usage("beta must exceed 1".into()));
    }
    let report = run_concentration(&rule, &pi, &beta, &args.n, args.trials, args.seed, args.jobs)?;
    println!("beta = {}", report.beta);
    println!("{:>8} {:>9} {:>9}", "n", "fraction", "std_err");
    for p in &report.per_n {
        println!("{:>8} {:>9.4} {:>9.4}", p.n, p.fraction(), p.std_err());
    }
    println!("non-decreasing within 2 sigma: {}", report.non_decreasing_within(2.0));
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        let rows: Vec<output::ConcentrationRow> = report
            .per_n
            .iter()
            .map(|p| output::ConcentrationRow {
                n: p.n,
                inside: p.inside,
                trials: p.trials,
                fraction: p.fraction(),
                std_err: p.std_err(),
            })
            .collect();
        output::write_rows(&dir.join("concentration.csv"), &rows)?;
    }
    Ok(())
}

fn rules(m: usize) -> Outcome {
    println!("{:<17} {:>4}  components", "rule", "K");
    for name in RULE_NAMES {
        match rule_by_name(name, m) {
            Ok(r) => println!("{:<17} {:>4}  {}", name, r.k(), r.component_labels().join(",")),
            Err(GsrError::AlternativeCount { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn predict(args: PredictArgs) -> Outcome {
    let rule = load_rule(&args.rule, args.m)?;
    let pi = load_dist(args.dist.as_deref(), rule.alternatives())?;
    let alts = rule.alternatives().clone();
    let mut cfg = SweepConfig::new(SweepRule::Gsr(rule), args.behavior, pi, vec![1, 2], 1, 0);
    cfg.target = find_target(&alts, args.target.as_deref())?;
    cfg.validate()?;
    let p = predict_for_config(&cfg)?.ok_or_else(|| {
        Failure::Usage(format!("no prediction is available for {}", args.behavior))
    })?;
    println!("category={}", p.category);
    println!("pi-order={}", p.pi_order);
    for c in &p.classes {
        println!("  class {} winner={} {}", c.realized, alts.label(c.winner), c.category);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Table(a) => table(a),
        Command::Concentration(a) => concentration(a),
        Command::Rules { m } => rules(m),
        Command::Predict(a) => predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
