//! `prefplan`: validate models, synthesize improving strategies, rank
//! states, simulate, and emit the built-in scenarios.
//!
//! Exit codes: 0 success, 1 domain failure (invalid model, initial state not
//! winning, bad config), 2 usage or parse failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use prefplan::io;
use prefplan::scenarios::{build_toy_example, Gridworld, GridworldConfig};
use prefplan::synthesis::{composed_strategy, improving_strategy, level_sets, LevelSets, Mode, RankTable};
use prefplan::{build_improvement_mdp, improvement_statistics, Error, ImprovementMdp, Mdp, Objectives, PreferenceModel};

#[derive(Parser)]
#[command(name = "prefplan", version, about = "Opportunistic planning with incomplete preferences in MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The three input files of a planning problem.
#[derive(clap::Args)]
struct Problem {
    /// MDP file (JSON)
    mdp: PathBuf,
    /// Objectives file (JSON)
    objectives: PathBuf,
    /// Preferences file (JSON)
    preferences: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankMode {
    Spi,
    Sasi,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyKind {
    /// Counter-based strategy realising the rank of the start state.
    Composed,
    /// Memoryless strategy for one improvement.
    Memoryless,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    Toy,
    Gridworld,
}

#[derive(Subcommand)]
enum Command {
    /// Check an MDP file and list every violation.
    Validate { mdp: PathBuf },
    /// Synthesize an SPI or SASI strategy and write it as JSON.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "sasi")]
        mode: Mode,
        #[arg(long, default_value = "strategy.json")]
        out: PathBuf,
    },
    /// Compute state ranks and write them as CSV.
    Rank {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum, default_value = "sasi")]
        mode: RankMode,
        #[arg(long, default_value = "ranks.csv")]
        out: PathBuf,
    },
    /// Run seeded simulations and write per-run counts and a summary.
    Simulate {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value = "sasi")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "composed")]
        strategy: StrategyKind,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Steps per run; defaults to ten times the product size.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: Option<u64>,
        #[arg(long, env = "PREFPLAN_SEED", default_value_t = 0)]
        seed: u64,
        /// Start state as `s{i}|m{0|1}`; defaults to the initial state.
        #[arg(long)]
        start: Option<String>,
        /// Directory receiving runs.csv and summary.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the model files of a built-in scenario.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
        /// Gridworld configuration (JSON); defaults to the bundled one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::Io(_) | Error::Format(_) | Error::InvalidProbability(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| fail(1, format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| fail(1, format!("cannot write {}: {e}", path.display())))
}

fn load_mdp(path: &Path) -> CliResult<Mdp> {
    Ok(io::parse_mdp(&read(path)?)?)
}

fn load_problem(p: &Problem) -> CliResult<ImprovementMdp> {
    let mdp = load_mdp(&p.mdp)?;
    mdp.check()?;
    let objectives = io::parse_objectives(&read(&p.objectives)?, mdp.num_states())?;
    let (prefs, warnings) = io::parse_preferences(&read(&p.preferences)?, &objectives.names())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(build_improvement_mdp(&mdp, &objectives, &prefs)?)
}

fn validate(path: &Path) -> CliResult {
    let mdp = load_mdp(path)?;
    let report = mdp.validate();
    if report.is_valid() {
        println!("valid: {} states, {} actions, {} transitions", mdp.num_states(), mdp.num_actions(), mdp.num_transitions());
        return Ok(());
    }
    for v in &report.violations {
        println!("violation: {v}");
    }
    Err(fail(1, format!("{} violation(s)", report.violations.len())))
}

fn print_histogram(levels: &LevelSets, table: &RankTable) {
    let hist = table.histogram();
    println!("{} ranks, states with rank >= k:", table.mode);
    for (k, count) in hist.iter().enumerate() {
        println!("  k={}: {count}", k + 1);
    }
    if hist.is_empty() {
        println!("  (no state has rank >= 1)");
    }
    if !levels.bounded {
        println!("WARNING: {} level sets hit a nonempty fixpoint; some ranks are unbounded", table.mode);
    }
}

fn solve(problem: &Problem, mode: Mode, out: &Path) -> CliResult {
    let imdp = load_problem(problem)?;
    let (region, strategy) = improving_strategy(&imdp, mode);
    let v0 = imdp.initial();
    let winning = region.contains(v0);
    let levels = level_sets(&imdp, mode);
    let file = match composed_strategy(&imdp, &levels) {
        Ok(composed) => io::counter_strategy_file(&imdp, &composed),
        Err(_) => {
            println!("WARNING: ranks unbounded; writing the memoryless strategy");
            io::strategy_file(&imdp, &strategy, mode)
        }
    };
    write(out, &io::strategy_to_json(&file))?;
    let names = imdp.product().action_names();
    let at = |c: usize| {
        file.choices
            .iter()
            .find(|e| e.counter == c && e.state == imdp.state_name(v0))
            .map(|e| e.actions.join(","))
            .unwrap_or_default()
    };
    println!("mode: {mode}");
    println!("product: {} states, {} transitions", imdp.num_states(), imdp.product().num_transitions());
    println!("winning region: {} of {} product states", region.len(), imdp.num_states());
    println!("initial state {} winning: {winning}", imdp.state_name(v0));
    if winning {
        println!("rank of initial state: {}", file.counter_init);
        println!("allowed at {} (counter {}): {{{}}}", imdp.state_name(v0), file.counter_init, at(file.counter_init));
        let first: Vec<&str> = strategy.allowed(v0).iter().map(|&a| names[a].as_str()).collect();
        println!("one-step {mode} strategy at {}: {{{}}}", imdp.state_name(v0), first.join(","));
    }
    println!("strategy written to {}", out.display());
    if winning {
        Ok(())
    } else {
        Err(fail(1, "initial state is outside the winning region"))
    }
}

fn rank(problem: &Problem, mode: RankMode, out: &Path) -> CliResult {
    let imdp = load_problem(problem)?;
    let table = |m: Mode| {
        let levels = level_sets(&imdp, m);
        let table = RankTable::from_levels(&levels);
        print_histogram(&levels, &table);
        println!("  initial state rank: {}", table.get(imdp.base().initial()));
        table
    };
    let csv = match mode {
        RankMode::Sasi => io::rank_csv(&table(Mode::Sasi)),
        RankMode::Spi => io::rank_csv(&table(Mode::Spi)),
        RankMode::Both => io::rank_pair_csv(&table(Mode::Sasi), &table(Mode::Spi))?,
    };
    write(out, &csv)?;
    println!("ranks written to {}", out.display());
    Ok(())
}

struct SimulateArgs<'a> {
    mode: Mode,
    kind: StrategyKind,
    runs: usize,
    horizon: Option<usize>,
    seed: u64,
    start: Option<&'a str>,
    out_dir: &'a Path,
}

fn simulate(problem: &Problem, args: SimulateArgs) -> CliResult {
    let imdp = load_problem(problem)?;
    let start = match args.start {
        Some(name) => imdp
            .parse_state_name(name)
            .ok_or_else(|| fail(2, format!("unknown state `{name}` (expected s<i>|m<0|1>)")))?,
        None => imdp.initial(),
    };
    let horizon = args.horizon.unwrap_or(10 * imdp.num_states());
    let (summary, label) = match args.kind {
        StrategyKind::Memoryless => {
            let (_, strategy) = improving_strategy(&imdp, args.mode);
            (improvement_statistics(&imdp, &strategy, start, args.runs, horizon, args.seed)?, "memoryless")
        }
        StrategyKind::Composed => {
            let composed = composed_strategy(&imdp, &level_sets(&imdp, args.mode))?;
            println!("counter at start: {}", composed.counter_init(start));
            (improvement_statistics(&imdp, &composed, start, args.runs, horizon, args.seed)?, "composed")
        }
    };
    let json = io::summary_to_json(&imdp, &summary, args.mode, label);
    write(&args.out_dir.join("runs.csv"), &io::summary_to_csv(&summary))?;
    write(&args.out_dir.join("summary.json"), &json)?;
    print!("{json}");
    Ok(())
}

fn emit(out_dir: &Path, mdp: &Mdp, objectives: &Objectives, prefs: &PreferenceModel) -> CliResult {
    write(&out_dir.join("mdp.json"), &io::mdp_to_json(mdp))?;
    write(&out_dir.join("objectives.json"), &io::objectives_to_json(objectives))?;
    write(&out_dir.join("preferences.json"), &io::preferences_to_json(prefs, &objectives.names()))?;
    println!("model: {} states, {} transitions", mdp.num_states(), mdp.num_transitions());
    println!("files written to {}", out_dir.display());
    Ok(())
}

fn scenario(name: ScenarioName, config: Option<&Path>, out_dir: &Path) -> CliResult {
    match name {
        ScenarioName::Toy => {
            let (mdp, objectives, prefs) = build_toy_example();
            emit(out_dir, &mdp, &objectives, &prefs)
        }
        ScenarioName::Gridworld => {
            let cfg = match config {
                Some(path) => GridworldConfig::from_json(&read(path)?)?,
                None => GridworldConfig::reference_default(),
            };
            let grid = Gridworld::build(&cfg)?;
            for w in &grid.warnings {
                eprintln!("warning: {w}");
            }
            let mut states = String::from("state,description\n");
            for s in 0..grid.mdp.num_states() {
                states.push_str(&format!("s{s},\"{}\"\n", grid.describe(s)));
            }
            write(&out_dir.join("states.csv"), &states)?;
            emit(out_dir, &grid.mdp, &grid.objectives, &grid.preferences)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { mdp } => validate(&mdp),
        Command::Solve { problem, mode, out } => solve(&problem, mode, &out),
        Command::Rank { problem, mode, out } => rank(&problem, mode, &out),
        Command::Simulate { problem, mode, strategy, runs, horizon, seed, start, out_dir } => simulate(
            &problem,
            SimulateArgs {
                mode,
                kind: strategy,
                runs: runs as usize,
                horizon: horizon.map(|h| h as usize),
                seed,
                start: start.as_deref(),
                out_dir: &out_dir,
            },
        ),
        Command::Scenario { name, config, out_dir } => scenario(name, config.as_deref(), &out_dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
