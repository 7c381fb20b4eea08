mod csv;
mod gamefile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use limtraj::absorbing::{discounted_value, AbsorbingModel, StationaryPair};
use limtraj::matgame::MixedAction;
use limtraj::scenarios::{
    build, compact_lotp_exhibit, run, scenario_curves, strong_lotp_probe, CurveTable, RunConfig,
    Scenario, ScenarioGame, ScenarioName, DEFAULT_GRID, DEFAULT_LAMBDAS, DEFAULT_SEED,
};
use limtraj::stochgame::{
    occupation_profile, payoff_trajectory_multi, shapley_value, StationaryProfile, StochasticGame,
};
use limtraj::trajectory::{
    closed_form_q, fit_gamma, occupation_trajectory, payoff_trajectory, uniform_grid, DEFAULT_MASS_TOL,
};
use limtraj::MixedAction64;

use gamefile::{Game, GameFile};

#[derive(Parser)]
#[command(name = "limtraj", version, about = "Discounted values and limit trajectories of zero-sum absorbing and stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discounted value and optimal stationary strategies.
    Value {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_lambda)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Also write the loaded game as a game file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Cumulated payoff and occupation curves as CSV.
    Trajectory {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_lambda)]
        lambda: f64,
        /// Player one's weights; `;` separates states of a stochastic game.
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Initial state of a stochastic game.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Runs the claims of a built-in scenario.
    Scenario {
        #[arg(long)]
        name: String,
        #[arg(long, value_delimiter = ',', value_parser = parse_lambda)]
        lambdas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Samples ε-optimal pairs and measures how far l_λ strays from t·v.
    Probe {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_lambda)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Largest deviation that passes.
        #[arg(long, default_value_t = 0.1)]
        bound: f64,
    },
    /// Lists the built-in scenarios.
    List,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Game file (TOML).
    #[arg(long)]
    game: Option<PathBuf>,
    /// Built-in scenario game.
    #[arg(long)]
    name: Option<String>,
}

enum Failure {
    Usage(String),
    Check,
}

type Outcome = Result<(), Failure>;

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let l: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if l > 0.0 && l <= 1.0 {
        Ok(l)
    } else {
        Err(format!("discount factor {s} is outside (0, 1]"))
    }
}

fn load(source: &Source) -> Result<(ScenarioGame, Option<Scenario>), Failure> {
    if let Some(path) = &source.game {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let file = GameFile::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let game = file.into_game().map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok((
            match game {
                Game::Absorbing(g) => ScenarioGame::Absorbing(g),
                Game::Stochastic(g) => ScenarioGame::Stochastic(g),
            },
            None,
        ));
    }
    let name: ScenarioName = source.name.as_deref().unwrap_or_default().parse()?;
    let s = build(name)?;
    Ok((s.game.clone(), Some(s)))
}

fn as_absorbing(game: &ScenarioGame) -> Option<&dyn AbsorbingModel<f64>> {
    match game {
        ScenarioGame::Absorbing(g) => Some(g),
        ScenarioGame::Compact(g) => Some(g),
        ScenarioGame::Stochastic(_) => None,
    }
}

fn dump(game: &ScenarioGame, path: &Path) -> Outcome {
    let file = match game {
        ScenarioGame::Absorbing(g) => GameFile::from_absorbing(g),
        ScenarioGame::Compact(g) => GameFile::from_absorbing(&g.to_dense()?),
        ScenarioGame::Stochastic(g) => GameFile::from_stochastic(g),
    };
    fs::write(path, file.to_toml())?;
    Ok(())
}

fn parse_strategy(text: &str, len: usize) -> Result<MixedAction64, Failure> {
    let weights = text
        .split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("weight `{w}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if weights.len() != len {
        return Err(Failure::Usage(format!("strategy `{text}` has {} weights, expected {len}", weights.len())));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Failure::Usage(format!("strategy `{text}` sums to {sum}, not 1")));
    }
    Ok(MixedAction::normalized(weights)?)
}

fn parse_profile(text: &str, game: &StochasticGame<f64>, rows: bool) -> Result<Vec<MixedAction64>, Failure> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != game.num_states() {
        return Err(Failure::Usage(format!("expected {} `;`-separated strategies", game.num_states())));
    }
    parts
        .iter()
        .enumerate()
        .map(|(w, p)| {
            let (r, c) = game.actions(w);
            parse_strategy(p, if rows { r } else { c })
        })
        .collect()
}

fn fmt_strategy(x: &MixedAction64) -> String {
    x.weights().iter().map(|w| format!("{w:.12}")).collect::<Vec<_>>().join(",")
}

fn cmd_value(source: &Source, lambda: f64, tol: f64, dump_to: Option<&Path>) -> Outcome {
    let (game, _) = load(source)?;
    if let Some(p) = dump_to {
        dump(&game, p)?;
    }
    println!("lambda {lambda:e}");
    match &game {
        ScenarioGame::Stochastic(g) => {
            let sol = shapley_value(g, lambda, tol)?;
            for (w, name) in g.names().iter().enumerate() {
                println!(
                    "state {name} value {:.12} x {} y {}",
                    sol.values[w],
                    fmt_strategy(&sol.profile.x[w]),
                    fmt_strategy(&sol.profile.y[w])
                );
            }
            println!("error_bound {:.3e}", sol.error_bound);
        }
        _ => {
            let sol = discounted_value(as_absorbing(&game).unwrap(), lambda, tol)?;
            println!("value {:.12}", sol.value);
            println!("x {}", fmt_strategy(&sol.x_opt));
            println!("y {}", fmt_strategy(&sol.y_opt));
            println!("error_bound {:.3e}", sol.error_bound);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_trajectory(
    source: &Source,
    lambda: f64,
    x: Option<&str>,
    y: Option<&str>,
    start: Option<&str>,
    grid: usize,
    out: &Path,
    dump_to: Option<&Path>,
) -> Outcome {
    let (game, _) = load(source)?;
    if let Some(p) = dump_to {
        dump(&game, p)?;
    }
    let mut table = CurveTable::new(uniform_grid(grid)?);
    match &game {
        ScenarioGame::Stochastic(g) => {
            let start = match start {
                Some(s) => g.state_index(s)?,
                None => 0,
            };
            let sol = shapley_value(g, lambda, 1e-12)?;
            let xs = match x {
                Some(t) => parse_profile(t, g, true)?,
                None => sol.profile.x.clone(),
            };
            let ys = match y {
                Some(t) => parse_profile(t, g, false)?,
                None => sol.profile.y.clone(),
            };
            let profile = StationaryProfile::new(g, xs, ys)?;
            let l = payoff_trajectory_multi(g, lambda, &profile, start, DEFAULT_MASS_TOL)?;
            let occ = occupation_profile(g, lambda, &profile, start, DEFAULT_MASS_TOL)?;
            table.push("l", |t| l.at(t));
            for (w, name) in g.names().iter().enumerate() {
                let c = occ.component(w);
                table.push(&format!("Q_{name}"), |t| c.at(t));
            }
            println!("start {}", g.names()[start]);
            println!("value {:.12}", sol.values[start]);
        }
        _ => {
            if start.is_some() {
                return Err(Failure::Usage("--start applies to stochastic games only".into()));
            }
            let g = as_absorbing(&game).unwrap();
            let (n, m) = g.actions();
            let sol = discounted_value(g, lambda, 1e-12)?;
            let pair = StationaryPair::new(
                match x {
                    Some(t) => parse_strategy(t, n)?,
                    None => sol.x_opt.clone(),
                },
                match y {
                    Some(t) => parse_strategy(t, m)?,
                    None => sol.y_opt.clone(),
                },
            );
            let l = payoff_trajectory(g, lambda, &pair, DEFAULT_MASS_TOL)?;
            let q = occupation_trajectory(g, lambda, &pair, DEFAULT_MASS_TOL)?;
            let gamma = fit_gamma(&q);
            let v = sol.value;
            table.push("l", |t| l.at(t));
            table.push("Q", |t| q.at(t));
            table.push("Q_closed", |t| closed_form_q(gamma, t).unwrap_or(f64::NAN));
            table.push("l_linear", |t| t * v);
            println!("value {v:.12}");
            println!("gamma {gamma}");
        }
    }
    fs::write(out, csv::render(&table))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_scenario(name: &str, lambdas: &[f64], out: Option<&Path>, grid: usize, seed: u64) -> Outcome {
    let scenario = build(name.parse()?)?;
    let lambdas = if lambdas.is_empty() { DEFAULT_LAMBDAS.to_vec() } else { lambdas.to_vec() };
    let report = run(&scenario, &lambdas, &RunConfig { grid, seed })?;
    print!("{report}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let stem = scenario.name.to_string().replace(':', "_");
        fs::write(dir.join(format!("{stem}_report.txt")), report.to_string())?;
        let mut sorted = lambdas.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sorted.dedup();
        for l in sorted {
            let table = scenario_curves(&scenario, l, grid)?;
            fs::write(dir.join(format!("{stem}_lambda_{l:e}.csv")), csv::render(&table))?;
        }
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_probe(source: &Source, lambda: f64, eps: f64, trials: usize, seed: u64, grid: usize, bound: f64) -> Outcome {
    let (game, scenario) = load(source)?;
    if let (ScenarioGame::Compact(_), Some(s)) = (&game, &scenario) {
        let e = compact_lotp_exhibit(s, lambda, grid)?;
        println!("exhibit rounded pair of the compact-action game");
        println!("lambda {lambda:e}");
        println!("value {:.12}", e.value);
        println!("eps1 {:.6e} eps2 {:.6e}", e.eps1, e.eps2);
        println!("deviation {:.6}", e.deviation);
        println!("expected divergence: deviation stays at least 0.2");
        return if e.deviation >= 0.2 { Ok(()) } else { Err(Failure::Check) };
    }
    let g = as_absorbing(&game).ok_or_else(|| Failure::Usage("the probe needs an absorbing game".into()))?;
    let r = strong_lotp_probe(g, lambda, eps, trials, seed, grid)?;
    println!("lambda {lambda:e}");
    println!("eps {eps:e}");
    println!("seed {seed}");
    println!("value {:.12}", r.value);
    println!("accepted {} of {} (rate {:.3})", r.accepted, r.attempted, r.acceptance_rate);
    println!("max_deviation {:.6e}", r.max_deviation);
    println!("note sampled evidence over the ε-optimal set, not a proof");
    if r.insufficient {
        println!("verdict insufficient sample");
        return Err(Failure::Check);
    }
    let pass = r.max_deviation <= bound;
    println!("verdict {}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_list() -> Outcome {
    for n in ScenarioName::ALL {
        println!("{:<18} {}", n.to_string(), n.summary());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Value { source, lambda, tol, dump } => cmd_value(source, *lambda, *tol, dump.as_deref()),
        Command::Trajectory { source, lambda, x, y, start, grid, out, dump } => cmd_trajectory(
            source,
            *lambda,
            x.as_deref(),
            y.as_deref(),
            start.as_deref(),
            *grid,
            out,
            dump.as_deref(),
        ),
        Command::Scenario { name, lambdas, out, grid, seed } => {
            cmd_scenario(name, lambdas, out.as_deref(), *grid, *seed)
        }
        Command::Probe { source, lambda, eps, trials, seed, grid, bound } => {
            cmd_probe(source, *lambda, *eps, *trials, *seed, *grid, *bound)
        }
        Command::List => cmd_list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
