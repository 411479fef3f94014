//! One function per subcommand. Each returns both renderings; `run` picks one.

use std::collections::BTreeSet;
use std::fmt::Write;

use fqre::dataset::{builtin, catalog_table, list_fixtures, FixtureParams};
use fqre::focality::{hurwicz_focal_set, hurwicz_values, observation_checks, regret_focal_set, regret_profile};
use fqre::game::transform_payoffs;
use fqre::inference::{
    calibrate as fit, cross_player_focality_test, identify_focal, reject_focal_qre_quad, reject_qre_pair,
    CalibrateOptions, DeltaPolicy, StrategyPair,
};
use fqre::io::GameFile;
use fqre::reproduce::{render_table, run_all, run_criterion};
use fqre::solver::{solve_robust, trace_lambda_path};
use fqre::{FocalSpec, Game, ObservedPlay, SolverConfig};
use serde_json::{json, Value};

use crate::output::{align, f3, strategy_set, vector};
use crate::{
    CalibrateArgs, CliError, CliResult, DeltaFlags, FalsifyArgs, FocalArgs, FocalFlags, GameArgs, IdentifyArgs,
    Outcome, Policy, ReproduceArgs, SolveArgs, SolverFlags, ValidateArgs, TOLERANCE_ENV,
};

struct Loaded {
    source: String,
    game: Game,
    observed: Option<ObservedPlay>,
    focal: Option<FocalSpec>,
}

fn load(args: &GameArgs) -> CliResult<Loaded> {
    let loaded = if let Some(name) = &args.source.fixture {
        let params = FixtureParams { t: args.t, c: args.c };
        let fx = builtin(name, &params)?;
        Loaded {
            source: format!("fixture {name}"),
            game: fx.game,
            observed: fx.observed,
            focal: fx.paper_focal,
        }
    } else {
        let path = args.source.file.as_ref().expect("clap requires one source");
        if args.t.is_some() || args.c.is_some() {
            return Err(CliError::Usage("--T and --c only apply to bundled fixtures".into()));
        }
        let file = GameFile::load(path).map_err(|e| match e {
            fqre::Error::Io(io) => CliError::Usage(format!("cannot read `{}`: {io}", path.display())),
            other => CliError::Usage(format!("`{}`: {other}", path.display())),
        })?;
        let focal = file.focal_spec()?;
        Loaded {
            source: path.display().to_string(),
            game: file.game,
            observed: file.observed,
            focal,
        }
    };
    match args.gamma {
        Some(gamma) => Ok(Loaded {
            game: transform_payoffs(&loaded.game, gamma)?,
            ..loaded
        }),
        None => Ok(loaded),
    }
}

fn observed(loaded: &Loaded) -> CliResult<&ObservedPlay> {
    loaded
        .observed
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("{} has no observed frequencies", loaded.source)))
}

/// Focal sets from the flags, falling back to the source's own sets and then to empty sets.
fn focal_sets(game: &Game, flags: &FocalFlags, stored: Option<&FocalSpec>) -> CliResult<Vec<BTreeSet<usize>>> {
    let n = game.num_players();
    let mut sets = match stored {
        Some(spec) => spec.sets().to_vec(),
        None => vec![BTreeSet::new(); n],
    };
    for (player, flag) in [(0, &flags.focal_row), (1, &flags.focal_col)] {
        let Some(flag) = flag else { continue };
        if n != 2 {
            return Err(CliError::Usage("--focal-row and --focal-col need a two-player game".into()));
        }
        sets[player] = match flag.trim() {
            "regret" => regret_focal_set(game, player, flags.beta)?,
            "hurwicz" => hurwicz_focal_set(game, player, flags.alpha)?,
            labels => labels
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| {
                    game.strategy_index(player, l).ok_or_else(|| {
                        CliError::Usage(format!("player {} has no strategy `{l}`", game.players()[player]))
                    })
                })
                .collect::<CliResult<_>>()?,
        };
    }
    Ok(sets)
}

fn deltas(game: &Game, flags: &DeltaFlags, stored: Option<&FocalSpec>) -> CliResult<Vec<f64>> {
    let n = game.num_players();
    let mut deltas = match stored {
        Some(spec) => spec.deltas().to_vec(),
        None => vec![0.0; n],
    };
    if let Some(d) = flags.delta {
        deltas = vec![d; n];
    }
    for (player, flag) in [(0, flags.delta_row), (1, flags.delta_col)] {
        if let Some(d) = flag {
            if n != 2 {
                return Err(CliError::Usage("--delta-row and --delta-col need a two-player game".into()));
            }
            deltas[player] = d;
        }
    }
    Ok(deltas)
}

fn solver_config(flags: &SolverFlags, lambda: f64, tolerance_env: Option<&str>) -> CliResult<SolverConfig> {
    let mut config = SolverConfig::with_lambda(lambda);
    if let Some(text) = tolerance_env {
        config.tolerance = text
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{TOLERANCE_ENV}=`{text}` is not a number")))?;
    }
    if let Some(t) = flags.tolerance {
        config.tolerance = t;
    }
    if let Some(d) = flags.damping {
        config.damping = d;
    }
    if let Some(s) = flags.steps {
        config.homotopy_steps = s;
    }
    config.check()?;
    Ok(config)
}

fn spec_for(loaded: &Loaded, focal: &FocalFlags, delta: &DeltaFlags) -> CliResult<FocalSpec> {
    let sets = focal_sets(&loaded.game, focal, loaded.focal.as_ref())?;
    let deltas = deltas(&loaded.game, delta, loaded.focal.as_ref())?;
    Ok(FocalSpec::new(sets, deltas)?)
}

fn header(loaded: &Loaded) -> String {
    format!("game {} ({})\n", loaded.game.name(), loaded.source)
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub(crate) fn solve(args: &SolveArgs, tolerance_env: Option<&str>) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let spec = spec_for(&loaded, &args.focal, &args.delta)?;
    let config = solver_config(&args.solver, args.lambda, tolerance_env)?;
    let eq = solve_robust(&loaded.game, &spec, &config)?;
    let game = &loaded.game;

    let json = json!({
        "command": "solve",
        "game": game.name(),
        "source": loaded.source,
        "lambda": args.lambda,
        "players": game.players(),
        "strategies": game.all_strategies(),
        "focal": spec.labels(game),
        "delta": spec.deltas(),
        "profile": eq.profile,
        "residual": eq.residual,
        "iterations": eq.iterations,
        "converged": eq.converged,
    });

    let mut rows = vec![vec!["player".into(), "strategy".into(), "probability".into(), "focal".into()]];
    for i in 0..game.num_players() {
        for (s, label) in game.strategies(i).iter().enumerate() {
            rows.push(vec![
                game.players()[i].clone(),
                label.clone(),
                f3(eq.profile.player(i)[s]),
                if spec.is_focal(i, s) { format!("yes (delta {})", f3(spec.delta(i))) } else { String::new() },
            ]);
        }
    }
    let mut table = header(&loaded);
    let _ = writeln!(table, "lambda {}", f3(args.lambda));
    table.push_str(&align(&rows));
    let _ = writeln!(
        table,
        "residual {}, iterations {}, {}",
        sci(eq.residual),
        eq.iterations,
        if eq.converged { "converged" } else { "NOT converged" }
    );
    Ok(Outcome {
        json,
        table,
        feasible: eq.converged,
    })
}

pub(crate) fn trace(args: &SolveArgs, tolerance_env: Option<&str>) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let spec = spec_for(&loaded, &args.focal, &args.delta)?;
    let config = solver_config(&args.solver, args.lambda, tolerance_env)?;
    let path = trace_lambda_path(&loaded.game, &spec, args.lambda, &config)?;
    let game = &loaded.game;

    let points: Vec<Value> = path
        .iter()
        .map(|p| {
            json!({
                "lambda": p.lambda,
                "profile": p.profile,
                "residual": p.residual,
                "iterations": p.iterations,
                "converged": p.converged,
            })
        })
        .collect();
    let json = json!({
        "command": "trace",
        "game": game.name(),
        "source": loaded.source,
        "lambda_max": args.lambda,
        "players": game.players(),
        "strategies": game.all_strategies(),
        "focal": spec.labels(game),
        "delta": spec.deltas(),
        "points": points,
    });

    let mut head = vec!["lambda".to_string()];
    head.extend(game.players().iter().cloned());
    head.push("converged".into());
    let mut rows = vec![head];
    for p in &path {
        let mut row = vec![f3(p.lambda)];
        row.extend(p.profile.vectors().iter().map(|v| vector(v)));
        row.push(if p.converged { "yes" } else { "NO" }.into());
        rows.push(row);
    }
    let mut table = header(&loaded);
    table.push_str(&align(&rows));
    Ok(Outcome {
        json,
        table,
        feasible: path.iter().all(|p| p.converged),
    })
}

pub(crate) fn focal(args: &FocalArgs) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let game = &loaded.game;
    let mut players = Vec::new();
    let mut table = header(&loaded);
    for i in 0..game.num_players() {
        let labels = game.strategies(i);
        let regrets = regret_profile(game, i)?;
        let regret_set: Vec<usize> = regret_focal_set(game, i, args.beta)?.into_iter().collect();
        let hurwicz = match args.alpha {
            Some(alpha) => Some((hurwicz_values(game, i, alpha)?, hurwicz_focal_set(game, i, alpha)?)),
            None => None,
        };
        let report = observation_checks(game, i)?;

        players.push(json!({
            "player": game.players()[i],
            "strategies": labels,
            "regrets": regrets.regrets,
            "mean_regret": regrets.mean,
            "regret_focal": regret_set.iter().map(|&s| &labels[s]).collect::<Vec<_>>(),
            "hurwicz": hurwicz.as_ref().map(|(values, set)| json!({
                "alpha": args.alpha,
                "values": values,
                "focal": set.iter().map(|&s| &labels[s]).collect::<Vec<_>>(),
            })),
            "observations": report,
        }));

        let _ = writeln!(table, "\nplayer {}", game.players()[i]);
        let _ = writeln!(
            table,
            "regret-averse focal set (beta {}): {}",
            f3(args.beta),
            strategy_set(labels, &regret_set)
        );
        let _ = writeln!(table, "mean regret {}", f3(regrets.mean));
        if let Some((_, set)) = &hurwicz {
            let set: Vec<usize> = set.iter().copied().collect();
            let _ = writeln!(
                table,
                "Hurwicz focal set (alpha {}): {}",
                f3(args.alpha.unwrap_or_default()),
                strategy_set(labels, &set)
            );
        }
        let mut head = vec!["strategy".to_string(), "max regret".into(), "focal".into()];
        if hurwicz.is_some() {
            head.push("hurwicz".into());
        }
        head.push("conditions".into());
        let mut rows = vec![head];
        for (s, obs) in report.strategies.iter().enumerate() {
            let mut row = vec![
                labels[s].clone(),
                f3(regrets.regrets[s]),
                if regret_set.contains(&s) { "yes" } else { "" }.into(),
            ];
            if let Some((values, _)) = &hurwicz {
                row.push(f3(values[s]));
            }
            let flags: Vec<&str> = [
                (obs.weakly_dominant, "weakly-dominant"),
                (obs.dominates_focal, "dominates-focal"),
                (obs.highest_payoff, "highest-payoff"),
                (obs.lowest_payoff_excluded, "lowest-payoff-excluded"),
                (obs.secure_minimum, "secure-minimum"),
                (obs.pointwise_high, "pointwise-high"),
                (obs.average_payoff == Some(true), "average-payoff"),
            ]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
            row.push(flags.join(" "));
            rows.push(row);
        }
        table.push_str(&align(&rows));
    }
    let json = json!({
        "command": "focal",
        "game": game.name(),
        "source": loaded.source,
        "beta": args.beta,
        "players": players,
    });
    Ok(Outcome {
        json,
        table,
        feasible: true,
    })
}

pub(crate) fn calibrate(args: &CalibrateArgs, tolerance_env: Option<&str>) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let game = &loaded.game;
    let obs = observed(&loaded)?;
    let sets = focal_sets(game, &args.focal, loaded.focal.as_ref())?;
    let shape = FocalSpec::new(sets, vec![0.0; game.num_players()])?;
    let options = CalibrateOptions {
        policy: match args.policy {
            Policy::Zero => DeltaPolicy::Zero,
            Policy::Shared => DeltaPolicy::Shared,
            Policy::PerPlayer => DeltaPolicy::PerPlayer,
        },
        solver: solver_config(&args.solver, 1.0, tolerance_env)?,
        ..CalibrateOptions::default()
    };
    let result = fit(game, obs, &shape, &options)?;

    let json = json!({
        "command": "calibrate",
        "game": game.name(),
        "source": loaded.source,
        "players": game.players(),
        "strategies": game.all_strategies(),
        "focal": shape.labels(game),
        "observed": obs.frequencies(),
        "result": result,
    });

    let mut table = header(&loaded);
    let focal: Vec<String> = (0..game.num_players())
        .map(|i| {
            let members: Vec<usize> = shape.set(i).iter().copied().collect();
            format!("{} {}", game.players()[i], strategy_set(game.strategies(i), &members))
        })
        .collect();
    let _ = writeln!(table, "focal sets: {}", focal.join(", "));
    let _ = writeln!(table, "lambda {}", f3(result.lambda));
    let deltas: Vec<String> = result.deltas.iter().map(|&d| f3(d)).collect();
    let _ = writeln!(table, "delta {}", deltas.join(" "));
    let _ = writeln!(
        table,
        "{} equations, {} unknowns, log-odds residual {}",
        result.equations,
        result.unknowns,
        sci(result.log_odds_residual)
    );
    if let Some(forward) = &result.forward {
        let mut rows = vec![vec!["player".to_string(), "observed".into(), "forward".into()]];
        for i in 0..game.num_players() {
            let seen: Vec<String> = obs.frequencies()[i]
                .iter()
                .map(|f| f.map_or_else(|| "-".to_string(), f3))
                .collect();
            rows.push(vec![
                game.players()[i].clone(),
                format!("({})", seen.join(", ")),
                vector(forward.profile.player(i)),
            ]);
        }
        table.push_str(&align(&rows));
    }
    if let Some(gap) = result.forward_residual {
        let _ = writeln!(table, "forward gap {}", f3(gap));
    }
    for implied in &result.implied_lambdas {
        let _ = writeln!(
            table,
            "implied lambda {} {} vs {}: {}",
            game.players()[implied.player],
            implied.strategies.0,
            implied.strategies.1,
            implied.lambda.map_or_else(|| "undefined".to_string(), f3)
        );
    }
    let _ = writeln!(table, "feasible: {}", if result.feasible { "yes" } else { "no" });
    if let Some(why) = &result.explanation {
        let _ = writeln!(table, "{why}");
    }
    Ok(Outcome {
        json,
        table,
        feasible: result.feasible,
    })
}

fn strategy_pair(game: &Game, player: usize, text: &str) -> CliResult<StrategyPair> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [strategy, alternative] = parts.as_slice() else {
        return Err(CliError::Usage(format!("expected `STRATEGY,ALTERNATIVE`, got `{text}`")));
    };
    let index = |label: &str| {
        game.strategy_index(player, label)
            .ok_or_else(|| CliError::Usage(format!("player {} has no strategy `{label}`", game.players()[player])))
    };
    Ok(StrategyPair {
        player,
        strategy: index(strategy)?,
        alternative: index(alternative)?,
    })
}

pub(crate) fn identify(args: &IdentifyArgs) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let game = &loaded.game;
    let obs = observed(&loaded)?;
    let id = identify_focal(game, obs)?;
    let cross = match (&args.cross_row, &args.cross_col) {
        (Some(row), Some(col)) => {
            if game.num_players() != 2 {
                return Err(CliError::Usage("the cross-player test needs a two-player game".into()));
            }
            let first = strategy_pair(game, 0, row)?;
            let second = strategy_pair(game, 1, col)?;
            Some(cross_player_focality_test(game, obs, first, second, None)?)
        }
        _ => None,
    };

    let json = json!({
        "command": "identify",
        "game": game.name(),
        "source": loaded.source,
        "identification": id,
        "cross_player": cross,
    });

    let mut table = header(&loaded);
    for p in &id.players {
        let _ = writeln!(table, "\nplayer {}", game.players()[p.player]);
        let mut rows = vec![vec![
            "strategy".to_string(),
            "alternative".into(),
            "frequencies".into(),
            "utilities".into(),
            "conclusion".into(),
        ]];
        for pair in &p.pairs {
            rows.push(vec![
                pair.strategy.clone(),
                pair.alternative.clone(),
                vector(&[pair.frequencies.0, pair.frequencies.1]),
                vector(&[pair.utilities.0, pair.utilities.1]),
                match pair.conclusion {
                    fqre::inference::identify::PairConclusion::FirstFocalSecondNot => {
                        format!("{} focal, {} non-focal", pair.strategy, pair.alternative)
                    }
                    fqre::inference::identify::PairConclusion::Uninformative => "uninformative".into(),
                },
            ]);
        }
        table.push_str(&align(&rows));
        let _ = writeln!(table, "focal: {{{}}}", p.focal.join(", "));
        let _ = writeln!(table, "non-focal: {{{}}}", p.non_focal.join(", "));
    }
    for w in &id.warnings {
        let _ = writeln!(table, "warning: {w}");
    }
    if let Some(v) = &cross {
        let _ = writeln!(
            table,
            "\ncross-player test: {} (statistic {})",
            if v.fired { "fired" } else { "did not fire" },
            f3(v.statistic)
        );
        if !v.conclusion.is_empty() {
            let _ = writeln!(table, "{}", v.conclusion);
        }
    }
    Ok(Outcome {
        json,
        table,
        feasible: true,
    })
}

pub(crate) fn falsify(args: &FalsifyArgs) -> CliResult<Outcome> {
    let obs: Vec<ObservedPlay> = args
        .pq
        .iter()
        .map(|text| {
            let parts: Vec<f64> = text
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Usage(format!("expected `P,Q` with two reals, got `{text}`")))?;
            let [p, q] = parts.as_slice() else {
                return Err(CliError::Usage(format!("expected `P,Q` with two reals, got `{text}`")));
            };
            Ok(ObservedPlay::complete(vec![vec![*q, 1.0 - q], vec![*p, 1.0 - p]], text.as_str())?)
        })
        .collect::<CliResult<_>>()?;
    let verdict = match obs.as_slice() {
        [a, b] => reject_qre_pair(a, b)?,
        [a, b, c, d] => reject_focal_qre_quad([a, b, c, d])?,
        _ => {
            return Err(CliError::Usage(format!(
                "--pq must be given 2 times (pair test) or 4 times (quad test), got {}",
                obs.len()
            )))
        }
    };

    let json = json!({ "command": "falsify", "verdict": verdict });
    let mut table = String::new();
    let _ = writeln!(table, "test {}", verdict.test);
    let _ = writeln!(table, "p {}", vector(&verdict.p));
    let _ = writeln!(table, "q {}", vector(&verdict.q));
    let _ = writeln!(table, "rejected: {}", if verdict.rejected { "yes" } else { "no" });
    for w in &verdict.witness {
        let _ = writeln!(table, "  {w}");
    }
    if let Some(tests) = &verdict.significance {
        for (k, t) in tests.iter().enumerate() {
            let _ = writeln!(table, "step {}: z {}, one-sided p {}", k + 1, f3(t.z), f3(t.p_value));
        }
    }
    Ok(Outcome {
        json,
        table,
        feasible: true,
    })
}

pub(crate) fn reproduce(args: &ReproduceArgs) -> CliResult<Outcome> {
    let reports = match args.criterion {
        Some(n) => vec![run_criterion(n)?],
        None => run_all()?,
    };
    let passed = reports.iter().filter(|r| r.passed).count();
    let json = json!({
        "command": "reproduce",
        "passed": passed,
        "criteria": reports.len(),
        "reports": reports,
    });
    let mut table = String::new();
    for r in &reports {
        let _ = writeln!(table, "criterion {}: {} ({})", r.number, if r.passed { "PASS" } else { "FAIL" }, r.title);
    }
    let _ = writeln!(table, "{passed} of {} criteria passed\n", reports.len());
    table.push_str(&render_table(&reports));
    Ok(Outcome {
        json,
        table,
        feasible: true,
    })
}

pub(crate) fn validate(args: &ValidateArgs) -> CliResult<Outcome> {
    let loaded = load(&args.game)?;
    let game = &loaded.game;
    let mut issues: Vec<String> = game.validate().issues.iter().map(ToString::to_string).collect();
    if let Some(spec) = &loaded.focal {
        if let Err(e) = spec.check(game) {
            issues.push(e.to_string());
        }
    }
    if let Some(obs) = &loaded.observed {
        if let Err(e) = obs.check_shape(game) {
            issues.push(e.to_string());
        }
    }
    let valid = issues.is_empty();
    let json = json!({
        "command": "validate",
        "game": game.name(),
        "source": loaded.source,
        "players": game.players(),
        "strategies": game.all_strategies(),
        "profiles": game.num_profiles(),
        "observed": loaded.observed.is_some(),
        "focal": loaded.focal.as_ref().map(|f| f.labels(game)),
        "valid": valid,
        "issues": issues,
    });
    let mut table = header(&loaded);
    let counts: Vec<String> = game.strategy_counts().iter().map(ToString::to_string).collect();
    let _ = writeln!(table, "{} players, strategies {}, {} profiles", game.num_players(), counts.join("x"), game.num_profiles());
    let _ = writeln!(table, "observations: {}", if loaded.observed.is_some() { "yes" } else { "no" });
    if valid {
        let _ = writeln!(table, "valid");
    }
    for issue in &issues {
        let _ = writeln!(table, "issue: {issue}");
    }
    Ok(Outcome {
        json,
        table,
        feasible: valid,
    })
}

pub(crate) fn catalog() -> Outcome {
    let infos = list_fixtures();
    Outcome {
        json: json!({ "command": "catalog", "fixtures": infos }),
        table: catalog_table(&infos),
        feasible: true,
    }
}
