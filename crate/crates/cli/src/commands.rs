use std::fs;
use std::path::{Path, PathBuf};

use cockpit_sim::experiment::{
    compare, default_seeds, local_search, run_plan, scatter_csv, summary_csv, ConfigResult, Execution, ExperimentPlan,
    NamedConfig, SearchSettings, DEFAULT_TRIALS, DEFAULT_TRIAL_LENGTH,
};
use cockpit_sim::metrics::{levels_csv, metrics_csv, task_counts_csv, Indicators, TrialMetrics};
use cockpit_sim::scenario::Scenario;
use cockpit_sim::sim::{Prepared, TrialOptions, TrialResult};
use cockpit_sim::task::{load_configuration, write_tasks_csv, ConfigError, Configuration};

use crate::args::{Cli, Command, CompareArgs, ConfigArgs, OptimizeArgs, OutArgs, RunArgs, SeedArgs, ValidateArgs};
use crate::error::CliError;
use crate::export;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(a) => validate(a),
        Command::Run(a) => run(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Optimize(a) => optimize(a),
        Command::ExportTrace(a) => export_trace(a),
    }
}

fn load_config(args: &ConfigArgs, verbose: bool) -> Result<Configuration, CliError> {
    let loaded = load_configuration(&args.tasks, &args.elements, args.scale.as_deref())?;
    report_warnings(&loaded.warnings, verbose);
    Ok(loaded.config)
}

fn report_warnings(warnings: &[String], verbose: bool) {
    if verbose {
        for w in warnings {
            eprintln!("warning: {w}");
        }
    } else if !warnings.is_empty() {
        eprintln!("{} warning(s); use --verbose to list them", warnings.len());
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(args: &OutArgs) -> Result<Self, CliError> {
        fs::create_dir_all(&args.out)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
        Ok(Self { dir: args.out.clone() })
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

fn print_indicators(label: &str, i: &Indicators) {
    println!(
        "{label}eyes_off_pct={:.3} cog_overload_pct={:.3} perc_overload_pct={:.3} sa_avg_pct={:.3}",
        i.eyes_off, i.cognitive_overload, i.perceptual_overload, i.sa_average
    );
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let mut problems = Vec::new();
    let mut warnings = Vec::new();
    let config = match load_configuration(&args.config.tasks, &args.config.elements, args.config.scale.as_deref()) {
        Ok(loaded) => {
            warnings.extend(loaded.warnings);
            Some(loaded.config)
        }
        Err(ConfigError::Invalid(report)) => {
            problems.extend(report.violations.iter().map(|v| v.to_string()));
            None
        }
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    };
    let scenario = match args.scenario.as_deref().map(Scenario::load) {
        None => None,
        Some(Ok(s)) => Some(s),
        Some(Err(ConfigError::Invalid(report))) => {
            problems.extend(report.violations.iter().map(|v| v.to_string()));
            None
        }
        Some(Err(e)) => {
            problems.push(e.to_string());
            None
        }
    };
    if let (Some(config), Some(scenario)) = (&config, &scenario) {
        let (violations, w) = scenario.validate_against(config);
        problems.extend(violations.iter().map(|v| v.to_string()));
        warnings.extend(w);
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("  - {p}");
        }
        return Err(CliError::Input(format!(
            "validation failed with {} violation(s)",
            problems.len()
        )));
    }
    let config = config.expect("no problems means the configuration loaded");
    print!(
        "valid: {} task(s), {} element(s)",
        config.tasks.len(),
        config.elements.len()
    );
    if scenario.is_some() {
        print!(", scenario ok");
    }
    println!();
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<(Configuration, TrialResult), CliError> {
    let config = load_config(&args.config, args.out.verbose)?;
    let scenario = Scenario::load(&args.scenario)?;
    let result = {
        let prepared = Prepared::new(&config, &scenario)?;
        report_warnings(prepared.warnings(), args.out.verbose);
        let options = TrialOptions {
            record_trace: true,
            record_events: false,
        };
        prepared.run(args.seed, args.length, options)?
    };
    Ok((config, result))
}

fn write_trial_files(out: &Output, m: &TrialMetrics) -> Result<(), CliError> {
    out.write("metrics.csv", &metrics_csv(std::slice::from_ref(m)))?;
    out.write("task_counts.csv", &task_counts_csv(&m.per_task_counts))?;
    out.write("levels.csv", &levels_csv(m))
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let (_, result) = simulate(&args)?;
    let out = Output::create(&args.out)?;
    write_trial_files(&out, &result.metrics)?;
    out.write("trace.jsonl", &result.trace.expect("trace requested").to_jsonl())?;
    print_indicators(&format!("seed={} ", args.seed), &Indicators::of(&result.metrics));
    Ok(())
}

fn export_trace(args: RunArgs) -> Result<(), CliError> {
    let (_, result) = simulate(&args)?;
    let trace = result.trace.expect("trace requested");
    let out = Output::create(&args.out)?;
    out.write("trace.jsonl", &trace.to_jsonl())?;
    out.write("timeline.csv", &export::timeline_csv(&trace))?;
    out.write("executions.csv", &export::executions_csv(&trace))?;
    out.write("road.csv", &export::road_csv(&result.timeline))?;
    out.write("levels.csv", &levels_csv(&result.metrics))?;
    println!(
        "{} trace record(s) written to {}",
        trace.records.len(),
        out.dir.display()
    );
    Ok(())
}

fn read_seeds(path: &Path) -> Result<Vec<u64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    export::parse_seeds(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// The first `trials` seeds of the seeds file, or `1..=trials`.
fn resolve_seeds(trials: usize, seeds_file: Option<&Path>) -> Result<Vec<u64>, CliError> {
    if trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let Some(path) = seeds_file else {
        return Ok(default_seeds(trials));
    };
    let seeds = read_seeds(path)?;
    if seeds.len() < trials {
        return Err(CliError::Input(format!(
            "{} holds {} seed(s), {trials} needed",
            path.display(),
            seeds.len()
        )));
    }
    Ok(seeds[..trials].to_vec())
}

fn config_name(path: &Path, fallback: &str) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| fallback.into())
}

fn write_results(out: &Output, results: &[ConfigResult]) -> Result<(), CliError> {
    out.write("summary.csv", &summary_csv(results))?;
    out.write("scatter.csv", &scatter_csv(results))?;
    for r in results {
        print_indicators(&format!("{}: ", r.name), &r.summary.median);
    }
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<(), CliError> {
    let (configs, scenario, trials, length) = match &args.plan {
        Some(plan) => {
            let plan = ExperimentPlan::load(plan)?;
            let trials = args.trials.unwrap_or(plan.trials_per_config);
            let length = args.length.unwrap_or(plan.trial_length);
            (plan.configurations, plan.scenario, trials, length)
        }
        None => {
            let [a, b] = args.tasks.as_slice() else {
                return Err(CliError::Input(format!(
                    "compare needs --tasks exactly twice or --plan, got {} task file(s)",
                    args.tasks.len()
                )));
            };
            let elements = args.elements.clone().expect("required without --plan");
            let load = |tasks: &PathBuf| {
                load_config(
                    &ConfigArgs {
                        tasks: tasks.clone(),
                        elements: elements.clone(),
                        scale: args.scale.clone(),
                    },
                    args.out.verbose,
                )
            };
            let (mut name_a, mut name_b) = (config_name(a, "a"), config_name(b, "b"));
            if name_a == name_b {
                name_a.push_str("-a");
                name_b.push_str("-b");
            }
            let configs = vec![
                NamedConfig {
                    name: name_a,
                    config: load(a)?,
                },
                NamedConfig {
                    name: name_b,
                    config: load(b)?,
                },
            ];
            let scenario = Scenario::load(args.scenario.as_deref().expect("required without --plan"))?;
            (
                configs,
                scenario,
                args.trials.unwrap_or(DEFAULT_TRIALS),
                args.length.unwrap_or(DEFAULT_TRIAL_LENGTH),
            )
        }
    };
    let seeds = resolve_seeds(trials, args.seeds_file.as_deref())?;
    let plan = ExperimentPlan::new(configs, scenario, trials, length, Some(seeds))?;
    let out = Output::create(&args.out)?;
    if let [a, b] = plan.configurations.as_slice() {
        let c = compare(
            a,
            b,
            &plan.scenario,
            plan.seeds(),
            plan.trial_length,
            Execution::Parallel,
        )?;
        write_results(&out, &c.results())?;
        out.write("paired.csv", &c.paired_csv())?;
    } else {
        write_results(&out, &run_plan(&plan, Execution::Parallel)?)?;
    }
    Ok(())
}

fn parse_weights(text: &str) -> Result<[f64; 3], CliError> {
    let bad = || {
        CliError::Input(format!(
            "--weights expects three non-negative numbers like `1,1,1`, got `{text}`"
        ))
    };
    let values: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match values.as_slice() {
        &[c, p, e] if values.iter().all(|w| w.is_finite() && *w >= 0.0) => Ok([c, p, e]),
        _ => Err(bad()),
    }
}

fn optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let weights = parse_weights(&args.weights)?;
    let SeedArgs {
        trials,
        seeds_file,
        length,
    } = &args.seeds;
    let seeds = resolve_seeds(*trials, seeds_file.as_deref())?;
    let config = load_config(&args.config, args.out.verbose)?;
    let scenario = Scenario::load(&args.scenario)?;
    let mut settings = SearchSettings::new(seeds, *length, args.sa_floor, args.budget);
    settings.weights = weights;
    let outcome = local_search(&config, &scenario, &settings)?;
    if !outcome.start_feasible {
        eprintln!(
            "warning: the input configuration is below the SA floor ({:.3} < {})",
            outcome.initial.sa_average, args.sa_floor
        );
    }
    let out = Output::create(&args.out)?;
    out.write("moves.json", &outcome.log_json())?;
    let name = format!("{}_optimized.csv", config_name(&args.config.tasks, "tasks"));
    out.write(&name, &write_tasks_csv(&outcome.config.tasks))?;
    for r in &outcome.log {
        println!("step {}: {}", r.step, r.design_move);
    }
    let show = |label: &str, o: &cockpit_sim::experiment::ObjectiveVector| {
        println!(
            "{label}: cog_overload_pct={:.3} perc_overload_pct={:.3} eyes_off_pct={:.3} sa_avg_pct={:.3}",
            o.cognitive_overload, o.perceptual_overload, o.eyes_off, o.sa_average
        )
    };
    show("initial", &outcome.initial);
    show("final", &outcome.objective);
    println!(
        "{} move(s) accepted, {} evaluation(s), {}",
        outcome.log.len(),
        outcome.evaluations,
        if outcome.local_optimum {
            "local optimum reached"
        } else {
            "budget exhausted"
        }
    );
    Ok(())
}
