//! Seeded Monte Carlo runs, paired comparison and local search over HMI
//! design moves.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{aggregate, metrics_csv, Summary, TrialMetrics};
use crate::scenario::Scenario;
use crate::sim::{Prepared, SimError, TrialOptions};
use crate::task::{
    load_configuration, read_file, AttentionalChannel, ConfigError, Configuration, Initiator, ScaleCategory,
};

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_TRIAL_LENGTH: f64 = 60_000.0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("sa_floor must be within [0, 100], got {0}")]
    SaFloor(f64),
    #[error("design move {mv}: {reason}")]
    Move { mv: String, reason: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Validates and runs one trial.
pub fn run_trial(
    config: &Configuration,
    scenario: &Scenario,
    seed: u64,
    trial_length: f64,
) -> Result<TrialMetrics, SimError> {
    Ok(crate::sim::simulate(config, scenario, seed, trial_length, TrialOptions::default())?.metrics)
}

/// One trial per seed, returned in seed order whatever the execution mode.
pub fn run_trials(
    prepared: &Prepared<'_>,
    seeds: &[u64],
    trial_length: f64,
    execution: Execution,
) -> Result<Vec<TrialMetrics>, SimError> {
    let one = |&seed: &u64| {
        prepared
            .run(seed, trial_length, TrialOptions::default())
            .map(|r| r.metrics)
    };
    match execution {
        Execution::Sequential => seeds.iter().map(one).collect(),
        Execution::Parallel => seeds.par_iter().map(one).collect(),
    }
}

pub fn default_seeds(n: usize) -> Vec<u64> {
    (1..=n as u64).collect()
}

#[derive(Clone, Debug)]
pub struct NamedConfig {
    pub name: String,
    pub config: Configuration,
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub configurations: Vec<NamedConfig>,
    pub scenario: Scenario,
    pub trials_per_config: usize,
    pub trial_length: f64,
    pub master_seeds: Vec<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    scenario: PathBuf,
    elements: PathBuf,
    #[serde(default)]
    scale: Option<PathBuf>,
    #[serde(default = "default_trials")]
    trials_per_config: usize,
    #[serde(default = "default_length")]
    trial_length: f64,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    configuration: Vec<PlanEntry>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanEntry {
    name: String,
    tasks: PathBuf,
    #[serde(default)]
    elements: Option<PathBuf>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_length() -> f64 {
    DEFAULT_TRIAL_LENGTH
}

impl ExperimentPlan {
    pub fn new(
        configurations: Vec<NamedConfig>,
        scenario: Scenario,
        trials_per_config: usize,
        trial_length: f64,
        master_seeds: Option<Vec<u64>>,
    ) -> Result<Self, ExperimentError> {
        let plan = Self {
            configurations,
            scenario,
            trials_per_config,
            trial_length,
            master_seeds: master_seeds.unwrap_or_else(|| default_seeds(trials_per_config)),
        };
        plan.check()?;
        Ok(plan)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let fail = |m: String| Err(ExperimentError::Plan(m));
        if self.trials_per_config < 1 {
            return fail("trials_per_config must be at least 1".into());
        }
        if !(self.trial_length > 0.0 && self.trial_length.is_finite()) {
            return fail(format!("trial_length must be positive, got {}", self.trial_length));
        }
        if self.master_seeds.len() < self.trials_per_config {
            return fail(format!(
                "{} seeds for {} trials per configuration",
                self.master_seeds.len(),
                self.trials_per_config
            ));
        }
        let mut names = BTreeSet::new();
        for c in &self.configurations {
            if !names.insert(&c.name) {
                return fail(format!("configuration `{}` listed twice", c.name));
            }
        }
        Ok(())
    }

    /// Reads a plan file; paths inside it are relative to the file.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = read_file(path)?;
        let file: PlanFile = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            file: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let scale = file.scale.as_ref().map(|s| dir.join(s));
        let configurations = file
            .configuration
            .iter()
            .map(|entry| {
                let elements = dir.join(entry.elements.as_ref().unwrap_or(&file.elements));
                let loaded = load_configuration(&dir.join(&entry.tasks), &elements, scale.as_deref())?;
                Ok(NamedConfig {
                    name: entry.name.clone(),
                    config: loaded.config,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let scenario = Scenario::load(&dir.join(&file.scenario))?;
        Self::new(
            configurations,
            scenario,
            file.trials_per_config,
            file.trial_length,
            file.seeds,
        )
    }

    pub fn seeds(&self) -> &[u64] {
        &self.master_seeds[..self.trials_per_config]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigResult {
    pub name: String,
    pub trials: Vec<TrialMetrics>,
    pub summary: Summary,
}

pub fn run_config(
    name: &str,
    config: &Configuration,
    scenario: &Scenario,
    seeds: &[u64],
    trial_length: f64,
    execution: Execution,
) -> Result<ConfigResult, ExperimentError> {
    let prepared = Prepared::new(config, scenario)?;
    let trials = run_trials(&prepared, seeds, trial_length, execution)?;
    let summary = aggregate(&trials).map_err(|e| ExperimentError::Plan(e.to_string()))?;
    Ok(ConfigResult {
        name: name.to_owned(),
        trials,
        summary,
    })
}

pub fn run_plan(plan: &ExperimentPlan, execution: Execution) -> Result<Vec<ConfigResult>, ExperimentError> {
    plan.configurations
        .iter()
        .map(|c| {
            run_config(
                &c.name,
                &c.config,
                &plan.scenario,
                plan.seeds(),
                plan.trial_length,
                execution,
            )
        })
        .collect()
}

/// Per-seed difference `b - a` of each indicator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairedDelta {
    pub seed: u64,
    pub eyes_off: f64,
    pub cognitive_overload: f64,
    pub perceptual_overload: f64,
    pub sa_average: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub a: ConfigResult,
    pub b: ConfigResult,
    pub paired: Vec<PairedDelta>,
}

/// Runs both configurations on the same seeds so each pair shares its road
/// and trigger draws.
pub fn compare(
    a: &NamedConfig,
    b: &NamedConfig,
    scenario: &Scenario,
    seeds: &[u64],
    trial_length: f64,
    execution: Execution,
) -> Result<Comparison, ExperimentError> {
    let ra = run_config(&a.name, &a.config, scenario, seeds, trial_length, execution)?;
    let rb = run_config(&b.name, &b.config, scenario, seeds, trial_length, execution)?;
    let paired = ra
        .trials
        .iter()
        .zip(&rb.trials)
        .map(|(x, y)| PairedDelta {
            seed: x.seed,
            eyes_off: y.eyes_off_fraction - x.eyes_off_fraction,
            cognitive_overload: y.cognitive_overload_fraction - x.cognitive_overload_fraction,
            perceptual_overload: y.perceptual_overload_fraction - x.perceptual_overload_fraction,
            sa_average: y.sa_average - x.sa_average,
        })
        .collect();
    Ok(Comparison { a: ra, b: rb, paired })
}

/// Table of median indicators: one row per indicator, one column per
/// configuration.
pub fn summary_csv(results: &[ConfigResult]) -> String {
    let mut out = String::from("indicator");
    for r in results {
        out.push(',');
        out.push_str(&r.name);
    }
    out.push('\n');
    let rows: [(&str, fn(&Summary) -> f64); 4] = [
        ("eyes_off_pct", |s| s.median.eyes_off),
        ("cog_overload_pct", |s| s.median.cognitive_overload),
        ("perc_overload_pct", |s| s.median.perceptual_overload),
        ("sa_avg_pct", |s| s.median.sa_average),
    ];
    for (label, get) in rows {
        out.push_str(label);
        for r in results {
            let _ = write!(out, ",{}", get(&r.summary));
        }
        out.push('\n');
    }
    out
}

/// Every trial of every configuration, for scatter plots.
pub fn scatter_csv(results: &[ConfigResult]) -> String {
    let mut out = String::from("config,seed,eyes_off_pct,cog_overload_pct,perc_overload_pct,sa_avg_pct\n");
    for r in results {
        for line in metrics_csv(&r.trials).lines().skip(1) {
            let _ = writeln!(out, "{},{line}", r.name);
        }
    }
    out
}

impl Comparison {
    pub fn results(&self) -> [ConfigResult; 2] {
        [self.a.clone(), self.b.clone()]
    }

    pub fn paired_csv(&self) -> String {
        let mut out = String::from("seed,d_eyes_off_pct,d_cog_overload_pct,d_perc_overload_pct,d_sa_avg_pct\n");
        for d in &self.paired {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                d.seed, d.eyes_off, d.cognitive_overload, d.perceptual_overload, d.sa_average
            );
        }
        out
    }
}

/// One HMI design decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "kebab-case")]
pub enum DesignMove {
    /// Show the task on another element. Visual tasks take that element's
    /// gaze time.
    ReallocateLocation {
        task: String,
        element: String,
    },
    RemoveTask {
        task: String,
    },
    /// `first` triggers `second` on completion instead of both appearing at
    /// once.
    SerializeSignals {
        first: String,
        second: String,
    },
    /// New descriptors; workloads are re-read from the scale.
    ReplaceDescriptor {
        task: String,
        cognitive: String,
        perceptual: String,
    },
}

impl std::fmt::Display for DesignMove {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DesignMove::ReallocateLocation { task, element } => write!(f, "reallocate {task} to {element}"),
            DesignMove::RemoveTask { task } => write!(f, "remove {task}"),
            DesignMove::SerializeSignals { first, second } => write!(f, "serialize {first} -> {second}"),
            DesignMove::ReplaceDescriptor {
                task,
                cognitive,
                perceptual,
            } => write!(f, "describe {task} as {cognitive} / {perceptual}"),
        }
    }
}

impl DesignMove {
    /// The configuration after the move; it must pass validation.
    pub fn apply(&self, config: &Configuration) -> Result<Configuration, ExperimentError> {
        let fail = |reason: String| ExperimentError::Move {
            mv: self.to_string(),
            reason,
        };
        let mut next = config.clone();
        let find = |next: &mut Configuration, name: &str| -> Result<usize, ExperimentError> {
            next.tasks
                .iter()
                .position(|t| t.name == name)
                .ok_or_else(|| fail(format!("no task `{name}`")))
        };
        match self {
            DesignMove::ReallocateLocation { task, element } => {
                let i = find(&mut next, task)?;
                let e = next
                    .elements
                    .get(element)
                    .ok_or_else(|| fail(format!("no element `{element}`")))?
                    .clone();
                let t = &mut next.tasks[i];
                t.location = e.name.clone();
                if t.perception_type == AttentionalChannel::Visual {
                    t.gaze_time = e.gaze_time;
                }
            }
            DesignMove::RemoveTask { task } => {
                let i = find(&mut next, task)?;
                next.tasks.remove(i);
            }
            DesignMove::SerializeSignals { first, second } => {
                let i = find(&mut next, first)?;
                find(&mut next, second)?;
                if let Some(existing) = &next.tasks[i].triggers {
                    return Err(fail(format!("`{first}` already triggers `{existing}`")));
                }
                next.tasks[i].triggers = Some(second.clone());
            }
            DesignMove::ReplaceDescriptor {
                task,
                cognitive,
                perceptual,
            } => {
                let i = find(&mut next, task)?;
                let channel = next.tasks[i].perception_type;
                let cog = next
                    .scale
                    .lookup(ScaleCategory::Cognitive, cognitive)
                    .map_err(|e| fail(e.to_string()))?;
                let perc = next
                    .scale
                    .lookup(channel.perceptual_category(), perceptual)
                    .map_err(|e| fail(e.to_string()))?;
                let t = &mut next.tasks[i];
                t.cognitive_descriptor = cognitive.clone();
                t.perceptual_descriptor = perceptual.clone();
                t.cognitive_workload = cog;
                t.perceptual_workload = perc;
            }
        }
        let violations = next.validate();
        if let Some(v) = violations.first() {
            return Err(fail(v.to_string()));
        }
        Ok(next)
    }
}

const TEXT: (&str, &str) = ("Sign/signal recognition", "Read (text)");
const ICON: (&str, &str) = ("Sign/signal recognition", "Discriminate (Sign)");

/// Neighbours of a configuration in a fixed order: reallocations, removals,
/// serializations, then text-to-icon replacements. Removal and serializing
/// only touch machine tasks emitted through scenario bindings.
pub fn candidate_moves(config: &Configuration, scenario: &Scenario) -> Vec<DesignMove> {
    let mut moves = Vec::new();
    for t in &config.tasks {
        for e in config.elements.iter() {
            if e.name != t.location && e.supports(t.perception_type) {
                moves.push(DesignMove::ReallocateLocation {
                    task: t.name.clone(),
                    element: e.name.clone(),
                });
            }
        }
    }
    let triggered: BTreeSet<&str> = config.tasks.iter().filter_map(|t| t.triggers.as_deref()).collect();
    let mut bound: Vec<&str> = Vec::new();
    for (_, list) in scenario.bindings.lists() {
        for name in list {
            if !bound.contains(&name.as_str()) {
                bound.push(name);
            }
        }
    }
    let machine = |name: &str| config.task(name).is_some_and(|t| t.initiator == Initiator::Machine);
    for name in &bound {
        if machine(name) && !triggered.contains(name) {
            moves.push(DesignMove::RemoveTask {
                task: (*name).to_owned(),
            });
        }
    }
    for (_, list) in scenario.bindings.lists() {
        for (i, first) in list.iter().enumerate() {
            for second in &list[i + 1..] {
                let free = config.task(first).is_some_and(|t| t.triggers.is_none());
                if free && machine(first) && machine(second) && !triggered.contains(second.as_str()) {
                    moves.push(DesignMove::SerializeSignals {
                        first: first.clone(),
                        second: second.clone(),
                    });
                }
            }
        }
    }
    for t in &config.tasks {
        let is_text = t.cognitive_descriptor == TEXT.0 || t.perceptual_descriptor == TEXT.1;
        let is_icon = (t.cognitive_descriptor.as_str(), t.perceptual_descriptor.as_str()) == ICON;
        if t.initiator == Initiator::Machine && t.perception_type == AttentionalChannel::Visual && is_text && !is_icon {
            moves.push(DesignMove::ReplaceDescriptor {
                task: t.name.clone(),
                cognitive: ICON.0.into(),
                perceptual: ICON.1.into(),
            });
        }
    }
    moves
}

/// Minimized indicators with SA as the constraint value, all medians in %.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub cognitive_overload: f64,
    pub perceptual_overload: f64,
    pub eyes_off: f64,
    pub sa_average: f64,
}

impl ObjectiveVector {
    pub fn of(summary: &Summary) -> Self {
        Self {
            cognitive_overload: summary.median.cognitive_overload,
            perceptual_overload: summary.median.perceptual_overload,
            eyes_off: summary.median.eyes_off,
            sa_average: summary.median.sa_average,
        }
    }

    fn minimized(&self) -> [f64; 3] {
        [self.cognitive_overload, self.perceptual_overload, self.eyes_off]
    }

    pub fn weighted(&self, weights: [f64; 3]) -> f64 {
        self.minimized().iter().zip(weights).map(|(v, w)| v * w).sum()
    }

    pub fn dominates(&self, other: &Self) -> bool {
        let (a, b) = (self.minimized(), other.minimized());
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }
}

#[derive(Clone, Debug)]
pub struct SearchSettings {
    pub seeds: Vec<u64>,
    pub trial_length: f64,
    pub sa_floor: f64,
    /// Candidate configurations evaluated at most.
    pub budget: usize,
    /// Weights of (cognitive, perceptual, eyes-off).
    pub weights: [f64; 3],
    pub execution: Execution,
}

impl SearchSettings {
    pub fn new(seeds: Vec<u64>, trial_length: f64, sa_floor: f64, budget: usize) -> Self {
        Self {
            seeds,
            trial_length,
            sa_floor,
            budget,
            weights: [1.0; 3],
            execution: Execution::Parallel,
        }
    }

    /// Accepted when feasible and either Pareto-better or weighted-better;
    /// from an infeasible point any SA gain is accepted.
    pub fn accepts(&self, current: &ObjectiveVector, candidate: &ObjectiveVector) -> bool {
        if current.sa_average < self.sa_floor {
            return candidate.sa_average > current.sa_average;
        }
        candidate.sa_average >= self.sa_floor
            && (candidate.dominates(current) || candidate.weighted(self.weights) < current.weighted(self.weights))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: usize,
    #[serde(flatten)]
    pub design_move: DesignMove,
    pub before: ObjectiveVector,
    pub after: ObjectiveVector,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub config: Configuration,
    pub log: Vec<MoveRecord>,
    pub initial: ObjectiveVector,
    pub objective: ObjectiveVector,
    pub evaluations: usize,
    pub start_feasible: bool,
    pub local_optimum: bool,
}

impl SearchOutcome {
    pub fn log_json(&self) -> String {
        serde_json::to_string_pretty(&self.log).expect("move log serializes")
    }
}

fn evaluate(
    config: &Configuration,
    scenario: &Scenario,
    s: &SearchSettings,
) -> Result<ObjectiveVector, ExperimentError> {
    let r = run_config("candidate", config, scenario, &s.seeds, s.trial_length, s.execution)?;
    Ok(ObjectiveVector::of(&r.summary))
}

/// Greedy first-improvement hill climb under common random numbers.
pub fn local_search(
    config: &Configuration,
    scenario: &Scenario,
    settings: &SearchSettings,
) -> Result<SearchOutcome, ExperimentError> {
    if !(0.0..=100.0).contains(&settings.sa_floor) {
        return Err(ExperimentError::SaFloor(settings.sa_floor));
    }
    if settings.seeds.is_empty() {
        return Err(ExperimentError::Plan("local search needs at least one seed".into()));
    }
    let initial = evaluate(config, scenario, settings)?;
    let mut current = config.clone();
    let mut objective = initial;
    let mut log = Vec::new();
    let mut evaluations = 0;
    let mut local_optimum = false;
    'climb: loop {
        let mut improved = false;
        for mv in candidate_moves(&current, scenario) {
            if evaluations >= settings.budget {
                break 'climb;
            }
            let Ok(next) = mv.apply(&current) else { continue };
            if !scenario.validate_against(&next).0.is_empty() {
                continue;
            }
            evaluations += 1;
            let candidate = evaluate(&next, scenario, settings)?;
            if settings.accepts(&objective, &candidate) {
                log.push(MoveRecord {
                    step: log.len() + 1,
                    design_move: mv,
                    before: objective,
                    after: candidate,
                });
                current = next;
                objective = candidate;
                improved = true;
                break;
            }
        }
        if !improved {
            local_optimum = true;
            break;
        }
    }
    Ok(SearchOutcome {
        config: current,
        log,
        initial,
        objective,
        evaluations,
        start_feasible: initial.sa_average >= settings.sa_floor,
        local_optimum,
    })
}

/// Re-applies a move log from its starting configuration.
pub fn replay_moves(config: &Configuration, log: &[MoveRecord]) -> Result<Configuration, ExperimentError> {
    log.iter().try_fold(config.clone(), |c, r| r.design_move.apply(&c))
}
