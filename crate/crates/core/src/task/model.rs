use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::channel::{AttentionalChannel, Initiator};
use super::element::ElementCatalog;
use super::scale::WorkloadScale;

/// Upper bound of every workload value and of each global attention pool.
pub const WORKLOAD_CAP: f64 = 10.0;

/// One elementary driver or machine activity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub name: String,
    pub description: String,
    /// Interface element the task is allocated to.
    pub location: String,
    pub cognitive_descriptor: String,
    pub perceptual_descriptor: String,
    pub perception_type: AttentionalChannel,
    pub perceptual_workload: f64,
    pub cognitive_workload: f64,
    pub duration: f64,
    /// One-way gaze change road -> element; zero for non-visual tasks.
    pub gaze_time: f64,
    pub cognitive_function_trigger: Option<String>,
    pub awareness_parameter: Option<String>,
    /// Task requested right after this one completes.
    pub triggers: Option<String>,
    /// Higher is more important.
    pub priority: i64,
    pub initiator: Initiator,
}

impl Task {
    /// Duration plus the gaze change out and back.
    pub fn total_time(&self) -> f64 {
        self.duration + 2.0 * self.gaze_time
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    MissingColumn,
    MissingField,
    InvalidValue,
    DuplicateTask,
    DuplicateElement,
    UnknownLocation,
    UnsupportedChannel,
    UnknownDescriptor,
    DanglingTrigger,
    TriggerCycle,
    OutOfRange,
    GazeOnNonVisual,
    Scenario,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Where the problem was found, e.g. `tasks.csv:4` or a task name.
    pub context: Option<String>,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, context: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        Self {
            kind,
            context: context.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(ctx) => write!(f, "{ctx}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violation found, not just the first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// The HMI functional architecture under evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Configuration {
    pub tasks: Vec<Task>,
    pub elements: ElementCatalog,
    pub scale: WorkloadScale,
}

impl Configuration {
    pub fn task(&self, name: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn task_mut(&mut self, name: &str) -> Option<&mut Task> {
        self.tasks.iter_mut().find(|t| t.name == name)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }
}

fn in_workload_range(v: f64) -> bool {
    v > 0.0 && v <= WORKLOAD_CAP
}

/// Checks every task and cross-reference invariant. Empty iff valid.
pub fn validate(config: &Configuration) -> Vec<Violation> {
    let mut out = Vec::new();

    for el in config.elements.iter() {
        if !(el.gaze_time >= 0.0 && el.gaze_time.is_finite()) {
            out.push(Violation::new(
                ViolationKind::OutOfRange,
                Some(format!("element {}", el.name)),
                format!("gaze_time must be >= 0, got {}", el.gaze_time),
            ));
        }
    }

    let mut seen = BTreeSet::new();
    for task in &config.tasks {
        let ctx = || Some(format!("task {}", task.name));
        if !seen.insert(task.name.as_str()) {
            out.push(Violation::new(
                ViolationKind::DuplicateTask,
                ctx(),
                "task name is not unique",
            ));
        }
        if !(task.duration > 0.0 && task.duration.is_finite()) {
            out.push(Violation::new(
                ViolationKind::OutOfRange,
                ctx(),
                format!("duration must be > 0, got {}", task.duration),
            ));
        }
        if !(task.gaze_time >= 0.0 && task.gaze_time.is_finite()) {
            out.push(Violation::new(
                ViolationKind::OutOfRange,
                ctx(),
                format!("gaze time must be >= 0, got {}", task.gaze_time),
            ));
        } else if task.gaze_time > 0.0 && task.perception_type != AttentionalChannel::Visual {
            out.push(Violation::new(
                ViolationKind::GazeOnNonVisual,
                ctx(),
                format!("gaze time {} on a {} task", task.gaze_time, task.perception_type),
            ));
        }
        for (label, value) in [
            ("perceptual workload", task.perceptual_workload),
            ("cognitive workload", task.cognitive_workload),
        ] {
            if !in_workload_range(value) {
                out.push(Violation::new(
                    ViolationKind::OutOfRange,
                    ctx(),
                    format!("{label} must be in (0, 10], got {value}"),
                ));
            }
        }
        match config.elements.get(&task.location) {
            None => out.push(Violation::new(
                ViolationKind::UnknownLocation,
                ctx(),
                format!("location `{}` is not in the element catalog", task.location),
            )),
            Some(el) if !el.supports(task.perception_type) => out.push(Violation::new(
                ViolationKind::UnsupportedChannel,
                ctx(),
                format!("element `{}` cannot present {} tasks", el.name, task.perception_type),
            )),
            Some(_) => {}
        }
        if let Some(next) = &task.triggers {
            if config.task(next).is_none() {
                out.push(Violation::new(
                    ViolationKind::DanglingTrigger,
                    ctx(),
                    format!("triggers unknown task `{next}`"),
                ));
            }
        }
    }

    out.extend(trigger_cycles(&config.tasks));
    out
}

/// Each task names at most one successor, so the trigger graph is a
/// functional graph; every cycle is found by walking successor chains.
fn trigger_cycles(tasks: &[Task]) -> Vec<Violation> {
    let index: HashMap<&str, usize> = tasks.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
    let next: Vec<Option<usize>> = tasks
        .iter()
        .map(|t| t.triggers.as_deref().and_then(|n| index.get(n).copied()))
        .collect();

    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state = vec![0u8; tasks.len()];
    let mut cycles = BTreeMap::new();
    for start in 0..tasks.len() {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                2 => break,
                1 => {
                    let pos = path.iter().position(|&p| p == i).expect("on path");
                    let members: Vec<usize> = path[pos..].to_vec();
                    let min = *members.iter().min().expect("non-empty");
                    cycles.entry(min).or_insert(members);
                    break;
                }
                _ => {
                    state[i] = 1;
                    path.push(i);
                    cur = next[i];
                }
            }
        }
        for p in path {
            state[p] = 2;
        }
    }

    cycles
        .into_values()
        .map(|members| {
            let mut names: Vec<&str> = members.iter().map(|&i| tasks[i].name.as_str()).collect();
            names.push(names[0]);
            Violation::new(
                ViolationKind::TriggerCycle,
                None,
                format!("trigger cycle: {}", names.join(" -> ")),
            )
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::task::element::InterfaceElement;

    pub fn speed_check() -> Task {
        Task {
            name: "check-speed".into(),
            description: "Check out the speedometer".into(),
            location: "instrument-cluster".into(),
            cognitive_descriptor: "Evaluate single aspect".into(),
            perceptual_descriptor: "Inspect/Check (numerical)".into(),
            perception_type: AttentionalChannel::Visual,
            perceptual_workload: 4.0,
            cognitive_workload: 4.6,
            duration: 1.0,
            gaze_time: 0.2,
            cognitive_function_trigger: Some("speed-monitoring".into()),
            awareness_parameter: Some("speed".into()),
            triggers: None,
            priority: 3,
            initiator: Initiator::Driver,
        }
    }

    pub fn chime() -> Task {
        Task {
            name: "chime".into(),
            description: "Warning chime".into(),
            location: "speakers".into(),
            cognitive_descriptor: "Sign/signal recognition".into(),
            perceptual_descriptor: "Non-vocal signal recognition".into(),
            perception_type: AttentionalChannel::AuditoryNonVocal,
            perceptual_workload: 6.6,
            cognitive_workload: 3.7,
            duration: 1.0,
            gaze_time: 0.0,
            cognitive_function_trigger: None,
            awareness_parameter: None,
            triggers: None,
            priority: 5,
            initiator: Initiator::Machine,
        }
    }

    pub fn catalog() -> ElementCatalog {
        let mut c = ElementCatalog::new();
        c.insert(InterfaceElement {
            name: "instrument-cluster".into(),
            on_road: false,
            gaze_time: 0.2,
            channels: vec![AttentionalChannel::Visual],
        });
        c.insert(InterfaceElement {
            name: "head-up-display".into(),
            on_road: true,
            gaze_time: 0.2,
            channels: vec![AttentionalChannel::Visual],
        });
        c.insert(InterfaceElement {
            name: "speakers".into(),
            on_road: true,
            gaze_time: 0.0,
            channels: vec![AttentionalChannel::AuditoryVocal, AttentionalChannel::AuditoryNonVocal],
        });
        c
    }

    pub fn config(tasks: Vec<Task>) -> Configuration {
        Configuration {
            tasks,
            elements: catalog(),
            scale: WorkloadScale::default(),
        }
    }
}
