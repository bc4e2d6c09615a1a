//! Scenario file: road process, speed script, cognitive functions, driver
//! reactions and the machine tasks bound to vehicle events.
//!
//! ```toml
//! [road]                      # either a semi-Markov process ...
//! initial_level = 2
//! [[road.level]]
//! level = 4
//! mean = 420.0                # dwell: min + Exp(mean - min), capped at max
//! min = 90.0
//! next = [{ level = 2, weight = 0.7 }, { level = 0, weight = 0.3 }]
//!
//! # ... or a fixed timeline; the last segment is stretched to the trial end
//! # [[road.segment]]
//! # start = 0.0
//! # end = 60.0
//! # max_level = 4
//!
//! [vehicle]
//! initial_level = 2
//! tor60_lead = 60.0
//! tor10_lead = 10.0
//!
//! [speed]                     # piecewise-constant, optionally periodic
//! resolution = 1.0            # km/h bucket the driver can tell apart
//! period = 300.0
//! points = [{ at = 0.0, kmh = 90.0 }, { at = 120.0, kmh = 110.0 }]
//!
//! [awareness]
//! parameters = ["speed", "automation_level", "ad_available", "road_condition", "tor_mode"]
//!
//! [[cognitive_function]]
//! name = "speed-monitoring"
//! mean = 20.0
//! sigma = 5.0                 # default mean / 4
//! task = "check-speed"        # default: the task naming this function
//! levels = [0, 1, 2, 3]       # default: all levels
//!
//! [[reaction]]                # request a task when a belief is refreshed to a value
//! parameter = "ad_available"
//! value = 1
//! task = "activate-ad"
//! levels = [0, 1, 2, 3]
//!
//! [[command]]                 # completing the task operates the automation
//! task = "activate-ad"
//! action = "switch-up"
//! level = 4
//!
//! [bindings]                  # machine tasks emitted on vehicle events
//! ad_available = ["ad-available-text"]
//! tor60 = ["tor60-text"]
//! tor10 = ["tor10-haptic", "drive-now-vocal"]
//! level_change = []
//! level_entered = { "2" = ["l2-active-text"] }
//! availability_change = []
//! switch_rejected = []
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::driver::{CognitiveFunction, ParamValue};
use crate::task::{read_file, ConfigError, Configuration, ValidationReport, Violation, ViolationKind};
use crate::vehicle::{LevelProcess, RoadProcessParams, RoadTimeline, Segment, TorLeads, AD_LEVEL};

/// Ground-truth parameters the vehicle side maintains.
pub const KNOWN_PARAMETERS: [&str; 5] = [
    "speed",
    "automation_level",
    "ad_available",
    "road_condition",
    "tor_mode",
];

const ALL_LEVELS: [u8; 5] = [0, 1, 2, 3, 4];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segment: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_level: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level: Vec<LevelProcess>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RoadSource {
    Fixed(RoadTimeline),
    Process(RoadProcessParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    #[serde(default)]
    pub initial_level: u8,
    #[serde(default = "default_tor60")]
    pub tor60_lead: f64,
    #[serde(default = "default_tor10")]
    pub tor10_lead: f64,
}

fn default_tor60() -> f64 {
    60.0
}

fn default_tor10() -> f64 {
    10.0
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self {
            initial_level: 0,
            tor60_lead: default_tor60(),
            tor10_lead: default_tor10(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedPoint {
    pub at: f64,
    pub kmh: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSpec {
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default)]
    pub points: Vec<SpeedPoint>,
}

fn default_resolution() -> f64 {
    1.0
}

impl Default for SpeedSpec {
    fn default() -> Self {
        Self {
            resolution: default_resolution(),
            period: None,
            points: Vec::new(),
        }
    }
}

impl SpeedSpec {
    /// The k-th change of the script: time and new speed. Change 0 is the
    /// initial value at t = 0.
    pub fn change(&self, k: u64) -> Option<(f64, f64)> {
        let n = self.points.len() as u64;
        if n == 0 {
            return None;
        }
        match self.period {
            Some(period) => {
                let p = self.points[(k % n) as usize];
                Some(((k / n) as f64 * period + p.at, p.kmh))
            }
            None => self.points.get(k as usize).map(|p| (p.at, p.kmh)),
        }
    }

    pub fn bucket(&self, kmh: f64) -> ParamValue {
        (kmh / self.resolution).round() as ParamValue
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwarenessSpec {
    #[serde(default)]
    pub parameters: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CognitiveFunctionSpec {
    pub name: String,
    pub mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reaction {
    pub parameter: String,
    pub value: ParamValue,
    pub task: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u8>>,
}

impl Reaction {
    pub fn enabled_in(&self, level: u8) -> bool {
        self.levels.as_ref().is_none_or(|l| l.contains(&level))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandAction {
    SwitchUp,
    SwitchDown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Command {
    pub task: String,
    pub action: CommandAction,
    pub level: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bindings {
    #[serde(default)]
    pub level_change: Vec<String>,
    #[serde(default)]
    pub level_entered: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub ad_available: Vec<String>,
    #[serde(default)]
    pub availability_change: Vec<String>,
    #[serde(default)]
    pub tor60: Vec<String>,
    #[serde(default)]
    pub tor10: Vec<String>,
    #[serde(default)]
    pub switch_rejected: Vec<String>,
}

impl Bindings {
    pub fn lists(&self) -> impl Iterator<Item = (String, &Vec<String>)> {
        [
            ("level_change", &self.level_change),
            ("ad_available", &self.ad_available),
            ("availability_change", &self.availability_change),
            ("tor60", &self.tor60),
            ("tor10", &self.tor10),
            ("switch_rejected", &self.switch_rejected),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .chain(
            self.level_entered
                .iter()
                .map(|(k, v)| (format!("level_entered.{k}"), v)),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub road: RoadSpec,
    #[serde(default)]
    pub vehicle: VehicleSpec,
    #[serde(default)]
    pub speed: SpeedSpec,
    #[serde(default)]
    pub awareness: AwarenessSpec,
    #[serde(default, rename = "cognitive_function")]
    pub cognitive_functions: Vec<CognitiveFunctionSpec>,
    #[serde(default, rename = "reaction")]
    pub reactions: Vec<Reaction>,
    #[serde(default, rename = "command")]
    pub commands: Vec<Command>,
    #[serde(default)]
    pub bindings: Bindings,
}

fn scenario_violation(message: String) -> Violation {
    Violation::new(ViolationKind::Scenario, Some("scenario".to_owned()), message)
}

impl Scenario {
    pub fn parse(text: &str, name: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario = toml::from_str(text).map_err(|source| ConfigError::Toml {
            file: name.to_owned(),
            source,
        })?;
        let violations = scenario.check();
        if violations.is_empty() {
            Ok(scenario)
        } else {
            Err(ConfigError::Invalid(ValidationReport { violations }))
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read_file(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn tor_leads(&self) -> TorLeads {
        TorLeads {
            tor60: self.vehicle.tor60_lead,
            tor10: self.vehicle.tor10_lead,
        }
    }

    pub fn road_source(&self) -> Result<RoadSource, String> {
        match (self.road.segment.is_empty(), self.road.level.is_empty()) {
            (false, true) => {
                let horizon = self.road.segment.last().map(|s| s.end).unwrap_or(0.0);
                RoadTimeline::new(self.road.segment.clone(), horizon)
                    .map(RoadSource::Fixed)
                    .map_err(|e| e.to_string())
            }
            (true, false) => {
                let params = RoadProcessParams {
                    initial_level: self.road.initial_level.ok_or("road process needs `initial_level`")?,
                    levels: self.road.level.clone(),
                };
                params.validate().map_err(|e| e.to_string())?;
                Ok(RoadSource::Process(params))
            }
            (true, true) => Err("road needs either `segment` entries or a `level` process".into()),
            (false, false) => Err("road cannot mix fixed `segment`s with a `level` process".into()),
        }
    }

    pub fn cognitive_function(
        &self,
        spec: &CognitiveFunctionSpec,
        config: &Configuration,
    ) -> Option<CognitiveFunction> {
        let target_task = match &spec.task {
            Some(t) => t.clone(),
            None => {
                let mut named = config
                    .tasks
                    .iter()
                    .filter(|t| t.cognitive_function_trigger.as_deref() == Some(spec.name.as_str()));
                let first = named.next()?;
                if named.next().is_some() {
                    return None;
                }
                first.name.clone()
            }
        };
        Some(CognitiveFunction {
            name: spec.name.clone(),
            mean_interval: spec.mean,
            sigma: spec.sigma.unwrap_or(spec.mean / 4.0),
            target_task,
            enabled_in_levels: spec.levels.clone().unwrap_or_else(|| ALL_LEVELS.to_vec()),
        })
    }

    /// Checks that do not depend on the task configuration.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Err(e) = self.road_source() {
            out.push(scenario_violation(format!("road: {e}")));
        }
        let v = &self.vehicle;
        if v.initial_level > AD_LEVEL {
            out.push(scenario_violation(format!(
                "vehicle.initial_level {} > 4",
                v.initial_level
            )));
        }
        if !(v.tor60_lead > 0.0 && v.tor10_lead > 0.0 && v.tor10_lead <= v.tor60_lead) {
            out.push(scenario_violation(format!(
                "TOR leads must satisfy 0 < tor10 <= tor60, got {} / {}",
                v.tor10_lead, v.tor60_lead
            )));
        }
        let s = &self.speed;
        if !(s.resolution > 0.0 && s.resolution.is_finite()) {
            out.push(scenario_violation(format!(
                "speed.resolution must be > 0, got {}",
                s.resolution
            )));
        }
        if let Some(first) = s.points.first() {
            if first.at != 0.0 {
                out.push(scenario_violation("speed.points must start at 0".into()));
            }
        }
        if s.points.windows(2).any(|w| !(w[1].at > w[0].at)) {
            out.push(scenario_violation(
                "speed.points must be strictly increasing in `at`".into(),
            ));
        }
        if let (Some(period), Some(last)) = (s.period, s.points.last()) {
            if !(period > last.at) {
                out.push(scenario_violation(format!(
                    "speed.period {period} must exceed the last point"
                )));
            }
        }
        let mut params = BTreeSet::new();
        for p in &self.awareness.parameters {
            if !KNOWN_PARAMETERS.contains(&p.as_str()) {
                out.push(scenario_violation(format!(
                    "awareness parameter `{p}` has no ground-truth counterpart (known: {})",
                    KNOWN_PARAMETERS.join(", ")
                )));
            }
            if !params.insert(p) {
                out.push(scenario_violation(format!("awareness parameter `{p}` listed twice")));
            }
        }
        let mut names = BTreeSet::new();
        for cf in &self.cognitive_functions {
            if !names.insert(&cf.name) {
                out.push(scenario_violation(format!(
                    "cognitive function `{}` defined twice",
                    cf.name
                )));
            }
            if !(cf.mean > 0.0 && cf.mean.is_finite()) {
                out.push(scenario_violation(format!(
                    "cognitive function `{}`: mean must be > 0",
                    cf.name
                )));
            }
            if cf.sigma.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
                out.push(scenario_violation(format!(
                    "cognitive function `{}`: sigma must be >= 0",
                    cf.name
                )));
            }
        }
        let level_lists = self
            .cognitive_functions
            .iter()
            .filter_map(|c| c.levels.as_ref())
            .chain(self.reactions.iter().filter_map(|r| r.levels.as_ref()));
        for levels in level_lists {
            if levels.iter().any(|&l| l > AD_LEVEL) {
                out.push(scenario_violation(format!("levels {levels:?} contain a level above 4")));
            }
        }
        for r in &self.reactions {
            if !params.contains(&r.parameter) {
                out.push(scenario_violation(format!(
                    "reaction on untracked parameter `{}`",
                    r.parameter
                )));
            }
        }
        for c in &self.commands {
            if c.level > AD_LEVEL {
                out.push(scenario_violation(format!(
                    "command for `{}` targets level {}",
                    c.task, c.level
                )));
            }
        }
        for key in self.bindings.level_entered.keys() {
            if key.parse::<u8>().map_or(true, |l| l > AD_LEVEL) {
                out.push(scenario_violation(format!(
                    "bindings.level_entered key `{key}` is not a level"
                )));
            }
        }
        out
    }

    /// Cross-references against a task configuration. Binding entries naming
    /// absent tasks are warnings: the machine simply does not emit them.
    pub fn validate_against(&self, config: &Configuration) -> (Vec<Violation>, Vec<String>) {
        let mut out = self.check();
        let mut warnings = Vec::new();
        let has = |name: &str| config.task(name).is_some();

        for spec in &self.cognitive_functions {
            match self.cognitive_function(spec, config) {
                Some(cf) if has(&cf.target_task) => {}
                Some(cf) => out.push(scenario_violation(format!(
                    "cognitive function `{}` targets unknown task `{}`",
                    spec.name, cf.target_task
                ))),
                None => out.push(scenario_violation(format!(
                    "cognitive function `{}` has no `task` and no unique task names it",
                    spec.name
                ))),
            }
        }
        for task in &config.tasks {
            if let Some(cf) = &task.cognitive_function_trigger {
                if !self.cognitive_functions.iter().any(|c| &c.name == cf) {
                    out.push(Violation::new(
                        ViolationKind::Scenario,
                        Some(format!("task {}", task.name)),
                        format!("cognitive function `{cf}` is not defined in the scenario"),
                    ));
                }
            }
            if let Some(p) = &task.awareness_parameter {
                if !self.awareness.parameters.contains(p) {
                    out.push(Violation::new(
                        ViolationKind::Scenario,
                        Some(format!("task {}", task.name)),
                        format!("awareness parameter `{p}` is not a tracked ground-truth parameter"),
                    ));
                }
            }
        }
        for r in &self.reactions {
            if !has(&r.task) {
                out.push(scenario_violation(format!(
                    "reaction requests unknown task `{}`",
                    r.task
                )));
            }
        }
        for c in &self.commands {
            if !has(&c.task) {
                out.push(scenario_violation(format!(
                    "command bound to unknown task `{}`",
                    c.task
                )));
            }
        }
        for (list, tasks) in self.bindings.lists() {
            for t in tasks {
                if !has(t) {
                    warnings.push(format!(
                        "bindings.{list}: task `{t}` is not in the configuration and is skipped"
                    ));
                }
            }
        }
        (out, warnings)
    }
}
