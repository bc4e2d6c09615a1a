//! Cognitive functions, the driver's memory of the world, and situation
//! awareness.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::task::Task;

/// Shortest interval a cognitive function may schedule, seconds.
pub const MIN_TRIGGER_INTERVAL: f64 = 0.001;

/// Discretized parameter value. Beliefs and ground truth compare exactly.
pub type ParamValue = i64;

/// A stochastic habit such as "check the speed about every 20 seconds".
#[derive(Clone, Debug, PartialEq)]
pub struct CognitiveFunction {
    pub name: String,
    pub mean_interval: f64,
    pub sigma: f64,
    pub target_task: String,
    /// Automation levels in which a firing requests the task.
    pub enabled_in_levels: Vec<u8>,
}

impl CognitiveFunction {
    pub fn enabled_in(&self, level: u8) -> bool {
        self.enabled_in_levels.contains(&level)
    }

    /// Time of the next firing: `now + max(ε, N(mean, sigma²))`.
    pub fn next_trigger<R: Rng + ?Sized>(&self, rng: &mut R, now: f64) -> f64 {
        if self.sigma == 0.0 {
            return now + self.mean_interval.max(MIN_TRIGGER_INTERVAL);
        }
        let normal = Normal::new(self.mean_interval, self.sigma).expect("sigma validated finite and >= 0");
        now + normal.sample(rng).max(MIN_TRIGGER_INTERVAL)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Belief {
    pub value: ParamValue,
    pub updated_at: f64,
}

/// Actual values of the tracked parameters, maintained by the vehicle side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundTruth {
    values: BTreeMap<String, ParamValue>,
}

impl GroundTruth {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when the value changed.
    pub fn set(&mut self, param: &str, value: ParamValue) -> bool {
        match self.values.get_mut(param) {
            Some(v) if *v == value => false,
            Some(v) => {
                *v = value;
                true
            }
            None => {
                self.values.insert(param.to_owned(), value);
                true
            }
        }
    }

    pub fn get(&self, param: &str) -> Option<ParamValue> {
        self.values.get(param).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ParamValue)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoryUpdate {
    pub parameter: String,
    pub previous: ParamValue,
    pub value: ParamValue,
    pub time: f64,
}

/// What a completed task causes on the driver side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompletionEffects {
    pub memory_update: Option<MemoryUpdate>,
    /// Follow-up task to request at the same instant.
    pub follow_up: Option<String>,
}

/// The driver's beliefs about the tracked parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DriverMemory {
    beliefs: BTreeMap<String, Belief>,
}

impl DriverMemory {
    /// Starts with every tracked parameter believed at its true value.
    pub fn initialized<'a>(params: impl IntoIterator<Item = &'a str>, truth: &GroundTruth, now: f64) -> Self {
        let beliefs = params
            .into_iter()
            .map(|p| {
                let value = truth.get(p).unwrap_or_default();
                (p.to_owned(), Belief { value, updated_at: now })
            })
            .collect();
        Self { beliefs }
    }

    pub fn belief(&self, param: &str) -> Option<&Belief> {
        self.beliefs.get(param)
    }

    pub fn tracked(&self) -> impl Iterator<Item = &str> {
        self.beliefs.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    /// Applies a completed (not aborted, not queued) task.
    ///
    /// Parameters that are not tracked are left alone; load-time validation
    /// rejects tasks that point at unknown parameters.
    pub fn on_task_complete(&mut self, truth: &GroundTruth, task: &Task, now: f64) -> CompletionEffects {
        let memory_update = task.awareness_parameter.as_deref().and_then(|param| {
            let actual = truth.get(param)?;
            let belief = self.beliefs.get_mut(param)?;
            let previous = belief.value;
            belief.value = actual;
            belief.updated_at = now;
            Some(MemoryUpdate {
                parameter: param.to_owned(),
                previous,
                value: actual,
                time: now,
            })
        });
        CompletionEffects {
            memory_update,
            follow_up: task.triggers.clone(),
        }
    }

    /// Fraction of tracked parameters whose belief matches ground truth; 1 when
    /// nothing is tracked.
    pub fn awareness(&self, truth: &GroundTruth) -> f64 {
        awareness(self, truth)
    }
}

pub fn awareness(memory: &DriverMemory, truth: &GroundTruth) -> f64 {
    if memory.beliefs.is_empty() {
        return 1.0;
    }
    let matching = memory
        .beliefs
        .iter()
        .filter(|(p, b)| truth.get(p) == Some(b.value))
        .count();
    matching as f64 / memory.beliefs.len() as f64
}
