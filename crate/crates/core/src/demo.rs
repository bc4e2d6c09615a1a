//! Bundled synthetic cockpit: a base HMI and the same HMI after three
//! design moves, sharing one scenario.

use crate::scenario::Scenario;
use crate::task::{ConfigError, ConfigSources, Configuration};

pub const ELEMENTS: &str = include_str!("../data/demo/elements.toml");
pub const BASE_TASKS: &str = include_str!("../data/demo/base_tasks.csv");
pub const OPTIMIZED_TASKS: &str = include_str!("../data/demo/optimized_tasks.csv");
pub const SCENARIO: &str = include_str!("../data/demo/scenario.toml");
pub const PLAN: &str = include_str!("../data/demo/plan.toml");

pub const SCRIPTED_ELEMENTS: &str = include_str!("../data/scripted/elements.toml");
pub const SCRIPTED_TASKS: &str = include_str!("../data/scripted/tasks.csv");
pub const SCRIPTED_SCENARIO: &str = include_str!("../data/scripted/scenario.toml");

fn load(tasks: &str, name: &str, elements: &str) -> Result<Configuration, ConfigError> {
    let mut sources = ConfigSources::new(tasks, elements, None);
    sources.tasks_name = name;
    Ok(sources.load()?.config)
}

pub fn base() -> Result<Configuration, ConfigError> {
    load(BASE_TASKS, "base_tasks.csv", ELEMENTS)
}

pub fn optimized() -> Result<Configuration, ConfigError> {
    load(OPTIMIZED_TASKS, "optimized_tasks.csv", ELEMENTS)
}

pub fn scenario() -> Result<Scenario, ConfigError> {
    Scenario::parse(SCENARIO, "scenario.toml")
}

/// Fully deterministic 100 s drive used as a hand-computed oracle.
pub fn scripted() -> Result<(Configuration, Scenario), ConfigError> {
    Ok((
        load(SCRIPTED_TASKS, "tasks.csv", SCRIPTED_ELEMENTS)?,
        Scenario::parse(SCRIPTED_SCENARIO, "scenario.toml")?,
    ))
}
