//! Task schema, workload scale, interface-element catalog and configuration
//! loading.

mod channel;
mod element;
mod load;
mod model;
mod scale;

pub use channel::{AttentionalChannel, Initiator, ScaleCategory, UnknownName};
pub use element::{ElementCatalog, ElementFile, InterfaceElement, ScaleEntry, ScaleFile};
pub(crate) use load::read_file;
pub use load::{load_configuration, write_tasks_csv, ConfigError, ConfigSources, Loaded, TASK_COLUMNS};
pub use model::{validate, Configuration, Task, ValidationReport, Violation, ViolationKind, WORKLOAD_CAP};
pub use scale::{ScaleError, WorkloadScale};

#[cfg(test)]
pub(crate) use model::fixtures;
