//! Discrete-event kernel: event calendar, clock and seeded random streams.

mod calendar;
mod streams;

pub use calendar::{DispatchError, EngineError, EventCalendar, EventHandle, EventKind, RunError, SimEvent};
pub use streams::RandomStreams;
