//! Road availability, the adaptive automation state machine and take-over
//! requests.

mod road;
mod state;
mod tor;

pub use road::{
    generate_timeline, Dwell, LevelProcess, NextLevel, RoadError, RoadProcessParams, RoadTimeline, Segment, AD_LEVEL,
};
pub use state::{TorMode, TransitionOutcome, VehicleEvent, VehicleSignal, VehicleState};
pub use tor::{plan_tor, schedule_tor, TorKind, TorLeads, TorPlan};
