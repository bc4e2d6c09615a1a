use serde::Serialize;

use super::road::{RoadTimeline, AD_LEVEL};
use crate::engine::{EngineError, EventCalendar, EventHandle, EventKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorKind {
    Tor60,
    Tor10,
}

/// Lead times of the two take-over warnings, seconds before AD ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorLeads {
    pub tor60: f64,
    pub tor10: f64,
}

impl Default for TorLeads {
    fn default() -> Self {
        Self {
            tor60: 60.0,
            tor10: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorPlan {
    pub kind: TorKind,
    pub time: f64,
    /// Instant AD stops being available.
    pub boundary: f64,
    pub segment_start: f64,
}

/// One warning pair per boundary where AD availability ends inside the
/// horizon, each clamped to the start of the AD segment.
pub fn plan_tor(timeline: &RoadTimeline, leads: TorLeads) -> Vec<TorPlan> {
    let mut plans = Vec::new();
    for pair in timeline.segments().windows(2) {
        let (seg, next) = (pair[0], pair[1]);
        if seg.max_level >= AD_LEVEL && next.max_level < AD_LEVEL {
            for (kind, lead) in [(TorKind::Tor60, leads.tor60), (TorKind::Tor10, leads.tor10)] {
                plans.push(TorPlan {
                    kind,
                    time: (seg.end - lead).max(seg.start),
                    boundary: seg.end,
                    segment_start: seg.start,
                });
            }
        }
    }
    plans.sort_by(|a, b| a.time.total_cmp(&b.time));
    plans
}

/// Schedules every planned warning as a vehicle-transition event. Whether a
/// warning emits anything is decided when it fires.
pub fn schedule_tor<P>(
    timeline: &RoadTimeline,
    leads: TorLeads,
    calendar: &mut EventCalendar<P>,
    mut payload: impl FnMut(&TorPlan) -> P,
) -> Result<Vec<(TorPlan, EventHandle)>, EngineError> {
    let clock = calendar.clock();
    plan_tor(timeline, leads)
        .into_iter()
        .filter(|p| p.time >= clock)
        .map(|p| {
            let handle = calendar.schedule(p.time, EventKind::VehicleTransition, payload(&p))?;
            Ok((p, handle))
        })
        .collect()
}
