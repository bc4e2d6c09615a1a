use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a scheduled event stands for. The kernel never interprets it; it is
/// carried into the fired-event trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Trigger,
    TaskStart,
    TaskEnd,
    TaskAbort,
    RoadChange,
    VehicleTransition,
    MemoryUpdate,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Trigger => "trigger",
            EventKind::TaskStart => "task-start",
            EventKind::TaskEnd => "task-end",
            EventKind::TaskAbort => "task-abort",
            EventKind::RoadChange => "road-change",
            EventKind::VehicleTransition => "vehicle-transition",
            EventKind::MemoryUpdate => "memory-update",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimEvent<P> {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
    pub payload: P,
}

/// Total order over pending events: time first, insertion sequence second.
#[derive(Clone, Copy, Debug)]
struct EventKey {
    time: f64,
    sequence: u64,
}

impl PartialEq for EventKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EventKey {}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.sequence.cmp(&other.sequence))
    }
}

/// Returned by [`EventCalendar::schedule`]; identifies one pending event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventHandle(EventKey);

impl EventHandle {
    pub fn time(&self) -> f64 {
        self.0.time
    }

    pub fn sequence(&self) -> u64 {
        self.0.sequence
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("cannot schedule {kind} at t={time} before the clock (t={clock})")]
    InThePast { kind: EventKind, time: f64, clock: f64 },
    #[error("event time {0} is not finite")]
    NonFinite(f64),
    #[error("cannot run until t={target}: clock is already at t={clock}")]
    EndBeforeClock { target: f64, clock: f64 },
}

/// A dispatcher failure, tagged with the event that was being handled.
#[derive(Debug, Error)]
#[error("dispatch failed at t={time} (seq {sequence}, {kind}, {payload}): {source}")]
pub struct DispatchError<E: std::error::Error + 'static> {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
    pub payload: String,
    #[source]
    pub source: E,
}

#[derive(Debug, Error)]
pub enum RunError<E: std::error::Error + 'static> {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Dispatch(DispatchError<E>),
}

/// Continuous-time event calendar.
///
/// Events fire in ascending `(time, sequence)` order, so simultaneous events
/// fire in the order they were scheduled. The clock only moves forward.
#[derive(Debug)]
pub struct EventCalendar<P> {
    pending: BTreeMap<EventKey, (EventKind, P)>,
    clock: f64,
    next_sequence: u64,
}

impl<P> Default for EventCalendar<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventCalendar<P> {
    pub fn new() -> Self {
        Self {
            pending: BTreeMap::new(),
            clock: 0.0,
            next_sequence: 0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind, payload: P) -> Result<EventHandle, EngineError> {
        if !time.is_finite() {
            return Err(EngineError::NonFinite(time));
        }
        if time < self.clock {
            return Err(EngineError::InThePast {
                kind,
                time,
                clock: self.clock,
            });
        }
        let key = EventKey {
            time,
            sequence: self.next_sequence,
        };
        self.next_sequence += 1;
        self.pending.insert(key, (kind, payload));
        Ok(EventHandle(key))
    }

    /// Removes a pending event. Returns false if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.pending.remove(&handle.0).is_some()
    }

    pub fn is_pending(&self, handle: EventHandle) -> bool {
        self.pending.contains_key(&handle.0)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.pending.keys().next().map(|k| k.time)
    }

    /// Pops the minimal event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<SimEvent<P>> {
        let (key, (kind, payload)) = self.pending.pop_first()?;
        self.clock = key.time;
        Some(SimEvent {
            time: key.time,
            sequence: key.sequence,
            kind,
            payload,
        })
    }

    /// Fires every event with `time <= t_end` (inclusive), including events the
    /// dispatcher schedules along the way, then sets the clock to `t_end`.
    pub fn run_until<E, F>(&mut self, t_end: f64, mut dispatcher: F) -> Result<Vec<SimEvent<P>>, RunError<E>>
    where
        P: Clone + fmt::Debug,
        E: std::error::Error + 'static,
        F: FnMut(&mut Self, &SimEvent<P>) -> Result<(), E>,
    {
        if !t_end.is_finite() {
            return Err(EngineError::NonFinite(t_end).into());
        }
        if t_end < self.clock {
            return Err(EngineError::EndBeforeClock {
                target: t_end,
                clock: self.clock,
            }
            .into());
        }
        let mut trace = Vec::new();
        while self.peek_time().is_some_and(|t| t <= t_end) {
            let event = self.pop().expect("peeked event");
            if let Err(source) = dispatcher(self, &event) {
                return Err(RunError::Dispatch(DispatchError {
                    time: event.time,
                    sequence: event.sequence,
                    kind: event.kind,
                    payload: format!("{:?}", event.payload),
                    source,
                }));
            }
            trace.push(event);
        }
        self.clock = t_end;
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[derive(Debug, Error)]
    #[error("boom")]
    struct Boom;

    fn run_all(cal: &mut EventCalendar<&'static str>, t_end: f64) -> Vec<SimEvent<&'static str>> {
        cal.run_until(t_end, |_, _| Ok::<_, Infallible>(())).unwrap()
    }

    #[test]
    fn schedule_into_empty_calendar() {
        let mut cal = EventCalendar::new();
        cal.schedule(5.0, EventKind::Trigger, "a").unwrap();
        assert_eq!(cal.len(), 1);
    }

    #[test]
    fn simultaneous_events_pop_fifo() {
        let mut cal = EventCalendar::new();
        cal.schedule(5.0, EventKind::Trigger, "A").unwrap();
        cal.schedule(5.0, EventKind::Trigger, "B").unwrap();
        assert_eq!(cal.pop().unwrap().payload, "A");
        assert_eq!(cal.pop().unwrap().payload, "B");
    }

    #[test]
    fn scheduling_in_the_past_is_rejected() {
        let mut cal = EventCalendar::new();
        cal.run_until(4.0, |_, _| Ok::<_, Infallible>(())).unwrap();
        let err = cal.schedule(3.0, EventKind::Trigger, "late").unwrap_err();
        assert!(matches!(err, EngineError::InThePast { .. }));
        assert!(cal.schedule(f64::NAN, EventKind::Trigger, "nan").is_err());
    }

    #[test]
    fn cancel_semantics() {
        let mut cal = EventCalendar::new();
        let a = cal.schedule(1.0, EventKind::Trigger, "a").unwrap();
        let b = cal.schedule(2.0, EventKind::Trigger, "b").unwrap();
        assert!(cal.cancel(a));
        assert_eq!(cal.len(), 1);
        assert!(!cal.cancel(a));
        run_all(&mut cal, 3.0);
        assert!(!cal.cancel(b));
    }

    #[test]
    fn empty_run_advances_clock() {
        let mut cal: EventCalendar<&str> = EventCalendar::new();
        assert!(run_all(&mut cal, 10.0).is_empty());
        assert_eq!(cal.clock(), 10.0);
    }

    #[test]
    fn dispatcher_can_chain_events() {
        let mut cal = EventCalendar::new();
        cal.schedule(1.0, EventKind::Trigger, "first").unwrap();
        let trace = cal
            .run_until(10.0, |cal, ev| {
                if ev.payload == "first" {
                    cal.schedule(2.0, EventKind::Trigger, "second").expect("future");
                }
                Ok::<_, Infallible>(())
            })
            .unwrap();
        let names: Vec<_> = trace.iter().map(|e| (e.time, e.payload)).collect();
        assert_eq!(names, vec![(1.0, "first"), (2.0, "second")]);
    }

    #[test]
    fn end_boundary_is_inclusive() {
        let mut cal = EventCalendar::new();
        cal.schedule(10.0, EventKind::Trigger, "edge").unwrap();
        cal.schedule(10.5, EventKind::Trigger, "after").unwrap();
        let trace = run_all(&mut cal, 10.0);
        assert_eq!(trace.len(), 1);
        assert_eq!(cal.len(), 1);
        assert_eq!(cal.clock(), 10.0);
    }

    #[test]
    fn dispatcher_error_names_the_event() {
        let mut cal = EventCalendar::new();
        cal.schedule(3.0, EventKind::TaskEnd, "speed-check").unwrap();
        let err = cal.run_until(5.0, |_, _| Err(Boom)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t=3"), "{msg}");
        assert!(msg.contains("task-end"), "{msg}");
        assert!(msg.contains("speed-check"), "{msg}");
    }

    #[test]
    fn run_until_rejects_going_backwards() {
        let mut cal: EventCalendar<()> = EventCalendar::new();
        run_all_unit(&mut cal, 5.0);
        assert!(cal.run_until(1.0, |_, _| Ok::<_, Infallible>(())).is_err());
    }

    fn run_all_unit(cal: &mut EventCalendar<()>, t: f64) {
        cal.run_until(t, |_, _| Ok::<_, Infallible>(())).unwrap();
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fired_order_is_strictly_increasing(times in proptest::collection::vec(0.0f64..100.0, 0..64)) {
                let mut cal = EventCalendar::new();
                for &t in &times {
                    cal.schedule(t, EventKind::Trigger, ()).unwrap();
                }
                let trace = cal.run_until(100.0, |_, _| Ok::<_, Infallible>(())).unwrap();
                prop_assert_eq!(trace.len(), times.len());
                for pair in trace.windows(2) {
                    let a = EventKey { time: pair[0].time, sequence: pair[0].sequence };
                    let b = EventKey { time: pair[1].time, sequence: pair[1].sequence };
                    prop_assert!(a < b);
                }
            }
        }
    }
}
