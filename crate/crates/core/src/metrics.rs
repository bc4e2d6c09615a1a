//! Trial indicators, the per-event trace and its offline replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attention::{AbortReason, InstanceId, LoadSnapshot, CAP_EPSILON};
use crate::task::{AttentionalChannel, Configuration, Initiator, InterfaceElement, Task, WORKLOAD_CAP};

pub const LEVELS: usize = 5;

/// Off-road time of one completed execution: both gaze transitions plus the
/// task itself, for visual tasks at off-road elements only.
pub fn eyes_off_seconds(task: &Task, element: &InterfaceElement) -> f64 {
    if task.perception_type == AttentionalChannel::Visual && !element.on_road {
        task.total_time()
    } else {
        0.0
    }
}

/// Exact integral of a piecewise-constant signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepIntegral {
    last: f64,
    value: f64,
    integral: f64,
}

impl StepIntegral {
    pub fn new(start: f64, value: f64) -> Self {
        Self {
            last: start,
            value,
            integral: 0.0,
        }
    }

    pub fn advance(&mut self, t: f64) {
        if t > self.last {
            self.integral += self.value * (t - self.last);
            self.last = t;
        }
    }

    pub fn set(&mut self, t: f64, value: f64) {
        self.advance(t);
        self.value = value;
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        self.integral + self.value * (t - self.last).max(0.0)
    }
}

/// Overload seconds from load snapshots plus abort contributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverloadAccumulator {
    cognitive: StepIntegral,
    perceptual: StepIntegral,
    abort_cognitive: f64,
    abort_perceptual: f64,
}

impl OverloadAccumulator {
    pub fn new(start: f64) -> Self {
        Self {
            cognitive: StepIntegral::new(start, 0.0),
            perceptual: StepIntegral::new(start, 0.0),
            abort_cognitive: 0.0,
            abort_perceptual: 0.0,
        }
    }

    /// Records the load that holds from `t` on.
    pub fn observe(&mut self, t: f64, load: &LoadSnapshot) {
        self.observe_flags(t, load.cognitive_overloaded(), load.perceptual_overloaded());
    }

    pub fn observe_flags(&mut self, t: f64, cognitive: bool, perceptual: bool) {
        self.cognitive.set(t, f64::from(u8::from(cognitive)));
        self.perceptual.set(t, f64::from(u8::from(perceptual)));
    }

    pub fn abort(&mut self, reason: AbortReason, total_time: f64) {
        match reason {
            AbortReason::CognitiveCap => self.abort_cognitive += total_time,
            AbortReason::ChannelConflict | AbortReason::PerceptualCap => self.abort_perceptual += total_time,
        }
    }

    /// (cognitive seconds, perceptual seconds) up to `t_end`.
    pub fn seconds(&self, t_end: f64) -> (f64, f64) {
        (
            self.cognitive.integral_to(t_end) + self.abort_cognitive,
            self.perceptual.integral_to(t_end) + self.abort_perceptual,
        )
    }
}

/// Overload seconds over `[snapshots[0].0, t_end]`. Each snapshot holds until
/// the next one; aborts are `(reason, total_time)`.
pub fn accrue_overload(snapshots: &[(f64, LoadSnapshot)], aborts: &[(AbortReason, f64)], t_end: f64) -> (f64, f64) {
    let start = snapshots.first().map_or(t_end, |s| s.0);
    let mut acc = OverloadAccumulator::new(start);
    for (t, load) in snapshots {
        acc.observe(*t, load);
    }
    for &(reason, total) in aborts {
        acc.abort(reason, total);
    }
    acc.seconds(t_end)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCounts {
    pub triggered: u64,
    pub executed: u64,
    pub queued: u64,
    pub aborted: u64,
    /// Requests merged into an entry already waiting.
    pub coalesced: u64,
}

impl TaskCounts {
    pub fn add(&mut self, other: &TaskCounts) {
        self.triggered += other.triggered;
        self.executed += other.executed;
        self.queued += other.queued;
        self.aborted += other.aborted;
        self.coalesced += other.coalesced;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub trial_length: f64,
    pub eyes_off_fraction: f64,
    pub cognitive_overload_fraction: f64,
    pub perceptual_overload_fraction: f64,
    pub sa_average: f64,
    pub per_task_counts: BTreeMap<String, TaskCounts>,
    /// Eyes-off split by the automation level at completion, % of trial.
    pub eyes_off_by_level: [f64; LEVELS],
    /// Share of the trial spent in each automation level, %.
    pub time_in_level: [f64; LEVELS],
}

impl TrialMetrics {
    pub fn in_range(&self) -> bool {
        [
            self.eyes_off_fraction,
            self.cognitive_overload_fraction,
            self.perceptual_overload_fraction,
            self.sa_average,
        ]
        .iter()
        .all(|v| v.is_finite() && (0.0..=100.0 + 1e-9).contains(v))
    }
}

/// Trial-owned accumulation of every indicator.
#[derive(Clone, Debug)]
pub struct TrialCollector {
    overload: OverloadAccumulator,
    awareness: StepIntegral,
    levels: [StepIntegral; LEVELS],
    level: u8,
    eyes_off: f64,
    eyes_off_by_level: [f64; LEVELS],
    counts: Vec<TaskCounts>,
}

impl TrialCollector {
    pub fn new(task_count: usize, awareness: f64, level: u8) -> Self {
        let mut levels = [StepIntegral::new(0.0, 0.0); LEVELS];
        levels[level as usize] = StepIntegral::new(0.0, 1.0);
        Self {
            overload: OverloadAccumulator::new(0.0),
            awareness: StepIntegral::new(0.0, awareness),
            levels,
            level,
            eyes_off: 0.0,
            eyes_off_by_level: [0.0; LEVELS],
            counts: vec![TaskCounts::default(); task_count],
        }
    }

    /// State holding from `t` on.
    pub fn observe(&mut self, t: f64, load: &LoadSnapshot, awareness: f64, level: u8) {
        self.overload.observe(t, load);
        self.awareness.set(t, awareness);
        if level != self.level {
            self.levels[self.level as usize].set(t, 0.0);
            self.levels[level as usize].set(t, 1.0);
            self.level = level;
        }
    }

    pub fn counts_mut(&mut self, task: usize) -> &mut TaskCounts {
        &mut self.counts[task]
    }

    pub fn abort(&mut self, task: usize, reason: AbortReason, total_time: f64) {
        self.counts[task].aborted += 1;
        self.overload.abort(reason, total_time);
    }

    pub fn complete(&mut self, task: usize, eyes_off: f64, level: u8) {
        self.counts[task].executed += 1;
        self.eyes_off += eyes_off;
        self.eyes_off_by_level[level as usize] += eyes_off;
    }

    pub fn eyes_off_seconds(&self) -> f64 {
        self.eyes_off
    }

    pub fn finalize(&self, config: &Configuration, seed: u64, trial_length: f64) -> TrialMetrics {
        let pct = |s: f64| s / trial_length * 100.0;
        let (cog, perc) = self.overload.seconds(trial_length);
        TrialMetrics {
            seed,
            trial_length,
            eyes_off_fraction: pct(self.eyes_off),
            cognitive_overload_fraction: pct(cog),
            perceptual_overload_fraction: pct(perc),
            sa_average: pct(self.awareness.integral_to(trial_length)),
            per_task_counts: config
                .tasks
                .iter()
                .zip(&self.counts)
                .map(|(t, c)| (t.name.clone(), *c))
                .collect(),
            eyes_off_by_level: self.eyes_off_by_level.map(pct),
            time_in_level: self.levels.map(|l| pct(l.integral_to(trial_length))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Trigger,
    TaskQueued,
    TaskStart,
    TaskEnd,
    TaskAbort,
    RoadChange,
    VehicleTransition,
    SwitchRejected,
    Tor60,
    Tor10,
    MemoryUpdate,
    SpeedChange,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Trigger => "trigger",
            TraceKind::TaskQueued => "task-queued",
            TraceKind::TaskStart => "task-start",
            TraceKind::TaskEnd => "task-end",
            TraceKind::TaskAbort => "task-abort",
            TraceKind::RoadChange => "road-change",
            TraceKind::VehicleTransition => "vehicle-transition",
            TraceKind::SwitchRejected => "switch-rejected",
            TraceKind::Tor60 => "tor60",
            TraceKind::Tor10 => "tor10",
            TraceKind::MemoryUpdate => "memory-update",
            TraceKind::SpeedChange => "speed-change",
        }
    }
}

/// One line of the timeline trace. Field order is the export order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: TraceKind,
    /// Task, cognitive function, parameter or vehicle item concerned.
    pub subject: String,
    pub instance: Option<InstanceId>,
    pub detail: String,
    pub cognitive_sum: f64,
    pub perceptual_sum: f64,
    pub awareness: f64,
    pub level: u8,
    pub road_max: u8,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("cannot aggregate an empty list of trials")]
    Empty,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimelineTrace {
    pub records: Vec<TraceRecord>,
}

impl TimelineTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|source| TraceError::Parse { line: i + 1, source }))
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn is_time_ordered(&self) -> bool {
        self.records.windows(2).all(|w| w[0].time <= w[1].time)
    }
}

/// Indicators and safety findings rebuilt from a trace and the task table
/// alone, independent of the simulator's own accumulation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReplayReport {
    pub eyes_off_seconds: f64,
    pub cognitive_overload_seconds: f64,
    pub perceptual_overload_seconds: f64,
    pub awareness_integral: f64,
    pub max_active_cognitive: f64,
    pub max_active_perceptual: f64,
    /// Instants where one channel held two active tasks.
    pub channel_collisions: usize,
    /// Instants where an active sum exceeded the cap.
    pub cap_violations: usize,
    pub machine_queued: usize,
    pub driver_aborted: usize,
    /// Records naming unknown tasks or instances.
    pub inconsistencies: usize,
    pub completed: usize,
}

impl ReplayReport {
    pub fn is_safe(&self) -> bool {
        self.channel_collisions == 0
            && self.cap_violations == 0
            && self.machine_queued == 0
            && self.driver_aborted == 0
            && self.inconsistencies == 0
    }
}

pub fn replay(trace: &TimelineTrace, config: &Configuration, trial_length: f64) -> ReplayReport {
    let mut report = ReplayReport::default();
    let mut active: BTreeMap<InstanceId, &Task> = BTreeMap::new();
    let mut queued: BTreeMap<InstanceId, &Task> = BTreeMap::new();
    let mut awareness = StepIntegral::new(0.0, trace.records.first().map_or(1.0, |r| r.awareness));
    let mut overload = OverloadAccumulator::new(0.0);

    for r in &trace.records {
        let task = config.task(&r.subject);
        let is_task_record = matches!(
            r.kind,
            TraceKind::TaskQueued | TraceKind::TaskStart | TraceKind::TaskEnd | TraceKind::TaskAbort
        );
        if is_task_record && (task.is_none() || r.instance.is_none()) {
            report.inconsistencies += 1;
            continue;
        }
        match (r.kind, task, r.instance) {
            (TraceKind::TaskQueued, Some(t), Some(id)) => {
                if t.initiator == Initiator::Machine {
                    report.machine_queued += 1;
                }
                if r.detail != "coalesced" {
                    queued.insert(id, t);
                }
            }
            (TraceKind::TaskStart, Some(t), Some(id)) => {
                queued.remove(&id);
                active.insert(id, t);
                let mut held = [0usize; 7];
                for a in active.values() {
                    held[a.perception_type.index()] += 1;
                }
                if held.iter().any(|&n| n > 1) {
                    report.channel_collisions += 1;
                }
                let cog: f64 = active.values().map(|a| a.cognitive_workload).sum();
                let perc: f64 = active.values().map(|a| a.perceptual_workload).sum();
                report.max_active_cognitive = report.max_active_cognitive.max(cog);
                report.max_active_perceptual = report.max_active_perceptual.max(perc);
                if cog > WORKLOAD_CAP + CAP_EPSILON || perc > WORKLOAD_CAP + CAP_EPSILON {
                    report.cap_violations += 1;
                }
            }
            (TraceKind::TaskEnd, Some(t), Some(id)) => {
                if active.remove(&id).is_none() {
                    report.inconsistencies += 1;
                }
                report.completed += 1;
                match config.elements.get(&t.location) {
                    Some(e) => report.eyes_off_seconds += eyes_off_seconds(t, e),
                    None => report.inconsistencies += 1,
                }
            }
            (TraceKind::TaskAbort, Some(t), Some(_)) => {
                if t.initiator == Initiator::Driver {
                    report.driver_aborted += 1;
                }
                match abort_reason(&r.detail) {
                    Some(reason) => overload.abort(reason, t.total_time()),
                    None => report.inconsistencies += 1,
                }
            }
            _ => {}
        }
        let demand = |f: fn(&Task) -> f64| -> f64 { active.values().chain(queued.values()).map(|t| f(t)).sum() };
        let contention = queued
            .values()
            .any(|q| active.values().any(|a| a.perception_type == q.perception_type));
        overload.observe_flags(
            r.time,
            demand(|t| t.cognitive_workload) > WORKLOAD_CAP + CAP_EPSILON,
            demand(|t| t.perceptual_workload) > WORKLOAD_CAP + CAP_EPSILON || contention,
        );
        awareness.set(r.time, r.awareness);
    }
    let (cog, perc) = overload.seconds(trial_length);
    report.cognitive_overload_seconds = cog;
    report.perceptual_overload_seconds = perc;
    report.awareness_integral = awareness.integral_to(trial_length);
    report
}

fn abort_reason(s: &str) -> Option<AbortReason> {
    [
        AbortReason::ChannelConflict,
        AbortReason::CognitiveCap,
        AbortReason::PerceptualCap,
    ]
    .into_iter()
    .find(|r| r.as_str() == s)
}

/// Even-length lists take the lower of the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub eyes_off: f64,
    pub cognitive_overload: f64,
    pub perceptual_overload: f64,
    pub sa_average: f64,
}

impl Indicators {
    pub fn of(m: &TrialMetrics) -> Self {
        Self {
            eyes_off: m.eyes_off_fraction,
            cognitive_overload: m.cognitive_overload_fraction,
            perceptual_overload: m.perceptual_overload_fraction,
            sa_average: m.sa_average,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub median: Indicators,
    pub task_totals: BTreeMap<String, TaskCounts>,
    pub scatter: Vec<Indicators>,
    pub seeds: Vec<u64>,
}

pub fn aggregate(trials: &[TrialMetrics]) -> Result<Summary, TraceError> {
    if trials.is_empty() {
        return Err(TraceError::Empty);
    }
    let col = |f: fn(&TrialMetrics) -> f64| median(&trials.iter().map(f).collect::<Vec<_>>()).expect("non-empty");
    let mut task_totals: BTreeMap<String, TaskCounts> = BTreeMap::new();
    for t in trials {
        for (name, c) in &t.per_task_counts {
            task_totals.entry(name.clone()).or_default().add(c);
        }
    }
    Ok(Summary {
        trials: trials.len(),
        median: Indicators {
            eyes_off: col(|m| m.eyes_off_fraction),
            cognitive_overload: col(|m| m.cognitive_overload_fraction),
            perceptual_overload: col(|m| m.perceptual_overload_fraction),
            sa_average: col(|m| m.sa_average),
        },
        task_totals,
        scatter: trials.iter().map(Indicators::of).collect(),
        seeds: trials.iter().map(|t| t.seed).collect(),
    })
}

pub const METRICS_HEADER: &str = "seed,eyes_off_pct,cog_overload_pct,perc_overload_pct,sa_avg_pct";

pub fn metrics_csv(trials: &[TrialMetrics]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for t in trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t.seed, t.eyes_off_fraction, t.cognitive_overload_fraction, t.perceptual_overload_fraction, t.sa_average
        );
    }
    out
}

pub fn task_counts_csv(counts: &BTreeMap<String, TaskCounts>) -> String {
    let mut out = String::from("task,triggered,executed,queued,aborted,coalesced\n");
    for (name, c) in counts {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{}",
            c.triggered, c.executed, c.queued, c.aborted, c.coalesced
        );
    }
    out
}

/// Per-level breakdown of one trial.
pub fn levels_csv(m: &TrialMetrics) -> String {
    let mut out = String::from("level,time_pct,eyes_off_pct\n");
    for l in 0..LEVELS {
        let _ = writeln!(out, "{l},{},{}", m.time_in_level[l], m.eyes_off_by_level[l]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::{AdmissionOutcome, AttentionState, TaskInstance};
    use crate::task::fixtures;

    fn snapshot(cog: f64, perc: f64, contention: bool) -> LoadSnapshot {
        LoadSnapshot {
            cognitive_sum: cog.min(10.0),
            perceptual_sum: perc.min(10.0),
            busy: vec![],
            queue_len: 0,
            demand_cognitive: cog,
            demand_perceptual: perc,
            channel_contention: contention,
        }
    }

    #[test]
    fn speedometer_eyes_off() {
        let config = fixtures::config(vec![fixtures::speed_check()]);
        let task = &config.tasks[0];
        let cluster = config.elements.get("instrument-cluster").unwrap();
        let hud = config.elements.get("head-up-display").unwrap();
        assert!((eyes_off_seconds(task, cluster) - 1.4).abs() < 1e-12);
        assert_eq!(eyes_off_seconds(task, hud), 0.0);
        let chime = fixtures::chime();
        assert_eq!(eyes_off_seconds(&chime, cluster), 0.0);
    }

    #[test]
    fn idle_trial_has_no_overload() {
        assert_eq!(
            accrue_overload(&[(0.0, snapshot(4.6, 4.0, false))], &[], 100.0),
            (0.0, 0.0)
        );
    }

    #[test]
    fn queued_behind_cognitive_cap_counts_wait() {
        // A (cog 8) runs 0..5 on the cluster; B (cog 5, speakers) asks at 2
        // and waits until A ends at 5: demand 13 for 3 s.
        let mut att = AttentionState::new();
        let inst = |id, channel, cog| TaskInstance {
            id,
            task: id as usize,
            channel,
            cognitive: cog,
            perceptual: 2.0,
            priority: 1,
            initiator: Initiator::Driver,
            total_time: 5.0,
        };
        let mut snaps = vec![];
        assert!(matches!(
            att.request(inst(1, AttentionalChannel::Visual, 8.0), 0.0),
            AdmissionOutcome::Granted { .. }
        ));
        snaps.push((0.0, att.snapshot_load()));
        assert!(matches!(
            att.request(inst(2, AttentionalChannel::AuditoryVocal, 5.0), 2.0),
            AdmissionOutcome::Queued { .. }
        ));
        snaps.push((2.0, att.snapshot_load()));
        att.release(1, 5.0).unwrap();
        snaps.push((5.0, att.snapshot_load()));
        let (cog, perc) = accrue_overload(&snaps, &[], 20.0);
        assert!((cog - 3.0).abs() < 1e-12);
        assert_eq!(perc, 0.0);
    }

    #[test]
    fn aborted_vocal_adds_total_time() {
        let (cog, perc) = accrue_overload(
            &[(0.0, snapshot(1.0, 1.0, false))],
            &[(AbortReason::ChannelConflict, 2.0)],
            10.0,
        );
        assert_eq!((cog, perc), (0.0, 2.0));
    }

    #[test]
    fn contention_is_perceptual_overload() {
        let snaps = [(0.0, snapshot(3.0, 3.0, true)), (4.0, snapshot(3.0, 3.0, false))];
        assert_eq!(accrue_overload(&snaps, &[], 10.0), (0.0, 4.0));
    }

    #[test]
    fn step_integral_exact() {
        let mut s = StepIntegral::new(0.0, 1.0);
        s.set(10.0, 0.5);
        s.set(30.0, 0.75);
        assert_eq!(s.integral_to(100.0), 10.0 + 10.0 + 52.5);
        assert_eq!(s.integral_to(100.0), 72.5);
    }

    #[test]
    fn finalize_fractions() {
        let config = fixtures::config(vec![fixtures::speed_check()]);
        let mut c = TrialCollector::new(1, 1.0, 2);
        c.complete(0, 1.4, 2);
        let m = c.finalize(&config, 7, 100.0);
        assert!((m.eyes_off_fraction - 1.4).abs() < 1e-12);
        assert_eq!(m.sa_average, 100.0);
        assert_eq!(m.time_in_level[2], 100.0);
        assert_eq!(m.per_task_counts["check-speed"].executed, 1);
        assert!(m.in_range());
    }

    fn trial(seed: u64, eyes_off: f64) -> TrialMetrics {
        TrialMetrics {
            seed,
            trial_length: 100.0,
            eyes_off_fraction: eyes_off,
            cognitive_overload_fraction: 0.0,
            perceptual_overload_fraction: 0.0,
            sa_average: 100.0,
            per_task_counts: BTreeMap::from([(
                "a".to_owned(),
                TaskCounts {
                    executed: 2,
                    ..Default::default()
                },
            )]),
            eyes_off_by_level: [0.0; LEVELS],
            time_in_level: [0.0; LEVELS],
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[14.0, 10.0, 12.0]), Some(12.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.0));
        assert_eq!(median(&[]), None);
        let s = aggregate(&[trial(1, 10.0), trial(2, 14.0), trial(3, 12.0)]).unwrap();
        assert_eq!(s.median.eyes_off, 12.0);
        assert_eq!(s.task_totals["a"].executed, 6);
        assert_eq!(s.scatter.len(), 3);
        let single = aggregate(&[trial(9, 3.5)]).unwrap();
        assert_eq!(single.median, Indicators::of(&trial(9, 3.5)));
        assert!(matches!(aggregate(&[]), Err(TraceError::Empty)));
    }

    #[test]
    fn csv_header() {
        let csv = metrics_csv(&[trial(5, 1.4)]);
        assert_eq!(csv, format!("{METRICS_HEADER}\n5,1.4,0,0,100\n"));
    }

    #[test]
    fn trace_round_trip() {
        let trace = TimelineTrace {
            records: vec![TraceRecord {
                time: 1.5,
                kind: TraceKind::TaskStart,
                subject: "check-speed".into(),
                instance: Some(3),
                detail: String::new(),
                cognitive_sum: 4.6,
                perceptual_sum: 4.0,
                awareness: 1.0,
                level: 2,
                road_max: 4,
            }],
        };
        let text = trace.to_jsonl();
        assert!(text.starts_with(r#"{"time":1.5,"kind":"task-start","subject":"check-speed","instance":3"#));
        assert_eq!(TimelineTrace::from_jsonl(&text).unwrap(), trace);
        assert!(matches!(
            TimelineTrace::from_jsonl("{}\n"),
            Err(TraceError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn trace_kind_names_match_serialization() {
        use TraceKind::*;
        for k in [
            Trigger,
            TaskQueued,
            TaskStart,
            TaskEnd,
            TaskAbort,
            RoadChange,
            VehicleTransition,
            SwitchRejected,
            Tor60,
            Tor10,
            MemoryUpdate,
            SpeedChange,
        ] {
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.as_str()));
        }
    }
}
