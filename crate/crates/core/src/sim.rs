//! One seeded trial: road, vehicle, driver and HMI wired onto the event
//! calendar.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::attention::{AdmissionOutcome, AttentionError, AttentionState, InstanceId, TaskInstance};
use crate::driver::{CognitiveFunction, DriverMemory, GroundTruth};
use crate::engine::{EngineError, EventCalendar, EventKind, RandomStreams, RunError, SimEvent};
use crate::metrics::{eyes_off_seconds, TimelineTrace, TraceKind, TraceRecord, TrialCollector, TrialMetrics};
use crate::scenario::{CommandAction, RoadSource, Scenario, KNOWN_PARAMETERS};
use crate::task::{Configuration, ValidationReport};
use crate::vehicle::{
    generate_timeline, plan_tor, RoadError, RoadTimeline, TorKind, TorMode, TorPlan, TransitionOutcome, VehicleEvent,
    VehicleSignal, VehicleState, AD_LEVEL,
};

pub const ROAD_STREAM: &str = "road";

pub fn cognitive_stream(name: &str) -> String {
    format!("cognitive-function/{name}")
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid inputs:\n{0}")]
    Invalid(ValidationReport),
    #[error("trial length must be positive and finite, got {0}")]
    Length(f64),
    #[error(transparent)]
    Road(#[from] RoadError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Run(#[from] RunError<StepError>),
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Attention(#[from] AttentionError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOptions {
    pub record_trace: bool,
    pub record_events: bool,
}

impl TrialOptions {
    pub fn traced() -> Self {
        Self {
            record_trace: true,
            record_events: true,
        }
    }
}

/// Kernel-level record of one fired event.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiredEvent {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
    pub payload: String,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub metrics: TrialMetrics,
    pub timeline: RoadTimeline,
    pub tor_plans: Vec<TorPlan>,
    pub trace: Option<TimelineTrace>,
    pub events: Option<Vec<FiredEvent>>,
}

#[derive(Clone, Debug)]
enum Payload {
    Cognitive(usize),
    TaskEnd(InstanceId),
    Road(usize),
    Tor(usize),
    Speed(u64),
}

#[derive(Clone, Debug, Default)]
struct Emit {
    level_change: Vec<usize>,
    level_entered: [Vec<usize>; 5],
    ad_available: Vec<usize>,
    availability_change: Vec<usize>,
    tor60: Vec<usize>,
    tor10: Vec<usize>,
    switch_rejected: Vec<usize>,
}

/// Inputs checked and resolved to task indices once, then run for any
/// number of seeds.
#[derive(Clone, Debug)]
pub struct Prepared<'a> {
    config: &'a Configuration,
    scenario: &'a Scenario,
    road: RoadSource,
    functions: Vec<(CognitiveFunction, usize)>,
    reaction_tasks: Vec<usize>,
    commands: Vec<Option<VehicleEvent>>,
    emit: Emit,
    eyes_off: Vec<f64>,
    warnings: Vec<String>,
}

impl<'a> Prepared<'a> {
    pub fn new(config: &'a Configuration, scenario: &'a Scenario) -> Result<Self, SimError> {
        let mut violations = config.validate();
        let (scenario_violations, warnings) = scenario.validate_against(config);
        violations.extend(scenario_violations);
        if !violations.is_empty() {
            return Err(SimError::Invalid(ValidationReport { violations }));
        }
        let index = |name: &str| config.tasks.iter().position(|t| t.name == name);
        let road = scenario.road_source().expect("checked by validate_against");
        let functions = scenario
            .cognitive_functions
            .iter()
            .map(|spec| {
                let cf = scenario.cognitive_function(spec, config).expect("checked");
                let target = index(&cf.target_task).expect("checked");
                (cf, target)
            })
            .collect();
        let mut commands = vec![None; config.tasks.len()];
        for c in &scenario.commands {
            commands[index(&c.task).expect("checked")] = Some(match c.action {
                CommandAction::SwitchUp => VehicleEvent::DriverSwitchUp { target: c.level },
                CommandAction::SwitchDown => VehicleEvent::DriverSwitchDown { target: c.level },
            });
        }
        // Entries that another entry of the same list triggers are left to
        // that chain instead of being emitted together.
        let compile = |names: &[String]| -> Vec<usize> {
            let present: Vec<usize> = names.iter().filter_map(|n| index(n)).collect();
            present
                .iter()
                .copied()
                .filter(|&i| {
                    !present
                        .iter()
                        .any(|&j| j != i && config.tasks[j].triggers.as_deref() == Some(config.tasks[i].name.as_str()))
                })
                .collect()
        };
        let b = &scenario.bindings;
        let mut emit = Emit {
            level_change: compile(&b.level_change),
            ad_available: compile(&b.ad_available),
            availability_change: compile(&b.availability_change),
            tor60: compile(&b.tor60),
            tor10: compile(&b.tor10),
            switch_rejected: compile(&b.switch_rejected),
            ..Emit::default()
        };
        for (level, names) in &b.level_entered {
            let level: usize = level.parse().expect("checked");
            emit.level_entered[level] = compile(names);
        }
        let eyes_off = config
            .tasks
            .iter()
            .map(|t| eyes_off_seconds(t, config.elements.get(&t.location).expect("checked")))
            .collect();
        Ok(Self {
            config,
            scenario,
            road,
            functions,
            reaction_tasks: scenario
                .reactions
                .iter()
                .map(|r| index(&r.task).expect("checked"))
                .collect(),
            commands,
            emit,
            eyes_off,
            warnings,
        })
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn config(&self) -> &Configuration {
        self.config
    }

    pub fn timeline(&self, seed: u64, trial_length: f64) -> Result<RoadTimeline, SimError> {
        if !(trial_length > 0.0 && trial_length.is_finite()) {
            return Err(SimError::Length(trial_length));
        }
        Ok(match &self.road {
            RoadSource::Fixed(t) => t.clone().extended_to(trial_length),
            RoadSource::Process(p) => {
                generate_timeline(p, &mut RandomStreams::new(seed).stream(ROAD_STREAM), trial_length)?
            }
        })
    }

    pub fn run(&self, seed: u64, trial_length: f64, options: TrialOptions) -> Result<TrialResult, SimError> {
        let timeline = self.timeline(seed, trial_length)?;
        let streams = RandomStreams::new(seed);
        let tor_plans = plan_tor(&timeline, self.scenario.tor_leads());
        let mut world = World::new(self, &streams, timeline, tor_plans, trial_length, options.record_trace);
        let mut calendar = EventCalendar::new();
        world.schedule_initial(&mut calendar)?;
        let fired = calendar.run_until(trial_length, |cal, ev| world.handle(cal, ev))?;
        let metrics = world.collector.finalize(self.config, seed, trial_length);
        Ok(TrialResult {
            metrics,
            timeline: world.timeline,
            tor_plans: world.tor_plans,
            trace: world.trace.map(|records| TimelineTrace { records }),
            events: options.record_events.then(|| {
                fired
                    .into_iter()
                    .map(|e| FiredEvent {
                        time: e.time,
                        sequence: e.sequence,
                        kind: e.kind,
                        payload: format!("{:?}", e.payload),
                    })
                    .collect()
            }),
        })
    }
}

/// Validates and runs one trial.
pub fn simulate(
    config: &Configuration,
    scenario: &Scenario,
    seed: u64,
    trial_length: f64,
    options: TrialOptions,
) -> Result<TrialResult, SimError> {
    Prepared::new(config, scenario)?.run(seed, trial_length, options)
}

struct World<'p, 'a> {
    prep: &'p Prepared<'a>,
    timeline: RoadTimeline,
    tor_plans: Vec<TorPlan>,
    /// Per segment: time up to which AD is offered.
    ad_until: Vec<f64>,
    trial_length: f64,
    attention: AttentionState,
    vehicle: VehicleState,
    truth: GroundTruth,
    memory: DriverMemory,
    rngs: Vec<ChaCha8Rng>,
    next_instance: InstanceId,
    collector: TrialCollector,
    trace: Option<Vec<TraceRecord>>,
}

impl<'p, 'a> World<'p, 'a> {
    fn new(
        prep: &'p Prepared<'a>,
        streams: &RandomStreams,
        timeline: RoadTimeline,
        tor_plans: Vec<TorPlan>,
        trial_length: f64,
        record_trace: bool,
    ) -> Self {
        let scenario = prep.scenario;
        let ad_until = timeline
            .segments()
            .iter()
            .map(|s| {
                if s.max_level < AD_LEVEL {
                    f64::NEG_INFINITY
                } else {
                    tor_plans
                        .iter()
                        .find(|p| p.kind == TorKind::Tor60 && p.boundary == s.end)
                        .map_or(f64::INFINITY, |p| p.time)
                }
            })
            .collect();
        let initial_speed = scenario.speed.change(0).map_or(0.0, |c| c.1);
        let max0 = timeline.max_level_at(0.0);
        let vehicle = VehicleState::new(scenario.vehicle.initial_level.min(max0), initial_speed);
        let mut world = Self {
            prep,
            timeline,
            tor_plans,
            ad_until,
            trial_length,
            attention: AttentionState::new(),
            vehicle,
            truth: GroundTruth::new(),
            memory: DriverMemory::default(),
            rngs: prep
                .functions
                .iter()
                .map(|(cf, _)| streams.stream(&cognitive_stream(&cf.name)))
                .collect(),
            next_instance: 0,
            collector: TrialCollector::new(0, 1.0, vehicle.level),
            trace: record_trace.then(Vec::new),
        };
        world.truth.set("speed", scenario.speed.bucket(initial_speed));
        world.truth.set("automation_level", i64::from(vehicle.level));
        world.truth.set("ad_available", i64::from(world.ad_offered(0.0)));
        world.truth.set("road_condition", i64::from(max0));
        world.truth.set("tor_mode", TorMode::None.param_value());
        debug_assert_eq!(world.truth.iter().count(), KNOWN_PARAMETERS.len());
        world.memory = DriverMemory::initialized(
            scenario.awareness.parameters.iter().map(String::as_str),
            &world.truth,
            0.0,
        );
        world.collector = TrialCollector::new(
            prep.config.tasks.len(),
            world.memory.awareness(&world.truth),
            vehicle.level,
        );
        world
    }

    fn ad_offered(&self, t: f64) -> bool {
        t < self.ad_until[self.timeline.segment_index_at(t)]
    }

    fn schedule_initial(&mut self, cal: &mut EventCalendar<Payload>) -> Result<(), EngineError> {
        let end = self.trial_length;
        for (i, seg) in self.timeline.segments().iter().enumerate().skip(1) {
            if seg.start <= end {
                cal.schedule(seg.start, EventKind::RoadChange, Payload::Road(i))?;
            }
        }
        for (i, plan) in self.tor_plans.iter().enumerate() {
            if plan.time <= end {
                cal.schedule(plan.time, EventKind::VehicleTransition, Payload::Tor(i))?;
            }
        }
        self.schedule_speed(cal, 1)?;
        for i in 0..self.prep.functions.len() {
            let next = self.prep.functions[i].0.next_trigger(&mut self.rngs[i], 0.0);
            if next <= end {
                cal.schedule(next, EventKind::Trigger, Payload::Cognitive(i))?;
            }
        }
        Ok(())
    }

    fn schedule_speed(&mut self, cal: &mut EventCalendar<Payload>, k: u64) -> Result<(), EngineError> {
        if let Some((t, _)) = self.prep.scenario.speed.change(k) {
            if t <= self.trial_length {
                cal.schedule(t, EventKind::RoadChange, Payload::Speed(k))?;
            }
        }
        Ok(())
    }

    fn handle(&mut self, cal: &mut EventCalendar<Payload>, ev: &SimEvent<Payload>) -> Result<(), StepError> {
        let now = ev.time;
        match ev.payload {
            Payload::Cognitive(i) => self.on_cognitive(cal, i, now)?,
            Payload::TaskEnd(id) => self.on_task_end(cal, id, now)?,
            Payload::Road(i) => self.on_road(cal, i, now)?,
            Payload::Tor(i) => self.on_tor(cal, i, now)?,
            Payload::Speed(k) => self.on_speed(cal, k, now)?,
        }
        let load = self.attention.snapshot_load();
        let awareness = self.memory.awareness(&self.truth);
        self.collector.observe(now, &load, awareness, self.vehicle.level);
        Ok(())
    }

    fn record(&mut self, now: f64, kind: TraceKind, subject: &str, instance: Option<InstanceId>, detail: String) {
        if self.trace.is_none() {
            return;
        }
        let record = TraceRecord {
            time: now,
            kind,
            subject: subject.to_owned(),
            instance,
            detail,
            cognitive_sum: self.attention.cognitive_sum(),
            perceptual_sum: self.attention.perceptual_sum(),
            awareness: self.memory.awareness(&self.truth),
            level: self.vehicle.level,
            road_max: self.timeline.max_level_at(now),
        };
        self.trace.as_mut().expect("checked").push(record);
    }

    fn request(&mut self, cal: &mut EventCalendar<Payload>, task: usize, now: f64) -> Result<(), StepError> {
        let config = self.prep.config;
        let t = &config.tasks[task];
        let id = self.next_instance;
        self.next_instance += 1;
        self.collector.counts_mut(task).triggered += 1;
        let inst = TaskInstance {
            id,
            task,
            channel: t.perception_type,
            cognitive: t.cognitive_workload,
            perceptual: t.perceptual_workload,
            priority: t.priority,
            initiator: t.initiator,
            total_time: t.total_time(),
        };
        match self.attention.request(inst, now) {
            AdmissionOutcome::Granted { .. } => {
                cal.schedule(now + t.total_time(), EventKind::TaskEnd, Payload::TaskEnd(id))?;
                self.record(now, TraceKind::TaskStart, &t.name, Some(id), String::new());
            }
            AdmissionOutcome::Queued { position, coalesced } => {
                let detail = if coalesced {
                    self.collector.counts_mut(task).coalesced += 1;
                    "coalesced".to_owned()
                } else {
                    self.collector.counts_mut(task).queued += 1;
                    format!("position {position}")
                };
                self.record(now, TraceKind::TaskQueued, &t.name, Some(id), detail);
            }
            AdmissionOutcome::Aborted(reason) => {
                self.collector.abort(task, reason, t.total_time());
                self.record(now, TraceKind::TaskAbort, &t.name, Some(id), reason.as_str().to_owned());
            }
        }
        Ok(())
    }

    fn emit(&mut self, cal: &mut EventCalendar<Payload>, tasks: &[usize], now: f64) -> Result<(), StepError> {
        for &task in tasks {
            self.request(cal, task, now)?;
        }
        Ok(())
    }

    fn on_cognitive(&mut self, cal: &mut EventCalendar<Payload>, i: usize, now: f64) -> Result<(), StepError> {
        let prep = self.prep;
        let (cf, target) = &prep.functions[i];
        let enabled = cf.enabled_in(self.vehicle.level);
        let detail = if enabled { "requested" } else { "disabled" };
        self.record(now, TraceKind::Trigger, &cf.name, None, detail.to_owned());
        if enabled {
            self.request(cal, *target, now)?;
        }
        // Drawn even when disabled so trigger times do not depend on the HMI.
        let next = cf.next_trigger(&mut self.rngs[i], now);
        if next <= self.trial_length {
            cal.schedule(next, EventKind::Trigger, Payload::Cognitive(i))?;
        }
        Ok(())
    }

    fn on_task_end(&mut self, cal: &mut EventCalendar<Payload>, id: InstanceId, now: f64) -> Result<(), StepError> {
        let prep = self.prep;
        let (done, admitted) = self.attention.release(id, now)?;
        let index = done.instance.task;
        let task = &prep.config.tasks[index];
        self.collector.complete(index, prep.eyes_off[index], self.vehicle.level);
        self.record(now, TraceKind::TaskEnd, &task.name, Some(id), String::new());
        for a in admitted {
            cal.schedule(a.end, EventKind::TaskEnd, Payload::TaskEnd(a.instance.id))?;
            let name = &prep.config.tasks[a.instance.task].name;
            self.record(
                now,
                TraceKind::TaskStart,
                name,
                Some(a.instance.id),
                "from-queue".to_owned(),
            );
        }
        if let Some(event) = prep.commands[index] {
            let outcome = self.vehicle.transition(event, &self.timeline, now);
            self.apply(cal, outcome, now)?;
        }
        let effects = self.memory.on_task_complete(&self.truth, task, now);
        if let Some(update) = &effects.memory_update {
            self.record(
                now,
                TraceKind::MemoryUpdate,
                &update.parameter,
                Some(id),
                format!("{} -> {}", update.previous, update.value),
            );
        }
        if let Some(next) = effects.follow_up {
            let next = prep
                .config
                .tasks
                .iter()
                .position(|t| t.name == next)
                .expect("validated trigger");
            self.request(cal, next, now)?;
        }
        if let Some(update) = effects.memory_update {
            for (reaction, &target) in prep.scenario.reactions.iter().zip(&prep.reaction_tasks) {
                if reaction.parameter == update.parameter
                    && reaction.value == update.value
                    && reaction.enabled_in(self.vehicle.level)
                {
                    self.request(cal, target, now)?;
                }
            }
        }
        Ok(())
    }

    fn apply(
        &mut self,
        cal: &mut EventCalendar<Payload>,
        outcome: TransitionOutcome,
        now: f64,
    ) -> Result<(), StepError> {
        let prep = self.prep;
        self.vehicle = outcome.state;
        for signal in outcome.signals {
            match signal {
                VehicleSignal::LevelChanged { from, to, forced } => {
                    self.truth.set("automation_level", i64::from(to));
                    self.truth.set("tor_mode", self.vehicle.tor_mode.param_value());
                    let how = if forced { "forced" } else { "driver" };
                    self.record(
                        now,
                        TraceKind::VehicleTransition,
                        "automation",
                        None,
                        format!("{from} -> {to} {how}"),
                    );
                    self.emit(cal, &prep.emit.level_change, now)?;
                    self.emit(cal, &prep.emit.level_entered[usize::from(to)], now)?;
                }
                VehicleSignal::SwitchRejected {
                    target,
                    level,
                    max_available,
                } => {
                    self.record(
                        now,
                        TraceKind::SwitchRejected,
                        "automation",
                        None,
                        format!("target {target} at level {level}, max {max_available}"),
                    );
                    self.emit(cal, &prep.emit.switch_rejected, now)?;
                }
            }
        }
        Ok(())
    }

    fn on_road(&mut self, cal: &mut EventCalendar<Payload>, i: usize, now: f64) -> Result<(), StepError> {
        let prep = self.prep;
        let segments = self.timeline.segments();
        let (max, previous) = (segments[i].max_level, segments[i - 1].max_level);
        self.truth.set("road_condition", i64::from(max));
        let offered = self.ad_offered(now);
        let newly_offered = self.truth.set("ad_available", i64::from(offered)) && offered;
        self.record(
            now,
            TraceKind::RoadChange,
            "road",
            None,
            format!("max {previous} -> {max}"),
        );
        let event = if max < previous {
            VehicleEvent::AvailabilityDrop
        } else {
            VehicleEvent::AvailabilityRise
        };
        let outcome = self.vehicle.transition(event, &self.timeline, now);
        self.apply(cal, outcome, now)?;
        self.emit(cal, &prep.emit.availability_change, now)?;
        if newly_offered {
            self.emit(cal, &prep.emit.ad_available, now)?;
        }
        Ok(())
    }

    fn on_tor(&mut self, cal: &mut EventCalendar<Payload>, i: usize, now: f64) -> Result<(), StepError> {
        let prep = self.prep;
        let plan = self.tor_plans[i];
        if plan.kind == TorKind::Tor60 {
            self.truth.set("ad_available", 0);
        }
        let (kind, mode, tasks) = match plan.kind {
            TorKind::Tor60 => (TraceKind::Tor60, TorMode::Tor60, &prep.emit.tor60),
            TorKind::Tor10 => (TraceKind::Tor10, TorMode::Tor10, &prep.emit.tor10),
        };
        let subject = format!("boundary {}", plan.boundary);
        if self.vehicle.in_ad() {
            self.vehicle.tor_mode = mode;
            self.truth.set("tor_mode", mode.param_value());
            self.record(now, kind, &subject, None, "emitted".to_owned());
            self.emit(cal, tasks, now)?;
        } else {
            self.record(now, kind, &subject, None, "ignored".to_owned());
        }
        Ok(())
    }

    fn on_speed(&mut self, cal: &mut EventCalendar<Payload>, k: u64, now: f64) -> Result<(), StepError> {
        let speed = &self.prep.scenario.speed;
        let (_, kmh) = speed.change(k).expect("scheduled from the script");
        self.vehicle.speed = kmh;
        self.truth.set("speed", speed.bucket(kmh));
        self.record(now, TraceKind::SpeedChange, "speed", None, format!("{kmh} km/h"));
        self.schedule_speed(cal, k + 1)?;
        Ok(())
    }
}
