//! Multiple-resource admission control.
//!
//! A task holds its attentional channel exclusively for its whole total time.
//! Active cognitive and perceptual workloads are capped at 10 each. Driver
//! tasks that do not fit wait in a priority queue; machine tasks that do not
//! fit are aborted on the spot. Running tasks are never preempted.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::task::{AttentionalChannel, Initiator, WORKLOAD_CAP};

/// Slack for cap comparisons so sums such as 4.6 + 5.4 count as exactly 10.
pub const CAP_EPSILON: f64 = 1e-9;

pub type InstanceId = u64;

/// One triggered occurrence of a task.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskInstance {
    pub id: InstanceId,
    /// Index of the task definition; identical definitions coalesce in the queue.
    pub task: usize,
    pub channel: AttentionalChannel,
    pub cognitive: f64,
    pub perceptual: f64,
    pub priority: i64,
    pub initiator: Initiator,
    pub total_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveTask {
    pub instance: TaskInstance,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueuedTask {
    pub instance: TaskInstance,
    pub enqueued_at: f64,
    order: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    ChannelConflict,
    CognitiveCap,
    PerceptualCap,
}

impl AbortReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AbortReason::ChannelConflict => "channel-conflict",
            AbortReason::CognitiveCap => "cognitive-cap",
            AbortReason::PerceptualCap => "perceptual-cap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdmissionOutcome {
    Granted {
        start: f64,
    },
    /// `coalesced` is set when the same task was already waiting; nothing new
    /// was enqueued and `position` is that existing entry's place.
    Queued {
        position: usize,
        coalesced: bool,
    },
    Aborted(AbortReason),
}

#[derive(Debug, Error, PartialEq)]
pub enum AttentionError {
    #[error("instance {0} is not active")]
    NotActive(InstanceId),
}

/// Current load of the driver's attention.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadSnapshot {
    pub cognitive_sum: f64,
    pub perceptual_sum: f64,
    pub busy: Vec<AttentionalChannel>,
    pub queue_len: usize,
    /// Active plus queued demand.
    pub demand_cognitive: f64,
    pub demand_perceptual: f64,
    /// Some queued task is waiting for a busy channel.
    pub channel_contention: bool,
}

impl LoadSnapshot {
    pub fn cognitive_overloaded(&self) -> bool {
        self.demand_cognitive > WORKLOAD_CAP + CAP_EPSILON
    }

    /// Perceptual demand over the cap, or contention on a channel.
    pub fn perceptual_overloaded(&self) -> bool {
        self.demand_perceptual > WORKLOAD_CAP + CAP_EPSILON || self.channel_contention
    }
}

#[derive(Clone, Debug, Default)]
pub struct AttentionState {
    channel_busy: [Option<InstanceId>; 7],
    cognitive_sum: f64,
    perceptual_sum: f64,
    active: BTreeMap<InstanceId, ActiveTask>,
    wait_queue: Vec<QueuedTask>,
    next_order: u64,
}

impl AttentionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cognitive_sum(&self) -> f64 {
        self.cognitive_sum
    }

    pub fn perceptual_sum(&self) -> f64 {
        self.perceptual_sum
    }

    pub fn active(&self) -> impl Iterator<Item = &ActiveTask> {
        self.active.values()
    }

    pub fn is_active(&self, id: InstanceId) -> bool {
        self.active.contains_key(&id)
    }

    /// Waiting tasks in admission order: priority descending, then FIFO.
    pub fn queue(&self) -> &[QueuedTask] {
        &self.wait_queue
    }

    pub fn channel_holder(&self, channel: AttentionalChannel) -> Option<InstanceId> {
        self.channel_busy[channel.index()]
    }

    fn blocking_reason(&self, inst: &TaskInstance) -> Option<AbortReason> {
        if self.channel_busy[inst.channel.index()].is_some() {
            Some(AbortReason::ChannelConflict)
        } else if self.cognitive_sum + inst.cognitive > WORKLOAD_CAP + CAP_EPSILON {
            Some(AbortReason::CognitiveCap)
        } else if self.perceptual_sum + inst.perceptual > WORKLOAD_CAP + CAP_EPSILON {
            Some(AbortReason::PerceptualCap)
        } else {
            None
        }
    }

    /// Why `inst` could not start right now, if it could not.
    pub fn check(&self, inst: &TaskInstance) -> Option<AbortReason> {
        self.blocking_reason(inst)
    }

    fn recompute_sums(&mut self) {
        // Recomputed rather than incrementally updated so that the sums never
        // drift from the active set.
        self.cognitive_sum = self.active.values().map(|a| a.instance.cognitive).sum();
        self.perceptual_sum = self.active.values().map(|a| a.instance.perceptual).sum();
    }

    fn admit(&mut self, inst: TaskInstance, now: f64) {
        self.channel_busy[inst.channel.index()] = Some(inst.id);
        self.active.insert(
            inst.id,
            ActiveTask {
                instance: inst,
                start: now,
                end: now + inst.total_time,
            },
        );
        self.recompute_sums();
    }

    pub fn request(&mut self, inst: TaskInstance, now: f64) -> AdmissionOutcome {
        match (self.blocking_reason(&inst), inst.initiator) {
            (None, _) => {
                self.admit(inst, now);
                AdmissionOutcome::Granted { start: now }
            }
            (Some(reason), Initiator::Machine) => AdmissionOutcome::Aborted(reason),
            (Some(_), Initiator::Driver) => {
                if let Some(position) = self.wait_queue.iter().position(|q| q.instance.task == inst.task) {
                    return AdmissionOutcome::Queued {
                        position,
                        coalesced: true,
                    };
                }
                let entry = QueuedTask {
                    instance: inst,
                    enqueued_at: now,
                    order: self.next_order,
                };
                self.next_order += 1;
                let position = self
                    .wait_queue
                    .iter()
                    .position(|q| q.instance.priority < inst.priority)
                    .unwrap_or(self.wait_queue.len());
                self.wait_queue.insert(position, entry);
                AdmissionOutcome::Queued {
                    position,
                    coalesced: false,
                }
            }
        }
    }

    /// Frees `id`'s channel and workload, then admits every queued task that
    /// now fits, scanning in priority order without head-of-line blocking.
    pub fn release(&mut self, id: InstanceId, now: f64) -> Result<(ActiveTask, Vec<ActiveTask>), AttentionError> {
        let done = self.active.remove(&id).ok_or(AttentionError::NotActive(id))?;
        self.channel_busy[done.instance.channel.index()] = None;
        self.recompute_sums();

        let mut admitted = Vec::new();
        let mut i = 0;
        while i < self.wait_queue.len() {
            let inst = self.wait_queue[i].instance;
            if self.blocking_reason(&inst).is_none() {
                self.wait_queue.remove(i);
                self.admit(inst, now);
                admitted.push(self.active[&inst.id]);
            } else {
                i += 1;
            }
        }
        Ok((done, admitted))
    }

    pub fn snapshot_load(&self) -> LoadSnapshot {
        let mut busy: Vec<_> = AttentionalChannel::ALL
            .into_iter()
            .filter(|c| self.channel_busy[c.index()].is_some())
            .collect();
        busy.sort();
        let queued_cog: f64 = self.wait_queue.iter().map(|q| q.instance.cognitive).sum();
        let queued_perc: f64 = self.wait_queue.iter().map(|q| q.instance.perceptual).sum();
        LoadSnapshot {
            cognitive_sum: self.cognitive_sum,
            perceptual_sum: self.perceptual_sum,
            busy,
            queue_len: self.wait_queue.len(),
            demand_cognitive: self.cognitive_sum + queued_cog,
            demand_perceptual: self.perceptual_sum + queued_perc,
            channel_contention: self
                .wait_queue
                .iter()
                .any(|q| self.channel_busy[q.instance.channel.index()].is_some()),
        }
    }
}
