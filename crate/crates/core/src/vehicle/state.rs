use serde::Serialize;

use super::road::{RoadTimeline, AD_LEVEL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorMode {
    #[default]
    None,
    Tor60,
    Tor10,
}

impl TorMode {
    /// Ground-truth encoding of the take-over state.
    pub fn param_value(self) -> i64 {
        match self {
            TorMode::None => 0,
            TorMode::Tor60 => 1,
            TorMode::Tor10 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VehicleState {
    pub level: u8,
    pub tor_mode: TorMode,
    pub speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VehicleEvent {
    DriverSwitchUp { target: u8 },
    DriverSwitchDown { target: u8 },
    AvailabilityDrop,
    AvailabilityRise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VehicleSignal {
    LevelChanged {
        from: u8,
        to: u8,
        forced: bool,
    },
    /// A driver request that was recorded but had no effect.
    SwitchRejected {
        target: u8,
        level: u8,
        max_available: u8,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionOutcome {
    pub state: VehicleState,
    pub signals: Vec<VehicleSignal>,
}

impl VehicleState {
    pub fn new(level: u8, speed: f64) -> Self {
        Self {
            level,
            tor_mode: TorMode::None,
            speed,
        }
    }

    pub fn in_ad(&self) -> bool {
        self.level == AD_LEVEL
    }

    fn with_level(mut self, level: u8) -> Self {
        self.level = level;
        if level != AD_LEVEL {
            self.tor_mode = TorMode::None;
        }
        self
    }

    /// Applies one state-machine event against the availability at `now`.
    pub fn transition(&self, event: VehicleEvent, timeline: &RoadTimeline, now: f64) -> TransitionOutcome {
        let max_available = timeline.max_level_at(now);
        let from = self.level;
        let rejected = |target| TransitionOutcome {
            state: *self,
            signals: vec![VehicleSignal::SwitchRejected {
                target,
                level: from,
                max_available,
            }],
        };
        let changed = |to, forced| TransitionOutcome {
            state: self.with_level(to),
            signals: vec![VehicleSignal::LevelChanged { from, to, forced }],
        };
        match event {
            VehicleEvent::DriverSwitchUp { target } => {
                if target > from && target <= max_available {
                    changed(target, false)
                } else {
                    rejected(target)
                }
            }
            VehicleEvent::DriverSwitchDown { target } => {
                if target < from {
                    changed(target, false)
                } else {
                    rejected(target)
                }
            }
            VehicleEvent::AvailabilityDrop | VehicleEvent::AvailabilityRise => {
                if from > max_available {
                    changed(max_available, true)
                } else {
                    TransitionOutcome {
                        state: *self,
                        signals: vec![],
                    }
                }
            }
        }
    }
}
