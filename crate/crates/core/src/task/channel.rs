use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The seven separate attentional resources of the multi-sensory cockpit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionalChannel {
    Visual,
    VisualPeripheral,
    AuditoryVocal,
    AuditoryNonVocal,
    HapticHands,
    HapticSeat,
    Psychomotor,
}

impl AttentionalChannel {
    pub const ALL: [AttentionalChannel; 7] = [
        AttentionalChannel::Visual,
        AttentionalChannel::VisualPeripheral,
        AttentionalChannel::AuditoryVocal,
        AttentionalChannel::AuditoryNonVocal,
        AttentionalChannel::HapticHands,
        AttentionalChannel::HapticSeat,
        AttentionalChannel::Psychomotor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttentionalChannel::Visual => "visual",
            AttentionalChannel::VisualPeripheral => "visual-peripheral",
            AttentionalChannel::AuditoryVocal => "auditory-vocal",
            AttentionalChannel::AuditoryNonVocal => "auditory-non-vocal",
            AttentionalChannel::HapticHands => "haptic-hands",
            AttentionalChannel::HapticSeat => "haptic-seat",
            AttentionalChannel::Psychomotor => "psychomotor",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Scale category used to score this channel's perceptual descriptor.
    pub fn perceptual_category(self) -> ScaleCategory {
        match self {
            AttentionalChannel::Visual | AttentionalChannel::VisualPeripheral => ScaleCategory::Visual,
            AttentionalChannel::AuditoryVocal | AttentionalChannel::AuditoryNonVocal => ScaleCategory::Auditory,
            AttentionalChannel::HapticHands | AttentionalChannel::HapticSeat => ScaleCategory::Haptic,
            AttentionalChannel::Psychomotor => ScaleCategory::Psychomotor,
        }
    }
}

impl fmt::Display for AttentionalChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown {what} `{value}`")]
pub struct UnknownName {
    pub what: &'static str,
    pub value: String,
}

fn normalize(s: &str) -> String {
    s.trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == '_' || c == ' ' { '-' } else { c })
        .collect()
}

impl FromStr for AttentionalChannel {
    type Err = UnknownName;

    /// Accepts the kebab-case names as well as spreadsheet spellings such as
    /// "Auditory non-Vocal" or "haptic_seat".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize(s);
        let norm = if norm == "auditory-nonvocal" {
            "auditory-non-vocal".to_owned()
        } else {
            norm
        };
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| UnknownName {
                what: "perception type",
                value: s.to_owned(),
            })
    }
}

/// Category column of the workload component scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleCategory {
    Cognitive,
    Auditory,
    Haptic,
    Visual,
    Psychomotor,
}

impl ScaleCategory {
    pub const ALL: [ScaleCategory; 5] = [
        ScaleCategory::Cognitive,
        ScaleCategory::Auditory,
        ScaleCategory::Haptic,
        ScaleCategory::Visual,
        ScaleCategory::Psychomotor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleCategory::Cognitive => "cognitive",
            ScaleCategory::Auditory => "auditory",
            ScaleCategory::Haptic => "haptic",
            ScaleCategory::Visual => "visual",
            ScaleCategory::Psychomotor => "psychomotor",
        }
    }
}

impl fmt::Display for ScaleCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScaleCategory {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize(s);
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| UnknownName {
                what: "scale category",
                value: s.to_owned(),
            })
    }
}

/// Who starts a task. Driver tasks wait for attention; machine tasks are
/// dropped when attention is not available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initiator {
    Driver,
    Machine,
}

impl Initiator {
    pub fn as_str(self) -> &'static str {
        match self {
            Initiator::Driver => "driver",
            Initiator::Machine => "machine",
        }
    }
}

impl fmt::Display for Initiator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Initiator {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize(s).as_str() {
            "driver" | "user" => Ok(Initiator::Driver),
            "machine" | "system" => Ok(Initiator::Machine),
            _ => Err(UnknownName {
                what: "initiator",
                value: s.to_owned(),
            }),
        }
    }
}
