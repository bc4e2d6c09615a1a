use std::collections::BTreeMap;

use thiserror::Error;

use super::channel::ScaleCategory;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("descriptor not found: ({category}, \"{descriptor}\")")]
    DescriptorNotFound {
        category: ScaleCategory,
        descriptor: String,
    },
    #[error("workload value {value} for ({category}, \"{descriptor}\") is outside (0, 10]")]
    OutOfRange {
        category: ScaleCategory,
        descriptor: String,
        value: f64,
    },
}

/// Descriptor-to-value lookup per scale category.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadScale {
    entries: BTreeMap<(ScaleCategory, String), f64>,
}

const DEFAULT_ENTRIES: &[(ScaleCategory, &str, f64)] = &[
    (ScaleCategory::Cognitive, "Simple association", 1.0),
    (ScaleCategory::Cognitive, "Select alternative", 1.2),
    (ScaleCategory::Cognitive, "Sign/signal recognition", 3.7),
    (ScaleCategory::Cognitive, "Evaluate single aspect", 4.6),
    (ScaleCategory::Cognitive, "Encoding/Decoding/Recall", 5.3),
    (ScaleCategory::Cognitive, "Evaluate several aspects", 6.8),
    (ScaleCategory::Auditory, "Non-vocal signal recognition", 6.6),
    (ScaleCategory::Auditory, "Vocal signal recognition", 4.9),
    (ScaleCategory::Haptic, "Detect simple signal", 1.0),
    (ScaleCategory::Visual, "Detect simple signal", 1.0),
    (ScaleCategory::Visual, "Discriminate (Sign)", 3.7),
    (ScaleCategory::Visual, "Inspect/Check (numerical)", 4.0),
    (ScaleCategory::Visual, "Read (text)", 5.9),
    (ScaleCategory::Visual, "Scan/Search/Monitor", 7.0),
    (ScaleCategory::Psychomotor, "Push the button", 2.2),
    (ScaleCategory::Psychomotor, "Switch toggle", 2.2),
    (ScaleCategory::Psychomotor, "Continuous adjustive controller", 2.6),
    (ScaleCategory::Psychomotor, "Discrete adjustive controller", 5.8),
];

impl Default for WorkloadScale {
    fn default() -> Self {
        let mut scale = Self::empty();
        for &(category, descriptor, value) in DEFAULT_ENTRIES {
            scale.entries.insert((category, descriptor.to_owned()), value);
        }
        scale
    }
}

impl WorkloadScale {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds or replaces one entry.
    pub fn insert(&mut self, category: ScaleCategory, descriptor: &str, value: f64) -> Result<(), ScaleError> {
        let descriptor = descriptor.trim().to_owned();
        if !(value > 0.0 && value <= 10.0) {
            return Err(ScaleError::OutOfRange {
                category,
                descriptor,
                value,
            });
        }
        self.entries.insert((category, descriptor), value);
        Ok(())
    }

    /// Exact, case-sensitive match after trimming surrounding whitespace.
    pub fn lookup(&self, category: ScaleCategory, descriptor: &str) -> Result<f64, ScaleError> {
        let descriptor = descriptor.trim();
        self.entries
            .get(&(category, descriptor.to_owned()))
            .copied()
            .ok_or_else(|| ScaleError::DescriptorNotFound {
                category,
                descriptor: descriptor.to_owned(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (ScaleCategory, &str, f64)> {
        self.entries.iter().map(|((c, d), v)| (*c, d.as_str(), *v))
    }
}
