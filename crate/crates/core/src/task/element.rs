use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::channel::{AttentionalChannel, ScaleCategory};
use super::scale::WorkloadScale;

/// One physical piece of the cockpit a task can be allocated to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceElement {
    pub name: String,
    /// Looking at this element keeps the eyes on the road (head-up display,
    /// windshield).
    pub on_road: bool,
    /// One-way focus change from the road to the element, seconds.
    #[serde(default)]
    pub gaze_time: f64,
    /// Channels the element can present. Empty means any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<AttentionalChannel>,
}

impl InterfaceElement {
    pub fn supports(&self, channel: AttentionalChannel) -> bool {
        self.channels.is_empty() || self.channels.contains(&channel)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElementCatalog {
    elements: BTreeMap<String, InterfaceElement>,
}

impl ElementCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the replaced element when the name was already present.
    pub fn insert(&mut self, element: InterfaceElement) -> Option<InterfaceElement> {
        self.elements.insert(element.name.clone(), element)
    }

    pub fn get(&self, name: &str) -> Option<&InterfaceElement> {
        self.elements.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.elements.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InterfaceElement> {
        self.elements.values()
    }
}

/// `elements.toml`:
///
/// ```toml
/// [[element]]
/// name = "instrument-cluster"
/// on_road = false
/// gaze_time = 0.2
/// channels = ["visual"]
/// ```
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    #[serde(default)]
    pub element: Vec<InterfaceElement>,
}

/// `scale.toml`: entries merged over the built-in scale, or replacing it
/// entirely when `replace_defaults = true`.
///
/// ```toml
/// replace_defaults = false
/// [[entry]]
/// category = "visual"
/// descriptor = "Glance (icon)"
/// value = 2.0
/// ```
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFile {
    #[serde(default)]
    pub replace_defaults: bool,
    #[serde(default)]
    pub entry: Vec<ScaleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleEntry {
    pub category: ScaleCategory,
    pub descriptor: String,
    pub value: f64,
}

impl ScaleFile {
    pub fn build(&self) -> Result<WorkloadScale, super::scale::ScaleError> {
        let mut scale = if self.replace_defaults {
            WorkloadScale::empty()
        } else {
            WorkloadScale::default()
        };
        for entry in &self.entry {
            scale.insert(entry.category, &entry.descriptor, entry.value)?;
        }
        Ok(scale)
    }
}
