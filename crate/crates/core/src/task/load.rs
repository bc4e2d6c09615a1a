use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use super::channel::{AttentionalChannel, Initiator, ScaleCategory};
use super::element::{ElementCatalog, ElementFile, ScaleFile};
use super::model::{validate, Configuration, Task, ValidationReport, Violation, ViolationKind};
use super::scale::{ScaleError, WorkloadScale};

/// Column names of the task file, in canonical write order.
pub const TASK_COLUMNS: [&str; 15] = [
    "Name",
    "Description",
    "Location",
    "CognitiveDescriptor",
    "PerceptualDescriptor",
    "PerceptionType",
    "PerceptualWorkload",
    "CognitiveWorkload",
    "Duration",
    "GazeTime",
    "CognitiveFunctionTrigger",
    "AwarenessParameter",
    "Triggers",
    "Priority",
    "Initiator",
];

/// Derived column some spreadsheets carry; checked, never stored.
const TOTAL_TIME_COLUMN: &str = "TotalTime";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Toml {
        file: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Invalid(ValidationReport),
}

impl ConfigError {
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            ConfigError::Invalid(r) => Some(r),
            _ => None,
        }
    }
}

/// A validated configuration plus non-fatal findings.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: Configuration,
    pub warnings: Vec<String>,
}

pub(crate) fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_configuration(tasks: &Path, elements: &Path, scale: Option<&Path>) -> Result<Loaded, ConfigError> {
    let tasks_text = read_file(tasks)?;
    let elements_text = read_file(elements)?;
    let scale_text = scale.map(read_file).transpose()?;
    ConfigSources {
        tasks_csv: &tasks_text,
        tasks_name: &tasks.display().to_string(),
        elements_toml: &elements_text,
        elements_name: &elements.display().to_string(),
        scale_toml: scale_text.as_deref(),
        scale_name: &scale.map(|p| p.display().to_string()).unwrap_or_default(),
    }
    .load()
}

/// In-memory inputs for [`load_configuration`]; names are used in messages.
pub struct ConfigSources<'a> {
    pub tasks_csv: &'a str,
    pub tasks_name: &'a str,
    pub elements_toml: &'a str,
    pub elements_name: &'a str,
    pub scale_toml: Option<&'a str>,
    pub scale_name: &'a str,
}

impl<'a> ConfigSources<'a> {
    pub fn new(tasks_csv: &'a str, elements_toml: &'a str, scale_toml: Option<&'a str>) -> Self {
        Self {
            tasks_csv,
            tasks_name: "tasks.csv",
            elements_toml,
            elements_name: "elements.toml",
            scale_toml,
            scale_name: "scale.toml",
        }
    }

    pub fn load(&self) -> Result<Loaded, ConfigError> {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();

        let element_file: ElementFile = toml::from_str(self.elements_toml).map_err(|source| ConfigError::Toml {
            file: self.elements_name.to_owned(),
            source,
        })?;
        let mut elements = ElementCatalog::new();
        for el in element_file.element {
            let name = el.name.clone();
            if elements.insert(el).is_some() {
                violations.push(Violation::new(
                    ViolationKind::DuplicateElement,
                    Some(self.elements_name.to_owned()),
                    format!("element `{name}` defined more than once"),
                ));
            }
        }

        let scale = match self.scale_toml {
            None => WorkloadScale::default(),
            Some(text) => {
                let file: ScaleFile = toml::from_str(text).map_err(|source| ConfigError::Toml {
                    file: self.scale_name.to_owned(),
                    source,
                })?;
                file.build().map_err(|e| {
                    ConfigError::Invalid(ValidationReport {
                        violations: vec![Violation::new(
                            ViolationKind::OutOfRange,
                            Some(self.scale_name.to_owned()),
                            e.to_string(),
                        )],
                    })
                })?
            }
        };

        let tasks = parse_tasks(
            self.tasks_csv,
            self.tasks_name,
            &elements,
            &scale,
            &mut violations,
            &mut warnings,
        )?;
        let config = Configuration { tasks, elements, scale };

        // Row-level problems already point at file lines; the semantic pass
        // only runs once rows parsed cleanly, so nothing is reported twice.
        if violations.is_empty() {
            violations.extend(validate(&config));
        }
        if violations.is_empty() {
            Ok(Loaded { config, warnings })
        } else {
            Err(ConfigError::Invalid(ValidationReport { violations }))
        }
    }
}

struct Row<'r> {
    record: &'r csv::StringRecord,
    columns: &'r HashMap<&'static str, usize>,
}

impl Row<'_> {
    fn cell(&self, column: &str) -> Option<&str> {
        let idx = *self.columns.get(column)?;
        self.record.get(idx).map(str::trim).filter(|s| !s.is_empty())
    }
}

fn parse_tasks(
    text: &str,
    file: &str,
    elements: &ElementCatalog,
    scale: &WorkloadScale,
    violations: &mut Vec<Violation>,
    warnings: &mut Vec<String>,
) -> Result<Vec<Task>, ConfigError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let csv_err = |source| ConfigError::Csv {
        file: file.to_owned(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_err)?.clone();

    let mut columns = HashMap::new();
    let mut total_time_col = None;
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim();
        if let Some(&known) = TASK_COLUMNS.iter().find(|&&c| c == h) {
            columns.insert(known, i);
        } else if h == TOTAL_TIME_COLUMN {
            total_time_col = Some(i);
        } else {
            warnings.push(format!("{file}:1: ignoring unknown column `{h}`"));
        }
    }
    let missing: Vec<_> = TASK_COLUMNS.iter().filter(|c| !columns.contains_key(*c)).collect();
    if !missing.is_empty() {
        for col in missing {
            violations.push(Violation::new(
                ViolationKind::MissingColumn,
                Some(format!("{file}:1")),
                format!("missing column `{col}`"),
            ));
        }
        return Ok(Vec::new());
    }

    let mut tasks = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let ctx = format!("{file}:{line}");
        let row = Row {
            record: &record,
            columns: &columns,
        };
        let before = violations.len();
        let task = parse_row(&row, &ctx, elements, scale, violations, warnings);
        if let (Some(task), true) = (task, violations.len() == before) {
            if let Some(cell) = total_time_col
                .and_then(|i| record.get(i))
                .map(str::trim)
                .filter(|s| !s.is_empty())
            {
                match cell.parse::<f64>() {
                    Ok(v) if (v - task.total_time()).abs() <= 1e-9 => {}
                    _ => warnings.push(format!(
                        "{ctx}: ignoring TotalTime `{cell}`; derived value is {}",
                        task.total_time()
                    )),
                }
            }
            tasks.push(task);
        }
    }
    Ok(tasks)
}

fn parse_row(
    row: &Row<'_>,
    ctx: &str,
    elements: &ElementCatalog,
    scale: &WorkloadScale,
    violations: &mut Vec<Violation>,
    warnings: &mut Vec<String>,
) -> Option<Task> {
    let mut fail = |kind, msg: String| {
        violations.push(Violation::new(kind, Some(ctx.to_owned()), msg));
    };

    let required = |col: &str, fail: &mut dyn FnMut(ViolationKind, String)| -> Option<String> {
        let v = row.cell(col).map(str::to_owned);
        if v.is_none() {
            fail(ViolationKind::MissingField, format!("missing value for `{col}`"));
        }
        v
    };

    let name = required("Name", &mut fail);
    let location = required("Location", &mut fail);
    let perception_raw = required("PerceptionType", &mut fail);
    let duration_raw = required("Duration", &mut fail);
    let priority_raw = required("Priority", &mut fail);
    let initiator_raw = required("Initiator", &mut fail);

    let parse_f64 = |col: &str, raw: &str, fail: &mut dyn FnMut(ViolationKind, String)| -> Option<f64> {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                fail(ViolationKind::InvalidValue, format!("`{col}` is not a number: `{raw}`"));
                None
            }
        }
    };

    let perception_type = perception_raw.and_then(|raw| match raw.parse::<AttentionalChannel>() {
        Ok(c) => Some(c),
        Err(e) => {
            fail(ViolationKind::InvalidValue, e.to_string());
            None
        }
    });
    let duration = duration_raw.and_then(|raw| parse_f64("Duration", &raw, &mut fail));
    let priority = priority_raw.and_then(|raw| match raw.parse::<i64>() {
        Ok(p) => Some(p),
        Err(_) => {
            fail(
                ViolationKind::InvalidValue,
                format!("`Priority` is not an integer: `{raw}`"),
            );
            None
        }
    });
    let initiator = initiator_raw.and_then(|raw| match raw.parse::<Initiator>() {
        Ok(i) => Some(i),
        Err(e) => {
            fail(ViolationKind::InvalidValue, e.to_string());
            None
        }
    });
    let explicit_gaze = row
        .cell("GazeTime")
        .and_then(|raw| parse_f64("GazeTime", raw, &mut fail));
    let explicit_perc = row
        .cell("PerceptualWorkload")
        .and_then(|raw| parse_f64("PerceptualWorkload", raw, &mut fail));
    let explicit_cog = row
        .cell("CognitiveWorkload")
        .and_then(|raw| parse_f64("CognitiveWorkload", raw, &mut fail));

    let cognitive_descriptor = row.cell("CognitiveDescriptor").unwrap_or_default().to_owned();
    let perceptual_descriptor = row.cell("PerceptualDescriptor").unwrap_or_default().to_owned();

    let mut resolve = |label: &str,
                       column: &str,
                       category: Option<ScaleCategory>,
                       descriptor: &str,
                       explicit: Option<f64>,
                       fail: &mut dyn FnMut(ViolationKind, String)|
     -> Option<f64> {
        let from_scale = match (category, descriptor.is_empty()) {
            (Some(cat), false) => Some(scale.lookup(cat, descriptor)),
            _ => None,
        };
        match (explicit, from_scale) {
            (Some(v), Some(Ok(s))) => {
                if (v - s).abs() > 1e-12 {
                    warnings.push(format!(
                        "{ctx}: explicit {label} {v} overrides scale value {s} for \"{descriptor}\""
                    ));
                }
                Some(v)
            }
            (Some(v), Some(Err(ScaleError::DescriptorNotFound { category, .. }))) => {
                warnings.push(format!(
                    "{ctx}: {label} descriptor \"{descriptor}\" not in the {category} scale; using explicit {v}"
                ));
                Some(v)
            }
            (Some(v), _) => Some(v),
            (None, Some(Ok(s))) => Some(s),
            (None, Some(Err(e))) => {
                fail(ViolationKind::UnknownDescriptor, e.to_string());
                None
            }
            (None, None) => {
                if category.is_some() {
                    fail(
                        ViolationKind::MissingField,
                        format!("`{column}` is empty and no {label} descriptor is given"),
                    );
                }
                None
            }
        }
    };

    let perceptual_workload = resolve(
        "perceptual workload",
        "PerceptualWorkload",
        perception_type.map(AttentionalChannel::perceptual_category),
        &perceptual_descriptor,
        explicit_perc,
        &mut fail,
    );
    let cognitive_workload = resolve(
        "cognitive workload",
        "CognitiveWorkload",
        Some(ScaleCategory::Cognitive),
        &cognitive_descriptor,
        explicit_cog,
        &mut fail,
    );

    // An empty gaze cell takes the element's gaze time for visual tasks.
    let gaze_time = match (explicit_gaze, perception_type) {
        (Some(g), _) => Some(g),
        (None, Some(AttentionalChannel::Visual)) => Some(
            location
                .as_deref()
                .and_then(|l| elements.get(l))
                .map_or(0.0, |e| e.gaze_time),
        ),
        (None, _) => Some(0.0),
    };

    let (
        Some(name),
        Some(location),
        Some(perception_type),
        Some(duration),
        Some(priority),
        Some(initiator),
        Some(perceptual_workload),
        Some(cognitive_workload),
        Some(gaze_time),
    ) = (
        name,
        location,
        perception_type,
        duration,
        priority,
        initiator,
        perceptual_workload,
        cognitive_workload,
        gaze_time,
    )
    else {
        return None;
    };

    Some(Task {
        name,
        description: row.cell("Description").unwrap_or_default().to_owned(),
        location,
        cognitive_descriptor,
        perceptual_descriptor,
        perception_type,
        perceptual_workload,
        cognitive_workload,
        duration,
        gaze_time,
        cognitive_function_trigger: row.cell("CognitiveFunctionTrigger").map(str::to_owned),
        awareness_parameter: row.cell("AwarenessParameter").map(str::to_owned),
        triggers: row.cell("Triggers").map(str::to_owned),
        priority,
        initiator,
    })
}

/// Writes tasks in the canonical column layout with numeric workloads filled.
pub fn write_tasks_csv(tasks: &[Task]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(TASK_COLUMNS).expect("in-memory write");
    for t in tasks {
        let opt = |o: &Option<String>| o.clone().unwrap_or_default();
        writer
            .write_record([
                t.name.clone(),
                t.description.clone(),
                t.location.clone(),
                t.cognitive_descriptor.clone(),
                t.perceptual_descriptor.clone(),
                t.perception_type.to_string(),
                t.perceptual_workload.to_string(),
                t.cognitive_workload.to_string(),
                t.duration.to_string(),
                t.gaze_time.to_string(),
                opt(&t.cognitive_function_trigger),
                opt(&t.awareness_parameter),
                opt(&t.triggers),
                t.priority.to_string(),
                t.initiator.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    const ELEMENTS: &str = r#"
        [[element]]
        name = "instrument-cluster"
        on_road = false
        gaze_time = 0.2
        channels = ["visual"]

        [[element]]
        name = "head-up-display"
        on_road = true
        gaze_time = 0.1
        channels = ["visual"]

        [[element]]
        name = "speakers"
        on_road = true
    "#;

    const HEADER: &str = "Name,Description,Location,CognitiveDescriptor,PerceptualDescriptor,PerceptionType,PerceptualWorkload,CognitiveWorkload,Duration,GazeTime,CognitiveFunctionTrigger,AwarenessParameter,Triggers,Priority,Initiator";

    fn load(rows: &[&str]) -> Result<Loaded, ConfigError> {
        let mut csv = String::from(HEADER);
        for r in rows {
            csv.push('\n');
            csv.push_str(r);
        }
        ConfigSources::new(&csv, ELEMENTS, None).load()
    }

    #[test]
    fn descriptors_fill_workloads() {
        let loaded = load(&[
            "read-msg,Read message,instrument-cluster,Encoding/Decoding/Recall,Read (text),Visual,,,2.0,,,,,3,machine",
        ])
        .unwrap();
        let t = &loaded.config.tasks[0];
        assert_eq!(t.perceptual_workload, 5.9);
        assert_eq!(t.cognitive_workload, 5.3);
        assert_eq!(t.gaze_time, 0.2, "gaze taken from the element");
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn explicit_workload_overrides_with_warning() {
        let loaded = load(&[
            "read-msg,,instrument-cluster,Encoding/Decoding/Recall,Read (text),Visual,6.5,,2.0,0.3,,,,3,machine",
        ])
        .unwrap();
        assert_eq!(loaded.config.tasks[0].perceptual_workload, 6.5);
        assert_eq!(loaded.config.tasks[0].gaze_time, 0.3);
        assert_eq!(loaded.warnings.len(), 1, "{:?}", loaded.warnings);
    }

    #[test]
    fn empty_file_is_valid_and_empty() {
        let loaded = ConfigSources::new("", ELEMENTS, None).load().unwrap();
        assert!(loaded.config.tasks.is_empty());
        assert!(load(&[]).unwrap().config.tasks.is_empty());
    }

    #[test]
    fn trigger_cycle_rejected_naming_members() {
        let err = load(&[
            "A,,speakers,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,B,1,machine",
            "B,,speakers,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,A,1,machine",
        ])
        .unwrap_err();
        let report = err.report().unwrap();
        assert_eq!(report.count(ViolationKind::TriggerCycle), 1);
        let msg = report.to_string();
        assert!(msg.contains('A') && msg.contains('B'), "{msg}");
    }

    #[test]
    fn missing_priority_is_one_violation_per_row() {
        let err = load(&[
            "A,,speakers,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,,,machine",
            "B,,speakers,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,,2,machine",
            "C,,speakers,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,,,machine",
        ])
        .unwrap_err();
        let report = err.report().unwrap();
        assert_eq!(report.len(), 2, "{report}");
        assert!(report.violations.iter().all(|v| v.message.contains("Priority")));
        assert!(report.violations[0].context.as_deref().unwrap().ends_with(":2"));
        assert!(report.violations[1].context.as_deref().unwrap().ends_with(":4"));
    }

    #[test]
    fn missing_column_is_named() {
        let csv = HEADER.replace(",Priority", "");
        let err = ConfigSources::new(&csv, ELEMENTS, None).load().unwrap_err();
        let report = err.report().unwrap();
        assert_eq!(report.len(), 1);
        assert!(report.violations[0].message.contains("Priority"));
    }

    #[test]
    fn all_row_problems_are_collected() {
        let err = load(&[
            "A,,nowhere,Simple association,Vocal signal recognition,Auditory vocal,,,1,,,,,1,machine",
            "B,,speakers,Bogus thought,Vocal signal recognition,Smell,,,x,,,,,1,robot",
        ])
        .unwrap_err();
        let report = err.report().unwrap();
        // row 3: bad channel, bad duration, bad initiator; cognitive
        // descriptor unknown. Row 2's location is checked in the semantic
        // pass, which only runs once every row parses.
        assert!(report.len() >= 4, "{report}");
        assert!(report.count(ViolationKind::InvalidValue) >= 3);
        assert_eq!(report.count(ViolationKind::UnknownDescriptor), 1);
    }

    #[test]
    fn total_time_column_checked_not_stored() {
        let csv = format!(
            "{HEADER},TotalTime\ncheck,,instrument-cluster,Evaluate single aspect,Inspect/Check (numerical),Visual,,,1,0.2,,,,1,driver,2.0"
        );
        let loaded = ConfigSources::new(&csv, ELEMENTS, None).load().unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!((loaded.config.tasks[0].total_time() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn fill_is_idempotent() {
        let first = load(&[
            "read-msg,\"Read, then act\",instrument-cluster,Encoding/Decoding/Recall,Read (text),Visual,,,2.0,,,msg,next,3,machine",
            "next,,speakers,Sign/signal recognition,Non-vocal signal recognition,Auditory non-vocal,,,0.5,,,,,2,machine",
        ])
        .unwrap();
        let written = write_tasks_csv(&first.config.tasks);
        let second = ConfigSources::new(&written, ELEMENTS, None).load().unwrap();
        assert_eq!(first.config, second.config);
        assert!(second.warnings.is_empty());
        assert_eq!(write_tasks_csv(&second.config.tasks), written);
    }

    #[test]
    fn toml_errors_carry_file_context() {
        let err = ConfigSources::new(HEADER, "[[element]]\nname = ", None)
            .load()
            .unwrap_err();
        assert!(matches!(err, ConfigError::Toml { .. }));
        assert!(err.to_string().contains("elements.toml"));
    }
}
