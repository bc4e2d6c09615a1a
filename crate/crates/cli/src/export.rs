//! Plot-ready CSVs derived from a timeline trace.

use std::collections::BTreeMap;
use std::fmt::Write;

use cockpit_sim::metrics::{TimelineTrace, TraceKind};
use cockpit_sim::vehicle::RoadTimeline;

/// State after every trace record: a step series of level, road maximum,
/// active workload sums and awareness.
pub fn timeline_csv(trace: &TimelineTrace) -> String {
    let mut out = String::from("time,kind,subject,level,road_max,cognitive_sum,perceptual_sum,awareness\n");
    for r in &trace.records {
        let kind = r.kind.as_str();
        let _ = writeln!(
            out,
            "{},{kind},{},{},{},{},{},{}",
            r.time, r.subject, r.level, r.road_max, r.cognitive_sum, r.perceptual_sum, r.awareness
        );
    }
    out
}

/// One row per executed task instance: a Gantt chart of the cockpit.
pub fn executions_csv(trace: &TimelineTrace) -> String {
    let mut open = BTreeMap::new();
    let mut rows = Vec::new();
    for r in &trace.records {
        let Some(id) = r.instance else { continue };
        match r.kind {
            TraceKind::TaskStart => {
                open.insert(id, (r.subject.clone(), r.time, r.level));
            }
            TraceKind::TaskEnd => {
                if let Some((task, start, level)) = open.remove(&id) {
                    rows.push((start, id, task, r.time, level));
                }
            }
            _ => {}
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = String::from("instance,task,start,end,level\n");
    for (start, id, task, end, level) in rows {
        let _ = writeln!(out, "{id},{task},{start},{end},{level}");
    }
    out
}

pub fn road_csv(timeline: &RoadTimeline) -> String {
    let mut out = String::from("start,end,max_level\n");
    for s in timeline.segments() {
        let _ = writeln!(out, "{},{},{}", s.start, s.end, s.max_level);
    }
    out
}

/// Parses a seeds file: unsigned integers separated by whitespace or commas,
/// `#` starts a comment.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            seeds.push(
                tok.parse()
                    .map_err(|_| format!("line {}: `{tok}` is not a seed", i + 1))?,
            );
        }
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_file_formats() {
        assert_eq!(parse_seeds("1 2,3\n# skip\n4 # five\n").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_seeds("1\n-2\n").unwrap_err().starts_with("line 2"));
    }
}
