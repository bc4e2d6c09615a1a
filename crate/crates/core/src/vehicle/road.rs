use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Highest modeled automation level (AD mode).
pub const AD_LEVEL: u8 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum RoadError {
    #[error("horizon must be > 0, got {0}")]
    Horizon(f64),
    #[error("segments must partition [0, {horizon}): {reason}")]
    Partition { horizon: f64, reason: String },
    #[error("level {0} is outside 0..=4")]
    Level(u8),
    #[error("no dwell parameters for level {0}")]
    MissingLevel(u8),
    #[error("level {level}: {reason}")]
    Params { level: u8, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub max_level: u8,
}

/// Maximum available automation level over `[0, horizon)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadTimeline {
    segments: Vec<Segment>,
    horizon: f64,
}

impl RoadTimeline {
    pub fn new(segments: Vec<Segment>, horizon: f64) -> Result<Self, RoadError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(RoadError::Horizon(horizon));
        }
        let bad = |reason: String| RoadError::Partition { horizon, reason };
        let first = segments.first().ok_or_else(|| bad("no segments".into()))?;
        if first.start != 0.0 {
            return Err(bad(format!("first segment starts at {}", first.start)));
        }
        for s in &segments {
            if s.max_level > AD_LEVEL {
                return Err(RoadError::Level(s.max_level));
            }
            if !(s.end > s.start) {
                return Err(bad(format!("empty segment [{}, {})", s.start, s.end)));
            }
        }
        for pair in segments.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(bad(format!("gap or overlap at {} / {}", pair[0].end, pair[1].start)));
            }
        }
        let last = segments.last().expect("non-empty");
        if last.end != horizon {
            return Err(bad(format!("last segment ends at {}", last.end)));
        }
        Ok(Self { segments, horizon })
    }

    /// One segment of constant availability.
    pub fn constant(max_level: u8, horizon: f64) -> Result<Self, RoadError> {
        Self::new(
            vec![Segment {
                start: 0.0,
                end: horizon,
                max_level,
            }],
            horizon,
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segment_index_at(&self, t: f64) -> usize {
        // First segment whose end is beyond t; times past the horizon map to
        // the last segment.
        self.segments
            .partition_point(|s| s.end <= t)
            .min(self.segments.len() - 1)
    }

    pub fn max_level_at(&self, t: f64) -> u8 {
        self.segments[self.segment_index_at(t)].max_level
    }

    /// Stretches the last segment so the timeline covers `horizon`.
    pub fn extended_to(mut self, horizon: f64) -> Self {
        if horizon > self.horizon {
            self.segments.last_mut().expect("non-empty").end = horizon;
            self.horizon = horizon;
        }
        self
    }
}

/// Segment length distribution: `min + Exp(mean - min)`, clamped at `max`.
/// `mean == min` gives a fixed length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dwell {
    pub mean: f64,
    #[serde(default)]
    pub min: f64,
    #[serde(default)]
    pub max: Option<f64>,
}

impl Dwell {
    pub fn fixed(length: f64) -> Self {
        Self {
            mean: length,
            min: length,
            max: None,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let spread = self.mean - self.min;
        let d = if spread == 0.0 {
            self.min
        } else {
            let exp = Exp::new(1.0 / spread).expect("validated spread > 0");
            self.min + exp.sample(rng)
        };
        match self.max {
            Some(max) => d.min(max),
            None => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NextLevel {
    pub level: u8,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelProcess {
    pub level: u8,
    #[serde(flatten)]
    pub dwell: Dwell,
    #[serde(default)]
    pub next: Vec<NextLevel>,
}

/// Semi-Markov process over the maximum available level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadProcessParams {
    pub initial_level: u8,
    #[serde(rename = "level")]
    pub levels: Vec<LevelProcess>,
}

impl RoadProcessParams {
    fn find(&self, level: u8) -> Result<&LevelProcess, RoadError> {
        self.levels
            .iter()
            .find(|l| l.level == level)
            .ok_or(RoadError::MissingLevel(level))
    }

    pub fn validate(&self) -> Result<(), RoadError> {
        if self.initial_level > AD_LEVEL {
            return Err(RoadError::Level(self.initial_level));
        }
        self.find(self.initial_level)?;
        for lp in &self.levels {
            let err = |reason: String| RoadError::Params {
                level: lp.level,
                reason,
            };
            if lp.level > AD_LEVEL {
                return Err(RoadError::Level(lp.level));
            }
            let d = lp.dwell;
            if !(d.mean > 0.0 && d.mean.is_finite()) {
                return Err(err(format!("dwell mean must be > 0, got {}", d.mean)));
            }
            if !(d.min >= 0.0 && d.min <= d.mean) {
                return Err(err(format!("dwell min {} must lie in [0, mean]", d.min)));
            }
            if let Some(max) = d.max {
                if !(max > 0.0 && max >= d.min) {
                    return Err(err(format!("dwell max {max} must be > 0 and >= min")));
                }
            }
            let total: f64 = lp.next.iter().map(|n| n.weight).sum();
            for n in &lp.next {
                if n.level == lp.level {
                    return Err(err("self-transition".into()));
                }
                if !(n.weight >= 0.0 && n.weight.is_finite()) {
                    return Err(err(format!("negative weight towards level {}", n.level)));
                }
                self.find(n.level)?;
            }
            if !lp.next.is_empty() && !(total > 0.0) {
                return Err(err("transition weights sum to zero".into()));
            }
        }
        Ok(())
    }
}

/// Draws a timeline covering `[0, horizon)` from the road substream.
pub fn generate_timeline<R: Rng + ?Sized>(
    params: &RoadProcessParams,
    rng: &mut R,
    horizon: f64,
) -> Result<RoadTimeline, RoadError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(RoadError::Horizon(horizon));
    }
    params.validate()?;

    let mut segments = Vec::new();
    let mut level = params.initial_level;
    let mut t = 0.0;
    loop {
        let lp = params.find(level)?;
        if lp.next.is_empty() {
            segments.push(Segment {
                start: t,
                end: horizon,
                max_level: level,
            });
            break;
        }
        let end = (t + lp.dwell.sample(rng)).min(horizon);
        segments.push(Segment {
            start: t,
            end,
            max_level: level,
        });
        if end >= horizon {
            break;
        }
        t = end;
        level = pick_next(&lp.next, rng);
    }
    RoadTimeline::new(segments, horizon)
}

fn pick_next<R: Rng + ?Sized>(next: &[NextLevel], rng: &mut R) -> u8 {
    if next.len() == 1 {
        return next[0].level;
    }
    let total: f64 = next.iter().map(|n| n.weight).sum();
    let mut u = rng.random::<f64>() * total;
    for n in next {
        if u < n.weight {
            return n.level;
        }
        u -= n.weight;
    }
    next.iter()
        .rev()
        .find(|n| n.weight > 0.0)
        .expect("positive weight")
        .level
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RandomStreams;

    fn alternating(a: Dwell, b: Dwell) -> RoadProcessParams {
        RoadProcessParams {
            initial_level: 4,
            levels: vec![
                LevelProcess {
                    level: 4,
                    dwell: a,
                    next: vec![NextLevel { level: 2, weight: 1.0 }],
                },
                LevelProcess {
                    level: 2,
                    dwell: b,
                    next: vec![NextLevel { level: 4, weight: 1.0 }],
                },
            ],
        }
    }

    #[test]
    fn single_state_is_one_segment() {
        let params = RoadProcessParams {
            initial_level: 4,
            levels: vec![LevelProcess {
                level: 4,
                dwell: Dwell::fixed(100.0),
                next: vec![],
            }],
        };
        let mut rng = RandomStreams::new(1).stream("road");
        let tl = generate_timeline(&params, &mut rng, 1000.0).unwrap();
        assert_eq!(
            tl.segments(),
            &[Segment {
                start: 0.0,
                end: 1000.0,
                max_level: 4
            }]
        );
    }

    #[test]
    fn fixed_dwell_alternation() {
        let params = alternating(Dwell::fixed(300.0), Dwell::fixed(100.0));
        let mut rng = RandomStreams::new(1).stream("road");
        let tl = generate_timeline(&params, &mut rng, 800.0).unwrap();
        let got: Vec<_> = tl.segments().iter().map(|s| (s.start, s.end, s.max_level)).collect();
        assert_eq!(
            got,
            vec![(0.0, 300.0, 4), (300.0, 400.0, 2), (400.0, 700.0, 4), (700.0, 800.0, 2)]
        );
        assert_eq!(tl.max_level_at(299.999), 4);
        assert_eq!(tl.max_level_at(300.0), 2);
        assert_eq!(tl.max_level_at(800.0), 2);
    }

    #[test]
    fn empirical_dwell_means() {
        let params = alternating(
            Dwell {
                mean: 400.0,
                min: 60.0,
                max: None,
            },
            Dwell {
                mean: 150.0,
                min: 0.0,
                max: None,
            },
        );
        let mut rng = RandomStreams::new(77).stream("road");
        let tl = generate_timeline(&params, &mut rng, 2_000_000.0).unwrap();
        let segs = &tl.segments()[..tl.segments().len() - 1];
        for (level, mean) in [(4u8, 400.0), (2, 150.0)] {
            let lens: Vec<f64> = segs
                .iter()
                .filter(|s| s.max_level == level)
                .map(|s| s.end - s.start)
                .collect();
            assert!(lens.len() >= 1000, "only {} segments", lens.len());
            let m = lens.iter().sum::<f64>() / lens.len() as f64;
            assert!((m - mean).abs() / mean < 0.05, "level {level}: {m} vs {mean}");
        }
    }

    #[test]
    fn degenerate_params_rejected() {
        let p = alternating(Dwell::fixed(0.0), Dwell::fixed(10.0));
        let mut rng = RandomStreams::new(1).stream("road");
        assert!(generate_timeline(&p, &mut rng, 100.0).is_err());
        let mut p = alternating(Dwell::fixed(10.0), Dwell::fixed(10.0));
        p.levels[0].next[0].level = 4;
        assert!(p.validate().is_err());
        let p = alternating(Dwell::fixed(10.0), Dwell::fixed(10.0));
        assert!(generate_timeline(&p, &mut rng, 0.0).is_err());
    }

    #[test]
    fn partition_is_checked() {
        let seg = |start, end, max_level| Segment { start, end, max_level };
        assert!(RoadTimeline::new(vec![seg(0.0, 5.0, 4), seg(6.0, 10.0, 2)], 10.0).is_err());
        assert!(RoadTimeline::new(vec![seg(0.0, 5.0, 4), seg(5.0, 9.0, 2)], 10.0).is_err());
        assert!(RoadTimeline::new(vec![seg(0.0, 10.0, 5)], 10.0).is_err());
        assert!(RoadTimeline::new(vec![seg(0.0, 5.0, 4), seg(5.0, 10.0, 2)], 10.0).is_ok());
    }
}
