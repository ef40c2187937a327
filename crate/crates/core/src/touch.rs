//! Social touch classification, proxemics zoning, gaze attention and the
//! gate that drops planned touch gestures when the user is out of reach or
//! not attending.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markup::BmlDocument;

/// Signals whose lexeme starts with this are touch gestures.
pub const TOUCH_PREFIX: &str = "touch:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyRegion {
    Hand,
    Arm,
    Shoulder,
    Back,
    Other,
}

/// One touch event as seen by the hand tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchFeatures {
    pub has_movement: bool,
    /// Hand velocity at initial contact, m/s.
    pub intensity_mps: f64,
    pub body_region: BodyRegion,
    /// The hand moves along the body during contact.
    pub dynamic: bool,
    pub speed_mps: f64,
    pub duration_s: f64,
    /// Carried through; no rule uses it.
    #[serde(default)]
    pub pressure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TouchError {
    #[error("{field} must be a non-negative number, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("speed_mps must be 0 for a static touch, got {0}")]
    StaticSpeed(f64),
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("proxemics thresholds must increase: {0:?}")]
    Thresholds([f64; 3]),
    #[error("touch features, record {record}: {msg}")]
    Csv { record: usize, msg: String },
}

impl TouchFeatures {
    pub fn validate(&self) -> Result<(), TouchError> {
        for (field, value) in [
            ("intensity_mps", self.intensity_mps),
            ("speed_mps", self.speed_mps),
            ("duration_s", self.duration_s),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(TouchError::Negative { field, value });
            }
        }
        if !self.dynamic && self.speed_mps != 0.0 {
            return Err(TouchError::StaticSpeed(self.speed_mps));
        }
        Ok(())
    }
}

/// Read touch records from CSV with a header row; every record is validated.
pub fn read_touch_csv<R: Read>(input: R) -> Result<Vec<TouchFeatures>, TouchError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<TouchFeatures>().enumerate() {
        let f = rec.map_err(|e| TouchError::Csv { record: i + 1, msg: e.to_string() })?;
        f.validate().map_err(|e| TouchError::Csv { record: i + 1, msg: e.to_string() })?;
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TouchClass {
    Hit,
    Tap,
    Caress,
    Stroke,
}

impl fmt::Display for TouchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TouchClass::Hit => "hit",
            TouchClass::Tap => "tap",
            TouchClass::Caress => "caress",
            TouchClass::Stroke => "stroke",
        })
    }
}

/// Anything that can label a touch; a trained model can replace the rules.
pub trait TouchClassifier {
    fn classify(&self, f: &TouchFeatures) -> TouchClass;
}

/// Threshold rules over contact velocity, duration and sliding speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleClassifier {
    /// Contacts shorter than this are brief.
    pub brief_s: f64,
    /// Brief static contacts at or above this velocity are hits.
    pub hit_intensity_mps: f64,
    /// Sliding contacts at or above this speed are strokes.
    pub stroke_speed_mps: f64,
}

impl Default for RuleClassifier {
    fn default() -> Self {
        RuleClassifier {
            brief_s: 0.3,
            hit_intensity_mps: 0.8,
            stroke_speed_mps: 0.15,
        }
    }
}

impl TouchClassifier for RuleClassifier {
    fn classify(&self, f: &TouchFeatures) -> TouchClass {
        if f.dynamic {
            if f.speed_mps < self.stroke_speed_mps {
                TouchClass::Caress
            } else {
                TouchClass::Stroke
            }
        } else if f.duration_s < self.brief_s && f.intensity_mps >= self.hit_intensity_mps {
            TouchClass::Hit
        } else {
            TouchClass::Tap
        }
    }
}

pub fn classify_touch(f: &TouchFeatures) -> TouchClass {
    RuleClassifier::default().classify(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProxemicsZone {
    Intimate,
    Personal,
    Social,
    Public,
}

impl ProxemicsZone {
    pub fn allows_touch(self) -> bool {
        matches!(self, ProxemicsZone::Intimate | ProxemicsZone::Personal)
    }
}

impl fmt::Display for ProxemicsZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProxemicsZone::Intimate => "intimate",
            ProxemicsZone::Personal => "personal",
            ProxemicsZone::Social => "social",
            ProxemicsZone::Public => "public",
        })
    }
}

impl FromStr for ProxemicsZone {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "intimate" => Ok(ProxemicsZone::Intimate),
            "personal" => Ok(ProxemicsZone::Personal),
            "social" => Ok(ProxemicsZone::Social),
            "public" => Ok(ProxemicsZone::Public),
            _ => Err(format!("unknown zone `{s}`")),
        }
    }
}

/// Upper bounds (exclusive) of the intimate, personal and social zones, in
/// metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxemicsThresholds(pub [f64; 3]);

impl Default for ProxemicsThresholds {
    fn default() -> Self {
        ProxemicsThresholds([0.45, 1.2, 3.6])
    }
}

impl ProxemicsThresholds {
    pub fn new(bounds: [f64; 3]) -> Result<Self, TouchError> {
        if bounds[0] > 0.0 && bounds[0] < bounds[1] && bounds[1] < bounds[2] && bounds[2].is_finite() {
            Ok(ProxemicsThresholds(bounds))
        } else {
            Err(TouchError::Thresholds(bounds))
        }
    }

    pub fn classify(&self, distance_m: f64) -> Result<ProxemicsZone, TouchError> {
        if !(distance_m >= 0.0) {
            return Err(TouchError::NegativeDistance(distance_m));
        }
        let [a, b, c] = self.0;
        Ok(if distance_m < a {
            ProxemicsZone::Intimate
        } else if distance_m < b {
            ProxemicsZone::Personal
        } else if distance_m < c {
            ProxemicsZone::Social
        } else {
            ProxemicsZone::Public
        })
    }
}

pub fn classify_proxemics(distance_m: f64) -> Result<ProxemicsZone, TouchError> {
    ProxemicsThresholds::default().classify(distance_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GazeTarget {
    Agent,
    AgentRelatedObject,
    TopicObject,
    Other,
}

impl GazeTarget {
    pub const ALL: [GazeTarget; 4] = [
        GazeTarget::Agent,
        GazeTarget::AgentRelatedObject,
        GazeTarget::TopicObject,
        GazeTarget::Other,
    ];
}

impl FromStr for GazeTarget {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "AGENT" => Ok(GazeTarget::Agent),
            "AGENT_RELATED_OBJECT" => Ok(GazeTarget::AgentRelatedObject),
            "TOPIC_OBJECT" => Ok(GazeTarget::TopicObject),
            "OTHER" => Ok(GazeTarget::Other),
            _ => Err(format!("unknown gaze target `{s}`")),
        }
    }
}

pub fn attention_score(g: GazeTarget) -> f64 {
    match g {
        GazeTarget::Agent => 1.0,
        GazeTarget::AgentRelatedObject => 0.7,
        GazeTarget::TopicObject => 0.5,
        GazeTarget::Other => 0.0,
    }
}

pub const MIN_TOUCH_ATTENTION: f64 = 0.5;

/// Drop touch gestures unless the user is within personal distance and
/// attending (`attention >= 0.5`). Other signals pass through unchanged.
pub fn gate_touch(planned: &BmlDocument, zone: ProxemicsZone, attention: f64) -> BmlDocument {
    let allow = zone.allows_touch() && attention >= MIN_TOUCH_ATTENTION;
    BmlDocument {
        signals: planned
            .signals
            .iter()
            .filter(|s| allow || !s.lexeme.starts_with(TOUCH_PREFIX))
            .cloned()
            .collect(),
        utterance_duration_s: planned.utterance_duration_s,
    }
}
