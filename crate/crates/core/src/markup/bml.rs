use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    check_no_stray_text, malformed, parse_real, parse_xml, pos_of, render_attrs, required_attr,
    MarkupError, Pos,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Face,
    Gesture,
    Head,
    Gaze,
    Torso,
    Speech,
}

impl Modality {
    pub const ALL: [Modality; 6] = [
        Modality::Face,
        Modality::Gesture,
        Modality::Head,
        Modality::Gaze,
        Modality::Torso,
        Modality::Speech,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Face => "face",
            Modality::Gesture => "gesture",
            Modality::Head => "head",
            Modality::Gaze => "gaze",
            Modality::Torso => "torso",
            Modality::Speech => "speech",
        }
    }

    /// Body modalities where at most one signal may be active at a time.
    pub fn is_exclusive(self) -> bool {
        matches!(
            self,
            Modality::Gesture | Modality::Head | Modality::Gaze | Modality::Torso
        )
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|m| m.as_str() == s).ok_or(())
    }
}

/// Sync points in canonical order; `Ord` follows that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncPoint {
    Start,
    Ready,
    StrokeStart,
    Stroke,
    StrokeEnd,
    Relax,
    End,
}

impl SyncPoint {
    pub const ALL: [SyncPoint; 7] = [
        SyncPoint::Start,
        SyncPoint::Ready,
        SyncPoint::StrokeStart,
        SyncPoint::Stroke,
        SyncPoint::StrokeEnd,
        SyncPoint::Relax,
        SyncPoint::End,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyncPoint::Start => "start",
            SyncPoint::Ready => "ready",
            SyncPoint::StrokeStart => "stroke_start",
            SyncPoint::Stroke => "stroke",
            SyncPoint::StrokeEnd => "stroke_end",
            SyncPoint::Relax => "relax",
            SyncPoint::End => "end",
        }
    }
}

impl fmt::Display for SyncPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyncPoint {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub id: String,
    pub modality: Modality,
    pub lexeme: String,
    /// Always holds `Start` and `End`.
    pub sync: BTreeMap<SyncPoint, f64>,
    /// Higher wins conflicts.
    pub priority: i64,
}

impl Signal {
    /// A signal with only `start`/`end` set.
    pub fn new(
        id: impl Into<String>,
        modality: Modality,
        lexeme: impl Into<String>,
        start: f64,
        end: f64,
    ) -> Self {
        let mut sync = BTreeMap::new();
        sync.insert(SyncPoint::Start, start);
        sync.insert(SyncPoint::End, end);
        Signal {
            id: id.into(),
            modality,
            lexeme: lexeme.into(),
            sync,
            priority: 0,
        }
    }

    pub fn with_sync(mut self, point: SyncPoint, t: f64) -> Self {
        self.sync.insert(point, t);
        self
    }

    pub fn with_priority(mut self, priority: i64) -> Self {
        self.priority = priority;
        self
    }

    pub fn start(&self) -> f64 {
        self.sync.get(&SyncPoint::Start).copied().unwrap_or(0.0)
    }

    pub fn end(&self) -> f64 {
        self.sync.get(&SyncPoint::End).copied().unwrap_or(0.0)
    }

    pub fn get(&self, point: SyncPoint) -> Option<f64> {
        self.sync.get(&point).copied()
    }

    /// Checks the canonical-order and presence invariants.
    pub fn validate(&self) -> Result<(), MarkupError> {
        self.validate_at(Pos::default())
    }

    fn validate_at(&self, pos: Pos) -> Result<(), MarkupError> {
        for point in [SyncPoint::Start, SyncPoint::End] {
            if !self.sync.contains_key(&point) {
                return Err(MarkupError::MissingSync {
                    pos,
                    signal: self.id.clone(),
                    point,
                });
            }
        }
        let mut prev: Option<(SyncPoint, f64)> = None;
        for (&point, &t) in &self.sync {
            if !t.is_finite() || t < 0.0 {
                return Err(MarkupError::InvalidValue {
                    pos,
                    attr: format!("{}.{point}", self.id),
                    msg: format!("sync time {t} must be finite and non-negative"),
                });
            }
            if let Some((pp, pt)) = prev {
                if pt > t {
                    return Err(MarkupError::SyncOrder {
                        pos,
                        signal: self.id.clone(),
                        earlier: pp,
                        earlier_t: pt,
                        later: point,
                        later_t: t,
                    });
                }
            }
            prev = Some((point, t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BmlDocument {
    pub signals: Vec<Signal>,
    pub utterance_duration_s: f64,
}

impl BmlDocument {
    pub fn validate(&self) -> Result<(), MarkupError> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.signals {
            if !seen.insert(s.id.as_str()) {
                return Err(MarkupError::DuplicateSignal {
                    pos: Pos::default(),
                    id: s.id.clone(),
                });
            }
            s.validate()?;
        }
        Ok(())
    }

    /// True when every sync time lies in `[0, duration + max_decay]`.
    pub fn within_bounds(&self, max_decay: f64) -> bool {
        let limit = self.utterance_duration_s + max_decay;
        self.signals
            .iter()
            .flat_map(|s| s.sync.values())
            .all(|&t| (0.0..=limit + 1e-9).contains(&t))
    }

    pub fn max_end(&self) -> f64 {
        self.signals.iter().map(Signal::end).fold(0.0, f64::max)
    }
}

/// Parse the BML dialect:
///
/// ```xml
/// <bml duration="2.0">
///   <signal id="s1" modality="face" lexeme="frown" priority="8">
///     <sync name="start" t="0.4"/>
///     <sync name="end" t="1.9"/>
///   </signal>
/// </bml>
/// ```
///
/// `duration` defaults to the latest speech-signal end (0 without speech).
pub fn parse_bml(text: &str) -> Result<BmlDocument, MarkupError> {
    let xml = parse_xml(text)?;
    let root = xml.root_element();
    if root.tag_name().name() != "bml" {
        return Err(malformed(
            root,
            format!("expected <bml> root, found <{}>", root.tag_name().name()),
        ));
    }
    check_no_stray_text(root)?;

    let mut doc = BmlDocument::default();
    let mut ids = std::collections::HashSet::new();
    for node in root.children().filter(|n| n.is_element()) {
        if node.tag_name().name() != "signal" {
            return Err(malformed(
                node,
                format!("unexpected <{}> inside <bml>", node.tag_name().name()),
            ));
        }
        check_no_stray_text(node)?;
        let id = required_attr(node, "id")?.to_string();
        if !ids.insert(id.clone()) {
            return Err(MarkupError::DuplicateSignal { pos: pos_of(node), id });
        }
        let modality_raw = required_attr(node, "modality")?;
        let modality =
            modality_raw
                .parse::<Modality>()
                .map_err(|_| MarkupError::UnknownModality {
                    pos: pos_of(node),
                    value: modality_raw.to_string(),
                })?;
        let lexeme = required_attr(node, "lexeme")?.to_string();
        let priority = match node.attribute("priority") {
            Some(raw) => raw.trim().parse::<i64>().map_err(|_| MarkupError::InvalidValue {
                pos: pos_of(node),
                attr: "priority".into(),
                msg: format!("`{raw}` is not an integer"),
            })?,
            None => 0,
        };
        let mut sync = BTreeMap::new();
        for s in node.children().filter(|n| n.is_element()) {
            if s.tag_name().name() != "sync" {
                return Err(malformed(
                    s,
                    format!("unexpected <{}> inside <signal>", s.tag_name().name()),
                ));
            }
            let name = required_attr(s, "name")?;
            let point = name
                .parse::<SyncPoint>()
                .map_err(|_| MarkupError::UnknownSyncPoint {
                    pos: pos_of(s),
                    value: name.to_string(),
                })?;
            let t = parse_real(s, "t", required_attr(s, "t")?)?;
            if sync.insert(point, t).is_some() {
                return Err(malformed(s, format!("sync `{point}` given twice")));
            }
        }
        let signal = Signal {
            id,
            modality,
            lexeme,
            sync,
            priority,
        };
        signal.validate_at(pos_of(node))?;
        doc.signals.push(signal);
    }

    doc.utterance_duration_s = match root.attribute("duration") {
        Some(raw) => {
            let d = parse_real(root, "duration", raw)?;
            if d < 0.0 {
                return Err(MarkupError::InvalidValue {
                    pos: pos_of(root),
                    attr: "duration".into(),
                    msg: format!("{d} is negative"),
                });
            }
            d
        }
        None => doc
            .signals
            .iter()
            .filter(|s| s.modality == Modality::Speech)
            .map(Signal::end)
            .fold(0.0, f64::max),
    };
    Ok(doc)
}

/// Canonical BML text for a valid document.
pub fn serialize_bml(doc: &BmlDocument) -> String {
    let mut out = format!(
        "<bml{}>\n",
        render_attrs(&mut [("duration", doc.utterance_duration_s.to_string())])
    );
    for s in &doc.signals {
        let mut attrs = [
            ("id", s.id.clone()),
            ("lexeme", s.lexeme.clone()),
            ("modality", s.modality.to_string()),
            ("priority", s.priority.to_string()),
        ];
        out.push_str(&format!("  <signal{}>\n", render_attrs(&mut attrs)));
        for (point, t) in &s.sync {
            let mut attrs = [("name", point.to_string()), ("t", t.to_string())];
            out.push_str(&format!("    <sync{}/>\n", render_attrs(&mut attrs)));
        }
        out.push_str("  </signal>\n");
    }
    out.push_str("</bml>\n");
    out
}
