use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    check_no_stray_text, malformed, parse_real, parse_xml, pos_of, render_attrs, required_attr,
    MarkupError,
};

/// Implicit marker before the first word.
pub const SPEECH_START: &str = "speech-start";
/// Implicit marker after the last word.
pub const SPEECH_END: &str = "speech-end";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpeechToken {
    Word(String),
    Marker(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentionClass {
    Performative,
    Emotion,
    Certainty,
    Emphasis,
    Turn,
}

impl IntentionClass {
    pub const ALL: [IntentionClass; 5] = [
        IntentionClass::Performative,
        IntentionClass::Emotion,
        IntentionClass::Certainty,
        IntentionClass::Emphasis,
        IntentionClass::Turn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntentionClass::Performative => "performative",
            IntentionClass::Emotion => "emotion",
            IntentionClass::Certainty => "certainty",
            IntentionClass::Emphasis => "emphasis",
            IntentionClass::Turn => "turn",
        }
    }
}

impl fmt::Display for IntentionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntentionClass {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

/// A communicative intention anchored to a span of speech.
#[derive(Debug, Clone, PartialEq)]
pub struct Intention {
    pub id: String,
    pub class: IntentionClass,
    pub lexeme: String,
    pub start_ref: String,
    pub end_ref: String,
    /// In `[0, 1]`; defaults to 0.5.
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FmlDocument {
    pub speech: Vec<SpeechToken>,
    pub intentions: Vec<Intention>,
}

impl FmlDocument {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.speech.iter().filter_map(|t| match t {
            SpeechToken::Word(w) => Some(w.as_str()),
            SpeechToken::Marker(_) => None,
        })
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    /// Position of a marker in speech order. `speech-start` sorts before every
    /// token and `speech-end` after every token.
    pub fn marker_order(&self, id: &str) -> Option<usize> {
        if id == SPEECH_START {
            return Some(0);
        }
        if id == SPEECH_END {
            return Some(self.speech.len() + 1);
        }
        self.speech
            .iter()
            .position(|t| matches!(t, SpeechToken::Marker(m) if m == id))
            .map(|i| i + 1)
    }
}

/// Parse the FML dialect:
///
/// ```xml
/// <fml>
///   <speech>I am <tm id="tm1"/> really angry <tm id="tm2"/></speech>
///   <intention class="emotion" lexeme="anger" start="tm1" end="tm2" importance="0.8"/>
/// </fml>
/// ```
pub fn parse_fml(text: &str) -> Result<FmlDocument, MarkupError> {
    let xml = parse_xml(text)?;
    let root = xml.root_element();
    if root.tag_name().name() != "fml" {
        return Err(malformed(
            root,
            format!("expected <fml> root, found <{}>", root.tag_name().name()),
        ));
    }
    check_no_stray_text(root)?;

    let mut doc = FmlDocument::default();
    let mut marker_pos = HashMap::new();
    let mut seen_speech = false;
    let mut intention_nodes = Vec::new();

    for child in root.children().filter(|n| n.is_element()) {
        match child.tag_name().name() {
            "speech" => {
                if seen_speech {
                    return Err(malformed(child, "more than one <speech> element"));
                }
                seen_speech = true;
                for part in child.children() {
                    if part.is_text() {
                        for w in part.text().unwrap_or("").split_whitespace() {
                            doc.speech.push(SpeechToken::Word(w.to_string()));
                        }
                    } else if part.is_element() {
                        if part.tag_name().name() != "tm" {
                            return Err(malformed(
                                part,
                                format!("unexpected <{}> inside <speech>", part.tag_name().name()),
                            ));
                        }
                        let id = required_attr(part, "id")?;
                        if id == SPEECH_START
                            || id == SPEECH_END
                            || marker_pos.insert(id.to_string(), pos_of(part)).is_some()
                        {
                            return Err(MarkupError::DuplicateMarker {
                                pos: pos_of(part),
                                id: id.to_string(),
                            });
                        }
                        doc.speech.push(SpeechToken::Marker(id.to_string()));
                    }
                }
            }
            "intention" => intention_nodes.push(child),
            other => return Err(malformed(child, format!("unexpected <{other}> inside <fml>"))),
        }
    }

    for (i, node) in intention_nodes.into_iter().enumerate() {
        let id = node
            .attribute("id")
            .map(str::to_string)
            .unwrap_or_else(|| format!("i{}", i + 1));
        let class_raw = required_attr(node, "class")?;
        let class = class_raw
            .parse::<IntentionClass>()
            .map_err(|_| MarkupError::UnknownClass {
                pos: pos_of(node),
                value: class_raw.to_string(),
            })?;
        let lexeme = required_attr(node, "lexeme")?.to_string();
        let start_ref = required_attr(node, "start")?.to_string();
        let end_ref = required_attr(node, "end")?.to_string();
        let importance = match node.attribute("importance") {
            Some(raw) => parse_real(node, "importance", raw)?,
            None => 0.5,
        };
        if !(0.0..=1.0).contains(&importance) {
            return Err(MarkupError::InvalidValue {
                pos: pos_of(node),
                attr: "importance".into(),
                msg: format!("{importance} is outside [0, 1]"),
            });
        }
        let mut order = [0usize; 2];
        for (slot, marker) in [&start_ref, &end_ref].into_iter().enumerate() {
            order[slot] =
                doc.marker_order(marker)
                    .ok_or_else(|| MarkupError::UnresolvedMarker {
                        pos: pos_of(node),
                        intention: id.clone(),
                        marker: marker.clone(),
                    })?;
        }
        if order[0] > order[1] {
            return Err(MarkupError::MarkerOrder {
                pos: pos_of(node),
                intention: id,
                start: start_ref,
                end: end_ref,
            });
        }
        doc.intentions.push(Intention {
            id,
            class,
            lexeme,
            start_ref,
            end_ref,
            importance,
        });
    }
    Ok(doc)
}

/// Canonical FML text for a valid document.
pub fn serialize_fml(doc: &FmlDocument) -> String {
    let speech = doc
        .speech
        .iter()
        .map(|t| match t {
            SpeechToken::Word(w) => super::escape(w),
            SpeechToken::Marker(m) => format!("<tm{}/>", render_attrs(&mut [("id", m.clone())])),
        })
        .collect::<Vec<_>>()
        .join(" ");
    let mut out = format!("<fml>\n  <speech>{speech}</speech>\n");
    for i in &doc.intentions {
        let mut attrs = [
            ("class", i.class.to_string()),
            ("end", i.end_ref.clone()),
            ("id", i.id.clone()),
            ("importance", i.importance.to_string()),
            ("lexeme", i.lexeme.clone()),
            ("start", i.start_ref.clone()),
        ];
        out.push_str(&format!("  <intention{}/>\n", render_attrs(&mut attrs)));
    }
    out.push_str("</fml>\n");
    out
}
