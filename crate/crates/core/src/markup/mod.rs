//! FML and BML document models with their XML dialects.
//!
//! Both dialects are deliberately small; `docs/markup.md` has the schema.
//! Parsers either return a fully validated document or a positioned
//! [`MarkupError`]. Serializers emit a canonical form (alphabetical attribute
//! order, two-space indentation) that re-parses to an equal document.

mod bml;
mod fml;

use std::fmt;

use thiserror::Error;

pub use bml::{parse_bml, serialize_bml, BmlDocument, Modality, Signal, SyncPoint};
pub use fml::{
    parse_fml, serialize_fml, FmlDocument, Intention, IntentionClass, SpeechToken, SPEECH_END,
    SPEECH_START,
};

/// 1-based line/column in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkupError {
    #[error("{pos}: malformed markup: {msg}")]
    Malformed { pos: Pos, msg: String },
    #[error("{pos}: duplicate time marker `{id}`")]
    DuplicateMarker { pos: Pos, id: String },
    #[error("{pos}: intention `{intention}` references unknown marker `{marker}`")]
    UnresolvedMarker {
        pos: Pos,
        intention: String,
        marker: String,
    },
    #[error("{pos}: intention `{intention}` starts at `{start}` which comes after its end `{end}`")]
    MarkerOrder {
        pos: Pos,
        intention: String,
        start: String,
        end: String,
    },
    #[error("{pos}: unknown intention class `{value}`")]
    UnknownClass { pos: Pos, value: String },
    #[error("{pos}: unknown modality `{value}`")]
    UnknownModality { pos: Pos, value: String },
    #[error("{pos}: unknown sync point `{value}`")]
    UnknownSyncPoint { pos: Pos, value: String },
    #[error("{pos}: signal `{signal}` is missing its `{point}` sync")]
    MissingSync {
        pos: Pos,
        signal: String,
        point: SyncPoint,
    },
    #[error("{pos}: signal `{signal}`: `{earlier}` ({earlier_t}) must not come after `{later}` ({later_t})")]
    SyncOrder {
        pos: Pos,
        signal: String,
        earlier: SyncPoint,
        earlier_t: f64,
        later: SyncPoint,
        later_t: f64,
    },
    #[error("{pos}: attribute `{attr}`: {msg}")]
    InvalidValue { pos: Pos, attr: String, msg: String },
    #[error("{pos}: duplicate signal id `{id}`")]
    DuplicateSignal { pos: Pos, id: String },
}

impl MarkupError {
    pub fn pos(&self) -> Pos {
        match self {
            MarkupError::Malformed { pos, .. }
            | MarkupError::DuplicateMarker { pos, .. }
            | MarkupError::UnresolvedMarker { pos, .. }
            | MarkupError::MarkerOrder { pos, .. }
            | MarkupError::UnknownClass { pos, .. }
            | MarkupError::UnknownModality { pos, .. }
            | MarkupError::UnknownSyncPoint { pos, .. }
            | MarkupError::MissingSync { pos, .. }
            | MarkupError::SyncOrder { pos, .. }
            | MarkupError::InvalidValue { pos, .. }
            | MarkupError::DuplicateSignal { pos, .. } => *pos,
        }
    }
}

// Shared XML plumbing for both dialects.

fn parse_xml(text: &str) -> Result<roxmltree::Document<'_>, MarkupError> {
    roxmltree::Document::parse(text).map_err(|e| {
        let p = e.pos();
        MarkupError::Malformed {
            pos: Pos {
                line: p.row,
                column: p.col,
            },
            msg: e.to_string(),
        }
    })
}

fn pos_of(node: roxmltree::Node<'_, '_>) -> Pos {
    let p = node.document().text_pos_at(node.range().start);
    Pos {
        line: p.row,
        column: p.col,
    }
}

fn malformed(node: roxmltree::Node<'_, '_>, msg: impl Into<String>) -> MarkupError {
    MarkupError::Malformed {
        pos: pos_of(node),
        msg: msg.into(),
    }
}

fn required_attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, MarkupError> {
    node.attribute(name).ok_or_else(|| {
        malformed(
            node,
            format!("<{}> is missing attribute `{name}`", node.tag_name().name()),
        )
    })
}

fn parse_real(node: roxmltree::Node<'_, '_>, attr: &str, raw: &str) -> Result<f64, MarkupError> {
    let v: f64 = raw.trim().parse().map_err(|_| MarkupError::InvalidValue {
        pos: pos_of(node),
        attr: attr.to_string(),
        msg: format!("`{raw}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(MarkupError::InvalidValue {
            pos: pos_of(node),
            attr: attr.to_string(),
            msg: format!("`{raw}` is not finite"),
        });
    }
    Ok(v)
}

/// Rejects non-whitespace text between elements.
fn check_no_stray_text(node: roxmltree::Node<'_, '_>) -> Result<(), MarkupError> {
    for child in node.children() {
        if child.is_text() && !child.text().unwrap_or("").trim().is_empty() {
            return Err(malformed(
                child,
                format!("unexpected text inside <{}>", node.tag_name().name()),
            ));
        }
    }
    Ok(())
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Attributes sorted by name, rendered as ` a="x" b="y"`.
fn render_attrs(attrs: &mut [(&str, String)]) -> String {
    attrs.sort_by(|a, b| a.0.cmp(b.0));
    attrs
        .iter()
        .map(|(k, v)| format!(" {k}=\"{}\"", escape(v)))
        .collect()
}
