//! FML text to BML to timeline in one call.

use thiserror::Error;

use crate::lexicon::{LexiconError, Libraries};
use crate::markup::{parse_fml, BmlDocument, MarkupError};
use crate::planner::{estimate_speech_timing, plan_behaviors, SpeechRate};
use crate::realizer::{realize_timeline, KeyframeTimeline, RealizeError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Markup(#[from] MarkupError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
}

pub fn compile_fml(
    fml_text: &str,
    libs: &Libraries,
    rate: SpeechRate,
    seed: u64,
) -> Result<BmlDocument, PipelineError> {
    let doc = parse_fml(fml_text)?;
    let timing = estimate_speech_timing(&doc, rate);
    let bml = plan_behaviors(&doc, libs, &timing, seed)?;
    bml.validate()?;
    Ok(bml)
}

pub fn realize<S: Scalar>(bml: &BmlDocument, libs: &Libraries, fps: f64) -> Result<KeyframeTimeline<S>, PipelineError> {
    Ok(realize_timeline::<S>(bml, libs)?.with_fps(fps))
}
