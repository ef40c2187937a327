//! Real-time multimodal behavior realization.
//!
//! Intentions written in FML are planned into BML signals, realized into
//! interpolated keyframe timelines, and dispatched either chunk by chunk or
//! frame by frame over OSC. Turn-taking and touch gating sit on top.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the common choices.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dialogue;
pub mod framelevel;
pub mod incremental;
pub mod lexicon;
pub mod markup;
pub mod pipeline;
pub mod planner;
pub mod realizer;
pub mod rng;
pub mod scalar;
pub mod time;
pub mod touch;

pub use scalar::Scalar;
pub use time::{Clock, Tick, VirtualClock, WallClock};

pub type Timeline = realizer::KeyframeTimeline<f64>;
pub type Timeline32 = realizer::KeyframeTimeline<f32>;
pub type Keyframe = realizer::Keyframe<f64>;
pub type Keyframe32 = realizer::Keyframe<f32>;
pub type Chunk = incremental::Chunk<f64>;
pub type Chunk32 = incremental::Chunk<f32>;
