//! Incremental realization: a timeline is cut into fixed-period chunks that
//! are dispatched on a clock and can be interrupted, resumed, stopped or
//! cleared while playing.

mod chunk;
mod output;
mod scheduler;

pub use output::{frames_in, FrameChunkSink};

pub use chunk::{chunk_boundary, chunk_count, chunk_timeline, rest_chunk, Chunk, ChunkError, ChunkKind};
pub use scheduler::{
    run_schedule, ChannelControl, ChunkSink, ControlCommand, ControlEvent, ControlMessage,
    ControlOutcome, ControlResponse, ControlSource, DispatchTrace, Mode, NoControl,
    SchedulerConfig, SchedulerState, ScriptedControl, TraceEvent, VecChunkSink,
    DEFAULT_CHUNK_PERIOD_S, DEFAULT_REST_TRANSITION_S,
};
