//! `bmlrt` command-line front-end.

mod config;
mod control;

use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use bmlrt::dialogue::{run_interaction_loop, Scenario};
use bmlrt::framelevel::{read_frame_stream, write_frame_stream, FrameSink, NullSink, UdpSink};
use bmlrt::incremental::{
    chunk_timeline, run_schedule, ChannelControl, ControlSource, FrameChunkSink, NoControl,
    SchedulerConfig, SchedulerState, ScriptedControl, TraceEvent, DEFAULT_CHUNK_PERIOD_S,
    DEFAULT_REST_TRANSITION_S,
};
use bmlrt::lexicon::{load_libraries, Libraries};
use bmlrt::markup::{parse_bml, parse_fml, serialize_bml};
use bmlrt::pipeline::{compile_fml, realize};
use bmlrt::planner::SpeechRate;
use bmlrt::realizer::sample_frames;
use bmlrt::touch::{attention_score, classify_proxemics, classify_touch, gate_touch, read_touch_csv, GazeTarget};
use bmlrt::{Clock, Timeline, VirtualClock, WallClock};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "bmlrt", version, about = "Multimodal behavior realization: FML → BML → keyframes → frames")]
struct Cli {
    /// TOML file with defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan FML intentions into BML signals.
    Compile(CompileArgs),
    /// Realize BML into a frame stream (one JSON object per line).
    Realize(RealizeArgs),
    /// Dispatch a BML timeline chunk by chunk with live control.
    Play(PlayArgs),
    /// Run the closed interaction loop over a scenario.
    Loop(LoopArgs),
    /// Classify touch events from a CSV file.
    TouchClassify(TouchArgs),
    /// Check an FML, BML, library, scenario, touch, script, config or frame file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    fml: PathBuf,
    /// Library directory with gestuary.lex, faces.lex and lexicon.lex.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Output BML file; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Seconds per spoken word.
    #[arg(long)]
    word: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// User distance in metres; with --gaze, gates touch gestures.
    #[arg(long, requires = "gaze")]
    distance: Option<f64>,
    /// AGENT, AGENT_RELATED_OBJECT, TOPIC_OBJECT or OTHER.
    #[arg(long, requires = "distance")]
    gaze: Option<String>,
}

#[derive(Args)]
struct RealizeArgs {
    #[arg(long)]
    bml: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    fps: Option<f64>,
    /// Output frame stream; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long)]
    bml: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Send frames as OSC bundles to `udp:<host>:<port>`.
    #[arg(long)]
    osc: Option<String>,
    /// Accept INTERRUPT/RESUME/STOP/CLEAR lines on `tcp:<port>`.
    #[arg(long, conflicts_with = "script")]
    control: Option<String>,
    /// Timed commands, one `<seconds> <COMMAND>` per line.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Chunk period in seconds.
    #[arg(long)]
    chunk: Option<f64>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    virtual_clock: bool,
    /// RESUME re-sends the last chunk sent before the interruption.
    #[arg(long)]
    resume_replay_last: bool,
    /// Write the dispatch trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Seconds to run; defaults to the scenario's `duration`.
    #[arg(long)]
    duration: Option<f64>,
    /// Per-tick CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    osc: Option<String>,
    #[arg(long)]
    virtual_clock: bool,
}

#[derive(Args)]
struct TouchArgs {
    #[arg(long)]
    features: PathBuf,
    /// Also report the proxemics zone for this distance in metres.
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long)]
    gaze: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    file: PathBuf,
}

/// Input problems exit with 2, everything else with 1.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .input()
}

fn open_output(path: &Path) -> Result<Box<dyn Write>, Failure> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdout().lock()));
    }
    let f = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)?;
    Ok(Box::new(io::BufWriter::new(f)))
}

fn libraries(flag: &Option<PathBuf>, cfg: &FileConfig) -> Result<Libraries, Failure> {
    match flag.as_ref().or(cfg.lexicon.as_ref()) {
        Some(dir) => load_libraries(dir)
            .with_context(|| format!("loading libraries from {}", dir.display()))
            .input(),
        None => Ok(Libraries::default()),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Input(anyhow!("--{name} must be positive, got {v}")))
    }
}

fn gaze_target(s: &str) -> Result<GazeTarget, Failure> {
    s.parse::<GazeTarget>().map_err(|e| Failure::Input(anyhow!(e)))
}

fn load_timeline(bml: &Path, lexicon: &Option<PathBuf>, fps: f64, cfg: &FileConfig) -> Result<Timeline, Failure> {
    let libs = libraries(lexicon, cfg)?;
    let doc = parse_bml(&read_input(bml)?)
        .with_context(|| format!("in {}", bml.display()))
        .input()?;
    doc.validate().input()?;
    realize::<f64>(&doc, &libs, fps).input()
}

fn compile(a: CompileArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let libs = libraries(&a.lexicon, cfg)?;
    let rate = SpeechRate {
        word_s: positive("word", a.word.or(cfg.word).unwrap_or(SpeechRate::default().word_s))?,
    };
    let text = read_input(&a.fml)?;
    let mut bml = compile_fml(&text, &libs, rate, a.seed.or(cfg.seed).unwrap_or(0))
        .with_context(|| format!("in {}", a.fml.display()))
        .input()?;
    if let (Some(d), Some(g)) = (a.distance, &a.gaze) {
        let zone = classify_proxemics(d).input()?;
        bml = gate_touch(&bml, zone, attention_score(gaze_target(g)?));
    }
    let mut out = open_output(&a.out)?;
    out.write_all(serialize_bml(&bml).as_bytes()).map_err(runtime)?;
    out.flush().map_err(runtime)
}

fn realize_cmd(a: RealizeArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let fps = positive("fps", a.fps.or(cfg.fps).unwrap_or(25.0))?;
    let tl = load_timeline(&a.bml, &a.lexicon, fps, cfg)?;
    let frames = sample_frames(&tl);
    let mut out = open_output(&a.out)?;
    write_frame_stream(&mut out, &frames).map_err(runtime)?;
    out.flush().map_err(runtime)
}

fn frame_sink(osc: &Option<String>) -> Result<Box<dyn FrameSink>, Failure> {
    match osc {
        Some(target) => {
            if !target.starts_with("udp:") {
                return Err(Failure::Input(anyhow!("--osc must be udp:<host>:<port>, got `{target}`")));
            }
            let sink = UdpSink::connect(target)
                .with_context(|| format!("opening {target}"))
                .input()?;
            Ok(Box::new(sink))
        }
        None => Ok(Box::new(NullSink)),
    }
}

fn clock(virtual_clock: bool) -> Box<dyn Clock> {
    if virtual_clock {
        Box::new(VirtualClock::new())
    } else {
        Box::new(WallClock::new())
    }
}

fn play(a: PlayArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let fps = positive("fps", a.fps.or(cfg.fps).unwrap_or(25.0))?;
    let period = positive("chunk", a.chunk.or(cfg.chunk).unwrap_or(DEFAULT_CHUNK_PERIOD_S))?;
    let tl = load_timeline(&a.bml, &a.lexicon, fps, cfg)?;
    let chunks = chunk_timeline(&tl, period).input()?;
    let sched_cfg = SchedulerConfig {
        rest_transition_s: cfg.rest_transition.unwrap_or(DEFAULT_REST_TRANSITION_S),
        resume_replay_last: a.resume_replay_last || cfg.resume_replay_last.unwrap_or(false),
    };
    let mut control: Box<dyn ControlSource> = match (&a.script, &a.control) {
        (Some(path), _) => Box::new(
            ScriptedControl::parse(&read_input(path)?)
                .map_err(|e| anyhow!("{}: {e}", path.display()))
                .input()?,
        ),
        (None, Some(spec)) => {
            let addr = control::parse_control_addr(spec).map_err(|e| Failure::Input(anyhow!(e)))?;
            let listener = TcpListener::bind(&addr)
                .with_context(|| format!("binding control socket {addr}"))
                .map_err(runtime)?;
            eprintln!("control listening on {}", listener.local_addr().map_err(runtime)?);
            let (tx, rx) = mpsc::channel();
            control::spawn_listener(listener, tx);
            Box::new(ChannelControl::new(rx))
        }
        (None, None) => Box::new(NoControl),
    };
    let mut frames = frame_sink(&a.osc)?;
    let clock = clock(a.virtual_clock);
    let mut state = SchedulerState::new(chunks).with_config(sched_cfg).with_timeline(tl.clone());
    let trace = {
        let mut sink = FrameChunkSink::new(&tl, frames.as_mut());
        run_schedule(&mut state, clock.as_ref(), &mut sink, control.as_mut())
    };
    let mut out = open_output(a.trace.as_deref().unwrap_or(Path::new("-")))?;
    out.write_all(trace.render().as_bytes()).map_err(runtime)?;
    out.flush().map_err(runtime)?;
    if let Some(TraceEvent::SinkFailure { index, error, .. }) =
        trace.events.iter().find(|e| matches!(e, TraceEvent::SinkFailure { .. }))
    {
        return Err(runtime(anyhow!("chunk {index} not delivered: {error}")));
    }
    Ok(())
}

fn run_loop(a: LoopArgs, cfg: &FileConfig) -> Result<(), Failure> {
    let mut base = Scenario::default();
    if let Some(fl) = &cfg.framelevel {
        base.fps = fl.fps;
        base.turn.fps = fl.fps;
        base.enable = fl.enable;
        base.blink = fl.blink;
    }
    if let Some(fps) = cfg.fps {
        base.fps = fps;
        base.turn.fps = fps;
    }
    let scenario = Scenario::parse_with(&read_input(&a.scenario)?, base)
        .with_context(|| format!("in {}", a.scenario.display()))
        .input()?;
    let duration = match a.duration.or(scenario.duration_s) {
        Some(d) if d >= 0.0 && d.is_finite() => d,
        Some(d) => return Err(Failure::Input(anyhow!("--duration must be non-negative, got {d}"))),
        None => return Err(Failure::Input(anyhow!("no --duration given and the scenario sets none"))),
    };
    let mut sink = frame_sink(&a.osc)?;
    let clock = clock(a.virtual_clock);
    let report = run_interaction_loop(&scenario, duration, clock.as_ref(), sink.as_mut(), None);
    if let Some(path) = &a.report {
        let f = fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(runtime)?;
        report.write_csv(f).map_err(runtime)?;
    }
    for (t, c) in &report.commands {
        println!("{t} {c}");
    }
    println!("{}", report.summary());
    match report.error {
        Some(e) => Err(runtime(anyhow!(e))),
        None => Ok(()),
    }
}

fn touch_classify(a: TouchArgs) -> Result<(), Failure> {
    let text = read_input(&a.features)?;
    let rows = read_touch_csv(text.as_bytes())
        .with_context(|| format!("in {}", a.features.display()))
        .input()?;
    let mut out = io::stdout().lock();
    for (i, f) in rows.iter().enumerate() {
        writeln!(out, "{} {}", i + 1, classify_touch(f)).map_err(runtime)?;
    }
    if let Some(d) = a.distance {
        let zone = classify_proxemics(d).input()?;
        let mut line = format!("zone {zone}");
        if let Some(g) = &a.gaze {
            let attention = attention_score(gaze_target(g)?);
            let allowed = zone.allows_touch() && attention >= bmlrt::touch::MIN_TOUCH_ATTENTION;
            line.push_str(&format!(" attention {attention} touch {}", if allowed { "allowed" } else { "gated" }));
        }
        writeln!(out, "{line}").map_err(runtime)?;
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let path = &a.file;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ctx = |e: anyhow::Error| Failure::Input(e.context(format!("in {}", path.display())));
    let summary = if path.is_dir() || name.ends_with(".lex") {
        let dir = if path.is_dir() { path.as_path() } else { path.parent().unwrap_or(Path::new(".")) };
        let libs = load_libraries(dir).map_err(|e| ctx(e.into()))?;
        libs.validate().map_err(|e| ctx(e.into()))?;
        format!(
            "library: {} gestures, {} faces, {} lexicon entries",
            libs.gestuary.len(),
            libs.faces.len(),
            libs.lexicon.len()
        )
    } else {
        let text = read_input(path)?;
        let head = text.trim_start();
        if head.starts_with("<fml") || (head.starts_with("<?xml") && head.contains("<fml")) {
            let doc = parse_fml(&text).map_err(|e| ctx(e.into()))?;
            format!("fml: {} words, {} intentions", doc.word_count(), doc.intentions.len())
        } else if head.starts_with("<bml") || (head.starts_with("<?xml") && head.contains("<bml")) {
            let doc = parse_bml(&text).map_err(|e| ctx(e.into()))?;
            doc.validate().map_err(|e| ctx(e.into()))?;
            format!("bml: {} signals, duration {}", doc.signals.len(), doc.utterance_duration_s)
        } else if name.ends_with(".scenario") {
            let sc = Scenario::parse(&text).map_err(|e| ctx(e.into()))?;
            format!("scenario: {} samples, {} agent spans", sc.samples.len(), sc.agent_speaking.len())
        } else if name.ends_with(".csv") {
            let rows = read_touch_csv(text.as_bytes()).map_err(|e| ctx(e.into()))?;
            format!("touch: {} records", rows.len())
        } else if name.ends_with(".script") {
            ScriptedControl::parse(&text).map_err(|e| ctx(anyhow!(e)))?;
            "control script".to_string()
        } else if name.ends_with(".toml") {
            FileConfig::parse(&text).map_err(ctx)?;
            "config".to_string()
        } else if name.ends_with(".ndjson") || name.ends_with(".jsonl") || head.starts_with('{') {
            let frames = read_frame_stream(&text).map_err(|e| ctx(e.into()))?;
            format!("frames: {}", frames.len())
        } else {
            return Err(Failure::Input(anyhow!("{}: unrecognized file type", path.display())));
        }
    };
    println!("ok {summary}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p).input()?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Compile(a) => compile(a, &cfg),
        Command::Realize(a) => realize_cmd(a, &cfg),
        Command::Play(a) => play(a, &cfg),
        Command::Loop(a) => run_loop(a, &cfg),
        Command::TouchClassify(a) => touch_classify(a),
        Command::Validate(a) => validate(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with status 0; usage errors to stderr with 2.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
