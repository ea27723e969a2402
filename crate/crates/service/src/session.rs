//! One live session per connection.
//!
//! The client sends `hello`, then only `input_event`s. The server answers
//! with `hello` and `session_start`, then `trial_spec` for every trial,
//! one `state_update` per applied event, `trial_complete` when a trial
//! ends, and `session_end` after the last block. Events are applied in
//! arrival order; the client's `t_ms` is authoritative.

use std::collections::HashSet;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use vwm_core::experiment::{
    build_session, log_file_name, BlockRunner, ConditionRun, ExperimentError, SessionPlan, TrialSpec,
};
use vwm_core::interaction::Emission;
use vwm_core::{SceneLayout, SimConfig};

use crate::protocol::{
    read_frame_bytes, write_frame, Body, Envelope, FrameError, Hello, SessionEnd, SessionStart,
    StateUpdate, WireError, WireRecord, WireTrialSpec, WireWindow, PROTOCOL,
};

/// Run-wide settings shared by every connection.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub sim: SimConfig,
    pub seed: u64,
    pub layout: SceneLayout,
    /// Run directory; logs go to `logs/`, plan manifests to `plans/`.
    pub out_dir: PathBuf,
}

impl ServiceConfig {
    pub fn new(sim: SimConfig, seed: u64, out_dir: PathBuf) -> Result<Self, ExperimentError> {
        let layout = vwm_core::experiment::session_layout(&sim, seed)?;
        Ok(Self {
            sim,
            seed,
            layout,
            out_dir,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("client sent {0}")]
    Protocol(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("writing logs: {0}")]
    Io(#[from] std::io::Error),
}

/// How a connection ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Every planned trial completed.
    Completed,
    /// The client went away; the running trial was voided.
    Disconnected,
    /// The server closed the connection after an `error` message.
    Closed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSummary {
    pub participant: Option<u32>,
    pub outcome: Outcome,
    pub completed_trials: usize,
    /// Paths of the block logs written.
    pub logs: Vec<PathBuf>,
}

/// Participants with a live connection; a second connection for the same
/// participant would overwrite the first one's logs.
pub type LiveSet = Arc<Mutex<HashSet<u32>>>;

struct Conn<S> {
    stream: S,
    sent: u64,
    last_seen: Option<u64>,
}

enum Incoming {
    Message(Body),
    Eof,
    /// An error was sent and the connection must close.
    Fatal(String),
}

impl<S: Read + Write> Conn<S> {
    fn send(&mut self, body: Body) -> Result<(), FrameError> {
        self.sent += 1;
        write_frame(&mut self.stream, &Envelope { seq: self.sent, body })
    }

    fn send_error(&mut self, code: &str, message: String) -> Result<(), FrameError> {
        self.send(Body::Error(WireError {
            code: code.into(),
            message,
        }))
    }

    fn fatal(&mut self, code: &str, message: String) -> Incoming {
        // The peer may already be gone; the close happens regardless.
        let _ = self.send_error(code, message.clone());
        Incoming::Fatal(format!("{code}: {message}"))
    }

    fn recv(&mut self) -> Incoming {
        let bytes = match read_frame_bytes(&mut self.stream) {
            Ok(Some(b)) => b,
            Ok(None) => return Incoming::Eof,
            Err(FrameError::Io(_)) => return Incoming::Eof,
            Err(e) => return self.fatal("bad_message", e.to_string()),
        };
        let env: Envelope = match serde_json::from_slice(&bytes) {
            Ok(e) => e,
            Err(e) => return self.fatal("bad_message", e.to_string()),
        };
        if self.last_seen.is_some_and(|last| env.seq <= last) {
            let last = self.last_seen.unwrap_or(0);
            return self.fatal("stale_seq", format!("seq {} after {last}", env.seq));
        }
        self.last_seen = Some(env.seq);
        Incoming::Message(env.body)
    }
}

fn write_log(dir: &Path, participant: u32, run: &ConditionRun) -> std::io::Result<PathBuf> {
    let logs = dir.join("logs");
    fs::create_dir_all(&logs)?;
    let path = logs.join(log_file_name(participant, run.condition));
    let tmp = path.with_extension("log.tmp");
    fs::write(&tmp, &run.log)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

fn trial_message(block: usize, runner: &BlockRunner, spec: &TrialSpec) -> Body {
    Body::TrialSpec(WireTrialSpec {
        block,
        condition: runner.condition().to_string(),
        index: spec.index,
        start: spec.start.to_string(),
        target: spec.target.to_string(),
        pair: spec.pair.to_string(),
        kind: spec.kind.name().to_string(),
        state: StateUpdate::from_machine(runner.machine(), &[]),
    })
}

fn session_start(config: &ServiceConfig, plan: &SessionPlan) -> Body {
    let display = &config.sim.display;
    Body::SessionStart(SessionStart {
        participant: plan.participant,
        square_row: plan.square_row,
        seed: plan.seed,
        condition_order: plan.condition_order().iter().map(|c| c.to_string()).collect(),
        trials_per_block: plan.blocks.first().map_or(0, |b| b.trials.len()),
        display: display.display_rect().into(),
        bar: display.bar_rect().into(),
        windows: config
            .layout
            .windows()
            .iter()
            .map(|w| WireWindow {
                id: w.id.to_string(),
                ring: config.layout.ring_of(w.id).to_string(),
                rect: w.rect().into(),
            })
            .collect(),
    })
}

/// Runs one session over `stream` until it completes, the client
/// disconnects, or a protocol violation closes it. Logs of every started
/// block are written, including a partial one on disconnect.
pub fn handle_connection<S: Read + Write>(
    stream: S,
    config: &ServiceConfig,
    live: &LiveSet,
) -> Result<SessionSummary, SessionError> {
    let mut conn = Conn {
        stream,
        sent: 0,
        last_seen: None,
    };
    let mut summary = SessionSummary {
        participant: None,
        outcome: Outcome::Disconnected,
        completed_trials: 0,
        logs: Vec::new(),
    };
    let hello = match conn.recv() {
        Incoming::Message(Body::Hello(h)) => h,
        Incoming::Message(other) => {
            let why = format!("expected hello, got {}", other.name());
            conn.fatal("protocol", why.clone());
            summary.outcome = Outcome::Closed(why);
            return Ok(summary);
        }
        Incoming::Eof => return Ok(summary),
        Incoming::Fatal(why) => {
            summary.outcome = Outcome::Closed(why);
            return Ok(summary);
        }
    };
    let reject = |conn: &mut Conn<S>, summary: &mut SessionSummary, code: &str, why: String| {
        conn.fatal(code, why.clone());
        summary.outcome = Outcome::Closed(why);
    };
    if hello.protocol != PROTOCOL {
        let why = format!("unsupported protocol `{}`; this server speaks {PROTOCOL}", hello.protocol);
        reject(&mut conn, &mut summary, "protocol", why);
        return Ok(summary);
    }
    let Some(participant) = hello.participant else {
        reject(&mut conn, &mut summary, "protocol", "hello needs a participant".into());
        return Ok(summary);
    };
    summary.participant = Some(participant);
    let square_row = hello.square_row.unwrap_or(participant as usize % 4);
    let mut plan = match build_session(participant, square_row, config.seed, &config.layout) {
        Ok(p) => p,
        Err(e) => {
            reject(&mut conn, &mut summary, "protocol", e.to_string());
            return Ok(summary);
        }
    };
    if let Some(max) = hello.max_trials_per_block {
        for b in &mut plan.blocks {
            b.trials.truncate(max);
        }
    }
    if !live.lock().expect("live set poisoned").insert(participant) {
        reject(&mut conn, &mut summary, "busy", format!("participant {participant} already has a live session"));
        return Ok(summary);
    }
    let result = run_plan(&mut conn, config, &plan, &mut summary);
    live.lock().expect("live set poisoned").remove(&participant);
    result.map(|()| summary)
}

fn run_plan<S: Read + Write>(
    conn: &mut Conn<S>,
    config: &ServiceConfig,
    plan: &SessionPlan,
    summary: &mut SessionSummary,
) -> Result<(), SessionError> {
    fs::create_dir_all(config.out_dir.join("plans"))?;
    fs::write(
        config.out_dir.join("plans").join(format!("p{:03}.plan", plan.participant)),
        plan.to_manifest(),
    )?;
    let sent = conn
        .send(Body::Hello(Hello {
            protocol: PROTOCOL.into(),
            ..Hello::default()
        }))
        .and_then(|()| conn.send(session_start(config, plan)));
    if sent.is_err() {
        return Ok(());
    }
    for (block_index, block) in plan.blocks.iter().enumerate() {
        let mut runner = BlockRunner::new(
            &config.sim,
            config.layout.clone(),
            plan.participant,
            plan.seed,
            block.clone(),
        )?;
        let ended = run_block(conn, &mut runner, block_index, summary);
        let run = runner.finish();
        summary.logs.push(write_log(&config.out_dir, plan.participant, &run)?);
        match ended? {
            None => {}
            Some(outcome) => {
                summary.outcome = outcome;
                return Ok(());
            }
        }
    }
    summary.outcome = Outcome::Completed;
    let logs = summary
        .logs
        .iter()
        .filter_map(|p| p.strip_prefix(&config.out_dir).ok())
        .map(|p| p.display().to_string())
        .collect();
    let _ = conn.send(Body::SessionEnd(SessionEnd {
        completed_trials: summary.completed_trials,
        logs,
    }));
    Ok(())
}

/// Drives one block. `Some(outcome)` means the connection is over.
fn run_block<S: Read + Write>(
    conn: &mut Conn<S>,
    runner: &mut BlockRunner,
    block_index: usize,
    summary: &mut SessionSummary,
) -> Result<Option<Outcome>, SessionError> {
    while let Some(spec) = runner.start_next_trial()? {
        if conn.send(trial_message(block_index, runner, &spec)).is_err() {
            return Ok(Some(Outcome::Disconnected));
        }
        while runner.active().is_some() {
            let event = match conn.recv() {
                Incoming::Message(Body::InputEvent(e)) => e,
                Incoming::Message(other) => {
                    let why = format!("unexpected {} during a session", other.name());
                    conn.fatal("protocol", why.clone());
                    return Ok(Some(Outcome::Closed(why)));
                }
                Incoming::Eof => return Ok(Some(Outcome::Disconnected)),
                Incoming::Fatal(why) => return Ok(Some(Outcome::Closed(why))),
            };
            let emissions = match runner.apply(event.into()) {
                Ok(em) => em,
                Err(ExperimentError::Interaction(e)) => {
                    // Not applied and not logged; the trial continues.
                    if conn.send_error("rejected_event", e.to_string()).is_err() {
                        return Ok(Some(Outcome::Disconnected));
                    }
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let mut out = vec![Body::StateUpdate(StateUpdate::from_machine(runner.machine(), &emissions))];
            if emissions.iter().any(|e| matches!(e, Emission::TrialComplete(_))) {
                let record = runner.records().last().expect("completion pushes a record");
                out.push(Body::TrialComplete(WireRecord::from(record)));
                summary.completed_trials += 1;
            }
            for body in out {
                if conn.send(body).is_err() {
                    return Ok(Some(Outcome::Disconnected));
                }
            }
        }
    }
    Ok(None)
}
