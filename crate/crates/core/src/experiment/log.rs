//! Line-oriented event logs, one file per condition block.
//!
//! Every line is `t_ms,kind,payload...` with `t_ms` counted from the start
//! of the current trial. Input lines (`cursor`, `gaze`, `click`) are the
//! authoritative content; the remaining lines record what the machine did
//! and are checked on replay.

use std::fmt::Write as _;

use super::runner::BlockRunner;
use super::{ConditionBlock, ExperimentError, TrialKind, TrialRecord, TrialSpec};
use crate::geometry::PixelPoint;
use crate::interaction::{Condition, Emission, InputEvent, InputKind, InteractionState};
use crate::scene::SceneLayout;
use crate::sim::SimConfig;

const OUTPUT_KINDS: [&str; 8] = [
    "category", "go_back", "thumbnail", "raise", "animate", "teleport", "stray", "complete",
];

#[derive(Debug, Clone, PartialEq)]
pub enum LogRecord {
    Session {
        participant: u32,
        condition: Condition,
        cursor: PixelPoint,
    },
    Trial {
        spec: TrialSpec,
        button: PixelPoint,
    },
    Input(InputEvent),
    /// A machine output line, kept verbatim after the kind.
    Output { kind: String, payload: String },
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLine {
    /// 1-based line number.
    pub line: usize,
    pub t_ms: u64,
    pub record: LogRecord,
}

pub(crate) fn session_line(out: &mut String, participant: u32, condition: Condition, cursor: PixelPoint) {
    let _ = writeln!(out, "0,session,{participant},{condition},{},{}", cursor.x, cursor.y);
}

pub(crate) fn trial_line(out: &mut String, spec: &TrialSpec, button: PixelPoint) {
    let _ = writeln!(
        out,
        "0,trial,{},{},{},{},{},{},{}",
        spec.index,
        spec.start,
        spec.target,
        spec.pair,
        spec.kind.name(),
        button.x,
        button.y
    );
}

pub(crate) fn input_line(out: &mut String, e: &InputEvent) {
    let _ = match e.kind {
        InputKind::CursorDelta { dx, dy } => writeln!(out, "{},cursor,{dx},{dy}", e.t_ms),
        InputKind::GazePoint(p) => writeln!(out, "{},gaze,{},{}", e.t_ms, p.x, p.y),
        InputKind::Click => writeln!(out, "{},click", e.t_ms),
    };
}

pub(crate) fn emission_line(out: &mut String, t: u64, e: &Emission, state: &InteractionState) {
    let _ = match e {
        Emission::CategoryOpened { color, correct } => {
            writeln!(out, "{t},category,{color},{}", *correct as u8)
        }
        Emission::GoBack => writeln!(out, "{t},go_back"),
        Emission::ThumbnailSelected { window, correct } => {
            writeln!(out, "{t},thumbnail,{window},{}", *correct as u8)
        }
        Emission::WindowRaised(w) => writeln!(out, "{t},raise,{w}"),
        Emission::AnimationStarted(a) => writeln!(out, "{t},animate,{}", a.end_ms),
        Emission::Teleported(p) => writeln!(out, "{t},teleport,{},{}", p.x, p.y),
        Emission::StrayClick(target) => writeln!(out, "{t},stray,{target}"),
        Emission::TrialComplete(times) => writeln!(
            out,
            "{t},complete,{},{},{},{},{}",
            times.thumbnail_ms,
            times.button_ms,
            times.total_ms,
            state.errors_so_far,
            state.category_detours
        ),
    };
}

pub(crate) fn aborted_line(out: &mut String, t: u64) {
    let _ = writeln!(out, "{t},aborted");
}

fn field<T: std::str::FromStr>(f: &[&str], i: usize, what: &str) -> Result<T, String> {
    let v = f.get(i).ok_or_else(|| format!("missing {what}"))?;
    v.parse().map_err(|_| format!("bad {what} `{v}`"))
}

fn finite_point(f: &[&str], i: usize) -> Result<PixelPoint, String> {
    let p = PixelPoint::new(field(f, i, "x")?, field(f, i + 1, "y")?);
    if p.is_finite() {
        Ok(p)
    } else {
        Err("non-finite coordinate".into())
    }
}

fn arity(f: &[&str], n: usize) -> Result<(), String> {
    if f.len() == n {
        Ok(())
    } else {
        Err(format!("`{}` expects {} fields, found {}", f[1], n, f.len()))
    }
}

fn parse_line(text: &str) -> Result<(u64, LogRecord), String> {
    let f: Vec<&str> = text.split(',').collect();
    if f.len() < 2 {
        return Err("expected `t_ms,kind,...`".into());
    }
    let t: u64 = field(&f, 0, "t_ms")?;
    let record = match f[1] {
        "session" => {
            arity(&f, 6)?;
            LogRecord::Session {
                participant: field(&f, 2, "participant")?,
                condition: f[3].parse()?,
                cursor: finite_point(&f, 4)?,
            }
        }
        "trial" => {
            arity(&f, 9)?;
            let kind = TrialKind::parse(f[6]).ok_or_else(|| format!("bad trial kind `{}`", f[6]))?;
            LogRecord::Trial {
                spec: TrialSpec {
                    index: field(&f, 2, "trial index")?,
                    start: f[3].parse()?,
                    target: f[4].parse()?,
                    pair: f[5].parse()?,
                    kind,
                },
                button: finite_point(&f, 7)?,
            }
        }
        "cursor" => {
            arity(&f, 4)?;
            let (dx, dy): (f64, f64) = (field(&f, 2, "dx")?, field(&f, 3, "dy")?);
            if !(dx.is_finite() && dy.is_finite()) {
                return Err("non-finite cursor delta".into());
            }
            LogRecord::Input(InputEvent::cursor(t, dx, dy))
        }
        "gaze" => {
            arity(&f, 4)?;
            LogRecord::Input(InputEvent::gaze(t, finite_point(&f, 2)?))
        }
        "click" => {
            arity(&f, 2)?;
            LogRecord::Input(InputEvent::click(t))
        }
        "aborted" => {
            arity(&f, 2)?;
            LogRecord::Aborted
        }
        k if OUTPUT_KINDS.contains(&k) => LogRecord::Output {
            kind: k.to_string(),
            payload: f[2..].join(","),
        },
        k => return Err(format!("unknown kind `{k}`")),
    };
    Ok((t, record))
}

/// Parses a block log. Blank lines are skipped; the first malformed line
/// is reported with its line number.
pub fn parse_log(text: &str) -> Result<Vec<LogLine>, ExperimentError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let (t_ms, record) = parse_line(raw.trim()).map_err(|msg| ExperimentError::Log {
            line: i + 1,
            msg,
        })?;
        out.push(LogLine {
            line: i + 1,
            t_ms,
            record,
        });
    }
    Ok(out)
}

/// Re-executes a block log against a fresh machine and returns the trial
/// records it implies. The regenerated log must equal the input exactly.
pub fn replay_log(
    text: &str,
    config: &SimConfig,
    layout: &SceneLayout,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let lines = parse_log(text)?;
    let bad = |line: usize, msg: &str| ExperimentError::Log {
        line,
        msg: msg.to_string(),
    };
    let (participant, condition) = match lines.first() {
        Some(LogLine {
            record: LogRecord::Session {
                participant,
                condition,
                ..
            },
            ..
        }) => (*participant, *condition),
        Some(l) => return Err(bad(l.line, "log must start with a session line")),
        None => return Err(bad(1, "empty log")),
    };
    let mut trials = Vec::new();
    for l in &lines[1..] {
        match l.record {
            LogRecord::Trial { spec, button } => trials.push((spec, button, l.line)),
            LogRecord::Session { .. } => return Err(bad(l.line, "second session line")),
            _ if trials.is_empty() => return Err(bad(l.line, "event before the first trial")),
            _ => {}
        }
    }
    let block = ConditionBlock {
        condition,
        trials: trials.iter().map(|t| t.0).collect(),
    };
    let mut runner = BlockRunner::new(config, layout.clone(), participant, 0, block)?;
    for l in &lines[1..] {
        match &l.record {
            LogRecord::Trial { button, .. } => {
                runner.begin_trial_at(*button).map_err(|_| bad(l.line, "trial out of sequence"))?;
            }
            LogRecord::Input(e) => {
                runner.apply(*e).map_err(|e| bad(l.line, &e.to_string()))?;
            }
            LogRecord::Aborted => runner.abort_trial(),
            LogRecord::Output { .. } | LogRecord::Session { .. } => {}
        }
    }
    let run = runner.finish();
    if run.log != text {
        let first = run
            .log
            .lines()
            .zip(text.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| run.log.lines().count().min(text.lines().count()));
        let trial = lines
            .iter()
            .take_while(|l| l.line < first + 1)
            .filter_map(|l| match l.record {
                LogRecord::Trial { spec, .. } => Some(spec.index),
                _ => None,
            })
            .last()
            .unwrap_or(0);
        return Err(ExperimentError::ReplayMismatch { trial });
    }
    Ok(run.records)
}

/// A log line that could not be used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogIssue {
    /// 1-based line number.
    pub line: usize,
    pub msg: String,
}

/// Reads trial records from the `complete` lines of a block log without
/// re-executing it. Every malformed or misplaced line is reported; a trial
/// containing one yields no record, and a bad session line voids the file.
pub fn extract_records(text: &str) -> (Vec<TrialRecord>, Vec<LogIssue>) {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut session: Option<(u32, Condition)> = None;
    // Active trial and whether it is still clean.
    let mut current: Option<(TrialSpec, bool)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut issue = |msg: String| issues.push(LogIssue { line, msg });
        let (_, record) = match parse_line(raw.trim()) {
            Ok(r) => r,
            Err(msg) => {
                if line == 1 {
                    issue(format!("{msg}; file skipped"));
                    return (Vec::new(), issues);
                }
                issue(msg);
                if let Some(c) = current.as_mut() {
                    c.1 = false;
                }
                continue;
            }
        };
        match record {
            LogRecord::Session { participant, condition, .. } if line == 1 => {
                session = Some((participant, condition));
            }
            LogRecord::Session { .. } => issue("second session line".into()),
            _ if session.is_none() => {
                issue("log must start with a session line; file skipped".into());
                return (Vec::new(), issues);
            }
            LogRecord::Trial { spec, .. } => {
                if current.is_some() {
                    issue("trial started before the previous one ended".into());
                }
                current = Some((spec, true));
            }
            LogRecord::Aborted => current = None,
            LogRecord::Output { kind, payload } if kind == "complete" => {
                let Some((spec, clean)) = current.take() else {
                    issue("completion outside a trial".into());
                    continue;
                };
                let (participant, condition) = session.expect("checked above");
                let f: Vec<&str> = payload.split(',').collect();
                let parsed = (|| -> Result<TrialRecord, String> {
                    if f.len() != 5 {
                        return Err(format!("`complete` expects 7 fields, found {}", f.len() + 2));
                    }
                    let r = TrialRecord {
                        participant,
                        condition,
                        trial: spec.index,
                        pair: spec.pair,
                        thumbnail_ms: field(&f, 0, "thumbnail_ms")?,
                        button_ms: field(&f, 1, "button_ms")?,
                        total_ms: field(&f, 2, "total_ms")?,
                        errors: field(&f, 3, "errors")?,
                        detours: field(&f, 4, "detours")?,
                        training: spec.kind == TrialKind::Training,
                        discarded: spec.kind == TrialKind::Discarded,
                    };
                    if r.total_ms != r.thumbnail_ms + r.button_ms {
                        return Err("total_ms is not thumbnail_ms + button_ms".into());
                    }
                    Ok(r)
                })();
                match parsed {
                    Ok(r) if clean => records.push(r),
                    Ok(_) => {}
                    Err(msg) => issue(msg),
                }
            }
            _ if current.is_none() => issue("event outside a trial".into()),
            _ => {}
        }
    }
    (records, issues)
}
