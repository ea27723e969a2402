//! Wire format: each message is a 4-byte big-endian length followed by that
//! many bytes of UTF-8 JSON, an object `{"type", "seq", "payload"}`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use vwm_core::interaction::{Emission, Phase};
use vwm_core::scene::BarLevel;
use vwm_core::{InputEvent, InputKind, Machine, PixelPoint, PixelRect};

pub const PROTOCOL: &str = "vwm/1";

/// Frames larger than this are refused rather than allocated.
pub const MAX_FRAME: u32 = 1 << 20;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("frame of {0} bytes exceeds the limit")]
    TooLarge(u32),
    #[error("malformed message: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Body {
    Hello(Hello),
    SessionStart(SessionStart),
    TrialSpec(WireTrialSpec),
    InputEvent(WireInput),
    StateUpdate(StateUpdate),
    TrialComplete(WireRecord),
    SessionEnd(SessionEnd),
    Error(WireError),
}

impl Body {
    pub fn name(&self) -> &'static str {
        match self {
            Body::Hello(_) => "hello",
            Body::SessionStart(_) => "session_start",
            Body::TrialSpec(_) => "trial_spec",
            Body::InputEvent(_) => "input_event",
            Body::StateUpdate(_) => "state_update",
            Body::TrialComplete(_) => "trial_complete",
            Body::SessionEnd(_) => "session_end",
            Body::Error(_) => "error",
        }
    }
}

/// Sent by both sides. The client fills in the session request fields; the
/// server echoes the protocol and leaves them empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Hello {
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<u32>,
    /// Latin-square row; defaults to `participant mod 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square_row: Option<usize>,
    /// Truncates every condition block, for smoke sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trials_per_block: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePoint {
    pub x: f64,
    pub y: f64,
}

impl From<PixelPoint> for WirePoint {
    fn from(p: PixelPoint) -> Self {
        Self { x: p.x, y: p.y }
    }
}

impl From<WirePoint> for PixelPoint {
    fn from(p: WirePoint) -> Self {
        PixelPoint::new(p.x, p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireRect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl From<PixelRect> for WireRect {
    fn from(r: PixelRect) -> Self {
        Self {
            min_x: r.min_x,
            min_y: r.min_y,
            max_x: r.max_x,
            max_y: r.max_y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireWindow {
    /// `Color-number`, e.g. `Red-1`.
    pub id: String,
    pub ring: String,
    pub rect: WireRect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStart {
    pub participant: u32,
    pub square_row: usize,
    pub seed: u64,
    pub condition_order: Vec<String>,
    pub trials_per_block: usize,
    pub display: WireRect,
    pub bar: WireRect,
    pub windows: Vec<WireWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTrialSpec {
    /// Position of the condition block in the session, from 0.
    pub block: usize,
    pub condition: String,
    pub index: usize,
    pub start: String,
    pub target: String,
    pub pair: String,
    pub kind: String,
    /// Initial state; trial time starts at 0 with this message.
    pub state: StateUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WireInput {
    /// Trackpad motion in device units.
    Cursor { t_ms: u64, dx: f64, dy: f64 },
    Gaze { t_ms: u64, x: f64, y: f64 },
    Click { t_ms: u64 },
}

impl From<WireInput> for InputEvent {
    fn from(w: WireInput) -> Self {
        match w {
            WireInput::Cursor { t_ms, dx, dy } => InputEvent::cursor(t_ms, dx, dy),
            WireInput::Gaze { t_ms, x, y } => InputEvent::gaze(t_ms, PixelPoint::new(x, y)),
            WireInput::Click { t_ms } => InputEvent::click(t_ms),
        }
    }
}

impl From<InputEvent> for WireInput {
    fn from(e: InputEvent) -> Self {
        match e.kind {
            InputKind::CursorDelta { dx, dy } => WireInput::Cursor { t_ms: e.t_ms, dx, dy },
            InputKind::GazePoint(p) => WireInput::Gaze { t_ms: e.t_ms, x: p.x, y: p.y },
            InputKind::Click => WireInput::Click { t_ms: e.t_ms },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTile {
    /// Target name: `category:Red`, `thumbnail:Red-1` or `go_back`.
    pub target: String,
    pub rect: WireRect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireAnimation {
    pub from: WireRect,
    pub to: WireRect,
    pub start_ms: u64,
    pub end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireButton {
    pub window: String,
    pub rect: WireRect,
}

/// Everything a renderer needs after an applied event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub t_ms: u64,
    /// `select_category`, `select_thumbnail`, `press_button` or `complete`.
    pub phase: String,
    pub cursor: WirePoint,
    pub gaze: WirePoint,
    /// Bar tile under the active pointer.
    pub highlight: Option<String>,
    /// `categories` or `thumbnails:<Color>`.
    pub bar_level: String,
    pub tiles: Vec<WireTile>,
    pub animation: Option<WireAnimation>,
    pub animation_remaining_ms: u64,
    pub button: Option<WireButton>,
    /// Window ids from bottom to top.
    pub stacking: Vec<String>,
    /// What the event caused, as log-style tokens (`raise,Red-1`).
    pub emissions: Vec<String>,
}

impl StateUpdate {
    pub fn from_machine(m: &Machine, emissions: &[Emission]) -> Self {
        let s = m.state();
        let phase = match s.phase {
            Phase::SelectCategory => "select_category",
            Phase::SelectThumbnail(_) => "select_thumbnail",
            Phase::PressButton(_) => "press_button",
            Phase::Complete => "complete",
        };
        let bar_level = match m.bar().level() {
            BarLevel::Categories => "categories".to_string(),
            BarLevel::Thumbnails(c) => format!("thumbnails:{c}"),
        };
        let mut stacking: Vec<_> = m.layout().windows().iter().collect();
        stacking.sort_by_key(|w| w.z_order);
        Self {
            t_ms: s.last_t,
            phase: phase.to_string(),
            cursor: s.cursor.into(),
            gaze: s.gaze.into(),
            highlight: s.highlight.map(|t| t.to_string()),
            bar_level,
            tiles: m
                .bar()
                .tiles()
                .iter()
                .map(|(t, r)| WireTile {
                    target: t.to_string(),
                    rect: (*r).into(),
                })
                .collect(),
            animation: s.animation.map(|a| WireAnimation {
                from: a.from.into(),
                to: a.to.into(),
                start_ms: a.start_ms,
                end_ms: a.end_ms,
            }),
            animation_remaining_ms: s.animation.map_or(0, |a| a.remaining_ms(s.last_t)),
            button: m.button().map(|b| WireButton {
                window: b.window.to_string(),
                rect: b.rect.into(),
            }),
            stacking: stacking.iter().map(|w| w.id.to_string()).collect(),
            emissions: emissions.iter().map(emission_token).collect(),
        }
    }
}

fn emission_token(e: &Emission) -> String {
    match e {
        Emission::CategoryOpened { color, correct } => format!("category,{color},{}", *correct as u8),
        Emission::GoBack => "go_back".into(),
        Emission::ThumbnailSelected { window, correct } => {
            format!("thumbnail,{window},{}", *correct as u8)
        }
        Emission::WindowRaised(w) => format!("raise,{w}"),
        Emission::AnimationStarted(a) => format!("animate,{}", a.end_ms),
        Emission::Teleported(p) => format!("teleport,{},{}", p.x, p.y),
        Emission::StrayClick(t) => format!("stray,{t}"),
        Emission::TrialComplete(t) => {
            format!("complete,{},{},{}", t.thumbnail_ms, t.button_ms, t.total_ms)
        }
    }
}

/// One trial record, with the same fields as a `trials.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRecord {
    pub participant: u32,
    pub condition: String,
    pub trial: usize,
    pub pair: String,
    pub thumbnail_ms: u64,
    pub button_ms: u64,
    pub total_ms: u64,
    pub errors: u32,
    pub detours: u32,
    pub training: bool,
    pub discarded: bool,
}

impl From<&vwm_core::experiment::TrialRecord> for WireRecord {
    fn from(r: &vwm_core::experiment::TrialRecord) -> Self {
        Self {
            participant: r.participant,
            condition: r.condition.to_string(),
            trial: r.trial,
            pair: r.pair.to_string(),
            thumbnail_ms: r.thumbnail_ms,
            button_ms: r.button_ms,
            total_ms: r.total_ms,
            errors: r.errors,
            detours: r.detours,
            training: r.training,
            discarded: r.discarded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEnd {
    pub completed_trials: usize,
    /// Log files written, relative to the run directory.
    pub logs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    /// `protocol`, `stale_seq`, `bad_message`, `rejected_event`, `busy` or
    /// `internal`. Every code except `rejected_event` closes the connection.
    pub code: String,
    pub message: String,
}

pub fn write_frame<W: Write>(w: &mut W, msg: &Envelope) -> Result<(), FrameError> {
    let bytes = serde_json::to_vec(msg)?;
    let len = u32::try_from(bytes.len()).map_err(|_| FrameError::TooLarge(u32::MAX))?;
    if len > MAX_FRAME {
        return Err(FrameError::TooLarge(len));
    }
    w.write_all(&len.to_be_bytes())?;
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. `Ok(None)` is a clean end of stream at a frame boundary.
pub fn read_frame_bytes<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, FrameError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        return Err(FrameError::TooLarge(len));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Envelope>, FrameError> {
    match read_frame_bytes(r)? {
        Some(b) => Ok(Some(serde_json::from_slice(&b)?)),
        None => Ok(None),
    }
}
