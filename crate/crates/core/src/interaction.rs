//! The Spatial Bar state machine.
//!
//! A [`Machine`] owns the scene's mutable parts (stacking order, bar level,
//! the Next-task button) and folds [`InputEvent`]s into an
//! [`InteractionState`], emitting [`Emission`]s for everything that the
//! event log and trial records need.
//!
//! Click routing: in gaze mode a click confirms the bar tile under the gaze
//! point when there is one and otherwise acts at the cursor. In cursor mode
//! every click acts at the cursor and the gaze point is never consulted.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, KvMap};
use crate::geometry::{CylinderDisplay, PixelPoint, PixelRect};
use crate::scene::{
    hit_test, BarLevel, BarModel, Color, NextButton, SceneConfig, SceneLayout, Target, WindowId,
};

#[derive(Debug, Error, PartialEq)]
pub enum InteractionError {
    #[error("event at t={t} ms precedes previous event at t={last} ms")]
    OutOfOrder { t: u64, last: u64 },
    #[error("no trial is active")]
    NoActiveTrial,
    #[error("trial already complete")]
    TrialComplete,
    #[error("trial incomplete")]
    Incomplete,
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    Gaze,
    Cursor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CursorBehavior {
    Teleport,
    Stay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub selection: SelectionMode,
    pub behavior: CursorBehavior,
}

impl Condition {
    pub const GAZE_TELEPORT: Condition = Condition::new(SelectionMode::Gaze, CursorBehavior::Teleport);
    pub const GAZE_STAY: Condition = Condition::new(SelectionMode::Gaze, CursorBehavior::Stay);
    pub const CURSOR_TELEPORT: Condition =
        Condition::new(SelectionMode::Cursor, CursorBehavior::Teleport);
    pub const CURSOR_STAY: Condition = Condition::new(SelectionMode::Cursor, CursorBehavior::Stay);

    /// Index order used by the Latin square: A..D.
    pub const ALL: [Condition; 4] = [
        Condition::GAZE_TELEPORT,
        Condition::GAZE_STAY,
        Condition::CURSOR_TELEPORT,
        Condition::CURSOR_STAY,
    ];

    pub const fn new(selection: SelectionMode, behavior: CursorBehavior) -> Self {
        Self {
            selection,
            behavior,
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }

    pub fn slug(self) -> &'static str {
        match (self.selection, self.behavior) {
            (SelectionMode::Gaze, CursorBehavior::Teleport) => "gaze-teleport",
            (SelectionMode::Gaze, CursorBehavior::Stay) => "gaze-stay",
            (SelectionMode::Cursor, CursorBehavior::Teleport) => "cursor-teleport",
            (SelectionMode::Cursor, CursorBehavior::Stay) => "cursor-stay",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.slug() == s)
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InputKind {
    /// Trackpad motion in device units.
    CursorDelta { dx: f64, dy: f64 },
    GazePoint(PixelPoint),
    Click,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputEvent {
    /// Milliseconds since trial start.
    pub t_ms: u64,
    pub kind: InputKind,
}

impl InputEvent {
    pub fn cursor(t_ms: u64, dx: f64, dy: f64) -> Self {
        Self {
            t_ms,
            kind: InputKind::CursorDelta { dx, dy },
        }
    }
    pub fn gaze(t_ms: u64, p: PixelPoint) -> Self {
        Self {
            t_ms,
            kind: InputKind::GazePoint(p),
        }
    }
    pub fn click(t_ms: u64) -> Self {
        Self {
            t_ms,
            kind: InputKind::Click,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionConfig {
    pub sensitivity: f64,
    pub animation_ms: u64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            sensitivity: 20.0,
            animation_ms: 300,
        }
    }
}

impl InteractionConfig {
    pub fn apply_kv(&mut self, kv: &mut KvMap) -> Result<(), ConfigError> {
        kv.take_f64("sensitivity", &mut self.sensitivity)?;
        kv.take("animation_ms", &mut self.animation_ms)?;
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sensitivity <= 0.0 {
            return Err(ConfigError::Invalid("sensitivity must be > 0".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "sensitivity = {}\nanimation_ms = {}\n",
            self.sensitivity, self.animation_ms
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    SelectCategory,
    SelectThumbnail(Color),
    PressButton(WindowId),
    Complete,
}

/// Thumbnail-clone animation from the bar tile to the restored window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Animation {
    pub from: PixelRect,
    pub to: PixelRect,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl Animation {
    pub fn remaining_ms(&self, now: u64) -> u64 {
        self.end_ms.saturating_sub(now)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionState {
    pub phase: Phase,
    pub cursor: PixelPoint,
    pub gaze: PixelPoint,
    /// Bar tile under the active pointer (gaze in gaze mode, cursor otherwise).
    pub highlight: Option<Target>,
    pub animation: Option<Animation>,
    pub errors_so_far: u32,
    pub category_detours: u32,
    pub stray_clicks: u32,
    pub teleports: u32,
    pub t_thumbnail: Option<u64>,
    pub t_button: Option<u64>,
    pub last_t: u64,
}

/// Per-trial data the machine needs: what to select and where the
/// Next-task button will appear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveTrial {
    pub target: WindowId,
    pub button_center: PixelPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTimes {
    pub thumbnail_ms: u64,
    pub button_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Emission {
    CategoryOpened { color: Color, correct: bool },
    GoBack,
    ThumbnailSelected { window: WindowId, correct: bool },
    WindowRaised(WindowId),
    AnimationStarted(Animation),
    Teleported(PixelPoint),
    StrayClick(Target),
    TrialComplete(TrialTimes),
}

#[derive(Debug, Clone)]
pub struct Machine {
    display: CylinderDisplay,
    scene: SceneConfig,
    config: InteractionConfig,
    condition: Condition,
    layout: SceneLayout,
    bar: BarModel,
    button: Option<NextButton>,
    trial: Option<ActiveTrial>,
    state: InteractionState,
}

impl Machine {
    pub fn new(
        display: CylinderDisplay,
        scene: SceneConfig,
        config: InteractionConfig,
        condition: Condition,
        layout: SceneLayout,
        cursor: PixelPoint,
    ) -> Self {
        let bar = BarModel::new(&display, &scene, BarLevel::Categories);
        Self {
            display,
            scene,
            config,
            condition,
            layout,
            bar,
            button: None,
            trial: None,
            state: InteractionState {
                phase: Phase::Complete,
                cursor,
                gaze: cursor,
                highlight: None,
                animation: None,
                errors_so_far: 0,
                category_detours: 0,
                stray_clicks: 0,
                teleports: 0,
                t_thumbnail: None,
                t_button: None,
                last_t: 0,
            },
        }
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }
    pub fn state(&self) -> &InteractionState {
        &self.state
    }
    pub fn layout(&self) -> &SceneLayout {
        &self.layout
    }
    pub fn bar(&self) -> &BarModel {
        &self.bar
    }
    pub fn button(&self) -> Option<&NextButton> {
        self.button.as_ref()
    }
    pub fn trial(&self) -> Option<&ActiveTrial> {
        self.trial.as_ref()
    }
    pub fn display(&self) -> &CylinderDisplay {
        &self.display
    }
    pub fn scene_config(&self) -> &SceneConfig {
        &self.scene
    }
    pub fn config(&self) -> &InteractionConfig {
        &self.config
    }

    /// Starts a trial. Cursor, gaze and stacking order carry over; the bar
    /// resets to the category level.
    pub fn begin_trial(&mut self, trial: ActiveTrial) {
        self.trial = Some(trial);
        self.bar = BarModel::new(&self.display, &self.scene, BarLevel::Categories);
        self.button = None;
        let s = &mut self.state;
        s.phase = Phase::SelectCategory;
        s.animation = None;
        s.errors_so_far = 0;
        s.category_detours = 0;
        s.stray_clicks = 0;
        s.teleports = 0;
        s.t_thumbnail = None;
        s.t_button = None;
        s.last_t = 0;
        self.refresh_highlight();
    }

    pub fn is_complete(&self) -> bool {
        self.state.phase == Phase::Complete && self.state.t_button.is_some()
    }

    /// What a click at this moment would act on.
    pub fn click_target(&self) -> Target {
        let at_cursor = || hit_test(&self.layout, &self.bar, self.button.as_ref(), self.state.cursor);
        match self.condition.selection {
            SelectionMode::Gaze => {
                let g = hit_test(&self.layout, &self.bar, self.button.as_ref(), self.state.gaze);
                if g.is_bar() {
                    g
                } else {
                    at_cursor()
                }
            }
            SelectionMode::Cursor => at_cursor(),
        }
    }

    fn refresh_highlight(&mut self) {
        let pointer = match self.condition.selection {
            SelectionMode::Gaze => self.state.gaze,
            SelectionMode::Cursor => self.state.cursor,
        };
        self.state.highlight = self.bar.tile_at(pointer);
    }

    pub fn step(&mut self, event: InputEvent) -> Result<Vec<Emission>, InteractionError> {
        let trial = self.trial.ok_or(InteractionError::NoActiveTrial)?;
        if self.state.phase == Phase::Complete {
            return Err(InteractionError::TrialComplete);
        }
        if event.t_ms < self.state.last_t {
            return Err(InteractionError::OutOfOrder {
                t: event.t_ms,
                last: self.state.last_t,
            });
        }
        let mut out = Vec::new();
        match event.kind {
            InputKind::CursorDelta { dx, dy } => {
                if !(dx.is_finite() && dy.is_finite()) {
                    return Err(InteractionError::NonFinite);
                }
                let k = self.config.sensitivity;
                self.state.cursor = self.state.cursor.offset(dx * k, dy * k);
            }
            InputKind::GazePoint(p) => {
                if !p.is_finite() {
                    return Err(InteractionError::NonFinite);
                }
                self.state.gaze = p;
            }
            InputKind::Click => self.click(event.t_ms, trial, &mut out),
        }
        self.state.last_t = event.t_ms;
        self.refresh_highlight();
        Ok(out)
    }

    fn click(&mut self, t: u64, trial: ActiveTrial, out: &mut Vec<Emission>) {
        let target = self.click_target();
        match (self.state.phase, target) {
            (Phase::SelectCategory, Target::CategoryTile(color)) => {
                let correct = color == trial.target.color();
                if !correct {
                    self.state.category_detours += 1;
                }
                self.bar = BarModel::new(&self.display, &self.scene, BarLevel::Thumbnails(color));
                self.state.phase = Phase::SelectThumbnail(color);
                out.push(Emission::CategoryOpened { color, correct });
            }
            (Phase::SelectThumbnail(_), Target::GoBack) => {
                self.bar = BarModel::new(&self.display, &self.scene, BarLevel::Categories);
                self.state.phase = Phase::SelectCategory;
                out.push(Emission::GoBack);
            }
            (Phase::SelectThumbnail(_), Target::ThumbnailTile(w)) if w == trial.target => {
                let tile = self.bar.tile_rect(target).expect("clicked tile exists");
                self.layout.raise(w);
                let window = self.layout.window(w);
                let anim = Animation {
                    from: tile,
                    to: window.rect(),
                    start_ms: t,
                    end_ms: t + self.config.animation_ms,
                };
                let center = window.center;
                self.state.t_thumbnail = Some(t);
                self.state.animation = Some(anim);
                self.button = Some(NextButton::new(w, trial.button_center, &self.scene));
                self.state.phase = Phase::PressButton(w);
                out.push(Emission::ThumbnailSelected {
                    window: w,
                    correct: true,
                });
                out.push(Emission::WindowRaised(w));
                out.push(Emission::AnimationStarted(anim));
                if self.condition.behavior == CursorBehavior::Teleport {
                    self.state.cursor = center;
                    self.state.teleports += 1;
                    out.push(Emission::Teleported(center));
                }
            }
            (Phase::SelectThumbnail(_), Target::ThumbnailTile(w)) => {
                self.state.errors_so_far += 1;
                self.layout.raise(w);
                out.push(Emission::ThumbnailSelected {
                    window: w,
                    correct: false,
                });
                out.push(Emission::WindowRaised(w));
            }
            (Phase::PressButton(w), Target::NextButton(b)) if w == b => {
                self.state.t_button = Some(t);
                self.state.phase = Phase::Complete;
                let times = self.resolve_times().expect("button press completes the trial");
                out.push(Emission::TrialComplete(times));
            }
            (_, other) => {
                self.state.stray_clicks += 1;
                out.push(Emission::StrayClick(other));
            }
        }
    }

    pub fn resolve_times(&self) -> Result<TrialTimes, InteractionError> {
        resolve_times(&self.state)
    }
}

/// Thumbnail, button and total time of a completed trial.
pub fn resolve_times(state: &InteractionState) -> Result<TrialTimes, InteractionError> {
    match (state.t_thumbnail, state.t_button) {
        (Some(th), Some(tb)) if tb >= th => Ok(TrialTimes {
            thumbnail_ms: th,
            button_ms: tb - th,
            total_ms: th + (tb - th),
        }),
        _ => Err(InteractionError::Incomplete),
    }
}
