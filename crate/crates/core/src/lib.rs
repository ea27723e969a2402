//! Simulator and study harness for Spatial Bar window switching on a large
//! curved virtual display.
//!
//! * [`geometry`]: cylinder display, pixel/world mapping, raycasts.
//! * [`scene`]: window layout, bar tiles, Next-task button, hit testing.
//! * [`interaction`]: the selection state machine.
//! * [`agents`]: synthetic cursor and gaze users.
//! * [`experiment`]: counterbalancing, trial sequences, session runs, logs.

pub mod agents;
pub mod config;
pub mod experiment;
pub mod geometry;
pub mod interaction;
pub mod rng;
pub mod scene;
pub mod sim;

pub use config::{ConfigError, KvMap};
pub use geometry::{CylinderDisplay, DisplayConfig, PixelPoint, PixelRect, SurfacePoint};
pub use interaction::{
    Condition, CursorBehavior, InputEvent, InputKind, InteractionConfig, Machine, SelectionMode,
};
pub use scene::{Color, Ring, SceneConfig, SceneLayout, Target, WindowId};
pub use sim::SimConfig;
