//! The complete parameter set of a simulated run.

use crate::agents::{CursorAgentParams, GazeAgentParams};
use crate::config::{ConfigError, KvMap};
use crate::geometry::{CylinderDisplay, DisplayConfig};
use crate::interaction::InteractionConfig;
use crate::scene::SceneConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    pub display: CylinderDisplay,
    pub scene: SceneConfig,
    pub interaction: InteractionConfig,
    pub cursor: CursorAgentParams,
    pub gaze: GazeAgentParams,
}

impl SimConfig {
    /// Parses a flat parameter file. Missing keys keep their defaults;
    /// unknown keys are rejected.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut kv = KvMap::parse(text)?;
        let mut display = DisplayConfig::default();
        display.apply_kv(&mut kv)?;
        let mut scene = SceneConfig::default();
        scene.apply_kv(&mut kv)?;
        let mut interaction = InteractionConfig::default();
        interaction.apply_kv(&mut kv)?;
        let mut cursor = CursorAgentParams::default();
        cursor.apply_kv(&mut kv)?;
        let mut gaze = GazeAgentParams::default();
        gaze.apply_kv(&mut kv)?;
        kv.finish()?;
        Ok(Self {
            display: display
                .build()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
            scene,
            interaction,
            cursor,
            gaze,
        })
    }

    pub fn to_kv(&self) -> String {
        format!(
            "# display\n{}# scene\n{}# interaction\n{}# cursor agent\n{}# gaze agent\n{}",
            self.display.to_kv(),
            self.scene.to_kv(),
            self.interaction.to_kv(),
            self.cursor.to_kv(),
            self.gaze.to_kv()
        )
    }
}
