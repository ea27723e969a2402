//! Synthetic users.
//!
//! The cursor agent moves with Shannon-form Fitts' law timing and Gaussian
//! endpoint jitter. The gaze agent jumps with a linear main-sequence saccade
//! model and Gaussian tracking noise; the noisy gaze sample is captured by
//! the nearest bar tile, which is how gaze misselections arise.
//!
//! [`simulate_trial`] runs the agent in closed loop against a private copy
//! of the interaction machine so it can react to what actually happened
//! (stray clicks, wrong category, wrong thumbnail) and returns the
//! resulting input trace. Replaying that trace on the real machine
//! reproduces the run exactly.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::config::{ConfigError, KvMap};
use crate::geometry::{arc_distance_px, PixelPoint, PixelRect};
use crate::interaction::{
    CursorBehavior, Emission, InputEvent, InputKind, InteractionError, Machine, Phase,
    SelectionMode,
};
use crate::scene::Target;

/// Upper bound on selection attempts within one trial.
const MAX_ATTEMPTS: usize = 200;
/// Pointer motion is reported at roughly this interval.
const MOTION_SAMPLE_MS: f64 = 50.0;
/// Saccades beyond this amplitude need a corrective saccade.
const CORRECTIVE_THRESHOLD_DEG: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("agent could not complete the trial within {0} attempts")]
    Unreachable(usize),
    #[error("interaction rejected agent input: {0}")]
    Interaction(#[from] InteractionError),
    #[error("no trial is active")]
    NoTrial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CursorAgentParams {
    pub fitts_a: f64,
    pub fitts_b: f64,
    pub reaction_s: f64,
    pub click_s: f64,
    /// Usable trackpad travel in device units; 0 disables clutching.
    pub trackpad_extent_device_units: f64,
    pub clutch_penalty_s: f64,
    /// Endpoint standard deviation per axis.
    pub jitter_px: f64,
}

impl Default for CursorAgentParams {
    fn default() -> Self {
        Self {
            fitts_a: 0.2,
            fitts_b: 0.15,
            reaction_s: 0.25,
            click_s: 0.12,
            trackpad_extent_device_units: 0.0,
            clutch_penalty_s: 0.3,
            jitter_px: 40.0,
        }
    }
}

impl CursorAgentParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.fitts_b <= 0.0 {
            return Err(ConfigError::Invalid("fitts_b must be > 0".into()));
        }
        let non_negative = [
            ("fitts_a", self.fitts_a),
            ("reaction_s", self.reaction_s),
            ("click_s", self.click_s),
            ("trackpad_extent_device_units", self.trackpad_extent_device_units),
            ("clutch_penalty_s", self.clutch_penalty_s),
            ("jitter_px", self.jitter_px),
        ];
        for (k, v) in non_negative {
            if v < 0.0 {
                return Err(ConfigError::Invalid(format!("{k} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, kv: &mut KvMap) -> Result<(), ConfigError> {
        kv.take_f64("fitts_a", &mut self.fitts_a)?;
        kv.take_f64("fitts_b", &mut self.fitts_b)?;
        kv.take_f64("reaction_s", &mut self.reaction_s)?;
        kv.take_f64("click_s", &mut self.click_s)?;
        kv.take_f64(
            "trackpad_extent_device_units",
            &mut self.trackpad_extent_device_units,
        )?;
        kv.take_f64("clutch_penalty_s", &mut self.clutch_penalty_s)?;
        kv.take_f64("jitter_px", &mut self.jitter_px)?;
        self.validate()
    }

    pub fn to_kv(&self) -> String {
        format!(
            "fitts_a = {}\nfitts_b = {}\nreaction_s = {}\nclick_s = {}\ntrackpad_extent_device_units = {}\nclutch_penalty_s = {}\njitter_px = {}\n",
            self.fitts_a,
            self.fitts_b,
            self.reaction_s,
            self.click_s,
            self.trackpad_extent_device_units,
            self.clutch_penalty_s,
            self.jitter_px
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeAgentParams {
    pub saccade_latency_s: f64,
    pub saccade_ms_per_deg: f64,
    pub saccade_base_ms: f64,
    /// Angular standard deviation of the tracker, per axis.
    pub tracking_noise_deg: f64,
    pub modality_switch_s: f64,
    /// Stay only: time to find the cursor again after a gaze selection.
    pub cursor_relocate_s: f64,
    /// Time to confirm the highlighted tile before clicking.
    pub verify_s: f64,
}

impl Default for GazeAgentParams {
    fn default() -> Self {
        Self {
            saccade_latency_s: 0.2,
            saccade_ms_per_deg: 2.2,
            saccade_base_ms: 21.0,
            tracking_noise_deg: 0.9,
            modality_switch_s: 0.25,
            cursor_relocate_s: 0.6,
            verify_s: 0.085,
        }
    }
}

impl GazeAgentParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let non_negative = [
            ("saccade_latency_s", self.saccade_latency_s),
            ("saccade_ms_per_deg", self.saccade_ms_per_deg),
            ("saccade_base_ms", self.saccade_base_ms),
            ("tracking_noise_deg", self.tracking_noise_deg),
            ("modality_switch_s", self.modality_switch_s),
            ("cursor_relocate_s", self.cursor_relocate_s),
            ("verify_s", self.verify_s),
        ];
        for (k, v) in non_negative {
            if v < 0.0 {
                return Err(ConfigError::Invalid(format!("{k} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn apply_kv(&mut self, kv: &mut KvMap) -> Result<(), ConfigError> {
        kv.take_f64("saccade_latency_s", &mut self.saccade_latency_s)?;
        kv.take_f64("saccade_ms_per_deg", &mut self.saccade_ms_per_deg)?;
        kv.take_f64("saccade_base_ms", &mut self.saccade_base_ms)?;
        kv.take_f64("tracking_noise_deg", &mut self.tracking_noise_deg)?;
        kv.take_f64("modality_switch_s", &mut self.modality_switch_s)?;
        kv.take_f64("cursor_relocate_s", &mut self.cursor_relocate_s)?;
        kv.take_f64("verify_s", &mut self.verify_s)?;
        self.validate()
    }

    pub fn to_kv(&self) -> String {
        format!(
            "saccade_latency_s = {}\nsaccade_ms_per_deg = {}\nsaccade_base_ms = {}\ntracking_noise_deg = {}\nmodality_switch_s = {}\ncursor_relocate_s = {}\nverify_s = {}\n",
            self.saccade_latency_s,
            self.saccade_ms_per_deg,
            self.saccade_base_ms,
            self.tracking_noise_deg,
            self.modality_switch_s,
            self.cursor_relocate_s,
            self.verify_s
        )
    }
}

/// Number of hand repositionings needed to cover `distance_px` of cursor
/// travel at the given sensitivity.
pub fn clutch_count(params: &CursorAgentParams, distance_px: f64, sensitivity: f64) -> u32 {
    let extent = params.trackpad_extent_device_units;
    if extent <= 0.0 {
        return 0;
    }
    let motor = distance_px / sensitivity;
    if motor <= extent {
        0
    } else {
        (motor / extent - 1.0).ceil() as u32
    }
}

/// Movement time in seconds, `a + b * log2(D / W + 1)` plus clutching.
pub fn fitts_time(
    params: &CursorAgentParams,
    distance_px: f64,
    width_px: f64,
    sensitivity: f64,
) -> f64 {
    debug_assert!(width_px > 0.0 && distance_px >= 0.0);
    let id = (distance_px / width_px + 1.0).log2();
    params.fitts_a
        + params.fitts_b * id
        + params.clutch_penalty_s * clutch_count(params, distance_px, sensitivity) as f64
}

/// Saccade duration in seconds including latency; amplitudes over 30
/// degrees add a corrective saccade covering the excess.
pub fn saccade_time(params: &GazeAgentParams, amplitude_deg: f64) -> f64 {
    let a = amplitude_deg.max(0.0);
    let mut ms = params.saccade_base_ms + params.saccade_ms_per_deg * a;
    if a > CORRECTIVE_THRESHOLD_DEG {
        ms += params.saccade_base_ms
            + params.saccade_ms_per_deg * (a - CORRECTIVE_THRESHOLD_DEG);
    }
    params.saccade_latency_s + ms / 1000.0
}

/// Input trace for one trial plus the target the agent meant to hit with
/// each click.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventTrace {
    pub events: Vec<InputEvent>,
    /// `(index into events, intended target)` for every click.
    pub intents: Vec<(usize, Target)>,
}

impl EventTrace {
    pub fn last_t(&self) -> Option<u64> {
        self.events.last().map(|e| e.t_ms)
    }

    pub fn clicks(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == InputKind::Click)
            .count()
    }
}

struct Runner<'a, R: Rng + ?Sized> {
    m: Machine,
    cursor: &'a CursorAgentParams,
    gaze: &'a GazeAgentParams,
    rng: &'a mut R,
    clock_ms: f64,
    trace: EventTrace,
}

impl<R: Rng + ?Sized> Runner<'_, R> {
    fn wait(&mut self, seconds: f64) {
        self.clock_ms += seconds * 1000.0;
    }

    fn emit(&mut self, kind: InputKind) -> Result<Vec<Emission>, AgentError> {
        let floor = self.trace.last_t().map_or(1, |t| t + 1);
        let t = (self.clock_ms.round() as u64).max(floor);
        self.clock_ms = self.clock_ms.max(t as f64);
        let ev = InputEvent { t_ms: t, kind };
        let out = self.m.step(ev)?;
        self.trace.events.push(ev);
        Ok(out)
    }

    fn normal2(&mut self, sigma: f64) -> (f64, f64) {
        if sigma == 0.0 {
            return (0.0, 0.0);
        }
        let x: f64 = StandardNormal.sample(self.rng);
        let y: f64 = StandardNormal.sample(self.rng);
        (x * sigma, y * sigma)
    }

    fn noisy_gaze(&mut self, p: PixelPoint) -> PixelPoint {
        let sigma = self.m.display().deg_to_px(self.gaze.tracking_noise_deg);
        let (dx, dy) = self.normal2(sigma);
        p.offset(dx, dy)
    }

    /// Straight-line cursor movement onto `aim`, timed by Fitts' law.
    fn move_cursor(&mut self, aim: PixelPoint, width_px: f64) -> Result<(), AgentError> {
        let start = self.m.state().cursor;
        let d = arc_distance_px(start, aim);
        if d < 1e-9 {
            return Ok(());
        }
        let k = self.m.config().sensitivity;
        let mt_ms = fitts_time(self.cursor, d, width_px, k) * 1000.0;
        let n = ((mt_ms / MOTION_SAMPLE_MS).ceil() as usize).max(1);
        let t0 = self.clock_ms;
        let mut prev = start;
        for i in 1..=n {
            let f = i as f64 / n as f64;
            let p = PixelPoint::new(start.x + (aim.x - start.x) * f, start.y + (aim.y - start.y) * f);
            self.clock_ms = t0 + mt_ms * f;
            self.emit(InputKind::CursorDelta {
                dx: (p.x - prev.x) / k,
                dy: (p.y - prev.y) / k,
            })?;
            prev = p;
        }
        Ok(())
    }

    fn click(&mut self, intent: Target) -> Result<Vec<Emission>, AgentError> {
        self.wait(self.cursor.click_s);
        let idx = self.trace.events.len();
        let out = self.emit(InputKind::Click)?;
        self.trace.intents.push((idx, intent));
        Ok(out)
    }

    fn select_with_cursor(&mut self, target: Target, rect: PixelRect) -> Result<(), AgentError> {
        if self.m.condition().selection == SelectionMode::Cursor {
            // Eyes lead the hand onto the target.
            let g = self.noisy_gaze(rect.center());
            self.emit(InputKind::GazePoint(g))?;
        }
        let (jx, jy) = self.normal2(self.cursor.jitter_px);
        let aim = rect.center().offset(jx, jy);
        self.move_cursor(aim, rect.width().min(rect.height()))?;
        self.click(target)?;
        Ok(())
    }

    fn select_with_gaze(&mut self, target: Target, rect: PixelRect) -> Result<(), AgentError> {
        let from = self.m.state().gaze;
        let amplitude = self
            .m
            .display()
            .px_to_deg(arc_distance_px(from, rect.center()));
        self.wait(saccade_time(self.gaze, amplitude));
        let noisy = self.noisy_gaze(rect.center());
        let (_, captured) = self.m.bar().nearest_tile(noisy);
        self.emit(InputKind::GazePoint(captured.clamp(noisy)))?;
        self.wait(self.gaze.verify_s);
        self.click(target)?;
        Ok(())
    }

    fn select_bar(&mut self, target: Target) -> Result<(), AgentError> {
        let rect = self
            .m
            .bar()
            .tile_rect(target)
            .expect("agent only aims at visible tiles");
        match self.m.condition().selection {
            SelectionMode::Gaze => self.select_with_gaze(target, rect),
            SelectionMode::Cursor => self.select_with_cursor(target, rect),
        }
    }

    fn run(mut self) -> Result<EventTrace, AgentError> {
        let trial = *self.m.trial().ok_or(AgentError::NoTrial)?;
        let goal = trial.target;
        let gaze_mode = self.m.condition().selection == SelectionMode::Gaze;

        self.wait(self.cursor.reaction_s);
        if gaze_mode {
            self.wait(self.gaze.modality_switch_s);
        }
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(AgentError::Unreachable(MAX_ATTEMPTS));
            }
            match self.m.state().phase {
                Phase::SelectCategory => self.select_bar(Target::CategoryTile(goal.color()))?,
                Phase::SelectThumbnail(c) if c != goal.color() => {
                    self.wait(self.gaze_or_cursor_verify());
                    self.select_bar(Target::GoBack)?;
                }
                Phase::SelectThumbnail(_) => {
                    let errors = self.m.state().errors_so_far;
                    self.select_bar(Target::ThumbnailTile(goal))?;
                    if self.m.state().errors_so_far > errors {
                        self.wait(self.gaze_or_cursor_verify());
                    }
                }
                Phase::PressButton(_) | Phase::Complete => break,
            }
        }

        // Follow the restore animation to the window and find the button.
        self.wait(self.cursor.reaction_s);
        if gaze_mode {
            self.wait(self.gaze.modality_switch_s);
            if self.m.condition().behavior == CursorBehavior::Stay {
                let c = self.noisy_gaze(self.m.state().cursor);
                self.emit(InputKind::GazePoint(c))?;
                self.wait(self.gaze.cursor_relocate_s);
            }
        }
        let button = *self.m.button().expect("button shown after correct thumbnail");
        while !self.m.is_complete() {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(AgentError::Unreachable(MAX_ATTEMPTS));
            }
            // Each attempt starts with a fresh look at the button; a sample
            // that strays onto the bar makes the click a stray click.
            let g = self.noisy_gaze(button.center());
            self.emit(InputKind::GazePoint(g))?;
            let (jx, jy) = self.normal2(self.cursor.jitter_px);
            let aim = button.center().offset(jx, jy);
            self.move_cursor(aim, button.rect.width().min(button.rect.height()))?;
            self.click(Target::NextButton(button.window))?;
        }
        Ok(self.trace)
    }

    /// Time to notice that a selection went wrong.
    fn gaze_or_cursor_verify(&self) -> f64 {
        match self.m.condition().selection {
            SelectionMode::Gaze => self.gaze.verify_s,
            SelectionMode::Cursor => self.cursor.reaction_s,
        }
    }
}

/// Generates the input trace for the trial currently active on `machine`.
/// The machine itself is not modified.
pub fn simulate_trial<R: Rng + ?Sized>(
    machine: &Machine,
    cursor: &CursorAgentParams,
    gaze: &GazeAgentParams,
    rng: &mut R,
) -> Result<EventTrace, AgentError> {
    Runner {
        m: machine.clone(),
        cursor,
        gaze,
        rng,
        clock_ms: 0.0,
        trace: EventTrace::default(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CylinderDisplay;
    use crate::interaction::{ActiveTrial, Condition, InteractionConfig};
    use crate::scene::{build_layout, place_next_button, Ring, SceneConfig, WindowId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fitts_zero_distance_is_intercept() {
        let p = CursorAgentParams::default();
        assert_eq!(fitts_time(&p, 0.0, 100.0, 20.0), p.fitts_a);
    }

    #[test]
    fn fitts_hand_value() {
        let p = CursorAgentParams::default();
        // 0.2 + 0.15 * log2(3281 / 150 + 1) = 0.2 + 0.15 * 4.515594720...
        let t = fitts_time(&p, 3281.0, 150.0, 20.0);
        assert!((t - 0.877_339_208_009_266).abs() < 1e-12);
    }

    #[test]
    fn higher_sensitivity_never_adds_clutches() {
        let p = CursorAgentParams {
            trackpad_extent_device_units: 60.0,
            ..Default::default()
        };
        for i in 0..400 {
            let d = i as f64 * 25.0;
            for k in [5.0, 10.0, 20.0] {
                assert!(clutch_count(&p, d, 2.0 * k) <= clutch_count(&p, d, k));
                assert!(fitts_time(&p, d, 80.0, 2.0 * k) <= fitts_time(&p, d, 80.0, k));
            }
        }
        assert_eq!(clutch_count(&p, 20.0 * 60.0, 20.0), 0);
        assert_eq!(clutch_count(&p, 20.0 * 61.0, 20.0), 1);
        assert_eq!(clutch_count(&p, 20.0 * 180.0, 20.0), 2);
        assert_eq!(clutch_count(&CursorAgentParams::default(), 1e9, 1.0), 0);
    }

    #[test]
    fn saccade_values() {
        let g = GazeAgentParams::default();
        assert!((saccade_time(&g, 0.0) - 0.221).abs() < 1e-12);
        // 0.70 m at 1 m radius is 40.107 degrees.
        let a = (0.70f64).to_degrees();
        let t = saccade_time(&g, a);
        assert!((t - 0.352_471_000_900_293_6).abs() < 1e-12);
        assert!((t - 0.35).abs() < 0.005);
        let (t1, t2, t3) = (saccade_time(&g, 5.0), saccade_time(&g, 10.0), saccade_time(&g, 15.0));
        assert!(((t2 - t1) - (t3 - t2)).abs() < 1e-12 && t2 > t1);
    }

    struct Setup {
        m: Machine,
        start: WindowId,
    }

    fn setup(condition: Condition, pair: (Ring, Ring), seed: u64) -> Setup {
        let display = CylinderDisplay::default();
        let scene = SceneConfig::default();
        let layout = build_layout(&display, &scene, 11).unwrap();
        let start = layout.ring_members(pair.0).next().unwrap();
        let target = layout.ring_members(pair.1).find(|&w| w != start).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let button_center = place_next_button(layout.window(target), &scene, &mut rng).unwrap();
        let cursor = layout.window(start).center;
        let mut m = Machine::new(
            display,
            scene,
            InteractionConfig::default(),
            condition,
            layout,
            cursor,
        );
        m.begin_trial(ActiveTrial {
            target,
            button_center,
        });
        Setup { m, start }
    }

    fn noiseless() -> (CursorAgentParams, GazeAgentParams) {
        (
            CursorAgentParams {
                jitter_px: 0.0,
                ..Default::default()
            },
            GazeAgentParams {
                tracking_noise_deg: 0.0,
                ..Default::default()
            },
        )
    }

    fn replay(m: &Machine, trace: &EventTrace) -> (Machine, Vec<Emission>) {
        let mut m = m.clone();
        let mut all = Vec::new();
        for e in &trace.events {
            all.extend(m.step(*e).unwrap());
        }
        (m, all)
    }

    #[test]
    fn gaze_teleport_large_large_noise_free() {
        let s = setup(Condition::GAZE_TELEPORT, (Ring::Large, Ring::Large), 1);
        let (c, g) = noiseless();
        let trace = simulate_trial(&s.m, &c, &g, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let (done, _) = replay(&s.m, &trace);
        assert!(done.is_complete());
        let bar_confirms = trace
            .intents
            .iter()
            .filter(|(_, t)| t.is_bar())
            .count();
        assert_eq!(bar_confirms, 2);
        assert_eq!(trace.clicks(), 3);
        let sens = done.config().sensitivity;
        let path: f64 = trace
            .events
            .iter()
            .filter_map(|e| match e.kind {
                InputKind::CursorDelta { dx, dy } => Some((dx * sens).hypot(dy * sens)),
                _ => None,
            })
            .sum();
        assert!((path - 300.0).abs() < 1e-9, "approach length {path}");
        assert_eq!(done.state().errors_so_far, 0);
    }

    #[test]
    fn cursor_stay_short_short_path_and_no_teleport() {
        let s = setup(Condition::CURSOR_STAY, (Ring::Short, Ring::Short), 2);
        let (c, g) = noiseless();
        let trace = simulate_trial(&s.m, &c, &g, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let (done, emissions) = replay(&s.m, &trace);
        assert!(done.is_complete());
        assert!(!emissions.iter().any(|e| matches!(e, Emission::Teleported(_))));
        assert_eq!(done.state().teleports, 0);

        // Cursor path up to the thumbnail confirm equals start -> category
        // tile -> thumbnail tile.
        let sens = done.config().sensitivity;
        let confirm_idx = trace.intents[1].0;
        let path: f64 = trace.events[..confirm_idx]
            .iter()
            .filter_map(|e| match e.kind {
                InputKind::CursorDelta { dx, dy } => Some((dx * sens).hypot(dy * sens)),
                _ => None,
            })
            .sum();
        let target = done.trial().unwrap().target;
        let d = done.display();
        let cfg = done.scene_config();
        let cats = crate::scene::BarModel::new(d, cfg, crate::scene::BarLevel::Categories);
        let thumbs = crate::scene::BarModel::new(
            d,
            cfg,
            crate::scene::BarLevel::Thumbnails(target.color()),
        );
        let cat = cats.tile_rect(Target::CategoryTile(target.color())).unwrap().center();
        let th = thumbs.tile_rect(Target::ThumbnailTile(target)).unwrap().center();
        let start = s.m.state().cursor;
        let want = arc_distance_px(start, cat) + arc_distance_px(cat, th);
        assert!((path - want).abs() < 1e-6, "{path} vs {want}");
        assert_eq!(s.m.layout().ring_of(s.start), Ring::Short);
    }

    #[test]
    fn trace_times_strictly_increase_and_total_matches() {
        for (i, cond) in Condition::ALL.into_iter().enumerate() {
            let s = setup(cond, (Ring::Large, Ring::Short), 3 + i as u64);
            let trace = simulate_trial(
                &s.m,
                &CursorAgentParams::default(),
                &GazeAgentParams::default(),
                &mut ChaCha8Rng::seed_from_u64(i as u64),
            )
            .unwrap();
            assert!(trace.events.windows(2).all(|w| w[0].t_ms < w[1].t_ms));
            let (done, _) = replay(&s.m, &trace);
            let times = done.resolve_times().unwrap();
            assert_eq!(times.total_ms, trace.last_t().unwrap());
            assert!(times.thumbnail_ms > 0);
        }
    }

    #[test]
    fn traces_are_deterministic() {
        let s = setup(Condition::GAZE_STAY, (Ring::Short, Ring::Large), 9);
        let (c, g) = (CursorAgentParams::default(), GazeAgentParams::default());
        let a = simulate_trial(&s.m, &c, &g, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = simulate_trial(&s.m, &c, &g, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_free_gaze_never_misses() {
        let (c, g) = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let pairs = [
            (Ring::Large, Ring::Large),
            (Ring::Large, Ring::Short),
            (Ring::Short, Ring::Large),
            (Ring::Short, Ring::Short),
        ];
        for i in 0..2_000u64 {
            let cond = if i % 2 == 0 {
                Condition::GAZE_TELEPORT
            } else {
                Condition::GAZE_STAY
            };
            let s = setup(cond, pairs[(i % 4) as usize], i);
            let trace = simulate_trial(&s.m, &c, &g, &mut rng).unwrap();
            let (done, _) = replay(&s.m, &trace);
            assert_eq!(done.state().errors_so_far, 0);
            assert_eq!(done.state().category_detours, 0);
        }
    }

    #[test]
    fn gaze_noise_produces_misselections() {
        let (c, _) = noiseless();
        let g = GazeAgentParams {
            tracking_noise_deg: 2.5,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut errors = 0;
        for i in 0..300u64 {
            let s = setup(Condition::GAZE_TELEPORT, (Ring::Short, Ring::Short), i);
            let trace = simulate_trial(&s.m, &c, &g, &mut rng).unwrap();
            let (done, _) = replay(&s.m, &trace);
            assert!(done.is_complete());
            errors += done.state().errors_so_far;
        }
        assert!(errors > 0);
    }
}
