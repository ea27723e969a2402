//! Study scene: twenty colour/number windows on two semicircles around the
//! bar, the two-level bar itself, and the per-trial "Next task" button.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, KvMap};
use crate::geometry::{arc_distance_px, CylinderDisplay, PixelPoint, PixelRect};

pub const WINDOW_COUNT: usize = 20;
pub const NUMBERS_PER_COLOR: u8 = 5;
pub const WINDOWS_PER_RING: usize = 10;
/// Ring radii in metres, window centre to bar centre.
pub const SHORT_RING_M: f64 = 0.25;
pub const LARGE_RING_M: f64 = 0.70;

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("{0} ring does not fit on the display above the bar")]
    RingDoesNotFit(Ring),
    #[error("next-task button radius {radius} px must exceed the button half-diagonal {half_diagonal:.1} px")]
    ButtonTooClose { radius: f64, half_diagonal: f64 },
    #[error("next-task button does not fit inside the window for every direction")]
    ButtonOutsideWindow,
    #[error("layout table line {line}: {msg}")]
    Table { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 4] = [Color::Red, Color::Green, Color::Blue, Color::Yellow];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "Red",
            Color::Green => "Green",
            Color::Blue => "Blue",
            Color::Yellow => "Yellow",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

/// Window identity; one per (colour, number) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowId(u8);

impl WindowId {
    pub const RED_1: WindowId = WindowId(0);

    pub fn new(color: Color, number: u8) -> Option<Self> {
        (1..=NUMBERS_PER_COLOR)
            .contains(&number)
            .then(|| WindowId(color as u8 * NUMBERS_PER_COLOR + number - 1))
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < WINDOW_COUNT).then_some(WindowId(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn color(self) -> Color {
        Color::ALL[(self.0 / NUMBERS_PER_COLOR) as usize]
    }

    pub fn number(self) -> u8 {
        self.0 % NUMBERS_PER_COLOR + 1
    }

    pub fn all() -> impl Iterator<Item = WindowId> {
        (0..WINDOW_COUNT as u8).map(WindowId)
    }
}

impl fmt::Display for WindowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.color(), self.number())
    }
}

impl FromStr for WindowId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (c, n) = s
            .split_once('-')
            .ok_or_else(|| format!("bad window id `{s}`"))?;
        let color: Color = c.parse()?;
        let number: u8 = n.parse().map_err(|_| format!("bad window number in `{s}`"))?;
        WindowId::new(color, number).ok_or_else(|| format!("window number out of range in `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    Short,
    Large,
}

impl Ring {
    pub fn letter(self) -> char {
        match self {
            Ring::Short => 'S',
            Ring::Large => 'L',
        }
    }

    pub fn radius_m(self) -> f64 {
        match self {
            Ring::Short => SHORT_RING_M,
            Ring::Large => LARGE_RING_M,
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ring::Short => "Short",
            Ring::Large => "Large",
        })
    }
}

impl FromStr for Ring {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Short" | "S" => Ok(Ring::Short),
            "Large" | "L" => Ok(Ring::Large),
            _ => Err(format!("unknown ring `{s}`")),
        }
    }
}

/// Sizes the scene needs beyond the display itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// Windows are `display / window_fraction` along each axis.
    pub window_fraction: f64,
    pub button_radius_px: f64,
    pub button_width_px: f64,
    pub button_height_px: f64,
    pub tile_padding_px: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            window_fraction: 5.0,
            button_radius_px: 300.0,
            button_width_px: 200.0,
            button_height_px: 80.0,
            tile_padding_px: 10.0,
        }
    }
}

impl SceneConfig {
    pub fn apply_kv(&mut self, kv: &mut KvMap) -> Result<(), ConfigError> {
        kv.take_f64("window_fraction", &mut self.window_fraction)?;
        kv.take_f64("button_radius_px", &mut self.button_radius_px)?;
        kv.take_f64("button_width_px", &mut self.button_width_px)?;
        kv.take_f64("button_height_px", &mut self.button_height_px)?;
        kv.take_f64("tile_padding_px", &mut self.tile_padding_px)?;
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "window_fraction = {}\nbutton_radius_px = {}\nbutton_width_px = {}\nbutton_height_px = {}\ntile_padding_px = {}\n",
            self.window_fraction,
            self.button_radius_px,
            self.button_width_px,
            self.button_height_px,
            self.tile_padding_px
        )
    }

    pub fn button_half_diagonal(&self) -> f64 {
        (self.button_width_px / 2.0).hypot(self.button_height_px / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub id: WindowId,
    pub center: PixelPoint,
    pub width_px: f64,
    pub height_px: f64,
    pub z_order: u32,
}

impl WindowSpec {
    pub fn color(&self) -> Color {
        self.id.color()
    }

    pub fn number(&self) -> u8 {
        self.id.number()
    }

    pub fn rect(&self) -> PixelRect {
        PixelRect::from_center(self.center, self.width_px, self.height_px)
    }
}

/// Window placement plus mutable stacking order.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneLayout {
    windows: Vec<WindowSpec>,
    ring_of: Vec<Ring>,
    bar_center: PixelPoint,
}

impl SceneLayout {
    pub fn windows(&self) -> &[WindowSpec] {
        &self.windows
    }

    pub fn window(&self, id: WindowId) -> &WindowSpec {
        &self.windows[id.index()]
    }

    pub fn ring_of(&self, id: WindowId) -> Ring {
        self.ring_of[id.index()]
    }

    pub fn bar_center(&self) -> PixelPoint {
        self.bar_center
    }

    pub fn ring_members(&self, ring: Ring) -> impl Iterator<Item = WindowId> + '_ {
        WindowId::all().filter(move |&w| self.ring_of(w) == ring)
    }

    /// Brings a window to the front of the stacking order.
    pub fn raise(&mut self, id: WindowId) {
        let top = self.windows.iter().map(|w| w.z_order).max().unwrap_or(0);
        if self.windows[id.index()].z_order != top {
            self.windows[id.index()].z_order = top + 1;
        }
    }

    /// Topmost window containing `p`.
    pub fn window_at(&self, p: PixelPoint) -> Option<WindowId> {
        self.windows
            .iter()
            .filter(|w| w.rect().contains(p))
            .max_by_key(|w| w.z_order)
            .map(|w| w.id)
    }

    /// Line-oriented dump: `id,color,number,cx,cy,ring`, ordered by id.
    pub fn to_table(&self) -> String {
        let mut out = String::from("id,color,number,cx,cy,ring\n");
        for w in &self.windows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                w.id.index(),
                w.color(),
                w.number(),
                w.center.x,
                w.center.y,
                self.ring_of(w.id)
            ));
        }
        out
    }

    /// Rebuilds a layout from [`SceneLayout::to_table`] output. Stacking
    /// order starts from the table order.
    pub fn from_table(
        text: &str,
        display: &CylinderDisplay,
        config: &SceneConfig,
    ) -> Result<Self, SceneError> {
        let err = |line: usize, msg: &str| SceneError::Table {
            line,
            msg: msg.to_string(),
        };
        let (ww, wh) = window_size(display, config);
        let mut windows: Vec<Option<(WindowSpec, Ring)>> = vec![None; WINDOW_COUNT];
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "id,color,number,cx,cy,ring")) => {}
            _ => return Err(err(1, "missing header")),
        }
        let mut z = 0;
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(err(i + 1, "expected 6 fields"));
            }
            let color: Color = f[1].parse().map_err(|e: String| err(i + 1, &e))?;
            let number: u8 = f[2].parse().map_err(|_| err(i + 1, "bad number"))?;
            let id = WindowId::new(color, number).ok_or_else(|| err(i + 1, "bad number"))?;
            if f[0].parse::<usize>().ok() != Some(id.index()) {
                return Err(err(i + 1, "id does not match color/number"));
            }
            let cx: f64 = f[3].parse().map_err(|_| err(i + 1, "bad cx"))?;
            let cy: f64 = f[4].parse().map_err(|_| err(i + 1, "bad cy"))?;
            let ring: Ring = f[5].parse().map_err(|e: String| err(i + 1, &e))?;
            if windows[id.index()].is_some() {
                return Err(err(i + 1, "duplicate window"));
            }
            windows[id.index()] = Some((
                WindowSpec {
                    id,
                    center: PixelPoint::new(cx, cy),
                    width_px: ww,
                    height_px: wh,
                    z_order: z,
                },
                ring,
            ));
            z += 1;
        }
        let mut specs = Vec::with_capacity(WINDOW_COUNT);
        let mut ring_of = Vec::with_capacity(WINDOW_COUNT);
        for w in windows {
            let (spec, ring) = w.ok_or_else(|| err(0, "missing windows"))?;
            specs.push(spec);
            ring_of.push(ring);
        }
        Ok(Self {
            windows: specs,
            ring_of,
            bar_center: display.bar_center(),
        })
    }
}

fn window_size(display: &CylinderDisplay, config: &SceneConfig) -> (f64, f64) {
    (
        display.width_px() / config.window_fraction,
        display.height_px() / config.window_fraction,
    )
}

/// Angular interval, measured about the bar centre, over which a window of
/// the given size stays fully on the display at `radius_px`.
fn feasible_arc(
    display: &CylinderDisplay,
    radius_px: f64,
    ww: f64,
    wh: f64,
) -> Option<(f64, f64)> {
    let bar = display.bar_center();
    let s_min = (bar.y + wh / 2.0 - display.height_px()) / radius_px;
    let s_max = (bar.y - wh / 2.0) / radius_px;
    if s_min > 1.0 || s_max < 1.0 {
        return None;
    }
    let c_max = (bar.x - ww / 2.0).min(display.width_px() - ww / 2.0 - bar.x) / radius_px;
    if c_max < 0.0 {
        return None;
    }
    let lo = s_min.max(-1.0).asin().max(c_max.min(1.0).acos());
    let hi = std::f64::consts::PI - lo;
    (lo < hi).then_some((lo, hi))
}

/// Places the ten short-ring and ten long-ring windows on upper semicircles
/// around the bar centre. Slots are evenly spaced in angle over the arc that
/// keeps every window on the display; the seed only shuffles which
/// (colour, number) lands in which slot.
pub fn build_layout(
    display: &CylinderDisplay,
    config: &SceneConfig,
    seed: u64,
) -> Result<SceneLayout, SceneError> {
    let (ww, wh) = window_size(display, config);
    let bar = display.bar_center();
    let mut slots = Vec::with_capacity(WINDOW_COUNT);
    for ring in [Ring::Short, Ring::Large] {
        let r = ring.radius_m() * display.px_per_m();
        let (lo, hi) = feasible_arc(display, r, ww, wh).ok_or(SceneError::RingDoesNotFit(ring))?;
        let step = (hi - lo) / (WINDOWS_PER_RING - 1) as f64;
        for i in 0..WINDOWS_PER_RING {
            let phi = lo + step * i as f64;
            slots.push((
                PixelPoint::new(bar.x + r * phi.cos(), bar.y - r * phi.sin()),
                ring,
            ));
        }
    }
    let mut ids: Vec<WindowId> = WindowId::all().collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut windows: Vec<Option<WindowSpec>> = vec![None; WINDOW_COUNT];
    let mut ring_of = vec![Ring::Short; WINDOW_COUNT];
    for (slot, (id, (center, ring))) in ids.iter().zip(slots).enumerate() {
        windows[id.index()] = Some(WindowSpec {
            id: *id,
            center,
            width_px: ww,
            height_px: wh,
            z_order: slot as u32,
        });
        ring_of[id.index()] = ring;
    }
    Ok(SceneLayout {
        windows: windows.into_iter().map(|w| w.expect("all slots filled")).collect(),
        ring_of,
        bar_center: bar,
    })
}

/// Checks that the button geometry can be placed in any direction.
pub fn validate_button(config: &SceneConfig, window: &WindowSpec) -> Result<(), SceneError> {
    let half_diagonal = config.button_half_diagonal();
    if config.button_radius_px <= half_diagonal {
        return Err(SceneError::ButtonTooClose {
            radius: config.button_radius_px,
            half_diagonal,
        });
    }
    if config.button_radius_px + config.button_width_px / 2.0 > window.width_px / 2.0
        || config.button_radius_px + config.button_height_px / 2.0 > window.height_px / 2.0
    {
        return Err(SceneError::ButtonOutsideWindow);
    }
    Ok(())
}

/// Picks the Next-task button centre: fixed distance from the window centre,
/// uniformly random direction.
pub fn place_next_button<R: Rng + ?Sized>(
    window: &WindowSpec,
    config: &SceneConfig,
    rng: &mut R,
) -> Result<PixelPoint, SceneError> {
    validate_button(config, window)?;
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    Ok(window.center.offset(
        config.button_radius_px * angle.cos(),
        config.button_radius_px * angle.sin(),
    ))
}

/// The Next-task button shown inside the restored target window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NextButton {
    pub window: WindowId,
    pub rect: PixelRect,
}

impl NextButton {
    pub fn new(window: WindowId, center: PixelPoint, config: &SceneConfig) -> Self {
        Self {
            window,
            rect: PixelRect::from_center(center, config.button_width_px, config.button_height_px),
        }
    }

    pub fn center(&self) -> PixelPoint {
        self.rect.center()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BarLevel {
    Categories,
    Thumbnails(Color),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    CategoryTile(Color),
    ThumbnailTile(WindowId),
    GoBack,
    NextButton(WindowId),
    WindowBody(WindowId),
    Background,
}

impl Target {
    pub fn is_bar(self) -> bool {
        matches!(
            self,
            Target::CategoryTile(_) | Target::ThumbnailTile(_) | Target::GoBack
        )
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::CategoryTile(c) => write!(f, "category:{c}"),
            Target::ThumbnailTile(w) => write!(f, "thumbnail:{w}"),
            Target::GoBack => f.write_str("go_back"),
            Target::NextButton(w) => write!(f, "next:{w}"),
            Target::WindowBody(w) => write!(f, "window:{w}"),
            Target::Background => f.write_str("background"),
        }
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "go_back" => return Ok(Target::GoBack),
            "background" => return Ok(Target::Background),
            _ => {}
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| format!("unknown target `{s}`"))?;
        match kind {
            "category" => Ok(Target::CategoryTile(arg.parse()?)),
            "thumbnail" => Ok(Target::ThumbnailTile(arg.parse()?)),
            "next" => Ok(Target::NextButton(arg.parse()?)),
            "window" => Ok(Target::WindowBody(arg.parse()?)),
            _ => Err(format!("unknown target `{s}`")),
        }
    }
}

/// Tiles currently shown in the bar strip.
#[derive(Debug, Clone, PartialEq)]
pub struct BarModel {
    level: BarLevel,
    tiles: Vec<(Target, PixelRect)>,
}

impl BarModel {
    /// Lays out the tiles for `level`: the strip is split into equal slots,
    /// four colour categories, or five thumbnails followed by Go Back.
    pub fn new(display: &CylinderDisplay, config: &SceneConfig, level: BarLevel) -> Self {
        let targets: Vec<Target> = match level {
            BarLevel::Categories => Color::ALL.into_iter().map(Target::CategoryTile).collect(),
            BarLevel::Thumbnails(color) => (1..=NUMBERS_PER_COLOR)
                .map(|n| Target::ThumbnailTile(WindowId::new(color, n).unwrap()))
                .chain(std::iter::once(Target::GoBack))
                .collect(),
        };
        let strip = display.bar_rect();
        let pitch = strip.width() / targets.len() as f64;
        let pad = config.tile_padding_px;
        let tiles = targets
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let x0 = strip.min_x + pitch * i as f64;
                (
                    t,
                    PixelRect {
                        min_x: x0 + pad,
                        min_y: strip.min_y + pad,
                        max_x: x0 + pitch - pad,
                        max_y: strip.max_y - pad,
                    },
                )
            })
            .collect();
        Self { level, tiles }
    }

    pub fn level(&self) -> BarLevel {
        self.level
    }

    pub fn tiles(&self) -> &[(Target, PixelRect)] {
        &self.tiles
    }

    pub fn tile_rect(&self, target: Target) -> Option<PixelRect> {
        self.tiles.iter().find(|(t, _)| *t == target).map(|(_, r)| *r)
    }

    pub fn go_back_rect(&self) -> Option<PixelRect> {
        self.tile_rect(Target::GoBack)
    }

    pub fn tile_at(&self, p: PixelPoint) -> Option<Target> {
        self.tiles.iter().find(|(_, r)| r.contains(p)).map(|(t, _)| *t)
    }

    /// Tile whose rectangle is closest to `p`.
    pub fn nearest_tile(&self, p: PixelPoint) -> (Target, PixelRect) {
        *self
            .tiles
            .iter()
            .min_by(|a, b| a.1.distance_to(p).total_cmp(&b.1.distance_to(p)))
            .expect("bar always has tiles")
    }
}

/// Element under `p`. Bar tiles live only in the bar strip; the Next-task
/// button is reported only where its window is the topmost one.
pub fn hit_test(
    layout: &SceneLayout,
    bar: &BarModel,
    button: Option<&NextButton>,
    p: PixelPoint,
) -> Target {
    if !p.is_finite() {
        return Target::Background;
    }
    if let Some(t) = bar.tile_at(p) {
        return t;
    }
    match layout.window_at(p) {
        Some(w) => match button {
            Some(b) if b.window == w && b.rect.contains(p) => Target::NextButton(w),
            _ => Target::WindowBody(w),
        },
        None => Target::Background,
    }
}

/// Convenience check used by tests and the layout validator.
pub fn ring_distance_px(layout: &SceneLayout, id: WindowId) -> f64 {
    arc_distance_px(layout.window(id).center, layout.bar_center())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn fixture() -> (CylinderDisplay, SceneConfig, SceneLayout) {
        let d = CylinderDisplay::default();
        let c = SceneConfig::default();
        let l = build_layout(&d, &c, 7).unwrap();
        (d, c, l)
    }

    #[test]
    fn window_ids_cover_all_pairs() {
        let pairs: HashSet<_> = WindowId::all().map(|w| (w.color(), w.number())).collect();
        assert_eq!(pairs.len(), 20);
        assert_eq!(WindowId::RED_1.to_string(), "Red-1");
        assert_eq!("Blue-4".parse::<WindowId>().unwrap().to_string(), "Blue-4");
        assert!("Blue-6".parse::<WindowId>().is_err());
    }

    #[test]
    fn seed_seven_layout_rings() {
        let (d, _, l) = fixture();
        assert_eq!(l.windows().len(), 20);
        assert_eq!(l.ring_members(Ring::Short).count(), 10);
        assert_eq!(l.ring_members(Ring::Large).count(), 10);
        for w in l.windows() {
            let dist = ring_distance_px(&l, w.id);
            let want = match l.ring_of(w.id) {
                Ring::Short => 1172.0,
                Ring::Large => 3281.6,
            };
            assert!((dist - want).abs() < 1.0, "{} at {dist}", w.id);
            assert!(d.display_rect().contains_rect(&w.rect()), "{} off display", w.id);
            assert_eq!(w.width_px, 1536.0);
            assert_eq!(w.height_px, 864.0);
        }
        let z: HashSet<_> = l.windows().iter().map(|w| w.z_order).collect();
        assert_eq!(z.len(), 20);
    }

    #[test]
    fn layout_is_deterministic_and_seed_only_permutes() {
        let (d, c, a) = fixture();
        assert_eq!(a, build_layout(&d, &c, 7).unwrap());
        let b = build_layout(&d, &c, 8).unwrap();
        let key = |p: PixelPoint| (p.x.to_bits(), p.y.to_bits());
        let pa: HashSet<_> = a.windows().iter().map(|w| key(w.center)).collect();
        let pb: HashSet<_> = b.windows().iter().map(|w| key(w.center)).collect();
        assert_eq!(pa, pb);
        assert!(WindowId::all().any(|id| a.window(id).center != b.window(id).center));
    }

    #[test]
    fn tiny_display_cannot_host_large_ring() {
        let d = crate::geometry::DisplayConfig {
            width_px: 1920.0,
            height_px: 1080.0,
            diagonal_in: 24.0,
            bar_width_px: 800.0,
            ..Default::default()
        }
        .build()
        .unwrap();
        assert!(matches!(
            build_layout(&d, &SceneConfig::default(), 1),
            Err(SceneError::RingDoesNotFit(_))
        ));
    }

    #[test]
    fn next_button_distance_and_uniformity() {
        let (_, c, l) = fixture();
        let w = l.window(WindowId::RED_1);
        let n = 10_000;
        let e = n as f64 / 16.0;
        let mut rejections = 0;
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bins = [0usize; 16];
            for _ in 0..n {
                let p = place_next_button(w, &c, &mut rng).unwrap();
                assert!((arc_distance_px(p, w.center) - 300.0).abs() < 1e-9);
                let b = NextButton::new(w.id, p, &c);
                assert!(!b.rect.contains(w.center));
                assert!(w.rect().contains_rect(&b.rect));
                let a = (p.y - w.center.y).atan2(p.x - w.center.x).rem_euclid(std::f64::consts::TAU);
                bins[((a / std::f64::consts::TAU) * 16.0) as usize % 16] += 1;
            }
            let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
            // chi-square(15) critical value at alpha = 0.01
            if chi2 >= 30.578 {
                rejections += 1;
            }
        }
        // Binomial(50, 0.01): P(X >= 4) < 2e-3.
        assert!(rejections < 4, "{rejections} of 50 seeds rejected uniformity");
    }

    #[test]
    fn next_button_same_rng_state_same_point() {
        let (_, c, l) = fixture();
        let w = l.window(WindowId::RED_1);
        let a = place_next_button(w, &c, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = place_next_button(w, &c, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn next_button_config_errors() {
        let (_, mut c, l) = fixture();
        c.button_radius_px = 100.0;
        assert!(matches!(
            place_next_button(l.window(WindowId::RED_1), &c, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(SceneError::ButtonTooClose { .. })
        ));
        c.button_radius_px = 700.0;
        assert_eq!(
            validate_button(&c, l.window(WindowId::RED_1)),
            Err(SceneError::ButtonOutsideWindow)
        );
    }

    #[test]
    fn bar_tiles_shape() {
        let (d, c, _) = fixture();
        let cats = BarModel::new(&d, &c, BarLevel::Categories);
        assert_eq!(cats.tiles().len(), 4);
        assert!(cats.go_back_rect().is_none());
        let thumbs = BarModel::new(&d, &c, BarLevel::Thumbnails(Color::Blue));
        assert_eq!(thumbs.tiles().len(), 6);
        assert!(thumbs.go_back_rect().is_some());
        for bar in [&cats, &thumbs] {
            for (i, (_, a)) in bar.tiles().iter().enumerate() {
                assert!(d.bar_rect().contains_rect(a));
                assert_eq!(a.height(), d.bar_height_px() - 2.0 * c.tile_padding_px);
                for (_, b) in &bar.tiles()[i + 1..] {
                    assert!(!a.overlaps(b));
                }
            }
        }
    }

    #[test]
    fn hit_test_cases() {
        let (d, c, mut l) = fixture();
        let bar = BarModel::new(&d, &c, BarLevel::Categories);
        let red = bar.tile_rect(Target::CategoryTile(Color::Red)).unwrap();
        assert_eq!(hit_test(&l, &bar, None, red.center()), Target::CategoryTile(Color::Red));
        assert_eq!(
            hit_test(&l, &bar, None, PixelPoint::new(-50.0, 9000.0)),
            Target::Background
        );
        // Find two overlapping windows and check the z rule.
        let ws = l.windows().to_vec();
        let (a, b) = ws
            .iter()
            .flat_map(|a| ws.iter().map(move |b| (a, b)))
            .find(|(a, b)| a.id < b.id && a.rect().overlaps(&b.rect()))
            .unwrap();
        let inter = PixelRect {
            min_x: a.rect().min_x.max(b.rect().min_x),
            min_y: a.rect().min_y.max(b.rect().min_y),
            max_x: a.rect().max_x.min(b.rect().max_x),
            max_y: a.rect().max_y.min(b.rect().max_y),
        };
        let p = inter.center();
        let top = if a.z_order > b.z_order { a.id } else { b.id };
        assert_eq!(hit_test(&l, &bar, None, p), Target::WindowBody(top));
        let other = if top == a.id { b.id } else { a.id };
        l.raise(other);
        assert_eq!(hit_test(&l, &bar, None, p), Target::WindowBody(other));
    }

    #[test]
    fn next_button_hit_only_on_its_window() {
        let (d, c, mut l) = fixture();
        let bar = BarModel::new(&d, &c, BarLevel::Categories);
        let w = l.window(WindowId::RED_1).clone();
        l.raise(w.id);
        let center = place_next_button(&w, &c, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let btn = NextButton::new(w.id, center, &c);
        assert_eq!(hit_test(&l, &bar, Some(&btn), center), Target::NextButton(w.id));
        assert_eq!(hit_test(&l, &bar, None, center), Target::WindowBody(w.id));
        assert_eq!(hit_test(&l, &bar, Some(&btn), w.center), Target::WindowBody(w.id));
    }

    #[test]
    fn table_round_trip() {
        let (d, c, l) = fixture();
        let t = l.to_table();
        assert_eq!(t.lines().count(), 21);
        let back = SceneLayout::from_table(&t, &d, &c).unwrap();
        for id in WindowId::all() {
            assert_eq!(back.window(id).center, l.window(id).center);
            assert_eq!(back.ring_of(id), l.ring_of(id));
        }
        assert!(SceneLayout::from_table("nope\n", &d, &c).is_err());
    }
}
