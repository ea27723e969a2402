//! Curved virtual display geometry.
//!
//! The display is a vertical cylinder section wrapped around the viewer's
//! head. The cylinder axis is the world `y` axis through the origin, the
//! display centre sits at azimuth 0 on the `-z` side and the display's
//! vertical middle is at eye height. Pixels map isometrically onto the
//! surface: equal pixel steps along a row are equal arc lengths. The bar
//! strip continues the same surface below the display's bottom edge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, KvMap};

const INCH_M: f64 = 0.0254;
const ON_SURFACE_TOL_M: f64 = 1e-6;
const UNIT_DIR_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("point is {0:.3e} m off the display cylinder")]
    OffCylinder(f64),
    #[error("ray direction is not unit length (|dir| = {0})")]
    NotUnit(f64),
    #[error("ray origin must lie strictly inside the cylinder")]
    OriginOutside,
    #[error("invalid display: {0}")]
    InvalidDisplay(String),
}

/// A point in display pixel space. `y` grows downward and may run past
/// `height_px` into the bar strip; nothing is clamped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn offset(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Axis-aligned rectangle in the unrolled pixel plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelRect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl PixelRect {
    pub fn from_center(center: PixelPoint, width: f64, height: f64) -> Self {
        Self {
            min_x: center.x - width / 2.0,
            min_y: center.y - height / 2.0,
            max_x: center.x + width / 2.0,
            max_y: center.y + height / 2.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(
            (self.min_x + self.max_x) / 2.0,
            (self.min_y + self.max_y) / 2.0,
        )
    }

    /// Closed containment test.
    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn overlaps(&self, other: &PixelRect) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }

    pub fn contains_rect(&self, other: &PixelRect) -> bool {
        other.min_x >= self.min_x
            && other.max_x <= self.max_x
            && other.min_y >= self.min_y
            && other.max_y <= self.max_y
    }

    /// Closest point of the rectangle to `p`.
    pub fn clamp(&self, p: PixelPoint) -> PixelPoint {
        PixelPoint::new(
            p.x.clamp(self.min_x, self.max_x),
            p.y.clamp(self.min_y, self.max_y),
        )
    }

    /// Euclidean distance from `p` to the rectangle (zero inside).
    pub fn distance_to(&self, p: PixelPoint) -> f64 {
        arc_distance_px(p, self.clamp(p))
    }
}

/// World-space point in metres, cylinder axis along `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SurfacePoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: SurfacePoint) -> [f64; 3] {
        [self.x - o.x, self.y - o.y, self.z - o.z]
    }
}

/// Result of projecting a surface point back into pixel space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: PixelPoint,
    /// False when the pixel lies outside the display + bar strip extent.
    pub in_extent: bool,
}

/// The cylindrical display together with the bar strip below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderDisplay {
    radius_m: f64,
    width_px: f64,
    height_px: f64,
    diagonal_in: f64,
    bar_offset_px: f64,
    bar_height_px: f64,
    bar_width_px: f64,
    eye_height_m: f64,
    width_m: f64,
    height_m: f64,
    px_per_m: f64,
}

impl Default for CylinderDisplay {
    fn default() -> Self {
        DisplayConfig::default()
            .build()
            .expect("default display is valid")
    }
}

/// Input parameters of a [`CylinderDisplay`]; the physical size is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayConfig {
    pub radius_m: f64,
    pub width_px: f64,
    pub height_px: f64,
    pub diagonal_in: f64,
    pub bar_offset_px: f64,
    pub bar_height_px: f64,
    pub bar_width_px: f64,
    pub eye_height_m: f64,
}

impl Default for DisplayConfig {
    fn default() -> Self {
        Self {
            radius_m: 1.0,
            width_px: 7680.0,
            height_px: 4320.0,
            diagonal_in: 74.0,
            bar_offset_px: 40.0,
            bar_height_px: 480.0,
            bar_width_px: 1920.0,
            eye_height_m: 1.2,
        }
    }
}

impl DisplayConfig {
    pub const KEYS: [&'static str; 8] = [
        "radius_m",
        "width_px",
        "height_px",
        "diagonal_in",
        "bar_offset_px",
        "bar_height_px",
        "bar_width_px",
        "eye_height_m",
    ];

    pub fn build(&self) -> Result<CylinderDisplay, GeometryError> {
        let all = [
            self.radius_m,
            self.width_px,
            self.height_px,
            self.diagonal_in,
            self.bar_offset_px,
            self.bar_height_px,
            self.bar_width_px,
            self.eye_height_m,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if self.radius_m <= 0.0 {
            return Err(GeometryError::InvalidDisplay("radius_m must be > 0".into()));
        }
        if self.width_px <= 0.0 || self.height_px <= 0.0 || self.diagonal_in <= 0.0 {
            return Err(GeometryError::InvalidDisplay(
                "display size must be positive".into(),
            ));
        }
        if self.bar_offset_px < 0.0 || self.bar_height_px <= 0.0 || self.bar_width_px <= 0.0 {
            return Err(GeometryError::InvalidDisplay(
                "bar strip dimensions must be positive".into(),
            ));
        }
        if self.bar_width_px > self.width_px {
            return Err(GeometryError::InvalidDisplay(
                "bar strip is wider than the display".into(),
            ));
        }
        let diagonal_m = self.diagonal_in * INCH_M;
        let diagonal_px = self.width_px.hypot(self.height_px);
        let width_m = diagonal_m * self.width_px / diagonal_px;
        let height_m = diagonal_m * self.height_px / diagonal_px;
        if width_m / self.radius_m >= std::f64::consts::TAU {
            return Err(GeometryError::InvalidDisplay(
                "display wraps past a full turn".into(),
            ));
        }
        Ok(CylinderDisplay {
            radius_m: self.radius_m,
            width_px: self.width_px,
            height_px: self.height_px,
            diagonal_in: self.diagonal_in,
            bar_offset_px: self.bar_offset_px,
            bar_height_px: self.bar_height_px,
            bar_width_px: self.bar_width_px,
            eye_height_m: self.eye_height_m,
            width_m,
            height_m,
            px_per_m: self.width_px / width_m,
        })
    }

    pub fn apply_kv(&mut self, kv: &mut KvMap) -> Result<(), ConfigError> {
        kv.take_f64("radius_m", &mut self.radius_m)?;
        kv.take_f64("width_px", &mut self.width_px)?;
        kv.take_f64("height_px", &mut self.height_px)?;
        kv.take_f64("diagonal_in", &mut self.diagonal_in)?;
        kv.take_f64("bar_offset_px", &mut self.bar_offset_px)?;
        kv.take_f64("bar_height_px", &mut self.bar_height_px)?;
        kv.take_f64("bar_width_px", &mut self.bar_width_px)?;
        kv.take_f64("eye_height_m", &mut self.eye_height_m)?;
        Ok(())
    }
}

impl CylinderDisplay {
    pub fn config(&self) -> DisplayConfig {
        DisplayConfig {
            radius_m: self.radius_m,
            width_px: self.width_px,
            height_px: self.height_px,
            diagonal_in: self.diagonal_in,
            bar_offset_px: self.bar_offset_px,
            bar_height_px: self.bar_height_px,
            bar_width_px: self.bar_width_px,
            eye_height_m: self.eye_height_m,
        }
    }

    /// Flat `key = value` block describing this display; lengths in metres.
    pub fn to_kv(&self) -> String {
        let c = self.config();
        let vals = [
            c.radius_m,
            c.width_px,
            c.height_px,
            c.diagonal_in,
            c.bar_offset_px,
            c.bar_height_px,
            c.bar_width_px,
            c.eye_height_m,
        ];
        DisplayConfig::KEYS
            .iter()
            .zip(vals)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }
    pub fn width_px(&self) -> f64 {
        self.width_px
    }
    pub fn height_px(&self) -> f64 {
        self.height_px
    }
    pub fn diagonal_in(&self) -> f64 {
        self.diagonal_in
    }
    pub fn width_m(&self) -> f64 {
        self.width_m
    }
    pub fn height_m(&self) -> f64 {
        self.height_m
    }
    pub fn px_per_m(&self) -> f64 {
        self.px_per_m
    }
    pub fn eye_height_m(&self) -> f64 {
        self.eye_height_m
    }
    pub fn bar_offset_px(&self) -> f64 {
        self.bar_offset_px
    }
    pub fn bar_height_px(&self) -> f64 {
        self.bar_height_px
    }
    pub fn bar_width_px(&self) -> f64 {
        self.bar_width_px
    }

    pub fn display_rect(&self) -> PixelRect {
        PixelRect {
            min_x: 0.0,
            min_y: 0.0,
            max_x: self.width_px,
            max_y: self.height_px,
        }
    }

    /// The bar strip, horizontally centred under the display.
    pub fn bar_rect(&self) -> PixelRect {
        let top = self.height_px + self.bar_offset_px;
        PixelRect {
            min_x: (self.width_px - self.bar_width_px) / 2.0,
            min_y: top,
            max_x: (self.width_px + self.bar_width_px) / 2.0,
            max_y: top + self.bar_height_px,
        }
    }

    pub fn bar_center(&self) -> PixelPoint {
        self.bar_rect().center()
    }

    /// Bounding box of the display plus everything down to the bar strip's
    /// bottom edge.
    pub fn extent(&self) -> PixelRect {
        PixelRect {
            min_x: 0.0,
            min_y: 0.0,
            max_x: self.width_px,
            max_y: self.height_px + self.bar_offset_px + self.bar_height_px,
        }
    }

    pub fn azimuth(&self, p: PixelPoint) -> f64 {
        (p.x - self.width_px / 2.0) / self.px_per_m / self.radius_m
    }

    /// Converts a pixel distance into a visual angle seen from the axis.
    pub fn px_to_deg(&self, px: f64) -> f64 {
        (px / self.px_per_m / self.radius_m).to_degrees()
    }

    pub fn deg_to_px(&self, deg: f64) -> f64 {
        deg.to_radians() * self.radius_m * self.px_per_m
    }

    pub fn pixel_to_world(&self, p: PixelPoint) -> Result<SurfacePoint, GeometryError> {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let theta = self.azimuth(p);
        let y = self.eye_height_m + (self.height_px / 2.0 - p.y) / self.px_per_m;
        Ok(SurfacePoint::new(
            self.radius_m * theta.sin(),
            y,
            -self.radius_m * theta.cos(),
        ))
    }

    pub fn world_to_pixel(&self, s: SurfacePoint) -> Result<Projection, GeometryError> {
        if !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let rho = s.x.hypot(s.z);
        let off = (rho - self.radius_m).abs();
        if off > ON_SURFACE_TOL_M {
            return Err(GeometryError::OffCylinder(off));
        }
        let theta = s.x.atan2(-s.z);
        let pixel = PixelPoint::new(
            self.width_px / 2.0 + theta * self.radius_m * self.px_per_m,
            self.height_px / 2.0 - (s.y - self.eye_height_m) * self.px_per_m,
        );
        Ok(Projection {
            pixel,
            in_extent: self.extent().contains(pixel),
        })
    }

    /// Pixel hit by a ray cast from inside the cylinder, or `None` when the
    /// ray runs parallel to the axis or meets the wall outside the display
    /// and bar extent.
    pub fn raycast(
        &self,
        origin: SurfacePoint,
        dir: [f64; 3],
    ) -> Result<Option<PixelPoint>, GeometryError> {
        let o = [origin.x, origin.y, origin.z];
        if o.iter().chain(dir.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        if (norm - 1.0).abs() > UNIT_DIR_TOL {
            return Err(GeometryError::NotUnit(norm));
        }
        let r2 = self.radius_m * self.radius_m;
        let c = origin.x * origin.x + origin.z * origin.z - r2;
        if c >= 0.0 {
            return Err(GeometryError::OriginOutside);
        }
        let a = dir[0] * dir[0] + dir[2] * dir[2];
        if a <= f64::EPSILON * f64::EPSILON {
            return Ok(None);
        }
        let b = 2.0 * (origin.x * dir[0] + origin.z * dir[2]);
        // c < 0 guarantees one positive and one negative root.
        let disc = (b * b - 4.0 * a * c).sqrt();
        let q = -0.5 * (b + b.signum() * disc);
        let (t1, t2) = (q / a, c / q);
        let t = if b == 0.0 { disc / (2.0 * a) } else { t1.max(t2) };
        let hit = SurfacePoint::new(
            origin.x + t * dir[0],
            origin.y + t * dir[1],
            origin.z + t * dir[2],
        );
        // Snap the horizontal component back onto the radius to absorb
        // rounding in the quadratic solve.
        let rho = hit.x.hypot(hit.z);
        let hit = SurfacePoint::new(
            hit.x * self.radius_m / rho,
            hit.y,
            hit.z * self.radius_m / rho,
        );
        let proj = self.world_to_pixel(hit)?;
        Ok(proj.in_extent.then_some(proj.pixel))
    }
}

/// Geodesic distance on the surface, measured in pixels. The mapping is an
/// isometry, so this is the Euclidean distance in the unrolled plane.
pub fn arc_distance_px(a: PixelPoint, b: PixelPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

pub fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Hand solve: w = d * 16 / sqrt(337), d = 74 * 0.0254 m.
    const WIDTH_M: f64 = 1.638_213_379_579_302_8;
    const PX_PER_M: f64 = 4_688.033_986_129_599;

    fn display() -> CylinderDisplay {
        CylinderDisplay::default()
    }

    #[test]
    fn physical_size_matches_diagonal_solve() {
        let d = display();
        assert!((d.width_m() - WIDTH_M).abs() < 1e-12);
        assert!((d.width_m() / d.height_m() - 16.0 / 9.0).abs() < 1e-9);
        assert!((d.width_m().hypot(d.height_m()) - 74.0 * 0.0254).abs() < 1e-9);
        let ppm_h = d.height_px() / d.height_m();
        assert!((d.px_per_m() - ppm_h).abs() < 1e-6);
        assert!((d.px_per_m() - PX_PER_M).abs() < 1e-9);
    }

    #[test]
    fn center_pixel_is_straight_ahead_at_eye_height() {
        let d = display();
        let s = d.pixel_to_world(PixelPoint::new(3840.0, 2160.0)).unwrap();
        assert!(s.x.abs() < 1e-15);
        assert!((s.z + 1.0).abs() < 1e-15);
        assert!((s.y - d.eye_height_m()).abs() < 1e-15);
    }

    #[test]
    fn right_edge_azimuth() {
        let d = display();
        let theta = d.azimuth(PixelPoint::new(7680.0, 2160.0));
        assert!((theta - WIDTH_M / 2.0).abs() < 1e-12);
        assert!((theta - 0.8192).abs() < 1e-4);
    }

    #[test]
    fn vertical_mirror_symmetry() {
        let d = display();
        let up = d.pixel_to_world(PixelPoint::new(3840.0, 2160.0 - 700.0)).unwrap();
        let down = d.pixel_to_world(PixelPoint::new(3840.0, 2160.0 + 700.0)).unwrap();
        let eye = d.eye_height_m();
        assert!(((up.y - eye) + (down.y - eye)).abs() < 1e-12);
        assert_eq!(up.x, down.x);
        assert_eq!(up.z, down.z);
    }

    #[test]
    fn non_finite_pixel_rejected() {
        let d = display();
        assert_eq!(
            d.pixel_to_world(PixelPoint::new(f64::NAN, 0.0)),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn round_trip_single_point() {
        let d = display();
        let p = PixelPoint::new(1000.0, 500.0);
        let q = d.world_to_pixel(d.pixel_to_world(p).unwrap()).unwrap();
        assert!(q.in_extent);
        assert!((q.pixel.x - 1000.0).abs() < 1e-9 && (q.pixel.y - 500.0).abs() < 1e-9);
    }

    #[test]
    fn bar_strip_height_maps_below_display() {
        let d = display();
        let y = d.eye_height_m() - (d.bar_center().y - 2160.0) / d.px_per_m();
        let q = d.world_to_pixel(SurfacePoint::new(0.0, y, -1.0)).unwrap();
        assert!(q.pixel.y > 4320.0);
        assert!(d.bar_rect().contains(q.pixel));
        assert!(q.in_extent);
    }

    #[test]
    fn off_cylinder_and_out_of_range() {
        let d = display();
        assert!(matches!(
            d.world_to_pixel(SurfacePoint::new(0.0, 1.0, -0.5)),
            Err(GeometryError::OffCylinder(_))
        ));
        // Directly behind the viewer: valid surface point, outside the display.
        let q = d.world_to_pixel(SurfacePoint::new(0.0, 1.2, 1.0)).unwrap();
        assert!(!q.in_extent);
        assert!(q.pixel.x > d.width_px());
    }

    #[test]
    fn round_trip_random_points() {
        let d = display();
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let ext = d.extent();
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let p = PixelPoint::new(
                rng.random_range(ext.min_x..=ext.max_x),
                rng.random_range(ext.min_y..=ext.max_y),
            );
            let s = d.pixel_to_world(p).unwrap();
            assert!((s.x * s.x + s.z * s.z - 1.0).abs() < 1e-9);
            let q = d.world_to_pixel(s).unwrap().pixel;
            worst = worst.max((q.x - p.x).abs()).max((q.y - p.y).abs());
        }
        assert!(worst < 1e-9, "worst round trip error {worst}");
    }

    #[test]
    fn center_ray_hits_center_pixel() {
        let d = display();
        let origin = SurfacePoint::new(0.0, d.eye_height_m(), 0.0);
        let p = d.raycast(origin, [0.0, 0.0, -1.0]).unwrap().unwrap();
        assert!((p.x - 3840.0).abs() < 1e-9 && (p.y - 2160.0).abs() < 1e-9);
    }

    #[test]
    fn ray_straight_up_misses() {
        let d = display();
        let origin = SurfacePoint::new(0.0, d.eye_height_m(), 0.0);
        assert_eq!(d.raycast(origin, [0.0, 1.0, 0.0]), Ok(None));
        // Steep but not parallel: hits the wall far above the display.
        let dir = normalize([0.0, 10.0, -1.0]);
        assert_eq!(d.raycast(origin, dir), Ok(None));
    }

    #[test]
    fn raycast_rejects_bad_inputs() {
        let d = display();
        let origin = SurfacePoint::new(0.0, 1.2, 0.0);
        assert!(matches!(
            d.raycast(origin, [0.0, 0.0, -2.0]),
            Err(GeometryError::NotUnit(_))
        ));
        assert_eq!(
            d.raycast(SurfacePoint::new(0.0, 1.2, -1.5), [0.0, 0.0, -1.0]),
            Err(GeometryError::OriginOutside)
        );
    }

    #[test]
    fn arc_distances_for_ring_radii() {
        let d = display();
        let a = PixelPoint::new(3840.0, 4000.0);
        assert_eq!(arc_distance_px(a, a), 0.0);
        let short = PixelPoint::new(3840.0, 4000.0 - 0.25 * d.px_per_m());
        let large = PixelPoint::new(3840.0, 4000.0 - 0.70 * d.px_per_m());
        assert!((arc_distance_px(a, short) - 1172.0).abs() < 0.5);
        assert!((arc_distance_px(a, large) - 3281.6).abs() < 0.5);
    }

    #[test]
    fn invalid_displays_rejected() {
        let cfg = DisplayConfig {
            radius_m: 0.0,
            ..DisplayConfig::default()
        };
        assert!(cfg.build().is_err());
        let cfg = DisplayConfig {
            radius_m: 0.2,
            ..DisplayConfig::default()
        };
        assert!(matches!(cfg.build(), Err(GeometryError::InvalidDisplay(_))));
    }

    #[test]
    fn kv_block_round_trips() {
        let d = display();
        let mut kv = KvMap::parse(&d.to_kv()).unwrap();
        let mut cfg = DisplayConfig {
            radius_m: 3.0,
            ..DisplayConfig::default()
        };
        cfg.apply_kv(&mut kv).unwrap();
        kv.finish().unwrap();
        assert_eq!(cfg.build().unwrap(), d);
    }
}
