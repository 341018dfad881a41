//! Region, user and HAPS placement, and spherical-earth link geometry.
//!
//! The service region is a rectangle on a local tangent plane. Ground
//! distances are planar; elevation and slant range use a spherical earth.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band::Band;
use crate::error::{Error, Result};
use crate::rng::{substream, DOMAIN_USERS};

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Side of the default square region (115,000 km² in area).
pub const DEFAULT_REGION_SIDE_M: f64 = 339_116.0;

pub const MIN_HAPS_ALTITUDE_M: f64 = 17_000.0;
pub const MAX_HAPS_ALTITUDE_M: f64 = 25_000.0;
pub const DEFAULT_HAPS_ALTITUDE_M: f64 = 20_000.0;

/// Axis-aligned service area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for Region {
    fn default() -> Self {
        Region {
            width_m: DEFAULT_REGION_SIDE_M,
            height_m: DEFAULT_REGION_SIDE_M,
        }
    }
}

impl Region {
    pub fn new(width_m: f64, height_m: f64) -> Result<Self> {
        if !(width_m > 0.0 && width_m.is_finite()) || !(height_m > 0.0 && height_m.is_finite()) {
            return Err(Error::invalid(format!(
                "region dimensions must be positive, got {width_m} x {height_m}"
            )));
        }
        Ok(Region { width_m, height_m })
    }

    pub fn area_m2(&self) -> f64 {
        self.width_m * self.height_m
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (0.0..=self.width_m).contains(&p.x_m) && (0.0..=self.height_m).contains(&p.y_m)
    }
}

/// Planar position inside a [`Region`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub x_m: f64,
    pub y_m: f64,
}

impl GeoPoint {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        GeoPoint { x_m, y_m }
    }

    /// Tangent-plane ground distance.
    pub fn distance_to(&self, other: GeoPoint) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

/// A stratospheric platform serving one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HapsNode {
    pub position: GeoPoint,
    pub altitude_m: f64,
    pub eirp_dbm: f64,
    pub band: Band,
}

impl HapsNode {
    pub fn new(position: GeoPoint, altitude_m: f64, eirp_dbm: f64, band: Band) -> Result<Self> {
        if !(MIN_HAPS_ALTITUDE_M..=MAX_HAPS_ALTITUDE_M).contains(&altitude_m) {
            return Err(Error::invalid(format!(
                "HAPS altitude {altitude_m} m outside [{MIN_HAPS_ALTITUDE_M}, {MAX_HAPS_ALTITUDE_M}]"
            )));
        }
        if !eirp_dbm.is_finite() {
            return Err(Error::invalid("HAPS EIRP must be finite"));
        }
        Ok(HapsNode {
            position,
            altitude_m,
            eirp_dbm,
            band,
        })
    }
}

/// Draws `n` users uniformly over the region.
///
/// User `i` is drawn from its own substream, so the list is identical for a
/// given seed regardless of how many threads produce it.
pub fn sample_users(region: Region, n: usize, seed: u64) -> Vec<GeoPoint> {
    (0..n)
        .into_par_iter()
        .map(|i| sample_user(region, seed, i as u64))
        .collect()
}

/// The `index`-th user of the stream seeded by `seed`.
pub fn sample_user(region: Region, seed: u64, index: u64) -> GeoPoint {
    let mut rng = substream(seed, DOMAIN_USERS, index, 0);
    let x: f64 = rng.random();
    let y: f64 = rng.random();
    GeoPoint::new(x * region.width_m, y * region.height_m)
}

/// Ground positions for `k` HAPS.
///
/// One HAPS sits at the centre, two split the region along its longer axis,
/// and larger fleets fill a `ceil(sqrt(k))`-column grid row by row (four
/// HAPS land on the quadrant centroids).
pub fn place_haps(region: Region, k: usize) -> Result<Vec<GeoPoint>> {
    let (w, h) = (region.width_m, region.height_m);
    match k {
        0 => Err(Error::invalid("HAPS count must be at least 1")),
        1 => Ok(vec![GeoPoint::new(w / 2.0, h / 2.0)]),
        2 if w >= h => Ok(vec![
            GeoPoint::new(w / 4.0, h / 2.0),
            GeoPoint::new(3.0 * w / 4.0, h / 2.0),
        ]),
        2 => Ok(vec![
            GeoPoint::new(w / 2.0, h / 4.0),
            GeoPoint::new(w / 2.0, 3.0 * h / 4.0),
        ]),
        _ => {
            let cols = (k as f64).sqrt().ceil() as usize;
            let rows = k.div_ceil(cols);
            let (cw, ch) = (w / cols as f64, h / rows as f64);
            Ok((0..k)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    GeoPoint::new((c as f64 + 0.5) * cw, (r as f64 + 0.5) * ch)
                })
                .collect())
        }
    }
}

/// Distance from a ground terminal to a platform seen at `elevation_deg`.
pub fn slant_range(elevation_deg: f64, altitude_m: f64) -> Result<f64> {
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::invalid(format!(
            "elevation {elevation_deg} deg outside [0, 90]"
        )));
    }
    if !(altitude_m > 0.0) {
        return Err(Error::invalid(format!(
            "altitude must be positive, got {altitude_m}"
        )));
    }
    if elevation_deg == 90.0 {
        return Ok(altitude_m);
    }
    let re = EARTH_RADIUS_M;
    let s = elevation_deg.to_radians().sin();
    Ok((re * re * s * s + altitude_m * altitude_m + 2.0 * re * altitude_m).sqrt() - re * s)
}

/// Elevation angle for a ground distance `ground_m`, not clamped; negative
/// values mean the platform is below the horizon.
pub fn elevation_from_ground_distance(ground_m: f64, altitude_m: f64) -> f64 {
    let re = EARTH_RADIUS_M;
    let phi = ground_m / re;
    (phi.cos() - re / (re + altitude_m))
        .atan2(phi.sin())
        .to_degrees()
}

/// Elevation of `haps` seen from `user`, clamped to `[0, 90]`.
pub fn elevation_of(user: GeoPoint, haps: &HapsNode) -> f64 {
    let g = user.distance_to(haps.position);
    elevation_from_ground_distance(g, haps.altitude_m).clamp(0.0, 90.0)
}
