//! Elevation-dependent air-to-ground channel.
//!
//! Each user-HAPS link draws a LoS state, then adds free-space loss, log-normal
//! shadowing, NLoS clutter loss and clear-sky atmospheric loss. Tables are
//! indexed by elevation in 10 degree steps from 10 to 90 degrees.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elevation nodes of every channel table, in degrees.
pub const TABLE_ELEVATIONS_DEG: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelScenario {
    DenseUrban,
    Urban,
    SuburbanRural,
}

impl ChannelScenario {
    pub const ALL: [ChannelScenario; 3] = [
        ChannelScenario::DenseUrban,
        ChannelScenario::Urban,
        ChannelScenario::SuburbanRural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelScenario::DenseUrban => "dense-urban",
            ChannelScenario::Urban => "urban",
            ChannelScenario::SuburbanRural => "suburban-rural",
        }
    }
}

impl fmt::Display for ChannelScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelScenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ChannelScenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                format!("unknown scenario `{s}` (expected dense-urban, urban or suburban-rural)")
            })
    }
}

/// Channel parameters for one scenario in one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// LoS probability at 10, 20, ..., 90 degrees.
    pub los_prob_table: Vec<f64>,
    pub shadow_sigma_los_db: f64,
    pub shadow_sigma_nlos_db: f64,
    /// NLoS clutter loss at 10, 20, ..., 90 degrees.
    pub clutter_loss_table: Vec<f64>,
    pub zenith_atmos_db: f64,
    /// Links below this elevation are evaluated at it.
    pub min_elevation_deg: f64,
}

impl ChannelProfile {
    /// Checks every table invariant. Field names in errors are relative to
    /// the profile.
    pub fn validate(&self) -> Result<()> {
        check_table_len("los_prob_table", &self.los_prob_table)?;
        check_table_len("clutter_loss_table", &self.clutter_loss_table)?;
        for (i, p) in self.los_prob_table.iter().enumerate() {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::config(
                    format!("los_prob_table[{i}]"),
                    format!("probability {p} outside [0, 1]"),
                ));
            }
        }
        if let Some(i) = first_violation(&self.los_prob_table, |a, b| b >= a) {
            return Err(Error::config(
                format!("los_prob_table[{i}]"),
                "LoS probability must be non-decreasing in elevation",
            ));
        }
        for (i, c) in self.clutter_loss_table.iter().enumerate() {
            if !(*c >= 0.0 && c.is_finite()) {
                return Err(Error::config(
                    format!("clutter_loss_table[{i}]"),
                    format!("loss {c} must be finite and >= 0"),
                ));
            }
        }
        if let Some(i) = first_violation(&self.clutter_loss_table, |a, b| b <= a) {
            return Err(Error::config(
                format!("clutter_loss_table[{i}]"),
                "clutter loss must be non-increasing in elevation",
            ));
        }
        for (name, v) in [
            ("shadow_sigma_los_db", self.shadow_sigma_los_db),
            ("shadow_sigma_nlos_db", self.shadow_sigma_nlos_db),
            ("zenith_atmos_db", self.zenith_atmos_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("{v} must be finite and >= 0")));
            }
        }
        if !(self.min_elevation_deg > 0.0 && self.min_elevation_deg <= 90.0) {
            return Err(Error::config(
                "min_elevation_deg",
                format!("{} outside (0, 90]", self.min_elevation_deg),
            ));
        }
        Ok(())
    }

    pub fn shadow_sigma_db(&self, is_los: bool) -> f64 {
        if is_los {
            self.shadow_sigma_los_db
        } else {
            self.shadow_sigma_nlos_db
        }
    }
}

fn check_table_len(name: &str, table: &[f64]) -> Result<()> {
    if table.len() != TABLE_ELEVATIONS_DEG.len() {
        return Err(Error::config(
            name,
            format!(
                "expected {} entries for 10..90 deg, found {}",
                TABLE_ELEVATIONS_DEG.len(),
                table.len()
            ),
        ));
    }
    Ok(())
}

fn first_violation(table: &[f64], ok: impl Fn(f64, f64) -> bool) -> Option<usize> {
    table
        .windows(2)
        .position(|w| !ok(w[0], w[1]))
        .map(|i| i + 1)
}

/// Piecewise-linear lookup over the 10-degree nodes, flat below 10 degrees.
fn interpolate(name: &str, table: &[f64], elevation_deg: f64) -> Result<f64> {
    check_table_len(name, table)?;
    check_elevation(elevation_deg)?;
    let first = TABLE_ELEVATIONS_DEG[0];
    if elevation_deg <= first {
        return Ok(table[0]);
    }
    let pos = (elevation_deg - first) / 10.0;
    let lo = (pos.floor() as usize).min(table.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 == table.len() {
        return Ok(table[lo]);
    }
    Ok(table[lo] + frac * (table[lo + 1] - table[lo]))
}

fn check_elevation(elevation_deg: f64) -> Result<()> {
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::invalid(format!(
            "elevation {elevation_deg} deg outside [0, 90]"
        )));
    }
    Ok(())
}

pub fn los_probability(profile: &ChannelProfile, elevation_deg: f64) -> Result<f64> {
    interpolate("los_prob_table", &profile.los_prob_table, elevation_deg)
}

/// Bernoulli draw; consumes exactly one uniform from `rng`.
pub fn sample_los<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let u: f64 = rng.random();
    Ok(u < p)
}

/// Free-space path loss in dB.
pub fn fspl(freq_ghz: f64, dist_m: f64) -> Result<f64> {
    if !(freq_ghz > 0.0) || !(dist_m > 0.0) {
        return Err(Error::invalid(format!(
            "FSPL needs positive frequency and distance, got {freq_ghz} GHz, {dist_m} m"
        )));
    }
    Ok(32.45 + 20.0 * freq_ghz.log10() + 20.0 * dist_m.log10())
}

pub fn clutter_loss(profile: &ChannelProfile, elevation_deg: f64, is_los: bool) -> Result<f64> {
    if is_los {
        check_elevation(elevation_deg)?;
        return Ok(0.0);
    }
    interpolate(
        "clutter_loss_table",
        &profile.clutter_loss_table,
        elevation_deg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphericLoss {
    pub loss_db: f64,
    /// Set when the elevation was raised to the minimum elevation.
    pub clamped: bool,
}

/// Clear-sky gaseous loss scaled by the air-mass factor `1 / sin(elevation)`.
pub fn atmospheric_loss(
    zenith_atmos_db: f64,
    elevation_deg: f64,
    min_elevation_deg: f64,
) -> AtmosphericLoss {
    let clamped = elevation_deg < min_elevation_deg;
    let e = if clamped {
        min_elevation_deg
    } else {
        elevation_deg
    };
    AtmosphericLoss {
        loss_db: zenith_atmos_db / e.to_radians().sin(),
        clamped,
    }
}

/// Zero-mean Gaussian shadowing in dB.
pub fn sample_shadow<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma_db * z
}

/// One realisation of the channel on a single link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkDraw {
    pub is_los: bool,
    pub fspl_db: f64,
    pub shadow_db: f64,
    pub clutter_db: f64,
    pub atmos_db: f64,
    pub total_pl_db: f64,
    /// The link elevation was below the profile minimum.
    pub low_elevation: bool,
}

/// Draws LoS state and shadowing, and sums all loss terms.
///
/// `elevation_deg` is the geometric elevation; the tables and the
/// atmospheric term see it raised to `profile.min_elevation_deg`, while
/// `dist_m` is used as given.
pub fn total_path_loss<R: Rng + ?Sized>(
    profile: &ChannelProfile,
    freq_ghz: f64,
    elevation_deg: f64,
    dist_m: f64,
    rng: &mut R,
) -> Result<LinkDraw> {
    check_elevation(elevation_deg)?;
    let fspl_db = fspl(freq_ghz, dist_m)?;
    let atmos = atmospheric_loss(
        profile.zenith_atmos_db,
        elevation_deg,
        profile.min_elevation_deg,
    );
    let table_elev = elevation_deg.max(profile.min_elevation_deg);
    let is_los = sample_los(los_probability(profile, table_elev)?, rng)?;
    let shadow_db = sample_shadow(profile.shadow_sigma_db(is_los), rng);
    let clutter_db = clutter_loss(profile, table_elev, is_los)?;
    Ok(LinkDraw {
        is_los,
        fspl_db,
        shadow_db,
        clutter_db,
        atmos_db: atmos.loss_db,
        total_pl_db: fspl_db + shadow_db + clutter_db + atmos.loss_db,
        low_elevation: atmos.clamped,
    })
}
