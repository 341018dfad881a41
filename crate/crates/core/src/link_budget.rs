//! Terminal models and downlink budget arithmetic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::band::Band;
use crate::error::{Error, Result};

/// Speed of light used by the aperture gain formula, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 2.998e8;

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// A ground receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalModel {
    pub band: Band,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub sensitivity_dbm: f64,
    /// Dish diameter; present for VSAT terminals only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dish_diameter_m: Option<f64>,
}

impl TerminalModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::config("bandwidth_hz", "must be > 0"));
        }
        if !(self.sensitivity_dbm < 0.0) {
            return Err(Error::config("sensitivity_dbm", "must be < 0 dBm"));
        }
        if !self.rx_gain_dbi.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(Error::config(
                "rx_gain_dbi",
                "gain and noise figure must be finite",
            ));
        }
        match (self.band, self.dish_diameter_m) {
            (Band::Ka, Some(d)) if d > 0.0 => Ok(()),
            (Band::Ka, _) => Err(Error::config(
                "dish_diameter_m",
                "Ka-band terminal needs a dish diameter > 0",
            )),
            (Band::S, _) => Ok(()),
        }
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power(self.bandwidth_hz, self.noise_figure_db)
    }
}

/// Per-user outcome of the coverage experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudgetResult {
    pub p_rx_dbm: f64,
    pub snr_db: f64,
    pub meets_sensitivity: bool,
    pub serving_haps: usize,
    pub elevation_deg: f64,
    pub is_los: bool,
}

/// Gain of a circular parabolic aperture.
pub fn dish_gain(diameter_m: f64, freq_ghz: f64, efficiency: f64) -> Result<f64> {
    if !(diameter_m > 0.0 && freq_ghz > 0.0 && efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::invalid(format!(
            "dish gain needs positive diameter/frequency and efficiency in (0, 1], \
             got {diameter_m} m, {freq_ghz} GHz, {efficiency}"
        )));
    }
    let ratio = PI * diameter_m * freq_ghz * 1e9 / SPEED_OF_LIGHT_M_S;
    Ok(10.0 * (efficiency * ratio * ratio).log10())
}

pub fn received_power(eirp_dbm: f64, rx_gain_dbi: f64, total_pl_db: f64) -> f64 {
    eirp_dbm + rx_gain_dbi - total_pl_db
}

pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

pub fn snr(p_rx_dbm: f64, noise_dbm: f64) -> f64 {
    p_rx_dbm - noise_dbm
}

pub fn meets_sensitivity(p_rx_dbm: f64, sensitivity_dbm: f64) -> bool {
    p_rx_dbm >= sensitivity_dbm
}
