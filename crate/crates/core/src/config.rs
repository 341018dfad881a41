//! Run configuration: the shipped defaults, override merging and validation.
//!
//! A configuration file is a JSON document holding any subset of the
//! default document; objects merge key by key, everything else replaces
//! the default value. Validation errors carry the dotted path of the
//! offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::band::Band;
use crate::channel::{ChannelProfile, ChannelScenario};
use crate::coverage::CoverageConfig;
use crate::disaster::{
    partition_users, HapsUnit, Methodology, ScenarioEvent, SiteSpec, TimelineConfig,
};
use crate::energy::{BessState, EvDispatch, GeneratorState, ResProfile, SiteLoad};
use crate::error::{Error, Result};
use crate::geometry::{Region, MAX_HAPS_ALTITUDE_M, MIN_HAPS_ALTITUDE_M};
use crate::link_budget::{dish_gain, TerminalModel};
use crate::policy::Thresholds;

/// The shipped default configuration document.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");

/// Environment variable naming the configuration file used when `--config`
/// is not given.
pub const CONFIG_ENV_VAR: &str = "HAPSNET_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub bands: PerBand<BandConfig>,
    pub channel: ChannelConfig,
    pub terminals: PerBand<TerminalConfig>,
    pub coverage: CoverageSection,
    pub energy: EnergyConfig,
    pub policy: PolicyConfig,
    pub network: NetworkConfig,
    pub predisaster: TimelineSection,
    pub disaster: TimelineSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub region: Region,
    pub haps_altitude_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerBand<T> {
    pub s: T,
    pub ka: T,
}

impl<T> PerBand<T> {
    pub fn get(&self, band: Band) -> &T {
        match band {
            Band::S => &self.s,
            Band::Ka => &self.ka,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub freq_ghz: f64,
    pub eirp_dbm: f64,
    pub zenith_atmos_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub min_elevation_deg: f64,
    pub scenarios: ScenarioTables,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTables {
    #[serde(rename = "dense-urban")]
    pub dense_urban: ScenarioChannel,
    pub urban: ScenarioChannel,
    #[serde(rename = "suburban-rural")]
    pub suburban_rural: ScenarioChannel,
}

impl ScenarioTables {
    pub fn get(&self, scenario: ChannelScenario) -> &ScenarioChannel {
        match scenario {
            ChannelScenario::DenseUrban => &self.dense_urban,
            ChannelScenario::Urban => &self.urban,
            ChannelScenario::SuburbanRural => &self.suburban_rural,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioChannel {
    pub los_prob_table: Vec<f64>,
    pub s: BandChannel,
    pub ka: BandChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandChannel {
    pub shadow_sigma_los_db: f64,
    pub shadow_sigma_nlos_db: f64,
    pub clutter_loss_table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalConfig {
    /// Fixed antenna gain; when absent the gain follows from the dish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_gain_dbi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dish_diameter_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dish_efficiency: Option<f64>,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub sensitivity_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSection {
    pub haps_count: usize,
    pub band: Band,
    pub scenario: ChannelScenario,
    pub n_users: usize,
    pub keep_per_user: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub site_load: SiteLoad,
    pub bess: BessState,
    pub generator: GeneratorState,
    pub res: ResProfile,
    pub ev: EvDispatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub thresholds: Thresholds,
    pub satellite_user_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub sites: usize,
    pub total_users: u64,
    pub haps_capacity_users: u64,
    pub traffic_profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub methodology: Methodology,
    pub horizon_h: f64,
    pub dt_h: f64,
    pub start_hour: f64,
    pub haps_count: usize,
    pub haps_initially_available: bool,
    pub satellite_available: bool,
    pub events: Vec<ScenarioEvent>,
}

/// Which timeline section of the document to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimelineKind {
    PreDisaster,
    Disaster,
}

impl TimelineKind {
    fn key(self) -> &'static str {
        match self {
            TimelineKind::PreDisaster => "predisaster",
            TimelineKind::Disaster => "disaster",
        }
    }
}

/// Everything `run_timeline` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineSetup {
    pub name: Option<String>,
    pub config: TimelineConfig,
    pub sites: Vec<SiteSpec>,
    pub haps: Vec<HapsUnit>,
    pub events: Vec<ScenarioEvent>,
}

/// Deep-merges `overrides` into `base`.
fn merge(base: &mut Value, overrides: Value) {
    match (base, overrides) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn prefixed(prefix: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Config { field, message } => Error::config(format!("{prefix}.{field}"), message),
        other => other,
    })
}

fn check(ok: bool, field: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, message))
    }
}

impl RunConfig {
    /// The shipped defaults.
    pub fn defaults() -> Self {
        Self::from_json_str(DEFAULT_CONFIG_JSON).expect("shipped default configuration is valid")
    }

    /// Parses an override document, merges it onto the defaults and
    /// validates the result.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let overrides: Value = if text.trim().is_empty() {
            Value::Object(Default::default())
        } else {
            serde_json::from_str(text)
                .map_err(|e| Error::config("<document>", format!("JSON parse error: {e}")))?
        };
        if !overrides.is_object() {
            return Err(Error::config(
                "<document>",
                "configuration must be a JSON object",
            ));
        }
        let mut doc: Value = serde_json::from_str(DEFAULT_CONFIG_JSON)
            .map_err(|e| Error::config("<defaults>", e.to_string()))?;
        merge(&mut doc, overrides);
        let config: RunConfig = serde_path_to_error::deserialize(doc)
            .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        prefixed(
            "geometry.region",
            Region::new(self.geometry.region.width_m, self.geometry.region.height_m)
                .map(|_| ())
                .map_err(|e| Error::config("width_m", e.to_string())),
        )?;
        check(
            (MIN_HAPS_ALTITUDE_M..=MAX_HAPS_ALTITUDE_M).contains(&self.geometry.haps_altitude_m),
            "geometry.haps_altitude_m",
            format!("must be in [{MIN_HAPS_ALTITUDE_M}, {MAX_HAPS_ALTITUDE_M}]"),
        )?;
        for band in [Band::S, Band::Ka] {
            let b = self.bands.get(band);
            let p = format!("bands.{band}");
            check(b.freq_ghz > 0.0, &format!("{p}.freq_ghz"), "must be > 0")?;
            check(
                b.eirp_dbm.is_finite(),
                &format!("{p}.eirp_dbm"),
                "must be finite",
            )?;
            for scenario in ChannelScenario::ALL {
                self.channel_profile(scenario, band)?
                    .validate()
                    .map_err(|e| profile_field(e, scenario, band))?;
            }
            prefixed(
                &format!("terminals.{band}"),
                self.terminal(band).and_then(|t| t.validate()),
            )?;
        }
        check(
            self.coverage.n_users >= 1,
            "coverage.n_users",
            "must be >= 1",
        )?;
        check(
            self.coverage.haps_count >= 1,
            "coverage.haps_count",
            "must be >= 1",
        )?;
        prefixed("energy.site_load", self.energy.site_load.validate())?;
        prefixed("energy.bess", self.energy.bess.validate())?;
        prefixed("energy.generator", self.energy.generator.validate())?;
        prefixed("energy.res", self.energy.res.validate())?;
        prefixed("energy.ev", self.energy.ev.validate())?;
        prefixed("policy.thresholds", self.policy.thresholds.validate())?;
        check(
            (0.0..=1.0).contains(&self.policy.satellite_user_fraction),
            "policy.satellite_user_fraction",
            "must be in [0, 1]",
        )?;
        check(self.network.sites >= 1, "network.sites", "must be >= 1")?;
        for kind in [TimelineKind::PreDisaster, TimelineKind::Disaster] {
            let setup = self.timeline_setup_unchecked(kind);
            prefixed(kind.key(), setup.config.validate()).map_err(|e| match e {
                Error::Config { field, message } if field.contains("traffic_profile") => {
                    Error::config(
                        field.replace(&format!("{}.", kind.key()), "network."),
                        message,
                    )
                }
                other => other,
            })?;
            self.check_events(kind)?;
        }
        Ok(())
    }

    fn check_events(&self, kind: TimelineKind) -> Result<()> {
        let section = self.section(kind);
        let key = kind.key();
        let mut prev = 0.0;
        for (i, e) in section.events.iter().enumerate() {
            let field = format!("{key}.events[{i}]");
            check(e.time_h >= 0.0, &format!("{field}.time_h"), "must be >= 0")?;
            check(
                e.time_h >= prev,
                &format!("{field}.time_h"),
                "events must be sorted by time",
            )?;
            prev = e.time_h;
            use crate::disaster::EventKind::*;
            let (sites, haps) = match &e.kind {
                BsFailFraction { fraction } => {
                    check(
                        (0.0..=1.0).contains(fraction),
                        &format!("{field}.fraction"),
                        "must be in [0, 1]",
                    )?;
                    (None, None)
                }
                GridOutage { sites } | GridRestore { sites } | BackboneCut { sites } => {
                    (sites.as_ref(), None)
                }
                FuelDelivery { sites, hours } => {
                    check(*hours >= 0.0, &format!("{field}.hours"), "must be >= 0")?;
                    (sites.as_ref(), None)
                }
                HapsUp { haps } | HapsDown { haps } => (None, haps.as_ref()),
                SatUp => (None, None),
            };
            if let Some(bad) = sites.and_then(|s| s.iter().find(|i| **i >= self.network.sites)) {
                return Err(Error::config(
                    format!("{field}.sites"),
                    format!("unknown site id {bad}"),
                ));
            }
            if let Some(bad) = haps.and_then(|h| h.iter().find(|i| **i >= section.haps_count)) {
                return Err(Error::config(
                    format!("{field}.haps"),
                    format!("unknown HAPS id {bad}"),
                ));
            }
        }
        Ok(())
    }

    fn section(&self, kind: TimelineKind) -> &TimelineSection {
        match kind {
            TimelineKind::PreDisaster => &self.predisaster,
            TimelineKind::Disaster => &self.disaster,
        }
    }

    pub fn section_mut(&mut self, kind: TimelineKind) -> &mut TimelineSection {
        match kind {
            TimelineKind::PreDisaster => &mut self.predisaster,
            TimelineKind::Disaster => &mut self.disaster,
        }
    }

    /// Channel profile for one scenario and band.
    pub fn channel_profile(&self, scenario: ChannelScenario, band: Band) -> Result<ChannelProfile> {
        let sc = self.channel.scenarios.get(scenario);
        let bc = sc.get_band(band);
        Ok(ChannelProfile {
            los_prob_table: sc.los_prob_table.clone(),
            shadow_sigma_los_db: bc.shadow_sigma_los_db,
            shadow_sigma_nlos_db: bc.shadow_sigma_nlos_db,
            clutter_loss_table: bc.clutter_loss_table.clone(),
            zenith_atmos_db: self.bands.get(band).zenith_atmos_db,
            min_elevation_deg: self.channel.min_elevation_deg,
        })
    }

    /// Terminal served in `band`, with the dish gain resolved.
    pub fn terminal(&self, band: Band) -> Result<TerminalModel> {
        let t = self.terminals.get(band);
        let rx_gain_dbi = match (t.rx_gain_dbi, t.dish_diameter_m) {
            (Some(g), _) => g,
            (None, Some(d)) => dish_gain(
                d,
                self.bands.get(band).freq_ghz,
                t.dish_efficiency.unwrap_or(0.6),
            )
            .map_err(|e| Error::config("dish_diameter_m", e.to_string()))?,
            (None, None) => {
                return Err(Error::config(
                    "rx_gain_dbi",
                    "need either rx_gain_dbi or dish_diameter_m",
                ))
            }
        };
        Ok(TerminalModel {
            band,
            rx_gain_dbi,
            noise_figure_db: t.noise_figure_db,
            bandwidth_hz: t.bandwidth_hz,
            sensitivity_dbm: t.sensitivity_dbm,
            dish_diameter_m: t.dish_diameter_m,
        })
    }

    pub fn coverage_config(&self) -> Result<CoverageConfig> {
        let c = &self.coverage;
        let band = self.bands.get(c.band);
        let config = CoverageConfig {
            region: self.geometry.region,
            haps_count: c.haps_count,
            haps_altitude_m: self.geometry.haps_altitude_m,
            band: c.band,
            freq_ghz: band.freq_ghz,
            eirp_dbm: band.eirp_dbm,
            scenario: c.scenario,
            profile: self.channel_profile(c.scenario, c.band)?,
            n_users: c.n_users,
            seed: self.seed,
            terminal: self.terminal(c.band)?,
            keep_per_user: c.keep_per_user,
        };
        config.validate()?;
        Ok(config)
    }

    fn timeline_setup_unchecked(&self, kind: TimelineKind) -> TimelineSetup {
        let section = self.section(kind);
        let e = &self.energy;
        let sites = partition_users(self.network.total_users, self.network.sites)
            .into_iter()
            .map(|users| SiteSpec {
                users,
                bess: e.bess,
                generator: e.generator,
                res: e.res,
                traffic_scale: 1.0,
            })
            .collect();
        let haps = (0..section.haps_count)
            .map(|_| HapsUnit {
                capacity_users: self.network.haps_capacity_users,
                available: section.haps_initially_available,
            })
            .collect();
        TimelineSetup {
            name: section.name.clone(),
            config: TimelineConfig {
                methodology: section.methodology,
                horizon_h: section.horizon_h,
                dt_h: section.dt_h,
                start_hour: section.start_hour,
                seed: self.seed,
                thresholds: self.policy.thresholds,
                site_load: e.site_load,
                ev: e.ev,
                satellite_user_fraction: self.policy.satellite_user_fraction,
                satellite_available: section.satellite_available,
                traffic_profile: self.network.traffic_profile.clone(),
            },
            sites,
            haps,
            events: section.events.clone(),
        }
    }

    pub fn timeline_setup(&self, kind: TimelineKind) -> Result<TimelineSetup> {
        let setup = self.timeline_setup_unchecked(kind);
        prefixed(kind.key(), setup.config.validate())?;
        self.check_events(kind)?;
        Ok(setup)
    }
}

impl ScenarioChannel {
    fn get_band(&self, band: Band) -> &BandChannel {
        match band {
            Band::S => &self.s,
            Band::Ka => &self.ka,
        }
    }
}

/// Maps a profile-relative field onto its location in the document.
fn profile_field(e: Error, scenario: ChannelScenario, band: Band) -> Error {
    match e {
        Error::Config { field, message } => {
            let path = if field.starts_with("los_prob_table") {
                format!("channel.scenarios.{scenario}.{field}")
            } else if field == "zenith_atmos_db" {
                format!("bands.{band}.{field}")
            } else if field == "min_elevation_deg" {
                format!("channel.{field}")
            } else {
                format!("channel.scenarios.{scenario}.{band}.{field}")
            };
            Error::config(path, message)
        }
        other => other,
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<document>", format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json_str(&text)
}
