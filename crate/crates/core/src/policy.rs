//! Per-site decision rules.
//!
//! Methodology 1 (pre-disaster) sleeps lightly loaded sites and offloads
//! congestion to the HAPS. Methodology 2 (in-disaster) keeps users connected
//! through the HAPS while protecting the site battery, and falls back to
//! local energy, EVs, generators and satellite in that order. A baseline
//! rule set models a legacy site with no HAPS integration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snapshot of a ground base station as seen by the policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbsStatus {
    pub radio_on: bool,
    pub grid_ok: bool,
    pub backbone_ok: bool,
    pub haps_available: bool,
    pub satellite_available: bool,
    /// Offered traffic as a fraction of site capacity, up to 1.5.
    pub load: f64,
    pub soc: f64,
    pub reserve_soc: f64,
    pub generator_fuel_h: f64,
    pub ev_inbound: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    ServeNormally,
    SleepOffloadHaps,
    OffloadNewArrivals,
    Wake,
    RadioOffServeViaHaps,
    RunOnBess,
    RunOnGenerator,
    RequestEv,
    HapsBackhaul,
    SatelliteFallback,
    Outage,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::ServeNormally => "SERVE_NORMALLY",
            Action::SleepOffloadHaps => "SLEEP_OFFLOAD_HAPS",
            Action::OffloadNewArrivals => "OFFLOAD_NEW_ARRIVALS",
            Action::Wake => "WAKE",
            Action::RadioOffServeViaHaps => "RADIO_OFF_SERVE_VIA_HAPS",
            Action::RunOnBess => "RUN_ON_BESS",
            Action::RunOnGenerator => "RUN_ON_GENERATOR",
            Action::RequestEv => "REQUEST_EV",
            Action::HapsBackhaul => "HAPS_BACKHAUL",
            Action::SatelliteFallback => "SATELLITE_FALLBACK",
            Action::Outage => "OUTAGE",
        }
    }

    /// Whether the site radio transmits while this action is in force.
    pub fn radio_on(self) -> bool {
        matches!(
            self,
            Action::ServeNormally
                | Action::OffloadNewArrivals
                | Action::Wake
                | Action::RunOnBess
                | Action::RunOnGenerator
                | Action::HapsBackhaul
        )
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Energy routing attached to a decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Directives {
    pub request_ev: bool,
    pub run_generator: bool,
    pub charge_bess_from_res: bool,
    /// Battery must neither charge nor discharge.
    pub preserve_bess: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolicyAction {
    pub action: Action,
    pub directives: Directives,
}

impl PolicyAction {
    fn new(action: Action) -> Self {
        PolicyAction {
            action,
            directives: Directives::default(),
        }
    }

    fn charging(mut self) -> Self {
        self.directives.charge_bess_from_res = true;
        self
    }
}

/// Traffic thresholds for the pre-disaster methodology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub rho_low: f64,
    pub rho_wake: f64,
    pub rho_high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rho_low: 0.1,
            rho_wake: 0.2,
            rho_high: 0.9,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_low >= 0.0 && self.rho_low < self.rho_wake && self.rho_wake <= self.rho_high)
        {
            return Err(Error::config(
                "rho_low",
                format!(
                    "thresholds must satisfy 0 <= rho_low < rho_wake <= rho_high, got ({}, {}, {})",
                    self.rho_low, self.rho_wake, self.rho_high
                ),
            ));
        }
        Ok(())
    }
}

/// Methodology 1. Requires grid power.
///
/// A sleeping site (radio off) stays asleep until its load reaches
/// `rho_wake` or the HAPS goes away, so a constant load never causes a
/// sleep/wake oscillation.
pub fn decide_predisaster(s: &GbsStatus, thresholds: &Thresholds) -> Result<PolicyAction> {
    thresholds.validate()?;
    if !s.grid_ok {
        return Err(Error::invalid(
            "pre-disaster policy evaluated on a site without grid power",
        ));
    }
    let action = if !s.radio_on {
        if s.haps_available && s.load < thresholds.rho_wake {
            Action::SleepOffloadHaps
        } else {
            Action::Wake
        }
    } else if s.haps_available && s.load < thresholds.rho_low {
        Action::SleepOffloadHaps
    } else if s.haps_available && s.load > thresholds.rho_high {
        Action::OffloadNewArrivals
    } else {
        Action::ServeNormally
    };
    let mut decision = PolicyAction::new(action);
    decision.directives.charge_bess_from_res = s.soc < 1.0;
    Ok(decision)
}

/// Methodology 2, evaluated in priority order.
pub fn decide_indisaster(s: &GbsStatus) -> PolicyAction {
    if s.grid_ok && s.backbone_ok {
        return PolicyAction::new(Action::ServeNormally).charging();
    }
    if s.grid_ok && s.haps_available {
        return PolicyAction::new(Action::HapsBackhaul).charging();
    }
    if !s.grid_ok && s.haps_available {
        let mut d = PolicyAction::new(Action::RadioOffServeViaHaps);
        d.directives.preserve_bess = true;
        return d;
    }
    if !s.grid_ok {
        if s.soc > s.reserve_soc {
            return PolicyAction::new(Action::RunOnBess);
        }
        let has_fuel = s.generator_fuel_h > 0.0;
        if !s.ev_inbound {
            let mut d = PolicyAction::new(if has_fuel {
                Action::RunOnGenerator
            } else {
                Action::RequestEv
            });
            d.directives.request_ev = true;
            d.directives.run_generator = has_fuel;
            return d;
        }
        if has_fuel {
            // EV already on its way: bridge with the generator.
            let mut d = PolicyAction::new(Action::RunOnGenerator);
            d.directives.run_generator = true;
            return d;
        }
    }
    if s.satellite_available {
        PolicyAction::new(Action::SatelliteFallback)
    } else {
        PolicyAction::new(Action::Outage)
    }
}

/// Legacy site without HAPS integration: grid, then battery to empty, then
/// generator.
pub fn decide_baseline(s: &GbsStatus) -> PolicyAction {
    if !s.backbone_ok {
        return PolicyAction::new(Action::Outage);
    }
    if s.grid_ok {
        return PolicyAction::new(Action::ServeNormally).charging();
    }
    if s.soc > 0.0 {
        return PolicyAction::new(Action::RunOnBess);
    }
    if s.generator_fuel_h > 0.0 {
        let mut d = PolicyAction::new(Action::RunOnGenerator);
        d.directives.run_generator = true;
        return d;
    }
    PolicyAction::new(Action::Outage)
}
