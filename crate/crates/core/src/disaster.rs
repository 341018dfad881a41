//! Discrete-time disaster scenario engine.
//!
//! Each tick applies the scenario events that have come due, lets every live
//! site pick an action, dispatches site energy, and assigns users to a
//! bearer (ground site, HAPS RAN, HAPS backhaul or satellite). HAPS RAN and
//! satellite capacity are shared budgets handed out in site-index order.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::energy::{
    dispatch_ev, dispatch_site, res_energy, BessState, ChargeSchedule, DispatchRequest,
    EnergyLedger, EvDispatch, GeneratorState, ResProfile, SiteLoad,
};
use crate::error::{Error, Result};
use crate::policy::{
    decide_baseline, decide_indisaster, decide_predisaster, Action, GbsStatus, PolicyAction,
    Thresholds,
};
use crate::rng::{substream, DOMAIN_SITES};

/// Slack when comparing event times against tick times.
const TIME_EPS: f64 = 1e-9;

/// Which decision rules live sites follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Methodology {
    /// Legacy behaviour; HAPS and satellite are never used.
    None,
    PreDisaster,
    InDisaster,
}

impl Methodology {
    pub fn as_str(self) -> &'static str {
        match self {
            Methodology::None => "none",
            Methodology::PreDisaster => "pre-disaster",
            Methodology::InDisaster => "in-disaster",
        }
    }

    fn uses_haps(self) -> bool {
        !matches!(self, Methodology::None)
    }
}

impl fmt::Display for Methodology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Methodology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Methodology::None),
            "pre-disaster" => Ok(Methodology::PreDisaster),
            "in-disaster" => Ok(Methodology::InDisaster),
            other => Err(format!(
                "unknown methodology `{other}` (expected none, pre-disaster or in-disaster)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// Permanently disables sites until `fraction` of all sites are down.
    BsFailFraction {
        fraction: f64,
    },
    /// `sites: null` (or omitted) means every site.
    GridOutage {
        #[serde(default)]
        sites: Option<Vec<usize>>,
    },
    GridRestore {
        #[serde(default)]
        sites: Option<Vec<usize>>,
    },
    BackboneCut {
        #[serde(default)]
        sites: Option<Vec<usize>>,
    },
    FuelDelivery {
        #[serde(default)]
        sites: Option<Vec<usize>>,
        hours: f64,
    },
    HapsUp {
        #[serde(default)]
        haps: Option<Vec<usize>>,
    },
    HapsDown {
        #[serde(default)]
        haps: Option<Vec<usize>>,
    },
    SatUp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub time_h: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl ScenarioEvent {
    pub fn new(time_h: f64, kind: EventKind) -> Self {
        ScenarioEvent { time_h, kind }
    }
}

/// Static description of one ground site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSpec {
    pub users: u64,
    pub bess: BessState,
    pub generator: GeneratorState,
    pub res: ResProfile,
    pub traffic_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HapsUnit {
    pub capacity_users: u64,
    pub available: bool,
}

/// Engine parameters shared by every site.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineConfig {
    pub methodology: Methodology,
    pub horizon_h: f64,
    pub dt_h: f64,
    /// Local clock hour at t = 0.
    pub start_hour: f64,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub site_load: SiteLoad,
    pub ev: EvDispatch,
    /// Share of all users the satellite bearer can carry at once.
    pub satellite_user_fraction: f64,
    pub satellite_available: bool,
    /// Offered load per local hour, as a fraction of site capacity.
    pub traffic_profile: Vec<f64>,
}

impl TimelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_h > 0.0 && self.dt_h.is_finite()) {
            return Err(Error::config("dt_h", "must be > 0"));
        }
        if !(self.horizon_h >= self.dt_h && self.horizon_h.is_finite()) {
            return Err(Error::config("horizon_h", "must be >= dt_h"));
        }
        if !(0.0..24.0).contains(&self.start_hour) {
            return Err(Error::config("start_hour", "must be in [0, 24)"));
        }
        if !(0.0..=1.0).contains(&self.satellite_user_fraction) {
            return Err(Error::config(
                "satellite_user_fraction",
                "must be in [0, 1]",
            ));
        }
        if self.traffic_profile.len() != 24 {
            return Err(Error::config("traffic_profile", "needs 24 hourly values"));
        }
        if let Some(i) = self
            .traffic_profile
            .iter()
            .position(|v| !(0.0..=1.5).contains(v))
        {
            return Err(Error::config(
                format!("traffic_profile[{i}]"),
                "load must be in [0, 1.5]",
            ));
        }
        self.thresholds.validate()?;
        self.site_load.validate()?;
        self.ev.validate()
    }

    pub fn n_ticks(&self) -> usize {
        (self.horizon_h / self.dt_h).round() as usize
    }
}

#[derive(Debug, Clone)]
struct SiteState {
    spec: SiteSpec,
    failed: bool,
    grid_ok: bool,
    backbone_ok: bool,
    radio_on: bool,
    bess: BessState,
    generator: GeneratorState,
    ev: Option<ChargeSchedule>,
}

/// Mutable world state the events act on.
#[derive(Debug, Clone)]
pub struct SimState {
    sites: Vec<SiteState>,
    haps: Vec<HapsUnit>,
    satellite_available: bool,
    failure_order: Vec<usize>,
    failed_count: usize,
}

impl SimState {
    pub fn new(sites: Vec<SiteSpec>, haps: Vec<HapsUnit>, config: &TimelineConfig) -> Self {
        let mut failure_order: Vec<usize> = (0..sites.len()).collect();
        failure_order.shuffle(&mut substream(config.seed, DOMAIN_SITES, 0, 0));
        SimState {
            sites: sites
                .into_iter()
                .map(|spec| SiteState {
                    failed: false,
                    grid_ok: true,
                    backbone_ok: true,
                    radio_on: true,
                    bess: spec.bess,
                    generator: spec.generator,
                    ev: None,
                    spec,
                })
                .collect(),
            haps,
            satellite_available: config.satellite_available,
            failure_order,
            failed_count: 0,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn failed_sites(&self) -> usize {
        self.sites.iter().filter(|s| s.failed).count()
    }

    pub fn grid_ok(&self, site: usize) -> bool {
        self.sites[site].grid_ok
    }

    pub fn backbone_ok(&self, site: usize) -> bool {
        self.sites[site].backbone_ok
    }

    pub fn fuel_hours(&self, site: usize) -> f64 {
        self.sites[site].generator.fuel_hours_remaining
    }

    pub fn soc(&self, site: usize) -> f64 {
        self.sites[site].bess.soc
    }

    pub fn haps(&self) -> &[HapsUnit] {
        &self.haps
    }

    pub fn satellite_available(&self) -> bool {
        self.satellite_available
    }

    fn site_ids(&self, ids: &Option<Vec<usize>>) -> Result<Vec<usize>> {
        match ids {
            None => Ok((0..self.sites.len()).collect()),
            Some(ids) => {
                if let Some(bad) = ids.iter().find(|i| **i >= self.sites.len()) {
                    return Err(Error::config(
                        "events.sites",
                        format!("unknown site id {bad} ({} sites)", self.sites.len()),
                    ));
                }
                Ok(ids.clone())
            }
        }
    }

    fn haps_ids(&self, ids: &Option<Vec<usize>>) -> Result<Vec<usize>> {
        match ids {
            None => Ok((0..self.haps.len()).collect()),
            Some(ids) => {
                if let Some(bad) = ids.iter().find(|i| **i >= self.haps.len()) {
                    return Err(Error::config(
                        "events.haps",
                        format!("unknown HAPS id {bad} ({} HAPS)", self.haps.len()),
                    ));
                }
                Ok(ids.clone())
            }
        }
    }

    /// Applies one event. Only the fields named by the event kind change.
    pub fn apply_event(&mut self, event: &EventKind) -> Result<()> {
        match event {
            EventKind::BsFailFraction { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::config(
                        "events.fraction",
                        format!("{fraction} outside [0, 1]"),
                    ));
                }
                let target = (fraction * self.sites.len() as f64).round() as usize;
                while self.failed_count < target {
                    let id = self.failure_order[self.failed_count];
                    self.sites[id].failed = true;
                    self.failed_count += 1;
                }
            }
            EventKind::GridOutage { sites } => {
                for id in self.site_ids(sites)? {
                    self.sites[id].grid_ok = false;
                }
            }
            EventKind::GridRestore { sites } => {
                for id in self.site_ids(sites)? {
                    self.sites[id].grid_ok = true;
                }
            }
            EventKind::BackboneCut { sites } => {
                for id in self.site_ids(sites)? {
                    self.sites[id].backbone_ok = false;
                }
            }
            EventKind::FuelDelivery { sites, hours } => {
                if !(*hours >= 0.0) {
                    return Err(Error::config("events.hours", "fuel hours must be >= 0"));
                }
                for id in self.site_ids(sites)? {
                    self.sites[id].generator.refuel(*hours);
                }
            }
            EventKind::HapsUp { haps } => {
                for id in self.haps_ids(haps)? {
                    self.haps[id].available = true;
                }
            }
            EventKind::HapsDown { haps } => {
                for id in self.haps_ids(haps)? {
                    self.haps[id].available = false;
                }
            }
            EventKind::SatUp => self.satellite_available = true,
        }
        Ok(())
    }
}

/// Users served per bearer in one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ServedVia {
    pub gbs: u64,
    pub haps_ran: u64,
    pub haps_backhaul: u64,
    pub satellite: u64,
}

impl ServedVia {
    pub fn total(&self) -> u64 {
        self.gbs + self.haps_ran + self.haps_backhaul + self.satellite
    }

    fn add(&mut self, other: &ServedVia) {
        self.gbs += other.gbs;
        self.haps_ran += other.haps_ran;
        self.haps_backhaul += other.haps_backhaul;
        self.satellite += other.satellite;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickRow {
    pub tick: usize,
    pub time_h: f64,
    pub coverage_ratio: f64,
    pub served: ServedVia,
    pub unserved: u64,
    pub total_users: u64,
}

/// Per-site record of one tick. `decision` is `None` for destroyed sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteTick {
    pub tick: usize,
    pub site: usize,
    pub failed: bool,
    pub status: Option<GbsStatus>,
    pub decision: Option<PolicyAction>,
    pub soc_before: f64,
    pub soc: f64,
    pub fuel_h: f64,
    pub served: ServedVia,
    pub users: u64,
    pub ledger: EnergyLedger,
}

impl SiteTick {
    pub fn action_label(&self) -> &'static str {
        self.decision.map_or("FAILED", |d| d.action.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineResult {
    pub methodology: Methodology,
    pub dt_h: f64,
    pub total_users: u64,
    pub n_sites: usize,
    pub rows: Vec<TickRow>,
    /// `rows.len() * n_sites` records, tick-major.
    pub site_ticks: Vec<SiteTick>,
}

impl TimelineResult {
    pub fn site_ticks_at(&self, tick: usize) -> &[SiteTick] {
        &self.site_ticks[tick * self.n_sites..(tick + 1) * self.n_sites]
    }
}

/// Splits `total` users over `n` sites as evenly as possible.
pub fn partition_users(total: u64, n: usize) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let base = total / n as u64;
    let extra = (total % n as u64) as usize;
    (0..n).map(|i| base + u64::from(i < extra)).collect()
}

pub fn run_timeline(
    sites: Vec<SiteSpec>,
    haps: Vec<HapsUnit>,
    events: &[ScenarioEvent],
    config: &TimelineConfig,
) -> Result<TimelineResult> {
    config.validate()?;
    if sites.is_empty() {
        return Err(Error::config("sites", "need at least one site"));
    }
    for (i, w) in events.windows(2).enumerate() {
        if w[1].time_h < w[0].time_h {
            return Err(Error::config(
                format!("events[{}].time_h", i + 1),
                "events must be sorted by time",
            ));
        }
    }
    if let Some(i) = events.iter().position(|e| !(e.time_h >= 0.0)) {
        return Err(Error::config(format!("events[{i}].time_h"), "must be >= 0"));
    }

    let total_users: u64 = sites.iter().map(|s| s.users).sum();
    let n_sites = sites.len();
    let mut state = SimState::new(sites, haps, config);
    let n_ticks = config.n_ticks();
    let mut rows = Vec::with_capacity(n_ticks);
    let mut site_ticks = Vec::with_capacity(n_ticks * n_sites);
    let mut next_event = 0;

    for tick in 0..n_ticks {
        let t = tick as f64 * config.dt_h;
        while next_event < events.len() && events[next_event].time_h <= t + TIME_EPS {
            state.apply_event(&events[next_event].kind)?;
            next_event += 1;
        }
        let mut ledger_tick = TickContext::new(&state, config, t, total_users);
        let mut served = ServedVia::default();
        for id in 0..n_sites {
            let record = ledger_tick.step_site(&mut state.sites[id], id, tick)?;
            served.add(&record.served);
            site_ticks.push(record);
        }
        let served_total = served.total();
        rows.push(TickRow {
            tick,
            time_h: t,
            coverage_ratio: if total_users == 0 {
                1.0
            } else {
                served_total as f64 / total_users as f64
            },
            served,
            unserved: total_users - served_total,
            total_users,
        });
    }

    Ok(TimelineResult {
        methodology: config.methodology,
        dt_h: config.dt_h,
        total_users,
        n_sites,
        rows,
        site_ticks,
    })
}

/// Shared per-tick budgets and inputs.
struct TickContext<'a> {
    config: &'a TimelineConfig,
    t: f64,
    haps_up: bool,
    haps_remaining: u64,
    satellite_remaining: u64,
    load: f64,
}

impl<'a> TickContext<'a> {
    fn new(state: &SimState, config: &'a TimelineConfig, t: f64, total_users: u64) -> Self {
        let methodology_haps = config.methodology.uses_haps();
        let haps_remaining: u64 = if methodology_haps {
            state
                .haps
                .iter()
                .filter(|h| h.available)
                .map(|h| h.capacity_users)
                .sum()
        } else {
            0
        };
        let satellite_remaining = if methodology_haps && state.satellite_available {
            (config.satellite_user_fraction * total_users as f64).floor() as u64
        } else {
            0
        };
        let hour = (config.start_hour + t).rem_euclid(24.0);
        TickContext {
            config,
            t,
            haps_up: methodology_haps && state.haps.iter().any(|h| h.available),
            haps_remaining,
            satellite_remaining,
            load: config.traffic_profile[(hour.floor() as usize).min(23)],
        }
    }

    fn take_haps(&mut self, users: u64) -> u64 {
        let n = users.min(self.haps_remaining);
        self.haps_remaining -= n;
        n
    }

    fn take_satellite(&mut self, users: u64) -> u64 {
        let n = users.min(self.satellite_remaining);
        self.satellite_remaining -= n;
        n
    }

    fn step_site(&mut self, site: &mut SiteState, id: usize, tick: usize) -> Result<SiteTick> {
        let users = site.spec.users;
        let soc_before = site.bess.soc;
        if site.failed {
            let mut served = ServedVia::default();
            served.haps_ran = self.take_haps(users);
            served.satellite = self.take_satellite(users - served.haps_ran);
            site.radio_on = false;
            return Ok(SiteTick {
                tick,
                site: id,
                failed: true,
                status: None,
                decision: None,
                soc_before,
                soc: site.bess.soc,
                fuel_h: site.generator.fuel_hours_remaining,
                served,
                users,
                ledger: EnergyLedger::default(),
            });
        }

        let cfg = self.config;
        let dt = cfg.dt_h;
        let load = (self.load * site.spec.traffic_scale).clamp(0.0, 1.5);
        let status = GbsStatus {
            radio_on: site.radio_on,
            grid_ok: site.grid_ok,
            backbone_ok: site.backbone_ok,
            haps_available: self.haps_up && self.haps_remaining >= users,
            satellite_available: self.satellite_remaining > 0,
            load,
            soc: site.bess.soc,
            reserve_soc: site.bess.reserve_soc,
            generator_fuel_h: site.generator.fuel_hours_remaining,
            ev_inbound: site.ev.is_some_and(|s| s.end_h > self.t + TIME_EPS),
        };
        let decision = match cfg.methodology {
            Methodology::None => decide_baseline(&status),
            Methodology::PreDisaster if status.grid_ok && status.backbone_ok => {
                decide_predisaster(&status, &cfg.thresholds)?
            }
            Methodology::PreDisaster => decide_baseline(&status),
            Methodology::InDisaster => decide_indisaster(&status),
        };
        let action = decision.action;

        if decision.directives.request_ev && !status.ev_inbound {
            site.ev = dispatch_ev(self.t, &cfg.ev);
        }
        if decision.directives.preserve_bess {
            site.ev = None;
        }

        let load_kw = match action {
            Action::ServeNormally
            | Action::Wake
            | Action::OffloadNewArrivals
            | Action::HapsBackhaul
            | Action::RunOnBess
            | Action::RunOnGenerator => cfg.site_load.active_kw,
            Action::SleepOffloadHaps => cfg.site_load.radio_off_kw,
            Action::RadioOffServeViaHaps
            | Action::RequestEv
            | Action::SatelliteFallback
            | Action::Outage => 0.0,
        };
        let ev_kwh = site
            .ev
            .map_or(0.0, |s| s.energy_between(self.t, self.t + dt));
        let request = DispatchRequest {
            load_kw,
            grid_available: site.grid_ok,
            allow_bess_discharge: action == Action::RunOnBess,
            freeze_bess: decision.directives.preserve_bess,
            run_generator: decision.directives.run_generator,
            res_kwh: res_energy(&site.spec.res, cfg.start_hour + self.t, dt),
            ev_kwh,
        };
        let outcome = dispatch_site(&request, site.bess, site.generator, dt)?;
        site.bess = outcome.bess;
        site.generator = outcome.generator;
        site.radio_on = action.radio_on();
        if site.ev.is_some_and(|s| s.end_h <= self.t + dt + TIME_EPS) {
            site.ev = None;
        }

        let powered = outcome.served_fraction();
        let mut served = ServedVia::default();
        match action {
            Action::ServeNormally | Action::Wake | Action::RunOnBess | Action::RunOnGenerator => {
                let capacity = congestion_share(users, load);
                let n = share(capacity, powered);
                if site.backbone_ok {
                    served.gbs = n;
                } else if cfg.methodology == Methodology::InDisaster {
                    served.satellite = self.take_satellite(n);
                }
            }
            Action::OffloadNewArrivals => {
                let to_haps = share(users, (load - cfg.thresholds.rho_high) / load);
                served.haps_ran = self.take_haps(to_haps);
                served.gbs = share(users - to_haps, powered);
            }
            Action::HapsBackhaul => {
                served.haps_backhaul = share(congestion_share(users, load), powered);
            }
            Action::SleepOffloadHaps | Action::RadioOffServeViaHaps => {
                served.haps_ran = self.take_haps(users);
            }
            Action::RequestEv | Action::SatelliteFallback => {
                served.satellite = self.take_satellite(users);
            }
            Action::Outage => {}
        }

        Ok(SiteTick {
            tick,
            site: id,
            failed: false,
            status: Some(status),
            decision: Some(decision),
            soc_before,
            soc: site.bess.soc,
            fuel_h: site.generator.fuel_hours_remaining,
            served,
            users,
            ledger: outcome.ledger,
        })
    }
}

fn share(users: u64, fraction: f64) -> u64 {
    ((users as f64 * fraction.clamp(0.0, 1.0)).round() as u64).min(users)
}

/// Users a ground site can carry at `load` (> 1 means congestion).
fn congestion_share(users: u64, load: f64) -> u64 {
    if load > 1.0 {
        share(users, 1.0 / load)
    } else {
        users
    }
}

/// Aggregate outcome of a timeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResilienceSummary {
    pub ticks: usize,
    pub dt_h: f64,
    pub total_users: u64,
    pub unserved_user_hours: f64,
    pub min_coverage_ratio: f64,
    pub mean_coverage_ratio: f64,
    pub final_coverage_ratio: f64,
    /// Start of the final run of fully covered ticks; `None` if the run
    /// ends with users still unserved.
    pub time_to_full_restoration_h: Option<f64>,
    pub energy: EnergyLedger,
}

pub fn resilience_metrics(result: &TimelineResult) -> Result<ResilienceSummary> {
    let rows = &result.rows;
    let last = rows
        .last()
        .ok_or_else(|| Error::invalid("resilience metrics of an empty timeline"))?;
    let users = result.total_users as f64;
    let unserved_user_hours = rows
        .iter()
        .map(|r| (1.0 - r.coverage_ratio) * users * result.dt_h)
        .sum();
    let min_coverage_ratio = rows
        .iter()
        .map(|r| r.coverage_ratio)
        .fold(f64::INFINITY, f64::min);
    let mean_coverage_ratio =
        rows.iter().map(|r| r.coverage_ratio).sum::<f64>() / rows.len() as f64;
    let time_to_full_restoration_h = if last.unserved > 0 {
        None
    } else {
        let first_full = rows
            .iter()
            .rposition(|r| r.unserved > 0)
            .map_or(0, |i| i + 1);
        Some(rows[first_full].time_h)
    };
    let mut energy = EnergyLedger::default();
    for s in &result.site_ticks {
        energy.accumulate(&s.ledger);
    }
    Ok(ResilienceSummary {
        ticks: rows.len(),
        dt_h: result.dt_h,
        total_users: result.total_users,
        unserved_user_hours,
        min_coverage_ratio,
        mean_coverage_ratio,
        final_coverage_ratio: last.coverage_ratio,
        time_to_full_restoration_h,
        energy,
    })
}
