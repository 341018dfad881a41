//! Site energy: renewables, battery storage, diesel generator, EV deliveries,
//! and the per-tick dispatch that ties them to the site load.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking requested power against rate limits.
const RATE_EPS: f64 = 1e-9;

/// Battery parameters and state of charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BessState {
    pub capacity_kwh: f64,
    pub soc: f64,
    pub max_charge_kw: f64,
    pub max_discharge_kw: f64,
    pub reserve_soc: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
}

impl BessState {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_kwh > 0.0 && self.capacity_kwh.is_finite()) {
            return Err(Error::config("capacity_kwh", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.soc) {
            return Err(Error::config("soc", format!("{} outside [0, 1]", self.soc)));
        }
        if !(0.0..1.0).contains(&self.reserve_soc) {
            return Err(Error::config(
                "reserve_soc",
                format!("{} outside [0, 1)", self.reserve_soc),
            ));
        }
        for (name, v) in [
            ("max_charge_kw", self.max_charge_kw),
            ("max_discharge_kw", self.max_discharge_kw),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be >= 0"));
            }
        }
        for (name, v) in [
            ("charge_efficiency", self.charge_efficiency),
            ("discharge_efficiency", self.discharge_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(name, format!("{v} outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn stored_kwh(&self) -> f64 {
        self.soc * self.capacity_kwh
    }

    pub fn above_reserve(&self) -> bool {
        self.soc > self.reserve_soc
    }
}

/// Outcome of one battery step. `absorbed_kwh`/`delivered_kwh` are changes
/// of stored energy; `input_kwh`/`output_kwh` are measured at the site bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BessStep {
    pub state: BessState,
    pub absorbed_kwh: f64,
    pub delivered_kwh: f64,
    pub input_kwh: f64,
    pub output_kwh: f64,
}

/// Advances the battery by `dt_h` at the given bus-side charge or discharge
/// power. Energy beyond the capacity or below empty is not exchanged.
pub fn step_bess(
    state: BessState,
    charge_kw: f64,
    discharge_kw: f64,
    dt_h: f64,
) -> Result<BessStep> {
    if !(dt_h > 0.0) {
        return Err(Error::invalid(format!("dt_h must be > 0, got {dt_h}")));
    }
    if !(charge_kw >= 0.0 && discharge_kw >= 0.0) {
        return Err(Error::invalid("charge and discharge power must be >= 0"));
    }
    if charge_kw > 0.0 && discharge_kw > 0.0 {
        return Err(Error::invalid(
            "cannot charge and discharge in the same step",
        ));
    }
    if charge_kw > state.max_charge_kw + RATE_EPS {
        return Err(Error::invalid(format!(
            "charge {charge_kw} kW exceeds limit {} kW",
            state.max_charge_kw
        )));
    }
    if discharge_kw > state.max_discharge_kw + RATE_EPS {
        return Err(Error::invalid(format!(
            "discharge {discharge_kw} kW exceeds limit {} kW",
            state.max_discharge_kw
        )));
    }

    let stored = state.stored_kwh();
    let mut next = state;
    let mut step = BessStep {
        state,
        absorbed_kwh: 0.0,
        delivered_kwh: 0.0,
        input_kwh: 0.0,
        output_kwh: 0.0,
    };
    if charge_kw > 0.0 {
        let headroom = (state.capacity_kwh - stored).max(0.0);
        let wanted = charge_kw * state.charge_efficiency * dt_h;
        if wanted >= headroom {
            step.absorbed_kwh = headroom;
            next.soc = 1.0;
        } else {
            step.absorbed_kwh = wanted;
            next.soc = ((stored + wanted) / state.capacity_kwh).clamp(0.0, 1.0);
        }
        step.input_kwh = step.absorbed_kwh / state.charge_efficiency;
    } else if discharge_kw > 0.0 {
        let wanted = discharge_kw * dt_h / state.discharge_efficiency;
        if wanted >= stored {
            step.delivered_kwh = stored;
            next.soc = 0.0;
        } else {
            step.delivered_kwh = wanted;
            next.soc = ((stored - wanted) / state.capacity_kwh).clamp(0.0, 1.0);
        }
        step.output_kwh = step.delivered_kwh * state.discharge_efficiency;
    }
    step.state = next;
    Ok(step)
}

/// Diesel generator with an endurance budget in running hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorState {
    pub fuel_hours_remaining: f64,
    #[serde(default)]
    pub burn_active: bool,
    pub output_kw: f64,
}

impl GeneratorState {
    pub fn validate(&self) -> Result<()> {
        if !(self.fuel_hours_remaining >= 0.0 && self.fuel_hours_remaining.is_finite()) {
            return Err(Error::config("fuel_hours_remaining", "must be >= 0"));
        }
        if !(self.output_kw >= 0.0 && self.output_kw.is_finite()) {
            return Err(Error::config("output_kw", "must be >= 0"));
        }
        Ok(())
    }

    pub fn refuel(&mut self, hours: f64) {
        self.fuel_hours_remaining += hours.max(0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorStep {
    pub state: GeneratorState,
    /// Average power over the step.
    pub supplied_kw: f64,
    pub supplied_kwh: f64,
}

/// Runs the generator against `demand_kw` for `dt_h`. It idles (and burns
/// nothing) when there is no demand, and stops when the fuel runs out part
/// way through a step.
pub fn step_generator(state: GeneratorState, demand_kw: f64, dt_h: f64) -> Result<GeneratorStep> {
    if !(dt_h > 0.0) {
        return Err(Error::invalid(format!("dt_h must be > 0, got {dt_h}")));
    }
    let mut next = state;
    if !(demand_kw > 0.0) || state.fuel_hours_remaining <= 0.0 {
        next.burn_active = false;
        return Ok(GeneratorStep {
            state: next,
            supplied_kw: 0.0,
            supplied_kwh: 0.0,
        });
    }
    let burn_h = dt_h.min(state.fuel_hours_remaining);
    let energy = demand_kw.min(state.output_kw) * burn_h;
    next.fuel_hours_remaining = (state.fuel_hours_remaining - burn_h).max(0.0);
    next.burn_active = true;
    Ok(GeneratorStep {
        state: next,
        supplied_kw: energy / dt_h,
        supplied_kwh: energy,
    })
}

/// On-site renewables: wind plus a half-sine PV day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResProfile {
    pub pv_peak_kw: f64,
    pub wind_mean_kw: f64,
    pub sunrise_h: f64,
    pub sunset_h: f64,
}

impl ResProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.pv_peak_kw >= 0.0) {
            return Err(Error::config("pv_peak_kw", "must be >= 0"));
        }
        if !(self.wind_mean_kw >= 0.0) {
            return Err(Error::config("wind_mean_kw", "must be >= 0"));
        }
        if !(0.0 <= self.sunrise_h && self.sunrise_h < self.sunset_h && self.sunset_h <= 24.0) {
            return Err(Error::config(
                "sunrise_h",
                "need 0 <= sunrise_h < sunset_h <= 24",
            ));
        }
        Ok(())
    }

    fn daylight_h(&self) -> f64 {
        self.sunset_h - self.sunrise_h
    }

    /// Integral of the PV term from midnight to `hour_of_day` (within one day).
    fn pv_cumulative_kwh(&self, hour_of_day: f64) -> f64 {
        let len = self.daylight_h();
        let h = hour_of_day.clamp(self.sunrise_h, self.sunset_h);
        self.pv_peak_kw * len / PI * (1.0 - (PI * (h - self.sunrise_h) / len).cos())
    }
}

/// Instantaneous renewable output at `hour_of_day`.
pub fn res_generation(profile: &ResProfile, hour_of_day: f64) -> f64 {
    let phase = PI * (hour_of_day - profile.sunrise_h) / profile.daylight_h();
    let pv = if (profile.sunrise_h..=profile.sunset_h).contains(&hour_of_day) {
        phase.sin().max(0.0)
    } else {
        0.0
    };
    profile.wind_mean_kw + profile.pv_peak_kw * pv
}

/// Renewable energy produced over `[start_h, start_h + dt_h)` where
/// `start_h` is an absolute time whose day starts at hour 0.
pub fn res_energy(profile: &ResProfile, start_h: f64, dt_h: f64) -> f64 {
    let wind = profile.wind_mean_kw * dt_h;
    let mut pv = 0.0;
    let mut t = start_h;
    let end = start_h + dt_h;
    while t < end {
        let day_start = (t / 24.0).floor() * 24.0;
        let seg_end = end.min(day_start + 24.0);
        pv += profile.pv_cumulative_kwh(seg_end - day_start)
            - profile.pv_cumulative_kwh(t - day_start);
        t = seg_end;
    }
    wind + pv
}

/// A volunteer EV or mobile battery sent to a site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvDispatch {
    pub travel_time_h: f64,
    pub deliverable_kwh: f64,
    pub delivery_rate_kw: f64,
}

impl EvDispatch {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("travel_time_h", self.travel_time_h),
            ("deliverable_kwh", self.deliverable_kwh),
            ("delivery_rate_kw", self.delivery_rate_kw),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Constant-rate delivery window `(start_h, end_h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargeSchedule {
    pub start_h: f64,
    pub end_h: f64,
    pub rate_kw: f64,
    pub energy_kwh: f64,
}

impl ChargeSchedule {
    /// Energy delivered inside `[t0, t1)`.
    pub fn energy_between(&self, t0: f64, t1: f64) -> f64 {
        let overlap = t1.min(self.end_h) - t0.max(self.start_h);
        if overlap <= 0.0 {
            0.0
        } else {
            (overlap * self.rate_kw).min(self.energy_kwh)
        }
    }

    pub fn is_active(&self, t: f64) -> bool {
        t > self.start_h && t <= self.end_h
    }
}

/// Delivery schedule for an EV requested at `request_time_h`; `None` when
/// the EV carries no energy or cannot deliver any.
pub fn dispatch_ev(request_time_h: f64, ev: &EvDispatch) -> Option<ChargeSchedule> {
    if ev.deliverable_kwh <= 0.0 || ev.delivery_rate_kw <= 0.0 {
        return None;
    }
    let start_h = request_time_h + ev.travel_time_h;
    Some(ChargeSchedule {
        start_h,
        end_h: start_h + ev.deliverable_kwh / ev.delivery_rate_kw,
        rate_kw: ev.delivery_rate_kw,
        energy_kwh: ev.deliverable_kwh,
    })
}

/// Electrical load of a site in its three power states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteLoad {
    pub active_kw: f64,
    pub radio_off_kw: f64,
}

impl SiteLoad {
    pub fn validate(&self) -> Result<()> {
        if !(self.active_kw >= 0.0 && self.radio_off_kw >= 0.0) {
            return Err(Error::config("active_kw", "site loads must be >= 0"));
        }
        Ok(())
    }
}

/// Energy flows of one site over one tick, in kWh at the site bus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub grid_kwh: f64,
    pub res_kwh: f64,
    pub generator_kwh: f64,
    pub ev_kwh: f64,
    pub bess_discharge_kwh: f64,
    pub bess_charge_kwh: f64,
    pub load_kwh: f64,
    pub curtailed_kwh: f64,
}

impl EnergyLedger {
    /// Column names, in the order used by [`EnergyLedger::entries`].
    pub const SOURCES: [&'static str; 8] = [
        "grid",
        "res",
        "generator",
        "ev",
        "bess_discharge",
        "bess_charge",
        "load",
        "curtailed",
    ];

    pub fn entries(&self) -> [f64; 8] {
        [
            self.grid_kwh,
            self.res_kwh,
            self.generator_kwh,
            self.ev_kwh,
            self.bess_discharge_kwh,
            self.bess_charge_kwh,
            self.load_kwh,
            self.curtailed_kwh,
        ]
    }

    /// Sources minus sinks; zero when the tick balances.
    pub fn imbalance(&self) -> f64 {
        self.grid_kwh + self.res_kwh + self.generator_kwh + self.ev_kwh + self.bess_discharge_kwh
            - self.bess_charge_kwh
            - self.load_kwh
            - self.curtailed_kwh
    }

    pub fn accumulate(&mut self, other: &EnergyLedger) {
        self.grid_kwh += other.grid_kwh;
        self.res_kwh += other.res_kwh;
        self.generator_kwh += other.generator_kwh;
        self.ev_kwh += other.ev_kwh;
        self.bess_discharge_kwh += other.bess_discharge_kwh;
        self.bess_charge_kwh += other.bess_charge_kwh;
        self.load_kwh += other.load_kwh;
        self.curtailed_kwh += other.curtailed_kwh;
    }
}

/// What the site may draw on during a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchRequest {
    pub load_kw: f64,
    pub grid_available: bool,
    pub allow_bess_discharge: bool,
    /// Battery neither charges nor discharges; surplus is curtailed.
    pub freeze_bess: bool,
    pub run_generator: bool,
    pub res_kwh: f64,
    pub ev_kwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchOutcome {
    pub ledger: EnergyLedger,
    pub bess: BessState,
    pub generator: GeneratorState,
    pub unmet_kwh: f64,
    pub demand_kwh: f64,
}

impl DispatchOutcome {
    /// Share of the tick's demand that was supplied.
    pub fn served_fraction(&self) -> f64 {
        if self.demand_kwh <= 0.0 {
            1.0
        } else {
            ((self.demand_kwh - self.unmet_kwh) / self.demand_kwh).clamp(0.0, 1.0)
        }
    }
}

/// Serves the load in merit order RES, grid, EV, battery, generator.
/// Leftover RES and EV energy charges the battery; the rest is curtailed.
pub fn dispatch_site(
    request: &DispatchRequest,
    bess: BessState,
    generator: GeneratorState,
    dt_h: f64,
) -> Result<DispatchOutcome> {
    if !(dt_h > 0.0) {
        return Err(Error::invalid(format!("dt_h must be > 0, got {dt_h}")));
    }
    let demand = request.load_kw.max(0.0) * dt_h;
    let mut ledger = EnergyLedger {
        res_kwh: request.res_kwh,
        ev_kwh: request.ev_kwh,
        ..EnergyLedger::default()
    };
    let mut remaining = demand;

    let res_used = request.res_kwh.min(remaining);
    remaining -= res_used;
    let mut spare = request.res_kwh - res_used;

    if request.grid_available {
        ledger.grid_kwh = remaining;
        remaining = 0.0;
    }

    let ev_used = request.ev_kwh.min(remaining);
    remaining -= ev_used;
    spare += request.ev_kwh - ev_used;

    let mut bess_out = bess;
    if !request.freeze_bess && remaining > 0.0 && request.allow_bess_discharge {
        let kw = (remaining / dt_h).min(bess.max_discharge_kw);
        let step = step_bess(bess, 0.0, kw, dt_h)?;
        ledger.bess_discharge_kwh = step.output_kwh;
        remaining = (remaining - step.output_kwh).max(0.0);
        bess_out = step.state;
    }

    let mut gen_out = generator;
    if request.run_generator {
        let step = step_generator(generator, remaining / dt_h, dt_h)?;
        ledger.generator_kwh = step.supplied_kwh;
        remaining = (remaining - step.supplied_kwh).max(0.0);
        gen_out = step.state;
    } else {
        gen_out.burn_active = false;
    }

    if !request.freeze_bess && spare > 0.0 && ledger.bess_discharge_kwh == 0.0 {
        let kw = (spare / dt_h).min(bess.max_charge_kw);
        let step = step_bess(bess_out, kw, 0.0, dt_h)?;
        ledger.bess_charge_kwh = step.input_kwh;
        spare -= step.input_kwh;
        bess_out = step.state;
    }

    ledger.load_kwh = demand - remaining;
    ledger.curtailed_kwh = spare.max(0.0);
    Ok(DispatchOutcome {
        ledger,
        bess: bess_out,
        generator: gen_out,
        unmet_kwh: remaining,
        demand_kwh: demand,
    })
}
