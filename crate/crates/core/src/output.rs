//! CSV and JSON emission.
//!
//! Files use `\n` line endings and a fixed column order. dBm values carry
//! two decimals, fractions six.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coverage::{CoverageConfig, CoverageResult};
use crate::disaster::{ResilienceSummary, TimelineResult};
use crate::energy::EnergyLedger;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub band: String,
    pub scenario: String,
    pub haps_count: usize,
    pub n_users: usize,
    pub seed: u64,
    pub eirp_dbm: f64,
    pub sensitivity_dbm: f64,
    pub median_p_rx_dbm: f64,
    pub p5_p_rx_dbm: f64,
    pub p10_p_rx_dbm: f64,
    pub p90_p_rx_dbm: f64,
    pub mean_p_rx_dbm: f64,
    pub below_sensitivity_fraction: f64,
    pub low_elevation_links: u64,
    pub beyond_horizon_links: u64,
}

impl CoverageSummary {
    pub fn new(config: &CoverageConfig, result: &CoverageResult) -> Self {
        CoverageSummary {
            band: config.band.to_string(),
            scenario: config.scenario.to_string(),
            haps_count: config.haps_count,
            n_users: result.n_users,
            seed: config.seed,
            eirp_dbm: config.eirp_dbm,
            sensitivity_dbm: result.sensitivity_dbm,
            median_p_rx_dbm: result.median_p_rx_dbm,
            p5_p_rx_dbm: result.p5_p_rx_dbm,
            p10_p_rx_dbm: result.percentile(0.10),
            p90_p_rx_dbm: result.percentile(0.90),
            mean_p_rx_dbm: result.mean_p_rx_dbm,
            below_sensitivity_fraction: result.below_sensitivity_fraction,
            low_elevation_links: result.low_elevation_links,
            beyond_horizon_links: result.beyond_horizon_links,
        }
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        format!(
            "band={} scenario={} haps={} users={} median={:.2} dBm p5={:.2} dBm below_sensitivity={:.6}",
            self.band,
            self.scenario,
            self.haps_count,
            self.n_users,
            self.median_p_rx_dbm,
            self.p5_p_rx_dbm,
            self.below_sensitivity_fraction
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub methodology: String,
    pub n_sites: usize,
    #[serde(flatten)]
    pub metrics: ResilienceSummary,
}

impl TimelineSummary {
    pub fn line(&self) -> String {
        let restore = self
            .metrics
            .time_to_full_restoration_h
            .map_or_else(|| "never".to_string(), |t| format!("{t:.2} h"));
        format!(
            "methodology={} sites={} min_coverage={:.6} unserved_user_hours={:.2} full_restoration={}",
            self.methodology,
            self.n_sites,
            self.metrics.min_coverage_ratio,
            self.metrics.unserved_user_hours,
            restore
        )
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

pub fn cdf_csv(result: &CoverageResult) -> String {
    let mut out = String::with_capacity(result.cdf.len() * 20 + 20);
    out.push_str("p_rx_dbm,fraction\n");
    for p in &result.cdf {
        let _ = writeln!(out, "{:.2},{:.6}", p.p_rx_dbm, p.fraction);
    }
    out
}

fn users_csv(result: &CoverageResult) -> Option<String> {
    let users = result.per_user.as_ref()?;
    let mut out =
        String::from("user,p_rx_dbm,snr_db,meets_sensitivity,serving_haps,elevation_deg,is_los\n");
    for (i, u) in users.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.2},{:.2},{},{},{:.4},{}",
            u.p_rx_dbm,
            u.snr_db,
            u8::from(u.meets_sensitivity),
            u.serving_haps,
            u.elevation_deg,
            u8::from(u.is_los)
        );
    }
    Some(out)
}

/// Writes `cdf.csv` and `summary.json` (and `users.csv` when per-user
/// results were kept).
pub fn emit_coverage(
    config: &CoverageConfig,
    result: &CoverageResult,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let mut files = vec![
        write_file(out_dir.join("cdf.csv"), &cdf_csv(result))?,
        write_file(
            out_dir.join("summary.json"),
            &json(&CoverageSummary::new(config, result)),
        )?,
    ];
    if let Some(users) = users_csv(result) {
        files.push(write_file(out_dir.join("users.csv"), &users)?);
    }
    Ok(files)
}

pub fn timeline_csv(result: &TimelineResult) -> String {
    let mut out = String::from(
        "tick,time_h,coverage_ratio,served_gbs,served_haps_ran,served_haps_backhaul,served_satellite,unserved,total_users\n",
    );
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{:.2},{:.6},{},{},{},{},{},{}",
            r.tick,
            r.time_h,
            r.coverage_ratio,
            r.served.gbs,
            r.served.haps_ran,
            r.served.haps_backhaul,
            r.served.satellite,
            r.unserved,
            r.total_users
        );
    }
    out
}

pub fn ledger_csv(result: &TimelineResult) -> String {
    let mut out = String::from("tick,site,source,kwh\n");
    for s in &result.site_ticks {
        for (name, kwh) in EnergyLedger::SOURCES.iter().zip(s.ledger.entries()) {
            let _ = writeln!(out, "{},{},{},{:.6}", s.tick, s.site, name, kwh);
        }
    }
    out
}

pub fn decisions_csv(result: &TimelineResult) -> String {
    let mut out = String::from(
        "tick,site,failed,radio_on,grid_ok,backbone_ok,haps_available,satellite_available,load,soc,fuel_h,ev_inbound,action,request_ev,run_generator,preserve_bess,soc_after,served\n",
    );
    let b = |v: bool| u8::from(v);
    for s in &result.site_ticks {
        let _ = write!(out, "{},{},{},", s.tick, s.site, b(s.failed));
        match s.status {
            Some(st) => {
                let _ = write!(
                    out,
                    "{},{},{},{},{},{:.6},{:.6},{:.4},{},",
                    b(st.radio_on),
                    b(st.grid_ok),
                    b(st.backbone_ok),
                    b(st.haps_available),
                    b(st.satellite_available),
                    st.load,
                    st.soc,
                    st.generator_fuel_h,
                    b(st.ev_inbound)
                );
            }
            None => out.push_str(",,,,,,,,,"),
        }
        let d = s.decision.map(|d| d.directives).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{}",
            s.action_label(),
            b(d.request_ev),
            b(d.run_generator),
            b(d.preserve_bess),
            s.soc,
            s.served.total()
        );
    }
    out
}

/// Writes `timeline.csv`, `ledger.csv`, `decisions.csv` and `summary.json`.
pub fn emit_timeline(
    result: &TimelineResult,
    summary: &TimelineSummary,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    Ok(vec![
        write_file(out_dir.join("timeline.csv"), &timeline_csv(result))?,
        write_file(out_dir.join("ledger.csv"), &ledger_csv(result))?,
        write_file(out_dir.join("decisions.csv"), &decisions_csv(result))?,
        write_file(out_dir.join("summary.json"), &json(summary))?,
    ])
}
