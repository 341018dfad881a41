//! Monte Carlo HAPS-RAN coverage experiment.
//!
//! Users are dropped uniformly over the region, every user-HAPS link gets an
//! independent channel draw, and each user attaches to the HAPS delivering
//! the strongest signal. The output is the empirical CDF of the best
//! received power.

use rayon::prelude::*;
use serde::Serialize;

use crate::band::Band;
use crate::channel::{total_path_loss, ChannelProfile, ChannelScenario};
use crate::error::{Error, Result};
use crate::geometry::{
    elevation_from_ground_distance, place_haps, sample_user, slant_range, HapsNode, Region,
};
use crate::link_budget::{meets_sensitivity, received_power, snr, LinkBudgetResult, TerminalModel};
use crate::rng::{substream, DOMAIN_CHANNEL};

/// Fully resolved inputs of one coverage run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub region: Region,
    pub haps_count: usize,
    pub haps_altitude_m: f64,
    pub band: Band,
    pub freq_ghz: f64,
    pub eirp_dbm: f64,
    pub scenario: ChannelScenario,
    pub profile: ChannelProfile,
    pub n_users: usize,
    pub seed: u64,
    pub terminal: TerminalModel,
    pub keep_per_user: bool,
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::config("coverage.n_users", "must be >= 1"));
        }
        if self.haps_count == 0 {
            return Err(Error::config("coverage.haps_count", "must be >= 1"));
        }
        if !(self.freq_ghz > 0.0) {
            return Err(Error::config("freq_ghz", "must be > 0"));
        }
        if self.terminal.band != self.band {
            return Err(Error::config(
                "terminal.band",
                format!(
                    "terminal is {} but run is {}",
                    self.terminal.band, self.band
                ),
            ));
        }
        self.profile.validate()?;
        self.terminal.validate()
    }

    /// HAPS fleet for this run.
    pub fn haps(&self) -> Result<Vec<HapsNode>> {
        place_haps(self.region, self.haps_count)?
            .into_iter()
            .map(|p| HapsNode::new(p, self.haps_altitude_m, self.eirp_dbm, self.band))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub p_rx_dbm: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageResult {
    pub cdf: Vec<CdfPoint>,
    pub n_users: usize,
    pub sensitivity_dbm: f64,
    pub below_sensitivity_fraction: f64,
    pub mean_p_rx_dbm: f64,
    pub median_p_rx_dbm: f64,
    pub p5_p_rx_dbm: f64,
    /// User-HAPS links evaluated at the minimum elevation.
    pub low_elevation_links: u64,
    /// User-HAPS links with the platform below the horizon.
    pub beyond_horizon_links: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_user: Option<Vec<LinkBudgetResult>>,
}

impl CoverageResult {
    /// Inverse of the empirical CDF.
    pub fn percentile(&self, q: f64) -> f64 {
        percentile(&self.cdf, q)
    }
}

/// Index of the strongest received power; ties go to the lowest index.
pub fn associate(powers_dbm: &[f64]) -> Result<usize> {
    if powers_dbm.is_empty() {
        return Err(Error::invalid("association needs at least one HAPS"));
    }
    let mut best = 0;
    for (i, p) in powers_dbm.iter().enumerate().skip(1) {
        if *p > powers_dbm[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Empirical CDF of `samples`, ascending, one point per distinct value.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<CdfPoint>> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical CDF of an empty sample"));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("empirical CDF sample contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.par_sort_unstable_by(f64::total_cmp);
    Ok(cdf_from_sorted(&sorted))
}

fn cdf_from_sorted(sorted: &[f64]) -> Vec<CdfPoint> {
    let n = sorted.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::with_capacity(sorted.len());
    for (i, &v) in sorted.iter().enumerate() {
        let fraction = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.p_rx_dbm == v => last.fraction = fraction,
            _ => out.push(CdfPoint {
                p_rx_dbm: v,
                fraction,
            }),
        }
    }
    out
}

/// Smallest sample whose cumulative fraction reaches `q`.
pub fn percentile(cdf: &[CdfPoint], q: f64) -> f64 {
    cdf.iter()
        .find(|p| p.fraction >= q)
        .or(cdf.last())
        .map(|p| p.p_rx_dbm)
        .unwrap_or(f64::NAN)
}

/// CDF value at `x`.
pub fn cdf_at(cdf: &[CdfPoint], x: f64) -> f64 {
    cdf.iter()
        .take_while(|p| p.p_rx_dbm <= x)
        .last()
        .map_or(0.0, |p| p.fraction)
}

/// Result of evaluating one user against the whole fleet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserOutcome {
    pub link: LinkBudgetResult,
    pub low_elevation_links: u32,
    pub beyond_horizon_links: u32,
}

/// Evaluates user `index` of the run. Pure in `(config, haps, index)`.
pub fn evaluate_user(
    config: &CoverageConfig,
    haps: &[HapsNode],
    index: usize,
) -> Result<UserOutcome> {
    let user = sample_user(config.region, config.seed, index as u64);
    let mut best: Option<(f64, usize, f64, bool)> = None;
    let (mut low, mut beyond) = (0, 0);
    for (j, node) in haps.iter().enumerate() {
        let raw = elevation_from_ground_distance(user.distance_to(node.position), node.altitude_m);
        if raw < 0.0 {
            beyond += 1;
        }
        let elevation = raw.clamp(0.0, 90.0);
        let dist = slant_range(elevation, node.altitude_m)?;
        let mut rng = substream(config.seed, DOMAIN_CHANNEL, index as u64, j as u64);
        let draw = total_path_loss(&config.profile, config.freq_ghz, elevation, dist, &mut rng)?;
        if draw.low_elevation {
            low += 1;
        }
        let p = received_power(node.eirp_dbm, config.terminal.rx_gain_dbi, draw.total_pl_db);
        // Strict comparison keeps the lowest index on ties.
        if best.is_none_or(|(bp, ..)| p > bp) {
            best = Some((p, j, elevation, draw.is_los));
        }
    }
    let (p_rx_dbm, serving_haps, elevation_deg, is_los) =
        best.ok_or_else(|| Error::invalid("association needs at least one HAPS"))?;
    Ok(UserOutcome {
        link: LinkBudgetResult {
            p_rx_dbm,
            snr_db: snr(p_rx_dbm, config.terminal.noise_dbm()),
            meets_sensitivity: meets_sensitivity(p_rx_dbm, config.terminal.sensitivity_dbm),
            serving_haps,
            elevation_deg,
            is_los,
        },
        low_elevation_links: low,
        beyond_horizon_links: beyond,
    })
}

pub fn run_coverage(config: &CoverageConfig) -> Result<CoverageResult> {
    config.validate()?;
    let haps = config.haps()?;
    let outcomes: Vec<UserOutcome> = (0..config.n_users)
        .into_par_iter()
        .map(|i| evaluate_user(config, &haps, i))
        .collect::<Result<_>>()?;
    Ok(summarize(config, outcomes))
}

fn summarize(config: &CoverageConfig, outcomes: Vec<UserOutcome>) -> CoverageResult {
    let n = outcomes.len();
    let sensitivity = config.terminal.sensitivity_dbm;
    let mut powers: Vec<f64> = outcomes.iter().map(|o| o.link.p_rx_dbm).collect();
    let mean = powers.iter().sum::<f64>() / n as f64;
    let below = powers
        .iter()
        .filter(|p| !meets_sensitivity(**p, sensitivity))
        .count();
    powers.par_sort_unstable_by(f64::total_cmp);
    let cdf = cdf_from_sorted(&powers);
    let low = outcomes.iter().map(|o| o.low_elevation_links as u64).sum();
    let beyond = outcomes.iter().map(|o| o.beyond_horizon_links as u64).sum();
    CoverageResult {
        median_p_rx_dbm: percentile(&cdf, 0.5),
        p5_p_rx_dbm: percentile(&cdf, 0.05),
        cdf,
        n_users: n,
        sensitivity_dbm: sensitivity,
        below_sensitivity_fraction: below as f64 / n as f64,
        mean_p_rx_dbm: mean,
        low_elevation_links: low,
        beyond_horizon_links: beyond,
        per_user: config
            .keep_per_user
            .then(|| outcomes.iter().map(|o| o.link).collect()),
    }
}
