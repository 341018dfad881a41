use proptest::prelude::*;

use hapsnet::channel::ChannelScenario;
use hapsnet::config::RunConfig;
use hapsnet::coverage::{
    associate, cdf_at, empirical_cdf, evaluate_user, run_coverage, CoverageConfig,
};
use hapsnet::geometry::{GeoPoint, HapsNode};
use hapsnet::link_budget::LinkBudgetResult;
use hapsnet::Band;

fn config(scenario: ChannelScenario, band: Band, users: usize, seed: u64) -> CoverageConfig {
    let mut cfg = RunConfig::defaults();
    cfg.seed = seed;
    cfg.coverage.scenario = scenario;
    cfg.coverage.band = band;
    cfg.coverage.n_users = users;
    cfg.coverage.keep_per_user = true;
    cfg.coverage_config().unwrap()
}

#[test]
fn parallel_matches_serial_bit_for_bit() {
    let mut cov = config(ChannelScenario::Urban, Band::S, 20_000, 9);
    cov.haps_count = 4;
    let parallel = run_coverage(&cov).unwrap().per_user.unwrap();
    let haps = cov.haps().unwrap();
    let serial: Vec<LinkBudgetResult> = (0..cov.n_users)
        .map(|i| evaluate_user(&cov, &haps, i).unwrap().link)
        .collect();
    assert_eq!(parallel.len(), serial.len());
    for (a, b) in parallel.iter().zip(&serial) {
        assert_eq!(a.p_rx_dbm.to_bits(), b.p_rx_dbm.to_bits());
        assert_eq!(a.serving_haps, b.serving_haps);
        assert_eq!(a.is_los, b.is_los);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let cov = config(ChannelScenario::DenseUrban, Band::Ka, 10_000, 3);
    assert_eq!(run_coverage(&cov).unwrap(), run_coverage(&cov).unwrap());
}

#[test]
fn sub_platform_user_gets_hand_budget() {
    let mut cov = config(ChannelScenario::SuburbanRural, Band::S, 1, 0);
    cov.profile.los_prob_table = vec![1.0; 9];
    cov.profile.shadow_sigma_los_db = 0.0;
    cov.eirp_dbm = 70.0;
    let user = hapsnet::geometry::sample_user(cov.region, cov.seed, 0);
    let node = HapsNode::new(user, 20_000.0, 70.0, Band::S).unwrap();
    let p = evaluate_user(&cov, &[node], 0).unwrap().link.p_rx_dbm;
    assert!((p - -54.56).abs() <= 0.05, "{p}");
}

#[test]
fn four_haps_dominate_one_at_every_decile() {
    let one = run_coverage(&config(
        ChannelScenario::SuburbanRural,
        Band::S,
        100_000,
        42,
    ))
    .unwrap();
    let mut four_cfg = config(ChannelScenario::SuburbanRural, Band::S, 100_000, 42);
    four_cfg.haps_count = 4;
    let four = run_coverage(&four_cfg).unwrap();
    for q in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        assert!(four.percentile(q) >= one.percentile(q), "decile {q}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn extra_haps_never_lowers_a_users_best_power(
        seed in any::<u64>(),
        xs in prop::collection::vec((0.0..339_116.0f64, 0.0..339_116.0f64), 2..6),
        index in 0usize..1_000_000,
    ) {
        let cov = config(ChannelScenario::DenseUrban, Band::S, 1, seed);
        let fleet: Vec<HapsNode> = xs
            .iter()
            .map(|&(x, y)| HapsNode::new(GeoPoint::new(x, y), 20_000.0, cov.eirp_dbm, Band::S).unwrap())
            .collect();
        for k in 1..fleet.len() {
            let fewer = evaluate_user(&cov, &fleet[..k], index).unwrap().link.p_rx_dbm;
            let more = evaluate_user(&cov, &fleet[..k + 1], index).unwrap().link.p_rx_dbm;
            prop_assert!(more >= fewer);
        }
    }

    #[test]
    fn below_sensitivity_matches_cdf(seed in any::<u64>(), sc in prop::sample::select(ChannelScenario::ALL.to_vec())) {
        let res = run_coverage(&config(sc, Band::S, 5_000, seed)).unwrap();
        let at = cdf_at(&res.cdf, res.sensitivity_dbm);
        prop_assert!((res.below_sensitivity_fraction - at).abs() <= 1.0 / res.n_users as f64);
    }

    #[test]
    fn dense_urban_median_not_above_suburban(seed in any::<u64>(), b in prop::sample::select(vec![Band::S, Band::Ka])) {
        let dense = run_coverage(&config(ChannelScenario::DenseUrban, b, 5_000, seed)).unwrap();
        let rural = run_coverage(&config(ChannelScenario::SuburbanRural, b, 5_000, seed)).unwrap();
        prop_assert!(dense.median_p_rx_dbm <= rural.median_p_rx_dbm);
    }
}

proptest! {
    #[test]
    fn cdf_matches_sort_oracle(samples in prop::collection::vec(-150.0..-20.0f64, 1..2_000)) {
        let cdf = empirical_cdf(&samples).unwrap();
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        for w in cdf.windows(2) {
            prop_assert!(w[0].p_rx_dbm < w[1].p_rx_dbm);
            prop_assert!(w[0].fraction < w[1].fraction);
        }
        prop_assert_eq!(cdf.last().unwrap().fraction, 1.0);
        for p in &cdf {
            let count = sorted.iter().filter(|v| **v <= p.p_rx_dbm).count() as f64;
            prop_assert!((p.fraction - count / n).abs() < 1e-12);
        }
    }

    #[test]
    fn association_ignores_common_offset(
        steps in prop::collection::vec(-560i32..-160, 1..8),
        offset_steps in -120i32..120,
    ) {
        // Quarter-dB grid keeps the shifted values exact.
        let powers: Vec<f64> = steps.iter().map(|s| *s as f64 * 0.25).collect();
        let offset = offset_steps as f64 * 0.25;
        let shifted: Vec<f64> = powers.iter().map(|p| p + offset).collect();
        let i = associate(&powers).unwrap();
        prop_assert!(powers.iter().all(|p| *p <= powers[i]));
        prop_assert_eq!(associate(&shifted).unwrap(), i);
    }
}
