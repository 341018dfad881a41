use proptest::prelude::*;

use hapsnet::channel::{fspl, los_probability, total_path_loss, ChannelScenario};
use hapsnet::config::RunConfig;
use hapsnet::link_budget::received_power;
use hapsnet::rng::{substream, DOMAIN_CHANNEL};
use hapsnet::Band;

fn scenario() -> impl Strategy<Value = ChannelScenario> {
    prop::sample::select(ChannelScenario::ALL.to_vec())
}

fn band() -> impl Strategy<Value = Band> {
    prop::sample::select(vec![Band::S, Band::Ka])
}

proptest! {
    #[test]
    fn path_loss_never_beats_free_space(
        sc in scenario(),
        b in band(),
        elev in 0.0..=90.0f64,
        dist in 17_000.0..500_000.0f64,
        seed in any::<u64>(),
    ) {
        let cfg = RunConfig::defaults();
        let profile = cfg.channel_profile(sc, b).unwrap();
        let f = cfg.bands.get(b).freq_ghz;
        let mut rng = substream(seed, DOMAIN_CHANNEL, 0, 0);
        let draw = total_path_loss(&profile, f, elev, dist, &mut rng).unwrap();
        prop_assert!(draw.total_pl_db - draw.shadow_db >= draw.fspl_db - 1e-12);
        prop_assert_eq!(draw.fspl_db, fspl(f, dist).unwrap());
        if draw.is_los {
            prop_assert_eq!(draw.clutter_db, 0.0);
        }
    }

    #[test]
    fn zero_sigma_loss_increases_with_distance(
        sc in scenario(),
        b in band(),
        elev in 0.0..=90.0f64,
        dist in 17_000.0..500_000.0f64,
        extra in 1.0..100_000.0f64,
        seed in any::<u64>(),
    ) {
        let cfg = RunConfig::defaults();
        let mut profile = cfg.channel_profile(sc, b).unwrap();
        profile.shadow_sigma_los_db = 0.0;
        profile.shadow_sigma_nlos_db = 0.0;
        let f = cfg.bands.get(b).freq_ghz;
        // Same stream, so both draws see the same LoS state.
        let near = total_path_loss(&profile, f, elev, dist, &mut substream(seed, DOMAIN_CHANNEL, 1, 2)).unwrap();
        let far = total_path_loss(&profile, f, elev, dist + extra, &mut substream(seed, DOMAIN_CHANNEL, 1, 2)).unwrap();
        prop_assert_eq!(near.is_los, far.is_los);
        prop_assert!(far.total_pl_db > near.total_pl_db);
    }

    #[test]
    fn eirp_offset_is_additive(
        eirp in 40.0..100.0f64,
        delta in -20.0..20.0f64,
        gain in -10.0..50.0f64,
        pl in 100.0..250.0f64,
    ) {
        let shifted = received_power(eirp + delta, gain, pl) - received_power(eirp, gain, pl);
        prop_assert!((shifted - delta).abs() < 1e-9);
    }

    #[test]
    fn shipped_los_probability_is_monotone(
        sc in scenario(),
        a in 0.0..=90.0f64,
        b in 0.0..=90.0f64,
    ) {
        let profile = RunConfig::defaults().channel_profile(sc, Band::S).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (pl, ph) = (los_probability(&profile, lo).unwrap(), los_probability(&profile, hi).unwrap());
        prop_assert!((0.0..=1.0).contains(&pl));
        prop_assert!(pl <= ph);
    }
}
