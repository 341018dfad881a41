use proptest::prelude::*;

use hapsnet::config::{RunConfig, TimelineKind};
use hapsnet::disaster::{
    resilience_metrics, run_timeline, EventKind, Methodology, ScenarioEvent, TimelineResult,
};
use hapsnet::policy::Action;

/// Small disaster run assembled from the shipped defaults.
fn toy(
    sites: usize,
    haps: usize,
    methodology: Methodology,
    events: Vec<ScenarioEvent>,
    seed: u64,
) -> TimelineResult {
    let mut cfg = RunConfig::defaults();
    cfg.seed = seed;
    cfg.network.sites = sites;
    cfg.network.total_users = 100 * sites as u64;
    cfg.network.haps_capacity_users = 100 * sites as u64;
    let section = cfg.section_mut(TimelineKind::Disaster);
    section.methodology = methodology;
    section.haps_count = haps;
    section.haps_initially_available = false;
    section.horizon_h = 24.0;
    section.events = events;
    let setup = cfg.timeline_setup(TimelineKind::Disaster).unwrap();
    run_timeline(setup.sites, setup.haps, &setup.events, &setup.config).unwrap()
}

fn ev(t: f64, kind: EventKind) -> ScenarioEvent {
    ScenarioEvent::new(t, kind)
}

#[test]
fn nominal_network_is_fully_covered() {
    let r = toy(8, 0, Methodology::InDisaster, vec![], 1);
    assert!(r.rows.iter().all(|row| row.coverage_ratio == 1.0));
}

#[test]
fn quarter_failure_without_haps_leaves_three_quarters() {
    let r = toy(
        4,
        0,
        Methodology::InDisaster,
        vec![ev(0.0, EventKind::BsFailFraction { fraction: 0.25 })],
        1,
    );
    assert_eq!(r.rows[0].coverage_ratio, 0.75);
    assert_eq!(r.site_ticks_at(0).iter().filter(|s| s.failed).count(), 1);
}

#[test]
fn one_haps_restores_quarter_failure_at_once() {
    let r = toy(
        4,
        1,
        Methodology::InDisaster,
        vec![
            ev(0.0, EventKind::BsFailFraction { fraction: 0.25 }),
            ev(0.0, EventKind::HapsUp { haps: None }),
        ],
        1,
    );
    assert_eq!(r.rows[0].coverage_ratio, 1.0);
    assert_eq!(r.rows[0].served.haps_ran, 100);
    assert_eq!(r.rows[0].served.gbs, 300);
}

#[test]
fn battery_ends_outage_where_it_started_when_haps_covers_it() {
    let events = vec![
        ev(0.0, EventKind::HapsUp { haps: None }),
        ev(2.0, EventKind::GridOutage { sites: None }),
        ev(14.0, EventKind::GridRestore { sites: None }),
    ];
    let r = toy(6, 1, Methodology::InDisaster, events, 5);
    let tick_at = |t: f64| {
        r.rows
            .iter()
            .position(|row| (row.time_h - t).abs() < 1e-9)
            .unwrap()
    };
    let (start, end) = (tick_at(2.0), tick_at(14.0));
    for site in 0..r.n_sites {
        let before = r.site_ticks_at(start)[site].soc_before;
        let after = r.site_ticks_at(end - 1)[site].soc;
        assert_eq!(before, after, "site {site}");
        for t in start..end {
            let st = &r.site_ticks_at(t)[site];
            assert_eq!(st.decision.unwrap().action, Action::RadioOffServeViaHaps);
            assert_eq!(st.ledger.bess_discharge_kwh, 0.0);
        }
    }
}

#[test]
fn metrics_match_an_independent_pass() {
    let r = toy(
        10,
        1,
        Methodology::InDisaster,
        vec![
            ev(0.0, EventKind::BsFailFraction { fraction: 0.3 }),
            ev(0.0, EventKind::GridOutage { sites: None }),
            ev(5.0, EventKind::HapsUp { haps: None }),
            ev(12.0, EventKind::BsFailFraction { fraction: 0.5 }),
        ],
        2,
    );
    let m = resilience_metrics(&r).unwrap();
    let mut unserved_h = 0.0;
    let mut min: f64 = 1.0;
    for row in &r.rows {
        let served: u64 = r
            .site_ticks_at(row.tick)
            .iter()
            .map(|s| s.served.total())
            .sum();
        let ratio = served as f64 / r.total_users as f64;
        unserved_h += (r.total_users - served) as f64 * r.dt_h;
        min = min.min(ratio);
    }
    assert!((m.unserved_user_hours - unserved_h).abs() < 1e-9);
    assert!((m.min_coverage_ratio - min).abs() < 1e-9);
    let load: f64 = r.site_ticks.iter().map(|s| s.ledger.load_kwh).sum();
    assert!((m.energy.load_kwh - load).abs() < 1e-9);
}

fn event_kind() -> impl Strategy<Value = EventKind> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(|fraction| EventKind::BsFailFraction { fraction }),
        Just(EventKind::GridOutage { sites: None }),
        Just(EventKind::GridRestore { sites: None }),
        Just(EventKind::BackboneCut {
            sites: Some(vec![0, 1])
        }),
        (0.0..4.0f64).prop_map(|hours| EventKind::FuelDelivery { sites: None, hours }),
        Just(EventKind::HapsDown { haps: None }),
        Just(EventKind::SatUp),
    ]
}

fn events() -> impl Strategy<Value = Vec<ScenarioEvent>> {
    prop::collection::vec((0.0..24.0f64, event_kind()), 0..8).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter()
            .map(|(t, k)| ScenarioEvent::new(t, k))
            .collect()
    })
}

fn methodology() -> impl Strategy<Value = Methodology> {
    prop::sample::select(vec![Methodology::None, Methodology::InDisaster])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn served_plus_unserved_is_total(evs in events(), m in methodology(), seed in any::<u64>()) {
        let r = toy(7, 1, m, evs, seed);
        for row in &r.rows {
            prop_assert_eq!(row.served.total() + row.unserved, row.total_users);
            prop_assert!((0.0..=1.0).contains(&row.coverage_ratio));
        }
        for st in &r.site_ticks {
            prop_assert!(st.ledger.imbalance().abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&st.soc));
        }
    }

    #[test]
    fn haps_up_never_adds_unserved_hours(
        evs in events(),
        t_up in 0.0..24.0f64,
        seed in any::<u64>(),
    ) {
        let without = toy(7, 1, Methodology::InDisaster, evs.clone(), seed);
        let mut with_evs = evs;
        with_evs.push(ScenarioEvent::new(t_up, EventKind::HapsUp { haps: None }));
        with_evs.sort_by(|a, b| a.time_h.total_cmp(&b.time_h));
        let with = toy(7, 1, Methodology::InDisaster, with_evs, seed);
        let a = resilience_metrics(&without).unwrap().unserved_user_hours;
        let b = resilience_metrics(&with).unwrap().unserved_user_hours;
        prop_assert!(b <= a + 1e-9, "with HAPS {} > without {}", b, a);
    }

    #[test]
    fn timelines_are_deterministic(evs in events(), m in methodology(), seed in any::<u64>()) {
        prop_assert_eq!(toy(5, 1, m, evs.clone(), seed), toy(5, 1, m, evs, seed));
    }
}
