use proptest::prelude::*;

use hapsnet::policy::{decide_indisaster, decide_predisaster, Action, GbsStatus, Thresholds};

fn status() -> impl Strategy<Value = GbsStatus> {
    (
        prop::array::uniform6(any::<bool>()),
        0.0..=1.5f64,
        0.0..=1.0f64,
        0.0..0.5f64,
        prop_oneof![Just(0.0), 0.0..5.0f64],
    )
        .prop_map(|(b, load, soc, reserve_soc, fuel)| GbsStatus {
            radio_on: b[0],
            grid_ok: b[1],
            backbone_ok: b[2],
            haps_available: b[3],
            satellite_available: b[4],
            load,
            soc,
            reserve_soc,
            generator_fuel_h: fuel,
            ev_inbound: b[5],
        })
}

fn thresholds() -> impl Strategy<Value = Thresholds> {
    (0.0..0.3f64, 0.01..0.3f64, 0.0..0.6f64).prop_map(|(low, gap, high)| Thresholds {
        rho_low: low,
        rho_wake: low + gap,
        rho_high: low + gap + high,
    })
}

proptest! {
    #[test]
    fn decisions_are_deterministic(s in status(), th in thresholds()) {
        prop_assert_eq!(decide_indisaster(&s), decide_indisaster(&s));
        if s.grid_ok {
            prop_assert_eq!(decide_predisaster(&s, &th).unwrap(), decide_predisaster(&s, &th).unwrap());
        } else {
            prop_assert!(decide_predisaster(&s, &th).is_err());
        }
    }

    #[test]
    fn battery_untouched_while_haps_covers_power_loss(s in status()) {
        prop_assume!(!s.grid_ok && s.haps_available);
        let d = decide_indisaster(&s);
        prop_assert_eq!(d.action, Action::RadioOffServeViaHaps);
        prop_assert!(d.directives.preserve_bess);
        prop_assert!(!d.directives.run_generator);
    }

    #[test]
    fn constant_load_never_toggles_on_consecutive_ticks(
        s in status(),
        th in thresholds(),
        ticks in 2usize..50,
    ) {
        let mut st = s;
        st.grid_ok = true;
        let mut sleeping = Vec::new();
        for _ in 0..ticks {
            let a = decide_predisaster(&st, &th).unwrap().action;
            st.radio_on = a.radio_on();
            sleeping.push(!st.radio_on);
        }
        let toggles: Vec<usize> = sleeping
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(i, _)| i)
            .collect();
        // Settles after at most one change and never flips back.
        prop_assert!(toggles.len() <= 1, "toggles at {:?}", toggles);
    }

    #[test]
    fn invalid_thresholds_are_rejected(low in 0.0..1.0f64, wake in 0.0..1.0f64, high in 0.0..1.0f64) {
        let th = Thresholds { rho_low: low, rho_wake: wake, rho_high: high };
        let ok = low < wake && wake <= high;
        prop_assert_eq!(th.validate().is_ok(), ok);
    }
}
