//! Structural properties of the rate benchmarks over parameter grids.

use badcodes::benchmarks::{
    biawgn_capacity, biawgn_mi, bitwise_interference_ber, bitwise_mmse, good_code_interference_bound,
    hk_badness_min_snr, hk_informations, mmse_curves, r_cf, r_df, r_df_ub, r_mud, r_sud, r_ub_good,
    shannon_limit_biawgn, InterferenceParams,
};
use badcodes::quadrature::DEFAULT_ORDER;
use badcodes::relay::RelayParams;

#[test]
fn capacity_derivative_is_half_the_mmse() {
    for k in 0..=40 {
        let snr = 0.1 * (100f64).powf(k as f64 / 40.0);
        let h = 1e-4 * snr;
        let slope = (biawgn_capacity(snr + h) - biawgn_capacity(snr - h)) / (2.0 * h);
        let want = 0.5 * bitwise_mmse(snr).unwrap() / std::f64::consts::LN_2;
        assert!((slope - want).abs() < 1e-4, "snr {snr}: {slope} vs {want}");
    }
}

#[test]
fn biawgn_information_is_increasing_and_bounded() {
    let mut prev = -1.0;
    for k in 0..=200 {
        let snr = k as f64 * 0.1;
        let mi = biawgn_mi(snr, DEFAULT_ORDER).unwrap();
        assert!(mi > prev || (k == 0 && mi.abs() < 1e-12));
        assert!(mi <= 1.0f64.min(0.5 * (1.0 + snr).log2()) + 1e-12);
        prev = mi;
    }
    assert!(biawgn_mi(1.0, 8).is_err());
}

#[test]
fn interference_rates_stay_below_the_interference_free_channel() {
    for h in [0.0, 0.2, 0.5, 0.839, 0.95] {
        for sigma in [0.5, 0.8, 1.075, 1.5] {
            let p = InterferenceParams::new(h, sigma).unwrap();
            let free = biawgn_mi(1.0 / (sigma * sigma), DEFAULT_ORDER).unwrap();
            let (mud, sud) = (r_mud(&p).unwrap(), r_sud(&p).unwrap());
            assert!(mud <= free + 1e-9 && sud <= free + 1e-9, "h {h}, sigma {sigma}");
            assert_eq!(good_code_interference_bound(&p).unwrap(), mud.max(sud));
            let ber = bitwise_interference_ber(&p).unwrap();
            assert!((0.0..=0.5 + 1e-12).contains(&ber));
        }
    }
    let quiet = InterferenceParams::new(0.6, 0.02).unwrap();
    assert!(bitwise_interference_ber(&quiet).unwrap() < 1e-9);
}

#[test]
fn relay_benchmarks_are_ordered() {
    for d2 in [0.0, 0.2, 0.5, 0.8] {
        for d3 in [0.0, 0.3, 0.82, 1.0] {
            for c_o in [0.0, 0.3, 0.9, 2.0] {
                let p = RelayParams::new(d2, d3, c_o, 0.0).unwrap();
                let cf = r_cf(&p);
                assert!(cf >= 1.0 - d3 - 1e-12);
                assert!(cf <= 1.0 - d2 * d3 + 1e-12);
                assert!(r_df(&p) <= r_df_ub(&p) + c_o + 1e-12);
                assert!(r_df(&p) <= 1.0 - d2 + 1e-12);
                let ub = r_ub_good(&p);
                assert_eq!(ub.value, cf);
            }
        }
    }
}

#[test]
fn good_code_mmse_collapses_below_the_shannon_limit() {
    let grid: Vec<f64> = (0..=60).map(|k| k as f64 * 0.05).collect();
    let rows = mmse_curves(&grid, 0.5).unwrap();
    let star = shannon_limit_biawgn(0.5).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].uncoded <= w[0].uncoded + 1e-12);
    }
    for r in &rows {
        if r.snr < star {
            assert_eq!(r.good_code, r.uncoded);
        } else {
            assert_eq!(r.good_code, 0.0);
        }
    }
}

#[test]
fn hk_threshold_is_the_smallest_feasible_snr() {
    let (s, t, pu) = (0.101, 0.231, 0.055);
    let snr = hk_badness_min_snr(s, t, pu).unwrap();
    let feasible = |x: f64| {
        let (iu, iw, iuw) = hk_informations(x, pu).unwrap();
        s <= iu + 1e-9 && t <= iw + 1e-9 && s + t <= iuw + 1e-9
    };
    assert!(feasible(snr * (1.0 + 1e-6)));
    assert!(!feasible(snr * (1.0 - 1e-3)));
    assert_eq!(hk_badness_min_snr(0.0, 0.0, pu).unwrap(), 0.0);
}
