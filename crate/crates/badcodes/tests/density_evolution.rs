//! Density evolution against Monte-Carlo decoding and against its own
//! structural identities on the reference relay ensemble.

mod common;

use badcodes::benchmarks::erasure_curves;
use badcodes::density_evolution::{de_bec, de_threshold, sim_de_sweep, sim_de_with, SimDeOptions};
use badcodes::info_bounds::pmap_good;
use badcodes::relay::{run_campaign, GraphSource, RelayParams};
use badcodes::EdgeDistribution;

fn exact(t: usize) -> SimDeOptions {
    SimDeOptions { t_max: t, tol: 0.0 }
}

#[test]
fn sim_bp_campaign_tracks_sim_de() {
    let ed = EdgeDistribution::regular(3, 6).unwrap();
    let (d2, d3, dhat2) = (0.45, 0.6, 0.15);
    let p = RelayParams::new(d2, d3, 1.0, dhat2).unwrap();
    for t in [1, 3, 10] {
        let de = sim_de_with(&ed, d2, d3, dhat2, exact(t)).unwrap();
        let rep = run_campaign(GraphSource::Ensemble(&ed, 20_000), &p, t, 8, 99).unwrap();
        assert!(
            (rep.simbp.mean - de.pe_final).abs() < 1e-2,
            "t {t}: sim-BP {} vs sim-DE {}",
            rep.simbp.mean,
            de.pe_final
        );
        let relay_de = de_bec(&ed, d2, t).unwrap().final_bit_erasure;
        assert!((rep.relay.mean - relay_de).abs() < 1e-2);
        assert_eq!(rep.violations, 0);
    }
}

#[test]
fn reference_relay_marginal_is_point_to_point_de() {
    let ed = common::relay_reference();
    let r = sim_de_with(&ed, 0.5, 0.82, 0.212, exact(200)).unwrap();
    let de = de_bec(&ed, 0.5, 200).unwrap();
    for (p, x) in r.rightbound.iter().zip(&de.per_iteration) {
        assert!((p.relay_erasure() - x).abs() < 1e-12);
    }
    for p in r.rightbound.iter().chain(&r.leftbound) {
        assert!((p.total() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn destination_erasure_is_monotone_in_quantization_noise() {
    let ed = common::relay_reference();
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let pe = sim_de_sweep(&ed, 0.5, 0.82, &grid, exact(300)).unwrap();
    for w in pe.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{w:?}");
    }
    let alone = de_bec(&ed, 0.82, 300).unwrap().final_bit_erasure;
    assert!((pe[40] - alone).abs() < 1e-12);
}

#[test]
fn thresholds_respect_capacity() {
    for ed in [
        EdgeDistribution::regular(3, 6).unwrap(),
        EdgeDistribution::regular(4, 8).unwrap(),
        common::relay_reference(),
        common::interference_reference(),
    ] {
        let th = de_threshold(&ed);
        assert!(th <= 1.0 - ed.design_rate() + 1e-5, "threshold {th} above capacity");
        assert!(de_bec(&ed, th - 1e-3, 5000).unwrap().final_bit_erasure < 1e-6);
        assert!(de_bec(&ed, th + 1e-3, 5000).unwrap().final_bit_erasure > 1e-4);
    }
}

#[test]
fn erasure_figure_rows_combine_the_three_curves() {
    let ed = EdgeDistribution::regular(3, 6).unwrap();
    let grid = [0.1, 0.3, 0.45, 0.7];
    let rows = erasure_curves(&ed, &grid, 500).unwrap();
    for (row, &d) in rows.iter().zip(&grid) {
        assert_eq!(row.uncoded, d);
        assert_eq!(row.bp, de_bec(&ed, d, 500).unwrap().final_bit_erasure);
        assert_eq!(row.good_code, pmap_good(d, 0.5).ok());
        assert!(row.bp <= row.uncoded + 1e-12);
    }
    let at_limit = erasure_curves(&ed, &[0.5], 10).unwrap();
    assert_eq!(at_limit[0].good_code, None);
}
