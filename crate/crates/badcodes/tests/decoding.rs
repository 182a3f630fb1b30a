//! Cross-checks between the erasure decoders, the graph sampler and
//! point-to-point density evolution on longer blocks.

mod common;

use badcodes::bec_bp::{bp_decode, map_erase_decode, peeling_decode};
use badcodes::density_evolution::de_bec;
use badcodes::ensemble::{is_stopping_set, sample_graph};
use badcodes::erasure::{erasure_rate, is_degraded, sample_bec, sample_noise};
use badcodes::{EdgeDistribution, ErasureWord, Stream, Sym, TannerGraph};
use proptest::prelude::*;

fn mixed_ensembles() -> Vec<EdgeDistribution> {
    vec![
        EdgeDistribution::regular(3, 6).unwrap(),
        EdgeDistribution::from_pairs(&[(2, 0.25), (3, 0.45), (6, 0.3)], &[(5, 0.4), (7, 0.6)]).unwrap(),
        EdgeDistribution::from_pairs(&[(2, 0.5), (4, 0.5)], &[(4, 1.0)]).unwrap(),
        common::relay_reference(),
    ]
}

/// All codewords of a small graph by exhaustive search.
fn codewords(g: &TannerGraph) -> Vec<Vec<u8>> {
    let n = g.n();
    assert!(n <= 20);
    let checks: Vec<Vec<usize>> = (0..g.m()).map(|c| g.check_neighbors(c)).collect();
    (0u32..1 << n)
        .filter(|w| {
            checks
                .iter()
                .all(|vs| vs.iter().map(|&v| (w >> v) & 1).sum::<u32>() % 2 == 0)
        })
        .map(|w| (0..n).map(|v| ((w >> v) & 1) as u8).collect())
        .collect()
}

fn erase_where(word: &[u8], mask: &ErasureWord) -> ErasureWord {
    ErasureWord::new(
        word.iter()
            .zip(mask.symbols())
            .map(|(&b, s)| if s.is_erased() { Sym::Erased } else { Sym::from_bit(b) })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decoders_nest_on_mixed_ensembles(seed in any::<u64>(), which in 0usize..4, delta in 0.05f64..0.8) {
        let ed = &mixed_ensembles()[which];
        let n = if which == 3 { 500 } else { 240 };
        let mut rng = Stream::new(seed);
        let g = sample_graph(ed, n, &mut rng).unwrap();
        let y = sample_noise(n, delta, &mut rng).unwrap();
        let bp = bp_decode(&g, &y, n).unwrap().decisions;
        let peel = peeling_decode(&g, &y).unwrap();
        let map = map_erase_decode(&g, &y).unwrap();
        prop_assert_eq!(&bp, &peel);
        prop_assert!(is_degraded(&y, &bp).unwrap());
        prop_assert!(is_degraded(&bp, &map).unwrap());
        prop_assert!(is_stopping_set(&g, &peel.erasure_positions()));
    }

    #[test]
    fn nonzero_codewords_leave_the_same_erasures(seed in any::<u64>(), delta in 0.1f64..0.7) {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let mut rng = Stream::new(seed);
        let g = sample_graph(&ed, 16, &mut rng).unwrap();
        let words = codewords(&g);
        prop_assert!(words.len() >= 1 << (g.n() - g.m()));
        let mask = sample_noise(g.n(), delta, &mut rng).unwrap();
        let zero = bp_decode(&g, &mask, 16).unwrap().decisions;
        for w in words.iter().skip(1).take(8) {
            let y = erase_where(w, &mask);
            let out = bp_decode(&g, &y, 16).unwrap().decisions;
            prop_assert_eq!(out.erasure_positions(), zero.erasure_positions());
            for (v, s) in out.symbols().iter().enumerate() {
                if let Some(b) = s.bit() {
                    prop_assert_eq!(b, w[v]);
                }
            }
            let map = map_erase_decode(&g, &y).unwrap();
            prop_assert_eq!(map.erasure_positions(), map_erase_decode(&g, &mask).unwrap().erasure_positions());
        }
    }
}

#[test]
fn bp_follows_density_evolution_on_a_long_block() {
    let ed = EdgeDistribution::regular(3, 6).unwrap();
    let n = 40_000;
    let mut rng = Stream::new(2024);
    let g = sample_graph(&ed, n, &mut rng).unwrap();
    for delta in [0.35, 0.45] {
        let x = ErasureWord::zeros(n);
        let y = sample_bec(&x, delta, &mut rng).unwrap();
        for t in [1, 2, 5, 20] {
            let bp = bp_decode(&g, &y, t).unwrap().decisions;
            let de = de_bec(&ed, delta, t).unwrap().final_bit_erasure;
            let got = erasure_rate(&bp);
            assert!(
                (got - de).abs() < 1e-2,
                "delta {delta}, t {t}: BP {got} vs DE {de}"
            );
        }
    }
}

#[test]
fn reference_relay_graph_decodes_below_its_threshold() {
    let ed = common::relay_reference();
    let n = 20_000;
    let mut rng = Stream::new(7);
    let g = sample_graph(&ed, n, &mut rng).unwrap();
    let y = sample_noise(n, 0.3, &mut rng).unwrap();
    let out = peeling_decode(&g, &y).unwrap();
    let de = de_bec(&ed, 0.3, 2000).unwrap().final_bit_erasure;
    assert!(de < 1e-6, "DE predicts {de}");
    assert!(erasure_rate(&out) < 1e-2, "residual {}", erasure_rate(&out));
}
