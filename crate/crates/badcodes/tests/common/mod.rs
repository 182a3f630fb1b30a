//! Reference ensembles shared by the integration tests.

#![allow(dead_code)]

use badcodes::EdgeDistribution;

/// Right-regular (degree 10) relay ensemble with design rate near 1/2.
pub fn relay_reference() -> EdgeDistribution {
    EdgeDistribution::normalized(
        [
            (2, 0.2289),
            (3, 0.04532),
            (4, 0.2361),
            (23, 0.233),
            (24, 0.03178),
            (100, 0.2249),
        ]
        .into_iter()
        .collect(),
        [(10, 1.0)].into_iter().collect(),
    )
    .expect("relay reference ensemble is valid")
}

/// Right-regular (degree 6) interference ensemble.
pub fn interference_reference() -> EdgeDistribution {
    EdgeDistribution::normalized(
        [
            (2, 0.2949),
            (3, 0.2036),
            (10, 0.05943),
            (11, 0.0001219),
            (55, 0.2399),
            (56, 0.09542),
            (57, 0.1065),
        ]
        .into_iter()
        .collect(),
        [(6, 1.0)].into_iter().collect(),
    )
    .expect("interference reference ensemble is valid")
}

/// Binomial standard error of an empirical rate over `bits` observations.
pub fn binomial_se(p: f64, bits: f64) -> f64 {
    (p * (1.0 - p) / bits).sqrt()
}
