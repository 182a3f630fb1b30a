//! Stopping-set growth rate against a dense-grid oracle, and the bound
//! family on the reference relay ensemble.

mod common;

use badcodes::info_bounds::{
    binary_entropy, f_alpha, good_code_min_dhat2, good_code_quantization_mi, BoundContext,
};
use badcodes::EdgeDistribution;
use std::f64::consts::LN_2;

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Minimum of `f` over a box by repeated grid refinement around the best
/// grid point. Exact enough for smooth convex objectives.
fn grid_min_2d(f: impl Fn(f64, f64) -> f64, half: f64) -> f64 {
    let (mut cu, mut cv, mut h) = (0.0, 0.0, half);
    let k = 40i32;
    let mut best = f64::INFINITY;
    for _ in 0..14 {
        let step = h / k as f64;
        let (mut bu, mut bv) = (cu, cv);
        for a in -k..=k {
            for b in -k..=k {
                let (u, v) = (cu + a as f64 * step, cv + b as f64 * step);
                let val = f(u, v);
                if val < best {
                    best = val;
                    bu = u;
                    bv = v;
                }
            }
        }
        cu = bu;
        cv = bv;
        h = 4.0 * step;
    }
    best
}

fn grid_min_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut best = f64::INFINITY;
    for _ in 0..30 {
        let k = 200;
        let step = (hi - lo) / k as f64;
        let mut bx = lo;
        for j in 0..=k {
            let x = lo + j as f64 * step;
            let v = f(x);
            if v < best {
                best = v;
                bx = x;
            }
        }
        lo = bx - 2.0 * step;
        hi = bx + 2.0 * step;
    }
    best
}

/// Growth rate in bits by brute force over the edge fraction and both
/// log-coordinate infima.
fn f_alpha_oracle(ed: &EdgeDistribution, alpha: f64) -> f64 {
    let nodes: Vec<(f64, f64)> = ed
        .node_fractions()
        .into_iter()
        .map(|(i, f)| (i as f64, f))
        .collect();
    let d = ed.right_regular_degree().unwrap() as f64;
    let r = ed.design_rate();
    let gamma: f64 = nodes.iter().map(|(i, f)| i * f).sum();
    let fill = |rev: bool| {
        let mut order = nodes.clone();
        if rev {
            order.reverse();
        }
        let (mut left, mut beta) = (alpha, 0.0);
        for (i, f) in order {
            let take = left.min(f);
            beta += take * i;
            left -= take;
        }
        beta
    };
    let (bmin, bmax) = (fill(false), fill(true));
    let objective = |beta: f64| {
        let var = grid_min_2d(
            |u, v| nodes.iter().map(|(i, f)| f * softplus(u + i * v)).sum::<f64>() - alpha * u - beta * v,
            40.0,
        );
        let chk = grid_min_1d(
            |u| {
                let x = u.exp();
                (1.0 - r) * ((1.0 + x).powf(d) - d * x).ln() - beta * u
            },
            -40.0,
            10.0,
        );
        var + chk - gamma * binary_entropy(beta / gamma) * LN_2
    };
    let (mut lo, mut hi) = (bmin + 1e-9, bmax - 1e-9);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..4 {
        let k = 60;
        let step = (hi - lo) / k as f64;
        let mut bb = lo;
        for j in 0..=k {
            let b = lo + j as f64 * step;
            let v = objective(b);
            if v > best {
                best = v;
                bb = b;
            }
        }
        lo = (bb - 2.0 * step).max(bmin + 1e-9);
        hi = (bb + 2.0 * step).min(bmax - 1e-9);
    }
    best / LN_2
}

#[test]
fn growth_rate_matches_dense_grid_oracle() {
    let ed = EdgeDistribution::from_pairs(&[(2, 0.3), (3, 0.3), (5, 0.4)], &[(6, 1.0)]).unwrap();
    for alpha in [0.1, 0.3] {
        let got = f_alpha(&ed, alpha).unwrap();
        let want = f_alpha_oracle(&ed, alpha);
        assert!((got - want).abs() < 1e-4, "alpha {alpha}: {got} vs oracle {want}");
    }
    let regular = EdgeDistribution::regular(3, 6).unwrap();
    for alpha in [0.2, 0.98, 0.99] {
        let got = f_alpha(&regular, alpha).unwrap();
        let want = f_alpha_oracle(&regular, alpha);
        assert!((got - want).abs() < 1e-4, "regular at {alpha}: {got} vs oracle {want}");
    }
}

#[test]
fn growth_rate_is_continuous_in_alpha() {
    let ed = EdgeDistribution::regular(3, 6).unwrap();
    let coarse = (1..=95).map(|k| k as f64 / 100.0);
    let fine = (951..=990).map(|k| k as f64 / 1000.0);
    let alphas: Vec<f64> = coarse.chain(fine).collect();
    let values: Vec<f64> = alphas.iter().map(|&a| f_alpha(&ed, a).unwrap()).collect();
    for (w, a) in values.windows(2).zip(&alphas) {
        assert!((w[1] - w[0]).abs() < 5e-2, "jump after alpha {a}: {w:?}");
    }
}

#[test]
fn cycle_heavy_ensembles_have_many_large_stopping_sets() {
    let ed = EdgeDistribution::from_pairs(&[(2, 1.0)], &[(3, 1.0)]).unwrap();
    assert!(f_alpha(&ed, 0.95).unwrap() >= 0.0);
}

#[test]
fn reference_relay_bounds_are_ordered() {
    let ed = common::relay_reference();
    let ctx = BoundContext::new(&ed, 0.5, 0.82).unwrap();
    assert!(ctx.delta2_bp <= ctx.delta2);
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let mut prev = f64::INFINITY;
    for &s in &grid {
        let ip = ctx.i_plus(s);
        assert!(ip <= prev + 1e-12, "i_plus rises at {s}");
        assert!(ip <= ctx.i1_plus(s).min(ctx.i2_plus(s)) + 1e-12);
        prev = ip;
    }
    assert_eq!(ctx.min_quantization_noise(ctx.i_plus(0.0)), 0.0);
    assert_eq!(ctx.min_quantization_noise(0.0), 1.0);
    let bad = ctx.min_quantization_noise(0.9);
    let good = good_code_min_dhat2(0.5, 0.82, 0.9);
    assert!(bad < good, "bad-code noise {bad} should undercut good-code noise {good}");
    assert!(ctx.i_plus(bad) <= 0.9 + 1e-9);
    assert!((good_code_quantization_mi(0.5, 0.82, good) - 0.9).abs() < 1e-9);
}
