//! Gauss–Hermite expectations over Gaussian noise and mutual information
//! of finite-alphabet inputs in additive Gaussian noise.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

/// Default quadrature order.
pub const DEFAULT_ORDER: usize = 96;
/// Smallest order accepted.
pub const MIN_ORDER: usize = 16;

type Rule = Arc<Vec<(f64, f64)>>;

/// Nodes and weights for `E[f(Z)]`, `Z ~ N(0, 1)`, cached per order.
fn rule(order: usize) -> Result<Rule> {
    if order < MIN_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {order} is below the minimum {MIN_ORDER}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    let entry = map.entry(order).or_insert_with(|| {
        let gh = GaussHermite::new(NonZeroUsize::new(order).expect("order is positive"));
        let scale = 1.0 / PI.sqrt();
        Arc::new(
            gh.as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| (SQRT_2 * x, w * scale))
                .collect(),
        )
    });
    Ok(Arc::clone(entry))
}

/// `E[f(Z)]` for standard normal `Z`.
pub fn gaussian_expectation(order: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    Ok(rule(order)?.iter().map(|&(z, w)| w * f(z)).sum())
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// `I(S; S + Z)` in bits for `S` taking value `s_k` with probability
/// `p_k` and `Z ~ N(0, sigma^2)`.
pub fn discrete_input_mi(points: &[(f64, f64)], sigma: f64, order: usize) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let r = rule(order)?;
    let two_var = 2.0 * sigma * sigma;
    let mut total = 0.0;
    for &(p, s) in points.iter().filter(|pt| pt.0 > 0.0) {
        let inner: f64 = r
            .iter()
            .map(|&(z, w)| {
                let y = s + sigma * z;
                let own = (y - s).powi(2);
                // log2 of p(y) / N(y; s): log-sum-exp over the alphabet.
                let exps: Vec<f64> = points
                    .iter()
                    .filter(|pt| pt.0 > 0.0)
                    .map(|&(q, t)| q.ln() - ((y - t).powi(2) - own) / two_var)
                    .collect();
                let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln();
                w * lse
            })
            .sum();
        total -= p * inner;
    }
    Ok(total / std::f64::consts::LN_2)
}
