//! Closed-form and quadrature benchmarks: relay rates, BIAWGN capacity and
//! Shannon limits, bitwise MMSE, interference-channel detection rates, the
//! Han–Kobayashi badness check and the bitwise interference error rate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::density_evolution::de_bec;
use crate::ensemble::EdgeDistribution;
use crate::erasure::{check_probability, circ};
use crate::error::{Error, Result};
use crate::info_bounds::{first_feasible, good_code_quantization_mi, pmap_good};
use crate::parallel;
use crate::quadrature::{discrete_input_mi, gaussian_expectation, softplus, DEFAULT_ORDER};
use crate::relay::RelayParams;

/// Symmetric BIAWGN interference channel `Y1 = X1 + h X2 + Z1`,
/// `Z1 ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    /// Cross gain. Zero decouples the users.
    pub h: f64,
    /// Noise standard deviation.
    pub sigma: f64,
}

impl InterferenceParams {
    pub fn new(h: f64, sigma: f64) -> Result<Self> {
        let p = InterferenceParams { h, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.h) {
            return Err(Error::InvalidArgument(format!(
                "cross gain must lie in [0, 1), got {}",
                self.h
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise deviation must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Single-user SNR `1 / sigma^2`.
    pub fn snr(&self) -> f64 {
        1.0 / (self.sigma * self.sigma)
    }
}

/// A named benchmark value with its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub name: String,
    pub value: f64,
    pub inputs: BTreeMap<String, f64>,
    /// True when the value rests on unproven conjectures.
    pub conditional: bool,
}

impl RateReport {
    fn new(name: &str, value: f64, inputs: &[(&str, f64)]) -> Self {
        RateReport {
            name: name.into(),
            value,
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            conditional: false,
        }
    }
}

/// Decode-and-forward rate `min(1 - delta2, 1 - delta3 + C_o)`.
pub fn r_df(p: &RelayParams) -> f64 {
    (1.0 - p.delta2).min(1.0 - p.delta3 + p.c_o)
}

/// Smallest quantization noise meeting the compress-and-forward constraint.
pub fn cf_dhat2(p: &RelayParams) -> f64 {
    first_feasible(
        |s| good_code_quantization_mi(p.delta2, p.delta3, s),
        p.c_o,
        4096,
    )
}

/// Compress-and-forward rate `1 - (delta2 o dhat2*) delta3`.
pub fn r_cf(p: &RelayParams) -> f64 {
    1.0 - circ(p.delta2, cf_dhat2(p)) * p.delta3
}

/// Upper bound on decode-and-forward with point-to-point relay codes.
pub fn r_df_ub(p: &RelayParams) -> f64 {
    1.0 - p.delta2
}

/// Upper bound for good codes, equal to the compress-and-forward rate.
pub fn r_ub_good(p: &RelayParams) -> RateReport {
    let mut r = RateReport::new("R_UB", r_cf(p), &relay_inputs(p));
    r.conditional = true;
    r
}

fn relay_inputs(p: &RelayParams) -> [(&'static str, f64); 3] {
    [("delta2", p.delta2), ("delta3", p.delta3), ("c_o", p.c_o)]
}

/// All relay benchmarks as reports.
pub fn relay_reports(p: &RelayParams) -> Vec<RateReport> {
    let inputs = relay_inputs(p);
    vec![
        RateReport::new("R_DF", r_df(p), &inputs),
        RateReport::new("R_CF", r_cf(p), &inputs),
        RateReport::new("R_DF-UB", r_df_ub(p), &inputs),
        r_ub_good(p),
    ]
}

/// `I(X; X + Z)` in bits for uniform `X` in {-1, +1} and `Z ~ N(0, 1/snr)`.
pub fn biawgn_mi(snr: f64, order: usize) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::InvalidArgument(format!("snr must be non-negative, got {snr}")));
    }
    let s = snr.sqrt();
    let loss = gaussian_expectation(order, |z| softplus(-2.0 * snr - 2.0 * s * z))?;
    Ok((1.0 - loss / std::f64::consts::LN_2).clamp(0.0, 1.0))
}

/// BIAWGN capacity with the default quadrature order.
pub fn biawgn_capacity(snr: f64) -> f64 {
    biawgn_mi(snr, DEFAULT_ORDER).expect("default order is valid and snr is checked by callers")
}

/// Minimal SNR at which the BIAWGN capacity reaches `rate`.
pub fn shannon_limit_biawgn(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!("rate must lie in (0,1), got {rate}")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while biawgn_mi(hi, DEFAULT_ORDER)? < rate {
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if biawgn_mi(mid, DEFAULT_ORDER)? < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Maximal erasure probability at which the BEC capacity reaches `rate`.
pub fn shannon_limit_bec(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidArgument(format!("rate must lie in (0,1), got {rate}")));
    }
    Ok(1.0 - rate)
}

/// MMSE of a uniform +-1 symbol observed as `sqrt(snr) X + Z`:
/// `1 - E[tanh(snr + sqrt(snr) Z)]`.
pub fn bitwise_mmse(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::InvalidArgument(format!("snr must be non-negative, got {snr}")));
    }
    let s = snr.sqrt();
    let e = gaussian_expectation(DEFAULT_ORDER, |z| (snr + s * z).tanh())?;
    Ok((1.0 - e).clamp(0.0, 1.0))
}

/// One row of the MMSE figure data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseRow {
    pub snr: f64,
    pub uncoded: f64,
    pub good_code: f64,
}

/// Uncoded MMSE, and the good-code MMSE which equals it below the Shannon
/// limit of `rate` and vanishes above it.
pub fn mmse_curves(snr_grid: &[f64], rate: f64) -> Result<Vec<MmseRow>> {
    let star = shannon_limit_biawgn(rate)?;
    parallel::map_slice(snr_grid, |&snr| {
        let u = bitwise_mmse(snr)?;
        Ok(MmseRow {
            snr,
            uncoded: u,
            good_code: if snr < star { u } else { 0.0 },
        })
    })
    .into_iter()
    .collect()
}

/// One row of the erasure-rate figure data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureRow {
    pub delta: f64,
    pub uncoded: f64,
    /// `None` at the threshold, where the limit is undefined.
    pub good_code: Option<f64>,
    pub bp: f64,
}

/// Erasure rate after decoding versus channel erasure probability.
pub fn erasure_curves(ed: &EdgeDistribution, grid: &[f64], t: usize) -> Result<Vec<ErasureRow>> {
    let rate = ed.design_rate();
    parallel::map_slice(grid, |&delta| {
        check_probability(delta)?;
        Ok(ErasureRow {
            delta,
            uncoded: delta,
            good_code: pmap_good(delta, rate).ok(),
            bp: de_bec(ed, delta, t)?.final_bit_erasure,
        })
    })
    .into_iter()
    .collect()
}

/// `I(X1, X2; Y1)` in bits.
pub fn joint_mi(p: &InterferenceParams) -> Result<f64> {
    let pts: Vec<(f64, f64)> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|&(a, b)| (0.25, a + p.h * b))
        .collect();
    discrete_input_mi(&pts, p.sigma, DEFAULT_ORDER)
}

/// `I(X2; Y1 | X1)` in bits.
pub fn interference_given_primary_mi(p: &InterferenceParams) -> Result<f64> {
    discrete_input_mi(&[(0.5, p.h), (0.5, -p.h)], p.sigma, DEFAULT_ORDER)
}

/// Multiuser-detection rate `min(I(X2; Y1 | X1), I(X1, X2; Y1) / 2)`.
pub fn r_mud(p: &InterferenceParams) -> Result<f64> {
    p.validate()?;
    Ok(interference_given_primary_mi(p)?.min(0.5 * joint_mi(p)?))
}

/// Single-user-detection rate `I(X1; Y1)`.
pub fn r_sud(p: &InterferenceParams) -> Result<f64> {
    p.validate()?;
    Ok((joint_mi(p)? - interference_given_primary_mi(p)?).max(0.0))
}

/// Equal-rate bound for good codes: `max(R_MUD, R_SUD)`.
pub fn good_code_interference_bound(p: &InterferenceParams) -> Result<f64> {
    Ok(r_mud(p)?.max(r_sud(p)?))
}

/// Mutual informations `(I(U; Y | W), I(W; Y | U), I(U, W; Y))` for
/// `U ~ Bernoulli(p_u)`, `W ~ Bernoulli(1/2)` and `Y = BPSK(U xor W) + Z`
/// with `Z ~ N(0, 1/snr)`.
pub fn hk_informations(snr: f64, p_u: f64) -> Result<(f64, f64, f64)> {
    if snr <= 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let sigma = 1.0 / snr.sqrt();
    let u = discrete_input_mi(&[(1.0 - p_u, 1.0), (p_u, -1.0)], sigma, DEFAULT_ORDER)?;
    let c = biawgn_mi(snr, DEFAULT_ORDER)?;
    Ok((u, c, c))
}

/// Minimal SNR at which the split `(S, T)` with private-part law
/// `Bernoulli(p_u)` satisfies `S <= I(U;Y|W)`, `T <= I(W;Y|U)` and
/// `S + T <= I(U,W;Y)`.
pub fn hk_badness_min_snr(s: f64, t: f64, p_u: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidArgument("rate splits must be non-negative".into()));
    }
    if !(p_u > 0.0 && p_u < 1.0) {
        return Err(Error::InvalidArgument(format!("p_u must lie in (0,1), got {p_u}")));
    }
    let feasible = |snr: f64| -> Result<bool> {
        let (iu, iw, iuw) = hk_informations(snr, p_u)?;
        Ok(s <= iu && t <= iw && s + t <= iuw)
    };
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let cap = 1e3;
    if !feasible(cap)? {
        return Err(Error::Infeasible);
    }
    let (mut lo, mut hi) = (0.0, cap);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Symbolwise MAP error probability for `X2` from `Y1 = X1 + h X2 + Z1`
/// with `X1` uniform and unknown. Decision boundaries are the sign changes
/// of the likelihood difference, located on a fine grid and bisected; the
/// error is then a finite sum of Gaussian interval masses.
pub fn bitwise_interference_ber(p: &InterferenceParams) -> Result<f64> {
    p.validate()?;
    let (h, s) = (p.h, p.sigma);
    let plus = [1.0 + h, -1.0 + h];
    let minus = [1.0 - h, -1.0 - h];
    // Log-likelihoods keep the comparison exact far from the constellation.
    let log_dens = |y: f64, means: &[f64; 2]| -> f64 {
        let a = -(y - means[0]).powi(2) / (2.0 * s * s);
        let b = -(y - means[1]).powi(2) / (2.0 * s * s);
        a.max(b) + (-(a - b).abs()).exp().ln_1p()
    };
    let diff = |y: f64| log_dens(y, &plus) - log_dens(y, &minus);
    let span = 1.0 + h + 12.0 * s;
    const POINTS: usize = 200_000;
    let step = 2.0 * span / POINTS as f64;
    let mut roots = Vec::new();
    let mut prev_y = -span;
    let mut prev = diff(prev_y);
    for k in 1..=POINTS {
        let y = -span + k as f64 * step;
        let cur = diff(y);
        if cur == 0.0 {
            roots.push(y);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut a, mut b) = (prev_y, y);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if (diff(mid) < 0.0) == (prev < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_y = y;
        prev = cur;
    }
    // Decision regions between consecutive boundaries.
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(roots);
    edges.push(f64::INFINITY);
    let mass = |a: f64, b: f64, m: f64| normal_cdf((b - m) / s) - normal_cdf((a - m) / s);
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = if a.is_infinite() {
            b - 1.0
        } else if b.is_infinite() {
            a + 1.0
        } else {
            0.5 * (a + b)
        };
        // Decide +1 where the +1 likelihood is larger; the other hypothesis
        // contributes its mass in the region as error.
        let wrong = if diff(mid) >= 0.0 { &minus } else { &plus };
        err += wrong.iter().map(|&m| 0.25 * mass(a, b, m)).sum::<f64>();
    }
    Ok(err)
}
