//! Mutual-information bounds on the quantized relay stream: the naive
//! bound, the stopping-set bound built from the growth rate `f(alpha)`, its
//! largest-descending envelope, and the good-code formulas. All values are
//! in bits and drop vanishing terms, so they are asymptotic formulas.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::density_evolution::de_bec;
use crate::ensemble::EdgeDistribution;
use crate::erasure::{check_probability, circ};
use crate::error::{Error, Result};
use crate::parallel;

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn entropy_nats(p: f64) -> f64 {
    binary_entropy(p) * LN_2
}

/// Iterations used to obtain the relay BP erasure rate from DE.
pub const RELAY_DE_ITERATIONS: usize = 10_000;
/// Points of the grid on which the envelope is tabulated.
pub const ENVELOPE_GRID: usize = 1024;
/// Width to which crossings of a target level are bisected.
pub const CROSSING_TOL: f64 = 1e-6;

/// Channel and ensemble data shared by the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub delta2: f64,
    pub delta3: f64,
    /// Relay BP output erasure rate.
    pub delta2_bp: f64,
    pub ensemble: EdgeDistribution,
    /// Right-regular check degree.
    pub d: u32,
    pub design_rate: f64,
    /// Stopping-set growth rate at `alpha = delta2_bp`.
    pub f_at_bp: f64,
    envelope: Vec<(f64, f64)>,
}

impl BoundContext {
    /// Builds the context, obtaining the relay erasure rate from DE.
    pub fn new(ensemble: &EdgeDistribution, delta2: f64, delta3: f64) -> Result<Self> {
        check_probability(delta2)?;
        let bp = de_bec(ensemble, delta2, RELAY_DE_ITERATIONS)?.final_bit_erasure;
        Self::with_relay_erasure(ensemble, delta2, delta3, bp)
    }

    /// Builds the context from a known relay BP erasure rate.
    pub fn with_relay_erasure(
        ensemble: &EdgeDistribution,
        delta2: f64,
        delta3: f64,
        delta2_bp: f64,
    ) -> Result<Self> {
        check_probability(delta2)?;
        check_probability(delta3)?;
        check_probability(delta2_bp)?;
        if delta2_bp > delta2 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "relay BP erasure {delta2_bp} exceeds channel erasure {delta2}"
            )));
        }
        let d = ensemble.right_regular_degree().ok_or_else(|| {
            Error::InvalidDistribution("the stopping-set bound needs a right-regular ensemble".into())
        })?;
        if d < 2 {
            return Err(Error::InvalidDistribution("check degree must be at least 2".into()));
        }
        let f_at_bp = if delta2_bp > 0.0 && delta2_bp < 1.0 {
            f_alpha(ensemble, delta2_bp)?
        } else {
            0.0
        };
        let mut ctx = BoundContext {
            delta2,
            delta3,
            delta2_bp,
            ensemble: ensemble.clone(),
            d,
            design_rate: ensemble.design_rate(),
            f_at_bp,
            envelope: Vec::new(),
        };
        ctx.envelope = ctx.tabulate_envelope();
        Ok(ctx)
    }

    fn tabulate_envelope(&self) -> Vec<(f64, f64)> {
        let values = parallel::map_indexed(ENVELOPE_GRID + 1, |k| {
            let s = k as f64 / ENVELOPE_GRID as f64;
            self.i_min(s)
        });
        let mut best = f64::INFINITY;
        values
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                best = best.min(v);
                (k as f64 / ENVELOPE_GRID as f64, best)
            })
            .collect()
    }

    /// `A(dhat2)`.
    pub fn a_term(&self, dhat2: f64) -> f64 {
        let (d2, d3, bp) = (self.delta2, self.delta3, self.delta2_bp);
        let keep = 1.0 - dhat2;
        d3 * keep * ((1.0 - d2) + (d2 - bp) * (1.0 - keep.powi(self.d as i32 - 1)))
            - (1.0 - bp) * binary_entropy(dhat2)
    }

    /// First stopping-set bound `A + h(delta2_bp o dhat2)`.
    pub fn i1_plus(&self, dhat2: f64) -> f64 {
        self.a_term(dhat2) + binary_entropy(circ(self.delta2_bp, dhat2))
    }

    /// Second stopping-set bound `A + f(delta2_bp) + (1 - delta2_bp) h(dhat2)`.
    pub fn i2_plus(&self, dhat2: f64) -> f64 {
        self.a_term(dhat2) + self.f_at_bp + (1.0 - self.delta2_bp) * binary_entropy(dhat2)
    }

    /// Pointwise minimum of the two stopping-set bounds.
    pub fn i_min(&self, dhat2: f64) -> f64 {
        self.i1_plus(dhat2).min(self.i2_plus(dhat2))
    }

    /// Largest non-increasing function below [`Self::i_min`], evaluated as
    /// the running minimum over the tabulation grid plus a golden-section
    /// minimization over the partial cell ending at `dhat2`.
    pub fn i_plus(&self, dhat2: f64) -> f64 {
        let dhat2 = dhat2.clamp(0.0, 1.0);
        let k = ((dhat2 * ENVELOPE_GRID as f64).floor() as usize).min(ENVELOPE_GRID);
        let (g, prefix) = self.envelope[k];
        if dhat2 <= g {
            return prefix;
        }
        prefix.min(golden_min(|s| self.i_min(s), g, dhat2))
    }

    /// Naive bound with the relay BP erasure rate.
    pub fn naive_bound(&self, dhat2: f64) -> f64 {
        naive_formula(self.delta2_bp, self.delta3, dhat2)
    }

    /// Smallest `dhat2` with `i_plus(dhat2) <= c_o`; `1` if only full
    /// erasure fits.
    pub fn min_quantization_noise(&self, c_o: f64) -> f64 {
        if self.i_plus(0.0) <= c_o {
            return 0.0;
        }
        let Some(k) = self.envelope.iter().position(|&(_, v)| v <= c_o) else {
            return 1.0;
        };
        let (mut lo, mut hi) = (self.envelope[k - 1].0, self.envelope[k].0);
        while hi - lo > CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if self.i_plus(mid) <= c_o {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Rows `(dhat2, i_plus, i1, i2, naive, good_code)` over `grid`.
    pub fn curves(&self, grid: &[f64]) -> Vec<[f64; 6]> {
        parallel::map_slice(grid, |&s| {
            [
                s,
                self.i_plus(s),
                self.i1_plus(s),
                self.i2_plus(s),
                self.naive_bound(s),
                good_code_quantization_mi(self.delta2, self.delta3, s),
            ]
        })
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = f(a).min(f(b));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
    }
    best
}

/// `h(a o dhat2) + (1 - a o dhat2) delta3 - h(dhat2)(1 - a)`.
pub fn naive_formula(a: f64, delta3: f64, dhat2: f64) -> f64 {
    let c = circ(a, dhat2);
    binary_entropy(c) + (1.0 - c) * delta3 - binary_entropy(dhat2) * (1.0 - a)
}

/// Quantization mutual information achieved with capacity-achieving codes
/// at the relay; same expression as the naive bound with `delta2` in place
/// of the relay BP erasure rate.
pub fn good_code_quantization_mi(delta2: f64, delta3: f64, dhat2: f64) -> f64 {
    naive_formula(delta2, delta3, dhat2)
}

/// Smallest `dhat2` in `[0, 1]` with `g(dhat2) <= c_o`, located by a
/// `scan`-point scan followed by bisection of the first feasible cell.
/// Returns `1` when no scanned point is feasible.
pub fn first_feasible(g: impl Fn(f64) -> f64, c_o: f64, scan: usize) -> f64 {
    if g(0.0) <= c_o {
        return 0.0;
    }
    let step = 1.0 / scan as f64;
    let Some(k) = (1..=scan).find(|&k| g(k as f64 * step) <= c_o) else {
        return 1.0;
    };
    let (mut lo, mut hi) = ((k - 1) as f64 * step, k as f64 * step);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= c_o {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest quantization noise that good codes can afford at capacity `c_o`.
pub fn good_code_min_dhat2(delta2: f64, delta3: f64, c_o: f64) -> f64 {
    first_feasible(|s| good_code_quantization_mi(delta2, delta3, s), c_o, 4096)
}

/// Limiting bitwise MAP erasure rate of good codes of rate `rate` over
/// BEC(`delta`): `delta` above the threshold `1 - rate`, zero below.
pub fn pmap_good(delta: f64, rate: f64) -> Result<f64> {
    check_probability(delta)?;
    if (delta - (1.0 - rate)).abs() < 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "limit undefined at the threshold delta = 1 - R = {delta}"
        )));
    }
    Ok(if delta > 1.0 - rate { delta } else { 0.0 })
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Search box for the log-coordinates of the inner infima.
const LOG_BOX: f64 = 60.0;
/// Distance kept from the open ends of the edge-fraction interval.
pub const BETA_CLAMP: f64 = 1e-9;

/// Monotone root of `g` on `[lo, hi]` by bisection, clamped to the box
/// when `g` does not change sign.
fn monotone_root(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if g(lo) >= 0.0 {
        return lo;
    }
    if g(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Node-perspective fractions as `(degree, fraction)`.
fn node_pairs(ed: &EdgeDistribution) -> Vec<(f64, f64)> {
    ed.node_fractions()
        .into_iter()
        .map(|(i, f)| (i as f64, f))
        .collect()
}

/// `inf_{u,v} sum_i lt_i softplus(u + i v) - alpha u - beta v` in nats.
/// The objective is convex; for fixed `v` the optimal `u` solves
/// `sum lt_i s(u + i v) = alpha`, and the reduced function of `v` has
/// derivative `sum lt_i i s(u*(v) + i v) - beta`, increasing in `v`.
pub fn variable_exponent(nodes: &[(f64, f64)], alpha: f64, beta: f64) -> f64 {
    let obj = |u: f64, v: f64| {
        nodes
            .iter()
            .map(|&(i, f)| f * softplus(u + i * v))
            .sum::<f64>()
            - alpha * u
            - beta * v
    };
    let best_u = |v: f64| {
        monotone_root(
            |u| nodes.iter().map(|&(i, f)| f * logistic(u + i * v)).sum::<f64>() - alpha,
            -LOG_BOX * 4.0,
            LOG_BOX * 4.0,
        )
    };
    let v = monotone_root(
        |v| {
            let u = best_u(v);
            nodes.iter().map(|&(i, f)| f * i * logistic(u + i * v)).sum::<f64>() - beta
        },
        -LOG_BOX,
        LOG_BOX,
    );
    obj(best_u(v), v)
}

/// `sum_{k=2}^{d} C(d,k) x^k = (1+x)^d - 1 - d x`, accurate for small `x`.
fn excess_poly(d: u32, x: f64) -> f64 {
    if x < 0.5 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 1..=d {
            term *= x * f64::from(d - k + 1) / f64::from(k);
            if k >= 2 {
                acc += term;
            }
        }
        acc
    } else {
        (1.0 + x).powi(d as i32) - 1.0 - f64::from(d) * x
    }
}

/// `ln((1+x)^d - d x)` for `x = e^u`.
fn check_log(d: u32, u: f64) -> f64 {
    let x = u.exp();
    if u > 5.0 {
        // (1+x)^d dominates; factor it out to avoid overflow.
        let lead = f64::from(d) * x.ln_1p();
        lead + (-f64::from(d) * x * (-lead).exp()).ln_1p()
    } else {
        excess_poly(d, x).ln_1p()
    }
}

/// `x d/dx ln((1+x)^d - d x)` for `x = e^u`, increasing from 0 to `d`.
fn check_slope(d: u32, u: f64) -> f64 {
    let x = u.exp();
    let df = f64::from(d);
    if u > 5.0 {
        let w = (-(df - 1.0) * x.ln_1p()).exp();
        let ratio = x / (1.0 + x);
        df * ratio * (1.0 - w) / (1.0 - df * ratio * w)
    } else {
        // x((1+x)^{d-1} - 1) = x((1+x)^{d-1} - 1 - (d-1)x) + (d-1)x^2.
        let inner = x * excess_poly(d - 1, x) + (df - 1.0) * x * x;
        df * inner / (1.0 + excess_poly(d, x))
    }
}

/// `inf_u (1-R) ln((1+e^u)^d - d e^u) - beta u` in nats.
pub fn check_exponent(d: u32, check_ratio: f64, beta: f64) -> f64 {
    let u = monotone_root(|u| check_ratio * check_slope(d, u) - beta, -LOG_BOX * 4.0, LOG_BOX);
    check_ratio * check_log(d, u) - beta * u
}

/// Range of edge fractions `beta` compatible with a node fraction `alpha`:
/// filling `alpha` with the smallest degrees first gives the minimum and
/// with the largest first the maximum.
pub fn beta_range(nodes: &[(f64, f64)], alpha: f64) -> (f64, f64) {
    let fill = |order: &mut dyn Iterator<Item = &(f64, f64)>| {
        let mut left = alpha;
        let mut beta = 0.0;
        for &(i, f) in order {
            let take = left.min(f);
            beta += take * i;
            left -= take;
            if left <= 0.0 {
                break;
            }
        }
        beta
    };
    (fill(&mut nodes.iter()), fill(&mut nodes.iter().rev()))
}

/// Objective of the `beta` maximization in nats.
fn f_objective(nodes: &[(f64, f64)], d: u32, check_ratio: f64, gamma: f64, alpha: f64, beta: f64) -> f64 {
    variable_exponent(nodes, alpha, beta) + check_exponent(d, check_ratio, beta)
        - gamma * entropy_nats(beta / gamma)
}

/// Growth rate in bits of the expected number of stopping sets of size
/// `alpha n` in a right-regular ensemble:
/// `max_beta [ inf_{x,y} ln prod_i (1 + x y^i)^{lt_i} / (x^alpha y^beta)
///  + inf_x ln ((1+x)^d - d x)^{1-R} / x^beta - gamma h(beta/gamma) ]`.
/// `beta` is scanned on 64 points of its feasible range and refined by
/// golden section around the best cell.
pub fn f_alpha(ed: &EdgeDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let d = ed.right_regular_degree().ok_or_else(|| {
        Error::InvalidDistribution("f(alpha) needs a right-regular ensemble".into())
    })?;
    let nodes = node_pairs(ed);
    let gamma = ed.gamma();
    let check_ratio = 1.0 - ed.design_rate();
    let (bmin, bmax) = beta_range(&nodes, alpha);
    let lo = bmin.max(BETA_CLAMP);
    let hi = bmax.min(gamma - BETA_CLAMP);
    let obj = |b: f64| f_objective(&nodes, d, check_ratio, gamma, alpha, b);
    if hi <= lo {
        return Ok(obj(lo) / LN_2);
    }
    const CELLS: usize = 63;
    let step = (hi - lo) / CELLS as f64;
    let values: Vec<f64> = (0..=CELLS).map(|k| obj(lo + k as f64 * step)).collect();
    let (kbest, &vbest) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !vbest.is_finite() {
        return Err(Error::NonConvergence {
            evaluations: values.len(),
            best: vbest,
        });
    }
    let a = lo + kbest.saturating_sub(1) as f64 * step;
    let b = (lo + (kbest + 1) as f64 * step).min(hi);
    let refined = -golden_min(|x| -obj(x), a, b);
    Ok(vbest.max(refined) / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq67() -> EdgeDistribution {
        EdgeDistribution::from_pairs(
            &[(2, 0.2289), (3, 0.04532), (4, 0.2361), (23, 0.233), (24, 0.03178), (100, 0.2249)],
            &[(10, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - 0.4999).abs() < 1e-3);
    }

    #[test]
    fn naive_examples() {
        let (bp, d3) = (0.3, 0.8);
        assert!((naive_formula(bp, d3, 0.0) - (binary_entropy(bp) + (1.0 - bp) * d3)).abs() < 1e-15);
        assert!(naive_formula(bp, d3, 1.0).abs() < 1e-15);
    }

    #[test]
    fn good_code_examples() {
        assert!((good_code_quantization_mi(0.5, 0.82, 0.0) - 1.41).abs() < 1e-2);
        let dh = good_code_min_dhat2(0.5, 0.82, 0.9);
        assert!((dh - 0.223).abs() < 3e-3, "{dh}");
        assert_eq!(good_code_min_dhat2(0.5, 0.82, 2.0), 0.0);
    }

    #[test]
    fn pmap_examples() {
        assert_eq!(pmap_good(0.7, 0.5).unwrap(), 0.7);
        assert_eq!(pmap_good(0.3, 0.5).unwrap(), 0.0);
        assert_eq!(pmap_good(1.0, 0.3).unwrap(), 1.0);
        assert!(pmap_good(0.5, 0.5).is_err());
    }

    #[test]
    fn a_term_examples() {
        let ed = eq67();
        let ctx = BoundContext::with_relay_erasure(&ed, 0.5, 0.82, 0.3).unwrap();
        assert!(ctx.a_term(1.0).abs() < 1e-15);
        assert!((ctx.a_term(0.0) - 0.82 * 0.5).abs() < 1e-15);
        let eq = BoundContext::with_relay_erasure(&ed, 0.5, 0.82, 0.5).unwrap();
        let dh: f64 = 0.2;
        let want = 0.82 * 0.8 * 0.5 - 0.5 * binary_entropy(dh);
        assert!((eq.a_term(dh) - want).abs() < 1e-15);
    }

    #[test]
    fn excess_poly_matches_direct() {
        for &x in &[0.01, 0.3, 0.49, 0.5, 2.0] {
            let direct = (1.0f64 + x).powi(7) - 1.0 - 7.0 * x;
            assert!((excess_poly(7, x) - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn check_slope_is_derivative() {
        for &u in &[-8.0, -1.0, 0.0, 3.0, 6.0, 20.0] {
            let h = 1e-5;
            let fd = (check_log(6, u + h) - check_log(6, u - h)) / (2.0 * h);
            assert!((fd - check_slope(6, u)).abs() < 1e-6, "u={u}");
        }
    }

    #[test]
    fn beta_range_regular() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let (a, b) = beta_range(&node_pairs(&ed), 0.2);
        assert!((a - 0.6).abs() < 1e-15 && (b - 0.6).abs() < 1e-15);
    }

    #[test]
    fn envelope_is_non_increasing_and_below_minimum() {
        let ctx = BoundContext::with_relay_erasure(&eq67(), 0.5, 0.82, 0.3016).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=1000 {
            let s = k as f64 / 1000.0;
            let v = ctx.i_plus(s);
            assert!(v <= prev + 1e-12);
            assert!(v <= ctx.i_min(s) + 1e-12);
            assert!(ctx.i_min(s) <= ctx.i1_plus(s));
            prev = v;
        }
        assert_eq!(ctx.min_quantization_noise(10.0), 0.0);
        assert_eq!(ctx.min_quantization_noise(0.0), 1.0);
    }

    #[test]
    fn non_right_regular_rejected() {
        let ed = EdgeDistribution::from_pairs(&[(3, 1.0)], &[(5, 0.5), (6, 0.5)]).unwrap();
        assert!(f_alpha(&ed, 0.3).is_err());
        assert!(BoundContext::with_relay_erasure(&ed, 0.5, 0.5, 0.3).is_err());
    }
}
