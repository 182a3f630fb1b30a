//! Density evolution over the BEC and simultaneous density evolution over
//! pair densities on {0, e} x {0, e}.
//!
//! Iteration indices follow the decoders: a run with `t` iterations has
//! rightbound densities for `0..t`, leftbound densities for `1..=t`, and a
//! final decision computed from the leftbound density at `t`. A DE result
//! at `t` therefore predicts [`crate::bec_bp::bp_decode`] run for `t`
//! iterations.

use serde::{Deserialize, Serialize};

use crate::ensemble::EdgeDistribution;
use crate::erasure::check_probability;
use crate::error::Result;
use crate::parallel;

/// Change in the final erasure probability below which sim-DE stops.
pub const SIM_DE_TOL: f64 = 1e-12;
/// Default iteration cap for sim-DE.
pub const SIM_DE_T_MAX: usize = 2000;

/// Result of point-to-point BEC density evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeResult {
    /// Rightbound edge erasure probability for iterations `0..t`.
    pub per_iteration: Vec<f64>,
    /// Bit erasure probability of the final decisions.
    pub final_bit_erasure: f64,
    /// Whether the last update changed the final erasure by less than 1e-12.
    pub converged: bool,
}

fn leftbound_erasure(ed: &EdgeDistribution, x: f64) -> f64 {
    1.0 - ed.rho_poly(1.0 - x)
}

fn final_erasure(ed: &EdgeDistribution, delta: f64, left: f64) -> f64 {
    delta
        * ed
            .node_fractions()
            .iter()
            .map(|(&i, &f)| f * left.powi(i as i32))
            .sum::<f64>()
}

/// BEC density evolution for `t >= 1` iterations:
/// `x_0 = delta`, `x_l = delta * lambda(1 - rho(1 - x_{l-1}))`, final
/// erasure `delta * sum_i lambda~_i (1 - rho(1 - x))^i` with `x` the last
/// rightbound value.
pub fn de_bec(ed: &EdgeDistribution, delta: f64, t: usize) -> Result<DeResult> {
    check_probability(delta)?;
    let t = t.max(1);
    let mut xs = Vec::with_capacity(t);
    let mut x = delta;
    xs.push(x);
    let mut prev_final = f64::NAN;
    let mut last_change = f64::INFINITY;
    for l in 1..=t {
        let left = leftbound_erasure(ed, x);
        let fin = final_erasure(ed, delta, left);
        last_change = (fin - prev_final).abs();
        prev_final = fin;
        if l == t {
            break;
        }
        let next = delta * ed.lambda_poly(left);
        if next == x {
            // Exact fixed point: every later iterate is identical.
            xs.resize(t, x);
            last_change = 0.0;
            break;
        }
        x = next;
        xs.push(x);
    }
    Ok(DeResult {
        per_iteration: xs,
        final_bit_erasure: prev_final,
        converged: last_change < SIM_DE_TOL,
    })
}

/// Largest erasure probability (to within 1e-5) at which BEC density
/// evolution drives the final erasure below 1e-8.
pub fn de_threshold(ed: &EdgeDistribution) -> f64 {
    let converges = |delta: f64| -> bool {
        let mut x = delta;
        for _ in 0..200_000 {
            let left = leftbound_erasure(ed, x);
            if final_erasure(ed, delta, left) < 1e-8 {
                return true;
            }
            let next = delta * ed.lambda_poly(left);
            if (x - next).abs() < 1e-16 {
                return false;
            }
            x = next;
        }
        false
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Joint law of a (relay, destination) symbol pair over {0, e}^2,
/// indexed `p[x2][x3]` with index 0 for a revealed zero and 1 for erasure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDensity {
    pub p: [[f64; 2]; 2],
}

const Z: usize = 0;
const E: usize = 1;

impl PairDensity {
    /// Point mass on `(x2, x3)` given as erasure flags.
    pub fn point(x2_erased: bool, x3_erased: bool) -> Self {
        let mut p = [[0.0; 2]; 2];
        p[usize::from(x2_erased)][usize::from(x3_erased)] = 1.0;
        PairDensity { p }
    }

    /// Probability of `(x2, x3)` given as erasure flags.
    pub fn get(&self, x2_erased: bool, x3_erased: bool) -> f64 {
        self.p[usize::from(x2_erased)][usize::from(x3_erased)]
    }

    pub fn total(&self) -> f64 {
        self.p[Z][Z] + self.p[Z][E] + self.p[E][Z] + self.p[E][E]
    }

    /// Relay-coordinate erasure probability.
    pub fn relay_erasure(&self) -> f64 {
        self.p[E][Z] + self.p[E][E]
    }

    /// Destination-coordinate erasure probability.
    pub fn destination_erasure(&self) -> f64 {
        self.p[Z][E] + self.p[E][E]
    }

    fn normalized(mut self) -> Self {
        let s = self.total();
        if s > 0.0 {
            for row in &mut self.p {
                for v in row {
                    *v /= s;
                }
            }
        }
        self
    }

    fn scaled_add(&mut self, w: f64, other: &PairDensity) {
        for a in 0..2 {
            for b in 0..2 {
                self.p[a][b] += w * other.p[a][b];
            }
        }
    }

    fn zero() -> Self {
        PairDensity { p: [[0.0; 2]; 2] }
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &PairDensity) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                m = m.max((self.p[a][b] - other.p[a][b]).abs());
            }
        }
        m
    }
}

/// Product initialization `P(x2, x3) = P_d2(x2) P_d3(x3)`.
pub fn pair_init(d2: f64, d3: f64) -> PairDensity {
    let m2 = [1.0 - d2, d2];
    let m3 = [1.0 - d3, d3];
    let mut p = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            p[a][b] = m2[a] * m3[b];
        }
    }
    PairDensity { p }
}

/// Law of the coordinatewise erasure product of independent draws: a
/// coordinate is erased only if both factors are.
pub fn pair_odot(a: &PairDensity, b: &PairDensity) -> PairDensity {
    let mut out = PairDensity::zero();
    for a2 in 0..2 {
        for a3 in 0..2 {
            for b2 in 0..2 {
                for b3 in 0..2 {
                    out.p[a2 & b2][a3 & b3] += a.p[a2][a3] * b.p[b2][b3];
                }
            }
        }
    }
    out
}

/// Law of the coordinatewise erasure sum of independent draws: a
/// coordinate is erased if either summand is.
pub fn pair_oplus(a: &PairDensity, b: &PairDensity) -> PairDensity {
    let mut out = PairDensity::zero();
    for a2 in 0..2 {
        for a3 in 0..2 {
            for b2 in 0..2 {
                for b3 in 0..2 {
                    out.p[a2 | b2][a3 | b3] += a.p[a2][a3] * b.p[b2][b3];
                }
            }
        }
    }
    out
}

/// Quantization-noise mixture: `Gamma(P)(x2, x3)` sums
/// `P(x2, x3') P_dhat2(xh)` over `(xh, x3')` with `x3' * (x2 + xh) = x3`.
/// The destination coordinate stays erased only when it was erased and the
/// forwarded relay symbol `x2 + xh` is erased too.
pub fn pair_gamma(p: &PairDensity, dhat2: f64) -> PairDensity {
    let noise = [1.0 - dhat2, dhat2];
    let mut out = PairDensity::zero();
    for x2 in 0..2 {
        for x3b in 0..2 {
            for (xh, &w) in noise.iter().enumerate() {
                let forwarded = x2 | xh;
                let x3 = x3b & forwarded;
                out.p[x2][x3] += p.p[x2][x3b] * w;
            }
        }
    }
    out
}

/// Full trajectory of a sim-DE run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDeResult {
    /// Rightbound densities for iterations `0..iterations`.
    pub rightbound: Vec<PairDensity>,
    /// Leftbound densities for iterations `1..=iterations`.
    pub leftbound: Vec<PairDensity>,
    /// Per-degree rightbound densities `(degree, density)` for iterations
    /// `1..iterations`; their lambda-weighted sum is the rightbound density.
    pub singletons: Vec<Vec<(u32, PairDensity)>>,
    /// Destination erasure probability of the final decisions after each
    /// iteration `1..=iterations`.
    pub pe_trajectory: Vec<f64>,
    /// Final decision density after the last iteration.
    pub final_density: PairDensity,
    /// Destination-coordinate erasure probability of `final_density`.
    pub pe_final: f64,
    /// Iterations performed.
    pub iterations: usize,
    /// True when the run stopped because the change fell below tolerance.
    pub converged: bool,
}

/// Stopping rule for [`sim_de_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDeOptions {
    /// Maximum number of iterations.
    pub t_max: usize,
    /// Stop once the final erasure changes by less than this; zero runs
    /// exactly `t_max` iterations.
    pub tol: f64,
}

impl Default for SimDeOptions {
    fn default() -> Self {
        SimDeOptions {
            t_max: SIM_DE_T_MAX,
            tol: SIM_DE_TOL,
        }
    }
}

fn powers(
    p: &PairDensity,
    max: usize,
    op: fn(&PairDensity, &PairDensity) -> PairDensity,
) -> Vec<PairDensity> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(PairDensity::point(false, false));
    if max >= 1 {
        out.push(*p);
    }
    for k in 2..=max {
        let next = op(&out[k - 1], p).normalized();
        out.push(next);
    }
    out
}

/// sim-DE with the default stopping rule and at most `t` iterations.
pub fn sim_de(
    ed: &EdgeDistribution,
    d2: f64,
    d3: f64,
    dhat2: f64,
    t: usize,
) -> Result<SimDeResult> {
    sim_de_with(
        ed,
        d2,
        d3,
        dhat2,
        SimDeOptions {
            t_max: t,
            tol: SIM_DE_TOL,
        },
    )
}

/// Simultaneous density evolution for the relay/destination decoder pair.
pub fn sim_de_with(
    ed: &EdgeDistribution,
    d2: f64,
    d3: f64,
    dhat2: f64,
    opts: SimDeOptions,
) -> Result<SimDeResult> {
    for p in [d2, d3, dhat2] {
        check_probability(p)?;
    }
    let t_max = opts.t_max.max(1);
    let lambda: Vec<(u32, f64)> = ed.lambda().iter().map(|(&d, &f)| (d, f)).collect();
    let rho: Vec<(u32, f64)> = ed.rho().iter().map(|(&d, &f)| (d, f)).collect();
    let tilde: Vec<(u32, f64)> = ed.node_fractions().into_iter().collect();
    let max_var = ed.max_var_degree() as usize;
    let max_chk = ed.max_check_degree() as usize;

    let base = pair_init(d2, d3);
    let mut rightbound = vec![pair_gamma(&base, dhat2)];
    let mut leftbound = Vec::new();
    let mut singletons = Vec::new();
    let mut pe_trajectory = Vec::new();
    let mut final_density = PairDensity::zero();
    let mut converged = false;

    for l in 1..=t_max {
        let prev = rightbound[l - 1];
        let opow = powers(&prev, max_chk.saturating_sub(1), pair_oplus);
        let mut left = PairDensity::zero();
        for &(j, r) in &rho {
            left.scaled_add(r, &opow[j as usize - 1]);
        }
        let left = left.normalized();
        leftbound.push(left);

        let mpow = powers(&left, max_var, pair_odot);
        let mut fin = PairDensity::zero();
        for &(i, f) in &tilde {
            fin.scaled_add(f, &pair_odot(&base, &mpow[i as usize]));
        }
        final_density = pair_gamma(&fin.normalized(), dhat2);
        let pe = final_density.destination_erasure();
        let change = pe_trajectory
            .last()
            .map_or(f64::INFINITY, |&p: &f64| (p - pe).abs());
        pe_trajectory.push(pe);
        if change < opts.tol {
            converged = true;
            break;
        }
        if l == t_max {
            break;
        }
        let per_degree: Vec<(u32, PairDensity)> = lambda
            .iter()
            .map(|&(i, _)| {
                let bracket = pair_odot(&base, &mpow[i as usize - 1]).normalized();
                (i, pair_gamma(&bracket, dhat2))
            })
            .collect();
        let mut right = PairDensity::zero();
        for (&(_, w), (_, s)) in lambda.iter().zip(&per_degree) {
            right.scaled_add(w, s);
        }
        rightbound.push(right.normalized());
        singletons.push(per_degree);
    }
    let iterations = leftbound.len();
    Ok(SimDeResult {
        rightbound,
        leftbound,
        singletons,
        pe_final: final_density.destination_erasure(),
        final_density,
        pe_trajectory,
        iterations,
        converged,
    })
}

/// Rightbound singleton densities of the given variable degrees for a
/// leftbound density `left`, as formed inside [`sim_de`].
pub fn pair_singletons(
    d2: f64,
    d3: f64,
    dhat2: f64,
    left: &PairDensity,
    degrees: &[u32],
) -> Vec<PairDensity> {
    let base = pair_init(d2, d3);
    let max = degrees.iter().copied().max().unwrap_or(1) as usize;
    let mpow = powers(left, max.saturating_sub(1), pair_odot);
    degrees
        .iter()
        .map(|&i| pair_gamma(&pair_odot(&base, &mpow[i as usize - 1]).normalized(), dhat2))
        .collect()
}

/// Final destination erasure probabilities of sim-DE over a grid of
/// quantization-noise levels, evaluated in parallel.
pub fn sim_de_sweep(
    ed: &EdgeDistribution,
    d2: f64,
    d3: f64,
    dhat2_grid: &[f64],
    opts: SimDeOptions,
) -> Result<Vec<f64>> {
    parallel::map_slice(dhat2_grid, |&dh| {
        sim_de_with(ed, d2, d3, dh, opts).map(|r| r.pe_final)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eq67() -> EdgeDistribution {
        EdgeDistribution::from_pairs(
            &[
                (2, 0.2289),
                (3, 0.04532),
                (4, 0.2361),
                (23, 0.233),
                (24, 0.03178),
                (100, 0.2249),
            ],
            &[(10, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn de_zero_erasure() {
        let r = de_bec(&EdgeDistribution::regular(3, 6).unwrap(), 0.0, 10).unwrap();
        assert!(r.per_iteration.iter().all(|&x| x == 0.0));
        assert_eq!(r.final_bit_erasure, 0.0);
    }

    #[test]
    fn de_regular_threshold_bracket() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        assert!(de_bec(&ed, 0.42, 500).unwrap().final_bit_erasure < 1e-6);
        assert!(de_bec(&ed, 0.44, 500).unwrap().final_bit_erasure > 1e-2);
    }

    #[test]
    fn de_non_increasing() {
        let r = de_bec(&eq67(), 0.5, 200).unwrap();
        assert!(r.per_iteration.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!((r.final_bit_erasure - 0.3016).abs() < 2e-3);
    }

    #[test]
    fn thresholds() {
        let t36 = de_threshold(&EdgeDistribution::regular(3, 6).unwrap());
        assert!((t36 - 0.4294).abs() < 1e-3, "{t36}");
        let cyc = EdgeDistribution::regular(2, 3).unwrap();
        assert!((de_threshold(&cyc) - 0.5).abs() < 1e-3);
        let ed = eq67();
        assert!(de_threshold(&ed) <= 1.0 - ed.design_rate());
    }

    #[test]
    fn pair_init_examples() {
        assert_eq!(pair_init(0.0, 0.0), PairDensity::point(false, false));
        assert_eq!(pair_init(1.0, 1.0), PairDensity::point(true, true));
        assert!((pair_init(0.5, 0.82).get(true, true) - 0.41).abs() < 1e-15);
    }

    #[test]
    fn odot_examples() {
        let b = pair_init(0.3, 0.6);
        assert_eq!(
            pair_odot(&PairDensity::point(false, false), &b),
            PairDensity::point(false, false)
        );
        assert_eq!(pair_odot(&PairDensity::point(true, true), &b), b);
        let q = 0.37;
        let mut a = PairDensity::point(false, false);
        a.p[0][0] = 1.0 - q;
        a.p[1][1] = q;
        assert!((pair_odot(&a, &a).get(true, true) - q * q).abs() < 1e-15);
    }

    #[test]
    fn oplus_examples() {
        let a = pair_init(0.3, 0.6);
        assert_eq!(pair_oplus(&a, &PairDensity::point(false, false)), a);
        assert_eq!(
            pair_oplus(&a, &PairDensity::point(true, true)),
            PairDensity::point(true, true)
        );
        let b = pair_init(0.2, 0.1);
        let c = pair_oplus(&a, &b);
        assert!((c.relay_erasure() - crate::erasure::circ(0.3, 0.2)).abs() < 1e-15);
        assert!((c.destination_erasure() - crate::erasure::circ(0.6, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn gamma_examples() {
        let p = pair_init(0.4, 0.7);
        assert!((pair_gamma(&p, 1.0).destination_erasure() - 0.7).abs() < 1e-15);
        let g0 = pair_gamma(&p, 0.0);
        assert!((g0.destination_erasure() - 0.4 * 0.7).abs() < 1e-15);
        let g = pair_gamma(&PairDensity::point(false, true), 0.3);
        assert!((g.get(false, false) - 0.7).abs() < 1e-15);
        assert!((g.get(false, true) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sim_de_degenerate_identities() {
        let ed = eq67();
        let t = 60;
        let opts = SimDeOptions { t_max: t, tol: 0.0 };
        let a = sim_de_with(&ed, 0.5, 0.82, 1.0, opts).unwrap();
        let b = de_bec(&ed, 0.82, t).unwrap();
        assert!((a.pe_final - b.final_bit_erasure).abs() < 1e-12);
        let c = sim_de_with(&ed, 0.0, 0.82, 0.3, opts).unwrap();
        let d = de_bec(&ed, 0.3 * 0.82, t).unwrap();
        assert!((c.pe_final - d.final_bit_erasure).abs() < 1e-12);
    }

    #[test]
    fn sim_de_relay_marginal_matches_de() {
        let ed = eq67();
        let r = sim_de_with(&ed, 0.5, 0.82, 0.212, SimDeOptions { t_max: 40, tol: 0.0 }).unwrap();
        let de = de_bec(&ed, 0.5, 40).unwrap();
        for (p, x) in r.rightbound.iter().zip(&de.per_iteration) {
            assert!((p.relay_erasure() - x).abs() < 1e-13);
        }
        let relay_final = r.final_density.relay_erasure();
        assert!((relay_final - de.final_bit_erasure).abs() < 1e-13);
    }

    #[test]
    fn singletons_mix_to_rightbound() {
        let ed = eq67();
        let r = sim_de_with(&ed, 0.5, 0.82, 0.212, SimDeOptions { t_max: 30, tol: 0.0 }).unwrap();
        for (l, per) in r.singletons.iter().enumerate() {
            let mut mix = PairDensity::zero();
            for (i, s) in per {
                mix.scaled_add(ed.lambda()[i], s);
            }
            assert!(mix.max_abs_diff(&r.rightbound[l + 1]) < 1e-12);
        }
    }

    #[test]
    fn pair_singletons_reproduce_recorded_singletons() {
        let ed = eq67();
        let r = sim_de_with(&ed, 0.5, 0.82, 0.212, SimDeOptions { t_max: 12, tol: 0.0 }).unwrap();
        let degrees: Vec<u32> = ed.lambda().keys().copied().collect();
        for (l, per) in r.singletons.iter().enumerate() {
            let again = pair_singletons(0.5, 0.82, 0.212, &r.leftbound[l], &degrees);
            for ((_, s), t) in per.iter().zip(&again) {
                assert!(s.max_abs_diff(t) < 1e-15);
            }
        }
    }

    #[test]
    fn sim_de_stays_normalized() {
        let r = sim_de(&eq67(), 0.5, 0.82, 0.212, 300).unwrap();
        for p in r.rightbound.iter().chain(&r.leftbound) {
            assert!((p.total() - 1.0).abs() < 1e-10);
            assert!(p.p.iter().flatten().all(|&v| v >= 0.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sim_de_monotone_in_dhat2(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ed = EdgeDistribution::from_pairs(&[(2, 0.4), (5, 0.6)], &[(6, 1.0)]).unwrap();
            let opts = SimDeOptions { t_max: 50, tol: 0.0 };
            let plo = sim_de_with(&ed, 0.45, 0.7, lo, opts).unwrap().pe_final;
            let phi = sim_de_with(&ed, 0.45, 0.7, hi, opts).unwrap().pe_final;
            prop_assert!(plo <= phi + 1e-12);
        }

        #[test]
        fn operators_commute(a2 in 0.0f64..1.0, a3 in 0.0f64..1.0, b2 in 0.0f64..1.0, b3 in 0.0f64..1.0) {
            let a = pair_init(a2, a3);
            let b = pair_init(b2, b3);
            prop_assert!(pair_odot(&a, &b).max_abs_diff(&pair_odot(&b, &a)) < 1e-15);
            prop_assert!(pair_oplus(&a, &b).max_abs_diff(&pair_oplus(&b, &a)) < 1e-15);
            prop_assert!((pair_gamma(&a, b2).total() - 1.0).abs() < 1e-14);
        }
    }
}
