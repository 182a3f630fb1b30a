//! Monte-Carlo relay pipeline: soft decode-and-forward with BP at both
//! nodes, the joint sim-BP decoder, and campaign aggregation.
//!
//! The all-zero codeword is transmitted in every trial. Over erasure
//! channels the decoders' erasure patterns do not depend on the codeword,
//! so no encoder is needed.

use serde::{Deserialize, Serialize};

use crate::bec_bp::{bp_decode, bp_decode_traced, check_update, decide, variable_update};
use crate::ensemble::{sample_graph, EdgeDistribution, TannerGraph};
use crate::erasure::{check_probability, erasure_rate, is_degraded, sample_noise, ErasureWord, Sym};
use crate::error::{Error, Result};
use crate::info_bounds::binary_entropy;
use crate::parallel;
use crate::rng::Stream;

/// Erasure relay channel parameters and the virtual quantization noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayParams {
    /// Source-to-relay erasure probability.
    pub delta2: f64,
    /// Source-to-destination erasure probability.
    pub delta3: f64,
    /// Relay-to-destination capacity in bits per channel use.
    pub c_o: f64,
    /// Erasure probability of the virtual quantization channel.
    pub dhat2: f64,
}

impl RelayParams {
    pub fn new(delta2: f64, delta3: f64, c_o: f64, dhat2: f64) -> Result<Self> {
        let p = RelayParams {
            delta2,
            delta3,
            c_o,
            dhat2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.delta2)?;
        check_probability(self.delta3)?;
        check_probability(self.dhat2)?;
        if !(self.c_o >= 0.0) || !self.c_o.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "relay capacity must be finite and non-negative, got {}",
                self.c_o
            )));
        }
        Ok(())
    }
}

/// Explicit noise realizations shared by matched decoder runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTriple {
    /// Source-to-relay erasure pattern.
    pub e2: ErasureWord,
    /// Source-to-destination erasure pattern.
    pub e3: ErasureWord,
    /// Quantization erasure pattern.
    pub ehat2: ErasureWord,
}

impl NoiseTriple {
    /// Draws the three patterns in the order `e2`, `e3`, `ehat2`.
    pub fn sample(n: usize, p: &RelayParams, rng: &mut Stream) -> Result<Self> {
        p.validate()?;
        Ok(NoiseTriple {
            e2: sample_noise(n, p.delta2, rng)?,
            e3: sample_noise(n, p.delta3, rng)?,
            ehat2: sample_noise(n, p.dhat2, rng)?,
        })
    }

    fn check(&self, n: usize) -> Result<()> {
        for w in [&self.e2, &self.e3, &self.ehat2] {
            if w.len() != n {
                return Err(Error::LengthMismatch {
                    left: w.len(),
                    right: n,
                });
            }
        }
        Ok(())
    }
}

/// Words produced by one relay trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Relay BP output.
    pub relay_output: ErasureWord,
    /// Relay output after the quantization channel.
    pub quantized: ErasureWord,
    /// Destination BP output under soft-DF-BP.
    pub destination_output: ErasureWord,
    /// Destination output of sim-BP.
    pub simbp_output: ErasureWord,
    pub rates: TrialRates,
}

/// Erasure rates of the words of a [`TrialOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRates {
    pub relay: f64,
    pub quantized: f64,
    pub destination: f64,
    pub simbp: f64,
}

/// Message arrays of a sim-BP run, one entry per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBpTrace {
    pub relay_rightbound: Vec<Vec<Sym>>,
    pub relay_leftbound: Vec<Vec<Sym>>,
    pub destination_rightbound: Vec<Vec<Sym>>,
    pub destination_leftbound: Vec<Vec<Sym>>,
    pub relay_decisions: ErasureWord,
    pub destination_decisions: ErasureWord,
}

/// Soft-DF-BP on given noise: the relay decodes `e2`, forwards its output
/// through the quantization pattern, and the destination decodes the
/// symbolwise product of the forwarded word and `e3`.
pub fn soft_df_bp(g: &TannerGraph, t: usize, noise: &NoiseTriple) -> Result<(ErasureWord, ErasureWord, ErasureWord)> {
    noise.check(g.n())?;
    let relay = bp_decode(g, &noise.e2, t)?.decisions;
    let quantized = relay.add(&noise.ehat2)?;
    let combined = quantized.mul(&noise.e3)?;
    let destination = bp_decode(g, &combined, t)?.decisions;
    Ok((relay, quantized, destination))
}

/// Joint relay/destination BP. Relay messages follow ordinary BP on `e2`.
/// A destination rightbound message on edge `e` of variable `v` is
/// `(r2_e + ehat2_v) * e3_v * prod_{e' != e} l3_e'`, and the destination
/// decision is `(y2_v + ehat2_v) * e3_v * prod_e l3_e` with `y2` the relay
/// decision.
pub fn sim_bp(g: &TannerGraph, t: usize, noise: &NoiseTriple, keep_trace: bool) -> Result<SimBpTrace> {
    noise.check(g.n())?;
    if t == 0 {
        return Err(Error::InvalidArgument("sim-BP needs t >= 1".into()));
    }
    let edges = g.num_edges();
    let y2 = noise.e2.symbols();
    let y3 = noise.e3.symbols();
    let q = noise.ehat2.symbols();
    let mut l2 = vec![Sym::Erased; edges];
    let mut r2 = vec![Sym::Erased; edges];
    let mut l3 = vec![Sym::Erased; edges];
    let mut r3 = vec![Sym::Erased; edges];
    let mut trace = SimBpTrace {
        relay_rightbound: Vec::new(),
        relay_leftbound: Vec::new(),
        destination_rightbound: Vec::new(),
        destination_leftbound: Vec::new(),
        relay_decisions: ErasureWord::new(Vec::new()),
        destination_decisions: ErasureWord::new(Vec::new()),
    };
    let mut prev = (Vec::new(), Vec::new());
    for _ in 0..t {
        variable_update(g, y2, &l2, &mut r2)?;
        destination_update(g, &r2, q, y3, &l3, &mut r3)?;
        if keep_trace {
            trace.relay_rightbound.push(r2.clone());
            trace.destination_rightbound.push(r3.clone());
        } else if r2 == prev.0 && r3 == prev.1 {
            break;
        }
        check_update(g, &r2, &mut l2);
        check_update(g, &r3, &mut l3);
        if keep_trace {
            trace.relay_leftbound.push(l2.clone());
            trace.destination_leftbound.push(l3.clone());
        } else {
            prev.0.clone_from(&r2);
            prev.1.clone_from(&r3);
        }
    }
    let relay = decide(g, y2, &l2)?;
    let dest = (0..g.n())
        .map(|v| {
            let base = relay[v].add(q[v]).mul(y3[v])?;
            g.var_edges(v).try_fold(base, |acc, e| acc.mul(l3[e]))
        })
        .collect::<Result<Vec<_>>>()?;
    trace.relay_decisions = ErasureWord::new(relay);
    trace.destination_decisions = ErasureWord::new(dest);
    Ok(trace)
}

fn destination_update(
    g: &TannerGraph,
    r2: &[Sym],
    q: &[Sym],
    y3: &[Sym],
    l3: &[Sym],
    r3: &mut [Sym],
) -> Result<()> {
    for v in 0..g.n() {
        let edges = g.var_edges(v);
        let mut known = 0usize;
        let mut value = Sym::Erased;
        for e in edges.clone() {
            if !l3[e].is_erased() {
                value = value.mul(l3[e])?;
                known += 1;
            }
        }
        for e in edges {
            let own = usize::from(!l3[e].is_erased());
            let others = if known > own { value } else { Sym::Erased };
            r3[e] = r2[e].add(q[v]).mul(y3[v])?.mul(others)?;
        }
    }
    Ok(())
}

/// Runs soft-DF-BP and sim-BP on the same noise.
pub fn sim_bp_trial(g: &TannerGraph, t: usize, noise: &NoiseTriple) -> Result<TrialOutcome> {
    let (relay_output, quantized, destination_output) = soft_df_bp(g, t, noise)?;
    let simbp_output = sim_bp(g, t, noise, false)?.destination_decisions;
    let rates = TrialRates {
        relay: erasure_rate(&relay_output),
        quantized: erasure_rate(&quantized),
        destination: erasure_rate(&destination_output),
        simbp: erasure_rate(&simbp_output),
    };
    Ok(TrialOutcome {
        relay_output,
        quantized,
        destination_output,
        simbp_output,
        rates,
    })
}

/// Samples a noise triple from `rng` and runs [`sim_bp_trial`] on it.
pub fn soft_df_bp_trial(g: &TannerGraph, p: &RelayParams, t: usize, rng: &mut Stream) -> Result<TrialOutcome> {
    let noise = NoiseTriple::sample(g.n(), p, rng)?;
    sim_bp_trial(g, t, &noise)
}

/// Where campaign trials take their Tanner graph from.
#[derive(Debug, Clone, Copy)]
pub enum GraphSource<'a> {
    /// One graph shared by all trials.
    Fixed(&'a TannerGraph),
    /// A fresh graph of length `n` per trial.
    Ensemble(&'a EdgeDistribution, usize),
}

/// Mean, variance and 95% interval of one erasure-rate family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateStats {
    pub mean: f64,
    pub variance: f64,
    /// Normal-approximation binomial interval over all `n * trials` bits.
    pub ci95: (f64, f64),
}

impl RateStats {
    fn from_samples(xs: &[f64], bits: f64) -> Self {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let variance = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let half = 1.96 * (mean * (1.0 - mean) / bits).sqrt();
        RateStats {
            mean,
            variance,
            ci95: ((mean - half).max(0.0), (mean + half).min(1.0)),
        }
    }
}

/// Aggregate of a Monte-Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub params: RelayParams,
    pub n: usize,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    pub per_trial: Vec<TrialRates>,
    pub relay: RateStats,
    pub quantized: RateStats,
    pub destination: RateStats,
    pub simbp: RateStats,
    /// Trials where sim-BP erased a position that soft-DF-BP revealed, or
    /// where quantization revealed a position the relay erased.
    pub violations: usize,
}

/// Runs `trials` independent trials. Trial `k` uses stream `k` split from
/// `Stream::new(seed)`; with an ensemble source the graph is sampled first
/// from that stream and the noise afterwards. Results do not depend on the
/// worker count.
pub fn run_campaign(
    source: GraphSource<'_>,
    p: &RelayParams,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<CampaignReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("campaign needs at least one trial".into()));
    }
    p.validate()?;
    let root = Stream::new(seed);
    let results = parallel::map_indexed(trials, |k| -> Result<(TrialRates, bool)> {
        let mut rng = root.split(k as u64);
        let sampled;
        let g = match source {
            GraphSource::Fixed(g) => g,
            GraphSource::Ensemble(ed, n) => {
                sampled = sample_graph(ed, n, &mut rng)?;
                &sampled
            }
        };
        let out = soft_df_bp_trial(g, p, t, &mut rng)?;
        let ok = is_degraded(&out.simbp_output, &out.destination_output)?
            && is_degraded(&out.quantized, &out.relay_output)?;
        Ok((out.rates, !ok))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let n = match source {
        GraphSource::Fixed(g) => g.n(),
        GraphSource::Ensemble(_, n) => n,
    };
    let per_trial: Vec<TrialRates> = results.iter().map(|r| r.0).collect();
    let violations = results.iter().filter(|r| r.1).count();
    let bits = (n * trials) as f64;
    let stats = |f: fn(&TrialRates) -> f64| {
        RateStats::from_samples(&per_trial.iter().map(f).collect::<Vec<_>>(), bits)
    };
    Ok(CampaignReport {
        params: *p,
        n,
        t,
        trials,
        seed,
        relay: stats(|r| r.relay),
        quantized: stats(|r| r.quantized),
        destination: stats(|r| r.destination),
        simbp: stats(|r| r.simbp),
        per_trial,
        violations,
    })
}

/// Rate `R (1 - h(epsilon / R))` achievable when the destination's residual
/// erasure rate is `epsilon` at code rate `R`.
pub fn achievable_rate_from_epsilon(rate: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) || !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= epsilon <= R <= 1, got R={rate}, epsilon={epsilon}"
        )));
    }
    if epsilon > rate {
        return Err(Error::InvalidArgument(format!(
            "residual erasure {epsilon} exceeds the rate {rate}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(rate);
    }
    Ok(rate * (1.0 - binary_entropy(epsilon / rate)))
}

/// Convenience wrapper: [`bp_decode_traced`] on the relay input of `noise`.
pub fn relay_trace(g: &TannerGraph, t: usize, noise: &NoiseTriple) -> Result<crate::bec_bp::BpTrace> {
    bp_decode_traced(g, &noise.e2, t, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::sample_graph;
    use proptest::prelude::*;

    fn graph(n: usize, seed: u64) -> TannerGraph {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        sample_graph(&ed, n, &mut Stream::new(seed)).unwrap()
    }

    #[test]
    fn zero_noise_everything_revealed() {
        let g = graph(120, 1);
        let p = RelayParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let out = soft_df_bp_trial(&g, &p, 10, &mut Stream::new(2)).unwrap();
        assert_eq!(out.rates.relay, 0.0);
        assert_eq!(out.rates.destination, 0.0);
        assert_eq!(out.rates.simbp, 0.0);
        assert_eq!(out.destination_output, ErasureWord::zeros(120));
    }

    #[test]
    fn full_quantization_erasure_is_point_to_point() {
        let g = graph(600, 3);
        let mut rng = Stream::new(4);
        let p = RelayParams::new(0.5, 0.45, 0.0, 1.0).unwrap();
        let noise = NoiseTriple::sample(g.n(), &p, &mut rng).unwrap();
        let out = sim_bp_trial(&g, 30, &noise).unwrap();
        let p2p = bp_decode(&g, &noise.e3, 30).unwrap().decisions;
        assert_eq!(out.destination_output, p2p);
        assert_eq!(out.simbp_output, p2p);
    }

    #[test]
    fn relay_messages_match_point_to_point_bp() {
        let g = graph(300, 5);
        let p = RelayParams::new(0.4, 0.7, 0.5, 0.3).unwrap();
        let noise = NoiseTriple::sample(g.n(), &p, &mut Stream::new(6)).unwrap();
        let joint = sim_bp(&g, 12, &noise, true).unwrap();
        let relay = relay_trace(&g, 12, &noise).unwrap();
        assert_eq!(joint.relay_rightbound, relay.rightbound);
        assert_eq!(joint.relay_leftbound, relay.leftbound);
        assert_eq!(joint.relay_decisions, relay.decisions);
    }

    #[test]
    fn campaign_is_reproducible_and_single_trial_matches() {
        let g = graph(400, 7);
        let p = RelayParams::new(0.4, 0.7, 0.5, 0.3).unwrap();
        let a = run_campaign(GraphSource::Fixed(&g), &p, 20, 4, 99).unwrap();
        let b = run_campaign(GraphSource::Fixed(&g), &p, 20, 4, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        let one = run_campaign(GraphSource::Fixed(&g), &p, 20, 1, 99).unwrap();
        let direct = soft_df_bp_trial(&g, &p, 20, &mut Stream::new(99).split(0)).unwrap();
        assert_eq!(one.per_trial[0], direct.rates);
    }

    #[test]
    fn rate_from_epsilon() {
        assert_eq!(achievable_rate_from_epsilon(0.4, 0.0).unwrap(), 0.4);
        assert!(achievable_rate_from_epsilon(0.5, 0.25).unwrap().abs() < 1e-15);
        assert!(achievable_rate_from_epsilon(0.2, 0.3).is_err());
        let r = achievable_rate_from_epsilon(0.5056, 1.54e-5).unwrap();
        assert!((r - 0.5053).abs() < 1e-4, "{r}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(RelayParams::new(1.2, 0.1, 0.0, 0.0).is_err());
        assert!(RelayParams::new(0.2, 0.1, -1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn matched_noise_degradedness(seed in any::<u64>(), d2 in 0.0f64..1.0, d3 in 0.0f64..1.0, dh in 0.0f64..1.0) {
            let g = graph(200, seed ^ 0x55);
            let p = RelayParams::new(d2, d3, 0.0, dh).unwrap();
            let out = soft_df_bp_trial(&g, &p, 25, &mut Stream::new(seed)).unwrap();
            prop_assert!(is_degraded(&out.simbp_output, &out.destination_output).unwrap());
            prop_assert!(is_degraded(&out.quantized, &out.relay_output).unwrap());
        }
    }
}
