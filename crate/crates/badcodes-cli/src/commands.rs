//! One function per subcommand, each returning a [`Report`].

use std::collections::BTreeMap;

use badcodes::benchmarks::{
    bitwise_interference_ber, good_code_interference_bound, hk_badness_min_snr, hk_informations, mmse_curves,
    relay_reports, r_mud, r_sud, shannon_limit_biawgn, InterferenceParams,
};
use badcodes::density_evolution::{de_bec, de_threshold, sim_de_with, SimDeOptions};
use badcodes::ensemble::{enumerate_stopping_sets, sample_graph, ENUMERATION_LIMIT};
use badcodes::info_bounds::{f_alpha, good_code_min_dhat2, BoundContext};
use badcodes::interference::{simulate_ic, soft_ic_de_with, Conditioning, IcDeConfig, WordModel};
use badcodes::llr_density::LlrGrid;
use badcodes::optimizer::{
    optimize_interference, optimize_relay, InterferenceOptimizerOptions, OptimizerState, RelayOptimizerOptions,
};
use badcodes::relay::{run_campaign, GraphSource, RelayParams};
use badcodes::{EdgeDistribution, Stream};

use crate::args::*;
use crate::error::CliError;
use crate::output::{num, Report, Table};

type Outcome = Result<Report, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Builds the edge distribution named by the ensemble flags.
pub fn ensemble(a: &EnsembleArgs) -> Result<EdgeDistribution, CliError> {
    match (&a.regular, &a.lambda, &a.rho) {
        (Some(r), None, None) => {
            let parts: Vec<&str> = r.split(',').map(str::trim).collect();
            let [c, d] = parts.as_slice() else {
                return Err(invalid(format!("--regular expects `c,d`, got `{r}`")));
            };
            let parse = |s: &str| s.parse::<u32>().map_err(|_| invalid(format!("bad degree `{s}` in --regular")));
            Ok(EdgeDistribution::regular(parse(c)?, parse(d)?)?)
        }
        (None, Some(l), Some(r)) => Ok(EdgeDistribution::normalized(
            EdgeDistribution::parse_side(l)?,
            EdgeDistribution::parse_side(r)?,
        )?),
        _ => Err(invalid("an ensemble is required: --regular c,d or --lambda with --rho")),
    }
}

/// Parses `key=value` pairs, requiring exactly the keys in `keys`.
pub fn key_values(items: &[String], keys: &[&str]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in items.iter().flat_map(|s| s.split_whitespace()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| invalid(format!("expected KEY=VALUE, got `{item}`")))?;
        if !keys.contains(&k) {
            return Err(invalid(format!("unknown key `{k}`, expected one of {keys:?}")));
        }
        let v: f64 = v.parse().map_err(|_| invalid(format!("bad number `{v}` for `{k}`")))?;
        out.insert(k.to_string(), v);
    }
    if let Some(missing) = keys.iter().find(|k| !out.contains_key(**k)) {
        return Err(invalid(format!("missing key `{missing}`")));
    }
    Ok(out)
}

/// Parses a degree list such as `2-30,50,100`.
pub fn degree_list(s: &str) -> Result<Vec<u32>, CliError> {
    let mut out = Vec::new();
    for piece in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| invalid(format!("bad degree `{t}`")));
        match piece.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(invalid(format!("empty degree range `{piece}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(piece)?),
        }
    }
    if out.is_empty() {
        return Err(invalid("empty degree list"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn lambda_text(lambda: &BTreeMap<u32, f64>) -> String {
    lambda.iter().map(|(d, w)| format!("{d}:{}", num(*w))).collect::<Vec<_>>().join(";")
}

fn interference_params(l: &InterferenceLink) -> Result<InterferenceParams, CliError> {
    Ok(InterferenceParams::new(l.h, l.sigma)?)
}

fn de_config(g: &GridArgs, t_max: usize, tol: f64) -> IcDeConfig {
    IcDeConfig {
        grid: LlrGrid { k: g.bins, l_max: g.l_max },
        t_max,
        tol,
        conditioning: match g.conditioning {
            ConditioningArg::Averaged => Conditioning::Averaged,
            ConditioningArg::AllPlus => Conditioning::AllPlus,
        },
        z_cells: g.z_cells,
        extra_degrees: Vec::new(),
        partial_threshold: g.partial_threshold,
    }
}

pub fn run(cmd: &Command) -> Outcome {
    match cmd {
        Command::DeBec(a) => de_bec_cmd(a),
        Command::SimDe(a) => sim_de_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::MinDhat2(a) => min_dhat2_cmd(a),
        Command::Rates(a) => rates_cmd(a),
        Command::MmseCurves(a) => mmse_cmd(a),
        Command::SoftIcDe(a) => soft_ic_de_cmd(a),
        Command::SimulateRelay(a) => simulate_relay_cmd(a),
        Command::SimulateIc(a) => simulate_ic_cmd(a),
        Command::OptimizeRelay(a) => optimize_relay_cmd(a),
        Command::OptimizeIc(a) => optimize_ic_cmd(a),
        Command::HkCheck(a) => hk_cmd(a),
        Command::StoppingOracle(a) => stopping_cmd(a),
    }
}

fn de_bec_cmd(a: &DeBecArgs) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let de = de_bec(&ed, a.delta, a.t)?;
    let mut report = Report {
        summary: vec![
            format!("erasure = {}", num(de.final_bit_erasure)),
            format!("iterations = {}", de.per_iteration.len()),
            format!("converged = {}", de.converged),
        ],
        table: Table::new(&["iteration", "rightbound_erasure"]),
    };
    if a.threshold {
        report.summary.push(format!("threshold = {}", num(de_threshold(&ed))));
    }
    for (l, x) in de.per_iteration.iter().enumerate() {
        report.table.push(vec![l.to_string(), num(*x)]);
    }
    Ok(report)
}

fn sim_de_cmd(a: &SimDeArgs) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let opts = SimDeOptions { t_max: a.t_max, tol: a.tol };
    let de = sim_de_with(&ed, a.links.d2, a.links.d3, a.dhat2, opts)?;
    let mut table = Table::new(&["iteration", "relay_rightbound", "destination_rightbound", "destination_erasure"]);
    for (l, pe) in de.pe_trajectory.iter().enumerate() {
        let r = &de.rightbound[l];
        table.push(vec![
            (l + 1).to_string(),
            num(r.relay_erasure()),
            num(r.destination_erasure()),
            num(*pe),
        ]);
    }
    Ok(Report {
        summary: vec![
            format!("P_e = {}", num(de.pe_final)),
            format!("relay erasure = {}", num(de.final_density.relay_erasure())),
            format!("iterations = {}", de.iterations),
            format!("converged = {}", de.converged),
        ],
        table,
    })
}

fn bounds_cmd(a: &BoundsArgs) -> Outcome {
    if a.points < 2 {
        return Err(invalid("--points must be at least 2"));
    }
    let ed = ensemble(&a.ensemble)?;
    let ctx = BoundContext::new(&ed, a.links.d2, a.links.d3)?;
    let grid: Vec<f64> = (0..a.points).map(|k| k as f64 / (a.points - 1) as f64).collect();
    let mut table = Table::new(&["dhat2", "i_plus", "i1_plus", "i2_plus", "naive", "good_code"]);
    for row in ctx.curves(&grid) {
        table.push(row.iter().map(|v| num(*v)).collect());
    }
    Ok(Report {
        summary: vec![format!("i_plus(0) = {}", num(ctx.i_plus(0.0)))],
        table,
    })
}

fn min_dhat2_cmd(a: &MinDhat2Args) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let ctx = BoundContext::new(&ed, a.links.d2, a.links.d3)?;
    let q = ctx.min_quantization_noise(a.co);
    let good = good_code_min_dhat2(a.links.d2, a.links.d3, a.co);
    let at = ctx.i_plus(q);
    let mut table = Table::new(&["c_o", "min_dhat2", "good_code_dhat2", "i_plus_at_min"]);
    table.push(vec![num(a.co), num(q), num(good), num(at)]);
    Ok(Report {
        summary: vec![
            format!("min dhat2 = {}", num(q)),
            format!("good-code dhat2 = {}", num(good)),
            format!("i_plus(min dhat2) = {}", num(at)),
        ],
        table,
    })
}

fn rates_cmd(a: &RatesArgs) -> Outcome {
    if a.relay.is_empty() && a.interference.is_empty() {
        return Err(invalid("give --relay d2=.. d3=.. co=.. and/or --interference h=.. sigma=.."));
    }
    let mut report = Report {
        summary: Vec::new(),
        table: Table::new(&["name", "value", "conditional"]),
    };
    let add = |report: &mut Report, name: &str, value: f64, conditional: bool| {
        report.summary.push(format!("{name} = {}", num(value)));
        report.table.push(vec![name.to_string(), num(value), conditional.to_string()]);
    };
    if !a.relay.is_empty() {
        let kv = key_values(&a.relay, &["d2", "d3", "co"])?;
        let p = RelayParams::new(kv["d2"], kv["d3"], kv["co"], 0.0)?;
        for r in relay_reports(&p) {
            add(&mut report, &r.name, r.value, r.conditional);
        }
    }
    if !a.interference.is_empty() {
        let kv = key_values(&a.interference, &["h", "sigma"])?;
        let p = InterferenceParams::new(kv["h"], kv["sigma"])?;
        add(&mut report, "R_MUD", r_mud(&p)?, false);
        add(&mut report, "R_SUD", r_sud(&p)?, false);
        add(&mut report, "R_good", good_code_interference_bound(&p)?, false);
        add(&mut report, "bitwise_interference_ber", bitwise_interference_ber(&p)?, false);
    }
    Ok(report)
}

fn mmse_cmd(a: &MmseArgs) -> Outcome {
    if a.points < 2 || !(a.snr_max > a.snr_min) {
        return Err(invalid("need --points >= 2 and --snr-max > --snr-min"));
    }
    let step = (a.snr_max - a.snr_min) / (a.points - 1) as f64;
    let grid: Vec<f64> = (0..a.points).map(|k| a.snr_min + k as f64 * step).collect();
    let mut table = Table::new(&["snr", "uncoded", "good_code"]);
    for r in mmse_curves(&grid, a.rate)? {
        table.push(vec![num(r.snr), num(r.uncoded), num(r.good_code)]);
    }
    Ok(Report {
        summary: vec![format!("Shannon limit snr = {}", num(shannon_limit_biawgn(a.rate)?))],
        table,
    })
}

fn soft_ic_de_cmd(a: &SoftIcDeArgs) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let p = interference_params(&a.link)?;
    let r = soft_ic_de_with(&ed, &p, &de_config(&a.grid, a.t_max, a.tol))?;
    let mut table = Table::new(&["iteration", "primary_ber", "interference_ber", "symmetry_defect"]);
    for l in 0..r.iterations {
        table.push(vec![
            (l + 1).to_string(),
            num(r.primary_ber[l]),
            num(r.interference_ber[l]),
            num(r.symmetry_defect[l]),
        ]);
    }
    let frozen = r.frozen_at.map_or("never".to_string(), |t| t.to_string());
    Ok(Report {
        summary: vec![
            format!("primary BER = {}", num(r.final_primary_ber())),
            format!("interference BER = {}", num(r.final_interference_ber())),
            format!("iterations = {}", r.iterations),
            format!("converged = {}", r.converged),
            format!("interference decoder frozen at = {frozen}"),
        ],
        table,
    })
}

fn simulate_relay_cmd(a: &SimulateRelayArgs) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let p = RelayParams::new(a.links.d2, a.links.d3, a.co, a.dhat2)?;
    let rep = run_campaign(GraphSource::Ensemble(&ed, a.n), &p, a.t, a.trials, a.seed)?;
    let mut table = Table::new(&["trial", "relay", "quantized", "destination", "simbp"]);
    for (k, r) in rep.per_trial.iter().enumerate() {
        table.push(vec![k.to_string(), num(r.relay), num(r.quantized), num(r.destination), num(r.simbp)]);
    }
    let line = |name: &str, s: &badcodes::relay::RateStats| {
        format!("{name} = {} (95% CI {} .. {})", num(s.mean), num(s.ci95.0), num(s.ci95.1))
    };
    Ok(Report {
        summary: vec![
            line("relay erasure", &rep.relay),
            line("quantized erasure", &rep.quantized),
            line("destination erasure", &rep.destination),
            line("sim-BP erasure", &rep.simbp),
            format!("degradedness violations = {}", rep.violations),
        ],
        table,
    })
}

fn simulate_ic_cmd(a: &SimulateIcArgs) -> Outcome {
    let ed = ensemble(&a.ensemble)?;
    let p = interference_params(&a.link)?;
    let words = match a.words {
        WordsArg::Random => WordModel::Random,
        WordsArg::AllPlus => WordModel::AllPlus,
    };
    let c = simulate_ic(&ed, &p, a.n, a.t, a.trials, a.seed, words)?;
    let mut table = Table::new(&["iteration", "primary_ber", "interference_ber"]);
    for l in 0..c.primary_ber.len() {
        table.push(vec![(l + 1).to_string(), num(c.primary_ber[l]), num(c.interference_ber[l])]);
    }
    Ok(Report {
        summary: vec![
            format!("primary BER = {}", num(*c.primary_ber.last().unwrap_or(&f64::NAN))),
            format!("interference BER = {}", num(*c.interference_ber.last().unwrap_or(&f64::NAN))),
        ],
        table,
    })
}

fn optimizer_report(state: &OptimizerState, relay: bool) -> Report {
    let columns: &[&'static str] = if relay {
        &["iteration", "design_rate", "dhat2", "error_rate", "admissible", "accepted", "min_slack", "note", "lambda"]
    } else {
        &[
            "iteration",
            "design_rate",
            "error_rate",
            "interference_ber",
            "admissible",
            "accepted",
            "min_slack",
            "note",
            "lambda",
        ]
    };
    let mut table = Table::new(columns);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for e in &state.log {
        let mut row = vec![e.iteration.to_string(), num(e.design_rate)];
        if relay {
            row.push(opt(e.dhat2));
            row.push(num(e.error_rate));
        } else {
            row.push(num(e.error_rate));
            row.push(opt(e.interference_ber));
        }
        row.extend([
            e.admissible.to_string(),
            e.accepted.to_string(),
            opt(e.min_constraint_slack),
            e.note.clone(),
            lambda_text(&e.lambda),
        ]);
        table.push(row);
    }
    let rates = state.accepted_rates();
    let mut summary = vec![
        format!("accepted steps = {}", rates.len().saturating_sub(1)),
        format!("design rate = {}", num(state.ensemble.design_rate())),
        format!("lambda = {}", lambda_text(state.ensemble.lambda())),
    ];
    if let Some(q) = state.dhat2 {
        summary.push(format!("dhat2 = {}", num(q)));
    }
    if let Some(last) = state.log.last().filter(|e| !e.note.is_empty()) {
        summary.push(format!("stopped: {}", last.note));
    }
    Report { summary, table }
}

fn optimize_relay_cmd(a: &OptimizeRelayArgs) -> Outcome {
    let seed = ensemble(&a.ensemble)?;
    let p = RelayParams::new(a.links.d2, a.links.d3, a.co, 0.0)?;
    let opts = RelayOptimizerOptions {
        eta: a.climb.eta,
        t: a.t_max,
        max_iters: a.climb.max_iters,
        candidates: degree_list(&a.climb.candidates)?,
        epsilon_target: a.epsilon_target,
    };
    Ok(optimizer_report(&optimize_relay(&seed, &p, &opts)?, true))
}

fn optimize_ic_cmd(a: &OptimizeIcArgs) -> Outcome {
    let seed = ensemble(&a.ensemble)?;
    let p = interference_params(&a.link)?;
    let opts = InterferenceOptimizerOptions {
        eta: a.climb.eta,
        eta_prime: a.eta_prime,
        max_iters: a.climb.max_iters,
        candidates: degree_list(&a.climb.candidates)?,
        ber_target: a.ber_target,
        de: de_config(&a.grid, a.t_max, a.tol),
    };
    Ok(optimizer_report(&optimize_interference(&seed, &p, &opts)?, false))
}

fn hk_cmd(a: &HkArgs) -> Outcome {
    let snr = hk_badness_min_snr(a.s, a.t, a.pu)?;
    let (iu, iw, iuw) = hk_informations(snr, a.pu)?;
    let limit = shannon_limit_biawgn(a.s + a.t)?;
    let mut table = Table::new(&["s", "t", "p_u", "min_snr", "i_u", "i_w", "i_uw"]);
    table.push([a.s, a.t, a.pu, snr, iu, iw, iuw].iter().map(|v| num(*v)).collect());
    Ok(Report {
        summary: vec![
            format!("min snr = {}", num(snr)),
            format!("Shannon limit snr at rate s + t = {}", num(limit)),
            format!("bad (min snr above the limit) = {}", snr > limit),
        ],
        table,
    })
}

fn stopping_cmd(a: &StoppingArgs) -> Outcome {
    if a.n == 0 || a.n > ENUMERATION_LIMIT {
        return Err(invalid(format!("--n must lie in 1..={ENUMERATION_LIMIT}")));
    }
    if a.graphs == 0 {
        return Err(invalid("--graphs must be positive"));
    }
    let ed = ensemble(&a.ensemble)?;
    let root = Stream::new(a.seed);
    let mut totals = vec![0.0; a.n + 1];
    for k in 0..a.graphs {
        let mut rng = root.split(k as u64);
        let g = sample_graph(&ed, a.n, &mut rng)?;
        for (t, c) in totals.iter_mut().zip(enumerate_stopping_sets(&g, a.n)?) {
            *t += c as f64;
        }
    }
    let mut table = Table::new(&["size", "alpha", "mean_count", "growth_rate", "f_alpha"]);
    let mut worst = f64::NEG_INFINITY;
    for (size, total) in totals.iter().enumerate() {
        let alpha = size as f64 / a.n as f64;
        let mean = total / a.graphs as f64;
        let rate = mean.log2() / a.n as f64;
        let bound = if size > 0 && size < a.n { f_alpha(&ed, alpha).ok() } else { None };
        if let Some(b) = bound {
            if mean > 0.0 {
                worst = worst.max(rate - b);
            }
        }
        table.push(vec![
            size.to_string(),
            num(alpha),
            num(mean),
            num(rate),
            bound.map(num).unwrap_or_default(),
        ]);
    }
    Ok(Report {
        summary: vec![
            format!("graphs = {}", a.graphs),
            format!("largest growth_rate - f_alpha = {}", num(worst)),
        ],
        table,
    })
}
