//! Degree-distribution hill climbing for fixed `rho`: at every step a
//! linear program maximizes the design rate over `lambda+` close to the
//! current `lambda`, and the candidate is kept only if it re-verifies as
//! admissible.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::benchmarks::InterferenceParams;
use crate::density_evolution::{pair_singletons, sim_de_with, SimDeOptions, SimDeResult, SIM_DE_TOL, SIM_DE_T_MAX};
use crate::ensemble::EdgeDistribution;
use crate::error::{Error, Result};
use crate::info_bounds::BoundContext;
use crate::interference::{IcDeConfig, IcDeEngine, SoftIcDeResult};
use crate::llr_density::LlrDensity;
use crate::relay::RelayParams;

/// Feasibility tolerance of LP solutions on normalized rows.
pub const LP_FEASIBILITY_TOL: f64 = 1e-9;
/// Absolute slack added to closeness rows so that `lambda+ = lambda` is
/// feasible despite rounding.
pub const CLOSENESS_SLACK: f64 = 1e-12;
/// Smallest design-rate gain counted as an improvement.
pub const RATE_GAIN_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const DENSE_ROW_LIMIT: usize = 256;
const ROWS_PER_ROUND: usize = 64;

/// Row relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective . x` subject to the rows, `x >= 0` and the optional
/// upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub upper: Vec<Option<f64>>,
}

impl LpProblem {
    /// Problem over `[0, 1]^n`.
    pub fn unit_box(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            upper: vec![Some(1.0); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::InvalidArgument("linear program without variables".into()));
        }
        if self.upper.len() != n {
            return Err(Error::LengthMismatch {
                left: self.upper.len(),
                right: n,
            });
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(Error::InvalidArgument("non-finite objective".into()));
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::LengthMismatch {
                    left: c.coeffs.len(),
                    right: n,
                });
            }
            if !finite(&c.coeffs) || !c.rhs.is_finite() {
                return Err(Error::InvalidArgument("non-finite constraint entry".into()));
            }
        }
        if self.upper.iter().flatten().any(|u| !(u.is_finite() && *u >= 0.0)) {
            return Err(Error::InvalidArgument("upper bounds must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(row_violation(c, x));
        }
        for (v, u) in x.iter().zip(&self.upper) {
            worst = worst.max(-v);
            if let Some(u) = u {
                worst = worst.max(v - u);
            }
        }
        worst
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn row_violation(c: &Constraint, x: &[f64]) -> f64 {
    let lhs = dot(&c.coeffs, x);
    match c.relation {
        Relation::Le => lhs - c.rhs,
        Relation::Ge => c.rhs - lhs,
        Relation::Eq => (lhs - c.rhs).abs(),
    }
}

/// Result of [`solve_lp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
}

/// Row scaled so that its largest coefficient magnitude is one.
fn normalized(c: &Constraint) -> Constraint {
    let scale = c.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return c.clone();
    }
    Constraint {
        coeffs: c.coeffs.iter().map(|v| v / scale).collect(),
        relation: c.relation,
        rhs: c.rhs / scale,
    }
}

/// Solves the linear program with a dense two-phase simplex using Bland's
/// pivoting rule. Tall problems are solved by constraint generation: the
/// most violated rows are added to a working set until the working
/// solution satisfies every row.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome> {
    p.validate()?;
    let rows: Vec<Constraint> = p.constraints.iter().map(normalized).collect();
    if rows.len() <= DENSE_ROW_LIMIT {
        return dense_simplex(p, &rows);
    }
    let mut active: BTreeSet<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, c)| c.relation == Relation::Eq)
        .map(|(k, _)| k)
        .collect();
    loop {
        let working: Vec<Constraint> = active.iter().map(|&k| rows[k].clone()).collect();
        let outcome = match dense_simplex(p, &working) {
            Err(Error::Unbounded) if p.upper.iter().any(|u| u.is_none()) => return dense_simplex(p, &rows),
            other => other?,
        };
        let LpOutcome::Optimal { x, .. } = &outcome else {
            return Ok(outcome);
        };
        let mut violated: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .filter(|(k, _)| !active.contains(k))
            .map(|(k, c)| (row_violation(c, x), k))
            .filter(|(v, _)| *v > LP_FEASIBILITY_TOL * 1e-2)
            .collect();
        if violated.is_empty() {
            return Ok(outcome);
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take(ROWS_PER_ROUND).map(|v| v.1));
    }
}

/// Solves `p` starting from a point `x0` that satisfies every row and
/// bound. The problem is rewritten in displacement variables
/// `x = x0 + d_plus - d_minus`, in which every row reads `a . d <= r` with
/// `r >= 0`, so the slack basis is feasible and no first phase is needed.
/// Rows with a negative residual within [`LP_FEASIBILITY_TOL`] are treated
/// as tight.
pub fn solve_lp_near(p: &LpProblem, x0: &[f64]) -> Result<LpOutcome> {
    p.validate()?;
    let n = p.num_vars();
    if x0.len() != n {
        return Err(Error::LengthMismatch { left: x0.len(), right: n });
    }
    let rows: Vec<Constraint> = p.constraints.iter().map(normalized).collect();
    if rows.iter().any(|c| row_violation(c, x0) > LP_FEASIBILITY_TOL) {
        return Err(Error::InvalidArgument("starting point violates a constraint".into()));
    }
    let mut shifted = LpProblem {
        objective: p.objective.iter().chain(p.objective.iter()).enumerate().map(|(k, c)| if k < n { *c } else { -c }).collect(),
        constraints: Vec::with_capacity(rows.len()),
        upper: Vec::with_capacity(2 * n),
    };
    for (j, u) in p.upper.iter().enumerate() {
        shifted.upper.push(u.map(|u| (u - x0[j]).max(0.0)));
    }
    for &x in x0 {
        shifted.upper.push(Some(x.max(0.0)));
    }
    let split = |a: &[f64], sign: f64| -> Vec<f64> {
        a.iter().map(|v| sign * v).chain(a.iter().map(|v| -sign * v)).collect()
    };
    for c in &rows {
        let slack = c.rhs - dot(&c.coeffs, x0);
        if matches!(c.relation, Relation::Le | Relation::Eq) {
            shifted.push(split(&c.coeffs, 1.0), Relation::Le, slack.max(0.0));
        }
        if matches!(c.relation, Relation::Ge | Relation::Eq) {
            shifted.push(split(&c.coeffs, -1.0), Relation::Le, (-slack).max(0.0));
        }
    }
    Ok(match solve_lp(&shifted)? {
        LpOutcome::Optimal { x: d, .. } => {
            let x: Vec<f64> = (0..n).map(|j| (x0[j] + d[j] - d[n + j]).max(0.0)).collect();
            let value = dot(&p.objective, &x);
            LpOutcome::Optimal { x, value }
        }
        LpOutcome::Infeasible => LpOutcome::Infeasible,
    })
}

struct Tableau {
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    rows: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    /// Pivots on `(pr, pc)`; row `rows` holds the reduced costs.
    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let piv = self.at(pr, pc);
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= piv;
        }
        let prow: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f != 0.0 {
                for (v, p) in self.data[r * w..(r + 1) * w].iter_mut().zip(&prow) {
                    *v -= f * p;
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Bland iterations over columns allowed by `allowed`. Returns false on
    /// an unbounded direction.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        let rhs = self.width - 1;
        loop {
            let obj = self.rows;
            let Some(pc) = (0..rhs).find(|&c| allowed[c] && self.at(obj, c) > PIVOT_EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.at(r, rhs) / a;
                    let better = match best {
                        None => true,
                        Some((br, bb, _)) => ratio < br - 1e-15 || (ratio <= br + 1e-15 && self.basis[r] < bb),
                    };
                    if better {
                        best = Some((ratio, self.basis[r], r));
                    }
                }
            }
            let Some((_, _, pr)) = best else {
                return false;
            };
            self.pivot(pr, pc);
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let (w, obj) = (self.width, self.rows);
        let mut row = vec![0.0; w];
        row[..cost.len()].copy_from_slice(cost);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (v, t) in row.iter_mut().zip(&self.data[r * w..(r + 1) * w]) {
                    *v -= cb * t;
                }
            }
        }
        self.data[obj * w..(obj + 1) * w].copy_from_slice(&row);
    }
}

fn dense_simplex(p: &LpProblem, rows: &[Constraint]) -> Result<LpOutcome> {
    let n = p.num_vars();
    let mut all: Vec<Constraint> = rows.to_vec();
    for (j, u) in p.upper.iter().enumerate() {
        if let Some(u) = u {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            all.push(Constraint {
                coeffs,
                relation: Relation::Le,
                rhs: *u,
            });
        }
    }
    for c in &mut all {
        if c.rhs < 0.0 {
            for v in &mut c.coeffs {
                *v = -*v;
            }
            c.rhs = -c.rhs;
            c.relation = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = all.len();
    let n_slack = all.iter().filter(|c| c.relation != Relation::Eq).count();
    let n_art = all.iter().filter(|c| c.relation != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let width = cols + 1;
    let mut t = Tableau {
        width,
        data: vec![0.0; (m + 1) * width],
        basis: vec![0; m],
        rows: m,
    };
    let mut is_art = vec![false; cols];
    let (mut next_slack, mut next_art) = (n, n + n_slack);
    for (r, c) in all.iter().enumerate() {
        t.data[r * width..r * width + n].copy_from_slice(&c.coeffs);
        t.data[r * width + cols] = c.rhs;
        match c.relation {
            Relation::Le => {
                t.data[r * width + next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.data[r * width + next_slack] = -1.0;
                next_slack += 1;
                t.data[r * width + next_art] = 1.0;
                t.basis[r] = next_art;
                is_art[next_art] = true;
                next_art += 1;
            }
            Relation::Eq => {
                t.data[r * width + next_art] = 1.0;
                t.basis[r] = next_art;
                is_art[next_art] = true;
                next_art += 1;
            }
        }
    }
    if n_art > 0 {
        let cost: Vec<f64> = (0..cols).map(|c| if is_art[c] { -1.0 } else { 0.0 }).collect();
        t.set_objective(&cost);
        t.optimize(&vec![true; cols]);
        let infeasibility: f64 = (0..m).filter(|&r| is_art[t.basis[r]]).map(|r| t.at(r, cols)).sum();
        if infeasibility > LP_FEASIBILITY_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        for r in 0..m {
            if is_art[t.basis[r]] {
                if let Some(c) = (0..cols).find(|&c| !is_art[c] && t.at(r, c).abs() > PIVOT_EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&p.objective);
    t.set_objective(&cost);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if !t.optimize(&allowed) {
        return Err(Error::Unbounded);
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.at(r, cols).max(0.0);
        }
    }
    let value = dot(&p.objective, &x);
    Ok(LpOutcome::Optimal { x, value })
}

/// One record of an optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerLogEntry {
    pub iteration: usize,
    pub lambda: BTreeMap<u32, f64>,
    pub design_rate: f64,
    /// Quantization noise of the relay variant.
    pub dhat2: Option<f64>,
    /// Final error measure checked for admissibility: destination erasure
    /// probability (relay) or primary BER (interference).
    pub error_rate: f64,
    pub interference_ber: Option<f64>,
    pub admissible: bool,
    pub accepted: bool,
    /// Smallest slack of the closeness rows at the LP solution.
    pub min_constraint_slack: Option<f64>,
    pub note: String,
}

/// Current state and full log of an optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub ensemble: EdgeDistribution,
    pub dhat2: Option<f64>,
    pub log: Vec<OptimizerLogEntry>,
}

impl OptimizerState {
    /// Design rates of the accepted iterates, starting with the seed.
    pub fn accepted_rates(&self) -> Vec<f64> {
        self.log.iter().filter(|e| e.accepted).map(|e| e.design_rate).collect()
    }
}

/// Default candidate degrees `{2..30, 50, 100}`.
pub fn default_candidates() -> Vec<u32> {
    (2..=30).chain([50, 100]).collect()
}

/// Options of [`optimize_relay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayOptimizerOptions {
    pub eta: f64,
    /// sim-DE iteration budget.
    pub t: usize,
    pub max_iters: usize,
    pub candidates: Vec<u32>,
    /// Largest admissible final destination erasure probability.
    pub epsilon_target: f64,
}

impl Default for RelayOptimizerOptions {
    fn default() -> Self {
        RelayOptimizerOptions {
            eta: 0.1,
            t: SIM_DE_T_MAX,
            max_iters: 50,
            candidates: default_candidates(),
            epsilon_target: 2e-5,
        }
    }
}

struct RelayCheck {
    dhat2: f64,
    de: SimDeResult,
    admissible: bool,
}

fn verify_relay(ed: &EdgeDistribution, p: &RelayParams, opts: &RelayOptimizerOptions) -> Result<RelayCheck> {
    let dhat2 = BoundContext::new(ed, p.delta2, p.delta3)?.min_quantization_noise(p.c_o);
    let de = sim_de_with(
        ed,
        p.delta2,
        p.delta3,
        dhat2,
        SimDeOptions {
            t_max: opts.t,
            tol: SIM_DE_TOL,
        },
    )?;
    let admissible = de.pe_final <= opts.epsilon_target;
    Ok(RelayCheck { dhat2, de, admissible })
}

/// Support and weights of an LP solution, renormalized to sum to one.
fn lambda_of(degrees: &[u32], x: &[f64]) -> BTreeMap<u32, f64> {
    let kept: Vec<(u32, f64)> = degrees
        .iter()
        .zip(x)
        .filter(|(_, &v)| v > 1e-12)
        .map(|(&d, &v)| (d, v))
        .collect();
    let total: f64 = kept.iter().map(|k| k.1).sum();
    kept.into_iter().map(|(d, v)| (d, v / total)).collect()
}

fn support_with(ed: &EdgeDistribution, candidates: &[u32]) -> Vec<u32> {
    let mut set: BTreeSet<u32> = ed.lambda().keys().copied().collect();
    set.extend(candidates.iter().copied().filter(|&d| d >= 2));
    set.into_iter().collect()
}

/// Adds `|a . x - b| <= bound` as two rows.
fn push_abs(lp: &mut LpProblem, a: Vec<f64>, b: f64, bound: f64) {
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    lp.push(a, Relation::Le, b + bound);
    lp.push(neg, Relation::Le, bound - b);
}

fn add_simplex_rows(lp: &mut LpProblem) {
    let n = lp.num_vars();
    lp.push(vec![1.0; n], Relation::Eq, 1.0);
}

/// Design-rate LP of the relay variant built from a sim-DE run.
pub fn relay_lp(de: &SimDeResult, p: &RelayParams, dhat2: f64, degrees: &[u32], eta: f64) -> LpProblem {
    let mut lp = LpProblem::unit_box(degrees.iter().map(|&i| 1.0 / i as f64).collect());
    add_simplex_rows(&mut lp);
    for l in 1..de.rightbound.len() {
        let singles = pair_singletons(p.delta2, p.delta3, dhat2, &de.leftbound[l - 1], degrees);
        for x2 in 0..2 {
            for x3 in 0..2 {
                let a: Vec<f64> = singles.iter().map(|s| s.p[x2][x3]).collect();
                let cur = de.rightbound[l].p[x2][x3];
                let prev = de.rightbound[l - 1].p[x2][x3];
                push_abs(&mut lp, a, cur, eta * (prev - cur).abs() + CLOSENESS_SLACK);
            }
        }
    }
    lp
}

fn min_slack(lp: &LpProblem, x: &[f64]) -> f64 {
    lp.constraints
        .iter()
        .filter(|c| c.relation == Relation::Le)
        .map(|c| c.rhs - dot(&c.coeffs, x))
        .fold(f64::INFINITY, f64::min)
}

/// Hill climbing on `lambda` for the erasure relay channel. The quantization
/// noise is re-derived from the stopping-set bound at every step and the
/// candidate must reach the erasure target under sim-DE.
pub fn optimize_relay(seed: &EdgeDistribution, p: &RelayParams, opts: &RelayOptimizerOptions) -> Result<OptimizerState> {
    p.validate()?;
    if !(opts.eta >= 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be non-negative, got {}", opts.eta)));
    }
    let check = verify_relay(seed, p, opts)?;
    if !check.admissible {
        return Err(Error::NotAdmissible(format!(
            "sim-DE erasure {:.3e} exceeds {:.1e} at dhat2 = {:.6}",
            check.de.pe_final, opts.epsilon_target, check.dhat2
        )));
    }
    let mut state = OptimizerState {
        ensemble: seed.clone(),
        dhat2: Some(check.dhat2),
        log: vec![OptimizerLogEntry {
            iteration: 0,
            lambda: seed.lambda().clone(),
            design_rate: seed.design_rate(),
            dhat2: Some(check.dhat2),
            error_rate: check.de.pe_final,
            interference_ber: None,
            admissible: true,
            accepted: true,
            min_constraint_slack: None,
            note: "seed".into(),
        }],
    };
    let mut current = check;
    for it in 1..=opts.max_iters {
        let degrees = support_with(&state.ensemble, &opts.candidates);
        let lp = relay_lp(&current.de, p, current.dhat2, &degrees, opts.eta);
        let LpOutcome::Optimal { x, .. } = solve_closeness(&lp, &state.ensemble, &degrees)? else {
            push_stop(&mut state, it, "closeness LP infeasible");
            break;
        };
        let slack = min_slack(&lp, &x);
        let candidate = state.ensemble.with_lambda(lambda_of(&degrees, &x))?;
        if candidate.design_rate() <= state.ensemble.design_rate() + RATE_GAIN_TOL {
            push_stop(&mut state, it, "no design-rate gain");
            break;
        }
        let next = verify_relay(&candidate, p, opts)?;
        state.log.push(OptimizerLogEntry {
            iteration: it,
            lambda: candidate.lambda().clone(),
            design_rate: candidate.design_rate(),
            dhat2: Some(next.dhat2),
            error_rate: next.de.pe_final,
            interference_ber: None,
            admissible: next.admissible,
            accepted: next.admissible,
            min_constraint_slack: Some(slack),
            note: String::new(),
        });
        if !next.admissible {
            break;
        }
        state.ensemble = candidate;
        state.dhat2 = Some(next.dhat2);
        current = next;
    }
    Ok(state)
}

/// Solves a closeness LP from the current distribution when it is feasible
/// and from scratch otherwise.
fn solve_closeness(lp: &LpProblem, ed: &EdgeDistribution, degrees: &[u32]) -> Result<LpOutcome> {
    let x0: Vec<f64> = degrees.iter().map(|d| ed.lambda().get(d).copied().unwrap_or(0.0)).collect();
    match solve_lp_near(lp, &x0) {
        Err(Error::InvalidArgument(_)) => solve_lp(lp),
        other => other,
    }
}

fn push_stop(state: &mut OptimizerState, it: usize, note: &str) {
    let last = state.log.last().cloned().expect("seed entry");
    state.log.push(OptimizerLogEntry {
        iteration: it,
        accepted: false,
        min_constraint_slack: None,
        note: note.into(),
        ..last
    });
}

/// `Phi(P) = E[ln(1 + e^{-L})]`.
pub fn phi_functional(d: &LlrDensity) -> f64 {
    d.phi()
}

/// Options of [`optimize_interference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceOptimizerOptions {
    pub eta: f64,
    pub eta_prime: f64,
    pub max_iters: usize,
    pub candidates: Vec<u32>,
    /// Largest admissible primary BER.
    pub ber_target: f64,
    /// Density-evolution settings; `partial_threshold` enables the
    /// interference-decoder freeze.
    pub de: IcDeConfig,
}

impl Default for InterferenceOptimizerOptions {
    fn default() -> Self {
        InterferenceOptimizerOptions {
            eta: 0.1,
            eta_prime: 0.02,
            max_iters: 50,
            candidates: default_candidates(),
            ber_target: 1e-5,
            de: IcDeConfig::default(),
        }
    }
}

/// Design-rate LP of the interference variant built from a density
/// evolution run that tracked every degree in `degrees`.
pub fn interference_lp(
    de: &SoftIcDeResult,
    rho: &BTreeMap<u32, f64>,
    degrees: &[u32],
    eta: f64,
    eta_prime: f64,
) -> LpProblem {
    let mut lp = LpProblem::unit_box(degrees.iter().map(|&i| 1.0 / i as f64).collect());
    add_simplex_rows(&mut lp);
    let ln2 = std::f64::consts::LN_2;
    for tr in [&de.primary, &de.interference] {
        for l in 1..=de.iterations {
            let a: Vec<f64> = degrees.iter().map(|i| tr.s_deg[i][l - 1]).collect();
            let (cur, prev) = (tr.s[l], tr.s[l - 1]);
            push_abs(&mut lp, a, cur, eta * (prev - cur).abs() + CLOSENESS_SLACK);

            let cur = tr.s_tilde[l - 1];
            let prev = if l == 1 { ln2 } else { tr.s_tilde[l - 2] };
            let bound = eta * (prev - cur).abs();
            let up: Vec<f64> = degrees
                .iter()
                .map(|i| ((tr.s_tilde_deg[i][l - 1] - cur) - bound) / *i as f64)
                .collect();
            let down: Vec<f64> = degrees
                .iter()
                .map(|i| (-(tr.s_tilde_deg[i][l - 1] - cur) - bound) / *i as f64)
                .collect();
            lp.push(up, Relation::Le, CLOSENESS_SLACK);
            lp.push(down, Relation::Le, CLOSENESS_SLACK);
        }
    }
    if let Some(k2) = degrees.iter().position(|&d| d == 2) {
        let rho_slope: f64 = rho.iter().map(|(&j, &w)| (j as f64 - 1.0) * w).sum();
        let mut a = vec![0.0; degrees.len()];
        a[k2] = rho_slope;
        lp.push(a, Relation::Le, (1.0 - eta_prime) * de.stability_bhattacharyya);
    }
    lp
}

/// Hill climbing on `lambda` for the symmetric BIAWGN interference channel,
/// with admissibility judged by the primary BER under density evolution.
pub fn optimize_interference(
    seed: &EdgeDistribution,
    p: &InterferenceParams,
    opts: &InterferenceOptimizerOptions,
) -> Result<OptimizerState> {
    p.validate()?;
    if !(opts.eta >= 0.0) || !(0.0..1.0).contains(&opts.eta_prime) {
        return Err(Error::InvalidArgument("eta must be non-negative and eta_prime in [0, 1)".into()));
    }
    let engine = IcDeEngine::new(p, &opts.de)?;
    let run = |ed: &EdgeDistribution| -> Result<SoftIcDeResult> {
        let mut cfg = opts.de.clone();
        cfg.extra_degrees = support_with(ed, &opts.candidates);
        engine.run(ed, &cfg)
    };
    let mut de = run(seed)?;
    if !(de.final_primary_ber() <= opts.ber_target) {
        return Err(Error::NotAdmissible(format!(
            "primary BER {:.3e} exceeds {:.1e}",
            de.final_primary_ber(),
            opts.ber_target
        )));
    }
    let entry = |it: usize, ed: &EdgeDistribution, de: &SoftIcDeResult, ok: bool, slack: Option<f64>| OptimizerLogEntry {
        iteration: it,
        lambda: ed.lambda().clone(),
        design_rate: ed.design_rate(),
        dhat2: None,
        error_rate: de.final_primary_ber(),
        interference_ber: Some(de.final_interference_ber()),
        admissible: ok,
        accepted: ok,
        min_constraint_slack: slack,
        note: if it == 0 { "seed".into() } else { String::new() },
    };
    let mut state = OptimizerState {
        ensemble: seed.clone(),
        dhat2: None,
        log: vec![entry(0, seed, &de, true, None)],
    };
    for it in 1..=opts.max_iters {
        let degrees = support_with(&state.ensemble, &opts.candidates);
        let lp = interference_lp(&de, state.ensemble.rho(), &degrees, opts.eta, opts.eta_prime);
        let LpOutcome::Optimal { x, .. } = solve_closeness(&lp, &state.ensemble, &degrees)? else {
            push_stop(&mut state, it, "closeness LP infeasible");
            break;
        };
        let slack = min_slack(&lp, &x);
        let candidate = state.ensemble.with_lambda(lambda_of(&degrees, &x))?;
        if candidate.design_rate() <= state.ensemble.design_rate() + RATE_GAIN_TOL {
            push_stop(&mut state, it, "no design-rate gain");
            break;
        }
        let next = match run(&candidate) {
            Ok(r) => r,
            Err(Error::GridOverflow { mass }) => {
                let mut e = entry(it, &candidate, &de, false, Some(slack));
                e.note = format!("grid overflow ({mass:.2e})");
                state.log.push(e);
                break;
            }
            Err(e) => return Err(e),
        };
        let ok = next.final_primary_ber() <= opts.ber_target;
        state.log.push(entry(it, &candidate, &next, ok, Some(slack)));
        if !ok {
            break;
        }
        state.ensemble = candidate;
        de = next;
    }
    Ok(state)
}
