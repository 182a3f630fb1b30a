//! Symmetric BIAWGN interference channel: channel sampling, the soft-IC-BP
//! joint decoder on a pair of Tanner graphs coupled through state nodes, and
//! its quantized density evolution.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngExt;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::benchmarks::InterferenceParams;
use crate::ensemble::{sample_with_var_degrees, variable_degrees, EdgeDistribution, SampleOptions, TannerGraph};
use crate::error::{Error, Result};
use crate::llr_density::{CheckTable, Convolver, LlrDensity, LlrGrid, Spectrum};
use crate::parallel;
use crate::quadrature::softplus;
use crate::rng::Stream;

/// Magnitude at which BP messages are clipped.
pub const BP_LLR_CLIP: f64 = 30.0;

/// Saturation mass at the negative grid edge that aborts density evolution.
pub const OVERFLOW_LIMIT: f64 = 1e-3;

/// Which user's bit a state node is estimating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Own gain 1, other gain `h`.
    Primary,
    /// Own gain `h`, other gain 1.
    Interference,
}

impl Role {
    fn gains(self, p: &InterferenceParams) -> (f64, f64) {
        match self {
            Role::Primary => (1.0, p.h),
            Role::Interference => (p.h, 1.0),
        }
    }
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (-(a - b).abs()).exp().ln_1p()
}

/// LLR of the own bit from `y` with the other bit mixed under the prior
/// `q(+1) = logistic(incoming_other)`.
pub fn state_to_variable_llr(y: f64, incoming_other: f64, role: Role, p: &InterferenceParams) -> f64 {
    let (o, g) = role.gains(p);
    let s2 = 2.0 * p.sigma * p.sigma;
    let lq = -softplus(-incoming_other);
    let lq1 = -softplus(incoming_other);
    let e = |mean: f64| -(y - mean) * (y - mean) / s2;
    let num = logaddexp(lq + e(o + g), lq1 + e(o - g));
    let den = logaddexp(lq + e(-o + g), lq1 + e(-o - g));
    num - den
}

fn check_bipolar(x: &[f64]) -> Result<()> {
    if x.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument("words must be bipolar (+1/-1)".into()));
    }
    Ok(())
}

/// `y_i = x1_i + h x2_i + z_i` with `z_i ~ N(0, sigma^2)`.
pub fn sample_interference_channel(
    x1: &[f64],
    x2: &[f64],
    p: &InterferenceParams,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    p.validate()?;
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch {
            left: x1.len(),
            right: x2.len(),
        });
    }
    check_bipolar(x1)?;
    check_bipolar(x2)?;
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(a, b)| {
            let z: f64 = rng.sample(StandardNormal);
            a + p.h * b + p.sigma * z
        })
        .collect())
}

/// How the density evolution conditions on the other user's bit.
///
/// The channel law is invariant only under flipping both users' bits
/// together, so the relative sign of the paired bits matters. `Averaged`
/// fixes the own bit and averages over a uniform relative sign, which
/// describes random codewords (decoded as coset members). `AllPlus` fixes
/// both bits to `+1`, which describes exactly the all-(+1) codeword pair and
/// is optimistic for any other pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conditioning {
    AllPlus,
    Averaged,
}

/// Gaussian quadrature cells over `+-9`: cell edges and exact masses.
fn z_cells(cells: usize) -> (Vec<f64>, Vec<f64>) {
    let phi = |z: f64| 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let w = 18.0 / cells as f64;
    let edges: Vec<f64> = (0..=cells).map(|m| -9.0 + m as f64 * w).collect();
    let mut mass: Vec<f64> = edges.windows(2).map(|e| phi(e[1]) - phi(e[0])).collect();
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    (edges, mass)
}

/// Adds the density of `llr(z)` for standard normal `z`, scaled by `share`,
/// to `mass`. The LLR is interpolated linearly inside each noise cell, so
/// a cell's mass is spread over the bins its LLR range overlaps.
fn deposit(grid: &LlrGrid, mass: &mut [f64], edges: &[f64], cell_mass: &[f64], share: f64, llr: impl Fn(f64) -> f64) {
    let values: Vec<f64> = edges.iter().map(|&z| llr(z)).collect();
    for (v, &w) in values.windows(2).zip(cell_mass) {
        grid.spread(mass, v[0], v[1], share * w);
    }
}

/// Transition table from incoming other-user LLR bins to outgoing own-bit
/// LLR densities, marginalized over the channel noise.
#[derive(Debug, Clone)]
pub struct StateTable {
    grid: LlrGrid,
    rows: Vec<(usize, Vec<f64>)>,
}

impl StateTable {
    pub fn new(role: Role, p: &InterferenceParams, grid: LlrGrid, cond: Conditioning, cells: usize) -> Result<Self> {
        p.validate()?;
        grid.validate()?;
        if cells < 16 {
            return Err(Error::InvalidArgument(format!("need at least 16 noise cells, got {cells}")));
        }
        let (edges, cell_mass) = z_cells(cells);
        let (o, g) = role.gains(p);
        let signs: &[f64] = match cond {
            Conditioning::AllPlus => &[1.0],
            Conditioning::Averaged => &[1.0, -1.0],
        };
        let share = 1.0 / signs.len() as f64;
        let rows = parallel::map_indexed(grid.len(), |k| {
            let u = grid.value(k);
            let mut row = vec![0.0; grid.len()];
            for &s in signs {
                deposit(&grid, &mut row, &edges, &cell_mass, share, |z| {
                    state_to_variable_llr(o + g * s + p.sigma * z, s * u, role, p)
                });
            }
            let lo = row.iter().position(|&m| m > 0.0).unwrap_or(0);
            let hi = row.iter().rposition(|&m| m > 0.0).unwrap_or(0);
            (lo, row[lo..=hi].to_vec())
        });
        Ok(StateTable { grid, rows })
    }

    /// Output density when the incoming message is exactly bin `k`.
    pub fn row(&self, k: usize) -> LlrDensity {
        let mut mass = vec![0.0; self.grid.len()];
        let (lo, r) = &self.rows[k];
        mass[*lo..lo + r.len()].copy_from_slice(r);
        LlrDensity::from_raw(self.grid, mass)
    }

    /// Output density for an incoming message density `v`.
    pub fn apply(&self, v: &LlrDensity) -> LlrDensity {
        const BLOCKS: usize = 8;
        let n = self.grid.len();
        let per = n.div_ceil(BLOCKS);
        let parts = parallel::map_indexed(BLOCKS, |b| {
            let mut acc = vec![0.0; n];
            for k in b * per..((b + 1) * per).min(n) {
                let w = v.mass()[k];
                if w == 0.0 {
                    continue;
                }
                let (lo, r) = &self.rows[k];
                for (a, &m) in acc[*lo..lo + r.len()].iter_mut().zip(r) {
                    *a += w * m;
                }
            }
            acc
        });
        let mut mass = vec![0.0; n];
        for part in parts {
            for (a, m) in mass.iter_mut().zip(part) {
                *a += m;
            }
        }
        LlrDensity::from_raw(self.grid, mass)
    }
}

/// Options for [`soft_ic_de_with`] and [`IcDeEngine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcDeConfig {
    pub grid: LlrGrid,
    /// Iteration budget.
    pub t_max: usize,
    /// Stop once both BERs change by less than this between iterations.
    pub tol: f64,
    pub conditioning: Conditioning,
    /// Noise quadrature cells per state table.
    pub z_cells: usize,
    /// Degrees outside the support whose singleton functionals are tracked.
    pub extra_degrees: Vec<u32>,
    /// Freeze the interference decoder once its rightbound functional
    /// drops below this value.
    pub partial_threshold: Option<f64>,
}

impl Default for IcDeConfig {
    fn default() -> Self {
        IcDeConfig {
            grid: LlrGrid::default(),
            t_max: 2000,
            tol: 1e-10,
            conditioning: Conditioning::Averaged,
            z_cells: 6000,
            extra_degrees: Vec::new(),
            partial_threshold: None,
        }
    }
}

/// Functional trajectories of one graph. Vectors indexed by iteration
/// `1..=t` are stored from position 0, except `s` which starts with the
/// value `ln 2` of the all-zero messages.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphTrace {
    /// `Phi` of the rightbound density.
    pub s: Vec<f64>,
    /// `Phi` of the degree-`i` rightbound singleton.
    pub s_deg: BTreeMap<u32, Vec<f64>>,
    /// `Phi` of the node-perspective variable-to-state density.
    pub s_tilde: Vec<f64>,
    /// `Phi` of the degree-`i` variable-to-state density.
    pub s_tilde_deg: BTreeMap<u32, Vec<f64>>,
}

/// Result of the interference density evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftIcDeResult {
    pub primary_ber: Vec<f64>,
    pub interference_ber: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub primary: GraphTrace,
    pub interference: GraphTrace,
    /// `E[e^{-L/2}]` of the final degree-2 primary rightbound singleton.
    pub stability_bhattacharyya: f64,
    /// Iteration after which the interference decoder was frozen.
    pub frozen_at: Option<usize>,
    /// Largest symmetry defect among the rightbound and leftbound densities
    /// of both graphs, per iteration.
    pub symmetry_defect: Vec<f64>,
    pub final_primary: LlrDensity,
    pub final_interference: LlrDensity,
}

impl SoftIcDeResult {
    pub fn final_primary_ber(&self) -> f64 {
        *self.primary_ber.last().unwrap_or(&0.5)
    }

    pub fn final_interference_ber(&self) -> f64 {
        *self.interference_ber.last().unwrap_or(&0.5)
    }
}

/// Variable-side powers `P^{conv r}` and their spectra for `r = 0..=max`.
struct Powers {
    dens: Vec<LlrDensity>,
    spec: Vec<Spectrum>,
}

impl Powers {
    fn new(conv: &Convolver, p: &LlrDensity, max: usize) -> Powers {
        let zero = LlrDensity::point(p.grid, 0.0);
        let base = conv.spectrum(p);
        let mut dens = vec![zero.clone()];
        let mut spec = vec![conv.spectrum(&zero)];
        for r in 1..=max {
            let d = if r == 1 {
                p.clone()
            } else {
                conv.from_spectra(&spec[r - 1], &base)
            };
            spec.push(conv.spectrum(&d));
            dens.push(d);
        }
        Powers { dens, spec }
    }
}

/// Per-graph outcome of one iteration.
struct HalfStep {
    rightbound: LlrDensity,
    ber: f64,
    s: f64,
    s_deg: BTreeMap<u32, f64>,
    s_tilde: f64,
    s_tilde_deg: BTreeMap<u32, f64>,
    deg2_bhattacharyya: Option<f64>,
}

/// Precomputed tables for repeated density-evolution runs at one channel.
#[derive(Debug, Clone)]
pub struct IcDeEngine {
    pub params: InterferenceParams,
    pub grid: LlrGrid,
    pub conditioning: Conditioning,
    conv: Convolver,
    check: CheckTable,
    primary_table: StateTable,
    interference_table: StateTable,
}

impl IcDeEngine {
    pub fn new(p: &InterferenceParams, cfg: &IcDeConfig) -> Result<Self> {
        p.validate()?;
        cfg.grid.validate()?;
        let (primary_table, interference_table) = parallel::join(
            || StateTable::new(Role::Primary, p, cfg.grid, cfg.conditioning, cfg.z_cells),
            || StateTable::new(Role::Interference, p, cfg.grid, cfg.conditioning, cfg.z_cells),
        );
        Ok(IcDeEngine {
            params: *p,
            grid: cfg.grid,
            conditioning: cfg.conditioning,
            conv: Convolver::new(cfg.grid),
            check: CheckTable::new(cfg.grid),
            primary_table: primary_table?,
            interference_table: interference_table?,
        })
    }

    fn half_step(
        &self,
        ed: &EdgeDistribution,
        table: &StateTable,
        own: &Powers,
        other: &Powers,
        degrees: &BTreeSet<u32>,
    ) -> HalfStep {
        let lambda = ed.lambda();
        let tilde = ed.node_fractions();
        let list: Vec<u32> = degrees.iter().copied().collect();
        let per_degree = parallel::map_slice(&list, |&i| {
            let i = i as usize;
            let state = table.apply(&other.dens[i]);
            let spec = self.conv.spectrum(&state);
            let right = self.conv.from_spectra(&spec, &own.spec[i - 1]);
            let ber = lambda
                .contains_key(&(i as u32))
                .then(|| self.conv.from_spectra(&spec, &own.spec[i]).ber());
            (right, ber)
        });
        let mut parts = Vec::new();
        let mut ber = 0.0;
        let mut s_deg = BTreeMap::new();
        let mut s_tilde_deg = BTreeMap::new();
        let mut deg2 = None;
        for (&i, (right, b)) in list.iter().zip(&per_degree) {
            s_deg.insert(i, right.phi());
            s_tilde_deg.insert(i, own.dens[i as usize].phi());
            if i == 2 {
                deg2 = Some(right.bhattacharyya());
            }
            if let Some(&w) = lambda.get(&i) {
                parts.push((w, right));
                ber += tilde[&i] * b.expect("support degree carries a decision");
            }
        }
        let rightbound = LlrDensity::mixture(&parts).expect("non-empty support");
        let s_tilde = tilde.iter().map(|(i, w)| w * s_tilde_deg[i]).sum();
        HalfStep {
            s: rightbound.phi(),
            rightbound,
            ber,
            s_deg,
            s_tilde,
            s_tilde_deg,
            deg2_bhattacharyya: deg2,
        }
    }

    /// Runs the coupled density evolution for ensemble `ed` on both graphs.
    pub fn run(&self, ed: &EdgeDistribution, cfg: &IcDeConfig) -> Result<SoftIcDeResult> {
        if cfg.t_max == 0 {
            return Err(Error::InvalidArgument("iteration budget must be positive".into()));
        }
        let mut degrees: BTreeSet<u32> = ed.lambda().keys().copied().collect();
        degrees.extend(cfg.extra_degrees.iter().copied().filter(|&d| d >= 2));
        degrees.insert(2);
        let max_deg = *degrees.iter().max().unwrap() as usize;
        let rho: Vec<(u32, f64)> = ed.rho().iter().map(|(&j, &w)| (j, w)).collect();

        let zero = LlrDensity::point(self.grid, 0.0);
        let mut pl1 = zero.clone();
        let mut pl2 = zero;
        let mut pw2 = Powers::new(&self.conv, &pl2, max_deg);
        let ln2 = std::f64::consts::LN_2;
        let mut tr1 = GraphTrace {
            s: vec![ln2],
            ..Default::default()
        };
        let mut tr2 = tr1.clone();
        let (mut b1s, mut b2s) = (Vec::new(), Vec::new());
        let mut frozen_at = None;
        let mut converged = false;
        let mut stability = f64::NAN;
        let (mut last1, mut last2) = (None, None);
        let mut symmetry = Vec::new();
        for it in 1..=cfg.t_max {
            let pw1 = Powers::new(&self.conv, &pl1, max_deg);
            let (h1, h2) = parallel::join(
                || self.half_step(ed, &self.primary_table, &pw1, &pw2, &degrees),
                || self.half_step(ed, &self.interference_table, &pw2, &pw1, &degrees),
            );
            for h in [&h1, &h2] {
                let sat = h.rightbound.negative_saturation();
                if sat > OVERFLOW_LIMIT {
                    return Err(Error::GridOverflow { mass: sat });
                }
            }
            record(&mut tr1, &h1);
            record(&mut tr2, &h2);
            stability = h1.deg2_bhattacharyya.unwrap_or(f64::NAN);
            b1s.push(h1.ber);
            b2s.push(h2.ber);
            if frozen_at.is_none() {
                if let Some(th) = cfg.partial_threshold {
                    if h2.s < th {
                        frozen_at = Some(it);
                    }
                }
            }
            pl1 = self.check.check_mixture(&h1.rightbound, &rho);
            if frozen_at.is_none() {
                pl2 = self.check.check_mixture(&h2.rightbound, &rho);
                pw2 = Powers::new(&self.conv, &pl2, max_deg);
            }
            symmetry.push(
                [&h1.rightbound, &h2.rightbound, &pl1, &pl2]
                    .iter()
                    .map(|d| d.symmetry_defect())
                    .fold(0.0, f64::max),
            );
            last1 = Some(h1.rightbound);
            last2 = Some(h2.rightbound);
            if it >= 2 {
                let d1 = (b1s[it - 1] - b1s[it - 2]).abs();
                let d2 = (b2s[it - 1] - b2s[it - 2]).abs();
                if d1 < cfg.tol && d2 < cfg.tol {
                    converged = true;
                    break;
                }
            }
        }
        Ok(SoftIcDeResult {
            iterations: b1s.len(),
            primary_ber: b1s,
            interference_ber: b2s,
            converged,
            primary: tr1,
            interference: tr2,
            stability_bhattacharyya: stability,
            frozen_at,
            symmetry_defect: symmetry,
            final_primary: last1.expect("at least one iteration"),
            final_interference: last2.expect("at least one iteration"),
        })
    }
}

fn record(tr: &mut GraphTrace, h: &HalfStep) {
    tr.s.push(h.s);
    tr.s_tilde.push(h.s_tilde);
    for (&i, &v) in &h.s_deg {
        tr.s_deg.entry(i).or_default().push(v);
    }
    for (&i, &v) in &h.s_tilde_deg {
        tr.s_tilde_deg.entry(i).or_default().push(v);
    }
}

/// Quantized density evolution of soft-IC-BP with `t` iterations on the
/// default grid.
pub fn soft_ic_de(ed: &EdgeDistribution, p: &InterferenceParams, t: usize, grid: LlrGrid) -> Result<SoftIcDeResult> {
    let cfg = IcDeConfig {
        grid,
        t_max: t,
        ..Default::default()
    };
    soft_ic_de_with(ed, p, &cfg)
}

/// [`soft_ic_de`] with full options.
pub fn soft_ic_de_with(ed: &EdgeDistribution, p: &InterferenceParams, cfg: &IcDeConfig) -> Result<SoftIcDeResult> {
    IcDeEngine::new(p, cfg)?.run(ed, cfg)
}

/// Quantized density evolution of plain BP on a BIAWGN channel with noise
/// deviation `sigma`, on the same grid and noise quadrature as the coupled
/// evolution. Returns the BER trajectory.
pub fn biawgn_quantized_de(ed: &EdgeDistribution, sigma: f64, cfg: &IcDeConfig) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("noise deviation must be positive, got {sigma}")));
    }
    cfg.grid.validate()?;
    let grid = cfg.grid;
    let mut mass = vec![0.0; grid.len()];
    let (edges, cell_mass) = z_cells(cfg.z_cells);
    deposit(&grid, &mut mass, &edges, &cell_mass, 1.0, |z| 2.0 * (1.0 + sigma * z) / (sigma * sigma));
    let channel = LlrDensity::from_raw(grid, mass);
    let conv = Convolver::new(grid);
    let check = CheckTable::new(grid);
    let chan_spec = conv.spectrum(&channel);
    let rho: Vec<(u32, f64)> = ed.rho().iter().map(|(&j, &w)| (j, w)).collect();
    let tilde = ed.node_fractions();
    let max_deg = ed.max_var_degree() as usize;
    let mut pl = LlrDensity::point(grid, 0.0);
    let mut out: Vec<f64> = Vec::new();
    for _ in 0..cfg.t_max {
        let pw = Powers::new(&conv, &pl, max_deg);
        let mut parts = Vec::new();
        let mut ber = 0.0;
        let mut rights = Vec::new();
        for (&i, &w) in ed.lambda() {
            let right = conv.from_spectra(&chan_spec, &pw.spec[i as usize - 1]);
            ber += tilde[&i] * conv.from_spectra(&chan_spec, &pw.spec[i as usize]).ber();
            rights.push((w, right));
        }
        for (w, r) in &rights {
            parts.push((*w, r));
        }
        let pr = LlrDensity::mixture(&parts)?;
        pl = check.check_mixture(&pr, &rho);
        let done = out.last().is_some_and(|&b: &f64| (b - ber).abs() < cfg.tol);
        out.push(ber);
        if done {
            break;
        }
    }
    Ok(out)
}

/// Two Tanner graphs whose variable nodes are paired by index through the
/// state nodes; paired nodes have equal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraphPair {
    pub primary: TannerGraph,
    pub interference: TannerGraph,
}

impl FactorGraphPair {
    pub fn new(primary: TannerGraph, interference: TannerGraph) -> Result<Self> {
        if primary.n() != interference.n() {
            return Err(Error::LengthMismatch {
                left: primary.n(),
                right: interference.n(),
            });
        }
        if let Some(v) = (0..primary.n()).find(|&v| primary.var_degree(v) != interference.var_degree(v)) {
            return Err(Error::InvalidArgument(format!("paired variable {v} has unequal degrees")));
        }
        Ok(FactorGraphPair { primary, interference })
    }

    /// Samples both graphs from `ed` with a shared variable degree sequence.
    pub fn sample(ed: &EdgeDistribution, n: usize, rng: &mut Stream) -> Result<Self> {
        let vdeg = variable_degrees(ed, n)?;
        let a = sample_with_var_degrees(ed, &vdeg, rng, SampleOptions::default())?;
        let b = sample_with_var_degrees(ed, &vdeg, rng, SampleOptions::default())?;
        FactorGraphPair::new(a, b)
    }

    pub fn n(&self) -> usize {
        self.primary.n()
    }
}

/// Parity of each check over the bits `x < 0`.
pub fn syndrome(g: &TannerGraph, x: &[f64]) -> Vec<u8> {
    (0..g.m())
        .map(|c| {
            g.check_edges(c)
                .iter()
                .map(|&e| u8::from(x[g.edge_var(e)] < 0.0))
                .fold(0, |a, b| a ^ b)
        })
        .collect()
}

/// Output of [`soft_ic_bp`].
#[derive(Debug, Clone, PartialEq)]
pub struct SoftIcBpOutput {
    /// Final primary LLRs.
    pub primary_llr: Vec<f64>,
    /// Hard primary decisions (`+1` on ties).
    pub primary_decisions: Vec<f64>,
    /// Final soft estimates of the interference bits.
    pub interference_llr: Vec<f64>,
}

/// Fraction of wrong signs of `llr` against `x`, ties counted as half.
pub fn llr_ber(llr: &[f64], x: &[f64]) -> f64 {
    let errs: f64 = llr
        .iter()
        .zip(x)
        .map(|(&l, &b)| {
            let v = l * b;
            if v < 0.0 {
                1.0
            } else if v == 0.0 {
                0.5
            } else {
                0.0
            }
        })
        .sum();
    errs / llr.len().max(1) as f64
}

struct GraphMessages {
    right: Vec<f64>,
    left: Vec<f64>,
    sum: Vec<f64>,
}

impl GraphMessages {
    fn new(g: &TannerGraph) -> Self {
        GraphMessages {
            right: vec![0.0; g.num_edges()],
            left: vec![0.0; g.num_edges()],
            sum: vec![0.0; g.n()],
        }
    }

    fn sum_left(&mut self, g: &TannerGraph) {
        for v in 0..g.n() {
            self.sum[v] = g.var_edges(v).map(|e| self.left[e]).sum();
        }
    }

    fn rightbound(&mut self, g: &TannerGraph, state: &[f64]) {
        for v in 0..g.n() {
            let total = state[v] + self.sum[v];
            for e in g.var_edges(v) {
                self.right[e] = (total - self.left[e]).clamp(-BP_LLR_CLIP, BP_LLR_CLIP);
            }
        }
    }

    fn leftbound(&mut self, g: &TannerGraph, syndrome: Option<&[u8]>) {
        let mut t = Vec::new();
        let mut suffix = Vec::new();
        for c in 0..g.m() {
            let es = g.check_edges(c);
            t.clear();
            t.extend(es.iter().map(|&e| (0.5 * self.right[e]).tanh()));
            suffix.clear();
            suffix.resize(es.len() + 1, 1.0);
            for k in (0..es.len()).rev() {
                suffix[k] = suffix[k + 1] * t[k];
            }
            let flip = match syndrome {
                Some(s) if s[c] == 1 => -1.0,
                _ => 1.0,
            };
            let mut prefix = 1.0;
            for (k, &e) in es.iter().enumerate() {
                let prod = (prefix * suffix[k + 1]).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
                self.left[e] = (flip * 2.0 * prod.atanh()).clamp(-BP_LLR_CLIP, BP_LLR_CLIP);
                prefix *= t[k];
            }
        }
    }
}

/// Joint soft-IC-BP for `t` iterations on codewords.
pub fn soft_ic_bp(fg: &FactorGraphPair, y: &[f64], p: &InterferenceParams, t: usize) -> Result<SoftIcBpOutput> {
    soft_ic_bp_with(fg, y, p, t, None, |_, _, _| {})
}

/// Soft-IC-BP on cosets with the given syndromes of the two graphs. The
/// observer receives the iteration number and the primary and interference
/// decision LLRs after every iteration.
pub fn soft_ic_bp_with(
    fg: &FactorGraphPair,
    y: &[f64],
    p: &InterferenceParams,
    t: usize,
    syndromes: Option<(&[u8], &[u8])>,
    mut observe: impl FnMut(usize, &[f64], &[f64]),
) -> Result<SoftIcBpOutput> {
    p.validate()?;
    let n = fg.n();
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    if let Some((s1, s2)) = syndromes {
        if s1.len() != fg.primary.m() || s2.len() != fg.interference.m() {
            return Err(Error::InvalidArgument("syndrome length differs from check count".into()));
        }
    }
    let (g1, g2) = (&fg.primary, &fg.interference);
    let mut m1 = GraphMessages::new(g1);
    let mut m2 = GraphMessages::new(g2);
    let mut st1 = vec![0.0; n];
    let mut st2 = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for it in 1..=t {
        m1.sum_left(g1);
        m2.sum_left(g2);
        for v in 0..n {
            st1[v] = state_to_variable_llr(y[v], m2.sum[v], Role::Primary, p);
            st2[v] = state_to_variable_llr(y[v], m1.sum[v], Role::Interference, p);
            d1[v] = st1[v] + m1.sum[v];
            d2[v] = st2[v] + m2.sum[v];
        }
        observe(it, &d1, &d2);
        m1.rightbound(g1, &st1);
        m2.rightbound(g2, &st2);
        m1.leftbound(g1, syndromes.map(|s| s.0));
        m2.leftbound(g2, syndromes.map(|s| s.1));
    }
    if t == 0 {
        for v in 0..n {
            d1[v] = state_to_variable_llr(y[v], 0.0, Role::Primary, p);
            d2[v] = state_to_variable_llr(y[v], 0.0, Role::Interference, p);
        }
    }
    Ok(SoftIcBpOutput {
        primary_decisions: d1.iter().map(|&l| if l < 0.0 { -1.0 } else { 1.0 }).collect(),
        primary_llr: d1,
        interference_llr: d2,
    })
}

/// Which words the Monte-Carlo campaign transmits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WordModel {
    /// All-(+1) codewords on both graphs.
    AllPlus,
    /// Uniform random words decoded as coset members.
    Random,
}

impl From<Conditioning> for WordModel {
    fn from(c: Conditioning) -> Self {
        match c {
            Conditioning::AllPlus => WordModel::AllPlus,
            Conditioning::Averaged => WordModel::Random,
        }
    }
}

/// Per-iteration Monte-Carlo BERs of a soft-IC-BP campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcCampaign {
    pub n: usize,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    pub words: WordModel,
    /// Mean primary BER after iteration `1..=t`.
    pub primary_ber: Vec<f64>,
    pub interference_ber: Vec<f64>,
    /// Final per-trial BERs (primary, interference).
    pub per_trial: Vec<(f64, f64)>,
}

/// Runs `trials` independent soft-IC-BP decodings of fresh graph pairs.
pub fn simulate_ic(
    ed: &EdgeDistribution,
    p: &InterferenceParams,
    n: usize,
    t: usize,
    trials: usize,
    seed: u64,
    words: WordModel,
) -> Result<IcCampaign> {
    p.validate()?;
    if trials == 0 || t == 0 {
        return Err(Error::InvalidArgument("trials and iterations must be positive".into()));
    }
    let root = Stream::new(seed);
    let runs = parallel::map_indexed(trials, |k| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = root.split(k as u64);
        let fg = FactorGraphPair::sample(ed, n, &mut rng)?;
        let draw = |rng: &mut Stream| -> Vec<f64> {
            match words {
                WordModel::AllPlus => vec![1.0; n],
                WordModel::Random => (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            }
        };
        let x1 = draw(&mut rng);
        let x2 = draw(&mut rng);
        let y = sample_interference_channel(&x1, &x2, p, &mut rng)?;
        let syn = match words {
            WordModel::AllPlus => None,
            WordModel::Random => Some((syndrome(&fg.primary, &x1), syndrome(&fg.interference, &x2))),
        };
        let (mut b1, mut b2) = (Vec::with_capacity(t), Vec::with_capacity(t));
        soft_ic_bp_with(
            &fg,
            &y,
            p,
            t,
            syn.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice())),
            |_, d1, d2| {
                b1.push(llr_ber(d1, &x1));
                b2.push(llr_ber(d2, &x2));
            },
        )?;
        Ok((b1, b2))
    });
    let runs: Vec<(Vec<f64>, Vec<f64>)> = runs.into_iter().collect::<Result<_>>()?;
    let mean = |pick: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..t)
            .map(|i| runs.iter().map(|r| pick(r)[i]).sum::<f64>() / trials as f64)
            .collect()
    };
    Ok(IcCampaign {
        n,
        t,
        trials,
        seed,
        words,
        primary_ber: mean(|r| &r.0),
        interference_ber: mean(|r| &r.1),
        per_trial: runs.iter().map(|r| (r.0[t - 1], r.1[t - 1])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(h: f64, sigma: f64) -> InterferenceParams {
        InterferenceParams::new(h, sigma).unwrap()
    }

    #[test]
    fn certain_interference_cancels() {
        let p = params(0.6, 1.0);
        for y in [-2.0, -0.3, 0.0, 0.7, 1.9] {
            let l = state_to_variable_llr(y, 1e3, Role::Primary, &p);
            assert!((l - 2.0 * (y - 0.6)).abs() < 1e-10);
        }
    }

    #[test]
    fn llr_zero_at_origin_without_prior() {
        let p = params(0.839, 1.075);
        assert_eq!(state_to_variable_llr(0.0, 0.0, Role::Primary, &p), 0.0);
        assert_eq!(state_to_variable_llr(0.0, 0.0, Role::Interference, &p), 0.0);
    }

    #[test]
    fn decoupled_channel_llr() {
        let p = params(0.0, 0.8);
        for (y, m) in [(0.4, -3.0), (-1.2, 5.0), (2.0, 0.0)] {
            let l = state_to_variable_llr(y, m, Role::Primary, &p);
            assert!((l - 2.0 * y / 0.64).abs() < 1e-12);
            assert_eq!(state_to_variable_llr(y, m, Role::Interference, &p), 0.0);
        }
    }

    proptest! {
        #[test]
        fn llr_odd_symmetry(y in -6.0f64..6.0, m in -40.0f64..40.0, h in 0.0f64..0.99, s in 0.2f64..3.0) {
            let p = params(h, s);
            for role in [Role::Primary, Role::Interference] {
                let a = state_to_variable_llr(y, m, role, &p);
                let b = state_to_variable_llr(-y, -m, role, &p);
                prop_assert_eq!(a, -b);
            }
        }
    }

    #[test]
    fn noiseless_channel_output() {
        let p = params(0.5, 1e-12);
        let mut rng = Stream::new(1);
        let y = sample_interference_channel(&[1.0], &[1.0], &p, &mut rng).unwrap();
        assert!((y[0] - 1.5).abs() < 1e-9);
        assert!(sample_interference_channel(&[1.0], &[0.5], &p, &mut rng).is_err());
    }

    #[test]
    fn state_table_rows_are_densities() {
        let g = LlrGrid { k: 64, l_max: 10.0 };
        let t = StateTable::new(Role::Primary, &params(0.5, 1.0), g, Conditioning::Averaged, 400).unwrap();
        for k in [0, 10, 64, 100, 128] {
            assert!((t.row(k).total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn syndrome_of_all_plus_is_zero() {
        let g = TannerGraph::from_check_lists(4, &[vec![0, 1], vec![1, 2, 3]]).unwrap();
        assert_eq!(syndrome(&g, &[1.0; 4]), vec![0, 0]);
        assert_eq!(syndrome(&g, &[-1.0, 1.0, 1.0, -1.0]), vec![1, 1]);
    }

    #[test]
    fn llr_ber_counts_ties_half() {
        assert_eq!(llr_ber(&[1.0, -1.0, 0.0, 2.0], &[1.0; 4]), 0.375);
    }
}
