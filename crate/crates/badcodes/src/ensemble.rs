//! LDPC edge distributions, Tanner-graph sampling by socket permutation,
//! and stopping-set predicates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::rng::Stream;

const SUM_TOL: f64 = 1e-12;

/// Edge-perspective degree distributions `(lambda, rho)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct EdgeDistribution {
    lambda: BTreeMap<u32, f64>,
    rho: BTreeMap<u32, f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDistribution {
    lambda: BTreeMap<u32, f64>,
    rho: BTreeMap<u32, f64>,
}

impl TryFrom<RawDistribution> for EdgeDistribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        EdgeDistribution::new(raw.lambda, raw.rho)
    }
}

impl From<EdgeDistribution> for RawDistribution {
    fn from(ed: EdgeDistribution) -> Self {
        RawDistribution {
            lambda: ed.lambda,
            rho: ed.rho,
        }
    }
}

fn validate_side(name: &str, map: &BTreeMap<u32, f64>, min_degree: u32) -> Result<()> {
    if map.is_empty() {
        return Err(Error::InvalidDistribution(format!("{name} is empty")));
    }
    for (&d, &f) in map {
        if !f.is_finite() || f < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{name}[{d}] = {f} is not a nonnegative fraction"
            )));
        }
        if d < min_degree {
            return Err(Error::InvalidDistribution(format!(
                "{name} has degree {d} below the minimum {min_degree}"
            )));
        }
    }
    let s: f64 = map.values().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{name} sums to {s}, not 1"
        )));
    }
    Ok(())
}

fn drop_zeros(map: BTreeMap<u32, f64>) -> BTreeMap<u32, f64> {
    map.into_iter().filter(|&(_, f)| f != 0.0).collect()
}

impl EdgeDistribution {
    /// Validated constructor: fractions nonnegative, each side summing to
    /// one within 1e-12, minimum variable degree 2.
    pub fn new(lambda: BTreeMap<u32, f64>, rho: BTreeMap<u32, f64>) -> Result<Self> {
        Self::with_min_degree(lambda, rho, 2)
    }

    /// Like [`EdgeDistribution::new`] with an explicit minimum variable
    /// degree (use 1 to admit degree-one variable nodes).
    pub fn with_min_degree(
        lambda: BTreeMap<u32, f64>,
        rho: BTreeMap<u32, f64>,
        min_var_degree: u32,
    ) -> Result<Self> {
        let lambda = drop_zeros(lambda);
        let rho = drop_zeros(rho);
        validate_side("lambda", &lambda, min_var_degree.max(1))?;
        validate_side("rho", &rho, 1)?;
        Ok(EdgeDistribution { lambda, rho })
    }

    /// Rescales both sides to sum to one before validating. Useful for
    /// published coefficient lists that were rounded.
    pub fn normalized(lambda: BTreeMap<u32, f64>, rho: BTreeMap<u32, f64>) -> Result<Self> {
        let norm = |m: BTreeMap<u32, f64>| -> BTreeMap<u32, f64> {
            let s: f64 = m.values().sum();
            if s > 0.0 {
                m.into_iter().map(|(d, f)| (d, f / s)).collect()
            } else {
                m
            }
        };
        Self::new(norm(lambda), norm(rho))
    }

    /// Builds from `(degree, fraction)` pairs.
    pub fn from_pairs(lambda: &[(u32, f64)], rho: &[(u32, f64)]) -> Result<Self> {
        Self::new(
            lambda.iter().copied().collect(),
            rho.iter().copied().collect(),
        )
    }

    /// The `(c, d)`-regular ensemble.
    pub fn regular(c: u32, d: u32) -> Result<Self> {
        Self::with_min_degree(
            BTreeMap::from([(c, 1.0)]),
            BTreeMap::from([(d, 1.0)]),
            1,
        )
    }

    pub fn lambda(&self) -> &BTreeMap<u32, f64> {
        &self.lambda
    }

    pub fn rho(&self) -> &BTreeMap<u32, f64> {
        &self.rho
    }

    /// Replaces lambda, keeping rho.
    pub fn with_lambda(&self, lambda: BTreeMap<u32, f64>) -> Result<Self> {
        let min = self.lambda.keys().next().copied().unwrap_or(2).min(2);
        Self::with_min_degree(lambda, self.rho.clone(), min)
    }

    /// `sum_i lambda_i / i`.
    pub fn lambda_integral(&self) -> f64 {
        self.lambda.iter().map(|(&i, &l)| l / i as f64).sum()
    }

    /// `sum_j rho_j / j`.
    pub fn rho_integral(&self) -> f64 {
        self.rho.iter().map(|(&j, &r)| r / j as f64).sum()
    }

    /// Design rate `1 - (sum rho_j/j) / (sum lambda_i/i)`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.rho_integral() / self.lambda_integral()
    }

    /// Fraction of variable nodes of each degree.
    pub fn node_fractions(&self) -> BTreeMap<u32, f64> {
        node_fractions_of(&self.lambda)
    }

    /// Fraction of check nodes of each degree.
    pub fn check_node_fractions(&self) -> BTreeMap<u32, f64> {
        node_fractions_of(&self.rho)
    }

    /// Average variable degree `gamma = sum_i i * lambda~_i`.
    pub fn gamma(&self) -> f64 {
        1.0 / self.lambda_integral()
    }

    /// Check degree when rho is concentrated on one degree.
    pub fn right_regular_degree(&self) -> Option<u32> {
        if self.rho.len() == 1 {
            self.rho.keys().next().copied()
        } else {
            None
        }
    }

    /// Edge-perspective polynomial `lambda(z) = sum lambda_i z^(i-1)`.
    pub fn lambda_poly(&self, z: f64) -> f64 {
        self.lambda
            .iter()
            .map(|(&i, &l)| l * z.powi(i as i32 - 1))
            .sum()
    }

    /// Edge-perspective polynomial `rho(z) = sum rho_j z^(j-1)`.
    pub fn rho_poly(&self, z: f64) -> f64 {
        self.rho
            .iter()
            .map(|(&j, &r)| r * z.powi(j as i32 - 1))
            .sum()
    }

    /// Largest variable degree.
    pub fn max_var_degree(&self) -> u32 {
        self.lambda.keys().next_back().copied().unwrap_or(0)
    }

    /// Largest check degree.
    pub fn max_check_degree(&self) -> u32 {
        self.rho.keys().next_back().copied().unwrap_or(0)
    }

    /// Parses the compact `deg:frac,deg:frac` form used on command lines.
    pub fn parse_side(s: &str) -> Result<BTreeMap<u32, f64>> {
        let mut map = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (d, f) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected deg:frac, got {part:?}")))?;
            let d: u32 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad degree {d:?}")))?;
            let f: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad fraction {f:?}")))?;
            *map.entry(d).or_insert(0.0) += f;
        }
        Ok(map)
    }

    /// JSON object `{"lambda": {...}, "rho": {...}}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("edge distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn node_fractions_of(edge: &BTreeMap<u32, f64>) -> BTreeMap<u32, f64> {
    let total: f64 = edge.iter().map(|(&i, &l)| l / i as f64).sum();
    edge.iter()
        .map(|(&i, &l)| (i, (l / i as f64) / total))
        .collect()
}

/// Largest-remainder rounding of `total * fractions` to integers summing
/// exactly to `total`. Ties go to the earlier entry.
pub fn largest_remainder(fractions: &[f64], total: usize) -> Vec<usize> {
    let targets: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().take(total.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

/// A bipartite Tanner graph. Edges are numbered in variable-socket order,
/// so the edges of variable `v` are `var_start[v]..var_start[v+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph {
    n: usize,
    m: usize,
    var_start: Vec<usize>,
    edge_check: Vec<u32>,
    edge_var: Vec<u32>,
    check_start: Vec<usize>,
    check_edges: Vec<usize>,
}

impl TannerGraph {
    /// Builds a graph from one neighbour list per check node (repeated
    /// variables denote multi-edges).
    pub fn from_check_lists(n: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let mut var_neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (c, list) in checks.iter().enumerate() {
            for &v in list {
                if v >= n {
                    return Err(Error::InvalidArgument(format!(
                        "check {c} references variable {v} >= n = {n}"
                    )));
                }
                var_neighbors[v].push(c as u32);
            }
        }
        Ok(Self::from_var_lists(checks.len(), &var_neighbors))
    }

    fn from_var_lists(m: usize, var_neighbors: &[Vec<u32>]) -> Self {
        let n = var_neighbors.len();
        let mut var_start = Vec::with_capacity(n + 1);
        let mut edge_check = Vec::new();
        let mut edge_var = Vec::new();
        var_start.push(0);
        for (v, list) in var_neighbors.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            for c in sorted {
                edge_check.push(c);
                edge_var.push(v as u32);
            }
            var_start.push(edge_check.len());
        }
        let mut check_deg = vec![0usize; m];
        for &c in &edge_check {
            check_deg[c as usize] += 1;
        }
        let mut check_start = vec![0usize; m + 1];
        for c in 0..m {
            check_start[c + 1] = check_start[c] + check_deg[c];
        }
        let mut fill = check_start.clone();
        let mut check_edges = vec![0usize; edge_check.len()];
        for (e, &c) in edge_check.iter().enumerate() {
            check_edges[fill[c as usize]] = e;
            fill[c as usize] += 1;
        }
        TannerGraph {
            n,
            m,
            var_start,
            edge_check,
            edge_var,
            check_start,
            check_edges,
        }
    }

    /// Number of variable nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edge_check.len()
    }

    /// Edge ids incident to variable `v`.
    #[inline]
    pub fn var_edges(&self, v: usize) -> std::ops::Range<usize> {
        self.var_start[v]..self.var_start[v + 1]
    }

    /// Edge ids incident to check `c`.
    #[inline]
    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[self.check_start[c]..self.check_start[c + 1]]
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e] as usize
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_start[v + 1] - self.var_start[v]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_start[c + 1] - self.check_start[c]
    }

    /// Variable neighbours of check `c`, with repetition for multi-edges.
    pub fn check_neighbors(&self, c: usize) -> Vec<usize> {
        self.check_edges(c).iter().map(|&e| self.edge_var(e)).collect()
    }

    /// Number of (variable, check) pairs joined by more than one edge.
    pub fn multi_edge_count(&self) -> usize {
        (0..self.n)
            .map(|v| {
                let r = self.var_edges(v);
                self.edge_check[r]
                    .windows(2)
                    .filter(|w| w[0] == w[1])
                    .count()
            })
            .sum()
    }

    /// Degree histogram of variable nodes.
    pub fn var_degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for v in 0..self.n {
            *h.entry(self.var_degree(v)).or_insert(0) += 1;
        }
        h
    }

    /// Degree histogram of check nodes.
    pub fn check_degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for c in 0..self.m {
            *h.entry(self.check_degree(c)).or_insert(0) += 1;
        }
        h
    }

    /// Rate implied by the realized node counts, `1 - m/n`.
    pub fn realized_design_rate(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    /// Line-oriented text: `n m`, then one line per check listing its
    /// variable neighbours.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for c in 0..self.m {
            let line: Vec<String> = self
                .check_neighbors(c)
                .iter()
                .map(|v| v.to_string())
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`TannerGraph::to_text`].
    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph text".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        if nums.len() != 2 {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let (n, m) = (nums[0], nums[1]);
        let mut checks = Vec::with_capacity(m);
        for _ in 0..m {
            let line = lines.next().unwrap_or("");
            let list = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            checks.push(list);
        }
        Self::from_check_lists(n, &checks)
    }
}

impl fmt::Display for TannerGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for TannerGraph {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// Options for [`sample_graph_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Repair multi-edges by random endpoint swaps after sampling.
    pub reject_multi_edges: bool,
}

/// Integer variable-degree sequence (sorted by degree class) for `n` nodes.
pub fn variable_degrees(ed: &EdgeDistribution, n: usize) -> Result<Vec<u32>> {
    let degs: Vec<u32> = ed.lambda.keys().copied().collect();
    let fr = ed.node_fractions();
    let fracs: Vec<f64> = degs.iter().map(|d| fr[d]).collect();
    let counts = largest_remainder(&fracs, n);
    let mut out = Vec::with_capacity(n);
    for (k, &d) in degs.iter().enumerate() {
        if counts[k] == 0 {
            return Err(Error::InfeasibleAllocation {
                side: "variable",
                degree: d,
                n,
            });
        }
        out.extend(std::iter::repeat_n(d, counts[k]));
    }
    Ok(out)
}

/// Check-degree sequence whose socket total equals `edges` exactly.
fn check_degrees(ed: &EdgeDistribution, edges: usize, n: usize) -> Result<Vec<u32>> {
    let degs: Vec<u32> = ed.rho.keys().copied().collect();
    let m = ((edges as f64) * ed.rho_integral()).round().max(1.0) as usize;
    let fr = ed.check_node_fractions();
    let fracs: Vec<f64> = degs.iter().map(|d| fr[d]).collect();
    let counts = largest_remainder(&fracs, m);
    let mut out = Vec::with_capacity(m);
    for (k, &d) in degs.iter().enumerate() {
        if counts[k] == 0 {
            return Err(Error::InfeasibleAllocation {
                side: "check",
                degree: d,
                n,
            });
        }
        out.extend(std::iter::repeat_n(d, counts[k]));
    }
    // Spread the socket surplus or deficit over the check nodes, one socket
    // at a time starting from the highest-degree end.
    let mut total: i64 = out.iter().map(|&d| d as i64).sum();
    let target = edges as i64;
    let mut idx = out.len();
    let mut guard = 0usize;
    while total != target {
        idx = if idx == 0 { out.len() - 1 } else { idx - 1 };
        if total < target {
            out[idx] += 1;
            total += 1;
        } else if out[idx] > 1 {
            out[idx] -= 1;
            total -= 1;
        }
        guard += 1;
        if guard > 4 * (edges + out.len()) + 16 {
            return Err(Error::InvalidArgument(format!(
                "cannot balance {edges} edges over {} checks",
                out.len()
            )));
        }
    }
    Ok(out)
}

/// Samples a graph of the `ed` ensemble with `n` variable nodes by a
/// uniform socket permutation. Multi-edges are kept.
pub fn sample_graph(ed: &EdgeDistribution, n: usize, rng: &mut Stream) -> Result<TannerGraph> {
    sample_graph_with(ed, n, rng, SampleOptions::default())
}

/// [`sample_graph`] with options.
pub fn sample_graph_with(
    ed: &EdgeDistribution,
    n: usize,
    rng: &mut Stream,
    opts: SampleOptions,
) -> Result<TannerGraph> {
    let vdeg = variable_degrees(ed, n)?;
    sample_with_var_degrees(ed, &vdeg, rng, opts)
}

/// Samples a graph whose variable degree sequence is `vdeg` and whose check
/// side follows `ed.rho`.
pub fn sample_with_var_degrees(
    ed: &EdgeDistribution,
    vdeg: &[u32],
    rng: &mut Stream,
    opts: SampleOptions,
) -> Result<TannerGraph> {
    let n = vdeg.len();
    let edges: usize = vdeg.iter().map(|&d| d as usize).sum();
    let cdeg = check_degrees(ed, edges, n)?;
    let m = cdeg.len();
    let mut sockets: Vec<u32> = Vec::with_capacity(edges);
    for (c, &d) in cdeg.iter().enumerate() {
        sockets.extend(std::iter::repeat_n(c as u32, d as usize));
    }
    sockets.shuffle(rng);
    let mut var_of_edge = Vec::with_capacity(edges);
    for (v, &d) in vdeg.iter().enumerate() {
        var_of_edge.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    if opts.reject_multi_edges {
        repair_multi_edges(&var_of_edge, &mut sockets, rng);
    }
    let mut lists: Vec<Vec<u32>> = vdeg.iter().map(|&d| Vec::with_capacity(d as usize)).collect();
    for (e, &c) in sockets.iter().enumerate() {
        lists[var_of_edge[e] as usize].push(c);
    }
    Ok(TannerGraph::from_var_lists(m, &lists))
}

fn repair_multi_edges(var_of_edge: &[u32], sockets: &mut [u32], rng: &mut Stream) {
    use std::collections::HashMap;
    let edges = sockets.len();
    if edges < 2 {
        return;
    }
    let mut count: HashMap<(u32, u32), u32> = HashMap::with_capacity(edges);
    for e in 0..edges {
        *count.entry((var_of_edge[e], sockets[e])).or_insert(0) += 1;
    }
    let mut pending: Vec<usize> = (0..edges)
        .filter(|&e| count[&(var_of_edge[e], sockets[e])] > 1)
        .collect();
    let budget = 1000 * (pending.len() + 1);
    let mut tries = 0;
    while let Some(&e) = pending.last() {
        let (ve, ce) = (var_of_edge[e], sockets[e]);
        if count[&(ve, ce)] <= 1 {
            pending.pop();
            continue;
        }
        tries += 1;
        if tries > budget {
            break;
        }
        let f = rng.random_range(0..edges);
        let (vf, cf) = (var_of_edge[f], sockets[f]);
        if ve == vf || ce == cf {
            continue;
        }
        let free = |k: (u32, u32)| count.get(&k).copied().unwrap_or(0) == 0;
        if !free((ve, cf)) || !free((vf, ce)) {
            continue;
        }
        *count.get_mut(&(ve, ce)).unwrap() -= 1;
        *count.get_mut(&(vf, cf)).unwrap() -= 1;
        *count.entry((ve, cf)).or_insert(0) += 1;
        *count.entry((vf, ce)).or_insert(0) += 1;
        sockets.swap(e, f);
        pending.pop();
    }
}

/// True iff every check adjacent to `s` has at least two edges into `s`.
pub fn is_stopping_set(g: &TannerGraph, s: &[usize]) -> bool {
    let mut inside = vec![false; g.n()];
    for &v in s {
        if v < g.n() {
            inside[v] = true;
        }
    }
    let mut hits = vec![0u32; g.m()];
    for v in 0..g.n() {
        if inside[v] {
            for e in g.var_edges(v) {
                hits[g.edge_check(e)] += 1;
            }
        }
    }
    hits.iter().all(|&h| h != 1)
}

/// Largest `n` accepted by [`enumerate_stopping_sets`].
pub const ENUMERATION_LIMIT: usize = 25;

/// Exact number of stopping sets of each size `0..=max_size`.
pub fn enumerate_stopping_sets(g: &TannerGraph, max_size: usize) -> Result<Vec<u64>> {
    let n = g.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let max_size = max_size.min(n);
    // Per check: variables with a single edge, and variables with two or
    // more parallel edges (which alone already cover the check twice).
    let masks: Vec<(u32, u32)> = (0..g.m())
        .map(|c| {
            let mut count = [0u8; ENUMERATION_LIMIT];
            for v in g.check_neighbors(c) {
                count[v] = count[v].saturating_add(1);
            }
            let (mut once, mut many) = (0u32, 0u32);
            for (v, &k) in count.iter().enumerate().take(n) {
                match k {
                    0 => {}
                    1 => once |= 1 << v,
                    _ => many |= 1 << v,
                }
            }
            (once, many)
        })
        .collect();
    let hi_bits = n.min(8);
    let lo_bits = n - hi_bits;
    let partial: Vec<Vec<u64>> = parallel::map_indexed(1usize << hi_bits, |hi| {
        let mut counts = vec![0u64; max_size + 1];
        for lo in 0..(1u32 << lo_bits) {
            let s = ((hi as u32) << lo_bits) | lo;
            let size = s.count_ones() as usize;
            if size > max_size {
                continue;
            }
            let ok = masks
                .iter()
                .all(|&(once, many)| s & many != 0 || (s & once).count_ones() != 1);
            if ok {
                counts[size] += 1;
            }
        }
        counts
    });
    let mut total = vec![0u64; max_size + 1];
    for p in partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    Ok(total)
}
