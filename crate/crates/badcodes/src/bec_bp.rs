//! Point-to-point decoders over the BEC: message-passing belief propagation,
//! the equivalent peeling decoder, and a GF(2) elimination oracle for
//! bitwise MAP decoding.

use crate::ensemble::TannerGraph;
use crate::erasure::{ErasureWord, Sym};
use crate::error::{Error, Result};

/// Messages and decisions of a BP run.
#[derive(Debug, Clone, PartialEq)]
pub struct BpTrace {
    /// Rightbound messages for iterations `0..t`, when recorded.
    pub rightbound: Vec<Vec<Sym>>,
    /// Leftbound messages for iterations `1..=t`, when recorded.
    pub leftbound: Vec<Vec<Sym>>,
    /// Final decisions after `t` iterations.
    pub decisions: ErasureWord,
    /// Iterations requested.
    pub iterations: usize,
}

/// Rightbound update: `r_e = y_v * prod_{e' != e} l_e'` for every edge of
/// every variable. With all-erased `left` this yields `r_e = y_v`.
pub(crate) fn variable_update(
    g: &TannerGraph,
    y: &[Sym],
    left: &[Sym],
    right: &mut [Sym],
) -> Result<()> {
    for v in 0..g.n() {
        let edges = g.var_edges(v);
        let mut known = 0usize;
        let mut value = y[v];
        if !y[v].is_erased() {
            known += 1;
        }
        for e in edges.clone() {
            let l = left[e];
            if !l.is_erased() {
                value = value.mul(l)?;
                known += 1;
            }
        }
        for e in edges {
            let own = usize::from(!left[e].is_erased());
            right[e] = if known > own { value } else { Sym::Erased };
        }
    }
    Ok(())
}

/// Leftbound update: `l_e = sum_{e' != e} r_e'` over the check's edges.
pub(crate) fn check_update(g: &TannerGraph, right: &[Sym], left: &mut [Sym]) {
    for c in 0..g.m() {
        let edges = g.check_edges(c);
        let mut erased = 0usize;
        let mut parity = 0u8;
        for &e in edges {
            match right[e].bit() {
                Some(b) => parity ^= b,
                None => erased += 1,
            }
        }
        for &e in edges {
            left[e] = match right[e].bit() {
                Some(b) if erased == 0 => Sym::from_bit(parity ^ b),
                None if erased == 1 => Sym::from_bit(parity),
                _ => Sym::Erased,
            };
        }
    }
}

/// Final decision `y_v * prod_e l_e` over all edges of each variable.
pub(crate) fn decide(g: &TannerGraph, y: &[Sym], left: &[Sym]) -> Result<Vec<Sym>> {
    (0..g.n())
        .map(|v| {
            g.var_edges(v)
                .try_fold(y[v], |acc, e| acc.mul(left[e]))
        })
        .collect()
}

/// Runs `t` iterations of BP and returns decisions only.
pub fn bp_decode(g: &TannerGraph, y: &ErasureWord, t: usize) -> Result<BpTrace> {
    bp_decode_traced(g, y, t, false)
}

/// Runs `t >= 1` iterations of BP. With `keep_trace` every rightbound and
/// leftbound message array is stored; otherwise the run stops early once
/// messages reach a fixed point, which leaves the decisions unchanged.
pub fn bp_decode_traced(
    g: &TannerGraph,
    y: &ErasureWord,
    t: usize,
    keep_trace: bool,
) -> Result<BpTrace> {
    if y.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: g.n(),
        });
    }
    if t == 0 {
        return Err(Error::InvalidArgument("BP needs t >= 1".into()));
    }
    let ys = y.symbols();
    let edges = g.num_edges();
    let mut left = vec![Sym::Erased; edges];
    let mut right = vec![Sym::Erased; edges];
    let mut prev_right: Vec<Sym> = Vec::new();
    let mut trace_r = Vec::new();
    let mut trace_l = Vec::new();
    for _ in 0..t {
        variable_update(g, ys, &left, &mut right)?;
        if keep_trace {
            trace_r.push(right.clone());
        } else if right == prev_right {
            break;
        }
        check_update(g, &right, &mut left);
        if keep_trace {
            trace_l.push(left.clone());
        } else {
            prev_right.clone_from(&right);
        }
    }
    let decisions = ErasureWord::new(decide(g, ys, &left)?);
    Ok(BpTrace {
        rightbound: trace_r,
        leftbound: trace_l,
        decisions,
        iterations: t,
    })
}

/// Peeling decoder: repeatedly resolves a variable through a check whose
/// other edges all carry known values, until no such check remains.
pub fn peeling_decode(g: &TannerGraph, y: &ErasureWord) -> Result<ErasureWord> {
    if y.len() != g.n() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: g.n(),
        });
    }
    let mut x: Vec<Sym> = y.symbols().to_vec();
    let mut erased_edges = vec![0usize; g.m()];
    let mut parity = vec![0u8; g.m()];
    for c in 0..g.m() {
        for &e in g.check_edges(c) {
            match x[g.edge_var(e)].bit() {
                Some(b) => parity[c] ^= b,
                None => erased_edges[c] += 1,
            }
        }
    }
    let mut queue: Vec<usize> = (0..g.m()).filter(|&c| erased_edges[c] == 1).collect();
    while let Some(c) = queue.pop() {
        if erased_edges[c] != 1 {
            continue;
        }
        let Some(v) = g
            .check_edges(c)
            .iter()
            .map(|&e| g.edge_var(e))
            .find(|&v| x[v].is_erased())
        else {
            continue;
        };
        let bit = parity[c];
        x[v] = Sym::from_bit(bit);
        for e in g.var_edges(v) {
            let c2 = g.edge_check(e);
            erased_edges[c2] -= 1;
            parity[c2] ^= bit;
            if erased_edges[c2] == 1 {
                queue.push(c2);
            }
        }
    }
    Ok(ErasureWord::new(x))
}

/// Bitwise MAP decoding over the BEC: a position is revealed iff the
/// parity-check system restricted to erased positions determines it
/// uniquely. Elimination pivots on the lowest available column and row.
pub fn map_erase_decode(g: &TannerGraph, y: &ErasureWord) -> Result<ErasureWord> {
    // Peeling steps are row operations of the same system, so they preserve
    // the solution set and shrink the elimination.
    let peeled = peeling_decode(g, y)?;
    let x = peeled.symbols();
    let unknowns = peeled.erasure_positions();
    let mut column = vec![usize::MAX; g.n()];
    for (k, &v) in unknowns.iter().enumerate() {
        column[v] = k;
    }
    let k = unknowns.len();
    let words = k.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut rhs: Vec<u8> = Vec::new();
    let mut row_check: Vec<usize> = Vec::new();
    for c in 0..g.m() {
        let mut bits = vec![0u64; words];
        let mut b = 0u8;
        let mut any = false;
        for &e in g.check_edges(c) {
            let v = g.edge_var(e);
            match x[v].bit() {
                Some(bit) => b ^= bit,
                None => {
                    let col = column[v];
                    bits[col / 64] ^= 1 << (col % 64);
                    any = true;
                }
            }
        }
        if !any || bits.iter().all(|&w| w == 0) {
            if b != 0 {
                return Err(Error::Inconsistent(c));
            }
            continue;
        }
        rows.push(bits);
        rhs.push(b);
        row_check.push(c);
    }
    let mut pivot_of_col = vec![usize::MAX; k];
    let mut next_row = 0usize;
    for col in 0..k {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (next_row..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(next_row, p);
        rhs.swap(next_row, p);
        row_check.swap(next_row, p);
        let (head, tail) = rows.split_at_mut(next_row);
        let (prow, tail) = tail.split_first_mut().expect("pivot row exists");
        let prhs = rhs[next_row];
        for (r, row) in head.iter_mut().enumerate() {
            if row[w] & bit != 0 {
                xor_into(row, prow, w);
                rhs[r] ^= prhs;
            }
        }
        for (off, row) in tail.iter_mut().enumerate() {
            if row[w] & bit != 0 {
                xor_into(row, prow, w);
                rhs[next_row + 1 + off] ^= prhs;
            }
        }
        pivot_of_col[col] = next_row;
        next_row += 1;
    }
    for r in next_row..rows.len() {
        if rhs[r] != 0 {
            return Err(Error::Inconsistent(row_check[r]));
        }
    }
    let mut out = x.to_vec();
    for (col, &r) in pivot_of_col.iter().enumerate() {
        if r == usize::MAX {
            continue;
        }
        let row = &rows[r];
        let ones: u32 = row.iter().map(|w| w.count_ones()).sum();
        if ones == 1 {
            out[unknowns[col]] = Sym::from_bit(rhs[r]);
        }
    }
    Ok(ErasureWord::new(out))
}

fn xor_into(dst: &mut [u64], src: &[u64], from_word: usize) {
    for (d, s) in dst[from_word..].iter_mut().zip(&src[from_word..]) {
        *d ^= *s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_graph, EdgeDistribution};
    use crate::erasure::{erasure_rate, is_degraded, sample_noise};
    use crate::rng::Stream;
    use proptest::prelude::*;

    fn w(s: &str) -> ErasureWord {
        s.parse().unwrap()
    }

    fn single_check() -> TannerGraph {
        TannerGraph::from_check_lists(3, &[vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn no_erasures_pass_through() {
        let g = single_check();
        let y = w("011");
        assert_eq!(bp_decode(&g, &y, 3).unwrap().decisions, y);
        assert_eq!(peeling_decode(&g, &y).unwrap(), y);
        assert_eq!(map_erase_decode(&g, &y).unwrap(), y);
    }

    #[test]
    fn single_parity_resolves() {
        let g = single_check();
        assert_eq!(bp_decode(&g, &w("0e1"), 1).unwrap().decisions, w("011"));
        assert_eq!(peeling_decode(&g, &w("0e1")).unwrap(), w("011"));
    }

    #[test]
    fn repetition_code_map() {
        // {000, 111}: checks x0+x1, x1+x2.
        let g = TannerGraph::from_check_lists(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(map_erase_decode(&g, &w("e1e")).unwrap(), w("111"));
        assert!(matches!(
            map_erase_decode(&g, &w("01e")),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn map_beats_peeling_on_stopping_set() {
        // Variables 0,1 form a stopping set of checks {0+1, 0+1+2};
        // elimination still cannot split them, but with a third check it can.
        let g = TannerGraph::from_check_lists(
            3,
            &[vec![0, 1], vec![0, 1, 2], vec![0, 1, 2]],
        )
        .unwrap();
        let y = w("ee0");
        assert_eq!(peeling_decode(&g, &y).unwrap(), y);
        assert_eq!(map_erase_decode(&g, &y).unwrap(), y);
        // Every check sees three erasures, yet the system has full rank.
        let g2 = TannerGraph::from_check_lists(
            4,
            &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
        .unwrap();
        assert_eq!(peeling_decode(&g2, &w("eeee")).unwrap(), w("eeee"));
        assert_eq!(map_erase_decode(&g2, &w("eeee")).unwrap(), w("0000"));
    }

    #[test]
    fn all_erased_unchanged() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let g = sample_graph(&ed, 60, &mut Stream::new(1)).unwrap();
        let y = ErasureWord::erased(60);
        assert_eq!(peeling_decode(&g, &y).unwrap(), y);
        assert_eq!(bp_decode(&g, &y, 10).unwrap().decisions, y);
    }

    #[test]
    fn regular_below_threshold_decodes() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let mut rng = Stream::new(2);
        let g = sample_graph(&ed, 10_000, &mut rng).unwrap();
        let y = sample_noise(10_000, 0.40, &mut rng).unwrap();
        let out = bp_decode(&g, &y, 100).unwrap().decisions;
        assert!(erasure_rate(&out) < 1e-3, "residual {}", erasure_rate(&out));
    }

    #[test]
    fn bp_equals_peeling_on_random_instance() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let mut rng = Stream::new(3);
        let g = sample_graph(&ed, 300, &mut rng).unwrap();
        let y = sample_noise(300, 0.3, &mut rng).unwrap();
        assert_eq!(
            bp_decode(&g, &y, 300).unwrap().decisions,
            peeling_decode(&g, &y).unwrap()
        );
    }

    #[test]
    fn trace_shapes_and_monotone_discovery() {
        let ed = EdgeDistribution::regular(3, 6).unwrap();
        let mut rng = Stream::new(4);
        let g = sample_graph(&ed, 120, &mut rng).unwrap();
        let y = sample_noise(120, 0.35, &mut rng).unwrap();
        let tr = bp_decode_traced(&g, &y, 8, true).unwrap();
        assert_eq!(tr.rightbound.len(), 8);
        assert_eq!(tr.leftbound.len(), 8);
        for l in 1..8 {
            for e in 0..g.num_edges() {
                if !tr.rightbound[l - 1][e].is_erased() {
                    assert!(!tr.rightbound[l][e].is_erased());
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decoders_nest(seed in any::<u64>(), delta in 0.05f64..0.7) {
            let ed = EdgeDistribution::from_pairs(&[(2, 0.3), (3, 0.7)], &[(6, 1.0)]).unwrap();
            let mut rng = Stream::new(seed);
            let g = sample_graph(&ed, 80, &mut rng).unwrap();
            let y = sample_noise(80, delta, &mut rng).unwrap();
            let peel = peeling_decode(&g, &y).unwrap();
            let bp = bp_decode(&g, &y, 80).unwrap().decisions;
            let map = map_erase_decode(&g, &y).unwrap();
            prop_assert_eq!(&bp, &peel);
            prop_assert!(is_degraded(&bp, &map).unwrap());
            prop_assert!(is_degraded(&y, &bp).unwrap());
            let early = bp_decode(&g, &y, 2).unwrap().decisions;
            prop_assert!(is_degraded(&early, &bp).unwrap());
        }

        #[test]
        fn residual_is_stopping_set(seed in any::<u64>(), delta in 0.05f64..0.9) {
            let ed = EdgeDistribution::regular(3, 6).unwrap();
            let mut rng = Stream::new(seed);
            let g = sample_graph(&ed, 60, &mut rng).unwrap();
            let y = sample_noise(60, delta, &mut rng).unwrap();
            let peel = peeling_decode(&g, &y).unwrap();
            prop_assert!(crate::ensemble::is_stopping_set(&g, &peel.erasure_positions()));
        }

        #[test]
        fn erasure_pattern_only(seed in any::<u64>(), delta in 0.05f64..0.6) {
            // Codewords of the repetition-like code with checks x_i + x_{i+1}.
            let n = 24;
            let checks: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
            let g = TannerGraph::from_check_lists(n, &checks).unwrap();
            let mut rng = Stream::new(seed);
            let noise = sample_noise(n, delta, &mut rng).unwrap();
            let y0 = noise.clone();
            let y1 = ErasureWord::new(
                noise.symbols().iter()
                    .map(|s| if s.is_erased() { Sym::Erased } else { Sym::One })
                    .collect(),
            );
            let d0 = bp_decode(&g, &y0, n).unwrap().decisions;
            let d1 = bp_decode(&g, &y1, n).unwrap().decisions;
            prop_assert_eq!(d0.erasure_positions(), d1.erasure_positions());
        }
    }
}
