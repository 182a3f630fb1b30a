//! Quantized LLR densities on a uniform lattice and the two density
//! operations of BP: variable-node convolution (LLR sums) and check-node
//! combination (tanh rule).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::quadrature::softplus;

/// Lattice `{j * l_max / k : j = -k..=k}`; the two end points collect all
/// mass at or beyond `+-l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrGrid {
    /// Number of bins on each side of zero.
    pub k: usize,
    /// Saturation magnitude.
    pub l_max: f64,
}

impl Default for LlrGrid {
    fn default() -> Self {
        LlrGrid { k: 2048, l_max: 30.0 }
    }
}

impl LlrGrid {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > u16::MAX as usize - 1 {
            return Err(Error::InvalidArgument(format!("grid half-size {} out of range", self.k)));
        }
        if !(self.l_max > 0.0) || !self.l_max.is_finite() {
            return Err(Error::InvalidArgument(format!("l_max must be positive, got {}", self.l_max)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        2 * self.k + 1
    }

    pub fn step(&self) -> f64 {
        self.l_max / self.k as f64
    }

    /// LLR value of bin `j`.
    pub fn value(&self, j: usize) -> f64 {
        (j as f64 - self.k as f64) * self.step()
    }

    /// Nearest bin of `v`, saturating at the ends.
    pub fn index_of(&self, v: f64) -> usize {
        let x = (v / self.step()).round();
        let k = self.k as f64;
        (x.clamp(-k, k) + k) as usize
    }

    /// Adds mass `w` at LLR `x`, split between the two neighbouring bins.
    /// The split sends `(1 - e^-d2) / (e^d1 - e^-d2)` to the lower bin,
    /// where `d1` and `d2` are the distances to the lower and upper bins.
    /// Splitting `x` and `-x` this way keeps a pair of masses in the ratio
    /// `e^-x` in that same ratio on the grid, so symmetric inputs give
    /// symmetric grid densities. Values beyond the range go to the end bins.
    pub fn deposit(&self, mass: &mut [f64], x: f64, w: f64) {
        let (lo, a) = self.split(x);
        mass[lo] += a * w;
        if a < 1.0 {
            mass[lo + 1] += (1.0 - a) * w;
        }
    }

    /// Lower bin index and its weight for [`LlrGrid::deposit`].
    pub fn split(&self, x: f64) -> (usize, f64) {
        let step = self.step();
        let pos = x / step + self.k as f64;
        if pos.is_nan() || pos <= 0.0 {
            return (0, 1.0);
        }
        if pos >= (2 * self.k) as f64 {
            return (2 * self.k, 1.0);
        }
        let lo = pos.floor() as usize;
        let d1 = x - self.value(lo);
        let d2 = self.value(lo + 1) - x;
        if d2 <= 0.0 {
            return (lo + 1, 1.0);
        }
        let a = -(-d2).exp_m1() / (d1.exp_m1() - (-d2).exp_m1());
        (lo, a.clamp(0.0, 1.0))
    }

    /// Adds mass `w`, spread uniformly over the LLR interval between `a`
    /// and `b`, to the bins that interval overlaps. Each bin covers half a
    /// step on either side of its value; the end bins extend to infinity.
    pub fn spread(&self, mass: &mut [f64], a: f64, b: f64, w: f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (first, last) = (self.index_of(lo), self.index_of(hi));
        if first == last || !(hi - lo > 0.0) {
            mass[self.index_of(0.5 * (lo + hi))] += w;
            return;
        }
        let half = 0.5 * self.step();
        for (j, m) in mass.iter_mut().enumerate().take(last + 1).skip(first) {
            let left = if j == 0 { f64::NEG_INFINITY } else { self.value(j) - half };
            let right = if j + 1 == self.len() { f64::INFINITY } else { self.value(j) + half };
            let overlap = hi.min(right) - lo.max(left);
            if overlap > 0.0 {
                *m += w * overlap / (hi - lo);
            }
        }
    }
}

/// Probability masses over the bins of an [`LlrGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrDensity {
    pub grid: LlrGrid,
    mass: Vec<f64>,
}

impl LlrDensity {
    /// Validates and normalizes `mass`.
    pub fn new(grid: LlrGrid, mass: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if mass.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: mass.len(),
                right: grid.len(),
            });
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidDistribution("masses must be finite and non-negative".into()));
        }
        let mut d = LlrDensity { grid, mass };
        if d.total() <= 0.0 {
            return Err(Error::InvalidDistribution("density has no mass".into()));
        }
        d.normalize();
        Ok(d)
    }

    /// Point mass at the bin nearest to `value`.
    pub fn point(grid: LlrGrid, value: f64) -> Self {
        let mut mass = vec![0.0; grid.len()];
        mass[grid.index_of(value)] = 1.0;
        LlrDensity { grid, mass }
    }

    pub(crate) fn from_raw(grid: LlrGrid, mass: Vec<f64>) -> Self {
        let mut d = LlrDensity { grid, mass };
        d.normalize();
        d
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub(crate) fn normalize(&mut self) {
        let s = self.total();
        if s > 0.0 && s != 1.0 {
            for m in &mut self.mass {
                *m /= s;
            }
        }
    }

    /// Probability of a wrong hard decision for a transmitted `+1`, with
    /// ties at zero counted as half an error.
    pub fn ber(&self) -> f64 {
        let k = self.grid.k;
        self.mass[..k].iter().sum::<f64>() + 0.5 * self.mass[k]
    }

    /// `E[ln(1 + e^{-L})]`.
    pub fn phi(&self) -> f64 {
        self.expect(|l| softplus(-l))
    }

    /// `E[e^{-L/2}]`.
    pub fn bhattacharyya(&self) -> f64 {
        self.expect(|l| (-0.5 * l).exp())
    }

    /// `E[g(L)]` over the bin values.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(j, &m)| m * g(self.grid.value(j)))
            .sum()
    }

    /// Mass in the negative saturation bin.
    pub fn negative_saturation(&self) -> f64 {
        self.mass[0]
    }

    /// Largest violation of `P(-l) = e^{-l} P(l)` over the interior bins.
    pub fn symmetry_defect(&self) -> f64 {
        let k = self.grid.k;
        (1..k)
            .map(|j| {
                let l = self.grid.value(k + j);
                (self.mass[k - j] - (-l).exp() * self.mass[k + j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Normalized mixture `sum w_i d_i`.
    pub fn mixture(parts: &[(f64, &LlrDensity)]) -> Result<LlrDensity> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let grid = first.1.grid;
        let mut mass = vec![0.0; grid.len()];
        for &(w, d) in parts {
            if d.grid != grid {
                return Err(Error::InvalidArgument("mixture over different grids".into()));
            }
            for (acc, &m) in mass.iter_mut().zip(&d.mass) {
                *acc += w * m;
            }
        }
        Ok(LlrDensity::from_raw(grid, mass))
    }
}

/// Lattice convolution of densities through zero-padded FFTs. Results are
/// clipped at zero, overflow is folded into the saturation bins, and the
/// output is renormalized.
#[derive(Clone)]
pub struct Convolver {
    grid: LlrGrid,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("grid", &self.grid).field("size", &self.size).finish()
    }
}

/// Spectrum of a zero-padded density.
pub type Spectrum = Vec<Complex64>;

impl Convolver {
    pub fn new(grid: LlrGrid) -> Self {
        let size = (2 * grid.len() - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Convolver {
            grid,
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    pub fn spectrum(&self, d: &LlrDensity) -> Spectrum {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &m) in buf.iter_mut().zip(&d.mass) {
            b.re = m;
        }
        self.fwd.process(&mut buf);
        buf
    }

    /// Density of the sum of independent draws with spectra `a` and `b`.
    pub fn from_spectra(&self, a: &[Complex64], b: &[Complex64]) -> LlrDensity {
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let (k, n) = (self.grid.k, self.grid.len());
        let mut mass = vec![0.0; n];
        for (c, v) in buf.iter().enumerate().take(2 * n - 1) {
            let m = (v.re * scale).max(0.0);
            let j = (c as isize - k as isize).clamp(0, n as isize - 1) as usize;
            mass[j] += m;
        }
        LlrDensity::from_raw(self.grid, mass)
    }

    pub fn convolve(&self, a: &LlrDensity, b: &LlrDensity) -> LlrDensity {
        self.from_spectra(&self.spectrum(a), &self.spectrum(b))
    }
}

/// Pairwise check-node table: bin of `2 atanh(tanh(a/2) tanh(b/2))` for
/// magnitudes `a`, `b` on the grid.
#[derive(Debug, Clone)]
pub struct CheckTable {
    grid: LlrGrid,
    /// Lower output magnitude bin per input magnitude pair.
    idx: Vec<u16>,
    /// Lower-bin weights for the positive and the negative output.
    weight: Vec<(f64, f64)>,
}

/// `ln((1 + t1 t2) / (1 - t1 t2))` with `t = tanh(x/2)`, computed through
/// `1 - t = 2 / (1 + e^x)` to keep precision at large magnitudes.
pub fn check_pair(a: f64, b: f64) -> f64 {
    let e1 = 2.0 / (1.0 + a.exp());
    let e2 = 2.0 / (1.0 + b.exp());
    let one_minus = e1 + e2 - e1 * e2;
    if one_minus <= 0.0 {
        return f64::INFINITY;
    }
    ((2.0 - one_minus) / one_minus).ln()
}

impl CheckTable {
    pub fn new(grid: LlrGrid) -> Self {
        let k = grid.k;
        let step = grid.step();
        let mut idx = vec![0u16; (k + 1) * (k + 1)];
        let mut weight = vec![(1.0, 1.0); (k + 1) * (k + 1)];
        for a in 0..=k {
            for b in a..=k {
                let v = check_pair(a as f64 * step, b as f64 * step);
                let (lo, wp) = grid.split(v);
                let q = lo.min(2 * k) - k;
                let entry = if q == k {
                    (1.0, 1.0)
                } else {
                    // Weight of the mirrored value -v on bin -q.
                    let d1 = v - grid.value(lo);
                    (wp, (wp * d1.exp()).min(1.0))
                };
                for at in [a * (k + 1) + b, b * (k + 1) + a] {
                    idx[at] = q as u16;
                    weight[at] = entry;
                }
            }
        }
        CheckTable { grid, idx, weight }
    }

    /// Density of the check-node output for two independent inputs.
    pub fn combine(&self, a: &LlrDensity, b: &LlrDensity) -> LlrDensity {
        let k = self.grid.k;
        let split = |d: &LlrDensity| {
            let pos: Vec<f64> = d.mass[k..].to_vec();
            let mut neg = vec![0.0; k + 1];
            for m in 1..=k {
                neg[m] = d.mass[k - m];
            }
            (pos, neg)
        };
        let (ap, an) = split(a);
        let (bp, bn) = split(b);
        let support = |p: &[f64], n: &[f64]| {
            let nz = |m: &usize| p[*m] != 0.0 || n[*m] != 0.0;
            let lo = (0..=k).find(nz).unwrap_or(0);
            let hi = (0..=k).rev().find(nz).unwrap_or(0);
            (lo, hi)
        };
        let (alo, ahi) = support(&ap, &an);
        let (blo, bhi) = support(&bp, &bn);
        const BLOCKS: usize = 16;
        let rows = ahi - alo + 1;
        let per = rows.div_ceil(BLOCKS);
        let partial = parallel::map_indexed(BLOCKS, |blk| {
            let mut cp = vec![0.0; k + 1];
            let mut cn = vec![0.0; k + 1];
            let start = alo + blk * per;
            let end = (start + per).min(ahi + 1);
            for m1 in start..end {
                let (p1, n1) = (ap[m1], an[m1]);
                if p1 == 0.0 && n1 == 0.0 {
                    continue;
                }
                let row = &self.idx[m1 * (k + 1)..(m1 + 1) * (k + 1)];
                let wrow = &self.weight[m1 * (k + 1)..(m1 + 1) * (k + 1)];
                for m2 in blo..=bhi {
                    let t = row[m2] as usize;
                    let (wp, wn) = wrow[m2];
                    let (p2, n2) = (bp[m2], bn[m2]);
                    let (same, diff) = (p1 * p2 + n1 * n2, p1 * n2 + n1 * p2);
                    cp[t] += wp * same;
                    cn[t] += wn * diff;
                    if t < k {
                        cp[t + 1] += (1.0 - wp) * same;
                        cn[t + 1] += (1.0 - wn) * diff;
                    }
                }
            }
            (cp, cn)
        });
        let mut mass = vec![0.0; self.grid.len()];
        for (cp, cn) in partial {
            for m in 0..=k {
                mass[k + m] += cp[m];
                mass[k - m] += cn[m];
            }
        }
        LlrDensity::from_raw(self.grid, mass)
    }

    /// Check-side mixture `sum_j rho_j P^{(j-1)}` with `P^{(r)}` the
    /// `r`-fold check combination of `p`.
    pub fn check_mixture(&self, p: &LlrDensity, rho: &[(u32, f64)]) -> LlrDensity {
        let max = rho.iter().map(|r| r.0).max().unwrap_or(1) as usize;
        let mut powers: Vec<LlrDensity> = Vec::with_capacity(max);
        powers.push(LlrDensity::point(self.grid, f64::INFINITY));
        for r in 1..max {
            let next = if r == 1 {
                p.clone()
            } else {
                self.combine(&powers[r - 1], p)
            };
            powers.push(next);
        }
        let parts: Vec<(f64, &LlrDensity)> =
            rho.iter().map(|&(j, w)| (w, &powers[j as usize - 1])).collect();
        LlrDensity::mixture(&parts).expect("non-empty check distribution")
    }
}
