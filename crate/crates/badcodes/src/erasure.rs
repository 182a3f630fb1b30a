//! The erasure alphabet {0, 1, e}, erasure-noise composition, BEC sampling
//! and the degradedness order on erasure patterns.

use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// A symbol over {0, 1, e}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Sym {
    Zero = 0,
    One = 1,
    Erased = 2,
}

impl Sym {
    /// Bit value, or `None` for an erasure.
    #[inline]
    pub fn bit(self) -> Option<u8> {
        match self {
            Sym::Zero => Some(0),
            Sym::One => Some(1),
            Sym::Erased => None,
        }
    }

    /// Symbol for a bit (any nonzero value maps to one).
    #[inline]
    pub fn from_bit(b: u8) -> Sym {
        if b == 0 {
            Sym::Zero
        } else {
            Sym::One
        }
    }

    #[inline]
    pub fn is_erased(self) -> bool {
        self == Sym::Erased
    }

    /// Addition: erasure absorbs, bits add modulo 2.
    #[inline]
    pub fn add(self, other: Sym) -> Sym {
        match (self.bit(), other.bit()) {
            (Some(a), Some(b)) => Sym::from_bit(a ^ b),
            _ => Sym::Erased,
        }
    }

    /// Multiplication: erasure is the identity, agreeing bits pass through,
    /// disagreeing bits are a contract violation.
    #[inline]
    pub fn mul(self, other: Sym) -> Result<Sym> {
        match (self.bit(), other.bit()) {
            (None, _) => Ok(other),
            (_, None) => Ok(self),
            (Some(a), Some(b)) if a == b => Ok(self),
            (Some(a), Some(b)) => Err(Error::ConflictingBits(a, b)),
        }
    }

    fn to_char(self) -> char {
        match self {
            Sym::Zero => '0',
            Sym::One => '1',
            Sym::Erased => 'e',
        }
    }
}

/// Free-function form of [`Sym::add`].
pub fn erasure_add(a: Sym, b: Sym) -> Sym {
    a.add(b)
}

/// Free-function form of [`Sym::mul`].
pub fn erasure_mul(a: Sym, b: Sym) -> Result<Sym> {
    a.mul(b)
}

/// Checks that `p` is a probability.
pub fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Composition of two erasure noises: `d1 + d2 (1 - d1)`.
pub fn circ(d1: f64, d2: f64) -> f64 {
    d1 + d2 * (1.0 - d1)
}

/// A fixed-length word over {0, 1, e}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErasureWord {
    symbols: Vec<Sym>,
}

impl ErasureWord {
    /// Wraps a symbol vector.
    pub fn new(symbols: Vec<Sym>) -> Self {
        ErasureWord { symbols }
    }

    /// The all-zero word of length `n`.
    pub fn zeros(n: usize) -> Self {
        ErasureWord::new(vec![Sym::Zero; n])
    }

    /// The all-erasure word of length `n`.
    pub fn erased(n: usize) -> Self {
        ErasureWord::new(vec![Sym::Erased; n])
    }

    /// Word with erasures exactly at `mask[i] == true` and zeros elsewhere.
    pub fn from_erasure_mask(mask: &[bool]) -> Self {
        ErasureWord::new(
            mask.iter()
                .map(|&m| if m { Sym::Erased } else { Sym::Zero })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Sym] {
        &self.symbols
    }

    pub fn get(&self, i: usize) -> Sym {
        self.symbols[i]
    }

    pub fn into_symbols(self) -> Vec<Sym> {
        self.symbols
    }

    /// Number of erased positions.
    pub fn erasure_count(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_erased()).count()
    }

    /// Indices of erased positions in increasing order.
    pub fn erasure_positions(&self) -> Vec<usize> {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_erased())
            .map(|(i, _)| i)
            .collect()
    }

    /// Symbolwise addition.
    pub fn add(&self, other: &ErasureWord) -> Result<ErasureWord> {
        check_len(self.len(), other.len())?;
        Ok(ErasureWord::new(
            self.symbols
                .iter()
                .zip(&other.symbols)
                .map(|(a, b)| a.add(*b))
                .collect(),
        ))
    }

    /// Symbolwise multiplication.
    pub fn mul(&self, other: &ErasureWord) -> Result<ErasureWord> {
        check_len(self.len(), other.len())?;
        let symbols = self
            .symbols
            .iter()
            .zip(&other.symbols)
            .map(|(a, b)| a.mul(*b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ErasureWord::new(symbols))
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

impl fmt::Display for ErasureWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.symbols.iter().map(|s| s.to_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for ErasureWord {
    type Err = Error;

    /// Parses an ASCII string over {0, 1, e}.
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(Sym::Zero),
                '1' => Ok(Sym::One),
                'e' | 'E' => Ok(Sym::Erased),
                other => Err(Error::Parse(format!("invalid erasure symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ErasureWord::new(symbols))
    }
}

impl Serialize for ErasureWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ErasureWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fraction of erased positions. Zero for the empty word.
pub fn erasure_rate(w: &ErasureWord) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.erasure_count() as f64 / w.len() as f64
}

/// True iff every erasure of `x` is also an erasure of `y`.
pub fn is_degraded(y: &ErasureWord, x: &ErasureWord) -> Result<bool> {
    check_len(y.len(), x.len())?;
    Ok(y.symbols
        .iter()
        .zip(&x.symbols)
        .all(|(ys, xs)| !xs.is_erased() || ys.is_erased()))
}

/// Erases each symbol of `x` independently with probability `delta`.
pub fn sample_bec(x: &ErasureWord, delta: f64, rng: &mut Stream) -> Result<ErasureWord> {
    check_probability(delta)?;
    Ok(ErasureWord::new(
        x.symbols
            .iter()
            .map(|&s| {
                if rng.random_bool(delta) {
                    Sym::Erased
                } else {
                    s
                }
            })
            .collect(),
    ))
}

/// Erasure-noise word over {0, e}: erasure with probability `delta`.
pub fn sample_noise(n: usize, delta: f64, rng: &mut Stream) -> Result<ErasureWord> {
    sample_bec(&ErasureWord::zeros(n), delta, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> ErasureWord {
        s.parse().unwrap()
    }

    #[test]
    fn addition_rules() {
        assert_eq!(erasure_add(Sym::Erased, Sym::Zero), Sym::Erased);
        assert_eq!(erasure_add(Sym::One, Sym::One), Sym::Zero);
        assert_eq!(erasure_add(Sym::Zero, Sym::One), Sym::One);
    }

    #[test]
    fn multiplication_rules() {
        assert_eq!(erasure_mul(Sym::Erased, Sym::One), Ok(Sym::One));
        assert_eq!(erasure_mul(Sym::Erased, Sym::Erased), Ok(Sym::Erased));
        assert_eq!(erasure_mul(Sym::Zero, Sym::Zero), Ok(Sym::Zero));
        assert_eq!(
            erasure_mul(Sym::Zero, Sym::One),
            Err(Error::ConflictingBits(0, 1))
        );
    }

    #[test]
    fn circ_examples() {
        assert!((circ(0.5, 0.212) - 0.606).abs() < 1e-12);
        assert_eq!(circ(0.3, 0.0), 0.3);
        assert_eq!(circ(0.3, 1.0), 1.0);
    }

    #[test]
    fn rate_examples() {
        assert_eq!(erasure_rate(&w("ee01")), 0.5);
        assert_eq!(erasure_rate(&w("0000")), 0.0);
        assert_eq!(erasure_rate(&w("eee")), 1.0);
    }

    #[test]
    fn degraded_examples() {
        assert!(is_degraded(&w("ee0"), &w("e00")).unwrap());
        assert!(!is_degraded(&w("0e"), &w("ee")).unwrap());
        assert!(is_degraded(&w("e1e"), &w("e1e")).unwrap());
        assert!(is_degraded(&w("e1"), &w("e10")).is_err());
    }

    #[test]
    fn word_round_trip() {
        let x = w("01e1ee0");
        assert_eq!(x.to_string(), "01e1ee0");
        assert!("01x".parse::<ErasureWord>().is_err());
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "\"01e1ee0\"");
        assert_eq!(serde_json::from_str::<ErasureWord>(&json).unwrap(), x);
    }

    #[test]
    fn bec_extremes_and_concentration() {
        let mut rng = Stream::new(1);
        let x = w("0110100101");
        assert_eq!(sample_bec(&x, 0.0, &mut rng).unwrap(), x);
        assert_eq!(sample_bec(&x, 1.0, &mut rng).unwrap(), ErasureWord::erased(10));
        let big = ErasureWord::zeros(100_000);
        let y = sample_bec(&big, 0.5, &mut rng).unwrap();
        let r = erasure_rate(&y);
        assert!((0.49..=0.51).contains(&r), "rate {r}");
        assert!(sample_bec(&x, 1.5, &mut rng).is_err());
    }

    fn sym() -> impl Strategy<Value = Sym> {
        prop_oneof![Just(Sym::Zero), Just(Sym::One), Just(Sym::Erased)]
    }

    fn word(n: usize) -> impl Strategy<Value = ErasureWord> {
        prop::collection::vec(sym(), n).prop_map(ErasureWord::new)
    }

    proptest! {
        #[test]
        fn add_commutative_associative(a in sym(), b in sym(), c in sym()) {
            prop_assert_eq!(a.add(b), b.add(a));
            prop_assert_eq!(a.add(b).add(c), a.add(b.add(c)));
            prop_assert_eq!(Sym::Erased.add(a), Sym::Erased);
        }

        #[test]
        fn mul_commutative_with_identity(a in sym(), b in sym()) {
            prop_assert_eq!(Sym::Erased.mul(a), Ok(a));
            match (a.mul(b), b.mul(a)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric definedness"),
            }
        }

        #[test]
        fn circ_algebra(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
            prop_assert!((circ(a, b) - circ(b, a)).abs() < 1e-12);
            prop_assert!((circ(circ(a, b), c) - circ(a, circ(b, c))).abs() < 1e-12);
            prop_assert!(circ(a, b) >= a.max(b) - 1e-15);
            prop_assert!(circ(a, b) <= 1.0 + 1e-15);
        }

        #[test]
        fn degraded_is_partial_order(x in word(12), y in word(12), z in word(12)) {
            prop_assert!(is_degraded(&x, &x).unwrap());
            if is_degraded(&x, &y).unwrap() && is_degraded(&y, &z).unwrap() {
                prop_assert!(is_degraded(&x, &z).unwrap());
            }
            if is_degraded(&x, &y).unwrap() && is_degraded(&y, &x).unwrap() {
                prop_assert_eq!(x.erasure_positions(), y.erasure_positions());
            }
        }

        #[test]
        fn bec_output_degraded(seed in any::<u64>(), delta in 0.0f64..=1.0) {
            let x = ErasureWord::zeros(64);
            let y = sample_bec(&x, delta, &mut Stream::new(seed)).unwrap();
            prop_assert!(is_degraded(&y, &x).unwrap());
        }
    }
}
