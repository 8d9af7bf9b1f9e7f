//! Bit-string genomes, the three-objective LOTZ_k function and dominance.
//!
//! Positions are 1-indexed at every public interface: position 1 is the
//! leftmost bit. Internally the bits are packed little-endian into `u64`
//! words, so position `p` lives in bit `(p - 1) % 64` of word `(p - 1) / 64`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Problem size `n` and feasibility width `k`, with `2 <= k <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemParams {
    n: usize,
    k: usize,
}

impl ProblemParams {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::InvalidParams { n, k });
        }
        Ok(Self { n, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Smallest `lo + tz` that counts as feasible.
    #[inline]
    pub fn feasible_threshold(&self) -> usize {
        self.n - self.k
    }

    #[inline]
    pub fn is_feasible_sum(&self, u: usize) -> bool {
        u >= self.n - self.k
    }
}

/// A fixed-length bit string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    len: usize,
    words: Vec<u64>,
}

impl Genome {
    pub fn zeros(n: usize) -> Self {
        Self {
            len: n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut g = Self::zeros(n);
        for w in g.words.iter_mut() {
            *w = !0;
        }
        g.clear_tail();
        g
    }

    /// Builds a genome from bits given in position order (position 1 first).
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        Self { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 1-indexed position `pos`.
    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        debug_assert!(pos >= 1 && pos <= self.len);
        let p = pos - 1;
        (self.words[p / WORD] >> (p % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, pos: usize, value: bool) {
        debug_assert!(pos >= 1 && pos <= self.len);
        let p = pos - 1;
        let mask = 1u64 << (p % WORD);
        if value {
            self.words[p / WORD] |= mask;
        } else {
            self.words[p / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, pos: usize) {
        debug_assert!(pos >= 1 && pos <= self.len);
        let p = pos - 1;
        self.words[p / WORD] ^= 1 << (p % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |p| self.get(p))
    }

    /// Positions (1-indexed, ascending) where `self` and `other` differ.
    pub fn diff_positions<'a>(&'a self, other: &'a Genome) -> impl Iterator<Item = usize> + 'a {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .flat_map(|(wi, (a, b))| SetBits(a ^ b).map(move |bit| wi * WORD + bit + 1))
    }

    /// Overwrites `self` with the contents of `other` without reallocating.
    #[inline]
    pub fn copy_from(&mut self, other: &Genome) {
        debug_assert_eq!(self.len, other.len);
        self.words.copy_from_slice(&other.words);
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

struct SetBits(u64);

impl Iterator for SetBits {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            let b = self.0.trailing_zeros() as usize;
            self.0 &= self.0 - 1;
            Some(b)
        }
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Genome({self})")
    }
}

impl FromStr for Genome {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; spaces and underscores are
    /// ignored so that `"1101 0000"` is accepted.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                ' ' | '_' => {}
                other => return Err(Error::ParseGenome(format!("unexpected character {other:?}"))),
            }
        }
        Ok(Genome::from_bits(bits))
    }
}

/// Length of the longest all-ones prefix.
pub fn leading_ones(g: &Genome) -> usize {
    let mut count = 0;
    for &w in &g.words {
        if w == !0 {
            count += WORD;
        } else {
            count += w.trailing_ones() as usize;
            break;
        }
    }
    count.min(g.len)
}

/// Length of the longest all-zeros suffix.
pub fn trailing_zeros(g: &Genome) -> usize {
    if g.len == 0 {
        return 0;
    }
    let nw = g.words.len();
    let last_bits = g.len - WORD * (nw - 1);
    let mut count = 0;
    for (idx, &w) in g.words.iter().enumerate().rev() {
        let valid = if idx == nw - 1 { last_bits } else { WORD };
        if w == 0 {
            count += valid;
        } else {
            count += w.leading_zeros() as usize - (WORD - valid);
            break;
        }
    }
    count
}

/// The third objective as a function of `u = lo + tz`.
#[inline]
pub fn h_of(u: usize, p: ProblemParams) -> usize {
    debug_assert!(u <= p.n);
    if u < p.n - p.k {
        0
    } else {
        p.n + 1 - u
    }
}

/// A LOTZ_k fitness vector. `h` is cached; equality and hashing use
/// `(lo, tz)` only since `h` is a function of them.
#[derive(Debug, Clone, Copy)]
pub struct Fitness {
    pub lo: usize,
    pub tz: usize,
    pub h: usize,
    feasible: bool,
}

impl Fitness {
    /// Builds the fitness vector for the pair `(lo, tz)`.
    pub fn from_pair(lo: usize, tz: usize, p: ProblemParams) -> Self {
        let u = lo + tz;
        Self {
            lo,
            tz,
            h: h_of(u, p),
            feasible: p.is_feasible_sum(u),
        }
    }

    #[inline]
    pub fn key(&self) -> (usize, usize) {
        (self.lo, self.tz)
    }

    #[inline]
    pub fn is_feasible(&self) -> bool {
        self.feasible
    }
}

impl PartialEq for Fitness {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Fitness {}

impl Hash for Fitness {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

/// Evaluates LOTZ_k on `g`.
pub fn evaluate(g: &Genome, p: ProblemParams) -> Result<Fitness> {
    if g.len() != p.n {
        return Err(Error::LengthMismatch {
            expected: p.n,
            actual: g.len(),
        });
    }
    Ok(Fitness::from_pair(leading_ones(g), trailing_zeros(g), p))
}

/// Pareto dominance over `(lo, tz, h)`: weakly better everywhere, strictly
/// better somewhere.
#[inline]
pub fn dominates(a: &Fitness, b: &Fitness) -> bool {
    let ge = a.lo >= b.lo && a.tz >= b.tz && a.h >= b.h;
    let gt = a.lo > b.lo || a.tz > b.tz || a.h > b.h;
    ge && gt
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> Genome {
        s.parse().unwrap()
    }

    fn params(n: usize, k: usize) -> ProblemParams {
        ProblemParams::new(n, k).unwrap()
    }

    #[test]
    fn params_domain() {
        assert!(ProblemParams::new(8, 1).is_err());
        assert!(ProblemParams::new(8, 9).is_err());
        assert!(ProblemParams::new(8, 2).is_ok());
        assert!(ProblemParams::new(8, 8).is_ok());
    }

    #[test]
    fn leading_ones_examples() {
        assert_eq!(leading_ones(&g("1101 0000")), 2);
        assert_eq!(leading_ones(&Genome::ones(8)), 8);
        assert_eq!(leading_ones(&g("0111")), 0);
        assert_eq!(leading_ones(&Genome::ones(130)), 130);
        assert_eq!(leading_ones(&Genome::ones(64)), 64);
    }

    #[test]
    fn trailing_zeros_examples() {
        assert_eq!(trailing_zeros(&g("1101 0000")), 4);
        assert_eq!(trailing_zeros(&Genome::zeros(8)), 8);
        assert_eq!(trailing_zeros(&g("0001")), 0);
        assert_eq!(trailing_zeros(&Genome::zeros(129)), 129);
        let mut x = Genome::zeros(130);
        x.set(3, true);
        assert_eq!(trailing_zeros(&x), 127);
        x.set(70, true);
        assert_eq!(trailing_zeros(&x), 60);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_of(5, params(10, 4)), 0);
        assert_eq!(h_of(6, params(10, 4)), 5);
        assert_eq!(h_of(10, params(10, 4)), 1);
    }

    #[test]
    fn evaluate_examples() {
        let f = evaluate(&Genome::ones(8), params(8, 2)).unwrap();
        assert_eq!((f.lo, f.tz, f.h), (8, 0, 1));
        assert!(f.is_feasible());

        // lo + tz = 6 = n - k sits on the feasibility boundary.
        let f = evaluate(&g("1101 0000"), params(8, 2)).unwrap();
        assert_eq!((f.lo, f.tz, f.h), (2, 4, 3));
        assert!(f.is_feasible());

        let f = evaluate(&g("1101 0010"), params(8, 2)).unwrap();
        assert_eq!((f.lo, f.tz, f.h), (2, 1, 0));
        assert!(!f.is_feasible());

        let f = evaluate(&g("1101 0000"), params(8, 4)).unwrap();
        assert_eq!((f.lo, f.tz, f.h), (2, 4, 3));
        assert!(f.is_feasible());

        assert_eq!(
            evaluate(&g("110"), params(8, 4)).unwrap_err(),
            Error::LengthMismatch { expected: 8, actual: 3 }
        );
    }

    #[test]
    fn dominance_examples() {
        let p = params(8, 2);
        let a = Fitness::from_pair(3, 2, p);
        assert!(!dominates(&a, &a));
        let x = Fitness::from_pair(4, 1, p);
        let y = Fitness::from_pair(3, 1, p);
        assert_eq!((x.h, y.h), (0, 0));
        assert!(dominates(&x, &y));
        assert!(!dominates(&y, &x));
        // (5, 1) is feasible for k = 2 and still dominates (4, 1).
        let z = Fitness::from_pair(5, 1, p);
        assert_eq!(z.h, 3);
        assert!(dominates(&z, &x));
    }

    #[test]
    fn fitness_equality_ignores_cached_h() {
        let a = Fitness::from_pair(2, 3, params(8, 2));
        let b = Fitness::from_pair(2, 3, params(8, 4));
        assert_ne!(a.h, b.h);
        assert_eq!(a, b);
    }

    #[test]
    fn text_form_round_trip() {
        let x = g("1101 0100");
        assert_eq!(x.to_string(), "11010100");
        assert!(x.get(1) && x.get(2) && !x.get(3) && x.get(4) && x.get(6));
        assert!("10x1".parse::<Genome>().is_err());
    }

    #[test]
    fn diff_positions_across_words() {
        let a = Genome::zeros(130);
        let mut b = a.clone();
        for p in [1, 64, 65, 130] {
            b.flip(p);
        }
        assert_eq!(a.diff_positions(&b).collect::<Vec<_>>(), vec![1, 64, 65, 130]);
        assert_eq!(b.count_ones(), 4);
    }

    #[test]
    fn ones_clears_unused_tail() {
        let x = Genome::ones(70);
        assert_eq!(x.count_ones(), 70);
        assert_eq!(trailing_zeros(&x), 0);
    }
}
