//! Reduced words in the free group `F_r` and the word maps they induce.
//!
//! Words are written with `a..z` for the generators `x1..x26` and the
//! corresponding uppercase letter for an inverse. The empty string is the
//! identity.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest rank expressible in the letter grammar.
pub const MAX_RANK: usize = 26;

/// Default cap on the number of words produced by [`ball`].
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    /// Zero-based generator index.
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    /// +1 or -1.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator as u8) as char;
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

/// A freely reduced word together with the rank of its ambient free group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(rank: usize) -> Word {
        Word { rank, letters: Vec::new() }
    }

    pub fn generator(rank: usize, generator: usize) -> Result<Word> {
        Word::from_letters(rank, vec![Letter::new(generator, false)])
    }

    /// Builds the reduced form of an arbitrary letter sequence.
    pub fn from_letters(rank: usize, letters: impl IntoIterator<Item = Letter>) -> Result<Word> {
        if rank > MAX_RANK {
            return Err(Error::argument(format!("rank {rank} exceeds {MAX_RANK}")));
        }
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if l.generator >= rank {
                return Err(Error::Rank { index: l.generator + 1, rank });
            }
            match out.last() {
                Some(&last) if last.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Ok(Word { rank, letters: out })
    }

    /// Parses the letter grammar and reduces.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        let mut letters = Vec::with_capacity(text.len());
        for (offset, ch) in text.char_indices() {
            if !ch.is_ascii_alphabetic() {
                return Err(Error::Parse {
                    offset,
                    message: format!("unexpected character {ch:?}"),
                });
            }
            let generator = (ch.to_ascii_lowercase() as u8 - b'a') as usize;
            if generator >= rank {
                return Err(Error::Rank { index: generator + 1, rank });
            }
            letters.push(Letter::new(generator, ch.is_ascii_uppercase()));
        }
        Word::from_letters(rank, letters)
    }

    /// Smallest rank containing every generator used in `text`.
    pub fn parse_auto_rank(text: &str, min_rank: usize) -> Result<Word> {
        let needed = text
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| (c.to_ascii_lowercase() as u8 - b'a') as usize + 1)
            .max()
            .unwrap_or(0);
        Word::parse(text, needed.max(min_rank).max(1))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Same word viewed in a larger free group.
    pub fn with_rank(&self, rank: usize) -> Result<Word> {
        Word::from_letters(rank, self.letters.iter().copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let rank = self.rank.max(other.rank);
        Word::from_letters(rank, self.letters.iter().chain(other.letters.iter()).copied())
            .expect("product of valid words is valid")
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `other * self * other^{-1}`.
    pub fn conjugate_by(&self, other: &Word) -> Word {
        other.mul(self).mul(&other.inverse())
    }

    /// Signed number of occurrences of each generator.
    pub fn exponent_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.rank];
        for l in &self.letters {
            sums[l.generator] += l.sign();
        }
        sums
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) if self.letters.len() > 1 => !f.cancels(l),
            _ => true,
        }
    }

    pub fn cyclic_reduce(&self) -> CyclicForm {
        cyclic_reduce(self)
    }

    pub fn proper_power(&self) -> Option<(Word, usize)> {
        is_proper_power(self)
    }

    /// All cyclic rotations of a word (as plain letter sequences, reduced).
    pub fn rotations(&self) -> Vec<Word> {
        let n = self.letters.len();
        (0..n.max(1))
            .map(|s| {
                Word::from_letters(
                    self.rank,
                    self.letters[s.min(n)..].iter().chain(self.letters[..s.min(n)].iter()).copied(),
                )
                .expect("rotation of a valid word")
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "Word(e)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `word = conjugator * core * conjugator^{-1}` with `core` cyclically reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicForm {
    pub core: Word,
    pub conjugator: Word,
}

impl CyclicForm {
    pub fn recompose(&self) -> Word {
        self.core.conjugate_by(&self.conjugator)
    }
}

pub fn cyclic_reduce(w: &Word) -> CyclicForm {
    let letters = w.letters();
    let mut lo = 0;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo].cancels(letters[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    CyclicForm {
        core: Word { rank: w.rank, letters: letters[lo..hi].to_vec() },
        conjugator: Word { rank: w.rank, letters: letters[..lo].to_vec() },
    }
}

/// Returns the root and the maximal exponent `d >= 2` with `root^d = w`, or
/// `None` if `w` is not a proper power. The identity is not a proper power.
pub fn is_proper_power(w: &Word) -> Option<(Word, usize)> {
    if w.is_identity() {
        return None;
    }
    let CyclicForm { core, conjugator } = cyclic_reduce(w);
    let letters = core.letters();
    let len = letters.len();
    // Smallest period dividing the length gives the maximal exponent.
    for period in 1..=len / 2 {
        if len % period != 0 {
            continue;
        }
        if (period..len).all(|i| letters[i] == letters[i - period]) {
            let root_core = Word { rank: w.rank, letters: letters[..period].to_vec() };
            return Some((root_core.conjugate_by(&conjugator), len / period));
        }
    }
    None
}

/// Product of `u_i^{±1}` along the word; inverses via LU. The identity word
/// maps to the identity matrix of the common size.
pub fn evaluate_word(w: &Word, u: &[DMatrix<Complex64>]) -> Result<DMatrix<Complex64>> {
    let n = check_tuple(w, u)?;
    let mut inverses: Vec<Option<DMatrix<Complex64>>> = vec![None; u.len()];
    for l in w.letters().iter().filter(|l| l.inverse) {
        if inverses[l.generator].is_none() {
            let inv = u[l.generator]
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::argument(format!("matrix for x{} is singular", l.generator + 1)))?;
            inverses[l.generator] = Some(inv);
        }
    }
    let mut acc = DMatrix::<Complex64>::identity(n, n);
    for l in w.letters() {
        let m = if l.inverse { inverses[l.generator].as_ref().unwrap() } else { &u[l.generator] };
        acc = &acc * m;
    }
    Ok(acc)
}

/// As [`evaluate_word`] for unitary tuples, inverting by the adjoint.
pub fn evaluate_word_unitary(w: &Word, u: &[DMatrix<Complex64>]) -> Result<DMatrix<Complex64>> {
    let n = check_tuple(w, u)?;
    let adjoints: Vec<DMatrix<Complex64>> = u.iter().map(|m| m.adjoint()).collect();
    let mut acc = DMatrix::<Complex64>::identity(n, n);
    for l in w.letters() {
        let m = if l.inverse { &adjoints[l.generator] } else { &u[l.generator] };
        acc = &acc * m;
    }
    Ok(acc)
}

fn check_tuple(w: &Word, u: &[DMatrix<Complex64>]) -> Result<usize> {
    if u.len() < w.rank() {
        return Err(Error::Shape(format!("word has rank {} but {} matrices given", w.rank(), u.len())));
    }
    let n = u.first().map(|m| m.nrows()).unwrap_or(0);
    for (i, m) in u.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Shape(format!(
                "matrix {} is {}x{}, expected {n}x{n}",
                i + 1,
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(n)
}

/// Number of reduced words of length at most `radius` in `F_rank`.
pub fn ball_size(radius: usize, rank: usize) -> u128 {
    if rank == 0 {
        return 1;
    }
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * rank as u128;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * rank as u128 - 1);
    }
    total
}

/// All reduced words of length `<= radius`, shortest first, identity first.
/// Within a sphere words are ordered by letters (a < b < ... then inverses).
pub fn ball(radius: usize, rank: usize) -> Result<Vec<Word>> {
    ball_with_cap(radius, rank, DEFAULT_BALL_CAP)
}

pub fn ball_with_cap(radius: usize, rank: usize, cap: usize) -> Result<Vec<Word>> {
    if rank > MAX_RANK {
        return Err(Error::argument(format!("rank {rank} exceeds {MAX_RANK}")));
    }
    let size = ball_size(radius, rank);
    if size > cap as u128 {
        return Err(Error::resource(format!("ball of radius {radius} in F_{rank} has {size} words (cap {cap})")));
    }
    let alphabet: Vec<Letter> = (0..rank)
        .map(|g| Letter::new(g, false))
        .chain((0..rank).map(|g| Letter::new(g, true)))
        .collect();
    let mut out = vec![Word::identity(rank)];
    let mut frontier = 0..1;
    for _ in 0..radius {
        let start = out.len();
        for idx in frontier.clone() {
            let last = out[idx].letters.last().copied();
            for &l in &alphabet {
                if last.is_some_and(|p| p.cancels(l)) {
                    continue;
                }
                let mut letters = out[idx].letters.clone();
                letters.push(l);
                out.push(Word { rank, letters });
            }
        }
        frontier = start..out.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn parse_and_format() {
        let x = w("abAB");
        assert_eq!(x.len(), 4);
        assert_eq!(x.letters()[2], Letter::new(0, true));
        assert_eq!(x.to_string(), "abAB");
        assert!(w("aA").is_identity());
        assert_eq!(w("aab").inverse().to_string(), "BAA");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Word::parse("ab1", 2),
            Err(Error::Parse { offset: 2, message: "unexpected character '1'".into() })
        );
        assert_eq!(Word::parse("abc", 2), Err(Error::Rank { index: 3, rank: 2 }));
    }

    #[test]
    fn cyclic_reduction_examples() {
        let f = w("abA").cyclic_reduce();
        assert_eq!(f.core.to_string(), "b");
        assert_eq!(f.conjugator.to_string(), "a");
        let f = w("abAB").cyclic_reduce();
        assert_eq!(f.core.to_string(), "abAB");
        assert!(f.conjugator.is_identity());
        let f = Word::identity(2).cyclic_reduce();
        assert!(f.core.is_identity() && f.conjugator.is_identity());
    }

    #[test]
    fn proper_power_examples() {
        let (root, d) = w("abab").proper_power().unwrap();
        assert_eq!((root.to_string().as_str(), d), ("ab", 2));
        assert_eq!(w("abAB").proper_power(), None);
        let (root, d) = w("aaaa").proper_power().unwrap();
        assert_eq!((root.to_string().as_str(), d), ("a", 4));
        assert_eq!(Word::identity(2).proper_power(), None);
        // conjugated square
        let (root, d) = w("bAAB").proper_power().unwrap();
        assert_eq!((root.to_string().as_str(), d), ("bAB", 2));
    }

    #[test]
    fn ball_counts() {
        assert_eq!(ball(0, 2).unwrap(), vec![Word::identity(2)]);
        assert_eq!(ball(1, 2).unwrap().len(), 5);
        let b = ball(3, 2).unwrap();
        assert_eq!(b.len(), 53);
        assert_eq!(ball_size(3, 2), 53);
        let mut uniq = b.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 53);
        assert!(matches!(ball_with_cap(10, 2, 1000), Err(Error::Resource(_))));
    }

    #[test]
    fn word_map_examples() {
        use num_complex::Complex64 as C;
        let d1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C::new(0.0, 1.0), C::new(-1.0, 0.0)]));
        let d2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C::from_polar(1.0, 0.3),
            C::from_polar(1.0, -1.1),
        ]));
        let u = vec![d1.clone(), d2];
        let id = DMatrix::<C>::identity(2, 2);
        assert!((evaluate_word(&w("aA"), &u).unwrap() - &id).norm() < 1e-14);
        assert!((evaluate_word(&w("abAB"), &u).unwrap() - &id).norm() < 1e-14);
        assert!((evaluate_word(&w("aa"), &u).unwrap() - &d1 * &d1).norm() < 1e-14);
        let bad = vec![DMatrix::<C>::identity(2, 2), DMatrix::<C>::identity(3, 3)];
        assert!(matches!(evaluate_word(&w("ab"), &bad), Err(Error::Shape(_))));
    }

    #[test]
    fn proper_power_agrees_with_exhaustive_search() {
        // Oracle: raise every word of length <= 8 to every power d >= 2 and
        // record the largest exponent reaching each word of length <= 8.
        use std::collections::HashMap;
        let words = ball(8, 2).unwrap();
        let mut best: HashMap<Word, usize> = HashMap::new();
        for h in words.iter().skip(1) {
            let mut d = 2;
            loop {
                let p = h.pow(d as i64);
                if p.len() > 8 {
                    break;
                }
                let e = best.entry(p).or_insert(d);
                *e = (*e).max(d);
                d += 1;
            }
        }
        for x in &words {
            assert_eq!(x.proper_power().map(|(_, d)| d), best.get(x).copied(), "word {x}");
        }
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        proptest::collection::vec((0usize..2, any::<bool>()), 0..12)
            .prop_map(|v| Word::from_letters(2, v.into_iter().map(|(g, i)| Letter::new(g, i))).unwrap())
    }

    proptest! {
        #[test]
        fn reduce_idempotent_and_roundtrip(x in arb_word()) {
            let again = Word::from_letters(2, x.letters().iter().copied()).unwrap();
            prop_assert_eq!(&again, &x);
            prop_assert_eq!(Word::parse(&x.to_string(), 2).unwrap(), x);
        }

        #[test]
        fn cyclic_form_recomposes(x in arb_word()) {
            let f = x.cyclic_reduce();
            prop_assert!(f.core.is_cyclically_reduced());
            prop_assert_eq!(f.recompose(), x.clone());
            prop_assert_eq!(f.core.len() + 2 * f.conjugator.len(), x.len());
        }

        #[test]
        fn proper_power_invariant_under_cyclic_reduction(x in arb_word()) {
            let core = x.cyclic_reduce().core;
            prop_assert_eq!(
                x.proper_power().map(|(_, d)| d),
                core.proper_power().map(|(_, d)| d)
            );
            if let Some((root, d)) = x.proper_power() {
                prop_assert_eq!(root.pow(d as i64), x);
            }
        }
    }
}
