//! Mixing subshifts of finite type: transition matrices, admissible words,
//! counting and enumeration.
//!
//! Symbols are 0-based internally. [`Word::from_one_based`] and the
//! `Display` impl of [`Word`] are the 1-based boundary.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A validated primitive 0/1 transition matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    k: usize,
    entries: Vec<bool>,
    mixing_rate: usize,
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionMatrix")
            .field("k", &self.k)
            .field("mixing_rate", &self.mixing_rate)
            .finish()
    }
}

impl TransitionMatrix {
    /// Validates a square 0/1 array and computes its primitivity
    /// certificate.
    pub fn new<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::EmptyAlphabet);
        }
        let mut entries = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::NonSquare { row: i + 1, len: row.len(), expected: k });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => return Err(Error::InvalidEntry { row: i + 1, col: j + 1, value: v }),
                }
            }
        }
        for s in 0..k {
            if !(0..k).any(|j| entries[s * k + j]) {
                return Err(Error::StrandedSymbol { symbol: s + 1, which: "row" });
            }
            if !(0..k).any(|i| entries[i * k + s]) {
                return Err(Error::StrandedSymbol { symbol: s + 1, which: "column" });
            }
        }
        let mixing_rate = primitivity(k, &entries)?;
        Ok(TransitionMatrix { k, entries, mixing_rate })
    }

    pub fn full(k: usize) -> Self {
        assert!(k > 0, "full shift needs a non-empty alphabet");
        TransitionMatrix { k, entries: vec![true; k * k], mixing_rate: 1 }
    }

    pub fn golden_mean() -> Self {
        Self::new(&[[1, 1], [1, 0]]).expect("golden mean shift is primitive")
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    /// Least `n` with `Q^n` entrywise positive.
    pub fn mixing_rate(&self) -> usize {
        self.mixing_rate
    }

    #[inline]
    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.entries[from * self.k + to]
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().all(|&e| e)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.k).map(|i| (0..self.k).map(|j| self.entries[i * self.k + j] as u8).collect()).collect()
    }

    pub fn is_admissible(&self, word: &Word) -> Result<bool> {
        for &s in &word.0 {
            if s as usize >= self.k {
                return Err(Error::SymbolOutOfRange { symbol: s as usize + 1, k: self.k });
            }
        }
        Ok(word.0.windows(2).all(|p| self.allows(p[0] as usize, p[1] as usize)))
    }

    pub fn check_admissible(&self, word: &Word) -> Result<()> {
        if self.is_admissible(word)? {
            Ok(())
        } else {
            Err(Error::Inadmissible { word: word.to_string() })
        }
    }

    /// Shortest word `K` (possibly empty) with `from K to` admissible.
    pub fn connector(&self, from: usize, to: usize) -> Option<Vec<u16>> {
        if self.allows(from, to) {
            return Some(Vec::new());
        }
        let k = self.k;
        let mut parent: Vec<Option<usize>> = vec![None; k];
        let mut seen = vec![false; k];
        let mut queue = std::collections::VecDeque::new();
        for s in (0..k).filter(|&s| self.allows(from, s)) {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(s) = queue.pop_front() {
            if self.allows(s, to) {
                let mut path = vec![s as u16];
                let mut cur = s;
                while let Some(p) = parent[cur] {
                    path.push(p as u16);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for t in 0..k {
                if self.allows(s, t) && !seen[t] {
                    seen[t] = true;
                    parent[t] = Some(s);
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Number of admissible words of length `n`.
    pub fn count_words(&self, n: usize) -> Result<WordCount> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        if n <= EXACT_COUNT_LIMIT {
            let k = self.k;
            let mut v: Vec<BigUint> = vec![BigUint::from(1u32); k];
            for _ in 1..n {
                let next = (0..k)
                    .map(|i| {
                        (0..k)
                            .filter(|&j| self.allows(i, j))
                            .fold(BigUint::zero(), |acc, j| acc + &v[j])
                    })
                    .collect();
                v = next;
            }
            Ok(WordCount::Exact(v.into_iter().sum()))
        } else {
            // normalized float iteration, carried in log form
            let k = self.k;
            let mut v = vec![1.0f64; k];
            let mut log_scale = 0.0;
            for _ in 1..n {
                let mut next: Vec<f64> = (0..k)
                    .map(|i| (0..k).filter(|&j| self.allows(i, j)).map(|j| v[j]).sum())
                    .collect();
                let m = next.iter().cloned().fold(0.0, f64::max);
                next.iter_mut().for_each(|x| *x /= m);
                log_scale += m.ln();
                v = next;
            }
            Ok(WordCount::Log(log_scale + v.iter().sum::<f64>().ln()))
        }
    }

    /// Log of the Perron root of `Q`.
    pub fn shift_entropy(&self) -> f64 {
        let k = self.k;
        let mut v = vec![1.0 / k as f64; k];
        let mut lambda = 0.0;
        for _ in 0..1_000_000 {
            let next: Vec<f64> =
                (0..k).map(|i| (0..k).filter(|&j| self.allows(i, j)).map(|j| v[j]).sum()).collect();
            let norm: f64 = next.iter().sum();
            let new_lambda = norm / v.iter().sum::<f64>();
            v = next.into_iter().map(|x| x / norm).collect();
            if (new_lambda - lambda).abs() <= 1e-12 * new_lambda {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
        }
        lambda.ln()
    }

    /// Lexicographic iterator over `L_n`.
    pub fn words(&self, n: usize) -> Result<WordIter<'_>> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(WordIter::new(self, Vec::new(), n))
    }

    /// Admissible words of length `n` starting with `prefix`, lexicographic.
    pub fn extensions(&self, prefix: &[u16], n: usize) -> WordIter<'_> {
        WordIter::new(self, prefix.to_vec(), n)
    }

    /// All admissible prefixes of length `p`, lexicographic. Workers that
    /// each take a disjoint subset and call [`Self::extensions`] together
    /// visit `L_n` exactly once.
    pub fn prefixes(&self, p: usize) -> Vec<Vec<u16>> {
        if p == 0 {
            return vec![Vec::new()];
        }
        WordIter::new(self, Vec::new(), p).map(|w| w.0).collect()
    }
}

/// Exact counting uses big integers up to this length.
pub const EXACT_COUNT_LIMIT: usize = 64;

fn primitivity(k: usize, q: &[bool]) -> Result<usize> {
    let bound = (k - 1) * (k - 1) + 1;
    let mut power = q.to_vec();
    for n in 1..=bound {
        if power.iter().all(|&e| e) {
            return Ok(n);
        }
        if n == bound {
            break;
        }
        let mut next = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                next[i * k + j] = (0..k).any(|l| power[i * k + l] && q[l * k + j]);
            }
        }
        power = next;
    }
    let zero = power.iter().position(|&e| !e).unwrap_or(0);
    Err(Error::NotPrimitive { row: zero / k + 1, col: zero % k + 1, power: bound })
}

#[derive(Debug, Clone, PartialEq)]
pub enum WordCount {
    Exact(BigUint),
    Log(f64),
}

impl WordCount {
    pub fn ln(&self) -> f64 {
        match self {
            WordCount::Exact(n) => {
                let bits = n.bits();
                if bits < 1000 {
                    n.to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
                } else {
                    let shift = bits - 64;
                    let top: BigUint = n >> shift;
                    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
                }
            }
            WordCount::Log(l) => *l,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            WordCount::Exact(n) => n.to_u64(),
            WordCount::Log(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            WordCount::Exact(n) => n.to_f64().unwrap_or(f64::INFINITY),
            WordCount::Log(l) => l.exp(),
        }
    }
}

/// A finite word, stored with 0-based symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn new(symbols: Vec<u16>) -> Self {
        Word(symbols)
    }

    pub fn from_one_based(symbols: &[usize]) -> Result<Self> {
        symbols
            .iter()
            .map(|&s| {
                if s == 0 || s > u16::MAX as usize {
                    Err(Error::SymbolOutOfRange { symbol: s, k: u16::MAX as usize })
                } else {
                    Ok((s - 1) as u16)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u16] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().map(|&s| s as usize)
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().map(|&s| s as usize)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat_symbol(s: u16, n: usize) -> Word {
        Word(vec![s; n])
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&s| s as usize + 1).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", s + 1)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Depth-first lexicographic enumeration of admissible words extending a
/// fixed prefix.
pub struct WordIter<'a> {
    q: &'a TransitionMatrix,
    n: usize,
    base: usize,
    stack: Vec<u16>,
    started: bool,
    done: bool,
}

impl<'a> WordIter<'a> {
    fn new(q: &'a TransitionMatrix, prefix: Vec<u16>, n: usize) -> Self {
        let base = prefix.len();
        let valid = base <= n
            && prefix.iter().all(|&s| (s as usize) < q.k)
            && prefix.windows(2).all(|p| q.allows(p[0] as usize, p[1] as usize));
        WordIter { q, n, base, stack: prefix, started: false, done: !valid }
    }

    fn next_symbol(&self, after: Option<u16>) -> Option<u16> {
        let start = after.map(|s| s as usize + 1).unwrap_or(0);
        (start..self.q.k)
            .find(|&s| self.stack.last().is_none_or(|&p| self.q.allows(p as usize, s)))
            .map(|s| s as u16)
    }

    /// Extends the stack by the smallest admissible continuation to length n.
    fn fill(&mut self) -> bool {
        while self.stack.len() < self.n {
            match self.next_symbol(None) {
                Some(s) => self.stack.push(s),
                None => return false,
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        loop {
            if self.stack.len() <= self.base {
                return false;
            }
            let last = self.stack.pop().unwrap();
            if let Some(s) = self.next_symbol(Some(last)) {
                self.stack.push(s);
                if self.fill() {
                    return true;
                }
            }
        }
    }
}

impl Iterator for WordIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let ok = if !self.started {
            self.started = true;
            self.fill() || self.advance()
        } else {
            self.advance()
        };
        if ok {
            Some(Word(self.stack.clone()))
        } else {
            self.done = true;
            None
        }
    }
}
