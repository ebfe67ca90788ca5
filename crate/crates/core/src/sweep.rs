//! Prefix-partitioned sweeps over `L_n` and the reductions built on them.
//!
//! The word tree is cut at a fixed prefix length that depends only on the
//! shift and `n`, never on the thread count. Each prefix is one chunk; chunk
//! results are merged left to right in lexicographic prefix order, so serial
//! and parallel execution produce bit-identical values.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cocycle::{OneStepCocycle, WedgeState};
use crate::error::{Error, Result};
use crate::sft::TransitionMatrix;

/// Default cap on the number of words visited by one sweep.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Default cap on the number of words held in a [`ProfileTable`].
pub const DEFAULT_TABLE_BUDGET: u64 = 4_000_000;

const MIN_CHUNKS: usize = 256;
const TABLE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// serially otherwise.
    #[default]
    Parallel,
}

/// Maps each item to a result and returns the results in input order.
pub(crate) fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Number of words of length `n`, or a sizing error if above `budget`.
pub fn check_budget(q: &TransitionMatrix, n: usize, budget: u64) -> Result<u64> {
    let count = q.count_words(n)?;
    match count.to_u64() {
        Some(c) if c <= budget => Ok(c),
        _ => {
            let max_n = (1..n).rev().find(|&m| q.count_words(m).ok().and_then(|c| c.to_u64()).is_some_and(|c| c <= budget));
            Err(Error::BudgetExceeded {
                required: count.to_f64(),
                budget,
                hint: match max_n {
                    Some(m) => format!("the largest word length within budget is n = {m}"),
                    None => "raise the budget".to_string(),
                },
            })
        }
    }
}

/// Prefix length used to partition `L_n`.
pub fn partition_depth(q: &TransitionMatrix, n: usize) -> usize {
    (0..=n)
        .find(|&p| p == n || q.count_words(p.max(1)).ok().and_then(|c| c.to_u64()).is_some_and(|c| p > 0 && c as usize >= MIN_CHUNKS))
        .unwrap_or(n)
}

/// Visits every `I` in `L_n` together with `(log sigma_1(A_I), .., log sigma_d(A_I))`.
///
/// `visit` sees words in lexicographic order within a chunk; chunk
/// accumulators are merged in prefix order.
pub fn sweep<A, I, V, M>(
    c: &OneStepCocycle,
    n: usize,
    exec: Execution,
    budget: u64,
    init: I,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, &[u16], &[f64]) + Sync + Send,
    M: Fn(A, A) -> A,
{
    check_budget(c.transition(), n, budget)?;
    let q = c.transition();
    let p = partition_depth(q, n);
    let prefixes = q.prefixes(p);
    let parts = map_ordered(exec, &prefixes, |prefix| {
        let mut acc = init();
        let mut states: Vec<WedgeState> = (0..=n).map(|_| WedgeState::identity(c)).collect();
        for (i, &s) in prefix.iter().enumerate() {
            let (lo, hi) = states.split_at_mut(i + 1);
            hi[0].extend_from(&lo[i], c, s as usize);
        }
        let mut word = prefix.clone();
        let mut buf = Vec::with_capacity(c.dim());
        descend(c, n, &mut word, &mut states, &mut buf, &mut acc, &visit);
        acc
    });
    let mut iter = parts.into_iter();
    let first = iter.next().unwrap_or_else(&init);
    Ok(iter.fold(first, merge))
}

fn descend<A, V>(
    c: &OneStepCocycle,
    n: usize,
    word: &mut Vec<u16>,
    states: &mut [WedgeState],
    buf: &mut Vec<f64>,
    acc: &mut A,
    visit: &V,
) where
    V: Fn(&mut A, &[u16], &[f64]),
{
    let depth = word.len();
    if depth == n {
        states[n].log_singular_values_into(buf);
        visit(acc, word, buf);
        return;
    }
    let q = c.transition();
    let last = word.last().copied();
    for s in 0..c.alphabet_size() {
        if last.is_some_and(|l| !q.allows(l as usize, s)) {
            continue;
        }
        let (lo, hi) = states.split_at_mut(depth + 1);
        hi[0].extend_from(&lo[depth], c, s);
        word.push(s as u16);
        descend(c, n, word, states, buf, acc, visit);
        word.pop();
    }
}

/// Streaming `log sum exp(x_i)`: running max plus a Neumaier-compensated
/// sum of shifted exponentials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0 }
    }
}

impl LogSumExp {
    fn add_shifted(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn rescale(&mut self, new_max: f64) {
        let f = (self.max - new_max).exp();
        self.sum *= f;
        self.comp *= f;
        self.max = new_max;
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            if self.max == f64::NEG_INFINITY {
                self.max = x;
            } else {
                self.rescale(x);
            }
        }
        self.add_shifted((x - self.max).exp());
    }

    pub fn merge(mut self, mut other: LogSumExp) -> LogSumExp {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        if other.max > self.max {
            self.rescale(other.max);
        } else {
            other.rescale(self.max);
        }
        self.add_shifted(other.sum);
        self.add_shifted(other.comp);
        self
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + (self.sum + self.comp).ln()
        }
    }
}

/// Fused Gibbs moments under weights `exp(<q, x>)`: the log partition sum,
/// the weighted mean of `x` and optionally the weighted second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsAccumulator {
    lse: LogSumExp,
    first: Vec<f64>,
    second: Option<Vec<f64>>,
}

impl GibbsAccumulator {
    pub fn new(d: usize, second_moments: bool) -> Self {
        GibbsAccumulator {
            lse: LogSumExp::default(),
            first: vec![0.0; d],
            second: second_moments.then(|| vec![0.0; d * d]),
        }
    }

    pub fn push(&mut self, log_weight: f64, x: &[f64]) {
        let old_max = self.lse.max;
        self.lse.push(log_weight);
        if self.lse.max != old_max && old_max != f64::NEG_INFINITY {
            let f = (old_max - self.lse.max).exp();
            self.first.iter_mut().for_each(|v| *v *= f);
            if let Some(s) = &mut self.second {
                s.iter_mut().for_each(|v| *v *= f);
            }
        }
        let w = (log_weight - self.lse.max).exp();
        for (f, xi) in self.first.iter_mut().zip(x) {
            *f += w * xi;
        }
        if let Some(s) = &mut self.second {
            let d = x.len();
            for i in 0..d {
                for j in 0..d {
                    s[i * d + j] += w * x[i] * x[j];
                }
            }
        }
    }

    pub fn merge(mut self, mut other: GibbsAccumulator) -> GibbsAccumulator {
        if other.lse.max == f64::NEG_INFINITY {
            return self;
        }
        if self.lse.max == f64::NEG_INFINITY {
            return other;
        }
        let m = self.lse.max.max(other.lse.max);
        for acc in [&mut self, &mut other] {
            let f = (acc.lse.max - m).exp();
            acc.first.iter_mut().for_each(|v| *v *= f);
            if let Some(s) = &mut acc.second {
                s.iter_mut().for_each(|v| *v *= f);
            }
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        if let (Some(a), Some(b)) = (&mut self.second, &other.second) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.lse = self.lse.merge(other.lse);
        self
    }

    pub fn finish(&self) -> GibbsMoments {
        let total = self.lse.sum + self.lse.comp;
        let mean: Vec<f64> = self.first.iter().map(|v| v / total).collect();
        let covariance = self.second.as_ref().map(|s| {
            let d = mean.len();
            let mut c = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    c[i * d + j] = s[i * d + j] / total - mean[i] * mean[j];
                }
            }
            c
        });
        GibbsMoments { log_sum: self.lse.value(), mean, covariance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMoments {
    pub log_sum: f64,
    pub mean: Vec<f64>,
    /// Row-major `d x d`.
    pub covariance: Option<Vec<f64>>,
}

/// `log sigma_i(A_I)` for every `I` in `L_n`, in lexicographic word order.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    d: usize,
    n: usize,
    rows: Vec<f64>,
}

impl ProfileTable {
    pub fn build(c: &OneStepCocycle, n: usize, exec: Execution, budget: u64) -> Result<Self> {
        check_budget(c.transition(), n, budget)?;
        let rows = sweep(
            c,
            n,
            exec,
            budget,
            Vec::new,
            |acc: &mut Vec<f64>, _w, lsv| acc.extend_from_slice(lsv),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        Ok(ProfileTable { d: c.dim(), n, rows })
    }

    pub fn from_rows(d: usize, n: usize, rows: Vec<f64>) -> Self {
        assert_eq!(rows.len() % d, 0);
        ProfileTable { d, n, rows }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn word_length(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Unnormalized log singular values of the `i`-th word.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks(self.d)
    }

    /// Profile `(1/n) log sigma(A_I)` of the `i`-th word.
    pub fn profile(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|v| v / self.n as f64).collect()
    }

    fn chunks(&self) -> Vec<&[f64]> {
        self.rows.chunks(TABLE_CHUNK * self.d).collect()
    }

    /// `log s_n(q)`.
    pub fn log_partition(&self, q: &[f64], exec: Execution) -> f64 {
        let parts = map_ordered(exec, &self.chunks(), |chunk| {
            let mut acc = LogSumExp::default();
            for row in chunk.chunks(self.d) {
                acc.push(dot(q, row));
            }
            acc
        });
        parts.into_iter().fold(LogSumExp::default(), LogSumExp::merge).value()
    }

    /// Gibbs moments of the profiles `(1/n) log sigma(A_I)`.
    pub fn gibbs(&self, q: &[f64], exec: Execution, second_moments: bool) -> GibbsMoments {
        let nf = self.n as f64;
        let parts = map_ordered(exec, &self.chunks(), |chunk| {
            let mut acc = GibbsAccumulator::new(self.d, second_moments);
            let mut p = vec![0.0; self.d];
            for row in chunk.chunks(self.d) {
                for (pi, r) in p.iter_mut().zip(row) {
                    *pi = r / nf;
                }
                acc.push(dot(q, row), &p);
            }
            acc
        });
        parts
            .into_iter()
            .fold(GibbsAccumulator::new(self.d, second_moments), GibbsAccumulator::merge)
            .finish()
    }
}

#[inline]
fn dot(q: &[f64], row: &[f64]) -> f64 {
    q.iter().zip(row).map(|(a, b)| if *a == 0.0 { 0.0 } else { a * b }).sum()
}
