//! Domination tests, and dominated subsystems built from a typicality
//! witness together with their pressure.

use crate::cocycle::{OneStepCocycle, WedgeState};
use crate::cone::{self, ConeOptions, ConeOutcome};
use crate::error::{Error, Result};
use crate::matalg::{self, wedge, SquareMatrix};
use crate::pressure::ExponentWeights;
use crate::sft::Word;
use crate::sweep::{map_ordered, sweep, Execution, LogSumExp, DEFAULT_BUDGET};
use crate::typicality::TypicalityReport;

/// Slope below which a decaying ratio counts as domination.
pub const SLOPE_TOL: f64 = 1e-3;
/// A final log-ratio at or above this is a plateau at ratio 1.
pub const PLATEAU_TOL: f64 = 1e-9;
/// Cap on block products enumerated by one block-depth domination test.
pub const BLOCK_TEST_BUDGET: u64 = 2_000_000;
/// Cap on blocks in one subsystem pressure evaluation.
pub const BLOCK_PRESSURE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    fn combine(verdicts: impl Iterator<Item = Verdict>) -> Verdict {
        let v: Vec<Verdict> = verdicts.collect();
        if v.iter().all(|&x| x == Verdict::Pass) {
            Verdict::Pass
        } else if v.contains(&Verdict::Fail) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationEntry {
    /// Gap index `i` (ratio `sigma_{i+1} / sigma_i`).
    pub index: usize,
    /// Word lengths (or block counts) tested.
    pub lengths: Vec<usize>,
    /// `log r_i(n)`, the log of the largest ratio over all words of each length.
    pub log_ratios: Vec<f64>,
    /// Least-squares slope of `log r_i(n)` against `n`.
    pub slope: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub entries: Vec<DominationEntry>,
    pub overall: Verdict,
}

fn ls_slope(xs: &[usize], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, y)| (x as f64 - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|&x| (x as f64 - mx).powi(2)).sum();
    sxy / sxx
}

fn classify(index: usize, lengths: Vec<usize>, log_ratios: Vec<f64>) -> DominationEntry {
    let slope = ls_slope(&lengths, &log_ratios);
    // monotonicity is judged from length 4 on, or from the second point
    // when fewer than two lengths reach 4
    let from4: Vec<f64> = lengths.iter().zip(&log_ratios).filter(|(&n, _)| n >= 4).map(|(_, &r)| r).collect();
    let tail: &[f64] = if from4.len() >= 2 { &from4 } else { log_ratios.get(1..).unwrap_or(&[]) };
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let verdict = match log_ratios.last() {
        None => Verdict::Inconclusive,
        Some(&last) if last >= -PLATEAU_TOL => Verdict::Fail,
        Some(_) if slope < -SLOPE_TOL && decreasing => Verdict::Pass,
        Some(_) => Verdict::Inconclusive,
    };
    DominationEntry { index, lengths, log_ratios, slope, verdict }
}

/// Exact `max_{I in L_n} log sigma_{i+1}(A_I) - log sigma_i(A_I)` for every
/// gap index, per `n`.
fn max_log_ratios(c: &OneStepCocycle, n_range: &[usize], exec: Execution) -> Result<Vec<Vec<f64>>> {
    let d = c.dim();
    n_range
        .iter()
        .map(|&n| {
            sweep(
                c,
                n,
                exec,
                DEFAULT_BUDGET,
                || vec![f64::NEG_INFINITY; d - 1],
                |acc, _w, lsv| {
                    for (i, m) in acc.iter_mut().enumerate() {
                        *m = m.max(lsv[i + 1] - lsv[i]);
                    }
                },
                |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
            )
        })
        .collect()
}

pub fn domination_test(c: &OneStepCocycle, i: usize, n_range: &[usize], exec: Execution) -> Result<DominationEntry> {
    let d = c.dim();
    if i == 0 || i >= d {
        return Err(Error::DegreeOutOfRange { t: i, d: d.saturating_sub(1) });
    }
    let table = max_log_ratios(c, n_range, exec)?;
    Ok(classify(i, n_range.to_vec(), table.iter().map(|r| r[i - 1]).collect()))
}

/// All gap indices from one sweep per length.
pub fn domination_report(c: &OneStepCocycle, n_range: &[usize], exec: Execution) -> Result<DominationReport> {
    let d = c.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("domination needs dimension at least 2".into()));
    }
    let table = max_log_ratios(c, n_range, exec)?;
    let entries: Vec<DominationEntry> =
        (1..d).map(|i| classify(i, n_range.to_vec(), table.iter().map(|r| r[i - 1]).collect())).collect();
    let overall = Verdict::combine(entries.iter().map(|e| e.verdict));
    Ok(DominationReport { entries, overall })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WedgeReduction {
    pub direct: DominationEntry,
    pub via_wedge: DominationEntry,
    pub agree: bool,
}

/// Index-`i` domination of `c` against index-1 domination of its degree-`i`
/// exterior power.
pub fn wedge_reduction_test(c: &OneStepCocycle, i: usize, n_range: &[usize], exec: Execution) -> Result<WedgeReduction> {
    let direct = domination_test(c, i, n_range, exec)?;
    let w = c.wedge_cocycle(i)?;
    let via_wedge = domination_test(&w, 1, n_range, exec)?;
    let agree = direct.verdict == via_wedge.verdict;
    Ok(WedgeReduction { direct, via_wedge, agree })
}

/// Multicone search for the degree-`t` exterior action of the generators.
pub fn cocycle_multicone(c: &OneStepCocycle, t: usize, opts: &ConeOptions) -> Result<ConeOutcome> {
    let d = c.dim();
    if t == 0 || t >= d {
        return Err(Error::DegreeOutOfRange { t, d: d.saturating_sub(1) });
    }
    let maps: Vec<SquareMatrix> = (0..c.alphabet_size()).map(|s| c.wedge_of(s, t).clone()).collect();
    Ok(cone::multicone_search(&maps, t, opts))
}

/// Depth-first walk over all products of up to `m_max` blocks (full shift on
/// blocks), visiting every node. Chunks are the first-block choices.
fn block_walk<A, I, V, M>(states: &[WedgeState], m_max: usize, exec: Execution, init: I, visit: V, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, usize, &WedgeState) + Sync + Send,
    M: Fn(A, A) -> A,
{
    fn descend<A, V: Fn(&mut A, usize, &WedgeState)>(
        states: &[WedgeState],
        depth: usize,
        m_max: usize,
        cur: &WedgeState,
        acc: &mut A,
        visit: &V,
    ) {
        visit(acc, depth, cur);
        if depth == m_max {
            return;
        }
        for s in states {
            let next = cur.left_multiply(s);
            descend(states, depth + 1, m_max, &next, acc, visit);
        }
    }
    let firsts: Vec<usize> = (0..states.len()).collect();
    let parts = map_ordered(exec, &firsts, |&s| {
        let mut acc = init();
        descend(states, 1, m_max, &states[s], &mut acc, &visit);
        acc
    });
    let mut it = parts.into_iter();
    let first = it.next().unwrap_or_else(&init);
    it.fold(first, merge)
}

fn block_domination(states: &[WedgeState], d: usize, m_max: usize, exec: Execution) -> DominationReport {
    let maxima = block_walk(
        states,
        m_max,
        exec,
        || (vec![vec![f64::NEG_INFINITY; d - 1]; m_max], Vec::with_capacity(d)),
        |(acc, lsv), depth, st| {
            st.log_singular_values_into(lsv);
            for (i, m) in acc[depth - 1].iter_mut().enumerate() {
                *m = m.max(lsv[i + 1] - lsv[i]);
            }
        },
        |(a, buf), (b, _)| {
            (a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.max(*q)).collect()).collect(), buf)
        },
    )
    .0;
    let lengths: Vec<usize> = (1..=m_max).collect();
    let entries: Vec<DominationEntry> =
        (1..d).map(|i| classify(i, lengths.clone(), maxima.iter().map(|r| r[i - 1]).collect())).collect();
    let overall = Verdict::combine(entries.iter().map(|e| e.verdict));
    DominationReport { entries, overall }
}

/// Largest block depth (at most 6) keeping `N^m` within the test budget,
/// but never below 2.
fn block_depth(n_blocks: usize) -> usize {
    let mut m = 2;
    while m < 6 && (n_blocks as f64).powi(m as i32 + 1) <= BLOCK_TEST_BUDGET as f64 {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedWord {
    pub core: Word,
    pub j1: Word,
    pub j2: Word,
    /// `J1 I J2`.
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct DominatedSubsystem {
    pub base_n: usize,
    /// Search bound on each padding.
    pub k0: usize,
    /// Padding length used on each side (0 for empty paddings).
    pub pad: usize,
    pub ell: usize,
    pub fixed_symbol: usize,
    pub words: Vec<ExtendedWord>,
    /// `A_{J1 I J2}` per extended word, in word order.
    pub tuple: Vec<SquareMatrix>,
    states: Vec<WedgeState>,
    pub domination: DominationReport,
    /// `min log ||B_{IJ}^{wedge t}|| - log ||B_I^{wedge t}|| - log ||B_J^{wedge t}||`
    /// over all 2-blocks, per degree `t = 1..d`.
    pub log_kappa: Vec<f64>,
}

impl DominatedSubsystem {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tuple[0].dim()
    }

    /// `min_t log kappa_t`.
    pub fn log_kappa_min(&self) -> f64 {
        self.log_kappa.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The block tuple as a one-step cocycle on the full shift over its words.
    pub fn to_cocycle(&self) -> Result<OneStepCocycle> {
        OneStepCocycle::full_shift(self.tuple.clone())
    }

    /// Checks the 2-block almost-additivity inequality with the reported kappa.
    pub fn kappa_holds(&self) -> bool {
        let d = self.dim();
        let norms: Vec<Vec<f64>> = self.states.iter().map(WedgeState::log_norms).collect();
        for (i, si) in self.states.iter().enumerate() {
            for (j, sj) in self.states.iter().enumerate() {
                let prod = si.left_multiply(sj).log_norms();
                for t in 0..d {
                    if prod[t] < norms[i][t] + norms[j][t] + self.log_kappa[t] - 1e-12 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn block_kappa(states: &[WedgeState], d: usize, exec: Execution) -> Vec<f64> {
    let norms: Vec<Vec<f64>> = states.iter().map(WedgeState::log_norms).collect();
    let idx: Vec<usize> = (0..states.len()).collect();
    let parts = map_ordered(exec, &idx, |&i| {
        let mut best = vec![f64::INFINITY; d];
        for (j, sj) in states.iter().enumerate() {
            let prod = states[i].left_multiply(sj).log_norms();
            for t in 0..d {
                best[t] = best[t].min(prod[t] - norms[i][t] - norms[j][t]);
            }
        }
        best
    });
    parts.into_iter().fold(vec![f64::INFINITY; d], |a, b| a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect())
}

#[derive(Debug, Clone)]
pub struct SubsystemOptions {
    /// Padding search bound `K0`.
    pub k0: usize,
    pub exec: Execution,
}

impl Default for SubsystemOptions {
    fn default() -> Self {
        SubsystemOptions { k0: 8, exec: Execution::Parallel }
    }
}

/// Real eigenvectors of a matrix with simple spectrum of distinct moduli,
/// ordered by decreasing modulus, as the columns of a matrix.
fn eigenbasis(b: &SquareMatrix) -> Option<SquareMatrix> {
    let dim = b.dim();
    let mut eig = b.eigenvalues();
    eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    if eig.windows(2).any(|w| (w[0].norm().ln() - w[1].norm().ln()) <= 1e-6) {
        return None;
    }
    let mut v = SquareMatrix::zeros(dim);
    for (k, z) in eig.iter().enumerate() {
        let mut shifted = b.clone();
        for i in 0..dim {
            shifted.set(i, i, b.get(i, i) - z.re);
        }
        let x = matalg::null_vector(&shifted);
        for i in 0..dim {
            v.set(i, k, x[i]);
        }
    }
    Some(v)
}

/// Words over the witness blocks `{a, a w}` with total length at most `max_len`,
/// shortest first.
fn block_strings(a: u16, w: &Word, max_len: usize) -> Vec<Vec<u16>> {
    let aw: Vec<u16> = std::iter::once(a).chain(w.symbols().iter().copied()).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            for block in [vec![a], aw.clone()] {
                if s.len() + block.len() <= max_len {
                    let mut t: Vec<u16> = s.clone();
                    t.extend(&block);
                    next.push(t);
                }
            }
        }
        next.sort();
        next.dedup();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
    out.dedup();
    out
}

struct Scorer {
    /// Per degree `t < d`: wedge eigenbasis of `A_a` and its inverse.
    bases: Vec<(SquareMatrix, SquareMatrix)>,
}

impl Scorer {
    /// `min_t |x_1| / ||x||` where `x` are the eigen-coordinates of
    /// `A_E^{wedge t} v_1^t`.
    fn score(&self, c: &OneStepCocycle, word: &Word) -> Result<f64> {
        let (m, _) = c.scaled_product(word)?;
        let mut worst = f64::INFINITY;
        for (t, (v, vinv)) in self.bases.iter().enumerate() {
            let mt = if t == 0 { m.clone() } else { wedge(&m, t + 1)?.matrix };
            let x = vinv.mul_vec(&mt.mul_vec(&v.column(0)));
            let norm = x.iter().map(|y| y * y).sum::<f64>().sqrt();
            worst = worst.min(if norm > 0.0 { x[0].abs() / norm } else { 0.0 });
        }
        Ok(worst)
    }
}

/// Dominated block tuple over `L_n`, padded with witness words. Empty
/// paddings are tried first; otherwise for each padding length `K = 1..=K0`
/// every core word gets the best-aligned pair `(J1, J2)` with `|J1| = |J2| = K`
/// (`J1` starts and `J2` ends with `a`, both padded by powers of `a`), and
/// the first family passing the block domination test is returned.
pub fn build_dominated_subsystem(
    c: &OneStepCocycle,
    n: usize,
    typ: &TypicalityReport,
    opts: &SubsystemOptions,
) -> Result<DominatedSubsystem> {
    if !typ.typical {
        let why = typ.first_failure().map(|(t, cond)| format!(" (level {t}, condition {cond})")).unwrap_or_default();
        return Err(Error::Precondition(format!("cocycle did not pass the typicality check{why}")));
    }
    let d = c.dim();
    if d < 2 {
        return Err(Error::InvalidArgument("subsystems need dimension at least 2".into()));
    }
    let q = c.transition();
    let cores: Vec<Word> = q.words(n)?.collect();
    let a = typ.a as u16;
    let exec = opts.exec;

    let assemble = |words: Vec<ExtendedWord>, pad: usize| -> Result<DominatedSubsystem> {
        let states: Vec<WedgeState> = words.iter().map(|e| WedgeState::of_word(c, e.word.symbols())).collect();
        let tuple = words
            .iter()
            .map(|e| {
                let (m, s) = c.scaled_product(&e.word)?;
                let mut m = m;
                m.scale(s.exp());
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        let m_max = block_depth(words.len());
        let domination = block_domination(&states, d, m_max, exec);
        let log_kappa = block_kappa(&states, d, exec);
        let ell = words[0].word.len();
        Ok(DominatedSubsystem {
            base_n: n,
            k0: opts.k0,
            pad,
            ell,
            fixed_symbol: typ.a,
            words,
            tuple,
            states,
            domination,
            log_kappa,
        })
    };

    let joins_ok = cores.iter().all(|i| cores.iter().all(|j| q.allows(i.last().unwrap(), j.first().unwrap())));
    if joins_ok {
        let words = cores
            .iter()
            .map(|i| ExtendedWord { core: i.clone(), j1: Word::default(), j2: Word::default(), word: i.clone() })
            .collect();
        let sub = assemble(words, 0)?;
        if sub.domination.overall == Verdict::Pass {
            return Ok(sub);
        }
    }

    let bases = (1..d)
        .map(|t| {
            let b = wedge(c.generator(typ.a), t)?.matrix;
            let v = eigenbasis(&b).ok_or_else(|| {
                Error::Precondition(format!("A_a^(wedge {t}) lacks simple spectrum with distinct moduli"))
            })?;
            let vinv = v.inverse()?;
            Ok((v, vinv))
        })
        .collect::<Result<Vec<_>>>()?;
    let scorer = Scorer { bases };
    let mut worst_word = (f64::INFINITY, Word::default());
    for k in 1..=opts.k0 {
        let strings = block_strings(a, &typ.w, k);
        let chosen = map_ordered(exec, &cores, |core| -> Result<Option<(f64, ExtendedWord)>> {
            let (first, last) = (core.first().unwrap(), core.last().unwrap());
            let c2 = q.connector(last, a as usize);
            let mut best: Option<(f64, ExtendedWord)> = None;
            for s1 in &strings {
                // J1 = a^r S1 C1
                let tail = s1.last().copied().unwrap_or(a) as usize;
                let Some(c1) = q.connector(tail, first) else { continue };
                if 1 + s1.len() + c1.len() > k && !(s1.first() == Some(&a) && s1.len() + c1.len() == k) {
                    continue;
                }
                let r1 = k - s1.len() - c1.len();
                let mut j1: Vec<u16> = vec![a; r1];
                j1.extend(s1);
                j1.extend(&c1);
                for s2 in &strings {
                    // J2 = C2 S2 a^r, S2 starting with a
                    let Some(c2) = c2.as_ref() else { continue };
                    if c2.len() + s2.len() + 1 > k {
                        continue;
                    }
                    let r2 = k - c2.len() - s2.len();
                    let mut j2: Vec<u16> = c2.clone();
                    j2.extend(s2);
                    j2.extend(std::iter::repeat_n(a, r2));
                    let word = Word::new(j1.iter().chain(core.symbols()).chain(&j2).copied().collect());
                    if !q.is_admissible(&word)? {
                        continue;
                    }
                    let score = scorer.score(c, &word)?;
                    if best.as_ref().is_none_or(|(b, _)| score > *b) {
                        best = Some((
                            score,
                            ExtendedWord { core: core.clone(), j1: Word::new(j1.clone()), j2: Word::new(j2), word },
                        ));
                    }
                }
            }
            Ok(best)
        });
        let mut words = Vec::with_capacity(cores.len());
        let mut complete = true;
        for (core, pick) in cores.iter().zip(chosen) {
            match pick? {
                Some((score, e)) => {
                    if score < worst_word.0 {
                        worst_word = (score, core.clone());
                    }
                    words.push(e);
                }
                None => {
                    complete = false;
                    worst_word = (f64::NEG_INFINITY, core.clone());
                }
            }
        }
        if !complete {
            continue;
        }
        let sub = assemble(words, k)?;
        if sub.domination.overall == Verdict::Pass {
            return Ok(sub);
        }
    }
    if worst_word.1.is_empty() {
        // no padded family was scored; name the core with the weakest gap
        let mut weakest = (f64::NEG_INFINITY, cores[0].clone());
        for core in &cores {
            let lsv = c.profile(core)?.log_singular_values();
            let gap = lsv.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            if gap > weakest.0 {
                weakest = (gap, core.clone());
            }
        }
        worst_word.1 = weakest.1;
    }
    Err(Error::SearchExhausted {
        worst_word: worst_word.1.to_string(),
        detail: format!("no padding of length at most {} made the block tuple over L_{n} dominated", opts.k0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemPressure {
    pub q: Vec<f64>,
    /// Block depth `m`.
    pub m: usize,
    pub ell: usize,
    /// `(1/m) log sum over m-blocks of psi^q`, the estimate of `P_{l,D}(q)`.
    pub value: f64,
    pub lower: f64,
    pub upper: Option<f64>,
}

impl SubsystemPressure {
    /// Per-symbol value `P_{l,D}(q) / l`.
    pub fn per_symbol(&self) -> f64 {
        self.value / self.ell as f64
    }
}

/// Block pressure at depth `m` with almost-additivity brackets from the
/// empirical 2-block constant kappa.
pub fn subsystem_pressure(sub: &DominatedSubsystem, q: &[f64], m: usize, exec: Execution) -> Result<SubsystemPressure> {
    let d = sub.dim();
    if q.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.len() });
    }
    if m == 0 {
        return Err(Error::ZeroLength);
    }
    let blocks = (sub.len() as f64).powi(m as i32);
    if blocks > BLOCK_PRESSURE_BUDGET as f64 {
        let max_m = (1..m).rev().find(|&k| (sub.len() as f64).powi(k as i32) <= BLOCK_PRESSURE_BUDGET as f64);
        return Err(Error::BudgetExceeded {
            required: blocks,
            budget: BLOCK_PRESSURE_BUDGET,
            hint: match max_m {
                Some(k) => format!("the largest block depth within budget is m = {k}"),
                None => "use a smaller base length".into(),
            },
        });
    }
    let lse = block_walk(
        &sub.states,
        m,
        exec,
        LogSumExp::default,
        |acc, depth, st| {
            if depth == m {
                let lsv = st.log_singular_values();
                acc.push(q.iter().zip(&lsv).map(|(a, b)| if *a == 0.0 { 0.0 } else { a * b }).sum());
            }
        },
        LogSumExp::merge,
    );
    let mf = m as f64;
    let value = lse.value() / mf;
    let t = ExponentWeights::new(q.to_vec())?.t();
    let kappa = sub.log_kappa_min();
    let pos: f64 = t.iter().filter(|&&x| x > 0.0).sum();
    let neg: f64 = t.iter().filter(|&&x| x < 0.0).sum();
    let lower = value + pos * kappa / mf;
    let upper = if kappa.is_finite() { Some(value + neg * kappa / mf) } else { None };
    Ok(SubsystemPressure { q: q.to_vec(), m, ell: sub.ell, value, lower, upper })
}
