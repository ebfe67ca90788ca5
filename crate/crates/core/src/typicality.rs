//! Typicality via explicit holonomy loops, and the empirical search for
//! simultaneous quasi-multiplicativity constants.
//!
//! For one-step cocycles the local stable and unstable holonomies are the
//! identity, so the loop around the homoclinic point encoded by `(a, w)` is
//! the finite product `W = A_a^{-(|w|+1)} A_{a w}`.

use nalgebra::DMatrix;

use crate::cocycle::{OneStepCocycle, WedgeState};
use crate::error::{Error, Result};
use crate::matalg::{self, binomial, subsets, wedge, SquareMatrix};
use crate::sft::Word;
use crate::sweep::{map_ordered, Execution};

/// Largest exterior-power dimension for which condition (ii) is enumerated.
pub const MAX_INDEPENDENCE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Minimum gap between log-moduli of eigenvalues.
    pub gap: f64,
    /// Minimum smallest singular value of a column-normalized independence matrix.
    pub indep: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { gap: 1e-6, indep: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct HolonomyLoop {
    /// Fixed symbol (0-based).
    pub a: usize,
    pub w: Word,
    pub matrix: SquareMatrix,
}

pub fn holonomy_loop(c: &OneStepCocycle, a: usize, w: &Word) -> Result<HolonomyLoop> {
    let q = c.transition();
    if a >= c.alphabet_size() {
        return Err(Error::SymbolOutOfRange { symbol: a + 1, k: c.alphabet_size() });
    }
    if !q.allows(a, a) {
        return Err(Error::Precondition(format!("symbol {} is not a fixed point (Q_aa = 0)", a + 1)));
    }
    if w.is_empty() {
        return Err(Error::ZeroLength);
    }
    let aw = Word::new(vec![a as u16]).concat(w);
    let awa = aw.concat(&Word::new(vec![a as u16]));
    if !q.is_admissible(&awa)? {
        return Err(Error::Inadmissible { word: awa.to_string() });
    }
    let back = c.generator(a).inverse()?.pow(w.len() + 1);
    let matrix = &back * &c.product(&aw)?;
    Ok(HolonomyLoop { a, w: w.clone(), matrix })
}

impl HolonomyLoop {
    /// Recomputes `W` from the generators and compares entrywise (relative 1e-12).
    pub fn verify(&self, c: &OneStepCocycle) -> bool {
        match holonomy_loop(c, self.a, &self.w) {
            Ok(fresh) => fresh.matrix.max_abs_diff(&self.matrix) <= 1e-12 * self.matrix.max_abs().max(1.0),
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub t: usize,
    /// `log |lambda|` of the eigenvalues of `A_a^{wedge t}`, non-increasing.
    pub log_moduli: Vec<f64>,
    /// Minimum gap between consecutive log-moduli.
    pub gap_margin: f64,
    pub condition_i: bool,
    /// Minimum over tested `(I, J)` of the smallest singular value; absent
    /// when condition (i) fails (real eigenvectors are then undefined).
    pub independence_margin: Option<f64>,
    /// 1-based index sets of the worst pair.
    pub worst_pair: Option<(Vec<usize>, Vec<usize>)>,
    pub condition_ii: bool,
}

impl LevelReport {
    pub fn passed(&self) -> bool {
        self.condition_i && self.condition_ii
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypicalityReport {
    pub a: usize,
    pub w: Word,
    pub levels: Vec<LevelReport>,
    pub typical: bool,
}

impl TypicalityReport {
    /// First level and condition that failed, e.g. `(1, "i")`.
    pub fn first_failure(&self) -> Option<(usize, &'static str)> {
        self.levels.iter().find_map(|l| {
            if !l.condition_i {
                Some((l.t, "i"))
            } else if !l.condition_ii {
                Some((l.t, "ii"))
            } else {
                None
            }
        })
    }
}

pub fn check_1typical(c: &OneStepCocycle, t: usize, lp: &HolonomyLoop, tol: Tolerances) -> Result<LevelReport> {
    let d = c.dim();
    if t == 0 || t >= d {
        return Err(Error::DegreeOutOfRange { t, d: d.saturating_sub(1) });
    }
    let dim = binomial(d, t);
    if dim > MAX_INDEPENDENCE_DIM {
        return Err(Error::InvalidArgument(format!(
            "exterior power of degree {t} has dimension {dim} > {MAX_INDEPENDENCE_DIM}; condition (ii) is not enumerated"
        )));
    }
    let b = wedge(c.generator(lp.a), t)?.matrix;
    let wt = wedge(&lp.matrix, t)?.matrix;

    let mut eig = b.eigenvalues();
    eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let log_moduli: Vec<f64> = eig.iter().map(|z| z.norm().ln()).collect();
    let gap_margin = log_moduli.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min);
    let condition_i = gap_margin > tol.gap;
    if !condition_i {
        return Ok(LevelReport {
            t,
            log_moduli,
            gap_margin,
            condition_i,
            independence_margin: None,
            worst_pair: None,
            condition_ii: false,
        });
    }

    // distinct moduli force real eigenvalues
    let vs: Vec<Vec<f64>> = eig
        .iter()
        .map(|z| {
            let mut shifted = b.clone();
            for i in 0..dim {
                shifted.set(i, i, b.get(i, i) - z.re);
            }
            matalg::null_vector(&shifted)
        })
        .collect();
    let wvs: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| {
            let mut x = wt.mul_vec(v);
            matalg::normalize(&mut x);
            x
        })
        .collect();

    // smallest singular values only shrink when columns are added, so the
    // pairs with |I| + |J| = D carry the minimum
    let mut worst = f64::INFINITY;
    let mut worst_pair = None;
    for i_size in 0..=dim {
        for ii in subsets(dim, i_size) {
            for jj in subsets(dim, dim - i_size) {
                let mut data = Vec::with_capacity(dim * dim);
                for &i in &ii {
                    data.extend_from_slice(&wvs[i]);
                }
                for &j in &jj {
                    data.extend_from_slice(&vs[j]);
                }
                let m = DMatrix::from_column_slice(dim, dim, &data);
                let s = m.singular_values().min();
                if s < worst {
                    worst = s;
                    worst_pair = Some((
                        ii.iter().map(|x| x + 1).collect::<Vec<_>>(),
                        jj.iter().map(|x| x + 1).collect::<Vec<_>>(),
                    ));
                }
            }
        }
    }
    Ok(LevelReport {
        t,
        log_moduli,
        gap_margin,
        condition_i,
        independence_margin: Some(worst),
        worst_pair,
        condition_ii: worst > tol.indep,
    })
}

pub fn check_typical(c: &OneStepCocycle, a: usize, w: &Word, tol: Tolerances) -> Result<TypicalityReport> {
    let lp = holonomy_loop(c, a, w)?;
    let levels = (1..c.dim()).map(|t| check_1typical(c, t, &lp, tol)).collect::<Result<Vec<_>>>()?;
    let typical = levels.iter().all(LevelReport::passed);
    Ok(TypicalityReport { a, w: w.clone(), levels, typical })
}

#[derive(Debug, Clone)]
pub struct TypicalSearch {
    /// First passing pair in search order.
    pub found: Option<TypicalityReport>,
    pub pairs_tried: usize,
}

/// Tries every fixed symbol `a` and every core word `w` with `|w| <= depth`
/// (shortest first, lexicographic) until a pair passes.
pub fn search_typical_pair(c: &OneStepCocycle, depth: usize, tol: Tolerances) -> Result<TypicalSearch> {
    let q = c.transition();
    let fixed: Vec<usize> = (0..c.alphabet_size()).filter(|&a| q.allows(a, a)).collect();
    if fixed.is_empty() {
        return Err(Error::Precondition("no symbol a with Q_aa = 1; a fixed point is required".into()));
    }
    let mut tried = 0;
    for &a in &fixed {
        for len in 1..=depth {
            for w in q.words(len)? {
                let (first, last) = (w.first().unwrap(), w.last().unwrap());
                if !q.allows(a, first) || !q.allows(last, a) {
                    continue;
                }
                tried += 1;
                let report = check_typical(c, a, &w, tol)?;
                if report.typical {
                    return Ok(TypicalSearch { found: Some(report), pairs_tried: tried });
                }
            }
        }
    }
    Ok(TypicalSearch { found: None, pairs_tried: tried })
}

/// Default threshold above which a quasi-multiplicativity constant counts as positive.
pub const QM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct QmWitness {
    pub i: Word,
    pub j: Word,
    /// Best connector for this pair, if any is admissible.
    pub k: Option<Word>,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QMReport {
    pub n_max: usize,
    /// Smallest connecting length with `C(k) > tol`.
    pub k: Option<usize>,
    /// `C(k)` for that length, or the best constant found when the search failed.
    pub constant: f64,
    pub log_constant: f64,
    /// `log C(k)` for `k = 0..=k_max`.
    pub log_constants: Vec<f64>,
    /// `k * log max_s ||A_s^{wedge i}||` for `i = 1..d` at the reported length.
    pub log_c0: Vec<f64>,
    /// Worst pairs at the reported length (or at `k_max` on failure), worst first.
    pub witnesses: Vec<QmWitness>,
}

impl QMReport {
    pub fn succeeded(&self) -> bool {
        self.k.is_some()
    }
}

struct Memo {
    word: Word,
    state: WedgeState,
    log_norms: Vec<f64>,
}

fn memo_words(c: &OneStepCocycle, lengths: std::ops::RangeInclusive<usize>) -> Result<Vec<Memo>> {
    let q = c.transition();
    let mut out = Vec::new();
    for n in lengths {
        if n == 0 {
            let state = WedgeState::identity(c);
            out.push(Memo { word: Word::default(), log_norms: state.log_norms(), state });
            continue;
        }
        for w in q.words(n)? {
            let state = WedgeState::of_word(c, w.symbols());
            out.push(Memo { log_norms: state.log_norms(), word: w, state });
        }
    }
    Ok(out)
}

/// Exhaustive search over `I, J` in `L_{<= n_max}` and connectors in `L_k`,
/// `k = 0..=k_max`, for the simultaneous quasi-multiplicativity constant
/// `C(k) = min_{I,J} max_K min_i ||A_{IKJ}^{wedge i}|| / (||A_I^{wedge i}|| ||A_J^{wedge i}||)`.
pub fn qm_search(c: &OneStepCocycle, n_max: usize, k_max: usize, tol: f64, exec: Execution) -> Result<QMReport> {
    if n_max == 0 {
        return Err(Error::ZeroLength);
    }
    let q = c.transition();
    let words = memo_words(c, 1..=n_max)?;
    let max_norms = c.max_log_norms();
    let mut log_constants = Vec::new();
    let mut last_witnesses = Vec::new();
    for k in 0..=k_max {
        let connectors = memo_words(c, k..=k)?;
        let per_i = map_ordered(exec, &words, |wi| {
            let last = wi.word.last().unwrap();
            let mut worst: Option<QmWitness> = None;
            for wj in &words {
                let first = wj.word.first().unwrap();
                let mut best = f64::NEG_INFINITY;
                let mut best_k = None;
                for wk in &connectors {
                    let ok = match (wk.word.first(), wk.word.last()) {
                        (Some(f), Some(l)) => q.allows(last, f) && q.allows(l, first),
                        _ => q.allows(last, first),
                    };
                    if !ok {
                        continue;
                    }
                    let prod = wi.state.left_multiply(&wk.state).left_multiply(&wj.state);
                    let r = prod
                        .log_norms()
                        .iter()
                        .zip(wi.log_norms.iter().zip(&wj.log_norms))
                        .map(|(p, (a, b))| p - a - b)
                        .fold(f64::INFINITY, f64::min);
                    if r > best {
                        best = r;
                        best_k = Some(wk.word.clone());
                    }
                }
                if worst.as_ref().is_none_or(|w| best < w.log_ratio) {
                    worst = Some(QmWitness { i: wi.word.clone(), j: wj.word.clone(), k: best_k, log_ratio: best });
                }
            }
            worst.unwrap()
        });
        let mut witnesses = per_i;
        witnesses.sort_by(|a, b| a.log_ratio.total_cmp(&b.log_ratio));
        witnesses.truncate(5);
        let log_c = witnesses[0].log_ratio;
        log_constants.push(log_c);
        last_witnesses = witnesses;
        if log_c.exp() > tol {
            return Ok(QMReport {
                n_max,
                k: Some(k),
                constant: log_c.exp(),
                log_constant: log_c,
                log_constants,
                log_c0: max_norms.iter().map(|m| k as f64 * m).collect(),
                witnesses: last_witnesses,
            });
        }
    }
    let best = log_constants.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QMReport {
        n_max,
        k: None,
        constant: best.exp(),
        log_constant: best,
        log_constants,
        log_c0: max_norms.iter().map(|m| k_max as f64 * m).collect(),
        witnesses: last_witnesses,
    })
}
