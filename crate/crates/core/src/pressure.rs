//! Word-sum pressure `P_n(q) = (1/n) log s_n(q)`, its brackets and its
//! gradient.
//!
//! Brackets use the quasi-multiplicativity constants found by
//! [`crate::typicality::qm_search`] at desk scale, so they are labeled
//! [`BRACKET_LABEL`] wherever they are printed.

use std::collections::BTreeMap;

use crate::cocycle::OneStepCocycle;
use crate::error::{Error, Result};
use crate::sweep::{check_budget, sweep, Execution, GibbsAccumulator, GibbsMoments, ProfileTable, DEFAULT_BUDGET};
use crate::typicality::QMReport;

pub const BRACKET_LABEL: &str = "empirical-constant";

/// Profile tables above this many stored values are not cached; sums are
/// streamed instead.
const TABLE_VALUES: u64 = 8_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentWeights {
    q: Vec<f64>,
}

impl ExponentWeights {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ExponentWeights { q })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// `t_i = q_i - q_{i+1}` with `q_{d+1} = 0`.
    pub fn t(&self) -> Vec<f64> {
        (0..self.q.len()).map(|i| self.q[i] - self.q.get(i + 1).copied().unwrap_or(0.0)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketConstants {
    pub k: usize,
    pub log_c: f64,
    pub log_c0: Vec<f64>,
    /// `log C_1` entering the lower bracket.
    pub log_c1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureEstimate {
    pub q: Vec<f64>,
    pub n: usize,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// `|P_n - P_{n-2}|`.
    pub cauchy: Option<f64>,
    pub constants: Option<BracketConstants>,
}

impl PressureEstimate {
    pub fn width(&self) -> Option<f64> {
        Some(self.upper? - self.lower?)
    }
}

/// Pressure sums for one cocycle, caching a profile table per word length.
pub struct PressureEvaluator<'a> {
    c: &'a OneStepCocycle,
    exec: Execution,
    budget: u64,
    tables: BTreeMap<usize, ProfileTable>,
}

impl<'a> PressureEvaluator<'a> {
    pub fn new(c: &'a OneStepCocycle, exec: Execution) -> Self {
        Self::with_budget(c, exec, DEFAULT_BUDGET)
    }

    pub fn with_budget(c: &'a OneStepCocycle, exec: Execution, budget: u64) -> Self {
        PressureEvaluator { c, exec, budget, tables: BTreeMap::new() }
    }

    pub fn cocycle(&self) -> &'a OneStepCocycle {
        self.c
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Cached table for length `n`, built on first use; `None` when the
    /// table would be too large to hold.
    pub fn table(&mut self, n: usize) -> Result<Option<&ProfileTable>> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        let count = check_budget(self.c.transition(), n, self.budget)?;
        if count * self.c.dim() as u64 > TABLE_VALUES {
            return Ok(None);
        }
        if !self.tables.contains_key(&n) {
            let t = ProfileTable::build(self.c, n, self.exec, self.budget)?;
            self.tables.insert(n, t);
        }
        Ok(self.tables.get(&n))
    }

    /// Gibbs moments of the profiles at `(q, n)`; the log partition sum
    /// is `log s_n(q)`.
    pub fn moments(&mut self, q: &[f64], n: usize, second: bool) -> Result<GibbsMoments> {
        let d = self.c.dim();
        if q.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: q.len() });
        }
        let exec = self.exec;
        if let Some(t) = self.table(n)? {
            return Ok(t.gibbs(q, exec, second));
        }
        let nf = n as f64;
        let acc = sweep(
            self.c,
            n,
            exec,
            self.budget,
            || GibbsAccumulator::new(d, second),
            |acc, _w, lsv| {
                let lw: f64 = q.iter().zip(lsv).map(|(a, b)| if *a == 0.0 { 0.0 } else { a * b }).sum();
                let p: Vec<f64> = lsv.iter().map(|v| v / nf).collect();
                acc.push(lw, &p);
            },
            GibbsAccumulator::merge,
        )?;
        Ok(acc.finish())
    }

    pub fn log_sn(&mut self, q: &[f64], n: usize) -> Result<f64> {
        let d = self.c.dim();
        if q.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: q.len() });
        }
        let exec = self.exec;
        if let Some(t) = self.table(n)? {
            return Ok(t.log_partition(q, exec));
        }
        Ok(self.moments(q, n, false)?.log_sum)
    }

    pub fn pressure(&mut self, q: &[f64], n: usize) -> Result<f64> {
        Ok(self.log_sn(q, n)? / n as f64)
    }

    /// Exact gradient of `P_n` at `q`: the Gibbs mean profile.
    pub fn gradient(&mut self, q: &[f64], n: usize) -> Result<Vec<f64>> {
        Ok(self.moments(q, n, false)?.mean)
    }

    /// `(P_n, grad P_n, Hess P_n)` from one pass; the Hessian is row-major.
    pub fn value_gradient_hessian(&mut self, q: &[f64], n: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let m = self.moments(q, n, true)?;
        let nf = n as f64;
        let hess = m.covariance.unwrap().into_iter().map(|v| v * nf).collect();
        Ok((m.log_sum / nf, m.mean, hess))
    }

    pub fn estimate(&mut self, q: &[f64], n: usize, qm: Option<&QMReport>) -> Result<PressureEstimate> {
        let value = self.pressure(q, n)?;
        let cauchy = if n > 2 { Some((value - self.pressure(q, n - 2)?).abs()) } else { None };
        let t = ExponentWeights::new(q.to_vec())?.t();
        let all_nonneg = t.iter().all(|&x| x >= 0.0);
        let nf = n as f64;
        let mut lower = None;
        let mut upper = all_nonneg.then_some(value);
        let mut constants = None;
        if let Some(report) = qm {
            if let Some(k) = report.k.filter(|&k| k < n) {
                let log_c1: f64 = t
                    .iter()
                    .zip(&report.log_c0)
                    .map(|(&ti, &c0)| if ti >= 0.0 { ti * report.log_constant } else { ti * c0 })
                    .sum();
                lower = Some((log_c1 + self.log_sn(q, n - k)?) / nf);
                if k == 0 && !all_nonneg {
                    // with k = 0 the constant also bounds ||A_IJ|| from below,
                    // making C_2 s_n submultiplicative for the negative t_i
                    let log_c2: f64 = t.iter().filter(|&&ti| ti < 0.0).map(|ti| ti * report.log_constant).sum();
                    upper = Some(value + log_c2 / nf);
                }
                constants = Some(BracketConstants {
                    k,
                    log_c: report.log_constant,
                    log_c0: report.log_c0.clone(),
                    log_c1,
                });
            } else if report.k.is_some() {
                log::warn!("connector length is not below n = {n}; lower bracket omitted");
            }
        }
        Ok(PressureEstimate { q: q.to_vec(), n, value, lower, upper, cauchy, constants })
    }
}

pub fn log_sn(c: &OneStepCocycle, q: &[f64], n: usize, exec: Execution) -> Result<f64> {
    PressureEvaluator::new(c, exec).log_sn(q, n)
}

pub fn pressure_estimate(
    c: &OneStepCocycle,
    q: &[f64],
    n: usize,
    qm: Option<&QMReport>,
    exec: Execution,
) -> Result<PressureEstimate> {
    PressureEvaluator::new(c, exec).estimate(q, n, qm)
}

pub fn gibbs_gradient(c: &OneStepCocycle, q: &[f64], n: usize, exec: Execution) -> Result<Vec<f64>> {
    PressureEvaluator::new(c, exec).gradient(q, n)
}

/// `P_n((q_a + q_b)/2) - (P_n(q_a) + P_n(q_b))/2`; never positive beyond rounding.
pub fn convexity_probe(ev: &mut PressureEvaluator<'_>, qa: &[f64], qb: &[f64], n: usize) -> Result<f64> {
    let mid: Vec<f64> = qa.iter().zip(qb).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(ev.pressure(&mid, n)? - 0.5 * (ev.pressure(qa, n)? + ev.pressure(qb, n)?))
}

/// Regular grid over a box, one `lo:hi:step` range per coordinate joined by `;`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<(f64, f64, f64)>,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let axes = s
            .split(';')
            .map(|part| {
                let v: Vec<f64> = part
                    .split(':')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::InvalidArgument(format!("grid axis {part:?}: {e}")))?;
                match v[..] {
                    [x] => Ok((x, x, 1.0)),
                    [lo, hi, step] if step > 0.0 && hi >= lo => Ok((lo, hi, step)),
                    _ => Err(Error::InvalidArgument(format!("grid axis {part:?} is not lo:hi:step"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridSpec { axes })
    }

    pub fn cube(d: usize, lo: f64, hi: f64, step: f64) -> Self {
        GridSpec { axes: vec![(lo, hi, step); d] }
    }

    /// The default table grid `[-3, 3]^d` with step 0.25.
    pub fn default_for(d: usize) -> Self {
        Self::cube(d, -3.0, 3.0, 0.25)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Points in row-major order (last coordinate fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let ticks: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|&(lo, hi, step)| {
                let m = ((hi - lo) / step + 1e-9).floor() as usize;
                (0..=m).map(|i| lo + i as f64 * step).collect()
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &ticks {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut p = p.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }
}
