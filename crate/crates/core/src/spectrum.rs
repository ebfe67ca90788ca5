//! Entropy spectrum: Legendre transform of the finite-n pressure, the
//! achievable-exponent domain, and a cylinder-counting oracle.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::cocycle::OneStepCocycle;
use crate::error::{Error, Result};
use crate::hull::PointHull;
use crate::pressure::PressureEvaluator;
use crate::sweep::{sweep, Execution};
use crate::typicality::QMReport;

/// Hull membership tolerance.
const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    InteriorConverged,
    BoundarySuspect,
    Diverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::InteriorConverged => "interior-converged",
            Status::BoundarySuspect => "boundary-suspect",
            Status::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub alpha: Vec<f64>,
    /// Absent when `alpha` lies outside the profile hull.
    pub h: Option<f64>,
    pub q_star: Vec<f64>,
    pub status: Status,
    /// The minimum was negative and `h` was clamped to 0.
    pub clamped: bool,
    pub grad_norm: f64,
    /// Pressure bracket width at `q_star`, when both brackets exist.
    pub band: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct DomainEstimate {
    pub n: usize,
    pub q_radius: f64,
    pub profile_hull: PointHull,
    pub gradient_hull: PointHull,
}

impl DomainEstimate {
    /// Per-coordinate ranges of the profiles.
    pub fn ranges(&self) -> Vec<(f64, f64)> {
        self.profile_hull.ranges()
    }

    /// `m` points on the principal axis of the gradient points, between the
    /// two extreme gradients shrunk by `shrink` toward their centroid.
    pub fn auto_grid(&self, m: usize, shrink: f64) -> Vec<Vec<f64>> {
        let pts = self.gradient_hull.points();
        let d = self.gradient_hull.dim();
        let centroid = self.gradient_hull.centroid();
        if m == 0 {
            return Vec::new();
        }
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for p in pts {
            for i in 0..d {
                for j in 0..d {
                    cov[(i, j)] += (p[i] - centroid[i]) * (p[j] - centroid[j]);
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let top = eig.eigenvalues.iamax();
        let axis: Vec<f64> = (0..d).map(|i| eig.eigenvectors[(i, top)]).collect();
        let proj = |p: &[f64]| -> f64 { p.iter().zip(&centroid).zip(&axis).map(|((x, c), a)| (x - c) * a).sum() };
        let lo = pts.iter().min_by(|a, b| proj(a).total_cmp(&proj(b))).unwrap();
        let hi = pts.iter().max_by(|a, b| proj(a).total_cmp(&proj(b))).unwrap();
        let shrunk = |p: &[f64]| -> Vec<f64> { p.iter().zip(&centroid).map(|(x, c)| c + shrink * (x - c)).collect() };
        let (a, b) = (shrunk(lo), shrunk(hi));
        if m == 1 {
            return vec![a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()];
        }
        (0..m)
            .map(|i| {
                let s = i as f64 / (m - 1) as f64;
                a.iter().zip(&b).map(|(x, y)| x + s * (y - x)).collect()
            })
            .collect()
    }
}

fn directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|i| {
                let th = i as f64 * std::f64::consts::TAU / 64.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            let total = 5usize.pow(d as u32);
            for code in 0..total {
                let v: Vec<f64> = (0..d).map(|i| ((code / 5usize.pow(i as u32)) % 5) as f64 - 2.0).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    out.push(v.iter().map(|x| x / norm).collect());
                }
            }
            out
        }
    }
}

pub fn domain_estimate(ev: &mut PressureEvaluator<'_>, n: usize, q_radius: f64) -> Result<DomainEstimate> {
    let c = ev.cocycle();
    let d = c.dim();
    let profiles: Vec<Vec<f64>> = match ev.table(n)? {
        Some(t) => (0..t.len()).map(|i| t.profile(i)).collect(),
        None => sweep(
            c,
            n,
            ev.execution(),
            u64::MAX,
            Vec::new,
            |acc: &mut Vec<Vec<f64>>, _w, lsv| acc.push(lsv.iter().map(|v| v / n as f64).collect()),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?,
    };
    let profile_hull = PointHull::new(d, profiles);
    let mut grads = vec![ev.gradient(&vec![0.0; d], n)?];
    for u in directions(d) {
        let q: Vec<f64> = u.iter().map(|x| x * q_radius).collect();
        grads.push(ev.gradient(&q, n)?);
    }
    Ok(DomainEstimate { n, q_radius, profile_hull, gradient_hull: PointHull::new(d, grads) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreOptions {
    pub q_max: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Longest step per iteration.
    pub max_step: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        LegendreOptions { q_max: 40.0, grad_tol: 1e-6, max_iter: 500, max_step: 8.0 }
    }
}

/// Legendre transform machinery at one word length.
pub struct SpectrumSolver<'a> {
    ev: PressureEvaluator<'a>,
    n: usize,
    domain: DomainEstimate,
    qm: Option<QMReport>,
    pub options: LegendreOptions,
}

impl<'a> SpectrumSolver<'a> {
    pub fn new(c: &'a OneStepCocycle, n: usize, qm: Option<QMReport>, exec: Execution) -> Result<Self> {
        Self::with_radius(c, n, qm, exec, 8.0)
    }

    pub fn with_radius(
        c: &'a OneStepCocycle,
        n: usize,
        qm: Option<QMReport>,
        exec: Execution,
        q_radius: f64,
    ) -> Result<Self> {
        let mut ev = PressureEvaluator::new(c, exec);
        let domain = domain_estimate(&mut ev, n, q_radius)?;
        Ok(SpectrumSolver { ev, n, domain, qm, options: LegendreOptions::default() })
    }

    pub fn domain(&self) -> &DomainEstimate {
        &self.domain
    }

    pub fn evaluator(&mut self) -> &mut PressureEvaluator<'a> {
        &mut self.ev
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn objective(&mut self, q: &[f64], alpha: &[f64]) -> Result<f64> {
        Ok(self.ev.pressure(q, self.n)? - dot(q, alpha))
    }

    /// `inf_q P_n(q) - <q, alpha>` by damped Newton steps (pseudo-inverse
    /// Hessian, gradient fallback) with Armijo backtracking.
    pub fn legendre(&mut self, alpha: &[f64], start: Option<&[f64]>) -> Result<SpectrumPoint> {
        let d = self.domain.profile_hull.dim();
        if alpha.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: alpha.len() });
        }
        if !self.domain.profile_hull.contains(alpha, HULL_TOL) {
            return Ok(SpectrumPoint {
                alpha: alpha.to_vec(),
                h: None,
                q_star: vec![0.0; d],
                status: Status::Diverged,
                clamped: false,
                grad_norm: f64::NAN,
                band: None,
                iterations: 0,
            });
        }
        let opts = self.options;
        let n = self.n;
        let mut q = start.map(|s| s.to_vec()).unwrap_or_else(|| vec![0.0; d]);
        let mut escaped = false;
        let mut iterations = 0;
        let (mut f, mut g, mut h) = self.ev.value_gradient_hessian(&q, n)?;
        f -= dot(&q, alpha);
        sub_assign(&mut g, alpha);
        while iterations < opts.max_iter {
            if inf_norm(&g) <= opts.grad_tol {
                break;
            }
            iterations += 1;
            let mut dir = newton_direction(&h, &g, d);
            if dot(&dir, &g) >= -1e-300 {
                dir = g.iter().map(|x| -x).collect();
            }
            let len = norm(&dir);
            if len > opts.max_step {
                dir.iter_mut().for_each(|x| *x *= opts.max_step / len);
            }
            let slope = dot(&dir, &g);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = q.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
                let ft = self.objective(&trial, alpha)?;
                if ft <= f + 1e-4 * step * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, _)) = accepted else { break };
            q = next;
            let (fv, gv, hv) = self.ev.value_gradient_hessian(&q, n)?;
            f = fv - dot(&q, alpha);
            g = gv;
            sub_assign(&mut g, alpha);
            h = hv;
            if norm(&q) > opts.q_max {
                escaped = true;
                break;
            }
        }
        let grad_norm = inf_norm(&g);
        let interior = self.domain.gradient_hull.contains(alpha, HULL_TOL);
        let status = if grad_norm <= opts.grad_tol && !escaped && interior {
            Status::InteriorConverged
        } else {
            Status::BoundarySuspect
        };
        let clamped = f < 0.0;
        let qm = self.qm.clone();
        let band = self.ev.estimate(&q, n, qm.as_ref()).ok().and_then(|e| e.width());
        Ok(SpectrumPoint {
            alpha: alpha.to_vec(),
            h: Some(f.max(0.0)),
            q_star: q,
            status,
            clamped,
            grad_norm,
            band,
            iterations,
        })
    }

    pub fn curve(&mut self, grid: &[Vec<f64>]) -> Result<SpectrumCurve> {
        let mut points: Vec<SpectrumPoint> = Vec::with_capacity(grid.len());
        for alpha in grid {
            let warm = points
                .iter()
                .rev()
                .find(|p| p.status == Status::InteriorConverged)
                .map(|p| p.q_star.clone());
            points.push(self.legendre(alpha, warm.as_deref())?);
        }
        let concavity_slack = concavity_slack(&points);
        Ok(SpectrumCurve { points, concavity_slack })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub points: Vec<SpectrumPoint>,
    /// Minimum of `h(mid) - (h(left) + h(right))/2` over consecutive
    /// equally spaced collinear triples; `+inf` when there are none.
    pub concavity_slack: f64,
}

fn concavity_slack(points: &[SpectrumPoint]) -> f64 {
    points
        .windows(3)
        .filter_map(|w| {
            let (l, m, r) = (&w[0], &w[1], &w[2]);
            let mid_ok = l.alpha.iter().zip(&r.alpha).zip(&m.alpha).all(|((a, b), c)| (0.5 * (a + b) - c).abs() < 1e-9);
            match (mid_ok, l.h, m.h, r.h) {
                (true, Some(hl), Some(hm), Some(hr)) => Some(hm - 0.5 * (hl + hr)),
                _ => None,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn legendre_entropy(
    c: &OneStepCocycle,
    alpha: &[f64],
    n: usize,
    qm: Option<&QMReport>,
    exec: Execution,
) -> Result<SpectrumPoint> {
    SpectrumSolver::new(c, n, qm.cloned(), exec)?.legendre(alpha, None)
}

pub fn spectrum_curve(
    c: &OneStepCocycle,
    alpha_grid: &[Vec<f64>],
    n: usize,
    qm: Option<&QMReport>,
    exec: Execution,
) -> Result<SpectrumCurve> {
    SpectrumSolver::new(c, n, qm.cloned(), exec)?.curve(alpha_grid)
}

fn newton_direction(h: &[f64], g: &[f64], d: usize) -> Vec<f64> {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, h));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = 1e-10 * top;
    let mut dir = vec![0.0; d];
    for k in 0..d {
        let lam = eig.eigenvalues[k];
        if lam <= cut || lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let coef: f64 = (0..d).map(|i| v[i] * g[i]).sum::<f64>() / lam;
        for i in 0..d {
            dir[i] -= coef * v[i];
        }
    }
    dir
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCount {
    pub alpha: Vec<f64>,
    pub epsilon: f64,
    pub n: usize,
    pub count: u64,
    /// `(1/n) log count`, `-inf` when nothing was counted.
    pub h_count: f64,
}

/// Counts `I in L_n` with `max_i |profile(I)_i - alpha_i| <= epsilon`, for
/// every alpha in one pass.
pub fn oracle_counts(
    ev: &mut PressureEvaluator<'_>,
    alphas: &[Vec<f64>],
    epsilon: f64,
    n: usize,
) -> Result<Vec<OracleCount>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must be positive")));
    }
    let nf = n as f64;
    let hit = |row: &[f64], alpha: &[f64]| row.iter().zip(alpha).all(|(r, a)| (r / nf - a).abs() <= epsilon);
    let counts: Vec<u64> = match ev.table(n)? {
        Some(t) => alphas.iter().map(|a| t.iter().filter(|row| hit(row, a)).count() as u64).collect(),
        None => sweep(
            ev.cocycle(),
            n,
            ev.execution(),
            u64::MAX,
            || vec![0u64; alphas.len()],
            |acc, _w, lsv| {
                for (c, a) in acc.iter_mut().zip(alphas) {
                    if hit(lsv, a) {
                        *c += 1;
                    }
                }
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )?,
    };
    Ok(alphas
        .iter()
        .zip(counts)
        .map(|(a, count)| OracleCount {
            alpha: a.clone(),
            epsilon,
            n,
            count,
            h_count: if count == 0 { f64::NEG_INFINITY } else { (count as f64).ln() / nf },
        })
        .collect())
}

pub fn oracle_count(c: &OneStepCocycle, alpha: &[f64], epsilon: f64, n: usize, exec: Execution) -> Result<OracleCount> {
    let mut ev = PressureEvaluator::new(c, exec);
    Ok(oracle_counts(&mut ev, &[alpha.to_vec()], epsilon, n)?.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub alpha: Vec<f64>,
    pub n: usize,
    pub epsilon: f64,
    pub count: u64,
    pub h_count: f64,
    pub h_legendre: Option<f64>,
    pub status: Status,
    /// `|h_count - h_legendre|`, absent when either side is missing.
    pub gap: Option<f64>,
    /// `epsilon * ||q*||_1 + bracket width`.
    pub slack: f64,
    /// `h_count <= h_legendre + slack`.
    pub verdict_a: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTrend {
    pub alpha: Vec<f64>,
    pub epsilon: f64,
    /// Gaps in the order of the requested `n` list.
    pub gaps: Vec<Option<f64>>,
    /// Gaps non-increasing in `n` within tolerance; `None` when waived
    /// (boundary point or a missing gap).
    pub verdict_b: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub trends: Vec<CompareTrend>,
}

impl CompareReport {
    pub fn all_a(&self) -> bool {
        self.rows.iter().all(|r| r.verdict_a)
    }

    pub fn all_b(&self) -> bool {
        self.trends.iter().all(|t| t.verdict_b != Some(false))
    }
}

/// Oracle counts against Legendre values computed at the same `n`. Counting
/// words in the epsilon-box and bounding their weight in `s_n(q*)` gives
/// `h_count <= h_legendre + epsilon ||q*||_1` exactly at finite `n`.
pub fn compare(
    c: &OneStepCocycle,
    alpha_grid: &[Vec<f64>],
    n_list: &[usize],
    epsilon_list: &[f64],
    qm: Option<&QMReport>,
    exec: Execution,
    trend_tol: f64,
) -> Result<CompareReport> {
    let mut rows = Vec::new();
    for &n in n_list {
        let mut solver = SpectrumSolver::new(c, n, qm.cloned(), exec)?;
        let points: Vec<SpectrumPoint> = alpha_grid.iter().map(|a| solver.legendre(a, None)).collect::<Result<_>>()?;
        for &eps in epsilon_list {
            let counts = oracle_counts(solver.evaluator(), alpha_grid, eps, n)?;
            for (p, oc) in points.iter().zip(counts) {
                let slack = eps * p.q_star.iter().map(|x| x.abs()).sum::<f64>() + p.band.unwrap_or(0.0);
                let verdict_a = match p.h {
                    Some(h) => oc.h_count <= h + slack + 1e-12,
                    None => oc.count == 0,
                };
                let gap = match (p.h, oc.count) {
                    (Some(h), c) if c > 0 => Some((oc.h_count - h).abs()),
                    _ => None,
                };
                rows.push(CompareRow {
                    alpha: p.alpha.clone(),
                    n,
                    epsilon: eps,
                    count: oc.count,
                    h_count: oc.h_count,
                    h_legendre: p.h,
                    status: p.status,
                    gap,
                    slack,
                    verdict_a,
                });
            }
        }
    }
    let mut trends = Vec::new();
    for alpha in alpha_grid {
        for &eps in epsilon_list {
            let sel: Vec<&CompareRow> = n_list
                .iter()
                .filter_map(|&n| rows.iter().find(|r| r.n == n && r.epsilon == eps && &r.alpha == alpha))
                .collect();
            let gaps: Vec<Option<f64>> = sel.iter().map(|r| r.gap).collect();
            let waived = sel.iter().any(|r| r.status != Status::InteriorConverged) || gaps.iter().any(Option::is_none);
            let verdict_b = (!waived).then(|| {
                gaps.windows(2).all(|w| w[1].unwrap() <= w[0].unwrap() + trend_tol)
            });
            trends.push(CompareTrend { alpha: alpha.clone(), epsilon: eps, gaps, verdict_b });
        }
    }
    Ok(CompareReport { rows, trends })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sub_assign(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= y);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::SquareMatrix;
    use crate::sft::TransitionMatrix;

    fn diag() -> OneStepCocycle {
        OneStepCocycle::full_shift(vec![SquareMatrix::diag(&[2.0, 0.5]), SquareMatrix::diag(&[3.0, 1.0 / 3.0])])
            .unwrap()
    }

    fn binary_entropy(t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            -t * t.ln() - (1.0 - t) * (1.0 - t).ln()
        }
    }

    #[test]
    fn diagonal_domain_is_a_segment() {
        let c = diag();
        let mut ev = PressureEvaluator::new(&c, Execution::Serial);
        let dom = domain_estimate(&mut ev, 8, 8.0).unwrap();
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        assert_eq!(dom.profile_hull.points().len(), 2);
        assert!(dom.profile_hull.contains(&[l2, -l2], 1e-12));
        assert!(dom.profile_hull.contains(&[l3, -l3], 1e-12));
        assert!(!dom.profile_hull.contains(&[l2, l2], 1e-3));
        for p in dom.gradient_hull.points() {
            assert!(dom.profile_hull.contains(p, 1e-6));
        }
    }

    #[test]
    fn symmetric_point_gives_log_two() {
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let a = 0.5 * (l2 + l3);
        let p = legendre_entropy(&diag(), &[a, -a], 10, None, Execution::Serial).unwrap();
        assert_eq!(p.status, Status::InteriorConverged);
        assert!((p.h.unwrap() - l2).abs() < 1e-9);
        assert!((p.q_star[0] - p.q_star[1]).abs() < 1e-6);
    }

    #[test]
    fn diagonal_curve_matches_binary_entropy() {
        let c = diag();
        let mut s = SpectrumSolver::new(&c, 10, None, Execution::Serial).unwrap();
        let grid = s.domain().auto_grid(11, 0.9);
        let curve = s.curve(&grid).unwrap();
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        for p in &curve.points {
            let t = (l3 - p.alpha[0]) / (l3 - l2);
            assert_eq!(p.status, Status::InteriorConverged);
            assert!((p.h.unwrap() - binary_entropy(t)).abs() < 1e-6, "{p:?}");
        }
        assert!(curve.concavity_slack >= -1e-9);
    }

    #[test]
    fn endpoint_is_boundary() {
        let l2 = 2f64.ln();
        let p = legendre_entropy(&diag(), &[l2, -l2], 10, None, Execution::Serial).unwrap();
        assert_eq!(p.status, Status::BoundarySuspect);
        assert!(p.h.unwrap() <= 1e-3);
    }

    #[test]
    fn outside_hull_diverges() {
        let p = legendre_entropy(&diag(), &[0.0, 0.0], 8, None, Execution::Serial).unwrap();
        assert_eq!(p.status, Status::Diverged);
        assert!(p.h.is_none());
        assert_eq!(oracle_count(&diag(), &[0.0, 0.0], 0.01, 8, Execution::Serial).unwrap().count, 0);
    }

    #[test]
    fn identity_generators() {
        let c = OneStepCocycle::new(vec![SquareMatrix::identity(2); 2], TransitionMatrix::golden_mean()).unwrap();
        let p = legendre_entropy(&c, &[0.0, 0.0], 12, None, Execution::Serial).unwrap();
        assert!((p.h.unwrap() - 377f64.ln() / 12.0).abs() < 1e-12);
        let oc = oracle_count(&c, &[0.0, 0.0], 0.1, 12, Execution::Serial).unwrap();
        assert_eq!(oc.count, 377);
    }

    #[test]
    fn scalar_birkhoff_spectrum() {
        // d = 1: weighted shift with log|a| in {log 2, log 3}
        let c = OneStepCocycle::full_shift(vec![SquareMatrix::diag(&[2.0]), SquareMatrix::diag(&[3.0])]).unwrap();
        let mut s = SpectrumSolver::new(&c, 10, None, Execution::Serial).unwrap();
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        for t in [0.2, 0.5, 0.7] {
            let alpha = t * l2 + (1.0 - t) * l3;
            let p = s.legendre(&[alpha], None).unwrap();
            assert!((p.h.unwrap() - binary_entropy(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn maximum_is_at_gradient_of_zero() {
        let c = OneStepCocycle::full_shift(vec![
            SquareMatrix::diag(&[2.0, 1.0]),
            SquareMatrix::from_rows(&[[1.0, 1.0], [1.0, 2.0]]).unwrap(),
        ])
        .unwrap();
        let mut s = SpectrumSolver::new(&c, 10, None, Execution::Serial).unwrap();
        let g0 = s.evaluator().gradient(&[0.0, 0.0], 10).unwrap();
        let p = s.legendre(&g0, Some(&[0.3, -0.2])).unwrap();
        assert!((p.h.unwrap() - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn diagonal_oracle_gap_is_small() {
        let c = diag();
        let s = SpectrumSolver::new(&c, 16, None, Execution::Parallel).unwrap();
        let grid = s.domain().auto_grid(5, 0.6);
        let report = compare(&c, &grid, &[16], &[0.05], None, Execution::Parallel, 0.02).unwrap();
        assert!(report.all_a());
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        for r in &report.rows {
            // k symbols "2" put alpha_1 at log 2 + (k/16) log(3/2), alpha_2 = -alpha_1
            let count: u64 = (0..=16u64)
                .filter(|&k| (l2 + k as f64 / 16.0 * (l3 - l2) - r.alpha[0]).abs() <= 0.05)
                .map(|k| (0..k).fold(1u64, |b, i| b * (16 - i) / (i + 1)))
                .sum();
            assert_eq!(r.count, count);
            assert!((r.h_count - (count as f64).ln() / 16.0).abs() < 1e-12);
            // the binomial mass deficit at n = 16 is about 0.04 at the top
            assert!(r.gap.unwrap() <= 0.05, "{r:?}");
        }
    }
}
