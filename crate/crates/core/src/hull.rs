//! Convex hulls of finite point sets, queried by Euclidean distance.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct PointHull {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl PointHull {
    /// Keeps only extreme points where that is cheap (`d <= 2`).
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Self {
        assert!(points.iter().all(|p| p.len() == d));
        let points = match d {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                if points.is_empty() {
                    points
                } else if lo == hi {
                    vec![vec![lo]]
                } else {
                    vec![vec![lo], vec![hi]]
                }
            }
            2 => monotone_chain(points),
            _ => points,
        };
        PointHull { d, points }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let m = self.points.len() as f64;
        (0..self.d).map(|i| self.points.iter().map(|p| p[i]).sum::<f64>() / m).collect()
    }

    /// Per-coordinate `(min, max)`.
    pub fn ranges(&self) -> Vec<(f64, f64)> {
        (0..self.d)
            .map(|i| {
                self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[i]), hi.max(p[i])))
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// Distance from `x` to the hull (Wolfe's minimum-norm-point method on
    /// the shifted points).
    pub fn distance(&self, x: &[f64]) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        if self.d == 1 {
            let (lo, hi) = self.ranges()[0];
            return (lo - x[0]).max(x[0] - hi).max(0.0);
        }
        let pts: Vec<Vec<f64>> = self.points.iter().map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
        min_norm_point(&pts).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn monotone_chain(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Vec<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec<f64>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p.clone());
        }
        hull.pop();
    }
    hull
}

/// Weights of the point of least norm on the affine hull of `pts[idx]`,
/// solved as least squares in the differences from the first point.
fn affine_min(pts: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let m = idx.len();
    let d = pts[0].len();
    let base = &pts[idx[0]];
    let diff = DMatrix::from_fn(d, m - 1, |r, c| pts[idx[c + 1]][r] - base[r]);
    let rhs = DVector::from_iterator(d, base.iter().map(|x| -x));
    let top = diff.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mu = match diff.svd(true, true).solve(&rhs, 1e-13 * top) {
        Ok(mu) => mu,
        Err(_) => return vec![1.0 / m as f64; m],
    };
    let mut w = Vec::with_capacity(m);
    w.push(1.0 - mu.iter().sum::<f64>());
    w.extend(mu.iter());
    w
}

fn combine(pts: &[Vec<f64>], idx: &[usize], w: &[f64]) -> Vec<f64> {
    let d = pts[0].len();
    let mut x = vec![0.0; d];
    for (&i, &wi) in idx.iter().zip(w) {
        for (xj, pj) in x.iter_mut().zip(&pts[i]) {
            *xj += wi * pj;
        }
    }
    x
}

fn min_norm_point(pts: &[Vec<f64>]) -> Vec<f64> {
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let scale = pts.iter().map(|p| norm2(p)).fold(0.0, f64::max).max(1e-300);
    let start = (0..pts.len()).min_by(|&a, &b| norm2(&pts[a]).total_cmp(&norm2(&pts[b]))).unwrap();
    let mut idx = vec![start];
    let mut w = vec![1.0];
    let mut x = pts[start].clone();
    for _ in 0..1000 {
        let (j, best) = (0..pts.len())
            .map(|j| (j, pts[j].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if norm2(&x) - best <= 1e-14 * scale || idx.contains(&j) {
            break;
        }
        idx.push(j);
        w.push(0.0);
        loop {
            let lambda = affine_min(pts, &idx);
            if lambda.iter().all(|&l| l > 1e-15) {
                w = lambda;
                break;
            }
            let theta = idx
                .iter()
                .enumerate()
                .filter(|&(k, _)| lambda[k] <= 1e-15)
                .map(|(k, _)| w[k] / (w[k] - lambda[k]))
                .fold(1.0, f64::min);
            for (wk, lk) in w.iter_mut().zip(&lambda) {
                *wk = theta * lk + (1.0 - theta) * *wk;
            }
            let keep: Vec<usize> = (0..idx.len()).filter(|&k| w[k] > 1e-15).collect();
            idx = keep.iter().map(|&k| idx[k]).collect();
            w = keep.iter().map(|&k| w[k]).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            if idx.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        x = combine(pts, &idx, &w);
    }
    x
}
