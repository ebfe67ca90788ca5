//! Strictly invariant multicones for a tuple of linear maps, as finite
//! unions of balls in projective space.
//!
//! Distances are angles `arccos |<u, v>|`, so a ball around `c` also
//! contains the antipodal cap. Verification samples each ball on a grid
//! in normal coordinates and discounts the sampled margin by `L * delta`,
//! where `L = sigma_1 / sigma_D` bounds the projective Lipschitz constant of
//! each map and `delta` is the covering radius of the sample grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matalg::{self, SquareMatrix};
use crate::sweep::{map_ordered, Execution};

/// Minimum certified margin, in radians.
pub const MARGIN_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticoneCertificate {
    /// Exterior degree the maps act on.
    pub t: usize,
    pub balls: Vec<Ball>,
    /// Certified minimum angular margin of the images inside the union.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeOutcome {
    Certified(MulticoneCertificate),
    /// No family passed; not a proof that none exists.
    Inconclusive { reason: String },
}

#[derive(Debug, Clone)]
pub struct ConeOptions {
    pub seed: u64,
    pub burn_in: usize,
    pub visits: usize,
    pub radii: Vec<f64>,
    pub max_balls: usize,
    /// Cap on grid samples per (ball, map) pair.
    pub max_samples: usize,
    pub exec: Execution,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            seed: 0,
            burn_in: 200,
            visits: 4000,
            radii: vec![0.3, 0.2, 0.1, 0.05, 0.5, 0.02],
            max_balls: 32,
            max_samples: 200_000,
            exec: Execution::Parallel,
        }
    }
}

pub fn angle(u: &[f64], v: &[f64]) -> f64 {
    matalg::dot(u, v).abs().min(1.0).acos()
}

fn apply(b: &SquareMatrix, u: &[f64]) -> Vec<f64> {
    let mut x = b.mul_vec(u);
    matalg::normalize(&mut x);
    x
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if matalg::normalize(&mut v) > 1e-3 {
            return v;
        }
    }
}

/// Largest margin by which `u` lies inside one of the balls.
fn inside_margin(balls: &[Ball], u: &[f64]) -> f64 {
    balls.iter().map(|b| b.radius - angle(u, &b.center)).fold(f64::NEG_INFINITY, f64::max)
}

fn lipschitz(b: &SquareMatrix) -> f64 {
    let s = matalg::svd(b).sigma;
    s[0] / s[s.len() - 1]
}

/// Orthonormal basis of the complement of `c`.
fn tangent_basis(c: &[f64]) -> Vec<Vec<f64>> {
    let d = c.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in std::iter::once(c).chain(basis.iter().map(|x| x.as_slice())) {
            let p = matalg::dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        if matalg::normalize(&mut v) > 1e-6 {
            basis.push(v);
        }
        if basis.len() == d - 1 {
            break;
        }
    }
    basis
}

/// Grid of directions covering `ball` to within `delta`; `None` if more than `cap`.
fn ball_samples(ball: &Ball, delta: f64, cap: usize) -> Option<Vec<Vec<f64>>> {
    let d = ball.center.len();
    let m = d - 1;
    if m == 0 {
        return Some(vec![ball.center.clone()]);
    }
    let basis = tangent_basis(&ball.center);
    // cubic grid of spacing h has covering radius h sqrt(m) / 2; the
    // exponential map does not increase distances
    let h = 2.0 * delta / (m as f64).sqrt();
    let per_axis = (ball.radius / h).ceil() as i64;
    let count = (2 * per_axis + 1) as f64;
    if count.powi(m as i32) > cap as f64 {
        return None;
    }
    let reach = ball.radius + delta;
    let mut out = Vec::new();
    let mut idx = vec![-per_axis; m];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= reach {
            let mut u: Vec<f64> = ball.center.iter().map(|c| c * r.cos()).collect();
            if r > 0.0 {
                for (xi, b) in x.iter().zip(&basis) {
                    u.iter_mut().zip(b).for_each(|(ui, bi)| *ui += r.sin() * xi / r * bi);
                }
            }
            matalg::normalize(&mut u);
            out.push(u);
        }
        let mut k = 0;
        loop {
            if k == m {
                return Some(out);
            }
            idx[k] += 1;
            if idx[k] <= per_axis {
                break;
            }
            idx[k] = -per_axis;
            k += 1;
        }
    }
}

/// Certified margin for one (ball, map) pair given a sampling density
/// multiplier, or `None` when sampling would exceed the cap.
fn pair_margin(balls: &[Ball], ball: &Ball, b: &SquareMatrix, density: f64, cap: usize) -> Option<f64> {
    let l = lipschitz(b);
    let coarse_delta = ball.radius / 8.0 / density;
    let coarse = ball_samples(ball, coarse_delta, cap)?;
    let m0 = coarse.iter().map(|u| inside_margin(balls, &apply(b, u))).fold(f64::INFINITY, f64::min);
    if m0 <= MARGIN_THRESHOLD {
        return Some(m0 - l * coarse_delta);
    }
    let delta = coarse_delta.min(m0 / (4.0 * l * density));
    let fine = ball_samples(ball, delta, cap)?;
    let m1 = fine.iter().map(|u| inside_margin(balls, &apply(b, u))).fold(f64::INFINITY, f64::min);
    Some(m1 - l * delta)
}

/// Certified margin of `balls` under `maps`; `None` when a pair could not
/// be sampled within the cap.
pub fn verify(balls: &[Ball], maps: &[SquareMatrix], density: f64, cap: usize, exec: Execution) -> Option<f64> {
    let pairs: Vec<(usize, usize)> =
        (0..balls.len()).flat_map(|i| (0..maps.len()).map(move |j| (i, j))).collect();
    let margins = map_ordered(exec, &pairs, |&(i, j)| pair_margin(balls, &balls[i], &maps[j], density, cap));
    margins.into_iter().try_fold(f64::INFINITY, |acc, m| m.map(|m| acc.min(m)))
}

/// Whether some sampled direction lies outside every ball.
fn leaves_gap(balls: &[Ball], d: usize, rng: &mut ChaCha8Rng) -> bool {
    if d == 2 {
        // exact on the projective line: sort arcs by angle in [0, pi)
        let mut arcs: Vec<(f64, f64)> = balls
            .iter()
            .map(|b| {
                let th = b.center[1].atan2(b.center[0]).rem_euclid(std::f64::consts::PI);
                (th - b.radius, th + b.radius)
            })
            .collect();
        if arcs.iter().any(|(lo, hi)| hi - lo >= std::f64::consts::PI) {
            return false;
        }
        arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let start = arcs[0].0;
        let mut reach = arcs[0].1;
        for &(lo, hi) in &arcs[1..] {
            if lo > reach {
                return true;
            }
            reach = reach.max(hi);
        }
        return reach < start + std::f64::consts::PI;
    }
    (0..4000).any(|_| inside_margin(balls, &random_unit(rng, d)) < 0.0)
}

/// Locates the projective attractor of the tuple by a seeded random
/// walk, covers it with balls of each candidate radius in turn, and
/// returns the first family whose strict invariance certifies.
pub fn multicone_search(maps: &[SquareMatrix], t: usize, opts: &ConeOptions) -> ConeOutcome {
    if maps.is_empty() {
        return ConeOutcome::Inconclusive { reason: "empty tuple".into() };
    }
    let d = maps[0].dim();
    if d < 2 {
        return ConeOutcome::Inconclusive { reason: "projective space is a point".into() };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut u = random_unit(&mut rng, d);
    let mut visited = Vec::with_capacity(opts.visits);
    for step in 0..opts.burn_in + opts.visits {
        let s = rng.gen_range(0..maps.len());
        u = apply(&maps[s], &u);
        if step >= opts.burn_in {
            visited.push(u.clone());
        }
    }
    let mut last_reason = String::from("no radius tried");
    for &rho in &opts.radii {
        let mut centers: Vec<Vec<f64>> = Vec::new();
        for p in &visited {
            if centers.iter().all(|c| angle(c, p) > rho / 2.0) {
                centers.push(p.clone());
                if centers.len() > opts.max_balls {
                    break;
                }
            }
        }
        if centers.len() > opts.max_balls {
            last_reason = format!("radius {rho}: attractor needs more than {} balls", opts.max_balls);
            continue;
        }
        let balls: Vec<Ball> = centers.into_iter().map(|center| Ball { center, radius: rho }).collect();
        if !leaves_gap(&balls, d, &mut rng) {
            last_reason = format!("radius {rho}: balls cover projective space");
            continue;
        }
        match verify(&balls, maps, 1.0, opts.max_samples, opts.exec) {
            Some(margin) if margin > MARGIN_THRESHOLD => {
                return ConeOutcome::Certified(MulticoneCertificate { t, balls, margin });
            }
            Some(margin) => last_reason = format!("radius {rho}: certified margin {margin:.3e}"),
            None => last_reason = format!("radius {rho}: sampling cap reached"),
        }
    }
    ConeOutcome::Inconclusive { reason: last_reason }
}

impl MulticoneCertificate {
    /// Independent re-verification at `density` times the sampling density.
    pub fn reverify(&self, maps: &[SquareMatrix], density: f64, cap: usize) -> Option<f64> {
        verify(&self.balls, maps, density, cap, Execution::Serial)
    }
}
