//! Locally constant (one-step) cocycles over a subshift of finite type.
//!
//! Word products follow the convention `A_I = A_{i_{n-1}} ... A_{i_0}`: the
//! matrix of the last symbol is leftmost.

use crate::error::{Error, Result};
use crate::matalg::{self, spectral_norm, wedge, SquareMatrix};
use crate::sft::{TransitionMatrix, Word};

/// A tuple of invertible generators together with the subshift they live on.
/// Immutable after construction; exterior powers of every generator are
/// cached.
#[derive(Debug, Clone)]
pub struct OneStepCocycle {
    d: usize,
    transition: TransitionMatrix,
    generators: Vec<SquareMatrix>,
    // wedges[s][t - 1] for t = 1..d-1; degree d is carried by log_abs_det
    wedges: Vec<Vec<SquareMatrix>>,
    log_abs_det: Vec<f64>,
}

impl OneStepCocycle {
    pub fn new(generators: Vec<SquareMatrix>, transition: TransitionMatrix) -> Result<Self> {
        let k = transition.alphabet_size();
        if generators.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: generators.len() });
        }
        let d = generators[0].dim();
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let mut wedges = Vec::with_capacity(k);
        let mut log_abs_det = Vec::with_capacity(k);
        for (s, g) in generators.iter().enumerate() {
            if g.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
            }
            if g.as_slice().iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            if !g.is_invertible() {
                return Err(Error::Singular { index: s + 1, det: g.det() });
            }
            log_abs_det.push(g.det().abs().ln());
            wedges.push((1..d).map(|t| wedge(g, t).map(|w| w.matrix)).collect::<Result<Vec<_>>>()?);
        }
        Ok(OneStepCocycle { d, transition, generators, wedges, log_abs_det })
    }

    /// Full shift on `generators.len()` symbols.
    pub fn full_shift(generators: Vec<SquareMatrix>) -> Result<Self> {
        let k = generators.len();
        if k == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Self::new(generators, TransitionMatrix::full(k))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.generators.len()
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn generators(&self) -> &[SquareMatrix] {
        &self.generators
    }

    pub fn generator(&self, s: usize) -> &SquareMatrix {
        &self.generators[s]
    }

    /// Cached exterior power of generator `s` for `1 <= t < d`.
    pub fn wedge_of(&self, s: usize, t: usize) -> &SquareMatrix {
        &self.wedges[s][t - 1]
    }

    pub fn log_abs_det(&self, s: usize) -> f64 {
        self.log_abs_det[s]
    }

    /// The cocycle of degree-`t` exterior powers over the same shift.
    pub fn wedge_cocycle(&self, t: usize) -> Result<OneStepCocycle> {
        if t == 0 || t > self.d {
            return Err(Error::DegreeOutOfRange { t, d: self.d });
        }
        let gens = self.generators.iter().map(|g| wedge(g, t).map(|w| w.matrix)).collect::<Result<_>>()?;
        OneStepCocycle::new(gens, self.transition.clone())
    }

    /// `A_I` for a short admissible word (the empty word gives the identity).
    pub fn product(&self, word: &Word) -> Result<SquareMatrix> {
        self.transition.check_admissible(word)?;
        let mut acc = SquareMatrix::identity(self.d);
        let mut tmp = SquareMatrix::zeros(self.d);
        for &s in word.symbols() {
            self.generators[s as usize].mul_into(&acc, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        if acc.max_abs() > 1e300 {
            log::warn!("product over {word} has entries above 1e300; use profile() for long words");
        }
        Ok(acc)
    }

    /// Renormalized product: `A_I = exp(log_scale) * matrix`.
    pub fn scaled_product(&self, word: &Word) -> Result<(SquareMatrix, f64)> {
        self.transition.check_admissible(word)?;
        let mut acc = SquareMatrix::identity(self.d);
        let mut tmp = SquareMatrix::zeros(self.d);
        let mut log_scale = 0.0;
        for &s in word.symbols() {
            self.generators[s as usize].mul_into(&acc, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
            log_scale += acc.renormalize();
        }
        Ok((acc, log_scale))
    }

    pub fn profile(&self, word: &Word) -> Result<SingularProfile> {
        if word.is_empty() {
            return Err(Error::ZeroLength);
        }
        self.transition.check_admissible(word)?;
        let mut state = WedgeState::identity(self);
        let mut next = WedgeState::identity(self);
        for &s in word.symbols() {
            next.extend_from(&state, self, s as usize);
            std::mem::swap(&mut state, &mut next);
        }
        let n = word.len();
        let mut values = state.log_singular_values();
        values.iter_mut().for_each(|v| *v /= n as f64);
        Ok(SingularProfile { n, values })
    }

    /// `max_s ||A_s|| ||A_s^{-1}|| 2^{-alpha}` and whether it is below 1.
    ///
    /// Informational only: one-step cocycles always admit canonical
    /// holonomies.
    pub fn fiber_bunched(&self, alpha: f64) -> Result<FiberBunching> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} must be positive")));
        }
        let value = self
            .generators
            .iter()
            .map(|g| {
                let s = matalg::svd(g).sigma;
                s[0] / s[self.d - 1]
            })
            .fold(0.0, f64::max)
            * 2f64.powf(-alpha);
        Ok(FiberBunching { value, bunched: value < 1.0 })
    }

    /// `(1/n) log |lambda_i(A_I)|`, sorted non-increasing: the Lyapunov
    /// exponents of the periodic point with itinerary `I^infinity`.
    pub fn eigen_exponents(&self, word: &Word) -> Result<Vec<f64>> {
        if word.is_empty() {
            return Err(Error::ZeroLength);
        }
        let (first, last) = (word.first().unwrap(), word.last().unwrap());
        self.transition.check_admissible(word)?;
        if !self.transition.allows(last, first) {
            return Err(Error::Inadmissible { word: format!("{word} (periodic closing)") });
        }
        let (m, log_scale) = self.scaled_product(word)?;
        let n = word.len() as f64;
        let mut out: Vec<f64> = m.eigenvalues().iter().map(|z| (log_scale + z.norm().ln()) / n).collect();
        out.sort_by(|a, b| b.total_cmp(a));
        Ok(out)
    }

    pub fn max_log_norms(&self) -> Vec<f64> {
        (1..=self.d)
            .map(|t| {
                (0..self.alphabet_size())
                    .map(|s| {
                        if t == self.d {
                            self.log_abs_det[s]
                        } else {
                            spectral_norm(self.wedge_of(s, t)).ln()
                        }
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberBunching {
    pub value: f64,
    pub bunched: bool,
}

/// `(1/n) (log sigma_1(A_I), .., log sigma_d(A_I))` for a word of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularProfile {
    pub n: usize,
    pub values: Vec<f64>,
}

impl SingularProfile {
    /// Unnormalized logs, `n * values`.
    pub fn log_singular_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.n as f64).collect()
    }
}

/// Renormalized exterior-power products of a word, extended one symbol at a
/// time from the left. Degree `t < d` keeps a max-abs-normalized matrix and
/// the log of the removed scale; degree `d` is the log-determinant sum.
#[derive(Debug, Clone)]
pub struct WedgeState {
    mats: Vec<SquareMatrix>,
    log_scale: Vec<f64>,
    log_det: f64,
}

impl WedgeState {
    pub fn identity(c: &OneStepCocycle) -> Self {
        let d = c.dim();
        let mats = (1..d).map(|t| SquareMatrix::identity(matalg::binomial(d, t))).collect();
        WedgeState { mats, log_scale: vec![0.0; d.saturating_sub(1)], log_det: 0.0 }
    }

    /// State of `A_I` for an admissible word given by its symbols.
    pub fn of_word(c: &OneStepCocycle, symbols: &[u16]) -> Self {
        let mut state = WedgeState::identity(c);
        let mut next = WedgeState::identity(c);
        for &s in symbols {
            next.extend_from(&state, c, s as usize);
            std::mem::swap(&mut state, &mut next);
        }
        state
    }

    /// `self = A_s^{wedge t} * prev` for every degree.
    pub fn extend_from(&mut self, prev: &WedgeState, c: &OneStepCocycle, s: usize) {
        for (t, (m, p)) in self.mats.iter_mut().zip(&prev.mats).enumerate() {
            c.wedge_of(s, t + 1).mul_into(p, m);
            self.log_scale[t] = prev.log_scale[t] + m.renormalize();
        }
        self.log_det = prev.log_det + c.log_abs_det(s);
    }

    /// Multiplies on the left by another state's products (`other * self`).
    pub fn left_multiply(&self, other: &WedgeState) -> WedgeState {
        let mut out = self.clone();
        for (t, m) in out.mats.iter_mut().enumerate() {
            let mut r = &other.mats[t] * &self.mats[t];
            out.log_scale[t] = self.log_scale[t] + other.log_scale[t] + r.renormalize();
            *m = r;
        }
        out.log_det = self.log_det + other.log_det;
        out
    }

    /// `log ||A^{wedge t}||` for `t = 1..d`.
    pub fn log_norms(&self) -> Vec<f64> {
        let mut out: Vec<f64> =
            self.mats.iter().zip(&self.log_scale).map(|(m, s)| s + spectral_norm(m).ln()).collect();
        out.push(self.log_det);
        out
    }

    /// `log sigma_t = log ||A^{wedge t}|| - log ||A^{wedge (t-1)}||`.
    pub fn log_singular_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.mats.len() + 1);
        self.log_singular_values_into(&mut v);
        v
    }

    /// Allocation-free variant of [`WedgeState::log_singular_values`].
    pub fn log_singular_values_into(&self, out: &mut Vec<f64>) {
        out.clear();
        let mut prev = 0.0;
        for (m, s) in self.mats.iter().zip(&self.log_scale) {
            let l = s + spectral_norm(m).ln();
            out.push(l - prev);
            prev = l;
        }
        out.push(self.log_det - prev);
        out.sort_by(|a, b| b.total_cmp(a));
    }
}

pub fn norms_to_singular_values(log_norms: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    log_norms
        .iter()
        .map(|&l| {
            let v = l - prev;
            prev = l;
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matalg::singular_values;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[[f64; 2]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows).unwrap()
    }

    fn diag_tuple() -> OneStepCocycle {
        OneStepCocycle::full_shift(vec![SquareMatrix::diag(&[2.0, 0.5]), SquareMatrix::diag(&[3.0, 1.0 / 3.0])])
            .unwrap()
    }

    fn w(s: &[usize]) -> Word {
        Word::from_one_based(s).unwrap()
    }

    fn random_cocycle(rng: &mut ChaCha8Rng, d: usize, k: usize) -> OneStepCocycle {
        let gens = (0..k)
            .map(|_| SquareMatrix::new(d, (0..d * d).map(|_| rng.gen_range(-1.5..1.5)).collect()).unwrap())
            .collect();
        OneStepCocycle::full_shift(gens).unwrap()
    }

    #[test]
    fn product_order() {
        let c = OneStepCocycle::full_shift(vec![m(&[[1.0, 1.0], [0.0, 1.0]]), m(&[[1.0, 0.0], [1.0, 1.0]])]).unwrap();
        assert_eq!(c.product(&w(&[1, 2])).unwrap(), m(&[[1.0, 1.0], [1.0, 2.0]]));
        assert_eq!(c.product(&w(&[2])).unwrap(), *c.generator(1));
        assert_eq!(c.product(&Word::default()).unwrap(), SquareMatrix::identity(2));
    }

    #[test]
    fn product_rejects_inadmissible() {
        let c = OneStepCocycle::new(
            vec![SquareMatrix::identity(2), SquareMatrix::identity(2)],
            TransitionMatrix::golden_mean(),
        )
        .unwrap();
        assert!(matches!(c.product(&w(&[2, 2])), Err(Error::Inadmissible { .. })));
        assert!(matches!(c.profile(&w(&[1, 2, 2])), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn rejects_singular_generator() {
        let r = OneStepCocycle::full_shift(vec![SquareMatrix::identity(2), m(&[[1.0, 2.0], [2.0, 4.0]])]);
        assert!(matches!(r, Err(Error::Singular { index: 2, .. })));
    }

    #[test]
    fn diagonal_profile_closed_form() {
        let c = diag_tuple();
        let word = w(&[1, 2, 2, 1, 1, 2, 1]);
        let ones = 4.0;
        let n = 7.0;
        let top = (ones * 2f64.ln() + (n - ones) * 3f64.ln()) / n;
        let p = c.profile(&word).unwrap();
        assert!((p.values[0] - top).abs() < 1e-14);
        assert!((p.values[1] + top).abs() < 1e-14);
    }

    #[test]
    fn identity_profile_is_zero() {
        let c = OneStepCocycle::full_shift(vec![SquareMatrix::identity(3); 2]).unwrap();
        let p = c.profile(&w(&[1, 2, 1, 1])).unwrap();
        assert!(p.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn profile_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2, 3] {
            let c = random_cocycle(&mut rng, d, 3);
            for n in [1, 5, 12] {
                let word = Word((0..n).map(|_| rng.gen_range(0..3)).collect());
                let p = c.profile(&word).unwrap();
                let direct = singular_values(&c.product(&word).unwrap()).unwrap();
                for (a, b) in p.values.iter().zip(&direct.0) {
                    assert!((a - b / n as f64).abs() < 1e-8, "{a} vs {}", b / n as f64);
                }
            }
        }
    }

    #[test]
    fn determinant_conservation_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_cocycle(&mut rng, 3, 2);
        let lo = (0..2).map(|s| singular_values(c.generator(s)).unwrap().0[2]).fold(f64::INFINITY, f64::min);
        let hi = (0..2).map(|s| singular_values(c.generator(s)).unwrap().0[0]).fold(f64::NEG_INFINITY, f64::max);
        for _ in 0..20 {
            let word = Word((0..25).map(|_| rng.gen_range(0..2)).collect());
            let p = c.profile(&word).unwrap();
            let dets: f64 = word.symbols().iter().map(|&s| c.log_abs_det(s as usize)).sum();
            assert!((p.values.iter().sum::<f64>() * 25.0 - dets).abs() < 1e-8);
            assert!(p.values.windows(2).all(|x| x[0] >= x[1]));
            assert!(p.values.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
        }
    }

    #[test]
    fn sub_multiplicativity_of_wedge_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_cocycle(&mut rng, 3, 2);
        for _ in 0..20 {
            let a = Word((0..6).map(|_| rng.gen_range(0..2)).collect());
            let b = Word((0..9).map(|_| rng.gen_range(0..2)).collect());
            let la = c.profile(&a).unwrap().log_singular_values();
            let lb = c.profile(&b).unwrap().log_singular_values();
            let lab = c.profile(&a.concat(&b)).unwrap().log_singular_values();
            for t in 1..=3 {
                let s = |v: &[f64]| v[..t].iter().sum::<f64>();
                assert!(s(&lab) <= s(&la) + s(&lb) + 1e-8);
            }
        }
    }

    #[test]
    fn fiber_bunching_examples() {
        let c = OneStepCocycle::full_shift(vec![SquareMatrix::diag(&[2.0, 0.5])]).unwrap();
        let f1 = c.fiber_bunched(1.0).unwrap();
        assert!((f1.value - 2.0).abs() < 1e-14 && !f1.bunched);
        let f3 = c.fiber_bunched(3.0).unwrap();
        assert!((f3.value - 0.5).abs() < 1e-14 && f3.bunched);
        let id = OneStepCocycle::full_shift(vec![SquareMatrix::identity(2); 2]).unwrap();
        let fi = id.fiber_bunched(0.7).unwrap();
        assert!((fi.value - 2f64.powf(-0.7)).abs() < 1e-15 && fi.bunched);
        assert!(c.fiber_bunched(0.0).is_err());
    }

    #[test]
    fn eigen_exponent_examples() {
        let c = diag_tuple();
        let e = c.eigen_exponents(&w(&[1])).unwrap();
        assert!((e[0] - 2f64.ln()).abs() < 1e-14 && (e[1] + 2f64.ln()).abs() < 1e-14);
        let e2 = c.eigen_exponents(&w(&[1, 2])).unwrap();
        let mid = (2f64.ln() + 3f64.ln()) / 2.0;
        assert!((e2[0] - mid).abs() < 1e-14 && (e2[1] + mid).abs() < 1e-14);
        let r = OneStepCocycle::full_shift(vec![SquareMatrix::rotation(0.4)]).unwrap();
        assert!(r.eigen_exponents(&w(&[1])).unwrap().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn eigen_exponents_need_closable_word() {
        let c = OneStepCocycle::new(
            vec![SquareMatrix::identity(2), SquareMatrix::identity(2)],
            TransitionMatrix::golden_mean(),
        )
        .unwrap();
        // (2,1,2) is admissible but 2 -> 2 is forbidden
        assert!(c.eigen_exponents(&w(&[2, 1, 2])).is_err());
    }

    #[test]
    fn eigen_exponents_cyclic_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_cocycle(&mut rng, 3, 3);
        let base: Vec<u16> = (0..7).map(|_| rng.gen_range(0..3)).collect();
        let e0 = c.eigen_exponents(&Word(base.clone())).unwrap();
        for r in 1..7 {
            let mut rot = base.clone();
            rot.rotate_left(r);
            let e = c.eigen_exponents(&Word(rot)).unwrap();
            for (a, b) in e.iter().zip(&e0) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cached_wedges_match_matalg() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = random_cocycle(&mut rng, 4, 2);
        for s in 0..2 {
            for t in 1..4 {
                let direct = wedge(c.generator(s), t).unwrap().matrix;
                assert!(direct.max_abs_diff(c.wedge_of(s, t)) < 1e-12);
            }
        }
    }
}
