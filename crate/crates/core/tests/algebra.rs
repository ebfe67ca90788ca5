//! Exterior powers, singular values and symbolic enumeration.

use lyapspec::matalg::{self, binomial, spectral_norm, wedge, SquareMatrix};
use lyapspec::sft::{TransitionMatrix, Word};
use proptest::prelude::*;

fn matrix(d: usize) -> impl Strategy<Value = SquareMatrix> {
    prop::collection::vec(-2.0f64..2.0, d * d)
        .prop_map(move |v| SquareMatrix::new(d, v).unwrap())
        .prop_filter("invertible", |m| m.det().abs() > 1e-3)
}

fn primitive() -> impl Strategy<Value = TransitionMatrix> {
    (2usize..5)
        .prop_flat_map(|k| prop::collection::vec(prop::bool::weighted(0.7), k * k).prop_map(move |v| (k, v)))
        .prop_filter_map("primitive", |(k, v)| {
            let rows: Vec<Vec<i64>> = v.chunks(k).map(|r| r.iter().map(|&b| b as i64).collect()).collect();
            TransitionMatrix::new(&rows).ok()
        })
}

proptest! {
    #[test]
    fn wedge_norm_is_product_of_top_singular_values(m in (2usize..5).prop_flat_map(matrix)) {
        let d = m.dim();
        let logs = matalg::singular_values(&m).unwrap();
        for t in 1..=d {
            let w = wedge(&m, t).unwrap();
            prop_assert_eq!(w.dim(), binomial(d, t));
            let expected: f64 = logs.as_slice()[..t].iter().sum();
            prop_assert!((spectral_norm(&w.matrix).ln() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn wedge_is_multiplicative(a in matrix(3), b in matrix(3), t in 1usize..=3) {
        let lhs = wedge(&(&a * &b), t).unwrap().matrix;
        let rhs = &wedge(&a, t).unwrap().matrix * &wedge(&b, t).unwrap().matrix;
        let scale = lhs.max_abs().max(1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn top_degree_is_determinant(m in (1usize..5).prop_flat_map(matrix)) {
        let d = m.dim();
        let w = wedge(&m, d).unwrap().matrix;
        prop_assert_eq!(w.dim(), 1);
        prop_assert!((w.get(0, 0) - m.det()).abs() < 1e-12 * m.det().abs().max(1.0));
    }

    #[test]
    fn counting_matches_enumeration(q in primitive(), n in 1usize..7) {
        let words: Vec<Word> = q.words(n).unwrap().collect();
        prop_assert_eq!(q.count_words(n).unwrap().to_u64(), Some(words.len() as u64));
        prop_assert!(words.windows(2).all(|w| w[0] < w[1]));
        for w in &words {
            prop_assert!(q.is_admissible(w).unwrap());
        }
    }

    #[test]
    fn connectors_join_every_pair(q in primitive()) {
        let k = q.alphabet_size();
        for a in 0..k {
            for b in 0..k {
                let c = q.connector(a, b).expect("primitive shifts connect every pair");
                let mut symbols = vec![a as u16];
                symbols.extend(&c);
                symbols.push(b as u16);
                prop_assert!(q.is_admissible(&Word::new(symbols)).unwrap());
                prop_assert!(c.len() < q.mixing_rate());
            }
        }
    }
}

#[test]
fn golden_mean_counts_are_fibonacci() {
    let q = TransitionMatrix::golden_mean();
    let (mut a, mut b) = (2u64, 3u64);
    for n in 1..=40 {
        let expected = if n == 1 { 2 } else if n == 2 { 3 } else {
            let c = a + b;
            a = b;
            b = c;
            c
        };
        assert_eq!(q.count_words(n).unwrap().to_u64(), Some(expected), "n = {n}");
    }
}

#[test]
fn one_based_boundary() {
    let w = Word::from_one_based(&[1, 2, 2]).unwrap();
    assert_eq!(w.symbols(), &[0, 1, 1]);
    assert_eq!(w.to_string(), "(1,2,2)");
    assert!(Word::from_one_based(&[0]).is_err());
}
