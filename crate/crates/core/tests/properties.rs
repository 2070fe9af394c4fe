use std::f64::consts::TAU;

use lbr_core::braid::{classify, BraidWord, Generator};
use lbr_core::fcs::{pk, pn, InitialState};
use lbr_core::linalg::{eigenvalues, ComplexMatrix, C64};
use lbr_core::model::{lindbladian, vectorize, ModelParams};
use proptest::prelude::*;

fn params(omega_d: f64, gamma_d: f64) -> ModelParams {
    ModelParams::default().with_omega_d(omega_d).with_gamma_d(gamma_d)
}

fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut pool = b.to_vec();
    a.iter()
        .map(|x| {
            let (j, d) =
                pool.iter().enumerate().map(|(j, y)| (j, (x - y).norm())).min_by(|p, q| p.1.total_cmp(&q.1)).unwrap();
            pool.swap_remove(j);
            d
        })
        .fold(0.0, f64::max)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![Just(Generator::S1), Just(Generator::S2), Just(Generator::S1_INV), Just(Generator::S2_INV)]
}

fn class_interior() -> impl Strategy<Value = f64> {
    prop_oneof![0.0012..0.0020, 0.0027..0.0047, 0.0058..0.0073, 0.0088..0.028, 0.036..0.05]
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn zero_field_generating_function_is_one(omega in 0.0..0.05, gamma_d in 0.0..0.01, t in 0.0..500.0) {
        let s = pk(&params(omega, gamma_d), 0.0, &InitialState::Ground, &[t]).unwrap();
        prop_assert!((s.values[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn histogram_is_normalised(omega in 0.001..0.05, t in 0.0..500.0) {
        let h = pn(&params(omega, 0.0), &InitialState::Ground, t, 80).unwrap();
        prop_assert!((h.total() - 1.0).abs() < 1e-9);
        prop_assert!(h.probs.iter().all(|&p| p > -1e-12));
    }

    #[test]
    fn spectrum_conjugates_under_field_reflection(omega in 0.0..0.05, gamma_d in 0.0..0.01, k in 0.0..TAU) {
        let p = params(omega, gamma_d);
        let here: Vec<C64> = eigenvalues(&lindbladian(&p.with_k(k))).unwrap().iter().map(|v| v.conj()).collect();
        let there = eigenvalues(&lindbladian(&p.with_k(TAU - k))).unwrap();
        prop_assert!(multiset_distance(&here, &there) < 1e-9);
    }

    #[test]
    fn trace_is_field_independent(omega in 0.0..0.05, gamma_d in 0.0..0.01, k in 0.0..TAU) {
        let p = params(omega, gamma_d);
        prop_assert!((lindbladian(&p.with_k(k)).trace() - lindbladian(&p).trace()).norm() < 1e-14);
    }

    #[test]
    fn one_slow_eigenvalue_ignores_the_field(omega in 0.001..0.05, k in 0.0..TAU) {
        let p = params(omega, 0.0);
        let spectra: Vec<Vec<C64>> = [0.0, 0.7, TAU / 3.0, 2.0 * TAU / 3.0]
            .iter()
            .map(|dk| eigenvalues(&lindbladian(&p.with_k(k + dk))).unwrap())
            .collect();
        let mut slow = spectra[0].clone();
        slow.sort_by(|a, b| b.re.total_cmp(&a.re));
        let shared = slow[..4]
            .iter()
            .filter(|v| spectra[1..].iter().all(|s| s.iter().any(|w| (*v - w).norm() < 1e-9)))
            .count();
        prop_assert_eq!(shared, 1);
    }

    #[test]
    fn trace_functional_is_left_null_at_zero_field(omega in 0.0..0.05, gamma_d in 0.0..0.01) {
        let l = lindbladian(&params(omega, gamma_d));
        let id = vectorize(&ComplexMatrix::identity(3));
        let worst = (0..9)
            .map(|j| (0..9).map(|i| id[i].conj() * l[(i, j)]).sum::<C64>().norm())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-14);
    }

    #[test]
    fn burau_satisfies_braid_relation(t in 0.05..2.0f64, prefix in proptest::collection::vec(generator(), 0..6)) {
        let wrap = |core: &[Generator]| {
            let mut w = prefix.clone();
            w.extend_from_slice(core);
            BraidWord(w).burau(t)
        };
        let (s1, s2) = (Generator::S1, Generator::S2);
        let lhs = wrap(&[s1, s2, s1]);
        let rhs = wrap(&[s2, s1, s2]);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((lhs[i][j] - rhs[i][j]).abs() < 1e-9 * (1.0 + lhs[i][j].abs()));
            }
        }
    }

    #[test]
    fn word_inverse_cancels_in_burau(t in 0.05..2.0f64, gens in proptest::collection::vec(generator(), 0..8)) {
        let w = BraidWord(gens);
        let mut both = w.0.clone();
        both.extend(w.inverse().0);
        let m = BraidWord(both).burau(t);
        prop_assert!((m[0][0] - 1.0).abs() < 1e-9 && (m[1][1] - 1.0).abs() < 1e-9);
        prop_assert!(m[0][1].abs() < 1e-9 && m[1][0].abs() < 1e-9);
        prop_assert_eq!(w.exponent_sum(), w.freely_reduced().exponent_sum());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn braid_indices_are_integers_matching_the_word(omega in class_interior()) {
        let cls = classify(&params(omega, 0.0)).unwrap();
        prop_assert!((cls.indices.nu_total_raw - cls.nu_total() as f64).abs() < 1e-6);
        let n = cls.indices.nu_pair.len();
        for a in 0..n {
            for b in 0..n {
                if cls.indices.nu_ab[a][b].is_some() {
                    let sum = cls.indices.nu_pair[a][b] + cls.indices.nu_pair[b][a];
                    prop_assert!((sum - sum.round()).abs() < 1e-6);
                }
            }
        }
        prop_assert_eq!(cls.word.exponent_sum(), cls.nu_total());
        prop_assert_eq!(cls.raw_word.exponent_sum(), cls.nu_total());
    }
}
