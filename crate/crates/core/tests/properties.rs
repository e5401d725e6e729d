//! Property tests against dense oracles.

use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabverify::codes::{fixtures, subspace_projector_dense, StabilizerCode};
use stabverify::dense::{self, CMatrix};
use stabverify::pauli::PauliOperator;
use stabverify::spectral;
use stabverify::strategy::{self, StrategyKind, VerificationStrategy, Weight};
use stabverify::Limits;

fn limits() -> Limits {
    Limits::default()
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliOperator> {
    (proptest::collection::vec(0u8..4, n), any::<bool>()).prop_map(|(letters, negative)| {
        let s: String = letters.iter().map(|&l| ['I', 'X', 'Y', 'Z'][l as usize]).collect();
        let p: PauliOperator = s.parse().unwrap();
        if negative {
            p.negated()
        } else {
            p
        }
    })
}

/// Keeps each candidate that commutes with everything kept so far.
fn commuting_subset(candidates: Vec<PauliOperator>) -> Vec<PauliOperator> {
    let mut kept: Vec<PauliOperator> = Vec::new();
    for p in candidates {
        if kept.iter().all(|q| q.commutes(&p).unwrap()) {
            kept.push(p);
        }
    }
    kept
}

fn absorption_defect(ops: &[PauliOperator]) -> f64 {
    let n = ops[0].n();
    let dim = 1usize << n;
    let id = CMatrix::identity(dim, dim);
    let prod = ops.iter().fold(id.clone(), |acc, p| acc * (&id + dense::pauli_matrix(p)));
    let all = ops.iter().fold(id.clone(), |acc, p| acc * dense::pauli_matrix(p));
    let lhs = &prod * (&id + all);
    dense::max_abs_diff(&lhs, &(prod * Complex::new(2.0, 0.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_projector_absorbs_the_total_product(
        (n, candidates) in (1usize..=5).prop_flat_map(|n| (Just(n), proptest::collection::vec(pauli_strategy(n), 1..8)))
    ) {
        let ops = commuting_subset(candidates);
        prop_assert_eq!(ops[0].n(), n);
        prop_assert!(absorption_defect(&ops) <= 1e-12);
    }
}

fn random_code_state(code: &StabilizerCode, rank: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let dim = 1usize << code.n();
    let mut sigma = CMatrix::zeros(dim, dim);
    let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut v = dense::gaussian_vector(dim, rng);
        dense::project_vector(code.generators().generators(), v.as_mut_slice());
        let v = v.unscale(v.norm());
        sigma += dense::outer(&v) * Complex::new(w / total, 0.0);
    }
    sigma
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// `tr[Π σ] = 1` exactly for code-space mixtures, strictly below once any
    /// weight leaves the code space, and the same split for `tr[Ω σ]`.
    #[test]
    fn subspace_membership_dichotomy(seed in any::<u64>(), fixture in 0usize..2, outside in any::<bool>(), t in 0.01f64..1.0) {
        let name = ["code_4_1_2", "five_qubit"][fixture];
        let code = fixtures::load(name).unwrap();
        let stab = code.stabilizer();
        let pi = subspace_projector_dense(stab, 12).unwrap();
        let s = strategy::strategy_ii(stab).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inside = random_code_state(stab, 1 + (seed % 3) as usize, &mut rng);
        let sigma = if outside {
            let chi = dense::gaussian_vector(1 << stab.n(), &mut rng);
            let chi = chi.unscale(chi.norm());
            inside * Complex::new(1.0 - t, 0.0) + dense::outer(&chi) * Complex::new(t, 0.0)
        } else {
            inside
        };
        let fidelity = dense::trace_product(&pi, &sigma).re;
        let pass = strategy::pass_probability(&s, &sigma, &limits()).unwrap();
        if outside {
            prop_assert!(fidelity < 1.0 - 1e-6);
            prop_assert!(pass < 1.0 - 1e-7);
        } else {
            prop_assert!((fidelity - 1.0).abs() < 1e-9);
            prop_assert!((pass - 1.0).abs() < 1e-9);
        }
    }
}

const GAP_FIXTURES: [&str; 8] =
    ["code_4_1_2", "five_qubit", "code_6_1_3", "code_7_1_3", "code_8_3_3", "code_9_1_3", "steane", "toric_2"];

fn fixture_strategies() -> Vec<(String, VerificationStrategy)> {
    let mut out = Vec::new();
    for name in GAP_FIXTURES {
        let code = fixtures::load(name).unwrap();
        for kind in strategy::applicable(&code, &limits()) {
            out.push((format!("{name}/{kind}"), strategy::build(kind, &code, &limits()).unwrap()));
        }
    }
    out
}

fn random_weights(len: usize, rng: &mut ChaCha8Rng) -> Vec<Weight> {
    let raw: Vec<u64> = (0..len).map(|_| rng.random_range(1..=40)).collect();
    let total: u64 = raw.iter().sum();
    raw.into_iter().map(|r| Weight::new(r, total)).collect()
}

#[test]
fn uniform_weights_are_not_improvable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (label, s) in fixture_strategies() {
        if s.settings_count() < 2 {
            continue;
        }
        let uniform = spectral::spectral_gap_syndrome(&s, &limits()).unwrap().gap;
        for _ in 0..100 {
            let t = s.reweighted(&random_weights(s.settings_count(), &mut rng)).unwrap();
            let gap = spectral::spectral_gap_syndrome(&t, &limits()).unwrap().gap;
            assert!(gap <= uniform + 1e-12, "{label}: {gap} > {uniform}");
        }
    }
}

#[test]
fn engines_agree_on_every_fixture_strategy() {
    for (label, s) in fixture_strategies() {
        let dense = spectral::spectral_gap_dense(&s, &limits()).unwrap();
        let syndrome = spectral::spectral_gap_syndrome(&s, &limits()).unwrap();
        assert!((dense.gap - syndrome.gap).abs() < 1e-12, "{label}: {} vs {}", dense.gap, syndrome.gap);
        assert!((0.0..=1.0).contains(&dense.lambda_max_perp), "{label}");
    }
}

#[test]
fn closed_form_gaps() {
    for name in GAP_FIXTURES {
        let code = fixtures::load(name).unwrap();
        for kind in strategy::applicable(&code, &limits()) {
            let s = strategy::build(kind, &code, &limits()).unwrap();
            let expected = stabverify::report::closed_form_gap(kind, &s);
            let gap = spectral::spectral_gap_dense(&s, &limits()).unwrap().gap;
            assert!((gap - expected).abs() < 1e-10, "{name}/{kind}: {gap} vs {expected}");
            if kind == StrategyKind::Coloring {
                assert!(s.settings_count() <= code.stabilizer().r());
            }
        }
    }
}

#[test]
fn strategy_i_trace_is_half_the_dimension() {
    for name in ["code_4_1_2", "five_qubit", "steane", "code_8_3_3"] {
        let code = fixtures::load(name).unwrap();
        let s = strategy::strategy_i(code.stabilizer(), &limits()).unwrap();
        let omega = spectral::verification_operator_dense(&s, &limits()).unwrap();
        let expected = (1u64 << (code.n() - 1)) as f64;
        assert!((dense::trace(&omega).re - expected).abs() < 1e-9, "{name}");
    }
}

#[test]
fn syndrome_engine_handles_toric_three() {
    let code = fixtures::load("toric_3").unwrap();
    assert_eq!((code.n(), code.k()), (18, 2));
    let xz = strategy::build(StrategyKind::CssXz, &code, &limits()).unwrap();
    assert!((spectral::spectral_gap_syndrome(&xz, &limits()).unwrap().gap - 0.5).abs() < 1e-15);
    let ii = strategy::build(StrategyKind::II, &code, &limits()).unwrap();
    assert!((spectral::spectral_gap_syndrome(&ii, &limits()).unwrap().gap - 1.0 / 16.0).abs() < 1e-15);
    assert!(spectral::spectral_gap_dense(&xz, &limits()).unwrap_err().is_resource_limit());
}

#[test]
fn power_iteration_matches_the_eigensolver() {
    let code = fixtures::load("code_9_1_3").unwrap();
    for kind in [StrategyKind::II, StrategyKind::Coloring] {
        let s = strategy::build(kind, &code, &limits()).unwrap();
        let exact = spectral::spectral_gap_dense(&s, &limits()).unwrap().gap;
        let power = spectral::spectral_gap_power(&s, 5, &limits()).unwrap().gap;
        assert!((exact - power).abs() < 1e-8, "{kind}: {exact} vs {power}");
    }
}
