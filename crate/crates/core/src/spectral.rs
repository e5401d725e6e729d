//! Spectral gaps of verification operators, worst-case passing probabilities
//! and sample complexities.
//!
//! Two engines compute `λ_max` of `Ω̂ = (1-Π) Ω (1-Π)`:
//!
//! * the dense engine builds `Ω` explicitly and eigensolves (power iteration
//!   above [`EIGENSOLVE_MAX_QUBITS`]);
//! * the syndrome engine uses that every stabilizer test is diagonal in the
//!   joint eigenbasis of the code generators, so `Ω` has eigenvalue
//!   `λ(x) = Σ_ℓ w_ℓ [test ℓ passes on syndrome x]` on each sector `x`.
//!
//! The syndrome engine works in exact integer arithmetic over the common
//! denominator of the weights, so ties in the maximum are exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitVec;
use crate::codes::{self, StabilizerCode};
use crate::dense::{self, CMatrix, CVector, Monomial};
use crate::pauli::PauliOperator;
use crate::strategy::{self, VerificationStrategy};
use crate::{Error, Limits, Result};

/// Largest qubit count solved by a full Hermitian eigensolve; larger dense
/// problems use power iteration.
pub const EIGENSOLVE_MAX_QUBITS: usize = 10;

/// Convergence threshold for power iteration on the eigenvalue.
pub const POWER_TOLERANCE: f64 = 1e-10;

const POWER_MAX_ITERATIONS: usize = 200_000;

/// Seed for the start vectors used where the caller supplies none.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    PowerIteration,
    Syndrome,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::PowerIteration => "power_iteration",
            Method::Syndrome => "syndrome",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub gap: f64,
    pub lambda_max_perp: f64,
    pub method: Method,
    /// Syndrome attaining the maximum (syndrome engine only), bit `i` for
    /// generator `i`.
    #[serde(serialize_with = "serialize_opt_bits")]
    pub worst_syndrome: Option<BitVec>,
}

fn serialize_opt_bits<S: serde::Serializer>(v: &Option<BitVec>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&b.to_string()),
        None => s.serialize_none(),
    }
}

impl SpectralReport {
    fn from_lambda(lambda: f64, method: Method, worst_syndrome: Option<BitVec>) -> Self {
        let lambda = lambda.clamp(0.0, 1.0);
        Self { gap: 1.0 - lambda, lambda_max_perp: lambda, method, worst_syndrome }
    }
}

fn check_dense(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.dense_cap {
        return Err(Error::DenseCap { n, cap: limits.dense_cap });
    }
    Ok(())
}

/// `Ω = Σ w · ∏ (1 + S)/2` as a dense matrix.
pub fn verification_operator_dense(s: &VerificationStrategy, limits: &Limits) -> Result<CMatrix> {
    check_dense(s.n(), limits)?;
    let dim = 1usize << s.n();
    let mut omega = CMatrix::zeros(dim, dim);
    for (w, t) in s.weights_f64().into_iter().zip(s.tests()) {
        omega += t.test.projector_dense() * num_complex::Complex64::new(w, 0.0);
    }
    Ok(omega)
}

fn generator_monomials(code: &StabilizerCode) -> Vec<Monomial> {
    code.generators().iter().map(Monomial::new).collect()
}

/// `(1-Π) Ω (1-Π)`, with `Π` applied factor by factor.
fn project_out(omega: &CMatrix, gens: &[Monomial]) -> CMatrix {
    let mut left = omega.clone();
    for g in gens {
        g.project_left(&mut left);
    }
    let a = omega - left;
    let mut right = a.clone();
    for g in gens {
        g.project_right(&mut right);
    }
    a - right
}

fn check_completeness(trace: f64, k: usize) -> Result<()> {
    let expected = (1u64 << k) as f64;
    if (trace - expected).abs() > 1e-9 {
        return Err(Error::StrategyInvalid(format!(
            "code states do not always pass: tr[ΩΠ] = {trace}, expected {expected}"
        )));
    }
    Ok(())
}

/// Gap by brute force: full eigensolve up to [`EIGENSOLVE_MAX_QUBITS`], power
/// iteration above.
pub fn spectral_gap_dense(s: &VerificationStrategy, limits: &Limits) -> Result<SpectralReport> {
    check_dense(s.n(), limits)?;
    if s.n() > EIGENSOLVE_MAX_QUBITS {
        return spectral_gap_power(s, DEFAULT_SEED, limits);
    }
    let code = s.code();
    let omega = verification_operator_dense(s, limits)?;
    let gens = generator_monomials(code);
    let mut omega_pi = omega.clone();
    for g in &gens {
        g.project_right(&mut omega_pi);
    }
    check_completeness(dense::trace(&omega_pi).re, code.k())?;
    let hat = project_out(&omega, &gens);
    let lambda = hat.symmetric_eigenvalues().max();
    Ok(SpectralReport::from_lambda(lambda, Method::Dense, None))
}

/// `Ω v` without forming `Ω`.
fn apply_omega(s: &VerificationStrategy, weights: &[f64], v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for (w, t) in weights.iter().zip(s.tests()) {
        let mut u = v.clone();
        dense::project_vector(t.test.required(), u.as_mut_slice());
        out.axpy(num_complex::Complex64::new(*w, 0.0), &u, num_complex::Complex64::new(1.0, 0.0));
    }
    out
}

/// `(1 - Π) v`.
fn deflate(code: &StabilizerCode, v: &CVector) -> CVector {
    let mut p = v.clone();
    dense::project_vector(code.generators().generators(), p.as_mut_slice());
    v - p
}

/// Orthonormal basis of the code space from projected random vectors.
pub fn code_basis(code: &StabilizerCode, seed: u64, limits: &Limits) -> Result<Vec<CVector>> {
    check_dense(code.n(), limits)?;
    let dim = 1usize << code.n();
    let want = 1usize << code.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<CVector> = Vec::with_capacity(want);
    let mut attempts = 0;
    while basis.len() < want {
        attempts += 1;
        if attempts > 4 * want + 16 {
            return Err(Error::StrategyInvalid("could not span the code space".into()));
        }
        let mut v = dense::gaussian_vector(dim, &mut rng);
        dense::project_vector(code.generators().generators(), v.as_mut_slice());
        for b in &basis {
            let c = b.dotc(&v);
            v.axpy(-c, b, num_complex::Complex64::new(1.0, 0.0));
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / num_complex::Complex64::new(norm, 0.0));
        }
    }
    Ok(basis)
}

/// Matrix-free power iteration on `Ω̂`.
///
/// The start vector is a seeded Gaussian vector with its code-space component
/// removed; a fixed all-ones start can be orthogonal to the top eigenvector.
pub fn spectral_gap_power(s: &VerificationStrategy, seed: u64, limits: &Limits) -> Result<SpectralReport> {
    check_dense(s.n(), limits)?;
    let code = s.code();
    let weights = s.weights_f64();
    let basis = code_basis(code, seed, limits)?;
    let trace: f64 = basis.iter().map(|c| c.dotc(&apply_omega(s, &weights, c)).re).sum();
    check_completeness(trace, code.k())?;
    if code.r() == 0 {
        return Ok(SpectralReport::from_lambda(0.0, Method::PowerIteration, None));
    }

    let dim = 1usize << s.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut v = deflate(code, &dense::gaussian_vector(dim, &mut rng));
    v /= num_complex::Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERATIONS {
        let w = deflate(code, &apply_omega(s, &weights, &v));
        let next = v.dotc(&w).re;
        let norm = w.norm();
        if norm < 1e-300 {
            return Ok(SpectralReport::from_lambda(0.0, Method::PowerIteration, None));
        }
        let residual = (&w - &v * num_complex::Complex64::new(next, 0.0)).norm();
        v = w / num_complex::Complex64::new(norm, 0.0);
        let done = (next - lambda).abs() < POWER_TOLERANCE * 1e-2 && residual < 1e-5;
        lambda = next;
        if done {
            break;
        }
    }
    Ok(SpectralReport::from_lambda(lambda, Method::PowerIteration, None))
}

/// Per-test pass conditions over syndromes: each entry is `(mask, parity)`,
/// passing when `popcount(mask & x)` has the given parity.
#[derive(Clone, Debug)]
struct SyndromeTests {
    r: usize,
    conditions: Vec<Vec<(u64, bool)>>,
    numerators: Vec<u64>,
    denominator: u64,
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (a / gcd(a, b)).checked_mul(b)
}

impl SyndromeTests {
    fn new(s: &VerificationStrategy, limits: &Limits) -> Result<Self> {
        let code = s.code();
        let r = code.r();
        if r > limits.enumeration_cap || r >= 64 {
            return Err(
                crate::pauli::PauliError::EnumerationCap { count: r, cap: limits.enumeration_cap.min(63) }.into()
            );
        }
        let full = code.generators().complete_generators();
        let expresser = full.expresser();
        let mut conditions = Vec::with_capacity(s.tests().len());
        for t in s.tests() {
            let mut conds = Vec::with_capacity(t.test.required().len());
            for p in t.test.required() {
                let e = expresser.express(p)?.ok_or_else(|| {
                    Error::Unsupported(format!("{p} is not a Pauli operator over the completed generators"))
                })?;
                if e.exponents.ones().any(|i| i >= r) {
                    return Err(Error::Unsupported(format!("{p} is not in the stabilizer group")));
                }
                let sign = e.sign().ok_or_else(|| Error::Unsupported(format!("{p} is not Hermitian")))?;
                let mask = e.exponents.ones().fold(0u64, |m, i| m | 1 << i);
                // s·(-1)^{b·x} = +1  ⇔  b·x ≡ [s = -1] (mod 2).
                conds.push((mask, sign == -1));
            }
            conditions.push(conds);
        }
        let mut denominator = 1u64;
        for t in s.tests() {
            denominator = lcm(denominator, *t.weight.denom())
                .ok_or_else(|| Error::Unsupported("weight denominators overflow".into()))?;
        }
        let numerators = s.tests().iter().map(|t| t.weight.numer() * (denominator / t.weight.denom())).collect();
        Ok(Self { r, conditions, numerators, denominator })
    }

    fn passes(conds: &[(u64, bool)], x: u64) -> bool {
        conds.iter().all(|&(mask, parity)| ((mask & x).count_ones() & 1 == 1) == parity)
    }

    /// `λ(x) · denominator`.
    fn scaled_eigenvalue(&self, x: u64) -> u64 {
        self.conditions.iter().zip(&self.numerators).filter(|(c, _)| Self::passes(c, x)).map(|(_, w)| w).sum()
    }

    fn direct_cost(&self) -> f64 {
        let ops: usize = self.conditions.iter().map(Vec::len).sum();
        (1u64 << self.r) as f64 * ops as f64
    }

    fn transform_cost(&self) -> f64 {
        let terms: f64 = self.conditions.iter().map(|c| 2f64.powi(c.len() as i32)).sum();
        (self.r as f64 + 1.0) * (1u64 << self.r) as f64 + terms
    }

    /// Best `(scaled λ, x)` over `x ≠ 0` by enumerating syndromes; larger
    /// value wins, then smaller `x`.
    fn max_direct(&self) -> (u128, u128, u64) {
        let best = (1..1u64 << self.r)
            .into_par_iter()
            .map(|x| (self.scaled_eigenvalue(x), x))
            .reduce(|| (0, u64::MAX), pick_best);
        (best.0 as u128, self.denominator as u128, best.1)
    }

    /// Same maximum through a Walsh–Hadamard transform.
    ///
    /// Each pass indicator `∏ (1 + (-1)^{b·x + p})/2` expands into signed
    /// characters `(-1)^{(⊕b)·x}`; summing coefficients per mask and
    /// transforming gives every `λ(x)` at once.
    fn max_transform(&self) -> (u128, u128, u64) {
        let size = 1usize << self.r;
        let top = self.conditions.iter().map(Vec::len).max().unwrap_or(0) as u32;
        let mut coeff = vec![0i128; size];
        for (conds, &w) in self.conditions.iter().zip(&self.numerators) {
            let scale = (w as i128) << (top - conds.len() as u32);
            for subset in 0..1u64 << conds.len() {
                let mut mask = 0u64;
                let mut negative = false;
                for (i, &(m, p)) in conds.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        mask ^= m;
                        negative ^= p;
                    }
                }
                coeff[mask as usize] += if negative { -scale } else { scale };
            }
        }
        let mut h = 1;
        while h < size {
            for start in (0..size).step_by(2 * h) {
                for i in start..start + h {
                    let (a, b) = (coeff[i], coeff[i + h]);
                    coeff[i] = a + b;
                    coeff[i + h] = a - b;
                }
            }
            h *= 2;
        }
        let mut best = (0u128, u64::MAX);
        for (x, &v) in coeff.iter().enumerate().skip(1) {
            let v = u128::try_from(v).expect("pass probabilities are nonnegative");
            if v > best.0 || best.1 == u64::MAX {
                best = (v, x as u64);
            }
        }
        (best.0, (self.denominator as u128) << top, best.1)
    }
}

fn pick_best(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    match a.0.cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Which syndrome-engine evaluation to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyndromeEvaluation {
    /// Cheaper of the two by operation count.
    Auto,
    Direct,
    Transform,
}

/// Gap from the syndrome eigenbasis.
pub fn spectral_gap_syndrome(s: &VerificationStrategy, limits: &Limits) -> Result<SpectralReport> {
    spectral_gap_syndrome_with(s, limits, SyndromeEvaluation::Auto)
}

pub fn spectral_gap_syndrome_with(
    s: &VerificationStrategy,
    limits: &Limits,
    evaluation: SyndromeEvaluation,
) -> Result<SpectralReport> {
    let tests = SyndromeTests::new(s, limits)?;
    if tests.scaled_eigenvalue(0) != tests.denominator {
        return Err(Error::StrategyInvalid("code states do not always pass: λ(0) ≠ 1".into()));
    }
    if tests.r == 0 {
        return Ok(SpectralReport::from_lambda(0.0, Method::Syndrome, None));
    }
    let use_direct = match evaluation {
        SyndromeEvaluation::Direct => true,
        SyndromeEvaluation::Transform => false,
        SyndromeEvaluation::Auto => tests.direct_cost() <= tests.transform_cost(),
    };
    let (value, scale, x) = if use_direct { tests.max_direct() } else { tests.max_transform() };
    let lambda = value as f64 / scale as f64;
    let gap = (scale - value) as f64 / scale as f64;
    let syndrome = BitVec::from_u64(tests.r, x);
    Ok(SpectralReport { gap, lambda_max_perp: lambda, method: Method::Syndrome, worst_syndrome: Some(syndrome) })
}

/// Syndrome engine when every test is a stabilizer test, dense otherwise.
pub fn spectral_gap(s: &VerificationStrategy, limits: &Limits) -> Result<SpectralReport> {
    match spectral_gap_syndrome(s, limits) {
        Err(Error::Unsupported(_)) => spectral_gap_dense(s, limits),
        other => other,
    }
}

/// `1 - ν ε`, the largest pass probability of a state with infidelity `ε`.
pub fn worst_case_pass_probability(s: &VerificationStrategy, epsilon: f64, limits: &Limits) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} not in (0, 1]")));
    }
    Ok(1.0 - spectral_gap(s, limits)?.gap * epsilon)
}

/// `√(1-ε)|φ⟩ + √ε|φ⊥⟩` with `|φ⟩` a code state and `|φ⊥⟩` a top eigenvector
/// of `Ω̂`. Uses the worst syndrome sector when the syndrome engine applies.
pub fn worst_case_state(s: &VerificationStrategy, epsilon: f64, limits: &Limits) -> Result<CVector> {
    worst_case_state_seeded(s, epsilon, DEFAULT_SEED, limits)
}

pub fn worst_case_state_seeded(s: &VerificationStrategy, epsilon: f64, seed: u64, limits: &Limits) -> Result<CVector> {
    check_dense(s.n(), limits)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!("epsilon {epsilon} not in [0, 1]")));
    }
    let code = s.code();
    let perp = match spectral_gap_syndrome(s, limits) {
        Ok(report) => match report.worst_syndrome {
            Some(x) => sector_vector(code, &x, seed)?,
            None => return in_subspace_only(code, epsilon, seed, limits),
        },
        Err(Error::Unsupported(_)) => dense_top_vector(s, seed, limits)?,
        Err(e) => return Err(e),
    };
    let phi = code_basis(code, seed, limits)?.swap_remove(0);
    Ok(combine(&phi, &perp, epsilon))
}

/// The dense-eigenvector construction, independent of the syndrome engine.
pub fn worst_case_state_dense(s: &VerificationStrategy, epsilon: f64, seed: u64, limits: &Limits) -> Result<CVector> {
    check_dense(s.n(), limits)?;
    if s.code().r() == 0 {
        return in_subspace_only(s.code(), epsilon, seed, limits);
    }
    let perp = dense_top_vector(s, seed, limits)?;
    let phi = code_basis(s.code(), seed, limits)?.swap_remove(0);
    Ok(combine(&phi, &perp, epsilon))
}

fn in_subspace_only(code: &StabilizerCode, epsilon: f64, seed: u64, limits: &Limits) -> Result<CVector> {
    if epsilon > 0.0 {
        return Err(Error::Parameter("the code space is the whole space; no state has positive infidelity".into()));
    }
    Ok(code_basis(code, seed, limits)?.swap_remove(0))
}

fn combine(phi: &CVector, perp: &CVector, epsilon: f64) -> CVector {
    phi * num_complex::Complex64::new((1.0 - epsilon).sqrt(), 0.0)
        + perp * num_complex::Complex64::new(epsilon.sqrt(), 0.0)
}

/// Unit vector in the joint eigenspace where generator `i` has eigenvalue
/// `(-1)^{x_i}`.
pub fn sector_vector(code: &StabilizerCode, x: &BitVec, seed: u64) -> Result<CVector> {
    let dim = 1usize << code.n();
    let signed: Vec<PauliOperator> =
        code.generators().iter().enumerate().map(|(i, g)| if x.get(i) { g.negated() } else { g.clone() }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c0d_e5ec);
    for _ in 0..16 {
        let mut v = dense::gaussian_vector(dim, &mut rng);
        dense::project_vector(&signed, v.as_mut_slice());
        let norm = v.norm();
        if norm > 1e-6 {
            return Ok(v / num_complex::Complex64::new(norm, 0.0));
        }
    }
    Err(Error::StrategyInvalid(format!("syndrome sector {x} is empty")))
}

/// Top eigenvector of `Ω̂`, restricted to the orthogonal complement.
fn dense_top_vector(s: &VerificationStrategy, seed: u64, limits: &Limits) -> Result<CVector> {
    let code = s.code();
    let omega = verification_operator_dense(s, limits)?;
    let hat = project_out(&omega, &generator_monomials(code));
    let eig = nalgebra::SymmetricEigen::new(hat);
    let top = eig.eigenvalues.imax();
    let mut v = deflate(code, &eig.eigenvectors.column(top).into_owned());
    if v.norm() < 1e-6 {
        // Degenerate with the code space (λ = 0): any complement vector works.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        v = deflate(code, &dense::gaussian_vector(1 << code.n(), &mut rng));
    }
    let norm = v.norm();
    Ok(v / num_complex::Complex64::new(norm, 0.0))
}

/// `tr[Π |ψ⟩⟨ψ|] = ‖Π ψ‖²`.
pub fn subspace_overlap(code: &StabilizerCode, psi: &CVector) -> f64 {
    let mut p = psi.clone();
    dense::project_vector(code.generators().generators(), p.as_mut_slice());
    p.norm_squared()
}

/// `tr[Π σ]`.
pub fn subspace_overlap_mixed(code: &StabilizerCode, sigma: &CMatrix, limits: &Limits) -> Result<f64> {
    let pi = codes::subspace_projector_dense(code, limits.dense_cap)?;
    Ok(dense::trace_product(&pi, sigma).re)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleComplexity {
    pub nu: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// `⌈(1/ν)(1/ε) ln(1/δ)⌉`.
    pub n_copies: u64,
    /// `⌈ln δ / ln(1 - νε)⌉`, the bound before `ln(1-νε) ≈ -νε`.
    pub n_copies_exact: u64,
    /// The real-valued bound `(1/ν)(1/ε) ln(1/δ)`.
    pub bound: f64,
}

/// Copies needed for confidence `1 - δ` at infidelity `ε`.
pub fn sample_complexity(nu: f64, epsilon: f64, delta: f64) -> Result<SampleComplexity> {
    for (name, v) in [("nu", nu), ("epsilon", epsilon), ("delta", delta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Parameter(format!("{name} = {v} not in (0, 1]")));
        }
    }
    let bound = (1.0 / delta).ln() / (nu * epsilon);
    let n_copies = ceil_tolerant(bound);
    let n_copies_exact = if nu * epsilon >= 1.0 { 1 } else { ceil_tolerant(delta.ln() / (1.0 - nu * epsilon).ln()) };
    Ok(SampleComplexity { nu, epsilon, delta, n_copies, n_copies_exact, bound })
}

/// Ceiling that ignores float noise just above an integer.
fn ceil_tolerant(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// Convenience: pass probability of a pure state.
pub fn pass_probability_pure(s: &VerificationStrategy, psi: &CVector, limits: &Limits) -> Result<f64> {
    check_dense(s.n(), limits)?;
    if psi.len() != 1 << s.n() {
        return Err(Error::Dimension { expected: 1 << s.n(), found: psi.len() });
    }
    let p: f64 = s
        .weights_f64()
        .iter()
        .zip(s.tests())
        .map(|(w, t)| {
            let mut u = psi.clone();
            dense::project_vector(t.test.required(), u.as_mut_slice());
            w * u.norm_squared()
        })
        .sum();
    strategy::clip_probability(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::fixtures;
    use crate::pauli::GeneratorSet;
    use crate::strategy::{strategy_dc_xyz, strategy_global, strategy_i, strategy_ii, Weight};

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn strategy_i_spectrum_on_five_qubit_code() {
        let five = fixtures::load("five_qubit").unwrap();
        let s = strategy_i(five.stabilizer(), &limits()).unwrap();
        let omega = verification_operator_dense(&s, &limits()).unwrap();
        let mut ev: Vec<f64> = omega.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(ev[..2].iter().all(|e| (e - 1.0).abs() < 1e-12));
        assert!(ev[2..].iter().all(|e| (e - 7.0 / 15.0).abs() < 1e-12));
        let r = spectral_gap_dense(&s, &limits()).unwrap();
        assert!((r.gap - 8.0 / 15.0).abs() < 1e-12);
        // tr[Ω] = 2^k + Σ over the complement.
        let tr = dense::trace(&omega).re;
        assert!((tr - (2.0 + 30.0 * 7.0 / 15.0)).abs() < 1e-9);
    }

    #[test]
    fn strategy_ii_on_two_qubit_product_code() {
        let code = crate::codes::StabilizerCode::new(GeneratorSet::parse(&["ZI", "IZ"]).unwrap()).unwrap();
        let s = strategy_ii(&code).unwrap();
        let omega = verification_operator_dense(&s, &limits()).unwrap();
        let diag: Vec<f64> = omega.diagonal().iter().map(|c| c.re).collect();
        assert_eq!(diag, [1.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn engines_agree_and_evaluations_agree() {
        let steane = fixtures::load("steane").unwrap();
        let dc = strategy_dc_xyz(steane.css().unwrap()).unwrap();
        let dense = spectral_gap_dense(&dc, &limits()).unwrap();
        let direct = spectral_gap_syndrome_with(&dc, &limits(), SyndromeEvaluation::Direct).unwrap();
        let transform = spectral_gap_syndrome_with(&dc, &limits(), SyndromeEvaluation::Transform).unwrap();
        assert!((dense.gap - 2.0 / 3.0).abs() < 1e-12);
        assert!((direct.gap - dense.gap).abs() < 1e-12);
        assert_eq!(direct, transform);
        let power = spectral_gap_power(&dc, 7, &limits()).unwrap();
        assert!((power.gap - dense.gap).abs() < 1e-10);
    }

    #[test]
    fn global_gap_is_one() {
        let five = fixtures::load("five_qubit").unwrap();
        let g = strategy_global(five.stabilizer(), &limits()).unwrap();
        assert!((spectral_gap_dense(&g, &limits()).unwrap().gap - 1.0).abs() < 1e-12);
        assert!((spectral_gap_syndrome(&g, &limits()).unwrap().gap - 1.0).abs() < 1e-15);
        assert!(worst_case_pass_probability(&g, 1.0, &limits()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn global_operator_is_the_projector_and_css_worst_case() {
        let steane = fixtures::load("steane").unwrap();
        let g = strategy_global(steane.stabilizer(), &limits()).unwrap();
        let pi = codes::subspace_projector_dense(steane.stabilizer(), 12).unwrap();
        assert!(dense::max_abs_diff(&verification_operator_dense(&g, &limits()).unwrap(), &pi) < 1e-12);
        let xz = crate::strategy::strategy_css_xz(steane.css().unwrap()).unwrap();
        assert!((worst_case_pass_probability(&xz, 0.1, &limits()).unwrap() - 0.95).abs() < 1e-12);
        assert!(worst_case_pass_probability(&xz, 0.0, &limits()).is_err());
    }

    #[test]
    fn incomplete_strategies_are_rejected() {
        let five = fixtures::load("five_qubit").unwrap();
        let s = strategy_ii(five.stabilizer()).unwrap();
        let records: Vec<_> = s
            .records()
            .into_iter()
            .map(|mut r| {
                r.required = r.required.iter().map(|p| format!("-{p}")).collect();
                r
            })
            .collect();
        let bad = VerificationStrategy::from_records("bad", five.stabilizer(), &records).unwrap();
        assert!(matches!(spectral_gap_dense(&bad, &limits()), Err(Error::StrategyInvalid(_))));
        assert!(matches!(spectral_gap_syndrome(&bad, &limits()), Err(Error::StrategyInvalid(_))));
    }

    #[test]
    fn non_stabilizer_tests_are_unsupported_by_the_syndrome_engine() {
        let steane = fixtures::load("steane").unwrap();
        let records = vec![crate::strategy::TestRecord {
            weight: "1".into(),
            setting: "XXXXXXX".into(),
            required: vec!["XXXXXXX".into()],
        }];
        let s = VerificationStrategy::from_records("logical", steane.stabilizer(), &records).unwrap();
        assert!(matches!(spectral_gap_syndrome(&s, &limits()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn worst_syndromes() {
        let steane = fixtures::load("steane").unwrap();
        let ii = strategy_ii(steane.stabilizer()).unwrap();
        let r = spectral_gap_syndrome(&ii, &limits()).unwrap();
        assert!((r.lambda_max_perp - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.worst_syndrome.unwrap().to_string(), "100000");

        let xz = crate::strategy::strategy_css_xz(steane.css().unwrap()).unwrap();
        let r = spectral_gap_syndrome(&xz, &limits()).unwrap();
        assert!((r.lambda_max_perp - 0.5).abs() < 1e-15);
        let x = r.worst_syndrome.unwrap();
        let x_part = x.slice(0, 3).is_zero();
        let z_part = x.slice(3, 3).is_zero();
        assert!(x_part != z_part);
    }

    #[test]
    fn sample_complexity_examples() {
        let c = sample_complexity(1.0, 0.01, 0.01).unwrap();
        assert_eq!(c.n_copies, 461);
        assert!(c.n_copies_exact <= c.n_copies);
        let dc = sample_complexity(2.0 / 3.0, 0.01, 0.01).unwrap();
        assert!((dc.bound - 1.5 * 100.0 * 100f64.ln()).abs() < 1e-9);
        let half = sample_complexity(0.5, 0.01, 0.01).unwrap();
        assert!(half.n_copies.abs_diff(2 * c.n_copies) <= 1);
        assert!(sample_complexity(0.0, 0.1, 0.1).is_err());
        assert!(sample_complexity(1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn worst_case_state_properties() {
        let five = fixtures::load("five_qubit").unwrap();
        for s in [strategy_i(five.stabilizer(), &limits()).unwrap(), strategy_ii(five.stabilizer()).unwrap()] {
            let nu = spectral_gap_dense(&s, &limits()).unwrap().gap;
            for eps in [0.0, 0.1, 0.3] {
                for psi in [
                    worst_case_state(&s, eps, &limits()).unwrap(),
                    worst_case_state_dense(&s, eps, 3, &limits()).unwrap(),
                ] {
                    assert!((psi.norm() - 1.0).abs() < 1e-12);
                    assert!((subspace_overlap(s.code(), &psi) - (1.0 - eps)).abs() < 1e-9);
                    let p = pass_probability_pure(&s, &psi, &limits()).unwrap();
                    assert!((p - (1.0 - nu * eps)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn reweighting_keeps_the_exact_engine_exact() {
        let five = fixtures::load("five_qubit").unwrap();
        let s = strategy_ii(five.stabilizer()).unwrap();
        let w = [Weight::new(1, 3), Weight::new(1, 6), Weight::new(1, 4), Weight::new(1, 4)];
        let t = s.reweighted(&w).unwrap();
        let r = spectral_gap_syndrome(&t, &limits()).unwrap();
        // Missing the lightest test costs 1/6.
        assert!((r.gap - 1.0 / 6.0).abs() < 1e-15);
    }
}
