//! Verification strategies: weighted lists of tests, each test being a set of
//! commuting stabilizer elements measured with one per-qubit setting.
//!
//! A test passes when every required operator reads `+1`, so it realizes the
//! projector `M = ∏ (1 + S)/2` and the strategy realizes `Ω = Σ μ(M) M`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::codes::{Code, CodeKind, CssCode, StabilizerCode};
use crate::dense::{self, CMatrix, Monomial};
use crate::pauli::{Letter, PauliOperator};
use crate::{Error, Limits, Result};

/// Exact probability weight.
pub type Weight = Ratio<u64>;

/// Per-qubit measurement bases, or a joint entangled measurement.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Setting {
    Local(Vec<Letter>),
    Entangled,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Local(letters) => {
                for l in letters {
                    write!(f, "{}", l.as_char())?;
                }
                Ok(())
            }
            Setting::Entangled => f.write_str("entangled"),
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "entangled" {
            return Ok(Setting::Entangled);
        }
        s.chars()
            .enumerate()
            .map(|(i, c)| match Letter::from_char(c) {
                Some(l) if l != Letter::I => Ok(l),
                _ => Err(Error::InvalidTest(format!("setting character {c:?} at position {i}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Setting::Local)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestOperator {
    required: Vec<PauliOperator>,
    setting: Setting,
}

impl TestOperator {
    /// Checks Hermiticity, pairwise commutation and, for local settings, that
    /// each required operator acts on every qubit as identity or as the
    /// setting letter.
    pub fn new(required: Vec<PauliOperator>, setting: Setting) -> Result<Self> {
        let Some(n) = required.first().map(PauliOperator::n) else {
            return Err(Error::InvalidTest("no required operators".into()));
        };
        for (i, p) in required.iter().enumerate() {
            if p.n() != n {
                return Err(Error::Dimension { expected: n, found: p.n() });
            }
            if !p.is_hermitian() {
                return Err(Error::InvalidTest(format!("required operator {i} ({p}) is not Hermitian")));
            }
        }
        for i in 0..required.len() {
            for j in i + 1..required.len() {
                if !required[i].commutes(&required[j])? {
                    return Err(Error::InvalidTest(format!(
                        "required operators {} and {} anticommute",
                        required[i], required[j]
                    )));
                }
            }
        }
        if let Setting::Local(letters) = &setting {
            if letters.len() != n {
                return Err(Error::Dimension { expected: n, found: letters.len() });
            }
            for p in &required {
                for (q, &l) in letters.iter().enumerate() {
                    let a = p.letter(q);
                    if a != Letter::I && a != l {
                        return Err(Error::InvalidTest(format!(
                            "{p} acts as {} on qubit {q}, setting measures {}",
                            a.as_char(),
                            l.as_char()
                        )));
                    }
                }
            }
        }
        Ok(Self { required, setting })
    }

    pub fn required(&self) -> &[PauliOperator] {
        &self.required
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn n(&self) -> usize {
        self.required[0].n()
    }

    /// `∏ (1 + S)/2` as a dense matrix.
    pub fn projector_dense(&self) -> CMatrix {
        dense::projector_matrix(self.n(), &self.required)
    }

    /// `tr[M σ]`.
    ///
    /// `M = 2^{-t} Σ` over all products of the `t` required operators, and
    /// each `tr[P σ]` reads one generalized diagonal of `σ`, so this costs
    /// `O(2^t · 2^n)` instead of a matrix product.
    pub fn probability(&self, sigma: &CMatrix) -> f64 {
        let t = self.required.len();
        if t > 16 {
            let mut m = sigma.clone();
            for p in &self.required {
                Monomial::new(p).project_left(&mut m);
            }
            return dense::trace(&m).re;
        }
        let mut product = PauliOperator::identity(self.n());
        let mut total = pauli_trace(&Monomial::new(&product), sigma);
        // Gray code: step i toggles factor trailing_zeros(i), and the factors
        // commute, so multiplying again removes it.
        for i in 1u32..1 << t {
            let k = i.trailing_zeros() as usize;
            product = product.multiply(&self.required[k]).expect("lengths checked at construction");
            total += pauli_trace(&Monomial::new(&product), sigma);
        }
        total.re / (1u64 << t) as f64
    }

    /// Same test after Hadamards on `qubits`.
    pub fn hadamard_conjugate(&self, qubits: &crate::bits::BitVec) -> Result<Self> {
        let required = self.required.iter().map(|p| p.hadamard_conjugate(qubits)).collect();
        let setting = match &self.setting {
            Setting::Entangled => Setting::Entangled,
            Setting::Local(letters) => Setting::Local(
                letters
                    .iter()
                    .enumerate()
                    .map(|(q, &l)| match (qubits.get(q), l) {
                        (true, Letter::X) => Letter::Z,
                        (true, Letter::Z) => Letter::X,
                        _ => l,
                    })
                    .collect(),
            ),
        };
        Self::new(required, setting)
    }
}

/// Checks that every required operator is a stabilizer of the code with sign
/// `+`, so that code states always pass.
pub fn validate_test(code: &StabilizerCode, test: &TestOperator) -> Result<()> {
    if test.n() != code.n() {
        return Err(Error::Dimension { expected: code.n(), found: test.n() });
    }
    let expresser = code.generators().expresser();
    for p in test.required() {
        match expresser.express(p)? {
            Some(e) if e.sign() == Some(1) => {}
            Some(_) => return Err(Error::InvalidTest(format!("{p} is minus a stabilizer"))),
            None => return Err(Error::InvalidTest(format!("{p} is not in the stabilizer group"))),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedTest {
    pub weight: Weight,
    pub test: TestOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    I,
    II,
    Coloring,
    CssXz,
    DcXyz,
    Global,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::I,
        StrategyKind::II,
        StrategyKind::Coloring,
        StrategyKind::CssXz,
        StrategyKind::DcXyz,
        StrategyKind::Global,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::I => "strategy_i",
            StrategyKind::II => "strategy_ii",
            StrategyKind::Coloring => "coloring",
            StrategyKind::CssXz => "css_xz",
            StrategyKind::DcXyz => "dc_xyz",
            StrategyKind::Global => "global",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "strategy_i" | "i" => StrategyKind::I,
            "strategy_ii" | "ii" => StrategyKind::II,
            "coloring" => StrategyKind::Coloring,
            "css_xz" | "xz" => StrategyKind::CssXz,
            "dc_xyz" | "xyz" => StrategyKind::DcXyz,
            "global" => StrategyKind::Global,
            _ => return Err(Error::Parameter(format!("unknown strategy {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationStrategy {
    name: String,
    code: StabilizerCode,
    tests: Vec<WeightedTest>,
}

/// One entry of the JSON strategy format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRecord {
    pub weight: String,
    pub setting: String,
    pub required: Vec<String>,
}

impl VerificationStrategy {
    /// Weights must be exact and sum to one.
    pub fn new(name: impl Into<String>, code: StabilizerCode, tests: Vec<WeightedTest>) -> Result<Self> {
        if tests.is_empty() {
            return Err(Error::StrategyInvalid("no tests".into()));
        }
        let mut total = Weight::from_integer(0);
        for t in &tests {
            if t.test.n() != code.n() {
                return Err(Error::Dimension { expected: code.n(), found: t.test.n() });
            }
            total += t.weight;
        }
        if total != Weight::from_integer(1) {
            return Err(Error::StrategyInvalid(format!("weights sum to {total}")));
        }
        Ok(Self { name: name.into(), code, tests })
    }

    fn uniform(name: &str, code: StabilizerCode, tests: Vec<TestOperator>) -> Result<Self> {
        let w = Weight::new(1, tests.len() as u64);
        let tests = tests.into_iter().map(|test| WeightedTest { weight: w, test }).collect();
        Self::new(name, code, tests)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn tests(&self) -> &[WeightedTest] {
        &self.tests
    }

    /// Number of distinct measurement settings.
    pub fn settings_count(&self) -> usize {
        self.tests.len()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.tests.iter().map(|t| ratio_f64(t.weight)).collect()
    }

    /// Same tests with new weights.
    pub fn reweighted(&self, weights: &[Weight]) -> Result<Self> {
        if weights.len() != self.tests.len() {
            return Err(Error::Dimension { expected: self.tests.len(), found: weights.len() });
        }
        let tests =
            self.tests.iter().zip(weights).map(|(t, &weight)| WeightedTest { weight, test: t.test.clone() }).collect();
        Self::new(self.name.clone(), self.code.clone(), tests)
    }

    pub fn records(&self) -> Vec<TestRecord> {
        self.tests
            .iter()
            .map(|t| TestRecord {
                weight: t.weight.to_string(),
                setting: t.test.setting().to_string(),
                required: t.test.required().iter().map(|p| p.to_string()).collect(),
            })
            .collect()
    }

    pub fn from_records(name: &str, code: &StabilizerCode, records: &[TestRecord]) -> Result<Self> {
        let mut tests = Vec::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            let weight: Weight =
                r.weight.parse().map_err(|_| Error::StrategyInvalid(format!("test {i}: bad weight {:?}", r.weight)))?;
            let required = r.required.iter().map(|s| s.parse::<PauliOperator>()).collect::<Result<Vec<_>, _>>()?;
            tests.push(WeightedTest { weight, test: TestOperator::new(required, r.setting.parse()?)? });
        }
        Self::new(name, code.clone(), tests)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("records serialize")
    }

    pub fn from_json(name: &str, code: &StabilizerCode, text: &str) -> Result<Self> {
        let records: Vec<TestRecord> = serde_json::from_str(text)?;
        Self::from_records(name, code, &records)
    }

    /// Every test validated against the code.
    pub fn validate(&self) -> Result<()> {
        for t in &self.tests {
            validate_test(&self.code, &t.test)?;
        }
        Ok(())
    }

    /// `tr[M σ]` for every test, in test order.
    pub fn test_probabilities(&self, sigma: &CMatrix) -> Vec<f64> {
        self.tests.iter().map(|t| t.test.probability(sigma)).collect()
    }
}

pub(crate) fn ratio_f64(r: Weight) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `tr[P σ] = Σ_c coeff(c) · σ[c, c ⊕ flip]`.
fn pauli_trace(p: &Monomial, sigma: &CMatrix) -> Complex64 {
    (0..sigma.nrows()).map(|c| p.coeff(c) * sigma[(c, c ^ p.flip())]).sum()
}

fn local_setting(p: &PauliOperator) -> Setting {
    Setting::Local(p.letters().map(|l| if l == Letter::I { Letter::Z } else { l }).collect())
}

/// One test per non-identity stabilizer, uniform weights.
pub fn strategy_i(code: &StabilizerCode, limits: &Limits) -> Result<VerificationStrategy> {
    let tests = code
        .generators()
        .enumerate_group(limits.enumeration_cap)?
        .skip(1)
        .map(|(_, p)| TestOperator::new(vec![p.clone()], local_setting(&p)))
        .collect::<Result<Vec<_>>>()?;
    if tests.is_empty() {
        return Err(Error::Inapplicable {
            strategy: StrategyKind::I.name().into(),
            reason: "the code has no stabilizer generators".into(),
        });
    }
    VerificationStrategy::uniform(StrategyKind::I.name(), code.clone(), tests)
}

/// One test per generator, uniform weights.
pub fn strategy_ii(code: &StabilizerCode) -> Result<VerificationStrategy> {
    let tests = code
        .generators()
        .iter()
        .map(|g| TestOperator::new(vec![g.clone()], local_setting(g)))
        .collect::<Result<Vec<_>>>()?;
    if tests.is_empty() {
        return Err(Error::Inapplicable {
            strategy: StrategyKind::II.name().into(),
            reason: "the code has no stabilizer generators".into(),
        });
    }
    VerificationStrategy::uniform(StrategyKind::II.name(), code.clone(), tests)
}

fn uniform_letter(n: usize, l: Letter) -> Setting {
    Setting::Local(vec![l; n])
}

fn css_tests(code: &CssCode) -> Result<Vec<TestOperator>> {
    let mut tests = Vec::new();
    for (ops, l) in [(code.x_generators(), Letter::X), (code.z_generators(), Letter::Z)] {
        if ops.is_empty() {
            return Err(Error::Inapplicable {
                strategy: StrategyKind::CssXz.name().into(),
                reason: format!("no {}-type generators", l.as_char()),
            });
        }
        tests.push(TestOperator::new(ops, uniform_letter(code.n(), l))?);
    }
    Ok(tests)
}

/// All X-type generators measured in X, all Z-type in Z, each half the time.
pub fn strategy_css_xz(code: &CssCode) -> Result<VerificationStrategy> {
    VerificationStrategy::uniform(StrategyKind::CssXz.name(), code.stabilizer_code(), css_tests(code)?)
}

/// Adds a third test measuring every qubit in Y for dual-containing codes.
///
/// Its required operators are the products `X^c Z^c` over the shared rows
/// `c`. Each is a product of two stabilizers, so it stabilizes the code, and
/// it equals `±Y^c`; the sign is `(-1)^{|c|/2}` and is carried exactly.
pub fn strategy_dc_xyz(code: &CssCode) -> Result<VerificationStrategy> {
    if !code.is_dual_containing() {
        return Err(Error::Inapplicable {
            strategy: StrategyKind::DcXyz.name().into(),
            reason: "h_x and h_z differ".into(),
        });
    }
    let mut tests = css_tests(code)?;
    let ys = code
        .h_x()
        .iter()
        .map(|c| PauliOperator::x_type(c).multiply(&PauliOperator::z_type(c)))
        .collect::<Result<Vec<_>, _>>()?;
    tests.push(TestOperator::new(ys, uniform_letter(code.n(), Letter::Y))?);
    VerificationStrategy::uniform(StrategyKind::DcXyz.name(), code.stabilizer_code(), tests)
}

/// The projector onto the code space as a single entangled test.
pub fn strategy_global(code: &StabilizerCode, limits: &Limits) -> Result<VerificationStrategy> {
    if code.n() > limits.dense_cap {
        return Err(Error::DenseCap { n: code.n(), cap: limits.dense_cap });
    }
    let required =
        if code.r() == 0 { vec![PauliOperator::identity(code.n())] } else { code.generators().generators().to_vec() };
    let test = TestOperator::new(required, Setting::Entangled)?;
    VerificationStrategy::uniform(StrategyKind::Global.name(), code.clone(), vec![test])
}

/// Builds `kind` for `code`, or explains why it does not apply.
pub fn build(kind: StrategyKind, code: &Code, limits: &Limits) -> Result<VerificationStrategy> {
    let not_css =
        || Error::Inapplicable { strategy: kind.name().into(), reason: "the code spec has no CSS structure".into() };
    match kind {
        StrategyKind::I => strategy_i(code.stabilizer(), limits),
        StrategyKind::II => strategy_ii(code.stabilizer()),
        StrategyKind::Coloring => crate::graphlift::coloring_strategy_for(code),
        StrategyKind::CssXz => strategy_css_xz(code.css().ok_or_else(not_css)?),
        StrategyKind::DcXyz => strategy_dc_xyz(code.css().ok_or_else(not_css)?),
        StrategyKind::Global => strategy_global(code.stabilizer(), limits),
    }
}

/// Strategies that apply to `code` under `limits`, in canonical order.
pub fn applicable(code: &Code, limits: &Limits) -> Vec<StrategyKind> {
    StrategyKind::ALL
        .into_iter()
        .filter(|&k| match k {
            StrategyKind::I => code.stabilizer().r() >= 1 && code.stabilizer().r() <= limits.enumeration_cap,
            StrategyKind::II => code.stabilizer().r() >= 1,
            StrategyKind::Coloring => matches!(code.kind(), CodeKind::Graph(_)) || code.graph_form().is_some(),
            StrategyKind::CssXz => code.css().is_some_and(|c| !c.h_x().is_empty() && !c.h_z().is_empty()),
            StrategyKind::DcXyz => code.css().is_some_and(|c| c.is_dual_containing() && !c.h_x().is_empty()),
            StrategyKind::Global => code.n() <= limits.dense_cap,
        })
        .collect()
}

/// `Σ w · tr[M σ]` for a density matrix `σ`, checked to be a state.
pub fn pass_probability(s: &VerificationStrategy, sigma: &CMatrix, limits: &Limits) -> Result<f64> {
    check_state(s.n(), sigma, limits)?;
    let p: f64 = s.weights_f64().iter().zip(s.test_probabilities(sigma)).map(|(w, p)| w * p).sum();
    clip_probability(p)
}

pub(crate) fn clip_probability(p: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::NotAState(format!("pass probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Trace one, Hermitian and positive semidefinite, all to `1e-9`.
pub fn check_state(n: usize, sigma: &CMatrix, limits: &Limits) -> Result<()> {
    if n > limits.dense_cap {
        return Err(Error::DenseCap { n, cap: limits.dense_cap });
    }
    let dim = 1usize << n;
    if sigma.nrows() != dim || sigma.ncols() != dim {
        return Err(Error::Dimension { expected: dim, found: sigma.nrows() });
    }
    let tr = dense::trace(sigma);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    let herm = dense::max_abs_diff(sigma, &sigma.adjoint());
    if herm > 1e-9 {
        return Err(Error::NotAState(format!("not Hermitian (deviation {herm:e})")));
    }
    let shifted = sigma + CMatrix::identity(dim, dim) * Complex64::new(1e-9, 0.0);
    if nalgebra::Cholesky::new(shifted).is_none() {
        return Err(Error::NotAState("not positive semidefinite".into()));
    }
    Ok(())
}
