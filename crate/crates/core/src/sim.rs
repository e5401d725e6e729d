//! Monte Carlo simulation of the verification protocol.
//!
//! Each copy picks a test by weight and passes with probability `tr[M σ]`;
//! only the binary outcome matters to the protocol, so outcomes are drawn
//! from that scalar instead of simulating per-qubit measurements.
//!
//! Copies are grouped in fixed chunks of [`CHUNK`]; chunk `c` (or run `c`
//! in an acceptance experiment) draws from its own ChaCha8 stream `c` under
//! the experiment seed, so results do not depend on how the work is split
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeFile, StabilizerCode};
use crate::dense::{self, CMatrix};
use crate::pauli::PauliOperator;
use crate::spectral;
use crate::strategy::{self, VerificationStrategy};
use crate::{Error, Limits, Result};

const MIXTURE_TOLERANCE: f64 = 1e-9;

/// Copies sharing one random stream.
pub const CHUNK: u64 = 4096;

/// How to prepare the (identical) copies handed to the verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Haar-random pure state inside the code space.
    InSubspaceRandom,
    /// Infidelity `epsilon` state with the largest pass probability.
    WorstCase {
        epsilon: f64,
    },
    /// A random code state with `pauli` applied.
    PauliError {
        pauli: String,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: StateSpec,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pure code state with Haar-random amplitudes: an isotropic Gaussian vector
/// projected onto the code space stays isotropic there.
fn random_code_vector(code: &StabilizerCode, rng: &mut ChaCha8Rng) -> Result<dense::CVector> {
    let dim = 1usize << code.n();
    for _ in 0..16 {
        let mut v = dense::gaussian_vector(dim, rng);
        dense::project_vector(code.generators().generators(), v.as_mut_slice());
        let norm = v.norm();
        if norm > 1e-9 {
            return Ok(v.unscale(norm));
        }
    }
    Err(Error::StrategyInvalid("empty code space".into()))
}

/// Density matrix for `spec`. `s` supplies the code and, for worst-case
/// states, the strategy whose passing probability is maximized.
pub fn prepare_state(spec: &StateSpec, s: &VerificationStrategy, seed: u64, limits: &Limits) -> Result<CMatrix> {
    let code = s.code();
    if code.n() > limits.dense_cap {
        return Err(Error::DenseCap { n: code.n(), cap: limits.dense_cap });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        StateSpec::InSubspaceRandom => Ok(dense::outer(&random_code_vector(code, &mut rng)?)),
        StateSpec::WorstCase { epsilon } => {
            Ok(dense::outer(&spectral::worst_case_state_seeded(s, *epsilon, seed, limits)?))
        }
        StateSpec::PauliError { pauli } => {
            let p: PauliOperator = pauli.parse()?;
            if p.n() != code.n() {
                return Err(Error::Dimension { expected: code.n(), found: p.n() });
            }
            let psi = random_code_vector(code, &mut rng)?;
            let mut out = dense::CVector::zeros(psi.len());
            dense::Monomial::new(&p).apply(psi.as_slice(), out.as_mut_slice());
            Ok(dense::outer(&out))
        }
        StateSpec::Mixture { components } => {
            if components.is_empty() {
                return Err(Error::Parameter("empty mixture".into()));
            }
            if components.iter().any(|c| c.weight.is_nan() || c.weight < 0.0) {
                return Err(Error::Parameter("mixture weights must be nonnegative".into()));
            }
            let total: f64 = components.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > MIXTURE_TOLERANCE {
                return Err(Error::Parameter(format!("mixture weights sum to {total}, not 1")));
            }
            let dim = 1usize << code.n();
            let mut sigma = CMatrix::zeros(dim, dim);
            for (i, c) in components.iter().enumerate() {
                let sub_seed = rng_for(seed, i as u64 + 1).random();
                sigma += prepare_state(&c.state, s, sub_seed, limits)? * num_complex::Complex64::new(c.weight, 0.0);
            }
            Ok(sigma)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolStats {
    pub trials: u64,
    pub passes: u64,
    pub empirical_rate: f64,
    /// `tr[Ω σ]`.
    pub predicted_rate: f64,
    /// `(empirical - predicted) / √(p(1-p)/trials)`; zero when both agree on
    /// a deterministic outcome.
    pub z_score: f64,
}

impl ProtocolStats {
    fn new(trials: u64, passes: u64, predicted: f64) -> Self {
        let empirical = passes as f64 / trials as f64;
        let se = (predicted * (1.0 - predicted) / trials as f64).sqrt();
        let diff = empirical - predicted;
        let z_score = if se > 0.0 {
            diff / se
        } else if diff.abs() < 1e-12 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self { trials, passes, empirical_rate: empirical, predicted_rate: predicted, z_score }
    }
}

/// Test selection by cumulative weight plus per-test pass probabilities.
struct Sampler {
    cumulative: Vec<f64>,
    pass: Vec<f64>,
}

impl Sampler {
    fn new(s: &VerificationStrategy, sigma: &CMatrix, limits: &Limits) -> Result<Self> {
        strategy::check_state(s.n(), sigma, limits)?;
        let pass =
            s.test_probabilities(sigma).into_iter().map(strategy::clip_probability).collect::<Result<Vec<_>>>()?;
        let mut acc = 0.0;
        let cumulative = s
            .weights_f64()
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { cumulative, pass })
    }

    fn predicted(&self, s: &VerificationStrategy) -> f64 {
        s.weights_f64().iter().zip(&self.pass).map(|(w, p)| w * p).sum()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> bool {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.pass.len() - 1);
        rng.random::<f64>() < self.pass[i]
    }
}

/// Runs `n_copies` independent copies of `sigma` through the strategy.
pub fn run_protocol(
    s: &VerificationStrategy,
    sigma: &CMatrix,
    n_copies: u64,
    seed: u64,
    limits: &Limits,
) -> Result<ProtocolStats> {
    if n_copies == 0 {
        return Err(Error::Parameter("n_copies must be at least 1".into()));
    }
    let sampler = Sampler::new(s, sigma, limits)?;
    let passes = (0..n_copies.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng_for(seed, chunk);
            let len = CHUNK.min(n_copies - chunk * CHUNK);
            (0..len).filter(|_| sampler.draw(&mut rng)).count() as u64
        })
        .sum();
    Ok(ProtocolStats::new(n_copies, passes, sampler.predicted(s)))
}

/// Copies until the first failed test, capped at `max_copies` (returned
/// unchanged when every copy passes).
pub fn copies_until_rejection(
    s: &VerificationStrategy,
    sigma: &CMatrix,
    runs: u64,
    max_copies: u64,
    seed: u64,
    limits: &Limits,
) -> Result<Vec<u64>> {
    let sampler = Sampler::new(s, sigma, limits)?;
    Ok((0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng_for(seed, run);
            (1..=max_copies).find(|_| !sampler.draw(&mut rng)).unwrap_or(max_copies)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceState {
    /// Worst-case state at the experiment's infidelity.
    WorstCase,
    /// Random code state.
    Good,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcceptanceOutcome {
    pub runs: u64,
    pub accepted: u64,
    pub frequency: f64,
    /// Copies per run from the sample-complexity bound.
    pub n_copies: u64,
    pub nu: f64,
    /// `(1 - νε)^N`, the exact acceptance probability of the worst-case state.
    pub predicted: f64,
    /// `δ + 3√(δ/runs)`.
    pub threshold: f64,
}

/// Each run hands `N` copies to the verifier and accepts iff all pass.
pub fn acceptance_experiment(
    s: &VerificationStrategy,
    state: AcceptanceState,
    epsilon: f64,
    delta: f64,
    n_runs: u64,
    seed: u64,
    limits: &Limits,
) -> Result<AcceptanceOutcome> {
    if n_runs == 0 {
        return Err(Error::Parameter("n_runs must be at least 1".into()));
    }
    let nu = spectral::spectral_gap(s, limits)?.gap;
    let n_copies = spectral::sample_complexity(nu, epsilon, delta)?.n_copies;
    let spec = match state {
        AcceptanceState::WorstCase => StateSpec::WorstCase { epsilon },
        AcceptanceState::Good => StateSpec::InSubspaceRandom,
    };
    let sigma = prepare_state(&spec, s, seed, limits)?;
    let sampler = Sampler::new(s, &sigma, limits)?;
    let accepted = (0..n_runs)
        .into_par_iter()
        .filter(|&run| {
            let mut rng = rng_for(seed, run);
            (0..n_copies).all(|_| sampler.draw(&mut rng))
        })
        .count() as u64;
    Ok(AcceptanceOutcome {
        runs: n_runs,
        accepted,
        frequency: accepted as f64 / n_runs as f64,
        n_copies,
        nu,
        predicted: sampler.predicted(s).powf(n_copies as f64),
        threshold: delta + 3.0 * (delta / n_runs as f64).sqrt(),
    })
}

/// Code given inline or as a path to a code file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSource {
    Path(String),
    Inline(CodeFile),
}

/// JSON experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSource,
    /// Builder name or path to a strategy JSON file.
    pub strategy: String,
    pub state: StateSpec,
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Prepares the configured state and runs the protocol on it.
pub fn run_experiment(
    s: &VerificationStrategy,
    state: &StateSpec,
    trials: u64,
    seed: u64,
    limits: &Limits,
) -> Result<ProtocolStats> {
    let sigma = prepare_state(state, s, seed, limits)?;
    run_protocol(s, &sigma, trials, seed, limits)
}
