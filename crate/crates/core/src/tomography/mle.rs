use nalgebra::SVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize, BfgsOutcome, TomographyError};
use crate::counting::{design_singular_values, joint_projector, CountRecord};
use crate::qstate::{Mat4, TwoQubitState};
use crate::scalar::{C, Real};

/// Real parameters of the lower-triangular factor: 4 diagonal, 6 complex off-diagonal.
pub const N_PARAMS: usize = 16;

const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MleConfig {
    pub max_iterations: usize,
    /// Relative change of the negative log-likelihood treated as converged.
    pub convergence_tol: f64,
    /// Random initializations in addition to the identity-proportional start.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            convergence_tol: 1e-10,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

impl MleConfig {
    fn validate(&self) -> Result<(), TomographyError> {
        if !(self.convergence_tol > 0.0) || self.max_iterations < 1 {
            return Err(TomographyError::Config(
                "need convergence_tol > 0 and max_iterations >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a multistart fit.
#[derive(Debug, Clone)]
pub struct MleFit<T: Real> {
    pub state: TwoQubitState<T>,
    /// Profiled Poisson negative log-likelihood (up to a data-only constant).
    pub neg_log_likelihood: T,
    /// Objective reached by each start, identity start first.
    pub start_values: Vec<T>,
    pub best_start: usize,
    pub iterations: usize,
}

/// Lower-triangular factor from the parameter vector.
fn factor<T: Real>(x: &SVector<T, N_PARAMS>) -> Mat4<T> {
    let mut t = Mat4::zeros();
    for i in 0..4 {
        t[(i, i)] = C::new(x[i], T::zero());
    }
    for (k, &(r, col)) in OFF_DIAGONAL.iter().enumerate() {
        t[(r, col)] = C::new(x[4 + 2 * k], x[5 + 2 * k]);
    }
    t
}

/// `ρ = T†T / Tr(T†T)`.
pub fn factor_to_state<T: Real>(
    x: &SVector<T, N_PARAMS>,
) -> Result<TwoQubitState<T>, TomographyError> {
    let t = factor(x);
    Ok(TwoQubitState::from_positive(t.adjoint() * t)?)
}

struct Problem<T: Real> {
    projectors: Vec<Mat4<T>>,
    counts: Vec<T>,
    total: T,
}

impl<T: Real> Problem<T> {
    fn new(records: &[CountRecord]) -> Self {
        let projectors = records
            .iter()
            .map(|r| joint_projector::<T>(&r.setting))
            .collect();
        // each setting may have its own integration time; normalize to rates
        let t_ref = records[0].integration_time_s;
        let counts: Vec<T> = records
            .iter()
            .map(|r| T::lit(r.net() as f64 * t_ref / r.integration_time_s))
            .collect();
        let total = counts.iter().fold(T::zero(), |a, &b| a + b);
        Self { projectors, counts, total }
    }

    /// Flux-profiled Poisson NLL: `N ln Σp − Σ n ln p`, scale invariant in ρ.
    fn nll(&self, rho: &Mat4<T>) -> T {
        let probs: Vec<T> = self.projectors.iter().map(|p| (p * rho).trace().re).collect();
        self.nll_from_probs(&probs)
    }

    fn nll_from_probs(&self, probs: &[T]) -> T {
        let sum = probs.iter().fold(T::zero(), |a, &b| a + b);
        let mut v = self.total * sum.ln();
        for (&n, &p) in self.counts.iter().zip(probs) {
            if n > T::zero() {
                if !(p > T::zero()) {
                    return T::max_value().unwrap_or_else(T::one);
                }
                v -= n * p.ln();
            }
        }
        v
    }

    fn value_and_gradient(&self, x: &SVector<T, N_PARAMS>) -> (T, SVector<T, N_PARAMS>) {
        let t = factor(x);
        let rho = t.adjoint() * t;
        let probs: Vec<T> = self.projectors.iter().map(|p| (p * rho).trace().re).collect();
        let sum = probs.iter().fold(T::zero(), |a, &b| a + b);
        let mut value = self.nll_from_probs(&probs);
        if !(value < T::max_value().unwrap_or_else(T::one)) || !(sum > T::zero()) {
            return (T::max_value().unwrap_or_else(T::one), SVector::zeros());
        }
        // d/d(conj T) Tr(P T†T) = T P
        let mut w = Mat4::<T>::zeros();
        for ((p, &n), &pk) in self.projectors.iter().zip(&self.counts).zip(&probs) {
            let mut coeff = self.total / sum;
            if n > T::zero() {
                coeff -= n / pk;
            }
            w += p * C::new(coeff, T::zero());
        }
        let g_mat = t * w;
        let two = T::lit(2.0);
        let mut grad = SVector::<T, N_PARAMS>::zeros();
        for i in 0..4 {
            grad[i] = two * g_mat[(i, i)].re;
        }
        for (k, &(r, col)) in OFF_DIAGONAL.iter().enumerate() {
            grad[4 + 2 * k] = two * g_mat[(r, col)].re;
            grad[5 + 2 * k] = two * g_mat[(r, col)].im;
        }
        // pin the overall scale, which the likelihood does not see
        let weight = self.total.max(T::one());
        let dev = x.norm_squared() - T::one();
        value += weight * dev * dev;
        grad += x * (T::lit(4.0) * weight * dev);
        (value, grad)
    }
}

fn check_inputs(records: &[CountRecord], cfg: &MleConfig) -> Result<(), TomographyError> {
    cfg.validate()?;
    if records.len() < 16 {
        return Err(TomographyError::TooFewRecords(records.len()));
    }
    if records.iter().any(|r| !(r.integration_time_s > 0.0)) {
        return Err(TomographyError::Config("integration time must be > 0".into()));
    }
    if records.iter().all(|r| r.net() == 0) {
        return Err(TomographyError::InsufficientData);
    }
    let settings: Vec<_> = records.iter().map(|r| r.setting).collect();
    let sv = design_singular_values::<f64>(&settings);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(cond < 1e8) {
        return Err(TomographyError::DesignSingular(cond));
    }
    Ok(())
}

/// Profiled negative log-likelihood of the accidental-subtracted counts under `rho`.
pub fn neg_log_likelihood<T: Real>(records: &[CountRecord], rho: &TwoQubitState<T>) -> T {
    Problem::new(records).nll(rho.matrix())
}

fn identity_start<T: Real>() -> SVector<T, N_PARAMS> {
    let mut x = SVector::zeros();
    for i in 0..4 {
        x[i] = T::lit(0.5);
    }
    x
}

fn random_start<T: Real>(seed: u64, index: usize) -> SVector<T, N_PARAMS> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let x = SVector::<T, N_PARAMS>::from_fn(|_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        T::lit(v)
    });
    let n = x.norm();
    x / n
}

/// Multistart maximum-likelihood fit; the best start wins, ties to the lowest index.
pub fn fit_state<T: Real>(
    records: &[CountRecord],
    cfg: &MleConfig,
) -> Result<MleFit<T>, TomographyError> {
    check_inputs(records, cfg)?;
    let problem = Problem::<T>::new(records);
    let tol = T::lit(cfg.convergence_tol);
    let starts: Vec<SVector<T, N_PARAMS>> = std::iter::once(identity_start())
        .chain((0..cfg.restarts).map(|i| random_start(cfg.seed, i)))
        .collect();
    let outcomes: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            let first = minimize(|x| problem.value_and_gradient(x), *x0, cfg.max_iterations, tol);
            // a vanishing row of T is a stationary point; reinflate the diagonal and descend again
            let mut kicked = first.x;
            for i in 0..4 {
                kicked[i] += T::lit(0.2);
            }
            kicked /= kicked.norm();
            let mut second = minimize(|x| problem.value_and_gradient(x), kicked, cfg.max_iterations, tol);
            second.iterations += first.iterations;
            if second.value <= first.value {
                second
            } else {
                BfgsOutcome { iterations: second.iterations, ..first }
            }
        })
        .collect();

    let scored: Vec<(T, &SVector<T, N_PARAMS>)> = outcomes
        .iter()
        .map(|o| (problem.nll(&{
            let t = factor(&o.x);
            t.adjoint() * t
        }), &o.x))
        .collect();
    let mut best = 0;
    for (i, (v, _)) in scored.iter().enumerate() {
        if *v < scored[best].0 {
            best = i;
        }
    }
    let state = factor_to_state(scored[best].1)?;
    Ok(MleFit {
        neg_log_likelihood: problem.nll(state.matrix()),
        state,
        start_values: scored.iter().map(|(v, _)| *v).collect(),
        best_start: best,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
    })
}

/// Maximum-likelihood density matrix from accidental-subtracted counts.
pub fn reconstruct_state<T: Real>(
    records: &[CountRecord],
    cfg: &MleConfig,
) -> Result<TwoQubitState<T>, TomographyError> {
    fit_state(records, cfg).map(|f| f.state)
}
