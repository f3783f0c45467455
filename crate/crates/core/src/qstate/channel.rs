use nalgebra::Matrix2;

use super::{identity2, is_finite, kron, pauli, Mat2, QstateError, TwoQubitState, HERMITIAN_TOL};
use crate::scalar::{cr, Real};

/// Completely positive, trace non-increasing single-qubit map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitChannel<T: Real> {
    kraus: Vec<Mat2<T>>,
}

fn check_prob(name: &'static str, p: f64) -> Result<(), QstateError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QstateError::InvalidParameter { name, value: p })
    }
}

impl<T: Real> QubitChannel<T> {
    pub fn new(kraus: Vec<Mat2<T>>) -> Result<Self, QstateError> {
        if kraus.is_empty() {
            return Err(QstateError::EmptyChannel);
        }
        if !kraus.iter().all(is_finite) {
            return Err(QstateError::NonFinite);
        }
        let ch = Self { kraus };
        let top = ch.completeness_max_eigenvalue();
        if top > T::one() + T::tol(HERMITIAN_TOL) {
            return Err(QstateError::TraceIncreasing(top.as_f64()));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        Self {
            kraus: vec![identity2()],
        }
    }

    /// Applies `σ_k` with probability `p`.
    pub fn pauli_flip(k: usize, p: T) -> Result<Self, QstateError> {
        check_prob("p", p.as_f64())?;
        Ok(Self {
            kraus: vec![
                identity2::<T>() * cr((T::one() - p).sqrt()),
                pauli::<T>(k) * cr(p.sqrt()),
            ],
        })
    }

    pub fn bit_flip(p: T) -> Result<Self, QstateError> {
        Self::pauli_flip(1, p)
    }

    pub fn bit_phase_flip(p: T) -> Result<Self, QstateError> {
        Self::pauli_flip(2, p)
    }

    pub fn phase_flip(p: T) -> Result<Self, QstateError> {
        Self::pauli_flip(3, p)
    }

    /// `ρ → (1-p)ρ + p I/2`.
    pub fn depolarizing(p: T) -> Result<Self, QstateError> {
        check_prob("p", p.as_f64())?;
        let quarter = (p / T::lit(4.0)).sqrt();
        let mut kraus = vec![identity2::<T>() * cr((T::one() - T::lit(0.75) * p).sqrt())];
        kraus.extend((1..4).map(|k| pauli::<T>(k) * cr(quarter)));
        Ok(Self { kraus })
    }

    /// Energy relaxation `|V⟩ → |H⟩` with probability `gamma`.
    pub fn amplitude_damping(gamma: T) -> Result<Self, QstateError> {
        check_prob("gamma", gamma.as_f64())?;
        let z = cr(T::zero());
        Ok(Self {
            kraus: vec![
                Matrix2::new(cr(T::one()), z, z, cr((T::one() - gamma).sqrt())),
                Matrix2::new(z, cr(gamma.sqrt()), z, z),
            ],
        })
    }

    /// Phase damping: coherences scale by `√(1-λ)`.
    pub fn phase_damping(lambda: T) -> Result<Self, QstateError> {
        check_prob("lambda", lambda.as_f64())?;
        let z = cr(T::zero());
        Ok(Self {
            kraus: vec![
                Matrix2::new(cr(T::one()), z, z, cr((T::one() - lambda).sqrt())),
                Matrix2::new(z, z, z, cr(lambda.sqrt())),
            ],
        })
    }

    /// Polarization-independent loss with transmission `eta`.
    pub fn loss(eta: T) -> Result<Self, QstateError> {
        check_prob("eta", eta.as_f64())?;
        Ok(Self {
            kraus: vec![identity2::<T>() * cr(eta.sqrt())],
        })
    }

    pub fn kraus_ops(&self) -> &[Mat2<T>] {
        &self.kraus
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> Mat2<T> {
        self.kraus
            .iter()
            .fold(Mat2::zeros(), |acc, k| acc + k.adjoint() * k)
    }

    fn completeness_max_eigenvalue(&self) -> T {
        let m = self.completeness();
        // Hermitian 2x2: closed-form eigenvalues
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = crate::scalar::modulus(m[(0, 1)]);
        let half = T::lit(0.5);
        (a + d) * half + (((a - d) * half).powi(2) + b * b).sqrt()
    }

    pub fn is_trace_preserving(&self) -> bool {
        let dev = super::max_abs_diff(&self.completeness(), &identity2());
        dev <= T::tol(1e-10).as_f64()
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Self {
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        Self { kraus }
    }

    /// Drops Kraus operators that are identically zero.
    pub fn pruned(mut self) -> Self {
        let zero_tol = T::tol(1e-300);
        if self.kraus.len() > 1 {
            self.kraus.retain(|k| k.iter().any(|z| crate::scalar::modulus(*z) > zero_tol));
            if self.kraus.is_empty() {
                self.kraus.push(Mat2::zeros());
            }
        }
        self
    }

    /// `ε(ρ)` for a single-qubit operator.
    pub fn apply(&self, rho: &Mat2<T>) -> Mat2<T> {
        self.kraus
            .iter()
            .fold(Mat2::zeros(), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// Channel acting on the idler: renormalized state plus the survival probability `Tr ρ'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutput<T: Real> {
    pub state: TwoQubitState<T>,
    pub survival: T,
}

/// `ρ' = Σ (I⊗K) ρ (I⊗K)†`, renormalized.
pub fn apply_channel_idler<T: Real>(
    state: &TwoQubitState<T>,
    ch: &QubitChannel<T>,
) -> Result<ChannelOutput<T>, QstateError> {
    let id = identity2::<T>();
    let rho = state.matrix();
    let out = ch.kraus_ops().iter().fold(super::Mat4::zeros(), |acc, k| {
        let big = kron(&id, k);
        acc + big * rho * big.adjoint()
    });
    let survival = out.trace().re;
    if !(survival > T::tol(1e-14)) {
        return Err(QstateError::DegenerateChannel);
    }
    let state = TwoQubitState::from_positive(out)?;
    Ok(ChannelOutput { state, survival })
}
