use super::{
    hermitian_eigenvalues, hermiticity_defect, is_finite, pauli, trace4, Mat2, Mat4, QstateError,
    QubitChannel, CHI_TRACE_TOL, HERMITIAN_TOL, PSD_FLOOR,
};
use crate::scalar::{cr, Real, C};

/// Process matrix in the `(I, σx, σy, σz)` basis: `ε(ρ) = Σ χ_mn σ_m ρ σ_n†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix<T: Real> {
    matrix: Mat4<T>,
}

impl<T: Real> ChiMatrix<T> {
    pub fn new(matrix: Mat4<T>) -> Result<Self, QstateError> {
        if !is_finite(&matrix) {
            return Err(QstateError::NonFinite);
        }
        let herm = hermiticity_defect(&matrix);
        if herm > T::tol(HERMITIAN_TOL).as_f64() {
            return Err(QstateError::NotHermitian(herm));
        }
        let tr = trace4(&matrix);
        if (tr.re - T::one()).abs() > T::tol(CHI_TRACE_TOL) {
            return Err(QstateError::NotUnitTrace(tr.re.as_f64()));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -T::tol(-PSD_FLOOR) {
            return Err(QstateError::NotPositive(min.as_f64()));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and scales to unit trace before validating.
    pub fn normalized(matrix: Mat4<T>) -> Result<Self, QstateError> {
        let herm = (matrix + matrix.adjoint()) * cr(T::lit(0.5));
        let tr = trace4(&herm).re;
        if !(tr > T::tol(1e-14)) {
            return Err(QstateError::DegenerateChannel);
        }
        Self::new(herm * cr(T::one() / tr))
    }

    /// The identity process, `diag(1, 0, 0, 0)`.
    pub fn identity() -> Self {
        let mut m = Mat4::zeros();
        m[(0, 0)] = cr(T::one());
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.matrix
    }

    pub fn diagonal(&self) -> [T; 4] {
        [0, 1, 2, 3].map(|i| self.matrix[(i, i)].re)
    }

    pub fn eigenvalues(&self) -> nalgebra::SVector<T, 4> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Σ χ_mn σ_m ρ σ_n†`.
    pub fn apply(&self, rho: &Mat2<T>) -> Mat2<T> {
        let sigmas: Vec<Mat2<T>> = (0..4).map(pauli::<T>).collect();
        let mut out = Mat2::zeros();
        for m in 0..4 {
            for n in 0..4 {
                let w = self.matrix[(m, n)];
                if w == C::new(T::zero(), T::zero()) {
                    continue;
                }
                out += sigmas[m] * rho * sigmas[n].adjoint() * w;
            }
        }
        out
    }
}

/// Pauli-basis χ of a Kraus set, without trace normalization.
pub fn channel_to_chi_unnormalized<T: Real>(ch: &QubitChannel<T>) -> Mat4<T> {
    let half = cr(T::lit(0.5));
    let sigmas: Vec<Mat2<T>> = (0..4).map(pauli::<T>).collect();
    let mut chi = Mat4::zeros();
    for k in ch.kraus_ops() {
        let coeffs: Vec<C<T>> = sigmas.iter().map(|s| (s * k).trace() * half).collect();
        for m in 0..4 {
            for n in 0..4 {
                chi[(m, n)] += coeffs[m] * coeffs[n].conj();
            }
        }
    }
    chi
}

/// χ of a channel, scaled to unit trace (lossy channels become post-selected processes).
pub fn channel_to_chi<T: Real>(ch: &QubitChannel<T>) -> Result<ChiMatrix<T>, QstateError> {
    ChiMatrix::normalized(channel_to_chi_unnormalized(ch))
}

/// `Tr(χ_ideal χ)`, clamped to [0, 1].
pub fn process_fidelity<T: Real>(chi: &ChiMatrix<T>, ideal: &ChiMatrix<T>) -> T {
    let f = trace4(&(ideal.matrix * chi.matrix)).re;
    f.max(T::zero()).min(T::one())
}
