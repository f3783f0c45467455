use nalgebra::SVector;

use super::{
    bell_basis_ket, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, is_finite, kron,
    pauli, trace4, Ket4, Mat4, QstateError, HERMITIAN_TOL, PSD_FLOOR,
};
use crate::scalar::{cr, Real, C};

/// Two-qubit polarization density matrix (signal ⊗ idler).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState<T: Real> {
    matrix: Mat4<T>,
}

impl<T: Real> TwoQubitState<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Mat4<T>) -> Result<Self, QstateError> {
        if !is_finite(&matrix) {
            return Err(QstateError::NonFinite);
        }
        let herm = hermiticity_defect(&matrix);
        if herm > T::tol(HERMITIAN_TOL).as_f64() {
            return Err(QstateError::NotHermitian(herm));
        }
        let tr = trace4(&matrix);
        if (tr.re - T::one()).abs() > T::tol(HERMITIAN_TOL) || tr.im.abs() > T::tol(HERMITIAN_TOL) {
            return Err(QstateError::NotUnitTrace(tr.re.as_f64()));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -T::tol(-PSD_FLOOR) {
            return Err(QstateError::NotPositive(min.as_f64()));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes and trace-normalizes a positive operator, then validates it.
    pub fn from_positive(matrix: Mat4<T>) -> Result<Self, QstateError> {
        let herm = (matrix + matrix.adjoint()) * cr(T::lit(0.5));
        let tr = trace4(&herm).re;
        if !(tr > T::zero()) {
            return Err(QstateError::NotUnitTrace(tr.as_f64()));
        }
        Self::new(herm * cr(T::one() / tr))
    }

    /// Projector onto a (not necessarily normalized) ket.
    pub fn pure(ket: &Ket4<T>) -> Result<Self, QstateError> {
        Self::from_positive(ket * ket.adjoint())
    }

    /// Product basis projector, `index` in `HH, HV, VH, VV` order.
    pub fn basis(index: usize) -> Self {
        let mut m = Mat4::zeros();
        m[(index, index)] = cr(T::one());
        Self { matrix: m }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat4::identity() * cr(T::lit(0.25)),
        }
    }

    /// Werner-type mixture `(1 - w)ρ + w I/4`.
    pub fn with_white_noise(&self, weight: T) -> Self {
        let mixed = Self::maximally_mixed();
        self.mix(&mixed, T::one() - weight)
    }

    /// Convex combination `αρ + (1-α)σ`.
    pub fn mix(&self, other: &Self, alpha: T) -> Self {
        Self {
            matrix: self.matrix * cr(alpha) + other.matrix * cr(T::one() - alpha),
        }
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat4<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        trace4(&self.matrix).re
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> T {
        trace4(&(self.matrix * self.matrix)).re
    }

    pub fn eigenvalues(&self) -> SVector<T, 4> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Tr(O ρ).
    pub fn expectation(&self, op: &Mat4<T>) -> C<T> {
        trace4(&(op * self.matrix))
    }

    /// Half the trace norm of `ρ - σ`.
    pub fn trace_distance(&self, other: &Self) -> T {
        let ev = hermitian_eigenvalues(&(self.matrix - other.matrix));
        ev.iter().fold(T::zero(), |acc, &x| acc + x.abs()) * T::lit(0.5)
    }

    /// Wootters concurrence.
    pub fn concurrence(&self) -> T {
        let yy = kron(&pauli::<T>(2), &pauli::<T>(2));
        let tilde = yy * self.matrix.conjugate() * yy;
        let root = psd_sqrt(&self.matrix);
        let r = root * tilde * root;
        let mut lambdas: Vec<T> = hermitian_eigenvalues(&r)
            .iter()
            .map(|&x| if x > T::zero() { x.sqrt() } else { T::zero() })
            .collect();
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
        if c > T::zero() {
            c
        } else {
            T::zero()
        }
    }

    /// Matrix elements `⟨B_m|ρ|B_n⟩` in the Bell-type basis `(I⊗σ_m)|ψ∘⟩`.
    pub fn bell_basis_matrix(&self) -> Mat4<T> {
        let kets: Vec<Ket4<T>> = (0..4).map(bell_basis_ket::<T>).collect();
        Mat4::from_fn(|m, n| (kets[m].adjoint() * self.matrix * kets[n])[(0, 0)])
    }
}

fn psd_sqrt<T: Real>(m: &Mat4<T>) -> Mat4<T> {
    let (values, vectors) = hermitian_eigen(m);
    let roots = values.map(|x| cr(if x > T::zero() { x.sqrt() } else { T::zero() }));
    vectors * Mat4::from_diagonal(&roots) * vectors.adjoint()
}

/// |ψ∘⟩⟨ψ∘| with |ψ∘⟩ = (|HH⟩ + |VV⟩)/√2.
pub fn bell_state<T: Real>() -> TwoQubitState<T> {
    let ket = bell_basis_ket::<T>(0);
    TwoQubitState {
        matrix: ket * ket.adjoint(),
    }
}

/// Overlap fidelity `⟨ψ|ρ|ψ⟩` against a pure target, clamped to [0, 1].
pub fn state_fidelity<T: Real>(
    rho: &TwoQubitState<T>,
    target: &TwoQubitState<T>,
) -> Result<T, QstateError> {
    let purity = target.purity();
    if purity < T::one() - T::tol(1e-9) {
        return Err(QstateError::TargetNotPure(purity.as_f64()));
    }
    let f = trace4(&(rho.matrix * target.matrix)).re;
    Ok(f.max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::max_abs_diff;

    #[test]
    fn bell_state_entries() {
        let rho = bell_state::<f64>();
        for r in 0..4 {
            for col in 0..4 {
                let expect = if (r == 0 || r == 3) && (col == 0 || col == 3) { 0.5 } else { 0.0 };
                assert!((rho.matrix()[(r, col)].re - expect).abs() < 1e-15);
                assert_eq!(rho.matrix()[(r, col)].im, 0.0);
            }
        }
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_concurrence_is_one() {
        let c = bell_state::<f64>().concurrence();
        assert!((c - 1.0).abs() < 1e-7, "{c}");
        assert!(TwoQubitState::<f64>::maximally_mixed().concurrence() < 1e-12);
        assert!(TwoQubitState::<f64>::basis(0).concurrence() < 1e-7);
    }

    #[test]
    fn fidelity_examples() {
        let bell = bell_state::<f64>();
        let f = |rho: &TwoQubitState<f64>| state_fidelity(rho, &bell).unwrap();
        assert!((f(&bell) - 1.0).abs() < 1e-15);
        assert!((f(&TwoQubitState::maximally_mixed()) - 0.25).abs() < 1e-15);
        assert!((f(&TwoQubitState::basis(0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_target_is_rejected() {
        let mixed = TwoQubitState::<f64>::maximally_mixed();
        assert!(matches!(
            state_fidelity(&bell_state(), &mixed),
            Err(QstateError::TargetNotPure(_))
        ));
    }

    #[test]
    fn validation_errors() {
        let mut m = *bell_state::<f64>().matrix();
        m[(0, 3)] = C::new(0.5, 0.1);
        assert!(matches!(TwoQubitState::new(m), Err(QstateError::NotHermitian(_))));
        let m = Mat4::<f64>::identity() * cr(0.3);
        assert!(matches!(TwoQubitState::new(m), Err(QstateError::NotUnitTrace(_))));
        let m = Mat4::<f64>::from_diagonal(&nalgebra::Vector4::new(cr(0.6), cr(0.6), cr(-0.1), cr(-0.1)));
        assert!(matches!(TwoQubitState::new(m), Err(QstateError::NotPositive(_))));
    }

    #[test]
    fn trace_distance_orthogonal_states() {
        let a = TwoQubitState::<f64>::basis(0);
        let b = TwoQubitState::<f64>::basis(3);
        assert!((a.trace_distance(&b) - 1.0).abs() < 1e-14);
        assert!(a.trace_distance(&a) < 1e-15);
    }

    #[test]
    fn bell_basis_matrix_of_bell_is_projector_on_first() {
        let m = bell_state::<f64>().bell_basis_matrix();
        let mut expect = Mat4::zeros();
        expect[(0, 0)] = cr(1.0);
        assert!(max_abs_diff(&m, &expect) < 1e-15);
    }

    #[test]
    fn f32_bell_state_validates() {
        let rho = bell_state::<f32>();
        assert!(TwoQubitState::new(*rho.matrix()).is_ok());
        assert!((rho.concurrence() - 1.0).abs() < 1e-3);
    }
}
