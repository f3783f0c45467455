//! Two-qubit density matrices, single-qubit channels and the χ process matrix.
//!
//! Two-qubit matrices use the basis order `|HH⟩, |HV⟩, |VH⟩, |VV⟩` with the
//! signal photon as the first (most significant) factor and the idler second.
//! Single-qubit operators use `|H⟩, |V⟩`. The operator basis for χ is
//! `(I, σx, σy, σz)`.

mod channel;
mod chi;
mod json;
mod state;

pub use channel::{apply_channel_idler, ChannelOutput, QubitChannel};
pub use chi::{channel_to_chi, channel_to_chi_unnormalized, process_fidelity, ChiMatrix};
pub use json::MatrixJson;
pub use state::{bell_state, state_fidelity, TwoQubitState};

use nalgebra::{Matrix2, Matrix4, SVector, SymmetricEigen};
use thiserror::Error;

use crate::scalar::{c, cr, Real, C};

pub type Mat2<T> = Matrix2<C<T>>;
pub type Mat4<T> = Matrix4<C<T>>;
pub type Ket4<T> = SVector<C<T>, 4>;

pub const TWO_QUBIT_BASIS: [&str; 4] = ["HH", "HV", "VH", "VV"];
pub const PAULI_LABELS: [&str; 4] = ["I", "s1", "s2", "s3"];

/// Hermiticity and unit-trace tolerance for validated matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Lowest admissible eigenvalue for a positive semidefinite matrix.
pub const PSD_FLOOR: f64 = -1e-9;
/// Unit-trace tolerance for χ after normalization.
pub const CHI_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QstateError {
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0} instead of 1")]
    NotUnitTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("channel has no Kraus operators")]
    EmptyChannel,
    #[error("Kraus set is trace increasing (largest eigenvalue of ΣK†K is {0})")]
    TraceIncreasing(f64),
    #[error("channel annihilates the input (degenerate Kraus set)")]
    DegenerateChannel,
    #[error("target state is not pure (purity {0})")]
    TargetNotPure(f64),
    #[error("channel parameter {name} = {value} outside [0, 1]")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Pauli operator by index in the χ basis order `(I, σx, σy, σz)`.
pub fn pauli<T: Real>(k: usize) -> Mat2<T> {
    let z = cr(T::zero());
    match k {
        0 => Matrix2::new(c(1.0, 0.0), z, z, c(1.0, 0.0)),
        1 => Matrix2::new(z, c(1.0, 0.0), c(1.0, 0.0), z),
        2 => Matrix2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        3 => Matrix2::new(c(1.0, 0.0), z, z, c(-1.0, 0.0)),
        _ => panic!("Pauli index {k} out of range"),
    }
}

pub fn kron<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat4<T> {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

pub(crate) fn identity2<T: Real>() -> Mat2<T> {
    pauli(0)
}

pub(crate) fn max_abs<const D: usize>(
    m: &nalgebra::SMatrix<C<f64>, D, D>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff<T: Real, const D: usize>(
    a: &nalgebra::SMatrix<C<T>, D, D>,
    b: &nalgebra::SMatrix<C<T>, D, D>,
) -> f64 {
    let d = (a - b).map(|z| C::new(z.re.as_f64(), z.im.as_f64()));
    max_abs(&d)
}

pub(crate) fn hermiticity_defect<T: Real, const D: usize>(
    m: &nalgebra::SMatrix<C<T>, D, D>,
) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eigen<T: Real>(m: &Mat4<T>) -> (SVector<T, 4>, Mat4<T>) {
    let herm = (m + m.adjoint()) * cr(T::lit(0.5));
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = SVector::<T, 4>::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let vectors = Mat4::from_fn(|r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues<T: Real>(m: &Mat4<T>) -> SVector<T, 4> {
    hermitian_eigen(m).0
}

pub(crate) fn trace4<T: Real>(m: &Mat4<T>) -> C<T> {
    m.trace()
}

pub(crate) fn is_finite<T: Real, const D: usize>(m: &nalgebra::SMatrix<C<T>, D, D>) -> bool {
    m.iter().all(|z| z.re.as_f64().is_finite() && z.im.as_f64().is_finite())
}

/// Bell-type basis `(I⊗σ_m)|ψ∘⟩`, m = 0..3, with |ψ∘⟩ = (|HH⟩+|VV⟩)/√2.
pub fn bell_basis_ket<T: Real>(m: usize) -> Ket4<T> {
    let s = pauli::<T>(m);
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    // (I⊗σ)|ψ∘⟩ = Σ_i |i⟩ ⊗ σ|i⟩ / √2
    Ket4::from_fn(|idx, _| {
        let (i, a) = (idx / 2, idx % 2);
        s[(a, i)] * cr(h)
    })
}
