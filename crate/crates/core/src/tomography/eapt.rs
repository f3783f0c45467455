use nalgebra::{DMatrix, DVector};

use super::TomographyError;
use crate::qstate::{hermitian_eigen, kron, pauli, ChiMatrix, Mat2, Mat4, TwoQubitState};
use crate::scalar::{cr, Real, C};

/// χ of the idler channel from the joint (signal, processed idler) state, with
/// the input assumed to be |ψ∘⟩ = (|HH⟩+|VV⟩)/√2.
///
/// Since `(I⊗ε)|ψ∘⟩⟨ψ∘| = Σ χ_mn |B_m⟩⟨B_n|` with `|B_m⟩ = (I⊗σ_m)|ψ∘⟩`,
/// χ is the joint state written in that orthonormal basis.
pub fn reconstruct_chi_eapt<T: Real>(
    rho_joint: &TwoQubitState<T>,
) -> Result<ChiMatrix<T>, TomographyError> {
    let checked = TwoQubitState::new(*rho_joint.matrix())?;
    Ok(ChiMatrix::normalized(checked.bell_basis_matrix())?)
}

/// χ of the idler channel given a characterized (possibly mixed) input state.
///
/// Solves `ρ_out = Σ χ_mn (I⊗σ_m) ρ_in (I⊗σ_n)` by linear inversion, then
/// projects onto the positive cone and normalizes. The reference must have
/// full Schmidt rank for the system to be invertible.
pub fn reconstruct_chi_with_reference<T: Real>(
    rho_out: &TwoQubitState<T>,
    rho_in: &TwoQubitState<T>,
) -> Result<ChiMatrix<T>, TomographyError> {
    let lifted: Vec<Mat4<T>> = (0..4)
        .map(|m| kron(&Mat2::identity(), &pauli::<T>(m)))
        .collect();
    let a = DMatrix::<C<T>>::from_fn(16, 16, |row, col| {
        let (m, n) = (col / 4, col % 4);
        let term = lifted[m] * rho_in.matrix() * lifted[n].adjoint();
        term[(row / 4, row % 4)]
    });
    let b = DVector::<C<T>>::from_fn(16, |row, _| rho_out.matrix()[(row / 4, row % 4)]);

    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    let cond = if min > T::zero() { (max / min).as_f64() } else { f64::INFINITY };
    if !(cond < 1e6) {
        return Err(TomographyError::ReferenceSingular(cond));
    }
    let x = svd
        .solve(&b, T::default_epsilon())
        .map_err(|_| TomographyError::ReferenceSingular(cond))?;
    let chi = Mat4::<T>::from_fn(|m, n| x[m * 4 + n]);
    Ok(ChiMatrix::normalized(psd_projection(&chi))?)
}

/// Hermitian part with negative eigenvalues clipped to zero.
fn psd_projection<T: Real>(m: &Mat4<T>) -> Mat4<T> {
    let (values, vectors) = hermitian_eigen(m);
    let clipped = values.map(|v| cr(v.max(T::zero())));
    vectors * Mat4::from_diagonal(&clipped) * vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{
        apply_channel_idler, bell_state, channel_to_chi, max_abs_diff, QubitChannel,
    };

    #[test]
    fn untouched_bell_is_identity_process() {
        let chi = reconstruct_chi_eapt(&bell_state::<f64>()).unwrap();
        assert!(max_abs_diff(chi.matrix(), ChiMatrix::identity().matrix()) < 1e-15);
    }

    #[test]
    fn bit_flip_roundtrip() {
        let ch = QubitChannel::<f64>::bit_flip(0.25).unwrap();
        let out = apply_channel_idler(&bell_state(), &ch).unwrap().state;
        let chi = reconstruct_chi_eapt(&out).unwrap();
        assert!(max_abs_diff(chi.matrix(), channel_to_chi(&ch).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn phase_damping_roundtrip() {
        let ch = QubitChannel::<f64>::phase_damping(0.1).unwrap();
        let out = apply_channel_idler(&bell_state(), &ch).unwrap().state;
        let d = reconstruct_chi_eapt(&out).unwrap().diagonal();
        let p = (1.0 - 0.9f64.sqrt()) / 2.0;
        assert!((d[0] - (1.0 - p)).abs() < 1e-12 && (d[3] - p).abs() < 1e-12);
    }

    #[test]
    fn non_unital_channel_roundtrip() {
        let ch = QubitChannel::<f64>::amplitude_damping(0.3)
            .unwrap()
            .then(&QubitChannel::phase_flip(0.1).unwrap());
        let out = apply_channel_idler(&bell_state(), &ch).unwrap().state;
        let chi = reconstruct_chi_eapt(&out).unwrap();
        assert!(max_abs_diff(chi.matrix(), channel_to_chi(&ch).unwrap().matrix()) < 1e-8);
    }

    #[test]
    fn reference_inversion_matches_bell_formula() {
        let ch = QubitChannel::<f64>::amplitude_damping(0.2).unwrap();
        let out = apply_channel_idler(&bell_state(), &ch).unwrap().state;
        let a = reconstruct_chi_eapt(&out).unwrap();
        let b = reconstruct_chi_with_reference(&out, &bell_state()).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn reference_inversion_removes_source_noise() {
        let source = bell_state::<f64>().with_white_noise(0.05);
        let ch = QubitChannel::<f64>::phase_damping(0.08).unwrap();
        let out = apply_channel_idler(&source, &ch).unwrap().state;
        let chi = reconstruct_chi_with_reference(&out, &source).unwrap();
        assert!(max_abs_diff(chi.matrix(), channel_to_chi(&ch).unwrap().matrix()) < 1e-10);
    }

    #[test]
    fn product_reference_is_singular() {
        let out = crate::qstate::TwoQubitState::<f64>::basis(0);
        assert!(matches!(
            reconstruct_chi_with_reference(&out, &out),
            Err(TomographyError::ReferenceSingular(_))
        ));
    }
}
