use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::qstate::{kron, pauli, Mat2, Mat4};
use crate::scalar::{c, Real};

/// Waveplate angles of one polarization analyzer, radians.
///
/// Light traverses the half-wave plate, then the quarter-wave plate, then a
/// polarizer transmitting `|H⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSetting {
    pub hwp: f64,
    pub qwp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSetting {
    pub signal: AnalyzerSetting,
    pub idler: AnalyzerSetting,
}

/// Per-arm projections used by the standard setting list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
    D,
    /// `(|H⟩ - i|V⟩)/√2`
    R,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [Self::H, Self::V, Self::D, Self::R];

    pub fn setting(self) -> AnalyzerSetting {
        let (hwp, qwp) = match self {
            Self::H => (0.0, 0.0),
            Self::V => (FRAC_PI_4, 0.0),
            Self::D => (FRAC_PI_8, 0.0),
            Self::R => (0.0, FRAC_PI_4),
        };
        AnalyzerSetting { hwp, qwp }
    }
}

/// Half-wave plate, fast axis at `theta` from horizontal.
pub fn hwp<T: Real>(theta: f64) -> Mat2<T> {
    let (s, co) = (2.0 * theta).sin_cos();
    Matrix2::new(c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0))
}

/// Quarter-wave plate `R(-θ)·diag(1, i)·R(θ)`.
pub fn qwp<T: Real>(theta: f64) -> Mat2<T> {
    let (s, co) = theta.sin_cos();
    let off = s * co;
    Matrix2::new(
        c(co * co, s * s),
        c(off, -off),
        c(off, -off),
        c(s * s, co * co),
    )
}

/// `|ψ⟩⟨ψ|` where `|ψ⟩ = (QWP·HWP)†|H⟩` is the polarization reaching the detector.
pub fn projector<T: Real>(setting: &AnalyzerSetting) -> Mat2<T> {
    let jones = qwp::<T>(setting.qwp) * hwp::<T>(setting.hwp);
    let psi = jones.adjoint().column(0).into_owned();
    psi * psi.adjoint()
}

pub fn joint_projector<T: Real>(setting: &JointSetting) -> Mat4<T> {
    kron(&projector(&setting.signal), &projector(&setting.idler))
}

/// All pairs from `{H, V, D, R}`, signal-major; setting 0 is `(H, H)`.
pub fn standard_16_settings() -> Vec<JointSetting> {
    Polarization::ALL
        .iter()
        .flat_map(|&s| {
            Polarization::ALL.iter().map(move |&i| JointSetting {
                signal: s.setting(),
                idler: i.setting(),
            })
        })
        .collect()
}

/// Real matrix mapping the 16 Pauli-product coordinates `r_ab = Tr(ρ σ_a⊗σ_b)`
/// to ideal detection probabilities `Tr(P_k ρ)`.
pub fn design_matrix<T: Real>(settings: &[JointSetting]) -> DMatrix<T> {
    let basis: Vec<Mat4<T>> = (0..16)
        .map(|j| kron(&pauli::<T>(j / 4), &pauli::<T>(j % 4)))
        .collect();
    let quarter = T::lit(0.25);
    DMatrix::from_fn(settings.len(), 16, |k, j| {
        let p = joint_projector::<T>(&settings[k]);
        (p * basis[j]).trace().re * quarter
    })
}

/// Singular values of the design matrix, descending.
pub(crate) fn design_singular_values<T: Real>(settings: &[JointSetting]) -> Vec<T> {
    let svd = design_matrix::<T>(settings).svd(false, false);
    let mut sv: Vec<T> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::max_abs_diff;
    use crate::scalar::cr;

    fn ket_projector(a: (f64, f64), b: (f64, f64)) -> Mat2<f64> {
        let v = nalgebra::Vector2::new(c::<f64>(a.0, a.1), c(b.0, b.1));
        v * v.adjoint()
    }

    #[test]
    fn aligned_plates_project_on_h() {
        let p = projector::<f64>(&AnalyzerSetting { hwp: 0.0, qwp: 0.0 });
        assert!(max_abs_diff(&p, &ket_projector((1.0, 0.0), (0.0, 0.0))) < 1e-15);
    }

    #[test]
    fn hwp_at_22_5_gives_diagonal() {
        let p = projector::<f64>(&AnalyzerSetting { hwp: FRAC_PI_8, qwp: 0.0 });
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs_diff(&p, &ket_projector((h, 0.0), (h, 0.0))) < 1e-15);
    }

    #[test]
    fn qwp_at_45_gives_circular() {
        // oracle: step-by-step Jones multiplication of |H⟩ backwards through the plates.
        // QWP(45°)† |H⟩ = ((1-i)/2, (1+i)/2) ∝ (1, i)/√2; HWP(0) flips the V sign.
        let p = projector::<f64>(&AnalyzerSetting { hwp: 0.0, qwp: FRAC_PI_4 });
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs_diff(&p, &ket_projector((h, 0.0), (0.0, -h))) < 1e-15);
        // circular: equal populations, purely imaginary coherence
        assert!((p[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(p[(0, 1)].re.abs() < 1e-15 && (p[(0, 1)].im.abs() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn projectors_are_idempotent_hermitian_unit_trace() {
        for s in [0.0, 0.3, 1.1, -2.0] {
            for q in [0.0, 0.7, 2.5] {
                let p = projector::<f64>(&AnalyzerSetting { hwp: s, qwp: q });
                assert!(max_abs_diff(&(p * p), &p) < 1e-12);
                assert!(max_abs_diff(&p, &p.adjoint()) < 1e-12);
                assert!((p.trace() - cr(1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn standard_set_is_complete() {
        let settings = standard_16_settings();
        assert_eq!(settings.len(), 16);
        let hh = joint_projector::<f64>(&settings[0]);
        let mut expect = Mat4::zeros();
        expect[(0, 0)] = cr(1.0);
        assert!(max_abs_diff(&hh, &expect) < 1e-15);
        let sv = design_singular_values::<f64>(&settings);
        assert!(sv[15] > 1e-6, "rank-deficient");
        let cond = sv[0] / sv[15];
        assert!(cond < 100.0, "condition number {cond}");
        for s in &settings {
            let p = joint_projector::<f64>(s);
            assert!(max_abs_diff(&(p * p), &p) < 1e-12);
        }
    }

    #[test]
    fn incomplete_set_is_singular() {
        let mut settings = standard_16_settings();
        settings.truncate(8);
        let sv = design_singular_values::<f64>(&settings);
        assert!(sv.len() < 16 || sv[15] < 1e-9);
    }
}
