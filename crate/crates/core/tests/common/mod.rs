//! Random physical objects shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use fiberloop::qstate::{Mat2, Mat4, QubitChannel, TwoQubitState};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre-distributed density matrix of random rank 1 to 4.
pub fn random_state(rng: &mut impl Rng) -> TwoQubitState<f64> {
    let rank = rng.gen_range(1..=4);
    let g = Matrix4::from_fn(|_, col| if col < rank { gaussian(rng) } else { Complex64::new(0.0, 0.0) });
    TwoQubitState::from_positive(g * g.adjoint()).expect("Ginibre matrix is positive")
}

/// Random CPTP map with 1 to 4 Kraus operators, optionally followed by loss.
pub fn random_channel(rng: &mut impl Rng) -> QubitChannel<f64> {
    let count = rng.gen_range(1..=4);
    let g: Vec<Mat2<f64>> = (0..count).map(|_| Matrix2::from_fn(|_, _| gaussian(rng))).collect();
    let s = g.iter().fold(Mat2::<f64>::zeros(), |acc, k| acc + k.adjoint() * k);
    let eig = SymmetricEigen::new(s);
    let inv_sqrt = eig.eigenvalues.map(|v| Complex64::new(1.0 / v.sqrt(), 0.0));
    let root = eig.eigenvectors * Matrix2::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint();
    let eta: f64 = if rng.gen_bool(0.3) { rng.gen_range(0.05..1.0) } else { 1.0 };
    let kraus = g.iter().map(|k| k * root * Complex64::new(eta.sqrt(), 0.0)).collect();
    QubitChannel::new(kraus).expect("normalized Kraus set")
}

pub fn hermitian_defect(m: &Mat4<f64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn min_eigenvalue(m: &Mat4<f64>) -> f64 {
    fiberloop::qstate::hermitian_eigenvalues(m).min()
}
