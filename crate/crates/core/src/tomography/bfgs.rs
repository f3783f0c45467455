//! Dense BFGS with Armijo backtracking, sized for the 16-parameter fits here.

use nalgebra::{SMatrix, SVector};

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct BfgsOutcome<T: Real, const N: usize> {
    pub x: SVector<T, N>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f`, which returns the value and gradient at a point.
///
/// Stops when the relative decrease stays below `rel_tol` for three
/// consecutive iterations, when the gradient vanishes, or after `max_iter`.
pub fn minimize<T: Real, const N: usize, F>(
    mut f: F,
    x0: SVector<T, N>,
    max_iter: usize,
    rel_tol: T,
) -> BfgsOutcome<T, N>
where
    F: FnMut(&SVector<T, N>) -> (T, SVector<T, N>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut h = SMatrix::<T, N, N>::identity();
    let mut fresh = true;
    let mut quiet = 0;
    let c1 = T::lit(1e-4);
    let half = T::lit(0.5);

    for iter in 0..max_iter {
        if g.norm() <= T::default_epsilon() * (T::one() + fx.abs()) {
            return BfgsOutcome { x, value: fx, iterations: iter, converged: true };
        }
        let mut dir = -(h * g);
        let mut slope = g.dot(&dir);
        if slope >= T::zero() {
            h = SMatrix::identity();
            fresh = true;
            dir = -g;
            slope = g.dot(&dir);
        }

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial = x + dir * step;
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + c1 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= half;
        }
        let Some((xn, fxn, gn)) = accepted else {
            if fresh {
                return BfgsOutcome { x, value: fx, iterations: iter, converged: true };
            }
            h = SMatrix::identity();
            fresh = true;
            continue;
        };

        let s = xn - x;
        let y = gn - g;
        let sy = s.dot(&y);
        if sy > T::default_epsilon() * s.norm() * y.norm() {
            if fresh {
                h *= sy / y.norm_squared();
            }
            let rho = T::one() / sy;
            let id = SMatrix::<T, N, N>::identity();
            let left = id - s * y.transpose() * rho;
            h = left * h * left.transpose() + s * s.transpose() * rho;
            fresh = false;
        }

        let decrease = fx - fxn;
        let scale = fx.abs().max(T::one());
        x = xn;
        fx = fxn;
        g = gn;
        if decrease <= rel_tol * scale {
            quiet += 1;
            if quiet >= 3 {
                return BfgsOutcome { x, value: fx, iterations: iter + 1, converged: true };
            }
        } else {
            quiet = 0;
        }
    }
    BfgsOutcome { x, value: fx, iterations: max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn rosenbrock() {
        let f = |x: &Vector2<f64>| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = Vector2::new(-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a));
            (v, g)
        };
        let out = minimize(f, Vector2::new(-1.2, 1.0), 2000, 1e-14);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5, "{:?}", out.x);
    }

    #[test]
    fn quadratic_f32() {
        let f = |x: &Vector2<f32>| (x.norm_squared(), x * 2.0);
        let out = minimize(f, Vector2::new(3.0f32, -4.0), 100, 1e-7);
        assert!(out.value < 1e-6);
    }
}
