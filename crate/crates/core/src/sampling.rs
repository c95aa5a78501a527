//! Seeded random generators, group elements and closed paths for tests,
//! benchmarks and the verification suite.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::phase::SympPath;
use crate::sp4::Sp4Generator;
use crate::symplectic::{exp_map, exp_with_derivative, LieAlgElement, SympMatrix};

fn uniform_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    scale: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale))
}

fn uniform_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.random_range(-scale..=scale);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn uniform_sym2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<f64> {
    let (x, y, z) = (
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    );
    Matrix2::new(x, y, y, z)
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "scale must be positive, got {scale}"
        )));
    }
    Ok(())
}

/// A symmetric `2n × 2n` matrix with entries uniform in `[−scale, scale]`.
pub fn random_lie<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Result<LieAlgElement> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    check_scale(scale)?;
    LieAlgElement::new(uniform_symmetric(rng, 2 * n, scale))
}

/// `exp(Ω L)` for a [`random_lie`] generator.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Result<SympMatrix> {
    exp_map(&random_lie(rng, n, scale)?)
}

/// Blocks `a`, `b`, `c` with entries uniform in `[−1, 1]`, `a` and `c` symmetric.
pub fn random_sp4_generator<R: Rng + ?Sized>(rng: &mut R) -> Sp4Generator {
    let a = uniform_sym2(rng);
    let b = Matrix2::from_fn(|_, _| rng.random_range(-1.0..=1.0));
    let c = uniform_sym2(rng);
    Sp4Generator::new(a, b, c).expect("symmetric blocks")
}

/// A generator with `a = c = 0`, whose two eigenvalues coincide.
pub fn degenerate_sp4_generator<R: Rng + ?Sized>(rng: &mut R) -> Sp4Generator {
    let b = Matrix2::from_fn(|_, _| rng.random_range(-1.0..=1.0));
    Sp4Generator::new(Matrix2::zeros(), b, Matrix2::zeros()).expect("zero blocks are symmetric")
}

/// `c₀ + c₁ cos 2πt + c₂ sin 2πt` and its `t`-derivative.
#[derive(Clone)]
struct Fourier {
    c: [DMatrix<f64>; 3],
}

impl Fourier {
    fn value(&self, t: f64) -> DMatrix<f64> {
        let (s, c) = (TAU * t).sin_cos();
        &self.c[0] + &self.c[1] * c + &self.c[2] * s
    }

    fn derivative(&self, t: f64) -> DMatrix<f64> {
        let (s, c) = (TAU * t).sin_cos();
        (&self.c[2] * c - &self.c[1] * s) * TAU
    }
}

/// The closed loop `t ↦ exp(Ω L(t))` where `L(t) = L₀ + L₁ cos 2πt + L₂ sin 2πt`
/// has random symmetric coefficients of size `scale`.
pub fn random_loop<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Result<SympPath> {
    let coeffs = [
        random_lie(rng, n, scale)?.generator(),
        random_lie(rng, n, scale)?.generator(),
        random_lie(rng, n, scale)?.generator(),
    ];
    let x = Fourier { c: coeffs };
    let y = x.clone();
    SympPath::with_tangent(
        n,
        move |t| x.value(t).exp(),
        move |t| exp_with_derivative(&y.value(t), &y.derivative(t)).1,
        true,
    )
}

/// A closed path `[[A, 0], [C, A⁻ᵀ]]` with `A(t) = exp X(t)` for a general
/// real `X(t)` and `C(t) = G(t) A(t)` for a symmetric `G(t)`. Setting
/// `with_c = false` gives `C ≡ 0`.
pub fn random_b_zero_loop<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    scale: f64,
    with_c: bool,
) -> Result<SympPath> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    check_scale(scale)?;
    let x = Fourier {
        c: [
            uniform_matrix(rng, n, n, scale),
            uniform_matrix(rng, n, n, scale),
            uniform_matrix(rng, n, n, scale),
        ],
    };
    let g = if with_c {
        Fourier {
            c: [
                uniform_symmetric(rng, n, scale),
                uniform_symmetric(rng, n, scale),
                uniform_symmetric(rng, n, scale),
            ],
        }
    } else {
        Fourier {
            c: [
                DMatrix::zeros(n, n),
                DMatrix::zeros(n, n),
                DMatrix::zeros(n, n),
            ],
        }
    };
    let (x2, g2) = (x.clone(), g.clone());
    let assemble = move |a: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((n, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(d);
        m
    };
    SympPath::with_tangent(
        n,
        move |t| {
            let a = x.value(t).exp();
            let d = (-x.value(t).transpose()).exp();
            let c = g.value(t) * &a;
            assemble(&a, &c, &d)
        },
        move |t| {
            let xv = x2.value(t);
            let dx = x2.derivative(t);
            let (a, da) = exp_with_derivative(&xv, &dx);
            let (_, dd) = exp_with_derivative(&(-xv.transpose()), &(-dx.transpose()));
            let dc = g2.derivative(t) * &a + g2.value(t) * da.clone();
            assemble(&da, &dc, &dd)
        },
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{max_abs, symplectic_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let l = random_lie(&mut rng, 3, 0.5).unwrap();
            assert_eq!(l.matrix(), &l.matrix().transpose());
            assert!(l.matrix().amax() <= 0.5);
            let m = random_symplectic(&mut rng, 2, 0.5).unwrap();
            assert!(m.residual() <= 1e-10);
            let g = degenerate_sp4_generator(&mut rng);
            assert_eq!(g.a(), &Matrix2::zeros());
        }
        assert!(random_lie(&mut rng, 0, 1.0).is_err());
        assert!(random_lie(&mut rng, 1, -1.0).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = random_sp4_generator(&mut ChaCha8Rng::seed_from_u64(3));
        let b = random_sp4_generator(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn b_zero_loop_shape_and_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let path = random_b_zero_loop(&mut rng, 2, 0.4, true).unwrap();
        assert!(path.is_closed());
        let h = 1e-6;
        for t in [0.0, 0.2, 0.65] {
            let m = path.matrix_at(t);
            assert!(m.view((0, 2), (2, 2)).amax() == 0.0);
            assert!(symplectic_residual(&m).unwrap() <= 1e-12);
            let fd = (path.matrix_at(t + h) - path.matrix_at(t - h)) / (2.0 * h);
            assert!(max_abs(&(fd - path.tangent(t))) <= 1e-7);
        }
    }

    #[test]
    fn loop_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = random_loop(&mut rng, 2, 0.3).unwrap();
        let h = 1e-6;
        for t in [0.1, 0.5, 0.93] {
            let fd = (path.matrix_at(t + h) - path.matrix_at(t - h)) / (2.0 * h);
            assert!(max_abs(&(fd - path.tangent(t))) <= 1e-7);
        }
    }
}
