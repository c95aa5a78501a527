//! Closed-form exponential map `sp(4, ℝ) → Sp(4, ℝ)`.
//!
//! Everything here works in the interleaved ordering `(q₁, p₁, q₂, p₂)`, where a
//! generator is `m = diag(J, J) · L` with
//!
//! ```text
//!     L = [[a,  b],
//!          [bᵀ, c]]        a, c symmetric 2×2, b arbitrary 2×2.
//! ```
//!
//! The square `S = m²` keeps the shape `[[α I, β J d], [−β J dᵀ, γ I]]` under
//! powers, with `d = a J b + b J c`, so `exp(m)` collapses to six scalar series.
//! Their closed forms divide by `λ₊ − λ₋`, the eigenvalue gap of the 2×2
//! coefficient map; near a degenerate gap [`closed_form_exp`] falls back to the
//! dense Padé exponential.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symplectic::{
    self, convert_ordering, interleaved_residual, to_interleaved, LieAlgElement, SympMatrix,
    TOL_SYMMETRIC,
};

/// Relative gap below which the closed forms are treated as degenerate.
pub const DEGENERACY_REL: f64 = 1e-8;

/// Relative gap below which [`closed_form_exp`] prefers the dense exponential.
///
/// The divided differences in the series coefficients lose about
/// `ε / gap` relative accuracy, so near-coincident eigenvalues that still
/// clear [`DEGENERACY_REL`] would cost several digits.
pub const CLOSED_FORM_GAP_REL: f64 = 1e-5;

/// Allowed imaginary residue of a closed-form coefficient, relative to `max(1, |re|)`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Below this `|λ|` the ratio `sinh √λ / √λ` is evaluated by its Taylor series.
const SINHC_SERIES_CUTOFF: f64 = 1e-6;

fn j() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Generator blocks `(a, b, c)` of an element of `sp(4, ℝ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sp4Generator {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
    c: Matrix2<f64>,
}

impl Sp4Generator {
    pub fn new(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>) -> Result<Self> {
        if a.iter()
            .chain(b.iter())
            .chain(c.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let residual = (a - a.transpose()).amax().max((c - c.transpose()).amax());
        if residual > TOL_SYMMETRIC {
            return Err(Error::NotSymmetric {
                residual,
                tolerance: TOL_SYMMETRIC,
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn zero() -> Self {
        Self {
            a: Matrix2::zeros(),
            b: Matrix2::zeros(),
            c: Matrix2::zeros(),
        }
    }

    /// Reads the blocks out of a 4×4 symmetric `L` given in interleaved ordering.
    pub fn from_interleaved(l: &LieAlgElement) -> Result<Self> {
        if l.modes() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: l.modes(),
            });
        }
        let m = l.matrix();
        let blk = |r: usize, c: usize| m.fixed_view::<2, 2>(r, c).into_owned();
        Self::new(blk(0, 0), blk(0, 2), blk(2, 2))
    }

    pub fn a(&self) -> &Matrix2<f64> {
        &self.a
    }

    pub fn b(&self) -> &Matrix2<f64> {
        &self.b
    }

    pub fn c(&self) -> &Matrix2<f64> {
        &self.c
    }

    /// `d = a J b + b J c`.
    pub fn d(&self) -> Matrix2<f64> {
        self.a * j() * self.b + self.b * j() * self.c
    }

    /// The symmetric matrix `L = [[a, b], [bᵀ, c]]` (interleaved ordering).
    pub fn lie_matrix(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(4, 4);
        l.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        l.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.b);
        l.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.b.transpose());
        l.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.c);
        l
    }

    /// The Lie-algebra element `diag(J, J) · L`.
    pub fn algebra_matrix(&self) -> DMatrix<f64> {
        symplectic::interleaved_form(2).expect("n = 2") * self.lie_matrix()
    }

    /// The same generator as a block-ordering [`LieAlgElement`], `Γ L Γᵀ`.
    pub fn to_block_lie(&self) -> LieAlgElement {
        let g = symplectic::gamma_permutation(2).expect("n = 2");
        let l = &g * self.lie_matrix() * g.transpose();
        // Γ is a permutation, so symmetry is preserved exactly.
        LieAlgElement::new(l).expect("permuted symmetric matrix")
    }

    fn initial(&self) -> (f64, f64, f64) {
        let db = self.b.determinant();
        (
            -(self.a.determinant() + db),
            1.0,
            -(self.c.determinant() + db),
        )
    }
}

/// `S = (diag(J, J) L)²` assembled from its block structure.
pub fn s_matrix(g: &Sp4Generator) -> DMatrix<f64> {
    let (alpha1, _, gamma1) = g.initial();
    let jd = j() * g.d();
    let mut s = DMatrix::zeros(4, 4);
    s.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&(Matrix2::identity() * alpha1));
    s.fixed_view_mut::<2, 2>(0, 2).copy_from(&jd);
    s.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&(-(j() * g.d().transpose())));
    s.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&(Matrix2::identity() * gamma1));
    s
}

/// The 2×2 matrix `U = [[α₁, β₁ det d], [β₁, γ₁]]` whose powers drive the coefficients.
pub fn u_matrix(g: &Sp4Generator) -> Matrix2<f64> {
    let (alpha1, beta1, gamma1) = g.initial();
    let det_d = g.d().determinant();
    Matrix2::new(alpha1, beta1 * det_d, beta1, gamma1)
}

/// The recurrence operator `T` acting on `(αₙ, βₙ, γₙ)`.
pub fn t_matrix(g: &Sp4Generator) -> Matrix3<f64> {
    let (alpha1, beta1, gamma1) = g.initial();
    let det_d = g.d().determinant();
    Matrix3::new(
        alpha1,
        beta1 * det_d,
        0.0,
        beta1,
        gamma1,
        0.0,
        0.0,
        beta1 * det_d,
        gamma1,
    )
}

fn radicand(g: &Sp4Generator) -> f64 {
    let da = g.a.determinant();
    let dc = g.c.determinant();
    (da - dc).powi(2) + 4.0 * g.d().determinant()
}

/// Eigenvalues `(λ₊, λ₋)` of [`u_matrix`]; complex conjugate when the radicand is negative.
pub fn eigenvalues(g: &Sp4Generator) -> (Complex64, Complex64) {
    let mean = -(g.a.determinant() + g.c.determinant() + 2.0 * g.b.determinant()) / 2.0;
    let root = Complex64::new(radicand(g), 0.0).sqrt() / 2.0;
    (mean + root, mean - root)
}

/// The eigenvalues together with the degeneracy verdict.
fn split_eigenvalues(g: &Sp4Generator) -> Result<(Complex64, Complex64, Complex64)> {
    let (lp, lm) = eigenvalues(g);
    let gap = lp - lm;
    let threshold = DEGENERACY_REL * 1f64.max(lp.norm()).max(lm.norm());
    if gap.norm() < threshold {
        return Err(Error::DegenerateEigenvalues {
            gap: gap.norm(),
            threshold,
        });
    }
    Ok((lp, lm, gap))
}

/// Powers-of-S coefficients `(αₙ, βₙ, γₙ)` with `Sⁿ = [[αₙ I, βₙ J d], [−βₙ J dᵀ, γₙ I]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PowerCoefficients {
    fn from_vector(v: Vector3<f64>) -> Self {
        Self {
            alpha: v[0],
            beta: v[1],
            gamma: v[2],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha.abs().max(self.beta.abs()).max(self.gamma.abs())
    }
}

fn check_power(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("power index must be >= 1".into()));
    }
    Ok(())
}

/// `Tⁿ⁻¹ (α₁, β₁, γ₁)` by repeated multiplication.
pub fn coeff_recurrence(g: &Sp4Generator, n: usize) -> Result<PowerCoefficients> {
    check_power(n)?;
    let t = t_matrix(g);
    let (a1, b1, c1) = g.initial();
    let mut v = Vector3::new(a1, b1, c1);
    for _ in 1..n {
        v = t * v;
    }
    Ok(PowerCoefficients::from_vector(v))
}

fn real_part(z: Complex64) -> Result<f64> {
    let residue = z.im.abs();
    if residue > IMAG_RESIDUE_TOL * 1f64.max(z.re.abs()) {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(z.re)
}

/// `(αₙ, βₙ, γₙ)` from the eigenvalue closed forms.
pub fn coeff_closed(g: &Sp4Generator, n: usize) -> Result<PowerCoefficients> {
    check_power(n)?;
    let (lp, lm, gap) = split_eigenvalues(g)?;
    let (_, _, gamma1) = g.initial();
    let n = i32::try_from(n).map_err(|_| Error::InvalidParams("power index too large".into()))?;
    let (pp, pm) = (lp.powi(n), lm.powi(n));
    let (fp, fm) = (lp - gamma1, lm - gamma1);
    Ok(PowerCoefficients {
        alpha: real_part((fp * pp - fm * pm) / gap)?,
        beta: real_part((pp - pm) / gap)?,
        gamma: real_part((fp * pm - fm * pp) / gap)?,
    })
}

/// `cosh √λ`, entire in `λ`, so the square-root branch is irrelevant.
pub fn cosh_sqrt(lambda: Complex64) -> Complex64 {
    lambda.sqrt().cosh()
}

/// `sinh √λ / √λ` with its removable singularity at zero filled in.
pub fn sinhc_sqrt(lambda: Complex64) -> Complex64 {
    if lambda.norm() < SINHC_SERIES_CUTOFF {
        let l2 = lambda * lambda;
        1.0 + lambda / 6.0 + l2 / 120.0 + l2 * lambda / 5040.0
    } else {
        let r = lambda.sqrt();
        r.sinh() / r
    }
}

/// Even/odd series sums that build `exp(diag(J, J) L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCoefficients {
    pub alpha_e: f64,
    pub alpha_o: f64,
    pub beta_e: f64,
    pub beta_o: f64,
    pub gamma_e: f64,
    pub gamma_o: f64,
}

impl SeriesCoefficients {
    /// Truncated sums `1 + Σ αₙ/(2n)!` etc. using [`coeff_recurrence`] for `n = 1..=terms`.
    ///
    /// Valid on degenerate generators too; converges quickly for moderate `|λ±|`.
    pub fn by_recurrence(g: &Sp4Generator, terms: usize) -> Self {
        let t = t_matrix(g);
        let (a1, b1, c1) = g.initial();
        let mut v = Vector3::new(a1, b1, c1);
        let mut sums = SeriesCoefficients {
            alpha_e: 1.0,
            alpha_o: 1.0,
            beta_e: 0.0,
            beta_o: 0.0,
            gamma_e: 1.0,
            gamma_o: 1.0,
        };
        // 1/(2n)! and 1/(2n+1)!, updated incrementally.
        let mut inv_even = 1.0;
        for k in 1..=terms {
            let kf = k as f64;
            inv_even /= (2.0 * kf - 1.0) * (2.0 * kf);
            let inv_odd = inv_even / (2.0 * kf + 1.0);
            sums.alpha_e += v[0] * inv_even;
            sums.beta_e += v[1] * inv_even;
            sums.gamma_e += v[2] * inv_even;
            sums.alpha_o += v[0] * inv_odd;
            sums.beta_o += v[1] * inv_odd;
            sums.gamma_o += v[2] * inv_odd;
            v = t * v;
        }
        sums
    }
}

/// The six closed-form series coefficients.
pub fn series_coefficients(g: &Sp4Generator) -> Result<SeriesCoefficients> {
    let (lp, lm, gap) = split_eigenvalues(g)?;
    let shift = g.b.determinant() + g.c.determinant();
    let (fp, fm) = (lp + shift, lm + shift);
    let (chp, chm) = (cosh_sqrt(lp), cosh_sqrt(lm));
    let (shp, shm) = (sinhc_sqrt(lp), sinhc_sqrt(lm));
    Ok(SeriesCoefficients {
        alpha_e: real_part((fp * chp - fm * chm) / gap)?,
        alpha_o: real_part((fp * shp - fm * shm) / gap)?,
        beta_e: real_part((chp - chm) / gap)?,
        beta_o: real_part((shp - shm) / gap)?,
        gamma_e: real_part((fp * chm - fm * chp) / gap)?,
        gamma_o: real_part((fp * shm - fm * shp) / gap)?,
    })
}

/// Which evaluation route produced an [`Sp4Element`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpBranch {
    ClosedForm,
    DegenerateFallback,
}

impl std::fmt::Display for ExpBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExpBranch::ClosedForm => "non-degenerate",
            ExpBranch::DegenerateFallback => "degenerate-fallback",
        })
    }
}

/// A 4×4 group element in interleaved ordering `(q₁, p₁, q₂, p₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sp4Element {
    matrix: DMatrix<f64>,
    branch: ExpBranch,
}

impl Sp4Element {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn branch(&self) -> ExpBranch {
        self.branch
    }

    /// `‖M̃ diag(J, J) M̃ᵀ − diag(J, J)‖_max`.
    pub fn residual(&self) -> f64 {
        interleaved_residual(&self.matrix).expect("4x4")
    }

    /// The block-ordering group element `Γ M̃ Γᵀ`.
    pub fn to_block_ordering(&self) -> Result<SympMatrix> {
        convert_ordering(&self.matrix)
    }
}

fn assemble(blocks: [Matrix2<f64>; 4]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&blocks[0]);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&blocks[1]);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&blocks[2]);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&blocks[3]);
    m
}

fn blocks_from_series(g: &Sp4Generator, s: &SeriesCoefficients) -> [Matrix2<f64>; 4] {
    let (a, b, c) = (g.a, g.b, g.c);
    let bt = b.transpose();
    let jm = j();
    let (det_a, det_b, det_c) = (a.determinant(), b.determinant(), c.determinant());
    let id = Matrix2::identity();

    let ja = jm * a;
    let jb = jm * b;
    let jc = jm * c;
    let jbt = jm * bt;

    let top_left = id * s.alpha_e + ja * (s.alpha_o - s.beta_o * det_b) + jb * jc * jbt * s.beta_o;
    let top_right = jb * (s.gamma_o - s.beta_o * det_a)
        + (ja * jb + jb * jc) * s.beta_e
        + ja * jb * jc * s.beta_o;
    let bottom_left = jbt * (s.alpha_o - s.beta_o * det_c)
        + (jbt * ja + jc * jbt) * s.beta_e
        + jc * jbt * ja * s.beta_o;
    let bottom_right =
        id * s.gamma_e + jc * (s.gamma_o - s.beta_o * det_b) + jbt * ja * jb * s.beta_o;
    [top_left, top_right, bottom_left, bottom_right]
}

/// Dense Padé exponential of `diag(J, J) L`, routed through block ordering.
pub fn generic_exp(g: &Sp4Generator) -> Result<DMatrix<f64>> {
    let m = symplectic::exp_map_with_tolerance(&g.to_block_lie(), f64::INFINITY)?;
    Ok(to_interleaved(&m))
}

/// `exp(diag(J, J) L)` from the closed-form block formulas.
///
/// Degenerate or nearly degenerate generators (including every `a = c = 0`
/// generator) are sent to the dense exponential instead; the returned [`ExpBranch`] records which.
pub fn closed_form_exp(g: &Sp4Generator) -> Sp4Element {
    let (lp, lm) = eigenvalues(g);
    let well_separated =
        (lp - lm).norm() >= CLOSED_FORM_GAP_REL * 1f64.max(lp.norm()).max(lm.norm());
    let series = if well_separated {
        series_coefficients(g)
    } else {
        Err(Error::DegenerateEigenvalues {
            gap: (lp - lm).norm(),
            threshold: CLOSED_FORM_GAP_REL,
        })
    };
    match series {
        Ok(s) => Sp4Element {
            matrix: assemble(blocks_from_series(g, &s)),
            branch: ExpBranch::ClosedForm,
        },
        Err(_) => Sp4Element {
            matrix: generic_exp(g).expect("finite generator"),
            branch: ExpBranch::DegenerateFallback,
        },
    }
}

/// The `a = c = 0` closed form.
///
/// Both diagonal blocks are `cosh √(−det b) · I`; the off-diagonal blocks are
/// `sinh √(−det b) / √(−det b)` times `J b` and `J bᵀ`. For `det b > 0` the
/// hyperbolic functions turn trigonometric through the complex square root.
pub fn squeeze_block_exp(b: &Matrix2<f64>) -> Result<Sp4Element> {
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let lambda = Complex64::new(-b.determinant(), 0.0);
    let ch = cosh_sqrt(lambda).re;
    let sh = sinhc_sqrt(lambda).re;
    let id = Matrix2::identity();
    Ok(Sp4Element {
        matrix: assemble([id * ch, j() * b * sh, j() * b.transpose() * sh, id * ch]),
        branch: ExpBranch::ClosedForm,
    })
}
