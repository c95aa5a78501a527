//! Dense real-matrix foundation for the symplectic group Sp(2n, ℝ).
//!
//! Two phase-space orderings appear throughout the crate:
//!
//! * the *block* ordering `(q₁ … qₙ, p₁ … pₙ)`, in which the symplectic form is
//!   `Ω = [[0, I], [−I, 0]]` (this is the canonical layout for [`SympMatrix`]);
//! * the *interleaved* ordering `(q₁, p₁, …, qₙ, pₙ)`, in which the form is
//!   `diag(J, …, J)` with `J = [[0, 1], [−1, 0]]`.
//!
//! [`gamma_permutation`] maps between the two.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default absolute tolerance on `‖M Ω Mᵀ − Ω‖_max`.
pub const TOL_SYMP: f64 = 1e-10;

/// Absolute tolerance on `‖L − Lᵀ‖_max` for Lie-algebra elements.
pub const TOL_SYMMETRIC: f64 = 1e-12;

/// The 2×2 symplectic unit `[[0, 1], [−1, 0]]`.
pub fn j2() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// The symplectic form `Ω = [[0, I], [−I, 0]]` in block ordering.
pub fn omega(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    Ok(w)
}

/// The symplectic form `diag(J, …, J)` in interleaved ordering.
pub fn interleaved_form(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(w)
}

fn even_square(m: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols || rows == 0 || rows % 2 != 0 {
        return Err(Error::BadShape { rows, cols });
    }
    Ok(rows / 2)
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn residual_against(m: &DMatrix<f64>, form: &DMatrix<f64>) -> f64 {
    max_abs(&(m * form * m.transpose() - form))
}

/// `‖M Ω Mᵀ − Ω‖_max` in block ordering.
pub fn symplectic_residual(m: &DMatrix<f64>) -> Result<f64> {
    let n = even_square(m)?;
    Ok(residual_against(m, &omega(n)?))
}

/// `‖M̃ J̃ M̃ᵀ − J̃‖_max` with `J̃ = diag(J, …, J)` (interleaved ordering).
pub fn interleaved_residual(m: &DMatrix<f64>) -> Result<f64> {
    let n = even_square(m)?;
    Ok(residual_against(m, &interleaved_form(n)?))
}

/// Whether `M Ω Mᵀ = Ω` holds to within `tol` in the max norm.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(m)? <= tol)
}

/// A 2n×2n real matrix checked at construction to be symplectic in block ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SympMatrix {
    n: usize,
    data: DMatrix<f64>,
}

impl SympMatrix {
    /// Checks `data` against the default tolerance [`TOL_SYMP`].
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(data, TOL_SYMP)
    }

    pub fn with_tolerance(data: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = even_square(&data)?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = residual_against(&data, &omega(n)?);
        if residual > tol {
            return Err(Error::NotSymplectic {
                residual,
                tolerance: tol,
            });
        }
        Ok(Self { n, data })
    }

    /// Wraps a matrix known to be symplectic by construction (products, inverses).
    pub(crate) fn from_trusted(data: DMatrix<f64>) -> Self {
        debug_assert!(data.nrows() == data.ncols() && data.nrows().is_multiple_of(2));
        Self {
            n: data.nrows() / 2,
            data,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self::from_trusted(DMatrix::identity(2 * n, 2 * n)))
    }

    /// Assembles `[[A, B], [C, D]]` and checks symplecticity.
    pub fn from_blocks(blocks: &BlockDecomposition, tol: f64) -> Result<Self> {
        Self::with_tolerance(blocks.assemble()?, tol)
    }

    /// Number of modes `n`.
    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn residual(&self) -> f64 {
        residual_against(&self.data, &omega(self.n).expect("n >= 1"))
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &SympMatrix) -> Result<SympMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Self::from_trusted(&self.data * &other.data))
    }

    /// `M⁻¹ = Ω⁻¹ Mᵀ Ω`, exact up to rounding.
    pub fn inverse(&self) -> SympMatrix {
        let w = omega(self.n).expect("n >= 1");
        Self::from_trusted(-(&w * self.data.transpose() * &w))
    }

    pub fn transpose(&self) -> SympMatrix {
        Self::from_trusted(self.data.transpose())
    }
}

/// The four n×n blocks of `M = [[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl BlockDecomposition {
    pub fn modes(&self) -> usize {
        self.a.nrows()
    }

    pub fn assemble(&self) -> Result<DMatrix<f64>> {
        let n = self.a.nrows();
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        for blk in [&self.a, &self.b, &self.c, &self.d] {
            if blk.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: blk.nrows().max(blk.ncols()),
                });
            }
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.c);
        m.view_mut((n, n), (n, n)).copy_from(&self.d);
        Ok(m)
    }

    /// Max-norm residuals of `A Dᵀ − B Cᵀ = 1`, `A Bᵀ = B Aᵀ`, `C Dᵀ = D Cᵀ`.
    pub fn residuals(&self) -> [f64; 3] {
        let n = self.a.nrows();
        let eye = DMatrix::<f64>::identity(n, n);
        let r1 = &self.a * self.d.transpose() - &self.b * self.c.transpose() - eye;
        let r2 = &self.a * self.b.transpose() - &self.b * self.a.transpose();
        let r3 = &self.c * self.d.transpose() - &self.d * self.c.transpose();
        [max_abs(&r1), max_abs(&r2), max_abs(&r3)]
    }
}

pub fn block_decompose(m: &SympMatrix) -> BlockDecomposition {
    let n = m.n;
    let data = &m.data;
    BlockDecomposition {
        a: data.view((0, 0), (n, n)).into_owned(),
        b: data.view((0, n), (n, n)).into_owned(),
        c: data.view((n, 0), (n, n)).into_owned(),
        d: data.view((n, n), (n, n)).into_owned(),
    }
}

/// The permutation `Γ` with `X = Γ Y`, taking interleaved coordinates
/// `Y = (q₁, p₁, …, qₙ, pₙ)` to block coordinates `X = (q₁ … qₙ, p₁ … pₙ)`.
pub fn gamma_permutation(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        g[(i, 2 * i)] = 1.0;
        g[(n + i, 2 * i + 1)] = 1.0;
    }
    Ok(g)
}

/// Converts an interleaved-ordering matrix `M̃` to block ordering, `M = Γ M̃ Γᵀ`.
pub fn convert_ordering(mtilde: &DMatrix<f64>) -> Result<SympMatrix> {
    convert_ordering_with_tolerance(mtilde, TOL_SYMP)
}

pub fn convert_ordering_with_tolerance(mtilde: &DMatrix<f64>, tol: f64) -> Result<SympMatrix> {
    let n = even_square(mtilde)?;
    if mtilde.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let residual = interleaved_residual(mtilde)?;
    if residual > tol {
        return Err(Error::NotSymplectic {
            residual,
            tolerance: tol,
        });
    }
    let g = gamma_permutation(n)?;
    Ok(SympMatrix::from_trusted(&g * mtilde * g.transpose()))
}

/// Inverse of [`convert_ordering`]: `M̃ = Γᵀ M Γ`.
pub fn to_interleaved(m: &SympMatrix) -> DMatrix<f64> {
    let g = gamma_permutation(m.n).expect("n >= 1");
    g.transpose() * &m.data * g
}

/// A real symmetric 2n×2n matrix `L`, parameterizing `sp(2n, ℝ)` through `Ω L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgElement {
    n: usize,
    data: DMatrix<f64>,
}

impl LieAlgElement {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let n = even_square(&data)?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = max_abs(&(&data - data.transpose()));
        if residual > TOL_SYMMETRIC {
            return Err(Error::NotSymmetric {
                residual,
                tolerance: TOL_SYMMETRIC,
            });
        }
        Ok(Self { n, data })
    }

    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self {
            n,
            data: DMatrix::zeros(2 * n, 2 * n),
        })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// The Hamiltonian matrix `Ω L`.
    pub fn generator(&self) -> DMatrix<f64> {
        omega(self.n).expect("n >= 1") * &self.data
    }
}

/// `M = exp(Ω L)` via scaling and squaring with Padé approximants.
pub fn exp_map(l: &LieAlgElement) -> Result<SympMatrix> {
    exp_map_with_tolerance(l, TOL_SYMP)
}

pub fn exp_map_with_tolerance(l: &LieAlgElement, tol: f64) -> Result<SympMatrix> {
    SympMatrix::with_tolerance(l.generator().exp(), tol)
}

/// `(exp X, d/dt exp X)` for `X = X(t)` with derivative `dX`, read off the
/// block exponential `exp([[X, dX], [0, X]])`.
pub fn exp_with_derivative(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = x.nrows();
    let mut big = DMatrix::zeros(2 * k, 2 * k);
    big.view_mut((0, 0), (k, k)).copy_from(x);
    big.view_mut((0, k), (k, k)).copy_from(dx);
    big.view_mut((k, k), (k, k)).copy_from(x);
    let e = big.exp();
    (
        e.view((0, 0), (k, k)).into_owned(),
        e.view((0, k), (k, k)).into_owned(),
    )
}
