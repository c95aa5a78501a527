//! Covariance matrices and Weyl amplitudes of the Gaussian states `Ĉ_M |0⟩`.
//!
//! All phase-space quantities use the block ordering `(x₁ … xₙ, p₁ … pₙ)`.
//! First moments of these states vanish and are not represented.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;
use crate::symplectic::{block_decompose, max_abs, omega, SympMatrix};

/// Planck constant and characteristic oscillator lengths `l_j = √(ħ / (m_j ω_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscParams {
    hbar: f64,
    lengths: Vec<f64>,
}

impl OscParams {
    pub fn new(hbar: f64, lengths: Vec<f64>) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if lengths.is_empty() {
            return Err(Error::ZeroModes);
        }
        if let Some(bad) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "lengths must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { hbar, lengths })
    }

    /// Quadrature convention: `ħ = 1`, every `l_j = 1`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(1.0, vec![1.0; n])
    }

    pub fn from_mass_frequency(hbar: f64, masses: &[f64], frequencies: &[f64]) -> Result<Self> {
        if masses.len() != frequencies.len() {
            return Err(Error::DimensionMismatch {
                expected: masses.len(),
                found: frequencies.len(),
            });
        }
        let lengths = masses
            .iter()
            .zip(frequencies)
            .map(|(m, w)| (hbar / (m * w)).sqrt())
            .collect();
        Self::new(hbar, lengths)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn modes(&self) -> usize {
        self.lengths.len()
    }

    pub(crate) fn check_modes(&self, n: usize) -> Result<()> {
        if self.modes() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.modes(),
            });
        }
        Ok(())
    }

    /// `diag(L²/ħ², L⁻²)`, the vacuum quadratic form seen by the Weyl generators.
    pub fn vacuum_weight(&self) -> DVector<f64> {
        let h2 = self.hbar * self.hbar;
        let x = self.lengths.iter().map(|l| l * l / h2);
        let p = self.lengths.iter().map(|l| 1.0 / (l * l));
        DVector::from_iterator(2 * self.modes(), x.chain(p))
    }

    /// `diag(L², ħ² L⁻²)`, the weight inside the Berry connection.
    pub fn connection_weight(&self) -> DVector<f64> {
        self.vacuum_weight() * (self.hbar * self.hbar)
    }
}

/// Which units a [`CovarianceMatrix`] is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convention {
    DimensionFull { hbar: f64 },
    Quadrature,
}

impl Convention {
    fn hbar(&self) -> f64 {
        match *self {
            Convention::DimensionFull { hbar } => hbar,
            Convention::Quadrature => 1.0,
        }
    }
}

/// A symmetric positive-definite second-moment matrix in `(x…, p…)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
    convention: Convention,
}

impl CovarianceMatrix {
    pub fn new(data: DMatrix<f64>, convention: Convention) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let asym = max_abs(&(&data - data.transpose()));
        if asym > 1e-12 {
            return Err(Error::NotSymmetric {
                residual: asym,
                tolerance: 1e-12,
            });
        }
        if data.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { data, convention })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn modes(&self) -> usize {
        self.data.nrows() / 2
    }

    /// Moduli of the eigenvalues of `(2/ħ) Ω V`; all equal to one for a pure state.
    pub fn symplectic_spectrum(&self) -> Vec<f64> {
        let w = omega(self.modes()).expect("n >= 1");
        let m = w * &self.data * (2.0 / self.convention.hbar());
        let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        moduli
    }
}

/// `M · diag(w) · Mᵀ`, symmetrized.
fn congruence(m: &SympMatrix, weight: &DVector<f64>) -> DMatrix<f64> {
    let root = weight.map(f64::sqrt);
    let x = m.matrix() * DMatrix::from_diagonal(&root);
    let v = &x * x.transpose();
    (&v + v.transpose()) * 0.5
}

/// `Λ = M diag(L²/ħ², L⁻²) Mᵀ`.
pub fn lambda_matrix(m: &SympMatrix, p: &OscParams) -> Result<DMatrix<f64>> {
    p.check_modes(m.modes())?;
    Ok(congruence(m, &p.vacuum_weight()))
}

/// `V = (ħ²/2) M diag(L²/ħ², L⁻²) Mᵀ` in dimension-full units.
pub fn covariance(m: &SympMatrix, p: &OscParams) -> Result<CovarianceMatrix> {
    let v = lambda_matrix(m, p)? * (0.5 * p.hbar() * p.hbar());
    CovarianceMatrix::new(v, Convention::DimensionFull { hbar: p.hbar() })
}

/// `V_q = ½ M Mᵀ`.
pub fn covariance_quadrature(m: &SympMatrix) -> Result<CovarianceMatrix> {
    let ones = DVector::from_element(2 * m.modes(), 1.0);
    CovarianceMatrix::new(congruence(m, &ones) * 0.5, Convention::Quadrature)
}

/// `⟨Ψ_M| Ŵ(a, b) |Ψ_M⟩ = exp(−¼ (a, b)ᵀ Λ (a, b))`.
pub fn weyl_amplitude(m: &SympMatrix, p: &OscParams, a: &[f64], b: &[f64]) -> Result<f64> {
    let n = m.modes();
    for v in [a, b] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    let lambda = lambda_matrix(m, p)?;
    let v = DVector::from_iterator(2 * n, a.iter().chain(b).copied());
    Ok((-0.25 * v.dot(&(&lambda * &v))).exp())
}

/// Quadrature layout for [`numeric_overlap_n1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapGrid {
    /// Half-width of the integration window in position standard deviations.
    pub half_width_sigmas: f64,
    /// Total Gauss–Legendre nodes (split into 10-node panels).
    pub nodes: usize,
}

impl Default for OverlapGrid {
    fn default() -> Self {
        Self {
            half_width_sigmas: 10.0,
            nodes: 400,
        }
    }
}

impl OverlapGrid {
    const PANEL_ORDER: usize = 10;

    /// Same window, twice the node density.
    pub fn refined(&self) -> Self {
        Self {
            nodes: 2 * self.nodes,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.half_width_sigmas.is_nan() || self.half_width_sigmas < 4.0 {
            return Err(Error::InvalidGrid(format!(
                "window must cover at least 8 standard deviations, got {}",
                2.0 * self.half_width_sigmas
            )));
        }
        if self.nodes < 200 {
            return Err(Error::InvalidGrid(format!(
                "need at least 200 nodes, got {}",
                self.nodes
            )));
        }
        Ok(())
    }
}

/// Single-mode wave function `Ψ_M(x) = ∫ C_M(x, x′) Ψ₀(x′) dx′`.
///
/// The kernel is the metaplectic one,
/// `exp(i/(2ħB) [D x² − 2 x x′ + A x′²]) / √(2πiħB)`, and the `x′` integral
/// against the oscillator ground state is done in closed form. The square
/// root takes the principal branch; its sign cancels in every overlap.
#[derive(Debug, Clone, Copy)]
struct KernelState {
    hbar: f64,
    b: f64,
    d: f64,
    alpha: Complex64,
    prefactor: Complex64,
}

impl KernelState {
    fn new(m: &SympMatrix, p: &OscParams) -> Result<Self> {
        let blk = block_decompose(m);
        let (a, b, d) = (blk.a[(0, 0)], blk.b[(0, 0)], blk.d[(0, 0)]);
        if b.abs() <= 1e-8 {
            return Err(Error::SingularB { det: b });
        }
        let hbar = p.hbar();
        let l = p.lengths()[0];
        let i = Complex64::i();
        let alpha = Complex64::new(1.0 / (2.0 * l * l), 0.0) - i * (a / (2.0 * hbar * b));
        let norm0 = (std::f64::consts::PI * l * l).powf(-0.25);
        let kernel_norm = (i * (2.0 * std::f64::consts::PI * hbar * b)).sqrt();
        let gaussian = (Complex64::new(std::f64::consts::PI, 0.0) / alpha).sqrt();
        Ok(Self {
            hbar,
            b,
            d,
            alpha,
            prefactor: gaussian * norm0 / kernel_norm,
        })
    }

    fn psi(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        let hb = self.hbar * self.b;
        let beta = -i * (x / hb);
        let chirp = i * (self.d * x * x / (2.0 * hb));
        self.prefactor * (chirp + beta * beta / (4.0 * self.alpha)).exp()
    }
}

/// `⟨Ψ_M| Ŵ(a, b) |Ψ_M⟩` for one mode by direct numerical integration of
/// `e^{iab/2ħ} ∫ Ψ_M*(x) e^{iax/ħ} Ψ_M(x + b) dx`.
pub fn numeric_overlap_n1(
    m: &SympMatrix,
    p: &OscParams,
    a: f64,
    b: f64,
    grid: &OverlapGrid,
) -> Result<Complex64> {
    if m.modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: m.modes(),
        });
    }
    p.check_modes(1)?;
    grid.validate()?;
    let state = KernelState::new(m, p)?;
    let sigma = covariance(m, p)?.matrix()[(0, 0)].sqrt();
    let center = -0.5 * b;
    let half = grid.half_width_sigmas * sigma + 0.5 * b.abs();
    let hbar = p.hbar();
    let panels = grid.nodes.div_ceil(OverlapGrid::PANEL_ORDER);
    let integral: Complex64 = composite_gauss_legendre(
        |x| {
            let phase = Complex64::new(0.0, a * x / hbar).exp();
            state.psi(x).conj() * phase * state.psi(x + b)
        },
        center - half,
        center + half,
        OverlapGrid::PANEL_ORDER,
        panels,
    );
    Ok(integral * Complex64::new(0.0, a * b / (2.0 * hbar)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{exp_map, LieAlgElement};
    use approx::assert_abs_diff_eq;

    fn squeeze_n1(theta: f64, r: f64) -> SympMatrix {
        let (c, s) = (r.cosh(), r.sinh());
        SympMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                c - theta.cos() * s,
                -theta.sin() * s,
                -theta.sin() * s,
                c + theta.cos() * s,
            ],
        ))
        .unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(OscParams::new(0.0, vec![1.0]).is_err());
        assert!(OscParams::new(1.0, vec![1.0, -2.0]).is_err());
        assert!(OscParams::new(1.0, vec![]).is_err());
        let p = OscParams::from_mass_frequency(2.0, &[1.0, 4.0], &[2.0, 0.5]).unwrap();
        assert_abs_diff_eq!(p.lengths()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lengths()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lambda_of_identity() {
        let id = SympMatrix::identity(1).unwrap();
        let lam = lambda_matrix(&id, &OscParams::unit(1).unwrap()).unwrap();
        assert_eq!(lam, DMatrix::identity(2, 2));

        let id2 = SympMatrix::identity(2).unwrap();
        let p = OscParams::new(2.0, vec![1.0, 1.0]).unwrap();
        let lam = lambda_matrix(&id2, &p).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 0.25, 1.0, 1.0]));
        assert_eq!(lam, expected);
        assert!(lambda_matrix(&id2, &OscParams::unit(1).unwrap()).is_err());
    }

    #[test]
    fn vacuum_and_squeezed_covariance() {
        let id = SympMatrix::identity(1).unwrap();
        let v = covariance(&id, &OscParams::unit(1).unwrap()).unwrap();
        assert_eq!(*v.matrix(), DMatrix::identity(2, 2) * 0.5);

        let m = squeeze_n1(0.0, 1.0);
        let v = covariance(&m, &OscParams::unit(1).unwrap()).unwrap();
        assert_abs_diff_eq!(
            v.matrix()[(0, 0)],
            0.067_667_641_618_306_35,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(v.matrix()[(1, 1)], 3.694_528_049_465_325, epsilon = 1e-14);
        assert_abs_diff_eq!(v.matrix()[(0, 1)], 0.0, epsilon = 1e-16);
    }

    #[test]
    fn covariance_quadrature_identity() {
        let v = covariance_quadrature(&SympMatrix::identity(3).unwrap()).unwrap();
        assert_eq!(*v.matrix(), DMatrix::identity(6, 6) * 0.5);
        assert_eq!(v.convention(), Convention::Quadrature);
        for s in v.symplectic_spectrum() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn covariance_rejects_non_positive() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            CovarianceMatrix::new(bad, Convention::Quadrature),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn lambda_is_scaled_covariance() {
        let l = LieAlgElement::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                0.2, 0.1, -0.3, 0.4, 0.1, -0.5, 0.2, 0.0, -0.3, 0.2, 0.6, -0.1, 0.4, 0.0, -0.1, 0.3,
            ],
        ))
        .unwrap();
        let m = exp_map(&l).unwrap();
        let p = OscParams::new(1.7, vec![0.4, 2.5]).unwrap();
        let lam = lambda_matrix(&m, &p).unwrap();
        let v = covariance(&m, &p).unwrap();
        let scaled = v.matrix() * (2.0 / (1.7 * 1.7));
        assert!(max_abs(&(lam - scaled)) <= 1e-12);
        for s in v.symplectic_spectrum() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-9);
        }
        let vq = covariance_quadrature(&m).unwrap();
        let unit = covariance(&m, &OscParams::unit(2).unwrap()).unwrap();
        assert_eq!(vq.matrix(), unit.matrix());
    }

    #[test]
    fn weyl_amplitude_values() {
        let id = SympMatrix::identity(1).unwrap();
        let p = OscParams::unit(1).unwrap();
        assert_eq!(weyl_amplitude(&id, &p, &[0.0], &[0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            weyl_amplitude(&id, &p, &[2.0], &[0.0]).unwrap(),
            0.367_879_441_171_442_3,
            epsilon = 1e-15
        );
        let m = squeeze_n1(0.4, 0.7);
        let x = weyl_amplitude(&m, &p, &[0.3], &[-1.1]).unwrap();
        let y = weyl_amplitude(&m, &p, &[-0.3], &[1.1]).unwrap();
        assert_eq!(x, y);
        assert!(weyl_amplitude(&m, &p, &[0.3, 0.1], &[0.0]).is_err());
    }

    #[test]
    fn overlap_normalization_and_reference_point() {
        let m = squeeze_n1(std::f64::consts::FRAC_PI_2, 0.3);
        let p = OscParams::unit(1).unwrap();
        let grid = OverlapGrid::default();
        let one = numeric_overlap_n1(&m, &p, 0.0, 0.0, &grid).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(one.im, 0.0, epsilon = 1e-8);

        let z = numeric_overlap_n1(&m, &p, 0.7, -0.2, &grid).unwrap();
        let w = weyl_amplitude(&m, &p, &[0.7], &[-0.2]).unwrap();
        assert_abs_diff_eq!(z.norm(), w, epsilon = 1e-6);
    }

    #[test]
    fn overlap_rejects_singular_b_and_thin_grids() {
        let m = squeeze_n1(0.0, 0.5);
        let p = OscParams::unit(1).unwrap();
        assert!(matches!(
            numeric_overlap_n1(&m, &p, 0.1, 0.1, &OverlapGrid::default()),
            Err(Error::SingularB { .. })
        ));
        let m = squeeze_n1(1.0, 0.5);
        let thin = OverlapGrid {
            half_width_sigmas: 3.0,
            nodes: 400,
        };
        assert!(matches!(
            numeric_overlap_n1(&m, &p, 0.1, 0.1, &thin),
            Err(Error::InvalidGrid(_))
        ));
        let sparse = OverlapGrid {
            half_width_sigmas: 10.0,
            nodes: 100,
        };
        assert!(numeric_overlap_n1(&m, &p, 0.1, 0.1, &sparse).is_err());
    }
}
