//! Single- and two-mode squeeze operators as symplectic matrices, the closed
//! circles they trace at fixed magnitude, and the known phases of those circles.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::gaussian::OscParams;
use crate::phase::SympPath;
use crate::sp4::squeeze_block_exp;
use crate::symplectic::{convert_ordering, LieAlgElement, SympMatrix};

/// Squeeze magnitude `R`, angle (`θ` for one mode, `φ` for two) and oscillator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpec {
    modes: usize,
    r: f64,
    angle: f64,
    params: OscParams,
}

impl SqueezeSpec {
    /// The angle is reduced to `[0, 2π)`.
    pub fn new(modes: usize, r: f64, angle: f64, params: OscParams) -> Result<Self> {
        check_modes(modes)?;
        check_magnitude(r)?;
        if !angle.is_finite() {
            return Err(Error::NonFinite);
        }
        if params.modes() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                found: params.modes(),
            });
        }
        let mut angle = angle.rem_euclid(TAU);
        if angle >= TAU {
            angle = 0.0;
        }
        Ok(Self {
            modes,
            r,
            angle,
            params,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn params(&self) -> &OscParams {
        &self.params
    }

    fn expect_modes(&self, n: usize) -> Result<()> {
        if self.modes != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.modes,
            });
        }
        Ok(())
    }
}

fn check_modes(modes: usize) -> Result<()> {
    match modes {
        1 | 2 => Ok(()),
        0 => Err(Error::ZeroModes),
        m => Err(Error::InvalidParams(format!(
            "squeeze paths exist for one or two modes, got {m}"
        ))),
    }
}

fn check_magnitude(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "squeeze magnitude must be finite and non-negative, got {r}"
        )));
    }
    Ok(())
}

/// `(ħ/l², l²/ħ)` for one mode.
fn scales_n1(p: &OscParams) -> (f64, f64) {
    let l2 = p.lengths()[0].powi(2);
    (p.hbar() / l2, l2 / p.hbar())
}

pub fn squeeze_lie_n1(spec: &SqueezeSpec) -> Result<LieAlgElement> {
    spec.expect_modes(1)?;
    let (h_l2, l2_h) = scales_n1(&spec.params);
    let (s, c) = spec.angle.sin_cos();
    let r = spec.r;
    LieAlgElement::new(DMatrix::from_row_slice(
        2,
        2,
        &[h_l2 * r * s, -r * c, -r * c, -l2_h * r * s],
    ))
}

fn matrix_n1(r: f64, theta: f64, p: &OscParams) -> DMatrix<f64> {
    let (h_l2, l2_h) = scales_n1(p);
    let (s, c) = theta.sin_cos();
    let (ch, sh) = (r.cosh(), r.sinh());
    DMatrix::from_row_slice(
        2,
        2,
        &[ch - c * sh, -l2_h * s * sh, -h_l2 * s * sh, ch + c * sh],
    )
}

fn matrix_n1_dtheta(r: f64, theta: f64, p: &OscParams) -> DMatrix<f64> {
    let (h_l2, l2_h) = scales_n1(p);
    let (s, c) = theta.sin_cos();
    let sh = r.sinh();
    DMatrix::from_row_slice(2, 2, &[s * sh, -l2_h * c * sh, -h_l2 * c * sh, -s * sh])
}

pub fn squeeze_matrix_n1(spec: &SqueezeSpec) -> Result<SympMatrix> {
    spec.expect_modes(1)?;
    SympMatrix::new(matrix_n1(spec.r, spec.angle, &spec.params))
}

pub fn squeeze_b_block_n2(spec: &SqueezeSpec) -> Result<Matrix2<f64>> {
    spec.expect_modes(2)?;
    let (l1, l2) = (spec.params.lengths()[0], spec.params.lengths()[1]);
    let hbar = spec.params.hbar();
    let zx = spec.r * spec.angle.cos();
    let zy = spec.r * spec.angle.sin();
    Ok(Matrix2::new(
        hbar / (l1 * l2) * zy,
        -(l2 / l1) * zx,
        -(l1 / l2) * zx,
        -(l1 * l2 / hbar) * zy,
    ))
}

/// Two-mode layout in `(x₁, x₂, p₁, p₂)` ordering from the diagonal value and
/// the products `sinh R cos φ`, `sinh R sin φ`. The φ-derivative reuses it.
fn layout_n2(p: &OscParams, diag: f64, s_cos: f64, s_sin: f64) -> DMatrix<f64> {
    let (l1, l2) = (p.lengths()[0], p.lengths()[1]);
    let hbar = p.hbar();
    let (r12, r21) = (l1 / l2, l2 / l1);
    let (big, small) = (l1 * l2 / hbar, hbar / (l1 * l2));
    DMatrix::from_row_slice(
        4,
        4,
        &[
            diag,
            -r12 * s_cos,
            0.0,
            -big * s_sin,
            -r21 * s_cos,
            diag,
            -big * s_sin,
            0.0,
            0.0,
            -small * s_sin,
            diag,
            r21 * s_cos,
            -small * s_sin,
            0.0,
            r12 * s_cos,
            diag,
        ],
    )
}

fn matrix_n2(r: f64, phi: f64, p: &OscParams) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    let sh = r.sinh();
    layout_n2(p, r.cosh(), sh * c, sh * s)
}

fn matrix_n2_dphi(r: f64, phi: f64, p: &OscParams) -> DMatrix<f64> {
    let (s, c) = phi.sin_cos();
    let sh = r.sinh();
    layout_n2(p, 0.0, -sh * s, sh * c)
}

/// The two-mode squeeze matrix in `(x₁, x₂, p₁, p₂)` ordering.
pub fn squeeze_matrix_n2(spec: &SqueezeSpec) -> Result<SympMatrix> {
    spec.expect_modes(2)?;
    SympMatrix::new(matrix_n2(spec.r, spec.angle, &spec.params))
}

/// `exp` of the two-mode generator through the `a = c = 0` closed form,
/// converted to block ordering.
pub fn squeeze_matrix_n2_from_generator(spec: &SqueezeSpec) -> Result<SympMatrix> {
    let b = squeeze_b_block_n2(spec)?;
    convert_ordering(squeeze_block_exp(&b)?.matrix())
}

/// The closed circle `t ↦ squeeze matrix at angle 2πt` at fixed magnitude `R`.
pub fn squeeze_circle_path(modes: usize, r: f64, params: &OscParams) -> Result<SympPath> {
    check_modes(modes)?;
    check_magnitude(r)?;
    params.check_modes(modes)?;
    let (p1, p2) = (params.clone(), params.clone());
    if modes == 1 {
        SympPath::with_tangent(
            1,
            move |t| matrix_n1(r, TAU * t, &p1),
            move |t| matrix_n1_dtheta(r, TAU * t, &p2) * TAU,
            true,
        )
    } else {
        SympPath::with_tangent(
            2,
            move |t| matrix_n2(r, TAU * t, &p1),
            move |t| matrix_n2_dphi(r, TAU * t, &p2) * TAU,
            true,
        )
    }
}

/// `−modes · π sinh² R`.
pub fn reference_phase(modes: usize, r: f64) -> Result<f64> {
    check_modes(modes)?;
    check_magnitude(r)?;
    Ok(-(modes as f64) * PI * r.sinh().powi(2))
}
