//! Geometric phase of `Ĉ_{M(t)} |0⟩` along a curve `t ↦ M(t)` in Sp(2n, ℝ).
//!
//! The connection paired with a tangent `dM` is
//!
//! ```text
//!     𝒜(dM) = −(1/4ħ) Tr[ diag(L², ħ² L⁻²) Mᵀ Ω dM ]
//! ```
//!
//! and the phase is its line integral over `t ∈ [0, 1]`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::{covariance, OscParams};
use crate::quadrature::{integrate, QuadResult, QuadSpec};
use crate::symplectic::{
    exp_with_derivative, max_abs, omega, symplectic_residual, LieAlgElement, SympMatrix,
};

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Symplecticity tolerance for sampled path points.
pub const PATH_TOL_SYMP: f64 = 1e-9;

/// Tolerance on `‖M(1) − M(0)‖_max` for paths flagged closed.
pub const PATH_TOL_CLOSED: f64 = 1e-10;

/// Central-difference step, before scaling by `max(1, ‖M(0)‖_max)`, used
/// when a path has no analytic tangent.
pub const FD_STEP: f64 = 1e-6;

const VALIDATION_SAMPLES: usize = 16;

/// A curve `t ∈ [0, 1] ↦ M(t)` in Sp(2n, ℝ) with access to `dM/dt`.
#[derive(Clone)]
pub struct SympPath {
    n: usize,
    eval: MatrixFn,
    tangent: Option<MatrixFn>,
    closed: bool,
    breakpoints: Vec<f64>,
    fd_step: f64,
}

impl fmt::Debug for SympPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SympPath")
            .field("modes", &self.n)
            .field("closed", &self.closed)
            .field("analytic_tangent", &self.tangent.is_some())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl SympPath {
    /// A path whose tangent is taken by central differences.
    pub fn new<F>(n: usize, eval: F, closed: bool) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(n, Arc::new(eval), None, closed, Vec::new())
    }

    pub fn with_tangent<F, G>(n: usize, eval: F, tangent: G, closed: bool) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        G: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(
            n,
            Arc::new(eval),
            Some(Arc::new(tangent)),
            closed,
            Vec::new(),
        )
    }

    /// The constant path `M(t) = M₀`.
    pub fn constant(m: &SympMatrix) -> Self {
        let n = m.modes();
        let data = m.matrix().clone();
        Self {
            n,
            eval: Arc::new(move |_| data.clone()),
            tangent: Some(Arc::new(move |_| DMatrix::zeros(2 * n, 2 * n))),
            closed: true,
            breakpoints: Vec::new(),
            fd_step: FD_STEP,
        }
    }

    /// `M(t) = exp(Ω L(t))` with `L(t)` linearly interpolated between
    /// generator samples placed uniformly on `[0, 1]`.
    ///
    /// The path is closed when the first and last samples agree.
    pub fn from_generator_samples(samples: Vec<LieAlgElement>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPath(
                "need at least two generator samples".into(),
            ));
        }
        let n = samples[0].modes();
        if let Some(bad) = samples.iter().find(|s| s.modes() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.modes(),
            });
        }
        let closed = max_abs(&(samples[0].matrix() - samples[samples.len() - 1].matrix()))
            <= PATH_TOL_CLOSED;
        let gens: Arc<Vec<DMatrix<f64>>> =
            Arc::new(samples.iter().map(|s| s.generator()).collect());
        let segments = gens.len() - 1;
        let locate = move |t: f64| -> (usize, f64) {
            let u = t.clamp(0.0, 1.0) * segments as f64;
            let k = (u.floor() as usize).min(segments - 1);
            (k, u - k as f64)
        };
        let g1 = Arc::clone(&gens);
        let eval = move |t: f64| {
            let (k, s) = locate(t);
            (&g1[k] * (1.0 - s) + &g1[k + 1] * s).exp()
        };
        let g2 = Arc::clone(&gens);
        let tangent = move |t: f64| {
            let (k, s) = locate(t);
            let x = &g2[k] * (1.0 - s) + &g2[k + 1] * s;
            let dx = (&g2[k + 1] - &g2[k]) * segments as f64;
            exp_with_derivative(&x, &dx).1
        };
        let breakpoints = (1..segments).map(|k| k as f64 / segments as f64).collect();
        Self::build(
            n,
            Arc::new(eval),
            Some(Arc::new(tangent)),
            closed,
            breakpoints,
        )
    }

    fn build(
        n: usize,
        eval: MatrixFn,
        tangent: Option<MatrixFn>,
        closed: bool,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        let scale = max_abs(&eval(0.0));
        let path = Self {
            n,
            eval,
            tangent,
            closed,
            breakpoints,
            fd_step: FD_STEP * scale.max(1.0),
        };
        path.validate()?;
        Ok(path)
    }

    fn validate(&self) -> Result<()> {
        for k in 0..=VALIDATION_SAMPLES {
            let t = k as f64 / VALIDATION_SAMPLES as f64;
            let m = (self.eval)(t);
            if m.shape() != (2 * self.n, 2 * self.n) {
                return Err(Error::DimensionMismatch {
                    expected: 2 * self.n,
                    found: m.nrows(),
                });
            }
            let residual = symplectic_residual(&m)?;
            if residual.is_nan() || residual > PATH_TOL_SYMP {
                return Err(Error::InvalidPath(format!(
                    "M({t}) has symplectic residual {residual:e}"
                )));
            }
        }
        if self.closed {
            let gap = max_abs(&((self.eval)(1.0) - (self.eval)(0.0)));
            if gap > PATH_TOL_CLOSED {
                return Err(Error::InvalidPath(format!(
                    "path flagged closed but ‖M(1) − M(0)‖ = {gap:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn has_analytic_tangent(&self) -> bool {
        self.tangent.is_some()
    }

    /// Interior parameters where the path may fail to be smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `M(t)` without re-checking symplecticity.
    pub fn matrix_at(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    /// `M(t)`, checked at [`PATH_TOL_SYMP`].
    pub fn point(&self, t: f64) -> Result<SympMatrix> {
        SympMatrix::with_tolerance((self.eval)(t), PATH_TOL_SYMP)
    }

    /// `dM/dt`, analytic when available.
    pub fn tangent(&self, t: f64) -> DMatrix<f64> {
        match &self.tangent {
            Some(d) => d(t),
            None => {
                let h = self.fd_step;
                ((self.eval)(t + h) - (self.eval)(t - h)) / (2.0 * h)
            }
        }
    }

    /// The left-translated path `t ↦ M′ · M(t)`.
    pub fn left_translated(&self, fixed: &SympMatrix) -> Result<SympPath> {
        if fixed.modes() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: fixed.modes(),
            });
        }
        let f1 = fixed.matrix().clone();
        let f2 = fixed.matrix().clone();
        let base = self.clone();
        let base_t = self.clone();
        Self::build(
            self.n,
            Arc::new(move |t| &f1 * base.matrix_at(t)),
            Some(Arc::new(move |t| &f2 * base_t.tangent(t))),
            self.closed,
            self.breakpoints.clone(),
        )
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> SympPath {
        let base = self.clone();
        let base_t = self.clone();
        Self {
            n: self.n,
            eval: Arc::new(move |t| base.matrix_at(1.0 - t)),
            tangent: Some(Arc::new(move |t| -base_t.tangent(1.0 - t))),
            closed: self.closed,
            breakpoints: self.breakpoints.iter().rev().map(|b| 1.0 - b).collect(),
            fd_step: self.fd_step,
        }
    }

    /// `t ↦ M(s(t))` for a monotone `s` with `s(0) = 0`, `s(1) = 1`.
    pub fn reparameterized<S, DS>(&self, s: S, ds: DS) -> Result<SympPath>
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
        DS: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if (s(0.0)).abs() > 1e-14 || (s(1.0) - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidPath(
                "reparameterization must fix both endpoints".into(),
            ));
        }
        let s = Arc::new(s);
        let s2 = Arc::clone(&s);
        let base = self.clone();
        let base_t = self.clone();
        Self::build(
            self.n,
            Arc::new(move |t| base.matrix_at(s(t))),
            Some(Arc::new(move |t| base_t.tangent(s2(t)) * ds(t))),
            self.closed,
            Vec::new(),
        )
    }

    /// `self` on `[0, ½]` followed by `other` on `[½, 1]`.
    pub fn concat(&self, other: &SympPath) -> Result<SympPath> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let gap = max_abs(&(self.matrix_at(1.0) - other.matrix_at(0.0)));
        if gap > PATH_TOL_CLOSED {
            return Err(Error::InvalidPath(format!(
                "segments do not meet: gap {gap:e}"
            )));
        }
        let closed = max_abs(&(other.matrix_at(1.0) - self.matrix_at(0.0))) <= PATH_TOL_CLOSED;
        let (a, b) = (self.clone(), other.clone());
        let (at, bt) = (self.clone(), other.clone());
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().map(|x| 0.5 * x).collect();
        breakpoints.push(0.5);
        breakpoints.extend(other.breakpoints.iter().map(|x| 0.5 + 0.5 * x));
        Self::build(
            self.n,
            Arc::new(move |t| {
                if t < 0.5 {
                    a.matrix_at(2.0 * t)
                } else {
                    b.matrix_at(2.0 * t - 1.0)
                }
            }),
            Some(Arc::new(move |t| {
                if t < 0.5 {
                    at.tangent(2.0 * t) * 2.0
                } else {
                    bt.tangent(2.0 * t - 1.0) * 2.0
                }
            })),
            closed,
            breakpoints,
        )
    }
}

/// Phase value with the quadrature's error estimate and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl From<QuadResult> for PhaseResult {
    fn from(q: QuadResult) -> Self {
        Self {
            value: q.value,
            error_estimate: q.error_estimate,
            evaluations: q.evaluations,
        }
    }
}

/// Connection pairing with precomputed `Ω` and weights.
struct Connection {
    omega: DMatrix<f64>,
    weight: Vec<f64>,
    hbar: f64,
}

impl Connection {
    fn new(n: usize, p: &OscParams) -> Result<Self> {
        p.check_modes(n)?;
        Ok(Self {
            omega: omega(n)?,
            weight: p.connection_weight().iter().copied().collect(),
            hbar: p.hbar(),
        })
    }

    /// `−(1/4ħ) Tr[K Mᵀ Ω dM]` with `K` diagonal.
    fn pair(&self, m: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
        let prod = m.transpose() * (&self.omega * dm);
        let tr: f64 = self
            .weight
            .iter()
            .enumerate()
            .map(|(i, w)| w * prod[(i, i)])
            .sum();
        -tr / (4.0 * self.hbar)
    }

    /// `(1/4ħ) Tr[Ω M K dMᵀ]`, the bulk term after integrating by parts.
    fn pair_transposed(&self, m: &DMatrix<f64>, dm: &DMatrix<f64>) -> f64 {
        let mut mk = m.clone();
        for (j, w) in self.weight.iter().enumerate() {
            mk.column_mut(j).scale_mut(*w);
        }
        let prod = &self.omega * mk * dm.transpose();
        prod.trace() / (4.0 * self.hbar)
    }
}

/// The connection evaluated on a tangent: `−(1/4ħ) Tr[diag(L², ħ²L⁻²) Mᵀ Ω dM]`.
pub fn connection_integrand(m: &SympMatrix, dm: &DMatrix<f64>, p: &OscParams) -> Result<f64> {
    let n = m.modes();
    if dm.shape() != (2 * n, 2 * n) {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: dm.nrows(),
        });
    }
    Ok(Connection::new(n, p)?.pair(m.matrix(), dm))
}

/// `γ = ∫₀¹ 𝒜(dM/dt) dt`.
pub fn integrate_phase(path: &SympPath, p: &OscParams, quad: &QuadSpec) -> Result<PhaseResult> {
    let conn = Connection::new(path.modes(), p)?;
    let q = integrate(
        |t| conn.pair(&path.matrix_at(t), &path.tangent(t)),
        0.0,
        1.0,
        path.breakpoints(),
        quad,
    )?;
    Ok(q.into())
}

/// Phase from the integrated-by-parts form, with its boundary term reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPhaseResult {
    pub phase: PhaseResult,
    /// `(1/2ħ) [Tr(Ω V)]₀¹`, already subtracted from `phase.value`.
    pub boundary_term: f64,
    /// Largest `|Tr(Ω V(t))|` over every point the quadrature visited.
    pub max_trace_omega_v: f64,
    /// False when the path is open; the bulk integral alone is then not the full answer.
    pub closed_path: bool,
}

fn trace_omega_v(m: &DMatrix<f64>, p: &OscParams, omega: &DMatrix<f64>) -> Result<f64> {
    let m = SympMatrix::with_tolerance(m.clone(), f64::INFINITY)?;
    Ok((omega * covariance(&m, p)?.matrix()).trace())
}

/// `γ = (1/4ħ) ∫ Tr[Ω M K dMᵀ] − (1/2ħ) [Tr(Ω V)]₀¹`.
///
/// `Tr(Ω V)` vanishes identically for symmetric `V`; it is still evaluated at
/// every visited point and its largest magnitude reported.
pub fn integrate_phase_boundary_form(
    path: &SympPath,
    p: &OscParams,
    quad: &QuadSpec,
) -> Result<BoundaryPhaseResult> {
    let conn = Connection::new(path.modes(), p)?;
    let mut max_trace = 0.0_f64;
    let mut trace_err = None;
    let q = integrate(
        |t| {
            let m = path.matrix_at(t);
            match trace_omega_v(&m, p, &conn.omega) {
                Ok(tr) => max_trace = max_trace.max(tr.abs()),
                Err(e) => trace_err = Some(e),
            }
            conn.pair_transposed(&m, &path.tangent(t))
        },
        0.0,
        1.0,
        path.breakpoints(),
        quad,
    )?;
    if let Some(e) = trace_err {
        return Err(e);
    }
    let t0 = trace_omega_v(&path.matrix_at(0.0), p, &conn.omega)?;
    let t1 = trace_omega_v(&path.matrix_at(1.0), p, &conn.omega)?;
    max_trace = max_trace.max(t0.abs()).max(t1.abs());
    let boundary_term = (t1 - t0) / (2.0 * p.hbar());
    let mut phase: PhaseResult = q.into();
    phase.value -= boundary_term;
    Ok(BoundaryPhaseResult {
        phase,
        boundary_term,
        max_trace_omega_v: max_trace,
        closed_path: path.is_closed(),
    })
}

/// Tolerance on `‖B‖_max` for the lower block-triangular form.
pub const B_ZERO_TOL: f64 = 1e-12;

/// Tolerance on `‖D − A⁻ᵀ‖_max` for the lower block-triangular form.
pub const D_INVERSE_TOL: f64 = 1e-10;

const B_ZERO_CHECKS: usize = 32;

fn check_b_zero(m: &DMatrix<f64>, n: usize, t: f64) -> Result<()> {
    let b = m.view((0, n), (n, n));
    let bmax = b.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if bmax > B_ZERO_TOL {
        return Err(Error::NotBZeroForm(format!("‖B({t})‖ = {bmax:e}")));
    }
    let a = m.view((0, 0), (n, n)).into_owned();
    let d = m.view((n, n), (n, n)).into_owned();
    let Some(a_inv) = a.try_inverse() else {
        return Err(Error::NotBZeroForm(format!("A({t}) is singular")));
    };
    let gap = max_abs(&(d - a_inv.transpose()));
    if gap > D_INVERSE_TOL {
        return Err(Error::NotBZeroForm(format!(
            "‖D − A⁻ᵀ‖ at t = {t} is {gap:e}"
        )));
    }
    Ok(())
}

/// Phase for `M(t) = [[A, 0], [C, A⁻ᵀ]]`: `γ = −(1/4ħ) ∫ Tr[L² Aᵀ dC − L² Cᵀ dA]`.
///
/// This drops the exact differential `(ħ/4) d Tr[L⁻² A⁻¹ A⁻ᵀ]` carried by the
/// lower-right block, so it agrees with [`integrate_phase`] on closed paths
/// (and on any path with `A(0) = A(1)`).
pub fn phase_b_zero(path: &SympPath, p: &OscParams, quad: &QuadSpec) -> Result<PhaseResult> {
    let n = path.modes();
    p.check_modes(n)?;
    for k in 0..=B_ZERO_CHECKS {
        let t = k as f64 / B_ZERO_CHECKS as f64;
        check_b_zero(&path.matrix_at(t), n, t)?;
    }
    let l2: Vec<f64> = p.lengths().iter().map(|l| l * l).collect();
    let hbar = p.hbar();
    let mut violation = None;
    let q = integrate(
        |t| {
            let m = path.matrix_at(t);
            if violation.is_none() {
                if let Err(e) = check_b_zero(&m, n, t) {
                    violation = Some(e);
                }
            }
            let dm = path.tangent(t);
            let a = m.view((0, 0), (n, n));
            let c = m.view((n, 0), (n, n));
            let da = dm.view((0, 0), (n, n));
            let dc = dm.view((n, 0), (n, n));
            let x = a.transpose() * dc - c.transpose() * da;
            let tr: f64 = l2.iter().enumerate().map(|(i, w)| w * x[(i, i)]).sum();
            -tr / (4.0 * hbar)
        },
        0.0,
        1.0,
        path.breakpoints(),
        quad,
    )?;
    if let Some(e) = violation {
        return Err(e);
    }
    Ok(q.into())
}

/// Phases before and after a constant left translation of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceCheck {
    pub original: PhaseResult,
    pub transformed: PhaseResult,
    pub difference: f64,
}

pub fn check_canonical_invariance(
    path: &SympPath,
    fixed: &SympMatrix,
    p: &OscParams,
    quad: &QuadSpec,
) -> Result<InvarianceCheck> {
    let original = integrate_phase(path, p, quad)?;
    let transformed = integrate_phase(&path.left_translated(fixed)?, p, quad)?;
    Ok(InvarianceCheck {
        original,
        transformed,
        difference: (transformed.value - original.value).abs(),
    })
}
