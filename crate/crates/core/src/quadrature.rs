//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) with a global
//! error queue, and fixed composite Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Default absolute tolerance for adaptive integration.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

/// Default cap on integrand evaluations for adaptive integration.
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

/// Panels the adaptive scheme starts from on each breakpoint interval.
const INITIAL_PANELS: usize = 8;

/// How to integrate over an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadSpec {
    /// Refine the panel with the largest Kronrod error until the summed
    /// estimate drops below `abs_tol` or `max_evals` is reached.
    Adaptive { abs_tol: f64, max_evals: usize },
    /// Composite Gauss–Legendre with `panels` equal panels of `order` nodes.
    Fixed { order: usize, panels: usize },
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec::Adaptive {
            abs_tol: DEFAULT_ABS_TOL,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

impl QuadSpec {
    pub fn adaptive(abs_tol: f64) -> Self {
        QuadSpec::Adaptive {
            abs_tol,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            QuadSpec::Adaptive { abs_tol, max_evals } => {
                if !(abs_tol > 0.0 && abs_tol.is_finite()) {
                    return Err(Error::InvalidGrid(format!(
                        "tolerance must be positive, got {abs_tol}"
                    )));
                }
                if max_evals < 15 {
                    return Err(Error::InvalidGrid("evaluation cap below 15".into()));
                }
            }
            QuadSpec::Fixed { order, panels } => {
                if order < 2 || panels == 0 {
                    return Err(Error::InvalidGrid(format!(
                        "fixed rule needs order >= 2 and panels >= 1, got {order}/{panels}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Value, error estimate and evaluation count of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// Kronrod abscissae (non-negative half) and weights; Gauss-7 weights on the
// odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn eval_checked<F: FnMut(f64) -> f64>(f: &mut F, t: f64) -> Result<f64> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { t })
    }
}

/// One 15-point Kronrod panel: `(kronrod, |kronrod − gauss|)`.
fn kronrod_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval_checked(f, center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = eval_checked(f, center - dx)? + eval_checked(f, center + dx)?;
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Integrates `f` over `[a, b]`, splitting first at every interior breakpoint.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    spec: &QuadSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.dedup();
    match *spec {
        QuadSpec::Adaptive { abs_tol, max_evals } => adaptive(&mut f, &cuts, abs_tol, max_evals),
        QuadSpec::Fixed { order, panels } => fixed(&mut f, &cuts, order, panels),
    }
}

fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    cuts: &[f64],
    abs_tol: f64,
    max_evals: usize,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let width = (w[1] - w[0]) / INITIAL_PANELS as f64;
        for k in 0..INITIAL_PANELS {
            let pa = w[0] + k as f64 * width;
            let pb = if k + 1 == INITIAL_PANELS {
                w[1]
            } else {
                pa + width
            };
            let (value, error) = kronrod_panel(f, pa, pb)?;
            evaluations += 15;
            heap.push(Panel {
                a: pa,
                b: pb,
                value,
                error,
            });
        }
    }
    let total_error = |h: &BinaryHeap<Panel>| h.iter().map(|p| p.error).sum::<f64>();
    loop {
        let err = total_error(&heap);
        if err <= abs_tol {
            break;
        }
        if evaluations + 30 > max_evals {
            return Err(Error::BudgetExhausted {
                value: sum_sorted(&heap),
                error_estimate: err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel can no longer be split in floating point; keep what we have.
            heap.push(worst);
            break;
        }
        for (pa, pb) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod_panel(f, pa, pb)?;
            heap.push(Panel {
                a: pa,
                b: pb,
                value,
                error,
            });
        }
        evaluations += 30;
    }
    Ok(QuadResult {
        value: sum_sorted(&heap),
        error_estimate: total_error(&heap),
        evaluations,
    })
}

/// Sum of panel values in order of position, for reproducible rounding.
fn sum_sorted(heap: &BinaryHeap<Panel>) -> f64 {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels.iter().map(|p| p.value).sum()
}

fn fixed<F: FnMut(f64) -> f64>(
    f: &mut F,
    cuts: &[f64],
    order: usize,
    panels: usize,
) -> Result<QuadResult> {
    let high = gauss_legendre(order);
    let low = gauss_legendre(order - 1);
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let width = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let pa = w[0] + k as f64 * width;
            let pb = pa + width;
            let mut hi = 0.0;
            for (x, wt) in high.iter() {
                let t = map(*x, pa, pb);
                hi += wt * eval_checked(f, t)?;
            }
            let mut lo = 0.0;
            for (x, wt) in low.iter() {
                lo += wt * eval_checked(f, map(*x, pa, pb))?;
            }
            evaluations += 2 * order - 1;
            let half = 0.5 * width;
            value += hi * half;
            error_estimate += ((hi - lo) * half).abs();
        }
    }
    Ok(QuadResult {
        value,
        error_estimate,
        evaluations,
    })
}

fn map(x: f64, a: f64, b: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * x
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// `(Pₙ(x), Pₙ′(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre sum over `[a, b]` for any vector-like integrand.
pub fn composite_gauss_legendre<T, F>(mut f: F, a: f64, b: f64, order: usize, panels: usize) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    let rule = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = T::default();
    for k in 0..panels {
        let pa = a + k as f64 * width;
        let pb = pa + width;
        let mut panel = T::default();
        for (x, w) in &rule {
            panel = panel + f(map(*x, pa, pb)) * *w;
        }
        acc = acc + panel * (0.5 * width);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for n in [1, 2, 5, 10, 20] {
            let rule = gauss_legendre(n);
            let wsum: f64 = rule.iter().map(|(_, w)| w).sum();
            assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-13);
            // exact through degree 2n-1
            let deg = 2 * n - 1;
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert_abs_diff_eq!(q, exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn adaptive_periodic_integrand() {
        // ∫₀¹ 1/(2 + cos 2πt) dt = 1/√3
        let r = integrate(
            |t| 1.0 / (2.0 + (2.0 * PI * t).cos()),
            0.0,
            1.0,
            &[],
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((r.value - 1.0 / 3f64.sqrt()).abs() <= 1e-10);
        assert!(r.error_estimate <= 1e-10);
        assert!(r.evaluations >= 120);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let err = integrate(
            |t| (t - 0.3).abs().sqrt(),
            0.0,
            1.0,
            &[],
            &QuadSpec::Adaptive {
                abs_tol: 1e-15,
                max_evals: 300,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
    }

    #[test]
    fn breakpoints_help_kinks() {
        let r = integrate(|t| (t - 0.3).abs(), 0.0, 1.0, &[0.3], &QuadSpec::default()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5 * (0.09 + 0.49), epsilon = 1e-14);
    }

    #[test]
    fn fixed_rule_and_nonfinite() {
        let r = integrate(
            |t| (3.0 * t).exp(),
            0.0,
            1.0,
            &[],
            &QuadSpec::Fixed {
                order: 10,
                panels: 4,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, (3f64.exp() - 1.0) / 3.0, epsilon = 1e-13);
        let err = integrate(
            |t| if t > 0.5 { f64::NAN } else { t },
            0.0,
            1.0,
            &[],
            &QuadSpec::Fixed {
                order: 3,
                panels: 2,
            },
        );
        assert!(matches!(err, Err(Error::NonFiniteIntegrand { .. })));
        assert!(integrate(|t| t, 0.0, 1.0, &[], &QuadSpec::adaptive(-1.0)).is_err());
    }

    #[test]
    fn composite_complex() {
        use num_complex::Complex64;
        let v: Complex64 =
            composite_gauss_legendre(|x| Complex64::new(0.0, x).exp(), 0.0, PI, 12, 4);
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(v.im, 2.0, epsilon = 1e-13);
    }
}
