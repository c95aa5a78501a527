//! Seeded oracle checks run by `geophase verify`.

use geophase::gaussian::{
    covariance_quadrature, numeric_overlap_n1, weyl_amplitude, OscParams, OverlapGrid,
};
use geophase::phase::{
    check_canonical_invariance, integrate_phase, integrate_phase_boundary_form, phase_b_zero,
    SympPath,
};
use geophase::quadrature::QuadSpec;
use geophase::sampling::{
    degenerate_sp4_generator, random_b_zero_loop, random_loop, random_sp4_generator,
    random_symplectic,
};
use geophase::sp4::{
    closed_form_exp, coeff_closed, coeff_recurrence, eigenvalues, generic_exp, ExpBranch,
};
use geophase::squeeze::{reference_phase, squeeze_circle_path};
use geophase::symplectic::{block_decompose, symplectic_residual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{Cell, Table};

/// Size of the injected error used by the negative-control hook.
const PERTURBATION: f64 = 1e-3;

pub const CHECK_NAMES: [&str; 9] = [
    "expm",
    "coefficients",
    "symplecticity",
    "two-form",
    "invariance",
    "b-zero",
    "overlap",
    "purity",
    "squeeze",
];

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub max_residual: f64,
    pub limit: f64,
    pub detail: String,
}

fn check(
    name: &'static str,
    max_residual: f64,
    limit: f64,
    extra_ok: bool,
    detail: String,
) -> CheckResult {
    CheckResult {
        name,
        pass: max_residual <= limit && extra_ok,
        max_residual,
        limit,
        detail,
    }
}

fn max_abs(m: &geophase::nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> OscParams {
    let hbar = rng.random_range(0.5..2.0);
    let lengths = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
    OscParams::new(hbar, lengths).expect("positive parameters")
}

fn expm(rng: &mut ChaCha8Rng, count: usize, delta: f64) -> CheckResult {
    let degenerate = (count / 10).max(1);
    let mut worst = 0.0_f64;
    let mut routed = 0;
    for k in 0..count + degenerate {
        let forced = k >= count;
        let g = if forced {
            degenerate_sp4_generator(rng)
        } else {
            random_sp4_generator(rng)
        };
        let e = closed_form_exp(&g);
        if forced && e.branch() == ExpBranch::DegenerateFallback {
            routed += 1;
        }
        let mut m = e.matrix().clone();
        m[(0, 0)] += delta;
        let oracle = generic_exp(&g).expect("finite generator");
        worst = worst.max(max_abs(&(m - oracle)));
    }
    check(
        "expm",
        worst,
        1e-9,
        routed == degenerate,
        format!("{count} random + {degenerate} degenerate generators, {routed} via fallback"),
    )
}

fn coefficients(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut accepted = 0;
    while accepted < 200 {
        let g = random_sp4_generator(rng);
        let (lp, lm) = eigenvalues(&g);
        if (lp - lm).norm() < 1e-3 * 1f64.max(lp.norm()).max(lm.norm()) {
            continue;
        }
        accepted += 1;
        for n in 1..=10 {
            let (Ok(rec), Ok(closed)) = (coeff_recurrence(&g, n), coeff_closed(&g, n)) else {
                worst = f64::INFINITY;
                continue;
            };
            let scale = rec.max_abs().max(f64::MIN_POSITIVE);
            let dev = (rec.alpha - closed.alpha - delta * scale)
                .abs()
                .max((rec.beta - closed.beta).abs())
                .max((rec.gamma - closed.gamma).abs());
            worst = worst.max(dev / scale);
        }
    }
    check(
        "coefficients",
        worst,
        1e-9,
        true,
        "200 generators, n = 1..10, relative".into(),
    )
}

fn symplecticity(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let e = closed_form_exp(&random_sp4_generator(rng));
        worst = worst.max(e.residual());
    }
    for k in 0..100 {
        let n = 1 + k % 3;
        let a = random_symplectic(rng, n, 1.0).expect("valid sample");
        let b = random_symplectic(rng, n, 1.0).expect("valid sample");
        let mut m = a.compose(&b).expect("same size").into_matrix();
        m[(0, 0)] += delta;
        worst = worst.max(symplectic_residual(&m).expect("square"));
    }
    check(
        "symplecticity",
        worst,
        1e-9,
        true,
        "200 closed-form outputs, 100 products".into(),
    )
}

fn two_form(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let q = QuadSpec::default();
    let mut paths: Vec<(SympPath, OscParams)> = Vec::new();
    for modes in [1, 2] {
        let p = OscParams::unit(modes).expect("unit");
        for r in [0.5, 1.0] {
            paths.push((
                squeeze_circle_path(modes, r, &p).expect("circle"),
                p.clone(),
            ));
        }
    }
    for k in 0..6 {
        let n = 1 + k % 3;
        let p = random_params(rng, n);
        paths.push((random_loop(rng, n, 0.4).expect("loop"), p));
    }
    let mut worst_diff = 0.0_f64;
    let mut within_budget = true;
    let mut worst_trace = 0.0_f64;
    for (path, p) in &paths {
        let (Ok(a), Ok(b)) = (
            integrate_phase(path, p, &q),
            integrate_phase_boundary_form(path, p, &q),
        ) else {
            within_budget = false;
            continue;
        };
        let diff = (a.value + delta - b.phase.value).abs();
        let budget = a.error_estimate
            + b.phase.error_estimate
            + 64.0 * f64::EPSILON * a.value.abs().max(1.0);
        within_budget &= diff <= budget;
        worst_diff = worst_diff.max(diff);
        worst_trace = worst_trace.max(b.max_trace_omega_v);
    }
    check(
        "two-form",
        worst_trace,
        1e-12,
        within_budget,
        format!(
            "{} closed paths, max |difference| {worst_diff:.3e} within error estimates: {within_budget}",
            paths.len()
        ),
    )
}

fn invariance(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let q = QuadSpec::default();
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let modes = 1 + k % 2;
        let p = OscParams::unit(modes).expect("unit");
        let path = squeeze_circle_path(modes, 1.0, &p).expect("circle");
        let fixed = random_symplectic(rng, modes, 0.5).expect("valid sample");
        match check_canonical_invariance(&path, &fixed, &p, &q) {
            Ok(c) => worst = worst.max((c.transformed.value + delta - c.original.value).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check(
        "invariance",
        worst,
        1e-8,
        true,
        "20 left translations of the squeeze circles".into(),
    )
}

fn b_zero(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let q = QuadSpec::default();
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let n = 1 + k % 3;
        let p = random_params(rng, n);
        let path = random_b_zero_loop(rng, n, 0.4, true).expect("loop");
        match (phase_b_zero(&path, &p, &q), integrate_phase(&path, &p, &q)) {
            (Ok(s), Ok(g)) => worst = worst.max((s.value + delta - g.value).abs()),
            _ => worst = f64::INFINITY,
        }
    }
    let mut worst_null = 0.0_f64;
    for n in 1..=3 {
        let p = OscParams::unit(n).expect("unit");
        let path = random_b_zero_loop(rng, n, 0.4, false).expect("loop");
        worst_null =
            worst_null.max(phase_b_zero(&path, &p, &q).map_or(f64::INFINITY, |g| g.value.abs()));
    }
    check(
        "b-zero",
        worst,
        1e-9,
        worst_null <= 1e-12,
        format!("20 closed paths; C = 0 phase {worst_null:.3e}"),
    )
}

fn overlap(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let grid = OverlapGrid::default();
    let mut worst = 0.0_f64;
    let mut worst_refine = 0.0_f64;
    let mut points = 0;
    while points < 10 {
        let m = random_symplectic(rng, 1, 1.0).expect("valid sample");
        if block_decompose(&m).b[(0, 0)].abs() < 0.05 {
            continue;
        }
        points += 1;
        let p = random_params(rng, 1);
        let (a, b) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let (Ok(coarse), Ok(fine), Ok(exact)) = (
            numeric_overlap_n1(&m, &p, a, b, &grid),
            numeric_overlap_n1(&m, &p, a, b, &grid.refined()),
            weyl_amplitude(&m, &p, &[a], &[b]),
        ) else {
            worst = f64::INFINITY;
            continue;
        };
        worst = worst.max((coarse.norm() + delta - exact).abs());
        worst_refine = worst_refine.max((fine - coarse).norm());
    }
    check(
        "overlap",
        worst,
        1e-6,
        worst_refine < 1e-7,
        format!("10 points; grid doubling changes result by {worst_refine:.3e}"),
    )
}

fn purity(rng: &mut ChaCha8Rng, delta: f64) -> CheckResult {
    let mut worst = 0.0_f64;
    for k in 0..200 {
        let m = random_symplectic(rng, 1 + k % 3, 0.5).expect("valid sample");
        let v = covariance_quadrature(&m).expect("positive definite");
        let det = (v.matrix() * 2.0).determinant();
        worst = worst.max((det + delta - 1.0).abs());
        for nu in v.symplectic_spectrum() {
            worst = worst.max((nu - 1.0).abs());
        }
    }
    check(
        "purity",
        worst,
        1e-9,
        true,
        "200 random symplectic matrices".into(),
    )
}

fn squeeze(delta: f64) -> CheckResult {
    let q = QuadSpec::default();
    let mut worst = 0.0_f64;
    for modes in [1, 2] {
        let p = OscParams::unit(modes).expect("unit");
        for r in [0.25, 0.5, 1.0, 2.0] {
            let reference = reference_phase(modes, r).expect("valid radius");
            let rel = squeeze_circle_path(modes, r, &p)
                .and_then(|path| integrate_phase(&path, &p, &q))
                .map_or(f64::INFINITY, |g| {
                    (g.value + delta - reference).abs() / reference.abs().max(1.0)
                });
            worst = worst.max(rel);
        }
    }
    check(
        "squeeze",
        worst,
        1e-8,
        true,
        "both circles, R in {0.25, 0.5, 1, 2}".into(),
    )
}

/// Runs every check in a fixed order from one seeded stream per check.
pub fn run_checks(seed: u64, count: usize, perturb: Option<&str>) -> Vec<CheckResult> {
    let delta = |name: &str| {
        if perturb == Some(name) {
            PERTURBATION
        } else {
            0.0
        }
    };
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
    vec![
        expm(&mut rng(0), count, delta("expm")),
        coefficients(&mut rng(1), delta("coefficients")),
        symplecticity(&mut rng(2), delta("symplecticity")),
        two_form(&mut rng(3), delta("two-form")),
        invariance(&mut rng(4), delta("invariance")),
        b_zero(&mut rng(5), delta("b-zero")),
        overlap(&mut rng(6), delta("overlap")),
        purity(&mut rng(7), delta("purity")),
        squeeze(delta("squeeze")),
    ]
}

pub fn table(results: &[CheckResult], seed: u64) -> Table {
    let mut t = Table::new(["check", "status", "max_residual", "limit", "detail", "seed"]);
    for r in results {
        t.push(vec![
            Cell::from(r.name),
            Cell::from(if r.pass { "PASS" } else { "FAIL" }),
            Cell::from(r.max_residual),
            Cell::from(r.limit),
            Cell::from(r.detail.clone()),
            Cell::from(seed),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_run_order() {
        let results = run_checks(1, 20, None);
        let names: Vec<&str> = results.iter().map(|r| r.name).collect();
        assert_eq!(names, CHECK_NAMES);
        assert!(results.iter().all(|r| r.pass), "{results:?}");
    }

    #[test]
    fn perturbation_fails_only_its_check() {
        let results = run_checks(1, 20, Some("purity"));
        for r in results {
            assert_eq!(r.pass, r.name != "purity", "{}", r.name);
        }
    }
}
