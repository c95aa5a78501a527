//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

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
use geophase::squeeze::squeeze_circle_path;
use geophase::symplectic::{block_decompose, SympMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_0001;
const RADII: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn circle_phase(modes: usize, r: f64, p: &OscParams) -> (f64, Duration) {
    let start = Instant::now();
    let path = squeeze_circle_path(modes, r, p).expect("valid circle");
    let g = integrate_phase(&path, p, &QuadSpec::default()).expect("phase converges");
    (g.value, start.elapsed())
}

fn single_mode_squeeze() -> Outcome {
    let p = OscParams::unit(1).unwrap();
    let mut worst_rel = 0.0_f64;
    let mut slowest = Duration::ZERO;
    for r in RADII {
        let (g, dt) = circle_phase(1, r, &p);
        let reference = -PI * r.sinh().powi(2);
        worst_rel = worst_rel.max((g - reference).abs() / reference.abs());
        slowest = slowest.max(dt);
    }
    Outcome::new(
        worst_rel <= 1e-8 && slowest < Duration::from_secs(1),
        format!(
            "single-mode circle vs -pi sinh^2 R: max rel err {worst_rel:.2e} (<= 1e-8), slowest run {:.3} s (< 1 s)",
            slowest.as_secs_f64()
        ),
    )
}

fn two_mode_squeeze() -> Outcome {
    let p1 = OscParams::unit(1).unwrap();
    let p2 = OscParams::unit(2).unwrap();
    let mut worst_rel = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for r in RADII {
        let (g1, _) = circle_phase(1, r, &p1);
        let (g2, _) = circle_phase(2, r, &p2);
        let reference = -2.0 * PI * r.sinh().powi(2);
        worst_rel = worst_rel.max((g2 - reference).abs() / reference.abs());
        worst_ratio = worst_ratio.max((g2 / g1 - 2.0).abs());
    }
    Outcome::new(
        worst_rel <= 1e-8 && worst_ratio <= 1e-9,
        format!(
            "two-mode circle vs -2 pi sinh^2 R: max rel err {worst_rel:.2e} (<= 1e-8), |ratio - 2| {worst_ratio:.2e} (<= 1e-9)"
        ),
    )
}

fn unit_independence() -> Outcome {
    let hbars = [0.5, 1.0, 2.0];
    let lengths = [0.3, 1.0, 3.0];
    let mut worst = 0.0_f64;
    let mut runs = 0;
    for modes in [1, 2] {
        for r in RADII {
            let (base, _) = circle_phase(modes, r, &OscParams::unit(modes).unwrap());
            let length_sets: Vec<Vec<f64>> = if modes == 1 {
                lengths.iter().map(|&l| vec![l]).collect()
            } else {
                lengths
                    .iter()
                    .flat_map(|&a| lengths.iter().map(move |&b| vec![a, b]))
                    .collect()
            };
            for h in hbars {
                for ls in &length_sets {
                    let p = OscParams::new(h, ls.clone()).unwrap();
                    let (g, _) = circle_phase(modes, r, &p);
                    worst = worst.max((g - base).abs() / base.abs());
                    runs += 1;
                }
            }
        }
    }
    Outcome::new(
        worst <= 1e-9,
        format!(
            "hbar and length independence over {runs} runs: max rel change {worst:.2e} (<= 1e-9)"
        ),
    )
}

fn closed_form_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut fallback = 0;
    let mut forced = 0;
    let mut forced_routed = true;
    for k in 0..1000 {
        let degenerate = k % 10 == 0;
        let g = if degenerate {
            degenerate_sp4_generator(&mut rng)
        } else {
            random_sp4_generator(&mut rng)
        };
        let e = closed_form_exp(&g);
        if e.branch() == ExpBranch::DegenerateFallback {
            fallback += 1;
        }
        if degenerate {
            forced += 1;
            forced_routed &= e.branch() == ExpBranch::DegenerateFallback;
        }
        let oracle = generic_exp(&g).unwrap();
        worst = worst.max(max_abs(&(e.matrix() - oracle)));
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-9 && forced >= 100 && forced_routed && elapsed < Duration::from_secs(10),
        format!(
            "closed-form vs dense exponential on 1000 generators: max dev {worst:.2e} (<= 1e-9), {forced} forced degenerate, {fallback} via fallback, {:.3} s (< 10 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn coefficient_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0_f64;
    let mut accepted = 0;
    while accepted < 200 {
        let g = random_sp4_generator(&mut rng);
        let (lp, lm) = eigenvalues(&g);
        if (lp - lm).norm() < 1e-3 * 1f64.max(lp.norm()).max(lm.norm()) {
            continue;
        }
        accepted += 1;
        for n in 1..=10 {
            let rec = coeff_recurrence(&g, n).unwrap();
            let closed = coeff_closed(&g, n).unwrap();
            let scale = rec.max_abs().max(f64::MIN_POSITIVE);
            let dev = (rec.alpha - closed.alpha)
                .abs()
                .max((rec.beta - closed.beta).abs())
                .max((rec.gamma - closed.gamma).abs());
            worst = worst.max(dev / scale);
        }
    }
    Outcome::new(
        worst <= 1e-9,
        format!("closed vs recurrence coefficients, n <= 10, 200 generators: max rel dev {worst:.2e} (<= 1e-9)"),
    )
}

fn purity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst_det = 0.0_f64;
    let mut worst_eig = 0.0_f64;
    for k in 0..200 {
        let n = 1 + k % 3;
        let m = random_symplectic(&mut rng, n, 0.5).unwrap();
        let v = covariance_quadrature(&m).unwrap();
        let det = (v.matrix() * 2.0).determinant();
        worst_det = worst_det.max((det - 1.0).abs());
        for nu in v.symplectic_spectrum() {
            worst_eig = worst_eig.max((nu - 1.0).abs());
        }
    }
    Outcome::new(
        worst_det <= 1e-10 && worst_eig <= 1e-9,
        format!(
            "pure covariance on 200 matrices: |det 2V - 1| {worst_det:.2e} (<= 1e-10), ||eig| - 1| {worst_eig:.2e} (<= 1e-9)"
        ),
    )
}

fn canonical_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst = 0.0_f64;
    for k in 0..20 {
        for modes in [1, 2] {
            let p = OscParams::unit(modes).unwrap();
            let r = RADII[k % RADII.len()];
            let path = squeeze_circle_path(modes, r, &p).unwrap();
            let fixed = random_symplectic(&mut rng, modes, 0.5).unwrap();
            let check =
                check_canonical_invariance(&path, &fixed, &p, &QuadSpec::default()).unwrap();
            worst = worst.max(check.difference);
        }
    }
    Outcome::new(
        worst <= 1e-8,
        format!(
            "left translation by 20 fixed matrices, both circles: max change {worst:.2e} (<= 1e-8)"
        ),
    )
}

fn two_form_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut paths: Vec<(SympPath, OscParams)> = Vec::new();
    for modes in [1, 2] {
        let p = OscParams::unit(modes).unwrap();
        for r in RADII {
            paths.push((squeeze_circle_path(modes, r, &p).unwrap(), p.clone()));
        }
    }
    for k in 0..10 {
        let n = 1 + k % 3;
        let p = OscParams::new(
            rng.random_range(0.5..2.0),
            (0..n).map(|_| rng.random_range(0.3..3.0)).collect(),
        )
        .unwrap();
        paths.push((random_loop(&mut rng, n, 0.4).unwrap(), p));
    }
    let q = QuadSpec::default();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_trace = 0.0_f64;
    let mut all_closed = true;
    for (path, p) in &paths {
        let a = integrate_phase(path, p, &q).unwrap();
        let b = integrate_phase_boundary_form(path, p, &q).unwrap();
        let budget = a.error_estimate
            + b.phase.error_estimate
            + 64.0 * f64::EPSILON * a.value.abs().max(1.0);
        worst_excess = worst_excess.max((a.value - b.phase.value).abs() - budget);
        worst_trace = worst_trace.max(b.max_trace_omega_v);
        all_closed &= b.closed_path;
    }
    Outcome::new(
        worst_excess <= 0.0 && worst_trace <= 1e-12 && all_closed,
        format!(
            "two connection forms on {} closed paths: worst |diff| - error budget {worst_excess:.2e} (<= 0), max |Tr(Omega V)| {worst_trace:.2e} (<= 1e-12)",
            paths.len()
        ),
    )
}

fn lower_triangular_branch() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let q = QuadSpec::default();
    let mut worst = 0.0_f64;
    for k in 0..20 {
        let n = 1 + k % 3;
        let p = OscParams::new(
            rng.random_range(0.5..2.0),
            (0..n).map(|_| rng.random_range(0.3..3.0)).collect(),
        )
        .unwrap();
        let path = random_b_zero_loop(&mut rng, n, 0.4, true).unwrap();
        let special = phase_b_zero(&path, &p, &q).unwrap();
        let general = integrate_phase(&path, &p, &q).unwrap();
        worst = worst.max((special.value - general.value).abs());
    }
    let mut worst_null = 0.0_f64;
    for k in 0..5 {
        let n = 1 + k % 3;
        let p = OscParams::unit(n).unwrap();
        let path = random_b_zero_loop(&mut rng, n, 0.4, false).unwrap();
        worst_null = worst_null.max(phase_b_zero(&path, &p, &q).unwrap().value.abs());
    }
    Outcome::new(
        worst <= 1e-9 && worst_null <= 1e-12,
        format!(
            "B = 0 formula vs general integral on 20 closed paths: max diff {worst:.2e} (<= 1e-9), C = 0 phase {worst_null:.2e} (<= 1e-12)"
        ),
    )
}

fn kernel_overlap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let grid = OverlapGrid::default();
    let mut worst_mod = 0.0_f64;
    let mut worst_refine = 0.0_f64;
    let mut points = 0;
    while points < 10 {
        let m: SympMatrix = random_symplectic(&mut rng, 1, 1.0).unwrap();
        if block_decompose(&m).b[(0, 0)].abs() < 0.05 {
            continue;
        }
        points += 1;
        let p =
            OscParams::new(rng.random_range(0.5..2.0), vec![rng.random_range(0.5..2.0)]).unwrap();
        let (a, b) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let coarse = numeric_overlap_n1(&m, &p, a, b, &grid).unwrap();
        let fine = numeric_overlap_n1(&m, &p, a, b, &grid.refined()).unwrap();
        let exact = weyl_amplitude(&m, &p, &[a], &[b]).unwrap();
        worst_mod = worst_mod.max((coarse.norm() - exact).abs());
        worst_refine = worst_refine.max((fine - coarse).norm());
    }
    Outcome::new(
        worst_mod <= 1e-6 && worst_refine < 1e-7,
        format!(
            "kernel overlap at 10 points: max modulus err {worst_mod:.2e} (<= 1e-6), grid doubling change {worst_refine:.2e} (< 1e-7)"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("single-mode squeeze phase", single_mode_squeeze),
        ("two-mode squeeze phase", two_mode_squeeze),
        ("parameter independence", unit_independence),
        ("closed-form exponential oracle", closed_form_oracle),
        ("coefficient consistency", coefficient_consistency),
        ("covariance purity", purity),
        ("canonical invariance", canonical_invariance),
        ("two-form agreement", two_form_agreement),
        ("lower block-triangular branch", lower_triangular_branch),
        ("kernel overlap oracle", kernel_overlap),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failures += 1;
        }
        println!("[{tag}] {:>2}. {name}: {}", k + 1, outcome.detail);
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
