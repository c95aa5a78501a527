use std::path::Path;

use anyhow::{anyhow, Context, Result};
use geophase::nalgebra::{DMatrix, Matrix2};
use geophase::phase::{integrate_phase, PhaseResult, SympPath};
use geophase::quadrature::QuadSpec;
use geophase::sp4::{closed_form_exp, generic_exp, Sp4Generator};
use geophase::squeeze::{reference_phase, squeeze_circle_path};
use geophase::symplectic::LieAlgElement;
use geophase::{Error as CoreError, OscParams};
use rayon::prelude::*;
use serde_json::json;

use crate::args::ExpmArgs;
use crate::config::{ConfigError, Mode, PathKind, Settings};
use crate::output::{emit, render_json, Cell, Table};
use crate::Failure;

fn quad(settings: &Settings) -> QuadSpec {
    QuadSpec::Adaptive {
        abs_tol: settings.tol,
        max_evals: settings.max_evals,
    }
}

fn squeeze_modes(kind: PathKind) -> usize {
    if kind == PathKind::Squeeze2 {
        2
    } else {
        1
    }
}

/// Reads generator samples: one per non-empty, non-`#` line, each holding the
/// `2n × 2n` symmetric generator in row-major order (whitespace or comma separated).
pub fn read_samples(path: &Path) -> Result<Vec<LieAlgElement>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read samples {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| ConfigError(format!("{}:{}: {msg}", path.display(), lineno + 1));
        let values: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| at(format!("{s:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        let k = (values.len() as f64).sqrt().round() as usize;
        if k == 0 || k * k != values.len() || !k.is_multiple_of(2) {
            return Err(at(format!(
                "{} entries do not form a 2n x 2n matrix",
                values.len()
            )));
        }
        let m = DMatrix::from_row_slice(k, k, &values);
        out.push(LieAlgElement::new(m).map_err(|e| at(e.to_string()))?);
    }
    if out.len() < 2 {
        return Err(ConfigError(format!(
            "{}: need at least two generator samples",
            path.display()
        )));
    }
    Ok(out)
}

fn classify(e: CoreError) -> Failure {
    match e {
        CoreError::BudgetExhausted { .. } => Failure::Budget(e.to_string()),
        other => Failure::Runtime(anyhow!(other)),
    }
}

pub fn run_phase(settings: &Settings) -> Result<(), Failure> {
    let (path, params, reference) = match settings.kind {
        PathKind::CustomSamples => {
            let samples = read_samples(settings.samples.as_deref().expect("checked in config"))
                .map_err(Failure::Config)?;
            let n = samples[0].modes();
            if let Some(m) = settings.modes {
                if m != n {
                    return Err(Failure::Config(ConfigError(format!(
                        "invalid `modes`: samples have {n} modes, got {m}"
                    ))));
                }
            }
            let lengths = settings.lengths_for(n).map_err(Failure::Config)?;
            let params = OscParams::new(settings.hbars[0], lengths)
                .map_err(|e| Failure::Config(ConfigError(e.to_string())))?;
            let path = SympPath::from_generator_samples(samples)
                .map_err(|e| Failure::Config(ConfigError(format!("samples: {e}"))))?;
            (path, params, None)
        }
        kind => {
            let n = squeeze_modes(kind);
            let r = settings.radii[0];
            let lengths = settings.lengths_for(n).map_err(Failure::Config)?;
            let params = OscParams::new(settings.hbars[0], lengths)
                .map_err(|e| Failure::Config(ConfigError(e.to_string())))?;
            let path = squeeze_circle_path(n, r, &params).map_err(classify)?;
            (path, params, Some(reference_phase(n, r).map_err(classify)?))
        }
    };
    let g = integrate_phase(&path, &params, &quad(settings)).map_err(classify)?;
    let n = path.modes();
    let mut columns = vec![
        "kind".to_owned(),
        "modes".to_owned(),
        "R".to_owned(),
        "hbar".to_owned(),
    ];
    columns.extend((1..=n).map(|j| format!("l{j}")));
    columns.extend(
        [
            "gamma",
            "error_estimate",
            "evaluations",
            "reference_phase",
            "abs_deviation",
            "closed",
            "seed",
        ]
        .map(String::from),
    );
    let mut table = Table::new(columns);
    let r = (settings.kind != PathKind::CustomSamples).then(|| settings.radii[0]);
    let mut row: Vec<Cell> = vec![
        settings.kind.name().into(),
        n.into(),
        r.into(),
        params.hbar().into(),
    ];
    row.extend(params.lengths().iter().map(|l| Cell::from(*l)));
    row.extend([
        g.value.into(),
        g.error_estimate.into(),
        g.evaluations.into(),
        reference.into(),
        reference.map(|x| (g.value - x).abs()).into(),
        path.is_closed().into(),
        settings.seed.into(),
    ]);
    table.push(row);
    let text = match settings.format {
        crate::args::Format::Csv => table.to_csv(),
        crate::args::Format::Json => {
            let rows = table.to_json_rows();
            render_json(&rows[0])
        }
    };
    emit(settings.out.as_deref(), &text).map_err(Failure::Runtime)
}

struct SweepPoint {
    r: f64,
    hbar: f64,
    length: f64,
}

fn sweep_row(
    kind: PathKind,
    point: &SweepPoint,
    spec: &QuadSpec,
) -> (Option<PhaseResult>, Option<f64>, String) {
    let n = squeeze_modes(kind);
    let reference = reference_phase(n, point.r).ok();
    let computed = OscParams::new(point.hbar, vec![point.length; n]).and_then(|p| {
        squeeze_circle_path(n, point.r, &p).and_then(|path| integrate_phase(&path, &p, spec))
    });
    match computed {
        Ok(g) => (Some(g), reference, "ok".to_owned()),
        Err(e) => (None, reference, format!("error: {e}")),
    }
}

pub fn run_sweep(settings: &Settings) -> Result<(), Failure> {
    if settings.kind == PathKind::CustomSamples {
        return Err(Failure::Config(ConfigError(
            "invalid `path.kind`: sweeps run over squeeze circles only".into(),
        )));
    }
    let n = squeeze_modes(settings.kind);
    let mut points = Vec::new();
    for &r in &settings.radii {
        for &hbar in &settings.hbars {
            for &length in &settings.lengths {
                points.push(SweepPoint { r, hbar, length });
            }
        }
    }
    // Lexicographic (R, hbar, l) order, independent of the order values were given in.
    points.sort_by(|a, b| {
        a.r.total_cmp(&b.r)
            .then(a.hbar.total_cmp(&b.hbar))
            .then(a.length.total_cmp(&b.length))
    });
    let spec = quad(settings);
    let results: Vec<_> = points
        .par_iter()
        .map(|p| sweep_row(settings.kind, p, &spec))
        .collect();

    let mut columns = vec!["R".to_owned(), "hbar".to_owned()];
    columns.extend((1..=n).map(|j| format!("l{j}")));
    columns.extend(
        [
            "gamma_quadrature",
            "gamma_reference",
            "deviation",
            "error_estimate",
            "evaluations",
            "status",
            "seed",
        ]
        .map(String::from),
    );
    let mut table = Table::new(columns);
    let mut failed = 0;
    for (p, (g, reference, status)) in points.iter().zip(results) {
        if g.is_none() {
            failed += 1;
        }
        let mut row: Vec<Cell> = vec![p.r.into(), p.hbar.into()];
        row.extend((0..n).map(|_| Cell::from(p.length)));
        let deviation = match (g, reference) {
            (Some(g), Some(r)) => Some((g.value - r).abs()),
            _ => None,
        };
        row.extend([
            g.map(|g| g.value).into(),
            reference.into(),
            deviation.into(),
            g.map(|g| g.error_estimate).into(),
            g.map(|g| g.evaluations).into(),
            status.into(),
            settings.seed.into(),
        ]);
        table.push(row);
    }
    emit(settings.out.as_deref(), &table.render(settings.format)).map_err(Failure::Runtime)?;
    if failed > 0 {
        return Err(Failure::Checks(format!("{failed} sweep row(s) failed")));
    }
    Ok(())
}

fn block(
    name: &str,
    flag: Option<&Vec<f64>>,
    file: Option<[[f64; 2]; 2]>,
    symmetric: bool,
) -> Result<Matrix2<f64>, ConfigError> {
    let m = match (flag, file) {
        (Some(v), _) => {
            if v.len() != 4 {
                return Err(ConfigError(format!(
                    "invalid `{name}`: expected 4 row-major entries, got {}",
                    v.len()
                )));
            }
            Matrix2::new(v[0], v[1], v[2], v[3])
        }
        (None, Some(rows)) => Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]),
        (None, None) => Matrix2::zeros(),
    };
    if m.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError(format!(
            "invalid `{name}`: entries must be finite"
        )));
    }
    if symmetric && (m[(0, 1)] - m[(1, 0)]).abs() > 1e-10 {
        return Err(ConfigError(format!(
            "invalid `{name}`: must be symmetric, off-diagonal entries differ by {:e}",
            (m[(0, 1)] - m[(1, 0)]).abs()
        )));
    }
    Ok(m)
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn run_expm(settings: &Settings, args: &ExpmArgs) -> Result<(), Failure> {
    let a = block("a", args.a.as_ref(), settings.expm.a, true).map_err(Failure::Config)?;
    let b = block("b", args.b.as_ref(), settings.expm.b, false).map_err(Failure::Config)?;
    let c = block("c", args.c.as_ref(), settings.expm.c, true).map_err(Failure::Config)?;
    // Symmetrize away sub-tolerance asymmetry before the stricter library check.
    let sym = |m: Matrix2<f64>| (m + m.transpose()) * 0.5;
    let g = Sp4Generator::new(sym(a), b, sym(c))
        .map_err(|e| Failure::Config(ConfigError(e.to_string())))?;
    let closed = closed_form_exp(&g);
    let generic = generic_exp(&g)
        .context("dense exponential")
        .map_err(Failure::Runtime)?;
    let deviation = (closed.matrix() - &generic).amax();
    let branch = closed.branch().to_string();
    let text = match settings.format {
        crate::args::Format::Json => render_json(&json!({
            "branch": branch,
            "max_deviation": deviation,
            "symplectic_residual": closed.residual(),
            "closed_form": rows_of(closed.matrix()),
            "generic": rows_of(&generic),
            "seed": settings.seed,
        })),
        crate::args::Format::Csv => {
            let mut t = Table::new(["matrix", "row", "c1", "c2", "c3", "c4"]);
            for (name, m) in [("closed_form", closed.matrix()), ("generic", &generic)] {
                for (i, row) in m.row_iter().enumerate() {
                    let mut cells = vec![Cell::from(name), Cell::from(i + 1)];
                    cells.extend(row.iter().map(|x| Cell::from(*x)));
                    t.push(cells);
                }
            }
            format!(
                "# branch={branch} max_deviation={} symplectic_residual={} seed={}\n{}",
                crate::output::format_float(deviation),
                crate::output::format_float(closed.residual()),
                settings.seed,
                t.to_csv()
            )
        }
    };
    emit(settings.out.as_deref(), &text).map_err(Failure::Runtime)
}

pub fn settings_for(flags: &crate::args::CommonArgs, mode: Mode) -> Result<Settings, Failure> {
    Settings::resolve(flags, mode).map_err(Failure::Config)
}
