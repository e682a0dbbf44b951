use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rrm_core::local::{bubble_phi0, mc_gauss_points};
use rrm_core::postproc::{eigen_csv, eigen_json, EigenLevel, ErrorLevel, ErrorReport};
use rrm_core::problems::unit_square_eigenvalues;
use rrm_core::spaces::{
    build_constraints_rrm, build_mc_basis, build_rrm_basis, dimension_report, verify_exact_sequence, DofMap,
    SpaceKind,
};
use rrm_core::sparse::CsrMatrix;
use rrm_core::study::{assemble_homogeneous, eigen_level, source_level, Formulation};
use rrm_core::problems::Example1;
use rrm_core::{Domain, RectGrid};
use serde_json::json;

use crate::args::{DimsArgs, EigenArgs, Format, FormulationArg, OutputArgs, SourceArgs, VerifyArgs};
use crate::failure::{CliResult, Failure};
use crate::grids::build_grids;

/// Relative disagreement tolerated between the two formulations.
const FORMULATION_TOL: f64 = 1e-8;

/// Applies `f` to every grid on up to `jobs` threads; results keep the grid
/// order and the first failure in that order wins.
pub fn run_levels<T, F>(grids: &[RectGrid], jobs: usize, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(&RectGrid) -> CliResult<T> + Sync,
{
    let jobs = jobs.clamp(1, grids.len().max(1));
    if jobs == 1 {
        return grids.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<CliResult<T>>>> = Mutex::new((0..grids.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= grids.len() {
                    break;
                }
                let r = f(&grids[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every level ran")).collect()
}

fn formulations(arg: Option<FormulationArg>, grid: &RectGrid) -> Vec<Formulation> {
    match arg {
        None => vec![Formulation::default_for(grid)],
        Some(FormulationArg::Saddle) => vec![Formulation::Saddle],
        Some(FormulationArg::Reduced) => vec![Formulation::Reduced],
        Some(FormulationArg::Both) => vec![Formulation::Saddle, Formulation::Reduced],
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn check_density(rho: f64) -> CliResult<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Failure::precondition(format!("density must be positive and finite, got {rho}")))
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Matrix Market coordinate text with 1-based indices.
pub fn matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}

fn dump_level(dir: &Path, level: usize, kind: SpaceKind, grid: &RectGrid, rho: f64, f: &dyn Fn(f64, f64) -> f64) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;
    let sys = assemble_homogeneous(kind, grid, rho, f)?;
    let mut files = vec![("K", matrix_market(&sys.k)), ("M", matrix_market(&sys.m))];
    if let Some(b) = &sys.b {
        files.push(("B", matrix_market(&b.matrix)));
    }
    for (name, text) in files {
        let path = dir.join(format!("level{level}_{name}.mtx"));
        std::fs::write(&path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn dump_all(output: &OutputArgs, kind: SpaceKind, grids: &[RectGrid], rho: f64, f: &dyn Fn(f64, f64) -> f64) -> CliResult<()> {
    if let Some(dir) = &output.dump_matrices {
        for (i, g) in grids.iter().enumerate() {
            dump_level(dir, i, kind, g, rho, f)?;
        }
    }
    Ok(())
}

pub fn dims(a: &DimsArgs) -> CliResult<String> {
    let grid = RectGrid::build_uniform(a.m, a.n, Domain::unit_square())?;
    let r = dimension_report(&grid)?;
    let kind = a.element.kind();
    let dim = match kind {
        SpaceKind::Rrm => r.dim_rrm,
        SpaceKind::Mc if a.homogeneous => r.dim_mc_hom,
        SpaceKind::Mc => r.dim_mc,
        _ => DofMap::new(kind, &grid, a.homogeneous).ndofs(),
    };
    let v = json!({
        "m": r.m,
        "n": r.n,
        "element": kind.name(),
        "homogeneous": a.homogeneous || kind == SpaceKind::Rrm,
        "dim": dim,
        "dim_wilson": r.dim_wilson,
        "n_constraints": r.n_constraints,
        "rank": r.rank,
        "dim_rrm": r.dim_rrm,
        "dim_mc_hom": r.dim_mc_hom,
        "dim_mc": r.dim_mc,
    });
    Ok(serde_json::to_string_pretty(&v).expect("json value"))
}

fn source_one(kind: SpaceKind, grid: &RectGrid, arg: Option<FormulationArg>, rho: f64) -> CliResult<ErrorLevel> {
    let runs = formulations(arg, grid)
        .into_iter()
        .map(|f| source_level(kind, grid, f, rho).map_err(Failure::from))
        .collect::<CliResult<Vec<_>>>()?;
    if let [a, b] = runs.as_slice() {
        let gap = rel_diff(a.energy, b.energy).max(rel_diff(a.l2, b.l2));
        if gap > FORMULATION_TOL {
            return Err(Failure::numerical(
                "formulation_mismatch",
                format!("saddle and reduced errors differ by {gap:e} on the {}x{} grid", grid.m(), grid.n()),
            ));
        }
    }
    Ok(runs.into_iter().last().expect("at least one formulation"))
}

pub fn source(a: &SourceArgs) -> CliResult<String> {
    check_density(a.rho)?;
    let grids = build_grids(&a.mesh)?;
    let kind = a.element.kind();
    let levels = run_levels(&grids, a.output.jobs, |g| source_one(kind, g, a.formulation, a.rho))?;
    let rho = a.rho;
    dump_all(&a.output, kind, &grids, rho, &move |x, y| Example1::f(x, y) / rho)?;
    let report = ErrorReport::new(levels);
    Ok(match a.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    })
}

/// Exact Dirichlet eigenvalues of `−Δu = λρu` on a rectangle, if known.
pub fn exact_eigenvalues(domain: Domain, k: usize, rho: f64) -> Option<Vec<f64>> {
    match domain {
        Domain::Rectangle { width, height } if width == 1.0 && height == 1.0 => {
            Some(unit_square_eigenvalues(k).into_iter().map(|v| v / rho).collect())
        }
        Domain::Rectangle { width, height } => {
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            let mut all = Vec::new();
            for a in 1..=k {
                for b in 1..=k {
                    let (a, b) = (a as f64, b as f64);
                    all.push(pi2 * (a * a / (width * width) + b * b / (height * height)) / rho);
                }
            }
            all.sort_by(f64::total_cmp);
            all.truncate(k);
            Some(all)
        }
        Domain::LShape { .. } => None,
    }
}

fn eigen_one(kind: SpaceKind, grid: &RectGrid, k: usize, arg: Option<FormulationArg>, rho: f64) -> CliResult<EigenLevel> {
    let runs = formulations(arg, grid)
        .into_iter()
        .map(|f| eigen_level(kind, grid, k, f, rho).map_err(Failure::from))
        .collect::<CliResult<Vec<_>>>()?;
    if let [a, b] = runs.as_slice() {
        let gap = a.values.iter().zip(&b.values).map(|(x, y)| rel_diff(*x, *y)).fold(0.0, f64::max);
        if gap > FORMULATION_TOL {
            return Err(Failure::numerical(
                "formulation_mismatch",
                format!("saddle and reduced eigenvalues differ by {gap:e} on the {}x{} grid", grid.m(), grid.n()),
            ));
        }
    }
    Ok(runs.into_iter().last().expect("at least one formulation"))
}

pub fn eigen(a: &EigenArgs) -> CliResult<String> {
    check_density(a.rho)?;
    if a.k == 0 {
        return Err(Failure::precondition("k must be at least 1"));
    }
    let grids = build_grids(&a.mesh)?;
    let kind = a.element.kind();
    let levels = run_levels(&grids, a.output.jobs, |g| eigen_one(kind, g, a.k, a.formulation, a.rho))?;
    dump_all(&a.output, kind, &grids, a.rho, &|_, _| 0.0)?;
    let exact = if a.mesh.mesh_file.is_some() { None } else { exact_eigenvalues(a.mesh.domain, a.k, a.rho) };
    Ok(match a.output.format {
        Format::Csv => eigen_csv(&levels, exact.as_deref()),
        Format::Json => eigen_json(&levels, exact.as_deref()),
    })
}

/// Structural checks of the RRM basis. Returns the report and whether every
/// check passed.
pub fn verify(a: &VerifyArgs) -> CliResult<(String, bool)> {
    if a.m < 2 || a.n < 2 {
        return Err(Failure::precondition("verify needs at least two cells per direction"));
    }
    let grid = RectGrid::build_uniform(a.m, a.n, Domain::unit_square())?;
    let map = DofMap::new(SpaceKind::Rrm, &grid, true);
    let b = build_constraints_rrm(&map)?;
    let basis = build_rrm_basis(&grid)?;
    let expected = a.m * a.n + 1;
    let basis_rank = basis.rank();
    let membership = (0..basis.len()).map(|k| b.residual(&basis.dense_vector(k))).fold(0.0, f64::max);
    let seq = verify_exact_sequence(&basis, &grid)?;
    let bubble = grid
        .active_cells()
        .map(|c| {
            let cell = grid.cell_by_id(c);
            let p = bubble_phi0(cell);
            mc_gauss_points(&cell).iter().map(|&(x, y)| p.eval(x, y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let mc_hom = build_mc_basis(&grid, true)?;
    let tol = 1e-10;
    let checks = [
        ("dimension", basis.len() == expected && basis_rank == expected),
        ("membership", membership < tol),
        ("exact_sequence", seq.max_violation() < tol),
        ("bubble_gauss_points", bubble < tol),
        ("mc_independent", mc_hom.rank() == mc_hom.len()),
    ];
    let pass = checks.iter().all(|c| c.1);
    let v = json!({
        "m": a.m,
        "n": a.n,
        "dim_wilson": map.ndofs(),
        "n_constraints": b.nrows(),
        "constraint_rank": b.rank(),
        "expected_dim": expected,
        "basis_size": basis.len(),
        "basis_rank": basis_rank,
        "membership_max_residual": membership,
        "exact_sequence": {
            "piecewise_linear": seq.piecewise_linear,
            "edge_mean_jump": seq.edge_mean_jump,
            "boundary_normal": seq.boundary_normal,
            "divergence": seq.divergence,
        },
        "bubble_gauss_max": bubble,
        "checks": checks.iter().map(|(k, v)| ((*k).to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "pass": pass,
    });
    Ok((serde_json::to_string_pretty(&v).expect("json value"), pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_levels_keeps_order_and_first_error() {
        let grids: Vec<RectGrid> =
            (1..=6).map(|m| RectGrid::build_uniform(m, 1, Domain::unit_square()).unwrap()).collect();
        let out = run_levels(&grids, 3, |g| Ok(g.m())).unwrap();
        assert_eq!(out, vec![1, 2, 3, 4, 5, 6]);
        let err = run_levels(&grids, 4, |g| if g.m() >= 3 { Err(Failure::precondition(format!("{}", g.m()))) } else { Ok(0) })
            .unwrap_err();
        assert_eq!(err.message, "3");
    }

    #[test]
    fn matrix_market_is_one_based() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.5), (1, 2, -2.0)]);
        let s = matrix_market(&a);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "2 3 2");
        assert_eq!(lines[2], "1 1 1.5e0");
        assert_eq!(lines[3], "2 3 -2e0");
    }

    #[test]
    fn rectangle_eigenvalues() {
        let ex = exact_eigenvalues(Domain::Rectangle { width: 2.0, height: 1.0 }, 3, 1.0).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((ex[0] - 1.25 * pi2).abs() < 1e-12);
        assert!((ex[1] - 2.0 * pi2).abs() < 1e-12);
        assert!((ex[2] - 3.25 * pi2).abs() < 1e-12);
        assert!(exact_eigenvalues(Domain::l_shape(), 3, 1.0).is_none());
        let unit = exact_eigenvalues(Domain::unit_square(), 2, 2.0).unwrap();
        assert!((unit[0] - pi2).abs() < 1e-12);
    }
}
