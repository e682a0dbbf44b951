//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
//! any criterion fails.

use std::time::{Duration, Instant};

use rrm_core::mesh::{Domain, RectGrid};
use rrm_core::postproc::{eoc, l2_lower_bound_check, lower_bound_report, CheckStatus};
use rrm_core::problems::{unit_square_eigenvalues, Example1, L_SHAPE_LAMBDA3};
use rrm_core::solve::rm_interpolant_diagnostic;
use rrm_core::spaces::{build_rrm_basis, dimension_report, verify_exact_sequence, SpaceKind};
use rrm_core::study::{eigen_level, formulation_gap, source_study, Formulation};

/// Published RRM eigenvalues on the unit square with `h_x = 2 h_y`, rows
/// `h_x = 0.25, 0.125, 0.0625, 0.03125`.
const SQUARE_REFERENCE: [[f64; 6]; 4] = [
    [18.559, 44.961, 45.655, 63.427, 90.249, 95.913],
    [19.428, 48.127, 48.163, 74.233, 96.050, 96.427],
    [19.660, 49.034, 49.036, 77.711, 97.996, 98.016],
    [19.719, 49.269, 49.269, 78.641, 98.519, 98.520],
];

/// Published third RRM eigenvalue on the L-shape with `h_x = 2 h_y`, rows
/// `h_x = 0.5, 0.25, 0.125, 0.0625`.
const L_SHAPE_REFERENCE: [f64; 4] = [15.857, 18.558, 19.428, 19.660];

const GOLDEN_TOL: f64 = 0.002;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit(m: usize, n: usize) -> RectGrid {
    RectGrid::build_uniform(m, n, Domain::unit_square()).unwrap()
}

fn in_range(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_some_and(|v| (lo..=hi).contains(&v))
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

/// Unit-square grids with `h_x = 2 h_y` for the given `h_x`.
fn aspect_grids(hx: &[f64]) -> Vec<RectGrid> {
    hx.iter().map(|h| { let m = (1.0 / h).round() as usize; unit(m, 2 * m) }).collect()
}

fn dimensions() -> Result<Outcome, rrm_core::Error> {
    let mut bad = Vec::new();
    for m in 2..=6 {
        for n in 2..=6 {
            let r = dimension_report(&unit(m, n))?;
            let independent = build_rrm_basis(&unit(m, n))?.rank() == m * n + 1;
            let ok = r.dim_rrm == m * n + 1
                && independent
                && r.rank == 2 * m * n - m - n
                && r.n_constraints == 2 * m * n - m - n
                && r.dim_mc_hom == 2 * m * n - m - n + 1
                && r.dim_mc == 2 * m * n + 2 * m + 2 * n;
            if !ok {
                bad.push(format!("{m}x{n}: {r:?}"));
            }
        }
    }
    Ok(outcome(bad.is_empty(), if bad.is_empty() { "25 grids, all counts exact".into() } else { bad.join("; ") }))
}

fn exact_sequence() -> Result<Outcome, rrm_core::Error> {
    let mut grids: Vec<RectGrid> = Vec::new();
    for m in 2..=6 {
        for n in 2..=6 {
            grids.push(unit(m, n));
        }
    }
    grids.push(RectGrid::build_nonuniform_pattern(1)?);
    grids.push(RectGrid::from_breakpoints(vec![0.0, 0.35, 1.0], vec![0.0, 0.65, 1.0])?);
    grids.push(RectGrid::from_breakpoints(
        vec![0.0, 0.1, 0.35, 0.5, 0.8, 0.9, 1.0],
        vec![0.0, 0.2, 0.25, 0.6, 0.65, 1.0, 1.3],
    )?);
    let mut worst = 0.0f64;
    for g in &grids {
        worst = worst.max(verify_exact_sequence(&build_rrm_basis(g)?, g)?.max_violation());
    }
    Ok(outcome(worst < 1e-10, format!("{} grids, max violation {worst:.2e}", grids.len())))
}

fn source_convergence() -> Result<(Outcome, Outcome), rrm_core::Error> {
    let uniform: Vec<RectGrid> = [8, 16, 32, 64].iter().map(|&m| unit(m, m)).collect();
    let u = source_study(SpaceKind::Rrm, &uniform, Formulation::Reduced, 1.0)?;
    let nonuniform: Vec<RectGrid> = (1..=5).map(RectGrid::build_nonuniform_pattern).collect::<Result<_, _>>()?;
    let nu = source_study(SpaceKind::Rrm, &nonuniform, Formulation::Reduced, 1.0)?;
    let pass = in_range(u.last_eoc_energy(), 1.85, 2.15)
        && in_range(u.last_eoc_l2(), 1.85, 2.15)
        && in_range(nu.last_eoc_energy(), 0.8, 1.2)
        && in_range(nu.last_eoc_l2(), 1.8, 2.2);
    let detail = format!(
        "uniform EOC energy {} L2 {}; nonuniform EOC energy {} L2 {}",
        fmt(u.last_eoc_energy()),
        fmt(u.last_eoc_l2()),
        fmt(nu.last_eoc_energy()),
        fmt(nu.last_eoc_l2())
    );
    let l2 = l2_lower_bound_check(&u)?;
    let bound = outcome(
        l2.status == CheckStatus::Pass,
        format!("e_L2/h^2 = {:?}, min/max over last three {:.4}", l2.ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>(), l2.spread),
    );
    Ok((outcome(pass, detail), bound))
}

fn square_eigenvalues() -> Result<(Outcome, Outcome), rrm_core::Error> {
    let hx = [0.25, 0.125, 0.0625, 0.03125];
    let grids = aspect_grids(&hx);
    let exact = unit_square_eigenvalues(6);
    let mut rrm = Vec::new();
    let mut rm = Vec::new();
    for g in &grids {
        rrm.push(eigen_level(SpaceKind::Rrm, g, 6, Formulation::Reduced, 1.0)?.values);
        rm.push(eigen_level(SpaceKind::Rm, g, 6, Formulation::Reduced, 1.0)?.values);
    }
    let mut worst = 0.0f64;
    for (row, reference) in rrm.iter().zip(&SQUARE_REFERENCE) {
        for (a, b) in row.iter().zip(reference) {
            worst = worst.max((a - b).abs());
        }
    }
    let report = lower_bound_report(&hx, &rrm, &exact)?;
    let eocs: Vec<Option<f64>> = report.trends.iter().map(|t| *t.eoc.last().unwrap()).collect();
    let eoc_ok = eocs.iter().all(|e| in_range(*e, 1.8, 2.1));
    let strict_below = rrm.iter().all(|row| row.iter().zip(&exact).all(|(a, b)| a < b));
    let golden = outcome(
        worst <= GOLDEN_TOL && strict_below && report.all_monotone() && eoc_ok,
        format!(
            "max deviation {worst:.5}, below exact {strict_below}, monotone {}, finest gap EOC {:?}",
            report.all_monotone(),
            eocs.iter().map(|e| fmt(*e)).collect::<Vec<_>>()
        ),
    );

    let mut ordered = true;
    let mut strict = true;
    for (k, (lm, lr)) in rm.iter().zip(&rrm).enumerate() {
        for j in 0..6 {
            ordered &= lm[j] <= lr[j] + 1e-10 * lr[j] && lr[j] <= exact[j];
            if k == 0 {
                strict &= lm[j] < lr[j] && lr[j] < exact[j];
            }
        }
    }
    let ordering = outcome(
        ordered && strict,
        format!("RM <= RRM <= exact on {} grids {ordered}, strict on coarsest {strict}; coarsest RM {:?}", grids.len(), rm[0].iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()),
    );
    Ok((golden, ordering))
}

fn l_shape() -> Result<Outcome, rrm_core::Error> {
    let hx: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
    let mut values = Vec::new();
    for h in hx {
        let m = (2.0 / h).round() as usize;
        let g = RectGrid::build_uniform(m, 2 * m, Domain::l_shape())?;
        values.push(eigen_level(SpaceKind::Rrm, &g, 3, Formulation::Saddle, 1.0)?.values[2]);
    }
    let worst = values.iter().zip(&L_SHAPE_REFERENCE).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let below = values.iter().all(|v| *v < L_SHAPE_LAMBDA3);
    let gaps: Vec<f64> = values.iter().map(|v| L_SHAPE_LAMBDA3 - v).collect();
    let rate = *eoc(&gaps, &hx).last().unwrap();
    Ok(outcome(
        worst <= GOLDEN_TOL && below && in_range(rate, 1.8, 2.1),
        format!(
            "lambda3 {:?}, max deviation {worst:.5}, below 2pi^2 {below}, finest gap EOC {}",
            values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            fmt(rate)
        ),
    ))
}

fn mc_degradation() -> Result<Outcome, rrm_core::Error> {
    let grids = aspect_grids(&[0.125, 0.0625, 0.03125, 0.015625]);
    let r = source_study(SpaceKind::Mc, &grids, Formulation::Reduced, 1.0)?;
    Ok(outcome(
        in_range(r.last_eoc_energy(), 0.8, 1.2),
        format!("energy EOC {:?} on grids with h_x = 2 h_y", r.eoc_energy.iter().map(|e| fmt(*e)).collect::<Vec<_>>()),
    ))
}

fn cross_formulation() -> Result<Outcome, rrm_core::Error> {
    let mut grids: Vec<RectGrid> = [(2, 2), (3, 3), (4, 2), (5, 7), (8, 8), (8, 16), (16, 16), (32, 32)]
        .iter()
        .map(|&(m, n)| unit(m, n))
        .collect();
    grids.push(RectGrid::build_nonuniform_pattern(1)?);
    grids.push(RectGrid::build_nonuniform_pattern(2)?);
    grids.push(RectGrid::build_nonuniform_pattern(3)?);
    let mut worst = 0.0f64;
    for g in &grids {
        worst = worst.max(formulation_gap(g)?);
    }
    Ok(outcome(worst < 1e-10, format!("{} grids, max relative energy distance {worst:.2e}", grids.len())))
}

fn interpolant() -> Result<Outcome, rrm_core::Error> {
    let mut ratios = Vec::new();
    for m in [8, 16, 32] {
        ratios.push(rm_interpolant_diagnostic(&unit(m, m), &Example1::u, &Example1::grad)?.ratio);
    }
    let positive = ratios.iter().all(|r| *r > 0.0);
    let steady = ratios.windows(2).all(|w| (0.5..=2.0).contains(&(w[1] / w[0])));
    Ok(outcome(positive && steady, format!("a_h(u - Pi u, Pi u)/h^2 = {:?}", ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>())))
}

fn report(id: usize, name: &str, start: Instant, limit: Option<Duration>, r: Result<Outcome, rrm_core::Error>) -> bool {
    let elapsed = start.elapsed();
    let (pass, detail) = match r {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = pass && in_time;
    let timing = match limit {
        Some(l) => format!("{:.1}s of {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!("[{}] {id:>2} {name}: {detail} ({timing})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn split(r: Result<(Outcome, Outcome), rrm_core::Error>) -> (Result<Outcome, rrm_core::Error>, Result<Outcome, rrm_core::Error>) {
    match r {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    }
}

fn main() {
    let mut all = true;

    let t = Instant::now();
    all &= report(1, "dimension and rank suite", t, Some(Duration::from_secs(10)), dimensions());

    let t = Instant::now();
    all &= report(2, "exact sequence suite", t, None, exact_sequence());

    let t = Instant::now();
    let (conv, bound) = split(source_convergence());
    all &= report(3, "source convergence", t, Some(Duration::from_secs(120)), conv);
    all &= report(4, "L2 lower bound", t, None, bound);

    let t = Instant::now();
    let (golden, ordering) = split(square_eigenvalues());
    all &= report(5, "eigenvalue reference values, unit square", t, Some(Duration::from_secs(300)), golden);
    all &= report(6, "eigenvalue ordering RM <= RRM <= exact", t, None, ordering);

    let t = Instant::now();
    all &= report(7, "L-shape third eigenvalue", t, None, l_shape());

    let t = Instant::now();
    all &= report(8, "MC first-order energy convergence", t, None, mc_degradation());

    let t = Instant::now();
    all &= report(9, "saddle-point vs reduced-basis agreement", t, None, cross_formulation());

    let t = Instant::now();
    all &= report(10, "RM interpolant diagnostic", t, None, interpolant());

    if !all {
        std::process::exit(1);
    }
}
