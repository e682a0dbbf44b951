//! End-to-end pipelines: one grid and one element in, errors or eigenvalues
//! out. Convergence studies are sequences of these.

use alloc::vec::Vec;

use crate::assembly::{assemble, reduce, AssembledSystem};
use crate::postproc::{error_norms, EigenLevel, ErrorLevel, ErrorReport};
use crate::problems::Example1;
use crate::solve::{
    eig_constrained, eig_pencil, eig_rm, eig_smallest, solve_source_reduced, solve_source_saddle, solve_spd,
    DENSE_EIG_LIMIT,
};
use crate::sparse::dot;
use crate::spaces::{build_mc_basis, build_rrm_basis, DofMap, SpaceKind};
use crate::{Error, RectGrid, Result};

/// How the RRM constraints are enforced; other elements ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Lagrange multipliers on interior edges.
    Saddle,
    /// Projection onto the explicit basis (full rectangles only).
    Reduced,
}

impl Formulation {
    /// Saddle on masked grids, reduced otherwise.
    pub fn default_for(grid: &RectGrid) -> Self {
        if grid.is_full() {
            Formulation::Reduced
        } else {
            Formulation::Saddle
        }
    }
}

fn check_formulation(kind: SpaceKind, grid: &RectGrid, formulation: Formulation) -> Result<()> {
    let needs_basis = kind == SpaceKind::Mc || (kind == SpaceKind::Rrm && formulation == Formulation::Reduced);
    if needs_basis && !grid.is_full() {
        return Err(Error::Precondition("explicit bases exist only on full rectangles; use the saddle formulation"));
    }
    Ok(())
}

fn check_density(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::NonPositiveDensity { value: rho, x: 0.0, y: 0.0 });
    }
    Ok(())
}

/// Homogeneous system for `kind` with constant density `rho` and load `f`.
pub fn assemble_homogeneous(kind: SpaceKind, grid: &RectGrid, rho: f64, f: &dyn Fn(f64, f64) -> f64) -> Result<AssembledSystem> {
    check_density(rho)?;
    assemble(&DofMap::new(kind, grid, true), &|_, _| rho, f)
}

/// Discrete solution of the source problem with exact solution
/// `sin(πx) sin(πy)` and constant density `rho`, as a coefficient vector
/// over the element's dof map.
pub fn solve_example1(kind: SpaceKind, grid: &RectGrid, formulation: Formulation, rho: f64) -> Result<(DofMap, Vec<f64>)> {
    check_formulation(kind, grid, formulation)?;
    let (x0, x1) = (grid.xs()[0], grid.xs()[grid.m()]);
    let (y0, y1) = (grid.ys()[0], grid.ys()[grid.n()]);
    let close = |a: f64, b: f64| libm::fabs(a - b) < 1e-12;
    if !grid.is_full() || !close(x0, 0.0) || !close(y0, 0.0) || !close(x1, 1.0) || !close(y1, 1.0) {
        return Err(Error::Precondition("the manufactured solution lives on the unit square"));
    }
    let f = move |x: f64, y: f64| Example1::f(x, y) / rho;
    let sys = assemble_homogeneous(kind, grid, rho, &f)?;
    let coeffs = match kind {
        SpaceKind::Q1 | SpaceKind::Wilson | SpaceKind::Rm => solve_spd(&sys.k, &sys.f)?,
        SpaceKind::Mc => {
            let red = reduce(&sys, &build_mc_basis(grid, true)?)?;
            red.expand(&solve_source_reduced(&red)?)
        }
        SpaceKind::Rrm => match formulation {
            Formulation::Saddle => solve_source_saddle(&sys)?.u,
            Formulation::Reduced => {
                let red = reduce(&sys, &build_rrm_basis(grid)?)?;
                red.expand(&solve_source_reduced(&red)?)
            }
        },
    };
    Ok((sys.map, coeffs))
}

pub fn source_level(kind: SpaceKind, grid: &RectGrid, formulation: Formulation, rho: f64) -> Result<ErrorLevel> {
    let (map, coeffs) = solve_example1(kind, grid, formulation, rho)?;
    let e = error_norms(&map, &coeffs, &Example1::u, &Example1::grad, &|_, _| rho)?;
    Ok(ErrorLevel { m: grid.m(), n: grid.n(), h: grid.h(), hx: grid.hx(), ndofs: map.ndofs(), energy: e.energy, l2: e.l2 })
}

pub fn source_study(kind: SpaceKind, grids: &[RectGrid], formulation: Formulation, rho: f64) -> Result<ErrorReport> {
    let levels = grids.iter().map(|g| source_level(kind, g, formulation, rho)).collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::new(levels))
}

/// The `k` smallest eigenvalues of `−Δu = λ ρ u` with homogeneous boundary
/// conditions.
pub fn eigen_level(kind: SpaceKind, grid: &RectGrid, k: usize, formulation: Formulation, rho: f64) -> Result<EigenLevel> {
    check_formulation(kind, grid, formulation)?;
    let sys = assemble_homogeneous(kind, grid, rho, &|_, _| 0.0)?;
    let result = match kind {
        SpaceKind::Q1 | SpaceKind::Wilson => eig_pencil(&sys.k, &sys.m, k, DENSE_EIG_LIMIT)?,
        SpaceKind::Rm => eig_rm(&sys, k)?,
        SpaceKind::Mc => eig_smallest(&reduce(&sys, &build_mc_basis(grid, true)?)?, k)?,
        SpaceKind::Rrm => match formulation {
            Formulation::Saddle => eig_constrained(&sys, k)?,
            Formulation::Reduced => eig_smallest(&reduce(&sys, &build_rrm_basis(grid)?)?, k)?,
        },
    };
    Ok(EigenLevel { m: grid.m(), n: grid.n(), h: grid.h(), hx: grid.hx(), values: result.values })
}

/// Relative broken-energy distance between the saddle-point and the
/// reduced-basis RRM solutions of the manufactured source problem.
pub fn formulation_gap(grid: &RectGrid) -> Result<f64> {
    let (map, saddle) = solve_example1(SpaceKind::Rrm, grid, Formulation::Saddle, 1.0)?;
    let (_, reduced) = solve_example1(SpaceKind::Rrm, grid, Formulation::Reduced, 1.0)?;
    let sys = assemble(&map, &|_, _| 1.0, &|_, _| 0.0)?;
    let d: Vec<f64> = saddle.iter().zip(&reduced).map(|(a, b)| a - b).collect();
    let num = dot(&d, &sys.k.matvec(&d)).max(0.0);
    let den = dot(&reduced, &sys.k.matvec(&reduced));
    Ok(libm::sqrt(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;

    fn unit(m: usize, n: usize) -> RectGrid {
        RectGrid::build_uniform(m, n, Domain::unit_square()).unwrap()
    }

    #[test]
    fn one_refinement_quarters_the_energy_error() {
        let coarse = source_level(SpaceKind::Rrm, &unit(8, 8), Formulation::Reduced, 1.0).unwrap();
        let fine = source_level(SpaceKind::Rrm, &unit(16, 16), Formulation::Reduced, 1.0).unwrap();
        let ratio = coarse.energy / fine.energy;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn formulations_agree() {
        assert!(formulation_gap(&unit(4, 4)).unwrap() < 1e-10);
    }

    #[test]
    fn masked_grids_reject_explicit_bases() {
        let l = RectGrid::build_uniform(4, 4, Domain::l_shape()).unwrap();
        assert!(eigen_level(SpaceKind::Rrm, &l, 2, Formulation::Reduced, 1.0).unwrap_err().is_precondition());
        assert!(eigen_level(SpaceKind::Mc, &l, 2, Formulation::Saddle, 1.0).unwrap_err().is_precondition());
        assert!(eigen_level(SpaceKind::Rrm, &l, 2, Formulation::Saddle, 1.0).is_ok());
        assert!(source_level(SpaceKind::Rrm, &l, Formulation::Saddle, 1.0).unwrap_err().is_precondition());
    }

    #[test]
    fn density_scales_eigenvalues() {
        let g = unit(4, 4);
        let a = eigen_level(SpaceKind::Rrm, &g, 3, Formulation::Reduced, 1.0).unwrap();
        let b = eigen_level(SpaceKind::Rrm, &g, 3, Formulation::Reduced, 2.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - 2.0 * y).abs() < 1e-10 * x);
        }
        assert!(eigen_level(SpaceKind::Rrm, &g, 3, Formulation::Reduced, 0.0).is_err());
    }

    #[test]
    fn every_element_solves_the_source_problem() {
        let g = unit(4, 4);
        for kind in [SpaceKind::Q1, SpaceKind::Wilson, SpaceKind::Mc, SpaceKind::Rm, SpaceKind::Rrm] {
            let e = source_level(kind, &g, Formulation::Reduced, 1.0).unwrap();
            assert!(e.energy < 1.0 && e.l2 < 0.2, "{kind:?}: {e:?}");
        }
    }
}
