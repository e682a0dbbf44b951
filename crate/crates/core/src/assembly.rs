//! Global stiffness, mass and load assembly, and projection onto explicit
//! bases.

use alloc::vec;
use alloc::vec::Vec;

use crate::local;
use crate::quadrature::GaussRule;
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::spaces::{build_constraints_rrm, ConstraintMatrix, DofMap, ExplicitBasis, SpaceKind};
use crate::{Error, Result};

/// Sparse system over the free degrees of freedom of a [`DofMap`].
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub map: DofMap,
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub f: Vec<f64>,
    /// Jump constraints, present for the RRM space.
    pub b: Option<ConstraintMatrix>,
}

impl AssembledSystem {
    pub fn kind(&self) -> SpaceKind {
        self.map.kind()
    }

    pub fn ndofs(&self) -> usize {
        self.map.ndofs()
    }
}

/// Scatters the element matrices of every active cell. Eliminated boundary
/// values are dropped from rows and columns alike.
pub fn assemble(
    map: &DofMap,
    rho: &dyn Fn(f64, f64) -> f64,
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<AssembledSystem> {
    let n = map.ndofs();
    let grid = map.grid();
    let rule = GaussRule::new();
    let ls = map.local_size();
    let cells = map.entities().cells();
    let cap = cells.len() * ls * ls;
    let mut k = TripletBuilder::with_capacity(n, n, cap);
    let mut m = TripletBuilder::with_capacity(n, n, cap);
    let mut load = vec![0.0; n];
    for &c in cells {
        let geom = grid.cell_by_id(c);
        let basis = map.local_basis(c);
        let lm = local::local_matrices(&basis, &geom, &rule, rho, f)?;
        let dofs = map.cell_dofs(c);
        for (a, da) in dofs.iter().enumerate() {
            let Some(da) = *da else { continue };
            load[da] += lm.load[a];
            for (b, db) in dofs.iter().enumerate() {
                let Some(db) = *db else { continue };
                k.push(da, db, lm.stiffness[a * ls + b]);
                m.push(da, db, lm.mass[a * ls + b]);
            }
        }
    }
    let b = if map.kind() == SpaceKind::Rrm { Some(build_constraints_rrm(map)?) } else { None };
    Ok(AssembledSystem { map: map.clone(), k: k.finish(), m: m.finish(), f: load, b })
}

/// `Zᵀ K Z`, `Zᵀ M Z`, `Zᵀ F` for the columns `Z` of an explicit basis.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub f: Vec<f64>,
    pub z: CsrMatrix,
}

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// Full coefficient vector `Z c`.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        self.z.matvec(c)
    }
}

pub fn reduce(sys: &AssembledSystem, basis: &ExplicitBasis) -> Result<ReducedSystem> {
    reduce_with(sys, &basis.to_matrix())
}

/// Projection onto the columns of an arbitrary sparse `Z`.
pub fn reduce_with(sys: &AssembledSystem, z: &CsrMatrix) -> Result<ReducedSystem> {
    if z.nrows() != sys.ndofs() {
        return Err(Error::DimensionMismatch { expected: sys.ndofs(), got: z.nrows() });
    }
    let mut k = sys.k.congruence(z)?;
    let mut m = sys.m.congruence(z)?;
    symmetrize(&mut k);
    symmetrize(&mut m);
    Ok(ReducedSystem { k, m, f: z.matvec_transpose(&sys.f), z: z.clone() })
}

/// Replaces `A` by `(A + Aᵀ)/2`, removing rounding asymmetry of the triple
/// product.
fn symmetrize(a: &mut CsrMatrix) {
    let at = a.transpose();
    let entries: Vec<_> = a.triplets().chain(at.triplets()).map(|(i, j, v)| (i, j, 0.5 * v)).collect();
    *a = CsrMatrix::from_triplets(a.nrows(), a.ncols(), &entries);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, RectGrid};
    use crate::spaces::{build_rrm_basis, BasisVector, PatternKind};
    use crate::sparse::dot;

    fn one(_: f64, _: f64) -> f64 {
        1.0
    }

    fn zero(_: f64, _: f64) -> f64 {
        0.0
    }

    fn unit(m: usize, n: usize) -> RectGrid {
        RectGrid::build_uniform(m, n, Domain::unit_square()).unwrap()
    }

    #[test]
    fn q1_on_two_by_two() {
        let map = DofMap::new(SpaceKind::Q1, &unit(2, 2), true);
        let sys = assemble(&map, &one, &zero).unwrap();
        assert_eq!(sys.ndofs(), 1);
        assert!((sys.k.get(0, 0) - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(sys.f, vec![0.0]);
        assert!(sys.b.is_none());
    }

    #[test]
    fn wilson_size_and_symmetry() {
        let g = RectGrid::build_nonuniform_pattern(1).unwrap();
        for kind in [SpaceKind::Wilson, SpaceKind::Rrm, SpaceKind::Rm, SpaceKind::Mc] {
            let map = DofMap::new(kind, &g, true);
            let sys = assemble(&map, &|x, y| 1.0 + x * y, &one).unwrap();
            assert!(sys.k.asymmetry() < 1e-12, "{kind:?}");
            assert!(sys.m.asymmetry() < 1e-12);
            assert!(sys.m.to_dense().cholesky(faer::Side::Lower).is_ok());
        }
        let map = DofMap::new(SpaceKind::Wilson, &unit(3, 4), true);
        assert_eq!(assemble(&map, &one, &one).unwrap().ndofs(), 2 * 3 + 2 * 12);
    }

    #[test]
    fn homogeneous_stiffness_is_definite() {
        for kind in [SpaceKind::Q1, SpaceKind::Wilson, SpaceKind::Rm] {
            let map = DofMap::new(kind, &unit(3, 2), true);
            let sys = assemble(&map, &one, &one).unwrap();
            assert!(sys.k.to_dense().cholesky(faer::Side::Lower).is_ok(), "{kind:?}");
        }
    }

    #[test]
    fn negative_density_is_reported() {
        let map = DofMap::new(SpaceKind::Q1, &unit(2, 2), true);
        assert!(matches!(assemble(&map, &|_, _| -1.0, &one), Err(Error::NonPositiveDensity { .. })));
    }

    #[test]
    fn reduction_examples() {
        let g = unit(3, 3);
        let map = DofMap::new(SpaceKind::Rrm, &g, true);
        let sys = assemble(&map, &one, &one).unwrap();
        let id = reduce_with(&sys, &CsrMatrix::identity(sys.ndofs())).unwrap();
        assert!((id.k.to_dense() - sys.k.to_dense()).norm_max() < 1e-15);

        let basis = build_rrm_basis(&g).unwrap();
        let red = reduce(&sys, &basis).unwrap();
        assert_eq!(red.dim(), 10);
        assert!(red.k.asymmetry() < 1e-14);
        assert!(red.m.to_dense().cholesky(faer::Side::Lower).is_ok());
        // Direct recomputation of one entry.
        let (v0, v1) = (basis.dense_vector(0), basis.dense_vector(3));
        let direct = dot(&v0, &sys.k.matvec(&v1));
        assert!((red.k.get(0, 3) - direct).abs() < 1e-12 * direct.abs().max(1.0));

        let single = ExplicitBasis {
            space: SpaceKind::Rrm,
            ndofs: sys.ndofs(),
            vectors: vec![BasisVector { kind: PatternKind::Interior, anchor: (1, 1), coeffs: basis.vectors[4].coeffs.clone() }],
        };
        let r1 = reduce(&sys, &single).unwrap();
        assert!(r1.k.get(0, 0) > 0.0);
        assert!(reduce_with(&sys, &CsrMatrix::identity(3)).is_err());
    }

    #[test]
    fn affine_functions_pass_the_patch_test() {
        // K u vanishes on test functions supported away from the boundary.
        let g = RectGrid::build_nonuniform_pattern(2).unwrap();
        let full = DofMap::new(SpaceKind::Rrm, &g, false);
        let sys = assemble(&full, &one, &zero).unwrap();
        let u = full.interpolate_quadratic([0.4, 1.3, -0.7, 0.0, 0.0, 0.0]).unwrap();
        let basis = build_rrm_basis(&g).unwrap();
        let hom = DofMap::new(SpaceKind::Rrm, &g, true);
        // Embed homogeneous basis vectors into the full numbering.
        let embed = |v: &[f64]| {
            let mut out = vec![0.0; full.ndofs()];
            for &c in hom.entities().cells() {
                for (dh, df) in hom.cell_dofs(c).iter().zip(full.cell_dofs(c)) {
                    if let (Some(dh), Some(df)) = (dh, df) {
                        out[*df] = v[*dh];
                    }
                }
            }
            out
        };
        let ku = sys.k.matvec(&u);
        let inner = |i: usize, m: usize| i >= 2 && i + 3 <= m;
        for (k, b) in basis.vectors.iter().enumerate() {
            if b.kind != PatternKind::Interior || !inner(b.anchor.0, g.m()) || !inner(b.anchor.1, g.n()) {
                continue;
            }
            let v = embed(&basis.dense_vector(k));
            assert!(dot(&ku, &v).abs() < 1e-10, "pattern {k}: {}", dot(&ku, &v));
        }
    }

    #[test]
    fn discrete_energy_approaches_exact() {
        use crate::problems::Example1;
        let exact = core::f64::consts::PI * core::f64::consts::PI / 2.0;
        let mut prev = f64::INFINITY;
        for m in [4, 8, 16] {
            let g = unit(m, m);
            let map = DofMap::new(SpaceKind::Rrm, &g, true);
            let sys = assemble(&map, &one, &Example1::f).unwrap();
            let red = reduce(&sys, &build_rrm_basis(&g).unwrap()).unwrap();
            let c = crate::solve::solve_source_reduced(&red).unwrap();
            let gap = libm::fabs(dot(&c, &red.f) - exact);
            assert!(gap < 0.5 * prev, "gap {gap} after {prev}");
            prev = gap;
        }
    }
}
