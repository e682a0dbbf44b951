//! Global degree-of-freedom maps, the RRM constraint matrix, and explicit
//! bases of the RRM and MC spaces.
//!
//! Wilson coefficient vectors always refer to the normalized local Wilson
//! basis ([`crate::local::wilson_basis_normalized`]): vertex values first, in
//! vertex-entity order, followed by two bubble coefficients per active cell.
//! The RRM space is the subspace of homogeneous Wilson vectors annihilated by
//! the constraint matrix. The MC space lives in a broken layout with six
//! independent Wilson coefficients per cell.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;

use crate::dense;
use crate::local::{self, LocalEdge, LocalQuad};
use crate::mesh::{Edge, EdgeKind, EntityIndex, RectGrid};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::{Error, Result};

/// Relative singular-value threshold for patch nullspaces and ranks.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Q1,
    Wilson,
    Mc,
    Rm,
    Rrm,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Q1 => "q1",
            SpaceKind::Wilson => "wilson",
            SpaceKind::Mc => "mc",
            SpaceKind::Rm => "rm",
            SpaceKind::Rrm => "rrm",
        }
    }
}

/// Assignment of global degrees of freedom to the local basis functions of
/// every active cell.
#[derive(Debug, Clone)]
pub struct DofMap {
    kind: SpaceKind,
    homogeneous: bool,
    grid: RectGrid,
    entities: EntityIndex,
    local_size: usize,
    cell_pos: Vec<Option<usize>>,
    cell_dofs: Vec<Option<usize>>,
    ndofs: usize,
    vertex_dofs: Vec<Option<usize>>,
}

impl DofMap {
    /// `homogeneous` removes boundary vertex values. RM keeps every edge
    /// degree of freedom; MC ignores the flag (its boundary behaviour lives in
    /// the explicit basis).
    pub fn new(kind: SpaceKind, grid: &RectGrid, homogeneous: bool) -> Self {
        let entities = grid.entities();
        let mut ndofs = 0;
        let shared_vertices = kind != SpaceKind::Mc;
        let vertex_dofs: Vec<Option<usize>> = entities
            .vertices()
            .iter()
            .map(|v| {
                if shared_vertices && !(homogeneous && v.boundary) {
                    ndofs += 1;
                    Some(ndofs - 1)
                } else {
                    None
                }
            })
            .collect();
        let local_size = match kind {
            SpaceKind::Q1 => 4,
            SpaceKind::Wilson | SpaceKind::Rrm | SpaceKind::Mc => 6,
            SpaceKind::Rm => 8,
        };
        let cells = entities.cells();
        let mut cell_pos = vec![None; grid.m() * grid.n()];
        for (p, &c) in cells.iter().enumerate() {
            cell_pos[c] = Some(p);
        }
        let edge_base = ndofs;
        if kind == SpaceKind::Rm {
            ndofs += entities.edges().len();
        }
        let mut cell_dofs = Vec::with_capacity(cells.len() * local_size);
        for &c in cells {
            let (i, j) = grid.cell_ij(c);
            if kind == SpaceKind::Mc {
                for _ in 0..6 {
                    cell_dofs.push(Some(ndofs));
                    ndofs += 1;
                }
                continue;
            }
            for v in entities.cell_vertices(i, j) {
                cell_dofs.push(vertex_dofs[v]);
            }
            match kind {
                SpaceKind::Wilson | SpaceKind::Rrm => {
                    cell_dofs.push(Some(ndofs));
                    cell_dofs.push(Some(ndofs + 1));
                    ndofs += 2;
                }
                SpaceKind::Rm => {
                    for e in entities.cell_edges(i, j) {
                        cell_dofs.push(Some(edge_base + e));
                    }
                }
                _ => {}
            }
        }
        DofMap {
            kind,
            homogeneous,
            grid: grid.clone(),
            entities,
            local_size,
            cell_pos,
            cell_dofs,
            ndofs,
            vertex_dofs,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn grid(&self) -> &RectGrid {
        &self.grid
    }

    pub fn entities(&self) -> &EntityIndex {
        &self.entities
    }

    /// Number of free degrees of freedom.
    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn local_size(&self) -> usize {
        self.local_size
    }

    /// Global dof of the vertex with entity id `v`, if free.
    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dofs[v]
    }

    /// Global dofs of the local basis of lattice cell `cell`; `None` marks
    /// eliminated boundary values.
    pub fn cell_dofs(&self, cell: usize) -> &[Option<usize>] {
        let p = self.cell_pos[cell].expect("cell is active");
        &self.cell_dofs[p * self.local_size..(p + 1) * self.local_size]
    }

    /// Local basis of lattice cell `cell`, aligned with [`Self::cell_dofs`].
    pub fn local_basis(&self, cell: usize) -> Vec<LocalQuad> {
        let geom = self.grid.cell_by_id(cell);
        match self.kind {
            SpaceKind::Q1 => local::wilson_basis_normalized(geom)[..4].to_vec(),
            SpaceKind::Wilson | SpaceKind::Rrm | SpaceKind::Mc => {
                local::wilson_basis_normalized(geom).to_vec()
            }
            SpaceKind::Rm => local::rm_basis(geom).expect("cells are nondegenerate").funcs.to_vec(),
        }
    }

    /// The discrete function with coefficient vector `coeffs`, restricted to
    /// lattice cell `cell`.
    pub fn function_on_cell(&self, cell: usize, coeffs: &[f64]) -> LocalQuad {
        let basis = self.local_basis(cell);
        let mut p = LocalQuad::zero(self.grid.cell_by_id(cell));
        for (f, d) in basis.iter().zip(self.cell_dofs(cell)) {
            if let Some(d) = d {
                p = p.axpy(coeffs[*d], f);
            }
        }
        p
    }

    /// Wilson dof of the `xx` (`axis = 0`) or `yy` bubble of a lattice cell.
    pub fn bubble_dof(&self, cell: usize, axis: usize) -> Option<usize> {
        match self.kind {
            SpaceKind::Wilson | SpaceKind::Rrm | SpaceKind::Mc => self.cell_dofs(cell)[4 + axis],
            _ => None,
        }
    }

    /// Wilson coefficients of a global quadratic
    /// `a0 + a1 x + a2 y + a3 x² + a4 xy + a5 y²` (boundary values are
    /// dropped in homogeneous maps).
    pub fn interpolate_quadratic(&self, a: [f64; 6]) -> Result<Vec<f64>> {
        if !matches!(self.kind, SpaceKind::Wilson | SpaceKind::Rrm | SpaceKind::Mc | SpaceKind::Q1) {
            return Err(Error::Precondition("quadratic interpolation needs a Wilson-type map"));
        }
        let mut out = vec![0.0; self.ndofs];
        for &c in self.entities.cells() {
            let p = LocalQuad::from_global_quadratic(self.grid.cell_by_id(c), a);
            let w = p.wilson_dofs();
            for (d, v) in self.cell_dofs(c).iter().zip(w) {
                if let Some(d) = d {
                    out[*d] = v;
                }
            }
        }
        Ok(out)
    }

    /// Entries of the edge-mean normal-derivative jump across an interior
    /// edge, `(dof, coefficient)`; repeated dofs are not merged.
    pub fn jump_entries(&self, edge: &Edge) -> Vec<(usize, f64)> {
        let (plus_side, minus_side) = match edge.kind {
            EdgeKind::Vertical => (LocalEdge::Left, LocalEdge::Right),
            EdgeKind::Horizontal => (LocalEdge::Bottom, LocalEdge::Top),
        };
        let mut out = Vec::new();
        for (cell, side, sign) in [(edge.plus, plus_side, 1.0), (edge.minus, minus_side, -1.0)] {
            let Some(cell) = cell else { continue };
            for (f, d) in self.local_basis(cell).iter().zip(self.cell_dofs(cell)) {
                if let Some(d) = d {
                    out.push((*d, sign * f.edge_mean_derivative(side)));
                }
            }
        }
        out
    }
}

/// Jump constraints of the RRM space over a Wilson map: one row per
/// interior edge.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub matrix: CsrMatrix,
    /// Entity edge id of each row.
    pub edges: Vec<usize>,
}

impl ConstraintMatrix {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Numerical rank by column-pivoted QR.
    pub fn rank(&self) -> usize {
        dense::rank(self.matrix.to_dense().as_ref(), RANK_TOL)
    }

    /// `‖B c‖∞`.
    pub fn residual(&self, coeffs: &[f64]) -> f64 {
        crate::sparse::norm_inf(&self.matrix.matvec(coeffs))
    }
}

pub fn build_constraints_rrm(map: &DofMap) -> Result<ConstraintMatrix> {
    if !matches!(map.kind(), SpaceKind::Wilson | SpaceKind::Rrm) {
        return Err(Error::Precondition("constraints are defined over a Wilson map"));
    }
    let interior: Vec<usize> = map
        .entities()
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_interior())
        .map(|(k, _)| k)
        .collect();
    let mut b = TripletBuilder::new(interior.len(), map.ndofs());
    for (row, &e) in interior.iter().enumerate() {
        for (d, v) in map.jump_entries(&map.entities().edges()[e]) {
            b.push(row, d, v);
        }
    }
    Ok(ConstraintMatrix { matrix: b.finish(), edges: interior })
}

/// True iff every constraint row is satisfied to `1e-9` (relative to the
/// coefficient size when that exceeds one).
pub fn membership_rrm(constraints: &ConstraintMatrix, coeffs: &[f64]) -> Result<bool> {
    if coeffs.len() != constraints.matrix.ncols() {
        return Err(Error::DimensionMismatch { expected: constraints.matrix.ncols(), got: coeffs.len() });
    }
    let scale = crate::sparse::norm_inf(coeffs).max(1.0);
    Ok(constraints.residual(coeffs) <= 1e-9 * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Bottom,
    Top,
    Left,
    Right,
    Interior,
    Column,
    Row,
    Corner,
    Vertex,
    Bubble,
    ColumnStrip,
    RowStrip,
}

/// A global basis function as a sparse coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    pub kind: PatternKind,
    /// Lattice position the pattern is attached to (cell, vertex, column or
    /// row index depending on the kind).
    pub anchor: (usize, usize),
    pub coeffs: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExplicitBasis {
    pub space: SpaceKind,
    pub ndofs: usize,
    pub vectors: Vec<BasisVector>,
}

impl ExplicitBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dense_vector(&self, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.ndofs];
        for &(d, c) in &self.vectors[k].coeffs {
            v[d] += c;
        }
        v
    }

    /// Basis vectors as the columns of an `ndofs × len` matrix.
    pub fn to_matrix(&self) -> CsrMatrix {
        let cols: Vec<Vec<(usize, f64)>> = self.vectors.iter().map(|v| v.coeffs.clone()).collect();
        CsrMatrix::from_columns(self.ndofs, &cols)
    }

    /// Numerical rank of the stacked vectors.
    pub fn rank(&self) -> usize {
        dense::rank(self.to_matrix().to_dense().as_ref(), RANK_TOL)
    }

    /// `Σ c_k v_k`.
    pub fn expand(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ndofs];
        for (v, ck) in self.vectors.iter().zip(c) {
            for &(d, x) in &v.coeffs {
                out[d] += ck * x;
            }
        }
        out
    }
}

#[derive(Clone, Copy)]
struct Clamp {
    left: bool,
    bottom: bool,
    right: bool,
    top: bool,
}

const fn clamp(left: bool, bottom: bool, right: bool, top: bool) -> Clamp {
    Clamp { left, bottom, right, top }
}

/// Solves the homogeneous constraint system of a rectangular patch of cells
/// `[i0, i1] × [j0, j1]` for a function supported on it and returns the
/// unique (up to scale) solution.
///
/// Unknowns are the bubble coefficients of the patch cells and the vertex
/// values strictly inside the patch. Rows are the jumps across every
/// interior edge of the patch cells (cells outside contribute nothing) and
/// the mean normal derivative on domain-boundary edges of clamped patch
/// sides.
fn patch_vector(
    map: &DofMap,
    (i0, i1): (usize, usize),
    (j0, j1): (usize, usize),
    sides: Clamp,
    name: &'static str,
) -> Result<Vec<(usize, f64)>> {
    let grid = map.grid();
    let ent = map.entities();
    let mut unknowns: BTreeMap<usize, usize> = BTreeMap::new();
    let add = |d: Option<usize>, u: &mut BTreeMap<usize, usize>| {
        if let Some(d) = d {
            let n = u.len();
            u.entry(d).or_insert(n);
        }
    };
    for j in j0..=j1 {
        for i in i0..=i1 {
            let c = grid.cell_id(i, j);
            add(map.bubble_dof(c, 0), &mut unknowns);
            add(map.bubble_dof(c, 1), &mut unknowns);
        }
    }
    for b in j0 + 1..=j1 {
        for a in i0 + 1..=i1 {
            if let Some(v) = ent.vertex_at(a, b) {
                add(map.vertex_dof(v), &mut unknowns);
            }
        }
    }

    let mut edges = BTreeSet::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            edges.extend(ent.cell_edges(i, j));
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for &e in &edges {
        let edge = &ent.edges()[e];
        if edge.is_interior() {
            rows.push(map.jump_entries(edge));
            continue;
        }
        let (clamped, side) = match edge.kind {
            EdgeKind::Vertical if edge.i == i0 => (sides.left, LocalEdge::Left),
            EdgeKind::Vertical if edge.i == i1 + 1 => (sides.right, LocalEdge::Right),
            EdgeKind::Horizontal if edge.j == j0 => (sides.bottom, LocalEdge::Bottom),
            EdgeKind::Horizontal if edge.j == j1 + 1 => (sides.top, LocalEdge::Top),
            _ => (false, LocalEdge::Left),
        };
        if clamped {
            let cell = edge.some_cell();
            let row = map
                .local_basis(cell)
                .iter()
                .zip(map.cell_dofs(cell))
                .filter_map(|(f, d)| d.map(|d| (d, f.edge_mean_derivative(side))))
                .collect();
            rows.push(row);
        }
    }

    let mut a = Mat::<f64>::zeros(rows.len(), unknowns.len());
    for (r, row) in rows.iter().enumerate() {
        for &(d, v) in row {
            if let Some(&k) = unknowns.get(&d) {
                a[(r, k)] += v;
            }
        }
    }
    let z = dense::nullspace(a.as_ref(), RANK_TOL);
    if z.ncols() != 1 {
        return Err(Error::PatternDimension { pattern: name, found: z.ncols() });
    }
    Ok(normalized(unknowns.iter().map(|(&d, &k)| (d, z[(k, 0)]))))
}

/// Drops numerical zeros and scales so the largest-magnitude coefficient is
/// `+1`.
fn normalized(entries: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let v: Vec<(usize, f64)> = entries.collect();
    let (_, peak) = v
        .iter()
        .fold((0.0f64, 0.0f64), |(m, p), &(_, x)| if libm::fabs(x) > m { (libm::fabs(x), x) } else { (m, p) });
    let cut = 1e-13 * libm::fabs(peak);
    v.into_iter().filter(|(_, x)| libm::fabs(*x) > cut).map(|(d, x)| (d, x / peak)).collect()
}

/// Explicit basis of the homogeneous RRM space on a full rectangle, built by
/// the sweeping construction: boundary-side patterns on 3×2 patches,
/// interior 3×3 patterns, two column and two row patterns along the last
/// columns and rows, and one 2×2 corner pattern in the northeast.
pub fn build_rrm_basis(grid: &RectGrid) -> Result<ExplicitBasis> {
    if !grid.is_full() {
        return Err(Error::Precondition("RRM basis needs a full rectangular grid"));
    }
    let (m, n) = (grid.m(), grid.n());
    if m < 2 || n < 2 {
        return Err(Error::Precondition("RRM basis needs m, n >= 2"));
    }
    let map = DofMap::new(SpaceKind::Rrm, grid, true);
    let mut vectors = Vec::with_capacity(m * n + 1);
    let mut push = |kind, anchor, coeffs| vectors.push(BasisVector { kind, anchor, coeffs });

    for c in 1..m.saturating_sub(1) {
        let v = patch_vector(&map, (c - 1, c + 1), (0, 1), clamp(true, false, true, true), "bottom")?;
        push(PatternKind::Bottom, (c, 0), v);
    }
    for c in 1..m.saturating_sub(1) {
        let v = patch_vector(&map, (c - 1, c + 1), (n - 2, n - 1), clamp(true, true, true, false), "top")?;
        push(PatternKind::Top, (c, n - 1), v);
    }
    for r in 1..n.saturating_sub(1) {
        let v = patch_vector(&map, (0, 1), (r - 1, r + 1), clamp(false, true, true, true), "left")?;
        push(PatternKind::Left, (0, r), v);
    }
    for r in 1..n.saturating_sub(1) {
        let v = patch_vector(&map, (m - 2, m - 1), (r - 1, r + 1), clamp(true, true, false, true), "right")?;
        push(PatternKind::Right, (m - 1, r), v);
    }
    for j in 1..n - 1 {
        for i in 1..m - 1 {
            let v = patch_vector(&map, (i - 1, i + 1), (j - 1, j + 1), clamp(true, true, true, true), "interior")?;
            push(PatternKind::Interior, (i, j), v);
        }
    }
    for i in [m - 2, m - 1] {
        let v = patch_vector(&map, (i, i), (0, n - 1), clamp(true, false, true, false), "column")?;
        push(PatternKind::Column, (i, 0), v);
    }
    for j in [n - 2, n - 1] {
        let v = patch_vector(&map, (0, m - 1), (j, j), clamp(false, true, false, true), "row")?;
        push(PatternKind::Row, (0, j), v);
    }
    let v = patch_vector(&map, (m - 2, m - 1), (n - 2, n - 1), clamp(true, true, false, false), "corner")?;
    push(PatternKind::Corner, (m - 1, n - 1), v);

    Ok(ExplicitBasis { space: SpaceKind::Rrm, ndofs: map.ndofs(), vectors })
}

/// Explicit basis of the MC space over the broken Wilson layout of
/// `DofMap::new(SpaceKind::Mc, grid, _)`.
///
/// Homogeneous: bilinear hats of interior vertices and one bubble per cell.
/// Otherwise: all vertex hats, every bubble except that of cell `(0, 0)`,
/// one `ψ_xx` strip per column and one `ψ_yy` strip per row.
pub fn build_mc_basis(grid: &RectGrid, homogeneous: bool) -> Result<ExplicitBasis> {
    if !grid.is_full() {
        return Err(Error::Precondition("MC basis needs a full rectangular grid"));
    }
    let map = DofMap::new(SpaceKind::Mc, grid, homogeneous);
    let ent = map.entities();
    let (m, n) = (grid.m(), grid.n());
    let mut vectors = Vec::new();

    for v in ent.vertices() {
        if homogeneous && v.boundary {
            continue;
        }
        let (a, b) = (v.i as isize, v.j as isize);
        let mut coeffs = Vec::new();
        for (di, dj, corner) in [(0, 0, 0), (-1, 0, 1), (-1, -1, 2), (0, -1, 3)] {
            if grid.is_active(a + di, b + dj) {
                let c = grid.cell_id((a + di) as usize, (b + dj) as usize);
                coeffs.push((map.cell_dofs(c)[corner].expect("broken dofs are free"), 1.0));
            }
        }
        vectors.push(BasisVector { kind: PatternKind::Vertex, anchor: (v.i, v.j), coeffs });
    }
    for j in 0..n {
        for i in 0..m {
            if !homogeneous && i == 0 && j == 0 {
                continue;
            }
            let c = grid.cell_id(i, j);
            let w = local::bubble_phi0(grid.cell(i, j)).wilson_dofs();
            let coeffs = map.cell_dofs(c).iter().zip(w).map(|(d, x)| (d.unwrap(), x)).collect();
            vectors.push(BasisVector { kind: PatternKind::Bubble, anchor: (i, j), coeffs });
        }
    }
    if !homogeneous {
        for i in 0..m {
            let coeffs = (0..n).map(|j| (map.bubble_dof(grid.cell_id(i, j), 0).unwrap(), 1.0)).collect();
            vectors.push(BasisVector { kind: PatternKind::ColumnStrip, anchor: (i, 0), coeffs });
        }
        for j in 0..n {
            let coeffs = (0..m).map(|i| (map.bubble_dof(grid.cell_id(i, j), 1).unwrap(), 1.0)).collect();
            vectors.push(BasisVector { kind: PatternKind::RowStrip, anchor: (0, j), coeffs });
        }
    }
    Ok(ExplicitBasis { space: SpaceKind::Mc, ndofs: map.ndofs(), vectors })
}

/// Largest jump of point values at the two Gauss points of interior edges
/// and, for `homogeneous`, largest value at boundary Gauss points.
pub fn mc_continuity_violation(map: &DofMap, coeffs: &[f64], homogeneous: bool) -> f64 {
    let grid = map.grid();
    let g = crate::quadrature::GaussRule::new();
    let mut worst = 0.0f64;
    for edge in map.entities().edges() {
        for theta in [g.theta1, g.theta2] {
            let (x, y) = edge.point_at(grid, theta);
            let val = |c: Option<usize>| c.map(|c| map.function_on_cell(c, coeffs).eval(x, y)).unwrap_or(0.0);
            if edge.is_interior() || homogeneous {
                worst = worst.max(libm::fabs(val(edge.plus) - val(edge.minus)));
            }
        }
    }
    worst
}

/// Maximum violations of the four properties of `curl_h w = (∂y w, −∂x w)`
/// for RRM members `w`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactSequenceReport {
    /// Variation of the Hessian within a cell (zero iff the curl is affine).
    pub piecewise_linear: f64,
    /// Jump of edge means of both curl components across interior edges.
    pub edge_mean_jump: f64,
    /// Edge mean of the normal component on boundary edges.
    pub boundary_normal: f64,
    /// Cellwise divergence.
    pub divergence: f64,
}

impl ExactSequenceReport {
    pub fn max_violation(&self) -> f64 {
        self.piecewise_linear.max(self.edge_mean_jump).max(self.boundary_normal).max(self.divergence)
    }

    fn merge(&mut self, o: &ExactSequenceReport) {
        self.piecewise_linear = self.piecewise_linear.max(o.piecewise_linear);
        self.edge_mean_jump = self.edge_mean_jump.max(o.edge_mean_jump);
        self.boundary_normal = self.boundary_normal.max(o.boundary_normal);
        self.divergence = self.divergence.max(o.divergence);
    }
}

/// Edge means of `(∂x w, ∂y w)` from one side, by Gauss quadrature along the
/// edge.
fn edge_gradient_mean(p: &LocalQuad, edge: &Edge, grid: &RectGrid, rule: &crate::quadrature::GaussRule) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    for (t, w) in rule.line_nodes.iter().zip(&rule.line_weights) {
        let (x, y) = edge.point_at(grid, 0.5 * (1.0 + t));
        let (gx, gy) = p.grad(x, y);
        acc.0 += 0.5 * w * gx;
        acc.1 += 0.5 * w * gy;
    }
    acc
}

/// Checks the curl of a single Wilson coefficient vector.
pub fn exact_sequence_violation(map: &DofMap, coeffs: &[f64]) -> ExactSequenceReport {
    let grid = map.grid();
    let rule = crate::quadrature::GaussRule::new();
    let mut rep = ExactSequenceReport::default();
    let funcs: BTreeMap<usize, LocalQuad> =
        map.entities().cells().iter().map(|&c| (c, map.function_on_cell(c, coeffs))).collect();
    for p in funcs.values() {
        let verts = p.cell.vertices();
        let h0 = p.hessian(verts[0].0, verts[0].1);
        for v in &verts[1..] {
            let h = p.hessian(v.0, v.1);
            let d = libm::fabs(h.0 - h0.0).max(libm::fabs(h.1 - h0.1)).max(libm::fabs(h.2 - h0.2));
            rep.piecewise_linear = rep.piecewise_linear.max(d);
        }
        // div (∂y w, −∂x w) from exact differences of the affine gradient.
        let (cx, cy) = p.cell.center();
        let (x0, x1, y0, y1) = (p.cell.x0, p.cell.x1(), p.cell.y0, p.cell.y1());
        let dx_curl1 = (p.grad(x1, cy).1 - p.grad(x0, cy).1) / p.cell.width;
        let dy_curl2 = -(p.grad(cx, y1).0 - p.grad(cx, y0).0) / p.cell.height;
        rep.divergence = rep.divergence.max(libm::fabs(dx_curl1 + dy_curl2));
    }
    for edge in map.entities().edges() {
        let side = |c: Option<usize>| c.map(|c| edge_gradient_mean(&funcs[&c], edge, grid, &rule));
        match (side(edge.plus), side(edge.minus)) {
            (Some(a), Some(b)) => {
                rep.edge_mean_jump = rep.edge_mean_jump.max(libm::fabs(a.0 - b.0)).max(libm::fabs(a.1 - b.1));
            }
            (Some(g), None) | (None, Some(g)) => {
                // The normal component of the curl is the tangential derivative.
                let tangential = match edge.kind {
                    EdgeKind::Vertical => g.1,
                    EdgeKind::Horizontal => g.0,
                };
                rep.boundary_normal = rep.boundary_normal.max(libm::fabs(tangential));
            }
            (None, None) => {}
        }
    }
    rep
}

/// Runs [`exact_sequence_violation`] on every member of an RRM basis.
pub fn verify_exact_sequence(basis: &ExplicitBasis, grid: &RectGrid) -> Result<ExactSequenceReport> {
    let map = DofMap::new(SpaceKind::Rrm, grid, true);
    if basis.ndofs != map.ndofs() {
        return Err(Error::DimensionMismatch { expected: map.ndofs(), got: basis.ndofs });
    }
    let mut rep = ExactSequenceReport::default();
    for k in 0..basis.len() {
        rep.merge(&exact_sequence_violation(&map, &basis.dense_vector(k)));
    }
    Ok(rep)
}

/// Dimensions and ranks of the spaces on a full `m × n` unit-square grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionReport {
    pub m: usize,
    pub n: usize,
    pub dim_wilson: usize,
    pub n_constraints: usize,
    pub rank: usize,
    /// Size of the explicit basis when it exists (`m, n ≥ 2`), else the
    /// kernel dimension of the constraints.
    pub dim_rrm: usize,
    pub dim_mc_hom: usize,
    pub dim_mc: usize,
}

/// Builds every space and counts; MC counts are the verified ranks of the
/// explicit bases.
pub fn dimension_report(grid: &RectGrid) -> Result<DimensionReport> {
    let wilson = DofMap::new(SpaceKind::Rrm, grid, true);
    let b = build_constraints_rrm(&wilson)?;
    let rank = b.rank();
    let kernel = wilson.ndofs() - rank;
    let dim_rrm = if grid.m() >= 2 && grid.n() >= 2 && grid.is_full() {
        let basis = build_rrm_basis(grid)?;
        if basis.len() != kernel {
            return Err(Error::PatternDimension { pattern: "global", found: basis.len() });
        }
        basis.len()
    } else {
        kernel
    };
    let independent = |b: ExplicitBasis| -> Result<usize> {
        let r = b.rank();
        if r != b.len() {
            return Err(Error::PatternDimension { pattern: "mc", found: r });
        }
        Ok(r)
    };
    Ok(DimensionReport {
        m: grid.m(),
        n: grid.n(),
        dim_wilson: wilson.ndofs(),
        n_constraints: b.nrows(),
        rank,
        dim_rrm,
        dim_mc_hom: independent(build_mc_basis(grid, true)?)?,
        dim_mc: independent(build_mc_basis(grid, false)?)?,
    })
}
