//! Tensor-product rectangular grids, optionally with a masked quadrant
//! (L-shaped domains), and their vertex/edge/cell enumeration.
//!
//! Cells are addressed on the full `m × n` lattice by `(i, j)`, `i` counting
//! columns left to right and `j` rows bottom to top; the lattice id is
//! `j * m + i`. Masked cells keep their lattice id but carry no degrees of
//! freedom.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Relative tolerance used when comparing breakpoints.
const BREAKPOINT_TOL: f64 = 1e-12;

/// Physical extent of a single rectangular cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeom {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl CellGeom {
    pub fn new(x0: f64, y0: f64, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidMesh("cell must have positive width and height"));
        }
        Ok(CellGeom { x0, y0, width, height })
    }

    pub fn unit() -> Self {
        CellGeom { x0: 0.0, y0: 0.0, width: 1.0, height: 1.0 }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x0 + 0.5 * self.width, self.y0 + 0.5 * self.height)
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.width
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.height
    }

    /// Vertices `a1..a4`, counterclockwise from the lower-left corner.
    pub fn vertices(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1(), self.y0),
            (self.x1(), self.y1()),
            (self.x0, self.y1()),
        ]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        CellGeom { x0: self.x0 + dx, y0: self.y0 + dy, ..*self }
    }
}

/// Computational domain: a rectangle `(0,w)×(0,h)` or the L-shape obtained by
/// removing its upper-right quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Rectangle { width: f64, height: f64 },
    LShape { width: f64, height: f64 },
}

impl Domain {
    pub fn unit_square() -> Self {
        Domain::Rectangle { width: 1.0, height: 1.0 }
    }

    /// `(0,2)² \ [1,2]²`.
    pub fn l_shape() -> Self {
        Domain::LShape { width: 2.0, height: 2.0 }
    }

    pub fn extent(&self) -> (f64, f64) {
        match *self {
            Domain::Rectangle { width, height } | Domain::LShape { width, height } => {
                (width, height)
            }
        }
    }

    pub fn is_l_shape(&self) -> bool {
        matches!(self, Domain::LShape { .. })
    }
}

/// A tensor-product rectangular grid with an active-cell mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RectGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    active: Vec<bool>,
}

impl RectGrid {
    /// Validates breakpoints and mask. `active` is indexed by lattice id.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, active: Vec<bool>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidMesh("need at least one cell per direction"));
        }
        if !xs.iter().chain(ys.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidMesh("breakpoints must be finite"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("breakpoints must be strictly increasing"));
        }
        let cells = (xs.len() - 1) * (ys.len() - 1);
        if active.len() != cells {
            return Err(Error::InvalidMesh("active mask length must equal the cell count"));
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::InvalidMesh("grid has no active cell"));
        }
        Ok(RectGrid { xs, ys, active })
    }

    /// Full grid without masked cells.
    pub fn from_breakpoints(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let cells = xs.len().saturating_sub(1) * ys.len().saturating_sub(1);
        RectGrid::new(xs, ys, vec![true; cells])
    }

    /// Uniform `m × n` subdivision of `domain`. L-shapes need even counts so
    /// that the removed quadrant is a union of cells.
    pub fn build_uniform(m: usize, n: usize, domain: Domain) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidMesh("cell counts must be positive"));
        }
        if domain.is_l_shape() && (m % 2 != 0 || n % 2 != 0) {
            return Err(Error::InvalidMesh("L-shape requires even cell counts"));
        }
        let (w, h) = domain.extent();
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidMesh("domain extent must be positive"));
        }
        let xs = (0..=m).map(|i| w * i as f64 / m as f64).collect();
        let ys = (0..=n).map(|j| h * j as f64 / n as f64).collect();
        let mut grid = RectGrid::from_breakpoints(xs, ys)?;
        if domain.is_l_shape() {
            grid.mask_upper_right_quadrant();
        }
        Ok(grid)
    }

    /// Nonuniform grid on the unit square built from copies of one 4×4
    /// pattern: each of its two macro intervals per direction is split at
    /// fraction 0.35, so cell aspect ratios 0.35/0.65, 0.65/0.35 and 1 all
    /// occur. Level `l` tiles `2^(l-1)` copies per direction, so the pattern
    /// persists at every scale and `h` halves from level to level. Successive
    /// levels are not nested; use [`RectGrid::refine`] for nested sequences.
    pub fn build_nonuniform_pattern(levels: usize) -> Result<Self> {
        Self::build_nonuniform_pattern_on(levels, Domain::unit_square())
    }

    pub fn build_nonuniform_pattern_on(levels: usize, domain: Domain) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Precondition("levels must be at least 1"));
        }
        if levels > 24 {
            return Err(Error::Precondition("levels must be at most 24"));
        }
        let tiles = 1usize << (levels - 1);
        let (w, h) = domain.extent();
        let pattern = |len: f64| {
            let t = len / tiles as f64;
            let mut xs = Vec::with_capacity(4 * tiles + 1);
            xs.push(0.0);
            for k in 0..tiles {
                let a = k as f64 * t;
                let half = 0.5 * t;
                xs.extend([a + 0.35 * half, a + half, a + half + 0.35 * half]);
                xs.push(if k + 1 == tiles { len } else { a + t });
            }
            xs
        };
        let mut grid = RectGrid::from_breakpoints(pattern(w), pattern(h))?;
        if domain.is_l_shape() {
            grid.mask_upper_right_quadrant();
        }
        Ok(grid)
    }

    fn mask_upper_right_quadrant(&mut self) {
        let (m, n) = (self.m(), self.n());
        let (xmid, ymid) = (
            0.5 * (self.xs[0] + self.xs[m]),
            0.5 * (self.ys[0] + self.ys[n]),
        );
        for j in 0..n {
            for i in 0..m {
                let cx = 0.5 * (self.xs[i] + self.xs[i + 1]);
                let cy = 0.5 * (self.ys[j] + self.ys[j + 1]);
                if cx > xmid && cy > ymid {
                    self.active[j * m + i] = false;
                }
            }
        }
    }

    /// Bisects every breakpoint interval; each cell inherits its parent's
    /// active flag.
    pub fn refine(&self) -> RectGrid {
        let bisect = |v: &[f64]| {
            let mut out = Vec::with_capacity(2 * v.len() - 1);
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(v[v.len() - 1]);
            out
        };
        let (m, n) = (self.m(), self.n());
        let xs = bisect(&self.xs);
        let ys = bisect(&self.ys);
        let mut active = vec![false; 4 * m * n];
        for j in 0..2 * n {
            for i in 0..2 * m {
                active[j * 2 * m + i] = self.active[(j / 2) * m + i / 2];
            }
        }
        RectGrid { xs, ys, active }
    }

    /// `true` iff the grid is the double bisection of the grid formed by every
    /// fourth breakpoint (and the mask is constant on each 4×4 block).
    pub fn satisfies_rt(&self) -> bool {
        let (m, n) = (self.m(), self.n());
        if m % 4 != 0 || n % 4 != 0 {
            return false;
        }
        let coarse_xs: Vec<f64> = self.xs.iter().step_by(4).copied().collect();
        let coarse_ys: Vec<f64> = self.ys.iter().step_by(4).copied().collect();
        let coarse_active: Vec<bool> = (0..n / 4)
            .flat_map(|j| (0..m / 4).map(move |i| (i, j)))
            .map(|(i, j)| self.active[4 * j * m + 4 * i])
            .collect();
        let coarse = match RectGrid::new(coarse_xs, coarse_ys, coarse_active) {
            Ok(c) => c,
            Err(_) => return false,
        };
        self.matches(&coarse.refine().refine())
    }

    /// Same lattice, same mask, breakpoints equal up to a relative tolerance.
    pub fn matches(&self, other: &RectGrid) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            let scale = a
                .iter()
                .chain(b.iter())
                .fold(1.0f64, |acc, v| acc.max(libm::fabs(*v)));
            a.len() == b.len()
                && a.iter().zip(b).all(|(u, v)| libm::fabs(u - v) <= BREAKPOINT_TOL * scale)
        };
        close(&self.xs, &other.xs) && close(&self.ys, &other.ys) && self.active == other.active
    }

    /// Number of cell columns.
    pub fn m(&self) -> usize {
        self.xs.len() - 1
    }

    /// Number of cell rows.
    pub fn n(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    pub fn is_full(&self) -> bool {
        self.active.iter().all(|&a| a)
    }

    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        j * self.m() + i
    }

    pub fn cell_ij(&self, id: usize) -> (usize, usize) {
        (id % self.m(), id / self.m())
    }

    /// Whether lattice cell `(i, j)` exists and is active. Out-of-range
    /// indices are inactive.
    pub fn is_active(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 {
            return false;
        }
        let (i, j) = (i as usize, j as usize);
        i < self.m() && j < self.n() && self.active[j * self.m() + i]
    }

    pub fn cell(&self, i: usize, j: usize) -> CellGeom {
        CellGeom {
            x0: self.xs[i],
            y0: self.ys[j],
            width: self.xs[i + 1] - self.xs[i],
            height: self.ys[j + 1] - self.ys[j],
        }
    }

    pub fn cell_by_id(&self, id: usize) -> CellGeom {
        let (i, j) = self.cell_ij(id);
        self.cell(i, j)
    }

    /// Lattice ids of active cells in increasing order.
    pub fn active_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, a)| **a).map(|(c, _)| c)
    }

    pub fn num_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// Mesh size: the largest cell dimension over active cells.
    pub fn h(&self) -> f64 {
        self.active_cells()
            .map(|c| {
                let g = self.cell_by_id(c);
                g.width.max(g.height)
            })
            .fold(0.0, f64::max)
    }

    /// Largest cell width over active cells.
    pub fn hx(&self) -> f64 {
        self.active_cells().map(|c| self.cell_by_id(c).width).fold(0.0, f64::max)
    }

    /// Largest cell height over active cells.
    pub fn hy(&self) -> f64 {
        self.active_cells().map(|c| self.cell_by_id(c).height).fold(0.0, f64::max)
    }

    /// Translated copy of the grid.
    pub fn translated(&self, dx: f64, dy: f64) -> RectGrid {
        RectGrid {
            xs: self.xs.iter().map(|x| x + dx).collect(),
            ys: self.ys.iter().map(|y| y + dy).collect(),
            active: self.active.clone(),
        }
    }

    pub fn entities(&self) -> EntityIndex {
        EntityIndex::build(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Lies on the line `x = xs[i]`; its normal points in `+x`.
    Vertical,
    /// Lies on the line `y = ys[j]`; its normal points in `+y`.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub i: usize,
    pub j: usize,
    pub boundary: bool,
}

/// An edge with its fixed global orientation. Jumps across it are taken as
/// (value on the `plus` side) − (value on the `minus` side), where `plus` is
/// the cell to the right of a vertical edge or above a horizontal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub kind: EdgeKind,
    /// Vertical: x-line index `i` and segment `j`. Horizontal: segment `i`
    /// and y-line index `j`.
    pub i: usize,
    pub j: usize,
    /// Active lattice cell on the negative side.
    pub minus: Option<usize>,
    /// Active lattice cell on the positive side.
    pub plus: Option<usize>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.minus.is_some() && self.plus.is_some()
    }

    /// Endpoints, ordered along increasing coordinate.
    pub fn endpoints(&self, grid: &RectGrid) -> [(f64, f64); 2] {
        match self.kind {
            EdgeKind::Vertical => {
                let x = grid.xs[self.i];
                [(x, grid.ys[self.j]), (x, grid.ys[self.j + 1])]
            }
            EdgeKind::Horizontal => {
                let y = grid.ys[self.j];
                [(grid.xs[self.i], y), (grid.xs[self.i + 1], y)]
            }
        }
    }

    /// Point at parametric coordinate `theta ∈ [0,1]` from the first endpoint.
    pub fn point_at(&self, grid: &RectGrid, theta: f64) -> (f64, f64) {
        let [a, b] = self.endpoints(grid);
        (a.0 + theta * (b.0 - a.0), a.1 + theta * (b.1 - a.1))
    }

    pub fn length(&self, grid: &RectGrid) -> f64 {
        match self.kind {
            EdgeKind::Vertical => grid.ys[self.j + 1] - grid.ys[self.j],
            EdgeKind::Horizontal => grid.xs[self.i + 1] - grid.xs[self.i],
        }
    }

    /// Any adjacent active cell.
    pub fn some_cell(&self) -> usize {
        self.minus.or(self.plus).expect("edge touches an active cell")
    }
}

/// Compact enumeration of the vertices and edges touching active cells.
#[derive(Debug, Clone)]
pub struct EntityIndex {
    m: usize,
    n: usize,
    vertices: Vec<Vertex>,
    vertex_lookup: Vec<Option<usize>>,
    edges: Vec<Edge>,
    vertical_lookup: Vec<Option<usize>>,
    horizontal_lookup: Vec<Option<usize>>,
    cells: Vec<usize>,
}

impl EntityIndex {
    pub fn build(grid: &RectGrid) -> Self {
        let (m, n) = (grid.m(), grid.n());
        let act = |i: isize, j: isize| grid.is_active(i, j);
        let cid = |i: isize, j: isize| {
            if act(i, j) {
                Some(j as usize * m + i as usize)
            } else {
                None
            }
        };

        let mut edges = Vec::new();
        let mut vertical_lookup = vec![None; (m + 1) * n];
        for j in 0..n {
            for i in 0..=m {
                let (minus, plus) = (cid(i as isize - 1, j as isize), cid(i as isize, j as isize));
                if minus.is_some() || plus.is_some() {
                    vertical_lookup[j * (m + 1) + i] = Some(edges.len());
                    edges.push(Edge { kind: EdgeKind::Vertical, i, j, minus, plus });
                }
            }
        }
        let mut horizontal_lookup = vec![None; m * (n + 1)];
        for j in 0..=n {
            for i in 0..m {
                let (minus, plus) = (cid(i as isize, j as isize - 1), cid(i as isize, j as isize));
                if minus.is_some() || plus.is_some() {
                    horizontal_lookup[j * m + i] = Some(edges.len());
                    edges.push(Edge { kind: EdgeKind::Horizontal, i, j, minus, plus });
                }
            }
        }

        let boundary_edge = |lookup: &Vec<Option<usize>>, idx: usize| {
            lookup[idx].map(|e| !edges[e].is_interior()).unwrap_or(false)
        };
        let mut vertices = Vec::new();
        let mut vertex_lookup = vec![None; (m + 1) * (n + 1)];
        for j in 0..=n {
            for i in 0..=m {
                let (ii, jj) = (i as isize, j as isize);
                let touches = act(ii - 1, jj - 1) || act(ii, jj - 1) || act(ii - 1, jj) || act(ii, jj);
                if !touches {
                    continue;
                }
                let mut boundary = false;
                if j > 0 {
                    boundary |= boundary_edge(&vertical_lookup, (j - 1) * (m + 1) + i);
                }
                if j < n {
                    boundary |= boundary_edge(&vertical_lookup, j * (m + 1) + i);
                }
                if i > 0 {
                    boundary |= boundary_edge(&horizontal_lookup, j * m + i - 1);
                }
                if i < m {
                    boundary |= boundary_edge(&horizontal_lookup, j * m + i);
                }
                vertex_lookup[j * (m + 1) + i] = Some(vertices.len());
                vertices.push(Vertex { i, j, boundary });
            }
        }

        EntityIndex {
            m,
            n,
            vertices,
            vertex_lookup,
            edges,
            vertical_lookup,
            horizontal_lookup,
            cells: grid.active_cells().collect(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Active lattice cell ids.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn vertex_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.m || j > self.n {
            return None;
        }
        self.vertex_lookup[j * (self.m + 1) + i]
    }

    pub fn vertical_edge(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.m || j >= self.n {
            return None;
        }
        self.vertical_lookup[j * (self.m + 1) + i]
    }

    pub fn horizontal_edge(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.m || j > self.n {
            return None;
        }
        self.horizontal_lookup[j * self.m + i]
    }

    /// Vertex ids `a1..a4` of lattice cell `(i, j)`, counterclockwise from the
    /// lower-left corner.
    pub fn cell_vertices(&self, i: usize, j: usize) -> [usize; 4] {
        let v = |a, b| self.vertex_at(a, b).expect("vertex of an active cell");
        [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]
    }

    /// Edge ids of lattice cell `(i, j)` in the order left, bottom, right,
    /// top.
    pub fn cell_edges(&self, i: usize, j: usize) -> [usize; 4] {
        let e = |o: Option<usize>| o.expect("edge of an active cell");
        [
            e(self.vertical_edge(i, j)),
            e(self.horizontal_edge(i, j)),
            e(self.vertical_edge(i + 1, j)),
            e(self.horizontal_edge(i, j + 1)),
        ]
    }

    pub fn num_interior_vertices(&self) -> usize {
        self.vertices.iter().filter(|v| !v.boundary).count()
    }

    pub fn num_boundary_vertices(&self) -> usize {
        self.vertices.iter().filter(|v| v.boundary).count()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_interior()).count()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.len() - self.num_interior_edges()
    }

    /// `#vertices − #edges + #cells`.
    pub fn euler_characteristic(&self) -> isize {
        self.vertices.len() as isize - self.edges.len() as isize + self.cells.len() as isize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussRule;

    #[test]
    fn uniform_grid_spacing() {
        let g = RectGrid::build_uniform(4, 2, Domain::unit_square()).unwrap();
        assert!((g.hx() - 0.25).abs() < 1e-15);
        assert!((g.hy() - 0.5).abs() < 1e-15);
        assert!((g.h() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_cell_has_no_interior_edges() {
        let g = RectGrid::build_uniform(1, 1, Domain::unit_square()).unwrap();
        let e = g.entities();
        assert_eq!(e.num_interior_edges(), 0);
        assert_eq!(e.num_interior_vertices(), 0);
        assert_eq!(e.edges().len(), 4);
    }

    #[test]
    fn l_shape_masks_a_quadrant() {
        let g = RectGrid::build_uniform(4, 4, Domain::l_shape()).unwrap();
        assert_eq!(g.num_active(), 12);
        assert!(!g.is_active(3, 3) && !g.is_active(2, 2) && g.is_active(1, 3));
        let e = g.entities();
        assert_eq!(e.euler_characteristic(), 1);
        // Reentrant corner is a boundary vertex.
        let corner = e.vertex_at(2, 2).unwrap();
        assert!(e.vertices()[corner].boundary);
        assert!(e.vertex_at(4, 4).is_none());
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(RectGrid::build_uniform(0, 2, Domain::unit_square()).is_err());
        assert!(RectGrid::build_uniform(3, 4, Domain::l_shape()).is_err());
        assert!(RectGrid::from_breakpoints(vec![0.0, 0.5, 0.5, 1.0], vec![0.0, 1.0]).is_err());
        assert!(RectGrid::build_nonuniform_pattern(0).is_err());
    }

    #[test]
    fn entity_counts_for_full_rectangles() {
        for m in 1..=8 {
            for n in 1..=8 {
                let e = RectGrid::build_uniform(m, n, Domain::unit_square()).unwrap().entities();
                assert_eq!(e.num_interior_vertices(), (m - 1) * (n - 1));
                assert_eq!(e.num_boundary_vertices(), 2 * m + 2 * n);
                assert_eq!(e.num_interior_edges(), 2 * m * n - m - n);
                assert_eq!(e.euler_characteristic(), 1);
                for edge in e.edges() {
                    let adjacent = edge.minus.is_some() as usize + edge.plus.is_some() as usize;
                    assert_eq!(adjacent, if edge.is_interior() { 2 } else { 1 });
                }
            }
        }
    }

    #[test]
    fn refine_bisects_breakpoints() {
        let g = RectGrid::from_breakpoints(vec![0.0, 0.35, 1.0], vec![0.0, 1.0]).unwrap();
        let r = g.refine();
        let expect = [0.0, 0.175, 0.35, 0.675, 1.0];
        for (a, b) in r.xs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = RectGrid::build_uniform(2, 2, Domain::unit_square()).unwrap();
        assert!(g.refine().matches(&RectGrid::build_uniform(4, 4, Domain::unit_square()).unwrap()));
    }

    #[test]
    fn refine_preserves_l_shape_footprint() {
        let g = RectGrid::build_uniform(2, 2, Domain::l_shape()).unwrap();
        let r = g.refine();
        assert!(r.matches(&RectGrid::build_uniform(4, 4, Domain::l_shape()).unwrap()));
        let area = |g: &RectGrid| {
            g.active_cells().map(|c| {
                let k = g.cell_by_id(c);
                k.width * k.height
            }).sum::<f64>()
        };
        assert!((area(&g) - area(&r)).abs() < 1e-14);
        assert!((area(&r) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hypothesis_rt() {
        let u = |m, n| RectGrid::build_uniform(m, n, Domain::unit_square()).unwrap();
        assert!(u(8, 8).satisfies_rt());
        assert!(!u(4, 2).satisfies_rt());
        assert!(!u(6, 6).satisfies_rt());
        // 12 cells per side are divisible by 4 and uniform, so still RT.
        assert!(u(12, 8).satisfies_rt());
        let coarse = RectGrid::from_breakpoints(vec![0.0, 0.3, 1.0], vec![0.0, 0.6, 1.0]).unwrap();
        assert!(coarse.refine().refine().satisfies_rt());
        // Nonuniform 4×4 grid is not a double bisection.
        assert!(!RectGrid::build_nonuniform_pattern(1).unwrap().satisfies_rt());
    }

    #[test]
    fn nonuniform_pattern_ratios() {
        let g = RectGrid::build_nonuniform_pattern(1).unwrap();
        assert_eq!((g.m(), g.n()), (4, 4));
        let ratio_present = |r: f64| {
            g.active_cells().any(|c| {
                let k = g.cell_by_id(c);
                (k.width / k.height - r).abs() < 1e-12
            })
        };
        assert!(ratio_present(0.35 / 0.65));
        assert!(ratio_present(0.65 / 0.35));
        assert!(ratio_present(1.0));

        let g2 = RectGrid::build_nonuniform_pattern(2).unwrap();
        assert_eq!((g2.m(), g2.n()), (8, 8));
        assert!((g.h() / g2.h() - 2.0).abs() < 1e-12);
        assert!(!g2.matches(&g.refine()));
        // The left half of level 2 repeats level 1 scaled by one half.
        for (a, b) in g2.xs()[..5].iter().zip(g.xs()) {
            assert!((a - 0.5 * b).abs() < 1e-15);
        }
        assert!(g.refine().refine().satisfies_rt());
    }

    #[test]
    fn edge_quadrature_points_lie_on_edges() {
        let g = RectGrid::build_nonuniform_pattern(2).unwrap();
        let e = g.entities();
        let rule = GaussRule::new();
        for edge in e.edges() {
            let [a, b] = edge.endpoints(&g);
            for t in [rule.theta1, rule.theta2, 0.5] {
                let p = edge.point_at(&g, t);
                match edge.kind {
                    EdgeKind::Vertical => {
                        assert_eq!(p.0, a.0);
                        assert!(p.1 > a.1 && p.1 < b.1);
                    }
                    EdgeKind::Horizontal => {
                        assert_eq!(p.1, a.1);
                        assert!(p.0 > a.0 && p.0 < b.0);
                    }
                }
            }
        }
    }
}
