//! Turns mesh flags into the sequence of grids a study runs on.

use std::path::Path;

use rrm_core::{Domain, RectGrid};
use serde::Deserialize;

use crate::args::MeshArgs;
use crate::failure::{CliResult, Failure};

pub const DEFAULT_UNIFORM_M: [usize; 4] = [4, 8, 16, 32];
pub const DEFAULT_NONUNIFORM_LEVELS: usize = 4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over cells, `j * m + i`; all active when absent.
    #[serde(default)]
    pub active: Option<Vec<bool>>,
}

pub fn read_mesh_file(path: &Path) -> CliResult<RectGrid> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::precondition(format!("cannot read {}: {e}", path.display())))?;
    let file: MeshFile = serde_json::from_str(&text)
        .map_err(|e| Failure::precondition(format!("malformed mesh file {}: {e}", path.display())))?;
    let grid = match file.active {
        Some(active) => RectGrid::new(file.xs, file.ys, active)?,
        None => RectGrid::from_breakpoints(file.xs, file.ys)?,
    };
    Ok(grid)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    let out: Result<Vec<T>, _> = s.split(',').map(|t| t.trim().parse::<T>()).collect();
    match out {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(Failure::precondition(format!("cannot parse {what} list '{s}'"))),
    }
}

/// Cells in y that give cell aspect `h_x / h_y = aspect` with `m` cells in x.
fn n_for(m: usize, aspect: f64, domain: Domain) -> CliResult<usize> {
    let (w, h) = domain.extent();
    let n = aspect * m as f64 * h / w;
    let rounded = n.round();
    if !(aspect > 0.0 && aspect.is_finite()) || rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Failure::precondition(format!("aspect {aspect} with m = {m} gives a non-integer cell count {n} in y")));
    }
    Ok(rounded as usize)
}

fn m_for(hx: f64, domain: Domain) -> CliResult<usize> {
    let w = domain.extent().0;
    let m = w / hx;
    let rounded = m.round();
    if !(hx > 0.0) || rounded < 1.0 || (m - rounded).abs() > 1e-9 * m.max(1.0) {
        return Err(Failure::precondition(format!("hx = {hx} does not divide the domain width {w}")));
    }
    Ok(rounded as usize)
}

pub fn build_grids(mesh: &MeshArgs) -> CliResult<Vec<RectGrid>> {
    if let Some(path) = &mesh.mesh_file {
        return Ok(vec![read_mesh_file(path)?]);
    }
    if mesh.nonuniform {
        let levels: Vec<usize> = match &mesh.levels {
            None => (1..=DEFAULT_NONUNIFORM_LEVELS).collect(),
            Some(s) => {
                let v = parse_list::<usize>(s, "level")?;
                if v.len() == 1 { (1..=v[0]).collect() } else { v }
            }
        };
        if levels.is_empty() {
            return Err(Failure::precondition("no levels requested"));
        }
        return levels
            .iter()
            .map(|&l| RectGrid::build_nonuniform_pattern_on(l, mesh.domain).map_err(Failure::from))
            .collect();
    }
    let ms: Vec<usize> = if let Some(m) = mesh.m {
        vec![m]
    } else if let Some(hx) = &mesh.hx {
        parse_list::<f64>(hx, "hx")?.into_iter().map(|h| m_for(h, mesh.domain)).collect::<CliResult<_>>()?
    } else if let Some(levels) = &mesh.levels {
        parse_list::<usize>(levels, "cell count")?
    } else {
        DEFAULT_UNIFORM_M.to_vec()
    };
    ms.into_iter()
        .map(|m| {
            let n = match (mesh.m, mesh.n) {
                (Some(_), Some(n)) => n,
                _ => n_for(m, mesh.aspect, mesh.domain)?,
            };
            RectGrid::build_uniform(m, n, mesh.domain).map_err(Failure::from)
        })
        .collect()
}
