//! Error norms, empirical orders of convergence, lower-bound diagnostics and
//! CSV/JSON emission of the resulting tables.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::quadrature::GaussRule;
use crate::spaces::DofMap;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// Broken H¹ seminorm `|u − u_h|_{1,h}`.
    pub energy: f64,
    /// `‖u − u_h‖_{0,ρ}`.
    pub l2: f64,
}

/// Errors of the discrete function `coeffs` on `map` against an exact
/// solution, by cellwise 4×4 Gauss quadrature.
pub fn error_norms(
    map: &DofMap,
    coeffs: &[f64],
    u: &dyn Fn(f64, f64) -> f64,
    grad: &dyn Fn(f64, f64) -> (f64, f64),
    rho: &dyn Fn(f64, f64) -> f64,
) -> Result<ErrorNorms> {
    if coeffs.len() != map.ndofs() {
        return Err(Error::DimensionMismatch { expected: map.ndofs(), got: coeffs.len() });
    }
    let rule = GaussRule::new();
    let (mut e1, mut e0) = (0.0, 0.0);
    for &c in map.entities().cells() {
        let cell = map.grid().cell_by_id(c);
        let p = map.function_on_cell(c, coeffs);
        e1 += rule.integrate(&cell, |x, y| {
            let (gx, gy) = grad(x, y);
            let (px, py) = p.grad(x, y);
            (gx - px) * (gx - px) + (gy - py) * (gy - py)
        });
        e0 += rule.integrate(&cell, |x, y| {
            let d = u(x, y) - p.eval(x, y);
            rho(x, y) * d * d
        });
    }
    Ok(ErrorNorms { energy: libm::sqrt(e1), l2: libm::sqrt(e0) })
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive pairs; `None`
/// for the first level and wherever the ratio is undefined.
pub fn eoc(errors: &[f64], h: &[f64]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(errors.len());
    for k in 0..errors.len() {
        if k == 0 {
            out.push(None);
            continue;
        }
        let (e0, e1, h0, h1) = (errors[k - 1], errors[k], h[k - 1], h[k]);
        let ok = e0 > 0.0 && e1 > 0.0 && h0 > 0.0 && h1 > 0.0 && h0 != h1;
        out.push(ok.then(|| libm::log(e0 / e1) / libm::log(h0 / h1)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLevel {
    /// Cell counts per direction of the level's grid.
    pub m: usize,
    pub n: usize,
    /// Largest cell dimension.
    pub h: f64,
    pub hx: f64,
    pub ndofs: usize,
    pub energy: f64,
    pub l2: f64,
}

/// Errors on a nested sequence of grids with their orders of convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<ErrorLevel>,
    pub eoc_energy: Vec<Option<f64>>,
    pub eoc_l2: Vec<Option<f64>>,
}

impl ErrorReport {
    pub fn new(levels: Vec<ErrorLevel>) -> Self {
        let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
        let e1: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        let e0: Vec<f64> = levels.iter().map(|l| l.l2).collect();
        ErrorReport { eoc_energy: eoc(&e1, &h), eoc_l2: eoc(&e0, &h), levels }
    }

    pub fn last_eoc_energy(&self) -> Option<f64> {
        self.eoc_energy.last().copied().flatten()
    }

    pub fn last_eoc_l2(&self) -> Option<f64> {
        self.eoc_l2.last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,hx,energy_err,l2_err,eoc_energy,eoc_l2\n");
        for (k, l) in self.levels.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                k,
                fmt_num(l.h),
                fmt_num(l.hx),
                fmt_num(l.energy),
                fmt_num(l.l2),
                fmt_opt(self.eoc_energy[k]),
                fmt_opt(self.eoc_l2[k]),
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"levels\":[");
        for (k, l) in self.levels.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(
                s,
                "{{\"level\":{},\"m\":{},\"n\":{},\"ndofs\":{},\"h\":{},\"hx\":{},\"energy_err\":{},\"l2_err\":{},\"eoc_energy\":{},\"eoc_l2\":{}}}",
                k,
                l.m,
                l.n,
                l.ndofs,
                json_num(l.h),
                json_num(l.hx),
                json_num(l.energy),
                json_num(l.l2),
                json_opt(self.eoc_energy[k]),
                json_opt(self.eoc_l2[k]),
            );
        }
        s.push_str("]}");
        s
    }
}

fn fmt_num(x: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{x:.10e}");
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => {
            let mut s = String::new();
            let _ = write!(s, "{v:.4}");
            s
        }
        None => String::new(),
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        fmt_num(x)
    } else {
        String::from("null")
    }
}

fn json_opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => {
            let mut s = String::new();
            let _ = write!(s, "{v}");
            s
        }
        _ => String::from("null"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// Diagnostics for one eigenvalue index across levels.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTrend {
    pub exact: f64,
    pub values: Vec<f64>,
    /// Every value is at most the exact one.
    pub below_exact: bool,
    /// Values increase with refinement.
    pub monotone: bool,
    /// Order of `λ − λ_h` between consecutive levels.
    pub eoc: Vec<Option<f64>>,
    /// `(λ − λ_h) / h²`.
    pub scaled_gap: Vec<f64>,
    /// All computed values coincide with the exact one.
    pub degenerate_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub h: Vec<f64>,
    pub trends: Vec<EigenTrend>,
}

impl LowerBoundReport {
    pub fn all_below(&self) -> bool {
        self.trends.iter().all(|t| t.below_exact)
    }

    pub fn all_monotone(&self) -> bool {
        self.trends.iter().all(|t| t.monotone)
    }
}

/// `lambda_h[level][j]` against `exact[j]` on levels with mesh sizes `h`.
pub fn lower_bound_report(h: &[f64], lambda_h: &[Vec<f64>], exact: &[f64]) -> Result<LowerBoundReport> {
    if h.len() < 2 || lambda_h.len() != h.len() {
        return Err(Error::Precondition("lower-bound report needs at least two levels"));
    }
    if lambda_h.iter().any(|l| l.len() < exact.len()) {
        return Err(Error::Precondition("every level needs as many eigenvalues as exact values"));
    }
    let trends = exact
        .iter()
        .enumerate()
        .map(|(j, &ex)| {
            let values: Vec<f64> = lambda_h.iter().map(|l| l[j]).collect();
            let gaps: Vec<f64> = values.iter().map(|v| ex - v).collect();
            let tol = 1e-12 * libm::fabs(ex);
            EigenTrend {
                exact: ex,
                below_exact: gaps.iter().all(|g| *g >= -tol),
                monotone: values.windows(2).all(|w| w[1] >= w[0] - tol),
                eoc: eoc(&gaps, h),
                scaled_gap: gaps.iter().zip(h).map(|(g, h)| g / (h * h)).collect(),
                degenerate_exact: gaps.iter().all(|g| libm::fabs(*g) <= tol),
                values,
            }
        })
        .collect();
    Ok(LowerBoundReport { h: h.to_vec(), trends })
}

#[derive(Debug, Clone, PartialEq)]
pub struct L2LowerBound {
    /// `e_{L²} / h²` per level.
    pub ratios: Vec<f64>,
    /// min/max of the ratios over the last three levels.
    pub spread: f64,
    pub status: CheckStatus,
}

/// Flags whether `e_{L²}/h²` stays bounded below: the min/max ratio over the
/// last three levels must exceed 0.2. Skipped when every error vanishes.
pub fn l2_lower_bound_check(report: &ErrorReport) -> Result<L2LowerBound> {
    let ratios: Vec<f64> = report.levels.iter().map(|l| l.l2 / (l.h * l.h)).collect();
    if report.levels.iter().all(|l| l.l2 == 0.0) {
        return Ok(L2LowerBound { ratios, spread: f64::NAN, status: CheckStatus::Skipped });
    }
    if ratios.len() < 3 {
        return Err(Error::Precondition("L2 lower-bound check needs at least three levels"));
    }
    let tail = &ratios[ratios.len() - 3..];
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(0.0, f64::max);
    let spread = if hi > 0.0 { lo / hi } else { 0.0 };
    let status = if spread > 0.2 { CheckStatus::Pass } else { CheckStatus::Fail };
    Ok(L2LowerBound { ratios, spread, status })
}

/// One row of an eigenvalue table.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenLevel {
    pub m: usize,
    pub n: usize,
    pub h: f64,
    pub hx: f64,
    pub values: Vec<f64>,
}

/// CSV with columns `level,h,hx,lambda1..lambdak,order1..orderk`; orders are
/// those of `λ_j − λ_{j,h}` when exact values are known, otherwise of the
/// differences between consecutive levels.
pub fn eigen_csv(levels: &[EigenLevel], exact: Option<&[f64]>) -> String {
    let k = levels.iter().map(|l| l.values.len()).min().unwrap_or(0);
    let orders = eigen_orders(levels, exact, k);
    let mut s = String::from("level,h,hx");
    for j in 1..=k {
        let _ = write!(s, ",lambda{j}");
    }
    for j in 1..=k {
        let _ = write!(s, ",order{j}");
    }
    s.push('\n');
    for (i, l) in levels.iter().enumerate() {
        let _ = write!(s, "{},{},{}", i, fmt_num(l.h), fmt_num(l.hx));
        for v in &l.values[..k] {
            let _ = write!(s, ",{v:.6}");
        }
        for o in &orders[i] {
            let _ = write!(s, ",{}", fmt_opt(*o));
        }
        s.push('\n');
    }
    s
}

pub fn eigen_json(levels: &[EigenLevel], exact: Option<&[f64]>) -> String {
    let k = levels.iter().map(|l| l.values.len()).min().unwrap_or(0);
    let orders = eigen_orders(levels, exact, k);
    let mut s = String::from("{\"levels\":[");
    for (i, l) in levels.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{{\"level\":{i},\"m\":{},\"n\":{},\"h\":{},\"hx\":{},\"eigenvalues\":[", l.m, l.n, json_num(l.h), json_num(l.hx));
        for (j, v) in l.values[..k].iter().enumerate() {
            let _ = write!(s, "{}{}", if j > 0 { "," } else { "" }, json_num(*v));
        }
        s.push_str("],\"orders\":[");
        for (j, o) in orders[i].iter().enumerate() {
            let _ = write!(s, "{}{}", if j > 0 { "," } else { "" }, json_opt(*o));
        }
        s.push_str("]}");
    }
    s.push(']');
    if let Some(ex) = exact {
        s.push_str(",\"exact\":[");
        for (j, v) in ex.iter().take(k).enumerate() {
            let _ = write!(s, "{}{}", if j > 0 { "," } else { "" }, json_num(*v));
        }
        s.push(']');
    }
    s.push('}');
    s
}

fn eigen_orders(levels: &[EigenLevel], exact: Option<&[f64]>, k: usize) -> Vec<Vec<Option<f64>>> {
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let mut orders = alloc::vec![alloc::vec![None; k]; levels.len()];
    for j in 0..k {
        let col: Vec<Option<f64>> = match exact {
            Some(ex) if j < ex.len() => {
                let gaps: Vec<f64> = levels.iter().map(|l| libm::fabs(ex[j] - l.values[j])).collect();
                eoc(&gaps, &h)
            }
            _ => {
                // Differences d_i = λ_i − λ_{i−1}; order from d_{i−1}/d_i.
                let mut col = alloc::vec![None; levels.len()];
                for i in 2..levels.len() {
                    let d0 = libm::fabs(levels[i - 1].values[j] - levels[i - 2].values[j]);
                    let d1 = libm::fabs(levels[i].values[j] - levels[i - 1].values[j]);
                    let r = h[i - 1] / h[i];
                    if d0 > 0.0 && d1 > 0.0 && r != 1.0 {
                        col[i] = Some(libm::log(d0 / d1) / libm::log(r));
                    }
                }
                col
            }
        };
        for (i, o) in col.into_iter().enumerate() {
            orders[i][j] = o;
        }
    }
    orders
}
