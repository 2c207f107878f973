//! Finite-difference solution of the exit problem with outer conditions.
//!
//! Unknowns are the values at the interior nodes `x_i = a + i·h`,
//! `i = 1..=n`, with `h = (b − a)/(n + 1)`. The boundary nodes carry the
//! outer values 1 (at `a`) and 0 (at `b`). Jump terms are discretized by
//! integrating the piecewise-linear interpolant of the nodal values exactly,
//! so every row stays linear in the unknowns; mass landing outside `(a, b)`
//! moves to the right-hand side.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, FppError, Result};
use crate::generator::Candidate;
use crate::model::{Interval, JumpKernel, ProcessSpec};

/// Tolerance on excursions outside `[0, 1]` before the solution is flagged.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub interval: Interval,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(interval: Interval, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(invalid(format!("grid needs at least 8 interior nodes, got {n}")));
        }
        Ok(Self {
            interval,
            n,
            h: interval.length() / (n as f64 + 1.0),
        })
    }

    /// Position of node `j`, `j = 0..=n+1` (0 and `n+1` are the boundary nodes).
    pub fn node(&self, j: usize) -> f64 {
        if j == self.n + 1 {
            self.interval.b()
        } else {
            self.interval.a() + j as f64 * self.h
        }
    }

    pub fn interior(&self) -> Vec<f64> {
        (1..=self.n).map(|j| self.node(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Provenance {
    Pide { n: usize },
    ClosedForm { example: u8 },
    MonteCarlo { paths: usize, dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    /// `‖Mv − r‖∞ / ‖r‖∞` of the discrete system.
    pub relative_residual: f64,
    /// Largest excursion of the raw solution outside `[0, 1]`.
    pub max_excess: f64,
    pub upwind_rows: usize,
}

impl SolveDiagnostics {
    pub fn monotone(&self) -> bool {
        self.max_excess <= MONOTONE_TOL
    }
}

/// `π_a` sampled on a grid, read back by linear interpolation with the
/// outer values attached.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionField {
    pub grid: Grid,
    pub provenance: Provenance,
    /// Nodal values clamped to `[0, 1]`.
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SolveDiagnostics>,
}

impl SolutionField {
    /// Samples `f` at the interior nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, provenance: Provenance, f: F) -> Self {
        let values = grid.interior().into_iter().map(|x| f(x).clamp(0.0, 1.0)).collect();
        Self {
            grid,
            provenance,
            values,
            diagnostics: None,
        }
    }

    /// Value at node `j = 0..=n+1`, boundary nodes included.
    pub fn node_value(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else if j == self.grid.n + 1 {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let iv = self.grid.interval;
        if x <= iv.a() {
            return 1.0;
        }
        if x >= iv.b() {
            return 0.0;
        }
        let t = (x - iv.a()) / self.grid.h;
        let j = (t.floor() as usize).min(self.grid.n);
        let frac = t - j as f64;
        self.node_value(j) * (1.0 - frac) + self.node_value(j + 1) * frac
    }

    /// CSV with columns `x,value` over the interior nodes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.interior().iter().zip(&self.values) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Candidate for SolutionField {
    fn value(&self, x: f64) -> f64 {
        self.value_at(x)
    }

    /// Derivatives of the quadratic through the three nodes nearest `x`;
    /// central differences at the nodes themselves.
    fn derivatives(&self, x: f64) -> Option<(f64, f64)> {
        let g = &self.grid;
        let t = (x - g.interval.a()) / g.h;
        let j = (t.round() as usize).clamp(1, g.n);
        let (vm, v0, vp) = (self.node_value(j - 1), self.node_value(j), self.node_value(j + 1));
        let d2 = (vp - 2.0 * v0 + vm) / (g.h * g.h);
        let d1 = (vp - vm) / (2.0 * g.h) + d2 * (x - g.node(j));
        Some((d1, d2))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.grid.interior()
    }
}

/// Dense system `M v = r` for the interior unknowns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub grid: Grid,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub upwind_rows: usize,
}

struct Row {
    coeffs: Vec<f64>,
    rhs: f64,
    upwind: bool,
}

impl Row {
    /// Adds weight `w` on node `j`; boundary nodes move to the right-hand side.
    fn add(&mut self, j: usize, w: f64) {
        let n = self.coeffs.len();
        if j == 0 {
            self.rhs -= w;
        } else if j <= n {
            self.coeffs[j - 1] += w;
        }
    }
}

fn assemble_row(spec: &ProcessSpec, grid: &Grid, i: usize) -> Result<Row> {
    let n = grid.n;
    let h = grid.h;
    let (a, b) = (grid.interval.a(), grid.interval.b());
    let x = grid.node(i);
    let s2 = spec.variance(x);
    let mu = spec.drift(x);
    if !(s2.is_finite() && mu.is_finite()) {
        return Err(invalid(format!("coefficients not finite at x = {x}")));
    }
    let mut row = Row {
        coeffs: vec![0.0; n],
        rhs: 0.0,
        upwind: false,
    };
    let d = 0.5 * s2 / (h * h);
    // central differencing keeps nonnegative neighbours iff |μ|h <= σ²
    if mu.abs() * h <= s2 {
        row.add(i - 1, d - mu / (2.0 * h));
        row.add(i, -2.0 * d);
        row.add(i + 1, d + mu / (2.0 * h));
    } else {
        row.upwind = true;
        let c = mu.abs() / h;
        row.add(i, -2.0 * d - c);
        if mu > 0.0 {
            row.add(i - 1, d);
            row.add(i + 1, d + c);
        } else {
            row.add(i - 1, d + c);
            row.add(i + 1, d);
        }
    }

    for (rate, kernel) in spec.jump_streams() {
        if kernel.is_proportional() && x <= 0.0 {
            return Err(FppError::Unsupported(format!(
                "proportional kernel at nonpositive node x = {x}"
            )));
        }
        row.add(i, -rate);
        let (lo, hi) = kernel.range(x);
        let (y0, y1) = (x + lo, x + hi);
        match kernel {
            JumpKernel::FixedUp { .. } | JumpKernel::FixedDown { .. } => {
                if y0 <= a {
                    row.rhs -= rate;
                } else if y0 < b {
                    let t = (y0 - a) / h;
                    let mut j = (t.floor() as usize).min(n);
                    let mut frac = t - j as f64;
                    if frac > 1.0 - 1e-12 {
                        j += 1;
                        frac = 0.0;
                    }
                    row.add(j, rate * (1.0 - frac));
                    if frac > 1e-12 {
                        row.add(j + 1, rate * frac);
                    }
                }
            }
            JumpKernel::UniformProportionalUp { .. } | JumpKernel::UniformProportionalDown { .. } => {
                let width = y1 - y0;
                let scale = rate / width;
                let left = (a.min(y1) - y0).max(0.0);
                row.rhs -= scale * left;
                let (p, q) = (y0.max(a), y1.min(b));
                if q > p {
                    let first = (((p - a) / h).floor() as usize).min(n);
                    let last = ((((q - a) / h).ceil() as usize).max(1)).min(n + 1);
                    for j in first..last {
                        let (xl, xr) = (grid.node(j), grid.node(j + 1));
                        let (s, t) = (p.max(xl), q.min(xr));
                        if t <= s {
                            continue;
                        }
                        let wl = ((xr - s).powi(2) - (xr - t).powi(2)) / (2.0 * h);
                        let wr = ((t - xl).powi(2) - (s - xl).powi(2)) / (2.0 * h);
                        row.add(j, scale * wl);
                        row.add(j + 1, scale * wr);
                    }
                }
            }
        }
    }
    Ok(row)
}

/// Builds the discrete system; rows are assembled in parallel.
pub fn assemble(spec: &ProcessSpec, grid: &Grid) -> Result<LinearSystem> {
    let n = grid.n;
    let rows = (1..=n)
        .into_par_iter()
        .map(|i| assemble_row(spec, grid, i))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut upwind_rows = 0;
    for (r, row) in rows.into_iter().enumerate() {
        for (c, v) in row.coeffs.into_iter().enumerate() {
            matrix[(r, c)] = v;
        }
        rhs[r] = row.rhs;
        upwind_rows += row.upwind as usize;
    }
    Ok(LinearSystem {
        grid: *grid,
        matrix,
        rhs,
        upwind_rows,
    })
}

impl LinearSystem {
    /// LU with partial pivoting, plus one step of iterative refinement when
    /// the residual exceeds `1e-10·‖r‖∞`.
    pub fn solve(&self) -> Result<(DVector<f64>, f64)> {
        let lu = self.matrix.clone().lu();
        let mut v = lu.solve(&self.rhs).ok_or(FppError::SingularSystem)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FppError::SingularSystem);
        }
        let scale = self.rhs.amax().max(f64::MIN_POSITIVE);
        let mut res = (&self.matrix * &v - &self.rhs).amax() / scale;
        if res > 1e-10 {
            let r = &self.rhs - &self.matrix * &v;
            if let Some(dv) = lu.solve(&r) {
                v += dv;
                res = (&self.matrix * &v - &self.rhs).amax() / scale;
            }
        }
        Ok((v, res))
    }
}

/// Solves for `π_a` on `n` interior nodes.
pub fn solve(spec: &ProcessSpec, n: usize) -> Result<SolutionField> {
    let grid = Grid::new(spec.interval, n)?;
    let system = assemble(spec, &grid)?;
    let (v, relative_residual) = system.solve()?;
    let max_excess = v
        .iter()
        .map(|&x| (-x).max(x - 1.0))
        .fold(0.0, f64::max);
    Ok(SolutionField {
        grid,
        provenance: Provenance::Pide { n },
        values: v.iter().map(|x| x.clamp(0.0, 1.0)).collect(),
        diagnostics: Some(SolveDiagnostics {
            relative_residual,
            max_excess,
            upwind_rows: system.upwind_rows,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Largest error at the grid nodes.
    pub nodal_error: f64,
    /// Sup error of the interpolated field on a fixed evaluation grid shared by all rows.
    pub max_error: f64,
    /// `log₂(max_error(n) / max_error(next n))`; absent on the last row.
    pub observed_order: Option<f64>,
    pub nodal_order: Option<f64>,
}

/// Solves at each `n` and compares against `oracle`.
///
/// The field error is measured at `4·(n_max + 1) − 1` equispaced points, which
/// include every cell midpoint of dyadically nested grids.
pub fn convergence_study<F: Fn(f64) -> f64 + Sync>(
    spec: &ProcessSpec,
    oracle: F,
    n_list: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    let iv = spec.interval;
    let n_max = n_list.iter().copied().max().unwrap_or(8);
    let eval = iv.interior_nodes(4 * (n_max + 1) - 1);
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let field = solve(spec, n)?;
        let nodal_error = field
            .grid
            .interior()
            .iter()
            .zip(&field.values)
            .map(|(&x, &v)| (v - oracle(x)).abs())
            .fold(0.0, f64::max);
        let max_error = eval
            .par_iter()
            .map(|&x| (field.value_at(x) - oracle(x)).abs())
            .reduce(|| 0.0, f64::max);
        rows.push(ConvergenceRow {
            n,
            nodal_error,
            max_error,
            observed_order: None,
            nodal_order: None,
        });
    }
    for k in 0..rows.len().saturating_sub(1) {
        let (cur, next) = (rows[k], rows[k + 1]);
        rows[k].observed_order = Some((cur.max_error / next.max_error).log2());
        rows[k].nodal_order = Some((cur.nodal_error / next.nodal_error).log2());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example, ExampleParams};

    #[test]
    fn grid_needs_eight_nodes() {
        assert!(Grid::new(Interval::unit(), 7).is_err());
        let g = Grid::new(Interval::unit(), 9).unwrap();
        assert!((g.h - 0.1).abs() < 1e-16);
        assert_eq!(g.node(10), 1.0);
    }

    #[test]
    fn brownian_system_is_tridiagonal() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let grid = Grid::new(spec.interval, 15).unwrap();
        let sys = assemble(&spec, &grid).unwrap();
        for r in 0..15usize {
            for c in 0..15 {
                let v = sys.matrix[(r, c)];
                if r.abs_diff(c) > 1 {
                    assert_eq!(v, 0.0);
                }
            }
        }
        let h2 = grid.h * grid.h;
        assert!((sys.matrix[(3, 3)] + 1.0 / h2).abs() < 1e-9);
        assert!((sys.rhs[0] + 0.5 / h2).abs() < 1e-9);
        assert_eq!(sys.rhs[14], 0.0);
    }

    #[test]
    fn example7_fixed_jump_pattern() {
        let spec = build_example(7, &ExampleParams::default()).unwrap();
        let grid = Grid::new(spec.interval, 511).unwrap();
        let sys = assemble(&spec, &grid).unwrap();
        // x_i + ε lands exactly on node i + 256
        for i in [1usize, 100, 255] {
            let r = i - 1;
            let far: Vec<usize> = (0..511)
                .filter(|&c: &usize| c.abs_diff(r) > 1 && sys.matrix[(r, c)] != 0.0)
                .collect();
            assert_eq!(far, vec![r + 256]);
            assert!((sys.matrix[(r, r + 256)] - 1.0).abs() < 1e-12);
        }
        // from ε onward the jump exits: only the diagonal changes
        for i in [256usize, 300, 511] {
            let r = i - 1;
            assert!((0..511usize).all(|c| c.abs_diff(r) <= 1 || sys.matrix[(r, c)] == 0.0));
        }
    }

    #[test]
    fn example1_couples_rightward_and_leftward() {
        let spec = build_example(1, &ExampleParams::default()).unwrap();
        let grid = Grid::new(spec.interval, 63).unwrap();
        let sys = assemble(&spec, &grid).unwrap();
        let r = 40usize;
        let x = grid.node(r + 1);
        let nz: Vec<usize> = (0..63).filter(|&c| sys.matrix[(r, c)] != 0.0).collect();
        let lo = grid.node(nz[0] + 1);
        let hi = grid.node(*nz.last().unwrap() + 1);
        assert!(lo <= x * 0.5 + grid.h && lo >= x * 0.5 - grid.h);
        assert!(hi >= (x * 1.5).min(1.0) - grid.h);
        // away from the boundary every row of M sums to zero
        let row_sum: f64 = (0..63).map(|c| sys.matrix[(r, c)]).sum();
        assert!(row_sum.abs() < 1e-8, "{row_sum}");
    }

    #[test]
    fn brownian_recovers_linear_exactly() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let f = solve(&spec, 255).unwrap();
        let err = f
            .grid
            .interior()
            .iter()
            .zip(&f.values)
            .map(|(x, v)| (v - (1.0 - x)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-11);
        assert!(f.diagnostics.unwrap().monotone());
    }

    #[test]
    fn interpolation_attaches_outer_values() {
        let spec = ProcessSpec::brownian(Interval::new(1.0, 3.0).unwrap());
        let f = solve(&spec, 15).unwrap();
        assert_eq!(f.value_at(0.5), 1.0);
        assert_eq!(f.value_at(3.5), 0.0);
        assert!((f.value_at(2.0) - 0.5).abs() < 1e-12);
        assert!((f.value_at(1.01) - 0.995).abs() < 1e-12);
    }

    #[test]
    fn csv_and_json_exports() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let f = solve(&spec, 8).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,value\n"));
        assert_eq!(s.lines().count(), 9);
        let j: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(j["grid"]["n"], 8);
        assert_eq!(j["provenance"]["method"], "pide");
        assert_eq!(j["values"].as_array().unwrap().len(), 8);
    }
}
