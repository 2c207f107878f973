//! The exit-probability operator
//!
//! ```text
//! L v(x) = ½σ²(x) v''(x) + μ(x) v'(x)
//!        + Σ_k λ_k ∫ [v(x + z) − v(x)] f_k(z) dz
//! ```
//!
//! applied to candidate functions, with a choice of how the candidate is
//! read outside `(a, b)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{ClosedFormPia, Jet};
use crate::error::{invalid, Result};
use crate::model::{Interval, ProcessSpec};
use crate::quadrature::{breakpoints_within, integrate_pieces, QuadratureConfig};

/// How a candidate is evaluated where jumps land outside `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionPolicy {
    /// `v = 1` at or left of `a`, `v = 0` at or right of `b`.
    #[default]
    OuterConditions,
    /// The candidate's own formula everywhere.
    AnalyticContinuation,
}

/// A function the operator can be applied to.
pub trait Candidate: Sync {
    /// The candidate's formula. Called outside `(a, b)` only under
    /// [`ExtensionPolicy::AnalyticContinuation`].
    fn value(&self, x: f64) -> f64;

    /// Exact `(v', v'')` when known.
    fn derivatives(&self, _x: f64) -> Option<(f64, f64)> {
        None
    }

    /// Interior points where the candidate is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Candidate for ClosedFormPia {
    fn value(&self, x: f64) -> f64 {
        self.analytic(x)
    }

    fn derivatives(&self, x: f64) -> Option<(f64, f64)> {
        let j = self.jet(x);
        Some((j.d1, j.d2))
    }

    fn breakpoints(&self) -> Vec<f64> {
        ClosedFormPia::breakpoints(self)
    }
}

/// Candidate from a plain closure; derivatives by finite differences.
pub struct FnCandidate<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Candidate for FnCandidate<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Candidate from a closure returning value and exact derivatives.
pub struct JetCandidate<F>(pub F);

impl<F: Fn(f64) -> Jet + Sync> Candidate for JetCandidate<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x).value
    }

    fn derivatives(&self, x: f64) -> Option<(f64, f64)> {
        let j = (self.0)(x);
        Some((j.d1, j.d2))
    }
}

fn extended<C: Candidate + ?Sized>(v: &C, iv: &Interval, y: f64, policy: ExtensionPolicy) -> f64 {
    match policy {
        ExtensionPolicy::OuterConditions if y <= iv.a() => 1.0,
        ExtensionPolicy::OuterConditions if y >= iv.b() => 0.0,
        _ => v.value(y),
    }
}

/// Central differences `(f'(x), f''(x))` with step `h`.
pub fn central_derivatives<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> (f64, f64) {
    let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
    ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
}

/// The jump part `Σ λ_k ∫ [v(x + z) − v(x)] f_k(z) dz` at `x`.
///
/// Point-mass kernels are evaluated directly. For uniform kernels the part of
/// the landing range outside `(a, b)` contributes its mass times the outer
/// value under [`ExtensionPolicy::OuterConditions`]; the rest is integrated
/// adaptively.
pub fn nonlocal_term<C: Candidate + ?Sized>(
    spec: &ProcessSpec,
    v: &C,
    x: f64,
    policy: ExtensionPolicy,
) -> Result<f64> {
    let iv = spec.interval;
    let vx = v.value(x);
    let bps = v.breakpoints();
    let mut total = 0.0;
    for (rate, kernel) in spec.jump_streams() {
        if kernel.is_proportional() && x <= 0.0 {
            // (1/αx)∫₀^{αx} [v(x+z) − v(x)] dz → 0 as x → 0⁺
            continue;
        }
        let (lo, hi) = kernel.range(x);
        let width = hi - lo;
        if width == 0.0 {
            total += rate * (extended(v, &iv, x + lo, policy) - vx);
            continue;
        }
        let (y0, y1) = (x + lo, x + hi);
        let cfg = QuadratureConfig::with_abs_tol(1e-12 * width.min(1.0));
        let integral = match policy {
            ExtensionPolicy::AnalyticContinuation => {
                integrate_pieces(|y| v.value(y), &breakpoints_within(y0, y1, &bps), cfg)?
            }
            ExtensionPolicy::OuterConditions => {
                let left_mass = (iv.a().min(y1) - y0).max(0.0);
                let (p, q) = (y0.max(iv.a()), y1.min(iv.b()));
                let inner = if q > p {
                    integrate_pieces(|y| v.value(y), &breakpoints_within(p, q, &bps), cfg)?
                } else {
                    0.0
                };
                left_mass + inner
            }
        };
        total += rate * (integral / width - vx);
    }
    Ok(total)
}

/// `L v(x)`. Derivatives come from the candidate when it has them, else
/// from central differences with step `1e-5·(b − a)`.
pub fn apply_generator<C: Candidate + ?Sized>(
    spec: &ProcessSpec,
    v: &C,
    x: f64,
    policy: ExtensionPolicy,
) -> Result<f64> {
    let (d1, d2) = v
        .derivatives(x)
        .unwrap_or_else(|| central_derivatives(|y| v.value(y), x, 1e-5 * spec.interval.length()));
    let local = 0.5 * spec.variance(x) * d2 + spec.drift(x) * d1;
    Ok(local + nonlocal_term(spec, v, x, policy)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNode {
    pub x: f64,
    pub residual: f64,
    /// Some jump from `x` can land on or beyond a boundary.
    pub overshoot: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualProfile {
    pub policy: ExtensionPolicy,
    pub nodes: Vec<ResidualNode>,
}

impl ResidualProfile {
    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().map(|n| n.residual.abs()).fold(0.0, f64::max)
    }

    /// Largest residual over nodes no jump can carry out of the interval.
    pub fn max_abs_without_overshoot(&self) -> f64 {
        self.nodes
            .iter()
            .filter(|n| !n.overshoot)
            .map(|n| n.residual.abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `x,residual,overshoot_flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "residual", "overshoot_flag"])?;
        for n in &self.nodes {
            w.write_record([n.x.to_string(), n.residual.to_string(), n.overshoot.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Residuals at `n_points` equispaced interior nodes.
pub fn residual_profile<C: Candidate + ?Sized>(
    spec: &ProcessSpec,
    v: &C,
    policy: ExtensionPolicy,
    n_points: usize,
) -> Result<ResidualProfile> {
    if n_points < 2 {
        return Err(invalid(format!("residual profile needs >= 2 points, got {n_points}")));
    }
    let nodes = spec
        .interval
        .interior_nodes(n_points)
        .into_par_iter()
        .map(|x| {
            Ok(ResidualNode {
                x,
                residual: apply_generator(spec, v, x, policy)?,
                overshoot: spec.overshoot_possible(x),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualProfile { policy, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example, ExampleParams};

    #[test]
    fn constants_are_annihilated() {
        let p = ExampleParams::default();
        for id in 1..=7 {
            let spec = build_example(id, &p).unwrap();
            let c = JetCandidate(|_x: f64| Jet {
                value: 0.37,
                d1: 0.0,
                d2: 0.0,
            });
            for x in spec.interval.interior_nodes(9) {
                let r = apply_generator(&spec, &c, x, ExtensionPolicy::AnalyticContinuation).unwrap();
                assert!(r.abs() <= 1e-12, "example {id} x={x}: {r}");
            }
        }
    }

    #[test]
    fn example7_overshooting_jump_reads_zero() {
        let p = ExampleParams::default();
        let spec = build_example(7, &p).unwrap();
        let cf = ClosedFormPia::for_example(7, &p).unwrap();
        for x in [0.55, 0.7, 0.95] {
            let t = nonlocal_term(&spec, &cf, x, ExtensionPolicy::OuterConditions).unwrap();
            assert!((t + cf.value(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn example6_policies_disagree_by_the_jump_term() {
        let p = ExampleParams {
            lambda1: 0.8,
            ..ExampleParams::default()
        };
        let spec = build_example(6, &p).unwrap();
        let cf = ClosedFormPia::Cosine;
        for x in [0.1, 0.5, 0.9] {
            let analytic = apply_generator(&spec, &cf, x, ExtensionPolicy::AnalyticContinuation).unwrap();
            let outer = apply_generator(&spec, &cf, x, ExtensionPolicy::OuterConditions).unwrap();
            assert!(analytic.abs() < 1e-10);
            assert!((outer + 0.8 * cf.value(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn finite_differences_are_second_order() {
        let f = |x: f64| (1.3 * x).sin() * x.exp();
        let d1 = |x: f64| (1.3 * (1.3 * x).cos() + (1.3 * x).sin()) * x.exp();
        let x = 0.4;
        let (e1, _) = central_derivatives(f, x, 0.02);
        let (e2, _) = central_derivatives(f, x, 0.01);
        let ratio = (e1 - d1(x)).abs() / (e2 - d1(x)).abs();
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn profile_csv_header() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let prof = residual_profile(&spec, &FnCandidate(|x: f64| 1.0 - x), ExtensionPolicy::OuterConditions, 3).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,residual,overshoot_flag\n"));
        assert_eq!(s.lines().count(), 4);
        assert!(residual_profile(&spec, &FnCandidate(|x: f64| x), ExtensionPolicy::OuterConditions, 1).is_err());
    }
}
