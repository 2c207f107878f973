//! The inverse problem: find a start density `g` in a parametric family with
//! `∫ g π_a = q`.
//!
//! Solutions are generally not unique. For two-parameter families the
//! solver returns the point of the constraint curve `{(α, β) : q(α, β) = q}`
//! closest to the uniform density `(1, 1)` and also reports a sample of the
//! curve.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::ClosedFormPia;
use crate::error::{invalid, FppError, Result};
use crate::mc::{estimate_pia, SimConfig, Start};
use crate::model::{DensitySpec, ExampleParams, Interval, ProcessSpec};
use crate::pide::SolutionField;
use crate::quadrature::QuadratureConfig;

/// Weight of the tie-breaking pull towards `(α, β) = (1, 1)`.
pub const TIE_BREAK_WEIGHT: f64 = 1e-8;
/// Ψ below which a deterministic provider counts as solved.
pub const PSI_SOLVED: f64 = 1e-16;
/// Ψ below which a Monte Carlo provider counts as solved.
pub const PSI_SOLVED_MC: f64 = 1e-6;
const SCAN: usize = 32;
const CURVE_SAMPLES: usize = 16;

/// Parametric density family searched by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Beta,
    ModifiedBeta { a: f64, b: f64 },
    /// No free parameters; solving reduces to checking the target.
    Uniform { a: f64, b: f64 },
}

impl Family {
    pub fn density(&self, alpha: f64, beta: f64) -> DensitySpec {
        match *self {
            Self::Beta => DensitySpec::Beta { alpha, beta },
            Self::ModifiedBeta { a, b } => DensitySpec::ModifiedBeta { alpha, beta, a, b },
            Self::Uniform { a, b } => DensitySpec::Uniform { a, b },
        }
    }

    pub fn has_parameters(&self) -> bool {
        !matches!(self, Self::Uniform { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::ModifiedBeta { .. } => "modbeta",
            Self::Uniform { .. } => "uniform",
        }
    }
}

/// Source of `π_a` used to evaluate `q`.
#[derive(Debug, Clone)]
pub enum Provider {
    ClosedForm { example: u8, pia: ClosedFormPia },
    Pide(SolutionField),
    /// Fixed seed, so every evaluation uses common random numbers.
    MonteCarlo { spec: ProcessSpec, cfg: SimConfig },
}

impl Provider {
    pub fn closed_form(example: u8, p: &ExampleParams) -> Result<Self> {
        Ok(Self::ClosedForm {
            example,
            pia: ClosedFormPia::for_example(example, p)?,
        })
    }

    pub fn interval(&self) -> Interval {
        match self {
            Self::ClosedForm { pia, .. } => pia.interval(),
            Self::Pide(f) => f.grid.interval,
            Self::MonteCarlo { spec, .. } => spec.interval,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Self::MonteCarlo { .. })
    }

    pub fn describe(&self) -> String {
        match self {
            Self::ClosedForm { example, .. } => format!("closed form, example {example}"),
            Self::Pide(f) => format!("pide, n = {}", f.grid.n),
            Self::MonteCarlo { cfg, .. } => {
                format!("monte carlo, {} paths, dt = {}, seed = {}", cfg.n_paths, cfg.dt, cfg.seed)
            }
        }
    }
}

fn check_support(g: &DensitySpec, iv: Interval) -> Result<()> {
    g.validate()?;
    let (lo, hi) = g.support();
    if lo < iv.a() || hi > iv.b() {
        return Err(invalid(format!(
            "density support [{lo}, {hi}] not inside [{}, {}]",
            iv.a(),
            iv.b()
        )));
    }
    Ok(())
}

/// `q = ∫ g π_a`.
///
/// Quadrature runs to absolute tolerance `1e-12` for the deterministic
/// providers; the Monte Carlo provider returns its point estimate and fails
/// when more than 1% of paths are censored.
pub fn forward_q(g: &DensitySpec, provider: &Provider) -> Result<f64> {
    check_support(g, provider.interval())?;
    let cfg = QuadratureConfig::with_abs_tol(1e-12);
    match provider {
        Provider::ClosedForm { pia, .. } => g.expectation(|x| pia.value(x), &pia.breakpoints(), cfg),
        Provider::Pide(field) => g.expectation(|x| field.value_at(x), &field.grid.interior(), cfg),
        Provider::MonteCarlo { spec, cfg } => {
            Ok(estimate_pia(spec, &Start::Density(g.clone()), cfg)?.checked()?.p_hat)
        }
    }
}

/// `Ψ(g) = (q − ∫ g π_a)²`.
pub fn psi(g: &DensitySpec, provider: &Provider, target_q: f64) -> Result<f64> {
    let q = forward_q(g, provider)?;
    Ok((target_q - q).powi(2))
}

#[derive(Debug, Clone)]
pub struct InverseProblem {
    pub target_q: f64,
    pub family: Family,
    pub provider: Provider,
    /// Box for both α and β.
    pub bounds: (f64, f64),
}

impl InverseProblem {
    pub fn new(target_q: f64, family: Family, provider: Provider) -> Result<Self> {
        let p = Self {
            target_q,
            family,
            provider,
            bounds: (0.05, 50.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_q > 0.0 && self.target_q < 1.0) {
            return Err(invalid(format!("target q must lie in (0, 1), got {}", self.target_q)));
        }
        let (lo, hi) = self.bounds;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid(format!("bad parameter bounds [{lo}, {hi}]")));
        }
        check_support(&self.family.density(1.0, 1.0), self.provider.interval())
    }

    fn q(&self, alpha: f64, beta: f64) -> Result<f64> {
        forward_q(&self.family.density(alpha, beta), &self.provider)
    }

    fn solved_threshold(&self) -> f64 {
        if self.provider.is_stochastic() {
            PSI_SOLVED_MC
        } else {
            PSI_SOLVED
        }
    }
}

fn tie_break(alpha: f64, beta: f64) -> f64 {
    TIE_BREAK_WEIGHT * ((alpha - 1.0).powi(2) + (beta - 1.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseSolution {
    pub family: Family,
    pub provider: String,
    pub target_q: f64,
    /// `(α, β)`; absent for the parameter-free uniform family.
    pub params: Option<(f64, f64)>,
    pub achieved_q: f64,
    pub psi: f64,
    /// Ψ plus the tie-break term.
    pub objective: f64,
    /// Range of `q` seen over the parameter box.
    pub q_range: (f64, f64),
    pub curve_samples: Vec<CurvePoint>,
    pub notes: Vec<String>,
}

impl InverseSolution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `β` with `q(α, β) = target` at fixed `α`, by bisection in `ln β`.
///
/// `q` is increasing in `β` whenever `π_a` is nonincreasing, which holds for
/// every exit probability; the bisection only needs a sign change across the
/// box, so `None` means the target is not bracketed at this `α`.
pub fn root_in_beta(problem: &InverseProblem, alpha: f64) -> Result<Option<f64>> {
    let (lo, hi) = (problem.bounds.0.ln(), problem.bounds.1.ln());
    let t = problem.target_q;
    let f = |lb: f64| problem.q(alpha, lb.exp()).map(|q| q - t);
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(Some(a.exp()));
    }
    if fb == 0.0 {
        return Ok(Some(b.exp()));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let mut best = (fa.abs(), a);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.abs() < best.0 {
            best = (fm.abs(), m);
        }
        if fm == 0.0 || b - a < 1e-15 {
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(best.1.exp()))
}

type Point = [f64; 2];

/// Nelder–Mead on a 2-D objective. Stops when the spread of simplex values
/// falls below `f_tol` and its diameter below `x_tol`, or after `max_iter`.
fn nelder_mead<F: FnMut(Point) -> Result<f64>>(
    mut f: F,
    start: Point,
    step: f64,
    f_tol: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<(Point, f64)> {
    let mut s: Vec<(Point, f64)> = Vec::with_capacity(3);
    for p in [start, [start[0] + step, start[1]], [start[0], start[1] + step]] {
        s.push((p, f(p)?));
    }
    let lerp = |p: Point, q: Point, t: f64| [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
    for _ in 0..max_iter {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diam = (1..3)
            .map(|i| (s[i].0[0] - s[0].0[0]).abs().max((s[i].0[1] - s[0].0[1]).abs()))
            .fold(0.0, f64::max);
        if s[2].1 - s[0].1 <= f_tol && diam <= x_tol {
            break;
        }
        let c = [(s[0].0[0] + s[1].0[0]) / 2.0, (s[0].0[1] + s[1].0[1]) / 2.0];
        let worst = s[2];
        let r = lerp(c, worst.0, -1.0);
        let fr = f(r)?;
        if fr < s[0].1 {
            let e = lerp(c, worst.0, -2.0);
            let fe = f(e)?;
            s[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < s[1].1 {
            s[2] = (r, fr);
        } else {
            let (k, fk) = if fr < worst.1 {
                let k = lerp(c, r, 0.5);
                (k, f(k)?)
            } else {
                let k = lerp(c, worst.0, 0.5);
                (k, f(k)?)
            };
            if fk < worst.1.min(fr) {
                s[2] = (k, fk);
            } else {
                for i in 1..3 {
                    let p = lerp(s[0].0, s[i].0, 0.5);
                    s[i] = (p, f(p)?);
                }
            }
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(s[0])
}

/// Golden-section minimum of `f` on `[a, b]`.
fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l + (h - l) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Minimizes Ψ over the family.
///
/// Stages: a 32×32 logarithmic scan, Nelder–Mead on `Ψ + 10⁻⁸·((α−1)² + (β−1)²)`
/// in log coordinates, then (deterministic providers) a projection onto the
/// constraint curve that minimizes the tie-break term exactly, and finally 16
/// samples of the curve.
pub fn solve_inverse(problem: &InverseProblem) -> Result<InverseSolution> {
    problem.validate()?;
    let t = problem.target_q;
    let mut notes = Vec::new();

    if !problem.family.has_parameters() {
        let q = problem.q(1.0, 1.0)?;
        let psi = (t - q).powi(2);
        if psi > problem.solved_threshold().max(PSI_SOLVED_MC) {
            return Err(FppError::Unreachable {
                target: t,
                best_q: q,
                q_min: q,
                q_max: q,
            });
        }
        notes.push("uniform family has no parameters; the target is only verified".into());
        return Ok(InverseSolution {
            family: problem.family,
            provider: problem.provider.describe(),
            target_q: t,
            params: None,
            achieved_q: q,
            psi,
            objective: psi,
            q_range: (q, q),
            curve_samples: Vec::new(),
            notes,
        });
    }

    let (lo, hi) = problem.bounds;
    let axis = log_space(lo, hi, SCAN);
    let cells: Vec<(f64, f64)> = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect();
    let scanned = cells
        .par_iter()
        .map(|&(a, b)| problem.q(a, b).map(|q| (a, b, q)))
        .collect::<Result<Vec<_>>>()?;
    let mut q_min = scanned.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let mut q_max = scanned.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let objective = |a: f64, b: f64, q: f64| (t - q).powi(2) + tie_break(a, b);
    let &(a0, b0, _) = scanned
        .iter()
        .min_by(|x, y| objective(x.0, x.1, x.2).total_cmp(&objective(y.0, y.1, y.2)))
        .unwrap();

    let (llo, lhi) = (lo.ln(), hi.ln());
    let clamp = |p: Point| [p[0].clamp(llo, lhi), p[1].clamp(llo, lhi)];
    let step = (lhi - llo) / (SCAN - 1) as f64;
    let (p, _) = nelder_mead(
        |p| {
            let [la, lb] = clamp(p);
            let (a, b) = (la.exp(), lb.exp());
            problem.q(a, b).map(|q| objective(a, b, q))
        },
        [a0.ln(), b0.ln()],
        step,
        1e-24,
        1e-10,
        4000,
    )?;
    let [la, lb] = clamp(p);
    let (mut alpha, mut beta) = (la.exp(), lb.exp());
    let mut q = problem.q(alpha, beta)?;
    q_min = q_min.min(q);
    q_max = q_max.max(q);

    if !problem.provider.is_stochastic() {
        // walk along the constraint curve to the exact tie-break minimizer
        let pull = |la: f64| -> Result<f64> {
            Ok(match root_in_beta(problem, la.exp())? {
                Some(b) => tie_break(la.exp(), b),
                None => f64::INFINITY,
            })
        };
        if let Some(b) = root_in_beta(problem, alpha)? {
            let (wa, wb) = ((alpha.ln() - 4.0 * step).max(llo), (alpha.ln() + 4.0 * step).min(lhi));
            let la = golden(pull, wa, wb, 1e-12)?;
            let (a_star, b_star) = match root_in_beta(problem, la.exp())? {
                Some(bs) => (la.exp(), bs),
                None => (alpha, b),
            };
            let q_star = problem.q(a_star, b_star)?;
            if (t - q_star).abs() <= (t - q).abs() || (t - q_star).abs() <= 1e-12 {
                alpha = a_star;
                beta = b_star;
                q = q_star;
            }
            notes.push("refined onto the constraint curve by root-finding in β".into());
        }
    }

    let psi = (t - q).powi(2);
    if psi > problem.solved_threshold() {
        let best_q = if t > q_max {
            q_max
        } else if t < q_min {
            q_min
        } else {
            q
        };
        return Err(FppError::Unreachable {
            target: t,
            best_q,
            q_min,
            q_max,
        });
    }

    let mut curve_samples = Vec::new();
    if !problem.provider.is_stochastic() {
        let candidates = log_space(lo, hi, 4 * CURVE_SAMPLES);
        let roots = candidates
            .par_iter()
            .map(|&a| Ok(root_in_beta(problem, a)?.map(|b| (a, b))))
            .collect::<Result<Vec<_>>>()?;
        let feasible: Vec<(f64, f64)> = roots.into_iter().flatten().collect();
        let picks: Vec<(f64, f64)> = if feasible.len() <= CURVE_SAMPLES {
            feasible
        } else {
            (0..CURVE_SAMPLES)
                .map(|i| feasible[i * (feasible.len() - 1) / (CURVE_SAMPLES - 1)])
                .collect()
        };
        for (a, b) in picks {
            let qa = problem.q(a, b)?;
            if (t - qa).powi(2) <= PSI_SOLVED {
                curve_samples.push(CurvePoint { alpha: a, beta: b, q: qa });
            }
        }
        if curve_samples.len() > 1 {
            notes.push(format!(
                "minimizer is not isolated: {} other parameter pairs reach the target",
                curve_samples.len()
            ));
        }
    } else {
        notes.push("Monte Carlo provider: Ψ is limited by sampling error".into());
    }
    notes.push(format!("tie-break weight {TIE_BREAK_WEIGHT:e} towards (1, 1)"));

    Ok(InverseSolution {
        family: problem.family,
        provider: problem.provider.describe(),
        target_q: t,
        params: Some((alpha, beta)),
        achieved_q: q,
        psi,
        objective: psi + tie_break(alpha, beta),
        q_range: (q_min, q_max),
        curve_samples,
        notes,
    })
}
