use serde::{Deserialize, Serialize};

use crate::closed_forms::log_beta;
use crate::error::{invalid, FppError, Result};
use crate::quadrature::{breakpoints_within, integrate_pieces, QuadratureConfig};

/// Initial-position density `g` of the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensitySpec {
    /// Beta(α, β) on `(0, 1)`.
    Beta { alpha: f64, beta: f64 },
    /// Beta(α, β) rescaled affinely onto `(a, b)`.
    ModifiedBeta { alpha: f64, beta: f64, a: f64, b: f64 },
    Uniform { a: f64, b: f64 },
    Tabulated(TabulatedDensity),
}

/// Piecewise-linear density through `(x, g)` nodes, zero outside `[x₀, xₙ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRepr")]
pub struct TabulatedDensity {
    xs: Vec<f64>,
    gs: Vec<f64>,
}

#[derive(Deserialize)]
struct TabulatedRepr {
    xs: Vec<f64>,
    gs: Vec<f64>,
}

impl TryFrom<TabulatedRepr> for TabulatedDensity {
    type Error = FppError;
    fn try_from(r: TabulatedRepr) -> Result<Self> {
        TabulatedDensity::new(r.xs, r.gs)
    }
}

impl TabulatedDensity {
    /// Builds the table, renormalizing when the trapezoid mass is off by
    /// less than 1e-3 and rejecting it when the error is larger.
    pub fn new(xs: Vec<f64>, mut gs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != gs.len() {
            return Err(invalid("tabulated density needs >= 2 nodes and matching lengths"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(invalid("tabulated density nodes must be finite and strictly increasing"));
        }
        if gs.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("tabulated density values must be finite and nonnegative"));
        }
        let mass: f64 = xs
            .windows(2)
            .zip(gs.windows(2))
            .map(|(x, g)| 0.5 * (x[1] - x[0]) * (g[0] + g[1]))
            .sum();
        let dev = (mass - 1.0).abs();
        if dev >= 1e-3 {
            return Err(invalid(format!("tabulated density integrates to {mass}, not 1")));
        }
        if dev > 1e-10 {
            gs.iter_mut().for_each(|g| *g /= mass);
        }
        Ok(Self { xs, gs })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.gs
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let j = match self.xs.partition_point(|&p| p <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let t = (x - self.xs[j]) / (self.xs[j + 1] - self.xs[j]);
        self.gs[j] + t * (self.gs[j + 1] - self.gs[j])
    }

    /// Inverse CDF of the piecewise-linear density.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for (x, g) in self.xs.windows(2).zip(self.gs.windows(2)) {
            let w = x[1] - x[0];
            let cell = 0.5 * w * (g[0] + g[1]);
            if acc + cell >= p && cell > 0.0 {
                // solve g0·s + (g1 − g0)s²/(2w) = p − acc for s ∈ [0, w]
                let r = p - acc;
                let slope = (g[1] - g[0]) / w;
                let s = if slope.abs() < 1e-300 {
                    r / g[0]
                } else {
                    let disc = (g[0] * g[0] + 2.0 * slope * r).max(0.0);
                    2.0 * r / (g[0] + disc.sqrt())
                };
                return (x[0] + s).clamp(x[0], x[1]);
            }
            acc += cell;
        }
        *self.xs.last().unwrap()
    }
}

impl DensitySpec {
    pub fn uniform(a: f64, b: f64) -> Self {
        Self::Uniform { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            Self::Beta { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            Self::ModifiedBeta { alpha, beta, a, b } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                crate::model::Interval::new(a, b).map(|_| ())
            }
            Self::Uniform { a, b } => crate::model::Interval::new(a, b).map(|_| ()),
            Self::Tabulated(_) => Ok(()),
        }
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Beta { .. } => (0.0, 1.0),
            Self::ModifiedBeta { a, b, .. } | Self::Uniform { a, b } => (*a, *b),
            Self::Tabulated(t) => (t.xs[0], *t.xs.last().unwrap()),
        }
    }

    /// `(α, β, lo, hi)` when the density is an affine Beta.
    pub fn beta_shape(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            Self::Beta { alpha, beta } => Some((alpha, beta, 0.0, 1.0)),
            Self::ModifiedBeta { alpha, beta, a, b } => Some((alpha, beta, a, b)),
            Self::Uniform { a, b } => Some((1.0, 1.0, a, b)),
            Self::Tabulated(_) => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Self::Tabulated(t) => t.pdf(x),
            _ => {
                let (alpha, beta, lo, hi) = self.beta_shape().unwrap();
                if !(x > lo && x < hi) {
                    return 0.0;
                }
                if alpha == 1.0 && beta == 1.0 {
                    return 1.0 / (hi - lo);
                }
                let u = (x - lo) / (hi - lo);
                let ln = (alpha - 1.0) * u.ln() + (beta - 1.0) * (-u).ln_1p() - log_beta(alpha, beta);
                ln.exp() / (hi - lo)
            }
        }
    }

    /// `∫ g(x) f(x) dx` over the support.
    ///
    /// `breakpoints` mark kinks of `f`. Integrable endpoint singularities of
    /// Beta shapes with α < 1 or β < 1 are removed by the substitution
    /// `u = t^{1/α}` (resp. `1 − u = s^{1/β}`) before quadrature.
    pub fn expectation<F: Fn(f64) -> f64>(
        &self,
        f: F,
        breakpoints: &[f64],
        cfg: QuadratureConfig,
    ) -> Result<f64> {
        match self {
            Self::Tabulated(t) => {
                let mut extra = t.xs.clone();
                extra.extend_from_slice(breakpoints);
                let (lo, hi) = self.support();
                let pts = breakpoints_within(lo, hi, &extra);
                integrate_pieces(|x| t.pdf(x) * f(x), &pts, cfg)
            }
            _ => {
                let (alpha, beta, lo, hi) = self.beta_shape().unwrap();
                let w = hi - lo;
                // normalize inside the integrand so the absolute tolerance applies to g itself
                let lb = log_beta(alpha, beta);
                let mut u_pts: Vec<f64> = breakpoints.iter().map(|&p| (p - lo) / w).collect();
                u_pts.push(0.5);
                let u_pts = breakpoints_within(0.0, 1.0, &u_pts);
                let x_of = |u: f64| lo + w * u;
                let mut total = 0.0;
                for piece in u_pts.windows(2) {
                    let (u0, u1) = (piece[0], piece[1]);
                    let part = if u0 == 0.0 && alpha < 1.0 {
                        let top = u1.powf(alpha);
                        integrate_pieces(
                            |t| {
                                let u = t.powf(1.0 / alpha);
                                ((beta - 1.0) * (-u).ln_1p() - lb).exp() / alpha * f(x_of(u))
                            },
                            &[0.0, top],
                            cfg,
                        )?
                    } else if u1 == 1.0 && beta < 1.0 {
                        let top = (1.0 - u0).powf(beta);
                        integrate_pieces(
                            |s| {
                                let v = s.powf(1.0 / beta);
                                let u = 1.0 - v;
                                ((alpha - 1.0) * u.ln() - lb).exp() / beta * f(x_of(u))
                            },
                            &[0.0, top],
                            cfg,
                        )?
                    } else {
                        integrate_pieces(
                            |u| {
                                let k = (alpha - 1.0) * u.ln() + (beta - 1.0) * (-u).ln_1p() - lb;
                                k.exp() * f(x_of(u))
                            },
                            &[u0, u1],
                            cfg,
                        )?
                    };
                    total += part;
                }
                Ok(total)
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        match self.beta_shape() {
            Some((alpha, beta, lo, hi)) => Ok(crate::closed_forms::modified_beta_mean(alpha, beta, lo, hi)?),
            None => self.expectation(|x| x, &[], QuadratureConfig::default()),
        }
    }
}

/// `g(x)`, zero outside the support.
pub fn density_pdf(g: &DensitySpec, x: f64) -> f64 {
    g.pdf(x)
}
