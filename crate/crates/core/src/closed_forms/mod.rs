//! Closed-form exit probabilities and target values `q` of the worked
//! examples, plus the special functions they need.

mod example7;
mod special;

pub use example7::{example7_constants, Example7Constants, Jet};
pub(crate) use special::log_beta;
pub use special::{beta_function, beta_moment, beta_mgf, log_gamma, modified_beta_mean};

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use serde::Serialize;

use crate::error::{FppError, Result};
use crate::model::{DensitySpec, ExampleParams, Interval};

/// How a closed form is evaluated outside `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Evaluation {
    /// 1 at or left of `a`, 0 at or right of `b`.
    #[default]
    Outer,
    /// The formula itself, wherever it is defined.
    Analytic,
}

/// Closed-form left-exit probability of a worked example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClosedFormPia {
    /// `(b − x)/(b − a)`, Examples 1 and 4.
    Linear { interval: Interval },
    /// `1 − x^γ` on `(0, 1)`, Examples 2 and 3.
    PowerComplement { gamma: f64 },
    /// `2 − 2^x` on `(0, 1)`, Example 5.
    ExpComplement,
    /// `cos(πx/2)` on `(0, 1)`, Example 6.
    Cosine,
    /// Piecewise exponential on `(0, 2ε)`, Example 7.
    Example7(Example7Constants),
}

impl ClosedFormPia {
    pub fn for_example(id: u8, p: &ExampleParams) -> Result<Self> {
        // build_example validates every parameter the closed form relies on
        crate::model::build_example(id, p)?;
        Ok(match id {
            1 | 4 => Self::Linear {
                interval: Interval::new(p.a, p.b)?,
            },
            2 | 3 => Self::PowerComplement { gamma: p.gamma },
            5 => Self::ExpComplement,
            6 => Self::Cosine,
            7 => Self::Example7(example7_constants(p.epsilon)?),
            other => return Err(FppError::UnknownExample(other)),
        })
    }

    pub fn interval(&self) -> Interval {
        match self {
            Self::Linear { interval } => *interval,
            Self::Example7(k) => Interval::new(0.0, 2.0 * k.epsilon).expect("epsilon > 0"),
            _ => Interval::unit(),
        }
    }

    /// The formula and its first two derivatives, ignoring outer values.
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            Self::Linear { interval } => {
                let w = interval.length();
                Jet {
                    value: (interval.b() - x) / w,
                    d1: -1.0 / w,
                    d2: 0.0,
                }
            }
            Self::PowerComplement { gamma } => {
                let g = *gamma;
                Jet {
                    value: 1.0 - x.powf(g),
                    d1: -g * x.powf(g - 1.0),
                    d2: -g * (g - 1.0) * x.powf(g - 2.0),
                }
            }
            Self::ExpComplement => {
                let p = x.exp2();
                Jet {
                    value: 2.0 - p,
                    d1: -LN_2 * p,
                    d2: -LN_2 * LN_2 * p,
                }
            }
            Self::Cosine => {
                let w = FRAC_PI_2;
                Jet {
                    value: (w * x).cos(),
                    d1: -w * (w * x).sin(),
                    d2: -w * w * (w * x).cos(),
                }
            }
            Self::Example7(k) => k.jet(x),
        }
    }

    pub fn analytic(&self, x: f64) -> f64 {
        self.jet(x).value
    }

    pub fn evaluate(&self, x: f64, mode: Evaluation) -> f64 {
        let iv = self.interval();
        match mode {
            Evaluation::Outer if x <= iv.a() => 1.0,
            Evaluation::Outer if x >= iv.b() => 0.0,
            _ => self.analytic(x),
        }
    }

    /// `π_a(x)` with outer values.
    pub fn value(&self, x: f64) -> f64 {
        self.evaluate(x, Evaluation::Outer)
    }

    /// Interior points where the formula is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Example7(k) => vec![k.epsilon],
            _ => Vec::new(),
        }
    }
}

/// `π_a(x)` of worked example `id` with outer values.
pub fn pia_closed(id: u8, p: &ExampleParams, x: f64) -> Result<f64> {
    Ok(ClosedFormPia::for_example(id, p)?.value(x))
}

fn same(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()))
}

/// `(α, β)` when `g` is an affine Beta living exactly on `(lo, hi)`.
fn beta_on(g: &DensitySpec, lo: f64, hi: f64) -> Option<(f64, f64)> {
    g.beta_shape()
        .filter(|&(_, _, a, b)| same(a, lo) && same(b, hi))
        .map(|(alpha, beta, _, _)| (alpha, beta))
}

/// Closed-form `q` for a worked example paired with its density family.
///
/// Example 7 has no trustworthy closed expression for `q`, so its value comes
/// from [`Example7Constants::q_quadrature`]. The printed expression is still
/// available as [`Example7Constants::q_transcribed`].
pub fn q_closed(id: u8, p: &ExampleParams, g: &DensitySpec) -> Result<f64> {
    g.validate()?;
    let pia = ClosedFormPia::for_example(id, p)?;
    let iv = pia.interval();
    let Some((alpha, beta)) = beta_on(g, iv.a(), iv.b()) else {
        return Err(FppError::Unsupported(format!(
            "example {id} has no closed-form q for density {g:?}"
        )));
    };
    match id {
        1 | 4 => Ok(beta / (alpha + beta)),
        2 | 3 => Ok(1.0 - beta_moment(alpha, beta, p.gamma)?),
        5 => Ok(2.0 - beta_mgf(alpha, beta, LN_2)?),
        6 if alpha == 1.0 && beta == 1.0 => Ok(2.0 / PI),
        7 if alpha == 1.0 && beta == 1.0 => example7_constants(p.epsilon)?.q_quadrature(),
        _ => Err(FppError::Unsupported(format!(
            "example {id} pairs only with the uniform density"
        ))),
    }
}
