//! The seven worked examples as buildable process specifications.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::{CoefficientField, Interval, JumpKernel, JumpStream, ProcessSpec};
use crate::error::{invalid, FppError, Result};

pub const EXAMPLE_IDS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

/// Which of the two fixed-jump constructions Example 4 uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example4Variant {
    /// Jumps `+ε̄` at rate λ₁ and `−δ̄` at rate λ₂, drift `δ̄λ₂ − ε̄λ₁`.
    #[default]
    TwoSided,
    /// Only upward jumps of amplitude `ε̄`, drift `−ε̄λ₁`.
    ///
    /// The printed process adds `N₁(t)` with no `ε̄` factor, yet its exit
    /// equation evaluates `v(x + ε̄)`; the amplitude is taken as `ε̄`.
    UpOnly,
}

/// Parameters for [`build_example`]. Fields an example does not use are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleParams {
    /// Interval for Examples 1 and 4 (the others fix their own).
    pub a: f64,
    pub b: f64,
    /// Power exponent of Examples 2 and 3.
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_bar: f64,
    pub delta_bar: f64,
    /// Half-width of Example 7's interval `(0, 2ε)`.
    pub epsilon: f64,
    /// Free diffusion coefficient of Examples 1 and 4.
    pub diffusion: CoefficientField,
    pub variant: Example4Variant,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            gamma: 2.0,
            lambda1: 1.0,
            lambda2: 1.0,
            alpha1: 0.5,
            alpha2: 0.5,
            eps_bar: 0.1,
            delta_bar: 0.1,
            epsilon: 0.5,
            diffusion: CoefficientField::constant(1.0),
            variant: Example4Variant::TwoSided,
        }
    }
}

impl ExampleParams {
    fn check_rates(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn check_proportional(&self) -> Result<()> {
        self.check_rates()?;
        JumpKernel::UniformProportionalUp { alpha1: self.alpha1 }.validate()?;
        JumpKernel::UniformProportionalDown { alpha2: self.alpha2 }.validate()
    }

    fn check_gamma(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("gamma must be > 0, got {}", self.gamma)))
        }
    }

    fn check_fixed(&self) -> Result<()> {
        self.check_rates()?;
        JumpKernel::FixedUp { eps_bar: self.eps_bar }.validate()?;
        JumpKernel::FixedDown {
            delta_bar: self.delta_bar,
        }
        .validate()
    }

    fn proportional_streams(&self) -> Result<(JumpStream, JumpStream)> {
        Ok((
            JumpStream::new(self.lambda1, JumpKernel::UniformProportionalUp { alpha1: self.alpha1 })?,
            JumpStream::new(
                self.lambda2,
                JumpKernel::UniformProportionalDown { alpha2: self.alpha2 },
            )?,
        ))
    }
}

/// Drift constants `(A, B)` of the linear drift `Ax + B` that makes
/// `1 − x^γ` solve the exit problem with proportional uniform jumps and
/// `σ² = x`.
pub fn example2_drift(p: &ExampleParams) -> (f64, f64) {
    let g = p.gamma;
    let up = p.lambda1 / p.alpha1 * (1.0 - (1.0 + p.alpha1).powf(g + 1.0));
    let down = p.lambda2 / p.alpha2 * ((1.0 - p.alpha2).powf(g + 1.0) - 1.0);
    let a = (p.lambda1 + p.lambda2 + (up + down) / (g + 1.0)) / g;
    let b = -0.5 * (g - 1.0);
    (a, b)
}

/// Slope `A' = ½(γ − 1) + A` used with `σ² = x(1 − x)`.
pub fn example3_slope(p: &ExampleParams) -> f64 {
    0.5 * (p.gamma - 1.0) + example2_drift(p).0
}

/// `(slope, intercept)` of the linear drift under which `2 − 2^x` solves
/// the exit problem with fixed jumps and `σ² = x`.
pub fn example5_drift(p: &ExampleParams) -> (f64, f64) {
    let slope = -0.5 * LN_2;
    let intercept =
        (-p.lambda1 * (p.eps_bar.exp2() - 1.0) + p.lambda2 * (1.0 - (-p.delta_bar).exp2())) / LN_2;
    (slope, intercept)
}

/// Builds the process of worked example `id`.
pub fn build_example(id: u8, p: &ExampleParams) -> Result<ProcessSpec> {
    match id {
        1 => {
            p.check_proportional()?;
            let (up, down) = p.proportional_streams()?;
            let slope = 0.5 * (p.lambda2 * p.alpha2 - p.lambda1 * p.alpha1);
            ProcessSpec::new(
                CoefficientField::linear(slope, 0.0),
                p.diffusion.clone(),
                up,
                down,
                Interval::new(p.a, p.b)?,
            )
        }
        2 | 3 => {
            p.check_proportional()?;
            p.check_gamma()?;
            let (up, down) = p.proportional_streams()?;
            let (a_const, b_const) = example2_drift(p);
            let (slope, diffusion) = if id == 2 {
                (a_const, CoefficientField::SqrtPositive)
            } else {
                (example3_slope(p), CoefficientField::SqrtLogistic)
            };
            ProcessSpec::new(
                CoefficientField::linear(slope, b_const),
                diffusion,
                up,
                down,
                Interval::unit(),
            )
        }
        4 => {
            p.check_fixed()?;
            let up = JumpStream::new(p.lambda1, JumpKernel::FixedUp { eps_bar: p.eps_bar })?;
            let (drift, down) = match p.variant {
                Example4Variant::TwoSided => (
                    p.delta_bar * p.lambda2 - p.eps_bar * p.lambda1,
                    JumpStream::new(
                        p.lambda2,
                        JumpKernel::FixedDown {
                            delta_bar: p.delta_bar,
                        },
                    )?,
                ),
                Example4Variant::UpOnly => (-p.eps_bar * p.lambda1, JumpStream::none()),
            };
            ProcessSpec::new(
                CoefficientField::constant(drift),
                p.diffusion.clone(),
                up,
                down,
                Interval::new(p.a, p.b)?,
            )
        }
        5 => {
            p.check_fixed()?;
            let (slope, intercept) = example5_drift(p);
            ProcessSpec::new(
                CoefficientField::linear(slope, intercept),
                CoefficientField::SqrtPositive,
                JumpStream::new(p.lambda1, JumpKernel::FixedUp { eps_bar: p.eps_bar })?,
                JumpStream::new(
                    p.lambda2,
                    JumpKernel::FixedDown {
                        delta_bar: p.delta_bar,
                    },
                )?,
                Interval::unit(),
            )
        }
        6 => {
            p.check_rates()?;
            ProcessSpec::new(
                CoefficientField::Cosine {
                    amplitude: -PI / 4.0,
                    frequency: PI / 2.0,
                },
                CoefficientField::SqrtSine { frequency: PI / 2.0 },
                JumpStream::new(p.lambda1, JumpKernel::FixedUp { eps_bar: 4.0 })?,
                JumpStream::none(),
                Interval::unit(),
            )
        }
        7 => {
            if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
                return Err(invalid(format!("epsilon must be > 0, got {}", p.epsilon)));
            }
            ProcessSpec::new(
                CoefficientField::zero(),
                CoefficientField::constant(1.0),
                JumpStream::new(1.0, JumpKernel::FixedUp { eps_bar: p.epsilon })?,
                JumpStream::none(),
                Interval::new(0.0, 2.0 * p.epsilon)?,
            )
        }
        other => Err(FppError::UnknownExample(other)),
    }
}

/// Human-readable summary of one worked example.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: u8,
    pub title: &'static str,
    pub interval: &'static str,
    pub drift: &'static str,
    pub diffusion: &'static str,
    pub jumps: &'static str,
    pub exit_probability: &'static str,
    pub density: &'static str,
    pub q: &'static str,
}

pub fn catalog_entry(id: u8) -> Result<CatalogEntry> {
    let e = match id {
        1 => CatalogEntry {
            id,
            title: "proportional uniform jumps, martingale drift",
            interval: "(a, b), a >= 0",
            drift: "μ(x) = ½(λ₂α₂ − λ₁α₁)x",
            diffusion: "any σ(x)",
            jumps: "up U(0, α₁x) at rate λ₁; down U(−α₂x, 0) at rate λ₂, 0 < α₂ <= 1",
            exit_probability: "π_a(x) = (b − x)/(b − a)",
            density: "modified Beta(α, β) on (a, b)",
            q: "q = β/(α + β)",
        },
        2 => CatalogEntry {
            id,
            title: "power exit probability, CIR-type diffusion",
            interval: "(0, 1)",
            drift: "μ(x) = Ax + B, A = (1/γ)[λ₁ + λ₂ + (λ₁/α₁(1 − (1+α₁)^(γ+1)) + λ₂/α₂((1−α₂)^(γ+1) − 1))/(γ+1)], B = −½(γ − 1)",
            diffusion: "σ(x) = √(x ∨ 0)",
            jumps: "as in example 1",
            exit_probability: "π₀(x) = 1 − x^γ",
            density: "Beta(α, β)",
            q: "q = 1 − Γ(α+γ)Γ(α+β)/(Γ(α)Γ(α+β+γ)); γ = 2: β(β+2α+1)/((α+β)(α+β+1))",
        },
        3 => CatalogEntry {
            id,
            title: "power exit probability, Wright–Fisher-type diffusion",
            interval: "(0, 1)",
            drift: "μ(x) = A'x + B, A' = ½(γ − 1) + A, A and B as in example 2",
            diffusion: "σ(x) = √(x(1 − x) ∨ 0)",
            jumps: "as in example 1",
            exit_probability: "π₀(x) = 1 − x^γ",
            density: "Beta(α, β)",
            q: "as in example 2",
        },
        4 => CatalogEntry {
            id,
            title: "fixed-size jumps, compensated drift",
            interval: "(a, b)",
            drift: "μ = δ̄λ₂ − ε̄λ₁ (up-only variant: −ε̄λ₁)",
            diffusion: "any σ(x)",
            jumps: "+ε̄ at rate λ₁, −δ̄ at rate λ₂ (up-only variant: +ε̄ at rate λ₁)",
            exit_probability: "π_a(x) = (b − x)/(b − a)",
            density: "modified Beta(α, β) on (a, b)",
            q: "q = β/(α + β)",
        },
        5 => CatalogEntry {
            id,
            title: "exponential exit probability",
            interval: "(0, 1)",
            drift: "μ(x) = (1/ln 2)[−(ln 2)² x/2 − λ₁(2^ε̄ − 1) + λ₂(1 − 2^(−δ̄))]",
            diffusion: "σ(x) = √x",
            jumps: "+ε̄ at rate λ₁, −δ̄ at rate λ₂",
            exit_probability: "π₀(x) = 2 − 2^x",
            density: "Beta(α, β)",
            q: "q = 2 − Σ_k (ln 2)^k/k! · B(α+k, β)/B(α, β)",
        },
        6 => CatalogEntry {
            id,
            title: "trigonometric exit probability, exit-forcing jumps",
            interval: "(0, 1)",
            drift: "μ(x) = −(π/4)cos(πx/2)",
            diffusion: "σ(x) = √(sin(πx/2))",
            jumps: "+4 at rate λ₁",
            exit_probability: "π₀(x) = cos(πx/2)",
            density: "uniform on (0, 1)",
            q: "q = 2/π",
        },
        7 => CatalogEntry {
            id,
            title: "Brownian motion with jumps of half the interval width",
            interval: "(0, 2ε)",
            drift: "μ = 0",
            diffusion: "σ = 1",
            jumps: "+ε at rate 1",
            exit_probability: "π₀(x) = e^(−x√2)(A + a x) + e^(x√2)(B + b x) on (0, ε); c(e^(−x√2) − e^(−4ε√2 + x√2)) on [ε, 2ε)",
            density: "uniform on (0, 2ε)",
            q: "q = (1/2ε)∫ π₀ (three-line closed expression also reported)",
        },
        other => return Err(FppError::UnknownExample(other)),
    };
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example7_spec() {
        let p = ExampleParams {
            epsilon: 0.5,
            ..ExampleParams::default()
        };
        let s = build_example(7, &p).unwrap();
        assert_eq!(s.drift(0.3), 0.0);
        assert_eq!(s.variance(0.3), 1.0);
        assert_eq!(s.up_jumps.rate, 1.0);
        assert_eq!(s.up_jumps.kernel, Some(JumpKernel::FixedUp { eps_bar: 0.5 }));
        assert!(s.down_jumps.active().is_none());
        assert_eq!((s.interval.a(), s.interval.b()), (0.0, 1.0));
    }

    #[test]
    fn example1_without_jumps_is_driftless() {
        let p = ExampleParams {
            lambda1: 0.0,
            lambda2: 0.0,
            ..ExampleParams::default()
        };
        let s = build_example(1, &p).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(s.drift(x), 0.0);
        }
        assert!(!s.has_jumps());
    }

    #[test]
    fn example2_at_gamma_one_reduces_to_example1_drift() {
        let p = ExampleParams {
            gamma: 1.0,
            lambda1: 1.3,
            lambda2: 0.7,
            alpha1: 0.9,
            alpha2: 0.35,
            ..ExampleParams::default()
        };
        let (a, b) = example2_drift(&p);
        assert!((a - 0.5 * (0.7 * 0.35 - 1.3 * 0.9)).abs() < 1e-14);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn example3_slope_shift() {
        let p = ExampleParams {
            gamma: 3.0,
            ..ExampleParams::default()
        };
        assert!((example3_slope(&p) - example2_drift(&p).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_violated_constraint() {
        let p = ExampleParams {
            alpha2: 1.5,
            ..ExampleParams::default()
        };
        let e = build_example(1, &p).unwrap_err().to_string();
        assert!(e.contains("alpha2"), "{e}");
        let p = ExampleParams {
            epsilon: -1.0,
            ..ExampleParams::default()
        };
        assert!(build_example(7, &p).unwrap_err().to_string().contains("epsilon"));
        assert!(matches!(
            build_example(8, &ExampleParams::default()),
            Err(FppError::UnknownExample(8))
        ));
        let p = ExampleParams {
            gamma: 0.0,
            ..ExampleParams::default()
        };
        assert!(build_example(2, &p).unwrap_err().to_string().contains("gamma"));
    }

    #[test]
    fn example4_variants() {
        let p = ExampleParams {
            eps_bar: 0.2,
            delta_bar: 0.3,
            lambda1: 2.0,
            lambda2: 1.0,
            ..ExampleParams::default()
        };
        let s = build_example(4, &p).unwrap();
        assert!((s.drift(0.5) - (0.3 - 0.4)).abs() < 1e-15);
        let up_only = ExampleParams {
            variant: Example4Variant::UpOnly,
            ..p
        };
        let s = build_example(4, &up_only).unwrap();
        assert!((s.drift(0.5) + 0.4).abs() < 1e-15);
        assert!(s.down_jumps.active().is_none());
        assert_eq!(s.up_jumps.kernel, Some(JumpKernel::FixedUp { eps_bar: 0.2 }));
    }

    #[test]
    fn every_entry_in_catalog() {
        for id in EXAMPLE_IDS {
            assert_eq!(catalog_entry(id).unwrap().id, id);
            build_example(id, &ExampleParams::default()).unwrap();
        }
        assert!(catalog_entry(0).is_err());
    }
}
