//! Domain types: intervals, coefficient fields, jump kernels, process specs,
//! initial-position densities and the catalog of worked examples.

mod catalog;
mod density;

pub use catalog::{
    build_example, catalog_entry, example2_drift, example3_slope, example5_drift, CatalogEntry,
    Example4Variant, ExampleParams, EXAMPLE_IDS,
};
pub use density::{density_pdf, DensitySpec, TabulatedDensity};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FppError, Result};

/// Open interval `(a, b)` whose exit is being studied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr")]
pub struct Interval {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct IntervalRepr {
    a: f64,
    b: f64,
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = FppError;
    fn try_from(r: IntervalRepr) -> Result<Self> {
        Interval::new(r.a, r.b)
    }
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid(format!("interval endpoints must be finite, got ({a}, {b})")));
        }
        if a >= b {
            return Err(invalid(format!("interval requires a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// `n` equispaced points strictly inside the interval.
    pub fn interior_nodes(&self, n: usize) -> Vec<f64> {
        let h = self.length() / (n as f64 + 1.0);
        (1..=n).map(|i| self.a + i as f64 * h).collect()
    }
}

/// A user-supplied coefficient that cannot be serialized.
#[derive(Clone)]
pub struct CustomField {
    pub label: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomField").field("label", &self.label).finish()
    }
}

/// Drift `μ(x)` or diffusion `σ(x)` with a symbolic tag.
///
/// The square-root variants evaluate their radicand clamped at zero, so
/// [`CoefficientField::square`] of a diffusion is exactly `radicand ∨ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoefficientField {
    Constant { value: f64 },
    Linear { slope: f64, intercept: f64 },
    /// `√(x ∨ 0)`
    SqrtPositive,
    /// `√(x(1 − x) ∨ 0)`
    SqrtLogistic,
    /// `c·x`
    Proportional { scale: f64 },
    /// `amplitude · cos(frequency · x)`
    Cosine { amplitude: f64, frequency: f64 },
    /// `√(sin(frequency · x) ∨ 0)`
    SqrtSine { frequency: f64 },
    #[serde(skip)]
    Custom(CustomField),
}

impl CoefficientField {
    pub fn zero() -> Self {
        Self::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn linear(slope: f64, intercept: f64) -> Self {
        Self::Linear { slope, intercept }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(CustomField {
            label: label.into(),
            f: Arc::new(f),
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Linear { slope, intercept } => slope * x + intercept,
            Self::SqrtPositive => x.max(0.0).sqrt(),
            Self::SqrtLogistic => (x * (1.0 - x)).max(0.0).sqrt(),
            Self::Proportional { scale } => scale * x,
            Self::Cosine {
                amplitude,
                frequency,
            } => amplitude * (frequency * x).cos(),
            Self::SqrtSine { frequency } => (frequency * x).sin().max(0.0).sqrt(),
            Self::Custom(c) => (c.f)(x),
        }
    }

    /// The squared value; for diffusions this is `σ²(x)`.
    pub fn square(&self, x: f64) -> f64 {
        match self {
            Self::SqrtPositive => x.max(0.0),
            Self::SqrtLogistic => (x * (1.0 - x)).max(0.0),
            Self::SqrtSine { frequency } => (frequency * x).sin().max(0.0),
            _ => {
                let v = self.value(x);
                v * v
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Constant { value } => format!("{value}"),
            Self::Linear { slope, intercept } => format!("{slope}·x + {intercept}"),
            Self::SqrtPositive => "√(x ∨ 0)".into(),
            Self::SqrtLogistic => "√(x(1−x) ∨ 0)".into(),
            Self::Proportional { scale } => format!("{scale}·x"),
            Self::Cosine {
                amplitude,
                frequency,
            } => format!("{amplitude}·cos({frequency}·x)"),
            Self::SqrtSine { frequency } => format!("√(sin({frequency}·x) ∨ 0)"),
            Self::Custom(c) => c.label.clone(),
        }
    }
}

/// Distribution of a single jump, possibly depending on the pre-jump state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpKernel {
    /// Uniform on `(0, α₁ξ)` at state `ξ`.
    UniformProportionalUp { alpha1: f64 },
    /// Uniform on `(−α₂ξ, 0)` at state `ξ`.
    UniformProportionalDown { alpha2: f64 },
    /// Point mass at `+ε̄`.
    FixedUp { eps_bar: f64 },
    /// Point mass at `−δ̄`.
    FixedDown { delta_bar: f64 },
}

impl JumpKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::UniformProportionalUp { alpha1 } if !(alpha1 > 0.0 && alpha1.is_finite()) => {
                Err(invalid(format!("alpha1 must be > 0, got {alpha1}")))
            }
            Self::UniformProportionalDown { alpha2 } if !(alpha2 > 0.0 && alpha2 <= 1.0) => {
                Err(invalid(format!("alpha2 must lie in (0, 1], got {alpha2}")))
            }
            Self::FixedUp { eps_bar } if !(eps_bar > 0.0 && eps_bar.is_finite()) => {
                Err(invalid(format!("eps_bar must be > 0, got {eps_bar}")))
            }
            Self::FixedDown { delta_bar } if !(delta_bar > 0.0 && delta_bar.is_finite()) => {
                Err(invalid(format!("delta_bar must be > 0, got {delta_bar}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_upward(&self) -> bool {
        matches!(self, Self::UniformProportionalUp { .. } | Self::FixedUp { .. })
    }

    pub fn is_proportional(&self) -> bool {
        matches!(
            self,
            Self::UniformProportionalUp { .. } | Self::UniformProportionalDown { .. }
        )
    }

    /// Range `(lo, hi)` of the jump size at pre-jump state `xi`; a point
    /// mass has `lo == hi`.
    pub fn range(&self, xi: f64) -> (f64, f64) {
        match *self {
            Self::UniformProportionalUp { alpha1 } => (0.0, alpha1 * xi),
            Self::UniformProportionalDown { alpha2 } => (-alpha2 * xi, 0.0),
            Self::FixedUp { eps_bar } => (eps_bar, eps_bar),
            Self::FixedDown { delta_bar } => (-delta_bar, -delta_bar),
        }
    }

    /// Jump size from a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, xi: f64, u: f64) -> f64 {
        let (lo, hi) = self.range(xi);
        lo + (hi - lo) * u
    }

    pub fn mean(&self, xi: f64) -> f64 {
        let (lo, hi) = self.range(xi);
        0.5 * (lo + hi)
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::UniformProportionalUp { alpha1 } => format!("U(0, {alpha1}·x)"),
            Self::UniformProportionalDown { alpha2 } => format!("U(−{alpha2}·x, 0)"),
            Self::FixedUp { eps_bar } => format!("+{eps_bar}"),
            Self::FixedDown { delta_bar } => format!("−{delta_bar}"),
        }
    }
}

/// A compound-Poisson stream; rate 0 (or no kernel) means absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpStream {
    pub rate: f64,
    pub kernel: Option<JumpKernel>,
}

impl JumpStream {
    pub fn none() -> Self {
        Self {
            rate: 0.0,
            kernel: None,
        }
    }

    pub fn new(rate: f64, kernel: JumpKernel) -> Result<Self> {
        let s = Self {
            rate,
            kernel: Some(kernel),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(invalid(format!("jump rate must be >= 0, got {}", self.rate)));
        }
        if let Some(k) = &self.kernel {
            k.validate()?;
        } else if self.rate > 0.0 {
            return Err(invalid("positive jump rate requires a kernel"));
        }
        Ok(())
    }

    /// The kernel, when the stream actually produces jumps.
    pub fn active(&self) -> Option<(f64, JumpKernel)> {
        match self.kernel {
            Some(k) if self.rate > 0.0 => Some((self.rate, k)),
            _ => None,
        }
    }
}

/// A time-homogeneous jump-diffusion together with the interval it must exit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProcessSpecJson", into = "ProcessSpecJson")]
pub struct ProcessSpec {
    pub drift: CoefficientField,
    pub diffusion: CoefficientField,
    pub up_jumps: JumpStream,
    pub down_jumps: JumpStream,
    pub interval: Interval,
}

/// Flat file representation of a [`ProcessSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpecJson {
    pub drift: CoefficientField,
    pub diffusion: CoefficientField,
    #[serde(default)]
    pub up_rate: f64,
    #[serde(default)]
    pub up_kernel: Option<JumpKernel>,
    #[serde(default)]
    pub down_rate: f64,
    #[serde(default)]
    pub down_kernel: Option<JumpKernel>,
    pub a: f64,
    pub b: f64,
}

impl TryFrom<ProcessSpecJson> for ProcessSpec {
    type Error = FppError;
    fn try_from(j: ProcessSpecJson) -> Result<Self> {
        ProcessSpec::new(
            j.drift,
            j.diffusion,
            JumpStream {
                rate: j.up_rate,
                kernel: j.up_kernel,
            },
            JumpStream {
                rate: j.down_rate,
                kernel: j.down_kernel,
            },
            Interval::new(j.a, j.b)?,
        )
    }
}

impl From<ProcessSpec> for ProcessSpecJson {
    fn from(s: ProcessSpec) -> Self {
        Self {
            drift: s.drift,
            diffusion: s.diffusion,
            up_rate: s.up_jumps.rate,
            up_kernel: s.up_jumps.kernel,
            down_rate: s.down_jumps.rate,
            down_kernel: s.down_jumps.kernel,
            a: s.interval.a(),
            b: s.interval.b(),
        }
    }
}

impl ProcessSpec {
    pub fn new(
        drift: CoefficientField,
        diffusion: CoefficientField,
        up_jumps: JumpStream,
        down_jumps: JumpStream,
        interval: Interval,
    ) -> Result<Self> {
        up_jumps.validate()?;
        down_jumps.validate()?;
        if let Some(k) = up_jumps.kernel {
            if !k.is_upward() {
                return Err(invalid("up_jumps must use an upward kernel"));
            }
        }
        if let Some(k) = down_jumps.kernel {
            if k.is_upward() {
                return Err(invalid("down_jumps must use a downward kernel"));
            }
        }
        let proportional = [up_jumps, down_jumps]
            .iter()
            .filter_map(|s| s.active())
            .any(|(_, k)| k.is_proportional());
        if proportional && interval.a() < 0.0 {
            return Err(FppError::Unsupported(
                "state-proportional jump kernels on intervals with a < 0".into(),
            ));
        }
        let spec = Self {
            drift,
            diffusion,
            up_jumps,
            down_jumps,
            interval,
        };
        // coefficient sanity on a closed-interval sweep
        for i in 0..=256 {
            let x = interval.a() + interval.length() * i as f64 / 256.0;
            let s2 = spec.variance(x);
            if !(s2 >= 0.0 && s2.is_finite()) {
                return Err(invalid(format!("σ²({x}) = {s2} is not a finite nonnegative value")));
            }
            if !spec.drift(x).is_finite() {
                return Err(invalid(format!("drift is not finite at x = {x}")));
            }
        }
        Ok(spec)
    }

    /// Driftless, unit-variance Brownian motion on `(a, b)`.
    pub fn brownian(interval: Interval) -> Self {
        Self {
            drift: CoefficientField::zero(),
            diffusion: CoefficientField::constant(1.0),
            up_jumps: JumpStream::none(),
            down_jumps: JumpStream::none(),
            interval,
        }
    }

    /// `dX = −½ dt + √(X ∨ 0) dB` on `(0, 1)`, whose left-exit probability is `1 − x²`.
    pub fn jump_free_cir() -> Self {
        Self {
            drift: CoefficientField::constant(-0.5),
            diffusion: CoefficientField::SqrtPositive,
            up_jumps: JumpStream::none(),
            down_jumps: JumpStream::none(),
            interval: Interval::unit(),
        }
    }

    /// `dX = ½(X − 1) dt + √(X(1 − X) ∨ 0) dB` on `(0, 1)`, also solved by `1 − x²`.
    pub fn jump_free_wright_fisher() -> Self {
        Self {
            drift: CoefficientField::linear(0.5, -0.5),
            diffusion: CoefficientField::SqrtLogistic,
            up_jumps: JumpStream::none(),
            down_jumps: JumpStream::none(),
            interval: Interval::unit(),
        }
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.drift.value(x)
    }

    /// `σ²(x)`, never negative.
    pub fn variance(&self, x: f64) -> f64 {
        self.diffusion.square(x)
    }

    pub fn sigma(&self, x: f64) -> f64 {
        self.variance(x).sqrt()
    }

    /// Active jump streams as `(rate, kernel)`.
    pub fn jump_streams(&self) -> impl Iterator<Item = (f64, JumpKernel)> + '_ {
        [self.up_jumps, self.down_jumps].into_iter().filter_map(|s| s.active())
    }

    pub fn total_jump_rate(&self) -> f64 {
        self.jump_streams().map(|(r, _)| r).sum()
    }

    pub fn has_jumps(&self) -> bool {
        self.total_jump_rate() > 0.0
    }

    /// Whether some jump from `x` can land on or beyond `a` or `b`.
    pub fn overshoot_possible(&self, x: f64) -> bool {
        let (a, b) = (self.interval.a(), self.interval.b());
        self.jump_streams().any(|(_, k)| {
            let (lo, hi) = k.range(x);
            x + lo <= a || x + hi >= b
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_reversed_endpoints() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(0.0, 0.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn radicands_are_clamped() {
        assert_eq!(CoefficientField::SqrtPositive.square(-0.3), 0.0);
        assert_eq!(CoefficientField::SqrtLogistic.square(1.2), 0.0);
        assert_eq!(CoefficientField::SqrtLogistic.value(-0.1), 0.0);
        assert!((CoefficientField::SqrtLogistic.square(0.25) - 0.1875).abs() < 1e-16);
    }

    #[test]
    fn kernel_constraints() {
        assert!(JumpKernel::UniformProportionalDown { alpha2: 1.0 }.validate().is_ok());
        assert!(JumpKernel::UniformProportionalDown { alpha2: 1.01 }.validate().is_err());
        assert!(JumpKernel::UniformProportionalUp { alpha1: 0.0 }.validate().is_err());
        assert!(JumpKernel::FixedDown { delta_bar: -1.0 }.validate().is_err());
        assert_eq!(JumpKernel::UniformProportionalUp { alpha1: 0.5 }.range(0.4), (0.0, 0.2));
        assert_eq!(JumpKernel::FixedDown { delta_bar: 0.1 }.sample(0.3, 0.7), -0.1);
    }

    #[test]
    fn stream_direction_is_checked() {
        let down = JumpStream::new(1.0, JumpKernel::FixedDown { delta_bar: 0.1 }).unwrap();
        let r = ProcessSpec::new(
            CoefficientField::zero(),
            CoefficientField::constant(1.0),
            down,
            JumpStream::none(),
            Interval::unit(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn proportional_kernels_need_nonnegative_interval() {
        let up = JumpStream::new(1.0, JumpKernel::UniformProportionalUp { alpha1: 0.5 }).unwrap();
        let r = ProcessSpec::new(
            CoefficientField::zero(),
            CoefficientField::constant(1.0),
            up,
            JumpStream::none(),
            Interval::new(-1.0, 1.0).unwrap(),
        );
        assert!(matches!(r, Err(FppError::Unsupported(_))));
    }

    #[test]
    fn json_uses_flat_field_names() {
        let spec = ProcessSpec::new(
            CoefficientField::zero(),
            CoefficientField::constant(1.0),
            JumpStream::new(1.0, JumpKernel::FixedUp { eps_bar: 0.5 }).unwrap(),
            JumpStream::none(),
            Interval::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let v = serde_json::to_value(&spec).unwrap();
        for key in ["drift", "diffusion", "up_rate", "up_kernel", "down_rate", "down_kernel", "a", "b"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: ProcessSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back.up_jumps, spec.up_jumps);
        assert_eq!(back.interval, spec.interval);
    }

    #[test]
    fn json_rejects_unknown_fields_and_bad_values() {
        let bad = r#"{"drift":{"type":"constant","value":0},"diffusion":{"type":"constant","value":1},"a":0,"b":1,"colour":3}"#;
        assert!(serde_json::from_str::<ProcessSpec>(bad).is_err());
        let reversed = r#"{"drift":{"type":"constant","value":0},"diffusion":{"type":"constant","value":1},"a":1,"b":0}"#;
        assert!(serde_json::from_str::<ProcessSpec>(reversed).is_err());
    }

    #[test]
    fn overshoot_geometry() {
        let spec = ProcessSpec::new(
            CoefficientField::zero(),
            CoefficientField::constant(1.0),
            JumpStream::new(1.0, JumpKernel::FixedUp { eps_bar: 0.5 }).unwrap(),
            JumpStream::none(),
            Interval::unit(),
        )
        .unwrap();
        assert!(!spec.overshoot_possible(0.3));
        assert!(spec.overshoot_possible(0.5));
        assert!(!ProcessSpec::brownian(Interval::unit()).overshoot_possible(0.01));
    }
}
