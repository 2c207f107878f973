//! Brownian motion with unit-rate jumps of size ε on `(0, 2ε)`.
//!
//! The exit probability is
//!
//! ```text
//! π₀(x) = e^{−x√2}(A + a x) + e^{x√2}(B + b x)        0 < x < ε
//!       = c (e^{−x√2} − e^{−4ε√2 + x√2})              ε ≤ x < 2ε
//! ```
//!
//! On the right half a jump always overshoots `2ε`, leaving `½v'' − v = 0`.
//! On the left half the jump lands on the right branch, so the equation is
//! `½v'' − v = −v(x + ε)`, whose particular solution forces
//! `a = c e^{−ε√2}/√2` and `b = +c e^{−3ε√2}/√2`. Value and slope matching at
//! `ε` then fix `A` and `c`; the second derivative matches automatically.
//!
//! A widely reproduced form of this solution carries `b = −c e^{−3ε√2}/√2`,
//! which does not satisfy the equation on `(0, ε)`. It is kept as
//! [`Example7Constants::as_printed`] so the discrepancy can be measured.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{invalid, FppError, Result};
use crate::quadrature::{integrate_pieces, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example7Constants {
    pub epsilon: f64,
    /// Coefficient of `x e^{−x√2}` on the left branch.
    pub a_c: f64,
    /// Coefficient of `x e^{x√2}` on the left branch.
    pub b_c: f64,
    /// Amplitude of the right branch.
    pub c: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub gamma_c: f64,
    pub delta_c: f64,
}

#[derive(Clone, Copy)]
enum Sign {
    Solving,
    Printed,
}

fn build(epsilon: f64, sign: Sign) -> Result<Example7Constants> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let k = SQRT_2;
    let e1 = (-epsilon * k).exp();
    let e2 = (-2.0 * epsilon * k).exp();
    let e3 = (-3.0 * epsilon * k).exp();
    let alpha_c = -2.0 * (epsilon * k).sinh();
    let gamma_c = -2.0 * k * (epsilon * k).cosh();
    let (beta_c, delta_c, b_sign) = match sign {
        Sign::Solving => (e3 - e1 + k * epsilon * e2, k * (e1 + e2 + e3), 1.0),
        Sign::Printed => (e1 * (e2 - 1.0), -2.0 * epsilon * e2 + k * (e1 + e3), -1.0),
    };
    let det = alpha_c * delta_c - beta_c * gamma_c;
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return Err(FppError::SingularSystem);
    }
    let grow = (epsilon * k).exp();
    let big_a = grow * (beta_c * k - delta_c) / det;
    let c = grow * (gamma_c - alpha_c * k) / det;
    Ok(Example7Constants {
        epsilon,
        a_c: c * e1 / k,
        b_c: b_sign * c * e3 / k,
        c,
        big_a,
        big_b: 1.0 - big_a,
        alpha_c,
        beta_c,
        gamma_c,
        delta_c,
    })
}

/// Constants of the closed-form exit probability for half-width `epsilon`.
pub fn example7_constants(epsilon: f64) -> Result<Example7Constants> {
    build(epsilon, Sign::Solving)
}

/// Value, first and second derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Example7Constants {
    /// The constants with the sign of `b` as commonly printed.
    pub fn as_printed(epsilon: f64) -> Result<Self> {
        build(epsilon, Sign::Printed)
    }

    pub fn determinant(&self) -> f64 {
        self.alpha_c * self.delta_c - self.beta_c * self.gamma_c
    }

    /// Left-branch formula and derivatives, valid for any real `x`.
    pub fn left_jet(&self, x: f64) -> Jet {
        let k = SQRT_2;
        let em = (-k * x).exp();
        let ep = (k * x).exp();
        let lm = self.big_a + self.a_c * x;
        let lp = self.big_b + self.b_c * x;
        Jet {
            value: em * lm + ep * lp,
            d1: em * (self.a_c - k * lm) + ep * (self.b_c + k * lp),
            d2: em * (2.0 * lm - 2.0 * k * self.a_c) + ep * (2.0 * lp + 2.0 * k * self.b_c),
        }
    }

    /// Right-branch formula and derivatives, valid for any real `x`.
    pub fn right_jet(&self, x: f64) -> Jet {
        let k = SQRT_2;
        let em = (-k * x).exp();
        let ep = (-4.0 * self.epsilon * k + k * x).exp();
        Jet {
            value: self.c * (em - ep),
            d1: -self.c * k * (em + ep),
            d2: 2.0 * self.c * (em - ep),
        }
    }

    /// Piecewise formula with the branch chosen by position; left branch
    /// below 0, right branch above 2ε.
    pub fn jet(&self, x: f64) -> Jet {
        if x < self.epsilon {
            self.left_jet(x)
        } else {
            self.right_jet(x)
        }
    }

    /// `π₀(x)` with outer values 1 for `x <= 0` and 0 for `x >= 2ε`.
    pub fn pia(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x >= 2.0 * self.epsilon {
            0.0
        } else {
            self.jet(x).value
        }
    }

    /// Largest relative mismatch of value, slope and curvature of the two
    /// branches at `x = ε`.
    pub fn c2_mismatch(&self) -> f64 {
        let l = self.left_jet(self.epsilon);
        let r = self.right_jet(self.epsilon);
        [(l.value, r.value), (l.d1, r.d1), (l.d2, r.d2)]
            .iter()
            .map(|&(p, q)| (p - q).abs() / p.abs().max(q.abs()).max(1e-300))
            .fold(0.0, f64::max)
    }

    /// `(1/2ε) ∫₀^{2ε} π₀(x) dx` by adaptive quadrature.
    pub fn q_quadrature(&self) -> Result<f64> {
        let e = self.epsilon;
        let integral = integrate_pieces(|x| self.pia(x), &[0.0, e, 2.0 * e], QuadratureConfig::default())?;
        Ok(integral / (2.0 * e))
    }

    /// The three-line closed expression for `q` under the uniform density on
    /// `(0, 2ε)`, evaluated with these constants.
    pub fn q_transcribed(&self) -> f64 {
        let k = SQRT_2;
        let e = self.epsilon;
        let (al, be, ga, de) = (self.alpha_c, self.beta_c, self.gamma_c, self.delta_c);
        let d = self.determinant();
        let grow = (e * k).exp();
        let pref = 1.0 / (2.0 * e * k);
        let line1 = (ga - (al + be) * k + de) / d + grow * (1.0 - grow * (be * k - de) / d);
        let line2 = k * (-e * k).exp() * (k - e - 0.25) * (ga - al * k) / d;
        let line3 = (-2.0 * e * k).exp() * (ga - al * k) / d + 2.0 * grow * (be * k - de) / d
            + (ga - al * k) / (2.0 * d)
            - 1.0;
        pref * (line1 + line2 + line3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_is_one_minus_a() {
        for eps in [0.1, 0.25, 0.5, 1.0, 3.0] {
            let k = example7_constants(eps).unwrap();
            assert_eq!(k.big_b, 1.0 - k.big_a);
            assert_eq!(k.a_c, k.c * (-eps * SQRT_2).exp() / SQRT_2);
        }
    }

    #[test]
    fn c2_at_midpoint() {
        for eps in [0.25, 0.5, 1.0] {
            let k = example7_constants(eps).unwrap();
            assert!(k.c2_mismatch() < 1e-9, "eps={eps}: {}", k.c2_mismatch());
        }
    }

    #[test]
    fn endpoint_values() {
        let k = example7_constants(0.5).unwrap();
        assert!((k.left_jet(0.0).value - 1.0).abs() < 1e-15);
        assert!(k.right_jet(1.0).value.abs() < 1e-15);
        assert_eq!(k.pia(0.0), 1.0);
        assert_eq!(k.pia(1.0), 0.0);
    }

    #[test]
    fn bounded_and_nonincreasing_on_fine_grid() {
        let k = example7_constants(0.5).unwrap();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = k.pia(x);
            assert!((0.0..=1.0).contains(&v), "x={x}: {v}");
            assert!(v <= prev + 1e-15, "x={x}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn left_branch_solves_delay_equation() {
        // ½v''(x) + v(x + ε) − v(x) = 0 on (0, ε)
        for eps in [0.25, 0.5, 1.0] {
            let k = example7_constants(eps).unwrap();
            for i in 1..20 {
                let x = eps * i as f64 / 20.0;
                let j = k.left_jet(x);
                let r = 0.5 * j.d2 + k.right_jet(x + eps).value - j.value;
                assert!(r.abs() < 1e-12, "eps={eps} x={x}: {r}");
            }
        }
    }

    #[test]
    fn printed_sign_leaves_a_residual() {
        // with b of the opposite sign the left-branch residual is −2b√2·e^{x√2}
        let k = Example7Constants::as_printed(0.5).unwrap();
        let x = 0.2;
        let j = k.left_jet(x);
        let r = 0.5 * j.d2 + k.right_jet(x + 0.5).value - j.value;
        let predicted = 2.0 * SQRT_2 * k.b_c * (SQRT_2 * x).exp();
        assert!((r - predicted).abs() < 1e-12, "{r} vs {predicted}");
        assert!(r.abs() > 1e-3);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let k = example7_constants(0.5).unwrap();
        let h = 1e-4;
        for x in [0.1, 0.3, 0.7, 0.9] {
            let j = k.jet(x);
            let d1 = (k.jet(x + h).value - k.jet(x - h).value) / (2.0 * h);
            let d2 = (k.jet(x + h).value - 2.0 * j.value + k.jet(x - h).value) / (h * h);
            assert!((d1 - j.d1).abs() < 1e-7);
            assert!((d2 - j.d2).abs() < 1e-5);
        }
    }
}
