//! Gamma, Beta and Beta-distribution moments, all in log space.

use std::f64::consts::PI;

use crate::error::{invalid, FppError, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1 − x) = π / sin(πx)
        (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut sum = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            sum += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        HALF_LN_2PI + (z + 0.5) * t.ln() - t + sum.ln()
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// `ln B(α, β)`; callers guarantee positive arguments.
pub(crate) fn log_beta(alpha: f64, beta: f64) -> f64 {
    ln_gamma_unchecked(alpha) + ln_gamma_unchecked(beta) - ln_gamma_unchecked(alpha + beta)
}

fn check_positive(pairs: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in pairs {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    Ok(())
}

/// `B(α, β) = Γ(α)Γ(β)/Γ(α + β)`.
pub fn beta_function(alpha: f64, beta: f64) -> Result<f64> {
    check_positive(&[("alpha", alpha), ("beta", beta)])?;
    Ok(log_beta(alpha, beta).exp())
}

/// `E[Z^γ]` for `Z ~ Beta(α, β)`.
pub fn beta_moment(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_positive(&[("alpha", alpha), ("beta", beta), ("gamma", gamma)])?;
    let ln = ln_gamma_unchecked(alpha + beta) + ln_gamma_unchecked(alpha + gamma)
        - ln_gamma_unchecked(alpha)
        - ln_gamma_unchecked(alpha + beta + gamma);
    Ok(ln.exp())
}

const MGF_MAX_TERMS: usize = 200;

/// Kummer series `Σ t^k/k! · (a)_k/(b)_k` for `t >= 0`.
fn kummer_positive(a: f64, b: f64, t: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MGF_MAX_TERMS {
        let kf = k as f64;
        term *= t / (kf + 1.0) * (a + kf) / (b + kf);
        sum += term;
        if term.abs() < 1e-15 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(FppError::NonConvergence(MGF_MAX_TERMS))
}

/// Moment generating function `E[e^{tZ}]` of `Z ~ Beta(α, β)`:
/// `Σ_k t^k/k! · B(α+k, β)/B(α, β)`.
///
/// Negative `t` goes through Kummer's transformation
/// `M(α, α+β, t) = e^t M(β, α+β, −t)` so the summed series never alternates.
pub fn beta_mgf(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    check_positive(&[("alpha", alpha), ("beta", beta)])?;
    if !(t.abs() <= 50.0) {
        return Err(invalid(format!("beta_mgf needs |t| <= 50, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if t > 0.0 {
        kummer_positive(alpha, alpha + beta, t)
    } else {
        Ok(t.exp() * kummer_positive(beta, alpha + beta, -t)?)
    }
}

/// Mean `(aβ + bα)/(α + β)` of the Beta(α, β) density rescaled onto `(a, b)`.
pub fn modified_beta_mean(alpha: f64, beta: f64, a: f64, b: f64) -> Result<f64> {
    check_positive(&[("alpha", alpha), ("beta", beta)])?;
    crate::model::Interval::new(a, b)?;
    Ok((a * beta + b * alpha) / (alpha + beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_fixed_points() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!((log_gamma(6.0).unwrap() - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn beta_function_values() {
        assert!((beta_function(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta_function(2.0, 2.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((beta_function(0.5, 0.5).unwrap() - PI).abs() < 1e-13);
        assert!(beta_function(-1.0, 1.0).is_err());
    }

    #[test]
    fn beta_moment_values() {
        let (a, b) = (2.7, 1.3);
        assert!((beta_moment(a, b, 1.0).unwrap() - a / (a + b)).abs() < 1e-14);
        assert!((beta_moment(1.0, 1.0, 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((beta_moment(2.0, 3.0, 2.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(beta_moment(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn mgf_of_uniform() {
        assert_eq!(beta_mgf(1.0, 1.0, 0.0).unwrap(), 1.0);
        for t in [-50.0, -3.0, -0.1, 0.2, 1.0, 7.5, 50.0] {
            let exact = (f64::exp(t) - 1.0) / t;
            let got = beta_mgf(1.0, 1.0, t).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-13, "t={t}: {got} vs {exact}");
        }
        assert!(beta_mgf(1.0, 1.0, 51.0).is_err());
    }

    #[test]
    fn modified_beta_mean_values() {
        assert_eq!(modified_beta_mean(1.0, 1.0, 0.0, 1.0).unwrap(), 0.5);
        assert!((modified_beta_mean(2.0, 3.0, 0.0, 1.0).unwrap() - 0.4).abs() < 1e-16);
        assert!(modified_beta_mean(1.0, 1.0, 1.0, 0.0).is_err());
    }
}
