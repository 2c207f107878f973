//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `ln Γ(x)` for `x > 0`: shift to `x ≥ 15`, then the Stirling series.
pub fn ln_gamma(mut x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let x2 = x * x;
    let series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2);
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// `E[Z^γ]` for `Z ~ Beta(α, β)`.
pub fn beta_moment(alpha: f64, beta: f64, gamma: f64) -> f64 {
    (ln_gamma(alpha + beta) + ln_gamma(alpha + gamma) - ln_gamma(alpha) - ln_gamma(alpha + beta + gamma)).exp()
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        left + right + diff / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson with Richardson correction on 64 equal panels.
/// Meant for smooth integrands only.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Beta(α, β) density on `(0, 1)` built from [`ln_gamma`].
pub fn beta_pdf(alpha: f64, beta: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
    ((alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_b).exp()
}

/// `π₀` of the Brownian problem with a `+ε` jump at rate 1 on `(0, 2ε)`,
/// from a dense second-order finite-difference solve written from scratch.
/// Returns the nodal values on `n` interior nodes.
pub fn example7_reference(eps: f64, n: usize) -> Vec<(f64, f64)> {
    // nodes x_i = i h, h = 2ε/(n+1); choose n odd so that x_i + ε is a node
    assert!(n % 2 == 1);
    let h = 2.0 * eps / (n as f64 + 1.0);
    let shift = (n + 1) / 2;
    let mut m = vec![vec![0.0; n]; n];
    let mut r = vec![0.0; n];
    let d = 0.5 / (h * h);
    for i in 0..n {
        let node = i + 1;
        m[i][i] = -2.0 * d - 1.0;
        if node == 1 {
            r[i] -= d;
        } else {
            m[i][i - 1] += d;
        }
        if node < n {
            m[i][i + 1] += d;
        }
        let target = node + shift;
        if target <= n {
            m[i][target - 1] += 1.0;
        }
    }
    // Gaussian elimination with partial pivoting
    for k in 0..n {
        let p = (k..n).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs())).unwrap();
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f != 0.0 {
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                r[i] -= f * r[k];
            }
        }
    }
    let mut v = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * v[j]).sum();
        v[i] = (r[i] - s) / m[i][i];
    }
    (0..n).map(|i| ((i + 1) as f64 * h, v[i])).collect()
}
