//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Subintervals are kept in a max-heap keyed by their error estimate and the
//! worst one is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{FppError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Segment {
        lo,
        hi,
        value,
        error,
    }
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: QuadratureConfig) -> Result<f64> {
    integrate_pieces(f, &[lo, hi], cfg)
}

/// Integrates `f` over consecutive pieces `[p0, p1], [p1, p2], ...`.
///
/// Breakpoints should sit on kinks or discontinuities of `f` so that every
/// piece is smooth. Degenerate pieces are skipped.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: QuadratureConfig) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let seg = kronrod(&f, w[0], w[1]);
            total += seg.value;
            total_err += seg.error;
            heap.push(seg);
        }
    }
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if heap.len() >= cfg.max_intervals {
            return Err(FppError::Quadrature {
                tolerance: cfg.abs_tol,
                estimate: total_err,
                intervals: heap.len(),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted at machine resolution
            return Err(FppError::Quadrature {
                tolerance: cfg.abs_tol,
                estimate: total_err,
                intervals: heap.len(),
            });
        }
        let left = kronrod(&f, worst.lo, mid);
        let right = kronrod(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // recompute the sum to shed accumulated update round-off
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Sorts, clips to `[lo, hi]` and deduplicates breakpoints, always
/// including both ends.
pub fn breakpoints_within(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = std::iter::once(lo)
        .chain(extra.iter().copied().filter(|&p| p > lo && p < hi))
        .chain(std::iter::once(hi))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
