use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_i = i * h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub h: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!("time step must be positive, got {h}")));
        }
        if n == 0 {
            return Err(Error::domain("time grid needs at least one point"));
        }
        Ok(Self { h, n })
    }

    /// Grid covering `[0, t_end]` with step `h` (the last point is the first at or past `t_end`).
    pub fn covering(h: f64, t_end: f64) -> Result<Self> {
        if !(t_end >= 0.0) {
            return Err(Error::domain(format!("t_end must be non-negative, got {t_end}")));
        }
        let steps = (t_end / h - 1e-9).ceil().max(0.0) as usize;
        Self::new(h, steps + 1)
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.t(i))
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n && (self.h - other.h).abs() <= 1e-15 * self.h.abs().max(1.0)
    }
}

/// Four-point Lagrange interpolation of uniformly sampled data at `t`
/// (clamped stencil near the ends, linear when fewer than four samples exist).
pub fn interpolate_cubic(values: &[f64], h: f64, t: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return values[0];
    }
    let x = t / h;
    if n < 4 {
        let i = (x.floor().max(0.0) as usize).min(n - 2);
        let s = x - i as f64;
        return values[i] * (1.0 - s) + values[i + 1] * s;
    }
    let i = x.floor() as isize;
    let start = (i - 1).clamp(0, n as isize - 4) as usize;
    let s = x - start as f64;
    let (p0, p1, p2, p3) = (values[start], values[start + 1], values[start + 2], values[start + 3]);
    // Lagrange basis on nodes 0, 1, 2, 3.
    let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3
}
