//! Univariate slice sampling with the stepping-out and shrinkage procedures
//! (Neal 2003).
//!
//! One call performs one transition that leaves `exp(log_density)` invariant:
//! a vertical level is drawn under the density at the current point, an
//! interval of width `w` is positioned randomly around the point and expanded
//! in steps of `w` (the step budget `m` randomly apportioned between the two
//! sides) until both ends leave the slice, then points are drawn uniformly
//! from the interval, shrinking it toward the current point on rejection.

use crate::error::{Result, SeqError};
use rand::Rng;

/// One slice-sampling update from `x0` targeting `exp(log_density)`.
///
/// `w` is the initial interval width, `m` the maximum number of expansion
/// steps. With `positive_only` the interval is clipped at zero and the
/// target is treated as having support on the positive half-line.
pub fn slice_sample_1d<R, F>(
    log_density: &mut F,
    x0: f64,
    w: f64,
    m: u32,
    rng: &mut R,
    positive_only: bool,
) -> Result<f64>
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> f64,
{
    let mut eval = |x: f64| -> f64 {
        if positive_only && x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            log_density(x)
        }
    };
    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(SeqError::NonFiniteDensity(f0));
    }
    let y = f0 + rng.gen::<f64>().ln();

    // Position the interval randomly around x0.
    let mut left = x0 - w * rng.gen::<f64>();
    let mut right = left + w;

    // Step out, apportioning the m steps randomly between the sides.
    if m > 1 {
        let mut j = (rng.gen::<f64>() * m as f64).floor() as u32;
        let mut k = m - 1 - j;
        while j > 0 && (!positive_only || left > 0.0) && y < eval(left) {
            left -= w;
            j -= 1;
        }
        while k > 0 && y < eval(right) {
            right += w;
            k -= 1;
        }
    }
    if positive_only && left < 0.0 {
        left = 0.0;
    }

    // Shrink toward x0 until a point inside the slice is drawn. This
    // terminates with probability 1; the cap only guards floating-point
    // pathologies, in which case staying at x0 is a valid (identity) update.
    for _ in 0..10_000 {
        let x1 = left + rng.gen::<f64>() * (right - left);
        if y < eval(x1) {
            return Ok(x1);
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
    }
    Ok(x0)
}
