//! Piecewise-linear quantile functions on a probability grid.
//!
//! Both the quantile function and its inverse (the CDF) extend linearly past
//! the grid using the slope of the outermost segment, so that composing
//! quantile and distribution functions commutes with location shifts.

/// Evaluates the interpolated quantile function at probability `u`.
pub fn quantile_eval(grid: &[f64], q: &[f64], u: f64) -> f64 {
    let g = grid.len();
    if g == 1 {
        return q[0];
    }
    // Segment index k with grid[k] <= u <= grid[k+1], clamped to the ends.
    let k = match grid.partition_point(|&p| p <= u) {
        0 => 0,
        i if i >= g => g - 2,
        i => i - 1,
    };
    let (p0, p1) = (grid[k], grid[k + 1]);
    q[k] + (u - p0) * (q[k + 1] - q[k]) / (p1 - p0)
}

/// Inverts the interpolated quantile function: returns `u` with
/// `quantile_eval(grid, q, u) = x`. A value attained on a flat run of `q`
/// maps to the midpoint of that run's probability range.
pub fn quantile_invert(grid: &[f64], q: &[f64], x: f64) -> f64 {
    let g = grid.len();
    if g == 1 {
        return grid[0];
    }
    let lo = q.partition_point(|&v| v < x);
    let hi = q.partition_point(|&v| v <= x);
    if hi > lo {
        // x is attained at grid indices lo..hi-1
        return 0.5 * (grid[lo] + grid[hi - 1]);
    }
    let k = if lo == 0 {
        0
    } else if lo >= g {
        g - 2
    } else {
        lo - 1
    };
    let (q0, q1) = (q[k], q[k + 1]);
    if q1 <= q0 {
        // Flat outer segment: no slope to extrapolate with.
        return if lo == 0 { grid[0] } else { grid[g - 1] };
    }
    grid[k] + (x - q0) * (grid[k + 1] - grid[k]) / (q1 - q0)
}

/// Weighted least-squares projection onto nondecreasing sequences
/// (pool adjacent violators).
pub fn isotonic_projection(values: &[f64], weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(values.len(), weights.len());
    // Blocks of (weighted mean, total weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let w = w.max(f64::MIN_POSITIVE);
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            if blocks[n - 2].0 <= blocks[n - 1].0 {
                break;
            }
            let (m2, w2, l2) = blocks.pop().expect("block");
            let (m1, w1, l1) = blocks.pop().expect("block");
            let wt = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / wt, wt, l1 + l2));
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, len) in blocks {
        out.extend(std::iter::repeat_n(m, len));
    }
    out
}
