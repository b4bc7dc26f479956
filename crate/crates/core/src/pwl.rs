//! Piecewise-linear lookup over strictly increasing abscissae.

/// Evaluates the polyline through `knots` at `x`, holding the end values
/// outside the knot range. The flag reports whether `x` was clamped.
pub(crate) fn interpolate(knots: &[(f64, f64)], x: f64) -> (f64, bool) {
    debug_assert!(!knots.is_empty());
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x < first.0 {
        return (first.1, true);
    }
    if x > last.0 {
        return (last.1, true);
    }
    // index of the first knot with abscissa > x
    let hi = knots.partition_point(|k| k.0 <= x);
    if hi == 0 {
        return (first.1, false);
    }
    let (x0, y0) = knots[hi - 1];
    if x == x0 || hi == knots.len() {
        return (y0, false);
    }
    let (x1, y1) = knots[hi];
    let w = (x - x0) / (x1 - x0);
    (y0 + (y1 - y0) * w, false)
}

/// True when abscissae are finite and strictly increasing and ordinates finite.
pub(crate) fn is_strictly_increasing(knots: &[(f64, f64)]) -> bool {
    knots.iter().all(|k| k.0.is_finite() && k.1.is_finite())
        && knots.windows(2).all(|w| w[0].0 < w[1].0)
}
