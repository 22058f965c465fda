//! Centered cardinal B-splines.
//!
//! `B_1` is the indicator of `[-1/2, 1/2)` and `B_{N+1} = B_N * B_1`, so `B_N`
//! is supported on `[-N/2, N/2]` and its integer translates sum to one.

/// Evaluates the centered cardinal B-spline of the given order at `x`.
///
/// Uses the two-term recursion
/// `(N-1) B_N(x) = (x + N/2) B_{N-1}(x + 1/2) + (N/2 - x) B_{N-1}(x - 1/2)`,
/// which stays accurate near the knots where the truncated-power form cancels.
pub fn cardinal_bspline(order: u32, x: f64) -> f64 {
    assert!(order >= 1, "B-spline order must be at least 1");
    let half = order as f64 / 2.0;
    if x < -half || x >= half {
        return 0.0;
    }
    if order == 1 {
        return 1.0;
    }
    let n = order as f64;
    ((x + half) * cardinal_bspline(order - 1, x + 0.5) + (half - x) * cardinal_bspline(order - 1, x - 0.5)) / (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(cardinal_bspline(1, 0.0), 1.0);
        assert_eq!(cardinal_bspline(1, 0.5), 0.0);
        assert!((cardinal_bspline(2, 0.0) - 1.0).abs() < 1e-15);
        assert!((cardinal_bspline(2, 0.25) - 0.75).abs() < 1e-15);
        assert!((cardinal_bspline(4, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cardinal_bspline(4, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((cardinal_bspline(5, 0.0) - 115.0 / 192.0).abs() < 1e-15);
        assert!((cardinal_bspline(5, 1.0) - 19.0 / 96.0).abs() < 1e-15);
        assert!((cardinal_bspline(5, 2.0) - 1.0 / 384.0).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity() {
        for order in 1..=6 {
            for i in 0..200 {
                let x = i as f64 / 200.0;
                let s: f64 = (-8..=8).map(|k| cardinal_bspline(order, x - k as f64)).sum();
                assert!((s - 1.0).abs() < 1e-13, "order {order} x {x} sum {s}");
            }
        }
    }

    #[test]
    fn symmetric_for_orders_above_one() {
        for order in 2..=5 {
            for i in 0..50 {
                let x = i as f64 * 0.05;
                let d = cardinal_bspline(order, x) - cardinal_bspline(order, -x);
                assert!(d.abs() < 1e-14);
            }
        }
    }
}
