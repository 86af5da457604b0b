//! Pure closed-form blow-up time bounds for a nonincreasing auxiliary
//! function `J` obeying `J'(t)^2 >= alpha + b J(t)^(2 + 1/delta)`.
//! Every function returns `None` when its admissibility condition fails.

/// Smallest root `2(delta+1) - 2 sqrt((delta+1) delta)` of the quadratic
/// behind the slope-growth criterion for the positive-energy case.
pub fn smallest_root(delta: f64) -> f64 {
    2.0 * (delta + 1.0) - 2.0 * ((delta + 1.0) * delta).sqrt()
}

/// Log bound for `b < 0`, valid when `J0 < min(1, sqrt(alpha/(-b)))`:
/// `t0 + ln( sqrt(alpha/-b) / (sqrt(alpha/-b) - J0) ) / sqrt(-b)`.
pub fn t_upper_log(t0: f64, j0: f64, alpha: f64, b: f64) -> Option<f64> {
    if !(b < 0.0 && alpha > 0.0 && j0 > 0.0) {
        return None;
    }
    let s = (alpha / -b).sqrt();
    if !(j0 < s.min(1.0)) {
        return None;
    }
    Some(t0 + (s / (s - j0)).ln() / (-b).sqrt())
}

/// Bound for `b = 0`: `t0 + J0 / sqrt(alpha)`.
pub fn t_upper_b_zero(t0: f64, j0: f64, alpha: f64) -> Option<f64> {
    (alpha > 0.0 && j0 >= 0.0).then(|| t0 + j0 / alpha.sqrt())
}

/// First bound for `b > 0`: `J0 / sqrt(alpha)`.
pub fn t_upper_sqrt(j0: f64, alpha: f64) -> Option<f64> {
    (alpha > 0.0 && j0 >= 0.0).then(|| j0 / alpha.sqrt())
}

/// Second bound for `b > 0`:
/// `t0 + 2^((3 delta + 1)/(2 delta)) * delta c / sqrt(alpha) * (1 - (1 + c J0)^(1/(2 delta)))`
/// with `c = (b/alpha)^(delta/(2+delta))`.
pub fn t_upper_exp(t0: f64, j0: f64, alpha: f64, b: f64, delta: f64) -> Option<f64> {
    if !(b > 0.0 && alpha > 0.0 && delta > 0.0 && j0 >= 0.0) {
        return None;
    }
    let c = (b / alpha).powf(delta / (2.0 + delta));
    let lead = 2.0_f64.powf((3.0 * delta + 1.0) / (2.0 * delta)) * delta * c / alpha.sqrt();
    Some(t0 + lead * (1.0 - (1.0 + c * j0).powf(1.0 / (2.0 * delta))))
}

/// Variant of [`t_upper_exp`] with the inner sign flipped,
/// `1 - (1 - c J0)^(1/(2 delta))`; requires `c J0 <= 1` to stay real.
pub fn t_upper_exp_alt(t0: f64, j0: f64, alpha: f64, b: f64, delta: f64) -> Option<f64> {
    if !(b > 0.0 && alpha > 0.0 && delta > 0.0 && j0 >= 0.0) {
        return None;
    }
    let c = (b / alpha).powf(delta / (2.0 + delta));
    if c * j0 > 1.0 {
        return None;
    }
    let lead = 2.0_f64.powf((3.0 * delta + 1.0) / (2.0 * delta)) * delta * c / alpha.sqrt();
    Some(t0 + lead * (1.0 - (1.0 - c * j0).powf(1.0 / (2.0 * delta))))
}

/// Slope bound `t0 - J0 / J'0`, meaningful for decreasing `J`.
pub fn t_upper_slope(t0: f64, j0: f64, jp0: f64) -> Option<f64> {
    (jp0 < 0.0 && j0 >= 0.0).then(|| t0 - j0 / jp0)
}

/// The companion form `t0 + J0 / J'0`.
pub fn t_upper_slope_plus(t0: f64, j0: f64, jp0: f64) -> Option<f64> {
    (jp0 != 0.0 && j0 >= 0.0).then(|| t0 + j0 / jp0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn root_spot_value() {
        assert_relative_eq!(smallest_root(1.0), 4.0 - 2.0 * 2.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(smallest_root(1.0), 1.17157, max_relative = 1e-5);
    }

    #[test]
    fn b_zero_spot_value() {
        assert_relative_eq!(t_upper_b_zero(0.0, 1.0, 4.0).unwrap(), 0.5);
    }

    #[test]
    fn log_bound_admissibility() {
        assert!(t_upper_log(0.0, 0.5, 1.0, -1.0).is_some());
        // j0 too large relative to sqrt(alpha/-b)
        assert!(t_upper_log(0.0, 1.5, 1.0, -1.0).is_none());
        // wrong sign of b
        assert!(t_upper_log(0.0, 0.5, 1.0, 1.0).is_none());
    }

    #[test]
    fn slope_bound_signs() {
        assert_relative_eq!(t_upper_slope(1.0, 0.5, -0.25).unwrap(), 3.0);
        assert!(t_upper_slope(1.0, 0.5, 0.25).is_none());
        assert_relative_eq!(t_upper_slope_plus(1.0, 0.5, -0.25).unwrap(), -1.0);
    }
}
