//! Angles on the unit circle, on the `[-pi, pi)` branch of `Arg`.

use std::f64::consts::{PI, TAU};

/// Maps any finite angle into `[-pi, pi)`.
pub fn wrap(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for inputs just below a multiple
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Chordal distance `|e^{ia} - e^{ib}|`, evaluated as `2|sin((a-b)/2)|`.
pub fn chord(a: f64, b: f64) -> f64 {
    2.0 * (0.5 * (a - b)).sin().abs()
}

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Absolute angular separation in `[0, pi]`.
pub fn separation(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}
