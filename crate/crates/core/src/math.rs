//! `no_std` float helpers on top of `libm`.

use core::f64::consts::{PI, TAU};

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Maps an angle into `[0, 2pi)`.
pub(crate) fn wrap_tau(theta: f64) -> f64 {
    let t = theta % TAU;
    if t < 0.0 {
        // -0.0 + TAU rounds to TAU for tiny negatives
        let w = t + TAU;
        if w >= TAU {
            0.0
        } else {
            w
        }
    } else {
        t
    }
}

/// Maps an angle difference into `(-pi, pi]`.
pub(crate) fn wrap_pi(delta: f64) -> f64 {
    let t = wrap_tau(delta);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}
