//! Float helpers that work without `std`.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `x^r` with fast paths for the orders used in practice.
#[inline]
pub(crate) fn powr(x: f64, r: f64) -> f64 {
    if r == 1.0 {
        x
    } else if r == 2.0 {
        x * x
    } else {
        libm::pow(x, r)
    }
}

/// `x^(1/r)`.
#[inline]
pub(crate) fn root(x: f64, r: f64) -> f64 {
    if r == 1.0 {
        x
    } else if r == 2.0 {
        libm::sqrt(x)
    } else {
        libm::pow(x, 1.0 / r)
    }
}
