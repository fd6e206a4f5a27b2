//! Float helpers shared across the crate, plus the tolerance constants used
//! by curve construction and validation. All tolerances live here so a
//! single edit retunes the whole crate.

/// Relative tolerance for residuals of the pool state curve.
pub const CURVE_RESIDUAL_REL_TOL: f64 = 1e-9;

/// Relative tolerance when checking marginal rates against finite
/// differences.
pub const DERIVATIVE_REL_TOL: f64 = 1e-6;

/// Swaps may not leave a balance below this fraction of its equilibrium
/// anchor (of its initial deposit, for makers without anchors). The curve's
/// asymptote makes exact depletion impossible; the floor guards the
/// floating-point neighbourhood of it.
pub const DUST_FLOOR_FRACTION: f64 = 1e-12;

/// Absolute tolerance on the free anchor at which the retarget minimizer
/// stops.
pub const MINIMIZER_FREE_VAR_TOL: f64 = 1e-9;

#[cfg(feature = "std")]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn abs(x: f64) -> f64 {
    x.abs()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `|a - b|` relative to the larger magnitude of the pair.
#[inline]
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = abs(a).max(abs(b)).max(f64::MIN_POSITIVE);
    abs(a - b) / scale
}

/// Strictly positive and finite.
#[inline]
pub fn is_pos_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}
