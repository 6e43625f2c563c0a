//! Skin-color coordinates derived from CIELAB values.

use crate::error::{Error, Result};

/// Individual typology angle in degrees: `atan((L - 50) / b) * 180 / pi`.
///
/// `L` is the CIELAB lightness, `b` the blue-yellow component. Errors when
/// `b` is zero (the angle is undefined there).
pub fn lab_to_ita(l: f64, b: f64) -> Result<f64> {
    if !l.is_finite() || !b.is_finite() {
        return Err(Error::invalid("lab_to_ita needs finite inputs"));
    }
    if b == 0.0 {
        return Err(Error::invalid("lab_to_ita is undefined for b = 0"));
    }
    Ok(((l - 50.0) / b).atan().to_degrees())
}

/// Hue angle in degrees, quadrant-aware, mapped to `[0, 360)`.
///
/// `a` is the green-red component, `b` the blue-yellow component. Skin
/// tones of interest fall in `[0, 90]` (red to yellow). Errors when both
/// components are zero.
pub fn lab_to_hue(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("lab_to_hue needs finite inputs"));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::invalid("lab_to_hue is undefined for a = b = 0"));
    }
    let deg = b.atan2(a).to_degrees();
    let deg = if deg < 0.0 { deg + 360.0 } else { deg };
    // Guard the wrap-around: tiny negative angles can round to exactly 360.
    Ok(if deg >= 360.0 { 0.0 } else { deg })
}
