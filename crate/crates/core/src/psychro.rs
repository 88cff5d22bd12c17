//! Moist-air relations used for the psychrometric y axis.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sea-level standard atmosphere, kPa.
pub const STANDARD_PRESSURE_KPA: f64 = 101.325;
/// Molar-mass ratio of water vapour to dry air.
pub const MOLAR_MASS_RATIO: f64 = 0.62198;
pub const SUPPORTED_TEMP_MIN: f64 = -20.0;
pub const SUPPORTED_TEMP_MAX: f64 = 70.0;

/// Saturation vapour pressure over water in kPa (Buck).
pub fn saturation_pressure<T: Scalar>(temp_c: T) -> Result<T> {
    let t = temp_c.as_f64();
    if !(SUPPORTED_TEMP_MIN..=SUPPORTED_TEMP_MAX).contains(&t) {
        return Err(Error::OutOfSupportedRange(t));
    }
    let exponent = (T::lit(18.678) - temp_c / T::lit(234.5)) * (temp_c / (T::lit(257.14) + temp_c));
    Ok(T::lit(0.61121) * exponent.exp())
}

/// Humidity ratio in kg water per kg dry air at `rh` percent and total
/// pressure `pressure_kpa`.
pub fn humidity_ratio<T: Scalar>(temp_c: T, rh: T, pressure_kpa: T) -> Result<T> {
    let r = rh.as_f64();
    if !(0.0..=100.0).contains(&r) {
        return Err(Error::InvalidHumidity(r));
    }
    let p_w = rh / T::lit(100.0) * saturation_pressure(temp_c)?;
    if p_w >= pressure_kpa {
        return Err(Error::SaturationExceedsTotalPressure { vapour: p_w.as_f64(), total: pressure_kpa.as_f64() });
    }
    Ok(T::lit(MOLAR_MASS_RATIO) * p_w / (pressure_kpa - p_w))
}

/// [`humidity_ratio`] at standard pressure.
pub fn humidity_ratio_std<T: Scalar>(temp_c: T, rh: T) -> Result<T> {
    humidity_ratio(temp_c, rh, T::lit(STANDARD_PRESSURE_KPA))
}
