//! Power-ratio conversions. All conversions use the `10·log10` convention.

/// Converts a power ratio in dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Converts a linear power ratio to dB. Zero maps to `-inf`.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}
