//! International Standard Atmosphere, troposphere and lower stratosphere.
//!
//! Two layers cover every altitude a surface-launched shell reaches: a
//! linearly cooling troposphere up to 11 km and an isothermal layer above.
//! Pressure follows the barometric relations for each layer; the
//! stratospheric branch is anchored to the tropopause pressure computed from
//! the tropospheric formula, so the profile is continuous by construction.
//!
//! Queries outside the supported band are clamped to it and flagged rather
//! than extrapolated.

/// Standard acceleration of free fall, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Sea-level standard temperature, K.
pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;

/// Sea-level standard pressure, Pa.
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;

/// Tropospheric temperature lapse rate, K/m (negative: cooling with height).
pub const LAPSE_RATE: f64 = -0.0065;

/// Specific gas constant of dry air, J/(kg·K).
pub const GAS_CONSTANT_AIR: f64 = 287.052_87;

/// Ratio of specific heats of dry air.
pub const HEAT_CAPACITY_RATIO: f64 = 1.4;

/// Geometric altitude of the tropopause, m.
pub const TROPOPAUSE_ALTITUDE: f64 = 11_000.0;

/// Constant temperature of the lower stratosphere, K.
pub const STRATOSPHERE_TEMPERATURE: f64 = 216.65;

/// Lowest altitude served without clamping, m.
pub const MIN_ALTITUDE: f64 = -500.0;

/// Highest altitude served without clamping, m.
pub const MAX_ALTITUDE: f64 = 20_000.0;

/// Atmospheric state at one altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereSample {
    /// Temperature, K.
    pub temperature: f64,
    /// Static pressure, Pa.
    pub pressure: f64,
    /// Density, kg/m³.
    pub density: f64,
    /// Speed of sound, m/s.
    pub speed_of_sound: f64,
    /// True when the query altitude fell outside the supported band and the
    /// sample describes the nearest band edge instead.
    pub clamped: bool,
}

fn troposphere_pressure(altitude: f64) -> f64 {
    let t = SEA_LEVEL_TEMPERATURE + LAPSE_RATE * altitude;
    SEA_LEVEL_PRESSURE
        * (t / SEA_LEVEL_TEMPERATURE).powf(-STANDARD_GRAVITY / (LAPSE_RATE * GAS_CONSTANT_AIR))
}

/// Sample the standard atmosphere at a geometric altitude in metres.
///
/// Altitudes outside [`MIN_ALTITUDE`, `MAX_ALTITUDE`] are clamped to the
/// nearest edge and the result is marked [`AtmosphereSample::clamped`].
/// A NaN altitude propagates NaN through the sample.
pub fn isa_sample(altitude: f64) -> AtmosphereSample {
    let clamped_alt = altitude.clamp(MIN_ALTITUDE, MAX_ALTITUDE);
    let clamped = clamped_alt != altitude;
    let (temperature, pressure) = if clamped_alt <= TROPOPAUSE_ALTITUDE {
        (
            SEA_LEVEL_TEMPERATURE + LAPSE_RATE * clamped_alt,
            troposphere_pressure(clamped_alt),
        )
    } else {
        let p_tropopause = troposphere_pressure(TROPOPAUSE_ALTITUDE);
        let p = p_tropopause
            * (-STANDARD_GRAVITY * (clamped_alt - TROPOPAUSE_ALTITUDE)
                / (GAS_CONSTANT_AIR * STRATOSPHERE_TEMPERATURE))
                .exp();
        (STRATOSPHERE_TEMPERATURE, p)
    };
    let density = pressure / (GAS_CONSTANT_AIR * temperature);
    let speed_of_sound = (HEAT_CAPACITY_RATIO * GAS_CONSTANT_AIR * temperature).sqrt();
    AtmosphereSample { temperature, pressure, density, speed_of_sound, clamped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn sea_level_state() {
        let s = isa_sample(0.0);
        assert!(!s.clamped);
        assert_abs_diff_eq!(s.temperature, 288.15);
        assert_abs_diff_eq!(s.pressure, 101_325.0);
        assert_abs_diff_eq!(s.density, 1.225, epsilon = 1e-4);
        assert_abs_diff_eq!(s.speed_of_sound, 340.294, epsilon = 1e-3);
    }

    #[test]
    fn mid_troposphere_density() {
        let s = isa_sample(5_000.0);
        assert_abs_diff_eq!(s.temperature, 288.15 - 0.0065 * 5_000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.density, 0.736_116, epsilon = 5e-6);
    }

    #[test]
    fn pressure_is_continuous_at_the_tropopause() {
        let below = isa_sample(TROPOPAUSE_ALTITUDE - 1e-9);
        let at = isa_sample(TROPOPAUSE_ALTITUDE);
        let above = isa_sample(TROPOPAUSE_ALTITUDE + 1e-9);
        assert_relative_eq!(below.pressure, at.pressure, max_relative = 1e-10);
        assert_relative_eq!(above.pressure, at.pressure, max_relative = 1e-10);
        // Temperature is continuous too: the lapse profile lands exactly on
        // the stratospheric constant at 11 km.
        assert_abs_diff_eq!(at.temperature, STRATOSPHERE_TEMPERATURE, epsilon = 1e-9);
    }

    #[test]
    fn stratosphere_is_isothermal() {
        let a = isa_sample(12_000.0);
        let b = isa_sample(18_000.0);
        assert_eq!(a.temperature, STRATOSPHERE_TEMPERATURE);
        assert_eq!(b.temperature, STRATOSPHERE_TEMPERATURE);
        assert_eq!(a.speed_of_sound, b.speed_of_sound);
        assert!(b.pressure < a.pressure);
    }

    #[test]
    fn out_of_band_queries_clamp_and_flag() {
        let low = isa_sample(-2_000.0);
        let low_edge = isa_sample(MIN_ALTITUDE);
        assert!(low.clamped);
        assert!(!low_edge.clamped);
        assert_eq!(low.density, low_edge.density);

        let high = isa_sample(35_000.0);
        let high_edge = isa_sample(MAX_ALTITUDE);
        assert!(high.clamped);
        assert_eq!(high.pressure, high_edge.pressure);
        assert_eq!(high.temperature, high_edge.temperature);
    }

    #[test]
    fn density_and_pressure_decrease_with_altitude() {
        let mut prev = isa_sample(MIN_ALTITUDE);
        let mut alt = MIN_ALTITUDE + 100.0;
        while alt <= MAX_ALTITUDE {
            let s = isa_sample(alt);
            assert!(s.density < prev.density, "density not monotone at {alt} m");
            assert!(s.pressure < prev.pressure, "pressure not monotone at {alt} m");
            assert!(s.density > 0.0 && s.pressure > 0.0);
            prev = s;
            alt += 100.0;
        }
    }

    #[test]
    fn tropospheric_exponent_value() {
        // −g0/(L·R) with a negative lapse rate is the familiar positive
        // barometric exponent.
        let exponent = -STANDARD_GRAVITY / (LAPSE_RATE * GAS_CONSTANT_AIR);
        assert_abs_diff_eq!(exponent, 5.255_88, epsilon = 1e-5);
    }
}
