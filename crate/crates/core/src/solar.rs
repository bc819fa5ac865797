//! Solar geometry: declination, sunset hour angle, day length, and
//! extraterrestrial irradiation, plus the Angstrom-Prescott clearness model.
//!
//! All angle formulas are evaluated with degree arguments, matching the
//! source correlations; conversions are handled internally.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Solar constant in W/m^2.
pub const SOLAR_CONSTANT: f64 = 1367.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolarError {
    /// |tan(latitude) * tan(declination)| > 1: the sun never sets or never
    /// rises on that day at that latitude.
    #[error("polar day/night: no sunset at latitude {latitude} with declination {declination}")]
    PolarDayNight { latitude: f64, declination: f64 },
    /// All sunshine-ratio samples equal; the regression line is undefined.
    #[error("degenerate fit: all sunshine ratios equal")]
    DegenerateFit,
}

fn deg_to_rad(deg: f64) -> f64 {
    deg / 180.0 * std::f64::consts::PI
}

fn rad_to_deg(rad: f64) -> f64 {
    // Dividing by pi first keeps exact cases exact (acos(0) -> 90 degrees).
    rad / std::f64::consts::PI * 180.0
}

fn sin_deg(deg: f64) -> f64 {
    deg_to_rad(deg).sin()
}

fn cos_deg(deg: f64) -> f64 {
    deg_to_rad(deg).cos()
}

fn tan_deg(deg: f64) -> f64 {
    deg_to_rad(deg).tan()
}

/// Solar declination in degrees for a day of the year (1..365):
/// `23.45 sin(360 (284 + n) / 365)`.
pub fn declination(day_of_year: u32) -> f64 {
    assert!(
        (1..=365).contains(&day_of_year),
        "day of year must be in 1..365"
    );
    23.45 * sin_deg(360.0 * (284.0 + day_of_year as f64) / 365.0)
}

/// Sunset hour angle in degrees: `acos(-tan(phi) tan(delta))`.
pub fn sunset_hour_angle(latitude: f64, declination: f64) -> Result<f64, SolarError> {
    let x = -tan_deg(latitude) * tan_deg(declination);
    if !(-1.0..=1.0).contains(&x) {
        return Err(SolarError::PolarDayNight {
            latitude,
            declination,
        });
    }
    Ok(rad_to_deg(x.acos()))
}

/// Maximum possible sunshine duration in hours: `(2/15) omega_s`.
pub fn day_length_s0(sunset_angle_deg: f64) -> f64 {
    sunset_angle_deg * 2.0 / 15.0
}

/// Daily extraterrestrial irradiation on a horizontal surface in
/// J/(m^2 day). Declination and sunset hour angle are computed internally.
pub fn extraterrestrial_h0(latitude: f64, day_of_year: u32) -> Result<f64, SolarError> {
    let delta = declination(day_of_year);
    let omega = sunset_hour_angle(latitude, delta)?;
    let eccentricity = 1.0 + 0.033 * cos_deg(360.0 * day_of_year as f64 / 365.0);
    let geometric = geometric_factor(latitude, delta, omega);
    Ok(24.0 * 3.6e3 * SOLAR_CONSTANT / std::f64::consts::PI * eccentricity * geometric)
}

/// The bracketed geometry term of the irradiation formula.
fn geometric_factor(latitude: f64, declination: f64, sunset_angle_deg: f64) -> f64 {
    cos_deg(latitude) * cos_deg(declination) * sin_deg(sunset_angle_deg)
        + (std::f64::consts::PI * sunset_angle_deg / 180.0)
            * sin_deg(latitude)
            * sin_deg(declination)
}

/// Angstrom-Prescott clearness model `H/H0 = a + b (S/S0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngstromModel {
    pub a: f64,
    pub b: f64,
}

impl AngstromModel {
    pub fn predict(&self, s_ratio: f64) -> f64 {
        self.a + self.b * s_ratio
    }
}

/// Ordinary least-squares line fit of clearness against sunshine ratio.
pub fn angstrom_fit(s_ratios: &[f64], clearness: &[f64]) -> Result<AngstromModel, SolarError> {
    assert_eq!(s_ratios.len(), clearness.len(), "length mismatch");
    assert!(s_ratios.len() >= 2, "need at least two points");
    let n = s_ratios.len() as f64;
    let sx = s_ratios.iter().sum::<f64>() / n;
    let sy = clearness.iter().sum::<f64>() / n;
    let sxx: f64 = s_ratios.iter().map(|x| (x - sx) * (x - sx)).sum();
    if sxx == 0.0 {
        return Err(SolarError::DegenerateFit);
    }
    let sxy: f64 = s_ratios
        .iter()
        .zip(clearness.iter())
        .map(|(x, y)| (x - sx) * (y - sy))
        .sum();
    let b = sxy / sxx;
    Ok(AngstromModel { a: sy - b * sx, b })
}
