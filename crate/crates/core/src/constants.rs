//! Physical constants (CODATA 2018, SI) used throughout the crate.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Joules per electron-volt.
pub const JOULE_PER_EV: f64 = ELEMENTARY_CHARGE;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Integral of a unit-peak Gaussian over time in units of its FWHM:
/// sqrt(pi / (4 ln 2)).
pub const GAUSSIAN_AREA_PER_FWHM: f64 = 1.064_467_019_431_226_2;
