//! Physical constants shared across the simulator.

/// Mean Earth radius [km].
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Standard gravitational parameter of Earth [km^3/s^2].
pub const MU_EARTH_KM3_S2: f64 = 398600.4418;

/// Speed of light in vacuum [km/s].
pub const SPEED_OF_LIGHT_KM_S: f64 = 299792.458;

/// Earth sidereal rotation rate [rad/s].
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
