//! Walker Delta constellations, two-body propagation, and ground-station
//! visibility.
//!
//! All satellites share one circular shell (altitude and inclination), spread
//! over `P` evenly spaced planes of `Q` satellites with inter-plane phasing
//! `F`. Positions are expressed in an Earth-centered inertial frame whose
//! x-axis meets the Greenwich meridian at the epoch `t = 0`.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::constants::{EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S, MU_EARTH_KM3_S2};
use crate::grid::TimeGrid;
use crate::{Error, Result};

/// Walker Delta parameters `inclination: total/planes/phasing` plus the shell
/// altitude and the visibility elevation mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkerParameters {
    pub inclination_deg: f64,
    pub total_sats: usize,
    pub planes: usize,
    pub phasing: usize,
    pub altitude_km: f64,
    pub min_elevation_deg: f64,
}

impl WalkerParameters {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidParameter(m));
        if self.planes == 0 {
            return err("planes: must be at least 1".into());
        }
        if self.total_sats == 0 || self.total_sats % self.planes != 0 {
            return err(format!(
                "total_sats: {} is not a positive multiple of planes ({})",
                self.total_sats, self.planes
            ));
        }
        if self.phasing >= self.planes {
            return err(format!(
                "phasing: F = {} must satisfy 0 <= F < planes ({})",
                self.phasing, self.planes
            ));
        }
        if !(self.inclination_deg > 0.0 && self.inclination_deg <= 90.0) {
            return err(format!(
                "inclination_deg: {} outside (0, 90]",
                self.inclination_deg
            ));
        }
        if !(self.altitude_km > 0.0) {
            return err(format!("altitude_km: {} must be positive", self.altitude_km));
        }
        if !(self.min_elevation_deg >= 0.0 && self.min_elevation_deg < 90.0) {
            return err(format!(
                "min_elevation_deg: {} outside [0, 90)",
                self.min_elevation_deg
            ));
        }
        Ok(())
    }

    /// Satellites per plane (`Q`).
    pub fn sats_per_plane(&self) -> usize {
        self.total_sats / self.planes
    }

    pub fn semi_major_axis_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    pub fn mean_motion_rad_s(&self) -> f64 {
        (MU_EARTH_KM3_S2 / self.semi_major_axis_km().powi(3)).sqrt()
    }

    pub fn orbital_period_s(&self) -> f64 {
        TAU / self.mean_motion_rad_s()
    }
}

/// A satellite addressed by `(plane, slot)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatelliteId {
    pub plane: usize,
    pub slot: usize,
}

impl SatelliteId {
    pub fn new(plane: usize, slot: usize) -> Self {
        Self { plane, slot }
    }

    /// Flat index `plane * Q + slot`.
    pub fn flat(&self, sats_per_plane: usize) -> usize {
        self.plane * sats_per_plane + self.slot
    }

    pub fn from_flat(index: usize, sats_per_plane: usize) -> Self {
        Self {
            plane: index / sats_per_plane,
            slot: index % sats_per_plane,
        }
    }
}

impl std::fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.plane, self.slot)
    }
}

/// Instantaneous orbital state of one satellite.
#[derive(Clone, Copy, Debug)]
pub struct StateVector {
    /// Inertial position [km].
    pub position_km: [f64; 3],
    /// Argument of latitude, normalized to `[0, 2*pi)`.
    pub argument_of_latitude_rad: f64,
}

/// A named point on the Earth sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStation {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl GroundStation {
    pub fn new(name: impl Into<String>, latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::InvalidParameter(format!(
                "latitude {latitude_deg} outside [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&longitude_deg) {
            return Err(Error::InvalidParameter(format!(
                "longitude {longitude_deg} outside [-180, 180]"
            )));
        }
        Ok(Self {
            name: name.into(),
            latitude_deg,
            longitude_deg,
        })
    }
}

/// Direction of motion: ascending moves south to north.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Ascending => write!(f, "ascending"),
            Direction::Descending => write!(f, "descending"),
        }
    }
}

/// A maximal half-open interval during which one satellite stays above the
/// elevation mask of a ground station, resolved on the sampling grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityWindow {
    pub satellite: SatelliteId,
    pub start_s: f64,
    pub end_s: f64,
    pub direction_at_start: Direction,
}

/// Grid-index form of a visibility window, used by the selection algorithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct WindowRun {
    pub sat_flat: usize,
    pub start: usize,
    pub end: usize,
    pub ascending_at_start: bool,
}

#[derive(Clone, Copy)]
struct PlanePhase {
    raan: f64,
    u0: f64,
    cos_raan: f64,
    sin_raan: f64,
}

/// A fully built constellation: per-satellite orbital elements plus cached
/// trigonometry for the propagation hot path.
#[derive(Clone)]
pub struct Constellation {
    params: WalkerParameters,
    orbits: Vec<PlanePhase>,
    cos_incl: f64,
    sin_incl: f64,
    mean_motion: f64,
    semi_major_axis: f64,
}

impl Constellation {
    /// Build the constellation. Satellite `(p, q)` gets RAAN `2*pi*p/P` and
    /// initial argument of latitude `2*pi*q/Q + 2*pi*F*p/(P*Q)`.
    pub fn build(params: WalkerParameters) -> Result<Self> {
        params.validate()?;
        let planes = params.planes;
        let per_plane = params.sats_per_plane();
        let total = params.total_sats;
        let mut orbits = Vec::with_capacity(total);
        for p in 0..planes {
            let raan = TAU * p as f64 / planes as f64;
            let (sin_raan, cos_raan) = raan.sin_cos();
            for q in 0..per_plane {
                let u0 = (TAU * q as f64 / per_plane as f64
                    + TAU * (params.phasing * p) as f64 / total as f64)
                    .rem_euclid(TAU);
                orbits.push(PlanePhase {
                    raan,
                    u0,
                    cos_raan,
                    sin_raan,
                });
            }
        }
        let incl = params.inclination_deg.to_radians();
        Ok(Self {
            params,
            orbits,
            cos_incl: incl.cos(),
            sin_incl: incl.sin(),
            mean_motion: params.mean_motion_rad_s(),
            semi_major_axis: params.semi_major_axis_km(),
        })
    }

    pub fn params(&self) -> &WalkerParameters {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn satellites(&self) -> impl Iterator<Item = SatelliteId> + '_ {
        let q = self.params.sats_per_plane();
        (0..self.orbits.len()).map(move |i| SatelliteId::from_flat(i, q))
    }

    pub fn raan_rad(&self, sat: SatelliteId) -> f64 {
        self.orbits[self.flat(sat)].raan
    }

    pub fn initial_argument_of_latitude_rad(&self, sat: SatelliteId) -> f64 {
        self.orbits[self.flat(sat)].u0
    }

    pub fn mean_motion_rad_s(&self) -> f64 {
        self.mean_motion
    }

    pub fn semi_major_axis_km(&self) -> f64 {
        self.semi_major_axis
    }

    pub fn orbital_period_s(&self) -> f64 {
        TAU / self.mean_motion
    }

    fn flat(&self, sat: SatelliteId) -> usize {
        sat.flat(self.params.sats_per_plane())
    }

    pub fn argument_of_latitude_rad(&self, sat: SatelliteId, t: f64) -> f64 {
        self.argument_of_latitude_flat(self.flat(sat), t)
    }

    fn argument_of_latitude_flat(&self, flat: usize, t: f64) -> f64 {
        (self.orbits[flat].u0 + self.mean_motion * t).rem_euclid(TAU)
    }

    /// Two-body propagation of a circular orbit.
    pub fn propagate(&self, sat: SatelliteId, t: f64) -> StateVector {
        let flat = self.flat(sat);
        let u = self.argument_of_latitude_flat(flat, t);
        StateVector {
            position_km: self.position_for_u(flat, u),
            argument_of_latitude_rad: u,
        }
    }

    pub(crate) fn position_flat_km(&self, flat: usize, t: f64) -> [f64; 3] {
        let u = self.orbits[flat].u0 + self.mean_motion * t;
        self.position_for_u(flat, u)
    }

    fn position_for_u(&self, flat: usize, u: f64) -> [f64; 3] {
        let o = &self.orbits[flat];
        let (su, cu) = u.sin_cos();
        let xo = self.semi_major_axis * cu;
        let yo = self.semi_major_axis * su;
        [
            xo * o.cos_raan - yo * self.cos_incl * o.sin_raan,
            xo * o.sin_raan + yo * self.cos_incl * o.cos_raan,
            yo * self.sin_incl,
        ]
    }

    /// Fill `out` with the positions of all satellites at `t`.
    pub(crate) fn positions_at(&self, t: f64, out: &mut Vec<[f64; 3]>) {
        out.clear();
        out.extend((0..self.orbits.len()).map(|i| self.position_flat_km(i, t)));
    }

    /// True while the satellite moves south to north. The poles themselves
    /// (argument of latitude exactly pi/2 or 3*pi/2) count as descending.
    pub fn is_ascending(&self, sat: SatelliteId, t: f64) -> bool {
        let u = self.argument_of_latitude_rad(sat, t);
        u < FRAC_PI_2 || u > 3.0 * FRAC_PI_2
    }

    pub(crate) fn is_ascending_flat(&self, flat: usize, t: f64) -> bool {
        let u = self.argument_of_latitude_flat(flat, t);
        u < FRAC_PI_2 || u > 3.0 * FRAC_PI_2
    }

    /// Elevation of `sat` above the horizon of `gs`, in degrees. Negative
    /// below the horizon.
    pub fn elevation_deg(&self, gs: &GroundStation, sat: SatelliteId, t: f64) -> f64 {
        let g = ground_position_km(gs, t);
        let s = self.propagate(sat, t).position_km;
        elevation_from_positions_deg(&g, &s)
    }

    /// Angular radius of the visibility cone: a satellite is above the
    /// elevation mask exactly when its central angle from the station stays
    /// within this bound.
    pub fn visibility_cone_rad(&self) -> f64 {
        let el = self.params.min_elevation_deg.to_radians();
        (EARTH_RADIUS_KM / self.semi_major_axis * el.cos()).acos() - el
    }

    /// Dot-product threshold equivalent to the elevation mask for positions
    /// on this shell: visible iff `sat . ground >= threshold`.
    pub(crate) fn visibility_dot_threshold(&self) -> f64 {
        self.semi_major_axis * EARTH_RADIUS_KM * self.visibility_cone_rad().cos()
    }

    /// Visibility test consistent with window construction.
    pub(crate) fn is_visible(&self, gs: &GroundStation, sat: SatelliteId, t: f64) -> bool {
        let g = ground_position_km(gs, t);
        let s = self.position_flat_km(self.flat(sat), t);
        visible_from(&g, &s, self.visibility_dot_threshold())
    }

    /// Maximal runs of sampled visibility for every satellite, sorted by
    /// `(satellite, start)` and clipped to the horizon.
    pub fn visibility_windows(&self, gs: &GroundStation, grid: &TimeGrid) -> Vec<VisibilityWindow> {
        self.visibility_runs(gs, grid)
            .into_iter()
            .map(|r| VisibilityWindow {
                satellite: SatelliteId::from_flat(r.sat_flat, self.params.sats_per_plane()),
                start_s: grid.time(r.start),
                end_s: grid.time(r.end),
                direction_at_start: if r.ascending_at_start {
                    Direction::Ascending
                } else {
                    Direction::Descending
                },
            })
            .collect()
    }

    pub(crate) fn visibility_runs(&self, gs: &GroundStation, grid: &TimeGrid) -> Vec<WindowRun> {
        let threshold = self.visibility_dot_threshold();
        let ground: Vec<[f64; 3]> = grid.times().map(|(_, t)| ground_position_km(gs, t)).collect();
        // A visible satellite cannot leave the station's latitude band, so
        // most samples are rejected on the z coordinate alone.
        let cone = self.visibility_cone_rad();
        let lat = gs.latitude_deg.to_radians();
        let z_min = self.semi_major_axis * (lat - cone).max(-FRAC_PI_2).sin();
        let z_max = self.semi_major_axis * (lat + cone).min(FRAC_PI_2).sin();
        let mut runs = Vec::new();
        for flat in 0..self.orbits.len() {
            let o = self.orbits[flat];
            let mut open: Option<(usize, bool)> = None;
            for (k, t) in grid.times() {
                let u = o.u0 + self.mean_motion * t;
                let (su, cu) = u.sin_cos();
                let z = self.semi_major_axis * su * self.sin_incl;
                let visible = z_min <= z && z <= z_max && {
                    let xo = self.semi_major_axis * cu;
                    let yo = self.semi_major_axis * su;
                    let g = &ground[k];
                    let x = xo * o.cos_raan - yo * self.cos_incl * o.sin_raan;
                    let y = xo * o.sin_raan + yo * self.cos_incl * o.cos_raan;
                    x * g[0] + y * g[1] + z * g[2] >= threshold
                };
                if visible {
                    if open.is_none() {
                        open = Some((k, self.is_ascending_flat(flat, t)));
                    }
                } else if let Some((start, asc)) = open.take() {
                    runs.push(WindowRun {
                        sat_flat: flat,
                        start,
                        end: k,
                        ascending_at_start: asc,
                    });
                }
            }
            if let Some((start, asc)) = open {
                runs.push(WindowRun {
                    sat_flat: flat,
                    start,
                    end: grid.steps(),
                    ascending_at_start: asc,
                });
            }
        }
        runs
    }
}

/// Inertial position of a ground station [km]. The Greenwich meridian is
/// aligned with the inertial x-axis at `t = 0`.
pub fn ground_position_km(gs: &GroundStation, t: f64) -> [f64; 3] {
    let lat = gs.latitude_deg.to_radians();
    let angle = gs.longitude_deg.to_radians() + EARTH_ROTATION_RAD_S * t;
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_ang, cos_ang) = angle.sin_cos();
    [
        EARTH_RADIUS_KM * cos_lat * cos_ang,
        EARTH_RADIUS_KM * cos_lat * sin_ang,
        EARTH_RADIUS_KM * sin_lat,
    ]
}

/// Elevation in degrees of a target at `sat` seen from the surface point `g`.
pub(crate) fn elevation_from_positions_deg(g: &[f64; 3], sat: &[f64; 3]) -> f64 {
    let d = [sat[0] - g[0], sat[1] - g[1], sat[2] - g[2]];
    let g_norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    let d_norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let sin_el = (g[0] * d[0] + g[1] * d[1] + g[2] * d[2]) / (g_norm * d_norm);
    sin_el.clamp(-1.0, 1.0).asin().to_degrees()
}

/// Mask test `elevation >= min_elevation` as a single dot product against a
/// precomputed threshold (see `Constellation::visibility_dot_threshold`).
#[inline]
pub(crate) fn visible_from(g: &[f64; 3], sat: &[f64; 3], dot_threshold: f64) -> bool {
    sat[0] * g[0] + sat[1] * g[1] + sat[2] * g[2] >= dot_threshold
}

/// Great-circle distance on the mean Earth sphere [km].
pub fn great_circle_distance_km(a: &GroundStation, b: &GroundStation) -> f64 {
    let lat_a = a.latitude_deg.to_radians();
    let lat_b = b.latitude_deg.to_radians();
    let d_lat = lat_b - lat_a;
    let d_lon = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (d_lat / 2.0).sin().powi(2)
        + lat_a.cos() * lat_b.cos() * (d_lon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}
