//! Great-circle geometry on a spherical Earth.
//!
//! Every distance in the crate is a haversine distance on a sphere whose
//! radius is [`METERS_PER_RADIAN`]. The same constant converts clustering
//! radii from meters into the radian-valued epsilon DBSCAN works with.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius, i.e. meters of arc per radian of central angle.
pub const METERS_PER_RADIAN: f64 = 6_371_008.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("radius must be non-negative, got {0} m")]
    NegativeRadius(f64),
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    OutOfRange { lat: f64, lon: f64 },
}

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    /// Builds a point, rejecting non-finite or out-of-range coordinates.
    pub fn checked(lat: f64, lon: f64) -> Result<Self, GeoError> {
        let p = GeoPoint { lat, lon };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(GeoError::OutOfRange { lat, lon })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && self.lat.abs() <= 90.0
            && self.lon.abs() <= 180.0
    }

    /// Unit vector on the sphere, used by the clustering grid index.
    pub(crate) fn unit_vector(&self) -> [f64; 3] {
        let (lat, lon) = (self.lat.to_radians(), self.lon.to_radians());
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        [clat * clon, clat * slon, slat]
    }
}

/// Central angle between two points, in radians.
pub fn central_angle(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    // abs() keeps the computation bit-identical under argument swap.
    let half_dlat = ((b.lat - a.lat).abs().to_radians() / 2.0).sin();
    let half_dlon = ((b.lon - a.lon).abs().to_radians() / 2.0).sin();
    let h = half_dlat * half_dlat + (lat1.cos() * lat2.cos()) * half_dlon * half_dlon;
    2.0 * h.sqrt().min(1.0).asin()
}

/// Haversine distance in meters.
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    central_angle(a, b) * METERS_PER_RADIAN
}

/// Converts an arc length in meters into the equivalent central angle.
pub fn meters_to_radians(radius: f64) -> Result<f64, GeoError> {
    if radius < 0.0 || radius.is_nan() {
        return Err(GeoError::NegativeRadius(radius));
    }
    Ok(radius / METERS_PER_RADIAN)
}

pub fn radians_to_meters(angle: f64) -> f64 {
    angle * METERS_PER_RADIAN
}

/// Arithmetic mean of coordinates. Adequate for city-scale point sets that
/// do not straddle the antimeridian.
pub fn centroid(points: impl IntoIterator<Item = GeoPoint>) -> Option<GeoPoint> {
    let mut n = 0usize;
    let (mut lat, mut lon) = (0.0, 0.0);
    for p in points {
        lat += p.lat;
        lon += p.lon;
        n += 1;
    }
    (n > 0).then(|| GeoPoint::new(lat / n as f64, lon / n as f64))
}
