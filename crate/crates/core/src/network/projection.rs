use serde::{Deserialize, Serialize};

use crate::geometry::Point;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Equirectangular projection centered on a reference longitude/latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub lon0: f64,
    pub lat0: f64,
}

impl LocalProjection {
    pub fn new(lon0: f64, lat0: f64) -> Self {
        Self { lon0, lat0 }
    }

    /// Centered on the mean of the given `(lon, lat)` pairs.
    pub fn centered_on(coords: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for (lon, lat) in coords {
            sx += lon;
            sy += lat;
            n += 1;
        }
        if n == 0 {
            return Self::new(0.0, 0.0);
        }
        Self::new(sx / n as f64, sy / n as f64)
    }

    pub fn project(&self, lon: f64, lat: f64) -> Point {
        let k = self.lat0.to_radians().cos();
        Point::new(
            EARTH_RADIUS_M * (lon - self.lon0).to_radians() * k,
            EARTH_RADIUS_M * (lat - self.lat0).to_radians(),
        )
    }

    pub fn unproject(&self, p: &Point) -> (f64, f64) {
        let k = self.lat0.to_radians().cos();
        (
            self.lon0 + (p.x / (EARTH_RADIUS_M * k)).to_degrees(),
            self.lat0 + (p.y / EARTH_RADIUS_M).to_degrees(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_scales() {
        let proj = LocalProjection::new(116.4, 39.9);
        let p = proj.project(116.41, 39.91);
        let (lon, lat) = proj.unproject(&p);
        assert!((lon - 116.41).abs() < 1e-9 && (lat - 39.91).abs() < 1e-9);
        // 0.01 degree of latitude is about 1.11 km.
        assert!((p.y - 1111.95).abs() < 1.0);
        assert!(p.x < p.y);
    }
}
