//! Cell layout, user placement, and the mapping from ground positions to
//! angles and direction cosines as seen from the overhead array.

use rand::Rng;
use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("tier count must be at least 1")]
    NoTiers,
}

/// A point on the ground, expressed relative to the array centre.
///
/// `depth` is the vertical distance below the array, stored as a
/// positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPosition<T> {
    pub x: T,
    pub y: T,
    pub depth: T,
}

impl<T: Real> GroundPosition<T> {
    pub fn new(x: T, y: T, depth: T) -> Self {
        assert!(depth > T::zero(), "depth must be positive");
        Self { x, y, depth }
    }

    /// Slant distance from the array centre to this point.
    pub fn slant_distance(&self) -> T {
        (self.x * self.x + self.y * self.y + self.depth * self.depth).sqrt()
    }

    /// Horizontal distance from the point directly below the array.
    pub fn ground_distance(&self) -> T {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Zenith/azimuth pair of a ground point as seen from the array.
///
/// Zenith is measured from the downward vertical, so it lies in `[0, pi/2)`;
/// azimuth is `atan2(y, x)` in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionAngles<T> {
    pub zenith: T,
    pub azimuth: T,
}

/// Zenith and azimuth of `pos`.
///
/// The depth enters through its magnitude, keeping the zenith non-negative.
/// The azimuth of the nadir point (`x = y = 0`) is defined as 0.
pub fn angles_of<T: Real>(pos: &GroundPosition<T>) -> DirectionAngles<T> {
    let rho = pos.ground_distance();
    let zenith = (rho / pos.depth).atan();
    let azimuth = if rho == T::zero() {
        T::zero()
    } else {
        pos.y.atan2(pos.x)
    };
    DirectionAngles { zenith, azimuth }
}

/// Direction cosines `(psi_x, psi_y) = sin(zenith) * (cos(azimuth), sin(azimuth))`.
pub fn direction_cosines<T: Real>(angles: &DirectionAngles<T>) -> (T, T) {
    let s = angles.zenith.sin();
    (s * angles.azimuth.cos(), s * angles.azimuth.sin())
}

/// Co-channel interference layout: the micro-cell of interest plus `tiers`
/// rings of interfering micro-cells at multiples of the reuse distance.
#[derive(Debug, Clone)]
pub struct CellLayout<T> {
    pub macro_radius: T,
    pub micro_radius: T,
    pub reuse_distance: T,
    pub tiers: usize,
    pub mci_center: GroundPosition<T>,
    pub interferer_centers: Vec<GroundPosition<T>>,
}

impl<T: Real> CellLayout<T> {
    /// Number of interfering cells, `3 J (J + 1)` for `J` tiers.
    pub fn interferer_count(&self) -> usize {
        self.interferer_centers.len()
    }
}

/// Build the co-channel layout around `mci_center`.
///
/// Tier `k` holds `6k` cell centres equally spaced in azimuth on the circle
/// of radius `k * 4r` around the MCI centre.
pub fn build_layout<T: Real>(
    macro_radius: T,
    micro_radius: T,
    tiers: usize,
    mci_center: GroundPosition<T>,
) -> Result<CellLayout<T>, GeometryError> {
    if macro_radius <= T::zero() {
        return Err(GeometryError::NonPositive {
            name: "macro_radius",
            value: macro_radius.to_f64().unwrap_or(f64::NAN),
        });
    }
    if micro_radius <= T::zero() {
        return Err(GeometryError::NonPositive {
            name: "micro_radius",
            value: micro_radius.to_f64().unwrap_or(f64::NAN),
        });
    }
    if tiers == 0 {
        return Err(GeometryError::NoTiers);
    }
    let reuse = real::<T>(4.0) * micro_radius;
    let mut centers = Vec::with_capacity(3 * tiers * (tiers + 1));
    for k in 1..=tiers {
        let n = 6 * k;
        let ring = real::<T>(k as f64) * reuse;
        for l in 0..n {
            let ang = T::two_pi() * real::<T>(l as f64) / real::<T>(n as f64);
            centers.push(GroundPosition::new(
                mci_center.x + ring * ang.cos(),
                mci_center.y + ring * ang.sin(),
                mci_center.depth,
            ));
        }
    }
    Ok(CellLayout {
        macro_radius,
        micro_radius,
        reuse_distance: reuse,
        tiers,
        mci_center,
        interferer_centers: centers,
    })
}

/// Draw a point uniformly over the disc of `radius` around `center`.
///
/// The radial coordinate is `radius * sqrt(u)` so the density is uniform in
/// area; the depth is copied from the centre.
pub fn sample_uniform_in_disc<T: Real, R: Rng + ?Sized>(
    center: &GroundPosition<T>,
    radius: T,
    rng: &mut R,
) -> GroundPosition<T> {
    let u = T::unit_uniform(rng);
    let ang = T::two_pi() * T::unit_uniform(rng);
    let rad = radius * u.sqrt();
    GroundPosition::new(
        center.x + rad * ang.cos(),
        center.y + rad * ang.sin(),
        center.depth,
    )
}
