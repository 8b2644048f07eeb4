//! Planar-array steering vectors, their angular derivatives, and the
//! separable 1-D sum machinery behind every inner product in the crate.
//!
//! The array is M x M with half-wavelength spacing and is centred at the
//! origin, so the element coordinate along each axis is `u = m - (M-1)/2`
//! in units of lambda/2 and the per-element phase toward direction cosine
//! `psi` is exactly `pi * u * psi`. Inner products between steering vectors
//! therefore factor into products of two M-term 1-D sums, which is what
//! makes banks of ~100 columns at M = 500 cheap to work with.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{direction_cosines, DirectionAngles};
use crate::scalar::{real, Real};
use crate::Complex;

/// Square planar array: `side` elements per edge, spaced `wavelength / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    pub side: usize,
    pub wavelength: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(side: usize, wavelength: T) -> Self {
        assert!(side >= 1, "array side must be at least 1");
        assert!(wavelength > T::zero(), "wavelength must be positive");
        Self { side, wavelength }
    }

    /// Total element count M^2.
    pub fn elements(&self) -> usize {
        self.side * self.side
    }

    /// Centred element offset along one axis, in units of lambda/2.
    pub fn offset(&self, m: usize) -> T {
        real::<T>(m as f64 - (self.side as f64 - 1.0) / 2.0)
    }

    /// Physical x-coordinate of column `m`, in meters.
    pub fn element_x(&self, m: usize) -> T {
        self.offset(m) * self.wavelength / real::<T>(2.0)
    }

    /// Physical y-coordinate of row `n`, in meters.
    pub fn element_y(&self, n: usize) -> T {
        self.offset(n) * self.wavelength / real::<T>(2.0)
    }
}

/// Dense array response toward one direction; length M^2, row-major over
/// (m, n), unit-modulus entries.
#[derive(Debug, Clone)]
pub struct SteeringVector<T: Real> {
    pub entries: DVector<Complex<T>>,
    pub source_angles: DirectionAngles<T>,
}

/// Elementwise analytic derivatives of a steering vector with respect to
/// the azimuth and zenith angles of its source direction.
#[derive(Debug, Clone)]
pub struct DerivativePair<T: Real> {
    pub d_azimuth: DVector<Complex<T>>,
    pub d_zenith: DVector<Complex<T>>,
}

fn unit_phasor<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Array response toward `angles`: entry (m, n) is
/// `exp(j pi (u_m psi_x + u_n psi_y))`.
pub fn steering_vector<T: Real>(
    geom: &ArrayGeometry<T>,
    angles: &DirectionAngles<T>,
) -> SteeringVector<T> {
    let (px, py) = direction_cosines(angles);
    let m = geom.side;
    let mut entries = DVector::zeros(m * m);
    for i in 0..m {
        let phx = T::pi() * geom.offset(i) * px;
        for j in 0..m {
            entries[i * m + j] = unit_phasor(phx + T::pi() * geom.offset(j) * py);
        }
    }
    SteeringVector {
        entries,
        source_angles: *angles,
    }
}

/// Per-axis chain-rule coefficients for the two angular derivatives:
/// `(d psi_x / d angle, d psi_y / d angle)` for azimuth and zenith.
pub fn derivative_coefficients<T: Real>(angles: &DirectionAngles<T>) -> [(T, T); 2] {
    let (sz, cz) = (angles.zenith.sin(), angles.zenith.cos());
    let (sa, ca) = (angles.azimuth.sin(), angles.azimuth.cos());
    [(-sz * sa, sz * ca), (cz * ca, cz * sa)]
}

/// Analytic derivatives of the steering vector: entry (m, n) of the
/// derivative with axis coefficients (a, b) is
/// `j pi (u_m a + u_n b)` times the steering entry.
pub fn steering_derivatives<T: Real>(
    geom: &ArrayGeometry<T>,
    angles: &DirectionAngles<T>,
) -> DerivativePair<T> {
    let e = steering_vector(geom, angles);
    let [(aa, ba), (az, bz)] = derivative_coefficients(angles);
    let m = geom.side;
    let mut d_azimuth = DVector::zeros(m * m);
    let mut d_zenith = DVector::zeros(m * m);
    for i in 0..m {
        let u = geom.offset(i);
        for j in 0..m {
            let v = geom.offset(j);
            let base = e.entries[i * m + j];
            let ja = Complex::new(T::zero(), T::pi() * (u * aa + v * ba));
            let jz = Complex::new(T::zero(), T::pi() * (u * az + v * bz));
            d_azimuth[i * m + j] = ja * base;
            d_zenith[i * m + j] = jz * base;
        }
    }
    DerivativePair {
        d_azimuth,
        d_zenith,
    }
}

/// Conjugate-transpose dot product `b^H a` by direct summation.
pub fn inner_product<T: Real>(a: &SteeringVector<T>, b: &SteeringVector<T>) -> Complex<T> {
    assert_eq!(a.entries.len(), b.entries.len(), "mismatched geometries");
    b.entries.dotc(&a.entries)
}

/// 1-D Dirichlet kernel `sum_m exp(j pi u_m d) = sin(M pi d / 2) / sin(pi d / 2)`,
/// real-valued thanks to the centred offsets.
pub fn axis_kernel<T: Real>(side: usize, d: T) -> T {
    let half = T::pi() * d / real::<T>(2.0);
    let denom = half.sin();
    let msf = real::<T>(side as f64);
    if denom.abs() < real::<T>(1e-12) {
        // limit at d -> 0 (and the aliased points d = +-2)
        msf * (msf * half).cos() / half.cos()
    } else {
        (msf * half).sin() / denom
    }
}

/// Closed-form `b^H a` for steering vectors toward direction cosines
/// `a = (ax, ay)` and `b = (bx, by)`: the separable product of two
/// 1-D Dirichlet kernels. Companion oracle to [`inner_product`].
pub fn inner_product_closed_form<T: Real>(
    side: usize,
    a: (T, T),
    b: (T, T),
) -> Complex<T> {
    let k = axis_kernel(side, a.0 - b.0) * axis_kernel(side, a.1 - b.1);
    Complex::new(k, T::zero())
}

/// Cross 1-D sums between two direction-cosine sets along one axis.
///
/// `s0[a][b] = sum_m exp(j pi u_m (right_b - left_a))`; `s1` and `s2`
/// carry one and two factors of `u_m` inside the sum and only exist when
/// derivative columns are needed.
#[derive(Debug, Clone)]
pub struct AxisSums<T: Real> {
    pub s0: DMatrix<Complex<T>>,
    pub s1: Option<DMatrix<Complex<T>>>,
    pub s2: Option<DMatrix<Complex<T>>>,
}

/// Phase matrix with column j holding the 1-D steering factor of `psis[j]`.
pub fn axis_phase_matrix<T: Real>(side: usize, psis: &[T]) -> DMatrix<Complex<T>> {
    let mut out = DMatrix::zeros(side, psis.len());
    for (j, &p) in psis.iter().enumerate() {
        for i in 0..side {
            let u = real::<T>(i as f64 - (side as f64 - 1.0) / 2.0);
            out[(i, j)] = unit_phasor(T::pi() * u * p);
        }
    }
    out
}

/// Copy of `mat` with row `m` scaled by the centred offset `u_m`.
pub fn moment_scaled<T: Real>(side: usize, mat: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let mut out = mat.clone();
    for i in 0..side {
        let u = Complex::new(real::<T>(i as f64 - (side as f64 - 1.0) / 2.0), T::zero());
        for j in 0..mat.ncols() {
            out[(i, j)] *= u;
        }
    }
    out
}

/// All cross sums between the `left` and `right` cosine sets, up to the
/// second moment when `with_moments` is set.
pub fn axis_sums<T: Real>(
    side: usize,
    left: &[T],
    right: &[T],
    with_moments: bool,
) -> AxisSums<T> {
    let ea = axis_phase_matrix(side, left);
    let eb = axis_phase_matrix(side, right);
    let s0 = ea.ad_mul(&eb);
    if !with_moments {
        return AxisSums {
            s0,
            s1: None,
            s2: None,
        };
    }
    let ub = moment_scaled(side, &eb);
    let ua = moment_scaled(side, &ea);
    let s1 = ea.ad_mul(&ub);
    let s2 = ua.ad_mul(&ub);
    AxisSums {
        s0,
        s1: Some(s1),
        s2: Some(s2),
    }
}
