//! The three position-only precoders: null steering (NSB), null steering
//! with derivative constraints (NSB-D), and the minimum-power
//! distortionless design (MPDRB).
//!
//! None of them ever sees a channel realization; everything is a function
//! of the bank of steering vectors (and, for NSB-D, their angular
//! derivatives). Weights are kept in coefficient form over the bank
//! columns, so all inner products reduce to Gram-matrix algebra built from
//! separable 1-D axis sums; the dense length-M^2 vector is materialized on
//! demand. One Hermitian factorization of the shared Gram matrix yields
//! the weights of every beam at once via the leave-one-out identity
//! `beta_i = G^-1 delta_i / (G^-1)_ii`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::array::{
    axis_phase_matrix, axis_sums, derivative_coefficients, moment_scaled, steering_derivatives,
    steering_vector, ArrayGeometry, AxisSums,
};
use crate::geometry::DirectionAngles;
use crate::scalar::{real, Real};
use crate::Complex;

/// Relative eigenvalue cutoff below which a Gram direction is treated as
/// numerically rank-deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Gram condition number beyond which the scenario is rejected instead of
/// producing huge weights.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Nsb,
    NsbD,
    Mpdrb,
}

impl std::fmt::Display for Design {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Design::Nsb => "nsb",
            Design::NsbD => "nsb-d",
            Design::Mpdrb => "mpdrb",
        })
    }
}

#[derive(Debug, Error)]
pub enum BeamformError {
    /// Two or more users sit in (numerically) coincident directions; the
    /// caller may merge or perturb them.
    #[error("degenerate user directions: gram condition {condition:.3e} exceeds limit")]
    DegenerateDirections { condition: f64 },
}

/// Bank of steering columns for N users (index 0 = served user), with the
/// derivative columns appended when requested. Column order is all
/// steering vectors, then all azimuth derivatives, then all zenith
/// derivatives.
#[derive(Debug, Clone)]
pub struct SteeringBank<T: Real> {
    pub geom: ArrayGeometry<T>,
    pub angles: Vec<DirectionAngles<T>>,
    deriv: Option<Vec<[(T, T); 2]>>,
    phases_x: DMatrix<Complex<T>>,
    phases_y: DMatrix<Complex<T>>,
    phases_x_u: Option<DMatrix<Complex<T>>>,
    phases_y_u: Option<DMatrix<Complex<T>>>,
    gram_steer: DMatrix<Complex<T>>,
    gram_full: Option<DMatrix<Complex<T>>>,
}

impl<T: Real> SteeringBank<T> {
    pub fn new(
        geom: ArrayGeometry<T>,
        angles: &[DirectionAngles<T>],
        with_derivatives: bool,
    ) -> Self {
        assert!(!angles.is_empty(), "bank needs at least one user");
        let n = angles.len();
        let mut psi_x = Vec::with_capacity(n);
        let mut psi_y = Vec::with_capacity(n);
        for a in angles {
            let (px, py) = crate::geometry::direction_cosines(a);
            psi_x.push(px);
            psi_y.push(py);
        }
        let sums_x = axis_sums(geom.side, &psi_x, &psi_x, with_derivatives);
        let sums_y = axis_sums(geom.side, &psi_y, &psi_y, with_derivatives);
        let gram_steer = sums_x.s0.component_mul(&sums_y.s0);
        let (deriv, gram_full) = if with_derivatives {
            let coeffs: Vec<_> = angles.iter().map(derivative_coefficients).collect();
            let full = build_full_gram(&sums_x, &sums_y, &coeffs);
            (Some(coeffs), Some(full))
        } else {
            (None, None)
        };
        let phases_x = axis_phase_matrix(geom.side, &psi_x);
        let phases_y = axis_phase_matrix(geom.side, &psi_y);
        let (phases_x_u, phases_y_u) = if with_derivatives {
            (
                Some(moment_scaled(geom.side, &phases_x)),
                Some(moment_scaled(geom.side, &phases_y)),
            )
        } else {
            (None, None)
        };
        Self {
            geom,
            angles: angles.to_vec(),
            deriv,
            phases_x,
            phases_y,
            phases_x_u,
            phases_y_u,
            gram_steer,
            gram_full,
        }
    }

    /// Number of users in the bank (served user plus interferers).
    pub fn users(&self) -> usize {
        self.angles.len()
    }

    /// Total column count: N without derivatives, 3N with.
    pub fn columns(&self) -> usize {
        if self.deriv.is_some() {
            3 * self.users()
        } else {
            self.users()
        }
    }

    pub fn has_derivatives(&self) -> bool {
        self.deriv.is_some()
    }

    /// Gram matrix of the steering columns only.
    pub fn steering_gram(&self) -> &DMatrix<Complex<T>> {
        &self.gram_steer
    }

    /// Probe row against every bank column: entry k is `e(phi)^H c_k` for
    /// the direction with cosines `(phi_x, phi_y)`. Contracting this row
    /// with a coefficient vector gives `e(phi)^H w` without ever touching a
    /// length-M^2 vector.
    pub fn probe_row(&self, phi_x: T, phi_y: T) -> DVector<Complex<T>> {
        let ex = axis_phase_matrix(self.geom.side, &[phi_x]);
        let ey = axis_phase_matrix(self.geom.side, &[phi_y]);
        let s0x = ex.ad_mul(&self.phases_x);
        let s0y = ey.ad_mul(&self.phases_y);
        let n = self.users();
        let mut row = DVector::zeros(self.columns());
        for j in 0..n {
            row[j] = s0x[(0, j)] * s0y[(0, j)];
        }
        if let Some(coeffs) = &self.deriv {
            let s1x = ex.ad_mul(self.phases_x_u.as_ref().unwrap());
            let s1y = ey.ad_mul(self.phases_y_u.as_ref().unwrap());
            let jpi = Complex::new(T::zero(), T::pi());
            for j in 0..n {
                let mx = s1x[(0, j)] * s0y[(0, j)];
                let my = s0x[(0, j)] * s1y[(0, j)];
                let [(aa, ba), (az, bz)] = coeffs[j];
                row[n + j] = jpi * (mx.scale(aa) + my.scale(ba));
                row[2 * n + j] = jpi * (mx.scale(az) + my.scale(bz));
            }
        }
        row
    }

    /// Probe row toward a user direction given by angles.
    pub fn probe_row_at(&self, angles: &DirectionAngles<T>) -> DVector<Complex<T>> {
        let (px, py) = crate::geometry::direction_cosines(angles);
        self.probe_row(px, py)
    }

    /// Dense bank column (steering or derivative vector), length M^2.
    pub fn dense_column(&self, k: usize) -> DVector<Complex<T>> {
        let n = self.users();
        if k < n {
            steering_vector(&self.geom, &self.angles[k]).entries
        } else {
            let pair = steering_derivatives(&self.geom, &self.angles[k % n]);
            if k < 2 * n {
                pair.d_azimuth
            } else {
                pair.d_zenith
            }
        }
    }
}

fn build_full_gram<T: Real>(
    sx: &AxisSums<T>,
    sy: &AxisSums<T>,
    coeffs: &[[(T, T); 2]],
) -> DMatrix<Complex<T>> {
    let n = coeffs.len();
    let s0x = &sx.s0;
    let s1x = sx.s1.as_ref().unwrap();
    let s2x = sx.s2.as_ref().unwrap();
    let s0y = &sy.s0;
    let s1y = sy.s1.as_ref().unwrap();
    let s2y = sy.s2.as_ref().unwrap();
    let jpi = Complex::new(T::zero(), T::pi());
    let pi2 = T::pi() * T::pi();
    let coeff = |j: usize, kind: usize| coeffs[j][kind];

    let mut g = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = s0x[(i, j)] * s0y[(i, j)];
        }
    }
    // steering row i against derivative column j of each kind:
    // e_i^H dcol_j = j pi (p_j S1x S0y + q_j S0x S1y)
    for kind in 0..2 {
        for i in 0..n {
            for j in 0..n {
                let (p, q) = coeff(j, kind);
                let v = jpi
                    * ((s1x[(i, j)] * s0y[(i, j)]).scale(p)
                        + (s0x[(i, j)] * s1y[(i, j)]).scale(q));
                g[(i, (1 + kind) * n + j)] = v;
                g[((1 + kind) * n + j, i)] = v.conj();
            }
        }
    }
    // derivative against derivative:
    // dcol_i^H dcol_j = pi^2 (p_i p_j S2x S0y + (p_i q_j + q_i p_j) S1x S1y + q_i q_j S0x S2y)
    for ka in 0..2 {
        for kb in ka..2 {
            for i in 0..n {
                for j in 0..n {
                    let (pa, qa) = coeff(i, ka);
                    let (pb, qb) = coeff(j, kb);
                    let v = ((s2x[(i, j)] * s0y[(i, j)]).scale(pa * pb)
                        + (s1x[(i, j)] * s1y[(i, j)]).scale(pa * qb + qa * pb)
                        + (s0x[(i, j)] * s2y[(i, j)]).scale(qa * qb))
                    .scale(pi2);
                    g[((1 + ka) * n + i, (1 + kb) * n + j)] = v;
                    if ka != kb {
                        g[((1 + kb) * n + j, (1 + ka) * n + i)] = v.conj();
                    }
                }
            }
        }
    }
    g
}

/// Beamformer in coefficient form: the dense weight vector is
/// `sum_k coefficients[k] * column_k` over the bank columns.
#[derive(Debug, Clone)]
pub struct BeamformerWeights<T: Real> {
    pub coefficients: DVector<Complex<T>>,
    pub design: Design,
    pub target_index: usize,
    /// Retained rank of the power matrix (MPDRB only).
    pub effective_rank: Option<usize>,
}

impl<T: Real> BeamformerWeights<T> {
    /// Materialize the dense length-M^2 weight vector.
    pub fn dense(&self, bank: &SteeringBank<T>) -> DVector<Complex<T>> {
        let m2 = bank.geom.elements();
        let mut out = DVector::zeros(m2);
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.norm_sqr() == T::zero() {
                continue;
            }
            out += bank.dense_column(k).scale_complex(*c);
        }
        out
    }
}

trait ScaleComplex<T: Real> {
    fn scale_complex(self, c: Complex<T>) -> Self;
}

impl<T: Real> ScaleComplex<T> for DVector<Complex<T>> {
    fn scale_complex(mut self, c: Complex<T>) -> Self {
        for z in self.iter_mut() {
            *z *= c;
        }
        self
    }
}

/// Hermitian inverse with a Cholesky fast path and a rank-checked
/// eigendecomposition fallback.
fn invert_hermitian<T: Real>(
    g: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>, BeamformError> {
    if let Some(chol) = nalgebra::Cholesky::new(g.clone()) {
        return Ok(chol.inverse());
    }
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b));
    let min = eig.eigenvalues.iter().fold(max, |a, &b| a.min(b));
    let tol = max * real::<T>(RANK_TOLERANCE);
    let cond = if min > T::zero() {
        (max / min).to_f64().unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    if min <= tol || cond > CONDITION_LIMIT {
        return Err(BeamformError::DegenerateDirections { condition: cond });
    }
    let mut scaled = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let inv = Complex::new(T::one() / l, T::zero());
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= inv;
        }
    }
    Ok(scaled * eig.eigenvectors.adjoint())
}

fn leave_one_out<T: Real>(
    inv: &DMatrix<Complex<T>>,
    i: usize,
) -> Result<DVector<Complex<T>>, BeamformError> {
    let d = inv[(i, i)].re;
    if !(d > T::zero()) || !d.to_f64().unwrap_or(f64::NAN).is_finite() {
        return Err(BeamformError::DegenerateDirections {
            condition: f64::INFINITY,
        });
    }
    let mut col = DVector::from_column_slice(inv.column(i).as_slice());
    let s = Complex::new(T::one() / d, T::zero());
    for z in col.iter_mut() {
        *z *= s;
    }
    Ok(col)
}

/// NSB weights for every beam of the bank, sharing a single factorization.
pub fn nsb_all<T: Real>(
    bank: &SteeringBank<T>,
) -> Result<Vec<BeamformerWeights<T>>, BeamformError> {
    let inv = invert_hermitian(bank.steering_gram())?;
    let n = bank.users();
    (0..n)
        .map(|i| {
            let steer = leave_one_out(&inv, i)?;
            let mut coefficients = DVector::zeros(bank.columns());
            coefficients.rows_mut(0, n).copy_from(&steer);
            Ok(BeamformerWeights {
                coefficients,
                design: Design::Nsb,
                target_index: i,
                effective_rank: None,
            })
        })
        .collect()
}

/// Null-steered beamformer for user `i`: the served steering vector minus
/// its projection onto the span of all other users' steering vectors.
pub fn nsb<T: Real>(
    bank: &SteeringBank<T>,
    i: usize,
) -> Result<BeamformerWeights<T>, BeamformError> {
    assert!(i < bank.users());
    let inv = invert_hermitian(bank.steering_gram())?;
    let steer = leave_one_out(&inv, i)?;
    let n = bank.users();
    let mut coefficients = DVector::zeros(bank.columns());
    coefficients.rows_mut(0, n).copy_from(&steer);
    Ok(BeamformerWeights {
        coefficients,
        design: Design::Nsb,
        target_index: i,
        effective_rank: None,
    })
}

/// NSB-D weights for every beam, sharing one factorization of the
/// derivative-augmented Gram matrix.
pub fn nsb_d_all<T: Real>(
    bank: &SteeringBank<T>,
) -> Result<Vec<BeamformerWeights<T>>, BeamformError> {
    let full = bank
        .gram_full
        .as_ref()
        .expect("bank built without derivative columns");
    let inv = invert_hermitian(full)?;
    (0..bank.users())
        .map(|i| {
            Ok(BeamformerWeights {
                coefficients: leave_one_out(&inv, i)?,
                design: Design::NsbD,
                target_index: i,
                effective_rank: None,
            })
        })
        .collect()
}

/// Derivative-constrained null steering for user `i`: the projection also
/// removes the azimuth/zenith derivative vectors of every user, flattening
/// the pattern slope at each constraint direction.
pub fn nsb_d<T: Real>(
    bank: &SteeringBank<T>,
    i: usize,
) -> Result<BeamformerWeights<T>, BeamformError> {
    assert!(i < bank.users());
    let full = bank
        .gram_full
        .as_ref()
        .expect("bank built without derivative columns");
    let inv = invert_hermitian(full)?;
    Ok(BeamformerWeights {
        coefficients: leave_one_out(&inv, i)?,
        design: Design::NsbD,
        target_index: i,
        effective_rank: None,
    })
}

/// MPDRB weights for every beam from one eigendecomposition of the
/// steering Gram matrix.
pub fn mpdrb_all<T: Real>(
    bank: &SteeringBank<T>,
) -> Result<Vec<BeamformerWeights<T>>, BeamformError> {
    let g = bank.steering_gram();
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b));
    let tol = max * real::<T>(RANK_TOLERANCE);
    let retained: Vec<usize> = (0..g.nrows())
        .filter(|&j| eig.eigenvalues[j] > tol)
        .collect();
    if retained.is_empty() {
        return Err(BeamformError::DegenerateDirections {
            condition: f64::INFINITY,
        });
    }
    let n = bank.users();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // gamma = V L^-2 V^H c_i / (c_i^H V L^-2 V^H c_i), c_i = i-th Gram column
        let ci = g.column(i);
        let mut acc: DVector<Complex<T>> = DVector::zeros(g.nrows());
        let mut denom = T::zero();
        for &j in &retained {
            let vj = eig.eigenvectors.column(j);
            let proj = vj.dotc(&ci);
            let l2 = eig.eigenvalues[j] * eig.eigenvalues[j];
            let w = proj.unscale(l2);
            denom += (proj.conj() * w).re;
            acc.axpy(w, &vj.clone_owned(), Complex::new(T::one(), T::zero()));
        }
        if !(denom > T::zero()) || !denom.to_f64().unwrap_or(f64::NAN).is_finite() {
            return Err(BeamformError::DegenerateDirections {
                condition: f64::INFINITY,
            });
        }
        let scale = Complex::new(T::one() / denom, T::zero());
        let mut coefficients = DVector::zeros(bank.columns());
        for (k, z) in acc.iter().enumerate() {
            coefficients[k] = *z * scale;
        }
        out.push(BeamformerWeights {
            coefficients,
            design: Design::Mpdrb,
            target_index: i,
            effective_rank: Some(retained.len()),
        });
    }
    Ok(out)
}

/// Minimum-power distortionless beamformer for user `i`: minimizes the
/// summed response power over all user directions subject to unit gain
/// toward user `i`, via a rank-truncated decomposition of the bank.
pub fn mpdrb<T: Real>(
    bank: &SteeringBank<T>,
    i: usize,
) -> Result<BeamformerWeights<T>, BeamformError> {
    assert!(i < bank.users());
    let mut all = mpdrb_all(bank)?;
    Ok(all.swap_remove(i))
}

/// Power response `|w^H e(angles)|^2` of a beamformer.
pub fn array_pattern<T: Real>(
    bank: &SteeringBank<T>,
    w: &BeamformerWeights<T>,
    angles: &DirectionAngles<T>,
) -> T {
    let row = bank.probe_row_at(angles);
    row.dot(&w.coefficients).norm_sqr()
}
