//! SINR moments, instantaneous SINR, the use-and-forget capacity
//! approximation, and SE/ASE reporting.
//!
//! Because every channel realization is `a e_0 + b h 1` with a scalar `h`,
//! any beam output is fully described by two complex numbers: the beam's
//! response to the served steering vector and to the all-ones vector.
//! Moments and Monte Carlo draws both work from those [`BeamGains`], which
//! keeps the per-draw cost independent of the array size.

use nalgebra::DVector;

use crate::beamform::{nsb_all, BeamformError, SteeringBank};
use crate::channel::RicianConfig;
use crate::scalar::{real, Real};
use crate::Complex;

/// Scalar responses of one beam `w`: `los = e_0^H w` against the served
/// user's steering vector and `scatter = 1^H w` against the all-ones
/// vector carrying the scattered part.
#[derive(Debug, Clone, Copy)]
pub struct BeamGains<T: Real> {
    pub los: Complex<T>,
    pub scatter: Complex<T>,
}

impl<T: Real> BeamGains<T> {
    /// Dense evaluation for small arrays and tests.
    pub fn from_dense(w: &DVector<Complex<T>>, e0: &DVector<Complex<T>>) -> Self {
        let mut scatter = Complex::new(T::zero(), T::zero());
        for z in w.iter() {
            scatter += *z;
        }
        Self {
            los: e0.dotc(w),
            scatter,
        }
    }

    /// Mean and variance of `X = h_Ric^H w` for the served user's channel.
    pub fn mean_and_variance(&self, cfg: &RicianConfig<T>) -> (Complex<T>, T) {
        let mean = self.los.scale(cfg.los_amplitude());
        let b = cfg.nlos_amplitude();
        (mean, b * b * self.scatter.norm_sqr())
    }

    /// Second moment `E|X|^2 = |mean|^2 + variance`.
    pub fn second_moment(&self, cfg: &RicianConfig<T>) -> T {
        let (mean, var) = self.mean_and_variance(cfg);
        mean.norm_sqr() + var
    }

    /// One draw of `X` given the scattered scalar `h` of the channel.
    pub fn sample(&self, cfg: &RicianConfig<T>, h: Complex<T>) -> Complex<T> {
        self.los.scale(cfg.los_amplitude()) + h.conj() * self.scatter.scale(cfg.nlos_amplitude())
    }
}

/// First and second moments of the beam outputs through the served user's
/// channel: signal mean and variance plus per-interferer terms.
#[derive(Debug, Clone)]
pub struct SinrMoments<T> {
    pub mu: T,
    pub sigma_s_sq: T,
    /// `|E X_i|` per interfering beam; zero for exact nulls.
    pub interference_mean_abs: Vec<T>,
    pub sigma_i_sq: Vec<T>,
}

impl<T: Real> SinrMoments<T> {
    pub fn from_gains(signal: &BeamGains<T>, interferers: &[BeamGains<T>], cfg: &RicianConfig<T>) -> Self {
        let (mean, var) = signal.mean_and_variance(cfg);
        let mut interference_mean_abs = Vec::with_capacity(interferers.len());
        let mut sigma_i_sq = Vec::with_capacity(interferers.len());
        for g in interferers {
            let (m, v) = g.mean_and_variance(cfg);
            interference_mean_abs.push(m.norm_sqr().sqrt());
            sigma_i_sq.push(v);
        }
        Self {
            mu: mean.norm_sqr().sqrt(),
            sigma_s_sq: var,
            interference_mean_abs,
            sigma_i_sq,
        }
    }

    /// Total interference second moment.
    pub fn interference_power(&self) -> T {
        let mut acc = T::zero();
        for (m, v) in self.interference_mean_abs.iter().zip(&self.sigma_i_sq) {
            acc += *m * *m + *v;
        }
        acc
    }
}

/// Beam gains for every beam of a bank given the served user's probe rows.
pub fn gains_from_rows<T: Real>(
    row_e0: &DVector<Complex<T>>,
    row_one: &DVector<Complex<T>>,
    beams: &[crate::beamform::BeamformerWeights<T>],
) -> Vec<BeamGains<T>> {
    beams
        .iter()
        .map(|w| BeamGains {
            los: row_e0.dot(&w.coefficients),
            scatter: row_one.dot(&w.coefficients),
        })
        .collect()
}

/// Closed-form moments for the null-steered design on a bank: the signal
/// mean is the residual norm of the served steering vector after
/// projection, and interference means vanish by construction.
pub fn moments_nsb<T: Real>(
    bank: &SteeringBank<T>,
    cfg: &RicianConfig<T>,
) -> Result<SinrMoments<T>, BeamformError> {
    let beams = nsb_all(bank)?;
    let row_e0 = bank.probe_row_at(&bank.angles[0]);
    let row_one = bank.probe_row(T::zero(), T::zero());
    let gains = gains_from_rows(&row_e0, &row_one, &beams);
    Ok(SinrMoments::from_gains(&gains[0], &gains[1..], cfg))
}

/// Moments of any position-only beamformer given dense vectors; the
/// channel independence of the weights is what makes the formulas exact.
pub fn moments_generic<T: Real>(
    weights: &[DVector<Complex<T>>],
    e0: &DVector<Complex<T>>,
    cfg: &RicianConfig<T>,
) -> SinrMoments<T> {
    let gains: Vec<_> = weights.iter().map(|w| BeamGains::from_dense(w, e0)).collect();
    SinrMoments::from_gains(&gains[0], &gains[1..], cfg)
}

/// One instantaneous SINR draw: all beams ride the served user's channel.
pub fn instantaneous_sinr<T: Real>(
    gains: &[BeamGains<T>],
    cfg: &RicianConfig<T>,
    pr: T,
    noise: T,
    h: Complex<T>,
) -> T {
    let xs = gains[0].sample(cfg, h).norm_sqr();
    let mut xi = T::zero();
    for g in &gains[1..] {
        xi += g.sample(cfg, h).norm_sqr();
    }
    pr * xs / (pr * xi + noise)
}

/// Use-and-forget spectral efficiency in bps/Hz: the log of one plus the
/// ratio of expected signal power to expected interference-plus-noise.
pub fn approx_capacity<T: Real>(m: &SinrMoments<T>, pr: T, noise: T) -> T {
    let signal = pr * (m.mu * m.mu + m.sigma_s_sq);
    let denom = pr * m.interference_power() + noise;
    (T::one() + signal / denom).log2()
}

/// Area spectral efficiency in bps/Hz/km^2 for reuse distance `d_m` meters.
pub fn ase_from_se<T: Real>(se: T, d_m: T) -> T {
    assert!(d_m > T::zero(), "reuse distance must be positive");
    let d_km = d_m / real::<T>(1000.0);
    real::<T>(4.0) * se / (T::pi() * d_km * d_km)
}

/// Aggregated output of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport<T> {
    pub se_approx: T,
    pub ase_approx: T,
    pub se_mc: Option<T>,
    pub ase_mc: Option<T>,
    pub stderr_se: T,
    pub stderr_ase: T,
    pub trials: usize,
}
