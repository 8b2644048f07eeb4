//! Rician channel realizations, free-space path loss, link budget, and
//! noise power.

use nalgebra::DVector;
use rand::Rng;

use crate::array::SteeringVector;
use crate::scalar::{real, Real};
use crate::{Complex, SPEED_OF_LIGHT};

/// Rician factor as a linear power ratio. An infinite value means pure
/// line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianConfig<T> {
    pub k: T,
}

impl<T: Real> RicianConfig<T> {
    pub fn from_db(k_db: T) -> Self {
        Self {
            k: real::<T>(10.0).powf(k_db / real::<T>(10.0)),
        }
    }

    pub fn pure_los() -> Self {
        Self {
            k: real::<T>(f64::INFINITY),
        }
    }

    fn is_pure_los(&self) -> bool {
        self.k.to_f64().map_or(false, f64::is_infinite)
    }

    /// Amplitude weight of the line-of-sight part, `sqrt(K / (1 + K))`.
    pub fn los_amplitude(&self) -> T {
        if self.is_pure_los() {
            T::one()
        } else {
            (self.k / (T::one() + self.k)).sqrt()
        }
    }

    /// Amplitude weight of the scattered part, `sqrt(1 / (1 + K))`.
    pub fn nlos_amplitude(&self) -> T {
        if self.is_pure_los() {
            T::zero()
        } else {
            (T::one() / (T::one() + self.k)).sqrt()
        }
    }
}

/// One sampled channel vector: the deterministic steering part plus a
/// single complex Gaussian scalar on the all-ones vector.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T: Real> {
    pub vector: DVector<Complex<T>>,
    pub nlos_scalar: Complex<T>,
}

/// Transmit/receive budget. Gains and losses are linear here; dB-to-linear
/// conversion happens once, in config parsing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    pub tx_power_per_element: T,
    pub rx_gain: T,
    pub lumped_losses: T,
    pub noise_temperature: T,
    pub bandwidth: T,
    pub noise_figure: T,
    pub boltzmann: T,
    pub power_interpretation: PowerInterpretation,
}

/// How the configured element power enters the budget: either the array
/// radiates `p_el` in total, or `p_el` per element (`M^2 p_el` in total).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerInterpretation {
    PerElement,
    Total,
}

impl<T: Real> LinkBudget<T> {
    /// Transmit array gain, `M^2` for an `M x M` array.
    pub fn tx_gain(&self, side: usize) -> T {
        real::<T>((side * side) as f64)
    }

    /// Radiated power entering the budget for an `M x M` array.
    pub fn tx_power(&self, side: usize) -> T {
        match self.power_interpretation {
            PowerInterpretation::PerElement => self.tx_power_per_element,
            PowerInterpretation::Total => {
                self.tx_power_per_element * real::<T>((side * side) as f64)
            }
        }
    }
}

/// Free-space path loss `(4 pi d f / c)^2` as a linear factor.
pub fn path_loss_linear<T: Real>(d: T, f: T) -> T {
    assert!(d > T::zero(), "distance must be positive");
    assert!(f > T::zero(), "frequency must be positive");
    let x = real::<T>(4.0) * T::pi() * d * f / real::<T>(SPEED_OF_LIGHT);
    x * x
}

/// Received power at slant distance `d` and carrier `f`.
pub fn received_power<T: Real>(budget: &LinkBudget<T>, side: usize, d: T, f: T) -> T {
    budget.tx_power(side) * budget.tx_gain(side) * budget.rx_gain
        / (budget.lumped_losses * path_loss_linear(d, f))
}

/// Thermal noise power `k T B N_F`.
pub fn noise_power<T: Real>(budget: &LinkBudget<T>) -> T {
    budget.boltzmann * budget.noise_temperature * budget.bandwidth * budget.noise_figure
}

/// Draw the standard complex Gaussian scalar of the scattered part.
pub fn sample_nlos_scalar<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let half = real::<T>(0.5).sqrt();
    Complex::new(T::std_normal(rng) * half, T::std_normal(rng) * half)
}

/// Sample a Rician channel toward the direction of `e`:
/// `sqrt(K/(1+K)) e + sqrt(1/(1+K)) h 1` with `h` standard complex
/// Gaussian. The scattered part is a scalar times the all-ones vector, so
/// the realization always has rank-one scattering.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    e: &SteeringVector<T>,
    cfg: &RicianConfig<T>,
    rng: &mut R,
) -> ChannelRealization<T> {
    let h = sample_nlos_scalar::<T, R>(rng);
    let los = Complex::new(cfg.los_amplitude(), T::zero());
    let nlos = h.scale(cfg.nlos_amplitude());
    let mut vector = DVector::zeros(e.entries.len());
    for (out, z) in vector.iter_mut().zip(e.entries.iter()) {
        *out = *z * los + nlos;
    }
    ChannelRealization {
        vector,
        nlos_scalar: h,
    }
}
