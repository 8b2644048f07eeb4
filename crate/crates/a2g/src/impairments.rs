//! Doppler pre-compensation with estimation error, and position-vector
//! mismatch injection.

use rand::Rng;

use crate::geometry::{DirectionAngles, GroundPosition};
use crate::scalar::{real, Real};
use crate::SPEED_OF_LIGHT;

/// Doppler chain parameters: platform speed and heading, relative error of
/// the radial-velocity estimate, and the nominal carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerConfig<T> {
    pub airplane_speed: T,
    pub heading_azimuth: T,
    pub delta_vr: T,
    pub carrier: T,
}

/// Radial velocity toward a user: `v_a cos(azimuth - heading) sin(zenith)`.
pub fn radial_velocity<T: Real>(cfg: &DopplerConfig<T>, angles: &DirectionAngles<T>) -> T {
    cfg.airplane_speed * (angles.azimuth - cfg.heading_azimuth).cos() * angles.zenith.sin()
}

/// Pre-compensated transmit frequency for an estimated radial velocity.
pub fn precompensated_tx_frequency<T: Real>(cfg: &DopplerConfig<T>, v_r_est: T) -> T {
    let c = real::<T>(SPEED_OF_LIGHT);
    cfg.carrier * (T::one() + v_r_est / c) / (T::one() - v_r_est / c)
}

/// Residual received-to-nominal frequency ratio after pre-compensating
/// with the erroneous estimate `(1 + delta_vr) v_r` and then traversing
/// the true Doppler of `v_r`. Both factors are built from the same
/// expressions, so a perfect estimate yields exactly 1.
pub fn residual_frequency_ratio<T: Real>(cfg: &DopplerConfig<T>, v_r: T) -> T {
    let c = real::<T>(SPEED_OF_LIGHT);
    let v_est = (T::one() + cfg.delta_vr) * v_r;
    let num = (T::one() + v_est / c) * (T::one() - v_r / c);
    let den = (T::one() - v_est / c) * (T::one() + v_r / c);
    num / den
}

/// Residual frequency ratio of every beam, each pre-compensated for its
/// own target user. The ratio scales the channel-side direction cosines
/// seen by that beam; the array is designed at the nominal carrier.
pub fn beam_frequency_ratios<T: Real>(
    cfg: &DopplerConfig<T>,
    angles: &[DirectionAngles<T>],
) -> Vec<T> {
    angles
        .iter()
        .map(|a| residual_frequency_ratio(cfg, radial_velocity(cfg, a)))
        .collect()
}

/// Position measurement error: every reported position is displaced by a
/// fixed radius `delta` in a random direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionOffset<T> {
    pub delta: T,
}

/// Displace each position by `delta` at an independent uniform angle.
/// The beamformers are later designed from the offset positions while
/// channels and moments use the true ones. A zero offset returns the
/// input untouched without consuming randomness.
pub fn apply_position_offset<T: Real, R: Rng + ?Sized>(
    positions: &[GroundPosition<T>],
    off: &PositionOffset<T>,
    rng: &mut R,
) -> Vec<GroundPosition<T>> {
    if off.delta == T::zero() {
        return positions.to_vec();
    }
    positions
        .iter()
        .map(|p| {
            let beta = T::two_pi() * T::unit_uniform(rng) - T::pi();
            GroundPosition::new(
                p.x + off.delta * beta.cos(),
                p.y + off.delta * beta.sin(),
                p.depth,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn cfg(delta_vr: f64) -> DopplerConfig<f64> {
        DopplerConfig {
            airplane_speed: 200.0,
            heading_azimuth: 0.0,
            delta_vr,
            carrier: 73.5e9,
        }
    }

    #[test]
    fn radial_velocity_cases() {
        let c = cfg(0.0);
        let nadir = DirectionAngles {
            zenith: 0.0,
            azimuth: 0.0,
        };
        assert_eq!(radial_velocity(&c, &nadir), 0.0);
        let ahead = DirectionAngles {
            zenith: std::f64::consts::FRAC_PI_2,
            azimuth: 0.0,
        };
        assert_relative_eq!(radial_velocity(&c, &ahead), 200.0, max_relative = 1e-12);
        let mid = DirectionAngles {
            zenith: std::f64::consts::FRAC_PI_4,
            azimuth: 0.0,
        };
        assert_relative_eq!(radial_velocity(&c, &mid), 141.4214, max_relative = 1e-4);
    }

    #[test]
    fn precompensation_identity_at_rest() {
        let c = cfg(0.5);
        assert_eq!(precompensated_tx_frequency(&c, 0.0), 73.5e9);
    }

    #[test]
    fn perfect_estimate_is_exact() {
        let c = cfg(0.0);
        for v in [0.0, 1.0, 141.42, 200.0, -173.2] {
            assert_eq!(residual_frequency_ratio(&c, v), 1.0);
        }
    }

    #[test]
    fn full_error_first_order() {
        // estimate twice the true radial velocity: residual ~ 1 + 2 v_r / c
        let c = cfg(1.0);
        let v = 141.42;
        let expect = 1.0 + 2.0 * v / SPEED_OF_LIGHT;
        assert_relative_eq!(residual_frequency_ratio(&c, v), expect, max_relative = 1e-9);
        assert_abs_diff_eq!(residual_frequency_ratio(&c, v) - 1.0, 9.43e-7, epsilon = 1e-9);
    }

    #[test]
    fn phase_error_stays_moderate() {
        // worst case across a 500-element aperture at full estimation error
        let c = cfg(1.0);
        let worst = residual_frequency_ratio(&c, 200.0) - 1.0;
        let phase = std::f64::consts::PI * 250.0 * worst;
        assert!(phase < 3e-3, "cross-array phase error {phase}");
    }

    #[test]
    fn zero_offset_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let before: u64 = rand::Rng::random(&mut rng);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let pos = vec![GroundPosition::new(10.0, -3.0, 10_000.0)];
        let out = apply_position_offset(&pos, &PositionOffset { delta: 0.0 }, &mut rng);
        assert_eq!(out[0], pos[0]);
        // no randomness consumed
        let after: u64 = rand::Rng::random(&mut rng);
        assert_eq!(before, after);
    }

    #[test]
    fn offset_radius_is_exact() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let pos: Vec<_> = (0..50)
            .map(|i| GroundPosition::new(i as f64, -2.0 * i as f64, 10_000.0))
            .collect();
        let out = apply_position_offset(&pos, &PositionOffset { delta: 1.5 }, &mut rng);
        for (a, b) in pos.iter().zip(&out) {
            let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            assert_relative_eq!(d, 1.5, max_relative = 1e-12);
            assert_eq!(a.depth, b.depth);
        }
        // angles differ between users
        let a0 = (out[0].y - pos[0].y).atan2(out[0].x - pos[0].x);
        let a1 = (out[1].y - pos[1].y).atan2(out[1].x - pos[1].x);
        assert!((a0 - a1).abs() > 1e-6);
    }
}
