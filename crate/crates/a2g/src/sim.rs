//! Scenario orchestration: composes geometry, beamformers, channel,
//! metrics, and impairments into reproducible Monte Carlo experiments.
//!
//! Reproducibility contract: every random stream is derived from
//! `(master seed, trial index, purpose)`, trials are reduced with
//! compensated summation in trial order, and sweeps reuse the same trial
//! streams at every axis point (common random numbers), so a given config
//! and seed produce identical digits regardless of worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::array::ArrayGeometry;
use crate::beamform::{
    array_pattern, mpdrb_all, nsb_all, nsb_d_all, BeamformError, BeamformerWeights, Design,
    SteeringBank,
};
use crate::channel::{noise_power, received_power, sample_nlos_scalar, LinkBudget, RicianConfig};
use crate::geometry::{
    angles_of, build_layout, direction_cosines, sample_uniform_in_disc, GeometryError,
    GroundPosition,
};
use crate::impairments::{
    apply_position_offset, beam_frequency_ratios, DopplerConfig, PositionOffset,
};
use crate::metrics::{
    approx_capacity, ase_from_se, gains_from_rows, instantaneous_sinr, BeamGains, CapacityReport,
    SinrMoments,
};
use crate::scalar::{real, Real};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trial {trial}: {source}")]
    Degenerate {
        trial: usize,
        #[source]
        source: BeamformError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Monte Carlo protocol: placement trials, channel draws per trial for the
/// sampled-SINR path, and the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: usize,
    pub channel_draws: usize,
    pub seed: u64,
    pub with_mc: bool,
}

/// One complete operating point.
#[derive(Debug, Clone)]
pub struct Scenario<T: Real> {
    pub macro_radius: T,
    pub micro_radius: T,
    pub tiers: usize,
    pub altitude: T,
    pub mci_distance: T,
    pub mci_azimuth: T,
    pub side: usize,
    pub carrier: T,
    pub rician: RicianConfig<T>,
    pub budget: LinkBudget<T>,
    pub design: Design,
    pub doppler: Option<DopplerConfig<T>>,
    pub offset: Option<PositionOffset<T>>,
    pub mc: MonteCarlo,
}

impl<T: Real> Scenario<T> {
    pub fn geom(&self) -> ArrayGeometry<T> {
        ArrayGeometry::new(self.side, real::<T>(SPEED_OF_LIGHT) / self.carrier)
    }

    pub fn mci_center(&self) -> GroundPosition<T> {
        GroundPosition::new(
            self.mci_distance * self.mci_azimuth.cos(),
            self.mci_distance * self.mci_azimuth.sin(),
            self.altitude,
        )
    }

    /// Co-channel reuse distance `4 r`.
    pub fn reuse_distance(&self) -> T {
        real::<T>(4.0) * self.micro_radius
    }

    fn cell_centers(&self) -> Result<Vec<GroundPosition<T>>, GeometryError> {
        let layout = build_layout(
            self.macro_radius,
            self.micro_radius,
            self.tiers,
            self.mci_center(),
        )?;
        let mut centers = Vec::with_capacity(1 + layout.interferer_count());
        centers.push(layout.mci_center);
        centers.extend(layout.interferer_centers);
        Ok(centers)
    }
}

/// Axis value plus the report at that point.
#[derive(Debug, Clone)]
pub struct SweepPoint<T> {
    pub axis: T,
    pub report: CapacityReport<T>,
}

#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub points: Vec<SweepPoint<T>>,
    pub seed: u64,
}

const STREAMS_PER_TRIAL: u64 = 8;
const STREAM_PLACEMENT: u64 = 0;
const STREAM_OFFSET: u64 = 1;
const STREAM_CHANNEL: u64 = 2;

fn trial_rng(seed: u64, trial: usize, purpose: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 * STREAMS_PER_TRIAL + purpose);
    rng
}

struct TrialOutcome<T> {
    cap_approx: T,
    cap_mc: Option<T>,
}

fn run_trial<T: Real>(
    s: &Scenario<T>,
    centers: &[GroundPosition<T>],
    trial: usize,
) -> Result<TrialOutcome<T>, SimError> {
    let mut rng_place = trial_rng(s.mc.seed, trial, STREAM_PLACEMENT);
    let true_pos: Vec<GroundPosition<T>> = centers
        .iter()
        .map(|c| sample_uniform_in_disc(c, s.micro_radius, &mut rng_place))
        .collect();
    let design_pos = match &s.offset {
        Some(off) if off.delta > T::zero() => {
            let mut rng_off = trial_rng(s.mc.seed, trial, STREAM_OFFSET);
            apply_position_offset(&true_pos, off, &mut rng_off)
        }
        _ => true_pos.clone(),
    };
    let true_angles: Vec<_> = true_pos.iter().map(angles_of).collect();
    let design_angles: Vec<_> = design_pos.iter().map(angles_of).collect();

    let bank = SteeringBank::new(s.geom(), &design_angles, s.design == Design::NsbD);
    let beams: Vec<BeamformerWeights<T>> = match s.design {
        Design::Nsb => nsb_all(&bank),
        Design::NsbD => nsb_d_all(&bank),
        Design::Mpdrb => mpdrb_all(&bank),
    }
    .map_err(|source| SimError::Degenerate { trial, source })?;

    let row_one = bank.probe_row(T::zero(), T::zero());
    let (px0, py0) = direction_cosines(&true_angles[0]);
    let gains: Vec<BeamGains<T>> = match &s.doppler {
        Some(dc) => {
            // each beam carries its own residual frequency error, which
            // rescales the channel-side direction cosines it is seen at
            let ratios = beam_frequency_ratios(dc, &true_angles);
            beams
                .iter()
                .zip(&ratios)
                .map(|(w, &rho)| {
                    let row = bank.probe_row(rho * px0, rho * py0);
                    BeamGains {
                        los: row.dot(&w.coefficients),
                        scatter: row_one.dot(&w.coefficients),
                    }
                })
                .collect()
        }
        None => {
            let row_e0 = bank.probe_row(px0, py0);
            gains_from_rows(&row_e0, &row_one, &beams)
        }
    };

    let pr = received_power(
        &s.budget,
        s.side,
        true_pos[0].slant_distance(),
        s.carrier,
    );
    let noise = noise_power(&s.budget);
    let moments = SinrMoments::from_gains(&gains[0], &gains[1..], &s.rician);
    let cap_approx = approx_capacity(&moments, pr, noise);

    let cap_mc = if s.mc.with_mc && s.mc.channel_draws > 0 {
        let mut rng_chan = trial_rng(s.mc.seed, trial, STREAM_CHANNEL);
        let mut acc = Kahan::new();
        for _ in 0..s.mc.channel_draws {
            let h = sample_nlos_scalar::<T, _>(&mut rng_chan);
            let gamma = instantaneous_sinr(&gains, &s.rician, pr, noise, h);
            acc.add((T::one() + gamma).log2());
        }
        Some(acc.sum / real::<T>(s.mc.channel_draws as f64))
    } else {
        None
    };

    Ok(TrialOutcome {
        cap_approx,
        cap_mc,
    })
}

/// Compensated accumulator so parallel trial results reduce to the same
/// digits as a serial run.
struct Kahan<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Kahan<T> {
    fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

fn mean_and_stderr<T: Real>(vals: &[T]) -> (T, T) {
    let n = vals.len();
    let mut acc = Kahan::new();
    for &v in vals {
        acc.add(v);
    }
    let mean = acc.sum / real::<T>(n as f64);
    if n < 2 {
        return (mean, T::zero());
    }
    let mut sq = Kahan::new();
    for &v in vals {
        let d = v - mean;
        sq.add(d * d);
    }
    let var = sq.sum / real::<T>((n - 1) as f64);
    (mean, (var / real::<T>(n as f64)).sqrt())
}

/// Execute the full placement protocol at one operating point.
pub fn run_point<T: Real>(s: &Scenario<T>) -> Result<CapacityReport<T>, SimError> {
    assert!(s.mc.trials >= 1, "need at least one trial");
    let centers = s.cell_centers()?;
    let outcomes: Vec<TrialOutcome<T>> = (0..s.mc.trials)
        .into_par_iter()
        .map(|t| run_trial(s, &centers, t))
        .collect::<Result<_, _>>()?;

    let caps: Vec<T> = outcomes.iter().map(|o| o.cap_approx).collect();
    let (se, stderr_se) = mean_and_stderr(&caps);
    let d = s.reuse_distance();
    let (se_mc, ase_mc) = if s.mc.with_mc {
        let mc: Vec<T> = outcomes.iter().filter_map(|o| o.cap_mc).collect();
        let (m, _) = mean_and_stderr(&mc);
        (Some(m), Some(ase_from_se(m, d)))
    } else {
        (None, None)
    };
    Ok(CapacityReport {
        se_approx: se,
        ase_approx: ase_from_se(se, d),
        se_mc,
        ase_mc,
        stderr_se,
        stderr_ase: ase_from_se(stderr_se.max(T::zero()), d),
        trials: s.mc.trials,
    })
}

fn sweep_with<T: Real>(
    s: &Scenario<T>,
    axis: impl IntoIterator<Item = (T, Scenario<T>)>,
) -> Result<SweepResult<T>, SimError> {
    let mut points = Vec::new();
    for (value, scenario) in axis {
        points.push(SweepPoint {
            axis: value,
            report: run_point(&scenario)?,
        });
    }
    Ok(SweepResult {
        points,
        seed: s.mc.seed,
    })
}

/// ASE versus the MCI distance from the macro-cell centre (meters).
pub fn sweep_distance<T: Real>(
    s: &Scenario<T>,
    distances: &[T],
) -> Result<SweepResult<T>, SimError> {
    sweep_with(
        s,
        distances.iter().map(|&d| {
            let mut sc = s.clone();
            sc.mci_distance = d;
            (d, sc)
        }),
    )
}

/// ASE versus the array dimension M.
pub fn sweep_array<T: Real>(s: &Scenario<T>, sides: &[usize]) -> Result<SweepResult<T>, SimError> {
    sweep_with(
        s,
        sides.iter().map(|&m| {
            let mut sc = s.clone();
            sc.side = m;
            (real::<T>(m as f64), sc)
        }),
    )
}

/// ASE versus the relative Doppler estimation error.
pub fn doppler_table<T: Real>(s: &Scenario<T>, deltas: &[T]) -> Result<SweepResult<T>, SimError> {
    sweep_with(
        s,
        deltas.iter().map(|&d| {
            let mut sc = s.clone();
            let mut dc = s.doppler.unwrap_or(DopplerConfig {
                airplane_speed: real::<T>(200.0),
                heading_azimuth: T::zero(),
                delta_vr: T::zero(),
                carrier: s.carrier,
            });
            dc.delta_vr = d;
            sc.doppler = Some(dc);
            (d, sc)
        }),
    )
}

/// ASE versus the position measurement offset in meters.
pub fn offset_table<T: Real>(s: &Scenario<T>, deltas: &[T]) -> Result<SweepResult<T>, SimError> {
    sweep_with(
        s,
        deltas.iter().map(|&d| {
            let mut sc = s.clone();
            sc.offset = Some(PositionOffset { delta: d });
            (d, sc)
        }),
    )
}

/// Beam pattern of the served beam with users pinned at their cell
/// centres: grid rows over (zenith, azimuth) plus one row per interferer
/// direction, power in dB relative to the served-direction response.
pub fn pattern_dump<T: Real>(
    s: &Scenario<T>,
    zenith_steps: usize,
    azimuth_steps: usize,
) -> Result<Vec<(T, T, T)>, SimError> {
    let centers = s.cell_centers()?;
    let angles: Vec<_> = centers.iter().map(angles_of).collect();
    let bank = SteeringBank::new(s.geom(), &angles, s.design == Design::NsbD);
    let beams = match s.design {
        Design::Nsb => nsb_all(&bank),
        Design::NsbD => nsb_d_all(&bank),
        Design::Mpdrb => mpdrb_all(&bank),
    }
    .map_err(|source| SimError::Degenerate { trial: 0, source })?;
    let w = &beams[0];
    let peak = array_pattern(&bank, w, &angles[0]);
    let floor = real::<T>(1e-40);
    let db = |p: T| real::<T>(10.0) * ((p / peak).max(floor)).log10();
    let mut rows = Vec::new();
    for iz in 0..zenith_steps {
        let zen = real::<T>(90.0) * real::<T>(iz as f64) / real::<T>(zenith_steps as f64);
        for ia in 0..azimuth_steps {
            let az = real::<T>(-180.0)
                + real::<T>(360.0) * real::<T>(ia as f64) / real::<T>(azimuth_steps as f64);
            let a = crate::geometry::DirectionAngles {
                zenith: zen * T::pi() / real::<T>(180.0),
                azimuth: az * T::pi() / real::<T>(180.0),
            };
            rows.push((zen, az, db(array_pattern(&bank, w, &a))));
        }
    }
    let deg = real::<T>(180.0) / T::pi();
    for a in &angles[1..] {
        rows.push((a.zenith * deg, a.azimuth * deg, db(array_pattern(&bank, w, a))));
    }
    Ok(rows)
}

/// Write a sweep as CSV with a metadata comment line.
pub fn write_csv<T: Real, W: std::io::Write>(
    result: &SweepResult<T>,
    meta: &str,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "# {meta}")?;
    writeln!(
        out,
        "axis,se_approx,ase_approx,se_mc,ase_mc,stderr_se,stderr_ase,trials,seed"
    )?;
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    for p in &result.points {
        let r = &p.report;
        let opt = |v: Option<T>| v.map(|x| format!("{:.10e}", f(x))).unwrap_or_default();
        writeln!(
            out,
            "{:.10e},{:.10e},{:.10e},{},{},{:.10e},{:.10e},{},{}",
            f(p.axis),
            f(r.se_approx),
            f(r.ase_approx),
            opt(r.se_mc),
            opt(r.ase_mc),
            f(r.stderr_se),
            f(r.stderr_ase),
            r.trials,
            result.seed
        )?;
    }
    Ok(())
}
