//! End-to-end acceptance suite. Each test covers one numbered criterion
//! and prints a single verdict line; run with `--nocapture` to see all of
//! them. The quantitative criteria (1-7) use at least 500 placement
//! trials; the property-based criteria (8-12) are independent of the
//! absolute link-budget calibration.

use std::sync::OnceLock;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use a2g::array::{
    inner_product, inner_product_closed_form, steering_derivatives, steering_vector, ArrayGeometry,
};
use a2g::beamform::{mpdrb_all, nsb_all, nsb_d_all, Design, SteeringBank};
use a2g::channel::{sample_channel, RicianConfig};
use a2g::config::RunConfig;
use a2g::geometry::{direction_cosines, DirectionAngles};
use a2g::metrics::{BeamGains, CapacityReport};
use a2g::sim::{doppler_table, offset_table, run_point, sweep_distance};
use a2g::{Complex, SPEED_OF_LIGHT};

const DESIGNS: [Design; 3] = [Design::Nsb, Design::NsbD, Design::Mpdrb];
const WAVELENGTH: f64 = SPEED_OF_LIGHT / 73.5e9;

fn verdict(n: usize, ok: bool, detail: &str) {
    let v = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:2}: {v}  {detail}");
    assert!(ok, "criterion {n} failed: {detail}");
}

fn point(adjust: impl FnOnce(&mut RunConfig)) -> CapacityReport<f64> {
    let mut cfg = RunConfig::default();
    adjust(&mut cfg);
    run_point(&cfg.scenario().unwrap()).unwrap()
}

/// Baseline operating point (M=200, K=30 dB, r=50 m, MCI 2.5 km), ASE per
/// design. Cached for seed 1 since two criteria need it.
fn baseline_ase(seed: u64) -> [f64; 3] {
    static SEED_ONE: OnceLock<[f64; 3]> = OnceLock::new();
    let run = |seed: u64| {
        DESIGNS.map(|d| {
            point(|c| {
                c.beamformer = d;
                c.seed = seed;
            })
            .ase_approx
        })
    };
    if seed == 1 {
        *SEED_ONE.get_or_init(|| run(1))
    } else {
        run(seed)
    }
}

#[test]
fn criterion_01_baseline_table() {
    let [nsb, nsbd, mpdrb] = baseline_ase(1);
    let ok = (775.2..=1162.8).contains(&nsb)
        && (727.2..=1090.8).contains(&nsbd)
        && (162.75..=271.25).contains(&mpdrb);
    verdict(
        1,
        ok,
        &format!("baseline ASE: nsb {nsb:.1}, nsb-d {nsbd:.1}, mpdrb {mpdrb:.1} bps/Hz/km2"),
    );
}

#[test]
fn criterion_02_design_ordering() {
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in 1..=3u64 {
        let [nsb, nsbd, mpdrb] = baseline_ase(seed);
        ok &= nsb > nsbd && nsbd > mpdrb;
        lines.push(format!("seed {seed}: {nsb:.0} > {nsbd:.0} > {mpdrb:.0}"));
    }
    verdict(2, ok, &format!("nsb > nsb-d > mpdrb ({})", lines.join("; ")));
}

#[test]
fn criterion_03_doppler_robustness() {
    let deltas = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut worst = 0.0f64;
    for d in DESIGNS {
        let mut cfg = RunConfig::default();
        cfg.beamformer = d;
        let sweep = doppler_table(&cfg.scenario().unwrap(), &deltas).unwrap();
        let base = sweep.points[2].report.ase_approx;
        for p in &sweep.points {
            worst = worst.max((p.report.ase_approx - base).abs() / base);
        }
    }
    verdict(
        3,
        worst < 0.02,
        &format!("ASE shift over delta_vr in [-1, 1]: worst {:.3}% (< 2%)", worst * 100.0),
    );
}

#[test]
fn criterion_04_position_mismatch() {
    let mut drops = [0.0f64; 3];
    for (k, d) in DESIGNS.into_iter().enumerate() {
        let mut cfg = RunConfig::default();
        cfg.beamformer = d;
        let sweep = offset_table(&cfg.scenario().unwrap(), &[0.0, 1.0]).unwrap();
        drops[k] = 1.0 - sweep.points[1].report.ase_approx / sweep.points[0].report.ase_approx;
    }
    let [nsb, nsbd, mpdrb] = drops;
    let ok = (0.30..=0.70).contains(&nsb) && nsbd <= 0.20 && mpdrb <= 0.15;
    verdict(
        4,
        ok,
        &format!(
            "ASE drop at offset 1 m: nsb {:.1}%, nsb-d {:.1}%, mpdrb {:.1}%",
            nsb * 100.0,
            nsbd * 100.0,
            mpdrb * 100.0
        ),
    );
}

#[test]
fn criterion_05_distance_sweep_shape() {
    let distances = [0.0, 2_500.0, 4_750.0];
    let sweep_for = |k_db: f64, r: f64| -> Vec<f64> {
        let mut cfg = RunConfig::default();
        cfg.array_size = 500;
        cfg.rician_k_db = k_db;
        cfg.micro_radius = r;
        sweep_distance(&cfg.scenario().unwrap(), &distances)
            .unwrap()
            .points
            .iter()
            .map(|p| p.report.ase_approx)
            .collect()
    };
    let base = sweep_for(30.0, 50.0);
    let k15 = sweep_for(15.0, 50.0);
    let k10 = sweep_for(10.0, 50.0);
    let r75 = sweep_for(30.0, 75.0);
    let r100 = sweep_for(30.0, 100.0);

    let above = |hi: &[f64], lo: &[f64]| hi.iter().zip(lo).all(|(h, l)| h > l);
    let ratio = base[2] / base[0];
    let ok = (1.5..=2.5).contains(&ratio)
        && above(&base, &k15)
        && above(&k15, &k10)
        && above(&base, &r75)
        && above(&r75, &r100);
    verdict(
        5,
        ok,
        &format!("edge/center ratio {ratio:.2}; K and r orderings hold pointwise"),
    );
}

#[test]
fn criterion_06_array_vs_rician_gain() {
    let at = |m: usize, k_db: f64| {
        point(|c| {
            c.mci_distance = 0.0;
            c.array_size = m;
            c.rician_k_db = k_db;
        })
        .ase_approx
    };
    let base = at(200, 10.0);
    let delta_m = at(500, 10.0) - base;
    let delta_k = at(200, 30.0) - base;
    let ok = delta_m < delta_k
        && (60.0..=140.0).contains(&delta_m)
        && (150.0..=350.0).contains(&delta_k);
    verdict(
        6,
        ok,
        &format!("ASE gain: M 200->500 adds {delta_m:.0}, K 10->30 dB adds {delta_k:.0}"),
    );
}

#[test]
fn criterion_07_peak_operating_point() {
    let r = point(|c| {
        c.array_size = 500;
        c.mci_distance = 5_000.0;
    });
    let d_km = 0.2;
    let identity = (r.ase_approx - 4.0 * r.se_approx / (std::f64::consts::PI * d_km * d_km)).abs()
        / r.ase_approx;
    let ok = (30.4..=45.6).contains(&r.se_approx)
        && (960.0..=1440.0).contains(&r.ase_approx)
        && identity < 1e-12;
    verdict(
        7,
        ok,
        &format!(
            "SE {:.1} bps/Hz, ASE {:.0} bps/Hz/km2, reuse-area identity residual {identity:.1e}",
            r.se_approx, r.ase_approx
        ),
    );
}

/// Random user directions with pairwise separation of a few beamwidths in
/// direction-cosine space, so the bank is well conditioned.
fn random_directions(rng: &mut ChaCha12Rng, count: usize, side: usize) -> Vec<DirectionAngles<f64>> {
    let min_sep = 2.5 / side as f64;
    let mut psis: Vec<(f64, f64)> = Vec::with_capacity(count);
    while psis.len() < count {
        let r = 0.6 * rng.random::<f64>().sqrt();
        let a = std::f64::consts::TAU * rng.random::<f64>();
        let p = (r * a.cos(), r * a.sin());
        if psis
            .iter()
            .all(|q| (p.0 - q.0).hypot(p.1 - q.1) >= min_sep)
        {
            psis.push(p);
        }
    }
    psis.into_iter()
        .map(|(px, py)| DirectionAngles {
            zenith: (px.hypot(py)).asin(),
            azimuth: py.atan2(px),
        })
        .collect()
}

#[test]
fn criterion_08_null_depth() {
    let mut rng = ChaCha12Rng::seed_from_u64(80);
    let mut worst_null = 0.0f64;
    let mut worst_gain = 0.0f64;
    for scenario in 0..100 {
        let side = [16, 24, 32][scenario % 3];
        let n = 3 + scenario % 5;
        let dirs = random_directions(&mut rng, n, side);
        let bank = SteeringBank::new(ArrayGeometry::new(side, WAVELENGTH), &dirs, true);
        let rows: Vec<_> = dirs.iter().map(|a| bank.probe_row_at(a)).collect();
        let m2 = (side * side) as f64;
        for beams in [nsb_all(&bank).unwrap(), nsb_d_all(&bank).unwrap()] {
            for (i, w) in beams.iter().enumerate() {
                for (j, row) in rows.iter().enumerate() {
                    if j != i {
                        let response = row.dot(&w.coefficients).norm_sqr().sqrt();
                        worst_null = worst_null.max(response / m2);
                    }
                }
            }
        }
        for (i, w) in mpdrb_all(&bank).unwrap().iter().enumerate() {
            let gain = rows[i].dot(&w.coefficients);
            worst_gain = worst_gain.max((gain - Complex::new(1.0, 0.0)).norm_sqr().sqrt());
        }
    }
    let ok = worst_null <= 1e-6 && worst_gain <= 1e-8;
    verdict(
        8,
        ok,
        &format!("worst null {worst_null:.1e} of M^2; worst mpdrb gain error {worst_gain:.1e}"),
    );
}

#[test]
fn criterion_09_moment_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(90);
    let side = 16;
    let geom = ArrayGeometry::new(side, WAVELENGTH);
    let draws = 10_000usize;
    let nf = draws as f64;
    let mut worst = 0.0f64;
    for scenario in 0..20 {
        let dirs = random_directions(&mut rng, 4, side);
        let bank = SteeringBank::new(geom.clone(), &dirs, true);
        let beams = match DESIGNS[scenario % 3] {
            Design::Nsb => nsb_all(&bank),
            Design::NsbD => nsb_d_all(&bank),
            Design::Mpdrb => mpdrb_all(&bank),
        }
        .unwrap();
        let dense: Vec<DVector<Complex<f64>>> = beams.iter().map(|w| w.dense(&bank)).collect();
        let e0 = steering_vector(&geom, &dirs[0]);
        for k_db in [0.0, 10.0, 30.0] {
            let cfg = RicianConfig::from_db(k_db);
            // signal beam and the first interfering beam
            let mut sums = [Complex::new(0.0, 0.0); 2];
            let mut powers = [0.0f64; 2];
            for _ in 0..draws {
                let ch = sample_channel(&e0, &cfg, &mut rng);
                for b in 0..2 {
                    let x = ch.vector.dotc(&dense[b]);
                    sums[b] += x;
                    powers[b] += x.norm_sqr();
                }
            }
            for b in 0..2 {
                let (mean, var) = BeamGains::from_dense(&dense[b], &e0.entries)
                    .mean_and_variance(&cfg);
                let emp_mean = sums[b] / Complex::new(nf, 0.0);
                let emp_var = powers[b] / nf - emp_mean.norm_sqr();
                let floor = 1e-12 * (mean.norm_sqr() + var);
                let mean_err = (emp_mean - mean).norm_sqr().sqrt() / (4.0 * (var / nf).sqrt() + floor);
                let var_err = (emp_var - var).abs() / (4.0 * var / nf.sqrt() + floor);
                worst = worst.max(mean_err).max(var_err);
            }
        }
    }
    verdict(
        9,
        worst <= 1.0,
        &format!("sampled moments within 4 standard errors (worst {worst:.2} of band)"),
    );
}

#[test]
fn criterion_10_closed_form_inner_product() {
    let mut rng = ChaCha12Rng::seed_from_u64(100);
    let mut worst = 0.0f64;
    for side in [4usize, 16, 64] {
        let geom = ArrayGeometry::new(side, WAVELENGTH);
        let m2 = (side * side) as f64;
        for _ in 0..1000 {
            let mut angle = || DirectionAngles {
                zenith: 1.4 * rng.random::<f64>(),
                azimuth: std::f64::consts::TAU * rng.random::<f64>() - std::f64::consts::PI,
            };
            let (a, b) = (angle(), angle());
            let direct = inner_product(&steering_vector(&geom, &a), &steering_vector(&geom, &b));
            let closed =
                inner_product_closed_form(side, direction_cosines(&a), direction_cosines(&b));
            worst = worst.max((direct - closed).norm_sqr().sqrt() / m2);
        }
    }
    verdict(
        10,
        worst < 1e-10,
        &format!("direct vs separable closed form: worst error {worst:.1e} of M^2"),
    );
}

#[test]
fn criterion_11_use_and_forget_tightness() {
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let r = point(|c| {
            c.trials = 100;
            c.channel_draws = 50;
            c.with_mc = true;
            c.seed = 1_100 + i;
            c.mci_distance = 2_000.0 + 150.0 * i as f64;
            c.rician_k_db = if i % 2 == 0 { 30.0 } else { 10.0 };
            c.beamformer = DESIGNS[i as usize % 3];
        });
        let se_mc = r.se_mc.unwrap();
        worst = worst.max((se_mc - r.se_approx).abs() / se_mc);
    }
    verdict(
        11,
        worst < 0.05,
        &format!("approximate vs sampled SE: worst gap {:.2}% (< 5%)", worst * 100.0),
    );
}

#[test]
fn criterion_12_doppler_identity_and_derivatives() {
    let mut identical = true;
    for d in DESIGNS {
        let base = point(|c| {
            c.trials = 100;
            c.beamformer = d;
        });
        let with = point(|c| {
            c.trials = 100;
            c.beamformer = d;
            c.delta_vr = Some(0.0);
            c.heading = 30.0;
        });
        identical &= base == with;
    }

    let geom = ArrayGeometry::new(16, WAVELENGTH);
    let mut rng = ChaCha12Rng::seed_from_u64(120);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a = DirectionAngles {
            zenith: 0.1 + 1.2 * rng.random::<f64>(),
            azimuth: std::f64::consts::TAU * rng.random::<f64>() - std::f64::consts::PI,
        };
        let pair = steering_derivatives(&geom, &a);
        let fd = |da: f64, dz: f64| {
            let plus = steering_vector(
                &geom,
                &DirectionAngles {
                    zenith: a.zenith + dz,
                    azimuth: a.azimuth + da,
                },
            );
            let minus = steering_vector(
                &geom,
                &DirectionAngles {
                    zenith: a.zenith - dz,
                    azimuth: a.azimuth - da,
                },
            );
            (plus.entries - minus.entries) / Complex::new(2.0 * h, 0.0)
        };
        let err_az = (fd(h, 0.0) - &pair.d_azimuth).norm() / pair.d_azimuth.norm();
        let err_zen = (fd(0.0, h) - &pair.d_zenith).norm() / pair.d_zenith.norm();
        worst = worst.max(err_az).max(err_zen);
    }
    let ok = identical && worst < 1e-6;
    verdict(
        12,
        ok,
        &format!(
            "zero Doppler error is bit-identical: {identical}; derivative FD error {worst:.1e}"
        ),
    );
}
