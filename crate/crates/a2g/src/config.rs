//! Flat key-value run configuration: parsing, validation, defaults, and
//! the conversion into a [`Scenario`].
//!
//! The format is one `key = value` pair per line with `#` comments.
//! Unknown keys are rejected. Quantities configured in dB (`rician_k`,
//! the gains and losses) accept an optional `dB`/`dBm` suffix and are
//! converted to linear exactly once, when the scenario is built.

use std::fmt;

use crate::beamform::Design;
use crate::channel::{LinkBudget, PowerInterpretation, RicianConfig};
use crate::impairments::{DopplerConfig, PositionOffset};
use crate::sim::{MonteCarlo, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    UnknownKey { key: String },
    BadValue { key: String, value: String, expected: &'static str },
    OutOfRange { key: &'static str, expected: &'static str },
    Syntax { line: usize, text: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey { key } => write!(f, "unknown config key `{key}`"),
            ConfigError::BadValue { key, value, expected } => {
                write!(f, "bad value `{value}` for `{key}`: expected {expected}")
            }
            ConfigError::OutOfRange { key, expected } => {
                write!(f, "`{key}` out of range: expected {expected}")
            }
            ConfigError::Syntax { line, text } => {
                write!(f, "line {line}: expected `key = value`, got `{text}`")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// All run parameters, in configuration units (meters, Hz, dB, degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub macro_radius: f64,
    pub micro_radius: f64,
    pub tiers: usize,
    pub vertical_distance: f64,
    pub mci_distance: f64,
    pub mci_azimuth: f64,
    pub array_size: usize,
    pub carrier_frequency: f64,
    pub bandwidth_per_user: f64,
    pub rician_k_db: f64,
    pub tx_power_dbm: f64,
    pub power_interpretation: PowerInterpretation,
    pub back_off_db: f64,
    pub transmitter_loss_db: f64,
    pub atmospheric_cloud_loss_db: f64,
    pub receiver_antenna_gain_db: f64,
    pub receiver_noise_figure_db: f64,
    pub other_receiver_loss_db: f64,
    pub noise_temperature: f64,
    pub beamformer: Design,
    pub trials: usize,
    pub channel_draws: usize,
    pub seed: u64,
    pub with_mc: bool,
    pub airplane_speed: f64,
    pub heading: f64,
    pub delta_vr: Option<f64>,
    pub position_offset: f64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            macro_radius: 5_000.0,
            micro_radius: 50.0,
            tiers: 5,
            vertical_distance: 10_000.0,
            mci_distance: 2_500.0,
            mci_azimuth: 45.0,
            array_size: 200,
            carrier_frequency: 73.5e9,
            bandwidth_per_user: 714.0e6,
            rician_k_db: 30.0,
            tx_power_dbm: 5.0,
            power_interpretation: PowerInterpretation::PerElement,
            back_off_db: 10.0,
            transmitter_loss_db: 1.8,
            atmospheric_cloud_loss_db: 7.9,
            receiver_antenna_gain_db: 60.2,
            receiver_noise_figure_db: 6.0,
            other_receiver_loss_db: 1.8,
            noise_temperature: 290.0,
            beamformer: Design::Nsb,
            trials: 500,
            channel_draws: 20,
            seed: 1,
            with_mc: false,
            airplane_speed: 200.0,
            heading: 0.0,
            delta_vr: None,
            position_offset: 0.0,
            workers: 0,
        }
    }
}

fn db_value(key: &str, raw: &str) -> Result<f64, ConfigError> {
    let trimmed = raw.trim();
    let body = trimmed
        .strip_suffix("dBm")
        .or_else(|| trimmed.strip_suffix("dbm"))
        .or_else(|| trimmed.strip_suffix("dB"))
        .or_else(|| trimmed.strip_suffix("db"))
        .unwrap_or(trimmed)
        .trim();
    body.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: raw.into(),
        expected: "a number, optionally suffixed with dB",
    })
}

fn num<T: std::str::FromStr>(key: &str, raw: &str, expected: &'static str) -> Result<T, ConfigError> {
    raw.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: raw.into(),
        expected,
    })
}

impl RunConfig {
    /// Parse `key = value` text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.into(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one key; used by both file parsing and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "macro_radius" => self.macro_radius = num(key, value, "meters")?,
            "micro_radius" => self.micro_radius = num(key, value, "meters")?,
            "tiers" => self.tiers = num(key, value, "a tier count")?,
            "vertical_distance" => self.vertical_distance = num(key, value, "meters")?,
            "mci_distance" => self.mci_distance = num(key, value, "meters")?,
            "mci_azimuth" => self.mci_azimuth = num(key, value, "degrees")?,
            "array_size" => self.array_size = num(key, value, "elements per side")?,
            "carrier_frequency" => self.carrier_frequency = num(key, value, "hertz")?,
            "bandwidth_per_user" => self.bandwidth_per_user = num(key, value, "hertz")?,
            "rician_k" => self.rician_k_db = db_value(key, value)?,
            "tx_power_per_element" => self.tx_power_dbm = db_value(key, value)?,
            "power_interpretation" => {
                self.power_interpretation = match value {
                    "per_element" => PowerInterpretation::PerElement,
                    "total" => PowerInterpretation::Total,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "per_element or total",
                        })
                    }
                }
            }
            "back_off" => self.back_off_db = db_value(key, value)?,
            "transmitter_loss" => self.transmitter_loss_db = db_value(key, value)?,
            "atmospheric_cloud_loss" => self.atmospheric_cloud_loss_db = db_value(key, value)?,
            "receiver_antenna_gain" => self.receiver_antenna_gain_db = db_value(key, value)?,
            "receiver_noise_figure" => self.receiver_noise_figure_db = db_value(key, value)?,
            "other_receiver_loss" => self.other_receiver_loss_db = db_value(key, value)?,
            "noise_temperature" => self.noise_temperature = num(key, value, "kelvin")?,
            "beamformer" => {
                self.beamformer = match value {
                    "nsb" => Design::Nsb,
                    "nsb-d" | "nsbd" => Design::NsbD,
                    "mpdrb" => Design::Mpdrb,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "nsb, nsb-d, or mpdrb",
                        })
                    }
                }
            }
            "trials" => self.trials = num(key, value, "a trial count")?,
            "channel_draws" => self.channel_draws = num(key, value, "a draw count")?,
            "seed" => self.seed = num(key, value, "an unsigned integer")?,
            "with_mc" => {
                self.with_mc = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "true or false",
                        })
                    }
                }
            }
            "airplane_speed" => self.airplane_speed = num(key, value, "m/s")?,
            "heading" => self.heading = num(key, value, "degrees")?,
            "delta_vr" => self.delta_vr = Some(num(key, value, "a relative error in [-1, 1]")?),
            "position_offset" => self.position_offset = num(key, value, "meters")?,
            "workers" => self.workers = num(key, value, "a worker count (0 = auto)")?,
            _ => {
                return Err(ConfigError::UnknownKey { key: key.into() });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks: [(&'static str, bool, &'static str); 12] = [
            ("macro_radius", self.macro_radius > 0.0, "> 0 meters"),
            ("micro_radius", self.micro_radius > 0.0, "> 0 meters"),
            ("tiers", (1..=5).contains(&self.tiers), "1 to 5"),
            ("vertical_distance", self.vertical_distance > 0.0, "> 0 meters"),
            (
                "mci_distance",
                self.mci_distance >= 0.0 && self.mci_distance <= self.macro_radius,
                "0 to macro_radius meters",
            ),
            ("array_size", self.array_size >= 1, ">= 1"),
            ("carrier_frequency", self.carrier_frequency > 0.0, "> 0 Hz"),
            ("bandwidth_per_user", self.bandwidth_per_user > 0.0, "> 0 Hz"),
            ("trials", self.trials >= 1, ">= 1"),
            (
                "delta_vr",
                self.delta_vr.map_or(true, |d| (-1.0..=1.0).contains(&d)),
                "-1 to 1",
            ),
            ("position_offset", self.position_offset >= 0.0, ">= 0 meters"),
            ("airplane_speed", self.airplane_speed >= 0.0, ">= 0 m/s"),
        ];
        for (key, ok, expected) in checks {
            if !ok {
                return Err(ConfigError::OutOfRange { key, expected });
            }
        }
        Ok(())
    }

    /// Canonical emission; `parse(emit(cfg))` reproduces `cfg` exactly.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("macro_radius", format!("{}", self.macro_radius));
        kv("micro_radius", format!("{}", self.micro_radius));
        kv("tiers", format!("{}", self.tiers));
        kv("vertical_distance", format!("{}", self.vertical_distance));
        kv("mci_distance", format!("{}", self.mci_distance));
        kv("mci_azimuth", format!("{}", self.mci_azimuth));
        kv("array_size", format!("{}", self.array_size));
        kv("carrier_frequency", format!("{}", self.carrier_frequency));
        kv("bandwidth_per_user", format!("{}", self.bandwidth_per_user));
        kv("rician_k", format!("{}", self.rician_k_db));
        kv("tx_power_per_element", format!("{}", self.tx_power_dbm));
        kv(
            "power_interpretation",
            match self.power_interpretation {
                PowerInterpretation::PerElement => "per_element".into(),
                PowerInterpretation::Total => "total".into(),
            },
        );
        kv("back_off", format!("{}", self.back_off_db));
        kv("transmitter_loss", format!("{}", self.transmitter_loss_db));
        kv(
            "atmospheric_cloud_loss",
            format!("{}", self.atmospheric_cloud_loss_db),
        );
        kv(
            "receiver_antenna_gain",
            format!("{}", self.receiver_antenna_gain_db),
        );
        kv(
            "receiver_noise_figure",
            format!("{}", self.receiver_noise_figure_db),
        );
        kv("other_receiver_loss", format!("{}", self.other_receiver_loss_db));
        kv("noise_temperature", format!("{}", self.noise_temperature));
        kv("beamformer", self.beamformer.to_string());
        kv("trials", format!("{}", self.trials));
        kv("channel_draws", format!("{}", self.channel_draws));
        kv("seed", format!("{}", self.seed));
        kv("with_mc", format!("{}", self.with_mc));
        kv("airplane_speed", format!("{}", self.airplane_speed));
        kv("heading", format!("{}", self.heading));
        if let Some(d) = self.delta_vr {
            kv("delta_vr", format!("{d}"));
        }
        kv("position_offset", format!("{}", self.position_offset));
        kv("workers", format!("{}", self.workers));
        s
    }

    fn lumped_losses_db(&self) -> f64 {
        self.back_off_db
            + self.transmitter_loss_db
            + self.atmospheric_cloud_loss_db
            + self.other_receiver_loss_db
    }

    pub fn budget(&self) -> LinkBudget<f64> {
        let db = |x: f64| 10f64.powf(x / 10.0);
        LinkBudget {
            tx_power_per_element: db(self.tx_power_dbm) / 1000.0,
            rx_gain: db(self.receiver_antenna_gain_db),
            lumped_losses: db(self.lumped_losses_db()),
            noise_temperature: self.noise_temperature,
            bandwidth: self.bandwidth_per_user,
            noise_figure: db(self.receiver_noise_figure_db),
            boltzmann: 1.374e-23,
            power_interpretation: self.power_interpretation,
        }
    }

    pub fn scenario(&self) -> Result<Scenario<f64>, ConfigError> {
        self.validate()?;
        let deg = std::f64::consts::PI / 180.0;
        Ok(Scenario {
            macro_radius: self.macro_radius,
            micro_radius: self.micro_radius,
            tiers: self.tiers,
            altitude: self.vertical_distance,
            mci_distance: self.mci_distance,
            mci_azimuth: self.mci_azimuth * deg,
            side: self.array_size,
            carrier: self.carrier_frequency,
            rician: RicianConfig::from_db(self.rician_k_db),
            budget: self.budget(),
            design: self.beamformer,
            doppler: self.delta_vr.map(|d| DopplerConfig {
                airplane_speed: self.airplane_speed,
                heading_azimuth: self.heading * deg,
                delta_vr: d,
                carrier: self.carrier_frequency,
            }),
            offset: (self.position_offset > 0.0).then_some(PositionOffset {
                delta: self.position_offset,
            }),
            mc: MonteCarlo {
                trials: self.trials,
                channel_draws: self.channel_draws,
                seed: self.seed,
                with_mc: self.with_mc,
            },
        })
    }
}
