//! Seeded synthetic stand-ins for measured capacity factors and demand.
//!
//! Steps are hours counted from midnight on 1 January.
//!
//! - `solar_cf`: a half-sine between sunrise and sunset, with day length
//!   swinging from 8 h in winter to 16 h in summer and a daily cloudiness
//!   draw. Zero from 20:00 to 04:00 all year round.
//! - `solar_desert_cf`: low-latitude variant with clear skies and day length
//!   between 10.5 h and 13.5 h.
//! - `wind_cf`: a mean-reverting latent process squashed into `[0, 1]`,
//!   stronger in winter.
//! - `wind_trade_cf`, `wind_polar_cf`: hub-height wind speed from a
//!   mean-reverting process, passed through a turbine power curve (cut-in
//!   3.5 m/s, rated 12.5 m/s, cut-out 25 m/s). Trade winds are moderate and
//!   steady; polar winds are strong but swing between long lulls and storms
//!   that trip the cut-out.
//! - `elec_demand`: GWh/h around 12, winter-heavy, with morning and evening
//!   peaks and lower weekends.
//! - `gas_demand`: GWh/h peaking in mid-January near 35 and falling to about
//!   7 in summer, with a mild diurnal swing.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use super::series::TimeSeriesFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    SolarCf,
    SolarDesertCf,
    WindCf,
    WindTradeCf,
    WindPolarCf,
    ElecDemand,
    GasDemand,
}

impl SynthKind {
    pub const ALL: [SynthKind; 7] = [
        SynthKind::SolarCf,
        SynthKind::SolarDesertCf,
        SynthKind::WindCf,
        SynthKind::WindTradeCf,
        SynthKind::WindPolarCf,
        SynthKind::ElecDemand,
        SynthKind::GasDemand,
    ];

    pub fn is_capacity_factor(self) -> bool {
        !matches!(self, SynthKind::ElecDemand | SynthKind::GasDemand)
    }

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::SolarCf => "solar_cf",
            SynthKind::SolarDesertCf => "solar_desert_cf",
            SynthKind::WindCf => "wind_cf",
            SynthKind::WindTradeCf => "wind_trade_cf",
            SynthKind::WindPolarCf => "wind_polar_cf",
            SynthKind::ElecDemand => "elec_demand",
            SynthKind::GasDemand => "gas_demand",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown series kind `{0}`; expected one of solar_cf, solar_desert_cf, wind_cf, wind_trade_cf, wind_polar_cf, elec_demand, gas_demand")]
pub struct UnknownKind(pub String);

impl FromStr for SynthKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

fn day_and_hour(t: usize) -> (f64, f64) {
    ((t / 24) as f64, (t % 24) as f64)
}

/// +1 in mid-January, −1 in mid-July.
fn winter(day: f64) -> f64 {
    (2.0 * PI * (day - 15.0) / 365.0).cos()
}

struct SolarSite {
    /// Half the annual swing of day length, hours.
    swing: f64,
    clear: std::ops::Range<f64>,
    peak: f64,
}

const TEMPERATE_SUN: SolarSite = SolarSite {
    swing: 4.0,
    clear: 0.35..1.0,
    peak: 0.85,
};

const DESERT_SUN: SolarSite = SolarSite {
    swing: 1.5,
    clear: 0.8..1.0,
    peak: 0.9,
};

fn solar(site: &SolarSite, steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut clear = 1.0;
    (0..steps)
        .map(|t| {
            let (day, hour) = day_and_hour(t);
            if t % 24 == 0 {
                clear = rng.gen_range(site.clear.clone());
            }
            let length = 12.0 - site.swing * winter(day);
            let sunrise = 12.0 - length / 2.0;
            let x = (hour + 0.5 - sunrise) / length;
            if (0.0..=1.0).contains(&x) {
                site.peak * clear * (PI * x).sin()
            } else {
                0.0
            }
        })
        .collect()
}

fn wind(steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, 0.25).expect("valid sigma");
    let mut z: f64 = noise.sample(rng);
    (0..steps)
        .map(|t| {
            let (day, _) = day_and_hour(t);
            z = 0.95 * z + noise.sample(rng);
            let level = -0.6 + 0.5 * winter(day) + z;
            1.0 / (1.0 + (-2.0 * level).exp())
        })
        .collect()
}

struct WindSite {
    /// Mean speed in m/s and its winter excess.
    mean: f64,
    winter: f64,
    /// Stationary standard deviation of the speed, m/s.
    spread: f64,
    /// Hour-to-hour persistence of the anomaly.
    persistence: f64,
}

const TRADE_WIND: WindSite = WindSite {
    mean: 8.5,
    winter: 0.5,
    spread: 2.0,
    persistence: 0.97,
};

const POLAR_WIND: WindSite = WindSite {
    mean: 12.0,
    winter: 2.0,
    spread: 8.0,
    persistence: 0.99,
};

/// Output per unit of rated power at hub-height speed `v` (m/s).
fn power_curve(v: f64) -> f64 {
    const CUT_IN: f64 = 3.5;
    const RATED: f64 = 12.5;
    const CUT_OUT: f64 = 25.0;
    if !(CUT_IN..CUT_OUT).contains(&v) {
        0.0
    } else if v >= RATED {
        1.0
    } else {
        (v.powi(3) - CUT_IN.powi(3)) / (RATED.powi(3) - CUT_IN.powi(3))
    }
}

fn turbine(site: &WindSite, steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, 1.0).expect("valid sigma");
    let kick = (1.0 - site.persistence * site.persistence).sqrt();
    let mut z: f64 = noise.sample(rng);
    (0..steps)
        .map(|t| {
            let (day, _) = day_and_hour(t);
            z = site.persistence * z + kick * noise.sample(rng);
            power_curve(site.mean + site.winter * winter(day) + site.spread * z)
        })
        .collect()
}

fn elec(steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, 0.3).expect("valid sigma");
    (0..steps)
        .map(|t| {
            let (day, hour) = day_and_hour(t);
            let diurnal = 1.8 * (-((hour - 9.0) / 2.5).powi(2)).exp() + 2.5 * (-((hour - 19.0) / 2.5).powi(2)).exp()
                - 2.0 * (-((hour - 3.0) / 3.0).powi(2)).exp();
            let weekend = if (t / 24) % 7 >= 5 { -1.5 } else { 0.0 };
            (12.0 + 2.0 * winter(day) + diurnal + weekend + noise.sample(rng)).max(0.0)
        })
        .collect()
}

fn gas(steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, 0.8).expect("valid sigma");
    (0..steps)
        .map(|t| {
            let (day, hour) = day_and_hour(t);
            let seasonal = 21.0 + 14.0 * winter(day);
            let diurnal = 1.0 + 0.15 * (2.0 * PI * (hour - 7.0) / 24.0).cos();
            (seasonal * diurnal + noise.sample(rng)).max(0.0)
        })
        .collect()
}

/// One named column of `steps` values, reproducible from `seed`.
pub fn synth_series(kind: SynthKind, steps: usize, seed: u64) -> TimeSeriesFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = match kind {
        SynthKind::SolarCf => solar(&TEMPERATE_SUN, steps, &mut rng),
        SynthKind::SolarDesertCf => solar(&DESERT_SUN, steps, &mut rng),
        SynthKind::WindCf => wind(steps, &mut rng),
        SynthKind::WindTradeCf => turbine(&TRADE_WIND, steps, &mut rng),
        SynthKind::WindPolarCf => turbine(&POLAR_WIND, steps, &mut rng),
        SynthKind::ElecDemand => elec(steps, &mut rng),
        SynthKind::GasDemand => gas(steps, &mut rng),
    };
    let mut out = TimeSeriesFile::new(format!("synth:{kind}"));
    out.push(kind.name(), values);
    out
}
