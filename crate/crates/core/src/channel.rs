//! Spherical-wave multiuser channels on a centered uniform linear array.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix};
use crate::rng::{resample_seed, rng_from_seed, uniform};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical scenario and Monte-Carlo sizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    pub carrier_hz: f64,
    pub spacing_m: f64,
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub n_paths: usize,
    pub nlos_gain_db: f64,
    pub rho_range_m: [f64; 2],
    pub theta_range_rad: [f64; 2],
    pub n_trials: usize,
    pub rng_seed: u64,
}

impl ScenarioConfig {
    /// 100 GHz carrier, half-wavelength spacing, 200 kHz bandwidth,
    /// `sigma^2 = 7.96e-16 W`, one LOS and four NLOS paths at -15 dB.
    pub fn with_array(n_antennas: usize, n_users: usize, n_trials: usize, rng_seed: u64) -> Self {
        let carrier_hz = 100e9;
        Self {
            n_antennas,
            n_users,
            carrier_hz,
            spacing_m: SPEED_OF_LIGHT / carrier_hz / 2.0,
            bandwidth_hz: 200e3,
            noise_w: 7.96e-16,
            n_paths: 4,
            nlos_gain_db: -15.0,
            rho_range_m: [50.0, 1000.0],
            theta_range_rad: [-PI / 3.0, PI / 3.0],
            n_trials,
            rng_seed,
        }
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_antennas == 0 || self.n_users == 0 {
            return bad("n_antennas and n_users must be positive");
        }
        if self.n_users > self.n_antennas {
            return bad("n_users must not exceed n_antennas");
        }
        if !(self.carrier_hz > 0.0) || !(self.spacing_m > 0.0) || !(self.noise_w > 0.0) {
            return bad("carrier_hz, spacing_m and noise_w must be positive");
        }
        if !(self.rho_range_m[0] > 0.0 && self.rho_range_m[1] >= self.rho_range_m[0]) {
            return bad("rho_range_m must be a nonempty positive interval");
        }
        if !(self.theta_range_rad[1] >= self.theta_range_rad[0]) {
            return bad("theta_range_rad must be a nonempty interval");
        }
        if !self.nlos_gain_db.is_finite() {
            return bad("nlos_gain_db must be finite");
        }
        if self.n_trials == 0 {
            return bad("n_trials must be positive");
        }
        Ok(())
    }
}

/// Centered ULA coordinates `x_n = (n - (N-1)/2) d`, zero-based `n`.
pub fn antenna_positions(n: usize, spacing_m: f64) -> Vec<f64> {
    let center = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - center) * spacing_m).collect()
}

/// Law-of-cosines distance from antenna at `x_n` to a point at range `rho`
/// and angle `theta` measured from the array axis.
pub fn spherical_distance(rho: f64, theta: f64, x_n: f64) -> f64 {
    (rho * rho + x_n * x_n - 2.0 * rho * x_n * theta.cos()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    pub rho_m: f64,
    pub theta_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGeometry {
    pub rho_m: f64,
    pub theta_rad: f64,
    /// Phase of the complex path gain.
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserParams {
    pub los: UserGeometry,
    pub paths: Vec<PathGeometry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N x S`, column `k` is user `k`'s channel.
    pub h: ComplexMatrix,
    pub users: Vec<UserParams>,
}

fn spherical_term(
    positions: &[f64],
    rho: f64,
    theta: f64,
    wavelength: f64,
    gain: Complex64,
) -> impl Iterator<Item = Complex64> + '_ {
    let amp = wavelength / (4.0 * PI * rho);
    positions
        .iter()
        .map(move |&x| gain * amp * cis(-TAU * spherical_distance(rho, theta, x) / wavelength))
}

/// Per-antenna channel of one user: a LOS term plus the NLOS paths, each
/// with free-space amplitude `lambda / (4 pi rho)`.
pub fn user_channel(cfg: &ScenarioConfig, user: &UserParams) -> Vec<Complex64> {
    let positions = antenna_positions(cfg.n_antennas, cfg.spacing_m);
    let wavelength = cfg.wavelength_m();
    let nlos_amp = 10f64.powf(cfg.nlos_gain_db / 20.0);
    let mut h: Vec<Complex64> = spherical_term(
        &positions,
        user.los.rho_m,
        user.los.theta_rad,
        wavelength,
        Complex64::new(1.0, 0.0),
    )
    .collect();
    for path in &user.paths {
        let gain = cis(path.phase_rad) * nlos_amp;
        for (hn, term) in h
            .iter_mut()
            .zip(spherical_term(&positions, path.rho_m, path.theta_rad, wavelength, gain))
        {
            *hn += term;
        }
    }
    h
}

/// Draws user geometry in the fixed order: for each user `rho`, `theta`,
/// then for each path `rho`, `theta`, gain phase.
pub fn draw_users<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Vec<UserParams> {
    let [rho_lo, rho_hi] = cfg.rho_range_m;
    let [th_lo, th_hi] = cfg.theta_range_rad;
    (0..cfg.n_users)
        .map(|_| {
            let los = UserGeometry {
                rho_m: uniform(rng, rho_lo, rho_hi),
                theta_rad: uniform(rng, th_lo, th_hi),
            };
            let paths = (0..cfg.n_paths)
                .map(|_| PathGeometry {
                    rho_m: uniform(rng, rho_lo, rho_hi),
                    theta_rad: uniform(rng, th_lo, th_hi),
                    phase_rad: uniform(rng, 0.0, TAU),
                })
                .collect();
            UserParams { los, paths }
        })
        .collect()
}

pub fn assemble_channel(cfg: &ScenarioConfig, users: Vec<UserParams>) -> ChannelRealization {
    let mut h = ComplexMatrix::zeros(cfg.n_antennas, users.len());
    for (k, user) in users.iter().enumerate() {
        for (n, v) in user_channel(cfg, user).into_iter().enumerate() {
            h[(n, k)] = v;
        }
    }
    ChannelRealization { h, users }
}

/// Channel for `trial_index` from the seed `rng_seed ^ splitmix64(trial_index)`.
pub fn sample_scene(cfg: &ScenarioConfig, trial_index: u64) -> ChannelRealization {
    sample_scene_attempt(cfg, trial_index, 0)
}

/// Channel for a resampling attempt of `trial_index`; attempt 0 is
/// [`sample_scene`].
pub fn sample_scene_attempt(cfg: &ScenarioConfig, trial_index: u64, attempt: u64) -> ChannelRealization {
    let mut rng = rng_from_seed(resample_seed(cfg.rng_seed, trial_index, attempt));
    let users = draw_users(cfg, &mut rng);
    assemble_channel(cfg, users)
}

/// `2 D^2 / lambda` with aperture `D = N d`.
pub fn fraunhofer_distance(cfg: &ScenarioConfig) -> f64 {
    let aperture = cfg.n_antennas as f64 * cfg.spacing_m;
    2.0 * aperture * aperture / cfg.wavelength_m()
}
