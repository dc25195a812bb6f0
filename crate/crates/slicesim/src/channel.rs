//! Radio environment: log-distance pathloss, lognormal shadowing, Rayleigh
//! fading, random-waypoint mobility, and the SINR/SNR computations on top.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::net::OruSpec;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Log-distance pathloss with a free-space intercept at 1 m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossModel {
    /// Pathloss exponent.
    pub exponent: f64,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
}

impl PathlossModel {
    /// Free-space loss at the 1 m reference distance, dB.
    pub fn ref_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.carrier_hz / SPEED_OF_LIGHT).log10()
    }

    /// Pathloss at `distance_m`, dB. Distances below the 1 m reference are
    /// clamped to it.
    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(1.0);
        self.ref_loss_db() + 10.0 * self.exponent * d.log10()
    }
}

/// Slowly varying lognormal shadowing, one value per (user, unit) pair,
/// redrawn on a fixed TTI period.
#[derive(Debug, Clone)]
pub struct ShadowingField {
    sigma_db: f64,
    period_ttis: u64,
    num_orus: usize,
    values_db: Vec<f64>,
}

impl ShadowingField {
    pub fn new(num_users: usize, num_orus: usize, sigma_db: f64, period_ttis: u64) -> Self {
        assert!(period_ttis > 0, "shadowing period must be positive");
        ShadowingField {
            sigma_db,
            period_ttis,
            num_orus,
            values_db: vec![0.0; num_users * num_orus],
        }
    }

    /// Redraw all values when `tti` falls on the period boundary (including
    /// TTI 0). Returns true when a redraw happened.
    pub fn maybe_redraw<R: Rng>(&mut self, tti: u64, rng: &mut R) -> bool {
        if tti % self.period_ttis != 0 {
            return false;
        }
        for v in &mut self.values_db {
            let n: f64 = rng.sample(StandardNormal);
            *v = self.sigma_db * n;
        }
        true
    }

    pub fn value_db(&self, user: usize, oru: usize) -> f64 {
        self.values_db[user * self.num_orus + oru]
    }
}

/// Random-waypoint mobility inside a rectangular area.
#[derive(Debug, Clone)]
pub struct MobilityModel {
    area_m: [f64; 2],
    positions: Vec<[f64; 2]>,
    waypoints: Vec<[f64; 2]>,
}

fn uniform_point<R: Rng>(area: [f64; 2], rng: &mut R) -> [f64; 2] {
    [rng.gen::<f64>() * area[0], rng.gen::<f64>() * area[1]]
}

impl MobilityModel {
    /// Place `count` users uniformly at random and give each a first waypoint.
    pub fn new_uniform<R: Rng>(count: usize, area_m: [f64; 2], rng: &mut R) -> Self {
        assert!(area_m[0] > 0.0 && area_m[1] > 0.0, "area must be positive");
        let positions = (0..count).map(|_| uniform_point(area_m, rng)).collect();
        let waypoints = (0..count).map(|_| uniform_point(area_m, rng)).collect();
        MobilityModel {
            area_m,
            positions,
            waypoints,
        }
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn waypoints(&self) -> &[[f64; 2]] {
        &self.waypoints
    }

    /// Advance every user by exactly `speed * dt` of path length, walking
    /// toward its waypoint and drawing a fresh one whenever it is reached.
    pub fn step<R: Rng>(&mut self, speeds_mps: &[f64], dt_s: f64, rng: &mut R) {
        assert_eq!(speeds_mps.len(), self.positions.len());
        for k in 0..self.positions.len() {
            let mut remaining = speeds_mps[k] * dt_s;
            while remaining > 0.0 {
                let pos = self.positions[k];
                let wp = self.waypoints[k];
                let (dx, dy) = (wp[0] - pos[0], wp[1] - pos[1]);
                let dist = (dx * dx + dy * dy).sqrt();
                if dist <= remaining {
                    self.positions[k] = wp;
                    remaining -= dist;
                    self.waypoints[k] = uniform_point(self.area_m, rng);
                } else {
                    let scale = remaining / dist;
                    self.positions[k] = [pos[0] + dx * scale, pos[1] + dy * scale];
                    remaining = 0.0;
                }
            }
        }
    }
}

/// 3-D distance between a ground-level user and an elevated antenna.
pub fn distance_3d(user_pos_m: [f64; 2], oru: &OruSpec) -> f64 {
    let dx = user_pos_m[0] - oru.pos_m[0];
    let dy = user_pos_m[1] - oru.pos_m[1];
    (dx * dx + dy * dy + oru.height_m * oru.height_m).sqrt()
}

/// One Rayleigh power sample with unit mean: `(a^2 + b^2) / 2`, `a, b ~ N(0,1)`.
pub fn rayleigh_power<R: Rng>(rng: &mut R) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a * a + b * b) / 2.0
}

/// Linear channel power gains for every (user, unit) pair at one TTI.
#[derive(Debug, Clone)]
pub struct ChannelGains {
    num_orus: usize,
    gains: Vec<f64>,
}

/// Draw fresh fading for every pair and combine with pathloss and shadowing:
/// `gain = 10^(-(PL + X_sh)/10) * |h|^2`.
pub fn draw_channel<R: Rng>(
    positions_m: &[[f64; 2]],
    orus: &[OruSpec],
    pathloss: &PathlossModel,
    shadowing: &ShadowingField,
    rng: &mut R,
) -> ChannelGains {
    let mut gains = Vec::with_capacity(positions_m.len() * orus.len());
    for (k, &pos) in positions_m.iter().enumerate() {
        for (m, oru) in orus.iter().enumerate() {
            let loss_db = pathloss.pathloss_db(distance_3d(pos, oru)) + shadowing.value_db(k, m);
            gains.push(10f64.powf(-loss_db / 10.0) * rayleigh_power(rng));
        }
    }
    ChannelGains {
        num_orus: orus.len(),
        gains,
    }
}

impl ChannelGains {
    pub fn from_raw(gains: Vec<f64>, num_orus: usize) -> Self {
        assert!(num_orus > 0 && gains.len() % num_orus == 0);
        ChannelGains { num_orus, gains }
    }

    pub fn num_users(&self) -> usize {
        self.gains.len() / self.num_orus
    }

    pub fn num_orus(&self) -> usize {
        self.num_orus
    }

    pub fn linear(&self, user: usize, oru: usize) -> f64 {
        self.gains[user * self.num_orus + oru]
    }

    pub fn db(&self, user: usize, oru: usize) -> f64 {
        10.0 * self.linear(user, oru).log10()
    }

    /// Flat view in user-major order, used for stream fingerprinting.
    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }

    /// SINR of user `k` served by unit `m`: every other unit interferes at its
    /// full transmit power, regardless of load.
    pub fn sinr_linear(&self, k: usize, m: usize, orus: &[OruSpec], noise_mw: f64) -> f64 {
        let mut interference = 0.0;
        for (i, oru) in orus.iter().enumerate() {
            if i != m {
                interference += oru.tx_power_mw * self.linear(k, i);
            }
        }
        orus[m].tx_power_mw * self.linear(k, m) / (interference + noise_mw)
    }

    pub fn sinr_db(&self, k: usize, m: usize, orus: &[OruSpec], noise_mw: f64) -> f64 {
        10.0 * self.sinr_linear(k, m, orus, noise_mw).log10()
    }

    /// Interference-free SNR of user `k` toward unit `m`.
    pub fn snr_linear(&self, k: usize, m: usize, orus: &[OruSpec], noise_mw: f64) -> f64 {
        orus[m].tx_power_mw * self.linear(k, m) / noise_mw
    }

    pub fn snr_db(&self, k: usize, m: usize, orus: &[OruSpec], noise_mw: f64) -> f64 {
        10.0 * self.snr_linear(k, m, orus, noise_mw).log10()
    }
}

/// Convert a dBm noise level to linear mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}
