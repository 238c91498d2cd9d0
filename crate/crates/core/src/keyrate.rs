//! Scenario-level key rates.
//!
//! A [`ScenarioConfig`] describes the link; [`secret_key`] turns it into
//! detector parameters, evaluates the BER of the source state and applies
//!
//! `K = S + D − (f_EC + f_PA) · S · H₂(BER)`
//!
//! where `S` is sifted bits and `D` dark-count bits. The sign of `D` follows
//! [`DarkCountSign`].

use serde::{Deserialize, Serialize};

use crate::ber_model::{ber_from_distribution, BerBreakdown, BerWeighting, DetectorParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::photon_statistics::{
    mean_pairs_from_rate, mode_count_from_times, pair_number_distribution, SourceParams,
    TruncationOptions, DEFAULT_MAX_PAIRS, DEFAULT_TAIL_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    SourceAtAlice,
    SourceInMiddle,
}

/// How dark-count bits enter the key formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DarkCountSign {
    /// `K = S + D − …`
    #[default]
    Paper,
    /// `K = S − D − …`
    Physical,
}

mod defaults {
    use super::*;

    pub fn geometry_factor() -> f64 {
        9e-4
    }
    pub fn timing_window() -> f64 {
        1e-9
    }
    pub fn coherence_time() -> f64 {
        1e-13
    }
    pub fn duration() -> f64 {
        100.0
    }
    pub fn fiber_loss_db_per_km() -> f64 {
        0.2
    }
    pub fn enclave_loss_db() -> f64 {
        7.0
    }
    pub fn dark_rate_hz() -> f64 {
        1500.0
    }
    pub fn dead_time_s() -> f64 {
        1e-6
    }
    pub fn visibility() -> f64 {
        0.97
    }
    pub fn tail_eps() -> f64 {
        DEFAULT_TAIL_EPS
    }
    pub fn max_pairs() -> usize {
        DEFAULT_MAX_PAIRS
    }
}

/// Full description of one experiment point.
///
/// `pair_rate`, `distance_km`, `placement`, `f_ec` and `f_pa` are required
/// when deserializing; everything else defaults to the reference setup
/// (1 ns window, 100 fs coherence, 7 dB per enclave, 1500 Hz darks, 1 µs dead
/// time, 97 % visibility, 100 s run, `G = 9e-4`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Source pair generation rate `S` (pairs/s).
    pub pair_rate: f64,
    #[serde(default = "defaults::geometry_factor")]
    pub geometry_factor: f64,
    #[serde(default = "defaults::timing_window")]
    pub timing_window: f64,
    #[serde(default = "defaults::coherence_time")]
    pub coherence_time: f64,
    #[serde(default = "defaults::duration")]
    pub duration: f64,
    pub distance_km: f64,
    pub placement: Placement,
    #[serde(default = "defaults::fiber_loss_db_per_km")]
    pub fiber_loss_db_per_km: f64,
    /// Loss inside each party's enclave, detector efficiency included.
    #[serde(default = "defaults::enclave_loss_db")]
    pub enclave_loss_db: f64,
    /// Overrides `enclave_loss_db` on Alice's side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enclave_loss_db_alice: Option<f64>,
    /// Overrides `enclave_loss_db` on Bob's side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enclave_loss_db_bob: Option<f64>,
    #[serde(default = "defaults::dark_rate_hz")]
    pub dark_rate_hz: f64,
    #[serde(default = "defaults::dead_time_s")]
    pub dead_time_s: f64,
    #[serde(default = "defaults::visibility")]
    pub visibility: f64,
    pub f_ec: f64,
    pub f_pa: f64,
    #[serde(default)]
    pub pulsed: bool,
    /// Pulse period in pulsed mode; the timing window when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_period_s: Option<f64>,
    #[serde(default = "defaults::tail_eps")]
    pub tail_eps: f64,
    #[serde(default = "defaults::max_pairs")]
    pub max_pairs: usize,
    #[serde(default)]
    pub dark_count_sign: DarkCountSign,
    #[serde(default)]
    pub ber_weighting: BerWeighting,
}

impl ScenarioConfig {
    /// Reference setup with `f_EC = 1.2`, `f_PA = 1.0`.
    pub fn reference(pair_rate: f64, distance_km: f64, placement: Placement) -> Self {
        ScenarioConfig {
            pair_rate,
            geometry_factor: defaults::geometry_factor(),
            timing_window: defaults::timing_window(),
            coherence_time: defaults::coherence_time(),
            duration: defaults::duration(),
            distance_km,
            placement,
            fiber_loss_db_per_km: defaults::fiber_loss_db_per_km(),
            enclave_loss_db: defaults::enclave_loss_db(),
            enclave_loss_db_alice: None,
            enclave_loss_db_bob: None,
            dark_rate_hz: defaults::dark_rate_hz(),
            dead_time_s: defaults::dead_time_s(),
            visibility: defaults::visibility(),
            f_ec: 1.2,
            f_pa: 1.0,
            pulsed: false,
            pulse_period_s: None,
            tail_eps: defaults::tail_eps(),
            max_pairs: defaults::max_pairs(),
            dark_count_sign: DarkCountSign::Paper,
            ber_weighting: BerWeighting::YieldConditioned,
        }
    }

    /// Returns every violated constraint, one message per field.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut problems = Vec::new();
        let mut non_negative = |name: &str, v: f64| {
            if !(v.is_finite() && v >= 0.0) {
                problems.push(format!("{name}: must be finite and >= 0, got {v}"));
            }
        };
        non_negative("pair_rate", self.pair_rate);
        non_negative("geometry_factor", self.geometry_factor);
        non_negative("duration", self.duration);
        non_negative("distance_km", self.distance_km);
        non_negative("fiber_loss_db_per_km", self.fiber_loss_db_per_km);
        non_negative("enclave_loss_db", self.enclave_loss_db);
        if let Some(v) = self.enclave_loss_db_alice {
            non_negative("enclave_loss_db_alice", v);
        }
        if let Some(v) = self.enclave_loss_db_bob {
            non_negative("enclave_loss_db_bob", v);
        }
        non_negative("dark_rate_hz", self.dark_rate_hz);
        non_negative("dead_time_s", self.dead_time_s);
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name}: must be finite and > 0, got {v}"));
            }
        };
        positive("timing_window", self.timing_window);
        positive("coherence_time", self.coherence_time);
        if let Some(v) = self.pulse_period_s {
            positive("pulse_period_s", v);
        }
        if !(self.visibility > 0.5 && self.visibility <= 1.0) {
            problems.push(format!(
                "visibility: must lie in (0.5, 1], got {}",
                self.visibility
            ));
        }
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            problems.push(format!("f_ec: must be >= 1, got {}", self.f_ec));
        }
        if !(self.f_pa >= 1.0 && self.f_pa.is_finite()) {
            problems.push(format!("f_pa: must be >= 1, got {}", self.f_pa));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            problems.push(format!(
                "tail_eps: must lie in (0, 1), got {}",
                self.tail_eps
            ));
        }
        if self.max_pairs == 0 {
            problems.push("max_pairs: must be at least 1".to_string());
        }
        if self.dark_rate_hz * self.timing_window >= 1.0 {
            problems.push("dark_rate_hz: dark click probability per window must be < 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    fn truncation(&self) -> TruncationOptions {
        TruncationOptions {
            tail_eps: self.tail_eps,
            max_pairs: self.max_pairs,
        }
    }

    /// Duration of one detection window or pulse slot.
    pub fn window_period(&self) -> f64 {
        if self.pulsed {
            self.pulse_period_s.unwrap_or(self.timing_window)
        } else {
            self.timing_window
        }
    }

    pub fn mean_pairs_per_window(&self) -> f64 {
        mean_pairs_from_rate(self.pair_rate, self.geometry_factor, self.window_period())
    }

    pub fn mode_count(&self) -> u64 {
        if self.pulsed {
            1
        } else {
            mode_count_from_times(self.timing_window, self.coherence_time)
        }
    }

    pub fn e_d(&self) -> f64 {
        (1.0 - self.visibility) / 2.0
    }

    /// Dark click probability per window on one side.
    pub fn dark_click_prob(&self) -> f64 {
        self.dark_rate_hz * self.timing_window
    }
}

fn db_to_efficiency(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// `(η_A, η_B)` including enclave and fiber losses.
pub fn channel_efficiencies(cfg: &ScenarioConfig) -> (f64, f64) {
    let fiber = cfg.fiber_loss_db_per_km * cfg.distance_km;
    let (fiber_a, fiber_b) = match cfg.placement {
        Placement::SourceAtAlice => (0.0, fiber),
        Placement::SourceInMiddle => (fiber / 2.0, fiber / 2.0),
    };
    let enclave_a = cfg.enclave_loss_db_alice.unwrap_or(cfg.enclave_loss_db);
    let enclave_b = cfg.enclave_loss_db_bob.unwrap_or(cfg.enclave_loss_db);
    (
        db_to_efficiency(enclave_a + fiber_a),
        db_to_efficiency(enclave_b + fiber_b),
    )
}

/// Non-paralyzable dead-time saturation `r / (1 + r τ)`.
pub fn dead_time_throttled(rate: f64, dead_time: f64) -> f64 {
    rate / (1.0 + rate * dead_time)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStatistics {
    pub sifted_bits: f64,
    pub dark_bits: f64,
    pub windows_per_s: f64,
    /// Fraction of clicks surviving dead time, Alice then Bob.
    pub dead_time_factor: (f64, f64),
}

/// Sifted and dark-count bits over the run.
///
/// Per-side click rates are saturated by dead time; the surviving fraction
/// scales coincidences on both sides. Half of all coincidences are kept by
/// basis sifting.
pub fn window_statistics(cfg: &ScenarioConfig, breakdown: &BerBreakdown) -> WindowStatistics {
    let windows_per_s = 1.0 / cfg.window_period();
    let survive = |click_prob: f64| {
        let rate = click_prob * windows_per_s;
        if rate > 0.0 {
            dead_time_throttled(rate, cfg.dead_time_s) / rate
        } else {
            1.0
        }
    };
    let f_a = survive(breakdown.click_prob.0);
    let f_b = survive(breakdown.click_prob.1);
    let y0 = cfg.dark_click_prob();
    let per_second = 0.5 * cfg.duration * windows_per_s * f_a * f_b;
    WindowStatistics {
        sifted_bits: per_second * breakdown.coincidence_prob,
        dark_bits: per_second * y0 * y0,
        windows_per_s,
        dead_time_factor: (f_a, f_b),
    }
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "binary entropy needs p in [0, 1], got {p}"
        )));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub mean_pairs_per_window: f64,
    pub mode_count: u64,
    pub max_pairs: u32,
    pub tail_bound: f64,
    pub clamp_count: u64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub windows_per_s: f64,
    pub coincidence_prob: f64,
    /// `K` before flooring.
    pub raw_secret_bits: f64,
    /// Raw `K` under the other [`DarkCountSign`].
    pub alternate_sign_secret_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub sifted_bits: f64,
    pub dark_bits: f64,
    pub ber: f64,
    /// `K` limited to `[0, sifted_bits]`.
    pub secret_bits: f64,
    pub secret_rate_bps: f64,
    pub diagnostics: Diagnostics,
}

pub fn secret_key(cfg: &ScenarioConfig) -> Result<KeyRateResult> {
    secret_key_with(cfg, Execution::default())
}

pub fn secret_key_with(cfg: &ScenarioConfig, exec: Execution) -> Result<KeyRateResult> {
    if let Err(problems) = cfg.validate() {
        return Err(Error::InvalidParameter {
            field: "scenario",
            reason: problems.join("; "),
        });
    }
    let (eta_a, eta_b) = channel_efficiencies(cfg);
    let y0 = cfg.dark_click_prob();
    let det = DetectorParams::new(eta_a, eta_b, cfg.e_d(), y0, y0)?;
    let src = SourceParams::new(cfg.mean_pairs_per_window(), cfg.mode_count())?;
    let dist = pair_number_distribution(&src, &cfg.truncation())?;
    let breakdown = ber_from_distribution(&dist, src.mode_count(), &det, cfg.ber_weighting, exec)?;
    let stats = window_statistics(cfg, &breakdown);

    let ber = breakdown.ber.clamp(0.0, 0.5);
    let cost = (cfg.f_ec + cfg.f_pa) * stats.sifted_bits * binary_entropy(ber)?;
    let with_sign = |sign: DarkCountSign| match sign {
        DarkCountSign::Paper => stats.sifted_bits + stats.dark_bits - cost,
        DarkCountSign::Physical => stats.sifted_bits - stats.dark_bits - cost,
    };
    let raw = with_sign(cfg.dark_count_sign);
    let alternate = with_sign(match cfg.dark_count_sign {
        DarkCountSign::Paper => DarkCountSign::Physical,
        DarkCountSign::Physical => DarkCountSign::Paper,
    });
    let secret_bits = raw.min(stats.sifted_bits).max(0.0);

    Ok(KeyRateResult {
        sifted_bits: stats.sifted_bits,
        dark_bits: stats.dark_bits,
        ber,
        secret_bits,
        secret_rate_bps: secret_bits / cfg.duration,
        diagnostics: Diagnostics {
            mean_pairs_per_window: src.mean_pairs_per_window(),
            mode_count: src.mode_count(),
            max_pairs: breakdown.max_pairs,
            tail_bound: breakdown.tail_bound,
            clamp_count: breakdown.clamp_count,
            eta_a,
            eta_b,
            windows_per_s: stats.windows_per_s,
            coincidence_prob: breakdown.coincidence_prob,
            raw_secret_bits: raw,
            alternate_sign_secret_bits: alternate,
        },
    })
}

/// Pulsed counterpart of a CW scenario: one mode per pulse, pulse period equal
/// to the timing window, same mean pairs per slot.
pub fn pulsed_equivalent(cfg: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        pulsed: true,
        pulse_period_s: Some(cfg.timing_window),
        ..cfg.clone()
    }
}
