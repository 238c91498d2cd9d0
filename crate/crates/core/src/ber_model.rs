//! Bit-error rate of the full source state.
//!
//! The source is reduced three times: to pair-number manifolds `M`, to
//! partition states `π ⊢ M`, and to polarization splits `|m, M − m⟩`. The
//! per-split error `e_mM` is averaged over all three layers, weighted by the
//! coincidence yield unless [`BerWeighting::Unconditioned`] is requested.

use serde::{Deserialize, Serialize};

use crate::combinatorics::Partition;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::photon_statistics::{
    manifold_polarization_distribution, pair_number_distribution, polarization_weights,
    PairNumberDistribution, SourceParams, TruncationOptions,
};

/// Error rate of a coincidence caused by dark or background counts.
pub const DARK_COUNT_ERROR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    eta_a: f64,
    eta_b: f64,
    e_d: f64,
    y0_a: f64,
    y0_b: f64,
}

impl DetectorParams {
    /// `eta_*` are total efficiencies including path loss, `y0_*` are the
    /// per-window dark click probabilities.
    pub fn new(eta_a: f64, eta_b: f64, e_d: f64, y0_a: f64, y0_b: f64) -> Result<Self> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(in_unit(eta_a) && eta_a > 0.0) {
            return Err(invalid("eta_a", format!("must lie in (0, 1], got {eta_a}")));
        }
        if !(in_unit(eta_b) && eta_b > 0.0) {
            return Err(invalid("eta_b", format!("must lie in (0, 1], got {eta_b}")));
        }
        if !(0.0..=DARK_COUNT_ERROR).contains(&e_d) {
            return Err(invalid("e_d", format!("must lie in [0, 0.5], got {e_d}")));
        }
        if !(in_unit(y0_a) && y0_a < 1.0) {
            return Err(invalid("y0_a", format!("must lie in [0, 1), got {y0_a}")));
        }
        if !(in_unit(y0_b) && y0_b < 1.0) {
            return Err(invalid("y0_b", format!("must lie in [0, 1), got {y0_b}")));
        }
        Ok(DetectorParams {
            eta_a,
            eta_b,
            e_d,
            y0_a,
            y0_b,
        })
    }

    /// Ideal lossless, noiseless detectors with intrinsic error `e_d`.
    pub fn ideal(e_d: f64) -> Result<Self> {
        Self::new(1.0, 1.0, e_d, 0.0, 0.0)
    }

    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }
    pub fn eta_b(&self) -> f64 {
        self.eta_b
    }
    pub fn e_d(&self) -> f64 {
        self.e_d
    }
    pub fn y0_a(&self) -> f64 {
        self.y0_a
    }
    pub fn y0_b(&self) -> f64 {
        self.y0_b
    }

    /// Exchanges the Alice and Bob sides.
    pub fn swapped(&self) -> Self {
        DetectorParams {
            eta_a: self.eta_b,
            eta_b: self.eta_a,
            y0_a: self.y0_b,
            y0_b: self.y0_a,
            ..*self
        }
    }

    /// Probability that Alice clicks given `M` pairs.
    pub fn click_prob_a(&self, pairs: u32) -> f64 {
        1.0 - (1.0 - self.y0_a) * (1.0 - self.eta_a).powi(pairs as i32)
    }

    pub fn click_prob_b(&self, pairs: u32) -> f64 {
        1.0 - (1.0 - self.y0_b) * (1.0 - self.eta_b).powi(pairs as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerWeighting {
    /// States weighted by probability times coincidence yield.
    #[default]
    YieldConditioned,
    /// States weighted by probability alone.
    Unconditioned,
}

/// Coincidence yield `Y_M`: both sides register at least one click.
pub fn yield_mm(pairs: u32, det: &DetectorParams) -> f64 {
    det.click_prob_a(pairs) * det.click_prob_b(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateError {
    pub value: f64,
    pub clamped: bool,
}

/// Error rate of a coincidence from `|m, M − m⟩`:
///
/// `e_0 − (e_0 − e_d)/Y_M · [(1−η_A)^m − (1−η_A)^{M−m}] · [(1−η_B)^m − (1−η_B)^{M−m}]`
pub fn error_mm(m: u32, pairs: u32, det: &DetectorParams) -> Result<StateError> {
    if m > pairs {
        return Err(Error::PolarizationCountOutOfRange {
            m: m as i64,
            total: pairs,
        });
    }
    let y = yield_mm(pairs, det);
    if y <= 0.0 {
        return Err(Error::ZeroYield { pairs });
    }
    let bracket = |eta: f64| {
        let miss = 1.0 - eta;
        miss.powi(m as i32) - miss.powi((pairs - m) as i32)
    };
    let raw = DARK_COUNT_ERROR
        - (DARK_COUNT_ERROR - det.e_d) / y * bracket(det.eta_a) * bracket(det.eta_b);
    // rounding at e_d = 0 lands a few ulps below zero; not counted as a clamp
    let clamped = !(-f64::EPSILON..=1.0 + f64::EPSILON).contains(&raw);
    Ok(StateError {
        value: raw.clamp(0.0, 1.0),
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldContribution {
    pub pairs: u32,
    /// `P(M)`.
    pub probability: f64,
    /// `P(M) · Y_M`.
    pub detection_prob: f64,
    /// `P(M) · [Y_M] · Σ_m q(m) e_mM`, with `Y_M` present when yield-conditioned.
    pub weighted_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerBreakdown {
    pub ber: f64,
    /// Probability of a coincidence per window.
    pub coincidence_prob: f64,
    /// Marginal per-window click probabilities, Alice then Bob.
    pub click_prob: (f64, f64),
    pub per_m_contributions: Vec<ManifoldContribution>,
    pub max_pairs: u32,
    pub tail_bound: f64,
    pub clamp_count: u64,
    pub weighting: BerWeighting,
}

struct ManifoldError {
    mean_error: f64,
    clamps: u64,
}

/// `Σ_m q(m) e_mM` for a polarization distribution `q` over `m = 0..=M`.
fn mean_state_error(q: &[f64], pairs: u32, det: &DetectorParams) -> Result<ManifoldError> {
    let mut mean_error = 0.0;
    let mut clamps = 0;
    for (m, &w) in q.iter().enumerate() {
        let e = error_mm(m as u32, pairs, det)?;
        clamps += e.clamped as u64;
        mean_error += w * e.value;
    }
    Ok(ManifoldError { mean_error, clamps })
}

/// BER of a single partition state `|M_π⟩`, conditioned on a coincidence.
pub fn partition_ber(partition: &Partition, det: &DetectorParams) -> Result<f64> {
    let q = polarization_weights(partition);
    Ok(mean_state_error(&q, partition.total(), det)?.mean_error)
}

/// BER of the `M`-pair manifold on `modes` modes, conditioned on a coincidence.
pub fn manifold_ber(pairs: u32, modes: u64, det: &DetectorParams, exec: Execution) -> Result<f64> {
    let q = manifold_polarization_distribution(pairs, modes, exec);
    Ok(mean_state_error(&q, pairs, det)?.mean_error)
}

/// BER of the full source state with the default truncation.
pub fn ber_of_source(
    src: &SourceParams,
    det: &DetectorParams,
    opts: &TruncationOptions,
) -> Result<BerBreakdown> {
    let dist = pair_number_distribution(src, opts)?;
    ber_from_distribution(
        &dist,
        src.mode_count(),
        det,
        BerWeighting::default(),
        Execution::default(),
    )
}

/// BER over an explicit pair-number distribution. Manifolds are evaluated with
/// `exec`; the reduction runs in increasing `M`.
pub fn ber_from_distribution(
    dist: &PairNumberDistribution,
    modes: u64,
    det: &DetectorParams,
    weighting: BerWeighting,
    exec: Execution,
) -> Result<BerBreakdown> {
    let manifolds: Vec<(u32, f64)> = dist
        .probabilities()
        .iter()
        .enumerate()
        .map(|(m, &p)| (m as u32, p))
        .collect();

    let evaluated = exec.map(&manifolds, |&(pairs, probability)| {
        let y = yield_mm(pairs, det);
        if y <= 0.0 {
            // undetectable manifold contributes nothing
            return Ok(None);
        }
        let q = manifold_polarization_distribution(pairs, modes, exec);
        let me = mean_state_error(&q, pairs, det)?;
        let detection_prob = probability * y;
        let weighted_error = match weighting {
            BerWeighting::YieldConditioned => detection_prob * me.mean_error,
            BerWeighting::Unconditioned => probability * me.mean_error,
        };
        Ok(Some((
            ManifoldContribution {
                pairs,
                probability,
                detection_prob,
                weighted_error,
            },
            me.clamps,
        )))
    });

    let mut per_m_contributions = Vec::with_capacity(manifolds.len());
    let mut clamp_count = 0;
    for item in evaluated {
        if let Some((c, clamps)) = item? {
            per_m_contributions.push(c);
            clamp_count += clamps;
        }
    }

    let mut error_sum = 0.0;
    let mut norm = 0.0;
    let mut coincidence_prob = 0.0;
    for c in &per_m_contributions {
        error_sum += c.weighted_error;
        coincidence_prob += c.detection_prob;
        norm += match weighting {
            BerWeighting::YieldConditioned => c.detection_prob,
            BerWeighting::Unconditioned => c.probability,
        };
    }
    let ber = if norm > 0.0 {
        error_sum / norm
    } else {
        DARK_COUNT_ERROR
    };

    let mut click_a = 0.0;
    let mut click_b = 0.0;
    for (pairs, p) in &manifolds {
        click_a += p * det.click_prob_a(*pairs);
        click_b += p * det.click_prob_b(*pairs);
    }

    Ok(BerBreakdown {
        ber,
        coincidence_prob,
        click_prob: (click_a, click_b),
        per_m_contributions,
        max_pairs: dist.max_pairs(),
        tail_bound: dist.tail_bound(),
        clamp_count,
        weighting,
    })
}
