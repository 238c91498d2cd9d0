//! Source photon statistics: pair-number law, partition weights within an
//! `M`-pair manifold and polarization weights within a partition state.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::{
    binomial, bounded_composition_table, composition_normalization, mode_count_weight,
    partitions_of, ratio_to_f64, Partition,
};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

/// Default truncation tolerance on the pair-number tail.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;
/// Default hard cap on the largest pair number retained.
pub const DEFAULT_MAX_PAIRS: usize = 64;

/// Effective mode count `max(1, round(δt / t_coh))`.
pub fn mode_count_from_times(timing_window: f64, coherence_time: f64) -> u64 {
    let ratio = timing_window / coherence_time;
    if ratio.is_finite() && ratio >= 1.0 {
        ratio.round() as u64
    } else {
        1
    }
}

/// Mean collected pairs per window, `μ = S · G · δt`.
pub fn mean_pairs_from_rate(pair_rate: f64, geometry_factor: f64, timing_window: f64) -> f64 {
    pair_rate * geometry_factor * timing_window
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceParams {
    mean_pairs_per_window: f64,
    mode_count: u64,
    timing_window: Option<f64>,
    coherence_time: Option<f64>,
}

impl SourceParams {
    pub fn new(mean_pairs_per_window: f64, mode_count: u64) -> Result<Self> {
        if !(mean_pairs_per_window.is_finite() && mean_pairs_per_window >= 0.0) {
            return Err(invalid(
                "mean_pairs_per_window",
                format!("must be finite and >= 0, got {mean_pairs_per_window}"),
            ));
        }
        if mode_count == 0 {
            return Err(invalid("mode_count", "must be at least 1"));
        }
        Ok(SourceParams {
            mean_pairs_per_window,
            mode_count,
            timing_window: None,
            coherence_time: None,
        })
    }

    pub fn from_times(
        mean_pairs_per_window: f64,
        timing_window: f64,
        coherence_time: f64,
    ) -> Result<Self> {
        if !(timing_window > 0.0 && coherence_time > 0.0) {
            return Err(invalid(
                "timing_window",
                "window and coherence time must be > 0",
            ));
        }
        let mut src = Self::new(
            mean_pairs_per_window,
            mode_count_from_times(timing_window, coherence_time),
        )?;
        src.timing_window = Some(timing_window);
        src.coherence_time = Some(coherence_time);
        Ok(src)
    }

    pub fn mean_pairs_per_window(&self) -> f64 {
        self.mean_pairs_per_window
    }

    pub fn mode_count(&self) -> u64 {
        self.mode_count
    }

    pub fn timing_window(&self) -> Option<f64> {
        self.timing_window
    }

    pub fn coherence_time(&self) -> Option<f64> {
        self.coherence_time
    }

    /// `T² = tanh²ξ` with per-mode mean `sinh²ξ = μ / N`.
    pub fn tanh_sq(&self) -> f64 {
        let per_mode = self.mean_pairs_per_window / self.mode_count as f64;
        per_mode / (1.0 + per_mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationOptions {
    pub tail_eps: f64,
    pub max_pairs: usize,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            tail_eps: DEFAULT_TAIL_EPS,
            max_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

/// `P(M)` for `M = 0..=M_max` plus the discarded mass beyond `M_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNumberDistribution {
    probabilities: Vec<f64>,
    tail_bound: f64,
}

impl PairNumberDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn max_pairs(&self) -> u32 {
        self.probabilities.len() as u32 - 1
    }

    /// Keeps exactly `M = 0..=max_pairs`, whatever the tail.
    pub fn truncated_at(src: &SourceParams, max_pairs: u32) -> Self {
        let mut law = NegativeBinomial::new(src);
        let mut probabilities = Vec::with_capacity(max_pairs as usize + 1);
        for _ in 0..=max_pairs {
            probabilities.push(law.next_term());
        }
        PairNumberDistribution {
            tail_bound: law.tail(),
            probabilities,
        }
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(m, p)| m as f64 * p)
            .sum()
    }
}

/// Term-by-term walk of `P(M) = (1 − T²)^N T^{2M} C(M + N − 1, M)`.
struct NegativeBinomial {
    modes: f64,
    tanh_sq: f64,
    next_m: u64,
    term: f64,
    sum: f64,
    compensation: f64,
}

impl NegativeBinomial {
    fn new(src: &SourceParams) -> Self {
        let modes = src.mode_count as f64;
        let per_mode = src.mean_pairs_per_window / modes;
        NegativeBinomial {
            modes,
            tanh_sq: src.tanh_sq(),
            next_m: 0,
            term: (-modes * per_mode.ln_1p()).exp(),
            sum: 0.0,
            compensation: 0.0,
        }
    }

    fn next_term(&mut self) -> f64 {
        if self.next_m > 0 {
            let m = self.next_m as f64;
            self.term *= (m + self.modes - 1.0) / m * self.tanh_sq;
        }
        self.next_m += 1;
        // Kahan summation keeps the tail accurate near 1e-16.
        let y = self.term - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
        self.term
    }

    fn tail(&self) -> f64 {
        (1.0 - self.sum).max(0.0)
    }
}

/// Negative-binomial pair-number law, truncated once the tail drops below
/// `opts.tail_eps`.
pub fn pair_number_distribution(
    src: &SourceParams,
    opts: &TruncationOptions,
) -> Result<PairNumberDistribution> {
    if !(opts.tail_eps > 0.0 && opts.tail_eps < 1.0) {
        return Err(invalid(
            "tail_eps",
            format!("must lie in (0, 1), got {}", opts.tail_eps),
        ));
    }
    let mut law = NegativeBinomial::new(src);
    let mut probabilities = Vec::new();
    loop {
        probabilities.push(law.next_term());
        if law.tail() < opts.tail_eps {
            break;
        }
        if probabilities.len() > opts.max_pairs {
            return Err(Error::TruncationCapExceeded {
                cap: opts.max_pairs,
                tail_bound: law.tail(),
            });
        }
    }
    Ok(PairNumberDistribution {
        tail_bound: law.tail(),
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionWeight {
    pub partition: Partition,
    pub weight: f64,
}

/// Probability of partition state `π` inside the `M`-pair manifold on `N`
/// modes; zero when `π` has more parts than modes.
pub fn partition_weight(partition: &Partition, modes: u64) -> f64 {
    match mode_count_weight(partition, modes) {
        Ok(w) => {
            let total = partition.total() as u64;
            ratio_to_f64(&w, &binomial(total + modes - 1, total))
        }
        Err(_) => 0.0,
    }
}

/// Weights of every partition of `total` that fits on `modes` modes.
pub fn partition_weights(total: u32, modes: u64) -> Vec<PartitionWeight> {
    partitions_of(total)
        .filter(|p| p.len() as u64 <= modes)
        .map(|partition| {
            let weight = partition_weight(&partition, modes);
            PartitionWeight { partition, weight }
        })
        .collect()
}

/// `A^π_m / C_π` for `m = 0..=M`.
pub fn polarization_weights(partition: &Partition) -> Vec<f64> {
    let norm = composition_normalization(partition);
    bounded_composition_table(partition)
        .iter()
        .map(|a| ratio_to_f64(a, &norm))
        .collect()
}

/// Exact rational form of [`polarization_weights`].
pub fn polarization_weights_exact(partition: &Partition) -> Vec<BigRational> {
    let norm = BigInt::from(composition_normalization(partition));
    bounded_composition_table(partition)
        .into_iter()
        .map(|a| BigRational::new(BigInt::from(a), norm.clone()))
        .collect()
}

/// Distribution of the horizontal pair count `m` given `M` pairs on `N` modes:
/// `Σ_π w_π · A^π_m / C_π`. Partitions are evaluated with `exec` and summed in
/// enumeration order.
pub fn manifold_polarization_distribution(total: u32, modes: u64, exec: Execution) -> Vec<f64> {
    let partitions: Vec<Partition> = partitions_of(total)
        .filter(|p| p.len() as u64 <= modes)
        .collect();
    let terms = exec.map(&partitions, |p| {
        let w = partition_weight(p, modes);
        polarization_weights(p)
            .into_iter()
            .map(|q| w * q)
            .collect::<Vec<f64>>()
    });
    let mut out = vec![0.0; total as usize + 1];
    for term in terms {
        for (acc, v) in out.iter_mut().zip(term) {
            *acc += v;
        }
    }
    out
}
