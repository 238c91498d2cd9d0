//! Independent oracles shared by the integration tests. None of these go
//! through partitions or inclusion–exclusion.
#![allow(dead_code)]

use std::collections::BTreeSet;

use eqkd_core::ber_model::{error_mm, yield_mm, DetectorParams};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `p(n)` by Euler's pentagonal-number recurrence.
pub fn partition_count(n: usize) -> u64 {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for i in 1..=n {
        let mut k: i64 = 1;
        let mut acc = 0i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += sign * p[i - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= i {
                acc += sign * p[i - g2];
            }
            k += 1;
        }
        p[i] = acc;
    }
    p[n] as u64
}

/// All partitions of `n` by recursion on the largest part.
pub fn partition_set(n: u32) -> BTreeSet<Vec<u32>> {
    fn rec(rest: u32, max: u32, prefix: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
        if rest == 0 {
            out.insert(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = BTreeSet::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Binomial coefficient from Pascal's triangle.
pub fn pascal_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::one(); row.len() + 1];
        for j in 1..row.len() {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    row[k].clone()
}

/// Every occupation vector of `modes` modes holding `total` pairs.
pub fn occupation_vectors(total: u32, modes: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=rest {
            prefix.push(x);
            rec(rest - x, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, modes, &mut Vec::new(), &mut out);
    out
}

/// Sorted non-zero parts of an occupation vector.
pub fn shape_of(occupation: &[u32]) -> Vec<u32> {
    let mut parts: Vec<u32> = occupation.iter().copied().filter(|&x| x > 0).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// Full Fock-space BER of the source truncated at `max_pairs`.
///
/// Each occupation vector has probability `(1 − T²)^N T^{2M}`; a mode with
/// `x` pairs splits into `h` horizontal pairs uniformly over `0..=x`.
pub fn fock_ber(mu: f64, modes: usize, max_pairs: u32, det: &DetectorParams) -> f64 {
    let per_mode = mu / modes as f64;
    let t2 = per_mode / (1.0 + per_mode);
    let vacuum = (1.0 - t2).powi(modes as i32);
    let mut err = 0.0;
    let mut norm = 0.0;
    for total in 0..=max_pairs {
        let y = yield_mm(total, det);
        if y == 0.0 {
            continue;
        }
        let p_vec = vacuum * t2.powi(total as i32);
        for x in occupation_vectors(total, modes) {
            let splits: usize = x.iter().map(|&xi| xi as usize + 1).product();
            let w = p_vec / splits as f64;
            // odometer over polarization splits
            let mut h = vec![0u32; modes];
            loop {
                let m: u32 = h.iter().sum();
                let e = error_mm(m, total, det).unwrap().value;
                err += w * y * e;
                norm += w * y;
                let mut i = 0;
                while i < modes {
                    if h[i] < x[i] {
                        h[i] += 1;
                        break;
                    }
                    h[i] = 0;
                    i += 1;
                }
                if i == modes {
                    break;
                }
            }
        }
    }
    err / norm
}

/// Poisson pmf for `k = 0..=k_max`.
pub fn poisson_pmf(mu: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut term = (-mu).exp();
    for k in 0..=k_max {
        if k > 0 {
            term *= mu / k as f64;
        }
        out.push(term);
    }
    out
}
