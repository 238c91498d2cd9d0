//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use eqkd_core::ber_model::{
    ber_from_distribution, manifold_ber, partition_ber, BerWeighting, DetectorParams,
};
use eqkd_core::combinatorics::{
    binomial, bounded_composition_table, bounded_compositions, bounded_compositions_oracle,
    mode_count_weight, partitions_of, Partition,
};
use eqkd_core::keyrate::{pulsed_equivalent, secret_key, Placement, ScenarioConfig};
use eqkd_core::photon_statistics::{
    pair_number_distribution, PairNumberDistribution, SourceParams, TruncationOptions,
};
use eqkd_core::sweep::{data_section, load_config, run_sweep_with_threads, write_csv};
use eqkd_core::Execution;
use num_bigint::BigUint;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Four-photon anchors: thermal 1/6, Poissonian 1/4.
fn four_photon_anchors() -> Outcome {
    let det = DetectorParams::ideal(0.0).unwrap();
    let thermal = partition_ber(&Partition::new(vec![2]).unwrap(), &det).unwrap();
    let poisson = partition_ber(&Partition::new(vec![1, 1]).unwrap(), &det).unwrap();
    let single_mode = manifold_ber(2, 1, &det, Execution::default()).unwrap();
    ensure((thermal - 1.0 / 6.0).abs() <= 1e-12, || {
        format!("thermal BER {thermal}")
    })?;
    ensure((single_mode - 1.0 / 6.0).abs() <= 1e-12, || {
        format!("N=1 manifold BER {single_mode}")
    })?;
    ensure((poisson - 0.25).abs() <= 1e-12, || {
        format!("Poissonian BER {poisson}")
    })?;
    Ok(format!("thermal {thermal:.15}, Poissonian {poisson:.15}"))
}

/// Inclusion–exclusion equals exhaustive enumeration for all π ⊢ M ≤ 12.
fn oracle_equivalence() -> Outcome {
    let mut checked = 0u64;
    for total in 0..=12u32 {
        for p in partitions_of(total) {
            for m in 0..=total as i64 {
                let fast = bounded_compositions(&p, m).unwrap();
                let slow = bounded_compositions_oracle(&p, m).unwrap();
                ensure(fast == slow, || format!("{p} m={m}: {fast} vs {slow}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (π, m) pairs exact"))
}

fn normalization_suite() -> Outcome {
    // (a)
    for modes in [1u64, 2, 3, 10, 100] {
        for total in 0..=20u32 {
            let sum: BigUint = partitions_of(total)
                .filter(|p| p.len() as u64 <= modes)
                .map(|p| mode_count_weight(&p, modes).unwrap())
                .sum();
            let want = binomial(total as u64 + modes - 1, total as u64);
            ensure(sum == want, || format!("(a) M={total} N={modes}"))?;
        }
    }
    // (b)
    for total in 0..=20u32 {
        let thermal = Partition::from_unsorted(vec![total]);
        let poisson = Partition::new(vec![1; total as usize]).unwrap();
        let sum = |p: &Partition| -> BigUint { bounded_composition_table(p).into_iter().sum() };
        ensure(sum(&thermal) == BigUint::from(total + 1), || {
            format!("(b) thermal M={total}")
        })?;
        ensure(sum(&poisson) == BigUint::from(2u32).pow(total), || {
            format!("(b) Poissonian M={total}")
        })?;
    }
    // (c) μ = 5 at N = 1 needs ~130 manifolds, beyond the BER cap of 64
    let opts = TruncationOptions {
        tail_eps: 1e-10,
        max_pairs: 512,
    };
    let mut worst: f64 = 0.0;
    for mu in [1e-6, 1e-3, 0.1, 1.0, 5.0] {
        for modes in [1u64, 10, 10_000] {
            let d =
                pair_number_distribution(&SourceParams::new(mu, modes).unwrap(), &opts).unwrap();
            let total: f64 = d.probabilities().iter().sum::<f64>() + d.tail_bound();
            worst = worst.max((total - 1.0).abs());
        }
    }
    ensure(worst <= 1e-12, || {
        format!("(c) worst normalization error {worst:e}")
    })?;
    Ok(format!("(a) (b) exact; (c) worst |Σ−1| = {worst:.1e}"))
}

fn limit_behavior() -> Outcome {
    let mut worst_rel: f64 = 0.0;
    for mu in [1e-3, 0.1, 0.5, 1.0, 3.0] {
        let src = SourceParams::new(mu, 1).unwrap();
        let t2 = src.tanh_sq();
        let d = PairNumberDistribution::truncated_at(&src, 60);
        for (m, &p) in d.probabilities().iter().enumerate() {
            let closed = (1.0 - t2) * t2.powi(m as i32);
            if closed > 0.0 {
                worst_rel = worst_rel.max(((p - closed) / closed).abs());
            }
        }
    }
    ensure(worst_rel <= 1e-14, || {
        format!("geometric law rel. error {worst_rel:e}")
    })?;

    let k_max = 60;
    let poisson = common::poisson_pmf(0.5, k_max);
    let mut tvs = Vec::new();
    for modes in [1u64, 10, 100, 10_000] {
        let d = PairNumberDistribution::truncated_at(
            &SourceParams::new(0.5, modes).unwrap(),
            k_max as u32,
        );
        let tv = 0.5
            * d.probabilities()
                .iter()
                .zip(&poisson)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        tvs.push(tv);
    }
    ensure(tvs.windows(2).all(|w| w[1] < w[0]), || {
        format!("TV not decreasing: {tvs:?}")
    })?;
    ensure(tvs[3] < 1e-4, || format!("TV at N=1e4 is {:e}", tvs[3]))?;
    Ok(format!(
        "geometric rel. err {worst_rel:.1e}; TV = {:.3e}, {:.3e}, {:.3e}, {:.3e}",
        tvs[0], tvs[1], tvs[2], tvs[3]
    ))
}

fn fock_equivalence() -> Outcome {
    let dets = [
        DetectorParams::ideal(0.0).unwrap(),
        DetectorParams::new(0.2, 0.2, 0.015, 1.5e-6, 1.5e-6).unwrap(),
        DetectorParams::new(0.3, 0.7, 0.05, 1e-3, 4e-3).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for modes in 1..=3usize {
        for mu in [0.01, 0.3, 2.0] {
            for det in &dets {
                for max_pairs in 0..=4u32 {
                    if max_pairs == 0 && det.y0_a() == 0.0 {
                        continue;
                    }
                    let src = SourceParams::new(mu, modes as u64).unwrap();
                    let dist = PairNumberDistribution::truncated_at(&src, max_pairs);
                    let got = ber_from_distribution(
                        &dist,
                        modes as u64,
                        det,
                        BerWeighting::YieldConditioned,
                        Execution::default(),
                    )
                    .unwrap()
                    .ber;
                    let want = common::fock_ber(mu, modes, max_pairs, det);
                    worst = worst.max((got - want).abs());
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("max |Δ BER| = {worst:e}"))?;
    Ok(format!("max |Δ BER| = {worst:.1e}"))
}

fn distance_grid() -> Vec<f64> {
    (0..=100).map(|i| 2.0 * i as f64).collect()
}

fn key(pair_rate: f64, distance: f64, placement: Placement, pulsed: bool) -> f64 {
    let cfg = ScenarioConfig::reference(pair_rate, distance, placement);
    let cfg = if pulsed { pulsed_equivalent(&cfg) } else { cfg };
    secret_key(&cfg).unwrap().secret_bits
}

/// Largest distance on a 1 km grid up to `limit` with positive key, `None`
/// when the key never vanishes within the limit.
fn max_distance(pair_rate: f64, pulsed: bool, limit: u32) -> Option<f64> {
    let mut last_positive = None;
    for d in 0..=limit {
        let k = key(pair_rate, d as f64, Placement::SourceInMiddle, pulsed);
        if k > 0.0 {
            last_positive = Some(d as f64);
        }
    }
    let end = key(pair_rate, limit as f64, Placement::SourceInMiddle, pulsed);
    if end > 0.0 {
        None
    } else {
        last_positive.or(Some(0.0))
    }
}

/// Middle placement at S = 1e11: no key at short distance, key further out.
fn key_jump_middle() -> Outcome {
    let ks: Vec<f64> = distance_grid()
        .iter()
        .map(|&d| key(1e11, d, Placement::SourceInMiddle, false))
        .collect();
    let later_positive = ks.iter().skip(1).any(|&k| k > 0.0);
    ensure(ks[0] == 0.0 && later_positive, || {
        format!(
            "K(0 km) = {:.4e} bits, K(200 km) = {:.4e} bits",
            ks[0], ks[100]
        )
    })?;
    Ok("K = 0 at 0 km, positive further out".into())
}

/// Alice placement at S = 1e11: no key anywhere.
fn no_key_at_alice() -> Outcome {
    let positive: Vec<f64> = distance_grid()
        .into_iter()
        .filter(|&d| key(1e11, d, Placement::SourceAtAlice, false) > 0.0)
        .collect();
    ensure(positive.is_empty(), || {
        format!(
            "K > 0 at {} of 101 distances (e.g. {:.4e} bits at 0 km)",
            positive.len(),
            key(1e11, 0.0, Placement::SourceAtAlice, false)
        )
    })?;
    Ok("K = 0 at every distance".into())
}

fn cw_versus_pulsed() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [1e6, 1e7, 1e8, 1e9] {
        for d in distance_grid() {
            let cw = key(s, d, Placement::SourceInMiddle, false);
            let pl = key(s, d, Placement::SourceInMiddle, true);
            let scale = cw.abs().max(pl.abs());
            if scale > 0.0 {
                worst = worst.max((cw - pl).abs() / scale);
            }
        }
    }
    ensure(worst <= 0.05, || {
        format!("low-power relative gap {worst:.4}")
    })?;
    let s_high = 1e11;
    let cw = max_distance(s_high, false, 600);
    let pl = max_distance(s_high, true, 600);
    match (cw, pl) {
        (Some(cw), Some(pl)) => {
            ensure(cw > pl, || {
                format!("max distance CW {cw} km vs pulsed {pl} km")
            })?;
            Ok(format!(
                "low-power gap {:.2}%; S=1e11 max distance CW {cw} km > pulsed {pl} km",
                100.0 * worst
            ))
        }
        _ => Err(format!(
            "no finite cutoff within 600 km: CW {cw:?}, pulsed {pl:?}"
        )),
    }
}

fn sweep_determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/examples");
    let mut rows = 0;
    for name in [
        "fig1-distance-placement.json",
        "fig2-rate-placement.json",
        "fig3-distance-cw-pulsed.json",
        "fig4-rate-cw-pulsed.json",
    ] {
        let spec = load_config(dir.join(name)).map_err(|e| e.to_string())?;
        let mut reference: Option<String> = None;
        for threads in [1usize, 2, 4, 8] {
            let result = run_sweep_with_threads(&spec, Some(threads));
            let mut buf = Vec::new();
            write_csv(&result, &mut buf).map_err(|e| e.to_string())?;
            let data = data_section(&String::from_utf8(buf).unwrap());
            match &reference {
                None => {
                    rows += data.lines().count() - 1;
                    reference = Some(data);
                }
                Some(r) => ensure(r == &data, || {
                    format!("{name} differs at {threads} threads")
                })?,
            }
        }
    }
    Ok(format!("{rows} rows identical across 1, 2, 4, 8 threads"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1  four-photon BER anchors", four_photon_anchors),
        (
            "2  bounded-composition oracle equivalence",
            oracle_equivalence,
        ),
        ("3  normalization suite", normalization_suite),
        ("4  thermal and Poissonian limits", limit_behavior),
        ("5  Fock-enumeration BER equivalence", fock_equivalence),
        ("6a key jump with distance, S=1e11, middle", key_jump_middle),
        ("6b no key, S=1e11, source at Alice", no_key_at_alice),
        (
            "6c CW vs pulsed agreement and cutoff ordering",
            cw_versus_pulsed,
        ),
        (
            "7  sweep determinism across thread counts",
            sweep_determinism,
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
