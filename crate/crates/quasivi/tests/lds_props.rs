//! Sequence-level properties: golden prefixes, net structure, marginal
//! uniformity, discrepancy ordering and integration rates.

use quasivi::diagnostics::{integration_rates, ks_statistic_uniform, rate_fit};
use quasivi::lds::{
    generate, randomize, star_discrepancy_2d, RandomizeMode, SequenceSource, SourceKind,
    UniformBatch,
};

/// First 16 unscrambled Sobol points in d=4, frozen from an independent
/// generator built on the published direction numbers.
const SOBOL_D4_FIRST16: [[f64; 4]; 16] = [
    [0.0000, 0.0000, 0.0000, 0.0000],
    [0.5000, 0.5000, 0.5000, 0.5000],
    [0.7500, 0.2500, 0.2500, 0.2500],
    [0.2500, 0.7500, 0.7500, 0.7500],
    [0.3750, 0.3750, 0.6250, 0.8750],
    [0.8750, 0.8750, 0.1250, 0.3750],
    [0.6250, 0.1250, 0.8750, 0.6250],
    [0.1250, 0.6250, 0.3750, 0.1250],
    [0.1875, 0.3125, 0.9375, 0.4375],
    [0.6875, 0.8125, 0.4375, 0.9375],
    [0.9375, 0.0625, 0.6875, 0.1875],
    [0.4375, 0.5625, 0.1875, 0.6875],
    [0.3125, 0.1875, 0.3125, 0.5625],
    [0.8125, 0.6875, 0.8125, 0.0625],
    [0.5625, 0.4375, 0.0625, 0.8125],
    [0.0625, 0.9375, 0.5625, 0.3125],
];

#[test]
fn sobol_d4_matches_reference_prefix() {
    let batch = generate(&SequenceSource::new(SourceKind::QmcSobol, 4), 16).unwrap();
    for (i, row) in SOBOL_D4_FIRST16.iter().enumerate() {
        for (j, &expected) in row.iter().enumerate() {
            assert_eq!(batch.get(i, j), expected, "point {i} dim {j}");
        }
    }
}

#[test]
fn dimension_one_prefix_is_van_der_corput() {
    // Gray-code ordered van der Corput: point n is the bit reversal of the
    // Gray code of n.
    let batch = generate(&SequenceSource::new(SourceKind::QmcSobol, 1), 64).unwrap();
    for n in 0..64u32 {
        let gray = n ^ (n >> 1);
        let expected = f64::from(gray.reverse_bits()) / 2f64.powi(32);
        assert_eq!(batch.get(n as usize, 0), expected);
    }
}

/// Counts points per elementary dyadic box for every shape decomposition of
/// total resolution `m`, checking the (0, m, 2)-net property.
fn is_two_dimensional_net(batch: &UniformBatch, m: u32) -> bool {
    assert_eq!(batch.n(), 1usize << m);
    for k1 in 0..=m {
        let k2 = m - k1;
        let mut counts = vec![0u32; 1 << m];
        for row in 0..batch.n() {
            let b1 = (batch.get(row, 0) * f64::from(1u32 << k1)) as usize;
            let b2 = (batch.get(row, 1) * f64::from(1u32 << k2)) as usize;
            counts[b1 * (1 << k2) + b2] += 1;
        }
        if counts.iter().any(|&c| c != 1) {
            return false;
        }
    }
    true
}

#[test]
fn sobol_2d_is_a_net_up_to_m6() {
    for m in 1..=6 {
        let batch = generate(&SequenceSource::new(SourceKind::QmcSobol, 2), 1 << m).unwrap();
        assert!(is_two_dimensional_net(&batch, m), "failed at m = {m}");
    }
}

#[test]
fn scramble_preserves_the_net_property() {
    // N = 16, d = 2: every elementary dyadic box of volume 1/N still holds
    // exactly one point after randomization.
    let base = generate(&SequenceSource::new(SourceKind::QmcSobol, 2), 16).unwrap();
    for seed in [1u64, 7, 42, 1234] {
        for mode in [RandomizeMode::Shift, RandomizeMode::Scramble] {
            let r = randomize(&base, mode, seed);
            assert!(is_two_dimensional_net(&r, 4), "{mode:?} seed {seed}");
        }
    }
}

#[test]
fn per_coordinate_equidistribution_up_to_d4() {
    // Each coordinate of the first 2^m points is a permutation of the
    // base-2 radical inverse values, so each dyadic interval of length
    // 2^-m holds exactly one point.
    let m = 6;
    let batch = generate(&SequenceSource::new(SourceKind::QmcSobol, 4), 1 << m).unwrap();
    for j in 0..4 {
        let mut counts = vec![0u32; 1 << m];
        for i in 0..batch.n() {
            counts[(batch.get(i, j) * f64::from(1u32 << m)) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == 1), "dim {j}");
    }
}

#[test]
fn randomized_points_are_marginally_uniform() {
    // Pool 10^4 points across independent randomizations; the KS statistic
    // per coordinate must stay below the 1% critical value 1.628/sqrt(n).
    let base = generate(&SequenceSource::new(SourceKind::QmcSobol, 2), 100).unwrap();
    for mode in [RandomizeMode::Shift, RandomizeMode::Scramble] {
        for j in 0..2 {
            let mut pooled = Vec::with_capacity(10_000);
            for seed in 0..100u64 {
                let r = randomize(&base, mode, 1000 + seed);
                pooled.extend((0..100).map(|i| r.get(i, j)));
            }
            let ks = ks_statistic_uniform(&mut pooled);
            let critical = 1.628 / (pooled.len() as f64).sqrt();
            assert!(ks < critical, "{mode:?} dim {j}: ks={ks} critical={critical}");
        }
    }
}

#[test]
fn randomization_mean_over_seeds_is_centered() {
    let base = generate(&SequenceSource::new(SourceKind::QmcSobol, 2), 4).unwrap();
    for j in 0..2 {
        let mean: f64 = (0..1000u64)
            .map(|s| randomize(&base, RandomizeMode::Scramble, s).get(0, j))
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 0.5).abs() < 0.05, "dim {j}: {mean}");
    }
}

#[test]
fn sobol_beats_mc_on_star_discrepancy() {
    let sobol = generate(&SequenceSource::new(SourceKind::QmcSobol, 2), 256).unwrap();
    let d_sobol = star_discrepancy_2d(&sobol).unwrap();

    let mut mc_ds: Vec<f64> = (0..50u64)
        .map(|s| {
            let b = generate(&SequenceSource::new(SourceKind::Mc, 2).with_seed(s), 256).unwrap();
            star_discrepancy_2d(&b).unwrap()
        })
        .collect();
    mc_ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mc_ds[25];
    assert!(
        d_sobol < median,
        "sobol {d_sobol} not below MC median {median}"
    );
}

/// Independent brute-force oracle: the same critical-grid enumeration done
/// naively in O(n^3), without the rank tree.
fn star_discrepancy_naive(batch: &UniformBatch) -> f64 {
    let n = batch.n();
    let pts: Vec<(f64, f64)> = (0..n).map(|i| (batch.get(i, 0), batch.get(i, 1))).collect();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.push(1.0);
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    ys.push(1.0);
    let mut best = 0.0f64;
    for &cx in &xs {
        for &cy in &ys {
            let closed = pts.iter().filter(|p| p.0 <= cx && p.1 <= cy).count() as f64;
            let open = pts.iter().filter(|p| p.0 < cx && p.1 < cy).count() as f64;
            let vol = cx * cy;
            best = best.max(closed / n as f64 - vol).max(vol - open / n as f64);
        }
    }
    best
}

#[test]
fn star_discrepancy_matches_naive_oracle() {
    for seed in 0..8u64 {
        let batch = generate(&SequenceSource::new(SourceKind::Mc, 2).with_seed(seed), 48).unwrap();
        let fast = star_discrepancy_2d(&batch).unwrap();
        let naive = star_discrepancy_naive(&batch);
        assert!((fast - naive).abs() < 1e-12, "seed {seed}: {fast} vs {naive}");
    }
}

#[test]
fn smooth_integrand_rates_separate_mc_from_rqmc() {
    let ns: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let rows = integration_rates(4, &ns, 100, 2024).unwrap();
    let mc: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mc_var)).collect();
    let rq: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.rqmc_var)).collect();
    let mc_slope = rate_fit(&mc).unwrap().slope;
    let rq_slope = rate_fit(&rq).unwrap().slope;
    assert!(
        (mc_slope + 1.0).abs() <= 0.15,
        "MC slope {mc_slope} outside -1.0 +/- 0.15"
    );
    assert!(rq_slope <= -1.8, "RQMC slope {rq_slope} above -1.8");
}
