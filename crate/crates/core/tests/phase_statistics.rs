use dpe_core::phase_sim::statevector_distribution;
use dpe_core::rng::{derive_seed, rng_from_seed};
use dpe_core::{
    exact_distribution, run_node_sampled, run_node_statevector, t_for, NodeConfig, PhaseSpec,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Literal `(1/2^2t) |sum_j e^{2 pi i j (omega - m/2^t)}|^2`.
fn double_sum(omega: f64, t: u32) -> Vec<f64> {
    let size = 1usize << t;
    (0..size)
        .map(|m| {
            let delta = omega - m as f64 / size as f64;
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for j in 0..size {
                let a = 2.0 * std::f64::consts::PI * j as f64 * delta;
                re += a.cos();
                im += a.sin();
            }
            (re * re + im * im) / (size * size) as f64
        })
        .collect()
}

#[test]
fn frozen_high_precision_values() {
    // 40-digit evaluation of the literal double sum
    let cases: [(u64, u32, u32, &[f64]); 2] = [
        (
            5,
            5,
            3,
            &[
                0.035157411048682442265,
                0.81317866343607388904,
                0.092713250194676774022,
                0.01941211595211193846,
                0.010044548081682856753,
                0.0078882855979317470774,
                0.0085314000816841647601,
                0.013074325607156187626,
            ],
        ),
        (
            1,
            3,
            2,
            &[
                0.4267766952966368811,
                0.4267766952966368811,
                0.0732233047033631189,
                0.0732233047033631189,
            ],
        ),
    ];
    for (num, p, t, expect) in cases {
        let d = exact_distribution(&PhaseSpec::new(num, p).unwrap(), &NodeConfig::new(t, 0)).unwrap();
        for (got, want) in d.probabilities.iter().zip(expect) {
            assert!((got - want).abs() < 1e-14, "{num}/2^{p} t={t}: {got} vs {want}");
        }
    }
    let d = exact_distribution(&PhaseSpec::new(1000, 12).unwrap(), &NodeConfig::new(4, 0)).unwrap();
    assert!((d.probabilities[4] - 0.97152723451150238423).abs() < 1e-14);
    assert!((d.probabilities[15] - 0.00048821767050972944377).abs() < 1e-14);
}

#[test]
fn closed_form_matches_double_sum() {
    let mut rng = rng_from_seed(11);
    for _ in 0..20 {
        let w = PhaseSpec::random(20, &mut rng).unwrap();
        for t in 1..=7 {
            let d = exact_distribution(&w, &NodeConfig::new(t, 0)).unwrap();
            let oracle = double_sum(w.as_f64(), t);
            for (a, b) in d.probabilities.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn statevector_histogram_matches_exact() {
    let w = PhaseSpec::new(0x5_3A7C, 20).unwrap();
    let cfg = NodeConfig::new(5, 0);
    let exact = exact_distribution(&w, &cfg).unwrap();
    let mut counts = vec![0u64; 32];
    let draws = 100_000u64;
    for i in 0..draws {
        let m = run_node_statevector(&w, &cfg, derive_seed(3, i)).unwrap();
        counts[m.decimal() as usize] += 1;
    }
    let tv: f64 = counts
        .iter()
        .zip(&exact.probabilities)
        .map(|(&c, &p)| (c as f64 / draws as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn sampled_draws_pass_chi_square() {
    let w = PhaseSpec::new(0xB_EEF1, 20).unwrap();
    let cfg = NodeConfig::new(6, 2);
    let exact = exact_distribution(&w, &cfg).unwrap();
    let draws = 1_000_000u64;
    let mut counts = vec![0u64; 64];
    for i in 0..draws {
        let m = run_node_sampled(&w, &cfg, derive_seed(17, i)).unwrap();
        counts[m.decimal() as usize] += 1;
    }
    // pool outcomes with expected count < 5 into one bin
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(&exact.probabilities) {
        let e = p * draws as f64;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 1e-4, "chi-square {stat} on {bins} bins, p = {p_value}");
}

#[test]
fn representable_phase_is_deterministic_on_both_backends() {
    let w = PhaseSpec::new(0b110101, 6).unwrap();
    let cfg = NodeConfig::new(6, 0);
    for seed in 0..20 {
        assert_eq!(run_node_sampled(&w, &cfg, seed).unwrap().to_string(), "110101");
        assert_eq!(run_node_statevector(&w, &cfg, seed).unwrap().to_string(), "110101");
    }
}

#[test]
fn seeded_runs_repeat() {
    let w = PhaseSpec::new(987_654, 22).unwrap();
    let cfg = NodeConfig::new(10, 1);
    assert_eq!(
        run_node_statevector(&w, &cfg, 5).unwrap(),
        run_node_statevector(&w, &cfg, 5).unwrap()
    );
}

#[test]
fn shifted_node_reads_digits_from_x() {
    // 2^(x-1) omega is exactly representable in t = p - (x-1) bits, so the
    // node outputs a_x .. a_{x+t-1} with certainty
    let p = 14;
    let w = PhaseSpec::new(0b1011_0010_1110_01, p).unwrap();
    for x in 5..=p {
        let t = p - (x - 1);
        let cfg = NodeConfig::new(t, x - 1);
        let expect: String = (x..x + t).map(|j| char::from(b'0' + w.digit(j))).collect();
        assert_eq!(run_node_statevector(&w, &cfg, 1).unwrap().to_string(), expect);
        assert_eq!(run_node_sampled(&w, &cfg, 1).unwrap().to_string(), expect);
    }
}

#[test]
fn backends_agree_near_wraparound() {
    // omega = 1 - 2^-p sits next to 0 on the circle
    let p = 20;
    let w = PhaseSpec::new((1 << p) - 1, p).unwrap();
    for t in [3u32, 6, 9] {
        let cfg = NodeConfig::new(t, 0);
        let a = exact_distribution(&w, &cfg).unwrap();
        let b = statevector_distribution(&w, &cfg).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
        // outcome 0 (the wrapped neighbour) dominates
        assert_eq!(a.mode(), 0);
    }
}

#[test]
fn estimation_bounds_at_desk_scale() {
    // Pr[D_t(est, prefix_t) < 2^(t-n)] >= 1 - eps, and every such sample has
    // its n-bit prefix within 1 of the true prefix
    let trials = 20_000u64;
    let mut rng = rng_from_seed(2024);
    for n in 3..=8u32 {
        for eps in [0.1, 0.25] {
            let t = t_for(n, eps).unwrap();
            let p = 20;
            let mut hits = 0u64;
            for i in 0..trials {
                let w = PhaseSpec::random(p, &mut rng).unwrap();
                let out = run_node_sampled(&w, &NodeConfig::new(t, 0), derive_seed(n as u64, i)).unwrap();
                let truth = w.expansion_prefix(t).unwrap();
                if out.distance(&truth).unwrap() < 1 << (t - n) {
                    hits += 1;
                    let dn = out
                        .prefix(n)
                        .unwrap()
                        .distance(&w.expansion_prefix(n).unwrap())
                        .unwrap();
                    assert!(dn <= 1, "prefix transfer broke for {w}");
                }
            }
            let rate = hits as f64 / trials as f64;
            let sigma = (eps * (1.0 - eps) / trials as f64).sqrt();
            assert!(rate >= 1.0 - eps - 3.0 * sigma, "n={n} eps={eps}: {rate}");
        }
    }
}

#[test]
fn distribution_csv_export() {
    let d = exact_distribution(&PhaseSpec::new(1, 2).unwrap(), &NodeConfig::new(1, 0)).unwrap();
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,probability"));
    for (m, line) in lines.enumerate() {
        let (idx, p) = line.split_once(',').unwrap();
        assert_eq!(idx.parse::<usize>().unwrap(), m);
        assert!((p.parse::<f64>().unwrap() - 0.5).abs() < 1e-15);
    }
}
