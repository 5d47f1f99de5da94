//! Exhaustive and randomized checks of the bit-string and stitching
//! properties. Each check returns a [`CheckSummary`] with a case count, a
//! violation count, and the first violating case.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitstring::{cyclic_distance, BitString, Offset};
use crate::rng::rng_from_seed;
use crate::stitch::{
    count_overlap_counterexamples, overlap_gaps, perturbation_vector, segment,
    select_correction, stitch_segments, SegmentationPlan, CORRECTIONS,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
}

impl CheckSummary {
    fn new(name: &str) -> Self {
        CheckSummary {
            name: name.to_string(),
            cases: 0,
            violations: 0,
            first_violation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }

    fn merge(mut self, other: CheckSummary) -> Self {
        self.cases += other.cases;
        self.violations += other.violations;
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        self
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }
}

fn bs(v: u64, n: u32) -> BitString {
    BitString::from_decimal(v, n).expect("value fits")
}

/// Reduce over `0..count` in parallel, keeping the lowest-index first violation.
fn par_check<F>(name: &str, count: u64, f: F) -> CheckSummary
where
    F: Fn(u64, &mut CheckSummary) + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .fold(
            || CheckSummary::new(name),
            |mut acc, i| {
                f(i, &mut acc);
                acc
            },
        )
        .reduce(|| CheckSummary::new(name), CheckSummary::merge)
}

/// Metric axioms of the cyclic distance, over all triples of length `<= n_max`.
pub fn metric_axioms(n_max: u32) -> CheckSummary {
    (1..=n_max)
        .map(|n| {
            let size = 1u64 << n;
            par_check("metric axioms", size, |x, acc| {
                for y in 0..size {
                    let dxy = cyclic_distance(x, y, n);
                    let dyx = cyclic_distance(y, x, n);
                    acc.record(dxy == dyx && ((dxy == 0) == (x == y)), || {
                        format!("n={n} x={x} y={y}: symmetry/identity")
                    });
                    for z in 0..size {
                        let ok = dxy <= cyclic_distance(x, z, n) + cyclic_distance(z, y, n);
                        if !ok {
                            acc.record(false, || format!("n={n} x={x} y={y} z={z}: triangle"));
                        }
                    }
                    acc.cases += size;
                }
            })
        })
        .fold(CheckSummary::new("metric axioms"), CheckSummary::merge)
}

/// The distance equals the least `|b|` with `x +_n b = y`, found by scanning
/// `b = 0, +-1, +-2, ...` with the modular add.
pub fn distance_is_min_offset(n_max: u32) -> CheckSummary {
    (1..=n_max)
        .map(|n| {
            let size = 1u64 << n;
            par_check("distance = min |b|", size, |x, acc| {
                let xs = bs(x, n);
                for y in 0..size {
                    let ys = bs(y, n);
                    let mut best = None;
                    'scan: for mag in 0..size as i128 {
                        for b in [mag, -mag] {
                            if xs.add(Offset(b)).expect("in range") == ys {
                                best = Some(mag as u64);
                                break 'scan;
                            }
                        }
                    }
                    let d = xs.distance(&ys).expect("same length");
                    acc.record(best == Some(d), || {
                        format!("n={n} x={x} y={y}: distance {d}, scan {best:?}")
                    });
                }
            })
        })
        .fold(CheckSummary::new("distance = min |b|"), CheckSummary::merge)
}

/// `D_n(x,y) < 2^(n-n0)` implies the `n0`-bit prefixes are within 1.
pub fn prefix_transfer(n_max: u32) -> CheckSummary {
    (2..=n_max)
        .map(|n| {
            let size = 1u64 << n;
            par_check("prefix transfer", size, |x, acc| {
                let xs = bs(x, n);
                for y in 0..size {
                    let ys = bs(y, n);
                    let d = cyclic_distance(x, y, n);
                    for n0 in 1..n {
                        if d < 1u64 << (n - n0) {
                            let dp = xs
                                .prefix(n0)
                                .unwrap()
                                .distance(&ys.prefix(n0).unwrap())
                                .unwrap();
                            acc.record(dp <= 1, || format!("n={n} n0={n0} x={x} y={y}"));
                        }
                    }
                }
            })
        })
        .fold(CheckSummary::new("prefix transfer"), CheckSummary::merge)
}

/// `D_n(x,y) <= 1` implies the `n0`-bit suffixes are within 1.
pub fn suffix_transfer(n_max: u32) -> CheckSummary {
    (2..=n_max)
        .map(|n| {
            let size = 1u64 << n;
            par_check("suffix transfer", size, |x, acc| {
                let xs = bs(x, n);
                for y in 0..size {
                    if cyclic_distance(x, y, n) > 1 {
                        continue;
                    }
                    let ys = bs(y, n);
                    for n0 in 1..n {
                        let ds = xs
                            .suffix(n0)
                            .unwrap()
                            .distance(&ys.suffix(n0).unwrap())
                            .unwrap();
                        acc.record(ds <= 1, || format!("n={n} n0={n0} x={x} y={y}"));
                    }
                }
            })
        })
        .fold(CheckSummary::new("suffix transfer"), CheckSummary::merge)
}

/// Results of the three correction-step checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectionStepChecks {
    /// Unique `|b0| <= 1` and suffix transfer for suffix lengths `2..=t`.
    pub unique_offset: CheckSummary,
    /// Unique `b` in `{-2..2}` aligning the suffix with any `y` near it.
    pub unique_correction: CheckSummary,
    /// The selected correction is the sum of the two unit offsets.
    pub additive_correction: CheckSummary,
    /// Cases where the suffix transfer fails at suffix length 1, where `+1`
    /// and `-1` coincide modulo 2.
    pub single_bit_suffix_exceptions: u64,
}

pub fn correction_step(t_values: impl IntoIterator<Item = u32>) -> CorrectionStepChecks {
    let mut unique_offset = CheckSummary::new("unique b0 and suffix transfer");
    let mut unique_correction = CheckSummary::new("unique correction in {-2..2}");
    let mut additive = CheckSummary::new("correction = b1 + b2");
    let mut exceptions = 0u64;
    for t in t_values {
        let size = 1u64 << t;
        for s in 0..size {
            let ss = bs(s, t);
            for a in 0..size {
                if cyclic_distance(s, a, t) > 1 {
                    continue;
                }
                let aa = bs(a, t);
                let solutions: Vec<i128> = [-1i128, 0, 1]
                    .into_iter()
                    .filter(|&b| ss.add(Offset(b)).unwrap() == aa)
                    .collect();
                unique_offset.record(solutions.len() == 1, || {
                    format!("t={t} S={ss} A={aa}: offsets {solutions:?}")
                });
                for b in [-1i128, 0, 1] {
                    let whole = ss.add(Offset(b)).unwrap() == aa;
                    for t0 in 1..=t {
                        let tail = ss.suffix(t0).unwrap().add(Offset(b)).unwrap()
                            == aa.suffix(t0).unwrap();
                        if t0 == 1 {
                            exceptions += (whole != tail) as u64;
                            continue;
                        }
                        unique_offset.record(whole == tail, || {
                            format!("t={t} t0={t0} S={ss} A={aa} b={b}")
                        });
                    }
                }

                let s3 = ss.suffix(3).unwrap();
                let a3 = aa.suffix(3).unwrap();
                for y in 0..8u64 {
                    let ys = bs(y, 3);
                    if ys.distance(&a3).unwrap() > 1 {
                        continue;
                    }
                    let fits: Vec<i128> = CORRECTIONS
                        .into_iter()
                        .filter(|&c| s3.add(Offset(c)).unwrap() == ys)
                        .collect();
                    let selected = select_correction(&s3, &ys).ok();
                    unique_correction.record(
                        fits.len() == 1 && selected == Some(Offset(fits[0])),
                        || format!("t={t} S={ss} A={aa} y={ys}: {fits:?} vs {selected:?}"),
                    );
                    for b1 in [-1i128, 0, 1] {
                        if ss.add(Offset(b1)).unwrap() != aa {
                            continue;
                        }
                        for b2 in [-1i128, 0, 1] {
                            if a3.add(Offset(b2)).unwrap() != ys {
                                continue;
                            }
                            additive.record(selected == Some(Offset(b1 + b2)), || {
                                format!("t={t} S={ss} A={aa} y={ys} b1={b1} b2={b2}: {selected:?}")
                            });
                        }
                    }
                }
            }
        }
    }
    CorrectionStepChecks {
        unique_offset,
        unique_correction,
        additive_correction: additive,
        single_bit_suffix_exceptions: exceptions,
    }
}

/// Results of the exhaustive stitching sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StitchSweep {
    /// `D_n(S', omega) = D(S_k, A_k)` for every in-contract case.
    pub equality: CheckSummary,
    /// Adjacent raw overlaps are within cyclic distance 2.
    pub overlap_gap: CheckSummary,
    /// Exact windows stitch back to omega.
    pub identity: CheckSummary,
    /// Number of distinct (n, N0, k) plans swept.
    pub plans: u64,
}

fn check_plan(plan: &SegmentationPlan) -> StitchSweep {
    let n = plan.n;
    let k = plan.k as usize;
    let vectors = 3u64.pow(k as u32);
    let fold = |omega: u64, acc: &mut (CheckSummary, CheckSummary, CheckSummary)| {
        let om = bs(omega, n);
        let exact = segment(&om, plan).expect("plan matches").segments;
        let mut est = exact.clone();
        for idx in 0..vectors {
            let pert = perturbation_vector(idx, k);
            for ((e, a), &b) in est.iter_mut().zip(&exact).zip(&pert) {
                *e = a.add(Offset(b as i128)).expect("unit offset");
            }
            let gaps = overlap_gaps(&est).expect("windows are >= 3 bits");
            acc.1.record(gaps.iter().all(|&g| g <= 2), || {
                format!("n={n} N0={} k={k} omega={om} pert={pert:?}: gaps {gaps:?}", plan.n0)
            });
            let d_last = est[k - 1].distance(&exact[k - 1]).unwrap();
            let out = stitch_segments(&est);
            let ok = matches!(&out, Ok(s) if s.len() == n && s.distance(&om).unwrap() == d_last);
            acc.0.record(ok, || {
                format!("n={n} N0={} k={k} omega={om} pert={pert:?}: {out:?}", plan.n0)
            });
            if pert.iter().all(|&b| b == 0) {
                acc.2.record(out.as_ref().ok() == Some(&om), || {
                    format!("n={n} N0={} k={k} omega={om}: {out:?}", plan.n0)
                });
            }
        }
    };
    let empty = || {
        (
            CheckSummary::new("stitch equality"),
            CheckSummary::new("overlap gap <= 2"),
            CheckSummary::new("exact windows reconstruct omega"),
        )
    };
    let (equality, overlap_gap, identity) = (0..1u64 << n)
        .into_par_iter()
        .fold(empty, |mut acc, omega| {
            fold(omega, &mut acc);
            acc
        })
        .reduce(empty, |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)));
    StitchSweep {
        equality,
        overlap_gap,
        identity,
        plans: 1,
    }
}

/// Sweep every valid plan with `n <= n_max` and `N0` in `n0_values`, every
/// omega and every perturbation vector in `{-1,0,+1}^k`.
pub fn stitch_exhaustive(n_max: u32, n0_values: &[u32]) -> StitchSweep {
    let mut total = StitchSweep {
        equality: CheckSummary::new("stitch equality"),
        overlap_gap: CheckSummary::new("overlap gap <= 2"),
        identity: CheckSummary::new("exact windows reconstruct omega"),
        plans: 0,
    };
    for &n0 in n0_values {
        for n in 3..=n_max {
            for k in SegmentationPlan::valid_counts(n, n0) {
                let plan = SegmentationPlan::new(n, n0, k).expect("valid count");
                let s = check_plan(&plan);
                total.equality = total.equality.merge(s.equality);
                total.overlap_gap = total.overlap_gap.merge(s.overlap_gap);
                total.identity = total.identity.merge(s.identity);
                total.plans += 1;
            }
        }
    }
    total
}

/// Random plans, strings, and unit perturbations at length `n`.
pub fn stitch_randomized(n: u32, cases: u64, seed: u64) -> CheckSummary {
    let mut rng = rng_from_seed(seed);
    let plans: Vec<SegmentationPlan> = (3..=n)
        .flat_map(|n0| {
            SegmentationPlan::valid_counts(n, n0)
                .into_iter()
                .map(move |k| (n0, k))
        })
        .map(|(n0, k)| SegmentationPlan::new(n, n0, k).unwrap())
        .collect();
    let mut summary = CheckSummary::new("stitch equality (randomized)");
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..cases {
        let plan = &plans[rng.random_range(0..plans.len())];
        let omega = bs(rng.random::<u64>() & mask, n);
        let pert: Vec<i8> = (0..plan.k).map(|_| rng.random_range(-1..=1)).collect();
        let ok = crate::stitch::verify_theorem1(&omega, plan, &pert);
        summary.record(ok, || {
            format!("N0={} k={} omega={omega} pert={pert:?}", plan.n0, plan.k)
        });
    }
    summary
}

/// Counterexample census for one overlap length over all `n <= n_max`,
/// `N0` in `n0_values`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapCensus {
    pub overlap: u32,
    pub geometries: u64,
    pub cases: u64,
    pub counterexamples: u64,
}

pub fn overlap_census(overlap: u32, n_max: u32, n0_values: &[u32]) -> OverlapCensus {
    let mut census = OverlapCensus {
        overlap,
        geometries: 0,
        cases: 0,
        counterexamples: 0,
    };
    for &n0 in n0_values {
        for n in 1..=n_max {
            if let Some((bad, cases)) = count_overlap_counterexamples(n, n0, overlap) {
                census.geometries += 1;
                census.cases += cases;
                census.counterexamples += bad;
            }
        }
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_pass() {
        assert!(metric_axioms(5).passed());
        assert!(distance_is_min_offset(5).passed());
        assert!(prefix_transfer(6).passed());
        assert!(suffix_transfer(6).passed());
    }

    #[test]
    fn correction_step_small() {
        let c = correction_step([3, 4]);
        assert!(c.unique_offset.passed(), "{:?}", c.unique_offset);
        assert!(c.unique_correction.passed());
        assert!(c.additive_correction.passed());
        assert!(c.single_bit_suffix_exceptions > 0);
    }

    #[test]
    fn stitch_sweep_small() {
        let s = stitch_exhaustive(7, &[3, 4, 5]);
        assert!(s.equality.passed(), "{:?}", s.equality.first_violation);
        assert!(s.overlap_gap.passed());
        assert!(s.identity.passed());
        assert!(stitch_randomized(20, 2000, 3).passed());
    }

    #[test]
    fn summary_keeps_first_violation() {
        let mut s = CheckSummary::new("x");
        s.record(true, || unreachable!());
        s.record(false, || "first".into());
        s.record(false, || "second".into());
        assert_eq!(s.violations, 2);
        assert_eq!(s.first_violation.as_deref(), Some("first"));
        assert!(!s.passed());
    }
}
