//! Overlapping segmentation of a target string and right-to-left stitching of
//! noisy window estimates.
//!
//! A target `omega` of `n` bits is cut into `k` windows. Windows `1..k-1` have
//! length `N0`, adjacent windows share their last/first three bits, and the
//! final window takes whatever remains. Given one estimate per window, each
//! within cyclic distance 1 of its window, [`stitch`] fixes the last estimate
//! and walks leftwards, shifting every estimate by the unique offset in
//! `{-2..2}` that makes its three-bit tail agree with the head of the already
//! corrected right neighbour. The result is within the same distance of
//! `omega` as the last estimate is of the last window.

use rayon::prelude::*;
use serde::Serialize;

use crate::bitstring::{cyclic_distance, BitString, Offset};
use crate::error::{Error, Result};

/// Overlap length on the main path.
pub const OVERLAP: u32 = 3;

/// Correction candidates tried by [`select_correction`].
pub const CORRECTIONS: [i128; 5] = [0, 1, -1, 2, -2];

/// Window geometry with a fixed three-bit overlap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentationPlan {
    pub n: u32,
    #[serde(rename = "N0")]
    pub n0: u32,
    pub k0: u32,
    pub k: u32,
    /// 1-based start index of each window.
    pub starts: Vec<u32>,
    pub last_len: u32,
}

impl SegmentationPlan {
    pub fn new(n: u32, n0: u32, k: u32) -> Result<Self> {
        if n0 < OVERLAP {
            return Err(Error::InvalidGeometry(format!("N0 >= 3 violated (N0 = {n0})")));
        }
        if k == 0 {
            return Err(Error::InvalidGeometry("k >= 1 violated (k = 0)".into()));
        }
        if n > crate::bitstring::MAX_LEN {
            return Err(Error::InvalidGeometry(format!(
                "n <= {} violated (n = {n})",
                crate::bitstring::MAX_LEN
            )));
        }
        let step = n0 - OVERLAP;
        let covered = (k as i64 - 1) * step as i64;
        let last_len = n as i64 - covered;
        if last_len < OVERLAP as i64 {
            return Err(Error::InvalidGeometry(format!(
                "3 <= l[A_k] violated: l[A_k] = n - (k-1)(N0-3) = {n} - {covered} = {last_len}"
            )));
        }
        if last_len > n0 as i64 {
            return Err(Error::InvalidGeometry(format!(
                "l[A_k] <= N0 violated: l[A_k] = n - (k-1)(N0-3) = {n} - {covered} = {last_len} > {n0}"
            )));
        }
        let starts = (0..k).map(|i| i * step + 1).collect();
        Ok(SegmentationPlan {
            n,
            n0,
            k0: OVERLAP,
            k,
            starts,
            last_len: last_len as u32,
        })
    }

    /// Every valid `k` for the given `n` and `N0`.
    pub fn valid_counts(n: u32, n0: u32) -> Vec<u32> {
        if n0 < OVERLAP {
            return Vec::new();
        }
        if n0 == OVERLAP {
            // zero step: every window is the same three bits
            return if n == OVERLAP { (1..=4).collect() } else { Vec::new() };
        }
        (1..=n).filter(|&k| Self::new(n, n0, k).is_ok()).collect()
    }

    /// Length of window `i` (0-based).
    pub fn window_len(&self, i: usize) -> u32 {
        if i + 1 == self.k as usize {
            self.last_len
        } else {
            self.n0
        }
    }

    /// `(start, len)` for every window, 1-based starts.
    pub fn windows(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.starts
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, self.window_len(i)))
    }
}

/// One string per window of a plan: either the exact windows `A_i` or the
/// node estimates `S_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentSet {
    pub segments: Vec<BitString>,
    pub plan: SegmentationPlan,
}

impl SegmentSet {
    /// Wraps estimates, checking only their lengths against the plan.
    pub fn new(segments: Vec<BitString>, plan: SegmentationPlan) -> Result<Self> {
        if segments.len() != plan.k as usize {
            return Err(Error::InvalidGeometry(format!(
                "expected {} segments, got {}",
                plan.k,
                segments.len()
            )));
        }
        for (i, s) in segments.iter().enumerate() {
            let expected = plan.window_len(i);
            if s.len() != expected {
                return Err(Error::PlanMismatch {
                    expected,
                    got: s.len(),
                });
            }
        }
        Ok(SegmentSet { segments, plan })
    }
}

/// Cut `omega` into the plan's overlapping windows.
pub fn segment(omega: &BitString, plan: &SegmentationPlan) -> Result<SegmentSet> {
    if omega.len() != plan.n {
        return Err(Error::PlanMismatch {
            expected: plan.n,
            got: omega.len(),
        });
    }
    let segments = plan
        .windows()
        .map(|(start, len)| omega.slice(start, len))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentSet {
        segments,
        plan: plan.clone(),
    })
}

/// The unique `c` in `{-2..2}` with `s_suffix +_3 c = target_prefix`.
pub fn select_correction(s_suffix: &BitString, target_prefix: &BitString) -> Result<Offset> {
    if s_suffix.len() != OVERLAP || target_prefix.len() != OVERLAP {
        return Err(Error::LengthMismatch {
            left: s_suffix.len(),
            right: target_prefix.len(),
        });
    }
    CORRECTIONS
        .iter()
        .map(|&c| Offset(c))
        .find(|&c| s_suffix.add_unchecked(c.0) == *target_prefix)
        .ok_or_else(|| Error::OverlapMismatch {
            index: 0,
            suffix: s_suffix.to_string(),
            prefix: target_prefix.to_string(),
        })
}

/// Stitch the estimates of a plan into one `n`-bit string.
pub fn stitch(estimates: &SegmentSet) -> Result<BitString> {
    stitch_segments(&estimates.segments)
}

/// Stitch a sequence of windows that overlap by three bits. Each window must
/// be at least three bits long.
pub fn stitch_segments(segments: &[BitString]) -> Result<BitString> {
    let (last, rest) = segments
        .split_last()
        .ok_or_else(|| Error::InvalidGeometry("no segments to stitch".into()))?;
    if segments.iter().any(|s| s.len() < OVERLAP) {
        return Err(Error::InvalidGeometry("every window needs at least 3 bits".into()));
    }
    // corrected tail kept as (value, len) so a zero-length remainder is allowed
    let mut acc = last.decimal();
    let mut acc_len = last.len();
    for (r, s) in rest.iter().enumerate().rev() {
        let head = acc >> (acc_len - OVERLAP);
        let tail = BitString::from_decimal(s.decimal() & 0b111, OVERLAP)?;
        let target = BitString::from_decimal(head, OVERLAP)?;
        let c = select_correction(&tail, &target).map_err(|e| match e {
            Error::OverlapMismatch { suffix, prefix, .. } => Error::OverlapMismatch {
                index: r + 1,
                suffix,
                prefix,
            },
            e => e,
        })?;
        let shifted = s.add_unchecked(c.0);
        let keep = acc_len - OVERLAP;
        let new_len = s.len() + keep;
        if new_len > crate::bitstring::MAX_LEN {
            return Err(Error::TooLong {
                len: new_len,
                max: crate::bitstring::MAX_LEN,
            });
        }
        let low = if keep == 0 { 0 } else { acc & (u64::MAX >> (64 - keep)) };
        acc = if keep == 0 {
            shifted.decimal()
        } else {
            (shifted.decimal() << keep) | low
        };
        acc_len = new_len;
    }
    BitString::from_decimal(acc, acc_len)
}

/// Cyclic distances between each raw estimate's three-bit tail and the next
/// estimate's three-bit head.
pub fn overlap_gaps(segments: &[BitString]) -> Result<Vec<u64>> {
    segments
        .windows(2)
        .map(|w| w[0].suffix(OVERLAP)?.distance(&w[1].prefix(OVERLAP)?))
        .collect()
}

/// Perturb each window of `omega` by the given offset, stitch, and check that
/// the stitched string is exactly as far from `omega` as the last estimate is
/// from the last window.
pub fn verify_theorem1(omega: &BitString, plan: &SegmentationPlan, perturbations: &[i8]) -> bool {
    let Ok(exact) = segment(omega, plan) else {
        return false;
    };
    if perturbations.len() != exact.segments.len() {
        return false;
    }
    let estimates: Vec<BitString> = exact
        .segments
        .iter()
        .zip(perturbations)
        .map(|(a, &b)| a.add_unchecked(b as i128))
        .collect();
    let last = estimates.len() - 1;
    let d_last = cyclic_distance(
        estimates[last].decimal(),
        exact.segments[last].decimal(),
        estimates[last].len(),
    );
    match stitch_segments(&estimates) {
        Ok(s) => s.len() == omega.len() && s.distance(omega).ok() == Some(d_last),
        Err(_) => false,
    }
}

/// Decode perturbation vector number `index` of `3^k`, first window most
/// significant, digits ordered `-1, 0, +1`.
pub fn perturbation_vector(index: u64, k: usize) -> Vec<i8> {
    let mut out = vec![0i8; k];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = (rest % 3) as i8 - 1;
        rest /= 3;
    }
    out
}

/// Serializable evidence for a miner verdict or verification sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessRecord {
    pub omega: BitString,
    pub plan: PlanEcho,
    pub perturbations: Vec<i8>,
    pub stitched: BitString,
    pub d_total: u64,
    pub d_last: u64,
    /// Other outputs an admissible correction choice could have produced.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<BitString>,
}

impl WitnessRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("witness records always serialize")
    }
}

/// Plan geometry as written into witness records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanEcho {
    pub n: u32,
    #[serde(rename = "N0")]
    pub n0: u32,
    pub k0: u32,
    pub k: u32,
    pub starts: Vec<u32>,
    pub lens: Vec<u32>,
}

impl From<&SegmentationPlan> for PlanEcho {
    fn from(p: &SegmentationPlan) -> Self {
        PlanEcho {
            n: p.n,
            n0: p.n0,
            k0: p.k0,
            k: p.k,
            starts: p.starts.clone(),
            lens: (0..p.k as usize).map(|i| p.window_len(i)).collect(),
        }
    }
}

/// Window geometry with an arbitrary overlap, used only by the miners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapPlan {
    pub n: u32,
    pub n0: u32,
    pub overlap: u32,
    pub starts: Vec<u32>,
    pub lens: Vec<u32>,
}

impl OverlapPlan {
    /// Fewest windows of length `n0` (last one shorter) overlapping by
    /// `overlap` bits that cover `n`. Fails with a diagnostic when fewer than
    /// two windows would be needed or the geometry cannot close.
    pub fn new(n: u32, n0: u32, overlap: u32) -> std::result::Result<Self, String> {
        if overlap == 0 || n0 < overlap {
            return Err(format!("window length {n0} must be at least the overlap {overlap}"));
        }
        if n <= n0 {
            return Err(format!(
                "n = {n} fits in a single window of length {n0}; nothing to stitch"
            ));
        }
        if n > crate::bitstring::MAX_LEN {
            return Err(format!("n = {n} exceeds {}", crate::bitstring::MAX_LEN));
        }
        let step = n0 - overlap;
        if step == 0 {
            return Err(format!("zero step (N0 = overlap = {n0}) cannot cover n = {n}"));
        }
        let mut starts = vec![1u32];
        while starts.last().unwrap() + n0 - 1 < n {
            let next = starts.last().unwrap() + step;
            starts.push(next);
        }
        let last_start = *starts.last().unwrap();
        let last_len = n - last_start + 1;
        if last_len < overlap {
            return Err(format!(
                "last window has {last_len} bits, fewer than the overlap {overlap}"
            ));
        }
        let mut lens = vec![n0; starts.len()];
        *lens.last_mut().unwrap() = last_len;
        Ok(OverlapPlan {
            n,
            n0,
            overlap,
            starts,
            lens,
        })
    }

    pub fn k(&self) -> usize {
        self.starts.len()
    }

    fn segment(&self, omega: u64) -> Vec<BitString> {
        let omega = BitString::from_decimal(omega, self.n).expect("omega fits plan");
        self.starts
            .iter()
            .zip(&self.lens)
            .map(|(&s, &l)| omega.slice(s, l).expect("window inside omega"))
            .collect()
    }

    fn echo(&self) -> PlanEcho {
        PlanEcho {
            n: self.n,
            n0: self.n0,
            k0: self.overlap,
            k: self.k() as u32,
            starts: self.starts.clone(),
            lens: self.lens.clone(),
        }
    }
}

/// Every string the right-to-left pass can output when, at each step, any
/// candidate in `{-2..2}` that aligns the overlap may be chosen. Sorted,
/// deduplicated; empty when some step has no admissible candidate.
pub fn admissible_stitches(segments: &[BitString], overlap: u32) -> Vec<BitString> {
    let Some((last, rest)) = segments.split_last() else {
        return Vec::new();
    };
    let mut frontier: Vec<(u64, u32)> = vec![(last.decimal(), last.len())];
    for s in rest.iter().rev() {
        let modulus = 1i128 << overlap;
        let tail = (s.decimal() & ((1u64 << overlap) - 1)) as i128;
        let mut next = Vec::new();
        for &(acc, acc_len) in &frontier {
            let head = (acc >> (acc_len - overlap)) as i128;
            for c in CORRECTIONS {
                if (tail + c).rem_euclid(modulus) != head {
                    continue;
                }
                let shifted = s.add_unchecked(c).decimal();
                let keep = acc_len - overlap;
                let low = if keep == 0 { 0 } else { acc & ((1u64 << keep) - 1) };
                let v = if keep == 0 { shifted } else { (shifted << keep) | low };
                next.push((v, s.len() + keep));
            }
        }
        next.sort_unstable();
        next.dedup();
        frontier = next;
    }
    frontier
        .into_iter()
        .map(|(v, l)| BitString::from_decimal(v, l).expect("stitched value fits"))
        .collect()
}

/// Outcome of an exhaustive counterexample search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MinerOutcome {
    Witness(WitnessRecord),
    NoWitness { searched: u64 },
    NotApplicable { reason: String },
}

impl MinerOutcome {
    pub fn witness(&self) -> Option<&WitnessRecord> {
        match self {
            MinerOutcome::Witness(w) => Some(w),
            _ => None,
        }
    }
}

/// Classify one (omega, perturbation) case for an overlap plan. Returns a
/// witness when some admissible correction sequence ends farther than 1 from
/// `omega`, or when no admissible sequence exists.
fn overlap_case(plan: &OverlapPlan, omega: u64, pert: &[i8]) -> Option<WitnessRecord> {
    let exact = plan.segment(omega);
    let estimates: Vec<BitString> = exact
        .iter()
        .zip(pert)
        .map(|(a, &b)| a.add_unchecked(b as i128))
        .collect();
    let outputs = admissible_stitches(&estimates, plan.overlap);
    let k = estimates.len() - 1;
    let d_last = estimates[k].distance(&exact[k]).expect("same length");
    let omega_bs = BitString::from_decimal(omega, plan.n).expect("omega fits plan");
    let bad = outputs
        .iter()
        .copied()
        .find(|s| s.distance(&omega_bs).expect("same length") > 1);
    if !outputs.is_empty() && bad.is_none() {
        return None;
    }
    let stitched = bad.unwrap_or(omega_bs);
    Some(WitnessRecord {
        omega: omega_bs,
        plan: plan.echo(),
        perturbations: pert.to_vec(),
        stitched,
        d_total: stitched.distance(&omega_bs).expect("same length"),
        d_last,
        alternatives: outputs.into_iter().filter(|s| *s != stitched).collect(),
    })
}

fn count_vectors(k: usize) -> u64 {
    3u64.pow(k as u32)
}

/// First counterexample, in (omega, perturbation) lexicographic order, for
/// stitching with the given overlap.
pub fn mine_overlap_counterexample(n: u32, n0: u32, overlap: u32) -> MinerOutcome {
    let plan = match OverlapPlan::new(n, n0, overlap) {
        Ok(p) => p,
        Err(reason) => return MinerOutcome::NotApplicable { reason },
    };
    let k = plan.k();
    let vectors = count_vectors(k);
    let found = (0..1u64 << n).into_par_iter().find_map_first(|omega| {
        (0..vectors).find_map(|idx| overlap_case(&plan, omega, &perturbation_vector(idx, k)))
    });
    match found {
        Some(w) => MinerOutcome::Witness(w),
        None => MinerOutcome::NoWitness {
            searched: (1u64 << n) * vectors,
        },
    }
}

/// Counterexample search with a two-bit overlap.
pub fn mine_k0_counterexample(n: u32, n0: u32) -> MinerOutcome {
    mine_overlap_counterexample(n, n0, 2)
}

/// Number of counterexamples among all (omega, perturbation) cases, or `None`
/// when the geometry is not applicable.
pub fn count_overlap_counterexamples(n: u32, n0: u32, overlap: u32) -> Option<(u64, u64)> {
    let plan = OverlapPlan::new(n, n0, overlap).ok()?;
    let k = plan.k();
    let vectors = count_vectors(k);
    let bad = (0..1u64 << n)
        .into_par_iter()
        .map(|omega| {
            (0..vectors)
                .filter(|&idx| overlap_case(&plan, omega, &perturbation_vector(idx, k)).is_some())
                .count() as u64
        })
        .sum();
    Some((bad, (1u64 << n) * vectors))
}

/// Equal split of `n` bits into `k` non-overlapping windows.
fn equal_split(n: u32, k: u32) -> Result<Vec<u32>> {
    if k == 0 || n == 0 || k > n || n % k != 0 || n > crate::bitstring::MAX_LEN {
        return Err(Error::InvalidGeometry(format!(
            "cannot split {n} bits into {k} equal windows"
        )));
    }
    Ok(vec![n / k; k as usize])
}

/// Catenate per-window estimates without any correction.
pub fn scheme1_case(omega: &BitString, k: u32, perturbations: &[i8]) -> Result<WitnessRecord> {
    let lens = equal_split(omega.len(), k)?;
    if perturbations.len() != lens.len() {
        return Err(Error::InvalidGeometry("one perturbation per window required".into()));
    }
    let mut start = 1;
    let mut estimates = Vec::with_capacity(lens.len());
    let mut starts = Vec::with_capacity(lens.len());
    let mut last_exact = None;
    for (&len, &b) in lens.iter().zip(perturbations) {
        let a = omega.slice(start, len)?;
        starts.push(start);
        estimates.push(a.add_unchecked(b as i128));
        last_exact = Some(a);
        start += len;
    }
    let mut stitched = estimates[0];
    for e in &estimates[1..] {
        stitched = stitched.catenate(e)?;
    }
    let last = *estimates.last().unwrap();
    Ok(WitnessRecord {
        omega: *omega,
        plan: PlanEcho {
            n: omega.len(),
            n0: lens[0],
            k0: 0,
            k,
            starts,
            lens,
        },
        perturbations: perturbations.to_vec(),
        stitched,
        d_total: stitched.distance(omega)?,
        d_last: last.distance(&last_exact.unwrap())?,
        alternatives: Vec::new(),
    })
}

/// Search for an omega and per-window `{-1,0,+1}` perturbations whose plain
/// catenation lands farther than 1 from omega.
pub fn demonstrate_scheme1_failure(n: u32, k: u32) -> Result<Option<WitnessRecord>> {
    equal_split(n, k)?;
    let vectors = count_vectors(k as usize);
    for omega in 0..1u64 << n {
        let omega = BitString::from_decimal(omega, n)?;
        for idx in 0..vectors {
            let pert = perturbation_vector(idx, k as usize);
            let case = scheme1_case(&omega, k, &pert)?;
            if case.d_total > 1 {
                return Ok(Some(case));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn plan_geometry() {
        let p = SegmentationPlan::new(6, 4, 3).unwrap();
        assert_eq!(p.starts, vec![1, 2, 3]);
        assert_eq!(p.last_len, 4);
        let p = SegmentationPlan::new(12, 6, 4).unwrap();
        assert_eq!(p.starts, vec![1, 4, 7, 10]);
        assert_eq!(p.last_len, 3);
        assert_eq!(p.starts[3] + p.last_len - 1, 12);
        assert!(matches!(
            SegmentationPlan::new(10, 4, 9),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(SegmentationPlan::new(10, 2, 1).is_err());
        assert!(SegmentationPlan::new(10, 6, 1).is_err());
        assert_eq!(SegmentationPlan::valid_counts(12, 4), vec![9, 10]);
        assert_eq!(SegmentationPlan::valid_counts(3, 3), vec![1, 2, 3, 4]);
    }

    #[test]
    fn segment_examples() {
        let plan = SegmentationPlan::new(6, 4, 3).unwrap();
        let set = segment(&bs("010110"), &plan).unwrap();
        assert_eq!(set.segments, vec![bs("0101"), bs("1011"), bs("0110")]);

        let x = bs("10110");
        let single = SegmentationPlan::new(5, 5, 1).unwrap();
        assert_eq!(segment(&x, &single).unwrap().segments, vec![x]);

        let plan = SegmentationPlan::new(9, 6, 2).unwrap();
        assert_eq!(plan.last_len, 6);
        let set = segment(&bs("111111111"), &plan).unwrap();
        assert_eq!(set.segments, vec![bs("111111"), bs("111111")]);

        assert!(matches!(
            segment(&bs("0101"), &plan),
            Err(Error::PlanMismatch { .. })
        ));
    }

    #[test]
    fn select_correction_examples() {
        assert_eq!(select_correction(&bs("110"), &bs("000")).unwrap(), Offset(2));
        assert_eq!(select_correction(&bs("101"), &bs("101")).unwrap(), Offset(0));
        assert!(matches!(
            select_correction(&bs("000"), &bs("101")),
            Err(Error::OverlapMismatch { .. })
        ));
    }

    #[test]
    fn stitch_examples() {
        let plan = SegmentationPlan::new(6, 4, 3).unwrap();
        let omega = bs("010110");
        let exact = segment(&omega, &plan).unwrap();
        assert_eq!(stitch(&exact).unwrap(), omega);

        let noisy = SegmentSet::new(vec![bs("0110"), bs("1010"), bs("0110")], plan).unwrap();
        let s = stitch(&noisy).unwrap();
        assert_eq!(s, bs("010110"));
        assert_eq!(s.distance(&omega).unwrap(), 0);
    }

    #[test]
    fn stitch_wraps_through_every_window() {
        let plan = SegmentationPlan::new(6, 4, 3).unwrap();
        let omega = bs("111111");
        assert!(verify_theorem1(&omega, &plan, &[0, 0, 1]));
        let exact = segment(&omega, &plan).unwrap();
        let mut est = exact.segments.clone();
        est[2] = est[2].add(1.into()).unwrap();
        assert_eq!(stitch_segments(&est).unwrap(), bs("000000"));
    }

    #[test]
    fn stitch_reports_failing_window() {
        let plan = SegmentationPlan::new(6, 4, 3).unwrap();
        let bad = SegmentSet::new(vec![bs("0000"), bs("0000"), bs("1010")], plan).unwrap();
        match stitch(&bad) {
            Err(Error::OverlapMismatch { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected OverlapMismatch, got {other:?}"),
        }
    }

    #[test]
    fn zero_step_plan_stitches_to_last_window() {
        let plan = SegmentationPlan::new(3, 3, 3).unwrap();
        assert_eq!(plan.starts, vec![1, 1, 1]);
        let est = SegmentSet::new(vec![bs("011"), bs("100"), bs("101")], plan).unwrap();
        assert_eq!(stitch(&est).unwrap(), bs("101"));
    }

    #[test]
    fn verify_theorem1_examples() {
        let plan = SegmentationPlan::new(6, 4, 3).unwrap();
        assert!(verify_theorem1(&bs("010110"), &plan, &[0, 0, 0]));
        assert!(verify_theorem1(&bs("010110"), &plan, &[1, -1, 0]));
        assert!(!verify_theorem1(&bs("010110"), &plan, &[0, 0]));
    }

    #[test]
    fn perturbation_vectors_are_lexicographic() {
        assert_eq!(perturbation_vector(0, 3), vec![-1, -1, -1]);
        assert_eq!(perturbation_vector(1, 3), vec![-1, -1, 0]);
        assert_eq!(perturbation_vector(13, 3), vec![0, 0, 0]);
        assert_eq!(perturbation_vector(26, 3), vec![1, 1, 1]);
    }

    #[test]
    fn overlap_plan_geometry() {
        let p = OverlapPlan::new(10, 4, 2).unwrap();
        assert_eq!(p.starts, vec![1, 3, 5, 7]);
        assert_eq!(p.lens, vec![4, 4, 4, 4]);
        assert!(OverlapPlan::new(4, 4, 2).is_err());
        assert!(OverlapPlan::new(5, 3, 3).is_err());
    }

    #[test]
    fn k0_two_miner_finds_ambiguous_correction() {
        let out = mine_k0_counterexample(4, 3);
        let w = out.witness().expect("overlap 2 admits a counterexample at n = 4");
        assert!(w.d_total > 1);
        assert!(w.perturbations.iter().all(|b| b.abs() <= 1));
        // a correct choice was also admissible; the correction is ambiguous
        assert!(!w.alternatives.is_empty());
    }

    #[test]
    fn k0_three_control_has_no_witness() {
        assert!(matches!(
            mine_overlap_counterexample(8, 5, 3),
            MinerOutcome::NoWitness { .. }
        ));
    }

    #[test]
    fn miner_reports_inapplicable_geometry() {
        assert!(matches!(
            mine_k0_counterexample(3, 4),
            MinerOutcome::NotApplicable { .. }
        ));
    }

    #[test]
    fn scheme1_example_witness() {
        let case = scheme1_case(&bs("001111"), 2, &[1, 0]).unwrap();
        assert_eq!(case.stitched, bs("010111"));
        assert_eq!(case.d_total, 8);
    }

    #[test]
    fn scheme1_zero_perturbation_is_exact() {
        for omega in 0..64u64 {
            let omega = BitString::from_decimal(omega, 6).unwrap();
            assert_eq!(scheme1_case(&omega, 2, &[0, 0]).unwrap().d_total, 0);
        }
    }

    #[test]
    fn scheme1_smallest_case() {
        let w = demonstrate_scheme1_failure(2, 2).unwrap().unwrap();
        assert!(w.d_total > 1);
        assert!(demonstrate_scheme1_failure(5, 2).is_err());
    }

    #[test]
    fn witness_json_line_has_contract_fields() {
        let case = scheme1_case(&bs("001111"), 2, &[1, 0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&case.to_json_line()).unwrap();
        for key in ["omega", "plan", "perturbations", "stitched", "d_total", "d_last"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["omega"], "001111");
    }
}
