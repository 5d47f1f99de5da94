//! Single-node phase estimation.
//!
//! The eigenphase is a dyadic rational `numerator / 2^p`. A node with register
//! width `t` and shift `s` estimates the fractional part of `2^s * omega`. The
//! measurement distribution after the inverse transform is evaluated in
//! closed form,
//!
//! ```text
//! p_m = sin^2(2^t * pi * delta) / (2^(2t) * sin^2(pi * delta)),   delta = omega_s - m / 2^t
//! ```
//!
//! with `delta` reduced in integer arithmetic, and independently by a dense
//! statevector simulation in [`statevector`].

pub mod statevector;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::float::FloatCore;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use statevector::{qft, qft_inverse, statevector_distribution, Statevector};

/// Largest register the closed-form path accepts.
pub const MAX_EXACT_QUBITS: u32 = 30;
/// Largest register the dense statevector path accepts.
pub const MAX_STATEVECTOR_QUBITS: u32 = 14;
/// Largest phase precision.
pub const MAX_PRECISION: u32 = 64;

/// Eigenphase `numerator / 2^precision` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseSpec {
    numerator: u64,
    precision: u32,
}

impl PhaseSpec {
    pub fn new(numerator: u64, precision: u32) -> Result<Self> {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(Error::InvalidPhase(format!(
                "precision must be in 1..={MAX_PRECISION}, got {precision}"
            )));
        }
        if precision < 64 && numerator >> precision != 0 {
            return Err(Error::InvalidPhase(format!(
                "numerator {numerator} is not below 2^{precision}"
            )));
        }
        Ok(PhaseSpec {
            numerator,
            precision,
        })
    }

    /// Uniformly random phase with `precision` bits.
    pub fn random<R: Rng + ?Sized>(precision: u32, rng: &mut R) -> Result<Self> {
        let raw: u64 = rng.random();
        let numerator = if precision >= 64 {
            raw
        } else {
            raw >> (64 - precision)
        };
        Self::new(numerator, precision)
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / 2f64.powi(self.precision as i32)
    }

    /// Binary digit `a_j` of `0.a_1 a_2 ...` (1-based, zero past the precision).
    pub fn digit(&self, j: u32) -> u8 {
        if j == 0 || j > self.precision {
            return 0;
        }
        ((self.numerator >> (self.precision - j)) & 1) as u8
    }

    /// First `m` digits of the expansion, i.e. `floor(omega * 2^m)` as `m` bits.
    pub fn expansion_prefix(&self, m: u32) -> Result<BitString> {
        let v = if m <= self.precision {
            (self.numerator as u128) >> (self.precision - m)
        } else {
            (self.numerator as u128) << (m - self.precision)
        };
        if v > u64::MAX as u128 {
            return Err(Error::TooLong { len: m, max: 64 });
        }
        BitString::from_decimal(v as u64, m)
    }

    /// Fractional part of `2^shift * omega`.
    pub fn shifted(&self, shift: u32) -> Self {
        let numerator = if shift >= self.precision {
            0
        } else {
            let m = (1u128 << self.precision) - 1;
            (((self.numerator as u128) << shift) & m) as u64
        };
        PhaseSpec {
            numerator,
            precision: self.precision,
        }
    }
}

impl fmt::Display for PhaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.precision)
    }
}

impl FromStr for PhaseSpec {
    type Err = Error;

    /// Parses `<numerator>/2^<precision>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPhase(format!("expected <int>/2^<int>, got {s:?}"));
        let (num, den) = s.split_once('/').ok_or_else(bad)?;
        let exp = den.strip_prefix("2^").ok_or_else(bad)?;
        let all_digits = |x: &str| !x.is_empty() && x.bytes().all(|c| c.is_ascii_digit());
        if !all_digits(num) || !all_digits(exp) {
            return Err(bad());
        }
        let numerator = num.parse::<u64>().map_err(|_| bad())?;
        let precision = exp.parse::<u32>().map_err(|_| bad())?;
        Self::new(numerator, precision)
    }
}

/// Register width and power shift of one estimation node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConfig {
    /// Control register width in qubits.
    pub t: u32,
    /// The node applies controlled powers of `U^(2^shift)`.
    pub shift: u32,
}

impl NodeConfig {
    pub fn new(t: u32, shift: u32) -> Self {
        NodeConfig { t, shift }
    }

    /// Phase this node actually sees.
    pub fn effective_phase(&self, phase: &PhaseSpec) -> PhaseSpec {
        phase.shifted(self.shift)
    }

    fn check(&self, max: u32) -> Result<()> {
        if self.t == 0 || self.t > max {
            return Err(Error::RegisterTooLarge { t: self.t, max });
        }
        Ok(())
    }
}

/// Outcome probabilities of a `t`-qubit measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementDistribution {
    pub t: u32,
    pub probabilities: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn total(&self) -> f64 {
        compensated_sum(self.probabilities.iter().copied())
    }

    /// Most likely outcome (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (m, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = m;
            }
        }
        best
    }

    /// Inverse-CDF draw in index order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (m, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                last_nonzero = m;
            }
            acc += p;
            if u < acc {
                return m;
            }
        }
        last_nonzero
    }

    pub fn max_abs_diff(&self, other: &MeasurementDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `m,probability`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "probability"])?;
        for (m, p) in self.probabilities.iter().enumerate() {
            w.write_record([m.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Signed representative of `x mod 2^bits` in `(-2^(bits-1), 2^(bits-1)]`.
fn centered_residue(x: i128, bits: u32) -> i128 {
    let m = 1i128 << bits;
    let r = x.rem_euclid(m);
    if r > m / 2 {
        r - m
    } else {
        r
    }
}

/// Probability of outcome `m` for phase `numerator / 2^precision` on a
/// `t`-qubit register. `numerator` may be any integer; only its class modulo
/// `2^precision` matters.
pub(crate) fn outcome_probability_raw(numerator: i128, precision: u32, t: u32, m: u64) -> f64 {
    // 2^(p+t) * delta = numerator * 2^t - m * 2^p
    let scaled = (numerator << t) - ((m as i128) << precision);
    let r = centered_residue(scaled, precision + t);
    if r == 0 {
        return 1.0;
    }
    let r_num = centered_residue(r, precision);
    if r_num == 0 {
        return 0.0;
    }
    let delta = r as f64 / 2f64.powi((precision + t) as i32);
    let top = (PI * (r_num as f64 / 2f64.powi(precision as i32))).sin();
    let bottom = 2f64.powi(t as i32) * (PI * delta).sin();
    let amp = top / bottom;
    amp * amp
}

fn outcome_probability(phase: &PhaseSpec, t: u32, m: u64) -> f64 {
    outcome_probability_raw(phase.numerator as i128, phase.precision, t, m)
}

/// Closed-form distribution of the node's measured register.
pub fn exact_distribution(
    phase: &PhaseSpec,
    config: &NodeConfig,
) -> Result<MeasurementDistribution> {
    config.check(MAX_EXACT_QUBITS)?;
    let effective = config.effective_phase(phase);
    let probabilities = (0..1u64 << config.t)
        .map(|m| outcome_probability(&effective, config.t, m))
        .collect();
    Ok(MeasurementDistribution {
        t: config.t,
        probabilities,
    })
}

/// Draw one outcome from the closed-form distribution. Outcomes are visited
/// outward from the nearest grid point to the phase (`m0, m0+1, m0-1, ...`),
/// so the cost does not grow with `2^t`.
pub fn run_node_sampled(phase: &PhaseSpec, config: &NodeConfig, rng_seed: u64) -> Result<BitString> {
    config.check(MAX_EXACT_QUBITS)?;
    let effective = config.effective_phase(phase);
    let t = config.t;
    let size = 1u64 << t;
    let p = effective.precision;
    let half = 1u128 << (p - 1);
    let nearest = ((((effective.numerator as u128) << t) + half) >> p) as u64 & (size - 1);

    let mut rng = rng_from_seed(rng_seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for i in 0..size {
        let step = i.div_ceil(2);
        let m = if i % 2 == 1 {
            nearest.wrapping_add(step)
        } else {
            nearest.wrapping_sub(step)
        } & (size - 1);
        acc += outcome_probability(&effective, t, m);
        if u < acc {
            return BitString::from_decimal(m, t);
        }
    }
    BitString::from_decimal(nearest, t)
}

/// Simulate the node with the dense statevector backend and measure.
pub fn run_node_statevector(
    phase: &PhaseSpec,
    config: &NodeConfig,
    rng_seed: u64,
) -> Result<BitString> {
    let dist = statevector_distribution(phase, config)?;
    let mut rng = rng_from_seed(rng_seed);
    let m = dist.sample(&mut rng);
    BitString::from_decimal(m as u64, config.t)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// `ceil(log2(2 + k / (2 * epsilon)))`, evaluated exactly on the binary value
/// of `epsilon`.
pub fn extra_qubits(k: u32, epsilon: f64) -> Result<u32> {
    check_epsilon(epsilon)?;
    if k == 0 {
        return Err(Error::InvalidGeometry("k >= 1 violated (k = 0)".into()));
    }
    // 2^c >= 2 + k/(2 eps)  <=>  (2^c - 2) * mant * 2^(exp+1) >= k
    let (mant, exp, _) = epsilon.integer_decode();
    let e = exp as i32 + 1;
    let mant = BigUint::from(mant);
    let mut rhs = BigUint::from(k);
    let mut lhs_shift = 0u32;
    if e >= 0 {
        lhs_shift = e as u32;
    } else {
        rhs <<= (-e) as u32;
    }
    let mut c = 1u32;
    loop {
        let pow = (BigUint::from(1u8) << c) - BigUint::from(2u8);
        if (&pow * &mant) << lhs_shift >= rhs {
            return Ok(c);
        }
        c += 1;
    }
}

/// Register width `n + ceil(log2(2 + 1/(2 epsilon)))` that gets the first `n`
/// bits right to within one with probability at least `1 - epsilon`.
pub fn t_for(n_bits: u32, epsilon: f64) -> Result<u32> {
    Ok(n_bits + extra_qubits(1, epsilon)?)
}
