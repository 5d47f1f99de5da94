//! Dense statevector backend for the control register.
//!
//! The eigenvector register is not simulated: under a controlled power of `U`
//! acting on an eigenvector it only contributes the phase kick
//! `|j> -> e^{2 pi i j omega} |j>`. The Fourier transforms are applied as one
//! dense unitary, `O(4^t)` per application.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{compensated_sum, MeasurementDistribution, NodeConfig, PhaseSpec, MAX_STATEVECTOR_QUBITS};
use crate::error::{Error, Result};

/// Tolerance on `sum |a|^2 - 1` after every gate.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    t: u32,
    amplitudes: Vec<Complex64>,
}

fn check_width(t: u32) -> Result<()> {
    if t == 0 || t > MAX_STATEVECTOR_QUBITS {
        return Err(Error::RegisterTooLarge {
            t,
            max: MAX_STATEVECTOR_QUBITS,
        });
    }
    Ok(())
}

impl Statevector {
    /// Computational basis state `|index>`.
    pub fn basis(t: u32, index: usize) -> Result<Self> {
        check_width(t)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << t];
        let slot = amplitudes
            .get_mut(index)
            .ok_or_else(|| Error::InvalidGeometry(format!("basis index {index} >= 2^{t}")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(Statevector { t, amplitudes })
    }

    /// `H^{(x)t} |0>`.
    pub fn uniform(t: u32) -> Result<Self> {
        check_width(t)?;
        let a = 1.0 / ((1u64 << t) as f64).sqrt();
        Ok(Statevector {
            t,
            amplitudes: vec![Complex64::new(a, 0.0); 1 << t],
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::InvalidGeometry(format!(
                "statevector length {len} is not 2^t with t >= 1"
            )));
        }
        let t = len.trailing_zeros();
        check_width(t)?;
        Ok(Statevector { t, amplitudes })
    }

    pub fn qubits(&self) -> u32 {
        self.t
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|a| a.norm_sqr()))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Controlled powers of `U` on an eigenvector with phase `phase`:
    /// `|j> -> e^{2 pi i j omega} |j>`, with `j * omega mod 1` reduced exactly.
    pub fn apply_phase_kick(&mut self, phase: &PhaseSpec) {
        let p = phase.precision();
        let num = phase.numerator() as u128;
        let mask = if p >= 128 { u128::MAX } else { (1u128 << p) - 1 };
        let scale = 2f64.powi(p as i32);
        for (j, a) in self.amplitudes.iter_mut().enumerate() {
            let frac = ((j as u128 * num) & mask) as f64 / scale;
            *a *= Complex64::from_polar(1.0, 2.0 * PI * frac);
        }
        debug_assert!(self.is_normalized());
    }

    /// `|amplitude|^2` for every basis state.
    pub fn probabilities(&self) -> MeasurementDistribution {
        MeasurementDistribution {
            t: self.t,
            probabilities: self.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// CSV with header `index,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "re", "im"])?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            w.write_record([i.to_string(), a.re.to_string(), a.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `out_j = 2^{-t/2} sum_k e^{sign * 2 pi i j k / 2^t} in_k`
fn dense_fourier(state: &Statevector, sign: f64) -> Statevector {
    let size = state.amplitudes.len();
    let scale = 1.0 / (size as f64).sqrt();
    let twiddles: Vec<Complex64> = (0..size)
        .map(|q| Complex64::from_polar(1.0, sign * 2.0 * PI * q as f64 / size as f64))
        .collect();
    let mask = size - 1;
    let input = &state.amplitudes;
    let amplitudes = (0..size)
        .into_par_iter()
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, a) in input.iter().enumerate() {
                acc += twiddles[(j * k) & mask] * a;
            }
            acc * scale
        })
        .collect();
    let out = Statevector {
        t: state.t,
        amplitudes,
    };
    debug_assert!(
        (out.norm_sqr() - state.norm_sqr()).abs() <= NORM_TOLERANCE,
        "Fourier transform drifted the norm"
    );
    out
}

/// Quantum Fourier transform `|j> -> 2^{-t/2} sum_k e^{2 pi i j k / 2^t} |k>`.
pub fn qft(state: &Statevector) -> Result<Statevector> {
    check_width(state.t)?;
    Ok(dense_fourier(state, 1.0))
}

/// Inverse quantum Fourier transform.
pub fn qft_inverse(state: &Statevector) -> Result<Statevector> {
    check_width(state.t)?;
    Ok(dense_fourier(state, -1.0))
}

/// Run the node circuit on the statevector backend and return the final
/// outcome distribution.
pub fn statevector_distribution(
    phase: &PhaseSpec,
    config: &NodeConfig,
) -> Result<MeasurementDistribution> {
    check_width(config.t)?;
    let mut state = Statevector::uniform(config.t)?;
    state.apply_phase_kick(&config.effective_phase(phase));
    let state = qft_inverse(&state)?;
    if !state.is_normalized() {
        return Err(Error::InvalidPhase(format!(
            "statevector norm drifted to {}",
            state.norm_sqr()
        )));
    }
    Ok(state.probabilities())
}
