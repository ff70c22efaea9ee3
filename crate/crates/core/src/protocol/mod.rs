//! The hybrid entanglement-swapping protocol.
//!
//! Two hybrid pairs `(|0>|α> + |1>|-α>)/√2` on modes A,B and C,D send their
//! coherent halves through lossy channels (transmissions `T` and `T - δ`),
//! meet at a 50:50 beam splitter, and are measured: vacuum on the B output
//! port and an `x_θ` homodyne on the D output port. What is left is a
//! two-qubit state on A,C.
//!
//! Two independent routes produce that state:
//! * [`analytic_branches`] tracks the coherent labels in closed form and
//!   expands only the environment modes in the photon-number basis;
//! * [`oracle_density`] simulates the whole circuit on truncated Fock spaces.

mod analytic;
mod herald;
mod oracle;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::{beam_splitter_coherent, homodyne_amplitude};
use crate::Complex;

pub use analytic::{
    analytic_branches, branches_to_density, equal_loss_branches, ideal_limit_density,
    ideal_limit_regime, protocol_density, Branch, BranchDecomposition,
};
pub use herald::{herald_hybrid_state, herald_target_overlap, HeraldOutcome, HeraldParams};
pub use oracle::{
    apply_loss, build_hybrid_state, oracle_density, oracle_density_with, oracle_outcome_density,
    oracle_success_probability, OracleConfig,
};

/// Physical knobs of one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Coherent amplitude of both hybrid pairs (real, `>= 0`).
    pub alpha: f64,
    /// Transmission of the B channel.
    pub transmission: f64,
    /// Loss mismatch: the D channel transmits `transmission - delta`.
    pub delta: f64,
    /// Homodyne outcome on the D port.
    pub x: f64,
    /// Homodyne quadrature angle.
    pub theta: f64,
    /// Remove the outcome-dependent phases from the shared state.
    pub phase_corrected: bool,
    /// Environment photon cutoff for the branch expansion; `None` picks the
    /// smallest rectangle that captures `1 - epsilon_branch` of the weight.
    pub n_trunc_branches: Option<usize>,
    pub epsilon_branch: f64,
    /// Put the mismatched channel on B instead of D.
    pub swap_channels: bool,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            transmission: 1.0,
            delta: 0.0,
            x: 0.0,
            theta: FRAC_PI_2,
            phase_corrected: true,
            n_trunc_branches: None,
            epsilon_branch: 1e-14,
            swap_channels: false,
        }
    }
}

impl ProtocolParams {
    pub fn new(alpha: f64, transmission: f64, delta: f64) -> Self {
        Self {
            alpha,
            transmission,
            delta,
            ..Self::default()
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_outcome(mut self, x: f64) -> Self {
        self.x = x;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(invalid(format!(
                "alpha = {} must be finite and >= 0",
                self.alpha
            )));
        }
        let t = self.transmission;
        if !(t > 0.0 && t <= 1.0) {
            return Err(invalid(format!("transmission T = {t} must lie in (0, 1]")));
        }
        if !(self.delta >= 0.0 && self.delta < t) {
            return Err(invalid(format!(
                "mismatch delta = {} must lie in [0, T = {t})",
                self.delta
            )));
        }
        if !self.x.is_finite() || !self.theta.is_finite() {
            return Err(invalid("homodyne outcome and angle must be finite"));
        }
        if !(self.epsilon_branch > 0.0 && self.epsilon_branch < 1.0) {
            return Err(invalid(format!(
                "branch cutoff {} must lie in (0, 1)",
                self.epsilon_branch
            )));
        }
        Ok(())
    }

    /// `(T_B, T_D)`.
    pub fn channels(&self) -> (f64, f64) {
        let (hi, lo) = (self.transmission, self.transmission - self.delta);
        if self.swap_channels {
            (lo, hi)
        } else {
            (hi, lo)
        }
    }

    /// `(√T + √(T-δ), √T - √(T-δ))`.
    pub fn t_plus_minus(&self) -> (f64, f64) {
        let (a, b) = (
            self.transmission.sqrt(),
            (self.transmission - self.delta).sqrt(),
        );
        (a + b, a - b)
    }
}

/// Basis order of the shared qubits: `|00>, |01>, |10>, |11>` on A,C.
pub const AC_BASIS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Coherent labels reaching the detectors, per AC basis component.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ComponentLabels {
    /// Amplitude arriving at the vacuum detector (B output port).
    pub vacuum_port: Complex,
    /// Amplitude arriving at the homodyne detector (D output port).
    pub homodyne_port: Complex,
    /// Amplitudes leaked into the B and D environments.
    pub env_b: f64,
    pub env_d: f64,
}

pub(crate) fn component_labels(p: &ProtocolParams) -> Result<[ComponentLabels; 4]> {
    let (tb, td) = p.channels();
    let mut out = [ComponentLabels {
        vacuum_port: Complex::default(),
        homodyne_port: Complex::default(),
        env_b: 0.0,
        env_d: 0.0,
    }; 4];
    for (slot, &(a, c)) in out.iter_mut().zip(&AC_BASIS) {
        let sa = if a == 0 { 1.0 } else { -1.0 };
        let sc = if c == 0 { 1.0 } else { -1.0 };
        let b_in = Complex::new(sa * p.alpha, 0.0);
        let d_in = Complex::new(sc * p.alpha, 0.0);
        let (b_sig, b_env) = beam_splitter_coherent(b_in, Complex::default(), tb)?;
        let (d_sig, d_env) = beam_splitter_coherent(d_in, Complex::default(), td)?;
        let (vac, hom) = beam_splitter_coherent(b_sig, d_sig, 0.5)?;
        *slot = ComponentLabels {
            vacuum_port: vac,
            homodyne_port: hom,
            env_b: b_env.re,
            env_d: d_env.re,
        };
    }
    Ok(out)
}

/// Phases the homodyne outcome imprints on each AC component. Removing them
/// is the feed-forward correction; for `θ = π/2` it is a product of local
/// phase gates on A and C.
pub fn outcome_phases(p: &ProtocolParams) -> Result<[f64; 4]> {
    let labels = component_labels(p)?;
    Ok(labels.map(|l| homodyne_amplitude(p.x, p.theta, l.homodyne_port).arg()))
}

/// Probability that the B output port registers vacuum, marginalised over
/// the (ideal) homodyne outcome.
pub fn success_probability(p: &ProtocolParams) -> Result<f64> {
    p.validate()?;
    let labels = component_labels(p)?;
    Ok(labels
        .iter()
        .map(|l| 0.25 * (-l.vacuum_port.norm_sqr()).exp())
        .sum())
}
