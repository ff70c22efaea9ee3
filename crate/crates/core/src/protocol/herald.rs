//! Heralded preparation of the hybrid pair from a stationary two-level
//! system `{|G>, |W>}` and a down-conversion photon-addition stage.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{
    coherent_fock_vector_strict, default_truncation, MultiModeState, DEFAULT_TAIL_EPS,
};
use crate::Complex;

/// Largest photon number the herald mode `p` can hold.
pub const HERALD_MAX_PHOTONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldParams {
    /// Probability that the stationary system emits into mode `p`.
    pub p_c: f64,
    /// Down-conversion efficiency.
    pub eta: f64,
    /// Injected coherent amplitude.
    pub alpha: f64,
    /// Photon count registered in mode `p`.
    pub herald_outcome: usize,
}

impl HeraldParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_c", self.p_c), ("eta", self.eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        if !self.alpha.is_finite() {
            return Err(invalid("alpha must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    /// Normalised conditional state on modes (A, B); A is `|G>`, `|W>`.
    pub state: MultiModeState,
    pub probability: f64,
}

/// Builds
/// `√(1-η)√(1-p_c)|G,0>|α> + √η√(1-p_c)|G,1>ã|α> + √(1-η)√p_c|W,1>|α> + √η√p_c|W,2>ã|α>`,
/// where `ã|α>` is the normalised photon-added coherent state, then projects
/// mode `p` on `herald_outcome` photons.
pub fn herald_hybrid_state(h: &HeraldParams) -> Result<HeraldOutcome> {
    h.validate()?;
    let n = default_truncation(h.alpha);
    let coh = coherent_fock_vector_strict(Complex::new(h.alpha, 0.0), n, DEFAULT_TAIL_EPS)?;
    let added = coh.create();
    let added_norm = added.norm_sqr().sqrt();
    let dim_b = added.dim();
    let pad = |amps: &[Complex], scale: f64| {
        let mut v = vec![Complex::default(); dim_b];
        for (dst, a) in v.iter_mut().zip(amps) {
            *dst = a * scale;
        }
        v
    };
    let plain = pad(coh.amplitudes(), 1.0);
    let photon_added = pad(added.amplitudes(), 1.0 / added_norm);

    let terms = [
        (
            0usize,
            0usize,
            ((1.0 - h.eta) * (1.0 - h.p_c)).sqrt(),
            &plain,
        ),
        (0, 1, (h.eta * (1.0 - h.p_c)).sqrt(), &photon_added),
        (1, 1, ((1.0 - h.eta) * h.p_c).sqrt(), &plain),
        (1, 2, (h.eta * h.p_c).sqrt(), &photon_added),
    ];
    // modes A (2), p (3), B
    let dim_p = HERALD_MAX_PHOTONS + 1;
    let mut amps = vec![Complex::default(); 2 * dim_p * dim_b];
    for &(a, photons, coeff, b_state) in &terms {
        let base = (a * dim_p + photons) * dim_b;
        for (k, z) in b_state.iter().enumerate() {
            amps[base + k] += z * coeff;
        }
    }
    let total = MultiModeState::new(vec![2, dim_p, dim_b], amps)?;
    let total_norm = total.norm_sqr();

    let mut bra = vec![Complex::default(); dim_p];
    if let Some(slot) = bra.get_mut(h.herald_outcome) {
        *slot = Complex::new(1.0, 0.0);
    }
    let conditional = total.project_mode(1, &bra)?;
    let probability = conditional.norm_sqr() / total_norm;
    if probability < 1e-15 {
        return Err(Error::ImpossibleOutcome(probability));
    }
    Ok(HeraldOutcome {
        state: conditional.normalized()?,
        probability,
    })
}

/// `|<target|ψ>|²` against `(|G>|β> + |W>|-β>)/√2`.
pub fn herald_target_overlap(outcome: &HeraldOutcome, beta: f64) -> Result<f64> {
    let dim_b = outcome.state.dims()[1];
    let n = dim_b - 1;
    let plus = coherent_fock_vector_strict(Complex::new(beta, 0.0), n, 1e-10)?;
    let minus = coherent_fock_vector_strict(Complex::new(-beta, 0.0), n, 1e-10)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let target = MultiModeState::new(
        vec![2, dim_b],
        plus.amplitudes()
            .iter()
            .chain(minus.amplitudes())
            .map(|z| z * s)
            .collect(),
    )?;
    Ok(target.inner(&outcome.state)?.norm_sqr())
}
