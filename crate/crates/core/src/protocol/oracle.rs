//! Brute-force simulation of the swapping circuit on truncated Fock spaces.
//!
//! Nothing here uses the closed-form coherent labels: states are built from
//! photon-number amplitudes, pushed through beam-splitter matrices, projected
//! with Fock-basis bras and partially traced.

use nalgebra::DMatrix;

use super::{outcome_phases, ProtocolParams};
use crate::error::{invalid, Error, Result};
use crate::fock::{
    coherent_fock_vector_strict, default_truncation, homodyne_fock_bra, vacuum_bra, BeamSplitter,
    MultiModeState, DEFAULT_TAIL_EPS,
};
use crate::{Complex, DensityMatrix};

/// Truncation controls of the circuit simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Photon cutoff of every bosonic mode; `None` derives it from `alpha`.
    pub n_trunc: Option<usize>,
    /// Largest tolerated coherent tail probability.
    pub tail_eps: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_trunc: None,
            tail_eps: DEFAULT_TAIL_EPS,
        }
    }
}

/// `(|0>_A |α>_B + |1>_A |-α>_B) / √2`, mode A two-dimensional.
pub fn build_hybrid_state(alpha: f64, n_trunc: usize) -> Result<MultiModeState> {
    build_hybrid_state_eps(alpha, n_trunc, DEFAULT_TAIL_EPS)
}

fn build_hybrid_state_eps(alpha: f64, n_trunc: usize, eps: f64) -> Result<MultiModeState> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!("alpha = {alpha} must be finite and >= 0")));
    }
    let plus = coherent_fock_vector_strict(Complex::new(alpha, 0.0), n_trunc, eps)?;
    let minus = coherent_fock_vector_strict(Complex::new(-alpha, 0.0), n_trunc, eps)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = plus
        .amplitudes()
        .iter()
        .chain(minus.amplitudes())
        .map(|a| a * s)
        .collect();
    MultiModeState::new(vec![2, n_trunc + 1], amplitudes)
}

/// Couples `mode` to a fresh vacuum environment (appended as the last mode)
/// through a beam splitter of transmission `t`.
pub fn apply_loss(state: &MultiModeState, mode: usize, t: f64) -> Result<MultiModeState> {
    let dim = *state
        .dims()
        .get(mode)
        .ok_or_else(|| invalid(format!("mode {mode} out of range")))?;
    let bs = BeamSplitter::new(t, dim, dim)?;
    let with_env = state.with_vacuum_mode(dim)?;
    let env = with_env.n_modes() - 1;
    with_env.apply_beam_splitter(&bs, mode, env)
}

impl BeamSplitter {
    /// `K[j][k] = (<φ_a| ⊗ <φ_b|) U |j, k>` for bras given as Fock coefficients.
    pub fn projected_kernel(&self, bra_a: &[Complex], bra_b: &[Complex]) -> DMatrix<Complex> {
        let (da, db) = self.input_dims();
        DMatrix::from_fn(da, db, |j, k| {
            let total = j + k;
            self.column(j, k)
                .iter()
                .enumerate()
                .filter_map(|(p, &u)| {
                    let q = total - p;
                    match (bra_a.get(p), bra_b.get(q)) {
                        (Some(a), Some(b)) => Some(a * b * u),
                        _ => None,
                    }
                })
                .sum()
        })
    }
}

/// Per-channel states after loss and the 50:50 mixer, reusable across
/// homodyne outcomes.
struct Circuit {
    /// Modes (A, B, εB) and (C, D, εD).
    ab: MultiModeState,
    cd: MultiModeState,
    mixer: BeamSplitter,
    dim: usize,
}

impl Circuit {
    fn new(p: &ProtocolParams, cfg: &OracleConfig) -> Result<Self> {
        p.validate()?;
        let n = cfg.n_trunc.unwrap_or_else(|| default_truncation(p.alpha));
        let (tb, td) = p.channels();
        let ab = apply_loss(&build_hybrid_state_eps(p.alpha, n, cfg.tail_eps)?, 1, tb)?;
        let cd = apply_loss(&build_hybrid_state_eps(p.alpha, n, cfg.tail_eps)?, 1, td)?;
        Ok(Self {
            ab,
            cd,
            mixer: BeamSplitter::new(0.5, n + 1, n + 1)?,
            dim: n + 1,
        })
    }

    /// Unnormalised post-measurement state on (A, εB, C, εD).
    fn project(&self, x: f64, theta: f64) -> Result<MultiModeState> {
        let d = self.dim;
        let kernel = self.mixer.projected_kernel(
            &vacuum_bra(2 * d - 1),
            &homodyne_fock_bra(x, theta, 2 * d - 2),
        );
        let block = |s: &MultiModeState, q: usize| {
            DMatrix::from_row_slice(d, d, &s.amplitudes()[q * d * d..(q + 1) * d * d])
        };
        let mut out = vec![Complex::default(); 4 * d * d];
        for a in 0..2 {
            let left = block(&self.ab, a).transpose();
            let lk = left * &kernel;
            for c in 0..2 {
                // ψ[a, n, c, m] = Σ_jk ab[a, j, n] K[j, k] cd[c, k, m]
                let r = &lk * block(&self.cd, c);
                for nn in 0..d {
                    for mm in 0..d {
                        out[((a * d + nn) * 2 + c) * d + mm] = r[(nn, mm)];
                    }
                }
            }
        }
        MultiModeState::new(vec![2, d, 2, d], out)
    }
}

/// Unnormalised `ρ_AC` for outcome `x`: its trace is the joint probability
/// density of seeing vacuum on B and `x` on D. No phase correction applied.
pub fn oracle_outcome_density(p: &ProtocolParams, cfg: &OracleConfig) -> Result<DensityMatrix> {
    Circuit::new(p, cfg)?
        .project(p.x, p.theta)?
        .partial_trace(&[1, 3])
}

/// Shared state `ρ_AC` from the full circuit simulation.
pub fn oracle_density(p: &ProtocolParams) -> Result<DensityMatrix> {
    oracle_density_with(p, &OracleConfig::default())
}

pub fn oracle_density_with(p: &ProtocolParams, cfg: &OracleConfig) -> Result<DensityMatrix> {
    let raw = oracle_outcome_density(p, cfg)?;
    let rho = raw.normalized()?;
    if p.phase_corrected {
        let ph = outcome_phases(p)?;
        Ok(rho.rephased(&ph.map(|v| -v)))
    } else {
        Ok(rho)
    }
}

/// Vacuum-projection success probability by integrating the outcome density
/// over `x` with a `nodes`-point Gauss–Legendre rule.
pub fn oracle_success_probability(
    p: &ProtocolParams,
    cfg: &OracleConfig,
    nodes: usize,
) -> Result<f64> {
    let circuit = Circuit::new(p, cfg)?;
    let rule = gauss_quad::GaussLegendre::new(nodes)
        .map_err(|_| invalid(format!("quadrature needs >= 2 nodes, got {nodes}")))?;
    let half_width = 12.0 + 3.0 * p.alpha;
    let mut total = 0.0;
    for &(node, weight) in rule.as_node_weight_pairs() {
        let x = node * half_width;
        let density = circuit.project(x, p.theta)?.norm_sqr();
        if !density.is_finite() {
            return Err(Error::NonFinite(format!("outcome density at x = {x}")));
        }
        total += weight * half_width * density;
    }
    Ok(total)
}
