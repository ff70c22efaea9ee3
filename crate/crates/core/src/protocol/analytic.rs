use nalgebra::DMatrix;

use super::{component_labels, outcome_phases, ProtocolParams, AC_BASIS};
use crate::error::{Error, Result};
use crate::fock::{homodyne_amplitude, ln_factorial, poisson_tail};
use crate::{Complex, DensityMatrix};

/// One environment photon-number branch `|n>_{εB} |m>_{εD}` of the
/// post-measurement state, carrying the conditional AC vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub n: usize,
    pub m: usize,
    /// Real environment amplitude of this `(n, m)` pair.
    pub weight: f64,
    /// AC amplitudes on `|00>, |01>, |10>, |11>`.
    pub vector: [Complex; 4],
}

impl Branch {
    pub fn probability(&self) -> f64 {
        self.weight * self.weight * self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Finite `(n, m)` expansion of the post-measurement AC ⊗ environment state,
/// normalised so the branch probabilities sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecomposition {
    /// Sorted by `(n, m)`.
    pub branches: Vec<Branch>,
    /// Factor that was applied to reach unit total weight.
    pub norm_constant: f64,
    /// Environment Poisson weight left outside the rectangle.
    pub discarded_weight: f64,
}

impl BranchDecomposition {
    pub fn get(&self, n: usize, m: usize) -> Option<&Branch> {
        self.branches
            .binary_search_by(|b| (b.n, b.m).cmp(&(n, m)))
            .ok()
            .map(|i| &self.branches[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(Branch::probability).sum()
    }

    fn normalize(mut self) -> Result<Self> {
        let total = self.total_weight();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::ImpossibleOutcome(total));
        }
        let k = 1.0 / total.sqrt();
        for b in &mut self.branches {
            b.weight *= k;
        }
        self.norm_constant = k;
        Ok(self)
    }
}

/// Smallest `n` with Poisson(`mean`) mass above `n` below `eps`.
fn poisson_cutoff(mean: f64, eps: f64) -> usize {
    let mut n = 0;
    while poisson_tail(mean, n) >= eps {
        n += 1;
    }
    n
}

/// Amplitude `e^{-a²/2} a^n / √n!` of the `n`-photon term of `|a>`, real `a`.
fn fock_term(a: f64, n: usize) -> f64 {
    if a == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let mag = (-0.5 * a * a + n as f64 * a.abs().ln() - 0.5 * ln_factorial(n)).exp();
    if a < 0.0 && n % 2 == 1 {
        -mag
    } else {
        mag
    }
}

fn rectangle(p: &ProtocolParams, mean_b: f64, mean_d: f64) -> (usize, usize) {
    match p.n_trunc_branches {
        Some(n) => (n, n),
        None => (
            poisson_cutoff(mean_b, 0.5 * p.epsilon_branch),
            poisson_cutoff(mean_d, 0.5 * p.epsilon_branch),
        ),
    }
}

/// Post-measurement state as an environment-branch expansion.
///
/// Every AC component `|ac>` carries the coherent labels of its detector
/// ports; the vacuum projection contributes `e^{-|β_B|²/2}` and the homodyne
/// projection `<x_θ|β_D>`. The environments hold `(-1)^a |α√(1-T_B)>` and
/// `(-1)^c |α√(1-T_D)>`, expanded in photon number, which yields the
/// `(-1)^n`, `(-1)^m` branch signs.
pub fn analytic_branches(p: &ProtocolParams) -> Result<BranchDecomposition> {
    p.validate()?;
    let labels = component_labels(p)?;
    let phases = if p.phase_corrected {
        outcome_phases(p)?
    } else {
        [0.0; 4]
    };
    let base: Vec<Complex> = labels
        .iter()
        .zip(&phases)
        .map(|(l, &ph)| {
            let vac = (-0.5 * l.vacuum_port.norm_sqr()).exp();
            homodyne_amplitude(p.x, p.theta, l.homodyne_port) * vac * Complex::from_polar(1.0, -ph)
        })
        .collect();
    // labels[0] has a = c = 0, so its environment amplitudes are the positive ones
    let env_b = labels[0].env_b;
    let env_d = labels[0].env_d;
    let (n_max, m_max) = rectangle(p, env_b * env_b, env_d * env_d);
    let mut branches = Vec::with_capacity((n_max + 1) * (m_max + 1));
    for n in 0..=n_max {
        let wb = fock_term(env_b, n);
        for m in 0..=m_max {
            let weight = wb * fock_term(env_d, m);
            let mut vector = [Complex::default(); 4];
            for (i, &(a, c)) in AC_BASIS.iter().enumerate() {
                let sign = if (a * n + c * m) % 2 == 0 { 1.0 } else { -1.0 };
                vector[i] = base[i] * sign;
            }
            branches.push(Branch {
                n,
                m,
                weight,
                vector,
            });
        }
    }
    let discarded = 1.0
        - (1.0 - poisson_tail(env_b * env_b, n_max)) * (1.0 - poisson_tail(env_d * env_d, m_max));
    BranchDecomposition {
        branches,
        norm_constant: 1.0,
        discarded_weight: discarded,
    }
    .normalize()
}

/// Equal-loss branch expansion written directly in its `T±`-free form:
/// weights `(α√(1-T))^{n+m}/√(n!m!)`, AC vector
/// `e^{-2iα x√T}|00> + (-1)^{n+m} e^{2iα x√T}|11> + e^{-Tα²}((-1)^m|01> + (-1)^n|10>)`.
///
/// Valid for the default homodyne angle `θ = π/2`.
pub fn equal_loss_branches(p: &ProtocolParams) -> Result<BranchDecomposition> {
    p.validate()?;
    let (a, t) = (p.alpha, p.transmission);
    let mean = a * a * (1.0 - t);
    let (n_max, m_max) = rectangle(p, mean, mean);
    let phase = 2.0 * a * p.x * t.sqrt();
    let (p00, p11) = if p.phase_corrected {
        (Complex::new(1.0, 0.0), Complex::new(1.0, 0.0))
    } else {
        (
            Complex::from_polar(1.0, -phase),
            Complex::from_polar(1.0, phase),
        )
    };
    let damp = (-t * a * a).exp();
    let env = a * (1.0 - t).sqrt();
    let prefactor = ((t - 1.0) * a * a).exp();
    let sgn = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut branches = Vec::new();
    for n in 0..=n_max {
        for m in 0..=m_max {
            let weight = if env == 0.0 {
                if n + m == 0 {
                    prefactor
                } else {
                    0.0
                }
            } else {
                prefactor
                    * ((n + m) as f64 * env.ln() - 0.5 * (ln_factorial(n) + ln_factorial(m))).exp()
            };
            let vector = [
                p00,
                Complex::new(damp * sgn(m), 0.0),
                Complex::new(damp * sgn(n), 0.0),
                p11 * sgn(n + m),
            ];
            branches.push(Branch {
                n,
                m,
                weight,
                vector,
            });
        }
    }
    let discarded = 1.0 - (1.0 - poisson_tail(mean, n_max)) * (1.0 - poisson_tail(mean, m_max));
    BranchDecomposition {
        branches,
        norm_constant: 1.0,
        discarded_weight: discarded,
    }
    .normalize()
}

/// Traces out the environments: `ρ_AC = Σ w² |v><v|`, renormalised.
pub fn branches_to_density(d: &BranchDecomposition) -> Result<DensityMatrix> {
    let mut m = DMatrix::<Complex>::zeros(4, 4);
    for b in &d.branches {
        let w2 = b.weight * b.weight;
        if w2 == 0.0 {
            continue;
        }
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += b.vector[i] * b.vector[j].conj() * w2;
            }
        }
    }
    DensityMatrix::from_matrix(m)?.normalized()
}

/// Exact shared state `ρ_AC` for `p` (analytic route).
pub fn protocol_density(p: &ProtocolParams) -> Result<DensityMatrix> {
    branches_to_density(&analytic_branches(p)?)
}

/// Whether `T α²` is large enough for [`ideal_limit_density`] to be a fair
/// approximation.
pub fn ideal_limit_regime(p: &ProtocolParams) -> bool {
    p.transmission * p.alpha * p.alpha >= 3.0
}

/// Large-amplitude (`T α² ≫ 1`) equal-loss state with the `|01>`, `|10>`
/// components dropped:
/// `½ e^{-2w} Σ w^{n+m}/(n!m!) [|00><00| + |11><11| + (-1)^{n+m}(e^{4iαx√T}|11><00| + h.c.)]`
/// with `w = (1-T)α²`. The mismatch `delta` is ignored.
pub fn ideal_limit_density(p: &ProtocolParams) -> Result<DensityMatrix> {
    let mut eq = *p;
    eq.delta = 0.0;
    eq.validate()?;
    let w = (1.0 - eq.transmission) * eq.alpha * eq.alpha;
    let n_max = rectangle(&eq, w, w).0;
    let mut diag = 0.0;
    let mut coherence = 0.0;
    for n in 0..=n_max {
        for m in 0..=n_max {
            let term = if w == 0.0 {
                if n + m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-2.0 * w + (n + m) as f64 * w.ln() - ln_factorial(n) - ln_factorial(m)).exp()
            };
            diag += 0.5 * term;
            coherence += if (n + m) % 2 == 0 {
                0.5 * term
            } else {
                -0.5 * term
            };
        }
    }
    let phase = if eq.phase_corrected {
        Complex::new(1.0, 0.0)
    } else {
        Complex::from_polar(1.0, 4.0 * eq.alpha * eq.x * eq.transmission.sqrt())
    };
    let mut m = DMatrix::<Complex>::zeros(4, 4);
    m[(0, 0)] = Complex::new(diag, 0.0);
    m[(3, 3)] = Complex::new(diag, 0.0);
    m[(3, 0)] = phase * coherence;
    m[(0, 3)] = (phase * coherence).conj();
    DensityMatrix::from_matrix(m)?.normalized()
}
