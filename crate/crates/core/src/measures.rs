//! Figures of merit for the shared two-qubit state.

use serde::{Deserialize, Serialize};

use crate::density::HERMITIAN_TOL;
use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::{Complex, DensityMatrix};

/// Partial-transpose eigenvalues below this count as negative.
pub const NEGATIVE_EIGEN_CUTOFF: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub negativity: f64,
    pub fidelity: f64,
    pub linear_entropy: f64,
    pub success_prob: f64,
}

impl MeasureSet {
    /// Evaluates every measure of `rho` against `|Phi+>`.
    pub fn of(rho: &DensityMatrix, success_prob: f64) -> Result<Self> {
        Ok(Self {
            negativity: negativity(rho)?,
            fidelity: fidelity(rho, &phi_plus())?,
            linear_entropy: linear_entropy(rho),
            success_prob,
        })
    }

    /// Whether each field lies in its closed range, up to `tol`.
    pub fn in_range(&self, dim: usize, tol: f64) -> bool {
        let within = |v: f64, hi: f64| v >= -tol && v <= hi + tol;
        within(self.negativity, 1.0)
            && within(self.fidelity, 1.0)
            && within(self.linear_entropy, 1.0 - 1.0 / dim as f64)
            && within(self.success_prob, 1.0)
    }
}

/// `(|00> + |11>) / sqrt 2`
pub fn phi_plus() -> [Complex; 4] {
    let s = Complex::new(0.5f64.sqrt(), 0.0);
    let z = Complex::new(0.0, 0.0);
    [s, z, z, s]
}

/// Pure-target fidelity `<sigma| rho |sigma>`.
pub fn fidelity(rho: &DensityMatrix, target: &[Complex]) -> Result<f64> {
    rho.expectation(target)
}

/// `-2 * sum` of the negative eigenvalues of the partial transpose of a
/// two-qubit state.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "negativity needs a 2x2-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let dev = rho.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let pt = rho.partial_transpose(1, (2, 2))?;
    let neg: f64 = pt
        .eigenvalues()
        .into_iter()
        .filter(|&l| l < NEGATIVE_EIGEN_CUTOFF)
        .sum();
    Ok(-2.0 * neg)
}

/// `1 - Tr[rho^2]`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// Balanced-homodyne intensity difference `2 beta <x_theta>` for a signal
/// in state `input`.
pub fn intensity_difference_expectation(input: &FockVector, beta: f64, theta: f64) -> Result<f64> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(crate::error::invalid(format!(
            "local-oscillator amplitude {beta} must be >= 0"
        )));
    }
    Ok(2.0 * beta * input.quadrature_expectation(theta))
}

/// Closed form of [`intensity_difference_expectation`] for a coherent
/// signal: `2 beta |alpha| cos(phi - theta)`.
pub fn intensity_difference_coherent(alpha: Complex, beta: f64, theta: f64) -> f64 {
    2.0 * beta * alpha.norm() * (alpha.arg() - theta).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn bell_states() -> Vec<[Complex; 4]> {
        let s = 0.5f64.sqrt();
        let z = c(0.0);
        vec![
            [c(s), z, z, c(s)],
            [c(s), z, z, c(-s)],
            [z, c(s), c(s), z],
            [z, c(s), c(-s), z],
        ]
    }

    #[test]
    fn bell_fidelity_and_mixed_fidelity() {
        let rho = DensityMatrix::from_pure(&phi_plus());
        assert_abs_diff_eq!(fidelity(&rho, &phi_plus()).unwrap(), 1.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_abs_diff_eq!(
            fidelity(&mixed, &phi_plus()).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert!(fidelity(&mixed, &[c(1.0), c(0.0)]).is_err());
    }

    #[test]
    fn bell_states_are_maximally_entangled() {
        for b in bell_states() {
            let rho = DensityMatrix::from_pure(&b);
            assert_abs_diff_eq!(negativity(&rho).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(linear_entropy(&rho), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn separable_fixtures_have_zero_negativity() {
        let a = DensityMatrix::from_pure(&[c(0.6), Complex::new(0.0, 0.8)]);
        let b = DensityMatrix::from_pure(&[c(0.8), c(0.6)]);
        assert_eq!(negativity(&a.kron(&b)).unwrap(), 0.0);
        // classical mixture of |00> and |11>
        let mut mix = DensityMatrix::from_pure(&[c(1.0), c(0.0), c(0.0), c(0.0)]).scaled(0.5);
        mix.accumulate(
            &DensityMatrix::from_pure(&[c(0.0), c(0.0), c(0.0), c(1.0)]),
            0.5,
        )
        .unwrap();
        assert_eq!(negativity(&mix).unwrap(), 0.0);
        assert_eq!(negativity(&DensityMatrix::maximally_mixed(4)).unwrap(), 0.0);
    }

    #[test]
    fn linear_entropy_examples() {
        let half = DensityMatrix::from_rows(
            4,
            &[
                c(0.5),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.5),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(linear_entropy(&half), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            linear_entropy(&DensityMatrix::maximally_mixed(4)),
            0.75,
            epsilon = 1e-15
        );
    }

    #[test]
    fn negativity_rejects_bad_input() {
        let m = DMatrix::from_row_slice(4, 4, &[c(0.25); 16]);
        let mut m2 = m.clone();
        m2[(0, 1)] = c(0.3);
        let rho = DensityMatrix::from_matrix_unchecked(m2);
        assert!(matches!(negativity(&rho), Err(Error::NotHermitian(_))));
        assert!(negativity(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn intensity_difference_examples() {
        let vac = FockVector::vacuum(5);
        assert_eq!(
            intensity_difference_expectation(&vac, 3.0, 0.2).unwrap(),
            0.0
        );
        let phi = 0.4;
        let v = crate::fock::coherent_fock_vector(Complex::from_polar(1.0, phi), 40);
        let val = intensity_difference_expectation(&v, 10.0, phi).unwrap();
        assert_abs_diff_eq!(val, 20.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            val,
            intensity_difference_coherent(Complex::from_polar(1.0, phi), 10.0, phi),
            epsilon = 1e-10
        );
        let ortho =
            intensity_difference_expectation(&v, 10.0, phi + std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(ortho, 0.0, epsilon = 1e-10);
        assert!(intensity_difference_expectation(&v, -1.0, 0.0).is_err());
    }

    fn random_unitary(params: &[f64]) -> DMatrix<Complex> {
        // QR of a random complex matrix gives a unitary Q
        let m = DMatrix::from_fn(4, 4, |i, j| {
            Complex::new(params[i * 4 + j], params[16 + i * 4 + j])
        });
        m.qr().q()
    }

    proptest! {
        #[test]
        fn pure_fidelity_is_one_and_bounded(
            re in proptest::collection::vec(-1.0f64..1.0, 4),
            im in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let psi: Vec<Complex> = re.iter().zip(&im).map(|(&a, &b)| Complex::new(a, b)).collect();
            let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let psi: Vec<Complex> = psi.iter().map(|z| z / n).collect();
            let rho = DensityMatrix::from_pure(&psi);
            prop_assert!((fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);
            let f = fidelity(&rho, &phi_plus()).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }

        #[test]
        fn linear_entropy_unitarily_invariant(
            u in proptest::collection::vec(-1.0f64..1.0, 32),
            w in proptest::collection::vec(0.0f64..1.0, 4),
        ) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 1e-3);
            let diag = DMatrix::from_fn(4, 4, |i, j| if i == j { c(w[i] / total) } else { c(0.0) });
            let rho = DensityMatrix::from_matrix(diag).unwrap();
            let q = random_unitary(&u);
            let rotated = rho.conjugated(&q).unwrap();
            prop_assert!((linear_entropy(&rotated) - linear_entropy(&rho)).abs() < 1e-12);
        }
    }
}
