use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::fock::{increment, strides};
use crate::Complex;

/// Hermiticity tolerance used when validating density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Square complex matrix used for (possibly unnormalised) mixed states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex>,
}

impl DensityMatrix {
    /// Wraps a square matrix, rejecting non-Hermitian input.
    pub fn from_matrix(m: DMatrix<Complex>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density-matrix entry".into()));
        }
        let rho = Self { m };
        let dev = rho.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<Complex>) -> Self {
        Self { m }
    }

    pub fn from_rows(dim: usize, entries: &[Complex]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// `|psi><psi|` (not renormalised).
    pub fn from_pure(psi: &[Complex]) -> Self {
        let n = psi.len();
        Self {
            m: DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            m: DMatrix::from_diagonal_element(dim, dim, Complex::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let a = &self.m - self.m.adjoint();
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::ImpossibleOutcome(t));
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            m: &self.m * Complex::new(factor, 0.0),
        }
    }

    /// `self += factor * other`.
    pub fn accumulate(&mut self, other: &DensityMatrix, factor: f64) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        self.m += &other.m * Complex::new(factor, 0.0);
        Ok(())
    }

    pub fn kron(&self, other: &DensityMatrix) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    /// Conjugation `U rho U^dag`.
    pub fn conjugated(&self, u: &DMatrix<Complex>) -> Result<Self> {
        if u.nrows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch("unitary shape".into()));
        }
        Ok(Self {
            m: u * &self.m * u.adjoint(),
        })
    }

    /// Conjugation by a diagonal phase unitary `diag(e^{i phases})`.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        let n = self.dim();
        Self {
            m: DMatrix::from_fn(n, n, |i, j| {
                self.m[(i, j)] * Complex::from_polar(1.0, phases[i] - phases[j])
            }),
        }
    }

    /// Real eigenvalues in ascending order. The matrix is symmetrised first
    /// so round-off asymmetry cannot leak into the spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * Complex::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        // Tr[A B] = sum_ij A_ij B_ji; for Hermitian A this is sum |A_ij|^2
        (&self.m * &self.m).trace().re
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &[Complex]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} against {}x{} matrix",
                psi.len(),
                self.dim(),
                self.dim()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok((v.adjoint() * &self.m * &v)[(0, 0)].re)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.m - &other.m)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `1/2 ||self - other||_1`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = Self {
            m: &self.m - &other.m,
        };
        Ok(0.5 * diff.eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    fn check_dims(&self, dims: &[usize]) -> Result<()> {
        let prod: usize = dims.iter().product();
        if prod != self.dim() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dims {dims:?} do not factor dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Traces out the listed subsystems of a matrix on `dims[0] ⊗ dims[1] ⊗ ...`.
    pub fn partial_trace(&self, dims: &[usize], modes_to_trace: &[usize]) -> Result<DensityMatrix> {
        self.check_dims(dims)?;
        if modes_to_trace.iter().any(|&m| m >= dims.len()) {
            return Err(invalid(format!(
                "trace modes {modes_to_trace:?} out of range"
            )));
        }
        let kept: Vec<usize> = (0..dims.len())
            .filter(|m| !modes_to_trace.contains(m))
            .collect();
        if kept.is_empty() {
            return Err(invalid("partial trace would leave no subsystems"));
        }
        let traced: Vec<usize> = (0..dims.len())
            .filter(|m| modes_to_trace.contains(m))
            .collect();
        let st = strides(dims);
        let kdims: Vec<usize> = kept.iter().map(|&m| dims[m]).collect();
        let tdims: Vec<usize> = traced.iter().map(|&m| dims[m]).collect();
        let kn: usize = kdims.iter().product();
        let tn: usize = tdims.iter().product();
        let offsets = |modes: &[usize], mdims: &[usize], count: usize| -> Vec<usize> {
            let mut idx = vec![0usize; modes.len()];
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(idx.iter().zip(modes).map(|(&i, &m)| i * st[m]).sum());
                increment(&mut idx, mdims);
            }
            out
        };
        let koff = offsets(&kept, &kdims, kn);
        let toff = offsets(&traced, &tdims, tn);
        let m = DMatrix::from_fn(kn, kn, |i, j| {
            toff.iter()
                .map(|&t| self.m[(koff[i] + t, koff[j] + t)])
                .sum::<Complex>()
        });
        Ok(Self { m })
    }

    /// Partial transpose of `subsystem` (0 or 1) on `d1 ⊗ d2`.
    pub fn partial_transpose(
        &self,
        subsystem: usize,
        dims: (usize, usize),
    ) -> Result<DensityMatrix> {
        let (d1, d2) = dims;
        self.check_dims(&[d1, d2])?;
        if subsystem > 1 {
            return Err(invalid(format!(
                "subsystem index {subsystem} for a bipartition"
            )));
        }
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |r, c| {
            let (i, j) = (r / d2, r % d2);
            let (k, l) = (c / d2, c % d2);
            if subsystem == 0 {
                self.m[(k * d2 + j, i * d2 + l)]
            } else {
                self.m[(i * d2 + l, k * d2 + j)]
            }
        });
        Ok(Self { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn phi_plus() -> Vec<Complex> {
        let s = 0.5f64.sqrt();
        vec![c(s), c(0.0), c(0.0), c(s)]
    }

    fn random_hermitian(seed: &[f64]) -> DensityMatrix {
        let n = 4;
        let mut m = DMatrix::<Complex>::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let z = if i == j {
                    c(seed[k])
                } else {
                    Complex::new(seed[k], seed[k + 1])
                };
                k += 2;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        DensityMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn bell_partial_trace_is_maximally_mixed() {
        let rho = DensityMatrix::from_pure(&phi_plus());
        let r = rho.partial_trace(&[2, 2], &[1]).unwrap();
        assert!(r.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn product_partial_trace_recovers_factor() {
        let a = DensityMatrix::from_pure(&[c(0.6), Complex::new(0.0, 0.8)]);
        let b = DensityMatrix::from_pure(&[c(0.28), c(0.96), c(0.0)]);
        let ab = a.kron(&b);
        assert!(ab.partial_trace(&[2, 3], &[1]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(ab.partial_trace(&[2, 3], &[0]).unwrap().max_abs_diff(&b) < 1e-15);
        assert!(ab.partial_trace(&[2, 3], &[0, 1]).is_err());
        assert!(ab.partial_trace(&[2, 2], &[0]).is_err());
    }

    #[test]
    fn pure_state_partial_trace_agrees_with_matrix_route() {
        let amps: Vec<Complex> = (0..12)
            .map(|i| Complex::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let s = crate::MultiModeState::new(vec![2, 3, 2], amps.clone()).unwrap();
        let via_state = s.partial_trace(&[1]).unwrap();
        let via_matrix = DensityMatrix::from_pure(&amps)
            .partial_trace(&[2, 3, 2], &[1])
            .unwrap();
        assert!(via_state.max_abs_diff(&via_matrix) < 1e-13);
        assert_abs_diff_eq!(via_state.trace(), s.norm_sqr(), epsilon = 1e-13);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rho = DensityMatrix::from_pure(&phi_plus());
        let pt = rho.partial_transpose(1, (2, 2)).unwrap();
        assert_abs_diff_eq!(pt.min_eigenvalue(), -0.5, epsilon = 1e-14);
        assert!(rho.partial_transpose(0, (2, 3)).is_err());
    }

    #[test]
    fn product_states_stay_ppt() {
        let a = DensityMatrix::from_pure(&[c(0.6), Complex::new(0.0, 0.8)]);
        let b = DensityMatrix::from_pure(&[Complex::new(0.3, 0.4), c(0.866_025_403_784_438_6)]);
        let pt = a.kron(&b).partial_transpose(0, (2, 2)).unwrap();
        assert!(pt.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(matches!(
            DensityMatrix::from_matrix(m),
            Err(Error::NotHermitian(_))
        ));
    }

    proptest! {
        #[test]
        fn partial_transpose_is_trace_preserving_involution(
            seed in proptest::collection::vec(-1.0f64..1.0, 20),
            sub in 0usize..2,
        ) {
            let h = random_hermitian(&seed);
            let pt = h.partial_transpose(sub, (2, 2)).unwrap();
            prop_assert!(pt.hermiticity_deviation() < 1e-15);
            prop_assert!((pt.trace() - h.trace()).abs() < 1e-14);
            let back = pt.partial_transpose(sub, (2, 2)).unwrap();
            prop_assert!(back.max_abs_diff(&h) < 1e-14);
        }

        #[test]
        fn partial_trace_preserves_trace_and_positivity(
            re in proptest::collection::vec(-1.0f64..1.0, 8),
            im in proptest::collection::vec(-1.0f64..1.0, 8),
            w in 0.0f64..1.0,
        ) {
            // mixture of two pure states on 2 ⊗ 2
            let a: Vec<Complex> = (0..4).map(|i| Complex::new(re[i], im[i])).collect();
            let b: Vec<Complex> = (4..8).map(|i| Complex::new(re[i], im[i])).collect();
            let mut rho = DensityMatrix::from_pure(&a).scaled(w);
            rho.accumulate(&DensityMatrix::from_pure(&b), 1.0 - w).unwrap();
            for keep_out in 0..2 {
                let r = rho.partial_trace(&[2, 2], &[keep_out]).unwrap();
                prop_assert!((r.trace() - rho.trace()).abs() < 1e-12);
                prop_assert!(r.min_eigenvalue() >= -1e-10);
            }
        }
    }
}
