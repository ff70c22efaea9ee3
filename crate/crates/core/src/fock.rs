//! Truncated Fock-space linear algebra.
//!
//! Single-mode states are stored as photon-number amplitude vectors
//! `n = 0..=n_trunc`; several modes are stored as one flat row-major array
//! ([`MultiModeState`]) whose last mode index varies fastest.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::Complex;

/// Default cap on the coherent-state tail probability discarded by truncation.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Truncation index that keeps the coherent tail of amplitude `abs_alpha`
/// well below [`DEFAULT_TAIL_EPS`].
pub fn default_truncation(abs_alpha: f64) -> usize {
    let a = abs_alpha.abs();
    (a * a + 10.0 * a + 20.0).ceil() as usize
}

/// `ln(n!)`, accumulated as a sum of logarithms so it never overflows.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Poisson mass strictly above `n`: `sum_{k>n} e^{-mean} mean^k / k!`.
pub fn poisson_tail(mean: f64, n: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let k0 = n + 1;
    let mut term = (-mean + k0 as f64 * mean.ln() - ln_factorial(k0)).exp();
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1;
        term *= mean / k as f64;
        if (k as f64) > mean && term <= sum * 1e-18 {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// Single-mode state on the truncated photon-number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex>,
    /// Probability mass the truncation discarded (zero for exactly
    /// representable states).
    pub tail_probability: f64,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("Fock vector needs at least the vacuum component"));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("Fock amplitude".into()));
        }
        Ok(Self {
            amplitudes,
            tail_probability: 0.0,
        })
    }

    pub fn vacuum(n_trunc: usize) -> Self {
        let mut amplitudes = vec![Complex::new(0.0, 0.0); n_trunc + 1];
        amplitudes[0] = Complex::new(1.0, 0.0);
        Self {
            amplitudes,
            tail_probability: 0.0,
        }
    }

    pub fn n_trunc(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> Complex {
        self.amplitudes.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>` over the common support.
    pub fn inner(&self, other: &FockVector) -> Complex {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies the creation operator, growing the basis by one level so
    /// nothing is truncated.
    pub fn create(&self) -> FockVector {
        let mut out = vec![Complex::new(0.0, 0.0); self.dim() + 1];
        for (n, a) in self.amplitudes.iter().enumerate() {
            out[n + 1] = a * ((n + 1) as f64).sqrt();
        }
        FockVector {
            amplitudes: out,
            tail_probability: self.tail_probability,
        }
    }

    /// Expectation of `(b e^{-i theta} + b^dag e^{i theta}) / 2`.
    pub fn quadrature_expectation(&self, theta: f64) -> f64 {
        // <b> = sum_n sqrt(n+1) conj(c_n) c_{n+1}
        let b: Complex = self
            .amplitudes
            .windows(2)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[1] * ((n + 1) as f64).sqrt())
            .sum();
        let norm = self.norm_sqr();
        (b * Complex::from_polar(1.0, -theta)).re / norm
    }
}

/// Coherent state `|alpha>` expanded up to `n_trunc` photons.
///
/// Amplitudes are built by the ratio recurrence `c_n = c_{n-1} alpha / sqrt(n)`
/// so large photon numbers never touch an explicit factorial.
pub fn coherent_fock_vector(alpha: Complex, n_trunc: usize) -> FockVector {
    let mean = alpha.norm_sqr();
    let mut amplitudes = Vec::with_capacity(n_trunc + 1);
    let mut c = Complex::new((-mean / 2.0).exp(), 0.0);
    amplitudes.push(c);
    for n in 1..=n_trunc {
        c = c * alpha / (n as f64).sqrt();
        amplitudes.push(c);
    }
    FockVector {
        amplitudes,
        tail_probability: poisson_tail(mean, n_trunc),
    }
}

/// As [`coherent_fock_vector`], but refuses a truncation whose discarded
/// tail exceeds `eps`.
pub fn coherent_fock_vector_strict(alpha: Complex, n_trunc: usize, eps: f64) -> Result<FockVector> {
    let v = coherent_fock_vector(alpha, n_trunc);
    if v.tail_probability > eps {
        return Err(Error::InsufficientTruncation {
            n_trunc,
            tail: v.tail_probability,
            limit: eps,
        });
    }
    Ok(v)
}

fn check_transmission(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) || !t.is_finite() {
        return Err(invalid(format!(
            "beam-splitter transmission {t} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Output coherent labels of a transmission-`t` beam splitter fed with
/// `|alpha>|beta>`: `(alpha sqrt t - beta sqrt(1-t), alpha sqrt(1-t) + beta sqrt t)`.
pub fn beam_splitter_coherent(alpha: Complex, beta: Complex, t: f64) -> Result<(Complex, Complex)> {
    check_transmission(t)?;
    let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
    Ok((alpha * st - beta * sr, alpha * sr + beta * st))
}

/// Two-mode beam splitter on a truncated Fock space.
///
/// The unitary conserves total photon number, so it is stored as one dense
/// real block per total `n`: `block(n)[j][p] = <p, n-p| U |j, n-j>`. Blocks
/// are complete (no output truncation); truncation happens only when the
/// map is applied to a state with finite output dimensions.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    t: f64,
    dim_a: usize,
    dim_b: usize,
    blocks: Vec<Vec<Vec<f64>>>,
}

impl BeamSplitter {
    pub fn new(t: f64, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_transmission(t)?;
        if dim_a == 0 || dim_b == 0 {
            return Err(invalid("beam-splitter mode dimensions must be >= 1"));
        }
        let st = t.sqrt();
        let sr = (1.0 - t).sqrt();
        let n_max = dim_a + dim_b - 2;
        let mut blocks: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_max + 1);
        blocks.push(vec![vec![1.0]]);
        // a_in^dag -> st a^dag + sr b^dag ; b_in^dag -> -sr a^dag + st b^dag
        for n in 1..=n_max {
            let prev = &blocks[n - 1];
            let mut block = Vec::with_capacity(n + 1);
            for j in 0..=n {
                let k = n - j;
                let (src, ca, cb, scale) = if j > 0 {
                    (&prev[j - 1], st, sr, 1.0 / (j as f64).sqrt())
                } else {
                    (&prev[0], -sr, st, 1.0 / (k as f64).sqrt())
                };
                let mut col = vec![0.0; n + 1];
                for (p, &v) in src.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let q = n - 1 - p;
                    col[p + 1] += ca * ((p + 1) as f64).sqrt() * v;
                    col[p] += cb * ((q + 1) as f64).sqrt() * v;
                }
                for c in &mut col {
                    *c *= scale;
                }
                block.push(col);
            }
            blocks.push(block);
        }
        Ok(Self {
            t,
            dim_a,
            dim_b,
            blocks,
        })
    }

    pub fn transmission(&self) -> f64 {
        self.t
    }

    pub fn input_dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    /// `<p, q| U |j, k>`.
    pub fn element(&self, p: usize, q: usize, j: usize, k: usize) -> f64 {
        let n = j + k;
        if p + q != n || j >= self.dim_a || k >= self.dim_b {
            return 0.0;
        }
        self.blocks[n][j][p]
    }

    /// Image of `|j, k>` as `(p, amplitude)` pairs with `q = j + k - p`.
    pub fn column(&self, j: usize, k: usize) -> &[f64] {
        &self.blocks[j + k][j]
    }

    /// Dense matrix restricted to the `dim_a x dim_b` output space,
    /// row/column index `p * dim_b + q`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim_a * self.dim_b;
        let mut m = vec![vec![0.0; d]; d];
        for j in 0..self.dim_a {
            for k in 0..self.dim_b {
                for (p, &v) in self.column(j, k).iter().enumerate() {
                    let q = j + k - p;
                    if p < self.dim_a && q < self.dim_b {
                        m[p * self.dim_b + q][j * self.dim_b + k] = v;
                    }
                }
            }
        }
        m
    }
}

/// Beam-splitter map on a `dim_a x dim_b` two-mode space.
pub fn beam_splitter_unitary(t: f64, dim_a: usize, dim_b: usize) -> Result<BeamSplitter> {
    BeamSplitter::new(t, dim_a, dim_b)
}

/// Position-representation overlap `<x_theta | alpha>` of a coherent state,
/// with Dirac-normalised quadrature eigenstates.
pub fn homodyne_amplitude(x: f64, theta: f64, alpha: Complex) -> Complex {
    let a = alpha.norm();
    let phi = if a == 0.0 { 0.0 } else { alpha.arg() };
    let rot = Complex::from_polar(1.0, phi - theta);
    let exponent = Complex::new(-0.5 * x * x - 0.5 * a * a, 0.0) + rot * (2f64.sqrt() * a * x)
        - rot * rot * (0.5 * a * a);
    exponent.exp() * PI.powf(-0.25)
}

/// Bra coefficients `<x_theta | n>` for `n = 0..=n_max`.
///
/// Uses the three-term Hermite-function recurrence, which stays bounded for
/// all `n`.
pub fn homodyne_fock_bra(x: f64, theta: f64, n_max: usize) -> Vec<Complex> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        psi.push(2f64.sqrt() * x * psi[0]);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let v = (2.0 / nf).sqrt() * x * psi[n - 1] - ((nf - 1.0) / nf).sqrt() * psi[n - 2];
        psi.push(v);
    }
    psi.into_iter()
        .enumerate()
        .map(|(n, v)| Complex::from_polar(v, -(n as f64) * theta))
        .collect()
}

/// Bra coefficients of the vacuum projector.
pub fn vacuum_bra(dim: usize) -> Vec<Complex> {
    let mut b = vec![Complex::new(0.0, 0.0); dim];
    b[0] = Complex::new(1.0, 0.0);
    b
}

/// Pure state of several modes, row-major with the last mode fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex>,
}

impl MultiModeState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(invalid("mode dimensions must be >= 1"));
        }
        let expected: usize = dims.iter().product();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for mode dimensions {:?} (expected {expected})",
                amplitudes.len(),
                dims
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn vacuum(dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        let mut amplitudes = vec![Complex::new(0.0, 0.0); len];
        if len > 0 {
            amplitudes[0] = Complex::new(1.0, 0.0);
        }
        Self::new(dims, amplitudes)
    }

    pub fn from_fock(v: &FockVector) -> Self {
        Self {
            dims: vec![v.dim()],
            amplitudes: v.amplitudes().to_vec(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: &[usize]) -> Complex {
        self.amplitudes[self.flat_index(index)]
    }

    fn flat_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&mut self, factor: Complex) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ImpossibleOutcome(n));
        }
        self.scale(Complex::new(1.0 / n.sqrt(), 0.0));
        Ok(self)
    }

    /// `<self|other>`; the mode layouts must agree.
    pub fn inner(&self, other: &MultiModeState) -> Result<Complex> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn add_scaled(&mut self, other: &MultiModeState, factor: Complex) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += b * factor;
        }
        Ok(())
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &MultiModeState) -> MultiModeState {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        MultiModeState { dims, amplitudes }
    }

    /// Reorders modes so that new mode `i` is old mode `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<MultiModeState> {
        let n = self.n_modes();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&m| m >= n || std::mem::replace(&mut seen[m], true))
        {
            return Err(invalid(format!(
                "{order:?} is not a permutation of {n} modes"
            )));
        }
        let new_dims: Vec<usize> = order.iter().map(|&m| self.dims[m]).collect();
        let old_strides = strides(&self.dims);
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len());
        let mut idx = vec![0usize; n];
        for _ in 0..self.amplitudes.len() {
            let src: usize = idx
                .iter()
                .zip(order)
                .map(|(&i, &m)| i * old_strides[m])
                .sum();
            amplitudes.push(self.amplitudes[src]);
            increment(&mut idx, &new_dims);
        }
        Ok(MultiModeState {
            dims: new_dims,
            amplitudes,
        })
    }

    /// Appends a vacuum mode of dimension `dim`.
    pub fn with_vacuum_mode(&self, dim: usize) -> Result<MultiModeState> {
        if dim == 0 {
            return Err(invalid("mode dimension must be >= 1"));
        }
        Ok(self.tensor(&MultiModeState::vacuum(vec![dim])?))
    }

    /// Applies `bs` to modes `(mode_a, mode_b)` (input order matters: the
    /// first is the beam splitter's `a` port). Output components outside the
    /// current mode dimensions are dropped.
    pub fn apply_beam_splitter(
        &self,
        bs: &BeamSplitter,
        mode_a: usize,
        mode_b: usize,
    ) -> Result<MultiModeState> {
        let n = self.n_modes();
        if mode_a >= n || mode_b >= n || mode_a == mode_b {
            return Err(invalid(format!(
                "invalid beam-splitter modes ({mode_a}, {mode_b})"
            )));
        }
        let (da, db) = (self.dims[mode_a], self.dims[mode_b]);
        let (bda, bdb) = bs.input_dims();
        if bda < da || bdb < db {
            return Err(Error::DimensionMismatch(format!(
                "beam splitter built for ({bda}, {bdb}) applied to modes of dims ({da}, {db})"
            )));
        }
        // Move the two modes to the end, act on contiguous pairs, move back.
        let mut order: Vec<usize> = (0..n).filter(|&m| m != mode_a && m != mode_b).collect();
        order.push(mode_a);
        order.push(mode_b);
        let moved = self.permuted(&order)?;
        let pair = da * db;
        let mut out = vec![Complex::new(0.0, 0.0); moved.amplitudes.len()];
        for (src, dst) in moved.amplitudes.chunks(pair).zip(out.chunks_mut(pair)) {
            for j in 0..da {
                for k in 0..db {
                    let c = src[j * db + k];
                    if c == Complex::new(0.0, 0.0) {
                        continue;
                    }
                    let total = j + k;
                    for (p, &u) in bs.column(j, k).iter().enumerate() {
                        let q = total - p;
                        if p < da && q < db {
                            dst[p * db + q] += c * u;
                        }
                    }
                }
            }
        }
        let applied = MultiModeState {
            dims: moved.dims,
            amplitudes: out,
        };
        let mut inverse = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        applied.permuted(&inverse)
    }

    /// Contracts `mode` with the bra `<phi| = sum_n bra[n] <n|`, removing the
    /// mode. The result is generally sub-normalised.
    pub fn project_mode(&self, mode: usize, bra: &[Complex]) -> Result<MultiModeState> {
        if mode >= self.n_modes() {
            return Err(invalid(format!("mode {mode} out of range")));
        }
        let d = self.dims[mode];
        let outer: usize = self.dims[..mode].iter().product();
        let inner: usize = self.dims[mode + 1..].iter().product();
        let mut out = vec![Complex::new(0.0, 0.0); outer * inner];
        for o in 0..outer {
            for (n, b) in bra.iter().enumerate().take(d) {
                let base = (o * d + n) * inner;
                for i in 0..inner {
                    out[o * inner + i] += b * self.amplitudes[base + i];
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(mode);
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(MultiModeState {
            dims,
            amplitudes: out,
        })
    }

    /// Reduced density matrix after tracing out `modes_to_trace`; kept modes
    /// retain their relative order. The trace equals the state's squared norm.
    pub fn partial_trace(&self, modes_to_trace: &[usize]) -> Result<crate::DensityMatrix> {
        let n = self.n_modes();
        if modes_to_trace.iter().any(|&m| m >= n) {
            return Err(invalid(format!(
                "trace modes {modes_to_trace:?} out of range"
            )));
        }
        let kept: Vec<usize> = (0..n).filter(|m| !modes_to_trace.contains(m)).collect();
        if kept.is_empty() {
            return Err(invalid("partial trace would leave no modes"));
        }
        let mut order = kept.clone();
        order.extend((0..n).filter(|m| modes_to_trace.contains(m)));
        let moved = self.permuted(&order)?;
        let rows: usize = kept.iter().map(|&m| self.dims[m]).product();
        let cols = moved.amplitudes.len() / rows;
        let mut rho = nalgebra::DMatrix::<Complex>::zeros(rows, rows);
        for r1 in 0..rows {
            let a = &moved.amplitudes[r1 * cols..(r1 + 1) * cols];
            for r2 in r1..rows {
                let b = &moved.amplitudes[r2 * cols..(r2 + 1) * cols];
                let v: Complex = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                rho[(r1, r2)] = v;
                rho[(r2, r1)] = v.conj();
            }
        }
        Ok(crate::DensityMatrix::from_matrix_unchecked(rho))
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < dims[i] {
            return;
        }
        idx[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn vacuum_coherent_vector() {
        let v = coherent_fock_vector(c(0.0), 10);
        assert_eq!(v.dim(), 11);
        assert_eq!(v.amplitude(0), c(1.0));
        assert!(v.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        assert_eq!(v.tail_probability, 0.0);
    }

    #[test]
    fn coherent_ground_amplitude() {
        let v = coherent_fock_vector(c(1.0), 20);
        assert_abs_diff_eq!(v.amplitude(0).re, (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.amplitude(0).re, 0.60653, epsilon = 1e-5);
    }

    #[test]
    fn coherent_norm_matches_poisson_sum() {
        let v = coherent_fock_vector(c(2.0), 30);
        // independent Poisson weights summed in closed form per term
        let direct: f64 = (0..=30)
            .map(|n| (-4.0 + n as f64 * 4f64.ln() - ln_factorial(n)).exp())
            .sum();
        assert_abs_diff_eq!(v.norm_sqr(), direct, epsilon = 1e-13);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_deficit_equals_tail() {
        for &(a, n) in &[(1.0, 8usize), (2.0, 12), (3.0, 20), (1.5, 5)] {
            let v = coherent_fock_vector(Complex::new(a * 0.6, a * 0.8), n);
            assert_abs_diff_eq!(1.0 - v.norm_sqr(), v.tail_probability, epsilon = 1e-12);
        }
    }

    #[test]
    fn strict_mode_rejects_short_truncation() {
        let err = coherent_fock_vector_strict(c(3.0), 10, 1e-12).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientTruncation { n_trunc: 10, .. }
        ));
        assert!(coherent_fock_vector_strict(c(3.0), default_truncation(3.0), 1e-12).is_ok());
    }

    #[test]
    fn default_truncation_tail_small_up_to_four() {
        for i in 0..=40 {
            let a = i as f64 * 0.1;
            assert!(
                poisson_tail(a * a, default_truncation(a)) < 1e-12,
                "alpha {a}"
            );
        }
    }

    #[test]
    fn large_photon_numbers_stay_finite() {
        let v = coherent_fock_vector(c(4.0), 250);
        assert!(v.amplitudes().iter().all(|a| a.re.is_finite()));
        assert!(ln_factorial(300).is_finite());
        assert_abs_diff_eq!(v.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_beam_splitter_examples() {
        let a = Complex::new(0.7, -0.2);
        let (o1, o2) = beam_splitter_coherent(a, a, 0.5).unwrap();
        assert_abs_diff_eq!(o1.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((o2 - a * 2f64.sqrt()).norm(), 0.0, epsilon = 1e-15);

        let t = 0.9;
        let (o1, o2) = beam_splitter_coherent(a, c(0.0), t).unwrap();
        assert_abs_diff_eq!((o1 - a * t.sqrt()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((o2 - a * (1.0 - t).sqrt()).norm(), 0.0, epsilon = 1e-15);

        let (o1, o2) = beam_splitter_coherent(c(0.0), c(0.0), 0.3).unwrap();
        assert_eq!((o1, o2), (c(0.0), c(0.0)));

        assert!(beam_splitter_coherent(a, a, 1.2).is_err());
        assert!(beam_splitter_coherent(a, a, -0.1).is_err());
    }

    #[test]
    fn full_transmission_is_identity() {
        let bs = beam_splitter_unitary(1.0, 4, 5).unwrap();
        let m = bs.to_dense();
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_abs_diff_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn beam_splitter_columns_orthonormal_below_cutoff() {
        let dim = 12;
        let bs = beam_splitter_unitary(0.37, dim, dim).unwrap();
        for n in 0..dim {
            for j in 0..=n {
                let cj = bs.column(j, n - j);
                let norm: f64 = cj.iter().map(|v| v * v).sum();
                assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
                for i in 0..j {
                    let ci = bs.column(i, n - i);
                    let dot: f64 = ci.iter().zip(cj).map(|(x, y)| x * y).sum();
                    assert_abs_diff_eq!(dot, 0.0, epsilon = 1e-12);
                }
            }
        }
        assert_eq!(bs.element(1, 1, 2, 1), 0.0);
    }

    #[test]
    fn beam_splitter_reproduces_coherent_labels() {
        let n = default_truncation(1.0);
        let input = MultiModeState::from_fock(&coherent_fock_vector(c(1.0), n))
            .with_vacuum_mode(n + 1)
            .unwrap();
        let bs = beam_splitter_unitary(0.99, n + 1, n + 1).unwrap();
        let out = input.apply_beam_splitter(&bs, 0, 1).unwrap();
        let expected =
            MultiModeState::from_fock(&coherent_fock_vector(c(0.99f64.sqrt()), n)).tensor(
                &MultiModeState::from_fock(&coherent_fock_vector(c(0.01f64.sqrt()), n)),
            );
        let overlap = expected.inner(&out).unwrap().norm();
        assert!(overlap >= 1.0 - 1e-10, "overlap {overlap}");
    }

    #[test]
    fn beam_splitter_mixes_general_coherent_pair() {
        // |a>|b> -> |a sqrt t - b sqrt(1-t)>|a sqrt(1-t) + b sqrt t>
        let (a, b, t) = (Complex::new(0.8, 0.3), Complex::new(-0.5, 0.4), 0.3);
        let n = 30;
        let input = MultiModeState::from_fock(&coherent_fock_vector(a, n))
            .tensor(&MultiModeState::from_fock(&coherent_fock_vector(b, n)));
        let bs = beam_splitter_unitary(t, n + 1, n + 1).unwrap();
        let out = input.apply_beam_splitter(&bs, 0, 1).unwrap();
        let (oa, ob) = beam_splitter_coherent(a, b, t).unwrap();
        let expected = MultiModeState::from_fock(&coherent_fock_vector(oa, n))
            .tensor(&MultiModeState::from_fock(&coherent_fock_vector(ob, n)));
        assert!(expected.inner(&out).unwrap().norm() > 1.0 - 1e-10);
    }

    #[test]
    fn homodyne_examples() {
        let k = PI.powf(-0.25);
        let v = homodyne_amplitude(0.0, PI / 2.0, c(1.3));
        assert_abs_diff_eq!((v - c(k)).norm(), 0.0, epsilon = 1e-14);
        for &x in &[-1.5, 0.0, 0.7] {
            let v = homodyne_amplitude(x, 0.4, c(0.0));
            assert_abs_diff_eq!(
                (v - c(k * (-0.5 * x * x).exp())).norm(),
                0.0,
                epsilon = 1e-15
            );
        }
        let v = homodyne_amplitude(2f64.sqrt(), 0.0, c(1.0));
        assert_abs_diff_eq!(v.re, 0.75113, epsilon = 1e-5);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn homodyne_fock_bra_matches_closed_form() {
        for &(x, theta) in &[(0.3, PI / 2.0), (-1.2, 0.0), (2.0, 1.1)] {
            let alpha = Complex::from_polar(1.7, 0.4);
            let n = 60;
            let bra = homodyne_fock_bra(x, theta, n);
            let v = coherent_fock_vector(alpha, n);
            let via_fock: Complex = bra.iter().zip(v.amplitudes()).map(|(b, a)| b * a).sum();
            let closed = homodyne_amplitude(x, theta, alpha);
            assert_abs_diff_eq!((via_fock - closed).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn homodyne_density_integrates_to_one() {
        let rule = gauss_quad::GaussLegendre::new(200).unwrap();
        for &(a, phi, theta) in &[
            (0.0, 0.0, 0.0),
            (1.0, 0.3, PI / 2.0),
            (3.0, 2.0, 0.5),
            (2.2, 0.0, 0.0),
        ] {
            let alpha = Complex::from_polar(a, phi);
            let total = rule.integrate(-15.0, 15.0, |x| {
                homodyne_amplitude(x, theta, alpha).norm_sqr()
            });
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn quadrature_expectation_of_coherent_state() {
        let v = coherent_fock_vector(Complex::from_polar(1.0, 0.6), 40);
        assert_abs_diff_eq!(v.quadrature_expectation(0.6), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            v.quadrature_expectation(0.6 + PI / 2.0),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn projection_and_permutation() {
        let s = MultiModeState::new(vec![2, 3], (0..6).map(|i| c(i as f64)).collect()).unwrap();
        let p = s.permuted(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        assert_eq!(p.amplitude(&[2, 1]), s.amplitude(&[1, 2]));
        let proj = s.project_mode(1, &vacuum_bra(3)).unwrap();
        assert_eq!(proj.amplitudes(), &[c(0.0), c(3.0)]);
        assert!(s.permuted(&[0, 0]).is_err());
        assert!(MultiModeState::new(vec![2, 2], vec![c(1.0); 3]).is_err());
    }

    #[test]
    fn partial_trace_rejects_tracing_everything() {
        let s = MultiModeState::vacuum(vec![2, 2]).unwrap();
        assert!(s.partial_trace(&[0, 1]).is_err());
        assert!(s.partial_trace(&[2]).is_err());
    }
}
