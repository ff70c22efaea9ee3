//! Averaging over an unknown, one-sided Gaussian loss mismatch.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::protocol::{protocol_density, success_probability, ProtocolParams};
use crate::DensityMatrix;

/// Mismatch distribution and its quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchSpec {
    /// Width `Δ` of the one-sided Gaussian; zero means a point mass at `δ = 0`.
    pub width: f64,
    pub quad_points: usize,
    /// Upper integration limit; `None` means `min(6Δ, T)`.
    pub upper_cut: Option<f64>,
}

impl MismatchSpec {
    pub fn new(width: f64) -> Self {
        Self {
            width,
            quad_points: 64,
            upper_cut: None,
        }
    }

    pub fn with_quad_points(mut self, n: usize) -> Self {
        self.quad_points = n;
        self
    }

    pub fn upper_cut_for(&self, transmission: f64) -> f64 {
        self.upper_cut.unwrap_or(6.0 * self.width).min(transmission)
    }

    pub fn validate(&self, transmission: f64) -> Result<()> {
        if !self.width.is_finite() || self.width < 0.0 {
            return Err(invalid(format!(
                "mismatch width {} must be >= 0",
                self.width
            )));
        }
        if self.quad_points < 2 {
            return Err(invalid("mismatch quadrature needs at least 2 points"));
        }
        if let Some(cut) = self.upper_cut {
            if !(cut > 0.0 && cut <= transmission) {
                return Err(invalid(format!(
                    "upper cut {cut} must lie in (0, T = {transmission}]"
                )));
            }
        }
        Ok(())
    }
}

/// One-sided Gaussian density `√(2/(πΔ²)) e^{-δ²/(2Δ²)}` on `δ >= 0`.
pub fn mismatch_weight(delta: f64, width: f64) -> f64 {
    (2.0 / (PI * width * width)).sqrt() * (-delta * delta / (2.0 * width * width)).exp()
}

/// Result of a mismatch average.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchAverage {
    /// Averaged state, renormalised to unit trace.
    pub density: DensityMatrix,
    /// Trace before renormalisation: the distribution mass the quadrature covered.
    pub captured_weight: f64,
    /// Vacuum-projection probability averaged with the same weights.
    pub success_prob: f64,
}

/// Quadrature nodes and weights (density already folded in) on `[0, cut]`.
pub fn mismatch_nodes(spec: &MismatchSpec, transmission: f64) -> Result<Vec<(f64, f64)>> {
    spec.validate(transmission)?;
    let cut = spec.upper_cut_for(transmission);
    let rule = gauss_quad::GaussLegendre::new(spec.quad_points)
        .map_err(|_| invalid("mismatch quadrature needs at least 2 points"))?;
    let half = 0.5 * cut;
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| {
            let delta = half * (x + 1.0);
            (delta, w * half * mismatch_weight(delta, spec.width))
        })
        .collect())
}

/// Averages `state(δ)` over the mismatch distribution; `state` receives `p`
/// with `delta` replaced by each node. Nodes are evaluated in parallel and
/// summed in node order.
pub fn average_over_mismatch<F>(
    p: &ProtocolParams,
    spec: &MismatchSpec,
    state: F,
) -> Result<MismatchAverage>
where
    F: Fn(&ProtocolParams) -> Result<DensityMatrix> + Sync,
{
    let mut point = *p;
    point.delta = 0.0;
    point.validate()?;
    if spec.width == 0.0 {
        spec.validate(p.transmission)?;
        return Ok(MismatchAverage {
            density: state(&point)?,
            captured_weight: 1.0,
            success_prob: success_probability(&point)?,
        });
    }
    let nodes = mismatch_nodes(spec, p.transmission)?;
    let evaluated: Vec<Result<(DensityMatrix, f64)>> = nodes
        .par_iter()
        .map(|&(delta, _)| {
            let q = point.with_delta(delta);
            Ok((state(&q)?, success_probability(&q)?))
        })
        .collect();
    let mut acc = DensityMatrix::zeros(4);
    let mut captured = 0.0;
    let mut success = 0.0;
    for (res, &(delta, w)) in evaluated.into_iter().zip(&nodes) {
        let (rho, ps) = res?;
        if rho
            .matrix()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(format!("integrand at delta = {delta}")));
        }
        acc.accumulate(&rho, w)?;
        captured += w;
        success += w * ps;
    }
    let trace = acc.trace();
    Ok(MismatchAverage {
        density: acc.normalized()?,
        captured_weight: trace,
        success_prob: success / captured,
    })
}

/// Mismatch-averaged state of the analytic model.
pub fn averaged(p: &ProtocolParams, spec: &MismatchSpec) -> Result<MismatchAverage> {
    average_over_mismatch(p, spec, protocol_density)
}

/// Mismatch-averaged `ρ_AC`.
pub fn averaged_density(p: &ProtocolParams, spec: &MismatchSpec) -> Result<DensityMatrix> {
    Ok(averaged(p, spec)?.density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::negativity;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weight_examples() {
        let w = 0.01;
        assert_abs_diff_eq!(
            mismatch_weight(0.0, w),
            (2.0 / (PI * w * w)).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mismatch_weight(w, w) / mismatch_weight(0.0, w),
            (-0.5f64).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn weight_is_normalised() {
        let rule = gauss_quad::GaussLegendre::new(200).unwrap();
        for width in [0.001, 0.01, 0.1] {
            let total = rule.integrate(0.0, 40.0 * width, |d| mismatch_weight(d, width));
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_width_is_point_state() {
        let p = ProtocolParams::new(1.5, 0.99, 0.3);
        let avg = averaged(&p, &MismatchSpec::new(0.0)).unwrap();
        assert_eq!(avg.density, protocol_density(&p.with_delta(0.0)).unwrap());
        assert_eq!(avg.captured_weight, 1.0);
    }

    #[test]
    fn captured_weight_bounded_by_tail() {
        let p = ProtocolParams::new(1.2, 0.95, 0.0);
        let rule = gauss_quad::GaussLegendre::new(300).unwrap();
        for width in [0.001, 0.01, 0.1] {
            let avg = averaged(&p, &MismatchSpec::new(width)).unwrap();
            let cut = MismatchSpec::new(width).upper_cut_for(0.95);
            let tail = rule.integrate(cut, cut + 40.0 * width, |d| mismatch_weight(d, width));
            assert!(avg.captured_weight <= 1.0 + 1e-12);
            assert!(
                avg.captured_weight >= 1.0 - tail - 1e-12,
                "{} vs tail {tail}",
                avg.captured_weight
            );
        }
    }

    #[test]
    fn quadrature_self_convergence() {
        let p = ProtocolParams::new(2.0, 0.95, 0.0);
        let a = averaged_density(&p, &MismatchSpec::new(0.1)).unwrap();
        let b = averaged_density(&p, &MismatchSpec::new(0.1).with_quad_points(128)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9, "{}", a.max_abs_diff(&b));
    }

    #[test]
    fn average_does_not_exceed_pointwise_maximum() {
        let p = ProtocolParams::new(1.5, 0.99, 0.0);
        let spec = MismatchSpec::new(0.05);
        let avg = negativity(&averaged_density(&p, &spec).unwrap()).unwrap();
        let best = mismatch_nodes(&spec, 0.99)
            .unwrap()
            .iter()
            .map(|&(d, _)| negativity(&protocol_density(&p.with_delta(d)).unwrap()).unwrap())
            .fold(0.0, f64::max);
        assert!(avg <= best + 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let p = ProtocolParams::new(1.0, 0.9, 0.0);
        assert!(averaged(&p, &MismatchSpec::new(-0.1)).is_err());
        assert!(averaged(&p, &MismatchSpec::new(0.1).with_quad_points(1)).is_err());
        let mut s = MismatchSpec::new(0.1);
        s.upper_cut = Some(0.95);
        assert!(averaged(&p, &s).is_err());
    }
}
