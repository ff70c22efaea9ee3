//! Self-checks run by the `verify` command: oracle equivalence, limit
//! identities and the protocol invariants.

use serde::Serialize;

use crate::error::Result;
use crate::measures::{fidelity, linear_entropy, negativity, phi_plus, MeasureSet};
use crate::mismatch::{averaged, averaged_density, MismatchSpec};
use crate::protocol::{
    analytic_branches, equal_loss_branches, ideal_limit_density, oracle_density, protocol_density,
    success_probability, ProtocolParams,
};
use crate::sweep::ORACLE_TOLERANCE;
use crate::{Complex, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// The `{0.25 .. 3.0} × {1, 0.99, 0.95} × {0, 0.01}` oracle grid.
pub fn oracle_grid() -> Vec<ProtocolParams> {
    let mut out = Vec::with_capacity(72);
    for i in 1..=12 {
        for t in [1.0, 0.99, 0.95] {
            for delta in [0.0, 0.01] {
                out.push(ProtocolParams::new(0.25 * i as f64, t, delta));
            }
        }
    }
    out
}

/// Largest analytic/oracle trace distance over `points`, with its location.
pub fn oracle_discrepancy(points: &[ProtocolParams]) -> Result<(f64, ProtocolParams)> {
    let mut worst = (0.0, ProtocolParams::default());
    for p in points {
        let d = protocol_density(p)?.trace_distance(&oracle_density(p)?)?;
        if d > worst.0 {
            worst = (d, *p);
        }
    }
    Ok(worst)
}

fn oracle_equivalence() -> Result<CheckResult> {
    let (d, p) = oracle_discrepancy(&oracle_grid())?;
    Ok(check(
        "oracle equivalence",
        d < ORACLE_TOLERANCE,
        format!(
            "max trace distance {d:.3e} at alpha = {}, T = {}, delta = {}",
            p.alpha, p.transmission, p.delta
        ),
    ))
}

fn equal_loss_reduction() -> Result<CheckResult> {
    let mut dev: f64 = 0.0;
    for (alpha, t, x) in [
        (0.5, 1.0, 0.0),
        (1.2, 0.99, 0.7),
        (2.0, 0.95, -1.1),
        (3.0, 0.9, 0.2),
    ] {
        let p = ProtocolParams::new(alpha, t, 0.0).with_outcome(x);
        let general = analytic_branches(&p)?;
        let special = equal_loss_branches(&p)?;
        for g in &general.branches {
            match special.get(g.n, g.m) {
                Some(e) => {
                    for k in 0..4 {
                        dev = dev.max((g.vector[k] * g.weight - e.vector[k] * e.weight).norm());
                    }
                }
                None => dev = dev.max(g.probability().sqrt()),
            }
        }
    }
    Ok(check(
        "equal-loss reduction",
        dev <= 1e-12,
        format!("max branch deviation {dev:.2e}"),
    ))
}

fn ideal_limit() -> Result<CheckResult> {
    let p = ProtocolParams::new(2.0, 0.99, 0.0);
    let d = ideal_limit_density(&p)?.trace_distance(&protocol_density(&p)?)?;
    Ok(check(
        "ideal-limit approximation",
        d < 0.02,
        format!("trace distance {d:.4}"),
    ))
}

fn no_loss_purity() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let p = ProtocolParams::new(0.1 * i as f64, 1.0, 0.0);
        worst = worst.max(linear_entropy(&protocol_density(&p)?));
    }
    Ok(check(
        "no-loss purity",
        worst < 1e-10,
        format!("max linear entropy {worst:.2e}"),
    ))
}

fn phase_invariance() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (alpha, t, delta) in [(1.0, 0.99, 0.01), (1.5, 0.95, 0.0), (2.5, 0.95, 0.01)] {
        let at = |x: f64| -> Result<[f64; 4]> {
            let p = ProtocolParams::new(alpha, t, delta).with_outcome(x);
            let rho = protocol_density(&p)?;
            Ok([
                negativity(&rho)?,
                fidelity(&rho, &phi_plus())?,
                linear_entropy(&rho),
                success_probability(&p)?,
            ])
        };
        let reference = at(0.0)?;
        for x in [-2.0, 2.0] {
            for (a, b) in at(x)?.iter().zip(&reference) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(check(
        "phase-correction invariance",
        worst < 1e-10,
        format!("max variation {worst:.2e}"),
    ))
}

fn channel_symmetry() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (alpha, t, delta, x) in [
        (1.0, 0.99, 0.01, 0.0),
        (1.5, 0.95, 0.05, 0.4),
        (2.2, 0.9, 0.02, -0.8),
    ] {
        let p = ProtocolParams::new(alpha, t, delta).with_outcome(x);
        let mut q = p;
        q.swap_channels = true;
        let (a, b) = (protocol_density(&p)?, protocol_density(&q)?);
        worst = worst
            .max((negativity(&a)? - negativity(&b)?).abs())
            .max((linear_entropy(&a) - linear_entropy(&b)).abs());
    }
    Ok(check(
        "channel-swap symmetry",
        worst < 1e-10,
        format!("max difference {worst:.2e}"),
    ))
}

fn monotone_damping() -> Result<CheckResult> {
    let mut ok = true;
    for t in [0.99, 0.95] {
        let mut prev = f64::INFINITY;
        for i in 1..=40 {
            let rho = protocol_density(&ProtocolParams::new(0.1 * i as f64, t, 0.0))?;
            let pop = rho.entry(1, 1).re + rho.entry(2, 2).re;
            ok &= pop <= prev + 1e-12;
            prev = pop;
        }
    }
    Ok(check(
        "monotone damping",
        ok,
        "|01>, |10> populations vs alpha".into(),
    ))
}

fn width_ordering() -> Result<CheckResult> {
    let mut violations = 0;
    let widths = [0.0, 0.001, 0.01, 0.1];
    for t in [0.99, 0.95] {
        for i in 1..=16 {
            let p = ProtocolParams::new(0.25 * i as f64, t, 0.0);
            let mut prev = f64::INFINITY;
            for &w in &widths {
                let n = negativity(&averaged_density(&p, &MismatchSpec::new(w))?)?;
                if n > prev + 1e-10 {
                    violations += 1;
                }
                prev = n;
            }
        }
    }
    Ok(check(
        "mismatch-width ordering",
        violations == 0,
        format!("{violations} violations"),
    ))
}

fn point_mass() -> Result<CheckResult> {
    let p = ProtocolParams::new(1.7, 0.95, 0.0).with_outcome(0.5);
    let avg = averaged(&p, &MismatchSpec::new(0.0))?;
    let exact = avg.density == protocol_density(&p)?;
    Ok(check(
        "zero-width average is the point state",
        exact,
        format!("bitwise equal: {exact}"),
    ))
}

fn measure_fixtures() -> Result<CheckResult> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |v: f64| Complex::new(v, 0.0);
    let mut dev: f64 = 0.0;
    for bell in [
        [c(s), c(0.0), c(0.0), c(s)],
        [c(s), c(0.0), c(0.0), c(-s)],
        [c(0.0), c(s), c(s), c(0.0)],
        [c(0.0), c(s), c(-s), c(0.0)],
    ] {
        let rho = DensityMatrix::from_pure(&bell);
        dev = dev
            .max((negativity(&rho)? - 1.0).abs())
            .max(linear_entropy(&rho).abs());
    }
    let product = DensityMatrix::from_pure(&[c(0.5), c(0.5), c(0.5), c(0.5)]);
    dev = dev.max(negativity(&product)?);
    let mixed = DensityMatrix::maximally_mixed(4);
    let m = MeasureSet::of(&mixed, 1.0)?;
    dev = dev
        .max((m.fidelity - 0.25).abs())
        .max((m.linear_entropy - 0.75).abs());
    Ok(check(
        "measure fixtures",
        dev <= 1e-10,
        format!("max deviation {dev:.2e}"),
    ))
}

type Check = (&'static str, fn() -> Result<CheckResult>);

/// Runs every check; errors inside a check count as failures.
pub fn run_checks() -> Vec<CheckResult> {
    let checks: [Check; 10] = [
        ("measure fixtures", measure_fixtures),
        ("oracle equivalence", oracle_equivalence),
        ("equal-loss reduction", equal_loss_reduction),
        ("ideal-limit approximation", ideal_limit),
        ("no-loss purity", no_loss_purity),
        ("phase-correction invariance", phase_invariance),
        ("channel-swap symmetry", channel_symmetry),
        ("monotone damping", monotone_damping),
        ("zero-width average is the point state", point_mass),
        ("mismatch-width ordering", width_ordering),
    ];
    checks
        .iter()
        .map(|&(name, f)| f().unwrap_or_else(|e| check(name, false, format!("error: {e}"))))
        .collect()
}
