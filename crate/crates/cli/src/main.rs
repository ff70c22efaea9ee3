use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybridswap::measures::MeasureSet;
use hybridswap::mismatch::{average_over_mismatch, averaged, MismatchSpec};
use hybridswap::protocol::{
    herald_hybrid_state, herald_target_overlap, oracle_density, protocol_density,
    success_probability, HeraldParams, ProtocolParams,
};
use hybridswap::sweep::{emit_outputs, run_sweep, OutputFormat, SweepSpec, ORACLE_TOLERANCE};
use hybridswap::verify::run_checks;

mod config;

/// Loss-tolerant hybrid entanglement swapping: single points, figure sweeps,
/// self-verification and herald diagnostics.
#[derive(Parser)]
#[command(name = "hybridswap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter set and print its measures.
    Point(PointOpts),
    /// Sweep an (alpha, T, Delta) grid and write CSV / JSON / SVG.
    Sweep(SweepOpts),
    /// Run the invariant and oracle self-checks.
    Verify {
        #[arg(long)]
        json: bool,
    },
    /// Heralded preparation diagnostics.
    Herald(HeraldOpts),
}

#[derive(Args)]
struct PointOpts {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    transmission: f64,
    /// Width of the mismatch distribution (0 disables averaging).
    #[arg(long, default_value_t = 0.0, conflicts_with = "fixed_delta")]
    mismatch_width: f64,
    /// Known mismatch: channel D has transmission T - delta.
    #[arg(long)]
    fixed_delta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    homodyne_outcome: f64,
    #[arg(long)]
    no_phase_correction: bool,
    /// Rebuild the state with the Fock-space circuit and compare.
    #[arg(long)]
    oracle_check: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepOpts {
    #[arg(long)]
    alpha_start: Option<f64>,
    #[arg(long)]
    alpha_stop: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// Comma-separated transmissions.
    #[arg(long, value_delimiter = ',')]
    transmission: Option<Vec<f64>>,
    /// Comma-separated mismatch widths.
    #[arg(long, value_delimiter = ',')]
    mismatch_width: Option<Vec<f64>>,
    #[arg(long)]
    fixed_delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    homodyne_outcome: Option<f64>,
    #[arg(long)]
    no_phase_correction: bool,
    /// Output path; extensions are chosen per format.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json and/or svg (comma-separated or repeated).
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    #[arg(long)]
    oracle_check: bool,
    /// key = value run file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct HeraldOpts {
    #[arg(long)]
    p_c: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    alpha: f64,
    /// Photons counted in the herald mode.
    #[arg(long, default_value_t = 1)]
    outcome: usize,
    /// Amplitude of the reference hybrid state (defaults to alpha).
    #[arg(long)]
    beta: Option<f64>,
}

enum Failure {
    Invalid(String),
    Oracle(String),
}

impl From<hybridswap::Error> for Failure {
    fn from(e: hybridswap::Error) -> Self {
        match e {
            hybridswap::Error::OracleMismatch { .. } => Failure::Oracle(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(msg: String) -> Self {
        Failure::Invalid(msg)
    }
}

fn print_measures(m: &MeasureSet, json: bool) -> Result<(), Failure> {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(m).map_err(|e| e.to_string())?
        );
    } else {
        println!("negativity     {:.12}", m.negativity);
        println!("fidelity       {:.12}", m.fidelity);
        println!("linear_entropy {:.12}", m.linear_entropy);
        println!("success_prob   {:.12}", m.success_prob);
    }
    Ok(())
}

fn point(o: &PointOpts) -> Result<(), Failure> {
    let mut p = ProtocolParams::new(o.alpha, o.transmission, o.fixed_delta.unwrap_or(0.0))
        .with_outcome(o.homodyne_outcome);
    p.phase_corrected = !o.no_phase_correction;
    let spec = MismatchSpec::new(o.mismatch_width);
    let (rho, success) = if o.fixed_delta.is_some() {
        (protocol_density(&p)?, success_probability(&p)?)
    } else {
        let avg = averaged(&p, &spec)?;
        (avg.density, avg.success_prob)
    };
    if o.oracle_check {
        let oracle = if o.fixed_delta.is_some() {
            oracle_density(&p)?
        } else {
            average_over_mismatch(&p, &spec, oracle_density)?.density
        };
        let distance = rho.trace_distance(&oracle)?;
        if distance.is_nan() || distance >= ORACLE_TOLERANCE {
            return Err(hybridswap::Error::OracleMismatch {
                alpha: p.alpha,
                transmission: p.transmission,
                delta: o.fixed_delta.unwrap_or(o.mismatch_width),
                distance,
            }
            .into());
        }
        eprintln!("oracle trace distance {distance:.3e}");
    }
    print_measures(&MeasureSet::of(&rho, success)?, o.json)
}

fn sweep_spec(o: &SweepOpts) -> Result<SweepSpec, Failure> {
    let cfg = match &o.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            config::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => config::Config::new(),
    };
    let d = SweepSpec::default();
    let formats = match &o.format {
        Some(v) => Some(v.clone()),
        None => cfg
            .get("format")
            .map(|s| s.split(',').map(str::to_string).collect()),
    };
    let outputs = match formats {
        Some(v) => v
            .iter()
            .map(|s| s.parse::<OutputFormat>())
            .collect::<Result<_, _>>()?,
        None => d.outputs.clone(),
    };
    Ok(SweepSpec {
        alpha_start: o
            .alpha_start
            .or(config::number(&cfg, "alpha-start")?)
            .unwrap_or(d.alpha_start),
        alpha_stop: o
            .alpha_stop
            .or(config::number(&cfg, "alpha-stop")?)
            .unwrap_or(d.alpha_stop),
        alpha_step: o
            .alpha_step
            .or(config::number(&cfg, "alpha-step")?)
            .unwrap_or(d.alpha_step),
        transmissions: o
            .transmission
            .clone()
            .or(config::list(&cfg, "transmission")?)
            .unwrap_or(d.transmissions),
        widths: o
            .mismatch_width
            .clone()
            .or(config::list(&cfg, "mismatch-width")?)
            .unwrap_or(d.widths),
        fixed_delta: o.fixed_delta.or(config::number(&cfg, "fixed-delta")?),
        outputs,
        output_path: o
            .out
            .clone()
            .or(cfg.get("out").map(PathBuf::from))
            .unwrap_or(d.output_path),
        oracle_check: o.oracle_check || config::flag(&cfg, "oracle-check")?,
        homodyne_outcome: o
            .homodyne_outcome
            .or(config::number(&cfg, "homodyne-outcome")?)
            .unwrap_or(d.homodyne_outcome),
        phase_corrected: !(o.no_phase_correction || config::flag(&cfg, "no-phase-correction")?),
    })
}

fn sweep(o: &SweepOpts) -> Result<(), Failure> {
    let spec = sweep_spec(o)?;
    spec.validate()?;
    let records = run_sweep(&spec)?;
    for path in emit_outputs(&records, &spec)? {
        println!("wrote {}", path.display());
    }
    eprintln!("{} grid points", records.len());
    Ok(())
}

fn verify(json: bool) -> Result<(), Failure> {
    let results = run_checks();
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&results).map_err(|e| e.to_string())?
        );
    } else {
        for c in &results {
            println!(
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Oracle(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn herald(o: &HeraldOpts) -> Result<(), Failure> {
    let h = HeraldParams {
        p_c: o.p_c,
        eta: o.eta,
        alpha: o.alpha,
        herald_outcome: o.outcome,
    };
    let out = herald_hybrid_state(&h)?;
    let rho_a = out.state.partial_trace(&[1])?;
    let overlap = herald_target_overlap(&out, o.beta.unwrap_or(o.alpha))?;
    println!("herald_probability {:.12}", out.probability);
    println!("population_G       {:.12}", rho_a.entry(0, 0).re);
    println!("population_W       {:.12}", rho_a.entry(1, 1).re);
    println!("target_overlap     {:.12}", overlap);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Point(o) => point(o),
        Command::Sweep(o) => sweep(o),
        Command::Verify { json } => verify(*json),
        Command::Herald(o) => herald(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("oracle check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_mismatch_maps_to_its_own_failure() {
        let e = hybridswap::Error::OracleMismatch {
            alpha: 1.0,
            transmission: 0.9,
            delta: 0.0,
            distance: 1e-3,
        };
        assert!(matches!(Failure::from(e), Failure::Oracle(_)));
        let e = hybridswap::Error::InvalidParameter("x".into());
        assert!(matches!(Failure::from(e), Failure::Invalid(_)));
    }
}
