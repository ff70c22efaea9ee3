//! Parameter sweeps over `(α, T, Δ)` and their CSV / JSON / SVG emission.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::MeasureSet;
use crate::mismatch::{average_over_mismatch, averaged, MismatchSpec};
use crate::protocol::{oracle_density, protocol_density, success_probability, ProtocolParams};
use crate::DensityMatrix;

/// Exact CSV header.
pub const CSV_HEADER: &str = "alpha,T,Delta,negativity,fidelity,linear_entropy,success_prob";

/// Largest trace distance tolerated between analytic and circuit states.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Every `ORACLE_STRIDE`-th grid point is re-derived with the circuit oracle.
pub const ORACLE_STRIDE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(invalid(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub transmissions: Vec<f64>,
    /// Mismatch widths `Δ`; ignored when `fixed_delta` is set.
    pub widths: Vec<f64>,
    /// Use one known mismatch `δ` instead of averaging.
    pub fixed_delta: Option<f64>,
    pub outputs: BTreeSet<OutputFormat>,
    pub output_path: PathBuf,
    pub oracle_check: bool,
    /// Homodyne outcome used at every point.
    pub homodyne_outcome: f64,
    pub phase_corrected: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            alpha_start: 0.0,
            alpha_stop: 4.0,
            alpha_step: 0.05,
            transmissions: vec![1.0, 0.99, 0.95],
            widths: vec![0.0, 0.001, 0.01, 0.1],
            fixed_delta: None,
            outputs: [OutputFormat::Csv].into_iter().collect(),
            output_path: PathBuf::from("sweep"),
            oracle_check: false,
            homodyne_outcome: 0.0,
            phase_corrected: true,
        }
    }
}

/// One grid point's results. `delta` holds `Δ`, or `δ` in fixed-mismatch mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub transmission: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub negativity: f64,
    pub fidelity: f64,
    pub linear_entropy: f64,
    pub success_prob: f64,
}

impl SweepRecord {
    pub fn measures(&self) -> MeasureSet {
        MeasureSet {
            negativity: self.negativity,
            fidelity: self.fidelity,
            linear_entropy: self.linear_entropy,
            success_prob: self.success_prob,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub alpha: f64,
    pub transmission: f64,
    /// `Δ`, or `δ` in fixed-mismatch mode.
    pub delta: f64,
}

impl SweepSpec {
    /// Grid of `α` values, computed as `start + i * step` to avoid drift.
    pub fn alpha_grid(&self) -> Result<Vec<f64>> {
        let (a, b, h) = (self.alpha_start, self.alpha_stop, self.alpha_step);
        if !(a.is_finite() && b.is_finite() && h.is_finite()) {
            return Err(invalid("alpha grid bounds must be finite"));
        }
        if h <= 0.0 {
            return Err(invalid(format!("alpha step {h} must be > 0")));
        }
        if a < 0.0 || b < a {
            return Err(invalid(format!(
                "alpha range [{a}, {b}] is empty or negative"
            )));
        }
        if h > b - a {
            return Err(invalid(format!(
                "alpha step {h} exceeds the range [{a}, {b}]"
            )));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| a + i as f64 * h).collect())
    }

    fn mismatch_values(&self) -> Vec<f64> {
        match self.fixed_delta {
            Some(d) => vec![d],
            None => self.widths.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha_grid()?;
        if self.transmissions.is_empty() {
            return Err(invalid("no transmission values given"));
        }
        if self.fixed_delta.is_none() && self.widths.is_empty() {
            return Err(invalid("no mismatch widths given"));
        }
        for &t in &self.transmissions {
            if !(t > 0.0 && t <= 1.0) {
                return Err(invalid(format!("transmission {t} must lie in (0, 1]")));
            }
            match self.fixed_delta {
                Some(d) if !(d >= 0.0 && d < t) => {
                    return Err(invalid(format!("fixed delta {d} must lie in [0, T = {t})")))
                }
                _ => {}
            }
        }
        if self.fixed_delta.is_none() {
            for &w in &self.widths {
                if !w.is_finite() || w < 0.0 {
                    return Err(invalid(format!("mismatch width {w} must be >= 0")));
                }
            }
        }
        if !self.homodyne_outcome.is_finite() {
            return Err(invalid("homodyne outcome must be finite"));
        }
        Ok(())
    }

    /// Grid points in output order: `α`-major, then `T`, then `Δ`.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        self.validate()?;
        let deltas = self.mismatch_values();
        let mut out = Vec::new();
        for alpha in self.alpha_grid()? {
            for &transmission in &self.transmissions {
                for &delta in &deltas {
                    out.push(GridPoint {
                        alpha,
                        transmission,
                        delta,
                    });
                }
            }
        }
        Ok(out)
    }

    fn params(&self, g: &GridPoint) -> ProtocolParams {
        let mut p =
            ProtocolParams::new(g.alpha, g.transmission, 0.0).with_outcome(self.homodyne_outcome);
        p.phase_corrected = self.phase_corrected;
        if self.fixed_delta.is_some() {
            p.delta = g.delta;
        }
        p
    }

    /// Analytic state and success probability at one grid point.
    pub fn evaluate(&self, g: &GridPoint) -> Result<(DensityMatrix, f64)> {
        let p = self.params(g);
        if self.fixed_delta.is_some() {
            Ok((protocol_density(&p)?, success_probability(&p)?))
        } else {
            let avg = averaged(&p, &MismatchSpec::new(g.delta))?;
            Ok((avg.density, avg.success_prob))
        }
    }

    /// The same state rebuilt by the circuit oracle.
    pub fn evaluate_oracle(&self, g: &GridPoint) -> Result<DensityMatrix> {
        let p = self.params(g);
        if self.fixed_delta.is_some() {
            oracle_density(&p)
        } else {
            Ok(average_over_mismatch(&p, &MismatchSpec::new(g.delta), oracle_density)?.density)
        }
    }
}

fn record_for(spec: &SweepSpec, index: usize, g: &GridPoint) -> Result<SweepRecord> {
    let (rho, success_prob) = spec.evaluate(g)?;
    if spec.oracle_check && index.is_multiple_of(ORACLE_STRIDE) {
        let oracle = spec.evaluate_oracle(g)?;
        let distance = rho.trace_distance(&oracle)?;
        if distance.is_nan() || distance >= ORACLE_TOLERANCE {
            return Err(Error::OracleMismatch {
                alpha: g.alpha,
                transmission: g.transmission,
                delta: g.delta,
                distance,
            });
        }
    }
    let m = MeasureSet::of(&rho, success_prob)?;
    Ok(SweepRecord {
        alpha: g.alpha,
        transmission: g.transmission,
        delta: g.delta,
        negativity: m.negativity,
        fidelity: m.fidelity,
        linear_entropy: m.linear_entropy,
        success_prob: m.success_prob,
    })
}

/// Evaluates every grid point (in parallel) and returns records in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep_with(spec, true)
}

pub fn run_sweep_with(spec: &SweepSpec, parallel: bool) -> Result<Vec<SweepRecord>> {
    let grid = spec.grid()?;
    let results: Vec<Result<SweepRecord>> = if parallel {
        grid.par_iter()
            .enumerate()
            .map(|(i, g)| record_for(spec, i, g))
            .collect()
    } else {
        grid.iter()
            .enumerate()
            .map(|(i, g)| record_for(spec, i, g))
            .collect()
    };
    results.into_iter().collect()
}

/// `%.{digits}g`-style formatting.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    // rounding may carry into the next decade; let the scientific form decide
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    let exp = if e != exp { e } else { exp };
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            r.alpha,
            r.transmission,
            r.delta,
            r.negativity,
            r.fidelity,
            r.linear_entropy,
            r.success_prob,
        ];
        let row: Vec<String> = fields.iter().map(|&v| format_significant(v, 12)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(records: &[SweepRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::Io(e.to_string()))
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Panel<'a> {
    class: &'a str,
    label: &'a str,
    top: f64,
    y_max: f64,
    value: fn(&SweepRecord) -> f64,
}

/// Two-panel SVG (negativity and linear entropy against `α`) for one
/// transmission, one polyline per mismatch value.
pub fn to_svg(records: &[SweepRecord], transmission: f64) -> String {
    let rows: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.transmission == transmission)
        .collect();
    let mut deltas: Vec<f64> = Vec::new();
    for r in &rows {
        if !deltas.contains(&r.delta) {
            deltas.push(r.delta);
        }
    }
    let (a_min, a_max) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.alpha), hi.max(r.alpha))
        });
    let a_span = if a_max > a_min { a_max - a_min } else { 1.0 };
    let entropy_max = rows.iter().map(|r| r.linear_entropy).fold(0.0, f64::max);
    let entropy_top = ((entropy_max * 10.0).ceil() / 10.0).max(0.1);

    let (width, height) = (720.0, 600.0);
    let (left, plot_w, plot_h) = (70.0, 520.0, 200.0);
    let panels = [
        Panel {
            class: "negativity",
            label: "negativity",
            top: 50.0,
            y_max: 1.0,
            value: |r| r.negativity,
        },
        Panel {
            class: "linear-entropy",
            label: "linear entropy",
            top: 330.0,
            y_max: entropy_top,
            value: |r| r.linear_entropy,
        },
    ];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">T = {}</text>"#,
        left + plot_w / 2.0,
        format_significant(transmission, 6)
    );
    for panel in &panels {
        let _ = writeln!(s, r#"<g class="panel {}">"#, panel.class);
        let (x0, y0) = (left, panel.top);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let frac = i as f64 / 4.0;
            let y = y0 + plot_h * (1.0 - frac);
            let x = x0 + plot_w * frac;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                format_significant(panel.y_max * frac, 3)
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + plot_h + 16.0,
                format_significant(a_min + a_span * frac, 3)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">α</text>"#,
            x0 + plot_w / 2.0,
            y0 + plot_h + 34.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            x0 - 45.0,
            y0 + plot_h / 2.0,
            x0 - 45.0,
            y0 + plot_h / 2.0,
            panel.label
        );
        for (k, &d) in deltas.iter().enumerate() {
            let pts: Vec<String> = rows
                .iter()
                .filter(|r| r.delta == d)
                .map(|r| {
                    let x = x0 + plot_w * (r.alpha - a_min) / a_span;
                    let v = ((panel.value)(r) / panel.y_max).clamp(0.0, 1.0);
                    format!("{x:.2},{:.2}", y0 + plot_h * (1.0 - v))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" data-delta="{}" points="{}"/>"#,
                COLORS[k % COLORS.len()],
                format_significant(d, 6),
                pts.join(" ")
            );
        }
        s.push_str("</g>\n");
    }
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, &d) in deltas.iter().enumerate() {
        let y = 60.0 + 18.0 * k as f64;
        let x = left + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">Δ = {}</text>"#,
            x + 20.0,
            COLORS[k % COLORS.len()],
            x + 26.0,
            y + 4.0,
            format_significant(d, 6)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn stem(path: &Path) -> PathBuf {
    match path.extension() {
        Some(ext) if ["csv", "json", "svg"].contains(&ext.to_string_lossy().as_ref()) => {
            path.with_extension("")
        }
        _ => path.to_path_buf(),
    }
}

fn svg_path(base: &Path, transmission: f64) -> PathBuf {
    let name = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    base.with_file_name(format!(
        "{name}_T{}.svg",
        format_significant(transmission, 6)
    ))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the requested formats next to `spec.output_path` and returns the
/// created files: `<stem>.csv`, `<stem>.json`, `<stem>_T<T>.svg`.
pub fn emit_outputs(records: &[SweepRecord], spec: &SweepSpec) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(invalid("no records to emit"));
    }
    let base = stem(&spec.output_path);
    let mut written = Vec::new();
    for format in &spec.outputs {
        match format {
            OutputFormat::Csv => {
                let p = base.with_extension("csv");
                write(&p, &to_csv(records))?;
                written.push(p);
            }
            OutputFormat::Json => {
                let p = base.with_extension("json");
                write(&p, &to_json(records)?)?;
                written.push(p);
            }
            OutputFormat::Svg => {
                let mut ts: Vec<f64> = Vec::new();
                for r in records {
                    if !ts.contains(&r.transmission) {
                        ts.push(r.transmission);
                    }
                }
                for t in ts {
                    let p = svg_path(&base, t);
                    write(&p, &to_svg(records, t))?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}
