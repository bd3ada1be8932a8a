//! CSV and metadata writers.
//!
//! Schema: header `t,policy,mean_regret,stderr,replications`, one row per
//! (checkpoint, trace), rows sorted by policy tag then `t`, floats printed
//! with 9 significant digits, LF line endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::runner::RegretTrace;

pub const CSV_HEADER: &str = "t,policy,mean_regret,stderr,replications";

/// `printf("%.9g")`: 9 significant digits, trailing zeros dropped,
/// scientific notation outside `1e-4 <= |x| < 1e9`.
pub fn format_significant(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exponent) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (DIGITS - 1 - exponent).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(traces: &[RegretTrace], mut out: W) -> std::io::Result<()> {
    let mut order: Vec<&RegretTrace> = traces.iter().collect();
    order.sort_by(|a, b| a.policy.cmp(&b.policy));
    writeln!(out, "{CSV_HEADER}")?;
    for trace in order {
        for (i, &t) in trace.checkpoints.iter().enumerate() {
            writeln!(
                out,
                "{t},{},{},{},{}",
                trace.policy,
                format_significant(trace.mean_regret[i]),
                format_significant(trace.stderr[i]),
                trace.replications
            )?;
        }
    }
    out.flush()
}

/// Writes the traces to `path`.
pub fn emit_csv(traces: &[RegretTrace], path: &Path) -> Result<()> {
    if traces.is_empty() {
        return Err(Error::Config("nothing to write: no traces".into()));
    }
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv(traces, BufWriter::new(file)).map_err(io_err)
}

/// `results.csv` -> `results.meta.toml`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.toml")
}

/// `results.csv`, 0.125 -> `results_eps0.125.csv`.
pub fn sweep_csv_path(base: &Path, epsilon: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_eps{epsilon}.{ext}"))
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    scenario: &'a str,
    reward_means: &'a [f64],
    schemes: Vec<[f64; 2]>,
    policies: Vec<&'static str>,
    horizon: u64,
    replications: u64,
    master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    notes: &'a [String],
}

/// Sidecar describing how a CSV was produced. `schemes` are those of the
/// config's scenario unless `epsilon` says otherwise.
pub fn emit_metadata(path: &Path, config: &ExperimentConfig, epsilon: Option<f64>, notes: &[String]) -> Result<()> {
    let scheme_pairs = match epsilon {
        Some(eps) => {
            let s = crate::corruption::ldp_scheme(eps)?;
            vec![[s.p00(), s.p11()]; config.scenario.reward_means.len()]
        }
        None => config.scenario.schemes.iter().map(|s| [s.p00(), s.p11()]).collect(),
    };
    let meta = Metadata {
        scenario: &config.scenario.name,
        reward_means: &config.scenario.reward_means,
        schemes: scheme_pairs,
        policies: config.policies.iter().map(|p| p.tag()).collect(),
        horizon: config.horizon,
        replications: config.replications,
        master_seed: config.master_seed,
        epsilon,
        notes,
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
