//! CSV trace and manifest writing.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), `.` decimal
//! separator and LF line endings, so identical runs produce byte-identical
//! files. The wall-clock column is the one intentionally non-reproducible
//! field; `no_timing` zeroes it for golden comparisons.

use quasivi::optim::TraceRecord;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

pub const TRACE_HEADER: &str = "t,N_t,elbo,grad_norm,trvar,wall_ns";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one optimization trace; `trvar` holds the per-step gradient
/// variance where it was computed.
pub fn write_trace(
    path: &Path,
    trace: &[TraceRecord],
    trvar: &BTreeMap<usize, f64>,
    no_timing: bool,
) -> std::io::Result<()> {
    let mut out = String::with_capacity(64 * trace.len());
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in trace {
        let tv = trvar
            .get(&rec.t)
            .map(|&v| fmt_f64(v))
            .unwrap_or_else(|| "NaN".to_string());
        let wall = if no_timing { 0 } else { rec.wall_ns };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            rec.t,
            rec.n_t,
            fmt_f64(rec.elbo_est),
            fmt_f64(rec.grad_norm),
            tv,
            wall
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Writes the resolved configuration alongside the seed and version.
pub fn write_manifest(path: &Path, resolved_config: &str) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&format!("artifact_version = {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(resolved_config);
    atomic_write(path, out.as_bytes())
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_17_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.01), "-1.0000000000000000e-2");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}
