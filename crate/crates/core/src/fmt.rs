//! Number formatting shared by every CSV and report writer.

/// Formats with 17 significant digits, which round-trips any `f64`.
pub fn f64_17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Joins values into one CSV record (no trailing newline).
pub fn record(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| f64_17(v))
        .collect::<Vec<_>>()
        .join(",")
}
