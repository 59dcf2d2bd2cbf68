//! Deterministic artifact formatting: 17 significant digits, comma
//! separators, LF line endings.

/// 17 significant digits in scientific notation; the shortest
/// representation that round-trips any f64 and keeps artifacts
/// byte-reproducible.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column names for a vector quantity: "x" in 1D, "x1".."x3" otherwise.
pub fn coord_headers(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=dim).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Assemble a CSV document (header + rows, LF endings).
pub fn csv_document(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
