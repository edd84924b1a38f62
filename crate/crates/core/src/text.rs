//! Number formatting shared by every CSV writer.

/// Shortest round-trip form; scientific notation outside `[1e-3, 1e7)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-3..1e7).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}
