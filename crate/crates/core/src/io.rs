//! Plain-text output helpers shared by the library and the CLI.

use std::io::Write;

use num_complex::Complex64;

use crate::grid::Grid1D;

/// Fixed-point decimal with 17 significant digits; no exponent notation.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (16 - magnitude).clamp(0, 340) as usize;
    format!("{v:.decimals$}")
}

/// CSV with header `x,re,im`, one row per grid point.
pub fn write_samples_csv<W: Write>(mut out: W, grid: &Grid1D, values: &[Complex64]) -> std::io::Result<()> {
    writeln!(out, "x,re,im")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            format_decimal(grid.point(i)),
            format_decimal(v.re),
            format_decimal(v.im)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_keeps_digits() {
        let s = format_decimal(1.234_567_890_123_456_7e-7);
        assert!(!s.contains('e'));
        let parsed: f64 = s.parse().unwrap();
        assert!((parsed - 1.234_567_890_123_456_7e-7).abs() < 1e-22);
        assert_eq!(format_decimal(0.0), "0");
        assert_eq!(format_decimal(-2.5), "-2.5000000000000000");
    }
}
