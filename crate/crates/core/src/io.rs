//! Plain-text output helpers shared by the CSV writers.

use std::io::{self, Write};

/// Float with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `# key=value` comment lines.
pub fn write_comments<W: Write>(w: &mut W, entries: &[(String, String)]) -> io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Data lines of a CSV file: everything that is not a `#` comment.
pub fn body_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 1.0 + f64::EPSILON] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }
}
