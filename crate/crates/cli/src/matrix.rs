//! Matrix files: first line `N`, then `N` whitespace-separated rows.
//! Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use geofreq::modal::{classify_spectrum, real_modal_form_from};
use nalgebra::DMatrix;

use crate::error::{CliError, Result};
use crate::output::modal_report;

pub fn parse_matrix(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let err = |line: usize, message: String| CliError::Parse {
        origin: origin.to_string(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (first, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file, expected the dimension N".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| err(first, format!("expected the dimension N, found `{header}`")))?;
    if n == 0 {
        return Err(err(first, "dimension must be at least 1".into()));
    }

    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let (line, content) = lines
            .next()
            .ok_or_else(|| err(first, format!("expected {n} rows, found {row}")))?;
        let values: Vec<f64> = content
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(line, format!("`{tok}` is not a finite number")))
            })
            .collect::<Result<_>>()?;
        if values.len() != n {
            return Err(err(
                line,
                format!("expected {n} entries, found {}", values.len()),
            ));
        }
        data.extend(values);
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, format!("unexpected content after {n} rows")));
    }
    Ok(DMatrix::from_row_slice(n, n, &data))
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

/// Text report of the spectrum and real modal form of `a`.
pub fn analyze_matrix(a: &DMatrix<f64>) -> Result<String> {
    let spectrum = classify_spectrum(a)?;
    let form = real_modal_form_from(a, &spectrum);
    Ok(modal_report(&spectrum, &form))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_blank_lines() {
        let m = parse_matrix("# rotation\n2\n\n0 -1\n1 0\n", "m").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let e = parse_matrix("2\n1 2\n3 x\n", "m.txt")
            .unwrap_err()
            .to_string();
        assert_eq!(e, "m.txt: line 3: `x` is not a finite number");
        let e = parse_matrix("2\n1 2 3\n3 4\n", "m")
            .unwrap_err()
            .to_string();
        assert!(
            e.contains("line 2") && e.contains("expected 2 entries"),
            "{e}"
        );
        let e = parse_matrix("3\n1 2 3\n", "m").unwrap_err().to_string();
        assert!(e.contains("expected 3 rows, found 1"), "{e}");
        let e = parse_matrix("1\n1\n2\n", "m").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn rotation_generator_report() {
        let a = parse_matrix("2\n0 -1\n1 0\n", "m").unwrap();
        let report = analyze_matrix(&a).unwrap();
        assert!(report.contains("m1 pair 0.0 1.0"), "{report}");
    }

    #[test]
    fn identity_report_has_unit_g() {
        let a = DMatrix::<f64>::identity(3, 3);
        let report = analyze_matrix(&a).unwrap();
        assert!(
            report.contains("G\n  1.0 0.0 0.0\n  0.0 1.0 0.0\n  0.0 0.0 1.0\n"),
            "{report}"
        );
    }

    #[test]
    fn jordan_block_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let err = analyze_matrix(&a).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("eigenvalue -1"), "{err}");
    }
}
