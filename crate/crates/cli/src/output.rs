use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Column;
use crate::sweep::SweepRow;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// exponent notation outside `1e-4 ≤ |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Rounding first fixes the exponent (9.9999999999996 → 1e1).
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn value(row: &SweepRow, col: Column) -> f64 {
    match col {
        Column::Param => row.param,
        Column::ExpX => row.exp_x,
        Column::ExpY => row.exp_y,
        Column::ExpZ => row.exp_z,
        Column::FidVsInput => row.fid_vs_input,
        Column::FidVsTheory => row.fid_vs_theory,
        Column::Entropy => row.entropy,
        Column::PlanDeviation => row.plan_deviation,
    }
}

pub fn render_csv(rows: &[SweepRow], columns: &[Column]) -> String {
    let mut out = columns.iter().map(|c| c.name()).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = columns.iter().map(|&c| format_sig(value(row, c))).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(rows: &[SweepRow], columns: &[Column]) -> String {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = columns
                .iter()
                .map(|&c| (c.name().to_string(), Value::from(value(row, c))))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&Value::Array(array)).expect("rows serialize");
    text.push('\n');
    text
}

fn write_to(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display()))),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Writes CSV to `path`, or stdout when `path` is `None`.
pub fn emit_csv(rows: &[SweepRow], columns: &[Column], path: Option<&Path>) -> io::Result<()> {
    write_to(path, &render_csv(rows, columns))
}

pub fn emit_json(rows: &[SweepRow], columns: &[Column], path: Option<&Path>) -> io::Result<()> {
    write_to(path, &render_json(rows, columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(param: f64) -> SweepRow {
        SweepRow {
            param,
            exp_x: 1.0,
            exp_y: -0.0,
            exp_z: 2.0 / 3.0,
            fid_vs_input: 1.0,
            fid_vs_theory: 0.999999999999999,
            entropy: 0.0,
            plan_deviation: 1.234e-16,
        }
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.05), "0.05");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_sig(0.15000000000000002), "0.15");
        assert_eq!(format_sig(0.999999999999999), "1");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(1.234e-16), "1.234e-16");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(0.00001), "1e-05");
        assert_eq!(format_sig(1e12), "1e+12");
        assert_eq!(format_sig(884736.0), "884736");
        assert_eq!(format_sig(13.0909090909090909), "13.0909090909");
    }

    #[test]
    fn csv_layout() {
        assert_eq!(
            render_csv(&[], &Column::ALL),
            "param,exp_x,exp_y,exp_z,fid_vs_input,fid_vs_theory,entropy,plan_deviation\n"
        );
        let text = render_csv(&[row(0.0)], &Column::ALL);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0,1,0,0.666666666667,1,1,0,1.234e-16"
        );
        let text = render_csv(&[row(0.5)], &[Column::Param, Column::ExpZ]);
        assert_eq!(text, "param,exp_z\n0.5,0.666666666667\n");
    }

    #[test]
    fn json_layout() {
        let text = render_json(&[row(0.25)], &[Column::Param, Column::ExpX]);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v[0]["param"], 0.25);
        assert_eq!(v[0]["exp_x"], 1.0);
        assert!(v[0].get("exp_y").is_none());
    }

    #[test]
    fn write_errors_mention_path() {
        let err = emit_csv(&[], &Column::ALL, Some(Path::new("/nonexistent/dir/out.csv"))).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn file_output_is_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let rows = [row(0.0), row(0.5)];
        emit_csv(&rows, &Column::ALL, Some(&a)).unwrap();
        emit_csv(&rows, &Column::ALL, Some(&b)).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}
