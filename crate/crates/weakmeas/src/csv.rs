//! CSV output: `#` header lines carrying the resolved config, one column
//! line, `\n` endings, reals with 17 significant digits.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped,
/// exponent form outside [1e-5, 1e17). Non-finite values print as `nan`,
/// `inf`, `-inf`.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..P).contains(&exp) {
        let decimals = (P - 1 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, v))
    } else {
        let m = strip_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.strip_suffix('.').unwrap_or(t).to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => fmt_real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

/// Output of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Rendered as `# key=value` lines, in order.
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self { header, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column values as reals; `None` if the column is missing.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_real().unwrap_or(f64::NAN)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes to `path`, or to standard output for `-`.
    pub fn write(&self, path: &str) -> io::Result<()> {
        let text = self.render();
        if path == "-" {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        } else {
            std::fs::write(Path::new(path), text)
        }
    }
}

/// `# key=value` pairs from the leading comment block of a CSV or dump.
pub fn parse_header(text: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        for tok in rest.split_whitespace() {
            if let Some((k, v)) = tok.split_once('=') {
                out.push((k.to_string(), v.to_string()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_real(0.1), "0.10000000000000001");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_real(1e-4), "0.0001");
        assert_eq!(fmt_real(1e17), "1e+17");
        assert_eq!(fmt_real(123456.0), "123456");
        assert_eq!(fmt_real(f64::NAN), "nan");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_real(-0.0), "-0");
    }

    #[test]
    fn round_trips_through_parse() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 6.02214076e23, -1.602e-19, 5e-324, f64::MAX] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn render_layout() {
        let mut t = Table::new(vec![("command".into(), "xi".into())], &["a", "b"]);
        t.push(vec![Cell::Int(1), Cell::Real(0.5)]);
        assert_eq!(t.render(), "# command=xi\na,b\n1,0.5\n");
        assert_eq!(parse_header(&t.render()), vec![("command".to_string(), "xi".to_string())]);
    }
}
