use std::fmt::Write;

use thiserror::Error;

use super::problem::{LpProblem, RowSense};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Whitespace-separated MPS; names of any length without spaces.
    FreeMps,
    /// Column-positioned MPS; names limited to 8 characters.
    FixedMps,
    /// CPLEX-style LP text.
    LpText,
}

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("name `{0}` is longer than 8 characters, fixed MPS cannot hold it")]
    NameTooLong(String),
    #[error("name `{0}` contains whitespace")]
    Whitespace(String),
}

const OBJ: &str = "obj";

/// Shortest text that parses back to the same `f64`, switching to exponent
/// form for very large or small magnitudes.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// At most 12 characters, as fixed MPS number fields require.
fn num12(v: f64) -> String {
    let s = num(v);
    if s.len() <= 12 {
        return s;
    }
    (0..12)
        .rev()
        .map(|p| format!("{v:.p$e}"))
        .find(|s| s.len() <= 12)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

fn check_names(lp: &LpProblem, max_len: Option<usize>) -> Result<(), ExportError> {
    let problem = lp.name().to_string();
    for name in lp.col_names().iter().chain(lp.row_names()).chain([&problem]) {
        if name.chars().any(char::is_whitespace) {
            return Err(ExportError::Whitespace(name.clone()));
        }
        if let Some(max) = max_len {
            if name.chars().count() > max {
                return Err(ExportError::NameTooLong(name.clone()));
            }
        }
    }
    Ok(())
}

fn row_code(s: RowSense) -> &'static str {
    match s {
        RowSense::Eq => "E",
        RowSense::Le => "L",
        RowSense::Ge => "G",
    }
}

/// Bound records for one column. The default `[0, ∞)` needs none.
fn bounds(l: f64, u: f64) -> Vec<(&'static str, Option<f64>)> {
    match (l, u) {
        (l, u) if l == u => vec![("FX", Some(l))],
        (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => vec![("FR", None)],
        (l, u) if l == f64::NEG_INFINITY => vec![("MI", None), ("UP", Some(u))],
        (l, u) => {
            let mut v = Vec::new();
            if l != 0.0 {
                v.push(("LO", Some(l)));
            }
            if u != f64::INFINITY {
                v.push(("UP", Some(u)));
            }
            v
        }
    }
}

fn mps(lp: &LpProblem, fixed: bool) -> String {
    let mut out = String::new();
    let rec = |out: &mut String, code: &str, a: &str, b: &str, v: Option<f64>| {
        if fixed {
            let mut line = format!(" {code:<2} {a:<8}  {b:<8}");
            if let Some(v) = v {
                write!(line, "  {:>12}", num12(v)).unwrap();
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
        } else {
            let mut line = format!(" {code} {a} {b}");
            if let Some(v) = v {
                write!(line, " {}", num(v)).unwrap();
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
        }
    };

    writeln!(out, "NAME          {}", lp.name()).unwrap();
    writeln!(out, "OBJSENSE\n    MIN").unwrap();
    writeln!(out, "ROWS").unwrap();
    writeln!(out, " N  {OBJ}").unwrap();
    for r in 0..lp.num_rows() {
        writeln!(out, " {}  {}", row_code(lp.senses()[r]), lp.row_name(r)).unwrap();
    }
    writeln!(out, "COLUMNS").unwrap();
    for j in 0..lp.num_cols() {
        let name = lp.col_name(j);
        let c = lp.objective()[j];
        let (rows, vals) = lp.column(j);
        if c != 0.0 || rows.is_empty() {
            rec(&mut out, "", name, OBJ, Some(c));
        }
        for (&r, &v) in rows.iter().zip(vals) {
            rec(&mut out, "", name, lp.row_name(r), Some(v));
        }
    }
    writeln!(out, "RHS").unwrap();
    for r in 0..lp.num_rows() {
        let b = lp.rhs()[r];
        if b != 0.0 {
            rec(&mut out, "", "RHS", lp.row_name(r), Some(b));
        }
    }
    writeln!(out, "BOUNDS").unwrap();
    for j in 0..lp.num_cols() {
        for (code, v) in bounds(lp.lower()[j], lp.upper()[j]) {
            rec(&mut out, code, "BND", lp.col_name(j), v);
        }
    }
    writeln!(out, "ENDATA").unwrap();
    out
}

fn lp_text(lp: &LpProblem) -> String {
    const PER_LINE: usize = 6;
    let mut out = String::new();
    let expr = |out: &mut String, terms: &[(usize, f64)]| {
        if terms.is_empty() {
            out.push_str(" 0");
        }
        for (k, &(j, v)) in terms.iter().enumerate() {
            if k > 0 && k % PER_LINE == 0 {
                out.push_str("\n   ");
            }
            let sign = if v < 0.0 { '-' } else { '+' };
            if k == 0 && sign == '+' {
                write!(out, " {} {}", num(v.abs()), lp.col_name(j)).unwrap();
            } else {
                write!(out, " {sign} {} {}", num(v.abs()), lp.col_name(j)).unwrap();
            }
        }
    };

    writeln!(out, "\\ Problem: {}", lp.name()).unwrap();
    writeln!(out, "Minimize").unwrap();
    write!(out, " {OBJ}:").unwrap();
    let obj: Vec<(usize, f64)> = lp
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    expr(&mut out, &obj);
    out.push('\n');

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_rows()];
    for (r, j, v) in lp.triplets() {
        rows[r].push((j, v));
    }
    writeln!(out, "Subject To").unwrap();
    for (r, terms) in rows.iter().enumerate() {
        write!(out, " {}:", lp.row_name(r)).unwrap();
        expr(&mut out, terms);
        let op = match lp.senses()[r] {
            RowSense::Eq => "=",
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
        };
        writeln!(out, " {op} {}", num(lp.rhs()[r])).unwrap();
    }

    writeln!(out, "Bounds").unwrap();
    for j in 0..lp.num_cols() {
        let (l, u, name) = (lp.lower()[j], lp.upper()[j], lp.col_name(j));
        match (l, u) {
            (0.0, f64::INFINITY) => {}
            (l, u) if l == u => writeln!(out, " {name} = {}", num(l)).unwrap(),
            (f64::NEG_INFINITY, f64::INFINITY) => writeln!(out, " {name} free").unwrap(),
            (l, f64::INFINITY) => writeln!(out, " {name} >= {}", num(l)).unwrap(),
            (f64::NEG_INFINITY, u) => writeln!(out, " -inf <= {name} <= {}", num(u)).unwrap(),
            (l, u) => writeln!(out, " {} <= {name} <= {}", num(l), num(u)).unwrap(),
        }
    }
    writeln!(out, "End").unwrap();
    out
}

/// Writes `lp` as interchange text. Output depends only on the LP, so
/// repeated exports are byte-identical.
pub fn export_interchange(lp: &LpProblem, format: Format) -> Result<String, ExportError> {
    match format {
        Format::FreeMps => {
            check_names(lp, None)?;
            Ok(mps(lp, false))
        }
        Format::FixedMps => {
            check_names(lp, Some(8))?;
            Ok(mps(lp, true))
        }
        Format::LpText => {
            check_names(lp, None)?;
            Ok(lp_text(lp))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpBuilder;

    fn one_var() -> LpProblem {
        let mut b = LpBuilder::new("one");
        let x = b.add_col("x", -1.0, 0.0, 1.0);
        b.add_row("r", RowSense::Le, 5.0, &[(x, 1.0)]);
        b.build().unwrap()
    }

    #[test]
    fn single_bound_and_objsense() {
        let text = export_interchange(&one_var(), Format::FreeMps).unwrap();
        assert_eq!(text.matches("OBJSENSE").count(), 1);
        assert_eq!(text.matches(" UP ").count(), 1);
        assert!(text.contains(" UP BND x 1\n"), "{text}");
    }

    #[test]
    fn exports_are_byte_identical() {
        for f in [Format::FreeMps, Format::FixedMps, Format::LpText] {
            assert_eq!(
                export_interchange(&one_var(), f).unwrap(),
                export_interchange(&one_var(), f).unwrap()
            );
        }
    }

    #[test]
    fn fixed_mps_rejects_long_names() {
        let mut b = LpBuilder::new("p");
        let x = b.add_col("a_long_name", 1.0, 0.0, f64::INFINITY);
        b.add_row("r", RowSense::Ge, 1.0, &[(x, 1.0)]);
        assert_eq!(
            export_interchange(&b.build().unwrap(), Format::FixedMps),
            Err(ExportError::NameTooLong("a_long_name".into()))
        );
    }

    #[test]
    fn fixed_numbers_fit_their_field() {
        for v in [0.1 + 0.2, -1.0 / 3.0, 123456.789012345, 1e-300, -2.5e200] {
            let s = num12(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-6 * v.abs(), "{v} -> {s}");
        }
    }

    #[test]
    fn lp_text_lists_rows_and_bounds() {
        let mut b = LpBuilder::new("t");
        let x = b.add_col("x", 2.0, f64::NEG_INFINITY, f64::INFINITY);
        let y = b.add_col("y", -1.0, -1.0, 4.0);
        b.add_row("c1", RowSense::Ge, 1.0, &[(x, 1.0), (y, -3.0)]);
        let text = export_interchange(&b.build().unwrap(), Format::LpText).unwrap();
        assert!(text.contains(" obj: 2 x - 1 y\n"), "{text}");
        assert!(text.contains(" c1: 1 x - 3 y >= 1\n"), "{text}");
        assert!(text.contains(" x free\n"));
        assert!(text.contains(" -1 <= y <= 4\n"));
    }
}
